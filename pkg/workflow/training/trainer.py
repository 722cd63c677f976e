#!/usr/bin/env python3
"""Mini-batch training with AdamW and early stopping on validation loss."""

import math
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from utils import derive_seed
from workflow.context import TrainConfig
from workflow.errors import ProtocolError
from workflow.model.network import ModelParams, forward_batch, predict_logits, stack_features
from workflow.model.tensor import bce_with_logits
from workflow.training.early_stopping import EarlyStopping
from workflow.training.optimizer import AdamW

logger = logging.getLogger('gaitlab.training.trainer')

LOG_COLUMNS = ['epoch', 'train_loss', 'validation_loss']


@dataclass
class TrainingLog:
    train_losses: List[float] = field(default_factory=list)
    validation_losses: List[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.validation_losses)

    @property
    def best_validation_loss(self) -> float:
        return self.validation_losses[self.best_epoch - 1] if self.best_epoch else math.inf

    def record(self, train_loss: float, validation_loss: float):
        self.train_losses.append(float(train_loss))
        self.validation_losses.append(float(validation_loss))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'epoch': range(1, self.epochs_run + 1),
            'train_loss': self.train_losses,
            'validation_loss': self.validation_losses,
        }, columns=LOG_COLUMNS)

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, lineterminator='\n', float_format='%.9f')


def sample_losses(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    return np.maximum(z, 0.0) - z * labels + np.log1p(np.exp(-np.abs(z)))


def evaluate_loss(params: ModelParams, samples: Sequence) -> float:
    """Unweighted mean BCE over all samples"""
    logits = predict_logits(params, samples)
    labels = np.asarray([s.label for s in samples], dtype=np.float64)
    return math.fsum(sample_losses(logits, labels)) / len(samples)


def train_model(train_samples: Sequence, validation_samples: Sequence, config: TrainConfig,
                params: ModelParams) -> Tuple[ModelParams, TrainingLog]:
    """Train ``params`` in place and return a copy of the best checkpoint with the log.

    Training samples are reshuffled every epoch from a seed derived from
    ``config.seed``.
    """
    if not train_samples:
        raise ProtocolError("training split has no samples")
    if not validation_samples:
        raise ProtocolError("validation split has no samples")

    adjacency = train_samples[0].adjacency
    optimizer = AdamW(params, config)
    stopper = EarlyStopping(patience=config.patience, min_delta=config.min_delta)
    rng = np.random.default_rng(derive_seed(config.seed, "shuffle"))
    log = TrainingLog()

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_samples))
        batch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [train_samples[i] for i in order[start:start + config.batch_size]]
            features, labels = stack_features(batch)
            loss = bce_with_logits(forward_batch(params, features, adjacency), labels)
            params.zero_grad()
            loss.backward()
            optimizer.step()
            batch_losses.append(loss.item() * len(batch))

        train_loss = math.fsum(batch_losses) / len(train_samples)
        validation_loss = evaluate_loss(params, validation_samples)
        log.record(train_loss, validation_loss)
        logger.debug(f"Epoch {epoch}: train loss {train_loss:.6f}, validation loss {validation_loss:.6f}")

        if stopper(validation_loss, epoch, params.to_arrays()):
            log.stopped_early = True
            logger.debug(f"Early stopping after epoch {epoch}")
            break

    log.best_epoch = stopper.best_epoch
    best = ModelParams.from_arrays(stopper.best_state)
    return best, log
