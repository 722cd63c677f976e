#!/usr/bin/env python3

import logging
from typing import Dict, Optional

import numpy as np

logger = logging.getLogger('gaitlab.training.early_stopping')


class EarlyStopping:
    """Stops training when the validation loss has not improved for ``patience`` epochs.

    An epoch counts as progress only when the loss drops more than
    ``min_delta`` below the loss of the last progressing epoch. The best
    checkpoint always follows the lowest loss seen.
    """

    def __init__(self, patience: int = 6, min_delta: float = 1e-6):
        self.patience = patience
        self.min_delta = min_delta
        self.counter = 0
        self.early_stop = False
        self.reference_loss = np.inf
        self.val_loss_min = np.inf
        self.best_epoch = 0
        self.best_state: Optional[Dict[str, np.ndarray]] = None

    def __call__(self, val_loss: float, epoch: int, state: Optional[Dict[str, np.ndarray]] = None) -> bool:
        """Record one epoch; returns True when training should stop"""
        if val_loss < self.val_loss_min:
            self.val_loss_min = val_loss
            self.best_epoch = epoch
            self.best_state = state
        if val_loss < self.reference_loss - self.min_delta:
            self.reference_loss = val_loss
            self.counter = 0
        else:
            self.counter += 1
            logger.debug(f"EarlyStopping counter: {self.counter} out of {self.patience}")
            if self.counter >= self.patience:
                self.early_stop = True
        return self.early_stop
