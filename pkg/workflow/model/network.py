#!/usr/bin/env python3
"""Attention temporal graph classifier: GCN -> GRU per frame, attention over time, linear head."""

import logging
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from workflow.errors import ContractError
from workflow.model.layers import classification_head, gcn_forward, gru_step, temporal_attention
from workflow.model.tensor import Tensor, no_grad, parameter

logger = logging.getLogger('gaitlab.model.network')


@dataclass(eq=False)
class ModelParams:
    """Trainable weights plus the optimizer moments that belong to them.

    Linear weights multiply from the right: ``x @ W`` with ``W`` of shape
    (fan_in, fan_out).
    """
    gcn_weight: Tensor
    gcn_bias: Tensor
    gru_update_weight: Tensor
    gru_update_bias: Tensor
    gru_reset_weight: Tensor
    gru_reset_bias: Tensor
    gru_candidate_weight: Tensor
    gru_candidate_bias: Tensor
    attention_weight: Tensor
    head_weight: Tensor
    head_bias: Tensor
    optimizer_state: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name != 'optimizer_state')

    def named_tensors(self) -> Iterator[Tuple[str, Tensor]]:
        for name in self.names():
            yield name, getattr(self, name)

    @property
    def input_dim(self) -> int:
        return int(self.gcn_weight.shape[0])

    @property
    def hidden_size(self) -> int:
        return int(self.gcn_weight.shape[1])

    def zero_grad(self):
        for _, tensor in self.named_tensors():
            tensor.zero_grad()

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {name: tensor.value.copy() for name, tensor in self.named_tensors()}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> 'ModelParams':
        missing = [name for name in cls.names() if name not in arrays]
        if missing:
            raise ContractError(f"missing parameters: {missing}")
        params = cls(**{name: parameter(arrays[name]) for name in cls.names()})
        params.check_shapes()
        return params

    def check_shapes(self):
        d, h = self.gcn_weight.shape if self.gcn_weight.ndim == 2 else (0, 0)
        expected = {
            'gcn_weight': (d, h), 'gcn_bias': (h,),
            'gru_update_weight': (2 * h, h), 'gru_update_bias': (h,),
            'gru_reset_weight': (2 * h, h), 'gru_reset_bias': (h,),
            'gru_candidate_weight': (2 * h, h), 'gru_candidate_bias': (h,),
            'attention_weight': (h,), 'head_weight': (h,), 'head_bias': (),
        }
        if h < 1 or d < 1:
            raise ContractError(f"gcn_weight must be a non-empty matrix, got {self.gcn_weight.shape}")
        for name, tensor in self.named_tensors():
            if tensor.shape != expected[name]:
                raise ContractError(f"{name} has shape {tensor.shape}, expected {expected[name]}")


def init_params(input_dim: int, hidden_size: int, seed: int) -> ModelParams:
    """Weights uniform in ±1/sqrt(fan_in), biases zero; draws in field order"""
    if input_dim < 1 or hidden_size < 1:
        raise ContractError(f"invalid model size: input_dim={input_dim}, hidden_size={hidden_size}")
    rng = np.random.default_rng(seed)

    def weight(*shape):
        bound = 1.0 / np.sqrt(shape[0])
        return parameter(rng.uniform(-bound, bound, size=shape))

    def zeros(*shape):
        return parameter(np.zeros(shape))

    h = hidden_size
    return ModelParams(
        gcn_weight=weight(input_dim, h), gcn_bias=zeros(h),
        gru_update_weight=weight(2 * h, h), gru_update_bias=zeros(h),
        gru_reset_weight=weight(2 * h, h), gru_reset_bias=zeros(h),
        gru_candidate_weight=weight(2 * h, h), gru_candidate_bias=zeros(h),
        attention_weight=weight(h), head_weight=weight(h), head_bias=zeros(),
    )


def forward_batch(params: ModelParams, features: np.ndarray, adjacency: np.ndarray) -> Tensor:
    """Logits of shape (B,) for features shaped (B, N, T, D)"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 4:
        raise ContractError(f"batched features must be (B, N, T, D), got shape {features.shape}")
    batch, nodes, steps, dim = features.shape
    if dim != params.input_dim:
        raise ContractError(f"features have {dim} coordinates, model expects {params.input_dim}")
    if steps < 1:
        raise ContractError("a sample needs at least one frame")

    h = Tensor(np.zeros((batch, nodes, params.hidden_size)))
    hidden: List[Tensor] = []
    for t in range(steps):
        x_t = gcn_forward(features[:, :, t, :], adjacency, params.gcn_weight, params.gcn_bias)
        h = gru_step(h, x_t, params)
        hidden.append(h)
    context, _ = temporal_attention(hidden, params.attention_weight)
    return classification_head(context, params.head_weight, params.head_bias)


def forward(params: ModelParams, sample) -> Tensor:
    """Scalar logit for one GraphSample"""
    return forward_batch(params, sample.features[None], sample.adjacency).reshape(())


def stack_features(samples: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """Features (B, N, T, D) and labels (B,) of samples sharing one graph"""
    features = np.stack([s.features for s in samples])
    labels = np.asarray([s.label for s in samples], dtype=np.float64)
    return features, labels


def predict_logits(params: ModelParams, samples: Sequence, batch_size: int = 64) -> np.ndarray:
    """Logits for every sample without recording gradients"""
    if not samples:
        return np.zeros(0)
    adjacency = samples[0].adjacency
    logits = []
    with no_grad():
        for start in range(0, len(samples), batch_size):
            features, _ = stack_features(samples[start:start + batch_size])
            logits.append(forward_batch(params, features, adjacency).value)
    return np.concatenate(logits)
