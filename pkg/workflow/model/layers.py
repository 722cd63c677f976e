#!/usr/bin/env python3
"""Graph convolution, gated recurrent step, temporal attention and loss.

Node tensors are (N, F) for a single graph or (B, N, F) for a batch.
"""

from typing import Sequence, Tuple

import numpy as np

from workflow.errors import ContractError
from workflow.model.tensor import Tensor, bce_with_logits, concat, constant, einsum, stack


def _batch_prefix(x: Tensor) -> str:
    if x.ndim == 2:
        return ''
    if x.ndim == 3:
        return 'b'
    raise ContractError(f"node tensor must be (N, F) or (B, N, F), got shape {x.shape}")


def _check_linear(x: Tensor, weight: Tensor, bias: Tensor, name: str):
    if weight.ndim != 2 or x.shape[-1] != weight.shape[0]:
        raise ContractError(f"{name}: input width {x.shape[-1]} does not match weight {weight.shape}")
    if bias.shape != (weight.shape[1],):
        raise ContractError(f"{name}: bias shape {bias.shape} does not match weight {weight.shape}")


def linear(x: Tensor, weight: Tensor, bias: Tensor, name: str = 'linear') -> Tensor:
    _check_linear(x, weight, bias, name)
    p = _batch_prefix(x)
    return einsum(f"{p}nf,fh->{p}nh", x, weight) + bias


def gcn_forward(x, adjacency, weight: Tensor, bias: Tensor) -> Tensor:
    """ReLU(Â X W + b)"""
    x, adjacency = constant(x), constant(adjacency)
    n = x.shape[-2] if x.ndim >= 2 else -1
    if adjacency.shape != (n, n):
        raise ContractError(f"adjacency shape {adjacency.shape} does not match {n} nodes")
    _check_linear(x, weight, bias, 'gcn')
    p = _batch_prefix(x)
    propagated = einsum(f"nm,{p}mf->{p}nf", adjacency, x)
    return linear(propagated, weight, bias, 'gcn').relu()


def gru_step(h_prev: Tensor, x_t: Tensor, params) -> Tensor:
    """One gated recurrent update over graph-convolved input.

    z = σ([x, h] W_z + b_z), r = σ([x, h] W_r + b_r),
    h̃ = tanh([x, r ⊙ h] W_h + b_h), h_t = z ⊙ h + (1 - z) ⊙ h̃
    """
    h_prev, x_t = constant(h_prev), constant(x_t)
    if h_prev.shape != x_t.shape:
        raise ContractError(f"hidden shape {h_prev.shape} does not match input {x_t.shape}")
    joined = concat([x_t, h_prev], axis=-1)
    z = linear(joined, params.gru_update_weight, params.gru_update_bias, 'gru update').sigmoid()
    r = linear(joined, params.gru_reset_weight, params.gru_reset_bias, 'gru reset').sigmoid()
    gated = concat([x_t, r * h_prev], axis=-1)
    candidate = linear(gated, params.gru_candidate_weight, params.gru_candidate_bias, 'gru candidate').tanh()
    return z * h_prev + (1.0 - z) * candidate


def temporal_attention(hidden: Sequence[Tensor], attention_weight: Tensor) -> Tuple[Tensor, Tensor]:
    """Softmax-weighted sum of hidden states over time.

    Scores are the projection of the node-mean hidden state at each step.
    Returns ``(context, weights)`` with context shaped like one hidden state
    and weights of shape (T,) or (B, T).
    """
    if len(hidden) == 0:
        raise ContractError("temporal attention needs at least one time step")
    states = stack(list(hidden), axis=-3)
    if attention_weight.shape != (states.shape[-1],):
        raise ContractError(f"attention weight {attention_weight.shape} does not match hidden size {states.shape[-1]}")
    p = 'b' if states.ndim == 4 else ''
    node_mean = states.mean(axis=-2)
    scores = einsum(f"{p}th,h->{p}t", node_mean, attention_weight)
    weights = scores.softmax(axis=-1)
    context = einsum(f"{p}t,{p}tnh->{p}nh", weights, states)
    return context, weights


def classification_head(context: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Mean-pool nodes, then one logit per graph"""
    if weight.shape != (context.shape[-1],) or bias.shape != ():
        raise ContractError(f"head weight {weight.shape} / bias {bias.shape} do not match hidden size")
    pooled = context.mean(axis=-2)
    p = 'b' if pooled.ndim == 2 else ''
    return einsum(f"{p}h,h->{p}", pooled, weight) + bias


def bce_loss(logit, label) -> Tensor:
    """Stable binary cross-entropy for one logit, or the mean over a batch"""
    logit = constant(logit)
    label = np.asarray(label, dtype=np.float64)
    if label.ndim == 0:
        label = np.broadcast_to(label, logit.shape)
    return bce_with_logits(logit, label)
