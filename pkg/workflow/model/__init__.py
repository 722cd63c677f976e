"""
Spatiotemporal graph classifier built on a small reverse-mode autodiff engine.
"""

from workflow.model.tensor import Tensor, bce_with_logits, concat, einsum, no_grad, parameter, stack
from workflow.model.layers import bce_loss, classification_head, gcn_forward, gru_step, temporal_attention
from workflow.model.network import ModelParams, forward, forward_batch, init_params, predict_logits
from workflow.model.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    'Tensor',
    'bce_with_logits',
    'concat',
    'einsum',
    'no_grad',
    'parameter',
    'stack',
    'bce_loss',
    'classification_head',
    'gcn_forward',
    'gru_step',
    'temporal_attention',
    'ModelParams',
    'forward',
    'forward_batch',
    'init_params',
    'predict_logits',
    'load_checkpoint',
    'save_checkpoint',
]
