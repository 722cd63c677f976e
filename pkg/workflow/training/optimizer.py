#!/usr/bin/env python3
"""AdamW with decoupled weight decay.

    m_t = β1 m + (1 - β1) g
    v_t = β2 v + (1 - β2) g²
    m̂ = m_t / (1 - β1^t),  v̂ = v_t / (1 - β2^t)
    θ_t = θ - lr (m̂ / (√v̂ + ε) + λ θ)
"""

import logging
from typing import Dict, Tuple

import numpy as np

from workflow.context import TrainConfig
from workflow.errors import ContractError
from workflow.model.network import ModelParams

logger = logging.getLogger('gaitlab.training.optimizer')

Arrays = Dict[str, np.ndarray]


def init_state(params: Arrays) -> dict:
    return {
        'step': 0,
        'm': {name: np.zeros_like(value) for name, value in params.items()},
        'v': {name: np.zeros_like(value) for name, value in params.items()},
    }


def adamw_step(params: Arrays, grads: Arrays, state: dict, t: int, config: TrainConfig) -> Tuple[Arrays, dict]:
    """Pure AdamW update at step ``t`` (1-based); inputs are left untouched"""
    if t < 1:
        raise ContractError(f"step index must start at 1, got {t}")
    beta1, beta2 = config.betas
    lr, wd, eps = config.learning_rate, config.weight_decay, config.epsilon
    new_params, new_m, new_v = {}, {}, {}
    for name, theta in params.items():
        theta = np.asarray(theta, dtype=np.float64)
        grad = np.asarray(grads.get(name, np.zeros_like(theta)), dtype=np.float64)
        m, v = state['m'].get(name), state['v'].get(name)
        if m is None or v is None:
            raise ContractError(f"optimizer state has no moments for {name}")
        if not (grad.shape == theta.shape == m.shape == v.shape):
            raise ContractError(f"{name}: shapes differ between parameter {theta.shape}, "
                                f"gradient {grad.shape} and state {m.shape}/{v.shape}")
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[name] = theta - lr * (m_hat / (np.sqrt(v_hat) + eps) + wd * theta)
        new_m[name], new_v[name] = m, v
    return new_params, {'step': t, 'm': new_m, 'v': new_v}


class AdamW:
    """Applies ``adamw_step`` in place to a ModelParams, keeping moments in its optimizer state"""

    def __init__(self, params: ModelParams, config: TrainConfig):
        self.params = params
        self.config = config
        if not params.optimizer_state:
            params.optimizer_state.update(init_state(params.to_arrays()))

    @property
    def step_count(self) -> int:
        return int(self.params.optimizer_state['step'])

    def step(self):
        grads: Arrays = {}
        for name, tensor in self.params.named_tensors():
            grads[name] = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.value)
        t = self.step_count + 1
        updated, state = adamw_step(self.params.to_arrays(), grads, self.params.optimizer_state, t, self.config)
        for name, tensor in self.params.named_tensors():
            tensor.value = updated[name]
            tensor.zero_grad()
        self.params.optimizer_state.update(state)
