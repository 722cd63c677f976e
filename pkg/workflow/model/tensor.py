#!/usr/bin/env python3
"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every operation returns a new ``Tensor`` that remembers its inputs and a
``_backward`` closure. ``backward()`` walks the recorded graph in reverse
topological order and accumulates gradients into every tensor that
requires them.
"""

import logging
from contextlib import contextmanager
from typing import List, Optional, Sequence, Tuple

import numpy as np

from workflow.errors import ContractError, NumericalError

logger = logging.getLogger('gaitlab.model.tensor')

_grad_enabled = True


@contextmanager
def no_grad():
    """Evaluate without recording the computation graph"""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def _as_array(value) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NumericalError("tensor values must be finite")
    return array


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A float64 array node in the computation graph"""

    def __init__(self, value, _children: Sequence['Tensor'] = (), _op: str = '', requires_grad: bool = False):
        self.value = _as_array(value)
        self.requires_grad = requires_grad or any(c.requires_grad for c in _children)
        self.grad: Optional[np.ndarray] = None
        self._backward = lambda: None
        self._prev = tuple(_children) if _grad_enabled else ()
        self._op = _op
        self._consumed = False

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self._op or 'leaf'}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def item(self) -> float:
        return float(self.value)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, grad: np.ndarray):
        if not self.requires_grad:
            return
        grad = np.asarray(grad, dtype=np.float64).reshape(self.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def _record(self, out: 'Tensor', backward) -> 'Tensor':
        if _grad_enabled and out.requires_grad:
            out._backward = backward
        return out

    # -- graph traversal --

    def backward(self):
        """Accumulate d(self)/d(leaf) into every tensor that requires gradients.

        Only scalar tensors can start a backward pass, and only once per
        forward pass.
        """
        if self.value.size != 1 or self.ndim > 1:
            raise ContractError(f"backward needs a scalar, got shape {self.shape}")
        if self._consumed:
            raise ContractError("backward was already called on this graph; run a new forward pass")
        self._consumed = True

        order = _topological_order(self)
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            node._backward()
            if node.grad is not None and not np.all(np.isfinite(node.grad)):
                raise NumericalError(f"non-finite gradient at {node!r}")
        # intermediate gradients are not needed after the pass
        for node in order:
            if node._prev and node is not self:
                node.grad = None

    # -- arithmetic --

    def __add__(self, other) -> 'Tensor':
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.value + other.value, (self, other), '+')

        def _backward():
            self._accumulate(_unbroadcast(out.grad, self.shape))
            other._accumulate(_unbroadcast(out.grad, other.shape))
        return self._record(out, _backward)

    def __mul__(self, other) -> 'Tensor':
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.value * other.value, (self, other), '*')

        def _backward():
            self._accumulate(_unbroadcast(out.grad * other.value, self.shape))
            other._accumulate(_unbroadcast(out.grad * self.value, other.shape))
        return self._record(out, _backward)

    def __neg__(self) -> 'Tensor':
        return self * -1.0

    def __radd__(self, other) -> 'Tensor':
        return self + other

    def __sub__(self, other) -> 'Tensor':
        return self + (-other)

    def __rsub__(self, other) -> 'Tensor':
        return (-self) + other

    def __rmul__(self, other) -> 'Tensor':
        return self * other

    # -- elementwise functions --

    def sigmoid(self) -> 'Tensor':
        s = 0.5 * (1.0 + np.tanh(0.5 * self.value))
        out = Tensor(s, (self,), 'sigmoid')

        def _backward():
            self._accumulate(out.grad * s * (1.0 - s))
        return self._record(out, _backward)

    def tanh(self) -> 'Tensor':
        t = np.tanh(self.value)
        out = Tensor(t, (self,), 'tanh')

        def _backward():
            self._accumulate(out.grad * (1.0 - t * t))
        return self._record(out, _backward)

    def relu(self) -> 'Tensor':
        positive = self.value > 0
        out = Tensor(np.where(positive, self.value, 0.0), (self,), 'relu')

        def _backward():
            self._accumulate(out.grad * positive)
        return self._record(out, _backward)

    # -- reductions and reshaping --

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> 'Tensor':
        out = Tensor(self.value.sum(axis=axis, keepdims=keepdims), (self,), 'sum')

        def _backward():
            grad = out.grad if keepdims or axis is None else np.expand_dims(out.grad, axis)
            self._accumulate(np.broadcast_to(grad, self.shape))
        return self._record(out, _backward)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> 'Tensor':
        count = self.value.size if axis is None else self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape) -> 'Tensor':
        shape = shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape
        out = Tensor(self.value.reshape(shape), (self,), 'reshape')

        def _backward():
            self._accumulate(out.grad.reshape(self.shape))
        return self._record(out, _backward)

    def softmax(self, axis: int = -1) -> 'Tensor':
        shifted = self.value - self.value.max(axis=axis, keepdims=True)
        exp = np.exp(shifted)
        s = exp / exp.sum(axis=axis, keepdims=True)
        out = Tensor(s, (self,), 'softmax')

        def _backward():
            inner = (out.grad * s).sum(axis=axis, keepdims=True)
            self._accumulate(s * (out.grad - inner))
        return self._record(out, _backward)


def _topological_order(root: Tensor) -> List[Tensor]:
    """Depth-first post-order without recursion"""
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for child in node._prev:
            if id(child) not in visited:
                stack.append((child, False))
    return order


def parameter(value) -> Tensor:
    return Tensor(value, requires_grad=True)


def constant(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _parse_einsum(subscripts: str) -> Tuple[str, str, str]:
    subscripts = subscripts.replace(' ', '')
    if '->' not in subscripts or '.' in subscripts:
        raise ContractError(f"einsum subscripts need an explicit output and no ellipsis: {subscripts!r}")
    inputs, output = subscripts.split('->')
    operands = inputs.split(',')
    if len(operands) != 2:
        raise ContractError(f"einsum takes exactly two operands: {subscripts!r}")
    for sub in operands + [output]:
        if len(set(sub)) != len(sub):
            raise ContractError(f"repeated subscript in {sub!r}")
    return operands[0], operands[1], output


def _einsum_grad(grad: np.ndarray, out_sub: str, other_sub: str, other: np.ndarray,
                 target_sub: str, target_shape: Tuple[int, ...]) -> np.ndarray:
    keep = ''.join(c for c in target_sub if c in out_sub or c in other_sub)
    partial = np.einsum(f"{out_sub},{other_sub}->{keep}", grad, other)
    for axis, c in enumerate(target_sub):
        if c not in keep:
            partial = np.expand_dims(partial, axis)
    return np.broadcast_to(partial, target_shape)


def einsum(subscripts: str, a, b) -> Tensor:
    """Two-operand einsum with explicit output subscripts"""
    a, b = constant(a), constant(b)
    sub_a, sub_b, sub_out = _parse_einsum(subscripts)
    if len(sub_a) != a.ndim or len(sub_b) != b.ndim:
        raise ContractError(f"einsum {subscripts!r} does not match shapes {a.shape} and {b.shape}")
    try:
        value = np.einsum(f"{sub_a},{sub_b}->{sub_out}", a.value, b.value)
    except ValueError as e:
        raise ContractError(f"einsum {subscripts!r} on shapes {a.shape} and {b.shape}: {e}")
    out = Tensor(value, (a, b), 'einsum')

    def _backward():
        if a.requires_grad:
            a._accumulate(_einsum_grad(out.grad, sub_out, sub_b, b.value, sub_a, a.shape))
        if b.requires_grad:
            b._accumulate(_einsum_grad(out.grad, sub_out, sub_a, a.value, sub_b, b.shape))
    return a._record(out, _backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [constant(t) for t in tensors]
    if not tensors:
        raise ContractError("concat needs at least one tensor")
    try:
        value = np.concatenate([t.value for t in tensors], axis=axis)
    except ValueError as e:
        raise ContractError(f"concat: {e}")
    out = Tensor(value, tensors, 'concat')
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward():
        for t, grad in zip(tensors, np.split(out.grad, bounds, axis=axis)):
            t._accumulate(grad)
    return tensors[0]._record(out, _backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [constant(t) for t in tensors]
    if not tensors:
        raise ContractError("stack needs at least one tensor")
    try:
        value = np.stack([t.value for t in tensors], axis=axis)
    except ValueError as e:
        raise ContractError(f"stack: {e}")
    out = Tensor(value, tensors, 'stack')

    def _backward():
        for i, t in enumerate(tensors):
            t._accumulate(np.take(out.grad, i, axis=axis))
    return tensors[0]._record(out, _backward)


def bce_with_logits(logits, labels) -> Tensor:
    """Mean binary cross-entropy, stable form max(z, 0) - z*y + log(1 + exp(-|z|))"""
    logits = constant(logits)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != logits.shape:
        raise ContractError(f"labels shape {labels.shape} does not match logits {logits.shape}")
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ContractError("labels must be 0 or 1")
    z = logits.value
    losses = np.maximum(z, 0.0) - z * labels + np.log1p(np.exp(-np.abs(z)))
    count = max(losses.size, 1)
    out = Tensor(losses.sum() / count, (logits,), 'bce')

    def _backward():
        probability = 0.5 * (1.0 + np.tanh(0.5 * z))
        logits._accumulate(out.grad * (probability - labels) / count)
    return logits._record(out, _backward)
