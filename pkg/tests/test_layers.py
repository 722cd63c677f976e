import math
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import finite_difference, relative_error
from workflow.errors import ContractError
from workflow.model.layers import bce_loss, classification_head, gcn_forward, gru_step, temporal_attention
from workflow.model.tensor import Tensor, parameter

GRU_FIELDS = ('gru_update_weight', 'gru_update_bias', 'gru_reset_weight', 'gru_reset_bias',
              'gru_candidate_weight', 'gru_candidate_bias')


def gru_params(hidden, rng=None, values=None):
    arrays = {}
    for name in GRU_FIELDS:
        shape = (2 * hidden, hidden) if name.endswith('weight') else (hidden,)
        if values is not None:
            arrays[name] = np.asarray(values[name], dtype=np.float64).reshape(shape)
        else:
            arrays[name] = np.zeros(shape) if rng is None else rng.normal(size=shape)
    return arrays


def as_params(arrays, make=Tensor):
    return SimpleNamespace(**{name: make(value) for name, value in arrays.items()})


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


# graph convolution

def test_gcn_identity():
    x = np.abs(np.random.default_rng(0).normal(size=(4, 3)))
    out = gcn_forward(x, np.eye(4), Tensor(np.eye(3)), Tensor(np.zeros(3)))
    np.testing.assert_allclose(out.value, x)


def test_gcn_two_node_path():
    out = gcn_forward(np.array([[2.0], [0.0]]), np.full((2, 2), 0.5), Tensor([[1.0]]), Tensor([0.0]))
    np.testing.assert_allclose(out.value, [[1.0], [1.0]])


def test_gcn_zero_weights():
    x = np.random.default_rng(1).normal(size=(3, 2))
    out = gcn_forward(x, np.eye(3), Tensor(np.zeros((2, 4))), Tensor(np.zeros(4)))
    np.testing.assert_array_equal(out.value, np.zeros((3, 4)))


def test_gcn_batched_matches_single():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(2, 3, 2))
    adjacency = np.full((3, 3), 1.0 / 3.0)
    w, b = Tensor(rng.normal(size=(2, 4))), Tensor(rng.normal(size=4))
    batched = gcn_forward(x, adjacency, w, b).value
    for i in range(2):
        np.testing.assert_allclose(batched[i], gcn_forward(x[i], adjacency, w, b).value)


def test_gcn_shape_mismatch():
    with pytest.raises(ContractError):
        gcn_forward(np.ones((3, 2)), np.eye(4), Tensor(np.ones((2, 2))), Tensor(np.zeros(2)))
    with pytest.raises(ContractError):
        gcn_forward(np.ones((3, 2)), np.eye(3), Tensor(np.ones((3, 2))), Tensor(np.zeros(2)))


def test_gcn_gradient():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 4, 3))
    adjacency = rng.uniform(0.1, 0.5, size=(4, 4))
    w_value, b_value = rng.normal(size=(3, 2)), rng.normal(size=2) * 0.1
    w, b = parameter(w_value.copy()), parameter(b_value.copy())
    weights = rng.normal(size=(2, 4, 2))
    (gcn_forward(x, adjacency, w, b) * weights).sum().backward()

    def evaluate():
        return (gcn_forward(x, adjacency, Tensor(w_value), Tensor(b_value)) * weights).sum().item()
    assert relative_error(w.grad, finite_difference(evaluate, w_value)) < 1e-4
    assert relative_error(b.grad, finite_difference(evaluate, b_value)) < 1e-4


# recurrent step

def test_gru_zero_parameters_from_zero_state():
    params = as_params(gru_params(3))
    out = gru_step(np.zeros((2, 3)), np.random.default_rng(4).normal(size=(2, 3)), params)
    np.testing.assert_array_equal(out.value, np.zeros((2, 3)))


def test_gru_zero_parameters_halve_the_state():
    v = np.random.default_rng(5).normal(size=(2, 3))
    out = gru_step(v, np.zeros((2, 3)), as_params(gru_params(3)))
    np.testing.assert_allclose(out.value, 0.5 * v, atol=1e-15)


def test_gru_scalar_case():
    values = {
        'gru_update_weight': [0.3, -0.1], 'gru_update_bias': [0.05],
        'gru_reset_weight': [-0.4, 0.7], 'gru_reset_bias': [0.1],
        'gru_candidate_weight': [0.9, 0.5], 'gru_candidate_bias': [-0.2],
    }
    x, h = 0.5, 0.2
    z = sigmoid(0.3 * x - 0.1 * h + 0.05)
    r = sigmoid(-0.4 * x + 0.7 * h + 0.1)
    candidate = math.tanh(0.9 * x + 0.5 * r * h - 0.2)
    expected = z * h + (1.0 - z) * candidate
    out = gru_step(np.array([[h]]), np.array([[x]]), as_params(gru_params(1, values=values)))
    assert out.value[0, 0] == pytest.approx(expected, abs=1e-12)


def test_gru_shape_mismatch():
    with pytest.raises(ContractError):
        gru_step(np.zeros((2, 3)), np.zeros((2, 2)), as_params(gru_params(3)))


def test_gru_gradient():
    rng = np.random.default_rng(6)
    arrays = gru_params(2, rng)
    h_prev, x_t = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    weights = rng.normal(size=(3, 2))
    params = as_params({k: v.copy() for k, v in arrays.items()}, make=parameter)
    (gru_step(h_prev, x_t, params) * weights).sum().backward()
    for name in GRU_FIELDS:
        def evaluate():
            return (gru_step(h_prev, x_t, as_params(arrays)) * weights).sum().item()
        numeric = finite_difference(evaluate, arrays[name])
        assert relative_error(getattr(params, name).grad, numeric) < 1e-4


# temporal attention

def test_attention_closed_form_softmax():
    hidden = [Tensor([[0.0]]), Tensor([[math.log(3.0)]])]
    context, weights = temporal_attention(hidden, Tensor([1.0]))
    np.testing.assert_allclose(weights.value, [0.25, 0.75], atol=1e-12)
    assert context.value[0, 0] == pytest.approx(0.75 * math.log(3.0), abs=1e-12)


def test_attention_identical_states_are_uniform():
    state = np.random.default_rng(7).normal(size=(3, 2))
    context, weights = temporal_attention([Tensor(state)] * 4, Tensor([0.3, -1.2]))
    np.testing.assert_allclose(weights.value, np.full(4, 0.25), atol=1e-12)
    np.testing.assert_allclose(context.value, state, atol=1e-12)


def test_attention_single_step():
    state = np.random.default_rng(8).normal(size=(2, 3, 2))
    context, weights = temporal_attention([Tensor(state)], Tensor([1.0, 2.0]))
    np.testing.assert_array_equal(weights.value, np.ones((2, 1)))
    np.testing.assert_allclose(context.value, state)


def test_attention_weights_sum_to_one_and_stay_positive():
    rng = np.random.default_rng(9)
    for _ in range(50):
        hidden = [Tensor(rng.normal(size=(2, 3, 4)) * 5) for _ in range(int(rng.integers(1, 6)))]
        _, weights = temporal_attention(hidden, Tensor(rng.normal(size=4)))
        np.testing.assert_allclose(weights.value.sum(axis=-1), 1.0, atol=1e-12)
        assert np.all(weights.value > 0)


def test_attention_needs_a_step():
    with pytest.raises(ContractError):
        temporal_attention([], Tensor([1.0]))


def test_attention_gradient():
    rng = np.random.default_rng(10)
    states = [rng.normal(size=(3, 2)) for _ in range(3)]
    a_value = rng.normal(size=2)
    weights = rng.normal(size=(3, 2))
    hidden = [parameter(s.copy()) for s in states]
    a = parameter(a_value.copy())
    context, _ = temporal_attention(hidden, a)
    (context * weights).sum().backward()

    def evaluate():
        c, _ = temporal_attention([Tensor(s) for s in states], Tensor(a_value))
        return (c * weights).sum().item()
    assert relative_error(a.grad, finite_difference(evaluate, a_value)) < 1e-4
    for tensor, state in zip(hidden, states):
        assert relative_error(tensor.grad, finite_difference(evaluate, state)) < 1e-4


# head and loss

def test_head_mean_pools_nodes():
    context = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    logit = classification_head(context, Tensor([1.0, -1.0]), Tensor(0.5))
    assert logit.item() == pytest.approx((2.0 - 3.0) + 0.5)


def test_head_gradient():
    rng = np.random.default_rng(11)
    context_value, w_value = rng.normal(size=(2, 3, 4)), rng.normal(size=4)
    b_value = np.array(0.3)
    context, w, b = parameter(context_value.copy()), parameter(w_value.copy()), parameter(b_value.copy())
    bce_loss(classification_head(context, w, b), np.array([0.0, 1.0])).backward()

    def evaluate():
        return bce_loss(classification_head(Tensor(context_value), Tensor(w_value), Tensor(b_value)),
                        np.array([0.0, 1.0])).item()
    for tensor, value in ((context, context_value), (w, w_value), (b, b_value)):
        assert relative_error(tensor.grad, finite_difference(evaluate, value)) < 1e-4


@pytest.mark.parametrize("logit, label, expected", [
    (0.0, 0, math.log(2.0)),
    (0.0, 1, math.log(2.0)),
    (2.0, 0, 2.0 + math.log1p(math.exp(-2.0))),
])
def test_bce_values(logit, label, expected):
    assert bce_loss(Tensor(logit), label).item() == pytest.approx(expected, abs=1e-12)


def test_bce_reference_values():
    assert bce_loss(Tensor(0.0), 1).item() == pytest.approx(0.693147, abs=1e-6)
    assert bce_loss(Tensor(2.0), 0).item() == pytest.approx(2.126928, abs=1e-6)


def test_bce_saturates_without_overflow():
    assert bce_loss(Tensor(100.0), 1).item() < 1e-40
    assert bce_loss(Tensor(-800.0), 0).item() == 0.0


def test_bce_rejects_soft_labels():
    with pytest.raises(ContractError):
        bce_loss(Tensor(0.0), 0.3)
