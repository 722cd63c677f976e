import math

import numpy as np
import pytest

from workflow.context import TrainConfig
from workflow.errors import ProtocolError
from workflow.model.network import init_params
from workflow.training.trainer import TrainingLog, evaluate_loss, sample_losses, train_model


@pytest.fixture
def train_config():
    return TrainConfig(learning_rate=0.01, batch_size=4, max_epochs=8, patience=3, seed=5)


def train(make_samples, config):
    train_samples = make_samples(16, seed=1)
    validation_samples = make_samples(6, seed=2)
    params = init_params(2, 4, seed=3)
    return train_model(train_samples, validation_samples, config, params)


def test_training_is_deterministic(make_samples, train_config):
    best_a, log_a = train(make_samples, train_config)
    best_b, log_b = train(make_samples, train_config)
    assert log_a.validation_losses == log_b.validation_losses
    assert log_a.train_losses == log_b.train_losses
    for name, tensor in best_a.named_tensors():
        np.testing.assert_array_equal(tensor.value, getattr(best_b, name).value)


def test_best_epoch_has_lowest_validation_loss(make_samples, train_config):
    best, log = train(make_samples, train_config)
    assert 1 <= log.best_epoch <= log.epochs_run <= train_config.max_epochs
    assert all(log.best_validation_loss <= loss for loss in log.validation_losses)
    # the returned weights are the best epoch's weights
    assert evaluate_loss(best, make_samples(6, seed=2)) == pytest.approx(log.best_validation_loss, abs=1e-12)


def test_separable_data_gets_easier(make_samples):
    config = TrainConfig(learning_rate=0.02, batch_size=4, max_epochs=15, patience=14, seed=1)
    _, log = train(make_samples, config)
    assert log.best_validation_loss < log.validation_losses[0]
    assert log.best_validation_loss < math.log(2.0)


def test_empty_splits_are_rejected(make_samples, train_config):
    params = init_params(2, 4, seed=0)
    with pytest.raises(ProtocolError):
        train_model([], make_samples(2), train_config, params)
    with pytest.raises(ProtocolError):
        train_model(make_samples(2), [], train_config, params)


def test_sample_losses_are_stable():
    losses = sample_losses(np.array([0.0, 1000.0, -1000.0]), np.array([1.0, 1.0, 1.0]))
    np.testing.assert_allclose(losses, [math.log(2.0), 0.0, 1000.0])


def test_log_csv(tmp_path):
    log = TrainingLog()
    log.record(0.7, 0.69)
    log.record(0.6, 0.65)
    log.best_epoch = 2
    log.write_csv(tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text(encoding='utf-8').splitlines()
    assert lines[0] == "epoch,train_loss,validation_loss"
    assert lines[1].startswith("1,0.700000000,")
    assert len(lines) == 3
    assert log.best_validation_loss == 0.65
    assert TrainingLog().best_validation_loss == math.inf


def scripted_validation(monkeypatch, losses):
    """Replace the validation loss with a fixed schedule, keeping each epoch's weights"""
    weights = []

    def evaluate(params, samples):
        weights.append(params.to_arrays())
        return losses[len(weights) - 1]

    monkeypatch.setattr("workflow.training.trainer.evaluate_loss", evaluate)
    return weights


def test_plateau_stops_after_patience(monkeypatch, make_samples):
    weights = scripted_validation(monkeypatch, [1.0, 0.9, 0.8] + [0.8] * 27)
    best, log = train_model(make_samples(8, seed=1), make_samples(4, seed=2), TrainConfig(seed=4),
                            init_params(2, 4, seed=3))
    assert log.epochs_run == 9
    assert log.stopped_early
    assert log.best_epoch == 3
    for name, value in weights[2].items():
        np.testing.assert_array_equal(getattr(best, name).value, value)


def test_improving_loss_runs_every_epoch(monkeypatch, make_samples):
    weights = scripted_validation(monkeypatch, [1.0 - 0.01 * epoch for epoch in range(30)])
    best, log = train_model(make_samples(8, seed=1), make_samples(4, seed=2), TrainConfig(seed=4),
                            init_params(2, 4, seed=3))
    assert log.epochs_run == 30
    assert not log.stopped_early
    assert log.best_epoch == 30
    for name, value in weights[-1].items():
        np.testing.assert_array_equal(getattr(best, name).value, value)
