import numpy as np
import pytest

from workflow.errors import MetricError
from workflow.reporting.metrics import (
    FoldResult,
    aggregate,
    aggregate_folds,
    auroc,
    format_mean_std,
    format_number,
    mean_std,
)

KEY = (45.0, 90.0, 30, 15, "3D")


def pairwise_auroc(scores, labels):
    """Fraction of positive/negative pairs ordered correctly, ties worth one half"""
    scores, labels = np.asarray(scores), np.asarray(labels)
    positives, negatives = scores[labels == 1][:, None], scores[labels == 0][None, :]
    credit = (positives > negatives).sum() + 0.5 * (positives == negatives).sum()
    return float(credit) / (positives.size * negatives.size)


def test_hand_computed_auroc():
    assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)


def test_perfect_and_inverted_rankings():
    assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auroc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0


def test_all_ties_is_one_half():
    assert auroc([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5


def test_matches_pairwise_definition():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        size = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, size=size)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        # coarse scores force plenty of ties
        scores = np.round(rng.normal(size=size), 1)
        assert auroc(scores, labels) == pytest.approx(pairwise_auroc(scores, labels), abs=1e-12)


def test_monotone_transform_leaves_auroc_unchanged():
    rng = np.random.default_rng(1)
    scores = rng.normal(size=50)
    labels = rng.integers(0, 2, size=50)
    labels[:2] = [0, 1]
    assert auroc(np.exp(3 * scores) + 7, labels) == pytest.approx(auroc(scores, labels), abs=1e-12)


@pytest.mark.parametrize("scores, labels", [
    ([0.2, 0.4], [1, 1]),
    ([0.2, 0.4], [0, 0]),
    ([0.2], [0, 1]),
    ([0.2, np.nan], [0, 1]),
    ([0.2, 0.3], [0, 2]),
])
def test_undefined_auroc(scores, labels):
    with pytest.raises(MetricError):
        auroc(scores, labels)


def test_identical_folds_have_zero_spread():
    result = aggregate(KEY, [0.98] * 5)
    assert result.mean == pytest.approx(0.98)
    assert result.std == pytest.approx(0.0, abs=1e-12)
    assert result.formatted == "0.98 ± 0.0"


def test_two_fold_aggregate():
    result = aggregate(KEY, [1.0, 0.5])
    assert (result.mean, result.std) == (0.75, 0.25)
    assert result.formatted == "0.75 ± 0.25"


def test_single_fold_aggregate():
    assert aggregate(KEY, [0.7]).formatted == "0.7 ± 0.0"


def test_aggregate_ignores_fold_order():
    rng = np.random.default_rng(2)
    values = list(rng.uniform(0.4, 1.0, size=7))
    reference = mean_std(values)
    for _ in range(20):
        assert mean_std(list(rng.permutation(values))) == reference


def test_undefined_folds_are_skipped():
    result = aggregate(KEY, [0.8, None, 0.6])
    assert result.mean == pytest.approx(0.7)
    assert result.fold_values == (0.8, None, 0.6)
    assert aggregate(KEY, [None, None]).formatted == "n/a"
    with pytest.raises(MetricError):
        aggregate(KEY, [])


@pytest.mark.parametrize("value, text", [
    (0.98, "0.98"), (1.0, "1.0"), (0.0, "0.0"), (0.8125, "0.812"), (0.5001, "0.5"), (None, "n/a"),
])
def test_format_number(value, text):
    assert format_number(value) == text


def test_format_mean_std():
    assert format_mean_std(0.912, 0.0456) == "0.912 ± 0.046"
    assert format_mean_std(None, None) == "n/a"


def test_aggregate_folds_groups_cells():
    def fold(dim, index, value):
        return FoldResult(45.0, 90.0, 30, 15, dim, index, value, epochs_run=5, best_epoch=3)

    results = [fold("3D", 1, 0.6), fold("2D", 0, 0.5), fold("3D", 0, 0.8)]
    cells = aggregate_folds(results)
    assert [c.dimensionality for c in cells] == ["2D", "3D"]
    assert cells[1].fold_values == (0.8, 0.6)
