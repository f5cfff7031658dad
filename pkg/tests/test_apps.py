"""
Tests for prediction error and discriminant analysis.
"""

import numpy as np
import pytest

from src.apps.discriminant import (
    ClassModel,
    ClassParams,
    Mode,
    classifier_grid,
    classify,
    confusion_matrix,
    cross_validate_classifier,
    fit_classifier,
    misclassification_rate,
    predict,
)
from src.apps.prediction import (
    prediction_error,
    prediction_error_path,
    split_indices,
    train_test_split,
)
from src.estimator.fit import fit_path
from src.linalg.matrices import LowerTriangular, SampleMatrix
from src.simulate.experiments import replicate_seeds
from src.simulate.models import Model, SimulationSpec, make_truth, sample
from src.utils.exceptions import DimensionError

HALF = float(np.log(0.5))


def random_lower(rng, p):
    dense = np.tril(rng.standard_normal((p, p)), -1)
    dense[np.diag_indices(p)] = rng.uniform(0.5, 2.0, p)
    return LowerTriangular.from_dense(dense)


def two_blobs(rng, n, shift=4.0):
    y = np.repeat([0, 1], n // 2)
    X = rng.standard_normal((n, 2)) + shift * y[:, None]
    return X, y


def test_prediction_error_identity():
    assert prediction_error(LowerTriangular.identity(3), [1.0, 2.0, 3.0]) == pytest.approx(6.5)


def test_prediction_error_matches_row_regressions(rng):
    L = random_lower(rng, 5)
    dense = L.to_dense()
    x = rng.standard_normal(5)
    residuals = []
    for r in range(1, 5):
        coefficients = -dense[r, :r] / dense[r, r]
        residuals.append(dense[r, r] * (x[r] - coefficients @ x[:r]))
    expected = np.sum(np.square(residuals)) / 4
    assert prediction_error(L, x) == pytest.approx(expected, rel=1e-12)


def test_prediction_error_validation():
    with pytest.raises(DimensionError):
        prediction_error(LowerTriangular.identity(1), [1.0])
    with pytest.raises(DimensionError):
        prediction_error(LowerTriangular.identity(3), [1.0, 2.0])


def test_prediction_error_path(random_samples):
    train, test = train_test_split(random_samples, 0.5, seed=2)
    fits = fit_path(train, [0.5, 0.1])
    frame = prediction_error_path(fits, test)
    assert list(frame.columns) == ['lambda', 'mean', 'sd']
    assert frame['lambda'].tolist() == [0.5, 0.1]

    errors = [prediction_error(fits[1].L_hat, x) for x in test.data]
    assert frame['mean'].iloc[1] == pytest.approx(np.mean(errors))
    assert frame['sd'].iloc[1] == pytest.approx(np.std(errors, ddof=1))

    with pytest.raises(DimensionError):
        prediction_error_path(fits, test, lambdas=[0.5])


def test_split_indices():
    train, test = split_indices(20, 0.75, seed=3)
    assert train.size == 15 and test.size == 5
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(20))
    assert np.all(np.diff(train) > 0)
    again, _ = split_indices(20, 0.75, seed=3)
    assert np.array_equal(train, again)
    with pytest.raises(DimensionError):
        split_indices(20, 1.0)


def test_lda_scores_by_hand():
    L = LowerTriangular.identity(2)
    model = ClassModel(
        classes=(
            ClassParams(label=0, mu_hat=np.zeros(2), L_hat=L, log_pi=HALF),
            ClassParams(label=7, mu_hat=np.array([2.0, 2.0]), L_hat=L, log_pi=HALF),
        ),
        mode=Mode.LDA,
    )
    assert classify(model, [1.9, 1.9]) == 7
    assert classify(model, [0.1, 0.0]) == 0
    assert np.array_equal(model.labels, [0, 7])
    # each class mean is assigned to its own class
    assert list(predict(model, [[0.0, 0.0], [2.0, 2.0]])) == [0, 7]


def test_lda_and_qda_agree_for_shared_factor(rng):
    L = random_lower(rng, 4)
    classes = tuple(
        ClassParams(label=j, mu_hat=rng.standard_normal(4), L_hat=L, log_pi=float(np.log(w)))
        for j, w in enumerate([0.2, 0.3, 0.5])
    )
    lda = ClassModel(classes=classes, mode=Mode.LDA)
    qda = ClassModel(classes=classes, mode=Mode.QDA)
    X = rng.standard_normal((50, 4))
    lda_scores, qda_scores = lda.scores(X), qda.scores(X)
    # the two differ by a per-row constant shared by all classes
    assert np.allclose(
        lda_scores - lda_scores[:, :1],
        qda_scores - qda_scores[:, :1],
        atol=1e-10,
    )
    assert np.array_equal(predict(lda, X), predict(qda, X))


def test_qda_matches_dense_precision(rng):
    classes = tuple(
        ClassParams(label=j, mu_hat=rng.standard_normal(3), L_hat=random_lower(rng, 3), log_pi=HALF)
        for j in range(2)
    )
    model = ClassModel(classes=classes, mode=Mode.QDA)
    X = rng.standard_normal((20, 3))
    scores = model.scores(X)
    for j, c in enumerate(classes):
        dense = c.L_hat.to_dense()
        Omega = dense.T @ dense
        diff = X - c.mu_hat
        expected = (
            -0.5 * np.einsum('ij,jk,ik->i', diff, Omega, diff)
            + 0.5 * np.linalg.slogdet(Omega)[1]
            + HALF
        )
        assert np.max(np.abs(scores[:, j] - expected)) <= 1e-10


def test_class_model_validation(rng):
    L = LowerTriangular.identity(2)
    with pytest.raises(DimensionError):
        ClassModel(classes=(ClassParams(0, np.zeros(2), L, 0.0),), mode=Mode.LDA)
    with pytest.raises(DimensionError):
        ClassModel(
            classes=(ClassParams(0, np.zeros(2), L, HALF), ClassParams(1, np.ones(2), L, 0.0)),
            mode=Mode.LDA,
        )
    with pytest.raises(DimensionError):
        ClassModel(
            classes=(
                ClassParams(0, np.zeros(2), L, HALF),
                ClassParams(1, np.ones(2), LowerTriangular.identity(2), HALF),
            ),
            mode=Mode.LDA,
        )
    assert Mode.parse("QDA") is Mode.QDA
    with pytest.raises(ValueError):
        Mode.parse("rda")


@pytest.mark.parametrize("mode", [Mode.LDA, Mode.QDA])
def test_separated_classes_are_learned(mode, rng):
    X, y = two_blobs(rng, 500)
    model = fit_classifier(X, y, mode=mode, k=3)
    assert misclassification_rate(y, predict(model, X)) < 0.05


def test_fixed_lambda_and_misclassification_criterion(rng):
    X, y = two_blobs(rng, 120)
    fixed = fit_classifier(X, y, lam=0.01)
    assert all(c.lambda_ == 0.01 for c in fixed.classes)

    grid = classifier_grid(X, y, count=5)
    selected = fit_classifier(X, y, grid=grid, k=3, criterion='misclassification')
    assert selected.classes[0].lambda_ in grid
    with pytest.raises(ValueError):
        fit_classifier(X, y, criterion='accuracy')


def test_classifier_label_checks(rng):
    X = rng.standard_normal((10, 2))
    with pytest.raises(DimensionError):
        fit_classifier(X, np.zeros(10, dtype=int), lam=0.1)
    with pytest.raises(DimensionError):
        fit_classifier(X, np.array([0] * 9 + [1]), lam=0.1)
    with pytest.raises(DimensionError):
        fit_classifier(X, np.array([0.0, 1.5] * 5), lam=0.1)
    with pytest.raises(DimensionError):
        fit_classifier(X, np.array([0, 1] * 4), lam=0.1)


def test_classifier_cross_validation(rng):
    X, y = two_blobs(rng, 90, shift=2.0)
    grid = classifier_grid(X, y, mode=Mode.QDA, count=4)
    result = cross_validate_classifier(X, y, grid, mode=Mode.QDA, k=3, seed=5)
    assert result.fold_scores.shape == (3, 4)
    assert np.all((result.fold_scores >= 0) & (result.fold_scores <= 1))
    assert result.one_se_idx <= result.best_idx


def test_prediction_is_thread_invariant(rng):
    X, y = two_blobs(rng, 200, shift=1.0)
    model = fit_classifier(X, y, lam=0.05)
    test = rng.standard_normal((3000, 2))
    assert np.array_equal(predict(model, test, threads=1), predict(model, test, threads=4))


def test_confusion_and_error_rate():
    y_true = np.array([0, 0, 1, 1])
    y_pred = np.array([0, 1, 1, 1])
    table = confusion_matrix(y_true, y_pred)
    assert table.values.tolist() == [[1, 1], [0, 2]]
    assert table.index.name == 'true'
    assert misclassification_rate(y_true, y_pred) == 0.25
    with pytest.raises(DimensionError):
        misclassification_rate(y_true, y_pred[:3])


@pytest.mark.slow
def test_regularized_lda_beats_diagonal_baseline():
    p, shift = 50, np.zeros(50)
    shift[:5] = 1.5
    regularized, diagonal = [], []
    for i, seed in enumerate(replicate_seeds(31, 10)):
        L = make_truth(SimulationSpec(model=Model.M1, p=p, n=200, seed=int(seed)))
        X_train = np.vstack([sample(L, 100, 4 * i).data, sample(L, 100, 4 * i + 1).data + shift])
        X_test = np.vstack([sample(L, 500, 4 * i + 2).data, sample(L, 500, 4 * i + 3).data + shift])
        y_train, y_test = np.repeat([0, 1], 100), np.repeat([0, 1], 500)

        grid = classifier_grid(X_train, y_train, count=30)
        model = fit_classifier(X_train, y_train, grid=grid)
        baseline = fit_classifier(X_train, y_train, lam=10 * grid[0])
        regularized.append(misclassification_rate(y_test, predict(model, X_test)))
        diagonal.append(misclassification_rate(y_test, predict(baseline, X_test)))
    assert np.median(regularized) < np.median(diagonal)
