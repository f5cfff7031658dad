"""
End-to-end tests of the hierband command line.
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.cli.commands import EXIT_DATA, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, main
from src.reporting.writers import read_matrix_csv


@pytest.fixture
def simulated(tmp_path):
    """M1 samples and truth written by the simulate command."""
    out = tmp_path / "sim"
    code = main(["simulate", "--model", "M1", "--p", "10", "--n", "60", "--seed", "3", "--output-dir", str(out)])
    assert code == EXIT_OK
    return out


@pytest.fixture
def labeled_csv(tmp_path, rng):
    y = np.repeat([0, 1], 40)
    X = rng.standard_normal((80, 3)) + 3.0 * y[:, None]
    frame = pd.DataFrame(X, columns=["x1", "x2", "x3"])
    frame["label"] = y
    path = tmp_path / "labeled.csv"
    frame.to_csv(path, index=False)
    return path


def test_simulate_model_one(tmp_path):
    out = tmp_path / "out"
    code = main(["simulate", "--model", "M1", "--p", "100", "--n", "20", "--output-dir", str(out)])
    assert code == EXIT_OK
    L = read_matrix_csv(out / "L_true.csv")
    assert L.shape == (100, 100)
    assert np.count_nonzero(np.tril(L, -1)) == 99
    assert read_matrix_csv(out / "samples.csv").shape == (20, 100)
    assert pd.read_csv(out / "bandwidths_true.csv")['bandwidth'].sum() == 99
    assert (out / "diagnostics.json").exists()


def test_fit_single_variable(tmp_path):
    data = tmp_path / "x.csv"
    data.write_text("1\n-1\n")
    out = tmp_path / "out"
    assert main(["fit", "--input", str(data), "--lambda", "0", "--output-dir", str(out)]) == EXIT_OK
    assert read_matrix_csv(out / "L_hat.csv").tolist() == [[1.0]]


def test_fit_outputs_round_trip(simulated, tmp_path):
    out = tmp_path / "fit"
    code = main(["fit", "--input", str(simulated / "samples.csv"), "--lambda", "0.05", "--output-dir", str(out)])
    assert code == EXIT_OK
    L = read_matrix_csv(out / "L_hat.csv")
    Omega = read_matrix_csv(out / "omega_hat.csv")
    assert np.array_equal(Omega, L.T @ L)
    assert np.linalg.eigvalsh(Omega).min() > 0

    diagnostics = json.loads((out / "diagnostics.json").read_text())
    assert diagnostics['status'] == "success"
    assert diagnostics['extra']['lambda'] == 0.05


def test_fit_at_lambda_max_is_diagonal(simulated, tmp_path):
    out = tmp_path / "fit"
    code = main(["fit", "--input", str(simulated / "samples.csv"), "--lambda-max", "--output-dir", str(out)])
    assert code == EXIT_OK
    L = read_matrix_csv(out / "L_hat.csv")
    assert np.all(np.tril(L, -1) == 0.0)
    assert pd.read_csv(out / "bandwidths.csv")['bandwidth'].eq(0).all()


def test_fit_selects_lambda_by_cross_validation(simulated, tmp_path):
    out = tmp_path / "fit"
    code = main([
        "fit", "--input", str(simulated / "samples.csv"),
        "--grid-count", "5", "--folds", "3", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    cv = pd.read_csv(out / "cv.csv")
    assert len(cv) == 5
    diagnostics = json.loads((out / "diagnostics.json").read_text())
    assert diagnostics['extra']['lambda'] in cv['lambda'].tolist()


def test_conflicting_lambda_flags(simulated, tmp_path):
    code = main([
        "fit", "--input", str(simulated / "samples.csv"),
        "--lambda", "0.1", "--lambda-max", "--output-dir", str(tmp_path / "out"),
    ])
    assert code == EXIT_USAGE


def test_unknown_option_is_a_usage_error(tmp_path):
    assert main(["simulate", "--model", "M9", "--p", "5", "--n", "5"]) == EXIT_USAGE


def test_malformed_input(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("1,2\n3,4\n5,6,7\n")
    out = tmp_path / "out"
    assert main(["fit", "--input", str(data), "--lambda", "0.1", "--output-dir", str(out)]) == EXIT_DATA
    diagnostics = json.loads((out / "diagnostics.json").read_text())
    assert diagnostics['status'] == "failed"
    assert "line 3" in diagnostics['error_message']


def test_indivisible_dimension_is_a_data_error(tmp_path):
    code = main(["simulate", "--model", "M2", "--p", "12", "--n", "5", "--output-dir", str(tmp_path / "out")])
    assert code == EXIT_DATA


def test_iteration_cap_reports_solver_exit(simulated, tmp_path):
    out = tmp_path / "fit"
    code = main([
        "fit", "--input", str(simulated / "samples.csv"),
        "--lambda", "0.05", "--max-iter", "1", "--output-dir", str(out),
    ])
    assert code == EXIT_SOLVER
    assert (out / "L_hat.csv").exists()
    assert json.loads((out / "diagnostics.json").read_text())['status'] == "not_converged"


def test_outputs_do_not_depend_on_thread_count(simulated, tmp_path):
    outputs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        code = main([
            "fit", "--input", str(simulated / "samples.csv"), "--lambda", "0.05",
            "--threads", threads, "--output-dir", str(out),
        ])
        assert code == EXIT_OK
        outputs.append(((out / "L_hat.csv").read_bytes(), (out / "omega_hat.csv").read_bytes()))
    assert outputs[0] == outputs[1]


def test_roc_from_model(tmp_path):
    out = tmp_path / "roc"
    code = main(["roc", "--model", "M1", "--p", "8", "--n", "100", "--seed", "1", "--output-dir", str(out)])
    assert code == EXIT_OK
    frame = pd.read_csv(out / "roc.csv")
    assert len(frame) == 100
    assert (frame['sensitivity'].iloc[0], frame['specificity'].iloc[0]) == (0.0, 1.0)


def test_roc_from_files(simulated, tmp_path):
    out = tmp_path / "roc"
    code = main([
        "roc", "--input", str(simulated / "samples.csv"), "--truth", str(simulated / "L_true.csv"),
        "--grid-count", "10", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    assert len(pd.read_csv(out / "roc.csv")) == 10

    code = main(["roc", "--input", str(simulated / "samples.csv"), "--output-dir", str(out)])
    assert code == EXIT_USAGE


def test_cv_command(simulated, tmp_path):
    out = tmp_path / "cv"
    code = main([
        "cv", "--input", str(simulated / "samples.csv"), "--grid-count", "6",
        "--folds", "3", "--center", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    frame = pd.read_csv(out / "cv.csv")
    assert list(frame.columns) == ['lambda', 'mean_score', 'se_score']
    selection = json.loads((out / "cv_selection.json").read_text())
    assert selection['one_se_idx'] <= selection['best_idx']
    assert selection['folds'] == 3


def test_config_file_sets_defaults(simulated, tmp_path):
    settings = tmp_path / "settings.yml"
    settings.write_text("solver:\n  eps_abs: 1.0e-7\ngrid:\n  count: 4\ncv:\n  folds: 2\n")
    out = tmp_path / "cv"
    code = main([
        "cv", "--input", str(simulated / "samples.csv"), "--config", str(settings), "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    assert len(pd.read_csv(out / "cv.csv")) == 4
    assert json.loads((out / "cv_selection.json").read_text())['folds'] == 2


def test_classify_with_split(labeled_csv, tmp_path):
    out = tmp_path / "classify"
    code = main([
        "classify", "--train", str(labeled_csv), "--header", "--train-fraction", "0.5",
        "--lambda", "0.05", "--seed", "2", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    rates = pd.read_csv(out / "error_rate.csv")
    assert rates['split'].tolist() == ['train', 'test']
    assert rates['n'].tolist() == [40, 40]
    assert rates['error_rate'].max() < 0.2
    confusion = pd.read_csv(out / "confusion.csv", index_col=0)
    assert confusion.values.sum() == 40


def test_classify_with_selection(labeled_csv, tmp_path):
    out = tmp_path / "classify"
    code = main([
        "classify", "--train", str(labeled_csv), "--test", str(labeled_csv), "--header",
        "--mode", "qda", "--grid-count", "4", "--folds", "3", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    assert pd.read_csv(out / "error_rate.csv")['n'].tolist() == [80, 80]


def test_predict_error_command(simulated, tmp_path):
    out = tmp_path / "pe"
    code = main([
        "predict-error", "--input", str(simulated / "samples.csv"), "--grid-count", "4",
        "--max-iter", "50000", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    frame = pd.read_csv(out / "prediction_error.csv")
    assert list(frame.columns) == ['lambda', 'mean', 'sd']
    assert len(frame) == 4
    assert np.all(frame['mean'] > 0)


def test_accuracy_command(tmp_path):
    out = tmp_path / "acc"
    code = main([
        "accuracy", "--model", "M1", "--p", "6", "--n", "40", "--replicates", "2",
        "--grid-count", "5", "--folds", "3", "--max-iter", "50000", "--output-dir", str(out),
    ])
    assert code == EXIT_OK
    frame = pd.read_csv(out / "accuracy.csv")
    assert frame['replicate'].tolist() == [1, 2]
    assert 'kl' in frame.columns
