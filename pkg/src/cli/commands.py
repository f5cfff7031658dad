"""
hierband command line.

Commands: fit, simulate, roc, cv, classify, predict-error, accuracy.
Exit codes: 0 ok, 1 usage, 2 data or dimension error, 3 solver failure
or rows that did not converge.
"""

import functools
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from src.apps.discriminant import (
    CRITERIA,
    Mode,
    confusion_matrix,
    fit_classifier,
    misclassification_rate,
    predict,
)
from src.apps.prediction import prediction_error_path, split_indices, train_test_split
from src.estimator.fit import FitResult, fit, fit_path, lambda_max, omega, sample_covariance
from src.linalg.matrices import LowerTriangular, SampleMatrix
from src.modelselect.cv import cross_validate
from src.modelselect.grid import DEFAULT_COUNT, DEFAULT_RATIO, lambda_grid
from src.penalty.weights import WeightScheme
from src.reporting.writers import read_matrix_csv, write_json, write_matrix_csv, write_table_csv
from src.rowsolver.config import SolverConfig, load_settings
from src.simulate.experiments import SELECTION_RULES, run_accuracy_experiment
from src.simulate.models import Model, SimulationSpec, nonzero_ratio, simulate
from src.simulate.roc import roc_curve, roc_frame
from src.utils.exceptions import DataValidationError, DimensionError, SolverError
from src.utils.logging_config import get_logger, setup_logging
from src.utils.metrics import RunMetrics, new_run_id
from src.validation.validators import read_labeled_csv, read_sample_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

DEFAULT_FOLDS = 5

logger = get_logger(__name__)
console = Console()


class CommandRun:
    """Wraps one command execution with metrics, logging and diagnostics output."""

    def __init__(self, command: str, opts: Dict[str, Any]):
        self.command = command
        self.opts = opts
        self.output_dir = Path(opts['output_dir'])
        self.settings = load_settings(opts['config']) if opts.get('config') else {}
        self.metrics = RunMetrics(
            run_id=new_run_id(command),
            command=command,
            start_time=datetime.now(),
        )

    @property
    def cfg(self) -> SolverConfig:
        cfg = SolverConfig.from_env()
        if self.opts.get('config'):
            cfg = SolverConfig.from_yaml(self.opts['config'], base=cfg)
        return cfg.override(
            eps_abs=self.opts.get('eps_abs'),
            eps_rel=self.opts.get('eps_rel'),
            max_iter=self.opts.get('max_iter'),
        )

    @property
    def scheme(self) -> WeightScheme:
        return WeightScheme.parse(self.opts['scheme'])

    @property
    def threads(self) -> Optional[int]:
        return self.opts.get('threads')

    @property
    def seed(self) -> int:
        return self.opts['seed']

    def setting(self, section: str, key: str, value, default):
        """CLI value, else the YAML setting, else the default."""
        if value is not None:
            return value
        return (self.settings.get(section) or {}).get(key, default)

    def grid_options(self):
        count = self.setting('grid', 'count', self.opts.get('grid_count'), DEFAULT_COUNT)
        ratio = self.setting('grid', 'ratio', self.opts.get('grid_ratio'), DEFAULT_RATIO)
        return int(count), float(ratio)

    def folds(self) -> int:
        return int(self.setting('cv', 'folds', self.opts.get('folds'), DEFAULT_FOLDS))

    def execute(self, body: Callable[["CommandRun"], int]) -> int:
        logger.info("command_started", command=self.command, run_id=self.metrics.run_id)
        try:
            code = body(self)
        except Exception as e:
            self.metrics.error_message = str(e)
            self.metrics.finalize(status="failed")
            logger.error("command_failed", command=self.command, error=str(e))
            self._save()
            raise

        self.metrics.finalize(status="success" if code == EXIT_OK else "not_converged")
        logger.info(
            "command_completed",
            command=self.command,
            status=self.metrics.status,
            wall_time=self.metrics.wall_time_seconds,
        )
        self._save()
        _print_summary(self.metrics.get_summary())
        return code

    def _save(self):
        filepath = self.metrics.save(str(self.output_dir))
        logger.info("diagnostics_saved", filepath=str(filepath))


def _print_summary(summary: Dict[str, Any]):
    table = Table(title="hierband")
    table.add_column("metric", style="cyan")
    table.add_column("value")
    for key, value in summary.items():
        table.add_row(key, str(value))
    console.print(table)


def _fit_code(fits) -> int:
    return EXIT_OK if all(f.converged for f in fits) else EXIT_SOLVER


def common_options(func):
    """Options shared by every command."""
    options = [
        click.option('--output-dir', type=click.Path(file_okay=False), default='output', show_default=True),
        click.option('--scheme', type=click.Choice([s.value for s in WeightScheme]), default='quadratic', show_default=True),
        click.option('--threads', type=click.IntRange(min=1), default=None, help='Worker cap.'),
        click.option('--seed', type=click.IntRange(min=0, max=2 ** 64 - 1), default=0, show_default=True),
        click.option('--eps-abs', type=click.FloatRange(min=0, min_open=True), default=None),
        click.option('--eps-rel', type=click.FloatRange(min=0, min_open=True), default=None),
        click.option('--max-iter', type=click.IntRange(min=1), default=None),
        click.option('--config', type=click.Path(exists=True, dir_okay=False), default=None, help='YAML settings file.'),
        click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False), default='WARNING', show_default=True),
        click.option('--log-file', type=click.Path(dir_okay=False), default=None),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def grid_options(func):
    func = click.option('--grid-ratio', type=click.FloatRange(min=0, max=1, min_open=True, max_open=True), default=None)(func)
    func = click.option('--grid-count', type=click.IntRange(min=2), default=None)(func)
    return func


def run_command(name: str):
    """Turn body(run, **command_options) into a click callback returning an exit code."""
    def decorator(body):
        @functools.wraps(body)
        def callback(**opts):
            setup_logging(log_level=opts['log_level'], log_file=opts['log_file'])
            run = CommandRun(name, opts)
            return run.execute(lambda r: body(r, **opts))
        return callback
    return decorator


@click.group(name='hierband')
def cli():
    """Adaptive banded inverse Cholesky estimation with a hierarchical group penalty."""


@cli.command('fit')
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--header', is_flag=True, help='Skip a header line.')
@click.option('--lambda', 'lam', type=click.FloatRange(min=0), default=None)
@click.option('--lambda-max', 'use_lambda_max', is_flag=True, help='Fit at the numerically found lambda_max.')
@click.option('--center', is_flag=True, help='Center columns before fitting.')
@click.option('--folds', type=click.IntRange(min=2), default=None)
@grid_options
@common_options
@run_command('fit')
def fit_command(run: CommandRun, input_path, header, lam, use_lambda_max, center, **_):
    """Estimate L and Omega from a sample CSV."""
    if lam is not None and use_lambda_max:
        raise click.UsageError("--lambda and --lambda-max are mutually exclusive")

    X = read_sample_csv(input_path, header=header)
    run.metrics.n_samples, run.metrics.n_variables = X.n, X.p
    if center:
        X = X.centered()

    if use_lambda_max:
        lam = lambda_max(sample_covariance(X), run.scheme)
    elif lam is None:
        count, ratio = run.grid_options()
        grid = lambda_grid(X, run.scheme, count, ratio)
        cv = cross_validate(X, grid, run.folds(), run.scheme, run.cfg, run.seed, run.threads)
        write_table_csv(run.output_dir / 'cv.csv', cv.to_frame())
        lam = cv.best_lambda
        run.metrics.extra['cv'] = cv.selection()

    result = fit(X, lam, run.scheme, run.cfg, run.threads)
    run.metrics.record_fit(result)
    run.metrics.extra['lambda'] = result.lambda_
    _write_fit(run.output_dir, result)
    return _fit_code([result])


def _write_fit(output_dir: Path, result: FitResult):
    write_matrix_csv(output_dir / 'L_hat.csv', result.L_hat)
    write_matrix_csv(output_dir / 'omega_hat.csv', omega(result))
    write_table_csv(
        output_dir / 'bandwidths.csv',
        pd.DataFrame({'row': np.arange(1, result.p + 1), 'bandwidth': result.bandwidths}),
    )


@cli.command('simulate')
@click.option('--model', type=click.Choice([m.value for m in Model]), required=True)
@click.option('--p', 'p', type=click.IntRange(min=1), required=True)
@click.option('--n', 'n', type=click.IntRange(min=1), required=True)
@click.option('--unit-scale', is_flag=True, help='Use D = I.')
@common_options
@run_command('simulate')
def simulate_command(run: CommandRun, model, p, n, unit_scale, **_):
    """Draw a ground-truth factor and samples from it."""
    spec = SimulationSpec(model=model, p=p, n=n, seed=run.seed)
    truth, X = simulate(spec, unit_scale=unit_scale)
    run.metrics.n_samples, run.metrics.n_variables = X.n, X.p
    run.metrics.extra['nonzero_ratio'] = nonzero_ratio(truth.L)

    write_matrix_csv(run.output_dir / 'L_true.csv', truth.L)
    write_matrix_csv(run.output_dir / 'samples.csv', X.data)
    write_table_csv(
        run.output_dir / 'bandwidths_true.csv',
        pd.DataFrame({'row': np.arange(1, p + 1), 'bandwidth': truth.bandwidths}),
    )
    return EXIT_OK


@cli.command('roc')
@click.option('--model', type=click.Choice([m.value for m in Model]), default=None)
@click.option('--p', 'p', type=click.IntRange(min=1), default=None)
@click.option('--n', 'n', type=click.IntRange(min=1), default=None)
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--truth', 'truth_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--header', is_flag=True)
@grid_options
@common_options
@run_command('roc')
def roc_command(run: CommandRun, model, p, n, input_path, truth_path, header, **_):
    """Sensitivity and specificity along a lambda path."""
    if input_path is not None:
        if truth_path is None or model is not None:
            raise click.UsageError("--input requires --truth and excludes --model")
        X = read_sample_csv(input_path, header=header)
        L_true = LowerTriangular.from_dense(read_matrix_csv(truth_path))
        if L_true.p != X.p:
            raise DimensionError(f"truth has p={L_true.p}, data has p={X.p}")
    else:
        if model is None or p is None or n is None:
            raise click.UsageError("give --model, --p and --n, or --input with --truth")
        truth, X = simulate(SimulationSpec(model=model, p=p, n=n, seed=run.seed))
        L_true = truth.L
    run.metrics.n_samples, run.metrics.n_variables = X.n, X.p

    count, ratio = run.grid_options()
    grid = lambda_grid(X, run.scheme, count, ratio)
    points = roc_curve(X, L_true, grid, run.scheme, run.cfg, run.threads)
    write_table_csv(run.output_dir / 'roc.csv', roc_frame(grid, points))
    return EXIT_OK


@cli.command('cv')
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--header', is_flag=True)
@click.option('--center', is_flag=True)
@click.option('--folds', type=click.IntRange(min=2), default=None)
@grid_options
@common_options
@run_command('cv')
def cv_command(run: CommandRun, input_path, header, center, **_):
    """Cross-validated lambda selection."""
    X = read_sample_csv(input_path, header=header)
    run.metrics.n_samples, run.metrics.n_variables = X.n, X.p
    count, ratio = run.grid_options()
    grid = lambda_grid(X.centered() if center else X, run.scheme, count, ratio)
    result = cross_validate(X, grid, run.folds(), run.scheme, run.cfg, run.seed, run.threads, center)

    write_table_csv(run.output_dir / 'cv.csv', result.to_frame())
    write_json(run.output_dir / 'cv_selection.json', result.selection())
    run.metrics.extra['cv'] = result.selection()
    return EXIT_OK


@cli.command('classify')
@click.option('--train', 'train_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--test', 'test_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--train-fraction', type=click.FloatRange(min=0, max=1, min_open=True, max_open=True), default=None)
@click.option('--header', is_flag=True)
@click.option('--mode', type=click.Choice([m.value for m in Mode]), default='lda', show_default=True)
@click.option('--criterion', type=click.Choice(CRITERIA), default='likelihood', show_default=True)
@click.option('--lambda', 'lam', type=click.FloatRange(min=0), default=None)
@click.option('--folds', type=click.IntRange(min=2), default=None)
@grid_options
@common_options
@run_command('classify')
def classify_command(run: CommandRun, train_path, test_path, train_fraction, header, mode, criterion, lam, **_):
    """Penalized LDA or QDA with a confusion matrix and error rates."""
    if test_path is not None and train_fraction is not None:
        raise click.UsageError("--test and --train-fraction are mutually exclusive")

    X, y = read_labeled_csv(train_path, header=header)
    if test_path is not None:
        X_test, y_test = read_labeled_csv(test_path, header=header)
        if X_test.p != X.p:
            raise DimensionError(f"test data has p={X_test.p}, training data has p={X.p}")
        X_train, y_train = X, y
    else:
        train_idx, test_idx = split_indices(X.n, train_fraction or 0.5, run.seed)
        X_train, y_train = X.take(train_idx), y[train_idx]
        X_test, y_test = X.take(test_idx), y[test_idx]
    run.metrics.n_samples, run.metrics.n_variables = X_train.n, X_train.p

    count, ratio = run.grid_options()
    model = fit_classifier(
        X_train, y_train, mode=mode, lam=lam, k=run.folds(), scheme=run.scheme,
        cfg=run.cfg, seed=run.seed, criterion=criterion, threads=run.threads,
        count=count, ratio=ratio,
    )
    train_pred = predict(model, X_train.data, run.threads)
    test_pred = predict(model, X_test.data, run.threads)

    rates = pd.DataFrame({
        'split': ['train', 'test'],
        'n': [X_train.n, X_test.n],
        'error_rate': [
            misclassification_rate(y_train, train_pred),
            misclassification_rate(y_test, test_pred),
        ],
    })
    write_table_csv(run.output_dir / 'error_rate.csv', rates)
    confusion_matrix(y_test, test_pred, labels=model.labels).to_csv(run.output_dir / 'confusion.csv')
    run.metrics.extra['lambdas'] = [c.lambda_ for c in model.classes]
    run.metrics.extra['test_error'] = float(rates['error_rate'].iloc[1])
    return EXIT_OK


@cli.command('predict-error')
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--header', is_flag=True)
@click.option('--train-fraction', type=click.FloatRange(min=0, max=1, min_open=True, max_open=True), default=0.5, show_default=True)
@click.option('--center', is_flag=True)
@grid_options
@common_options
@run_command('predict-error')
def predict_error_command(run: CommandRun, input_path, header, train_fraction, center, **_):
    """Held-out prediction error along a lambda path."""
    X = read_sample_csv(input_path, header=header)
    X_train, X_test = train_test_split(X, train_fraction, run.seed)
    if center:
        means = X_train.data.mean(axis=0)
        X_train, X_test = X_train.centered(), SampleMatrix(X_test.data - means)
    run.metrics.n_samples, run.metrics.n_variables = X_train.n, X_train.p

    count, ratio = run.grid_options()
    grid = lambda_grid(X_train, run.scheme, count, ratio)
    fits = fit_path(X_train, grid, run.scheme, run.cfg, run.threads)
    for result in fits:
        run.metrics.record_fit(result)
    write_table_csv(run.output_dir / 'prediction_error.csv', prediction_error_path(fits, X_test))
    return _fit_code(fits)


@cli.command('accuracy')
@click.option('--model', type=click.Choice([m.value for m in Model]), required=True)
@click.option('--p', 'p', type=click.IntRange(min=1), required=True)
@click.option('--n', 'n', type=click.IntRange(min=1), required=True)
@click.option('--replicates', type=click.IntRange(min=1), default=10, show_default=True)
@click.option('--selection', type=click.Choice(SELECTION_RULES), default='best', show_default=True)
@click.option('--folds', type=click.IntRange(min=2), default=None)
@grid_options
@common_options
@run_command('accuracy')
def accuracy_command(run: CommandRun, model, p, n, replicates, selection, **_):
    """Replicated estimation-accuracy study with CV-selected lambda."""
    count, ratio = run.grid_options()
    table = run_accuracy_experiment(
        model, p, n, replicates, run.scheme, run.cfg, run.seed,
        k=run.folds(), grid_count=count, grid_ratio=ratio,
        selection=selection, threads=run.threads,
    )
    run.metrics.n_variables = p
    run.metrics.extra['median_scaled_frob'] = float(table['scaled_frob'].median())
    write_table_csv(run.output_dir / 'accuracy.csv', table)
    return EXIT_OK if bool(table['converged'].all()) else EXIT_SOLVER


def main(argv=None) -> int:
    """Console entry point; returns the process exit code."""
    try:
        code = cli.main(args=argv, prog_name='hierband', standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except (DataValidationError, DimensionError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_DATA
    except SolverError as exc:
        click.echo(f"Solver error: {exc}", err=True)
        return EXIT_SOLVER
    except ValueError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_USAGE
    # --help and similar return None
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
