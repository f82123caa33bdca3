"""Command-line front end.

Subcommands: fit, score, map, gen, eval, sweep, bench.  Machine-readable run
metadata is printed to stdout as a single JSON object; human diagnostics go
to stderr.  Exit codes: 0 success, 2 argument error, 3 I/O error, 4 domain
error (invalid hyperparameters, shape mismatches, undefined metrics).

Report-producing subcommands write delimited output (CSV, or JSON-lines for
.jsonl/.ndjson paths) and render a PNG figure next to it unless
--no-figures is given.
"""

from __future__ import annotations

import functools
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import evaluation, formats, plots
from .errors import FormatError, SikError
from .evaluation import DEFAULT_PSI_GRID, DEFAULT_SEEDS, DEFAULT_T
from .features import ik_map_batch, sik_map_batch
from .partitioning import fit_ensemble
from .scoring import idk_fit, idk_score_batch, ik_score_batch, sik_score_batch

EXIT_IO = 3
EXIT_DOMAIN = 4


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload))


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handles_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FormatError as exc:
            _fail(EXIT_IO, str(exc))
        except SikError as exc:
            _fail(EXIT_DOMAIN, str(exc))
        except OSError as exc:
            _fail(EXIT_IO, str(exc))

    return wrapper


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _write_reports(path: str, reports) -> None:
    if path.endswith((".jsonl", ".ndjson")):
        formats.write_reports_jsonl(path, reports)
    else:
        formats.write_reports_csv(path, reports)


def _figure_path(output: str) -> str:
    return str(Path(output).with_suffix(".png"))


seed_option = click.option(
    "--seed", type=click.IntRange(min=0), default=0, show_default=True, envvar="SIK_SEED",
    help="RNG seed (env: SIK_SEED).",
)
threads_option = click.option(
    "--threads", type=click.IntRange(min=0), default=0, show_default=True, envvar="SIK_THREADS",
    help="Worker threads; 0 = one per CPU (env: SIK_THREADS).",
)


@click.group()
def main() -> None:
    """Hypersphere-boundary anomaly detection on embedding matrices."""


@main.command()
@click.option("--input", "input_path", required=True, help="Dataset (.csv or .sikd).")
@click.option("--psi", type=int, required=True, help="Spheres per partitioning.")
@click.option("--t", "t", type=int, default=DEFAULT_T, show_default=True, help="Partitionings.")
@seed_option
@threads_option
@click.option("--model", "model_path", required=True, help="Output model file.")
@handles_errors
def fit(input_path, psi, t, seed, threads, model_path):
    """Fit a sphere ensemble and write the model file."""
    ds = formats.read_dataset(input_path)
    t0 = time.perf_counter()
    ens = fit_ensemble(ds.values, psi, t, seed, threads=threads)
    fit_seconds = time.perf_counter() - t0
    size = formats.save_ensemble(ens, model_path)
    _emit(
        {
            "command": "fit",
            "n": ds.values.shape[0],
            "d": ens.d,
            "psi": ens.psi,
            "t": ens.t,
            "seed": seed,
            "fit_seconds": fit_seconds,
            "model_bytes": size,
            "model": model_path,
        }
    )


@main.command()
@click.option("--model", "model_path", required=True, help="Model file from 'fit'.")
@click.option("--input", "input_path", required=True, help="Points to score (.csv or .sikd).")
@click.option("--method", type=click.Choice(["sik", "ik", "idk"]), default="sik", show_default=True)
@click.option("--train", "train_path", default=None, help="Training matrix (required for idk).")
@click.option("--output", "output_path", required=True, help="Score CSV to write.")
@threads_option
@handles_errors
def score(model_path, input_path, method, train_path, output_path, threads):
    """Score points against a fitted model; higher = more anomalous."""
    if method == "idk" and train_path is None:
        raise click.UsageError("--method idk requires --train to build the kernel mean")
    ens = formats.load_ensemble(model_path)
    ds = formats.read_dataset(input_path)
    t0 = time.perf_counter()
    if method == "sik":
        scores = sik_score_batch(sik_map_batch(ens, ds.values, threads=threads))
    elif method == "ik":
        scores = ik_score_batch(ik_map_batch(ens, ds.values, threads=threads))
    else:
        train = formats.read_dataset(train_path)
        mean = idk_fit(ik_map_batch(ens, train.values, threads=threads))
        scores = idk_score_batch(ik_map_batch(ens, ds.values, threads=threads), mean)
    score_seconds = time.perf_counter() - t0
    formats.write_scores_csv(output_path, scores, ds.labels)
    _emit(
        {
            "command": "score",
            "method": method,
            "n": int(scores.shape[0]),
            "score_seconds": score_seconds,
            "output": output_path,
        }
    )


@main.command("map")
@click.option("--model", "model_path", required=True, help="Model file from 'fit'.")
@click.option("--input", "input_path", required=True, help="Points to map (.csv or .sikd).")
@click.option("--kind", type=click.Choice(["sik", "ik"]), default="sik", show_default=True)
@click.option("--output", "output_path", required=True, help="Feature CSV to write.")
@threads_option
@handles_errors
def map_cmd(model_path, input_path, kind, output_path, threads):
    """Export feature vectors: t 0/1 columns (sik) or t signed indices (ik, -1 = outside)."""
    ens = formats.load_ensemble(model_path)
    ds = formats.read_dataset(input_path)
    if kind == "sik":
        formats.write_sik_features_csv(output_path, sik_map_batch(ens, ds.values, threads=threads))
    else:
        formats.write_ik_features_csv(output_path, ik_map_batch(ens, ds.values, threads=threads))
    _emit({"command": "map", "kind": kind, "n": ds.values.shape[0], "t": ens.t, "output": output_path})


@main.command()
@click.option("--normal", "n_normal", type=int, required=True, help="Normal points.")
@click.option("--anomaly", "n_anomaly", type=int, required=True, help="Anomaly points.")
@click.option("--dim", "d", type=int, required=True, help="Dimensionality.")
@click.option("--sep", "separation", type=float, default=10.0, show_default=True,
              help="Shell distance in units of sqrt(dim).")
@seed_option
@click.option("--output", "output_path", required=True, help="Dataset to write (.csv or .sikd).")
@handles_errors
def gen(n_normal, n_anomaly, d, separation, seed, output_path):
    """Generate a labeled synthetic dataset: Gaussian cluster plus a far anomaly shell."""
    ds = evaluation.gen_blobs_with_outliers(n_normal, n_anomaly, d, separation, seed)
    formats.write_dataset(output_path, ds.values, ds.labels)
    _emit(
        {
            "command": "gen",
            "n_normal": n_normal,
            "n_anomaly": n_anomaly,
            "d": d,
            "separation": separation,
            "seed": seed,
            "output": output_path,
        }
    )


def _load_labeled(input_path) -> evaluation.LabeledDataset:
    ds = formats.read_dataset(input_path)
    if ds.labels is None:
        raise click.UsageError(f"{input_path} has no label column; evaluation needs labels")
    return evaluation.LabeledDataset(values=ds.values, labels=ds.labels)


@main.command("eval")
@click.option("--input", "input_path", default=None, help="Labeled dataset (.csv or .sikd).")
@click.option("--scores", "scores_path", default=None,
              help="Evaluate an existing labeled score CSV instead of fitting.")
@click.option("--method", type=click.Choice(["sik", "ik", "idk"]), default="sik", show_default=True)
@click.option("--psi", type=int, default=32, show_default=True)
@click.option("--t", "t", type=int, default=DEFAULT_T, show_default=True)
@click.option("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS), show_default=True,
              help="Comma-separated repetition seeds.")
@threads_option
@click.option("--output", "output_path", default=None, help="Report file (.csv or .jsonl).")
@handles_errors
def eval_cmd(input_path, scores_path, method, psi, t, seeds, threads, output_path):
    """Evaluate a detector by AUROC on the held-out test split."""
    if scores_path is not None:
        scores, labels = formats.read_scores_csv(scores_path)
        if labels is None:
            raise click.UsageError(f"{scores_path} has no label column")
        _emit({"command": "eval", "auroc": evaluation.auroc(scores, labels), "n": int(scores.shape[0])})
        return
    if input_path is None:
        raise click.UsageError("either --input or --scores is required")
    dataset = _load_labeled(input_path)
    seed_list = _int_list(seeds)
    reports = [
        evaluation.run_detector(dataset, method, psi, t, s, threads=threads) for s in seed_list
    ]
    if output_path:
        _write_reports(output_path, reports)
    _emit(
        {
            "command": "eval",
            "method": method,
            "psi": psi,
            "t": t,
            "seeds": seed_list,
            "mean_auroc": float(np.mean([r.auroc for r in reports])),
            "records": len(reports),
            "output": output_path,
        }
    )


@main.command()
@click.option("--input", "input_path", required=True, help="Labeled dataset (.csv or .sikd).")
@click.option("--kind", type=click.Choice(["sensitivity", "contamination"]),
              default="sensitivity", show_default=True)
@click.option("--method", type=click.Choice(["sik", "ik", "idk"]), default="sik", show_default=True)
@click.option("--psi-grid", default=",".join(str(p) for p in DEFAULT_PSI_GRID), show_default=True)
@click.option("--t-grid", default="", help="Optional comma-separated t values.")
@click.option("--fixed-psi", type=int, default=16, show_default=True)
@click.option("--fixed-t", type=int, default=DEFAULT_T, show_default=True)
@click.option("--ratios", default="0.01,0.02,0.03,0.04,0.05", show_default=True,
              help="Contamination ratios (kind=contamination).")
@click.option("--psi", type=int, default=32, show_default=True, help="psi for contamination runs.")
@click.option("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS), show_default=True)
@threads_option
@click.option("--output", "output_path", required=True, help="Report file (.csv or .jsonl).")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render a PNG next to the report.")
@handles_errors
def sweep(input_path, kind, method, psi_grid, t_grid, fixed_psi, fixed_t, ratios, psi, seeds,
          threads, output_path, figures):
    """Hyperparameter sensitivity or training-contamination sweep."""
    dataset = _load_labeled(input_path)
    seed_list = _int_list(seeds)
    if kind == "sensitivity":
        pg, tg = _int_list(psi_grid), _int_list(t_grid)
        reports = evaluation.sensitivity_sweep(
            dataset, pg, tg, fixed_psi, fixed_t, seed_list, method=method, threads=threads
        )
        figure = None
        if figures:
            figure = _figure_path(output_path)
            plots.save_sweep_figure(reports[: len(pg)], reports[len(pg):], figure)
    else:
        ratio_list = _float_list(ratios)
        reports = evaluation.contamination_sweep(
            dataset, ratio_list, method, psi, fixed_t, seed_list, threads=threads
        )
        figure = None
        if figures:
            figure = _figure_path(output_path)
            plots.save_contamination_figure(reports, figure)
    _write_reports(output_path, reports)
    _emit(
        {
            "command": "sweep",
            "kind": kind,
            "method": method,
            "records": len(reports),
            "output": output_path,
            "figure": figure,
        }
    )


@main.command()
@click.option("--sizes", required=True, help="Comma-separated ascending point counts.")
@click.option("--dim", "d", type=int, default=128, show_default=True)
@click.option("--psi", type=int, default=128, show_default=True)
@click.option("--t", "t", type=int, default=DEFAULT_T, show_default=True)
@seed_option
@threads_option
@click.option("--output", "output_path", required=True, help="Timing table (.csv or .jsonl).")
@click.option("--figures/--no-figures", default=True, show_default=True)
@handles_errors
def bench(sizes, d, psi, t, seed, threads, output_path, figures):
    """Time boundary vs distributional detectors across dataset sizes."""
    rows = evaluation.bench_scaling(d, _int_list(sizes), psi, t, seed, threads=threads)
    if output_path.endswith((".jsonl", ".ndjson")):
        formats.write_bench_jsonl(output_path, rows)
    else:
        formats.write_bench_csv(output_path, rows)
    figure = None
    if figures:
        figure = _figure_path(output_path)
        plots.save_bench_figure(rows, figure)
    _emit({"command": "bench", "rows": len(rows), "output": output_path, "figure": figure})


if __name__ == "__main__":
    main()
