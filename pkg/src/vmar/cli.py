"""Command-line entry points for simulation, estimation, testing, and studies.

Exit codes: 0 success, 2 malformed input, 3 invalid model, 4 insufficient
data, 5 estimation failure.  Every output file is accompanied by a
``<file>.manifest.json`` sidecar recording the command, its full configuration,
the seed, the package version, and digests of the input files; data files
themselves are byte-reproducible under a fixed seed.
"""

from __future__ import annotations

import datetime
import functools
import hashlib
import json
import os
import sys

import click
import numpy as np

from . import __version__
from .errors import (
    DataInputError,
    DegenerateModelError,
    EstimationError,
    InsufficientDataError,
    InvalidModelError,
    ModelStructureError,
    VMARError,
)
from .estimate import FitOptions, fit, fit_mar_grid
from .inference import cb_scan
from .model import ModelOrder, MultiplicativeVMAR
from .montecarlo import McConfig, builtin_designs, run as run_study
from .panel import TimeSeriesPanel
from .preprocess import hp_filter_panel, select_var_order
from .simulate import SimulationConfig, simulate_vmar

EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_DATA = 4
EXIT_ESTIMATION = 5

_EXIT_BY_ERROR = (
    (InvalidModelError, EXIT_MODEL),
    (InsufficientDataError, EXIT_DATA),
    (EstimationError, EXIT_ESTIMATION),
    (DataInputError, EXIT_INPUT),
    (ModelStructureError, EXIT_INPUT),
    (DegenerateModelError, EXIT_INPUT),
)


def _guarded(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except VMARError as exc:
            for kind, code in _EXIT_BY_ERROR:
                if isinstance(exc, kind):
                    click.echo(f"error: {exc}", err=True)
                    sys.exit(code)
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise DataInputError(f"environment variable {name}={raw!r} is not an integer")


def _default_seed(seed: int | None) -> int:
    return _env_int("VMAR_SEED", 0) if seed is None else seed


def _default_jobs(jobs: int | None) -> int:
    return _env_int("VMAR_JOBS", 1) if jobs is None else jobs


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path: str, command: str, config: dict, seed: int, inputs: list) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "inputs": {path: _sha256(path) for path in inputs},
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(f"{out_path}.manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _load_model(path: str) -> MultiplicativeVMAR:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise DataInputError(f"cannot read model file {path}: {exc}")
    try:
        return MultiplicativeVMAR.from_json(text)
    except (ModelStructureError, DegenerateModelError) as exc:
        raise DataInputError(f"malformed model JSON in {path}: {exc}")


def _parse_order(text: str) -> tuple[int, int]:
    try:
        r, s = (int(x) for x in text.split(","))
    except ValueError:
        raise DataInputError(f"--order must look like 'r,s', got {text!r}")
    if r < 0 or s < 0:
        raise DataInputError(f"--order components must be non-negative, got {text!r}")
    return r, s


def _prepare_panel(data_path: str, hp: float | None, take_log: bool):
    """Load, optionally log, optionally HP-detrend, then demean.

    Returns (working panel, preprocessing record).
    """
    panel = TimeSeriesPanel.read_csv(data_path)
    record = {"log": take_log, "hp_smoothing": hp}
    if take_log:
        if np.any(panel.values <= 0.0):
            raise DataInputError("--log requires strictly positive values")
        panel = panel.with_values(np.log(panel.values))
    if hp is not None:
        _, panel = hp_filter_panel(panel, hp)
    means = panel.values.mean(axis=0)
    record["removed_means"] = means.tolist()
    panel = panel.with_values(panel.values - means)
    return panel, record


@click.group()
@click.version_option(version=__version__)
def main():
    """Simulate, estimate, and test vector mixed causal-noncausal models."""


@main.command("simulate")
@click.option("--model", "model_path", required=True, type=click.Path(), help="Model JSON file.")
@click.option("--T", "n_obs", required=True, type=int, help="Number of observations.")
@click.option("--burn-in", type=int, default=None, help="Per-side burn-in (default: automatic).")
@click.option("--seed", type=int, default=None, help="RNG seed (default: VMAR_SEED or 0).")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output CSV.")
@_guarded
def cmd_simulate(model_path, n_obs, burn_in, seed, out_path):
    """Simulate a panel from a model JSON file and write it as CSV."""
    seed = _default_seed(seed)
    model = _load_model(model_path)
    panel = simulate_vmar(model, SimulationConfig(n_obs=n_obs, burn_in=burn_in, seed=seed))
    panel.to_csv(out_path)
    _write_manifest(
        out_path,
        "simulate",
        {"model": model.to_dict(), "T": n_obs, "burn_in": burn_in},
        seed,
        [model_path],
    )
    click.echo(f"wrote {n_obs} observations to {out_path}")


@main.command("estimate")
@click.option("--data", "data_path", required=True, type=click.Path(), help="Input panel CSV.")
@click.option("--hp", "hp_smoothing", type=float, default=None,
              help="HP-detrend first with this smoothing (e.g. 129600 for monthly data).")
@click.option("--log", "take_log", is_flag=True, default=False, help="Work in logs.")
@click.option("--order", "order_text", type=str, default=None, help="Lag,lead orders as 'r,s'.")
@click.option("--auto-order", "p_max", type=int, default=None,
              help="Select the pseudo-causal order p by BIC (p <= this bound), then "
                   "pick (r, s) with r + s = p by likelihood.")
@click.option("--restrict", "rank_deficit", type=int, default=None,
              help="Rank deficit k of the lead matrices (common-bubble restriction).")
@click.option("--starts", type=int, default=100, show_default=True, help="Optimization starts.")
@click.option("--seed", type=int, default=None, help="RNG seed (default: VMAR_SEED or 0).")
@click.option("--jobs", type=int, default=None, help="Parallel starts (default: VMAR_JOBS or 1).")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output JSON.")
@_guarded
def cmd_estimate(data_path, hp_smoothing, take_log, order_text, p_max, rank_deficit,
                 starts, seed, jobs, out_path):
    """Estimate a (possibly restricted) model on a CSV panel."""
    seed = _default_seed(seed)
    jobs = _default_jobs(jobs)
    if order_text is None and p_max is None:
        raise DataInputError("give either --order r,s or --auto-order p_max")
    panel, record = _prepare_panel(data_path, hp_smoothing, take_log)
    opts = FitOptions(n_starts=starts, seed=seed)
    payload = {"preprocessing": record, "names": panel.names}

    if order_text is not None:
        r, s = _parse_order(order_text)
    else:
        p = select_var_order(panel, p_max)
        payload["pseudo_causal_order"] = p
        if p == 0:
            raise InsufficientDataError(
                "BIC selects a white-noise panel (p=0); nothing to estimate"
            )
        if panel.n_series == 1:
            grid = fit_mar_grid(panel.series(0), p, opts=opts)
            payload["grid_logliks"] = {f"({r_},{s_})": ll for (r_, s_), ll in grid.cell_logliks.items()}
            r, s = grid.r, grid.s
        else:
            cells = {}
            for r_ in range(p, -1, -1):
                s_ = p - r_
                try:
                    cells[(r_, s_)] = fit(panel.values, ModelOrder(panel.n_series, r_, s_),
                                          opts=opts, n_jobs=jobs)
                except VMARError:
                    continue
            if not cells:
                raise EstimationError(f"every (r, s) split of p={p} failed")
            payload["grid_logliks"] = {f"({r_},{s_})": f.loglik for (r_, s_), f in cells.items()}
            (r, s), _ = max(cells.items(), key=lambda kv: (kv[1].loglik, kv[0][0]))

    order = ModelOrder(panel.n_series, r, s)
    result = fit(panel.values, order, restriction=rank_deficit, opts=opts, n_jobs=jobs)
    payload["order"] = {"r": r, "s": s}
    payload["fit"] = result.to_dict()
    _write_json(out_path, payload)
    _write_manifest(
        out_path,
        "estimate",
        {"data": data_path, "hp": hp_smoothing, "log": take_log, "order": order_text,
         "auto_order": p_max, "restrict": rank_deficit, "starts": starts, "jobs": jobs},
        seed,
        [data_path],
    )
    click.echo(f"fitted VMAR({r},{s}) loglik {result.loglik:.4f} -> {out_path}")


@main.command("test-cb")
@click.option("--data", "data_path", required=True, type=click.Path(), help="Input panel CSV.")
@click.option("--hp", "hp_smoothing", type=float, default=None, help="HP-detrend first.")
@click.option("--log", "take_log", is_flag=True, default=False, help="Work in logs.")
@click.option("--order", "order_text", type=str, default="1,1", show_default=True,
              help="Lag,lead orders as 'r,s'.")
@click.option("--level", type=float, default=0.95, show_default=True, help="Test level.")
@click.option("--starts", type=int, default=100, show_default=True, help="Optimization starts.")
@click.option("--seed", type=int, default=None, help="RNG seed (default: VMAR_SEED or 0).")
@click.option("--jobs", type=int, default=None, help="Parallel starts (default: VMAR_JOBS or 1).")
@click.option("--out", "out_prefix", required=True, type=click.Path(),
              help="Output prefix; writes <prefix>.json and <prefix>.csv.")
@_guarded
def cmd_test_cb(data_path, hp_smoothing, take_log, order_text, level, starts, seed, jobs, out_prefix):
    """Run the full common-bubble rank scan on a CSV panel."""
    seed = _default_seed(seed)
    jobs = _default_jobs(jobs)
    panel, record = _prepare_panel(data_path, hp_smoothing, take_log)
    if panel.n_series < 2:
        raise InsufficientDataError("common bubbles need N >= 2 series")
    r, s = _parse_order(order_text)
    order = ModelOrder(panel.n_series, r, s)
    opts = FitOptions(n_starts=starts, seed=seed)
    report = cb_scan(panel, order, opts=opts, level=level, n_jobs=jobs)
    payload = {"preprocessing": record, "report": report.to_dict()}
    json_path, csv_path = f"{out_prefix}.json", f"{out_prefix}.csv"
    _write_json(json_path, payload)
    report.to_csv(csv_path)
    config = {"data": data_path, "hp": hp_smoothing, "log": take_log, "order": order_text,
              "level": level, "starts": starts, "jobs": jobs}
    _write_manifest(json_path, "test-cb", config, seed, [data_path])
    _write_manifest(csv_path, "test-cb", config, seed, [data_path])
    for row in report.rows:
        status = "failed" if row.failed else ("reject" if row.reject else "no rejection")
        detail = "" if row.failed else f" LR={row.lr_stat:.2f} df={row.df} p={row.pvalue:.4f}"
        click.echo(f"{row.label}: {status}{detail}")
    click.echo(f"wrote {json_path} and {csv_path}")


@main.command("montecarlo")
@click.option("--design", required=True, type=str,
              help="Built-in design name or a JSON config file path.")
@click.option("--reps", type=int, default=None, help="Override the number of replications.")
@click.option("--seed", type=int, default=None, help="Base seed (default: VMAR_SEED or 0).")
@click.option("--jobs", type=int, default=None, help="Parallel replications (default: VMAR_JOBS or 1).")
@click.option("--out", "out_prefix", required=True, type=click.Path(),
              help="Output prefix; writes <prefix>.json and <prefix>.csv.")
@_guarded
def cmd_montecarlo(design, reps, seed, jobs, out_prefix):
    """Run a replication study from a built-in design or a JSON config."""
    from dataclasses import replace

    seed = _default_seed(seed)
    jobs = _default_jobs(jobs)
    designs = builtin_designs()
    inputs = []
    if design in designs:
        config = designs[design]
    elif os.path.exists(design):
        try:
            with open(design) as handle:
                config = McConfig.from_dict(json.load(handle))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataInputError(f"malformed design file {design}: {exc}")
        inputs = [design]
    else:
        names = ", ".join(designs)
        raise DataInputError(f"unknown design {design!r}; built-in designs: {names}")
    changes = {"base_seed": seed}
    if reps is not None:
        changes["n_reps"] = reps
    config = replace(config, **changes)
    result = run_study(config, n_jobs=jobs)
    json_path, csv_path = f"{out_prefix}.json", f"{out_prefix}.csv"
    _write_json(json_path, result.to_dict())
    result.to_csv(csv_path)
    cli_config = {"design": design, "reps": config.n_reps, "jobs": jobs}
    _write_manifest(json_path, "montecarlo", cli_config, seed, inputs)
    _write_manifest(csv_path, "montecarlo", cli_config, seed, inputs)
    for t in result.tests:
        click.echo(
            f"{config.name} {t.label}: LR {t.freq['lr']:.3f} (se {t.se['lr']:.3f}) "
            f"BIC {t.freq['bic']:.3f} AIC {t.freq['aic']:.3f} HQC {t.freq['hqc']:.3f} "
            f"[{t.n_ok}/{config.n_reps} reps]"
        )
    if result.n_failures:
        click.echo(f"{result.n_failures} replication(s) failed", err=True)
    click.echo(f"wrote {json_path} and {csv_path}")


if __name__ == "__main__":
    main()
