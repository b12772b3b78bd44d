"""explosive-ar CLI - Main entry point."""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .companion import classify_region_d2, phi_map, spectral_report
from .config import RunConfig, Settings, load_run_config, parse_theta
from .errors import BadH, ExplosiveARError
from .estimation import lse
from .export import dumps, model_payload, read_path, write_estimation, write_json, write_path, write_report
from .models import ModelSpec
from .moments import covariance_report
from .montecarlo import run_experiment
from .simulate import (
    explosive_demo,
    forward_backward_equivalence,
    recursion_residual,
    simulate_stationary,
)

logger = logging.getLogger(__name__)
console = Console(stderr=True)


def _emit(payload: dict) -> None:
    click.echo(dumps(payload))


def _fail(e: ExplosiveARError) -> None:
    console.print(f"[red]Error: {e.message}[/]")
    sys.exit(e.exit_code)


def parse_h(text: Optional[str]) -> Optional[dict]:
    """``identity``, ``constant``, ``lse_score``, ``projection:J``, ``tanh[:J,K]`` or a JSON object."""
    if text is None:
        return None
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise BadH(f"Cannot parse h: {e}")
    kind, _, arg = text.partition(":")
    try:
        if kind == "projection":
            return {"kind": kind, "index": int(arg)}
        if kind == "tanh" and arg:
            return {"kind": kind, "coords": [int(c) for c in arg.split(",")]}
    except ValueError:
        raise BadH(f"Invalid h argument in {text!r}")
    return {"kind": kind}


# ----- Shared options -----

def output_options(f):
    """Flags accepted both before and after the subcommand name."""
    f = click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="RNG seed (unsigned 64-bit)")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Output file format")(f)
    f = click.option("--out", type=click.Path(file_okay=False), help="Output directory")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="TOML or JSON run configuration")(f)
    return f


def model_options(f):
    f = click.option("--tol", type=float, help="Truncation tolerance")(f)
    f = click.option("--n", type=int, help="Path length")(f)
    f = click.option("--df", type=float, help="Degrees of freedom for student_t noise")(f)
    f = click.option("--noise", type=click.Choice(["gaussian", "rademacher", "uniform_centered", "student_t"]),
                     help="Noise family")(f)
    f = click.option("--sigma2", type=float, help="Noise variance")(f)
    f = click.option("--theta", help="Comma separated coefficients, e.g. 0,4")(f)
    return f


def resolve_config(ctx: click.Context, **flags: Any) -> RunConfig:
    """Merge group-level and command-level flags over the config file (flags win)."""
    merged = dict(ctx.obj.get("globals", {}))
    merged.update({k: v for k, v in flags.items() if v is not None})
    config_path = merged.pop("config_path", None)
    fmt = merged.pop("fmt", None)
    if fmt is not None:
        merged["format"] = fmt
    if isinstance(merged.get("theta"), str):
        merged["theta"] = parse_theta(merged["theta"])
    config = load_run_config(Path(config_path) if config_path else None, merged)
    logger.info("effective config: %s", config.echo())
    return config


def handles_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ExplosiveARError as e:
            _fail(e)
    return wrapper


# ----- Main CLI Group -----

@click.group()
@click.version_option(version=__version__)
@output_options
@click.option("--verbose", "-v", count=True, help="-v for progress, -vv for numerical detail")
@click.pass_context
def cli(ctx, config_path, out, fmt, seed, verbose):
    """explosive-ar - stationary solutions of purely explosive autoregressions."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )
    ctx.ensure_object(dict)
    ctx.obj["globals"] = {"config_path": config_path, "out": out, "fmt": fmt, "seed": seed}
    try:
        ctx.obj["settings"] = Settings.load()
    except ExplosiveARError as e:
        _fail(e)


# ----- Commands -----

@cli.command("classify")
@click.option("--theta", required=True, help="Comma separated coefficients, e.g. 0,4")
@click.pass_context
@handles_errors
def cmd_classify(ctx, theta: str):
    """Classify the companion spectrum of THETA."""
    spec = ModelSpec(theta=parse_theta(theta))
    report = spectral_report(spec, ctx.obj["settings"])
    payload = {
        "theta": spec.theta.tolist(),
        "eigenvalues": [[float(z.real), float(z.imag)] for z in report.eigenvalues],
        "rho": report.rho,
        "rho_lower": report.rho_lower,
        "region": report.region.value,
        "boundary": report.boundary,
    }
    if spec.d == 2:
        closed = classify_region_d2(spec)
        payload["closed_form_region"] = closed.value
        payload["agreement"] = closed is report.region

    table = Table(title="Spectrum")
    table.add_column("eigenvalue", style="cyan")
    table.add_column("modulus")
    for z in report.eigenvalues:
        table.add_row(f"{z.real:.6g}{z.imag:+.6g}j", f"{abs(z):.6g}")
    console.print(table)
    _emit(payload)


@cli.command("simulate")
@model_options
@output_options
@click.pass_context
@handles_errors
def cmd_simulate(ctx, **flags):
    """Simulate the stationary solution and write the path."""
    config = resolve_config(ctx, **flags)
    settings = ctx.obj["settings"]
    path = simulate_stationary(config.model_spec(), config.require_n(), config.require_seed(),
                               config.tol, settings)
    residual = float(np.max(np.abs(recursion_residual(path))))
    files = write_path(path, config.out_dir() / "path", config.echo(), config.format)
    for f in files:
        console.print(f"[green]✓ Wrote {f}[/]")
    _emit({
        "n": path.n,
        "K": path.truncation_k,
        "truncation_bound": path.truncation_bound,
        "max_residual": residual,
        "residual_ok": residual <= path.truncation_bound,
        "files": [str(f) for f in files],
        "config": config.echo(),
    })


@cli.command("moments")
@model_options
@output_options
@click.pass_context
@handles_errors
def cmd_moments(ctx, **flags):
    """Exact covariance structure and limit covariances."""
    config = resolve_config(ctx, **flags)
    report = covariance_report(config.model_spec(), ctx.obj["settings"])
    payload = model_payload(report, config.echo())
    payload["residuals"]["passed"] = report.residuals.passed
    if config.out:
        target = write_json(report, config.out_dir() / "moments.json", config.echo())
        console.print(f"[green]✓ Wrote {target}[/]")
    _emit(payload)


@cli.command("estimate")
@model_options
@output_options
@click.option("--path", "path_file", type=click.Path(dir_okay=False), help="Path CSV to estimate from")
@click.pass_context
@handles_errors
def cmd_estimate(ctx, path_file, **flags):
    """Least squares estimate from a path file or a fresh simulation."""
    config = resolve_config(ctx, **flags)
    if path_file:
        path = read_path(Path(path_file), theta=config.theta)
        theta = path.theta if config.theta is not None else None
    else:
        path = simulate_stationary(config.model_spec(), config.require_n(), config.require_seed(),
                                   config.tol, ctx.obj["settings"])
        theta = path.theta
    star = phi_map(theta).value if theta is not None else None
    result = lse(path, theta=theta, theta_star=star)
    if config.out:
        for f in write_estimation(result, config.out_dir(), config.echo()):
            console.print(f"[green]✓ Wrote {f}[/]")
    _emit(model_payload(result, config.echo()))


@cli.command("mc")
@model_options
@output_options
@click.option("--statistic", type=click.Choice(["mean_clt_u", "mean_clt_y", "h_clt", "lse_clt", "corrected_clt"]))
@click.option("--replications", "-R", type=int, help="Number of replications")
@click.option("--h", "h_text", help="h for h_clt: identity, projection:J, lse_score, tanh[:J,..], constant or JSON")
@click.option("--workers", type=int, help="Worker processes")
@click.option("--tol-cov-rel", type=float, help="Relative covariance tolerance")
@click.pass_context
@handles_errors
def cmd_mc(ctx, statistic, replications, h_text, workers, tol_cov_rel, **flags):
    """Monte Carlo reproduction of a limit theorem."""
    config = resolve_config(
        ctx,
        statistic=statistic,
        replications=replications,
        h=parse_h(h_text),
        workers=workers,
        tol_cov_rel=tol_cov_rel,
        **flags,
    )
    experiment = config.experiment()
    with console.status(f"Running {experiment.replications} replications..."):
        report = run_experiment(experiment, ctx.obj["settings"])
    if config.out:
        for f in write_report(report, config.out_dir(), config.echo(), config.format):
            console.print(f"[green]✓ Wrote {f}[/]")
    colour = "green" if report.passed else "yellow"
    console.print(f"[{colour}]{report.statistic}: cov_rel_err={report.cov_rel_err:.4f} pass={report.passed}[/]")
    _emit(model_payload(report, config.echo(), exclude={"samples"}))


@cli.command("forward-equiv")
@model_options
@output_options
@click.pass_context
@handles_errors
def cmd_forward_equiv(ctx, **flags):
    """Compare the forward AR with the time-reversed explosive model on shared noise."""
    config = resolve_config(ctx, **flags)
    report = forward_backward_equivalence(config.model_spec(), config.require_n(), config.require_seed(),
                                          config.tol, ctx.obj["settings"])
    payload = model_payload(report, config.echo())
    payload["within_bound"] = report.within_bound
    _emit(payload)


@cli.command("demo")
@model_options
@output_options
@click.option("--u0-mode", type=click.Choice(["stationary", "custom", "zero"]), default="stationary")
@click.option("--u0", "u0_text", help="Comma separated initial state for --u0-mode custom")
@click.pass_context
@handles_errors
def cmd_demo(ctx, u0_mode, u0_text, **flags):
    """Forward iteration of the explosive recursion from a chosen initial state."""
    config = resolve_config(ctx, **flags)
    u0 = parse_theta(u0_text) if u0_text else None
    trajectory = explosive_demo(config.model_spec(), u0_mode, config.require_n(), config.require_seed(),
                                u0=u0, tol=config.tol, settings=ctx.obj["settings"])
    if config.out:
        target = write_json(trajectory, config.out_dir() / "demo.json", config.echo())
        console.print(f"[green]✓ Wrote {target}[/]")
    _emit({
        "mode": trajectory.mode,
        "limit": trajectory.limit.tolist(),
        "limit_norm": float(np.linalg.norm(trajectory.limit)),
        "saturated": trajectory.saturated,
        "saturated_at": trajectory.saturated_at,
        "truncation_bound": trajectory.truncation_bound,
        "config": config.echo(),
    })


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
