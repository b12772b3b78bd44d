"""CSV and JSON writers and readers."""

import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .companion import as_theta
from .errors import ConfigError, DimensionMismatch, PathTooShort
from .models import EstimationResult, MonteCarloReport, NoiseDraw, NoiseSpec, SimulationPath

logger = logging.getLogger(__name__)


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float):
        return value if np.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _finite_or_none(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(v) for v in value]
    return value


def dumps(data: Any) -> str:
    """Strict JSON: NaN and infinities become null."""
    return json.dumps(_finite_or_none(data), indent=2, allow_nan=False)


def _write_json(data: dict, target: Path) -> Path:
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(data) + "\n")
    logger.info("Wrote %s", target)
    return target


def model_payload(model: BaseModel, config: Optional[dict] = None, exclude: Optional[set] = None) -> dict:
    data = model.model_dump(mode="json", by_alias=True, exclude=exclude)
    if config is not None:
        data["config"] = config
    return data


def write_json(model: BaseModel, target: Path, config: Optional[dict] = None) -> Path:
    return _write_json(model_payload(model, config), target)


# ----- Paths -----

def path_frame(path: SimulationPath) -> pd.DataFrame:
    """Columns ``k, Y_k, Z_k``; ``Z_k`` is missing where the path has no innovation."""
    k = np.arange(path.y_start, path.y_start + path.y.size)
    z = np.full(k.size, np.nan)
    exposed = (k >= 1) & (k <= path.n)
    z[exposed] = path.z[k[exposed] - 1]
    return pd.DataFrame({"k": k, "Y_k": path.y, "Z_k": z})


def path_metadata(path: SimulationPath, config: Optional[dict] = None) -> dict:
    spec = path.noise.spec
    meta: dict[str, Any] = {
        "theta": path.theta.tolist(),
        "sigma2": spec.sigma2,
        "noise": spec.family,
        "df": spec.df,
        "seed": path.noise.seed,
        "n": path.n,
        "K": path.truncation_k,
        "truncation_bound": path.truncation_bound,
        "direction": path.direction,
    }
    if config is not None:
        meta["config"] = config
    return meta


def write_path(
    path: SimulationPath,
    target: Path,
    config: Optional[dict] = None,
    fmt: str = "csv",
) -> list[Path]:
    """Write ``<stem>.csv`` plus the ``<stem>.json`` sidecar, or a single JSON document."""
    if fmt == "json":
        frame = path_frame(path)
        data = path_metadata(path, config)
        data["k"] = frame["k"].tolist()
        data["Y_k"] = frame["Y_k"].tolist()
        data["Z_k"] = [None if np.isnan(v) else v for v in frame["Z_k"].tolist()]
        return [_write_json(data, target.with_suffix(".json"))]

    csv_path = target.with_suffix(".csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    path_frame(path).to_csv(csv_path, index=False, na_rep="")
    logger.info("Wrote %s", csv_path)
    sidecar = _write_json(path_metadata(path, config), target.with_suffix(".json"))
    return [csv_path, sidecar]


def _read_sidecar(sidecar: Path) -> dict:
    try:
        meta = json.loads(sidecar.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot parse {sidecar}: {e}")
    if not isinstance(meta, dict):
        raise ConfigError(f"{sidecar} must hold a JSON object")
    return meta


def _read_path_frame(csv_path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(csv_path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot parse {csv_path}: {e}")
    missing = {"k", "Y_k", "Z_k"} - set(frame.columns)
    if missing:
        raise ConfigError(f"{csv_path} lacks columns {sorted(missing)}")
    try:
        frame["k"] = pd.to_numeric(frame["k"])
        frame["Y_k"] = pd.to_numeric(frame["Y_k"]).astype(float)
        frame["Z_k"] = pd.to_numeric(frame["Z_k"]).astype(float)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{csv_path} holds a non-numeric value: {e}")
    if frame["k"].isna().any() or not pd.api.types.is_integer_dtype(frame["k"]):
        raise ConfigError(f"{csv_path}: k must be an integer in every row")
    return frame


def read_path(
    csv_path: Path,
    theta: Optional[Sequence[float]] = None,
    sidecar: Optional[Path] = None,
) -> SimulationPath:
    """
    Rebuild a backward SimulationPath from a path CSV.

    ``theta`` comes from the argument or from the sidecar next to the CSV.
    """
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ConfigError(f"Path file not found: {csv_path}")
    sidecar = Path(sidecar) if sidecar else csv_path.with_suffix(".json")
    meta = _read_sidecar(sidecar) if sidecar.exists() else {}

    if theta is None:
        if "theta" not in meta:
            raise ConfigError(f"theta is needed to read {csv_path}: no sidecar and no --theta")
        theta = meta["theta"]
    try:
        theta = as_theta(theta)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid theta for {csv_path}: {e}")
    d = theta.size

    frame = _read_path_frame(csv_path)
    k = frame["k"].to_numpy()
    if k.size == 0 or np.any(np.diff(k) != 1):
        raise ConfigError(f"{csv_path}: k must be contiguous and increasing")
    if k[0] != 1 - d:
        raise DimensionMismatch(f"{csv_path} starts at k={k[0]}, expected {1 - d} for d={d}")

    n = int(k[-1])
    if n < d + 1:
        raise PathTooShort(f"{csv_path} holds {n} observations, at least {d + 1} are needed")
    y = frame["Y_k"].to_numpy()
    if np.any(~np.isfinite(y)):
        raise ConfigError(f"{csv_path}: Y_k is missing or not finite for some k")
    z = frame["Z_k"].to_numpy()[d:]
    if np.any(~np.isfinite(z)):
        raise ConfigError(f"{csv_path}: Z_k is missing or not finite for some k >= 1")

    try:
        spec = NoiseSpec(
            family=meta.get("noise", "gaussian"),
            sigma2=meta.get("sigma2", 1.0),
            df=meta.get("df"),
        )
        return SimulationPath(
            theta=theta,
            y=y,
            noise=NoiseDraw(values=z, seed=meta.get("seed"), spec=spec),
            n=n,
            direction="backward",
            truncation_k=int(meta.get("K", 0)),
            truncation_bound=float(meta.get("truncation_bound", 0.0)),
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid metadata in {sidecar}: {e}")


# ----- Estimation -----

def estimation_row(result: EstimationResult) -> dict:
    """One flat record; vectors become ``name_1..name_d`` columns."""
    row: dict[str, Any] = {"n": result.n, "gram_singular": result.gram_singular,
                           "gram_min_eig": result.gram_min_eig,
                           "corrected_extended": result.corrected_extended}
    for name in ("theta_hat", "theta_corrected", "theta_true", "theta_star_true",
                 "normalized_dev_star", "normalized_dev_theta"):
        values = getattr(result, name)
        if values is None:
            continue
        for i, v in enumerate(values, start=1):
            row[f"{name}_{i}"] = float(v)
    return row


def write_estimation(result: EstimationResult, out_dir: Path, config: Optional[dict] = None) -> list[Path]:
    json_path = write_json(result, out_dir / "estimate.json", config)
    csv_path = out_dir / "estimate.csv"
    pd.DataFrame([estimation_row(result)]).to_csv(csv_path, index=False)
    logger.info("Wrote %s", csv_path)
    return [json_path, csv_path]


# ----- Monte Carlo -----

def summary_frame(report: MonteCarloReport) -> pd.DataFrame:
    rows: list[tuple[str, Any]] = [
        ("statistic", report.statistic),
        ("replications", report.replications),
        ("failures", report.failures),
        ("cov_rel_err", report.cov_rel_err),
        ("tol_cov_rel", report.tol_cov_rel),
        ("rank", report.rank),
        ("mahalanobis_ks", report.mahalanobis_ks),
        ("ks_threshold", report.ks_threshold),
        ("pass", report.passed),
    ]
    rows += [(f"marginal_ks_{i}", v) for i, v in enumerate(report.marginal_ks, start=1)]
    rows += [(f"mean_{i}", v) for i, v in enumerate(report.empirical_mean, start=1)]
    return pd.DataFrame(rows, columns=["metric", "value"])


def write_report(
    report: MonteCarloReport,
    out_dir: Path,
    config: Optional[dict] = None,
    fmt: str = "csv",
) -> list[Path]:
    """``report.json`` always; ``samples.csv`` and ``summary.csv`` for the csv format."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [write_json(report, out_dir / "report.json", config)]
    if fmt == "csv":
        m = report.samples.shape[1] if report.samples.ndim == 2 else 1
        samples = pd.DataFrame(report.samples, columns=[f"s{i}" for i in range(1, m + 1)])
        samples.to_csv(out_dir / "samples.csv", index=False)
        summary_frame(report).to_csv(out_dir / "summary.csv", index=False)
        written += [out_dir / "samples.csv", out_dir / "summary.csv"]
        logger.info("Wrote samples.csv and summary.csv to %s", out_dir)
    return written
