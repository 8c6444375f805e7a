"""Monte-Carlo grid over (n, d, alpha): simulate, fit, compare with the limits."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .asymptotics import limit_rho1, predicted_limits, theorem1_constants
from .estimator import DEFAULT_RANK_TOL, alignment, cca_fit, cross_covariance_singular_values
from .sampling import generate_dataset, make_stream
from .spiked_model import SpikedParams, build_population_model, joint_sqrt, validate_params

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

RECORD_FIELDS = (
    "n", "d", "alpha", "rho", "rep", "component", "rho_hat",
    "inner_x", "abs_inner_x", "angle_x_deg", "inner_y", "abs_inner_y", "angle_y_deg",
    "lambda_x1_scaled", "lambda_xy2_over_d", "oracle_rho1", "status",
)
COMPONENT_METRICS = ("rho_hat", "inner_x", "abs_inner_x", "angle_x_deg",
                     "inner_y", "abs_inner_y", "angle_y_deg")


@dataclass(frozen=True)
class GridConfig:
    n_values: tuple = (20, 80)
    d_values: tuple = (200, 500)
    alpha_values: tuple = (0.2, 8.0)
    rho: float = 0.7
    theta_x: float = 0.75 * math.pi
    theta_y: float = 0.75 * math.pi
    sigma2_x: float = 1.0
    sigma2_y: float = 1.0
    tau2_x: float = 1.0
    tau2_y: float = 1.0
    reps: int = 100
    k: int = 5
    master_seed: int = 20240501
    center: bool = False
    rank_tol: float = DEFAULT_RANK_TOL
    out_dir: str | None = None

    def __post_init__(self):
        for name in ("n_values", "d_values", "alpha_values"):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if any(n < 2 for n in self.n_values):
            raise ValueError("every n must be >= 2")
        if any(a == 1 for a in self.alpha_values):
            raise ValueError("boundary alpha=1 unsupported")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        for cell_n, d, alpha in self.cells():
            validate_params(self.params(d, alpha))

    def params(self, d: int, alpha: float) -> SpikedParams:
        return SpikedParams(
            sigma2_x=self.sigma2_x, tau2_x=self.tau2_x,
            sigma2_y=self.sigma2_y, tau2_y=self.tau2_y,
            alpha=float(alpha), rho=self.rho,
            theta_x=self.theta_x, theta_y=self.theta_y, d=int(d),
        )

    def cells(self):
        """(n, d, alpha) triples sorted by n, then d, then alpha."""
        return sorted(
            (int(n), int(d), float(a))
            for n in set(self.n_values) for d in set(self.d_values) for a in set(self.alpha_values)
        )


def load_config(path: str | Path, **overrides) -> GridConfig:
    """Read a TOML key/value file whose keys are :class:`GridConfig` fields."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    known = {f.name for f in dataclasses.fields(GridConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return GridConfig(**raw)


@dataclass
class RepRecord:
    n: int
    d: int
    alpha: float
    rho: float
    rep: int
    rho_hat: np.ndarray
    inner_x: np.ndarray
    abs_inner_x: np.ndarray
    angle_x_deg: np.ndarray
    inner_y: np.ndarray
    abs_inner_y: np.ndarray
    angle_y_deg: np.ndarray
    lambda_x1_scaled: float = math.nan
    lambda_xy2_over_d: float = math.nan
    oracle_rho1: float = math.nan
    status: str = "ok"
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def cell(self) -> tuple:
        return (self.n, self.d, self.alpha)

    def rows(self):
        for i in range(len(self.rho_hat)):
            yield {
                "n": self.n, "d": self.d, "alpha": self.alpha, "rho": self.rho,
                "rep": self.rep, "component": i + 1,
                **{name: float(getattr(self, name)[i]) for name in COMPONENT_METRICS},
                "lambda_x1_scaled": self.lambda_x1_scaled,
                "lambda_xy2_over_d": self.lambda_xy2_over_d,
                "oracle_rho1": self.oracle_rho1,
                "status": self.status,
            }


@lru_cache(maxsize=64)
def _cell_model(p: SpikedParams):
    model = build_population_model(p)
    return model, joint_sqrt(model)


def _alpha_key(alpha: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(alpha)))[0]


def rep_stream(master_seed: int, n: int, d: int, alpha: float, rep: int) -> np.random.Generator:
    """Random stream for one replication, keyed by the cell contents and rep index."""
    return make_stream(master_seed, n, d, _alpha_key(alpha), rep)


def _failed(p: SpikedParams, n: int, rep: int, k: int, msg: str) -> RepRecord:
    nan = np.full(k, np.nan)
    return RepRecord(n=n, d=p.d, alpha=p.alpha, rho=p.rho, rep=rep,
                     rho_hat=nan, inner_x=nan, abs_inner_x=nan, angle_x_deg=nan,
                     inner_y=nan, abs_inner_y=nan, angle_y_deg=nan,
                     status=f"error: {msg}")


def run_rep(p: SpikedParams, n: int, rep_index: int, master_seed: int, *,
            k: int = 5, center: bool = False, rank_tol: float = DEFAULT_RANK_TOL) -> RepRecord:
    if p.alpha == 1:
        raise ValueError("boundary alpha=1 unsupported")
    model, root = _cell_model(p)
    stream = rep_stream(master_seed, n, p.d, p.alpha, rep_index)
    data = generate_dataset(model, root, n, stream,
                            seed_record=(master_seed, n, p.d, p.alpha, rep_index))
    try:
        est = cca_fit(data.x, data.y, center=center, rank_tol=rank_tol, k=k)
    except (ValueError, np.linalg.LinAlgError) as exc:
        log.warning("rep failed (n=%d d=%d alpha=%g rep=%d): %s", n, p.d, p.alpha, rep_index, exc)
        return _failed(p, n, rep_index, k, str(exc))

    ax = [alignment(est.psi_x_hat[:, i], model.psi_x) for i in range(k)]
    ay = [alignment(est.psi_y_hat[:, i], model.psi_y) for i in range(k)]

    lam_x1 = float(est.diagnostics["lambda_x"][0])
    sv_xy = cross_covariance_singular_values(data.x, data.y, center=center)
    oracle = math.nan
    if p.rho > 0 and p.alpha > 1:
        oracle = limit_rho1(data.z1, data.z2, theorem1_constants(p.sigma2_x, p.sigma2_y, p.rho))

    return RepRecord(
        n=n, d=p.d, alpha=p.alpha, rho=p.rho, rep=rep_index,
        rho_hat=est.rho_hat.copy(),
        inner_x=np.array([a["inner"] for a in ax]),
        abs_inner_x=np.array([a["abs_inner"] for a in ax]),
        angle_x_deg=np.array([a["angle_deg"] for a in ax]),
        inner_y=np.array([a["inner"] for a in ay]),
        abs_inner_y=np.array([a["abs_inner"] for a in ay]),
        angle_y_deg=np.array([a["angle_deg"] for a in ay]),
        lambda_x1_scaled=n * lam_x1 / max(float(p.d) ** p.alpha, float(p.d)),
        lambda_xy2_over_d=float(sv_xy[1] / p.d) if sv_xy.size > 1 else math.nan,
        oracle_rho1=oracle,
        diagnostics={k_: v for k_, v in est.diagnostics.items() if not isinstance(v, np.ndarray)},
    )


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def records_to_csv(records, path_or_buf) -> None:
    """Write one CSV row per (replication, component) with the fixed header."""
    own = isinstance(path_or_buf, (str, Path))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            for row in rec.rows():
                writer.writerow([_fmt(row[name]) for name in RECORD_FIELDS])
    finally:
        if own:
            fh.close()


def records_csv_text(records) -> str:
    buf = io.StringIO()
    records_to_csv(records, buf)
    return buf.getvalue()


def _stats(values) -> dict:
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return {"mean": None, "std": None, "median": None}
    return {"mean": float(arr.mean()), "std": float(arr.std()), "median": float(np.median(arr))}


def summarize(records, cfg: GridConfig | None = None) -> list[dict]:
    """Per (cell, component) statistics, sorted by n, d, alpha, component.

    Failed replications are counted and left out of the statistics.  When
    ``cfg`` is given, each row also carries the predicted limits.
    """
    records = list(records)
    if not records:
        raise ValueError("summarize needs at least one record")
    by_cell: dict[tuple, list[RepRecord]] = {}
    for rec in records:
        by_cell.setdefault(rec.cell, []).append(rec)

    rows = []
    for cell in sorted(by_cell):
        n, d, alpha = cell
        recs = sorted(by_cell[cell], key=lambda r: r.rep)
        good = [r for r in recs if r.ok]
        k = max(len(r.rho_hat) for r in recs)
        pred = None
        if cfg is not None:
            pred = predicted_limits(cfg.params(d, alpha), n)
        oracle_err = [abs(r.rho_hat[0] - r.oracle_rho1) for r in good]
        for i in range(k):
            row = {"n": n, "d": d, "alpha": alpha, "component": i + 1,
                   "n_reps": len(recs), "n_failed": len(recs) - len(good)}
            for name in COMPONENT_METRICS:
                row[name] = _stats([getattr(r, name)[i] for r in good])
            if i == 0:
                row["lambda_x1_scaled"] = _stats([r.lambda_x1_scaled for r in good])
                row["lambda_xy2_over_d"] = _stats([r.lambda_xy2_over_d for r in good])
                row["oracle_rho1"] = _stats([r.oracle_rho1 for r in good])
                row["oracle_abs_err"] = _stats(oracle_err)
            if pred is not None:
                first = i == 0
                row["predicted"] = {
                    "regime": pred.regime.value,
                    "rho_hat": (pred.rho_first if first else pred.rho_rest),
                    "abs_inner_x": pred.abs_inner_x_first if first else pred.abs_inner_rest,
                    "abs_inner_y": pred.abs_inner_y_first if first else pred.abs_inner_rest,
                    "lambda_x1_scaled": n * pred.pc_eigval_scale["mean"],
                    "lambda_xy2_over_d": pred.lambda_xy_rest_over_d,
                }
            rows.append(row)
    return rows


def summary_by_cell(rows: list[dict]) -> list[dict]:
    """Group flat summary rows into one object per cell (the JSON layout)."""
    cells: dict[tuple, dict] = {}
    for row in rows:
        key = (row["n"], row["d"], row["alpha"])
        cell = cells.setdefault(key, {"n": row["n"], "d": row["d"], "alpha": row["alpha"],
                                      "n_reps": row["n_reps"], "n_failed": row["n_failed"],
                                      "components": []})
        cell["components"].append({k: v for k, v in row.items()
                                   if k not in ("n", "d", "alpha", "n_reps", "n_failed")})
    return [cells[k] for k in sorted(cells)]


@dataclass
class GridResult:
    records: list
    summary: list
    config: GridConfig


def _write_outputs(out_dir: Path, records, cfg: GridConfig, summary=None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    records_to_csv(records, out_dir / "records.csv")
    meta = {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(cfg).items()}
    meta["complete"] = summary is not None
    meta["n_records"] = len(records)
    (out_dir / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
    if summary is not None:
        (out_dir / "summary.json").write_text(json.dumps(summary_by_cell(summary), indent=2) + "\n")


def run_grid(cfg: GridConfig, threads: int = 1, out_dir: str | Path | None = None) -> GridResult:
    """Run every (cell, rep) task; output is identical for any ``threads``."""
    out = out_dir if out_dir is not None else cfg.out_dir
    tasks = [(cfg.params(d, alpha), n, rep) for n, d, alpha in cfg.cells() for rep in range(cfg.reps)]
    opts = dict(k=cfg.k, center=cfg.center, rank_tol=cfg.rank_tol)

    def task(t):
        p, n, rep = t
        return run_rep(p, n, rep, cfg.master_seed, **opts)

    done: list[RepRecord] = []
    try:
        if threads <= 1:
            for t in tasks:
                done.append(task(t))
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for rec in pool.map(task, tasks):
                    done.append(rec)
    except BaseException:
        if out is not None:
            log.error("grid aborted; flushing %d completed records", len(done))
            _write_outputs(Path(out), done, cfg)
        raise

    summary = summarize(done, cfg)
    if out is not None:
        _write_outputs(Path(out), done, cfg, summary)
    return GridResult(records=done, summary=summary, config=cfg)
