"""Ballistic sweeps: the full estimator battery across a temperature ladder.

Each temperature produces one SweepRow; the summary extrapolates the
scaled columns to t -> 0 by two-point Richardson extrapolation (assuming
first-order-in-t corrections, a documented heuristic).  Rendering to CSV,
gnuplot blocks and markdown is deterministic byte-for-byte given the rows.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import get_float, get_floats, get_int, get_str, potential_params
from .errors import PreconditionError
from .logsobolev import ls_lower_bound_search, ls_upper_bound, ls_variational
from .measures import build_gibbs, gaussian_density, laplace_gap, rescaled_moments
from .pl import pl_constant_static
from .poincare import lyapunov_bound_formula, poincare_spectral, select_lyapunov_params
from .potentials import Potential, get_potential

COLUMNS = [
    "t",
    "poincare_spectral",
    "poincare_over_t",
    "lyapunov_bound",
    "ls_lower",
    "ls_variational",
    "ls_upper",
    "ls_variational_over_t",
    "laplace_gap",
    "rescaled_var",
]


@dataclass(frozen=True)
class SweepRow:
    t: float
    poincare_spectral: float
    poincare_over_t: float
    lyapunov_bound: float
    ls_lower: float
    ls_variational: float
    ls_upper: float
    ls_variational_over_t: float
    laplace_gap: float
    rescaled_var: float

    def values(self) -> List[float]:
        return [getattr(self, c) for c in COLUMNS]


@dataclass(frozen=True)
class SweepSummary:
    cbls_estimate: float
    cap_estimate: float
    cpl_static: float
    lambda_min: float
    note: str = (
        "limits extrapolated from the two smallest temperatures assuming "
        "first-order corrections in t (heuristic)"
    )


@dataclass
class SweepConfig:
    potential_name: str
    potential_kwargs: Dict
    temperatures: List[float]
    grid_resolution: float = 200.0
    pl_resolution: float = 1000.0
    lyapunov_k: float = 1.0
    lsi_x0_points: int = 61
    variational_iters: int = 200
    variational_step: float = 0.5
    seed: int = 1

    @classmethod
    def from_mapping(cls, cfg: Dict[str, str]) -> "SweepConfig":
        return cls(
            potential_name=get_str(cfg, "potential.name"),
            potential_kwargs=potential_params(cfg),
            temperatures=get_floats(cfg, "temperatures"),
            grid_resolution=get_float(cfg, "grid.resolution", 200.0),
            pl_resolution=get_float(cfg, "pl.resolution", 1000.0),
            lyapunov_k=get_float(cfg, "lyapunov.k", 1.0),
            lsi_x0_points=get_int(cfg, "lsi.x0_points", 61),
            variational_iters=get_int(cfg, "lsi.iters", 200),
            variational_step=get_float(cfg, "lsi.step", 0.5),
            seed=get_int(cfg, "seed", 1),
        )

    def potential(self) -> Potential:
        return get_potential(self.potential_name, **self.potential_kwargs)


@dataclass
class RowFailure:
    t: float
    reason: str


def require_finite_pl(p: Potential, resolution: float = 1000.0):
    """Static estimate, refusing if gradient domination fails (divergent)."""
    est = pl_constant_static(p, resolution=resolution)
    if est.divergent:
        raise PreconditionError(
            f"PL constant divergent for {p.name} "
            f"(witness near x = {est.diagnostics.get('witness')}); sweep refused"
        )
    return est


def compute_row(p: Potential, t: float, cfg: SweepConfig, c_pl: float) -> SweepRow:
    mu = build_gibbs(p, t, resolution=cfg.grid_resolution, c_pl=c_pl)
    cp = poincare_spectral(mu)
    params = select_lyapunov_params(p, t, k=cfg.lyapunov_k, c_pl=c_pl)
    lyap = lyapunov_bound_formula(params)
    lower = ls_lower_bound_search(mu, x0_points=cfg.lsi_x0_points)
    init = gaussian_density(mu, lower.diagnostics["x0"], lower.diagnostics["sigma"])
    var = ls_variational(mu, init, iters=cfg.variational_iters, step=cfg.variational_step)
    upper = ls_upper_bound(p, t, mu=mu, c_pl=c_pl, cp_value=cp.value)
    gap = laplace_gap(p, t)
    mom = rescaled_moments(mu)
    row = SweepRow(
        t=t,
        poincare_spectral=cp.value,
        poincare_over_t=cp.value / t,
        lyapunov_bound=lyap,
        ls_lower=lower.value,
        ls_variational=max(var.value, lower.value),
        ls_upper=upper.value,
        ls_variational_over_t=max(var.value, lower.value) / t,
        laplace_gap=gap,
        rescaled_var=mom.var_z,
    )
    _check_row(row)
    return row


def _check_row(row: SweepRow):
    if not all(math.isfinite(v) for v in row.values()):
        raise PreconditionError(f"non-finite field in sweep row at t = {row.t}")
    if not (row.ls_lower <= row.ls_variational <= row.ls_upper + 1e-6):
        raise PreconditionError(
            f"ordering violated at t = {row.t}: "
            f"{row.ls_lower} <= {row.ls_variational} <= {row.ls_upper} + 1e-6"
        )
    if not (row.poincare_spectral <= row.ls_upper + 1e-6):
        raise PreconditionError(
            f"Poincare exceeds LS upper bound at t = {row.t}"
        )


def _richardson(t1: float, v1: float, t2: float, v2: float) -> float:
    """Extrapolate v(t) = L + a t to t = 0 from two samples, t1 < t2."""
    return v1 - t1 * (v2 - v1) / (t2 - t1)


def run_sweep(cfg: SweepConfig) -> Tuple[List[SweepRow], SweepSummary, List[RowFailure]]:
    """One row per temperature plus the extrapolated summary.

    A component failure aborts its row with a diagnostic, not the sweep;
    failed rows are reported separately.
    """
    p = cfg.potential()
    static = require_finite_pl(p, resolution=cfg.pl_resolution)
    c_pl = static.value
    lam_min = p.analytic.lambda_min_at_min
    if lam_min is None:
        lam_min = float(p.hess(float(p.minimizer)))

    rows: List[SweepRow] = []
    failures: List[RowFailure] = []
    for t in cfg.temperatures:
        try:
            rows.append(compute_row(p, t, cfg, c_pl))
        except Exception as exc:  # abort the row, keep the sweep
            failures.append(RowFailure(t=t, reason=str(exc)))

    if len(rows) >= 2:
        by_t = sorted(rows, key=lambda r: r.t)
        r1, r2 = by_t[0], by_t[1]
        cap = _richardson(r1.t, r1.poincare_over_t, r2.t, r2.poincare_over_t)
        cbls = _richardson(r1.t, r1.ls_variational_over_t, r2.t, r2.ls_variational_over_t)
        # clamp into the certified two-sided band at the smallest temperature
        # (lower may exceed upper by rounding; keep the band well-ordered)
        band_lo = min(r1.ls_lower, r1.ls_upper) / r1.t
        cbls = min(max(cbls, band_lo), r1.ls_upper / r1.t)
    elif rows:
        cap = rows[0].poincare_over_t
        cbls = rows[0].ls_variational_over_t
    else:
        cap = cbls = math.nan
    summary = SweepSummary(
        cbls_estimate=cbls, cap_estimate=cap, cpl_static=c_pl, lambda_min=lam_min
    )
    return rows, summary, failures


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def render_csv(rows: List[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def render_gnuplot(rows: List[SweepRow]) -> str:
    """Two index-separated blocks: scaled Poincare vs t, then LS columns vs t."""
    lines = ["# block 0: t poincare_over_t"]
    for row in rows:
        lines.append(f"{_fmt(row.t)} {_fmt(row.poincare_over_t)}")
    lines.append("")
    lines.append("")
    lines.append("# block 1: t ls_lower ls_variational ls_upper ls_variational_over_t")
    for row in rows:
        lines.append(
            f"{_fmt(row.t)} {_fmt(row.ls_lower)} {_fmt(row.ls_variational)} "
            f"{_fmt(row.ls_upper)} {_fmt(row.ls_variational_over_t)}"
        )
    lines.append("")
    return "\n".join(lines)


def render_markdown(rows: List[SweepRow]) -> str:
    header = "| " + " | ".join(COLUMNS) + " |"
    rule = "|" + "|".join([" --- "] * len(COLUMNS)) + "|"
    lines = [header, rule]
    for row in rows:
        lines.append("| " + " | ".join(_fmt(v) for v in row.values()) + " |")
    lines.append("")
    return "\n".join(lines)


def render_summary_csv(summary: SweepSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(["cbls_estimate", "cap_estimate", "cpl_static", "lambda_min", "note"])
    writer.writerow([
        _fmt(summary.cbls_estimate), _fmt(summary.cap_estimate),
        _fmt(summary.cpl_static), _fmt(summary.lambda_min), summary.note,
    ])
    return buf.getvalue()


_RENDERERS = {
    "csv": render_csv,
    "gnuplot": render_gnuplot,
    "markdown-table": render_markdown,
}

_EXTENSIONS = {"csv": "csv", "gnuplot": "dat", "markdown-table": "md"}


def render_outputs(
    rows: List[SweepRow], fmt: str, out_dir: Optional[Path] = None,
    basename: str = "sweep",
) -> str:
    """Render rows in the requested format; write a file when out_dir given."""
    if not rows:
        raise PreconditionError("no rows to render")
    try:
        text = _RENDERERS[fmt](rows)
    except KeyError:
        raise PreconditionError(
            f"unknown format {fmt!r}; expected one of {sorted(_RENDERERS)}"
        ) from None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{basename}.{_EXTENSIONS[fmt]}"
        path.write_bytes(text.encode())
    return text
