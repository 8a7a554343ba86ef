"""Gradient-domination (PL) constant estimators and consequence checks.

The static estimator takes the supremum of r(x) = 2 (f(x) - f*) / |grad f|^2
over a refined grid; the dynamic estimator extracts the least constant
making the exponential-decrease inequality hold along gradient-flow
trajectories.  Both agree for registry potentials with a finite constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalError, PreconditionError
from .potentials import Potential

# Exclusion thresholds around the minimizer, where the defining ratio is 0/0
# and is extended by its C^2 Taylor limit (dominated by the Hessian floor).
GRAD_EXCLUDE = 1e-9
GAP_EXCLUDE = 1e-12

# A ratio beyond this at a point with f - f* > GAP_SIGNIFICANT declares a
# spurious critical point, i.e. a divergent constant.
DIVERGENCE_THRESHOLD = 1e6
GAP_SIGNIFICANT = 1e-6

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ConstantEstimate:
    """A numeric estimate with a certified bracket and method tag."""

    value: float
    bracket: tuple
    method: str
    diagnostics: dict = field(default_factory=dict)
    divergent: bool = False

    def __post_init__(self):
        lo, hi = self.bracket
        if not (lo <= self.value <= hi or self.divergent):
            raise NumericalError(
                f"estimate {self.value} outside bracket [{lo}, {hi}]"
            )


@dataclass(frozen=True)
class GrowthMargin:
    margin: float
    witness: Optional[float]


@dataclass(frozen=True)
class HessianFloorReport:
    passed: bool
    lambda_min: float
    floor: float


def _ratio(p: Potential, x: np.ndarray) -> np.ndarray:
    gap = np.asarray(p.gap(x), dtype=float)
    g2 = np.square(np.asarray(p.grad(x), dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(g2 > 0, 2.0 * gap / np.where(g2 > 0, g2, 1.0), np.inf)
    return r, gap, g2


def pl_constant_static(
    p: Potential,
    domain: Optional[tuple] = None,
    resolution: float = 200.0,
    refine: bool = True,
) -> ConstantEstimate:
    """Supremum of the gradient-domination ratio over a refined 1D grid.

    Points within the minimizer exclusion zone (tiny gradient and tiny gap)
    are skipped.  A ratio above DIVERGENCE_THRESHOLD at a point with a
    significant gap flags the constant as divergent and reports the witness.
    Golden-section refinement sharpens the grid argmax when ``refine`` is on.
    """
    if p.f_star is None:
        raise PreconditionError(f"{p.name}: f_star unknown and minimizer unbracketable")
    if p.dim != 1:
        raise PreconditionError("static estimator works on 1D potentials")
    lo, hi = domain if domain is not None else (-p.domain_halfwidth, p.domain_halfwidth)
    n = int(math.ceil((hi - lo) * resolution)) + 1
    x = np.linspace(lo, hi, n)

    r, gap, g2 = _ratio(p, x)
    excluded = (np.sqrt(g2) < GRAD_EXCLUDE) & (gap < GAP_EXCLUDE)
    candidates = ~excluded

    diverged = candidates & (r > DIVERGENCE_THRESHOLD) & (gap > GAP_SIGNIFICANT)
    if np.any(diverged):
        witness = float(x[np.argmax(np.where(diverged, r, -np.inf))])
        return ConstantEstimate(
            value=math.inf,
            bracket=(float(np.max(r[candidates & np.isfinite(r)], initial=0.0)), math.inf),
            method="grid",
            diagnostics={"witness": witness, "resolution": resolution},
            divergent=True,
        )

    r_valid = np.where(candidates & np.isfinite(r), r, -np.inf)
    i = int(np.argmax(r_valid))
    best_x, best_r = float(x[i]), float(r_valid[i])
    method = "grid"

    if refine and 0 < i < n - 1:
        a, b = float(x[i - 1]), float(x[i + 1])

        def rat(z: float) -> float:
            rr, gg, g2v = _ratio(p, np.asarray(z))
            rv = float(rr)
            if rv > DIVERGENCE_THRESHOLD and float(gg) > GAP_SIGNIFICANT:
                raise _Divergent(z, best_r)
            return rv

        try:
            c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
            rc, rd = rat(c), rat(d)
            for _ in range(120):
                if rc > rd:
                    b, d, rd = d, c, rc
                    c = b - _GOLDEN * (b - a)
                    rc = rat(c)
                else:
                    a, c, rc = c, d, rd
                    d = a + _GOLDEN * (b - a)
                    rd = rat(d)
            xr = 0.5 * (a + b)
            rr = rat(xr)
            if rr > best_r:
                best_x, best_r = xr, rr
            method = "refined"
        except _Divergent as exc:
            return ConstantEstimate(
                value=math.inf,
                bracket=(exc.lower, math.inf),
                method="refined",
                diagnostics={"witness": exc.witness, "resolution": resolution},
                divergent=True,
            )

    analytic = p.analytic.c_pl
    upper = analytic if (analytic is not None and math.isfinite(analytic)) else math.inf
    # the ratio evaluation can overshoot a known closed form by rounding
    best_r = min(best_r, upper)
    return ConstantEstimate(
        value=best_r,
        bracket=(best_r, upper),
        method=method,
        diagnostics={"argmax": best_x, "resolution": resolution, "grid_points": n},
    )


class _Divergent(Exception):
    def __init__(self, witness: float, lower: float):
        self.witness = float(witness)
        self.lower = float(lower)


def pl_constant_dynamic(
    p: Potential,
    initializations: Sequence[float],
    horizon: float,
    step: float,
) -> ConstantEstimate:
    """Least constant making the decay bound hold on sampled flow times.

    Runs gradient flow from each initialization and takes the supremum of
    2 s / log((f(x_0) - f*) / (f(x_s) - f*)) over the geometric sample
    schedule {h, 2h, 4h, ..., S}.  Each sample certifies a lower bound.
    """
    from .dynamics import gradient_flow_run

    if p.f_star is None:
        raise PreconditionError(f"{p.name}: f_star required")
    best = 0.0
    diags = {}
    for x0 in initializations:
        if p.gap(np.asarray(float(x0))) <= 0:
            raise PreconditionError(f"initialization {x0} is already at the infimum")
        traj = gradient_flow_run(p, float(x0), horizon, step)
        g0 = traj.objective_gaps[0]
        valid = traj.objective_gaps[1:] > 0
        if not np.any(valid):
            raise NumericalError(
                f"objective gap underflowed before any valid sample from x0={x0}"
            )
        s = traj.times[1:][valid]
        gs = traj.objective_gaps[1:][valid]
        est = 2.0 * s / np.log(g0 / gs)
        k = int(np.argmax(est))
        if est[k] > best:
            best = float(est[k])
            diags = {"x0": float(x0), "s": float(s[k]), "samples": int(s.size)}
    diags["horizon"] = horizon
    diags["step"] = step
    return ConstantEstimate(
        value=best, bracket=(best, math.inf), method="dynamic", diagnostics=diags
    )


def quadratic_growth_margin(p: Potential, c_pl: float, probes) -> GrowthMargin:
    """min over probes of (f - f*) - d(x, S)^2 / (2 c_pl), S = {minimizer}.

    A nonnegative margin certifies quadratic growth on the probe set; a
    negative margin returns the witnessing probe.
    """
    if not math.isfinite(c_pl) or c_pl <= 0:
        raise PreconditionError(f"quadratic growth needs a finite positive constant, got {c_pl}")
    if p.minimizer is None:
        raise PreconditionError("quadratic growth margin requires a declared minimizer")
    probes = np.asarray(probes, dtype=float)
    if p.dim == 1:
        probes = np.atleast_1d(probes)
        dist2 = np.square(probes - float(p.minimizer))
    else:
        probes = probes.reshape(-1, p.dim)
        dist2 = np.sum(np.square(probes - np.asarray(p.minimizer)), axis=-1)
    gap = np.asarray(p.gap(probes), dtype=float)
    margin = gap - dist2 / (2.0 * c_pl)
    i = int(np.argmin(margin))
    m = float(margin[i])
    witness = None
    if m < 0:
        witness = float(probes[i]) if p.dim == 1 else probes[i]
    return GrowthMargin(margin=m, witness=witness)


def hessian_floor_check(p: Potential, c_pl: float, tol: float = 1e-9) -> HessianFloorReport:
    """Check lambda_min(hess f(x*)) >= 1/c_pl, the curvature floor at the minimizer."""
    if p.minimizer is None:
        raise PreconditionError("hessian floor check requires a declared minimizer")
    h = np.asarray(p.hess(p.minimizer if p.dim > 1 else float(p.minimizer)), dtype=float)
    if p.dim == 1:
        lam = float(h)
    else:
        lam = float(np.linalg.eigvalsh(h).min())
    floor = 1.0 / c_pl
    return HessianFloorReport(passed=bool(lam >= floor - tol), lambda_min=lam, floor=floor)
