"""Spectral-gap estimation and certified bounds for Gibbs measures.

Three independent routes to the Poincare constant of a 1D Gibbs grid:

* a symmetric (Dirichlet-form) finite-difference discretization of the
  weighted Laplacian with zero-flux boundaries, solved for its two smallest
  eigenvalues by Sturm-sequence bisection;
* a Muckenhoupt-type two-sided criterion giving a certified factor-4 bracket;
* an explicit drift-condition (Lyapunov) upper bound with parameters
  (alpha, r0, k) certified pointwise on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericalError, PreconditionError
from .measures import GibbsGrid
from .pl import ConstantEstimate, pl_constant_static
from .potentials import Potential

# Nodes whose relative log density falls below this are dropped from the
# eigensolve; the Neumann wall they introduce perturbs the gap by the same
# exponentially small order.
LOG_DENSITY_TRIM = -300.0


@dataclass(frozen=True)
class LyapunovParams:
    """Parameters of the drift-condition bound.

    delta = r0^2 / (2 c_pl) is derived, never stored independently, so the
    defining relation holds exactly.  Validity requires t < t_0.
    """

    c_pl: float
    l0: float
    l1: float
    alpha: float
    r0: float
    k: float
    t: float

    @property
    def delta(self) -> float:
        return self.r0 * self.r0 / (2.0 * self.c_pl)

    @property
    def t0(self) -> float:
        return 2.0 * self.delta / (self.c_pl * self.l0 + 2.0 * self.delta * self.l1 + 2.0 * self.k - 2.0)

    def validate(self, p: Optional[Potential] = None, probes: int = 512) -> None:
        if self.k < 1:
            raise PreconditionError(f"k must be >= 1, got {self.k}")
        if min(self.c_pl, self.l0, self.alpha, self.r0, self.t) <= 0 or self.l1 < 0:
            raise PreconditionError("lyapunov params must be positive (l1 >= 0)")
        if self.t >= self.t0:
            raise PreconditionError(
                f"t = {self.t} is not below t_0 = {self.t0}; the drift bound is vacuous"
            )
        if p is not None:
            if p.minimizer is None:
                raise PreconditionError("local convexity check needs a declared minimizer")
            xs = float(p.minimizer) + np.linspace(-self.r0, self.r0, probes)
            lam = np.asarray(p.hess(xs), dtype=float)
            if float(lam.min()) < self.alpha - 1e-12:
                raise PreconditionError(
                    f"alpha = {self.alpha} exceeds the Hessian minimum "
                    f"{float(lam.min())} on the ball of radius {self.r0}"
                )


@dataclass(frozen=True)
class CriterionReport:
    lam: float
    b: float
    min_margin: float
    witness: float


def _symmetrized_tridiagonal(mu: GibbsGrid):
    """Assemble D^{-1/2} S D^{-1/2} for the zero-flux Dirichlet form.

    Stiffness couplings use midpoint densities; the mass matrix is the
    diagonal of grid weights.  All entries are formed from log densities so
    the assembly survives severely underflowing tails; a common shift
    cancels between stiffness and mass.
    """
    p, t = mu.potential, mu.t
    log_rho = -np.asarray(p.f(mu.points), dtype=float) / t
    shift = float(log_rho.max())
    log_rho = log_rho - shift
    keep = log_rho > LOG_DENSITY_TRIM
    x = mu.points[keep]
    if x.size < 8:
        raise NumericalError("grid too coarse after tail trimming")
    dx = mu.spacing
    log_m = log_rho[keep] + math.log(dx)
    xm = 0.5 * (x[:-1] + x[1:])
    log_c = (-np.asarray(p.f(xm), dtype=float) / t - shift) - math.log(dx)

    n = x.size
    d = np.zeros(n)
    d[:-1] += np.exp(log_c - log_m[:-1])
    d[1:] += np.exp(log_c - log_m[1:])
    e = -np.exp(log_c - 0.5 * (log_m[:-1] + log_m[1:]))
    return d, e, keep


def poincare_spectral(mu: GibbsGrid) -> ConstantEstimate:
    """Inverse spectral gap of the weighted Laplacian on the grid.

    The constant function is an exact zero mode of the discretization, so
    the second eigenvalue of the symmetrized pencil is the gap.  The
    bracket is a Richardson-style error band from a half-resolution solve.
    """
    if float(mu.weights[0] + mu.weights[-1]) > 1e-8:
        raise NumericalError("boundary mass above the tail threshold")

    d, e, _ = _symmetrized_tridiagonal(mu)
    vals = eigh_tridiagonal(d, e, select="i", select_range=(0, 2), eigvals_only=True)
    lam0, lam1, lam2 = (float(v) for v in vals)
    # lam0 is assembly rounding at the matrix scale; for metastable measures
    # lam1 itself can be exponentially small, so compare against both
    zero_tol = 1e-8 * lam1 + 1e-12 * float(np.max(d))
    if lam1 <= 0 or abs(lam0) > zero_tol:
        raise NumericalError(f"zero mode not resolved: lam0={lam0}, lam1={lam1}")
    if (lam2 - lam1) <= 1e-9 * max(lam2, 1.0):
        raise NumericalError("grid too coarse: lam1 indistinguishable from lam2")
    value = 1.0 / lam1

    coarse = _coarse_value(mu)
    err = abs(value - coarse) / 3.0 if coarse is not None else 0.005 * value
    err = max(err, 1e-14 * value)
    return ConstantEstimate(
        value=value,
        bracket=(value - 2.0 * err, value + 2.0 * err),
        method="spectral",
        diagnostics={
            "lambda0": lam0, "lambda1": lam1, "lambda2": lam2,
            "n": mu.n, "truncation_radius": mu.truncation_radius,
            "coarse_value": coarse,
        },
    )


def _coarse_value(mu: GibbsGrid) -> Optional[float]:
    """Half-resolution gap for the discretization error estimate."""
    from .measures import build_gibbs

    res = (mu.n - 1) / (2.0 * mu.truncation_radius)
    if res < 8:
        return None
    coarse = build_gibbs(
        mu.potential, mu.t, resolution=res / 2.0,
        radius_policy=mu.truncation_radius, center=mu.center,
    )
    d, e, _ = _symmetrized_tridiagonal(coarse)
    vals = eigh_tridiagonal(d, e, select="i", select_range=(0, 1), eigvals_only=True)
    return 1.0 / float(vals[1])


def muckenhoupt_bracket(mu: GibbsGrid) -> ConstantEstimate:
    """Two-sided Muckenhoupt criterion: B <= C_P <= 4B on the real line.

    B is the larger of the two one-sided suprema of (tail mass) times
    (integral of the inverse density from the median).  All integrals are
    accumulated in log space from the same grid weights; the scan stops in
    the far tail where the product is provably below threshold.
    """
    log_w = mu.log_weights
    w = mu.weights
    cum = np.cumsum(w)
    med = int(np.searchsorted(cum, 0.5))
    log_dx = math.log(mu.spacing)
    # log point densities (per unit length): log w - log dx
    log_inv_rho = -(log_w - log_dx)

    log_tail_right = np.logaddexp.accumulate(log_w[::-1])[::-1]
    log_tail_left = np.logaddexp.accumulate(log_w)

    def side(indices, log_tail):
        best = -math.inf
        log_i = -math.inf
        for k in indices:
            log_i = np.logaddexp(log_i, log_inv_rho[k] + log_dx)
            if log_tail[k] < math.log(1e-13):
                break  # tail mass clipped at threshold; product only decreases
            best = max(best, log_tail[k] + log_i)
        return best

    log_b = max(
        side(range(med + 1, mu.n), log_tail_right),
        side(range(med - 1, -1, -1), log_tail_left),
    )
    if not math.isfinite(log_b):
        raise NumericalError("muckenhoupt scan found no admissible points")
    b = math.exp(log_b)
    return ConstantEstimate(
        value=2.0 * b,
        bracket=(b, 4.0 * b),
        method="muckenhoupt",
        diagnostics={"median_index": med, "median_x": float(mu.points[med])},
    )


def lyapunov_bound_formula(params: LyapunovParams) -> float:
    """Exact two-term drift-condition upper bound on the Poincare constant.

    First term: inverse drift rate outside the convexity ball.  Second term:
    the ball's own constant t/alpha inflated by the re-entry factor b.
    Requires t < t_0 (positive denominators).
    """
    params.validate()
    c, l0, l1, k, t = params.c_pl, params.l0, params.l1, params.k, params.t
    delta, alpha = params.delta, params.alpha
    den1 = 1.0 - l1 * t - (k - 1.0) * t / delta - c * l0 * t / (2.0 * delta)
    if den1 <= 0:
        raise PreconditionError(f"t = {t} is at or beyond t_0 = {params.t0}")
    term1 = (c * t / k) / den1
    den2 = delta - delta * l1 * t - (k - 1.0) * t - c * l0 * t / 2.0
    term2 = (1.0 + c * l0 * t / den2) * (t / alpha)
    return term1 + term2


def criterion_rates(params: LyapunovParams) -> tuple:
    """(lambda, b) as constructed in the drift-condition argument."""
    c, l0, l1, k, t = params.c_pl, params.l0, params.l1, params.k, params.t
    delta = params.delta
    lam = (1.0 / t - l1 - (k - 1.0) / delta) * k / c - k * l0 / (2.0 * delta)
    if lam <= 0:
        raise PreconditionError(f"drift rate nonpositive at t = {t} (t_0 = {params.t0})")
    b = 1.0 + k * l0 / (delta * lam)
    return lam, b


def lyapunov_criterion_verify(
    mu: GibbsGrid,
    params: LyapunovParams,
    lam: Optional[float] = None,
    b: Optional[float] = None,
) -> CriterionReport:
    """Pointwise check of -L W / W >= lambda (1 - b 1_K) on the grid.

    W = (1 + (f - f*)/delta)^k and K is the ball of radius r0 around the
    minimizer.  The generator action is evaluated with the exact derivative
    evaluators, not discretized.  Override lam or b to probe fault cases.
    """
    p = mu.potential
    params.validate(p)
    if p.minimizer is None or p.f_star is None:
        raise PreconditionError("criterion check requires minimizer and f_star")
    lam0, b0 = criterion_rates(params)
    lam = lam0 if lam is None else lam
    b = b0 if b is None else b

    x = mu.points
    k, t, delta = params.k, params.t, params.delta
    fgap = np.asarray(p.gap(x), dtype=float)
    g2 = np.square(np.asarray(p.grad(x), dtype=float))
    lap = np.asarray(p.hess(x), dtype=float)
    denom = fgap + delta
    minus_lw_over_w = (k / t - k * (k - 1.0) / denom) * g2 / denom - k * lap / denom
    in_k = np.abs(x - float(p.minimizer)) < params.r0
    margin = minus_lw_over_w - lam * (1.0 - b * in_k)
    i = int(np.argmin(margin))
    return CriterionReport(
        lam=float(lam), b=float(b), min_margin=float(margin[i]), witness=float(x[i])
    )


def select_lyapunov_params(
    p: Potential,
    t: float,
    k: float = 1.0,
    c_pl: Optional[float] = None,
) -> LyapunovParams:
    """Pick a certifiable (alpha, r0) pair minimizing the drift bound at t.

    For each candidate alpha (fractions of the curvature at the minimizer),
    the largest radius on a dyadic ladder with hess f >= alpha on the ball is
    taken; among feasible pairs (t < t_0) the one with the smallest bound
    wins.  Raises if no pair is feasible at this temperature.
    """
    if c_pl is None:
        c = p.analytic.c_pl
        if c is None:
            est = pl_constant_static(p, resolution=200.0)
            if est.divergent:
                raise PreconditionError(f"PL constant divergent for {p.name}")
            c = est.value
        c_pl = c
    if not math.isfinite(c_pl):
        raise PreconditionError(f"PL constant divergent for {p.name}")
    if p.minimizer is None:
        raise PreconditionError("parameter selection requires a declared minimizer")
    lam_min = p.analytic.lambda_min_at_min
    if lam_min is None:
        lam_min = float(p.hess(float(p.minimizer)))

    x_star = float(p.minimizer)
    ladder = [p.domain_halfwidth / 2.0**j for j in range(12)]
    best: Optional[LyapunovParams] = None
    best_bound = math.inf
    for frac in (0.9, 0.75, 0.5, 0.375, 0.25, 0.125, 0.0625):
        alpha = frac * lam_min
        r0 = None
        for r in ladder:
            probes = x_star + np.linspace(-r, r, 257)
            if float(np.min(np.asarray(p.hess(probes), dtype=float))) >= alpha:
                r0 = r
                break
        if r0 is None:
            continue
        cand = LyapunovParams(c_pl=c_pl, l0=p.smoothness.l0, l1=p.smoothness.l1,
                              alpha=alpha, r0=r0, k=k, t=t)
        if t >= cand.t0:
            continue
        bound = lyapunov_bound_formula(cand)
        if bound < best_bound:
            best, best_bound = cand, bound
    if best is None:
        raise PreconditionError(
            f"no certifiable (alpha, r0) pair with t = {t} below t_0 for {p.name}"
        )
    return best
