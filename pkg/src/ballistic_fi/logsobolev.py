"""Two-sided estimation of the log-Sobolev constant of a Gibbs grid.

Lower bounds come from evaluated KL/Fisher ratios: every ratio of a valid
test density certifies a lower bound.  The search maximizes over a
two-parameter family of truncated Gaussians; the variational estimator then
ascends the ratio directly in log-mass coordinates.  The upper bound
composes a defective log-Sobolev inequality with the measured Poincare
constant through the improved tightening rule C + (D/2) * C_P.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import NumericalError, PreconditionError
from .measures import (
    GibbsGrid,
    TestDensity,
    density_from_masses,
    fisher_information,
    gaussian_density,
    kl_divergence,
)
from .pl import ConstantEstimate, pl_constant_static
from .poincare import poincare_spectral
from .potentials import Potential

FI_FLOOR = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def lsi_ratio(nu: TestDensity, mu: GibbsGrid) -> float:
    """2 KL / FI; each value is a certified lower bound on the LS constant."""
    fi = fisher_information(nu, mu)
    if fi <= FI_FLOOR:
        raise PreconditionError(f"Fisher information {fi} below threshold; nu too close to mu")
    return 2.0 * kl_divergence(nu, mu) / fi


def _sigma_window(t: float) -> tuple:
    lo, hi = sorted((t, math.sqrt(t)))
    return lo, hi


def _golden_max(fun, lo: float, hi: float, iters: int) -> tuple:
    """Golden-section maximization returning (best_x, best_value)."""
    if hi <= lo:
        return lo, fun(lo)
    a, b = lo, hi
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    best_x, best_v = (c, fc) if fc >= fd else (d, fd)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
            if fc > best_v:
                best_x, best_v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
            if fd > best_v:
                best_x, best_v = d, fd
    return best_x, best_v


def ls_lower_bound_search(
    mu: GibbsGrid,
    x0_points: int = 61,
    sigma_iters: int = 30,
    refine_iters: int = 35,
) -> ConstantEstimate:
    """Maximize the KL/Fisher ratio over truncated Gaussian test densities.

    Coarse grid over the center, nested golden-section over log sigma in
    [t, sqrt(t)], then golden refinement of the center.  The best ratio
    visited is returned; candidates whose optimizer would leave the grid
    support are clamped to the admissible range and noted in diagnostics.
    """
    t = mu.t
    sig_lo, sig_hi = _sigma_window(t)
    margin = 5.0 * sig_hi
    x_lo = float(mu.points[1]) + margin
    x_hi = float(mu.points[-2]) - margin
    clamped = x_hi <= x_lo
    if clamped:
        # degenerate grid; fall back to the center with a minimal margin
        x_lo = x_hi = mu.center

    def ratio_at(x0: float, sigma: float) -> float:
        try:
            return lsi_ratio(gaussian_density(mu, x0, sigma), mu)
        except PreconditionError:
            return -math.inf

    def best_over_sigma(x0: float) -> tuple:
        if sig_hi <= sig_lo * (1 + 1e-12):
            return sig_lo, ratio_at(x0, sig_lo)
        ls, v = _golden_max(
            lambda u: ratio_at(x0, math.exp(u)),
            math.log(sig_lo), math.log(sig_hi), sigma_iters,
        )
        return math.exp(ls), v

    centers = np.linspace(x_lo, x_hi, x0_points) if x_hi > x_lo else np.array([x_lo])
    best_x0, best_sigma, best_v = centers[0], sig_lo, -math.inf
    for x0 in centers:
        s, v = best_over_sigma(float(x0))
        if v > best_v:
            best_x0, best_sigma, best_v = float(x0), s, v

    if centers.size > 1:
        spacing = float(centers[1] - centers[0])
        lo = max(x_lo, best_x0 - spacing)
        hi = min(x_hi, best_x0 + spacing)

        def over_x0(x0: float) -> float:
            return best_over_sigma(x0)[1]

        xr, vr = _golden_max(over_x0, lo, hi, refine_iters)
        if vr > best_v:
            best_x0, best_v = xr, vr
            best_sigma = best_over_sigma(xr)[0]

    if not math.isfinite(best_v):
        raise NumericalError("no admissible test density found in the search family")
    return ConstantEstimate(
        value=best_v,
        bracket=(best_v, math.inf),
        method="testfamily",
        diagnostics={"x0": best_x0, "sigma": best_sigma, "clamped": clamped,
                     "grid_points": mu.n, "truncation_radius": mu.truncation_radius},
    )


def _run_slices(idx: np.ndarray):
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [idx.size]))
    return list(zip(starts, ends))


class _RatioObjective:
    """KL/Fisher ratio and its gradient in log-mass coordinates.

    The parameter is the vector of log masses on a fixed support; masses are
    renormalized through a log-sum-exp shift, so every iterate is a valid
    unit-mass density by construction.  The Fisher term uses the same
    centered/one-sided differencing as fisher_information, applied per
    contiguous support run.
    """

    def __init__(self, mu: GibbsGrid, support_idx: np.ndarray):
        self.mu = mu
        self.idx = support_idx
        self.runs = _run_slices(support_idx)
        self.dx = mu.spacing
        self.log_w = mu.log_weights[support_idx]

    def density(self, ell: np.ndarray) -> TestDensity:
        masses = np.zeros(self.mu.n)
        lq = ell - _logsumexp(ell)
        masses[self.idx] = np.exp(lq)
        return density_from_masses(self.mu, masses)

    def value_and_grad(self, ell: np.ndarray):
        lq = ell - _logsumexp(ell)
        q = np.exp(lq)
        r = lq - self.log_w
        kl = float(np.sum(q * r))

        d = np.zeros_like(r)
        dx = self.dx
        for a, b in self.runs:
            rr = r[a:b]
            if b - a == 1:
                d[a] = 0.0
                continue
            d[a + 1:b - 1] = (rr[2:] - rr[:-2]) / (2.0 * dx)
            d[a] = (rr[1] - rr[0]) / dx
            d[b - 1] = (rr[-1] - rr[-2]) / dx
        fi = float(np.sum(q * d * d))
        if fi <= FI_FLOOR:
            raise PreconditionError("Fisher information collapsed during ascent")
        ratio = 2.0 * kl / fi

        # d KL / d ell_j = q_j (r_j - KL); the difference operator annihilates
        # the renormalization shift, so d FI picks up only the mass term and
        # the transpose action of the differencing stencil.
        g_kl = q * (r - kl)
        y = q * d
        g_fi = q * (d * d - fi)
        for a, b in self.runs:
            if b - a == 1:
                continue
            yy = y[a:b]
            acc = np.zeros(b - a)
            acc[2:] += yy[1:-1] / (2.0 * dx)
            acc[:-2] -= yy[1:-1] / (2.0 * dx)
            acc[0] -= yy[0] / dx
            acc[1] += yy[0] / dx
            acc[-2] -= yy[-1] / dx
            acc[-1] += yy[-1] / dx
            g_fi[a:b] += 2.0 * acc
        grad = (2.0 / fi) * g_kl - (2.0 * kl / fi**2) * g_fi
        return ratio, grad


def _logsumexp(v: np.ndarray) -> float:
    m = float(v.max())
    return m + math.log(float(np.sum(np.exp(v - m))))


def ls_variational(
    mu: GibbsGrid,
    init: TestDensity,
    iters: int = 200,
    step: float = 0.5,
) -> ConstantEstimate:
    """Projected gradient ascent on the KL/Fisher ratio over grid densities.

    Ascends in log-mass coordinates on the support of ``init`` (largest
    contiguous run), renormalizing each step.  Proposals that lower the
    ratio are rejected; two consecutive rejections halve the step, and the
    ascent aborts after 10 halvings.  The best ratio visited is returned,
    which by construction is at least the ratio of the initializer.
    """
    sup = np.flatnonzero(init.masses > 0)
    if sup.size < 3:
        raise PreconditionError("initializer support too small for the ascent")
    runs = _run_slices(sup)
    widest = max(runs, key=lambda ab: ab[1] - ab[0])
    sup = sup[widest[0]:widest[1]]

    obj = _RatioObjective(mu, sup)
    ell = np.log(init.masses[sup])
    ratio, grad = obj.value_and_grad(ell)
    best = ratio
    rejections = 0
    halvings = 0
    used = 0
    for used in range(1, iters + 1):
        gmax = float(np.max(np.abs(grad)))
        if gmax <= 0 or not math.isfinite(gmax):
            break
        proposal = ell + step * grad / gmax
        try:
            new_ratio, new_grad = obj.value_and_grad(proposal)
        except PreconditionError:
            new_ratio = -math.inf
        if new_ratio > ratio:
            ell, ratio, grad = proposal, new_ratio, new_grad
            best = max(best, ratio)
            rejections = 0
        else:
            rejections += 1
            if rejections >= 2:
                step *= 0.5
                rejections = 0
                halvings += 1
                if halvings > 10:
                    break
    return ConstantEstimate(
        value=best,
        bracket=(best, math.inf),
        method="variational",
        diagnostics={
            "iterations": used, "halvings": halvings,
            "final_step": step, "support_nodes": int(sup.size),
        },
    )


def defective_lsi_constants(
    p: Potential, t: float, c_pl: Optional[float] = None
) -> tuple:
    """Defective-LSI pair (C, D) for the Gibbs measure of p at temperature t.

    Applies the flat-Laplacian defective inequality to f/t: the constant
    scales to t * C_PL while the defect C_PL * L0 - d is temperature
    invariant.  A negative defect only strengthens the inequality, so D is
    clamped at zero.  Requires L1 = 0 in the declared smoothness record.
    """
    if p.smoothness.l1 != 0.0:
        raise PreconditionError(
            f"defective constants need a flat Laplacian bound (L1 = 0); {p.name} has L1 = {p.smoothness.l1}"
        )
    if p.minimizer is None:
        raise PreconditionError("defective constants require a unique declared minimizer")
    if c_pl is None:
        c_pl = p.analytic.c_pl
        if c_pl is None:
            est = pl_constant_static(p)
            if est.divergent:
                raise PreconditionError(f"PL constant divergent for {p.name}")
            c_pl = est.value
    if not math.isfinite(c_pl):
        raise PreconditionError(f"PL constant divergent for {p.name}")
    c = t * c_pl
    dft = max(c_pl * p.smoothness.l0 - p.dim, 0.0)
    return c, dft


def tighten(c: float, d: float, c_p: float) -> float:
    """Tightened LS upper bound C + (D/2) * C_P from a defective inequality."""
    if c < 0 or d < 0 or c_p < 0:
        raise PreconditionError(f"tighten requires nonnegative inputs, got {(c, d, c_p)}")
    return c + 0.5 * d * c_p


def ls_upper_bound(
    p: Potential,
    t: float,
    mu: Optional[GibbsGrid] = None,
    c_pl: Optional[float] = None,
    cp_value: Optional[float] = None,
    resolution: float = 200.0,
) -> ConstantEstimate:
    """Upper bound on the LS constant: defective pair tightened by C_P.

    ``mu`` and ``cp_value`` can be supplied to reuse a grid and a spectral
    solve from the caller; otherwise both are built at ``resolution``.
    """
    c, dft = defective_lsi_constants(p, t, c_pl=c_pl)
    if cp_value is None:
        if mu is None:
            from .measures import build_gibbs

            mu = build_gibbs(p, t, resolution=resolution, c_pl=c_pl)
        cp_value = poincare_spectral(mu).value
    value = tighten(c, dft, cp_value)
    return ConstantEstimate(
        value=value,
        bracket=(0.0, value),
        method="tightened",
        diagnostics={"defective_c": c, "defect": dft, "poincare": cp_value},
    )
