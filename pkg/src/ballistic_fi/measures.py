"""Truncated-grid Gibbs measures and information functionals.

A GibbsGrid holds the normalized weights of exp(-f/t) on a uniform grid
together with the partition value from composite trapezoid quadrature.
Log-weights are stored alongside the weights: at low temperature the tail
densities underflow float64, but every functional here (KL, Fisher
information, the Muckenhoupt integrals downstream) only ever needs the
logarithms, which stay finite.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import NumericalError, PreconditionError
from .potentials import Potential

# Probability mass allowed beyond the truncation radius (quadratic-growth
# Gaussian envelope), and the unit-mass slack on the normalized weights.
TAIL_BOUND = 1e-10
MASS_TOL = 1e-8


@dataclass(frozen=True)
class GibbsGrid:
    potential: Potential
    t: float
    points: np.ndarray
    spacing: float
    weights: np.ndarray        # probability masses; tails may underflow to 0
    log_weights: np.ndarray    # exact log masses, always finite
    z: float
    log_z: float
    truncation_radius: float
    center: float

    @property
    def n(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class TestDensity:
    """Unit-mass density on a GibbsGrid, zero on the two boundary cells."""

    grid: GibbsGrid
    masses: np.ndarray
    log_masses: np.ndarray     # -inf off the support
    neg_log_density: np.ndarray  # g with q = exp(-g) * dx on the support

    @property
    def support(self) -> np.ndarray:
        return self.masses > 0.0


@dataclass(frozen=True)
class RescaledMoments:
    mean_z: float
    var_z: float


def _resolve_c_pl(p: Potential) -> float:
    """Best available PL constant for envelope sizing."""
    c = p.analytic.c_pl
    if c is not None:
        return c
    from .pl import pl_constant_static  # function-level import avoids a module cycle

    est = pl_constant_static(p, resolution=50.0)
    if est.divergent:
        return math.inf
    return est.value


def auto_radius(p: Potential, t: float, c_pl: Optional[float] = None) -> float:
    """Truncation radius from the quadratic-growth Gaussian envelope.

    Mirrors the (sqrt(d) + A) * sqrt(C_PL t) tail split with A = 4 and a
    safety factor 6, floored at 4 so that landscape features at unit scale
    stay inside the grid, and capped at the working domain.
    """
    if c_pl is None:
        c_pl = _resolve_c_pl(p)
    if not math.isfinite(c_pl):
        raise PreconditionError(
            f"PL constant divergent for {p.name}; cannot size the truncation radius"
        )
    sd = math.sqrt(p.dim)
    r = 6.0 * math.sqrt(c_pl * t) * (sd + 4.0)
    return min(p.domain_halfwidth, max(r, 4.0))


def build_gibbs(
    p: Potential,
    t: float,
    resolution: float = 200.0,
    radius_policy: Union[str, float] = "auto",
    center: Optional[float] = None,
    c_pl: Optional[float] = None,
) -> GibbsGrid:
    """Construct the normalized Gibbs measure of p at temperature t on a grid.

    Parameters
    ----------
    p : Potential (1D)
    t : temperature > 0
    resolution : grid points per unit length
    radius_policy : 'auto' (quadratic-growth envelope) or a fixed radius
    center : grid center; defaults to the declared minimizer, else the
        argmin of f over the working domain (bracketing scan)
    c_pl : optional PL constant override used by the auto radius policy

    The partition value is the composite trapezoid quadrature of exp(-f/t)
    on the same grid; weights are the normalized point masses.
    """
    if t <= 0:
        raise PreconditionError(f"temperature must be positive, got {t}")
    if p.dim != 1:
        raise PreconditionError("grids are 1D; d >= 2 measures are out of scope")

    if center is None:
        if p.minimizer is not None:
            center = float(p.minimizer)
        else:
            scan = np.linspace(-p.domain_halfwidth, p.domain_halfwidth, 20001)
            center = float(scan[np.argmin(p.f(scan))])

    if radius_policy == "auto":
        if c_pl is None:
            c_pl = _resolve_c_pl(p)
        radius = auto_radius(p, t, c_pl=c_pl)
    else:
        radius = float(radius_policy)
        if radius <= 0:
            raise PreconditionError(f"fixed radius must be positive, got {radius}")

    n = int(math.ceil(2.0 * radius * resolution)) + 1
    x = np.linspace(center - radius, center + radius, n)
    dx = float(x[1] - x[0])

    log_un = -np.asarray(p.f(x), dtype=float) / t
    shift = float(log_un.max())
    rel = np.exp(log_un - shift)

    # boundary decay guard: a non-vanishing boundary density signals a
    # non-integrable tail (PL / unique-minimizer hypothesis violated)
    if max(rel[0], rel[-1]) > 1e-12:
        raise NumericalError(
            f"weights fail to decay at the grid boundary for {p.name} at t={t}; "
            "non-integrable tail or truncation radius too small"
        )

    z_rel = float(np.trapezoid(rel, dx=dx))
    log_z = shift + math.log(z_rel)
    log_w = log_un - log_z + math.log(dx)
    w = np.exp(log_w)

    total = float(w.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise NumericalError(f"grid mass {total} deviates from 1 beyond {MASS_TOL}")

    grid = GibbsGrid(
        potential=p,
        t=t,
        points=x,
        spacing=dx,
        weights=w,
        log_weights=log_w,
        z=math.exp(log_z),
        log_z=log_z,
        truncation_radius=radius,
        center=center,
    )

    if radius_policy == "auto" and tail_envelope_mass(grid, c_pl) >= TAIL_BOUND:
        raise NumericalError(
            f"tail envelope bound violated at radius {radius} for {p.name}, t={t}"
        )
    return grid


def tail_envelope_mass(mu: GibbsGrid, c_pl: float) -> float:
    """Gaussian-envelope mass beyond the truncation radius, relative to Z_t."""
    s = math.sqrt(c_pl * mu.t)
    tail = math.sqrt(2.0 * math.pi) * s * math.erfc(mu.truncation_radius / (s * math.sqrt(2.0)))
    return tail / mu.z


def density_from_masses(mu: GibbsGrid, masses: np.ndarray) -> TestDensity:
    """Wrap nonnegative masses on mu's grid as a TestDensity (renormalized)."""
    q = np.asarray(masses, dtype=float).copy()
    if q.shape != mu.points.shape:
        raise PreconditionError("masses must match the grid shape")
    if np.any(q < 0):
        raise PreconditionError("test density masses must be nonnegative")
    if q[0] != 0.0 or q[-1] != 0.0:
        raise PreconditionError("test density must vanish on the two boundary cells")
    total = q.sum()
    if total <= 0:
        raise PreconditionError("test density has no mass")
    q /= total
    with np.errstate(divide="ignore"):
        log_q = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), -np.inf)
    g = -(log_q - math.log(mu.spacing))
    return TestDensity(grid=mu, masses=q, log_masses=log_q, neg_log_density=g)


def gaussian_density(mu: GibbsGrid, center: float, sigma: float) -> TestDensity:
    """Truncated, grid-discretized N(center, sigma^2) on mu's grid."""
    if sigma <= 0:
        raise PreconditionError(f"sigma must be positive, got {sigma}")
    lq = -0.5 * ((mu.points - center) / sigma) ** 2
    lq -= lq.max()
    q = np.exp(lq)
    q[0] = q[-1] = 0.0
    return density_from_masses(mu, q)


def _check_support(nu: TestDensity, mu: GibbsGrid) -> np.ndarray:
    if nu.grid is not mu and not np.array_equal(nu.grid.points, mu.points):
        raise PreconditionError("test density lives on a different grid")
    sup = nu.support
    if not np.all(np.isfinite(mu.log_weights[sup])):
        raise PreconditionError("support violation: nu puts mass where mu has none")
    return sup


def kl_divergence(nu: TestDensity, mu: GibbsGrid) -> float:
    """sum q_i log(q_i / w_i), with the 0 log 0 := 0 convention.

    Computed from log masses so that underflowed Gibbs tails are handled
    exactly; returns 0 when the masses coincide.
    """
    sup = _check_support(nu, mu)
    val = float(np.sum(nu.masses[sup] * (nu.log_masses[sup] - mu.log_weights[sup])))
    return val


def _log_ratio_derivative(nu: TestDensity, mu: GibbsGrid):
    """Centered differences of log(q/w) on support runs, one-sided at edges.

    Returns (indices, q, dr) over the support, split into contiguous runs so
    differences never straddle zero-mass gaps.
    """
    sup = _check_support(nu, mu)
    idx = np.flatnonzero(sup)
    if idx.size == 0:
        raise PreconditionError("test density has empty support")
    r_full = nu.log_masses - mu.log_weights
    dx = mu.spacing

    out_idx = []
    out_q = []
    out_dr = []
    # split support into contiguous runs
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [idx.size]))
    for a, b in zip(starts, ends):
        run = idx[a:b]
        r = r_full[run]
        if not np.all(np.isfinite(r)):
            raise NumericalError("non-finite log-ratio on the support")
        if run.size == 1:
            dr = np.zeros(1)
        else:
            dr = np.empty(run.size)
            dr[1:-1] = (r[2:] - r[:-2]) / (2.0 * dx)
            dr[0] = (r[1] - r[0]) / dx
            dr[-1] = (r[-1] - r[-2]) / dx
        out_idx.append(run)
        out_q.append(nu.masses[run])
        out_dr.append(dr)
    return np.concatenate(out_idx), np.concatenate(out_q), np.concatenate(out_dr)


def fisher_information(nu: TestDensity, mu: GibbsGrid) -> float:
    """sum q_i |d/dx log(q/w)(x_i)|^2 over the support; 0 when q = w."""
    _, q, dr = _log_ratio_derivative(nu, mu)
    return float(np.sum(q * dr * dr))


def rescaled_moments(mu: GibbsGrid) -> RescaledMoments:
    """Moments of z = (x - x*) / sqrt(t); var_z tends to 1/f''(x*) as t -> 0."""
    if mu.potential.minimizer is None:
        raise PreconditionError("rescaled moments require a declared minimizer")
    z = (mu.points - float(mu.potential.minimizer)) / math.sqrt(mu.t)
    mean = float(np.sum(mu.weights * z))
    var = float(np.sum(mu.weights * (z - mean) ** 2))
    return RescaledMoments(mean_z=mean, var_z=var)


def laplace_gap(p: Potential, t: float, resolution: Optional[float] = None) -> float:
    """log(Z_t / sqrt(det(2 pi Sigma_t))) with Sigma_t = t [hess f(x*)]^{-1}.

    The signed gap vanishes as t -> 0 for a nondegenerate unique minimizer
    and is identically 0 (to quadrature tolerance) for quadratics.
    """
    if p.minimizer is None:
        raise PreconditionError("laplace_gap requires a declared minimizer")
    if p.dim != 1:
        raise PreconditionError("laplace_gap is implemented for 1D potentials")
    h = float(p.hess(float(p.minimizer)))
    if h <= 0:
        raise PreconditionError(f"Hessian at the minimizer must be positive, got {h}")
    if resolution is None:
        # ten points per local Gaussian standard deviation
        resolution = 10.0 / math.sqrt(t / h)
    mu = build_gibbs(p, t, resolution=resolution)
    log_gauss = 0.5 * math.log(2.0 * math.pi * t / h)
    # Z_t carries exp(-f_star/t); the Gaussian comparison is against f - f_star
    return mu.log_z + (p.f_star or 0.0) / t - log_gauss


def gibbs_to_csv(mu: GibbsGrid) -> str:
    """CSV serialization (x, f(x), weight) used by the CLI --dump-measure flag."""
    buf = io.StringIO()
    buf.write("x,f,weight\r\n")
    fv = np.asarray(mu.potential.f(mu.points), dtype=float)
    for x, f, w in zip(mu.points, fv, mu.weights):
        buf.write(f"{x:.12g},{f:.12g},{w:.12g}\r\n")
    return buf.getvalue()
