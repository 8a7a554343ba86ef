"""Registry of analytic test potentials with exact derivatives.

Every potential carries closed-form gradient and Hessian evaluators plus
landscape metadata: minimizer (when unique), infimum value, and an honest
smoothness record (L0, L1) with ``laplacian(f) <= L0 + L1*|grad f|^2`` on
the working domain.  Evaluators are vectorized over numpy arrays and pure,
so they are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericalError, PreconditionError

DEFAULT_DOMAIN_HALFWIDTH = 20.0

# Centered finite-difference step for derivative self-checks; balances
# truncation against rounding for C^2 test functions.
FD_STEP = 1e-5


@dataclass(frozen=True)
class Smoothness:
    """Bounds honored on the working domain: lap(f) <= l0 + l1*|grad f|^2."""

    l0: float
    l1: float
    beta: Optional[float] = None    # operator-norm bound on the Hessian
    gamma: Optional[float] = None   # Lipschitz constant of the third derivative


@dataclass(frozen=True)
class AnalyticConstants:
    """Closed-form landscape constants, when known.

    ``c_pl`` is math.inf for potentials with a spurious critical point
    (the gradient-domination ratio diverges there); None when unknown.
    """

    c_pl: Optional[float] = None
    lambda_min_at_min: Optional[float] = None


@dataclass(frozen=True)
class Potential:
    name: str
    dim: int
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    minimizer: Optional[np.ndarray]
    f_star: Optional[float]
    smoothness: Smoothness
    analytic: AnalyticConstants = field(default_factory=AnalyticConstants)
    domain_halfwidth: float = DEFAULT_DOMAIN_HALFWIDTH

    def gap(self, x):
        """f(x) - f_star; requires a declared infimum."""
        if self.f_star is None:
            raise PreconditionError(f"potential {self.name!r} has no declared f_star")
        return self.f(x) - self.f_star


@dataclass(frozen=True)
class DerivativeReport:
    ok: bool
    max_grad_err: float
    max_hess_err: float
    worst_probe: float
    grad_errs: np.ndarray
    hess_errs: np.ndarray


def _quadratic(alpha: float = 1.0) -> Potential:
    if alpha <= 0:
        raise PreconditionError(f"quadratic requires alpha > 0, got {alpha}")
    a = float(alpha)
    return Potential(
        name=f"quadratic(alpha={a:g})",
        dim=1,
        f=lambda x: 0.5 * a * np.square(x),
        grad=lambda x: a * np.asarray(x, dtype=float),
        hess=lambda x: np.full_like(np.asarray(x, dtype=float), a),
        minimizer=np.array(0.0),
        f_star=0.0,
        smoothness=Smoothness(l0=a, l1=0.0, beta=a, gamma=0.0),
        analytic=AnalyticConstants(c_pl=1.0 / a, lambda_min_at_min=a),
    )


def _quartic(a: float = 1.0, b: float = 1.0) -> Potential:
    # f = a x^2/2 + b x^4/4.  For a > 0 the ratio 2 f / f'^2 = (a + b x^2/2)/(a + b x^2)^2
    # is maximized at x = 0, so C_PL = 1/a exactly.  lap(f) = a + 3 b x^2 and
    # 3 b x^2 <= (3b/a^2) x^2 (a + b x^2)^2 gives the global (L0, L1) record.
    if a <= 0:
        raise PreconditionError(f"quartic requires a > 0, got {a}")
    if b < 0:
        raise PreconditionError(f"quartic requires b >= 0, got {b}")
    a, b = float(a), float(b)
    R = DEFAULT_DOMAIN_HALFWIDTH
    return Potential(
        name=f"quartic(a={a:g},b={b:g})",
        dim=1,
        f=lambda x: 0.5 * a * np.square(x) + 0.25 * b * np.square(x) ** 2,
        grad=lambda x: a * np.asarray(x, dtype=float) + b * np.asarray(x, dtype=float) ** 3,
        hess=lambda x: a + 3.0 * b * np.square(x),
        minimizer=np.array(0.0),
        f_star=0.0,
        smoothness=Smoothness(l0=a, l1=3.0 * b / a**2, beta=a + 3 * b * R * R, gamma=6.0 * b),
        analytic=AnalyticConstants(c_pl=1.0 / a, lambda_min_at_min=a),
    )


def _sine_squared(c: float = 1.0) -> Potential:
    # f = x^2 + c sin^2 x.  For 0 <= c <= 4 the origin is the only critical
    # point (sin(u)/u > -1/4 everywhere), so the minimizer is unique.
    # lap(f) = 2 + 2 c cos 2x <= 2 + 2c exactly, hence L0 = 2 + 2c, L1 = 0.
    if c < 0:
        raise PreconditionError(f"sine_squared requires c >= 0, got {c}")
    if c > 4:
        raise PreconditionError(
            f"sine_squared requires c <= 4 to keep a unique critical point, got {c}"
        )
    c = float(c)
    return Potential(
        name=f"sine_squared(c={c:g})",
        dim=1,
        f=lambda x: np.square(x) + c * np.sin(x) ** 2,
        grad=lambda x: 2.0 * np.asarray(x, dtype=float) + c * np.sin(2.0 * np.asarray(x, dtype=float)),
        hess=lambda x: 2.0 + 2.0 * c * np.cos(2.0 * np.asarray(x, dtype=float)),
        minimizer=np.array(0.0),
        f_star=0.0,
        smoothness=Smoothness(l0=2.0 + 2.0 * c, l1=0.0, beta=2.0 + 2.0 * c, gamma=8.0 * c),
        analytic=AnalyticConstants(c_pl=None, lambda_min_at_min=2.0 + 2.0 * c),
    )


def _double_well() -> Potential:
    # f = (x^2 - 1)^2: two global minimizers at +-1 and a critical point at 0
    # with f(0) = 1 > f_star = 0, so gradient domination fails (C_PL = inf).
    # lap(f) = 12 x^2 - 4 <= 20 + 16 x^2 (x^2-1)^2 on R.
    return Potential(
        name="double_well",
        dim=1,
        f=lambda x: np.square(np.square(x) - 1.0),
        grad=lambda x: 4.0 * np.asarray(x, dtype=float) * (np.square(x) - 1.0),
        hess=lambda x: 12.0 * np.square(x) - 4.0,
        minimizer=None,
        f_star=0.0,
        smoothness=Smoothness(l0=20.0, l1=1.0),
        analytic=AnalyticConstants(c_pl=math.inf, lambda_min_at_min=8.0),
    )


def _gaussian_mixture(m: float = 1.0, s: float = 0.5) -> Potential:
    # Negative log-density of a symmetric two-component Gaussian mixture:
    # f = x^2/2 - s^2 log cosh(m x / s^2) + const.  For m > s the origin is a
    # spurious critical point between two global minimizers, so C_PL = inf.
    if m <= 0 or s <= 0:
        raise PreconditionError(f"gaussian_mixture requires m, s > 0, got m={m}, s={s}")
    m, s = float(m), float(s)
    if m <= s:
        raise PreconditionError(
            f"gaussian_mixture requires m > s for two separated minima, got m={m}, s={s}"
        )
    k = m / s**2

    def raw(x):
        x = np.asarray(x, dtype=float)
        # log cosh computed overflow-safe
        return 0.5 * np.square(x) - s**2 * (np.abs(k * x) + np.log1p(np.exp(-2 * np.abs(k * x))) - math.log(2.0))

    # infimum located numerically once; the two minima are symmetric
    res = minimize_scalar(lambda x: float(raw(x)), bounds=(0.0, 2 * m), method="bounded",
                          options={"xatol": 1e-12})
    f_star = float(res.fun)

    def fval(x):
        return raw(x) - f_star

    def gval(x):
        x = np.asarray(x, dtype=float)
        return x - m * np.tanh(k * x)

    def hval(x):
        x = np.asarray(x, dtype=float)
        return 1.0 - (m * k) / np.cosh(k * x) ** 2

    # lap(f) <= 1 everywhere (the sech^2 term only subtracts)
    return Potential(
        name=f"gaussian_mixture(m={m:g},s={s:g})",
        dim=1,
        f=fval,
        grad=gval,
        hess=hval,
        minimizer=None,
        f_star=0.0,
        smoothness=Smoothness(l0=1.0, l1=0.0, beta=1.0),
        analytic=AnalyticConstants(c_pl=math.inf),
    )


def combine_separable(p1: Potential, p2: Potential, name: Optional[str] = None) -> Potential:
    """Separable 2D combinator: f(x, y) = p1(x) + p2(y) with block derivatives.

    Points are arrays whose last axis has length 2.
    """
    if p1.dim != 1 or p2.dim != 1:
        raise PreconditionError("combine_separable expects two 1D potentials")

    def fval(pt):
        pt = np.asarray(pt, dtype=float)
        return p1.f(pt[..., 0]) + p2.f(pt[..., 1])

    def gval(pt):
        pt = np.asarray(pt, dtype=float)
        return np.stack([p1.grad(pt[..., 0]), p2.grad(pt[..., 1])], axis=-1)

    def hval(pt):
        pt = np.asarray(pt, dtype=float)
        h11 = p1.hess(pt[..., 0])
        h22 = p2.hess(pt[..., 1])
        z = np.zeros_like(np.asarray(h11, dtype=float))
        return np.stack(
            [np.stack([h11, z], axis=-1), np.stack([z, h22], axis=-1)], axis=-2
        )

    minimizer = None
    f_star = None
    if p1.minimizer is not None and p2.minimizer is not None:
        minimizer = np.array([float(p1.minimizer), float(p2.minimizer)])
        f_star = (p1.f_star or 0.0) + (p2.f_star or 0.0)

    s1, s2 = p1.smoothness, p2.smoothness
    c1, c2 = p1.analytic.c_pl, p2.analytic.c_pl
    c_pl = None
    if c1 is not None and c2 is not None:
        c_pl = max(c1, c2)  # separable sup of the ratio is bounded by the worse factor
    lam = None
    if p1.analytic.lambda_min_at_min is not None and p2.analytic.lambda_min_at_min is not None:
        lam = min(p1.analytic.lambda_min_at_min, p2.analytic.lambda_min_at_min)
    return Potential(
        name=name or f"separable({p1.name}+{p2.name})",
        dim=2,
        f=fval,
        grad=gval,
        hess=hval,
        minimizer=minimizer,
        f_star=f_star,
        smoothness=Smoothness(
            l0=s1.l0 + s2.l0,
            l1=max(s1.l1, s2.l1),
            beta=None if (s1.beta is None or s2.beta is None) else max(s1.beta, s2.beta),
        ),
        analytic=AnalyticConstants(c_pl=c_pl, lambda_min_at_min=lam),
        domain_halfwidth=min(p1.domain_halfwidth, p2.domain_halfwidth),
    )


def _separable_2d(**params) -> Potential:
    # config-addressable form: x_name/y_name select 1D families, x_*/y_*
    # prefixes carry their parameters, e.g. x_name=quadratic x_alpha=2.
    def sub(prefix):
        name = params.get(f"{prefix}_name")
        if name is None:
            raise PreconditionError(f"separable_2d requires {prefix}_name")
        sub_params = {
            key[len(prefix) + 1:]: val
            for key, val in params.items()
            if key.startswith(prefix + "_") and key != f"{prefix}_name"
        }
        return get_potential(name, **sub_params)

    return combine_separable(sub("x"), sub("y"), name="separable_2d")


REGISTRY = {
    "quadratic": _quadratic,
    "quartic": _quartic,
    "sine_squared": _sine_squared,
    "double_well": _double_well,
    "gaussian_mixture": _gaussian_mixture,
    "separable_2d": _separable_2d,
}


def get_potential(name: str, **params) -> Potential:
    """Look up a registered potential family and instantiate it.

    Raises PreconditionError for unknown names or invalid family parameters.
    """
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise PreconditionError(
            f"unknown potential {name!r}; registered: {sorted(REGISTRY)}"
        ) from None
    return builder(**params)


def check_derivatives(p: Potential, probes, tol: float = 1e-6,
                      step: float = FD_STEP) -> DerivativeReport:
    """Compare analytic gradient/Hessian against centered finite differences.

    Parameters
    ----------
    p : Potential
    probes : array of points in the working domain (1D values, or (n, dim))
    tol : maximum allowed relative error
    step : centered-difference step

    Returns a per-probe report; ``ok`` is False if any discrepancy exceeds
    ``tol`` relative to the local derivative scale.
    """
    probes = np.atleast_1d(np.asarray(probes, dtype=float))
    if p.dim == 1:
        probes = probes.reshape(-1)
    else:
        probes = probes.reshape(-1, p.dim)

    grad_errs = np.zeros(len(probes))
    hess_errs = np.zeros(len(probes))
    for i, x in enumerate(probes):
        if p.dim == 1:
            fp, fm = p.f(x + step), p.f(x - step)
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise NumericalError(f"non-finite potential evaluation at probe {x}")
            g_fd = (fp - fm) / (2 * step)
            h_fd = (p.grad(x + step) - p.grad(x - step)) / (2 * step)
            g, h = p.grad(x), p.hess(x)
            scale_g = max(abs(float(g)), abs(float(g_fd)), 1.0)
            scale_h = max(abs(float(h)), abs(float(h_fd)), 1.0)
            grad_errs[i] = abs(float(g_fd - g)) / scale_g
            hess_errs[i] = abs(float(h_fd - h)) / scale_h
        else:
            g = np.asarray(p.grad(x), dtype=float)
            h = np.asarray(p.hess(x), dtype=float)
            g_fd = np.zeros_like(g)
            h_fd = np.zeros_like(h)
            for k in range(p.dim):
                e = np.zeros(p.dim)
                e[k] = step
                fp, fm = p.f(x + e), p.f(x - e)
                if not (np.isfinite(fp) and np.isfinite(fm)):
                    raise NumericalError(f"non-finite potential evaluation at probe {x}")
                g_fd[k] = (fp - fm) / (2 * step)
                h_fd[:, k] = (np.asarray(p.grad(x + e)) - np.asarray(p.grad(x - e))) / (2 * step)
            scale_g = max(float(np.max(np.abs(g))), float(np.max(np.abs(g_fd))), 1.0)
            scale_h = max(float(np.max(np.abs(h))), float(np.max(np.abs(h_fd))), 1.0)
            grad_errs[i] = float(np.max(np.abs(g_fd - g))) / scale_g
            hess_errs[i] = float(np.max(np.abs(h_fd - h))) / scale_h

    worst = int(np.argmax(np.maximum(grad_errs, hess_errs)))
    ok = bool(grad_errs.max(initial=0.0) <= tol and hess_errs.max(initial=0.0) <= tol)
    return DerivativeReport(
        ok=ok,
        max_grad_err=float(grad_errs.max(initial=0.0)),
        max_hess_err=float(hess_errs.max(initial=0.0)),
        worst_probe=float(probes[worst]) if p.dim == 1 else probes[worst],
        grad_errs=grad_errs,
        hess_errs=hess_errs,
    )
