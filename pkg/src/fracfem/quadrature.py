"""Adaptive-quadrature oracle for the closed forms in :mod:`fracfem.kernels`.

None of the production paths go through this module; it exists so that every
analytically assembled quantity (stiffness entries, load moments, projection
residuals, pointwise fractional derivatives) can be certified against an
independent numerical route.  The integrators split at all breakpoints and
regularize algebraic endpoint singularities with the substitution
``t = a + s**(1/(1+p))``, after which Gauss-Kronrod converges fast.
"""

from __future__ import annotations

import math
import warnings

from scipy.integrate import IntegrationWarning, quad as _scipy_quad


def quad(f, a, b, **kw):
    """QUADPACK with roundoff chatter silenced; accuracy is checked by the
    tests that consume these values, not by the warning stream."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _scipy_quad(f, a, b, **kw)

__all__ = [
    "split_quad",
    "inner_product",
    "fractional_integral",
    "marchaud_deriv",
    "marchaud_deriv_right",
]

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


def _segments(a: float, b: float, breakpoints) -> list[tuple[float, float]]:
    pts = sorted({float(p) for p in breakpoints if a < p < b})
    edges = [a, *pts, b]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def split_quad(f, a: float, b: float, breakpoints=()) -> float:
    """Integrate ``f`` over ``[a, b]``, splitting at interior breakpoints."""
    total = 0.0
    for lo, hi in _segments(a, b, breakpoints):
        val, _ = quad(f, lo, hi, **_QUAD_OPTS)
        total += val
    return total


def inner_product(f, g, breakpoints=()) -> float:
    """L2 inner product of two callables over (0, 1)."""
    return split_quad(lambda x: f(x) * g(x), 0.0, 1.0, breakpoints)


def fractional_integral(f, gamma: float, x: float, breakpoints=()) -> float:
    """Left fractional integral ``(1/Gamma(gamma)) * int_0^x (x-t)**(gamma-1) f(t) dt``
    evaluated by direct convolution quadrature.

    For ``gamma < 1`` the kernel is singular at ``t = x``; on the last segment
    the substitution ``t = x - s**(1/gamma)`` removes the singularity exactly.
    """
    if x == 0.0:
        return 0.0
    if not gamma > 0.0:
        raise ValueError(f"integral order must be positive, got {gamma}")
    segs = _segments(0.0, x, breakpoints)
    total = 0.0
    for k, (lo, hi) in enumerate(segs):
        last = k == len(segs) - 1
        if gamma >= 1.0 or not last:
            val, _ = quad(lambda t: (x - t) ** (gamma - 1.0) * f(t), lo, hi, **_QUAD_OPTS)
        else:
            # t = x - s**(1/gamma): kernel * dt = -(1/gamma) ds, integrand regular
            s_hi = (x - lo) ** gamma
            val, _ = quad(lambda s: f(x - s ** (1.0 / gamma)) / gamma, 0.0, s_hi, **_QUAD_OPTS)
        total += val
    return total / math.gamma(gamma)


def marchaud_deriv(f, beta: float, x: float, breakpoints=()) -> float:
    """Left fractional derivative of order ``beta`` in (0, 1) at ``x`` via the
    Marchaud form, an independent route that never differentiates::

        f(x) x**-beta / Gamma(1-beta)
        + beta/Gamma(1-beta) * int_0^x (f(x)-f(t)) (x-t)**(-1-beta) dt

    Agrees with the Riemann-Liouville derivative for the bounded piecewise
    functions used here (implicit zero extension left of 0).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"Marchaud form needs order in (0, 1), got {beta}")
    fx = float(f(x))
    segs = _segments(0.0, x, breakpoints)
    inner = 0.0
    for k, (lo, hi) in enumerate(segs):
        if k == len(segs) - 1:
            # On the segment touching the singularity, peel off a local
            # linearization of f around x.  The peeled part integrates in
            # closed form and the split is exact for ANY slope value; a good
            # slope estimate merely makes the residual integrand vanish at
            # the endpoint, taming both the singularity and the float
            # cancellation in f(x) - f(t).
            eta = (hi - lo) / 4.0
            d1 = (fx - f(x - eta)) / eta
            d2 = (fx - f(x - 0.5 * eta)) / (0.5 * eta)
            s = 2.0 * d2 - d1
            val, _ = quad(lambda t: (fx - f(t) - s * (x - t)) * (x - t) ** (-1.0 - beta),
                          lo, hi, **_QUAD_OPTS)
            val += s * (hi - lo) ** (1.0 - beta) / (1.0 - beta)
        else:
            val, _ = quad(lambda t: (fx - f(t)) * (x - t) ** (-1.0 - beta), lo, hi, **_QUAD_OPTS)
        inner += val
    return (fx * x ** (-beta) + beta * inner) / math.gamma(1.0 - beta)


def marchaud_deriv_right(f, beta: float, x: float, breakpoints=()) -> float:
    """Right-sided analogue of :func:`marchaud_deriv` (integration up to 1,
    implicit zero extension right of 1)."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"Marchaud form needs order in (0, 1), got {beta}")
    reflected = [1.0 - float(p) for p in breakpoints]
    return marchaud_deriv(lambda t: f(1.0 - t), beta, 1.0 - x, reflected)
