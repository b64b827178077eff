"""Closed-form Riemann-Liouville calculus on powers and hat functions.

Everything downstream (stiffness assembly, projections, load vectors) reduces
to fractional integrals and derivatives of monomials ``t**p`` and of the
piecewise-linear nodal basis.  Both have exact representations as sums of
truncated powers ``(x - a)_+**p`` / ``(b - x)_+**p``, collected here.

Conventions for order ``beta`` with ``n - 1 < beta < n``::

    left  derivative:  d^n/dx^n of the order-(n - beta) integral from 0
    right derivative:  (-d/dx)^n of the order-(n - beta) integral up to 1

The left fractional integral of order ``gamma > 0`` is convolution with
``t**(gamma-1) / Gamma(gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from .mesh import UniformMesh

__all__ = [
    "FracOrder",
    "TruncatedPowerTerm",
    "PiecewisePowerFunction",
    "rl_integral_power",
    "rl_deriv_power",
    "rl_halfderiv_hat",
    "rl_lowderiv_hat",
]


@dataclass(frozen=True)
class FracOrder:
    """Order of the spatial operator, restricted to the open interval (1, 2)."""

    alpha: float

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"order must lie in (1, 2), got {self.alpha}")


def as_order(alpha: float | FracOrder) -> float:
    """Validate and unwrap an operator order."""
    if isinstance(alpha, FracOrder):
        return alpha.alpha
    return FracOrder(float(alpha)).alpha


@dataclass(frozen=True)
class TruncatedPowerTerm:
    """One term ``coeff * (x - offset)_+**exponent`` (side ``"left"``) or
    ``coeff * (offset - x)_+**exponent`` (side ``"right"``).

    Exponents are restricted to ``> -1`` so every term is integrable on (0, 1).
    """

    coeff: float
    offset: float
    exponent: float
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if not self.exponent > -1.0:
            raise ValueError(f"exponent must exceed -1, got {self.exponent}")
        if not 0.0 <= self.offset <= 1.0:
            raise ValueError(f"offset must lie in [0, 1], got {self.offset}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = x - self.offset if self.side == "left" else self.offset - x
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0.0, self.coeff * np.power(np.abs(s), self.exponent), 0.0)
        return out if out.ndim else float(out)

    def antiderivative_jump(self, c: float, d: float) -> float:
        """Exact integral of this term over ``[c, d] subset [0, 1]``."""
        p1 = self.exponent + 1.0
        if self.side == "left":
            lo = max(c, self.offset)
            if d <= lo:
                return 0.0
            return self.coeff * ((d - self.offset) ** p1 - (lo - self.offset) ** p1) / p1
        hi = min(d, self.offset)
        if hi <= c:
            return 0.0
        return self.coeff * ((self.offset - c) ** p1 - (self.offset - hi) ** p1) / p1

    def integrate_against_linear(self, c: float, d: float, slope: float, intercept: float) -> float:
        """Exact ``integral of term(x) * (slope*x + intercept)`` over ``[c, d]``."""
        p1, p2 = self.exponent + 1.0, self.exponent + 2.0
        a = self.offset
        if self.side == "left":
            lo = max(c, a)
            if d <= lo:
                return 0.0
            # slope*x + intercept = slope*(x - a) + (slope*a + intercept)
            quad = ((d - a) ** p2 - (lo - a) ** p2) / p2
            lin = ((d - a) ** p1 - (lo - a) ** p1) / p1
            return self.coeff * (slope * quad + (slope * a + intercept) * lin)
        hi = min(d, a)
        if hi <= c:
            return 0.0
        # slope*x + intercept = -slope*(a - x) + (slope*a + intercept)
        quad = ((a - c) ** p2 - (a - hi) ** p2) / p2
        lin = ((a - c) ** p1 - (a - hi) ** p1) / p1
        return self.coeff * (-slope * quad + (slope * a + intercept) * lin)


@dataclass(frozen=True)
class PiecewisePowerFunction:
    """A finite sum of truncated power terms; closed under the fractional
    calculus used in assembly.  Evaluation is finite away from term offsets."""

    terms: tuple[TruncatedPowerTerm, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + term(x)
        return out if out.ndim else float(out)

    @property
    def offsets(self) -> tuple[float, ...]:
        return tuple(sorted({t.offset for t in self.terms}))

    def integrate(self, c: float = 0.0, d: float = 1.0) -> float:
        return sum(t.antiderivative_jump(c, d) for t in self.terms)

    def integrate_against_linear(self, c: float, d: float, slope: float, intercept: float) -> float:
        return sum(t.integrate_against_linear(c, d, slope, intercept) for t in self.terms)


def rl_integral_power(gamma: float, p: float, x: float) -> float:
    """Left fractional integral of ``t**p`` at ``x``:
    ``Gamma(p+1)/Gamma(p+1+gamma) * x**(p+gamma)``.
    """
    if not gamma > 0.0:
        raise ValueError(f"integral order must be positive, got {gamma}")
    if not p > -1.0:
        raise ValueError(f"power must exceed -1, got {p}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    ratio = math.gamma(p + 1.0) * rgamma(p + 1.0 + gamma)
    if x == 0.0:
        if p + gamma > 0.0:
            return 0.0
        if p + gamma == 0.0:
            return float(ratio)
        return math.inf
    return float(ratio * x ** (p + gamma))


def rl_deriv_power(beta: float, p: float, x: float) -> float:
    """Left Riemann-Liouville derivative of ``t**p`` at ``x``:
    ``Gamma(p+1)/Gamma(p+1-beta) * x**(p-beta)``.

    Whenever ``p + 1 - beta`` hits a nonpositive integer the reciprocal Gamma
    factor vanishes and the value is 0; in particular ``t**(beta-1)`` is
    annihilated.  This continuous extension is deliberate, not an error.
    """
    if not 0.0 < beta < 2.0:
        raise ValueError(f"derivative order must lie in (0, 2), got {beta}")
    if not p > -1.0:
        raise ValueError(f"power must exceed -1, got {p}")
    if not 0.0 < x <= 1.0:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    factor = math.gamma(p + 1.0) * float(rgamma(p + 1.0 - beta))
    if factor == 0.0:
        return 0.0
    return factor * x ** (p - beta)


def _hat_difference(mesh: UniformMesh, j: int, exponent: float, scale: float,
                    side: str) -> PiecewisePowerFunction:
    """Coefficient pattern {+1, -2, +1} of truncated powers around node j."""
    if not 1 <= j <= mesh.m - 1:
        raise IndexError(f"interior node index out of range: {j} (m={mesh.m})")
    offs = (mesh.node(j - 1), mesh.node(j), mesh.node(j + 1))
    weights = (1.0, -2.0, 1.0)
    terms = tuple(
        TruncatedPowerTerm(w * scale, a, exponent, side)
        for w, a in zip(weights, offs)
    )
    return PiecewisePowerFunction(terms)


def rl_halfderiv_hat(alpha: float | FracOrder, mesh: UniformMesh, j: int,
                     side: str = "left") -> PiecewisePowerFunction:
    """Order-``alpha/2`` fractional derivative of the hat at node ``j``.

    Left side:  ``sum of (+1,-2,+1)/(h*Gamma(2-alpha/2)) * (x - x_k)_+**(1-alpha/2)``
    over ``k = j-1, j, j+1``; the right side is the mirror image under
    ``x -> 1 - x``.
    """
    a = as_order(alpha)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    beta = a / 2.0
    scale = 1.0 / (mesh.h * math.gamma(2.0 - beta))
    return _hat_difference(mesh, j, 1.0 - beta, scale, side)


def rl_lowderiv_hat(alpha: float | FracOrder, mesh: UniformMesh, j: int) -> PiecewisePowerFunction:
    """Order-``alpha - 1`` left derivative of the hat at node ``j``.

    Equals the order-``2 - alpha`` integral of the hat's derivative (the hat
    vanishes at 0), i.e. ``(+1,-2,+1)/(h*Gamma(3-alpha)) * (x - x_k)_+**(2-alpha)``.
    This is the workhorse of stiffness assembly: integrating it against a
    piecewise-constant test derivative has an elementary antiderivative.
    """
    a = as_order(alpha)
    scale = 1.0 / (mesh.h * math.gamma(3.0 - a))
    return _hat_difference(mesh, j, 2.0 - a, scale, "left")
