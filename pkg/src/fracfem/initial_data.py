"""Initial data for the diffusion experiments, with exact hat-basis moments.

The three analytic data are carried as truncated-power sums so that load
vectors, L2 norms and projections stay closed-form:

* ``smooth_quadratic``:  v(x) = x*(x - 1)          (vanishes at both ends)
* ``step_half``:         v(x) = 1 on (1/2, 1), else 0
* ``quarter_power``:     v(x) = x**(1/4)

A ``nodal`` datum is an arbitrary member of the discrete space itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import PiecewisePowerFunction, TruncatedPowerTerm
from .mesh import UniformMesh, pl_evaluate

__all__ = [
    "InitialData",
    "smooth_quadratic",
    "step_half",
    "quarter_power",
    "nodal",
    "StepPotential",
]


@dataclass(frozen=True)
class InitialData:
    """Tagged initial datum.  Analytic tags carry a truncated-power
    representation; ``nodal`` carries coefficients on a mesh."""

    tag: str
    coeffs: tuple[float, ...] = field(default=())
    mesh_m: int = 0

    _TAGS = ("smooth-quadratic", "step-half", "quarter-power", "nodal")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown initial datum tag {self.tag!r}")
        if self.tag == "nodal" and len(self.coeffs) != self.mesh_m - 1:
            raise ValueError("nodal datum needs m-1 interior coefficients")

    def power_terms(self) -> PiecewisePowerFunction:
        """Truncated-power representation (analytic tags only)."""
        if self.tag == "smooth-quadratic":
            terms = (TruncatedPowerTerm(1.0, 0.0, 2.0, "left"),
                     TruncatedPowerTerm(-1.0, 0.0, 1.0, "left"))
        elif self.tag == "step-half":
            terms = (TruncatedPowerTerm(1.0, 0.5, 0.0, "left"),)
        elif self.tag == "quarter-power":
            terms = (TruncatedPowerTerm(1.0, 0.0, 0.25, "left"),)
        else:
            raise ValueError("nodal datum has no closed-form power representation")
        return PiecewisePowerFunction(terms)

    def __call__(self, x):
        if self.tag == "nodal":
            return pl_evaluate(UniformMesh(self.mesh_m), np.asarray(self.coeffs), x)
        return self.power_terms()(x)

    def l2_norm(self) -> float:
        """Exact L2(0,1) norm."""
        if self.tag == "smooth-quadratic":
            return 1.0 / math.sqrt(30.0)      # int (x^2-x)^2 = 1/30
        if self.tag == "step-half":
            return 1.0 / math.sqrt(2.0)
        if self.tag == "quarter-power":
            return math.sqrt(2.0 / 3.0)       # int x^(1/2) = 2/3
        from .assembly import assemble_mass   # local import: avoid cycle
        mesh = UniformMesh(self.mesh_m)
        c = np.asarray(self.coeffs)
        return float(math.sqrt(c @ assemble_mass(mesh).matvec(c)))


def smooth_quadratic() -> InitialData:
    return InitialData("smooth-quadratic")


def step_half() -> InitialData:
    return InitialData("step-half")


def quarter_power() -> InitialData:
    return InitialData("quarter-power")


def nodal(mesh: UniformMesh, coeffs) -> InitialData:
    return InitialData("nodal", tuple(float(c) for c in coeffs), mesh.m)


@dataclass(frozen=True)
class StepPotential:
    """Piecewise-constant potential with a single breakpoint, e.g. the
    indicator of (0, 1/2).  The breakpoint must land on a mesh node when
    assembled, so entries stay exact."""

    left_value: float = 1.0
    right_value: float = 0.0
    breakpoint: float = 0.5

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.breakpoint, self.left_value, self.right_value)
        return out if out.ndim else float(out)

    def cell_values(self, mesh: UniformMesh) -> np.ndarray:
        """Constant value on each cell; rejects meshes whose cells straddle
        the breakpoint."""
        k = self.breakpoint * mesh.m
        if abs(k - round(k)) > 1e-12:
            raise ValueError(
                f"breakpoint {self.breakpoint} is not a node of the m={mesh.m} mesh")
        k = int(round(k))
        vals = np.empty(mesh.m)
        vals[:k] = self.left_value
        vals[k:] = self.right_value
        return vals
