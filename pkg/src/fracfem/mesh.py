"""Uniform meshes on (0, 1) and piecewise-linear nodal functions.

Interior degrees of freedom are stored as plain ``numpy`` arrays of length
``m - 1`` (the coefficient vector of the hat basis); homogeneous Dirichlet
values at 0 and 1 are implicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["UniformMesh", "interpolant", "prolong", "pl_evaluate"]


@dataclass(frozen=True)
class UniformMesh:
    """Partition of (0, 1) into ``m`` equal cells, nodes ``x_j = j/m``."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"need at least 2 cells, got m={self.m}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def dim(self) -> int:
        """Number of interior nodes."""
        return self.m - 1

    def node(self, j: int) -> float:
        return j / self.m

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.arange(1, self.m) / self.m

    def hat(self, j: int, x):
        """Evaluate the hat basis function centered at node ``j``."""
        if not 1 <= j <= self.m - 1:
            raise IndexError(f"interior node index out of range: {j} (m={self.m})")
        x = np.asarray(x, dtype=float)
        out = np.maximum(0.0, 1.0 - np.abs(x - self.node(j)) * self.m)
        return out if out.ndim else float(out)


def interpolant(mesh: UniformMesh, v) -> np.ndarray:
    """Nodal interpolant: coefficients ``v(x_j)`` at interior nodes."""
    return np.asarray([float(v(x)) for x in mesh.interior_nodes])


def pl_evaluate(mesh: UniformMesh, coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate the piecewise-linear function given by interior coefficients."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.dim,):
        raise ValueError(f"expected {mesh.dim} coefficients, got {coeffs.shape}")
    full = np.zeros(mesh.m + 1)
    full[1:mesh.m] = coeffs
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cell = np.clip(np.floor(x * mesh.m).astype(int), 0, mesh.m - 1)
    lam = x * mesh.m - cell
    vals = full[cell] * (1.0 - lam) + full[cell + 1] * lam
    return vals


def prolong(coarse: UniformMesh, fine: UniformMesh, coeffs: np.ndarray) -> np.ndarray:
    """Exact embedding of a coarse piecewise-linear function into a nested
    fine hat basis (fine ``m`` must be an integer multiple of coarse ``m``)."""
    if fine.m % coarse.m != 0:
        raise ValueError(f"meshes not nested: {coarse.m} does not divide {fine.m}")
    return pl_evaluate(coarse, coeffs, fine.interior_nodes)
