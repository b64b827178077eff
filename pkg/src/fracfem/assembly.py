"""Galerkin assembly on the interior hat basis.

The weak form of the order-``alpha`` operator pairs the order-``alpha/2`` left
derivative of the trial function with the order-``alpha/2`` right derivative
of the test function (with a minus sign).  On the discrete space this is
identical to pairing the order-``alpha - 1`` left derivative with the plain
test derivative, which is how entries are actually computed: every stiffness
entry collapses to a fourth difference of ``k**(3 - alpha)``, making the
matrix Toeplitz with entries exact to machine precision.  Tests certify the
equivalence of the two routes against adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .initial_data import InitialData, StepPotential
from .kernels import FracOrder, as_order, rl_lowderiv_hat
from .mesh import UniformMesh

__all__ = [
    "ToeplitzOperator",
    "MassMatrix",
    "assemble_stiffness",
    "assemble_mass",
    "assemble_weighted_mass",
    "load_vector",
    "l2_projection",
    "ritz_projection",
    "symmetric_part",
]


@dataclass(frozen=True)
class ToeplitzOperator:
    """Dense nonsymmetric constant-diagonal matrix stored by first column and
    first row (``first_row[0] == first_col[0]``)."""

    first_col: np.ndarray
    first_row: np.ndarray

    def __post_init__(self):
        fc = np.asarray(self.first_col, dtype=float)
        fr = np.asarray(self.first_row, dtype=float)
        object.__setattr__(self, "first_col", fc)
        object.__setattr__(self, "first_row", fr)
        if fc.ndim != 1 or fc.shape != fr.shape:
            raise ValueError("first column/row must be 1-D and equally long")
        if fc[0] != fr[0]:
            raise ValueError("corner entries disagree")

    @property
    def dim(self) -> int:
        return self.first_col.size

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_col, self.first_row)

    def transpose(self) -> "ToeplitzOperator":
        return ToeplitzOperator(self.first_row, self.first_col)

    @cached_property
    def _circulant_fft(self) -> np.ndarray:
        # embed into the smallest power-of-two circulant of size >= 2*dim
        n = self.dim
        size = 1 << max(1, (2 * n - 1).bit_length())
        c = np.zeros(size)
        c[:n] = self.first_col
        c[size - n + 1:] = self.first_row[1:][::-1]
        return np.fft.rfft(c)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Fast product via circulant embedding, O(n log n)."""
        x = np.asarray(x, dtype=float)
        size = 2 * (self._circulant_fft.size - 1)
        y = np.fft.irfft(self._circulant_fft * np.fft.rfft(x, n=size), n=size)
        return y[: self.dim]


@dataclass(frozen=True)
class MassMatrix:
    """Symmetric tridiagonal Gram-type matrix stored by its diagonal and
    off-diagonal bands."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        o = np.asarray(self.off, dtype=float)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", o)
        if o.size != d.size - 1:
            raise ValueError("off-diagonal band must be one shorter than diagonal")

    @property
    def dim(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y

    def solve(self, b: np.ndarray) -> np.ndarray:
        ab = np.zeros((3, self.dim))
        ab[0, 1:] = self.off
        ab[1] = self.diag
        ab[2, :-1] = self.off
        return scipy.linalg.solve_banded((1, 1), ab, np.asarray(b, dtype=float))

    def __add__(self, other: "MassMatrix") -> "MassMatrix":
        return MassMatrix(self.diag + other.diag, self.off + other.off)

    def scaled(self, factor: float) -> "MassMatrix":
        return MassMatrix(factor * self.diag, factor * self.off)


def _truncated_cubic(s: np.ndarray, sigma: float) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = s[pos] ** sigma
    return out


def assemble_stiffness(mesh: UniformMesh, alpha: float | FracOrder) -> ToeplitzOperator:
    """Stiffness matrix of the order-``alpha`` form on the hat basis.

    Entry at lag ``d = i - j``::

        h**(1-alpha)/Gamma(4-alpha) *
        [ -(d+2)_+^s + 4(d+1)_+^s - 6 d_+^s + 4(d-1)_+^s - (d-2)_+^s ],
        s = 3 - alpha

    obtained by integrating the order-``alpha - 1`` derivative of the trial
    hat (see :func:`fracfem.kernels.rl_lowderiv_hat`) against the test hat's
    piecewise-constant derivative.  Depends on ``i - j`` only, hence Toeplitz,
    and is persymmetric by reflection symmetry of the mesh.
    """
    a = as_order(alpha)
    n = mesh.dim
    sigma = 3.0 - a
    d = np.arange(-(n - 1), n, dtype=float)
    c = (-_truncated_cubic(d + 2.0, sigma) + 4.0 * _truncated_cubic(d + 1.0, sigma)
         - 6.0 * _truncated_cubic(d, sigma) + 4.0 * _truncated_cubic(d - 1.0, sigma)
         - _truncated_cubic(d - 2.0, sigma))
    vals = mesh.h ** (1.0 - a) / math.gamma(4.0 - a) * c
    return ToeplitzOperator(first_col=vals[n - 1:], first_row=vals[n - 1::-1])


def assemble_mass(mesh: UniformMesh) -> MassMatrix:
    """Gram matrix of the interior hats: diagonal ``2h/3``, off-diagonal ``h/6``."""
    n = mesh.dim
    return MassMatrix(np.full(n, 2.0 * mesh.h / 3.0), np.full(n - 1, mesh.h / 6.0))


def assemble_weighted_mass(mesh: UniformMesh, q: StepPotential) -> MassMatrix:
    """Gram matrix weighted by a piecewise-constant potential whose breakpoint
    is a mesh node.  Cell-local blocks are ``q_cell * h/6 * [[2, 1], [1, 2]]``."""
    qc = q.cell_values(mesh)          # raises if the breakpoint is off-node
    n = mesh.dim
    h = mesh.h
    # interior node j touches cells j-1 and j (0-based cells)
    diag = (qc[:-1] + qc[1:]) * h / 3.0
    off = qc[1:-1] * h / 6.0
    assert diag.size == n and off.size == n - 1
    return MassMatrix(diag, off)


def load_vector(mesh: UniformMesh, v: InitialData) -> np.ndarray:
    """Exact moments ``(v, hat_i)`` for the tagged data."""
    if v.tag == "nodal":
        if v.mesh_m != mesh.m:
            raise ValueError("nodal datum lives on a different mesh")
        return assemble_mass(mesh).matvec(np.asarray(v.coeffs))
    ppf = v.power_terms()
    h = mesh.h
    out = np.empty(mesh.dim)
    for j in range(1, mesh.m):
        xl, xm, xr = mesh.node(j - 1), mesh.node(j), mesh.node(j + 1)
        # hat = (x - x_{j-1})/h rising, (x_{j+1} - x)/h falling
        rising = ppf.integrate_against_linear(xl, xm, 1.0 / h, -xl / h)
        falling = ppf.integrate_against_linear(xm, xr, -1.0 / h, xr / h)
        out[j - 1] = rising + falling
    return out


def l2_projection(mesh: UniformMesh, v: InitialData) -> np.ndarray:
    """L2-orthogonal projection onto the hat space: solve ``M c = (v, hat)``."""
    return assemble_mass(mesh).solve(load_vector(mesh, v))


def ritz_projection(mesh: UniformMesh, alpha: float | FracOrder, v: InitialData) -> np.ndarray:
    """Energy-orthogonal projection: solve ``K c = r`` with ``r_i`` the form
    applied to ``(v, hat_i)``.

    Supported for the smooth quadratic datum (elementary closed-form right
    side through the integration-by-parts route) and for nodal data on the
    same mesh (identity).  The step and quarter-power data pair with the L2
    projection instead and are rejected here.
    """
    a = as_order(alpha)
    if v.tag == "nodal":
        if v.mesh_m != mesh.m:
            raise ValueError("nodal datum lives on a different mesh")
        return np.asarray(v.coeffs, dtype=float)
    if v.tag != "smooth-quadratic":
        raise ValueError(
            f"Ritz projection unsupported for datum {v.tag!r}; use l2_projection")
    # r_i = (I^{2-a} v', hat_i') with v' = 2x - 1; antiderivative of I^{2-a}v':
    #   F(x) = 2 x^{4-a}/Gamma(5-a) - x^{3-a}/Gamma(4-a)
    x = mesh.nodes
    F = 2.0 * x ** (4.0 - a) / math.gamma(5.0 - a) - x ** (3.0 - a) / math.gamma(4.0 - a)
    r = (2.0 * F[1:mesh.m] - F[0:mesh.m - 1] - F[2:mesh.m + 1]) / mesh.h
    K = assemble_stiffness(mesh, a)
    return scipy.linalg.solve(K.dense(), r)


def symmetric_part(op: ToeplitzOperator) -> ToeplitzOperator:
    """Symmetric part ``(K + K^T)/2``, again Toeplitz; induces the discrete
    energy norm used for error measurement."""
    half = 0.5 * (op.first_col + op.first_row)
    return ToeplitzOperator(half, half)
