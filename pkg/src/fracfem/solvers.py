"""Solvers for the shifted systems ``a*M + b*(K + Q)`` arising per time step.

Two backends behind one interface: dense LU with partial pivoting (the
operator is factored once and reused across thousands of steps), and a
restarted GMRES that only touches the matrix through the O(n log n) Toeplitz
product, preconditioned by the tridiagonal part.  Every solve is followed by
a residual check; a solve that silently misses its tolerance is a bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .assembly import MassMatrix, ToeplitzOperator

__all__ = [
    "SystemOperator",
    "Factorization",
    "SolverError",
    "factor_dense",
    "toeplitz_matvec",
    "solve_iterative",
    "make_solver",
    "DENSE_FACTOR_LIMIT",
    "AUTO_DENSE_THRESHOLD",
]

# hard cap for materializing a dense factorization
DENSE_FACTOR_LIMIT = 8192
# 'auto' backend switches to GMRES above this dimension
AUTO_DENSE_THRESHOLD = 2048

DEFAULT_ITERATIVE_TOL = 1e-10
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    """Raised when a backend cannot reach the requested residual."""

    def __init__(self, msg: str, residual: float | None = None):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class SystemOperator:
    """The matrix ``a*M + b*(K + Q)`` with ``M`` the mass matrix, ``K`` the
    fractional stiffness and ``Q`` an optional potential Gram matrix."""

    mass: MassMatrix
    stiffness: ToeplitzOperator
    a: float = 1.0
    b: float = 1.0
    potential: MassMatrix | None = None

    def __post_init__(self):
        if self.mass.dim != self.stiffness.dim:
            raise ValueError("mass/stiffness dimensions disagree")
        if self.potential is not None and self.potential.dim != self.mass.dim:
            raise ValueError("potential dimension disagrees")

    @property
    def dim(self) -> int:
        return self.mass.dim

    def dense(self) -> np.ndarray:
        out = self.b * self.stiffness.dense()
        out += self.a * self.mass.dense()
        if self.potential is not None:
            out += self.b * self.potential.dense()
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.a * self.mass.matvec(x) + self.b * toeplitz_matvec(self.stiffness, x)
        if self.potential is not None:
            y += self.b * self.potential.matvec(x)
        return y

    @cached_property
    def _tridiagonal_bands(self) -> np.ndarray:
        """Bands of ``a*M + b*(tridiag(K) + Q)``, the GMRES preconditioner."""
        n = self.dim
        diag = self.a * self.mass.diag + self.b * np.full(n, self.stiffness.first_col[0])
        upper = self.a * self.mass.off + self.b * np.full(n - 1, self.stiffness.first_row[1])
        lower = self.a * self.mass.off + self.b * np.full(n - 1, self.stiffness.first_col[1])
        if self.potential is not None:
            diag = diag + self.b * self.potential.diag
            upper = upper + self.b * self.potential.off
            lower = lower + self.b * self.potential.off
        ab = np.zeros((3, n))
        ab[0, 1:] = upper
        ab[1] = diag
        ab[2, :-1] = lower
        return ab

    def tridiagonal_solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.solve_banded((1, 1), self._tridiagonal_bands, rhs)


def toeplitz_matvec(op: ToeplitzOperator, x: np.ndarray) -> np.ndarray:
    """Circulant-embedding product ``K @ x`` in O(n log n)."""
    return op.matvec(x)


def _check_residual(op: SystemOperator, x: np.ndarray, b: np.ndarray, tol: float,
                    context: str) -> float:
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return 0.0
    res = float(np.linalg.norm(op.matvec(x) - b)) / nb
    if res > tol:
        raise SolverError(f"{context}: relative residual {res:.3e} exceeds {tol:.1e}",
                          residual=res)
    return res


class Factorization:
    """Reusable dense LU factorization of a :class:`SystemOperator`."""

    def __init__(self, op: SystemOperator, lu_piv):
        self._op = op
        self._lu_piv = lu_piv

    @property
    def operator(self) -> SystemOperator:
        return self._op

    def solve(self, b: np.ndarray, check: bool = True) -> np.ndarray:
        x = scipy.linalg.lu_solve(self._lu_piv, np.asarray(b, dtype=float))
        if check:
            _check_residual(self._op, x, b, RESIDUAL_TOL, "dense solve")
        return x


def factor_dense(op: SystemOperator) -> Factorization:
    """LU-factor the materialized operator (partial pivoting)."""
    if op.dim > DENSE_FACTOR_LIMIT:
        raise ValueError(f"dimension {op.dim} exceeds dense limit {DENSE_FACTOR_LIMIT}")
    return Factorization(op, scipy.linalg.lu_factor(op.dense()))


def solve_iterative(op: SystemOperator, b: np.ndarray, tol: float = DEFAULT_ITERATIVE_TOL,
                    maxiter: int = 400) -> np.ndarray:
    """Restarted GMRES on the fast matvec, preconditioned by the tridiagonal
    part of the operator.  Raises :class:`SolverError` carrying the achieved
    residual on non-convergence."""
    if tol < 1e-12:
        raise ValueError(f"tolerance below 1e-12 is not supported, got {tol}")
    b = np.asarray(b, dtype=float)
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return np.zeros_like(b)
    n = op.dim
    A = scipy.sparse.linalg.LinearOperator((n, n), matvec=op.matvec)
    M = scipy.sparse.linalg.LinearOperator((n, n), matvec=op.tridiagonal_solve)
    x, info = scipy.sparse.linalg.gmres(A, b, rtol=tol / 10.0, atol=0.0,
                                        restart=50, maxiter=maxiter, M=M)
    res = float(np.linalg.norm(op.matvec(x) - b)) / nb
    if info != 0 or res > tol:
        raise SolverError(
            f"GMRES did not reach tol {tol:.1e} (info={info})", residual=res)
    return x


class _IterativeSolver:
    """Callable facade so stepping code can treat both backends alike."""

    def __init__(self, op: SystemOperator, tol: float):
        self._op = op
        self._tol = tol

    @property
    def operator(self) -> SystemOperator:
        return self._op

    def solve(self, b: np.ndarray, check: bool = True) -> np.ndarray:
        return solve_iterative(self._op, b, self._tol)


def make_solver(op: SystemOperator, backend: str = "auto",
                tol: float = DEFAULT_ITERATIVE_TOL):
    """Return a reusable solver for ``op``: ``backend`` is ``"dense"``,
    ``"iterative"`` or ``"auto"`` (dense up to dimension 2048)."""
    if backend == "auto":
        backend = "dense" if op.dim <= AUTO_DENSE_THRESHOLD else "iterative"
    if backend == "dense":
        return factor_dense(op)
    if backend == "iterative":
        return _IterativeSolver(op, tol)
    raise ValueError(f"unknown backend {backend!r}")
