"""Spectral diagnostics for the discrete operator pencil ``(K, M)``.

The analysis behind the solver rests on three structural facts about the
discrete generator: its numerical range sits in a sector strictly inside the
right half-plane, the induced coercivity/continuity constants control the
sector angle by ``cos(angle) = c0/C0``, and the generated semigroup smooths
like ``t**-gamma``.  None of these come with paper-supplied numbers; this
module measures them so the test suite can pin their qualitative behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import assemble_mass, assemble_stiffness
from .kernels import FracOrder, as_order
from .mesh import UniformMesh
from .stepping import SchemeSpec, run_scheme, spectral_calculus

__all__ = [
    "SectorReport",
    "ConstantsReport",
    "SmoothingReport",
    "sector_check",
    "numerical_range_sample",
    "estimate_constants",
    "smoothing_check",
]


@dataclass(frozen=True)
class SectorReport:
    """Eigenvalues of the pencil plus the fitted numerical-range angle."""

    alpha: float
    m: int
    eigenvalues: np.ndarray
    min_real: float
    max_abs_arg: float
    sector_angle: float      # exact numerical-range opening (see sector_check)

    @property
    def all_in_right_half_plane(self) -> bool:
        return self.min_real > 0.0


@dataclass(frozen=True)
class ConstantsReport:
    """Empirical coercivity/continuity pair measured in the energy norm
    induced by the symmetric part of the stiffness matrix."""

    alpha: float
    m: int
    c0: float
    C0: float

    @property
    def ratio(self) -> float:
        return self.c0 / self.C0

    @property
    def implied_angle(self) -> float:
        return math.acos(min(1.0, self.ratio))


@dataclass(frozen=True)
class SmoothingReport:
    alpha: float
    m: int
    gamma: float
    t_grid: tuple[float, ...]
    sup_per_t: tuple[float, ...]

    @property
    def overall(self) -> float:
        return max(self.sup_per_t)


def _pencil(mesh: UniformMesh, alpha: float):
    K = assemble_stiffness(mesh, alpha).dense()
    M = assemble_mass(mesh).dense()
    return K, M


def sector_check(mesh: UniformMesh, alpha: float | FracOrder) -> SectorReport:
    """Solve the generalized eigenproblem ``K x = lambda M x`` and fit the
    numerical-range angle.

    The angle is computed exactly rather than sampled: points of the
    numerical range have argument ``atan(y/x)`` with ``x = phi* S phi``,
    ``y = phi* N phi`` for the symmetric/skew parts ``S, N`` of ``K``, so the
    extreme argument is ``atan`` of the largest eigenvalue of the Hermitian
    pencil ``(N/i, S)``.  The mass matrix drops out of the argument entirely.
    """
    a = as_order(alpha)
    if mesh.m > 512:
        raise ValueError("sector diagnostics are dense; keep m <= 512")
    K, M = _pencil(mesh, a)
    lam = scipy.linalg.eig(K, M, right=False)
    S = 0.5 * (K + K.T)
    H = -0.5j * (K - K.T)          # Hermitian; phi* H phi = Im(phi* K phi)
    t = scipy.linalg.eigh(H, S, eigvals_only=True)
    angle = math.atan(float(np.abs(t).max()))
    return SectorReport(
        alpha=a, m=mesh.m, eigenvalues=lam,
        min_real=float(lam.real.min()),
        max_abs_arg=float(np.abs(np.angle(lam)).max()),
        sector_angle=angle,
    )


def numerical_range_sample(mesh: UniformMesh, alpha: float | FracOrder,
                           n_samples: int, seed: int = 0,
                           complex_vectors: bool = True) -> np.ndarray:
    """Rayleigh quotients ``(K phi, phi) / (M phi, phi)`` for random
    coefficient vectors, normalized to unit mass norm."""
    a = as_order(alpha)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    K, M = _pencil(mesh, a)
    rng = np.random.default_rng(seed)
    n = mesh.dim
    out = np.empty(n_samples, dtype=complex)
    for i in range(n_samples):
        phi = rng.standard_normal(n)
        if complex_vectors:
            phi = phi + 1j * rng.standard_normal(n)
        denom = np.real(np.conj(phi) @ (M @ phi))
        out[i] = (np.conj(phi) @ (K @ phi)) / denom
    return out


def estimate_constants(mesh: UniformMesh, alpha: float | FracOrder,
                       n_samples: int = 1000, seed: int = 0) -> ConstantsReport:
    """Extremize ``Re (K phi, phi)`` and ``|(K phi, phi)|`` over unit vectors
    of the symmetric-part energy norm: random draws plus the exact extremal
    direction of the Hermitian pencil, so the supremum is actually attained.
    The real part equals the energy norm square identically, so ``c0 = 1`` up
    to roundoff and ``C0`` carries all the information."""
    a = as_order(alpha)
    K, _ = _pencil(mesh, a)
    S = 0.5 * (K + K.T)
    H = -0.5j * (K - K.T)
    t, vecs = scipy.linalg.eigh(H, S)
    extremal = vecs[:, int(np.argmax(np.abs(t)))]
    rng = np.random.default_rng(seed)
    n = mesh.dim
    c0, C0 = np.inf, 0.0
    samples = [extremal] + [rng.standard_normal(n) + 1j * rng.standard_normal(n)
                            for _ in range(n_samples)]
    for phi in samples:
        energy = float(np.real(np.conj(phi) @ (S @ phi)))
        val = complex(np.conj(phi) @ (K @ phi)) / energy
        c0 = min(c0, val.real)
        C0 = max(C0, abs(val))
    return ConstantsReport(alpha=a, m=mesh.m, c0=float(c0), C0=float(C0))


def smoothing_check(mesh: UniformMesh, alpha: float | FracOrder, gamma: float,
                    t_grid, n_vectors: int = 10, seed: int = 0,
                    steps_per_t: int = 1024) -> SmoothingReport:
    """Measure ``t**gamma * ||L**gamma E(t) chi|| / ||chi||`` over random
    initial vectors, approximating the semigroup by the damped scheme with
    ``tau = t/steps_per_t``.  Bounded suprema across a ``t`` range spanning
    decades are the smoothing property."""
    a = as_order(alpha)
    if mesh.m > 128:
        raise ValueError("smoothing diagnostics are dense-spectral; keep m <= 128")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    stiffness = assemble_stiffness(mesh, a)
    mass = assemble_mass(mesh)
    _, apply_fn, _ = spectral_calculus(mass, stiffness)
    rng = np.random.default_rng(seed)
    chis = rng.standard_normal((n_vectors, mesh.dim))

    def mnorm(x):
        return math.sqrt(float(x @ mass.matvec(x)))

    sups = []
    for t in t_grid:
        spec = SchemeSpec("DampedCN", t / steps_per_t, steps_per_t)
        worst = 0.0
        for chi in chis:
            evolved = run_scheme(spec, mass, stiffness, chi).final
            powered = apply_fn(lambda z: z ** gamma, evolved)
            worst = max(worst, t ** gamma * mnorm(powered) / mnorm(chi))
        sups.append(worst)
    return SmoothingReport(alpha=a, m=mesh.m, gamma=gamma,
                           t_grid=tuple(float(t) for t in t_grid),
                           sup_per_t=tuple(sups))
