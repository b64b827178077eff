"""Fully discrete schemes: backward Euler, Crank-Nicolson, and the damped
variant that replaces the first two steps by backward Euler.

With step ``tau`` and spatial operator pair ``(M, K)`` the updates are::

    BE:        (M + tau*K) u_n     = M u_{n-1}            (+ tau * load)
    CN:        (M + tau/2*K) u_n   = (M - tau/2*K) u_{n-1}
    DampedCN:  two BE steps of the same tau, then CN

Each scheme applies the scalar rational function ``r(tau*lambda)`` to every
eigenmode; those stability functions are first-class here because several
structural bounds are stated (and tested) directly on them.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import MassMatrix, ToeplitzOperator
from .kernels import FracOrder, as_order
from .mesh import UniformMesh
from .solvers import SystemOperator, make_solver

__all__ = [
    "SchemeSpec",
    "Trajectory",
    "run_scheme",
    "stability_fn",
    "stability_fn_pow",
    "smoothing_constant",
    "smoothing_profile",
    "spectral_calculus",
]

_METHOD_ALIASES = {
    "be": "BE", "backward-euler": "BE",
    "cn": "CN", "crank-nicolson": "CN",
    "dampedcn": "DampedCN", "dcn": "DampedCN", "damped-cn": "DampedCN",
}


def canonical_method(method: str) -> str:
    key = method.strip().lower()
    if key not in _METHOD_ALIASES:
        raise ValueError(f"unknown scheme {method!r}; expected BE, CN or DampedCN")
    return _METHOD_ALIASES[key]


@dataclass(frozen=True)
class SchemeSpec:
    """Time-stepping method tag plus step size and step count (T = N*tau)."""

    method: str
    tau: float
    num_steps: int

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if not self.tau > 0.0:
            raise ValueError(f"step size must be positive, got {self.tau}")
        if self.num_steps < 1:
            raise ValueError(f"need at least one step, got {self.num_steps}")
        if self.method == "DampedCN" and self.num_steps < 2:
            raise ValueError("damped scheme needs at least the two damping steps")

    @property
    def horizon(self) -> float:
        return self.num_steps * self.tau


@dataclass
class Trajectory:
    """Final state plus optional snapshots keyed by step index."""

    spec: SchemeSpec
    final: np.ndarray
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    def state_at(self, t: float) -> np.ndarray:
        n = int(round(t / self.spec.tau))
        if abs(n * self.spec.tau - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not a step multiple of tau={self.spec.tau}")
        if n == self.spec.num_steps:
            return self.final
        if n not in self.snapshots:
            raise KeyError(f"no snapshot recorded at step {n} (t={t})")
        return self.snapshots[n]


def _snapshot_steps(spec: SchemeSpec, snapshot_times) -> set[int]:
    steps = set()
    for t in snapshot_times:
        n = int(round(t / spec.tau))
        if abs(n * spec.tau - t) > 1e-9 * max(1.0, abs(t)) or not 0 < n <= spec.num_steps:
            raise ValueError(f"snapshot time {t} is not reachable with tau={spec.tau}")
        steps.add(n)
    return steps


def run_scheme(spec: SchemeSpec, mass: MassMatrix, stiffness: ToeplitzOperator,
               v_h: np.ndarray, potential: MassMatrix | None = None,
               backend: str = "auto", snapshot_times=(),
               load_hook=None) -> Trajectory:
    """March the scheme from ``v_h``; factorizations are built once per
    distinct operator and reused for every step.

    ``load_hook(t) -> vector`` supplies the source moments at time ``t``
    (midpoint time for CN); the experiments all run with the default zero
    source.  Solver failures propagate with the step index attached.
    """
    v_h = np.asarray(v_h, dtype=float)
    snap_steps = _snapshot_steps(spec, snapshot_times)
    tau = spec.tau

    solvers = {}

    def solver_for(shift: float):
        if shift not in solvers:
            op = SystemOperator(mass, stiffness, a=1.0, b=shift, potential=potential)
            solvers[shift] = make_solver(op, backend)
        return solvers[shift]

    def stiff_matvec(x):
        y = stiffness.matvec(x)
        if potential is not None:
            y = y + potential.matvec(x)
        return y

    u = v_h.copy()
    snaps = {}
    for n in range(1, spec.num_steps + 1):
        backward = spec.method == "BE" or (spec.method == "DampedCN" and n <= 2)
        if backward:
            rhs = mass.matvec(u)
            if load_hook is not None:
                rhs = rhs + tau * np.asarray(load_hook(n * tau), dtype=float)
            solver = solver_for(tau)
        else:
            rhs = mass.matvec(u) - 0.5 * tau * stiff_matvec(u)
            if load_hook is not None:
                rhs = rhs + tau * np.asarray(load_hook((n - 0.5) * tau), dtype=float)
            solver = solver_for(0.5 * tau)
        try:
            u = solver.solve(rhs)
        except Exception as exc:
            raise type(exc)(f"step {n} (t={n * tau:g}): {exc}") from exc
        if n in snap_steps:
            snaps[n] = u.copy()
    return Trajectory(spec=spec, final=u, snapshots=snaps)


def stability_fn(method: str, z: complex) -> complex:
    """Single-step amplification factor: ``1/(1+z)`` for BE,
    ``(1 - z/2)/(1 + z/2)`` for CN.  The damped scheme starts with a backward
    Euler step, so its one-step factor coincides with BE."""
    m = canonical_method(method)
    z = complex(z)
    if m == "CN":
        if z == -2.0:
            raise ZeroDivisionError("CN stability function has a pole at z = -2")
        return (1.0 - 0.5 * z) / (1.0 + 0.5 * z)
    if z == -1.0:
        raise ZeroDivisionError("BE stability function has a pole at z = -1")
    return 1.0 / (1.0 + z)


def stability_fn_pow(method: str, z: complex, n: int) -> complex:
    """n-step amplification: ``r(z)**n``, with the damped convention
    ``r_be(z)**2 * r_cn(z)**(n-2)`` for ``n >= 2``."""
    m = canonical_method(method)
    if n < 0:
        raise ValueError("step count must be nonnegative")
    if n == 0:
        return 1.0 + 0.0j
    if m == "DampedCN":
        if n == 1:
            return stability_fn("BE", z)
        return stability_fn("BE", z) ** 2 * stability_fn("CN", z) ** (n - 2)
    return stability_fn(m, z) ** n


def spectral_calculus(mass: MassMatrix, stiffness: ToeplitzOperator,
                      potential: MassMatrix | None = None):
    """Dense eigendecomposition machinery for the generator ``L = M^{-1} K``.

    Returns ``(lam, apply_fn, op_norm)`` where ``apply_fn(f, x)`` evaluates
    ``f(L) x`` for a vectorized scalar function ``f`` and ``op_norm(f)`` is
    the L2 operator norm of ``f(L)`` (norms taken in the mass inner product).
    Intended for small meshes only; the eigenproblem is dense.
    """
    K = stiffness.dense()
    if potential is not None:
        K = K + potential.dense()
    M = mass.dense()
    L = np.linalg.solve(M, K)
    lam, V = scipy.linalg.eig(L)
    Vinv = np.linalg.inv(V)
    w, U = scipy.linalg.eigh(M)
    if w.min() <= 0.0:
        raise np.linalg.LinAlgError("mass matrix not positive definite")
    Msqrt = (U * np.sqrt(w)) @ U.T
    P = Msqrt @ V
    Pinv = Vinv @ (U * (1.0 / np.sqrt(w))) @ U.T

    def apply_fn(f, x):
        return (V @ (f(lam) * (Vinv @ np.asarray(x, dtype=complex)))).real

    def op_norm(f):
        return float(np.linalg.norm(P @ (f(lam)[:, None] * Pinv), 2))

    return lam, apply_fn, op_norm


def smoothing_profile(method: str, gamma: float, mesh: UniformMesh,
                      alpha: float | FracOrder, n_list, s: float,
                      stiffness: ToeplitzOperator | None = None,
                      mass: MassMatrix | None = None) -> np.ndarray:
    """``(n*s)**gamma * ||L**gamma r(s L)**n||`` over the step counts in
    ``n_list``; bounded profiles are the discrete smoothing property."""
    from .assembly import assemble_mass, assemble_stiffness
    m = canonical_method(method)
    a = as_order(alpha)
    stiffness = stiffness if stiffness is not None else assemble_stiffness(mesh, a)
    mass = mass if mass is not None else assemble_mass(mesh)
    lam, _, op_norm = spectral_calculus(mass, stiffness)
    out = np.empty(len(n_list))
    for i, n in enumerate(n_list):
        def f(z):
            r = np.array([stability_fn_pow(m, s * zz, int(n)) for zz in z])
            return z ** gamma * r
        out[i] = (n * s) ** gamma * op_norm(f)
    return out


def smoothing_constant(method: str, gamma: float, mesh: UniformMesh,
                       alpha: float | FracOrder, n_max: int = 256,
                       s_grid=(1e-3, 1e-2, 1e-1, 1.0)) -> float:
    """Supremum of the smoothing profile over ``n <= n_max`` and the sampled
    step sizes; finiteness (uniformly in n and s) is the tested property."""
    if mesh.m > 128:
        raise ValueError("smoothing diagnostics are dense-spectral; keep m <= 128")
    # the bound only holds for n >= gamma
    n_min = max(1, int(np.ceil(gamma)))
    n_list = sorted(n for n in ({int(n) for n in np.unique(np.round(
        np.logspace(0, np.log10(n_max), 24)))} | {1, 2, n_max}) if n >= n_min)
    best = 0.0
    for s in s_grid:
        best = max(best, float(smoothing_profile(method, gamma, mesh, alpha,
                                                 n_list, s).max()))
    return best
