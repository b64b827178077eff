"""Shared helpers: quadrature-oracle evaluation of the bilinear form and of
hat-basis moments, used to certify the closed-form assembly routes."""

import numpy as np
import pytest

from fracfem import UniformMesh, rl_halfderiv_hat
from fracfem.quadrature import inner_product, split_quad

ALPHAS = (1.25, 1.5, 1.75)


def form_entry_oracle(mesh: UniformMesh, alpha: float, i: int, j: int) -> float:
    """-(left half-derivative of hat_j, right half-derivative of hat_i) by
    adaptive quadrature; the defining route for stiffness entries."""
    left = rl_halfderiv_hat(alpha, mesh, j, "left")
    right = rl_halfderiv_hat(alpha, mesh, i, "right")
    return -inner_product(left, right, breakpoints=mesh.nodes[1:-1])


def form_against_hat_oracle(mesh: UniformMesh, alpha: float, dleft_v, i: int,
                            extra_breakpoints=()) -> float:
    """-(given left half-derivative of v, right half-derivative of hat_i)."""
    right = rl_halfderiv_hat(alpha, mesh, i, "right")
    pts = sorted(set(mesh.nodes[1:-1]) | set(extra_breakpoints))
    return -inner_product(dleft_v, right, breakpoints=pts)


def moment_oracle(mesh: UniformMesh, v, i: int, extra_breakpoints=()) -> float:
    """(v, hat_i) by adaptive quadrature."""
    pts = sorted(set(mesh.nodes[1:-1]) | set(extra_breakpoints))
    return inner_product(v, lambda x: mesh.hat(i, x), breakpoints=pts)


def l2_product_oracle(mesh: UniformMesh, f, g, extra_breakpoints=()) -> float:
    pts = sorted(set(mesh.nodes[1:-1]) | set(extra_breakpoints))
    return inner_product(f, g, breakpoints=pts)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
