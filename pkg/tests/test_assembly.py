"""Assembled operators against the quadrature oracle and structural facts."""

import math

import numpy as np
import pytest
import scipy.linalg

from fracfem import (StepPotential, UniformMesh, assemble_mass,
                     assemble_stiffness, assemble_weighted_mass, interpolant,
                     l2_projection, load_vector, nodal, pl_evaluate, prolong,
                     quarter_power, ritz_projection, rl_deriv_power,
                     rl_halfderiv_hat, rl_lowderiv_hat, smooth_quadratic,
                     step_half, symmetric_part)
from fracfem.quadrature import inner_product, quad

from conftest import ALPHAS, form_entry_oracle, l2_product_oracle, moment_oracle


def classical_stiffness(m):
    n = m - 1
    return m * (np.diag(2.0 * np.ones(n)) - np.diag(np.ones(n - 1), 1)
                - np.diag(np.ones(n - 1), -1))


class TestStiffness:
    def test_classical_limit(self):
        mesh = UniformMesh(32)
        K = assemble_stiffness(mesh, 1.999999).dense()
        T = classical_stiffness(32)
        rel = np.max(np.abs(K - T)) / np.max(np.abs(T))
        assert rel < 1e-4

    def test_classical_limit_monotone_in_epsilon(self):
        mesh = UniformMesh(16)
        T = classical_stiffness(16)
        devs = []
        for eps in (1e-2, 1e-4, 1e-6):
            K = assemble_stiffness(mesh, 2.0 - eps).dense()
            devs.append(np.max(np.abs(K - T)))
        assert devs[0] > devs[1] > devs[2]

    def test_every_entry_against_defining_form_oracle(self):
        # the assembly route integrates by parts; the oracle pairs the two
        # half-order derivatives directly
        mesh = UniformMesh(8)
        K = assemble_stiffness(mesh, 1.5).dense()
        for i in range(1, mesh.m):
            for j in range(1, mesh.m):
                oracle = form_entry_oracle(mesh, 1.5, i, j)
                assert K[i - 1, j - 1] == pytest.approx(oracle, rel=1e-8, abs=1e-10)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_symmetric_part_positive_definite(self, alpha):
        mesh = UniformMesh(16)
        K = assemble_stiffness(mesh, alpha).dense()
        eigs = np.linalg.eigvalsh(0.5 * (K + K.T))
        assert eigs.min() > 0.0

    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("m", [4, 8, 16, 32])
    def test_toeplitz_and_persymmetric(self, alpha, m):
        K = assemble_stiffness(UniformMesh(m), alpha).dense()
        n = m - 1
        for d in range(-(n - 1), n):
            diag = np.diagonal(K, d)
            assert np.all(diag == diag[0])
        assert np.array_equal(K, K[::-1, ::-1].T)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_coercivity_scaling_mesh_robust(self, alpha):
        # smallest eigenvalue of the symmetric part scales like h; the
        # normalized value must stay bounded away from zero as the mesh refines
        vals = []
        for m in (8, 16, 32, 64):
            K = assemble_stiffness(UniformMesh(m), alpha).dense()
            lmin = np.linalg.eigvalsh(0.5 * (K + K.T)).min()
            vals.append(lmin * m)
        assert min(vals) > 1.0
        assert max(vals) / min(vals) < 1.1

    def test_fast_matvec_matches_dense(self, rng):
        op = assemble_stiffness(UniformMesh(64), 1.4)
        dense = op.dense()
        for _ in range(5):
            x = rng.standard_normal(63)
            assert np.allclose(op.matvec(x), dense @ x, rtol=1e-13, atol=1e-13)


class TestMass:
    def test_exact_bands_m4(self):
        M = assemble_mass(UniformMesh(4))
        assert M.diag == pytest.approx([1 / 6] * 3, abs=1e-16)
        assert M.off == pytest.approx([1 / 24] * 2, abs=1e-16)

    def test_symmetry_and_row_sums(self):
        mesh = UniformMesh(8)
        M = assemble_mass(mesh).dense()
        assert np.array_equal(M, M.T)
        sums = M.sum(axis=1)
        assert sums[0] == pytest.approx(5 * mesh.h / 6, rel=1e-15)
        assert sums[-1] == pytest.approx(5 * mesh.h / 6, rel=1e-15)
        assert np.allclose(sums[1:-1], mesh.h, rtol=1e-15)

    def test_quadratic_form_is_l2_norm_squared(self, rng):
        mesh = UniformMesh(8)
        M = assemble_mass(mesh)
        c = rng.standard_normal(mesh.dim)
        vh = lambda x: pl_evaluate(mesh, c, x)
        oracle = l2_product_oracle(mesh, vh, vh)
        assert c @ M.matvec(c) == pytest.approx(oracle, rel=1e-12)


class TestWeightedMass:
    def test_unit_potential_reproduces_mass(self):
        mesh = UniformMesh(8)
        Mq = assemble_weighted_mass(mesh, StepPotential(1.0, 1.0, 0.5))
        M = assemble_mass(mesh)
        assert np.array_equal(Mq.diag, M.diag)
        assert np.array_equal(Mq.off, M.off)

    def test_left_indicator_zero_rows_on_right_half(self):
        # m=4: the hat at 0.75 is supported in (1/2, 1) where q vanishes
        Mq = assemble_weighted_mass(UniformMesh(4), StepPotential(1.0, 0.0, 0.5)).dense()
        assert np.all(Mq[2, :] == 0.0)
        assert np.all(Mq[:, 2] == 0.0)

    def test_quadratic_form_is_weighted_l2(self, rng):
        mesh = UniformMesh(8)
        q = StepPotential(1.0, 0.0, 0.5)
        Mq = assemble_weighted_mass(mesh, q)
        c = rng.standard_normal(mesh.dim)
        vh = lambda x: pl_evaluate(mesh, c, x)
        oracle = l2_product_oracle(mesh, lambda x: q(x) * vh(x), vh,
                                   extra_breakpoints=(0.5,))
        assert c @ Mq.matvec(c) == pytest.approx(oracle, rel=1e-12)

    def test_rejects_breakpoint_off_node(self):
        with pytest.raises(ValueError):
            assemble_weighted_mass(UniformMesh(5), StepPotential(1.0, 0.0, 0.5))


class TestLoadVector:
    def test_smooth_quadratic_m2_against_oracle(self):
        mesh = UniformMesh(2)
        v = smooth_quadratic()
        b = load_vector(mesh, v)
        oracle = moment_oracle(mesh, v, 1)
        assert b[0] == pytest.approx(oracle, abs=1e-14)
        # closed form: h*(x(x-1) + h^2/6) at the midpoint
        assert b[0] == pytest.approx(0.5 * (-0.25 + 0.25 / 6), rel=1e-15)

    def test_step_half_m2_against_oracle(self):
        mesh = UniformMesh(2)
        v = step_half()
        b = load_vector(mesh, v)
        oracle = moment_oracle(mesh, v, 1, extra_breakpoints=(0.5,))
        assert b[0] == pytest.approx(oracle, abs=1e-14)
        assert b[0] == pytest.approx(0.25, rel=1e-15)   # half of the hat mass

    @pytest.mark.parametrize("datum,extra", [(smooth_quadratic(), ()),
                                             (step_half(), (0.5,)),
                                             (quarter_power(), ())])
    def test_all_data_all_moments_against_oracle(self, datum, extra):
        mesh = UniformMesh(8)
        b = load_vector(mesh, datum)
        for i in range(1, mesh.m):
            assert b[i - 1] == pytest.approx(
                moment_oracle(mesh, datum, i, extra_breakpoints=extra), rel=1e-10)

    def test_zero_datum_gives_zero_vector(self):
        mesh = UniformMesh(8)
        z = nodal(mesh, np.zeros(mesh.dim))
        assert np.all(load_vector(mesh, z) == 0.0)


class TestL2Projection:
    def test_identity_on_discrete_space(self, rng):
        mesh = UniformMesh(8)
        c = rng.standard_normal(mesh.dim)
        proj = l2_projection(mesh, nodal(mesh, c))
        assert np.allclose(proj, c, rtol=1e-13, atol=1e-14)

    def test_second_order_rate_for_smooth_datum(self):
        # ||P_h v - v||^2 = ||v||^2 - 2 c.b + c M c, all in closed form
        v = smooth_quadratic()
        errs = []
        for m in (16, 32, 64, 128, 256):
            mesh = UniformMesh(m)
            b = load_vector(mesh, v)
            c = l2_projection(mesh, v)
            M = assemble_mass(mesh)
            err2 = v.l2_norm() ** 2 - 2.0 * (c @ b) + c @ M.matvec(c)
            errs.append(math.sqrt(max(err2, 0.0)))
        rates = [math.log2(a / b) for a, b in zip(errs[:-1], errs[1:])]
        assert all(abs(r - 2.0) < 0.08 for r in rates)
        assert abs(np.mean(rates) - 2.0) < 0.05

    def test_orthogonality_residual(self):
        mesh = UniformMesh(16)
        v = step_half()
        c = l2_projection(mesh, v)
        # closed-form residual of the normal equations
        res = assemble_mass(mesh).matvec(c) - load_vector(mesh, v)
        assert np.max(np.abs(res)) <= 1e-12
        # and the oracle's reading of the same orthogonality
        vh = lambda x: pl_evaluate(mesh, c, x)
        for i in (1, 8, 15):
            diff = moment_oracle(mesh, vh, i) - moment_oracle(mesh, v, i,
                                                              extra_breakpoints=(0.5,))
            assert abs(diff) <= 5e-12


def form_rhs_closed(mesh, alpha):
    """A(v, hat_i) for v = x(x-1) via the integration-by-parts route."""
    x = mesh.nodes
    F = 2.0 * x ** (4.0 - alpha) / math.gamma(5.0 - alpha) \
        - x ** (3.0 - alpha) / math.gamma(4.0 - alpha)
    return (2.0 * F[1:mesh.m] - F[0:mesh.m - 1] - F[2:mesh.m + 1]) / mesh.h


def form_rhs_oracle(mesh, alpha):
    """Same functionals by quadrature of the defining half-order pairing."""
    a2 = alpha / 2.0

    def dleft_v(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = (math.gamma(3.0) / math.gamma(3.0 - a2) * x[pos] ** (2.0 - a2)
                    - math.gamma(2.0) / math.gamma(2.0 - a2) * x[pos] ** (1.0 - a2))
        return out if out.ndim else float(out)

    vals = np.empty(mesh.dim)
    for i in range(1, mesh.m):
        right = rl_halfderiv_hat(alpha, mesh, i, "right")
        vals[i - 1] = -inner_product(dleft_v, right, breakpoints=mesh.nodes[1:-1])
    return vals


class TestRitzProjection:
    def test_identity_on_discrete_space(self, rng):
        mesh = UniformMesh(8)
        c = rng.standard_normal(mesh.dim)
        proj = ritz_projection(mesh, 1.5, nodal(mesh, c))
        assert np.allclose(proj, c, rtol=1e-13, atol=1e-14)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_rhs_routes_agree(self, alpha):
        mesh = UniformMesh(8)
        assert form_rhs_closed(mesh, alpha) == pytest.approx(
            form_rhs_oracle(mesh, alpha), rel=1e-9, abs=1e-12)

    def test_galerkin_orthogonality_residual(self):
        mesh = UniformMesh(16)
        alpha = 1.5
        c = ritz_projection(mesh, alpha, smooth_quadratic())
        K = assemble_stiffness(mesh, alpha).dense()
        residual = K @ c - form_rhs_oracle(mesh, alpha)
        assert np.max(np.abs(residual)) <= 1e-7

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_energy_optimality_vs_interpolant(self, alpha):
        # A(v - Rh v, v - Rh v) <= A(v - pi_h v, v - pi_h v) + 1e-10
        mesh = UniformMesh(16)
        v = smooth_quadratic()
        K = assemble_stiffness(mesh, alpha).dense()
        r = form_rhs_closed(mesh, alpha)
        s = np.array([rl_lowderiv_hat(alpha, mesh, j).integrate_against_linear(
            0.0, 1.0, 2.0, -1.0) for j in range(1, mesh.m)])
        lowv = lambda x: (2.0 * x ** (3.0 - alpha) / math.gamma(4.0 - alpha)
                          - x ** (2.0 - alpha) / math.gamma(3.0 - alpha))
        a_vv = quad(lambda x: lowv(x) * (2.0 * x - 1.0), 0.0, 1.0,
                    epsabs=1e-14, epsrel=1e-13)[0]

        def energy_sq(c):
            return a_vv - c @ r - s @ c + c @ (K @ c)

        e_ritz = energy_sq(ritz_projection(mesh, alpha, v))
        e_interp = energy_sq(interpolant(mesh, v))
        assert e_ritz <= e_interp + 1e-10

    @pytest.mark.parametrize("datum", [step_half(), quarter_power()])
    def test_unsupported_data_rejected(self, datum):
        with pytest.raises(ValueError, match="unsupported"):
            ritz_projection(UniformMesh(8), 1.5, datum)


class TestInterpolant:
    def test_smooth_quadratic_m4(self):
        c = interpolant(UniformMesh(4), smooth_quadratic())
        assert c == pytest.approx([-3 / 16, -1 / 4, -3 / 16], abs=1e-16)

    def test_reproduces_piecewise_linear(self, rng):
        mesh = UniformMesh(8)
        c = rng.standard_normal(mesh.dim)
        again = interpolant(mesh, nodal(mesh, c))
        assert np.allclose(again, c, rtol=0, atol=1e-15)

    def test_quarter_power_m4(self):
        c = interpolant(UniformMesh(4), quarter_power())
        assert c == pytest.approx([0.25 ** 0.25, 0.5 ** 0.25, 0.75 ** 0.25], rel=1e-15)


class TestProlong:
    def test_roundtrip_by_sampling(self, rng):
        coarse, fine = UniformMesh(8), UniformMesh(32)
        c = rng.standard_normal(coarse.dim)
        f = prolong(coarse, fine, c)
        assert np.allclose(f[3::4], c, rtol=0, atol=1e-15)

    def test_l2_norm_preserved(self, rng):
        coarse, fine = UniformMesh(8), UniformMesh(64)
        c = rng.standard_normal(coarse.dim)
        f = prolong(coarse, fine, c)
        nc = c @ assemble_mass(coarse).matvec(c)
        nf = f @ assemble_mass(fine).matvec(f)
        assert nf == pytest.approx(nc, rel=1e-13)

    def test_commutes_with_interpolation_at_coarse_nodes(self):
        coarse, fine = UniformMesh(4), UniformMesh(8)
        v = smooth_quadratic()
        f = prolong(coarse, fine, interpolant(coarse, v))
        # shared nodes carry the datum's nodal values
        assert f[1::2] == pytest.approx(interpolant(coarse, v), abs=1e-16)

    def test_rejects_non_nested(self):
        with pytest.raises(ValueError, match="nested"):
            prolong(UniformMesh(8), UniformMesh(12), np.zeros(7))


class TestEnergyNorm:
    def test_symmetric_part_matches_classical_h1_seminorm(self, rng):
        # at alpha close to 2 the energy quadratic form is the H1 seminorm
        mesh = UniformMesh(32)
        S = symmetric_part(assemble_stiffness(mesh, 1.999999))
        e = rng.standard_normal(mesh.dim)
        frac = e @ S.matvec(e)
        classical = e @ (classical_stiffness(32) @ e)
        assert frac == pytest.approx(classical, rel=0.01)
