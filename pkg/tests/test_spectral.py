import numpy as np
import pytest

from _gen import random_boundary, random_regular_ham
from canograph.algebra import validate_boundary
from canograph.evolve import SampledFunction, sample_function, sample_solution_column
from canograph.hamiltonian import (
    ConstantTail,
    Hamiltonian,
    ProjectionTail,
    constant_hamiltonian,
    symplectic_form,
)
from canograph.spectral import (
    AtEigenvalueError,
    GreenKernel,
    MFunction,
    MissedRootRisk,
    NotDefiniteError,
    RealZError,
    SpectralProblem,
    apply_resolvent,
    atom_weight_from_m,
    eigenvalues_in_window,
    herglotz_decompose,
    m_halfline,
    m_regular,
    resolvent_residual,
    stieltjes_inversion,
    transform_U,
)

ALPHA = validate_boundary([[0, 1]])
BETA = validate_boundary([[0, 1]])
HAM_I2 = constant_hamiltonian(np.eye(2), 1.0)
MODEL = SpectralProblem(HAM_I2, ALPHA, BETA)


class TestMRegular:
    def test_coth_value(self):
        m = m_regular(HAM_I2, ALPHA, BETA, 1j)
        assert abs(m[0, 0] - 1j / np.tanh(1.0)) < 1e-12

    def test_conjugate(self):
        m = MFunction(MODEL)
        assert abs(m(-1j)[0, 0] - np.conj(m(1j)[0, 0])) < 1e-12

    def test_at_eigenvalue(self):
        with pytest.raises(AtEigenvalueError):
            m_regular(HAM_I2, ALPHA, BETA, np.pi)

    def test_cot_oracle(self):
        rng = np.random.default_rng(0)
        zs = rng.uniform(-8, 8, 50) + 1j * rng.uniform(0.05, 3.0, 50)
        vals = MFunction(MODEL).many(zs)[:, 0, 0]
        assert np.max(np.abs(vals + np.cos(zs) / np.sin(zs))) <= 1e-10


class TestMHalfline:
    HALF = constant_hamiltonian(np.eye(2), 0.5, tail=ConstantTail(np.eye(2)))

    def test_constant_i(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            z = complex(rng.uniform(-4, 4), rng.uniform(0.1, 3))
            assert abs(m_halfline(self.HALF, ALPHA, z)[0, 0] - 1j) < 1e-10

    def test_lower_half_plane(self):
        assert abs(m_halfline(self.HALF, ALPHA, -1j)[0, 0] + 1j) < 1e-10

    def test_real_z_rejected(self):
        with pytest.raises(RealZError):
            m_halfline(self.HALF, ALPHA, 2.0)

    def test_projection_tail_matches_regular(self):
        rng = np.random.default_rng(7)
        ham = random_regular_ham(rng, 2)
        alpha = random_boundary(rng, 1)
        beta = random_boundary(rng, 1)
        tailed = Hamiltonian(2, ham.segments, ProjectionTail(beta))
        for z in (1j, 0.7 + 0.2j, -1.5 - 0.8j):
            direct = m_regular(ham, alpha, beta, z)
            viatail = m_halfline(tailed, alpha, z)
            assert np.linalg.norm(direct - viatail) <= 1e-12


class TestGreen:
    def test_jump_identity(self):
        kern = GreenKernel(MODEL, 1j)
        j = symplectic_form(1)
        for x in np.linspace(0, 1, 20):
            lhs = (
                kern.fm_at(x) @ kern.u_at(x, conjugate=True).conj().T
                - kern.u_at(x) @ kern.fm_at(x, conjugate=True).conj().T
            )
            assert np.linalg.norm(lhs - j) <= 1e-9

    def test_hermitian_symmetry(self):
        # off the diagonal only: the kernel jumps by J across x = y
        kern = GreenKernel(MODEL, 0.5 + 1j)
        kern_bar = GreenKernel(MODEL, 0.5 - 1j)
        for x, y in [(0.2, 0.8), (0.9, 0.15), (0.45, 0.55)]:
            assert np.linalg.norm(kern.value(x, y).conj().T - kern_bar.value(y, x)) <= 1e-12

    def test_halfline_closed_form(self):
        # H = I2, alpha = (0 1): m = i, f_m(x, z) = i exp(izx) (1, -i)^t,
        # so G(x, y, z) = exp(izy) u(x) (i, 1) for x <= y; y may sit on the
        # constant tail
        half = constant_hamiltonian(np.eye(2), 1.5, tail=ConstantTail(np.eye(2)))
        prob = SpectralProblem(half, ALPHA, None)
        z = 0.8 + 0.6j
        kern = GreenKernel(prob, z)
        for x, y in [(0.2, 0.9), (1.0, 1.3), (0.5, 2.4), (1.2, 3.0)]:
            ux = np.array([np.cos(z * x), np.sin(z * x)])
            expect = np.exp(1j * z * y) * np.outer(ux, [1j, 1.0])
            assert np.linalg.norm(kern.value(x, y) - expect) <= 1e-11, (x, y)

    def test_halfline_resolvent_residual(self):
        half = constant_hamiltonian(np.eye(2), 1.5, tail=ConstantTail(np.eye(2)))
        prob = SpectralProblem(half, ALPHA, None)
        h = sample_function(
            half,
            lambda x: np.sin(np.pi * x / 1.5) ** 2 * np.array([1.0, 0.5 - 0.2j]),
            order=48,
        )
        z = -0.4 + 1.2j
        g = apply_resolvent(prob, z, h)
        assert resolvent_residual(prob, z, h, g) <= 1e-10

    def test_eigenfunction_series_oracle(self):
        kern = GreenKernel(MODEL, 1j)
        series = np.zeros((2, 2), dtype=complex)
        kmax = int(200 * np.pi / np.pi)
        for k in range(-kmax, kmax + 1):
            t = k * np.pi
            ux = np.array([np.cos(t * 0.0), np.sin(t * 0.0)])
            uy = np.array([np.cos(t * 1.0), np.sin(t * 1.0)])
            series += np.outer(ux, uy.conj()) / (t - 1j)
        assert np.linalg.norm(series - kern.value(0.0, 1.0)) <= 1e-3


class TestResolvent:
    def test_zero_input(self):
        h = sample_function(HAM_I2, lambda x: np.zeros(2), order=24)
        g = apply_resolvent(MODEL, 1j, h)
        assert np.max(np.abs(g.values)) <= 1e-14

    def test_eigenfunction(self):
        dec = eigenvalues_in_window(MODEL, (-1.0, 10.0))
        t1 = dec.eigenvalues[1]
        phi = sample_solution_column(HAM_I2, ALPHA, t1, dec.coefficients[1][:, 0], order=48)
        g = apply_resolvent(MODEL, 1j, phi)
        assert np.max(np.abs(g.values - phi.values / (t1 - 1j))) <= 1e-8

    def test_first_resolvent_identity(self):
        h = sample_function(
            HAM_I2, lambda x: np.array([np.sin(2 * x) + 0.3, np.cos(x) - 0.5j * x]), order=48
        )
        z1, z2 = 1j, 0.4 + 2j
        r1 = apply_resolvent(MODEL, z1, h)
        r2 = apply_resolvent(MODEL, z2, h)
        nested = apply_resolvent(MODEL, z1, r2)
        diff = SampledFunction(
            HAM_I2, h.nodes, h.weights, (r1.values - r2.values) - (z1 - z2) * nested.values, h.seg_of_node
        )
        assert np.sqrt(diff.norm_sq()) <= 1e-7

    def test_weak_residual(self):
        rng = np.random.default_rng(21)
        ham = random_regular_ham(rng, 4)
        alpha = random_boundary(rng, 2)
        beta = random_boundary(rng, 2)
        prob = SpectralProblem(ham, alpha, beta)
        h = sample_function(
            ham, lambda x: np.array([np.sin(3 * x), 1.0, np.exp(-x), x * x]), order=48
        )
        g = apply_resolvent(prob, 0.3 + 1.1j, h)
        assert resolvent_residual(prob, 0.3 + 1.1j, h, g) <= 1e-8


class TestEigenvalues:
    def test_model_problem(self):
        dec = eigenvalues_in_window(MODEL, (-1.0, 10.0))
        expect = np.array([0.0, np.pi, 2 * np.pi, 3 * np.pi])
        assert np.max(np.abs(dec.eigenvalues - expect)) <= 1e-11
        assert dec.multiplicities.tolist() == [1, 1, 1, 1]
        for rho in dec.weights:
            assert abs(rho[0, 0] - 1.0) <= 1e-10

    def test_subwindow(self):
        dec = eigenvalues_in_window(MODEL, (0.5, 4.0))
        assert len(dec) == 1 and abs(dec.eigenvalues[0] - np.pi) <= 1e-11

    def test_empty_window(self):
        dec = eigenvalues_in_window(MODEL, (0.5, 3.0))
        assert len(dec) == 0

    def test_degenerate_block_system(self):
        a4 = validate_boundary([[0, 0, 1, 0], [0, 0, 0, 1]])
        ham4 = constant_hamiltonian(np.eye(4), 1.0)
        dec = eigenvalues_in_window(SpectralProblem(ham4, a4, a4), (-1.0, 7.0))
        assert dec.multiplicities.tolist() == [2, 2, 2]
        assert np.allclose(dec.weights[1], np.eye(2), atol=1e-10)

    def test_not_definite(self):
        ham = constant_hamiltonian(np.diag([0.0, 1.0]), 1.0)
        with pytest.raises(NotDefiniteError):
            eigenvalues_in_window(SpectralProblem(ham, ALPHA, BETA), (0.0, 5.0))

    def test_missed_root_warning(self):
        with pytest.warns(MissedRootRisk):
            eigenvalues_in_window(MODEL, (-1.0, 10.0), scan_points=50)

    def test_projection_tail_reduction(self):
        tailed = Hamiltonian(2, HAM_I2.segments, ProjectionTail(BETA))
        dec = eigenvalues_in_window(SpectralProblem(tailed, ALPHA, None), (-1.0, 7.0))
        assert np.max(np.abs(dec.eigenvalues - np.array([0, np.pi, 2 * np.pi]))) <= 1e-11


class TestTransform:
    def setup_method(self):
        self.dec = eigenvalues_in_window(MODEL, (-1.0, 13.0))

    def test_cross_orthogonality(self):
        j = 2
        phi = sample_solution_column(
            HAM_I2, ALPHA, self.dec.eigenvalues[j], self.dec.coefficients[j][:, 0], order=48
        )
        ut = transform_U(MODEL, phi, self.dec.eigenvalues)
        for l in range(len(self.dec)):
            val = np.linalg.norm(self.dec.weights[l] @ ut[l])
            if l == j:
                assert abs(val - 1.0) <= 1e-8
            else:
                assert val <= 1e-8

    def test_parseval_on_truncated_sum(self):
        coeffs = [0.6, -0.3, 0.45, 0.2]
        vals = None
        phi = None
        for j, c in enumerate(coeffs):
            sj = sample_solution_column(
                HAM_I2, ALPHA, self.dec.eigenvalues[j], self.dec.coefficients[j][:, 0], order=48
            )
            vals = c * sj.values if vals is None else vals + c * sj.values
            phi = sj
        h = SampledFunction(HAM_I2, phi.nodes, phi.weights, vals, phi.seg_of_node)
        ut = transform_U(MODEL, h, self.dec.eigenvalues)
        parseval = sum(
            float(np.real(ut[l].conj() @ self.dec.weights[l] @ ut[l])) for l in range(len(self.dec))
        )
        assert abs(parseval - h.norm_sq()) <= 1e-6


class TestHerglotzAndMeasures:
    def test_atom_mass_equals_residue(self):
        dec = eigenvalues_in_window(MODEL, (-1.0, 10.0))
        # -cot z has residue -1 at pi, so the Herglotz atom mass is 1
        assert abs(dec.weights[1][0, 0] - 1.0) <= 1e-10

    def test_weight_cross_check(self):
        m = MFunction(MODEL)
        dec = eigenvalues_in_window(MODEL, (-1.0, 10.0))
        for t, rho in zip(dec.eigenvalues, dec.weights):
            est = atom_weight_from_m(m, float(t))
            assert np.linalg.norm(est - rho) <= 1e-6

    def test_decompose_model(self):
        span = 40 * np.pi
        dec = eigenvalues_in_window(MODEL, (-span, span))
        data = herglotz_decompose(MFunction(MODEL), dec, (-span, span))
        assert np.linalg.norm(data.a) <= 1e-9
        assert np.linalg.norm(data.b) <= 1e-3
        assert data.tail_bound >= 0.0

    def test_window_too_small(self):
        from canograph.spectral import WindowTooSmallError

        span = 10 * np.pi
        dec = eigenvalues_in_window(MODEL, (-span, span))
        with pytest.raises(WindowTooSmallError):
            herglotz_decompose(MFunction(MODEL), dec, (-span, span), tail_tol=1e-9)

    def test_herglotz_positivity_samples(self):
        rng = np.random.default_rng(3)
        ham = random_regular_ham(rng, 4)
        m = MFunction(SpectralProblem(ham, random_boundary(rng, 2), random_boundary(rng, 2)))
        zs = rng.uniform(-5, 5, 50) + 1j * rng.uniform(0.05, 2.0, 50)
        vals = m.many(zs)
        for v in vals:
            lam = np.linalg.eigvalsh((v - v.conj().T) / 2j)
            assert lam[0] > -1e-12

    def test_stieltjes_constant_density(self):
        half = constant_hamiltonian(np.eye(2), 0.5, tail=ConstantTail(np.eye(2)))
        m = MFunction(SpectralProblem(half, ALPHA, None))
        val = stieltjes_inversion(m, (0.0, 1.0), 1e-3)
        assert abs(val[0, 0] - 1.0 / np.pi) <= 1e-8

    def test_stieltjes_empty_interval(self):
        m = MFunction(MODEL)
        assert np.allclose(stieltjes_inversion(m, (2.0, 2.0), 1e-4), 0.0)

    def test_stieltjes_atom(self):
        m = MFunction(MODEL)
        val = stieltjes_inversion(m, (3.0, 4.0), 1e-4)
        assert abs(val[0, 0] - 1.0) <= 2e-3

    def test_summability_trend(self):
        # the resolvent is Hilbert-Schmidt, so sum 1/(1+t_j^2) converges:
        # partial sums over growing windows increase with decaying increments
        spans = [5 * np.pi, 10 * np.pi, 20 * np.pi, 40 * np.pi]
        sums = []
        for span in spans:
            dec = eigenvalues_in_window(MODEL, (-span - 0.5, span + 0.5))
            sums.append(sum(float(np.real(np.trace(w))) / (1 + t * t)
                            for t, w in zip(dec.eigenvalues, dec.weights)))
        increments = np.diff(sums)
        assert np.all(increments > 0)
        assert np.all(np.diff(increments) < 0)
        # the full sum is coth(1) by the cotangent partial fractions
        assert abs(sums[-1] - 1 / np.tanh(1.0)) < 1e-2
