"""m-functions, Green kernels, resolvents, eigenvalues, and spectral measures.

A spectral problem is a coefficient matrix with a left boundary condition
and a right datum: either an explicit condition at the right endpoint
(regular problem) or the Hamiltonian's tail, whose gamma(z) annihilates
the square-integrable directions. In both cases

    m(z) = -(gamma u(b, z))^(-1) gamma v(b, z),

and f_m = v + u m satisfies the right datum; for definite problems m is
a matrix Herglotz function whose measure carries the spectral data.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BoundaryCondition,
    RANK_RTOL,
    antihermitian_part,
    hermitian_part,
)
from .evolve import (
    SampledFunction,
    antiderivative_matrix,
    boundary_frames,
    fundamental_solution,
    part_transfers,
    propagate_frames,
    weighted_gram,
)
from .hamiltonian import (
    Hamiltonian,
    ProjectionTail,
    is_definite,
    symplectic_form,
)

AT_EIGENVALUE_RTOL = 1e-12
SIGMA_ACCEPT = 1e-11
REFINE_MAX_ITERS = 200
DEDUP_RTOL = 1e-8


class AtEigenvalueError(ArithmeticError):
    """m requested at (numerically) an eigenvalue of the problem."""


class NotDefiniteError(ValueError):
    """Coefficient matrix has a common kernel direction; spectrum is degenerate."""


class RealZError(ValueError):
    """Half-line evaluation requires a non-real spectral parameter."""


class WindowTooSmallError(ValueError):
    """Truncation tail estimate exceeds the requested tolerance."""


class MissedRootRisk(UserWarning):
    """Scan grid is coarser than the local oscillation estimate."""


@dataclass(frozen=True)
class SpectralProblem:
    """Hamiltonian with a left condition and a right datum (condition or tail)."""

    ham: Hamiltonian
    alpha: BoundaryCondition
    beta: BoundaryCondition | None = None

    def __post_init__(self):
        if self.alpha.order != self.ham.order:
            raise ValueError("left condition order mismatch")
        if self.beta is not None and self.beta.order != self.ham.order:
            raise ValueError("right condition order mismatch")
        if self.beta is None and self.ham.tail is None:
            raise ValueError("a right condition or a tail is required")

    @property
    def n(self) -> int:
        return self.ham.n

    def gamma_constant(self) -> np.ndarray | None:
        """The z-independent right annihilator, when one exists."""
        if self.beta is not None:
            return np.asarray(self.beta.matrix, dtype=complex)
        if isinstance(self.ham.tail, ProjectionTail):
            return np.asarray(self.ham.tail.beta.matrix, dtype=complex)
        return None

    def gamma(self, z: complex) -> np.ndarray:
        const = self.gamma_constant()
        if const is not None:
            return const
        if complex(z).imag == 0.0:
            raise RealZError("tail dichotomy requires Im z != 0")
        return self.ham.tail.gamma(complex(z))

    def reduced_regular(self) -> "SpectralProblem":
        """The equivalent regular problem, when the right datum is constant."""
        if self.beta is not None:
            return self
        if isinstance(self.ham.tail, ProjectionTail):
            ham = Hamiltonian(self.ham.order, self.ham.segments, None)
            return SpectralProblem(ham, self.alpha, self.ham.tail.beta)
        raise ValueError("problem with a non-projection tail has no regular reduction")


def _m_from_frame(frame: np.ndarray, gamma: np.ndarray, z) -> np.ndarray:
    n = gamma.shape[0]
    gw = gamma @ frame
    gu = gw[:, :n]
    gv = gw[:, n:]
    sigma = np.linalg.svd(gu, compute_uv=False)
    # scale against the whole boundary frame: at an eigenvalue gu itself
    # collapses while gv stays order one
    scale = np.linalg.svd(gw, compute_uv=False)[0]
    if sigma[-1] <= AT_EIGENVALUE_RTOL * scale:
        raise AtEigenvalueError(f"gamma u(b, z) numerically singular at z = {z}")
    return -np.linalg.solve(gu, gv)


class MFunction:
    """Evaluator z -> m(z) for a spectral problem."""

    def __init__(self, problem: SpectralProblem):
        self.problem = problem

    def __call__(self, z: complex) -> np.ndarray:
        frame = boundary_frames(self.problem.ham, self.problem.alpha, [z])[0]
        return _m_from_frame(frame, self.problem.gamma(z), z)

    def many(self, zs, on_eigenvalue: str = "raise") -> np.ndarray:
        """m on a batch of points; shape (nz, n, n).

        ``on_eigenvalue='nan'`` fills failed points instead of raising.
        """
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        frames = boundary_frames(self.problem.ham, self.problem.alpha, zs)
        out = np.empty((zs.size, self.problem.n, self.problem.n), dtype=complex)
        for i, z in enumerate(zs):
            try:
                out[i] = _m_from_frame(frames[i], self.problem.gamma(z), z)
            except AtEigenvalueError:
                if on_eigenvalue == "raise":
                    raise
                out[i] = np.nan
        return out


def m_regular(ham: Hamiltonian, alpha, beta, z: complex) -> np.ndarray:
    """m(z) = -(beta u(b, z))^(-1) beta v(b, z) for a regular problem."""
    return MFunction(SpectralProblem(ham, alpha, beta))(z)


def m_halfline(ham: Hamiltonian, alpha, z: complex) -> np.ndarray:
    """m(z) of a half-line problem, via the tail's L^2 annihilator.

    Projection tails reduce to the regular problem on the finite part;
    constant definite tails use the decaying invariant subspace of
    z J H_inf, whose columns make f_m = v + u m square integrable.
    """
    return MFunction(SpectralProblem(ham, alpha, None))(z)


# ---------------------------------------------------------------------------
# Green kernel and resolvent


class GreenKernel:
    """Resolvent kernel built from u (left condition) and f_m (right datum)."""

    def __init__(self, problem: SpectralProblem, z: complex):
        z = complex(z)
        if z.imag == 0.0:
            raise RealZError("Green kernel requires Im z != 0")
        self.problem = problem
        self.z = z
        self.sol = fundamental_solution(problem.ham, problem.alpha, z)
        self.sol_bar = fundamental_solution(problem.ham, problem.alpha, np.conj(z))
        self.m = _m_from_frame(self.sol.frames[-1], problem.gamma(z), z)
        self.m_bar = _m_from_frame(
            self.sol_bar.frames[-1], problem.gamma(np.conj(z)), np.conj(z)
        )

    def _fm_stack(self, conjugate: bool) -> np.ndarray:
        m = self.m_bar if conjugate else self.m
        n = self.problem.n
        return np.vstack([m, np.eye(n, dtype=complex)])

    def u_at(self, x: float, conjugate: bool = False) -> np.ndarray:
        sol = self.sol_bar if conjugate else self.sol
        return sol.at(x)[:, : self.problem.n]

    def fm_at(self, x: float, conjugate: bool = False) -> np.ndarray:
        sol = self.sol_bar if conjugate else self.sol
        return sol.at(x) @ self._fm_stack(conjugate)

    def value(self, x: float, y: float) -> np.ndarray:
        if x <= y:
            return self.u_at(x) @ self.fm_at(y, conjugate=True).conj().T
        return self.fm_at(x) @ self.u_at(y, conjugate=True).conj().T


def green(ham: Hamiltonian, alpha, right, z: complex, x: float, y: float) -> np.ndarray:
    """G(x, y, z), the kernel of the resolvent at z.

    ``right`` is a BoundaryCondition for regular problems or None to use
    the Hamiltonian's tail.
    """
    return GreenKernel(SpectralProblem(ham, alpha, right), z).value(x, y)


def _segment_runs(seg_of_node: np.ndarray) -> list[tuple[int, slice]]:
    runs = []
    start = 0
    for i in range(1, seg_of_node.size + 1):
        if i == seg_of_node.size or seg_of_node[i] != seg_of_node[start]:
            runs.append((int(seg_of_node[start]), slice(start, i)))
            start = i
    return runs


def apply_resolvent(problem: SpectralProblem, z: complex, h: SampledFunction) -> SampledFunction:
    """g = (S - z)^(-1) h on the nodes of h.

    Evaluates g(x) = f_m(x,z) I1(x) + u(x,z) I2(x) with
    I1(x) = int_a^x u(y, zbar)* H h dy and I2(x) = int_x^b f_m(y, zbar)* H h dy,
    using a spectral antiderivative of the per-segment interpolants.
    """
    kern = GreenKernel(problem, z)
    ham = problem.ham
    n = problem.n
    hv = h.h_values()
    hh = np.einsum("sij,sj->si", hv, h.values)
    runs = _segment_runs(h.seg_of_node)
    anti_cache: dict[int, np.ndarray] = {}

    prefix1 = np.empty((h.nodes.size, n), dtype=complex)
    prefix2 = np.empty((h.nodes.size, n), dtype=complex)
    u_here = np.empty((h.nodes.size, ham.order, n), dtype=complex)
    fm_here = np.empty((h.nodes.size, ham.order, n), dtype=complex)
    total1 = np.zeros(n, dtype=complex)
    total2 = np.zeros(n, dtype=complex)
    fm_stack = np.vstack([kern.m, np.eye(n)])
    fm_stack_bar = np.vstack([kern.m_bar, np.eye(n)])
    breaks = ham.breakpoints
    for k, sl in runs:
        offs = h.nodes[sl] - breaks[k]
        count = offs.size
        if count not in anti_cache:
            anti_cache[count] = antiderivative_matrix(count)
        phi = part_transfers(ham.segments[k].part, [z, np.conj(z)], offs)
        w_z = phi[0] @ kern.sol.frames[k]
        w_zb = phi[1] @ kern.sol_bar.frames[k]
        u_here[sl] = w_z[:, :, :n]
        fm_here[sl] = w_z @ fm_stack
        integrand1 = np.einsum("sji,sj->si", (w_zb[:, :, :n]).conj(), hh[sl])
        integrand2 = np.einsum("sji,sj->si", (w_zb @ fm_stack_bar).conj(), hh[sl])
        half = 0.5 * (breaks[k + 1] - breaks[k])
        anti = anti_cache[count]
        prefix1[sl] = total1 + half * (anti @ integrand1)
        prefix2[sl] = total2 + half * (anti @ integrand2)
        total1 = total1 + np.einsum("s,si->i", h.weights[sl], integrand1)
        total2 = total2 + np.einsum("s,si->i", h.weights[sl], integrand2)
    i2 = total2[None, :] - prefix2
    g_vals = np.einsum("sij,sj->si", fm_here, prefix1) + np.einsum(
        "sij,sj->si", u_here, i2
    )
    return SampledFunction(ham, h.nodes, h.weights, g_vals, h.seg_of_node)


def resolvent_residual(problem: SpectralProblem, z: complex, h: SampledFunction, g: SampledFunction) -> float:
    """Relative defect of J g' = -z H g - H h in weak form between nodes.

    Compares increments of g against the spectral antiderivative of
    J^(-1)(-z H g - H h) = J(z H g + H h) on each segment.
    """
    ham = problem.ham
    j = symplectic_form(problem.n)
    hv = h.h_values()
    rhs = (z * np.einsum("sij,sj->si", hv, g.values) + np.einsum("sij,sj->si", hv, h.values)) @ j.T
    runs = _segment_runs(h.seg_of_node)
    breaks = ham.breakpoints
    worst = 0.0
    scale = max(float(np.max(np.abs(g.values))), 1e-300)
    for k, sl in runs:
        count = sl.stop - sl.start
        anti = antiderivative_matrix(count)
        half = 0.5 * (breaks[k + 1] - breaks[k])
        anti_rhs = half * (anti @ rhs[sl])
        dg = g.values[sl][1:] - g.values[sl][:-1]
        drhs = anti_rhs[1:] - anti_rhs[:-1]
        defect = np.max(np.abs(dg - drhs)) if dg.size else 0.0
        worst = max(worst, defect / scale)
    return worst


# ---------------------------------------------------------------------------
# eigenvalues and spectral decomposition


@dataclass(frozen=True)
class SpectralDecomposition:
    """Discrete spectral data on a window: atoms, multiplicities, weights."""

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    coefficients: tuple
    weights: tuple
    window: tuple

    def __len__(self) -> int:
        return self.eigenvalues.size

    def atoms(self):
        return list(zip(self.eigenvalues.tolist(), self.weights))


def trace_mass(ham: Hamiltonian) -> float:
    """int tr H over the finite part (rotation-number scale)."""
    total = 0.0
    base_x, base_w = np.polynomial.legendre.leggauss(20)
    for seg in ham.segments:
        from .hamiltonian import ConstantMatrix

        if isinstance(seg.part, ConstantMatrix):
            total += seg.length * float(np.real(np.trace(seg.part.matrix)))
        else:
            offs = 0.5 * seg.length * (base_x + 1.0)
            vals = [float(np.real(np.trace(seg.part.value(o)))) for o in offs]
            total += 0.5 * seg.length * float(np.dot(base_w, vals))
    return total


def recommended_scan_points(ham: Hamiltonian, window) -> int:
    density = trace_mass(ham) / np.pi
    return max(1000, int(np.ceil(40.0 * (window[1] - window[0]) * density)))


def _sigma_min_batch(ham, alpha, gamma, ts) -> np.ndarray:
    frames = boundary_frames(ham, alpha, np.asarray(ts, dtype=complex))
    gu = np.einsum("ij,zjk->zik", gamma, frames[:, :, : ham.n])
    return np.linalg.svd(gu, compute_uv=False)[:, -1]


_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_refine(f_batch, lo, hi, max_iters=REFINE_MAX_ITERS):
    """Lockstep golden-section minimization of a batched scalar function."""
    lo = lo.copy()
    hi = hi.copy()
    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1 = f_batch(x1)
    f2 = f_batch(x2)
    for _ in range(max_iters):
        width = hi - lo
        if np.all(width <= 1e-13 * np.maximum(1.0, np.abs(lo))):
            break
        move_right = f1 > f2
        lo = np.where(move_right, x1, lo)
        hi = np.where(move_right, hi, x2)
        new_x1 = np.where(move_right, x2, hi - _INV_GOLDEN * (hi - lo))
        new_x2 = np.where(move_right, lo + _INV_GOLDEN * (hi - lo), x1)
        f_new = f_batch(np.where(move_right, new_x2, new_x1))
        f1, f2 = np.where(move_right, f2, f_new), np.where(move_right, f_new, f1)
        x1, x2 = new_x1, new_x2
    mid = 0.5 * (lo + hi)
    return mid, f_batch(mid)


def eigenvalues_in_window(
    problem: SpectralProblem,
    window,
    scan_points: int | None = None,
    quad_order: int = 40,
) -> SpectralDecomposition:
    """Locate the discrete spectrum in a window and its spectral weights.

    Scans sigma_min(gamma u(b, t)) on a density-matched grid, refines each
    bracketed dip by golden section, reads multiplicities off the numerical
    nullity, and Gram-orthonormalizes kernel vectors in the H-weighted
    inner product so that rho({t_j}) = sum_k c_jk c_jk*.
    """
    reduced = problem.reduced_regular()
    ham, alpha = reduced.ham, reduced.alpha
    gamma = reduced.gamma_constant()
    if not is_definite(ham):
        raise NotDefiniteError(
            "coefficient matrix has a common kernel; the degenerate case "
            "reduces to finite-dimensional linear algebra and is detected "
            "but not solved here"
        )
    lo, hi = float(window[0]), float(window[1])
    if hi <= lo:
        raise ValueError("window must have positive length")
    recommended = recommended_scan_points(ham, (lo, hi))
    npts = scan_points or recommended
    if npts < recommended:
        warnings.warn(
            f"scan grid ({npts}) coarser than oscillation estimate ({recommended})",
            MissedRootRisk,
        )
    grid = np.linspace(lo, hi, npts)
    sig = _sigma_min_batch(ham, alpha, gamma, grid)

    interior = np.where((sig[1:-1] <= sig[:-2]) & (sig[1:-1] <= sig[2:]))[0] + 1
    brackets = [(grid[i - 1], grid[i + 1]) for i in interior]
    if sig[0] < sig[1]:
        brackets.insert(0, (grid[0], grid[1]))
    if sig[-1] < sig[-2]:
        brackets.append((grid[-2], grid[-1]))
    if not brackets:
        return SpectralDecomposition(np.empty(0), np.empty(0, dtype=int), (), (), (lo, hi))

    blo = np.array([b[0] for b in brackets])
    bhi = np.array([b[1] for b in brackets])
    f_batch = lambda ts: _sigma_min_batch(ham, alpha, gamma, ts)
    roots, residuals = _golden_refine(f_batch, blo, bhi)

    scale_sigma = max(1.0, float(np.max(sig)))
    order_idx = np.argsort(roots)
    accepted: list[float] = []
    for i in order_idx:
        if residuals[i] > SIGMA_ACCEPT * scale_sigma:
            continue
        t = float(roots[i])
        if accepted and abs(t - accepted[-1]) <= DEDUP_RTOL * max(1.0, abs(t)):
            continue
        accepted.append(t)

    eigvals, mults, coeffs, weights = [], [], [], []
    for t in accepted:
        sol = fundamental_solution(ham, alpha, t)
        gu = gamma @ sol.frames[-1][:, : ham.n]
        # nullity relative to the scan scale: at an eigenvalue gu itself is
        # nearly zero, so its own sigma_max is no reference
        _, svals, vh = np.linalg.svd(gu)
        kern = [vh[i].conj() for i in range(vh.shape[0]) if svals[i] < RANK_RTOL * scale_sigma]
        if not kern:
            continue
        c_raw = np.stack(kern, axis=1)
        gram_full = weighted_gram(ham, sol, sol)[: ham.n, : ham.n]
        gram_sub = c_raw.conj().T @ gram_full @ c_raw
        chol = np.linalg.cholesky(0.5 * (gram_sub + gram_sub.conj().T))
        c_orth = c_raw @ np.linalg.inv(chol).conj().T
        eigvals.append(t)
        mults.append(c_orth.shape[1])
        coeffs.append(c_orth)
        weights.append(c_orth @ c_orth.conj().T)
    return SpectralDecomposition(
        np.array(eigvals),
        np.array(mults, dtype=int),
        tuple(coeffs),
        tuple(weights),
        (lo, hi),
    )


# ---------------------------------------------------------------------------
# eigenfunction transform and measures


def transform_U(problem: SpectralProblem, h: SampledFunction, ts) -> np.ndarray:
    """(Uh)(t) = int u(x, t)* H(x) h(x) dx on a batch of real t; shape (nt, n)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=complex))
    ham = problem.ham
    frames = propagate_frames(ham, problem.alpha, ts)
    hv = h.h_values()
    hh = np.einsum("sij,sj->si", hv, h.values)
    out = np.zeros((ts.size, problem.n), dtype=complex)
    breaks = ham.breakpoints
    for k, sl in _segment_runs(h.seg_of_node):
        offs = h.nodes[sl] - breaks[k]
        phi = part_transfers(ham.segments[k].part, ts, offs)
        w = phi @ frames[:, None, k]
        u = w[:, :, :, : problem.n]
        out += np.einsum("s,zsji,sj->zi", h.weights[sl], u.conj(), hh[sl], optimize=True)
    return out


@dataclass(frozen=True)
class HerglotzData:
    """Constituents of m(z) = A + Bz + int (1/(t-z) - t/(t^2+1)) drho(t)."""

    a: np.ndarray
    b: np.ndarray
    atoms: tuple
    window: tuple
    tail_estimate: np.ndarray

    @property
    def tail_bound(self) -> float:
        return float(np.real(np.trace(self.tail_estimate)))


def herglotz_decompose(
    m: MFunction,
    decomposition: SpectralDecomposition,
    window,
    tail_tol: float | None = None,
) -> HerglotzData:
    """Split m into A + Bz + discrete measure over the window.

    A = Re m(i) exactly (at z = i the integrand reduces to i/(t^2+1));
    B = Im m(i) - sum rho_j/(1+t_j^2) with the out-of-window remainder
    estimated from the outermost half-window band, whose 1/t^2-weighted
    mass matches the tail's under a locally uniform measure.
    """
    mi = m(1j)
    a = hermitian_part(mi)
    im = antihermitian_part(mi)
    n = a.shape[0]
    s_window = np.zeros((n, n), dtype=complex)
    band = np.zeros((n, n), dtype=complex)
    r_out = max(abs(window[0]), abs(window[1]))
    for t, rho in zip(decomposition.eigenvalues, decomposition.weights):
        contrib = rho / (1.0 + t * t)
        s_window += contrib
        if abs(t) > 0.5 * r_out:
            band += contrib
    b = im - s_window - band
    if tail_tol is not None and float(np.real(np.trace(band))) > tail_tol:
        raise WindowTooSmallError(
            f"truncation tail estimate {np.real(np.trace(band)):.3e} exceeds {tail_tol:.3e}"
        )
    return HerglotzData(
        a,
        b,
        tuple(zip(decomposition.eigenvalues.tolist(), decomposition.weights)),
        (float(window[0]), float(window[1])),
        band,
    )


def stieltjes_inversion(m: MFunction, interval, y: float) -> np.ndarray:
    """(1/pi) int Im m(t + iy) dt over the interval.

    Converges to rho((t1, t2)) plus half the boundary atoms as y -> 0+.
    """
    import scipy.integrate

    t1, t2 = float(interval[0]), float(interval[1])
    if t2 <= t1:
        return np.zeros((m.problem.n, m.problem.n), dtype=complex)
    if y <= 0:
        raise ValueError("y must be positive")

    def integrand(t):
        return antihermitian_part(m(t + 1j * y))

    val, _ = scipy.integrate.quad_vec(
        integrand, t1, t2, epsabs=1e-12, epsrel=1e-10, limit=400
    )
    return val / np.pi


def atom_weight_from_m(m: MFunction, t: float, ys=(1e-4, 1e-5, 1e-6)) -> np.ndarray:
    """rho({t}) as the y -> 0+ extrapolation of -iy m(t + iy).

    Fits the entrywise polynomial in y through the sampled values and
    returns the constant term; a second route to the eigenvector weights.
    """
    ys = np.asarray(ys, dtype=float)
    vals = np.stack([-1j * y * m(t + 1j * y) for y in ys])
    flat = vals.reshape(ys.size, -1)
    coeffs = np.polynomial.polynomial.polyfit(ys, flat, deg=ys.size - 1)
    return coeffs[0].reshape(vals.shape[1:])
