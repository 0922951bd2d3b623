"""Exact propagation of the fundamental solution W(x, z) = (u v).

The flow of Ju' = -zHu is u' = z J H u (J^-1 = -J), so a constant
segment transfers by exp(z J H0 delta); Schrodinger-induced segments
transfer by the zero-energy-frame conjugation of the closed-form
(y', y) propagator. Weighted Gram integrals f* H g are evaluated by
per-segment Gauss-Legendre quadrature with order doubling.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .algebra import BoundaryCondition
from .hamiltonian import (
    ConstantMatrix,
    Hamiltonian,
    OutOfDomainError,
    PermutedBlocks,
    ProjectionTail,
    ConstantTail,
    SchrodingerInduced,
    Segment,
    reflection_signs,
    symplectic_form,
)

QUAD_BASE_ORDER = 20
QUAD_REL_TOL = 1e-12
QUAD_MAX_DOUBLINGS = 5


class NoConvergenceError(ArithmeticError):
    """Quadrature failed to stabilize after the allowed order doublings."""


def initial_frame(alpha: BoundaryCondition) -> np.ndarray:
    """W(a, z) = (-J alpha*, alpha*); the u columns satisfy alpha u(a) = 0."""
    j = symplectic_form(alpha.n)
    astar = alpha.matrix.conj().T
    return np.hstack([-j @ astar, astar])


def part_transfers(part, zs, deltas) -> np.ndarray:
    """Transfer matrices Phi(delta; z) of one segment payload.

    Returns shape (nz, nd, m, m) with u(x0 + delta) = Phi u(x0) for all
    solutions of Ju' = -zHu on the segment.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if isinstance(part, ConstantMatrix):
        gen = symplectic_form(part.order // 2) @ part.matrix
        coef = np.multiply.outer(zs, deltas).ravel()
        flat = _kernels.const_transfers(gen, coef)
        return flat.reshape(zs.size, deltas.size, part.order, part.order)
    if isinstance(part, SchrodingerInduced):
        steps = part.step_sign * part.scale * deltas
        core = _kernels.schrodinger_core(part.v0, steps, zs)
        t0 = part.t0
        t0inv = np.array([[t0[1, 1], -t0[0, 1]], [-t0[1, 0], t0[0, 0]]])
        left, right = t0inv, t0
        if part.reflected:
            n2 = np.diag(reflection_signs(2))
            left, right = n2 @ t0inv, t0 @ n2
        return np.einsum("ij,zsjk,kl->zsil", left, core, right, optimize=True)
    if isinstance(part, PermutedBlocks):
        out = np.zeros((zs.size, deltas.size, part.order, part.order), dtype=complex)
        for i, blk in enumerate(part.blocks):
            rows = part.block_rows(i)
            out[:, :, rows[:, None], rows[None, :]] = part_transfers(blk, zs, deltas)
        return out
    raise TypeError(f"unsupported segment payload {type(part)!r}")


def segment_transfer(seg: Segment, z: complex, delta: float) -> np.ndarray:
    """Single transfer matrix across the first ``delta`` of a segment."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return part_transfers(seg.part, [z], [delta])[0, 0]


def propagate_frames(ham: Hamiltonian, alpha: BoundaryCondition, zs) -> np.ndarray:
    """W(x_i, z) at all breakpoints for a batch of z; shape (nz, nbp, 2n, 2n)."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    m = ham.order
    nbp = len(ham.segments) + 1
    frames = np.empty((zs.size, nbp, m, m), dtype=complex)
    frames[:, 0] = initial_frame(alpha)
    for k, seg in enumerate(ham.segments):
        phi = part_transfers(seg.part, zs, [seg.length])[:, 0]
        frames[:, k + 1] = phi @ frames[:, k]
    return frames


def boundary_frames(ham: Hamiltonian, alpha: BoundaryCondition, zs) -> np.ndarray:
    """W(b, z) at the right end of the finite part; shape (nz, 2n, 2n)."""
    return propagate_frames(ham, alpha, zs)[:, -1]


@dataclass(frozen=True)
class FundamentalSolution:
    """W(x, z) for one spectral point, stored at the segment breakpoints."""

    ham: Hamiltonian
    alpha: BoundaryCondition
    z: complex
    frames: np.ndarray

    @property
    def order(self) -> int:
        return self.ham.order

    def at(self, x: float) -> np.ndarray:
        """W(x, z) by exact transfer from the nearest breakpoint to the left."""
        ham = self.ham
        if x > ham.length + 1e-12:
            return self._tail_value(x)
        idx, off = ham.locate(x)
        if off == 0.0:
            return self.frames[idx]
        phi = part_transfers(ham.segments[idx].part, [self.z], [off])[0, 0]
        return phi @ self.frames[idx]

    def _tail_value(self, x: float) -> np.ndarray:
        tail = self.ham.tail
        if tail is None:
            raise OutOfDomainError(f"{x} beyond the finite part")
        if isinstance(tail, (ProjectionTail, ConstantTail)):
            gen = symplectic_form(self.order // 2) @ tail.value(0.0)
            phi = _kernels.const_transfers(gen, [self.z * (x - self.ham.length)])[0]
            return phi @ self.frames[-1]
        raise OutOfDomainError("pointwise tail evaluation is not supported for composite tails")

    def u(self, x: float) -> np.ndarray:
        return self.at(x)[:, : self.ham.n]

    def v(self, x: float) -> np.ndarray:
        return self.at(x)[:, self.ham.n :]


def fundamental_solution(ham: Hamiltonian, alpha: BoundaryCondition, z: complex) -> FundamentalSolution:
    frames = propagate_frames(ham, alpha, [z])[0]
    return FundamentalSolution(ham, alpha, complex(z), frames)


def evaluate_solution(sol: FundamentalSolution, x: float) -> np.ndarray:
    return sol.at(x)


# ---------------------------------------------------------------------------
# quadrature


def _segment_quad(ham: Hamiltonian, interval, order: int):
    """Gauss-Legendre nodes/weights per segment restricted to ``interval``.

    Yields (segment_index, x_nodes, weights, offsets) triples.
    """
    c, d = interval
    if d < c - 1e-12:
        raise ValueError("empty interval must have c <= d")
    breaks = ham.breakpoints
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    for k, seg in enumerate(ham.segments):
        lo, hi = max(c, breaks[k]), min(d, breaks[k + 1])
        if hi - lo <= 1e-14:
            continue
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        xs = mid + half * base_x
        ws = half * base_w
        yield k, xs, ws, xs - breaks[k]


def _gram_at_order(ham, sol_f, sol_g, interval, order):
    total = np.zeros((ham.order, ham.order), dtype=complex)
    for k, xs, ws, offs in _segment_quad(ham, interval, order):
        phi_f = part_transfers(ham.segments[k].part, [sol_f.z], offs)[0]
        wf = phi_f @ sol_f.frames[k]
        if sol_g is sol_f:
            wg = wf
        else:
            phi_g = part_transfers(ham.segments[k].part, [sol_g.z], offs)[0]
            wg = phi_g @ sol_g.frames[k]
        hv = np.stack([ham.segments[k].part.value(o) for o in offs])
        total += np.einsum("s,sji,sjk,skl->il", ws, wf.conj(), hv, wg, optimize=True)
    return total


def weighted_gram(
    ham: Hamiltonian,
    sol_f: FundamentalSolution,
    sol_g: FundamentalSolution,
    interval=None,
    rel_tol: float = QUAD_REL_TOL,
) -> np.ndarray:
    """The matrix integral of W(x, z)* H(x) W(x, w) over the interval.

    Gauss-Legendre per segment, starting at order 20 and doubling until two
    successive estimates agree to ``rel_tol`` in relative Frobenius norm.
    """
    if interval is None:
        interval = (0.0, ham.length)
    if interval[1] <= interval[0] + 1e-15:
        return np.zeros((ham.order, ham.order), dtype=complex)
    order = QUAD_BASE_ORDER
    prev = _gram_at_order(ham, sol_f, sol_g, interval, order)
    for _ in range(QUAD_MAX_DOUBLINGS):
        order *= 2
        cur = _gram_at_order(ham, sol_f, sol_g, interval, order)
        scale = max(np.linalg.norm(cur), 1e-300)
        if np.linalg.norm(cur - prev) <= rel_tol * scale:
            return cur
        prev = cur
    raise NoConvergenceError(
        f"weighted Gram did not stabilize at order {order} on {interval}"
    )


# ---------------------------------------------------------------------------
# sampled functions


@dataclass(frozen=True)
class SampledFunction:
    """A 2n-vector function sampled on per-segment Gauss-Legendre nodes."""

    ham: Hamiltonian
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    seg_of_node: np.ndarray

    @property
    def order(self) -> int:
        return self.ham.order

    def h_values(self) -> np.ndarray:
        out = np.empty((self.nodes.size, self.order, self.order), dtype=complex)
        breaks = self.ham.breakpoints
        for i, x in enumerate(self.nodes):
            k = int(self.seg_of_node[i])
            out[i] = self.ham.segments[k].part.value(x - breaks[k])
        return out

    def norm_sq(self) -> float:
        hv = self.h_values()
        val = np.einsum("s,si,sij,sj->", self.weights, self.values.conj(), hv, self.values)
        return float(val.real)


def sample_function(ham: Hamiltonian, f, order: int = 40, interval=None) -> SampledFunction:
    """Sample a callable x -> C^2n on per-segment quadrature nodes."""
    if interval is None:
        interval = (0.0, ham.length)
    xs_all, ws_all, segs = [], [], []
    for k, xs, ws, _ in _segment_quad(ham, interval, order):
        xs_all.append(xs)
        ws_all.append(ws)
        segs.append(np.full(xs.size, k, dtype=np.intp))
    nodes = np.concatenate(xs_all)
    vals = np.stack([np.asarray(f(x), dtype=complex) for x in nodes])
    return SampledFunction(ham, nodes, np.concatenate(ws_all), vals, np.concatenate(segs))


def sample_solution_column(ham, alpha, t: float, coeff, order: int = 40) -> SampledFunction:
    """Sample the solution u(x, t) @ coeff (an eigenfunction candidate)."""
    sol = fundamental_solution(ham, alpha, t)
    coeff = np.asarray(coeff, dtype=complex)
    xs_all, ws_all, segs, vals = [], [], [], []
    for k, xs, ws, offs in _segment_quad(ham, (0.0, ham.length), order):
        phi = part_transfers(ham.segments[k].part, [sol.z], offs)[0]
        wv = phi @ sol.frames[k]
        vals.append(wv[:, :, : ham.n] @ coeff)
        xs_all.append(xs)
        ws_all.append(ws)
        segs.append(np.full(xs.size, k, dtype=np.intp))
    return SampledFunction(
        ham,
        np.concatenate(xs_all),
        np.concatenate(ws_all),
        np.vstack(vals),
        np.concatenate(segs),
    )


def antiderivative_matrix(order: int) -> np.ndarray:
    """Map from values at Gauss-Legendre nodes on [-1, 1] to the values of
    the interpolant's antiderivative (from -1) at the same nodes."""
    from numpy.polynomial import legendre

    nodes, _ = legendre.leggauss(order)
    vand = legendre.legvander(nodes, order - 1)
    coeff_to_anti = np.zeros((order + 1, order))
    for j in range(order):
        e = np.zeros(order)
        e[j] = 1.0
        coeff_to_anti[:, j] = legendre.legint(e, lbnd=-1)
    anti_vand = legendre.legvander(nodes, order)
    return anti_vand @ coeff_to_anti @ np.linalg.inv(vand)
