"""Piecewise coefficient matrices H(x) >= 0 on an interval or half line.

A Hamiltonian is a finite list of segments covering (0, L), optionally
followed by a tail descriptor on (L, inf). Segments are either constant
matrices, zero-energy conjugations of constant-potential Schrodinger
pieces (rank-one, exactly evaluable), or permutation-conjugated direct
sums of order-2 blocks as produced by the graph compilers.

Every value is immutable after construction and safe to share across
threads.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .algebra import (
    BoundaryCondition,
    PSD_TOL,
    RANK_RTOL,
    ensure_psd,
    kernel_basis,
    symplectic_form,
)

THETA_SAMPLES = 16


class OutOfDomainError(ValueError):
    """Evaluation point outside the domain of the coefficient matrix."""


class BadDomainError(ValueError):
    """Edge data does not cover the domain required by a transform."""


class DichotomyFailureError(ArithmeticError):
    """Spectrum of z*J*H_inf does not split into n decaying / n growing."""


def reflection_signs(order: int) -> np.ndarray:
    """The block matrix N = diag(-I, I) as a sign vector of length order."""
    n = order // 2
    return np.concatenate([-np.ones(n), np.ones(n)])


def interleave_perm(d: int) -> np.ndarray:
    """Permutation sending interleaved (pairwise) coordinates to split halves.

    Zero-based version of C_d e_i = e_(i+1)/2 (i odd), e_(d+i)/2 (i even).
    """
    if d % 2:
        raise ValueError("d must be even")
    out = np.empty(d, dtype=np.intp)
    for i in range(d):
        out[i] = i // 2 if i % 2 == 0 else (d + i - 1) // 2
    return out


def permutation_matrix(perm: np.ndarray) -> np.ndarray:
    """Matrix P with P e_i = e_perm[i]."""
    perm = np.asarray(perm, dtype=np.intp)
    mat = np.zeros((perm.size, perm.size))
    mat[perm, np.arange(perm.size)] = 1.0
    return mat


def _frozen_array(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# segment payloads


@dataclass(frozen=True)
class ConstantMatrix:
    """Constant PSD coefficient value on a segment."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = ensure_psd(self.matrix)
        object.__setattr__(self, "matrix", _frozen_array(mat))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def value(self, delta: float) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True)
class SchrodingerInduced:
    """Rank-one coefficient [[p^2, pq], [pq, q^2]] from -y'' + v0 y = 0.

    p, q are the zero-energy solutions of the source edge; ``t0`` is their
    frame [[p', q'], [p, q]] at the source position ``x0`` that the segment
    start maps to. Local offsets d map to source positions
    x0 + (scale if not reflected else -scale) * d, and reflected segments
    conjugate the value by N = diag(-1, 1); the stored data make pointwise
    evaluation and transfer matrices exact.
    """

    v0: float
    x0: float
    scale: float = 1.0
    reflected: bool = False
    t0: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        t0 = np.array(self.t0, dtype=float)
        if t0.shape != (2, 2):
            raise ValueError("t0 must be 2x2")
        if abs(np.linalg.det(t0) - 1.0) > 1e-9:
            raise ValueError("zero-energy frame must have determinant 1")
        object.__setattr__(self, "t0", _frozen_array(t0, dtype=float))

    @property
    def order(self) -> int:
        return 2

    @property
    def step_sign(self) -> float:
        return -1.0 if self.reflected else 1.0

    def frame(self, delta: float) -> np.ndarray:
        """Zero-energy frame T at the source image of local offset delta."""
        step = self.step_sign * self.scale * delta
        m0 = _kernels.schrodinger_transfer(self.v0, [step], [0.0 + 0.0j])[0, 0].real
        return m0 @ self.t0

    def value(self, delta: float) -> np.ndarray:
        t = self.frame(delta)
        p, q = t[1, 0], t[1, 1]
        h = self.scale * np.array(
            [[p * p, p * q], [p * q, q * q]], dtype=complex
        )
        if self.reflected:
            h[0, 1] = -h[0, 1]
            h[1, 0] = -h[1, 0]
        return h


@dataclass(frozen=True)
class PermutedBlocks:
    """Direct sum of order-2 payloads conjugated by a permutation.

    The pointwise value is P (b_1 + ... + b_m) P^T where P e_i = e_perm[i];
    the graph compilers use the interleave permutation C so that the big
    system keeps the standard symplectic form.
    """

    perm: np.ndarray
    blocks: tuple

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.intp)
        total = sum(b.order for b in self.blocks)
        if perm.size != total or sorted(perm.tolist()) != list(range(total)):
            raise ValueError("perm must be a permutation of the stacked block order")
        perm = perm.copy()
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def order(self) -> int:
        return self.perm.size

    def block_rows(self, i: int) -> np.ndarray:
        """Indices of block i's coordinates in the permuted system."""
        off = sum(b.order for b in self.blocks[:i])
        return self.perm[off : off + self.blocks[i].order]

    def value(self, delta: float) -> np.ndarray:
        out = np.zeros((self.order, self.order), dtype=complex)
        for i, blk in enumerate(self.blocks):
            rows = self.block_rows(i)
            out[np.ix_(rows, rows)] = blk.value(delta)
        return out


SegmentPart = Union[ConstantMatrix, SchrodingerInduced, PermutedBlocks]


@dataclass(frozen=True)
class Segment:
    length: float
    part: SegmentPart

    def __post_init__(self):
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValueError("segment length must be positive and finite")

    @property
    def order(self) -> int:
        return self.part.order

    def value(self, delta: float) -> np.ndarray:
        if delta < -1e-12 or delta > self.length + 1e-12:
            raise OutOfDomainError(f"offset {delta} outside [0, {self.length}]")
        return self.part.value(float(delta))


# ---------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class ProjectionTail:
    """Constant tail P = beta* beta implementing the condition beta at L.

    Solutions are square integrable against the tail exactly when
    beta u(L) = 0, so spectral data reduce to the regular problem on the
    finite part with right condition beta.
    """

    beta: BoundaryCondition

    @property
    def order(self) -> int:
        return self.beta.order

    def value(self, s: float) -> np.ndarray:
        return self.beta.projection()

    def gamma(self, z: complex) -> np.ndarray:
        return np.asarray(self.beta.matrix, dtype=complex)


@dataclass(frozen=True)
class ConstantTail:
    """Constant definite tail; membership in L^2 is decided by a dichotomy.

    Solutions on the tail evolve by exp(x z J H_inf); for definite H_inf
    and Im z != 0 the spectrum splits into n decaying and n growing
    directions, and gamma(z) annihilates the decaying invariant subspace.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = ensure_psd(self.matrix)
        if np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0] <= PSD_TOL:
            raise ValueError("constant tail must be definite (positive definite)")
        object.__setattr__(self, "matrix", _frozen_array(mat))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def value(self, s: float) -> np.ndarray:
        return self.matrix

    def gamma(self, z: complex) -> np.ndarray:
        import scipy.linalg

        n = self.order // 2
        gen = z * (symplectic_form(n) @ self.matrix)
        t, q, sdim = scipy.linalg.schur(gen, output="complex", sort=lambda lam: lam.real < 0)
        eigs = np.diag(t)
        margin = 1e-12 * max(np.max(np.abs(eigs)), 1e-300)
        if sdim != n or np.min(np.abs(eigs.real)) <= margin:
            raise DichotomyFailureError(
                f"spectrum of z J H_inf does not split {n}/{n} at z={z}"
            )
        return q[:, n:].conj().T


@dataclass(frozen=True)
class SchrodingerUltimate:
    """Order-2 tail induced by a constant potential v_inf beyond the frame point.

    The decaying Schrodinger solution exp(-Omega x), Omega = sqrt(v_inf - z)
    with positive real part, fixes the one-dimensional L^2 direction in
    canonical coordinates through the zero-energy frame.
    """

    v_inf: float
    t_start: np.ndarray = field(default_factory=lambda: np.eye(2))

    def __post_init__(self):
        t = np.array(self.t_start, dtype=float)
        if abs(np.linalg.det(t) - 1.0) > 1e-9:
            raise ValueError("zero-energy frame must have determinant 1")
        object.__setattr__(self, "t_start", _frozen_array(t, dtype=float))

    @property
    def order(self) -> int:
        return 2

    def value(self, s: float) -> np.ndarray:
        m0 = _kernels.schrodinger_transfer(self.v_inf, [s], [0.0 + 0.0j])[0, 0].real
        t = m0 @ self.t_start
        p, q = t[1, 0], t[1, 1]
        return np.array([[p * p, p * q], [p * q, q * q]], dtype=complex)

    def gamma(self, z: complex) -> np.ndarray:
        if z.imag == 0:
            raise DichotomyFailureError("Schrodinger tail dichotomy needs Im z != 0")
        omega = np.sqrt(complex(self.v_inf) - z)
        tinv = np.array(
            [[self.t_start[1, 1], -self.t_start[0, 1]],
             [-self.t_start[1, 0], self.t_start[0, 0]]]
        )
        d = tinv @ np.array([-omega, 1.0], dtype=complex)
        row = np.array([[-d[1], d[0]]], dtype=complex)
        return row / np.linalg.norm(row)


@dataclass(frozen=True)
class SubTail:
    """One active order-2 block of a composite tail.

    Finitely many segments cover (0, c) past the tail start, after which
    ``ultimate`` describes the constant-coefficient behavior. gamma is the
    ultimate annihilator pulled back through the segments.
    """

    segments: tuple
    ultimate: Union[ConstantTail, SchrodingerUltimate]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def order(self) -> int:
        return 2

    def value(self, s: float) -> np.ndarray:
        off = s
        for seg in self.segments:
            if off <= seg.length:
                return seg.value(off)
            off -= seg.length
        return self.ultimate.value(off)

    def gamma(self, z: complex) -> np.ndarray:
        from .evolve import segment_transfer

        g = self.ultimate.gamma(z)
        phi = np.eye(2, dtype=complex)
        for seg in self.segments:
            phi = segment_transfer(seg, z, seg.length) @ phi
        return g @ phi


@dataclass(frozen=True)
class CompositeTail:
    """Tail of a compiled non-compact graph system.

    In the shifted basis D the tail is the projection P = beta* beta on the
    frozen coordinates plus an interleave-conjugated direct sum of the
    half-line blocks on the active coordinates:
    H(x) = D* (P + C (b_1 + ... ) C*) D.
    """

    order: int
    d_perm: np.ndarray
    beta: BoundaryCondition
    subtails: tuple

    def __post_init__(self):
        perm = np.asarray(self.d_perm, dtype=np.intp)
        if sorted(perm.tolist()) != list(range(self.order)):
            raise ValueError("d_perm must be a permutation")
        perm = perm.copy()
        perm.setflags(write=False)
        object.__setattr__(self, "d_perm", perm)
        object.__setattr__(self, "subtails", tuple(self.subtails))
        n_frozen = self.beta.order
        n_active = 2 * len(self.subtails)
        if n_frozen + n_active != self.order:
            raise ValueError("beta and subtails do not fill the tail order")

    @property
    def n_frozen(self) -> int:
        return self.beta.order

    def _inverse_perm(self) -> np.ndarray:
        inv = np.empty_like(self.d_perm)
        inv[self.d_perm] = np.arange(self.order)
        return inv

    def pair_indices(self, i: int) -> np.ndarray:
        """Original coordinates of active block i's (first, second) components."""
        inv = self._inverse_perm()
        m = len(self.subtails)
        base = self.n_frozen
        return np.array([inv[base + i], inv[base + m + i]], dtype=np.intp)

    def frozen_indices(self) -> np.ndarray:
        return self._inverse_perm()[: self.n_frozen]

    def value(self, s: float) -> np.ndarray:
        blocks = np.zeros((self.order, self.order), dtype=complex)
        nf = self.n_frozen
        blocks[:nf, :nf] = self.beta.projection()
        cperm = interleave_perm(2 * len(self.subtails)) if self.subtails else None
        for i, sub in enumerate(self.subtails):
            rows = nf + cperm[[2 * i, 2 * i + 1]]
            blocks[np.ix_(rows, rows)] = sub.value(s)
        # H = D* blocks D with D e_i = e_d_perm[i]
        return blocks[np.ix_(self.d_perm, self.d_perm)]

    def gamma(self, z: complex) -> np.ndarray:
        rows = []
        top = np.zeros((self.beta.n, self.order), dtype=complex)
        top[:, self.frozen_indices()] = self.beta.matrix
        rows.append(top)
        for i, sub in enumerate(self.subtails):
            sel = np.zeros((2, self.order), dtype=complex)
            idx = self.pair_indices(i)
            sel[0, idx[0]] = 1.0
            sel[1, idx[1]] = 1.0
            rows.append(sub.gamma(z) @ sel)
        return np.vstack(rows)


Tail = Union[ProjectionTail, ConstantTail, SubTail, CompositeTail]


# ---------------------------------------------------------------------------
# the Hamiltonian proper


@dataclass(frozen=True)
class Hamiltonian:
    """Segmented coefficient matrix on (0, L), optionally with a tail."""

    order: int
    segments: tuple
    tail: Tail | None = None

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("at least one segment is required")
        if self.order % 2 or self.order < 2:
            raise ValueError("order must be a positive even integer")
        for seg in segments:
            if seg.order != self.order:
                raise ValueError("segment order mismatch")
        if self.tail is not None and self.tail.order != self.order:
            raise ValueError("tail order mismatch")
        object.__setattr__(self, "segments", segments)
        breaks = np.concatenate([[0.0], np.cumsum([s.length for s in segments])])
        breaks.setflags(write=False)
        object.__setattr__(self, "_breaks", breaks)

    @property
    def n(self) -> int:
        return self.order // 2

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breaks

    @property
    def length(self) -> float:
        return float(self._breaks[-1])

    def locate(self, x: float) -> tuple[int, float]:
        """Segment index and local offset for a point in the finite part."""
        breaks = self._breaks
        if x < -1e-12 or x > breaks[-1] + 1e-12:
            raise OutOfDomainError(f"{x} outside finite part [0, {breaks[-1]}]")
        x = min(max(x, 0.0), breaks[-1])
        idx = int(np.searchsorted(breaks, x, side="right") - 1)
        idx = min(idx, len(self.segments) - 1)
        return idx, x - breaks[idx]

    def value(self, x: float) -> np.ndarray:
        """Pointwise coefficient H(x) on the finite part or the tail."""
        if x > self.length:
            if self.tail is None:
                raise OutOfDomainError(f"{x} beyond finite part and no tail present")
            return self.tail.value(x - self.length)
        idx, off = self.locate(x)
        return self.segments[idx].value(off)

    def symplectic(self) -> np.ndarray:
        return symplectic_form(self.n)


def constant_hamiltonian(matrix, length: float, tail: Tail | None = None) -> Hamiltonian:
    matrix = np.asarray(matrix, dtype=complex)
    seg = Segment(length, ConstantMatrix(matrix))
    return Hamiltonian(matrix.shape[0], (seg,), tail)


# ---------------------------------------------------------------------------
# edge dynamics (order-2 data living on a graph edge)


@dataclass(frozen=True)
class CanonicalDynamics:
    """Piecewise-constant 2x2 coefficient on an edge.

    Local coordinates run from 0 at the left endpoint; finite edges cover
    (0, 2r), half-line edges carry ``tail_value`` beyond their pieces.
    """

    pieces: tuple
    tail_value: np.ndarray | None = None

    def __post_init__(self):
        pieces = tuple((float(ln), _frozen_array(ensure_psd(mat))) for ln, mat in self.pieces)
        if not pieces and self.tail_value is None:
            raise ValueError("empty dynamics")
        for ln, _ in pieces:
            if ln <= 0:
                raise ValueError("piece lengths must be positive")
        object.__setattr__(self, "pieces", pieces)
        if self.tail_value is not None:
            object.__setattr__(self, "tail_value", _frozen_array(ensure_psd(self.tail_value)))

    @property
    def total_length(self) -> float:
        return float(sum(ln for ln, _ in self.pieces))

    def value(self, x: float) -> np.ndarray:
        off = x
        for ln, mat in self.pieces:
            if off <= ln + 1e-12:
                return mat
            off -= ln
        if self.tail_value is not None:
            return self.tail_value
        raise OutOfDomainError(f"{x} beyond edge pieces")


@dataclass(frozen=True)
class SchrodingerDynamics:
    """Piecewise-constant potential on an edge of -y'' + V y = z y.

    Same coordinate conventions as CanonicalDynamics; ``tail_potential``
    extends half-line edges with a constant potential, which keeps them in
    the limit point case.
    """

    pieces: tuple
    tail_potential: float | None = None

    def __post_init__(self):
        pieces = tuple((float(ln), float(v)) for ln, v in self.pieces)
        for ln, _ in pieces:
            if ln <= 0:
                raise ValueError("piece lengths must be positive")
        object.__setattr__(self, "pieces", pieces)

    @property
    def total_length(self) -> float:
        return float(sum(ln for ln, _ in self.pieces))

    def potential(self, x: float) -> float:
        off = x
        for ln, v in self.pieces:
            if off <= ln + 1e-12:
                return v
            off -= ln
        if self.tail_potential is not None:
            return self.tail_potential
        raise OutOfDomainError(f"{x} beyond edge pieces")

    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([ln for ln, _ in self.pieces])])

    def frames(self) -> list[np.ndarray]:
        """Zero-energy frames T at the piece boundaries, T(0) = I."""
        frames = [np.eye(2)]
        t = np.eye(2)
        for ln, v in self.pieces:
            m0 = _kernels.schrodinger_transfer(v, [ln], [0.0 + 0.0j])[0, 0].real
            t = m0 @ t
            frames.append(t)
        return frames

    def frame_at(self, x: float) -> np.ndarray:
        """Zero-energy frame T(x) from the left endpoint."""
        bounds = self.boundaries()
        if x < -1e-12:
            raise OutOfDomainError(f"{x} < 0")
        frames = self.frames()
        idx = int(np.searchsorted(bounds, min(x, bounds[-1]), side="right") - 1)
        idx = min(idx, len(self.pieces) - 1) if self.pieces else 0
        if x <= bounds[-1] + 1e-12 and self.pieces:
            v = self.pieces[idx][1]
            base = frames[idx]
            step = x - bounds[idx]
        else:
            if self.tail_potential is None:
                raise OutOfDomainError(f"{x} beyond edge pieces")
            v = self.tail_potential
            base = frames[-1]
            step = x - bounds[-1]
        m0 = _kernels.schrodinger_transfer(v, [step], [0.0 + 0.0j])[0, 0].real
        return m0 @ base

    def value(self, x: float) -> np.ndarray:
        t = self.frame_at(x)
        p, q = t[1, 0], t[1, 1]
        return np.array([[p * p, p * q], [p * q, q * q]], dtype=complex)


EdgeDynamics = Union[CanonicalDynamics, SchrodingerDynamics]


def _canonical_portion(dyn: CanonicalDynamics, a: float, b: float) -> list[tuple[float, np.ndarray]]:
    """(length, value) pieces of the dynamics restricted to local (a, b)."""
    out = []
    pos = 0.0
    for ln, mat in dyn.pieces:
        lo, hi = max(a, pos), min(b, pos + ln)
        if hi - lo > 1e-14:
            out.append((hi - lo, mat))
        pos += ln
    if b - max(a, pos) > 1e-14:
        if dyn.tail_value is None:
            raise BadDomainError(f"dynamics does not cover local ({a}, {b})")
        out.append((b - max(a, pos), dyn.tail_value))
    return out


def _schrodinger_breaks(dyn: SchrodingerDynamics, a: float, b: float) -> list[tuple[float, float, float]]:
    """(start, end, potential) subintervals of constant V covering (a, b)."""
    out = []
    pos = 0.0
    for ln, v in dyn.pieces:
        lo, hi = max(a, pos), min(b, pos + ln)
        if hi - lo > 1e-14:
            out.append((lo, hi, v))
        pos += ln
    if b - max(a, pos) > 1e-14:
        if dyn.tail_potential is None:
            raise BadDomainError(f"dynamics does not cover local ({a}, {b})")
        out.append((max(a, pos), b, dyn.tail_potential))
    return out


def reflect_and_scale(dyn: EdgeDynamics, r: float, side: str) -> tuple[Segment, ...]:
    """Segments on (0, 1) realizing the half-edge splits.

    side='left' gives x -> r N H(r - r x) N (the left half traversed away
    from the midpoint, conjugated by N = diag(-1, 1)); side='right' gives
    x -> r H(r + r x). Source positions are in local edge coordinates with
    the midpoint at r.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if r <= 0:
        raise BadDomainError("half-length must be positive")
    reflected = side == "left"
    if isinstance(dyn, CanonicalDynamics):
        if reflected:
            pieces = _canonical_portion(dyn, 0.0, r)[::-1]
            signs = reflection_signs(2)
            vals = [(ln, signs[:, None] * mat * signs[None, :]) for ln, mat in pieces]
        else:
            vals = _canonical_portion(dyn, r, 2 * r)
        return tuple(Segment(ln / r, ConstantMatrix(r * mat)) for ln, mat in vals)
    if isinstance(dyn, SchrodingerDynamics):
        segs = []
        if reflected:
            sub = _schrodinger_breaks(dyn, 0.0, r)[::-1]
            for lo, hi, v in sub:
                t0 = dyn.frame_at(hi)
                segs.append(
                    Segment((hi - lo) / r, SchrodingerInduced(v, hi, r, True, t0))
                )
        else:
            sub = _schrodinger_breaks(dyn, r, 2 * r)
            for lo, hi, v in sub:
                t0 = dyn.frame_at(lo)
                segs.append(
                    Segment((hi - lo) / r, SchrodingerInduced(v, lo, r, False, t0))
                )
        return tuple(segs)
    raise TypeError(f"unsupported dynamics {type(dyn)!r}")


def halfline_subtail(dyn: EdgeDynamics) -> SubTail:
    """Tail block of a half-line edge beyond local coordinate 2.

    Half-line edges use r = 1, so the compiled tail variable x > 1
    corresponds to local coordinate 1 + x > 2.
    """
    cut = 2.0
    if isinstance(dyn, CanonicalDynamics):
        if dyn.tail_value is None:
            raise BadDomainError("half-line edge needs a constant tail value")
        pieces = _canonical_portion(dyn, cut, max(cut, dyn.total_length))
        segs = tuple(Segment(ln, ConstantMatrix(mat)) for ln, mat in pieces)
        return SubTail(segs, ConstantTail(dyn.tail_value))
    if isinstance(dyn, SchrodingerDynamics):
        if dyn.tail_potential is None:
            raise BadDomainError("half-line edge needs a constant tail potential")
        end = max(cut, dyn.total_length)
        segs = []
        for lo, hi, v in _schrodinger_breaks(dyn, cut, end) if end > cut else []:
            segs.append(Segment(hi - lo, SchrodingerInduced(v, lo, 1.0, False, dyn.frame_at(lo))))
        return SubTail(tuple(segs), SchrodingerUltimate(dyn.tail_potential, dyn.frame_at(end)))
    raise TypeError(f"unsupported dynamics {type(dyn)!r}")


# ---------------------------------------------------------------------------
# definiteness and the degenerate rank-one form


@dataclass(frozen=True)
class ThetaLine:
    """Degenerate coefficient h(x) P_theta with a fixed rank-one projection."""

    theta: float
    weights: tuple

    def projection(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c * c, s * c], [s * c, s * s]], dtype=complex)


def _part_samples(part: SegmentPart, length: float) -> list[np.ndarray]:
    if isinstance(part, ConstantMatrix):
        return [part.matrix]
    offsets = np.linspace(0.0, length, THETA_SAMPLES)
    return [part.value(d) for d in offsets]


def segment_samples(ham: Hamiltonian, include_tail: bool = True) -> list[np.ndarray]:
    """Pointwise values witnessing the coefficient's common kernel."""
    vals = []
    for seg in ham.segments:
        vals.extend(_part_samples(seg.part, seg.length))
    if include_tail and ham.tail is not None:
        vals.extend(ham.tail.value(s) for s in (0.5, 1.5, 2.5))
    return vals


def common_kernel(ham: Hamiltonian, tol: float = RANK_RTOL) -> list[np.ndarray]:
    """Vectors v with H(x) v = 0 at every sampled point."""
    stack = np.vstack(segment_samples(ham))
    return kernel_basis(stack, tol)


def is_definite(ham: Hamiltonian) -> bool:
    return not common_kernel(ham)


def _rank_one_direction(mat: np.ndarray, rtol: float = 1e-8) -> np.ndarray | None:
    """Unit real direction d with mat ~ h d d^T, or None."""
    sym = 0.5 * (mat + mat.conj().T)
    if np.linalg.norm(sym.imag) > rtol * max(np.linalg.norm(sym), 1e-300):
        return None
    lam, vec = np.linalg.eigh(sym.real)
    if lam[-1] <= 0:
        return np.array([1.0, 0.0])  # zero matrix: direction unconstrained
    if lam[0] > rtol * lam[-1]:
        return None
    d = vec[:, -1]
    return d if (d[0] > 0 or (d[0] == 0 and d[1] > 0)) else -d


def detect_theta_form(ham: Hamiltonian, rtol: float = 1e-8) -> ThetaLine | None:
    """Recognize order-2 coefficients of the degenerate form h(x) P_theta.

    Checks segment constants exactly and Schrodinger-induced segments on a
    sample grid; the rank-one direction of an induced block rotates with x
    unless p and q are proportional, which the sampler detects.
    """
    if ham.order != 2:
        raise ValueError("theta detection applies to order-2 systems")
    direction = None
    weights = []
    for seg in ham.segments:
        samples = _part_samples(seg.part, seg.length)
        for mat in samples:
            d = _rank_one_direction(mat, rtol)
            if d is None:
                return None
            if np.linalg.norm(mat) > rtol:
                if direction is None:
                    direction = d
                elif min(np.linalg.norm(d - direction), np.linalg.norm(d + direction)) > 1e-6:
                    return None
        weights.append(float(np.real(np.trace(samples[0]))))
    if direction is None:
        direction = np.array([1.0, 0.0])
    theta = float(np.arctan2(direction[1], direction[0])) % np.pi
    return ThetaLine(theta, tuple(weights))
