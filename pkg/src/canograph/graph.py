"""Quantum graphs and their compilation to higher-order canonical systems.

A graph with k edges (finite edges on (-r, r), half-line edges on
(-1, inf), finite edges ordered first) becomes one canonical system of
order 4k by inserting a midpoint vertex on every edge, rescaling both
halves onto (0, 1), and interleaving the order-2 blocks. Neumann-Kirchhoff
gluing at the inserted midpoints fixes the left condition; the original
vertex conditions assemble into the right condition. Half lines leave a
tail on (1, inf) made of the projection implementing that right condition
plus the surviving half-line blocks in shifted coordinates.

Local edge coordinates run from 0 at the left (initial-vertex) endpoint;
the midpoint sits at r (finite) or 1 (half line).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BoundaryCondition,
    NotSelfAdjointError,
    STRUCT_TOL,
    validate_boundary,
)
from .hamiltonian import (
    CanonicalDynamics,
    CompositeTail,
    ConstantMatrix,
    EdgeDynamics,
    Hamiltonian,
    PermutedBlocks,
    SchrodingerDynamics,
    SchrodingerInduced,
    Segment,
    ThetaLine,
    detect_theta_form,
    halfline_subtail,
    interleave_perm,
    reflect_and_scale,
)


class GraphError(ValueError):
    """Structural problem with a quantum graph."""


class HasHalfLineError(GraphError):
    """Compact compilation requested on a graph with half-line edges."""


class IndefiniteTailError(GraphError):
    """A half-line tail is neither definite nor a reducible theta form."""


class NonDefiniteCompiledWarning(UserWarning):
    """Every compiled block is a theta form; the operator domain is
    finite-dimensional and the spectral engine does not apply."""


@dataclass(frozen=True)
class Edge:
    """Directed edge; ``terminal`` is None exactly for half-line edges."""

    name: str
    initial: str
    terminal: str | None
    half_length: float
    dynamics: EdgeDynamics

    def __post_init__(self):
        if self.is_halfline:
            if abs(self.half_length - 1.0) > 1e-14:
                raise GraphError(f"half-line edge {self.name!r} must use half_length 1")
            tail_missing = (
                isinstance(self.dynamics, CanonicalDynamics) and self.dynamics.tail_value is None
            ) or (
                isinstance(self.dynamics, SchrodingerDynamics)
                and self.dynamics.tail_potential is None
            )
            if tail_missing:
                raise GraphError(f"half-line edge {self.name!r} needs constant tail data")
        else:
            if self.half_length <= 0:
                raise GraphError(f"edge {self.name!r} needs a positive half-length")
            covered = self.dynamics.total_length
            if abs(covered - 2 * self.half_length) > 1e-12 and not (
                isinstance(self.dynamics, CanonicalDynamics) and self.dynamics.tail_value is not None
            ):
                raise GraphError(
                    f"edge {self.name!r}: dynamics cover length {covered}, expected {2 * self.half_length}"
                )

    @property
    def is_halfline(self) -> bool:
        return self.terminal is None


@dataclass(frozen=True)
class QuantumGraph:
    """Vertices, directed edges (finite first), and vertex interface conditions.

    The interface matrix at a vertex v has one column pair per incident
    edge, ordered outgoing-then-incoming by edge index; its rows act on the
    signed endpoint vectors (first components of outgoing edges enter with
    +, of incoming edges with -).
    """

    vertices: tuple
    edges: tuple
    conditions: dict

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "conditions", dict(self.conditions))
        self._validate()

    def _validate(self):
        names = [e.name for e in self.edges]
        if len(set(names)) != len(names):
            raise GraphError("duplicate edge names")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        vset = set(self.vertices)
        seen_pairs = set()
        halfline_started = False
        for e in self.edges:
            if e.initial not in vset or (e.terminal is not None and e.terminal not in vset):
                raise GraphError(f"edge {e.name!r} references an unknown vertex")
            if e.terminal == e.initial:
                raise GraphError(f"edge {e.name!r} is a loop; insert a vertex to split it")
            if e.is_halfline:
                halfline_started = True
            elif halfline_started:
                raise GraphError("finite edges must precede half-line edges")
            if not e.is_halfline:
                pair = frozenset((e.initial, e.terminal))
                if pair in seen_pairs:
                    raise GraphError(
                        f"multiple edges between {e.initial!r} and {e.terminal!r}; "
                        "insert a vertex on one of them"
                    )
                seen_pairs.add(pair)
        if not self._connected():
            raise GraphError("graph is not connected")
        for v in self.vertices:
            deg = len(self.outgoing(v)) + len(self.incoming(v))
            if deg == 0:
                raise GraphError(f"vertex {v!r} has no incident edges")
            bc = self.conditions.get(v)
            if bc is None:
                raise GraphError(f"vertex {v!r} has no interface condition")
            if not isinstance(bc, BoundaryCondition) or bc.n != deg:
                raise GraphError(
                    f"vertex {v!r}: interface condition must be a validated "
                    f"{deg}x{2 * deg} boundary condition"
                )

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        adj: dict[str, set] = {v: set() for v in self.vertices}
        for e in self.edges:
            if not e.is_halfline:
                adj[e.initial].add(e.terminal)
                adj[e.terminal].add(e.initial)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def k_finite(self) -> int:
        return sum(1 for e in self.edges if not e.is_halfline)

    def outgoing(self, v: str) -> list:
        return [i for i, e in enumerate(self.edges) if e.initial == v]

    def incoming(self, v: str) -> list:
        return [i for i, e in enumerate(self.edges) if e.terminal == v]

    def roles(self, v: str) -> list:
        """(edge_index, 'out'|'in') pairs in interface column order."""
        return [(i, "out") for i in self.outgoing(v)] + [(i, "in") for i in self.incoming(v)]


# ---------------------------------------------------------------------------
# interface condition presets


def interface_preset(kind: str, degree: int, gamma: float = 0.0, b1=None, b2=None) -> BoundaryCondition:
    """Standard self-adjoint vertex conditions of a given degree.

    kirchhoff: continuity of values plus vanishing sum of the signed
    derivative components; dirichlet: all values pinned; delta: continuity
    plus (sum of signed derivative components) = gamma * value; custom:
    rows (b1 | b2) with b1 b2* Hermitian.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    d = degree
    if kind == "dirichlet":
        raw = np.hstack([np.zeros((d, d)), np.eye(d)])
    elif kind in ("kirchhoff", "delta"):
        rows = []
        for i in range(d - 1):
            cont = np.zeros(2 * d)
            cont[d + i] = 1.0
            cont[d + i + 1] = -1.0
            rows.append(cont)
        flux = np.zeros(2 * d)
        flux[:d] = 1.0
        if kind == "delta":
            flux[d] = -gamma
        rows.append(flux)
        raw = np.vstack(rows)
    elif kind == "custom":
        if b1 is None or b2 is None:
            raise ValueError("custom conditions need b1 and b2 blocks")
        b1 = np.asarray(b1, dtype=complex)
        b2 = np.asarray(b2, dtype=complex)
        if b1.shape != (d, d) or b2.shape != (d, d):
            raise ValueError("custom blocks must be d x d")
        cross = b1 @ b2.conj().T
        if np.linalg.norm(cross - cross.conj().T) > STRUCT_TOL * max(1.0, np.linalg.norm(cross)):
            raise NotSelfAdjointError("custom blocks violate b1 b2* = b2 b1*")
        raw = np.hstack([b1, b2])
    else:
        raise ValueError(f"unknown interface preset {kind!r}")
    return validate_boundary(raw)


# ---------------------------------------------------------------------------
# compiled artifacts


@dataclass(frozen=True)
class IndexMaps:
    """Bookkeeping of the basis permutations used by the compilers."""

    edges: tuple
    k_finite: int
    c_perm: np.ndarray
    d_perm: np.ndarray | None = None
    q_keep: np.ndarray | None = None
    q_perp_keep: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.edges)

    def coordinate(self, edge_index: int, side: int, component: int) -> int:
        """Compiled row of (edge, side 1|2, component 0|1)."""
        if side not in (1, 2) or component not in (0, 1):
            raise ValueError("side must be 1 or 2, component 0 or 1")
        block = (side - 1) * self.k + edge_index
        return int(self.c_perm[2 * block + component])


@dataclass(frozen=True)
class CompiledSystem:
    """Order-4k canonical system equivalent to a quantum graph."""

    ham: Hamiltonian
    alpha: BoundaryCondition
    beta: BoundaryCondition | None
    maps: IndexMaps
    block_thetas: tuple | None = None

    def problem(self):
        from .spectral import SpectralProblem

        return SpectralProblem(self.ham, self.alpha, self.beta)


def _neumann_kirchhoff_alpha(k: int) -> BoundaryCondition:
    eye = np.eye(k)
    zero = np.zeros((k, k))
    a1 = np.block([[eye, eye], [zero, zero]]) / np.sqrt(2.0)
    a2 = np.block([[zero, zero], [eye, -eye]]) / np.sqrt(2.0)
    return BoundaryCondition(np.hstack([a1, a2]))


def _side_segments(graph: QuantumGraph) -> list:
    """Per-block segment lists on (0, 1): side-1 of every edge, then side-2."""
    sides = []
    for e in graph.edges:
        sides.append(reflect_and_scale(e.dynamics, e.half_length, "left"))
    for e in graph.edges:
        sides.append(reflect_and_scale(e.dynamics, e.half_length, "right"))
    return sides


def _restrict_part(part, start: float, length: float):
    """The payload of a segment restricted to [start, start + length]."""
    if isinstance(part, ConstantMatrix):
        return part
    if isinstance(part, SchrodingerInduced):
        x_new = part.x0 + part.step_sign * part.scale * start
        return SchrodingerInduced(part.v0, x_new, part.scale, part.reflected, part.frame(start))
    raise TypeError(f"cannot restrict payload {type(part)!r}")


def _merge_blocks(sides: list) -> tuple:
    """Merge per-block segment lists into segments of the interleaved system."""
    breaks = {0.0, 1.0}
    for segs in sides:
        pos = 0.0
        for seg in segs:
            pos += seg.length
            breaks.add(round(pos, 15))
    cuts = sorted(b for b in breaks if -1e-12 <= b <= 1.0 + 1e-12)
    perm = interleave_perm(4 * len(sides) // 2)
    merged = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-13:
            continue
        blocks = []
        for segs in sides:
            pos = 0.0
            hit = None
            for seg in segs:
                if lo >= pos - 1e-12 and hi <= pos + seg.length + 1e-12:
                    hit = _restrict_part(seg.part, max(lo - pos, 0.0), hi - lo)
                    break
                pos += seg.length
            if hit is None:
                raise GraphError(f"edge block does not cover ({lo}, {hi})")
            blocks.append(hit)
        merged.append(Segment(hi - lo, PermutedBlocks(perm, tuple(blocks))))
    return tuple(merged)


def _assemble_beta(graph: QuantumGraph, n_cols: int, rows_spec: list) -> BoundaryCondition:
    """Place vertex-condition entries into the compiled right condition.

    ``rows_spec`` lists (vertex, role) per compiled row; entries for edge j
    land in column j (outgoing side) or k + j (incoming side), with the
    first-component block negated.
    """
    k = graph.k
    b1 = np.zeros((len(rows_spec), n_cols), dtype=complex)
    b2 = np.zeros((len(rows_spec), n_cols), dtype=complex)
    for row, (v, role_pos) in enumerate(rows_spec):
        bc = graph.conditions[v]
        roles = graph.roles(v)
        a_row = bc.b1[role_pos]
        b_row = bc.b2[role_pos]
        for p, (j, role) in enumerate(roles):
            col = j if role == "out" else k + j
            b1[row, col] = -a_row[p]
            b2[row, col] = b_row[p]
    beta = BoundaryCondition(np.hstack([b1, b2]))
    defect = np.linalg.norm(beta.matrix @ beta.matrix.conj().T - np.eye(len(rows_spec)))
    from .hamiltonian import symplectic_form

    j_defect = np.linalg.norm(beta.matrix @ symplectic_form(n_cols) @ beta.matrix.conj().T)
    if defect > STRUCT_TOL or j_defect > STRUCT_TOL:
        raise GraphError(
            f"assembled right condition failed property checks "
            f"(orthonormality {defect:.2e}, J-nullity {j_defect:.2e})"
        )
    return beta


def _beta_rows_compact(graph: QuantumGraph) -> list:
    rows = []
    for i, e in enumerate(graph.edges):
        v = e.initial
        rows.append((v, graph.roles(v).index((i, "out"))))
    for i, e in enumerate(graph.edges):
        v = e.terminal
        rows.append((v, graph.roles(v).index((i, "in"))))
    return rows


def _block_theta_report(sides: list) -> tuple:
    thetas = []
    for segs in sides:
        mini = Hamiltonian(2, segs)
        theta = detect_theta_form(mini)
        if theta is None:
            return ()
        thetas.append(theta)
    return tuple(thetas)


def compile_compact(graph: QuantumGraph) -> CompiledSystem:
    """Rewrite a compact graph as an order-4k canonical system on (0, 1)."""
    if graph.k_finite != graph.k:
        raise HasHalfLineError("graph has half-line edges; use compile_noncompact")
    k = graph.k
    sides = _side_segments(graph)
    segments = _merge_blocks(sides)
    ham = Hamiltonian(4 * k, segments, None)
    alpha = _neumann_kirchhoff_alpha(k)
    beta = _assemble_beta(graph, 2 * k, _beta_rows_compact(graph))
    thetas = _block_theta_report(sides)
    if thetas:
        warnings.warn(
            "every compiled block is a theta form; spectrum is a finite "
            "linear-algebra problem outside this engine's scope",
            NonDefiniteCompiledWarning,
        )
    maps = IndexMaps(tuple(e.name for e in graph.edges), k, interleave_perm(4 * k))
    return CompiledSystem(ham, alpha, beta, maps, thetas or None)


def _halfline_tail_theta(dyn: EdgeDynamics) -> ThetaLine | None:
    """Theta form of a half-line edge beyond the inserted midpoint vertex.

    The relevant part is local (1, inf): pieces past 1 plus the constant
    tail. Schrodinger dynamics are never of this form (their rank-one
    direction rotates), so only canonical data are examined.
    """
    if isinstance(dyn, SchrodingerDynamics):
        return None
    pieces = []
    pos = 0.0
    for ln, mat in dyn.pieces:
        hi = pos + ln
        if hi > 1.0 + 1e-12:
            pieces.append((hi - max(pos, 1.0), mat))
        pos = hi
    pieces.append((1.0, dyn.tail_value))
    segs = tuple(Segment(ln, ConstantMatrix(mat)) for ln, mat in pieces)
    theta = detect_theta_form(Hamiltonian(2, segs))
    if theta is None:
        return None
    if float(np.real(np.trace(dyn.tail_value))) <= 1e-14:
        raise GraphError("half-line coefficient is integrable; not a valid half-line edge")
    return theta


def _build_d_perm(k: int, kt: int) -> np.ndarray:
    """The tail shift permutation D (zero-based De_i = e_d[i]).

    Moves the half-line first components (k+kt..2k-1) down next to their
    second components so the frozen coordinates sit in one leading block;
    identity elsewhere. The literal index rules leave the ranges
    (3k+kt, 3k+2kt] unmapped, which only the identity completes to a
    permutation; the result is property-checked by the callers.
    """
    d = np.full(4 * k, -1, dtype=np.intp)
    for i in range(k + kt):
        d[i] = i
    for i in range(k - kt):
        d[2 * k - i - 1] = 3 * k + kt - i - 1
    for i in range(1, k + kt + 1):
        d[2 * k + i - 1] = k + kt + i - 1
    for i in range(3 * k + kt, 4 * k):
        d[i] = i
    if sorted(d.tolist()) != list(range(4 * k)):
        raise GraphError("tail shift permutation failed its property check")
    return d


def compile_noncompact(graph: QuantumGraph) -> CompiledSystem:
    """Rewrite a graph with half-line edges as a canonical system on (0, inf).

    The finite part on (0, 1) is assembled exactly as in the compact case;
    on (1, inf) the original vertex conditions act through the projection
    beta* beta on the frozen coordinates while the half-line blocks keep
    evolving, all in the basis shifted by D.
    """
    k, kt = graph.k, graph.k_finite
    if kt == k:
        raise HasHalfLineError("graph has no half-line edges; use compile_compact")
    for e in graph.edges[kt:]:
        theta = _halfline_tail_theta(e.dynamics)
        if theta is not None:
            raise IndefiniteTailError(
                f"half-line edge {e.name!r} is a theta form on its tail; "
                "apply reduce_indefinite_halflines first"
            )
    sides = _side_segments(graph)
    segments = _merge_blocks(sides)
    rows = []
    for i, e in enumerate(graph.edges):
        v = e.initial
        rows.append((v, graph.roles(v).index((i, "out"))))
    for i, e in enumerate(graph.edges[:kt]):
        v = e.terminal
        rows.append((v, graph.roles(v).index((i, "in"))))
    beta = _assemble_beta(graph, k + kt, rows)
    try:
        subtails = tuple(halfline_subtail(e.dynamics) for e in graph.edges[kt:])
    except ValueError as exc:
        raise IndefiniteTailError(str(exc)) from exc
    d_perm = _build_d_perm(k, kt)
    tail = CompositeTail(4 * k, d_perm, beta, subtails)
    ham = Hamiltonian(4 * k, segments, tail)
    alpha = _neumann_kirchhoff_alpha(k)
    keep_q = np.concatenate([np.arange(k + kt), np.arange(2 * k, 3 * k + kt)])
    keep_qp = np.concatenate([np.arange(k + kt, 2 * k), np.arange(3 * k + kt, 4 * k)])
    maps = IndexMaps(
        tuple(e.name for e in graph.edges),
        kt,
        interleave_perm(4 * k),
        d_perm,
        keep_q,
        keep_qp,
    )
    return CompiledSystem(ham, alpha, None, maps)


# ---------------------------------------------------------------------------
# indefinite half-line reduction


def _permute_roles(bc: BoundaryCondition, old_roles: list, new_roles: list) -> BoundaryCondition:
    """Reorder interface columns when edge reindexing permutes vertex roles."""
    if old_roles == new_roles:
        return bc
    perm = [old_roles.index(r) for r in new_roles]
    b1 = bc.b1[:, perm]
    b2 = bc.b2[:, perm]
    return BoundaryCondition(np.hstack([b1, b2]))


def reduce_indefinite_halflines(graph: QuantumGraph) -> QuantumGraph:
    """Truncate theta-form half lines to finite edges with a rank-one condition.

    A half-line coefficient h(x) P_theta with non-integrable h admits no
    square-integrable mass beyond the midpoint, so the half line past local
    coordinate 1 collapses to a vertex condition
    cos(theta) f_1 + sin(theta) f_2 = 0 there. Other edges are untouched.
    """
    reductions = {}
    for e in graph.edges:
        if not e.is_halfline:
            continue
        theta = _halfline_tail_theta(e.dynamics)
        if theta is not None:
            reductions[e.name] = theta.theta
    if not reductions:
        return graph

    new_edges = []
    new_vertices = list(graph.vertices)
    new_conditions = dict(graph.conditions)
    for e in graph.edges:
        if e.name not in reductions:
            new_edges.append(e)
            continue
        theta = reductions[e.name]
        cut_vertex = f"{e.name}__cut"
        while cut_vertex in new_vertices:
            cut_vertex += "_"
        new_vertices.append(cut_vertex)
        pieces = []
        pos = 0.0
        for ln, mat in e.dynamics.pieces:
            hi = min(pos + ln, 1.0)
            if hi - pos > 1e-14:
                pieces.append((hi - pos, mat))
            pos += ln
            if pos >= 1.0 - 1e-14:
                break
        if pos < 1.0 - 1e-14:
            pieces.append((1.0 - pos, e.dynamics.tail_value))
        truncated = Edge(
            e.name,
            e.initial,
            cut_vertex,
            0.5,
            CanonicalDynamics(tuple(pieces)),
        )
        new_edges.append(truncated)
        # terminal-role row (a, b) imposes -a f1 + b f2 = 0
        new_conditions[cut_vertex] = validate_boundary(
            [[-np.cos(theta), np.sin(theta)]]
        )
    order = [e for e in new_edges if not e.is_halfline] + [e for e in new_edges if e.is_halfline]
    old_graph_roles = {v: [(graph.edges[i].name, r) for i, r in graph.roles(v)] for v in graph.vertices}

    interim = QuantumGraph(tuple(new_vertices), tuple(order), new_conditions)
    for v in graph.vertices:
        new_named_roles = [(interim.edges[i].name, r) for i, r in interim.roles(v)]
        new_conditions[v] = _permute_roles(graph.conditions[v], old_graph_roles[v], new_named_roles)
    return QuantumGraph(tuple(new_vertices), tuple(order), new_conditions)


# ---------------------------------------------------------------------------
# the rewiring isometry on samples


def _compiled_vector(graph, maps, x: float, edge_values: dict) -> np.ndarray:
    """Assemble the compiled 4k-vector at x from per-edge local values.

    edge_values maps edge name -> callable(local coordinate) -> C^2.
    Beyond x = 1 only the half-line second halves survive.
    """
    k = len(maps.edges)
    out = np.zeros(4 * k, dtype=complex)
    for i, e in enumerate(graph.edges):
        r = e.half_length
        f = edge_values[e.name]
        if x <= 1.0:
            left = np.asarray(f(r - r * x), dtype=complex)
            out[maps.coordinate(i, 1, 0)] = -left[0]
            out[maps.coordinate(i, 1, 1)] = left[1]
            right = np.asarray(f(r + r * x), dtype=complex)
            out[maps.coordinate(i, 2, 0)] = right[0]
            out[maps.coordinate(i, 2, 1)] = right[1]
        elif e.is_halfline:
            right = np.asarray(f(1.0 + x), dtype=complex)
            out[maps.coordinate(i, 2, 0)] = right[0]
            out[maps.coordinate(i, 2, 1)] = right[1]
    return out


def rewiring_norm_pair(
    graph: QuantumGraph,
    compiled: CompiledSystem,
    edge_values: dict,
    order: int = 24,
    tail_extent: float = 1.0,
) -> tuple:
    """Weighted norms of a family of edge functions and of its rewiring.

    The graph-side norm integrates f* H_edge f in local coordinates; the
    compiled-side norm integrates the assembled vector against the compiled
    coefficient (finite part plus, for half lines, a tail stretch). The two
    are equal analytically; computing both exercises every permutation and
    scaling in the compilers.
    """
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    ham = compiled.ham
    compiled_sq = 0.0
    panels = [(float(a), float(b)) for a, b in zip(ham.breakpoints[:-1], ham.breakpoints[1:])]
    if ham.tail is not None and tail_extent > 0:
        cuts = {0.0, tail_extent}
        for sub in getattr(ham.tail, "subtails", ()):  # panel at sub-tail breakpoints
            pos = 0.0
            for seg in sub.segments:
                pos += seg.length
                if pos < tail_extent:
                    cuts.add(pos)
        scuts = sorted(cuts)
        panels += [(1.0 + a, 1.0 + b) for a, b in zip(scuts[:-1], scuts[1:])]
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        for xi, wi in zip(base_x, base_w):
            x = 0.5 * (lo + hi) + half * xi
            vec = _compiled_vector(graph, compiled.maps, x, edge_values)
            hval = ham.value(x)
            compiled_sq += half * wi * float(np.real(vec.conj() @ hval @ vec))

    graph_sq = 0.0
    for e in graph.edges:
        f = edge_values[e.name]
        end = 2 * e.half_length if not e.is_halfline else 2.0 + tail_extent
        cuts = {0.0, end}
        pos = 0.0
        for ln, _ in e.dynamics.pieces:
            pos += ln
            if pos < end:
                cuts.add(pos)
        scuts = sorted(cuts)
        for lo, hi in zip(scuts[:-1], scuts[1:]):
            half = 0.5 * (hi - lo)
            for xi, wi in zip(base_x, base_w):
                x = 0.5 * (lo + hi) + half * xi
                val = np.asarray(f(x), dtype=complex)
                hval = e.dynamics.value(x)
                graph_sq += half * wi * float(np.real(val.conj() @ hval @ val))
    return graph_sq, compiled_sq
