"""Schrodinger edges -y'' + V y = z y and their canonical-system form.

With p, q the zero-energy solutions (p'(0) = 1 = q(0), q'(0) = 0 = p(0)
at the edge's left endpoint) and T = [[p', q'], [p, q]], the substitution
f_tilde = T^(-1) (f', f) turns the equation into Ju' = -zHu with
H = [[p^2, pq], [pq, q^2]], vertex conditions conjugate by the endpoint
frames, and f -> T^(-1) (0, f) is an isometry of the underlying spaces.
"""

import numpy as np

from .algebra import BoundaryCondition, validate_boundary
from .graph import (
    CompiledSystem,
    QuantumGraph,
    compile_compact,
    compile_noncompact,
    reduce_indefinite_halflines,
)
from .hamiltonian import (
    SchrodingerDynamics,
    SchrodingerInduced,
    Segment,
    _schrodinger_breaks,
)


def induced_segments(dyn: SchrodingerDynamics, upto: float | None = None) -> tuple:
    """Canonical segments realizing H = [[p^2, pq], [pq, q^2]] on the edge.

    Unsplit, in local edge coordinates from the left endpoint (where the
    zero-energy frame is the identity).
    """
    end = dyn.total_length if upto is None else upto
    segs = []
    for lo, hi, v in _schrodinger_breaks(dyn, 0.0, end):
        segs.append(Segment(hi - lo, SchrodingerInduced(v, lo, 1.0, False, dyn.frame_at(lo))))
    return tuple(segs)


def schrodinger_to_canonical(dyn: SchrodingerDynamics) -> tuple:
    """Alias of :func:`induced_segments`: the edge's canonical dynamics."""
    return induced_segments(dyn)


def schrodinger_halfline(dyn: SchrodingerDynamics):
    """Order-2 half-line canonical system for -y'' + Vy = zy on (0, inf).

    The finite pieces become induced segments; the eventually constant
    potential becomes an order-2 tail whose decaying direction is
    exp(-sqrt(v_inf - z) x) pulled through the zero-energy frame.
    """
    from .hamiltonian import Hamiltonian, SchrodingerUltimate, SubTail

    if dyn.tail_potential is None:
        raise ValueError("half-line dynamics need an eventually constant potential")
    segs = induced_segments(dyn)
    end = dyn.total_length
    tail = SubTail((), SchrodingerUltimate(dyn.tail_potential, dyn.frame_at(end)))
    return Hamiltonian(2, segs, tail)


_N_SIGNS = np.diag([-1.0, 1.0])


def transport_interface(bc: BoundaryCondition, frames: list, roles: list) -> BoundaryCondition:
    """Conjugate a vertex condition by the incident zero-energy frames.

    ``frames[p]`` is T evaluated at the vertex-side endpoint of the p-th
    incident edge (identity at initial vertices by the frame normalization);
    ``roles[p]`` is 'out' or 'in'. The interface vectors carry a sign on
    the first components of incoming edges, so their frames act as
    N T N with N = diag(-1, 1). Unit determinants make the conjugation
    preserve rank and the vanishing of the symplectic form, and the result
    is re-orthonormalized.
    """
    if len(frames) != bc.n or len(roles) != bc.n:
        raise ValueError("one frame and role per incident edge is required")
    d = bc.n
    blocks = []
    for t, role in zip(frames, roles):
        t = np.asarray(t, dtype=float)
        if abs(np.linalg.det(t) - 1.0) > 1e-9:
            raise ValueError("interface frames must have determinant 1")
        blocks.append(t if role == "out" else _N_SIGNS @ t @ _N_SIGNS)
    from .hamiltonian import interleave_perm

    perm = interleave_perm(2 * d)
    big = np.zeros((2 * d, 2 * d))
    for p, b in enumerate(blocks):
        rows = perm[[2 * p, 2 * p + 1]]
        big[np.ix_(rows, rows)] = b
    return validate_boundary(bc.matrix @ big)


def lift_scalar(dyn: SchrodingerDynamics, xs, fvals) -> np.ndarray:
    """The isometry f -> T^(-1) (0, f) on sampled scalar values.

    Componentwise T^(-1) (0, f) = f (-q', p'); the weighted norm of the
    output equals the plain L^2 norm of f because T^(-*) H T^(-1)
    collapses to diag(0, 1).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    fvals = np.atleast_1d(np.asarray(fvals, dtype=complex))
    out = np.empty((xs.size, 2), dtype=complex)
    for i, x in enumerate(xs):
        t = dyn.frame_at(x)
        out[i, 0] = -t[0, 1] * fvals[i]
        out[i, 1] = t[0, 0] * fvals[i]
    return out


def project_scalar(dyn: SchrodingerDynamics, xs, vecs) -> np.ndarray:
    """Inverse of the lift on function values: f = p u_1 + q u_2."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    vecs = np.asarray(vecs, dtype=complex)
    out = np.empty(xs.size, dtype=complex)
    for i, x in enumerate(xs):
        t = dyn.frame_at(x)
        out[i] = t[1, 0] * vecs[i, 0] + t[1, 1] * vecs[i, 1]
    return out


def transported_graph(graph: QuantumGraph) -> QuantumGraph:
    """Conjugate every vertex condition into canonical coordinates.

    Canonical edges contribute identity frames; Schrodinger edges
    contribute their zero-energy frames at the vertex-side endpoint.
    """
    new_conditions = {}
    for v in graph.vertices:
        frames, roles = [], []
        for i, role in graph.roles(v):
            e = graph.edges[i]
            if isinstance(e.dynamics, SchrodingerDynamics):
                if role == "out":
                    frames.append(np.eye(2))
                else:
                    frames.append(e.dynamics.frame_at(2 * e.half_length))
            else:
                frames.append(np.eye(2))
            roles.append(role)
        new_conditions[v] = transport_interface(graph.conditions[v], frames, roles)
    return QuantumGraph(graph.vertices, graph.edges, new_conditions)


def schrodinger_graph_pipeline(graph: QuantumGraph) -> CompiledSystem:
    """Full conversion: transport conditions, reduce degenerate half lines,
    and compile to a single higher-order canonical system."""
    converted = transported_graph(graph)
    converted = reduce_indefinite_halflines(converted)
    if converted.k_finite == converted.k:
        return compile_compact(converted)
    return compile_noncompact(converted)
