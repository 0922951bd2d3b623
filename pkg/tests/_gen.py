"""Random problem generators shared across the test modules."""

import numpy as np

from canograph.algebra import validate_boundary
from canograph.graph import Edge, QuantumGraph, interface_preset
from canograph.hamiltonian import (
    CanonicalDynamics,
    ConstantMatrix,
    Hamiltonian,
    SchrodingerDynamics,
    Segment,
)


def random_psd(rng, m, floor=0.3):
    b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return b @ b.conj().T / m + floor * np.eye(m)


def random_boundary(rng, n):
    herm = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    herm = 0.5 * (herm + herm.conj().T)
    mix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return validate_boundary(mix @ np.hstack([herm, np.eye(n)]))


def random_regular_ham(rng, order, n_segs=3):
    segs = tuple(
        Segment(float(rng.uniform(0.2, 0.7)), ConstantMatrix(random_psd(rng, order)))
        for _ in range(n_segs)
    )
    return Hamiltonian(order, segs)


def random_custom_condition(rng, d):
    herm = rng.normal(size=(d, d))
    herm = 0.5 * (herm + herm.T)
    b2 = rng.normal(size=(d, d)) + np.eye(d)
    b1 = herm @ np.linalg.inv(b2).T
    return interface_preset("custom", d, b1=b1, b2=b2)


def _random_dynamics(rng, halfline, schrodinger):
    if schrodinger:
        n_pieces = rng.integers(1, 4)
        lens = rng.uniform(0.3, 0.8, n_pieces)
        pieces = tuple((float(ln), float(rng.uniform(-3, 3))) for ln in lens)
        if halfline:
            total = sum(ln for ln, _ in pieces)
            if total < 2.0:
                pieces += ((2.2 - total, float(rng.uniform(-2, 2))),)
            return SchrodingerDynamics(pieces, float(rng.uniform(-2, 2)))
        return SchrodingerDynamics(pieces)
    n_pieces = rng.integers(1, 4)
    lens = rng.uniform(0.3, 0.8, n_pieces)
    pieces = tuple((float(ln), random_psd(rng, 2).real) for ln in lens)
    if halfline:
        return CanonicalDynamics(pieces, random_psd(rng, 2).real)
    return CanonicalDynamics(pieces)


def random_graph(rng, n_vertices=3, n_halflines=1, schrodinger=False):
    """Connected random graph: a tree plus optional half lines."""
    vertices = tuple(f"v{i}" for i in range(n_vertices))
    edges = []
    for i in range(1, n_vertices):
        parent = int(rng.integers(0, i))
        src, dst = (parent, i) if rng.random() < 0.5 else (i, parent)
        dyn = _random_dynamics(rng, False, schrodinger)
        edges.append(Edge(f"e{i}", f"v{src}", f"v{dst}", dyn.total_length / 2.0, dyn))
    for h in range(n_halflines):
        v = int(rng.integers(0, n_vertices))
        dyn = _random_dynamics(rng, True, schrodinger)
        edges.append(Edge(f"h{h}", f"v{v}", None, 1.0, dyn))
    graph_edges = tuple(edges)
    conditions = {}
    probe_out = {v: [] for v in vertices}
    probe_in = {v: [] for v in vertices}
    for idx, e in enumerate(graph_edges):
        probe_out[e.initial].append(idx)
        if e.terminal is not None:
            probe_in[e.terminal].append(idx)
    for v in vertices:
        d = len(probe_out[v]) + len(probe_in[v])
        choice = rng.random()
        if choice < 0.4:
            conditions[v] = interface_preset("kirchhoff", d)
        elif choice < 0.6:
            conditions[v] = interface_preset("dirichlet", d)
        elif choice < 0.8:
            conditions[v] = interface_preset("delta", d, gamma=float(rng.uniform(-2, 2)))
        else:
            conditions[v] = random_custom_condition(rng, d)
    return QuantumGraph(vertices, graph_edges, conditions)


def random_edge_functions(rng, graph, tail_extent=1.0):
    """Smooth C^2-valued functions per edge, vanishing at the domain ends.

    The sine-squared window spans the whole integrated stretch (half lines
    are truncated at local 2 + tail_extent), so every quadrature panel sees
    a smooth integrand.
    """
    funcs = {}
    for e in graph.edges:
        a = rng.normal(size=4)
        b = rng.normal(size=4)
        cut = (2.0 + tail_extent) if e.is_halfline else 2 * e.half_length

        def f(x, a=a, b=b, cut=cut):
            if x >= cut:
                return np.zeros(2, dtype=complex)
            window = np.sin(np.pi * x / cut) ** 2
            return window * np.array(
                [
                    a[0] * np.cos(a[1] * x) + 1j * a[2] * np.sin(a[3] * x + 0.3),
                    b[0] * np.cos(b[1] * x + 0.1) + 1j * b[2] * x,
                ]
            )

        funcs[e.name] = f
    return funcs
