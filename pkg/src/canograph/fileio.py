"""Reading and writing the YAML description format and result serialization.

One document schema covers both bare canonical systems and quantum graphs;
see README.md for the field-by-field reference. Complex entries are
numbers or strings such as "1+2j"; all emitted numbers are full-precision
(round-trip) decimals.
"""

from dataclasses import dataclass

import numpy as np
import yaml

from .algebra import BoundaryCondition, validate_boundary
from .graph import Edge, GraphError, QuantumGraph, interface_preset
from .hamiltonian import (
    CanonicalDynamics,
    CompositeTail,
    ConstantMatrix,
    ConstantTail,
    Hamiltonian,
    PermutedBlocks,
    ProjectionTail,
    SchrodingerDynamics,
    SchrodingerInduced,
    SchrodingerUltimate,
    Segment,
    SubTail,
)


class FormatError(ValueError):
    """Malformed description document."""


def parse_scalar(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, complex):
        return value
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise FormatError(f"cannot parse complex scalar {value!r}") from exc
    raise FormatError(f"cannot parse complex scalar {value!r}")


def format_scalar(value) -> object:
    value = complex(value)
    if value.imag == 0.0:
        return float(value.real)
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real!r}{sign}{abs(value.imag)!r}j"


def parse_matrix(rows, shape=None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise FormatError("matrix must be a list of rows")
    mat = np.array([[parse_scalar(v) for v in row] for row in rows], dtype=complex)
    if shape is not None and mat.shape != shape:
        raise FormatError(f"matrix has shape {mat.shape}, expected {shape}")
    return mat


def format_matrix(mat) -> list:
    mat = np.asarray(mat, dtype=complex)
    return [[format_scalar(v) for v in row] for row in mat]


# ---------------------------------------------------------------------------
# graphs


def _parse_dynamics(spec: dict, name: str, halfline: bool):
    if "canonical" in spec:
        sub = spec["canonical"]
        pieces = tuple(
            (float(p["length"]), parse_matrix(p["matrix"], (2, 2))) for p in sub.get("pieces", [])
        )
        tail = parse_matrix(sub["tail"], (2, 2)) if "tail" in sub else None
        if halfline and tail is None:
            raise FormatError(f"edge {name!r}: half-line canonical dynamics need a tail matrix")
        return CanonicalDynamics(pieces, tail)
    for key in ("schrodinger", "canonical_induced"):
        if key in spec:
            sub = spec[key]
            pieces = tuple((float(p["length"]), float(p["potential"])) for p in sub.get("pieces", []))
            tail = sub.get("tail_potential")
            if halfline and tail is None:
                raise FormatError(f"edge {name!r}: half-line dynamics need tail_potential")
            return SchrodingerDynamics(pieces, None if tail is None else float(tail))
    raise FormatError(f"edge {name!r}: dynamics must be canonical, schrodinger, or canonical_induced")


def _parse_condition(spec: dict, degree: int, vertex: str) -> BoundaryCondition:
    try:
        if "preset" in spec:
            kind = spec["preset"]
            if kind == "delta":
                return interface_preset("delta", degree, gamma=float(spec.get("gamma", 0.0)))
            return interface_preset(kind, degree)
        if "custom" in spec:
            b1 = parse_matrix(spec["custom"]["b1"], (degree, degree))
            b2 = parse_matrix(spec["custom"]["b2"], (degree, degree))
            return interface_preset("custom", degree, b1=b1, b2=b2)
        if "matrix" in spec:
            return validate_boundary(parse_matrix(spec["matrix"], (degree, 2 * degree)))
    except (ValueError, KeyError) as exc:
        raise FormatError(f"condition at vertex {vertex!r}: {exc}") from exc
    raise FormatError(f"condition at vertex {vertex!r} needs preset, custom, or matrix")


@dataclass(frozen=True)
class GraphDocument:
    graph: QuantumGraph
    frame: str  # 'schrodinger': conditions in per-edge natural frames; 'canonical'


def parse_graph(doc: dict) -> GraphDocument:
    vertices = tuple(doc.get("vertices", []))
    raw_edges = doc.get("edges", [])
    if not raw_edges:
        raise FormatError("graph needs at least one edge")
    edges = []
    frame_votes = set()
    for spec in raw_edges:
        name = spec.get("name")
        if not name:
            raise FormatError("every edge needs a name")
        halfline = spec.get("halfline", False) or ("to" not in spec) or spec.get("to") is None
        dyn = _parse_dynamics(spec, name, halfline)
        frame_votes.add("canonical" if "canonical_induced" in spec else "natural")
        if halfline:
            edges.append(Edge(name, spec["from"], None, 1.0, dyn))
        else:
            r = spec.get("half_length")
            if r is None:
                r = dyn.total_length / 2.0
            edges.append(Edge(name, spec["from"], spec["to"], float(r), dyn))
    edges.sort(key=lambda e: e.is_halfline)  # stable: finite edges first
    frame = doc.get("frame")
    if frame is None:
        frame = "canonical" if frame_votes == {"canonical"} else "schrodinger"
    if frame not in ("schrodinger", "canonical"):
        raise FormatError(f"unknown frame {frame!r}")

    conditions = {}
    for v in vertices:
        deg = sum(1 for e in edges if e.initial == v) + sum(1 for e in edges if e.terminal == v)
        spec = doc.get("conditions", {}).get(v)
        if spec is None:
            raise FormatError(f"vertex {v!r} has no interface condition")
        conditions[v] = _parse_condition(spec, deg, v)
    try:
        graph = QuantumGraph(vertices, tuple(edges), conditions)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc
    return GraphDocument(graph, frame)


def graph_to_dict(graph: QuantumGraph, frame: str = "schrodinger") -> dict:
    edges = []
    for e in graph.edges:
        spec: dict = {"name": e.name, "from": e.initial}
        if not e.is_halfline:
            spec["to"] = e.terminal
            spec["half_length"] = float(e.half_length)
        else:
            spec["halfline"] = True
        if isinstance(e.dynamics, CanonicalDynamics):
            sub = {"pieces": [{"length": ln, "matrix": format_matrix(m)} for ln, m in e.dynamics.pieces]}
            if e.dynamics.tail_value is not None:
                sub["tail"] = format_matrix(e.dynamics.tail_value)
            spec["canonical"] = sub
        else:
            sub = {"pieces": [{"length": ln, "potential": v} for ln, v in e.dynamics.pieces]}
            if e.dynamics.tail_potential is not None:
                sub["tail_potential"] = e.dynamics.tail_potential
            key = "canonical_induced" if frame == "canonical" else "schrodinger"
            spec[key] = sub
        edges.append(spec)
    conditions = {
        v: {"matrix": format_matrix(graph.conditions[v].matrix)} for v in graph.vertices
    }
    return {
        "kind": "graph",
        "frame": frame,
        "vertices": list(graph.vertices),
        "edges": edges,
        "conditions": conditions,
    }


# ---------------------------------------------------------------------------
# bare systems


def _parse_part(spec: dict, order: int):
    if "matrix" in spec:
        return ConstantMatrix(parse_matrix(spec["matrix"], (order, order)))
    if "schrodinger" in spec:
        sub = spec["schrodinger"]
        return SchrodingerInduced(
            float(sub["potential"]),
            float(sub.get("x0", 0.0)),
            float(sub.get("scale", 1.0)),
            bool(sub.get("reflected", False)),
            parse_matrix(sub.get("t0", [[1, 0], [0, 1]]), (2, 2)).real,
        )
    if "blocks" in spec:
        sub = spec["blocks"]
        perm = np.asarray(sub["perm"], dtype=np.intp)
        blocks = tuple(_parse_part(item, 2) for item in sub["items"])
        return PermutedBlocks(perm, blocks)
    raise FormatError("segment needs matrix, schrodinger, or blocks")


def _format_part(part) -> dict:
    if isinstance(part, ConstantMatrix):
        return {"matrix": format_matrix(part.matrix)}
    if isinstance(part, SchrodingerInduced):
        return {
            "schrodinger": {
                "potential": part.v0,
                "x0": part.x0,
                "scale": part.scale,
                "reflected": bool(part.reflected),
                "t0": format_matrix(part.t0),
            }
        }
    if isinstance(part, PermutedBlocks):
        return {
            "blocks": {
                "perm": [int(i) for i in part.perm],
                "items": [_format_part(b) for b in part.blocks],
            }
        }
    raise TypeError(f"cannot serialize payload {type(part)!r}")


def _parse_subtail(spec: dict) -> SubTail:
    segs = tuple(Segment(float(s["length"]), _parse_part(s, 2)) for s in spec.get("segments", []))
    ult = spec["ultimate"]
    if "constant" in ult:
        ultimate = ConstantTail(parse_matrix(ult["constant"], (2, 2)))
    else:
        ultimate = SchrodingerUltimate(
            float(ult["potential"]),
            parse_matrix(ult.get("t_start", [[1, 0], [0, 1]]), (2, 2)).real,
        )
    return SubTail(segs, ultimate)


def _format_subtail(sub: SubTail) -> dict:
    out: dict = {
        "segments": [dict(length=s.length, **_format_part(s.part)) for s in sub.segments]
    }
    if isinstance(sub.ultimate, ConstantTail):
        out["ultimate"] = {"constant": format_matrix(sub.ultimate.matrix)}
    else:
        out["ultimate"] = {
            "potential": sub.ultimate.v_inf,
            "t_start": format_matrix(sub.ultimate.t_start),
        }
    return out


def _parse_tail(spec: dict, order: int):
    if "projection" in spec:
        return ProjectionTail(validate_boundary(parse_matrix(spec["projection"], (order // 2, order))))
    if "constant" in spec:
        return ConstantTail(parse_matrix(spec["constant"], (order, order)))
    if "composite" in spec:
        sub = spec["composite"]
        beta_rows = parse_matrix(sub["beta"])
        return CompositeTail(
            order,
            np.asarray(sub["d_perm"], dtype=np.intp),
            BoundaryCondition(beta_rows),
            tuple(_parse_subtail(s) for s in sub["subtails"]),
        )
    raise FormatError("tail needs projection, constant, or composite")


@dataclass(frozen=True)
class SystemDocument:
    ham: Hamiltonian
    alpha: BoundaryCondition
    beta: BoundaryCondition | None

    def problem(self):
        from .spectral import SpectralProblem

        return SpectralProblem(self.ham, self.alpha, self.beta)


def parse_system(doc: dict) -> SystemDocument:
    segments = []
    raw_segments = doc.get("segments", [])
    if not raw_segments:
        raise FormatError("system needs at least one segment")
    alpha_rows = parse_matrix(doc["alpha"])
    order = alpha_rows.shape[1]
    for spec in raw_segments:
        segments.append(Segment(float(spec["length"]), _parse_part(spec, order)))
    tail = _parse_tail(doc["tail"], order) if "tail" in doc else None
    beta = None
    if "beta" in doc:
        beta = validate_boundary(parse_matrix(doc["beta"], (order // 2, order)))
    if beta is None and tail is None:
        raise FormatError("system needs beta or a tail")
    ham = Hamiltonian(order, tuple(segments), tail)
    return SystemDocument(ham, validate_boundary(alpha_rows), beta)


def system_to_dict(ham: Hamiltonian, alpha: BoundaryCondition, beta: BoundaryCondition | None) -> dict:
    doc: dict = {
        "kind": "system",
        "alpha": format_matrix(alpha.matrix),
        "segments": [dict(length=s.length, **_format_part(s.part)) for s in ham.segments],
    }
    if beta is not None:
        doc["beta"] = format_matrix(beta.matrix)
    tail = ham.tail
    if isinstance(tail, ProjectionTail):
        doc["tail"] = {"projection": format_matrix(tail.beta.matrix)}
    elif isinstance(tail, ConstantTail):
        doc["tail"] = {"constant": format_matrix(tail.matrix)}
    elif isinstance(tail, CompositeTail):
        doc["tail"] = {
            "composite": {
                "d_perm": [int(i) for i in tail.d_perm],
                "beta": format_matrix(tail.beta.matrix),
                "subtails": [_format_subtail(s) for s in tail.subtails],
            }
        }
    return doc


# ---------------------------------------------------------------------------
# entry points


def parse_document(doc: dict):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise FormatError("document needs a 'kind' field (graph or system)")
    if doc["kind"] == "graph":
        return parse_graph(doc)
    if doc["kind"] == "system":
        return parse_system(doc)
    raise FormatError(f"unknown document kind {doc['kind']!r}")


def load_path(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return parse_document(doc)


def dump_yaml(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
