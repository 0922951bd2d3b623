"""Command-line front end.

Subcommands: validate, compile, spectrum, mfunction, measure, green,
resolve, schr2cs. Data go to stdout or --out; progress and warnings go to
stderr. Exit codes: 0 ok, 1 input error, 2 numerical failure.

``CANOGRAPH_THREADS`` caps the linear-algebra thread count; it must be
honored before NumPy loads, so the heavy imports happen inside main().
"""

import argparse
import json
import os
import sys


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canograph",
        description="Spectral computations for canonical systems and quantum graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, fmt_default, choices=("json", "csv")):
        p.add_argument("path", help="graph or system description file (YAML)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=list(choices), default=fmt_default)

    sub.add_parser("validate", help="parse and validate a description file").add_argument("path")

    add_common(
        sub.add_parser("compile", help="compile to a canonical system"),
        "json",
        choices=("json", "yaml"),
    )

    p = sub.add_parser("spectrum", help="discrete spectrum in a window")
    add_common(p, "csv")
    p.add_argument("--window", nargs=2, type=float, required=True, metavar=("A", "B"))
    p.add_argument("--points", type=int, default=None, help="scan grid override")

    p = sub.add_parser("mfunction", help="m(z) on a list of points")
    add_common(p, "csv")
    p.add_argument("--points", required=True, help="file with one complex z per line")

    p = sub.add_parser("measure", help="Herglotz data (A, B, atoms) on a window")
    add_common(p, "json")
    p.add_argument("--window", nargs=2, type=float, required=True, metavar=("A", "B"))
    p.add_argument("--tol", type=float, default=None, help="truncation-tail tolerance")

    p = sub.add_parser("green", help="Green kernel G(x, y, z)")
    add_common(p, "json")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--z", type=str, required=True)

    p = sub.add_parser("resolve", help="apply the resolvent to a sampled function")
    add_common(p, "csv")
    p.add_argument("--h", required=True, help="CSV of x, components of h(x)")
    p.add_argument("--z", type=str, required=True)
    p.add_argument("--order", type=int, default=40, help="quadrature nodes per segment")

    p = sub.add_parser("schr2cs", help="convert Schrodinger edges to canonical form")
    add_common(p, "json", choices=("json", "yaml"))
    return parser


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _load_problem(path):
    from .fileio import GraphDocument, SystemDocument, load_path
    from .graph import compile_compact, compile_noncompact, reduce_indefinite_halflines
    from .schrodinger import schrodinger_graph_pipeline, transported_graph

    doc = load_path(path)
    if isinstance(doc, SystemDocument):
        return doc.problem(), doc
    graph = doc.graph
    if doc.frame == "schrodinger":
        compiled = schrodinger_graph_pipeline(graph)
    else:
        graph = reduce_indefinite_halflines(graph)
        if graph.k_finite == graph.k:
            compiled = compile_compact(graph)
        else:
            compiled = compile_noncompact(graph)
    return compiled.problem(), doc


def _matrix_entries(mat):
    from .fileio import format_scalar

    return [format_scalar(v) for v in mat.ravel()]


def _cmd_validate(args) -> int:
    from .fileio import GraphDocument, SystemDocument, load_path
    from .hamiltonian import is_definite

    doc = load_path(args.path)
    if isinstance(doc, SystemDocument):
        definite = is_definite(doc.ham)
        print(
            f"OK: canonical system of order {doc.ham.order}, "
            f"{len(doc.ham.segments)} segments, length {doc.ham.length}, "
            f"tail {type(doc.ham.tail).__name__ if doc.ham.tail else 'none'}, "
            f"{'definite' if definite else 'NOT definite'}"
        )
        return 0
    graph = doc.graph
    problem, _ = _load_problem(args.path)
    definite = is_definite(problem.ham)
    print(
        f"OK: {graph.k} edges, {len(graph.vertices)} vertices, "
        f"compiled order {problem.ham.order}, "
        f"{'definite' if definite else 'NOT definite'}"
    )
    return 0


def _cmd_compile(args) -> int:
    from .fileio import dump_yaml, system_to_dict

    problem, _ = _load_problem(args.path)
    doc = system_to_dict(problem.ham, problem.alpha, problem.beta)
    text = json.dumps(doc, indent=2) + "\n" if args.format == "json" else dump_yaml(doc)
    _emit(text, args.out)
    return 0


def _cmd_spectrum(args) -> int:
    from .fileio import format_scalar
    from .spectral import eigenvalues_in_window

    problem, _ = _load_problem(args.path)
    dec = eigenvalues_in_window(problem, tuple(args.window), scan_points=args.points)
    n = problem.n
    header = ["t", "multiplicity"] + [f"rho_{i}_{j}" for i in range(n) for j in range(n)]
    rows = []
    for t, mult, rho in zip(dec.eigenvalues, dec.multiplicities, dec.weights):
        rows.append([repr(float(t)), int(mult)] + _matrix_entries(rho))
    if args.format == "csv":
        _emit(_csv(rows, header), args.out)
    else:
        _emit(
            json.dumps(
                [
                    {"t": float(t), "multiplicity": int(m), "rho": [[format_scalar(v) for v in row] for row in rho]}
                    for t, m, rho in zip(dec.eigenvalues, dec.multiplicities, dec.weights)
                ],
                indent=2,
            )
            + "\n",
            args.out,
        )
    return 0


def _cmd_mfunction(args) -> int:
    from .fileio import parse_scalar
    from .spectral import AtEigenvalueError, MFunction

    problem, _ = _load_problem(args.path)
    with open(args.points, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    zs = []
    for ln in lines:
        parts = ln.split()
        zs.append(complex(float(parts[0]), float(parts[1])) if len(parts) == 2 else parse_scalar(ln))
    m = MFunction(problem)
    n = problem.n
    header = ["re_z", "im_z"] + [f"m_{i}_{j}" for i in range(n) for j in range(n)]
    rows = []
    for z in zs:
        try:
            rows.append([repr(z.real), repr(z.imag)] + _matrix_entries(m(z)))
        except AtEigenvalueError as exc:
            print(f"warning: {exc}", file=sys.stderr)
            rows.append([repr(z.real), repr(z.imag)] + ["nan"] * (n * n))
    _emit(_csv(rows, header), args.out)
    return 0


def _cmd_measure(args) -> int:
    from .fileio import format_matrix
    from .spectral import MFunction, eigenvalues_in_window, herglotz_decompose

    problem, _ = _load_problem(args.path)
    dec = eigenvalues_in_window(problem, tuple(args.window))
    data = herglotz_decompose(MFunction(problem), dec, tuple(args.window), tail_tol=args.tol)
    doc = {
        "a": format_matrix(data.a),
        "b": format_matrix(data.b),
        "atoms": [{"t": float(t), "rho": format_matrix(rho)} for t, rho in data.atoms],
        "window": list(data.window),
        "tail_bound": data.tail_bound,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_green(args) -> int:
    from .fileio import format_matrix, parse_scalar
    from .spectral import GreenKernel

    problem, _ = _load_problem(args.path)
    z = parse_scalar(args.z)
    kern = GreenKernel(problem, z)
    doc = {"x": args.x, "y": args.y, "z": str(z), "g": format_matrix(kern.value(args.x, args.y))}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_resolve(args) -> int:
    import numpy as np

    from .fileio import parse_scalar
    from .evolve import sample_function
    from .spectral import apply_resolvent

    problem, _ = _load_problem(args.path)
    z = parse_scalar(args.z)
    with open(args.h, "r", encoding="utf-8") as fh:
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    data = np.array([[parse_scalar(c) for c in row] for row in rows], dtype=complex)
    xs = data[:, 0].real
    comps = data[:, 1:]
    if comps.shape[1] != problem.ham.order:
        print(
            f"error: h has {comps.shape[1]} components, system order is {problem.ham.order}",
            file=sys.stderr,
        )
        return 1

    def h_fun(x):
        out = np.empty(comps.shape[1], dtype=complex)
        for j in range(comps.shape[1]):
            out[j] = np.interp(x, xs, comps[:, j].real) + 1j * np.interp(x, xs, comps[:, j].imag)
        return out

    h = sample_function(problem.ham, h_fun, order=args.order)
    g = apply_resolvent(problem, z, h)
    header = ["x"] + [f"g_{j}" for j in range(problem.ham.order)]
    out_rows = [[repr(float(x))] + _matrix_entries(v) for x, v in zip(g.nodes, g.values)]
    _emit(_csv(out_rows, header), args.out)
    return 0


def _cmd_schr2cs(args) -> int:
    from .fileio import GraphDocument, dump_yaml, graph_to_dict, load_path
    from .schrodinger import transported_graph

    doc = load_path(args.path)
    if not isinstance(doc, GraphDocument):
        print("error: schr2cs needs a graph document", file=sys.stderr)
        return 1
    if doc.frame == "canonical":
        converted = doc.graph
    else:
        converted = transported_graph(doc.graph)
    out = graph_to_dict(converted, frame="canonical")
    text = json.dumps(out, indent=2) + "\n" if args.format == "json" else dump_yaml(out)
    _emit(text, args.out)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "compile": _cmd_compile,
    "spectrum": _cmd_spectrum,
    "mfunction": _cmd_mfunction,
    "measure": _cmd_measure,
    "green": _cmd_green,
    "resolve": _cmd_resolve,
    "schr2cs": _cmd_schr2cs,
}


def main(argv=None) -> int:
    threads = os.environ.get("CANOGRAPH_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    args = _build_parser().parse_args(argv)
    from .fileio import FormatError
    from .graph import GraphError
    from .evolve import NoConvergenceError
    from .algebra import NotPSDError, NotSelfAdjointError, RankDeficientError
    from .hamiltonian import DichotomyFailureError, OutOfDomainError
    from .spectral import NotDefiniteError, RealZError, WindowTooSmallError

    try:
        return _COMMANDS[args.command](args)
    except (NoConvergenceError, DichotomyFailureError, NotDefiniteError,
            WindowTooSmallError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, FormatError, GraphError, NotPSDError,
            NotSelfAdjointError, RankDeficientError, OutOfDomainError,
            RealZError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
