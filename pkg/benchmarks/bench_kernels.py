"""Benchmark the compiled transfer kernels against the NumPy fallback.

Measures the raw kernel primitives and an end-to-end eigenvalue scan
(the hot path of the spectral engine). Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from canograph import _kernels
from canograph._kernels import fallback

try:
    from canograph._kernels import _core
except ImportError:
    _core = None


def _time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_const_transfers(n_points=20000):
    print(f"\nconst_transfers, {n_points} spectral points")
    rng = np.random.default_rng(0)
    for order in (2, 4, 12):
        b = rng.normal(size=(order, order))
        h = b @ b.T + 0.3 * np.eye(order)
        j = np.zeros((order, order))
        j[: order // 2, order // 2 :] = -np.eye(order // 2)
        j[order // 2 :, : order // 2] = np.eye(order // 2)
        gen = (j @ h).astype(complex)
        coef = (rng.uniform(-50, 50, n_points) * 0.37).astype(complex)
        t_py = _time(lambda: fallback.const_transfers(gen, coef))
        line = f"  order {order:2d}:  numpy {t_py * 1e3:8.2f} ms"
        if _core is not None:
            t_c = _time(lambda: _core.const_transfers(gen, coef))
            line += f"   compiled {t_c * 1e3:8.2f} ms   speedup {t_py / t_c:5.2f}x"
        print(line)


def bench_schrodinger_core(n_points=20000, n_steps=4):
    print(f"\nschrodinger_core, {n_points} spectral points x {n_steps} steps")
    rng = np.random.default_rng(1)
    zs = rng.uniform(-40, 40, n_points) + 1j * rng.uniform(0.01, 2, n_points)
    steps = rng.uniform(-1, 1, n_steps)
    t_py = _time(lambda: fallback.schrodinger_core(1.5, steps, zs))
    line = f"  numpy {t_py * 1e3:8.2f} ms"
    if _core is not None:
        t_c = _time(lambda: _core.schrodinger_core(1.5, steps, zs))
        line += f"   compiled {t_c * 1e3:8.2f} ms   speedup {t_py / t_c:5.2f}x"
    print(line)


def bench_star_scan():
    """End-to-end: spectrum of the equilateral 3-star on (0.5, 45)."""
    from canograph.graph import Edge, QuantumGraph, interface_preset
    from canograph.hamiltonian import SchrodingerDynamics
    from canograph.schrodinger import schrodinger_graph_pipeline
    from canograph.spectral import eigenvalues_in_window

    edges = tuple(
        Edge(f"e{i}", f"t{i}", "c", 0.5, SchrodingerDynamics(((1.0, 0.0),))) for i in range(3)
    )
    conds = {f"t{i}": interface_preset("dirichlet", 1) for i in range(3)}
    conds["c"] = interface_preset("kirchhoff", 3)
    graph = QuantumGraph(("t0", "t1", "t2", "c"), edges, conds)
    problem = schrodinger_graph_pipeline(graph).problem()

    print("\nend-to-end star-graph eigenvalue scan, window (0.5, 45)")
    results = {}
    # "compiled" is the shipped hybrid: NumPy const transfers, compiled
    # Schrodinger kernels; "numpy" is the pure fallback
    backends = [("numpy", fallback)] + ([("compiled", _core)] if _core is not None else [])
    saved = (_kernels.schrodinger_transfer, _kernels.schrodinger_core)
    try:
        for name, impl in backends:
            _kernels.schrodinger_transfer = impl.schrodinger_transfer
            _kernels.schrodinger_core = impl.schrodinger_core
            t = _time(lambda: eigenvalues_in_window(problem, (0.5, 45.0)), repeats=3)
            results[name] = t
            print(f"  {name:9s} {t * 1e3:8.1f} ms")
    finally:
        _kernels.schrodinger_transfer, _kernels.schrodinger_core = saved
    if len(results) == 2:
        print(f"  speedup {results['numpy'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    print(f"active backend: {_kernels.BACKEND}")
    if _core is None:
        print("compiled extension not built; benchmarking the fallback only")
    bench_const_transfers()
    bench_schrodinger_core()
    bench_star_scan()
