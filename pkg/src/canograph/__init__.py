"""Spectral data of canonical systems Ju' = -zHu on intervals, half lines,
and quantum graphs, via exact transfer-matrix propagation and compilation
of graphs into higher-order canonical systems."""

from ._kernels import BACKEND as kernel_backend
from .algebra import BoundaryCondition, kernel_basis, mat_exp, symplectic_form, validate_boundary
from .evolve import (
    FundamentalSolution,
    SampledFunction,
    fundamental_solution,
    sample_function,
    segment_transfer,
    weighted_gram,
)
from .graph import (
    CompiledSystem,
    Edge,
    QuantumGraph,
    compile_compact,
    compile_noncompact,
    interface_preset,
    reduce_indefinite_halflines,
)
from .hamiltonian import (
    CanonicalDynamics,
    ConstantMatrix,
    ConstantTail,
    Hamiltonian,
    ProjectionTail,
    SchrodingerDynamics,
    SchrodingerInduced,
    Segment,
    detect_theta_form,
    is_definite,
    reflect_and_scale,
)
from .schrodinger import (
    lift_scalar,
    schrodinger_graph_pipeline,
    schrodinger_to_canonical,
    transport_interface,
)
from .spectral import (
    GreenKernel,
    HerglotzData,
    MFunction,
    SpectralDecomposition,
    SpectralProblem,
    apply_resolvent,
    atom_weight_from_m,
    eigenvalues_in_window,
    green,
    herglotz_decompose,
    m_halfline,
    m_regular,
    stieltjes_inversion,
    transform_U,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "BoundaryCondition",
    "validate_boundary",
    "mat_exp",
    "kernel_basis",
    "symplectic_form",
    "Hamiltonian",
    "Segment",
    "ConstantMatrix",
    "SchrodingerInduced",
    "ConstantTail",
    "ProjectionTail",
    "CanonicalDynamics",
    "SchrodingerDynamics",
    "reflect_and_scale",
    "detect_theta_form",
    "is_definite",
    "FundamentalSolution",
    "fundamental_solution",
    "segment_transfer",
    "weighted_gram",
    "SampledFunction",
    "sample_function",
    "SpectralProblem",
    "MFunction",
    "m_regular",
    "m_halfline",
    "GreenKernel",
    "green",
    "apply_resolvent",
    "eigenvalues_in_window",
    "SpectralDecomposition",
    "transform_U",
    "herglotz_decompose",
    "HerglotzData",
    "stieltjes_inversion",
    "atom_weight_from_m",
    "QuantumGraph",
    "Edge",
    "interface_preset",
    "compile_compact",
    "compile_noncompact",
    "reduce_indefinite_halflines",
    "CompiledSystem",
    "schrodinger_graph_pipeline",
    "schrodinger_to_canonical",
    "transport_interface",
    "lift_scalar",
]
