"""Interior-penalty discontinuous Galerkin solvers, plain and statically
condensed, on polygonal meshes built by triangle agglomeration."""

__version__ = "0.1.0"

from .assembly import (
    BlockSystem,
    ConstraintBlock,
    DGSolution,
    assemble_constraints,
    assemble_sip,
    error_norms,
    triple_norm,
)
from .basis import BasisSpec, dim, eval_basis
from .condensation import (
    LocalCondensation,
    condense,
    kernel_basis,
    local_particular_solution,
    reconstruct,
    reduce_system,
)
from .convergence import (
    ConvergenceRow,
    emit_csv,
    emit_plotdata,
    parse_csv,
    run_convergence,
)
from .expressions import Expr, parse_expr
from .mesh import (
    Facet,
    PolyMesh,
    QualityReport,
    TriMesh,
    agglomerate,
    build_topology,
    generate_background,
    load_mesh_json,
    quality_report,
    save_mesh_json,
    unit_square_poly_mesh,
)
from .problem import (
    CoefficientField,
    ExactSolution,
    ProblemSpec,
    builtin_case,
    from_expressions,
    load_problem,
)
from .quadrature import QuadRule, integrate, segment_rule, triangle_rule
from .solve import (
    SolveReport,
    default_gamma,
    run_saddle_oracle,
    run_scsip,
    run_sip,
    solve_spd,
    symmetric_factor,
)

__all__ = [
    "BasisSpec", "BlockSystem", "CoefficientField", "ConstraintBlock",
    "ConvergenceRow", "DGSolution", "ExactSolution", "Expr", "Facet",
    "LocalCondensation", "PolyMesh", "ProblemSpec", "QuadRule",
    "QualityReport", "SolveReport", "TriMesh",
    "agglomerate", "assemble_constraints", "assemble_sip", "build_topology",
    "builtin_case", "condense", "default_gamma", "dim", "emit_csv",
    "emit_plotdata", "error_norms", "eval_basis", "from_expressions",
    "generate_background", "integrate", "kernel_basis", "load_mesh_json",
    "load_problem", "local_particular_solution", "parse_csv", "parse_expr",
    "quality_report", "reconstruct", "reduce_system", "run_convergence",
    "run_saddle_oracle", "run_scsip", "run_sip", "save_mesh_json",
    "segment_rule", "solve_spd", "symmetric_factor", "triangle_rule",
    "triple_norm", "unit_square_poly_mesh",
]
