"""SIAC line filtering for 2D discontinuous Galerkin fields."""

from .splines import (
    CentralBSpline,
    Direction2,
    bspline_derivative,
    bspline_eval,
    directional_dd_binomial_expansion,
    directional_divided_difference,
    divided_difference_1d,
    line_bspline,
)
from .kernel import (
    LineKernel,
    SiacKernel,
    change_of_basis,
    kernel_breakpoints,
    kernel_eval,
    line_kernel_eval,
    reproduction_residual,
    solve_kernel_coefficients,
)
from .dg import (
    FieldFormatError,
    ModalField2D,
    UniformMesh2D,
    UnstableTimeStep,
    evaluate_field,
    l2_error,
    load_field,
    project_initial,
    save_field,
    solve_advection,
)
from .filtering import (
    FilterConfig,
    FilterConfigError,
    OpCounters,
    RegionDecomposition,
    brute_force_filter_point,
    filter_field,
    filter_point,
    filter_point_line,
    filter_point_tensor,
    filtered_l2_error,
    line_footprint,
    tensor_footprint,
)
from .harness import (
    ConvergenceReport,
    SliceProfile,
    run_contours,
    run_convergence_study,
    run_counts_timing,
    run_slices,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
