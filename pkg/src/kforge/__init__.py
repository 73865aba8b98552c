"""kforge: exact deformation families for finite-dimensional dgLas.

Everything runs over the Gaussian rationals, so each advertised identity
(splitting, gauge, equivariance) is certified as a literal equality.
"""

from .builders import (
    build_conjugation_action,
    build_gl2_odd_anticommutator,
    build_torus_constant_dgla,
    build_toy3,
    build_twisted_dolbeault,
)
from .dgla import (
    DgLa,
    GradedElement,
    GradedOperator,
    GradedSpace,
    emit_dgla,
    make_space,
    parse_dgla,
    validate_dgla,
)
from .equivariance import (
    GroupAction,
    InfinitesimalAction,
    average_metric,
    check_family_equivariance,
    check_infinitesimal_equivariance,
    emit_action,
    group_closure,
    induced_harmonic_action,
    parse_action,
    validate_action,
)
from .errors import (
    InputError,
    InternalCheckError,
    KforgeError,
    MetricError,
    ResourceGuardError,
)
from .hodge import (
    HodgeData,
    MetricData,
    adjoint_differential,
    betti_numbers,
    hodge_data,
    identity_metric,
    make_metric,
    parse_metric,
)
from .kuranishi import (
    KuranishiFamily,
    elliptic_residual,
    gauge_transform,
    kuranishi_map,
    mc_residual,
    slice_residual,
    solve_kuranishi,
)
from .linalg import (
    Matrix,
    is_positive_definite_hermitian,
    kernel_basis,
    rank,
    solve_linear,
)
from .scalars import GaussianRational, qi, scalar_from_json, scalar_to_json
from .series import (
    GradedSeries,
    Poly,
    apply_operator,
    evaluate_series,
    series_bracket,
    series_from_json,
    series_to_json,
    substitute_linear,
)

__version__ = "0.1.0"
