"""crformal: exact formal power series, generic submanifolds of C^N and
certified invariants of the holomorphic map germs between them."""

from .errors import (
    CrformalError,
    InputRejectedError,
    InternalInconsistencyError,
    ParseError,
    PreconditionError,
    ScenarioError,
    SingularLinearPartError,
    StructuralError,
    TruncationError,
)
from .gaussian import GaussianRational, gr
from .localalg import (
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    UNKNOWN,
    CodimensionResult,
    Verdict,
    codimension,
    codimension_clamped,
    generic_rank,
    local_dimension_is,
)
from .manifold import (
    FormalGenericSubmanifold,
    graph_solve,
    ingest,
    normalize,
    verify_normal_form,
    verify_reality,
)
from .mapping import (
    FormalMapPair,
    SeedSpec,
    attach,
    cr_transversal_raw,
    generate_audit_triple,
    theorem_audit,
    transversal_raw,
)
from .series import (
    TruncatedSeries,
    VariableContext,
    compose,
    full_context,
    invert_unit,
    jacobian,
    map_context,
    reverse,
    series_determinant,
    zw_context,
)
from .expr import format_series, parse_expression

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
