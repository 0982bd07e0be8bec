"""
gqdemon - global quantum discord and Maxwell-demon work extraction for multi-qubit states.
"""

__version__ = "0.1.1"

from .correlations import (  # noqa: E402
    chained_decomposition,
    gqd_fixed,
    mid_multipartite,
    original_qd_fixed,
    thermal_qd_fixed,
)
from .demon import run_protocol, simulate_schmidt_circuit  # noqa: E402
from .errors import (  # noqa: E402
    GQDemonError,
    LabelError,
    NumericalError,
    StateSpecError,
    ValidationError,
)
from .measurement import ProductBasisSpec, QubitBasis, apply_channel, make_basis  # noqa: E402
from .optimizer import (  # noqa: E402
    CandidateGrid,
    MinimizationResult,
    minimize_chained,
    minimize_gqd,
    minimize_thermal_qd,
)
from .qcore import DensityMatrix, PureState, partial_trace, von_neumann_entropy  # noqa: E402
from .states import (  # noqa: E402
    StateFamilySpec,
    make_classical,
    make_ghz,
    make_schmidt,
    make_w,
    make_w_ghz,
    make_werner_ghz,
    random_mixed,
    random_pure,
)

__all__ = [
    "CandidateGrid",
    "DensityMatrix",
    "GQDemonError",
    "LabelError",
    "MinimizationResult",
    "NumericalError",
    "ProductBasisSpec",
    "PureState",
    "QubitBasis",
    "StateFamilySpec",
    "StateSpecError",
    "ValidationError",
    "apply_channel",
    "chained_decomposition",
    "gqd_fixed",
    "make_basis",
    "make_classical",
    "make_ghz",
    "make_schmidt",
    "make_w",
    "make_w_ghz",
    "make_werner_ghz",
    "mid_multipartite",
    "minimize_chained",
    "minimize_gqd",
    "minimize_thermal_qd",
    "original_qd_fixed",
    "partial_trace",
    "random_mixed",
    "random_pure",
    "run_protocol",
    "simulate_schmidt_circuit",
    "thermal_qd_fixed",
    "von_neumann_entropy",
]
