"""Simulated branch-and-bound search driven by entanglement detection."""

__version__ = "0.1.0"

from .copies import copies_required, delta_analytic, delta_simulated, overlap_grid
from .entdetect import (
    CopyEstimatorConfig,
    DetectionVerdict,
    PositiveMapSpec,
    SpaMap,
    analytic_test,
    choi_state,
    estimate_min_eigenvalue,
    ppt_test,
    purity_test,
    spa_test_estimated,
    spa_test_exact,
)
from .errors import CapExceededError, EntsearchError, ParseError
from .formula import (
    Assignment,
    Formula,
    count_solutions,
    enumerate_paths,
    evaluate,
    parse_dimacs,
    parse_expr,
)
from .hsearch import SearchConfig, classical_baseline, cost_model, search
from .oracle import RangeOracle, apply_oracle, oracle_unitary_check, post_oracle_state
from .qsim import (
    DensityOp,
    PureState,
    RegisterLayout,
    answer_state_closed_form,
    density_from_state,
    depolarize,
    inner_product,
    partial_trace,
    purity,
    uniform_superposition,
)
