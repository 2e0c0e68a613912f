"""Duopoly marketing over a social network: hybrid opinion dynamics,
one-shot campaign equilibria and multi-stage coopetition strategies."""
from .dynamics import InfluencePower, flow, influence_power, jump, opinion_vector, propagator
from .errors import InapplicableRegimeError, NumericalQualityError, ParameterError, UnsupportedConfigurationError
from .graph import GraphSpec, build_laplacian, cascading_benchmark, is_strongly_connected, root_nodes
from .linalg import matrix_exponential
from .stage_game import (
    GameParameters,
    NodeRegime,
    Regime,
    best_response,
    budget_threshold,
    eta,
    node_regime,
    one_shot_ne,
    unit_schedule,
    play_stage,
    stage_utilities,
)
from .strategy import (
    EquilibriumRegime,
    History,
    StrategyProfile,
    check_sustainability,
    contraction_trace,
    convergence_stage,
    long_term_utility,
    predict_equilibrium,
    run_profile,
    sustainability_certificate,
)

__version__ = "0.1.0"
