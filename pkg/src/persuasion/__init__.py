"""Signaling schemes for multi-receiver persuasion with binary actions."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatchError,
    InstanceTooLargeError,
    InvalidDistributionError,
    InvalidInstanceError,
    InvalidSubsetError,
    PersuasionError,
    SolverStalledError,
    UnknownStateError,
    UnsupportedObjectiveError,
    WrongArityError,
)
from .evaluate import check_persuasive, evaluate, multilinear_exact, sender_utility_exact, sender_utility_mc
from .instance import PersuasionInstance, classify_states, load_instance, validate_instance
from .lp import LinearProgram, solve_lp, solve_with_column_generation
from .oblivious import (
    correlation_gap_estimate,
    gen_oblivious_lowerbound,
    independent_value_exact,
    oblivious_marginals,
    signal_independent,
)
from .oracles import maximize_plus_additive
from .private_exact import solve_private_column_generation, solve_private_enumeration
from .public_exact import gen_gap_example, solve_public_enumeration
from .schemes import FractionalKUniform, IndependentScheme, PrivateScheme, PublicScheme, load_scheme
from .setfunctions import Additive, Anonymous, Coverage, ExplicitTable, SupermodularQuadratic
from .submodular import (
    continuous_greedy,
    k_from_epsilon,
    multilinear_estimate,
    multilinear_gradient_estimate,
    signal_runtime,
    solve_private_submodular,
)

__all__ = [
    "__version__",
    "Additive",
    "Anonymous",
    "Coverage",
    "DimensionMismatchError",
    "ExplicitTable",
    "FractionalKUniform",
    "IndependentScheme",
    "InstanceTooLargeError",
    "InvalidDistributionError",
    "InvalidInstanceError",
    "InvalidSubsetError",
    "LinearProgram",
    "PersuasionError",
    "PersuasionInstance",
    "PrivateScheme",
    "PublicScheme",
    "SolverStalledError",
    "SupermodularQuadratic",
    "UnknownStateError",
    "UnsupportedObjectiveError",
    "WrongArityError",
    "check_persuasive",
    "classify_states",
    "continuous_greedy",
    "correlation_gap_estimate",
    "evaluate",
    "gen_gap_example",
    "gen_oblivious_lowerbound",
    "independent_value_exact",
    "k_from_epsilon",
    "load_instance",
    "load_scheme",
    "maximize_plus_additive",
    "multilinear_estimate",
    "multilinear_exact",
    "multilinear_gradient_estimate",
    "oblivious_marginals",
    "sender_utility_exact",
    "sender_utility_mc",
    "signal_independent",
    "signal_runtime",
    "solve_lp",
    "solve_private_column_generation",
    "solve_private_enumeration",
    "solve_private_submodular",
    "solve_public_enumeration",
    "solve_with_column_generation",
    "validate_instance",
]
