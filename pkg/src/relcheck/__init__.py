"""relcheck: relational probabilistic model checking for MDPs.

Decides weighted comparisons of reachability and Buchi probabilities across
initial states and schedulers (including conjunctive, multi-objective
variants) over exact rational arithmetic, and synthesizes witness
schedulers.
"""

from .api import check_query
from .core import (
    Dtmc,
    ExplicitMemoryScheduler,
    MDScheduler,
    Mdp,
    MRScheduler,
    RewardStructure,
    convex_combine,
    induce_dtmc,
    validate_mdp,
)
from .errors import RelcheckError
from .graph import Mec, mec_decomposition, mec_in_family, mec_quotient, reward_quotient
from .model_io import (
    LoadedModel,
    emit_model,
    normalize,
    parse_model,
    parse_property,
    parse_property_file,
)
from .moa import solve_conjrelreach
from .oracle import (
    enumerate_md_schedulers,
    gen_3sat_conjrelreach,
    gen_hamiltonian_instance,
    gen_sat_relbuechi,
    oracle_relbuechi_md,
    oracle_relreach_md,
)
from .query import Operator, Predicate, RelationalQuery
from .relbuechi import solve_relbuechi, transfer_md_witness
from .relreach import CheckResult, Verdict, detect_fast_path, solve_relreach
from .rewards import RewardBounds, expected_reward_of, max_expected_reward, min_expected_reward
from .unfolding import (
    Combination,
    build_combined,
    collect_combinations,
    combination_rewards,
    goal_unfold,
    predicate_rewards,
    preprocess_combined,
)

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "Combination",
    "Dtmc",
    "ExplicitMemoryScheduler",
    "LoadedModel",
    "MDScheduler",
    "MRScheduler",
    "Mdp",
    "Mec",
    "Operator",
    "Predicate",
    "RelationalQuery",
    "RelcheckError",
    "RewardBounds",
    "RewardStructure",
    "Verdict",
    "build_combined",
    "check_query",
    "collect_combinations",
    "combination_rewards",
    "convex_combine",
    "detect_fast_path",
    "emit_model",
    "enumerate_md_schedulers",
    "expected_reward_of",
    "gen_3sat_conjrelreach",
    "gen_hamiltonian_instance",
    "gen_sat_relbuechi",
    "goal_unfold",
    "induce_dtmc",
    "max_expected_reward",
    "mec_decomposition",
    "mec_in_family",
    "mec_quotient",
    "min_expected_reward",
    "normalize",
    "oracle_relbuechi_md",
    "oracle_relreach_md",
    "parse_model",
    "parse_property",
    "parse_property_file",
    "predicate_rewards",
    "preprocess_combined",
    "reward_quotient",
    "solve_conjrelreach",
    "solve_relbuechi",
    "solve_relreach",
    "transfer_md_witness",
    "validate_mdp",
]
