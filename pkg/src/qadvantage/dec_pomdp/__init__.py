"""Two-agent decentralized POMDP with the magic-square reward."""

from .model import (
    CYCLE,
    STATES,
    CommonRandomness,
    Kernel,
    State,
    as_distribution,
    enumerate_actions_u,
    enumerate_actions_v,
    make_delta_floor_kernel,
    make_periodic_kernel,
    make_uniform_kernel,
    reward,
    step,
    tau,
)
from .oracles import (
    best_memoryless_pair,
    corollary_checks,
    exact_expected_reward_memoryless,
    exact_max_memoryless_uniform,
    exact_reward_profile,
    lemma_oneneg_check,
    memoryless_reward_profiles,
)
from .policies import (
    GreedyRelaxedPolicy,
    PeriodicSyncPolicy,
    Policy,
    QuantumMPPolicy,
    RandomHistoryPolicy,
    TablePolicy,
    best_memoryless_policies,
    greedy_relaxed_policies,
    periodic_sync_policies,
    quantum_mp_policies,
    random_history_policies,
)
from .simulation import (
    AgentQubits,
    ConfigurationError,
    StepRegister,
    TrajectoryRecord,
    simulate,
    simulate_random_history_batch,
)

__all__ = [
    "AgentQubits",
    "CYCLE",
    "CommonRandomness",
    "ConfigurationError",
    "GreedyRelaxedPolicy",
    "Kernel",
    "PeriodicSyncPolicy",
    "Policy",
    "QuantumMPPolicy",
    "RandomHistoryPolicy",
    "STATES",
    "State",
    "StepRegister",
    "TablePolicy",
    "TrajectoryRecord",
    "as_distribution",
    "best_memoryless_pair",
    "best_memoryless_policies",
    "corollary_checks",
    "enumerate_actions_u",
    "enumerate_actions_v",
    "exact_expected_reward_memoryless",
    "exact_max_memoryless_uniform",
    "exact_reward_profile",
    "greedy_relaxed_policies",
    "lemma_oneneg_check",
    "make_delta_floor_kernel",
    "make_periodic_kernel",
    "make_uniform_kernel",
    "memoryless_reward_profiles",
    "periodic_sync_policies",
    "quantum_mp_policies",
    "random_history_policies",
    "reward",
    "simulate",
    "simulate_random_history_batch",
    "step",
    "tau",
]
