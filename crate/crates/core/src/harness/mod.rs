//! Simulation harness: environments, traces, oracles and experiments.

pub mod env;
pub mod experiment;
pub mod oracle;
pub mod trace;

pub use env::{gen_environment, BanditEnvironment, CostSchedule, DelayModel, EnvSpec, MeanPhase};
pub use experiment::{
    aggregate, run_experiment, run_replicate, sample_rounds, BanditExperiment, BanditReplicate, EtaChoice,
    ExperimentReport, RegretPoint, ReplicateSummary,
};
pub use oracle::{
    best_expert_cost_env, best_expert_cost_trace, env_expert_costs, simulate_policy, trace_expert_costs,
};
pub use trace::{gen_phase_trace, Phase, PhaseSpec, Trace, TraceSource};
