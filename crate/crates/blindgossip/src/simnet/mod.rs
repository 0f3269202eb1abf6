//! Deterministic network simulation: topologies, pair scheduling, spectral
//! analysis of the expected averaging matrix, and end-to-end runs checked
//! against the plaintext oracle.

mod run;
mod schedule;
mod spectral;
mod topology;

pub use run::{
    check_config, final_exponents, plan_schedule, random_values, run_simulation, AgentDecision, Divergence, Fault, KeyMode, SimConfig, SimulationTrace,
    StepTrace, Verify,
};
pub use schedule::{GossipSchedule, PlannedSchedule};
pub use spectral::{
    epsilon_averaging_t, expected_w, lambda2, topology_lambda2, uniform_pair_probs, Matrix, LAMBDA2_MAX_ITER, LAMBDA2_TOL,
};
pub use topology::{Topology, TopologySpec, PRESETS};
