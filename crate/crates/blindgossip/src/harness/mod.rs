//! Experiment harness: TOML configuration, seeded runs, oracle diffs, the
//! cost audit and text reports.

mod audit;
mod config;
mod report;

use std::fmt::Write as _;

pub use audit::{audit_trace, ciphertext_bits, AuditReport, AuditRow, Relation, Status};
pub use config::{
    load_config, Backend, ExperimentConfig, Keys, ParamsSection, ReductionSection, Resolved, Thresholds, TopologyChange,
};
pub use report::{DiffStatus, OracleDiff, SpectralReport, EPS_GRID};

use crate::error::Error;
use crate::par::{self, Execution};
use crate::pre::{ExponentGroup, Supersingular};
use crate::rng::SeedTree;
use crate::simnet::{run_simulation, SimulationTrace};

/// A finished run with its reports.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub trace: SimulationTrace,
    pub audit: AuditReport,
    pub diff: OracleDiff,
}

impl Experiment {
    /// Oracle diff empty and audit all-pass.
    pub fn passed(&self, strict: bool) -> bool {
        self.diff.is_empty() && self.audit.all_pass(strict)
    }
}

pub fn run_resolved(r: &Resolved) -> Result<Experiment, Error> {
    let (trace, ct) = match r.backend {
        Backend::Test => (run_simulation(ExponentGroup::new(), &r.sim)?, ciphertext_bits(ExponentGroup::new())),
        Backend::Pairing => (run_simulation(Supersingular::new(), &r.sim)?, ciphertext_bits(Supersingular::new())),
    };
    let audit = audit_trace(&trace, ct);
    let diff = OracleDiff::from_trace(&trace);
    Ok(Experiment { trace, audit, diff })
}

/// Seed of the `k`-th run in a sweep from `base`.
pub fn sweep_seed(base: u64, k: u64) -> u64 {
    SeedTree::new(base).child("sweep", k).seed()
}

/// Runs `count` independently seeded copies of `cfg`, in seed order.
pub fn sweep(cfg: &ExperimentConfig, count: u64, exec: Execution) -> Result<Vec<Experiment>, Error> {
    par::map_range(exec, 0..count, |k| {
        let mut c = cfg.clone();
        c.seed = sweep_seed(cfg.seed, k);
        run_resolved(&c.resolve(Execution::Sequential)?)
    })
    .into_iter()
    .collect()
}

pub fn render_sweep(runs: &[Experiment], strict: bool) -> String {
    let mut s = String::from("seed,steps,normalized_error,oracle,audit\n");
    for e in runs {
        writeln!(
            s,
            "{},{},{},{:?},{}",
            e.trace.seed,
            e.trace.steps.len(),
            e.trace.normalized_error,
            e.diff.status(),
            if e.audit.all_pass(strict) { "pass" } else { "fail" }
        )
        .expect("string");
    }
    s
}
