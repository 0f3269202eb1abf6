use std::fmt::Write as _;

use crate::arith::RationalState;
use crate::error::SimError;
use crate::simnet::{epsilon_averaging_t, topology_lambda2, Divergence, SimulationTrace, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffStatus {
    /// Every checked state matched bit for bit.
    Exact,
    /// Matched the floored oracle; reductions moved the value by at most the drift bound.
    ApproximatePass,
    Divergent,
}

/// Unmasked protocol state against the plaintext oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleDiff {
    pub steps: usize,
    pub agents: usize,
    pub divergences: Vec<Divergence>,
    pub decision_mismatches: usize,
    pub at_rest_leaks: usize,
    pub reductions: u64,
    pub mean_conserved: bool,
    pub drift_within_bound: bool,
}

impl OracleDiff {
    pub fn from_trace(trace: &SimulationTrace) -> Self {
        Self {
            steps: trace.steps.len(),
            agents: trace.n,
            divergences: trace.divergences.clone(),
            decision_mismatches: trace.decision_mismatches(),
            at_rest_leaks: trace.at_rest_leaks.len(),
            reductions: trace.reductions,
            mean_conserved: trace.mean_conserved,
            drift_within_bound: trace.drift_within_bound,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.status() != DiffStatus::Divergent
    }

    pub fn status(&self) -> DiffStatus {
        let clean = self.divergences.is_empty()
            && self.decision_mismatches == 0
            && self.at_rest_leaks == 0
            && self.drift_within_bound
            && (self.mean_conserved || self.reductions > 0);
        match (clean, self.reductions) {
            (false, _) => DiffStatus::Divergent,
            (true, 0) => DiffStatus::Exact,
            (true, _) => DiffStatus::ApproximatePass,
        }
    }

    pub fn first(&self) -> Option<&Divergence> {
        self.divergences.first()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        match self.status() {
            DiffStatus::Exact => {
                writeln!(s, "empty diff: {} steps, {} agents, bit-exact", self.steps, self.agents).expect("string");
            }
            DiffStatus::ApproximatePass => {
                writeln!(
                    s,
                    "empty diff (approximate pass): {} steps, {} agents, {} reductions within the drift bound",
                    self.steps, self.agents, self.reductions
                )
                .expect("string");
            }
            DiffStatus::Divergent => {
                if let Some(d) = self.first() {
                    writeln!(
                        s,
                        "first divergence: step {}, agent {}: expected {}, got {}",
                        d.step,
                        d.agent,
                        show(&d.expected),
                        show(&d.got)
                    )
                    .expect("string");
                    writeln!(s, "{} divergent (step, agent) pairs", self.divergences.len()).expect("string");
                }
                if self.decision_mismatches > 0 {
                    writeln!(s, "{} decisions differ from the oracle", self.decision_mismatches).expect("string");
                }
                if self.at_rest_leaks > 0 {
                    writeln!(s, "{} stored numerators equal the plaintext", self.at_rest_leaks).expect("string");
                }
                if !self.drift_within_bound {
                    writeln!(s, "reduction drift exceeds its bound").expect("string");
                }
                if !self.mean_conserved && self.reductions == 0 {
                    writeln!(s, "oracle mean not conserved").expect("string");
                }
            }
        }
        s
    }
}

fn show(r: &RationalState) -> String {
    format!("{}/2^{}", r.numerator, r.denom_exp)
}

/// The epsilon grid used for spectral tables.
pub const EPS_GRID: [f64; 5] = [0.05, 0.04, 0.03, 0.02, 0.01];

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub agents: usize,
    pub edges: usize,
    pub lambda2: f64,
    /// `(eps, T(eps))`.
    pub table: Vec<(f64, u64)>,
}

impl SpectralReport {
    pub fn for_topology(t: &Topology) -> Result<Self, SimError> {
        let lambda2 = topology_lambda2(t)?;
        let table = EPS_GRID.iter().map(|&e| Ok((e, epsilon_averaging_t(e, lambda2)?))).collect::<Result<_, SimError>>()?;
        Ok(Self { agents: t.len(), edges: t.edges().len(), lambda2, table })
    }

    pub fn steps_for(&self, eps: f64) -> Option<u64> {
        self.table.iter().find(|(e, _)| *e == eps).map(|&(_, t)| t)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "agents: {}", self.agents).expect("string");
        writeln!(s, "edges: {}", self.edges).expect("string");
        writeln!(s, "lambda2: {:.12}", self.lambda2).expect("string");
        writeln!(s, "eps,T").expect("string");
        for (e, t) in &self.table {
            writeln!(s, "{e:.2},{t}").expect("string");
        }
        s
    }
}
