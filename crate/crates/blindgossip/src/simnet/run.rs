use std::fmt::Write as _;

use rand::Rng;

use super::{PlannedSchedule, Topology};
use crate::agent::{
    plan_decisions, run_decision_plan, setup, unmask, update_step, Agent, Census, DecisionRun, KeyDistribution, Mask,
};
use crate::arith::{decide_plain, ModulusParams, PlainGossip, RationalState, Reduction};
use crate::error::{ProtocolError, SimError};
use crate::par::{self, Execution};
use crate::pre::{PairingGroup, Pre, SecretKey};
use crate::rng::SeedTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeyMode {
    #[default]
    Dynamic,
    Static,
}

/// How much of the encrypted state to check against the oracle after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verify {
    Off,
    /// The two agents that updated.
    #[default]
    Participants,
    /// Every agent, every step.
    Full,
}

/// Perturbs one agent's stored numerator right after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub step: u64,
    pub agent: usize,
}

/// A fully resolved simulation.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub topology: Topology,
    /// Later topologies as `(first step, graph)`; requires dynamic keys.
    pub topology_changes: Vec<(u64, Topology)>,
    pub inputs: Vec<u64>,
    pub thresholds: Vec<u64>,
    pub params: ModulusParams,
    pub reduction: Option<Reduction>,
    pub steps: u64,
    pub gc_label_bits: u32,
    pub keys: KeyMode,
    pub seed: u64,
    pub verify: Verify,
    pub fault: Option<Fault>,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub step: u64,
    pub i: usize,
    pub j: usize,
    pub bytes_round1: usize,
    pub bytes_round2: usize,
    pub rounds: u8,
    /// `max_i |y_i(tau) - mean|` on the oracle.
    pub max_dev: f64,
    pub reduced: bool,
}

impl StepTrace {
    pub fn bits(&self) -> u64 {
        8 * (self.bytes_round1 + self.bytes_round2) as u64
    }
}

/// First mismatch between an unmasked state and the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub step: u64,
    pub agent: usize,
    pub expected: RationalState,
    pub got: RationalState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentDecision {
    pub agent: usize,
    pub decision: bool,
    /// `decide_plain` on the oracle state the protocol tracks.
    pub expected: bool,
    /// `decide_plain` on the exact (never floored) oracle state.
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub n: usize,
    pub seed: u64,
    pub q_bits: u32,
    pub n_bits: u32,
    pub steps: Vec<StepTrace>,
    pub divergences: Vec<Divergence>,
    /// `(step, agent)` where a stored numerator equalled the plaintext one.
    pub at_rest_leaks: Vec<(u64, usize)>,
    /// `(step, agent)` where the operation census differed from the protocol.
    pub census_violations: Vec<(u64, usize)>,
    pub mean_conserved: bool,
    pub drift_within_bound: bool,
    pub reductions: u64,
    pub decisions: Vec<DecisionRun>,
    pub agent_decisions: Vec<AgentDecision>,
    pub final_states: Vec<RationalState>,
    pub exact_states: Vec<RationalState>,
    pub true_mean: f64,
    pub normalized_error: f64,
    pub max_deviation: f64,
    pub wrapped: bool,
    pub census: Vec<Census>,
}

impl SimulationTrace {
    pub const CSV_HEADER: &'static str = "step,i,j,bytes_round1,bytes_round2,max_dev";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for t in &self.steps {
            writeln!(s, "{},{},{},{},{},{}", t.step, t.i, t.j, t.bytes_round1, t.bytes_round2, t.max_dev).expect("string");
        }
        s
    }

    pub fn decision_mismatches(&self) -> usize {
        self.agent_decisions.iter().filter(|d| d.decision != d.expected).count()
    }

    /// Exact equivalence, conservation, no leaks, consistent census, correct decisions.
    pub fn oracle_clean(&self) -> bool {
        self.divergences.is_empty()
            && self.at_rest_leaks.is_empty()
            && self.census_violations.is_empty()
            && self.decision_mismatches() == 0
            && (self.mean_conserved || self.reductions > 0)
            && self.drift_within_bound
    }
}

fn step_err(step: u64) -> impl Fn(ProtocolError) -> SimError {
    move |source| SimError::Step { step, source }
}

/// Validates a configuration before any key is generated.
pub fn check_config(cfg: &SimConfig) -> Result<(), SimError> {
    let n = cfg.topology.len();
    if cfg.inputs.len() != n || cfg.thresholds.len() != n {
        return Err(SimError::Config(format!(
            "{} agents but {} inputs and {} thresholds",
            n,
            cfg.inputs.len(),
            cfg.thresholds.len()
        )));
    }
    let ell = cfg.params.ell();
    if let Some(x) = cfg.inputs.iter().chain(&cfg.thresholds).find(|&&x| ell < 64 && x >> ell != 0) {
        return Err(SimError::Config(format!("value {x} does not fit in ell = {ell} bits")));
    }
    if !cfg.topology.is_connected() {
        return Err(SimError::Topology("graph is not connected".into()));
    }
    if cfg.keys == KeyMode::Static && !cfg.topology_changes.is_empty() {
        return Err(SimError::Config("topology changes need dynamic key distribution".into()));
    }
    if cfg.topology_changes.iter().any(|(s, t)| *s == 0 || t.len() != n) {
        return Err(SimError::Config("topology changes must start after step 0 and keep the agent count".into()));
    }
    if let Some(f) = cfg.fault {
        if f.agent >= n {
            return Err(SimError::Config(format!("fault agent {} out of range", f.agent)));
        }
    }
    Ok(())
}

fn all_keys<B: PairingGroup>(agents: &[Agent<B>]) -> Vec<SecretKey> {
    agents.iter().map(|a| a.secret_key().clone()).collect()
}

/// The pair sequence a run with this configuration will follow.
pub fn plan_schedule(cfg: &SimConfig) -> PlannedSchedule {
    let mut changes = vec![(0, cfg.topology.clone())];
    changes.extend(cfg.topology_changes.iter().cloned());
    let steps = if cfg.topology.len() < 2 { 0 } else { cfg.steps };
    PlannedSchedule::generate_dynamic(&changes, steps, SeedTree::new(cfg.seed).rng("schedule", 0))
}

/// Denominator exponents after the schedule. They depend only on the pairs,
/// never on the inputs, so decision widths can be checked before a run.
pub fn final_exponents(plan: &PlannedSchedule, n: usize, reduction: Option<Reduction>) -> Vec<u32> {
    let reduction = reduction.filter(|r| r.shift > 0);
    let mut e = vec![0u32; n];
    for &(i, j) in &plan.pairs {
        let mut f = e[i].max(e[j]) + 1;
        if let Some(r) = reduction.filter(|r| r.triggers(f)) {
            f -= r.shift;
        }
        e[i] = f;
        e[j] = f;
    }
    e
}

/// Runs the schedule through the agents, then the decision phase.
pub fn run_simulation<B: PairingGroup>(group: B, cfg: &SimConfig) -> Result<SimulationTrace, SimError> {
    check_config(cfg)?;
    let n = cfg.topology.len();
    let tree = SeedTree::new(cfg.seed);
    let distribution = match cfg.keys {
        KeyMode::Dynamic => KeyDistribution::Dynamic,
        KeyMode::Static => KeyDistribution::Static { neighbours: cfg.topology.neighbour_lists() },
    };
    let q_bits = group.order_bits();
    let mut agents = setup(Pre::new(group), cfg.params.clone(), cfg.reduction, &cfg.inputs, &distribution, &mut tree.rng("setup", 0))
        .map_err(step_err(0))?;
    let reduction = agents.first().and_then(|a| a.directory().reduction);
    let plan = plan_schedule(cfg);
    let mut oracle = PlainGossip::new(&cfg.inputs, cfg.params.clone(), reduction);
    let keys = all_keys(&agents);
    let key_refs: Vec<&SecretKey> = keys.iter().collect();

    let mut trace = SimulationTrace {
        n,
        seed: cfg.seed,
        q_bits,
        n_bits: cfg.params.n_bits(),
        steps: Vec::with_capacity(plan.pairs.len()),
        divergences: Vec::new(),
        at_rest_leaks: Vec::new(),
        census_violations: Vec::new(),
        mean_conserved: true,
        drift_within_bound: true,
        reductions: 0,
        decisions: Vec::new(),
        agent_decisions: Vec::new(),
        final_states: Vec::new(),
        exact_states: Vec::new(),
        true_mean: oracle.true_mean(),
        normalized_error: 0.0,
        max_deviation: 0.0,
        wrapped: false,
        census: Vec::new(),
    };

    for (k, &(i, j)) in plan.pairs.iter().enumerate() {
        let step = k as u64 + 1;
        let had = [!matches!(agents[i].mask(), Mask::Zero), !matches!(agents[j].mask(), Mask::Zero)];
        let before = [agents[i].census(), agents[j].census()];
        let finals = (plan.is_final(k, i), plan.is_final(k, j));
        let mut ri = tree.rng("step-initiator", step);
        let mut rj = tree.rng("step-responder", step);
        let wire = update_step(&mut agents, i, j, finals, &mut ri, &mut rj).map_err(step_err(step))?;
        let outcome = oracle.step(i, j);
        trace.reductions += u64::from(outcome.reduced);
        if cfg.fault.is_some_and(|f| f.step == step) {
            agents[cfg.fault.expect("checked").agent].inject_fault();
        }

        for (side, a) in [i, j].into_iter().enumerate() {
            let d = agents[a].census();
            let b = before[side];
            let ok = d.updates == b.updates + 1
                && d.l2_encryptions == b.l2_encryptions + 1
                && d.reencryptions == b.reencryptions + u64::from(had[side])
                && d.l1_decryptions == b.l1_decryptions + u64::from(had[1 - side]);
            if !ok {
                trace.census_violations.push((step, a));
            }
            if agents[a].masked_numerator() == &oracle.state(a).numerator {
                trace.at_rest_leaks.push((step, a));
            }
        }
        let checked: Vec<usize> = match cfg.verify {
            Verify::Off => match cfg.fault {
                Some(f) if f.step == step => vec![f.agent],
                _ => vec![],
            },
            Verify::Participants => {
                let mut v = vec![i, j];
                if let Some(f) = cfg.fault.filter(|f| f.step == step && f.agent != i && f.agent != j) {
                    v.push(f.agent);
                }
                v
            }
            Verify::Full => (0..n).collect(),
        };
        for a in checked {
            let got = unmask(&agents[a], &key_refs);
            if &got != oracle.state(a) {
                trace.divergences.push(Divergence { step, agent: a, expected: oracle.state(a).clone(), got });
            }
        }
        if !oracle.exact_mean_conserved() {
            trace.mean_conserved = false;
        }
        if reduction.is_none() && !oracle.shadow_mean_conserved() {
            trace.mean_conserved = false;
        }
        trace.steps.push(StepTrace {
            step,
            i,
            j,
            bytes_round1: wire.bytes_round1(),
            bytes_round2: wire.bytes_round2(),
            rounds: wire.rounds(),
            max_dev: oracle.max_deviation(),
            reduced: outcome.reduced,
        });
    }

    trace.drift_within_bound = (0..n).all(|a| oracle.drift(a).cmp_value(oracle.drift_bound(a)).is_le());
    trace.wrapped = oracle.wrapped();
    trace.final_states = oracle.states().to_vec();
    trace.exact_states = (0..n).map(|a| oracle.exact(a).clone()).collect();
    trace.normalized_error = oracle.normalized_error();
    trace.max_deviation = oracle.max_deviation();
    trace.census = agents.iter().map(Agent::census).collect();

    let plans = plan_decisions(&agents);
    let runs = par::map(cfg.execution, plans.into_iter().enumerate().collect(), |(k, p)| {
        let mut rng = tree.rng("decision", k as u64);
        run_decision_plan(&agents, &p, &cfg.thresholds, cfg.gc_label_bits, &mut rng).map_err(|source| {
            let agent = p.agents()[0];
            SimError::Decision { agent, source }
        })
    });
    for run in runs {
        let run = run?;
        for &(a, decision) in &run.results {
            trace.agent_decisions.push(AgentDecision {
                agent: a,
                decision,
                expected: decide_plain(oracle.shadow(a), cfg.thresholds[a]),
                exact: decide_plain(oracle.exact(a), cfg.thresholds[a]),
            });
        }
        trace.decisions.push(run);
    }
    trace.agent_decisions.sort_by_key(|d| d.agent);
    Ok(trace)
}

/// Uniform inputs and thresholds in `[0, 2^ell)` drawn from the seed tree.
pub fn random_values<R: Rng + ?Sized>(n: usize, ell: u32, rng: &mut R) -> Vec<u64> {
    let hi = if ell >= 64 { u64::MAX } else { (1u64 << ell) - 1 };
    (0..n).map(|_| rng.gen_range(0..=hi)).collect()
}
