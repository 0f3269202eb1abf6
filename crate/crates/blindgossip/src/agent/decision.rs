use num_bigint::BigUint;
use rand::Rng;

use super::Agent;
use crate::arith::{decide_plain, RationalState};
use crate::error::ProtocolError;
use crate::gc::{run_decision, DecisionInputs, DecisionLayout, DecisionOutcome};
use crate::pre::PairingGroup;

/// Who runs which decision circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionPlan {
    /// The agent never updated and decides on its own input.
    Local { agent: usize },
    /// The evaluator's last partner garbles; only the evaluator learns a bit.
    Single { garbler: usize, evaluator: usize },
    /// Last partners of each other: one circuit with two outputs.
    Dual { garbler: usize, evaluator: usize },
}

impl DecisionPlan {
    pub fn agents(&self) -> Vec<usize> {
        match *self {
            DecisionPlan::Local { agent } => vec![agent],
            DecisionPlan::Single { evaluator, .. } => vec![evaluator],
            DecisionPlan::Dual { garbler, evaluator } => vec![evaluator, garbler],
        }
    }
}

/// One plan per circuit, ordered by the lowest agent id it decides for.
pub fn plan_decisions<B: PairingGroup>(agents: &[Agent<B>]) -> Vec<DecisionPlan> {
    let mut plans = Vec::new();
    for a in agents {
        let id = a.id();
        match a.last_partner() {
            None => plans.push(DecisionPlan::Local { agent: id }),
            Some(g) if agents[g].last_partner() == Some(id) => {
                if id < g {
                    plans.push(DecisionPlan::Dual { garbler: g, evaluator: id });
                }
            }
            Some(g) => plans.push(DecisionPlan::Single { garbler: g, evaluator: id }),
        }
    }
    plans
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRun {
    pub plan: DecisionPlan,
    /// `(agent, decision)` for every agent the plan covers.
    pub results: Vec<(usize, bool)>,
    pub width: u32,
    pub outcome: Option<DecisionOutcome>,
}

fn scaled_threshold(thr: u64, ell: u32, exp: u32) -> Result<BigUint, ProtocolError> {
    if ell < 64 && thr >> ell != 0 {
        return Err(ProtocolError::Threshold { thr, ell });
    }
    Ok(BigUint::from(thr) << exp)
}

/// Executes one plan. `t` is the label length of the circuit.
pub fn run_decision_plan<B: PairingGroup, R: Rng + ?Sized>(
    agents: &[Agent<B>],
    plan: &DecisionPlan,
    thresholds: &[u64],
    t: u32,
    rng: &mut R,
) -> Result<DecisionRun, ProtocolError> {
    let (garbler, evaluator, dual) = match *plan {
        DecisionPlan::Local { agent } => {
            let a = &agents[agent];
            let ell = a.directory().params.ell();
            scaled_threshold(thresholds[agent], ell, 0)?;
            let own = decide_plain(&RationalState::initial(a.input()), thresholds[agent]);
            return Ok(DecisionRun { plan: *plan, results: vec![(agent, own)], width: ell, outcome: None });
        }
        DecisionPlan::Single { garbler, evaluator } => (garbler, evaluator, false),
        DecisionPlan::Dual { garbler, evaluator } => (garbler, evaluator, true),
    };
    let (g, e) = (&agents[garbler], &agents[evaluator]);
    let params = &e.directory().params;
    let no_mask = ProtocolError::NoDecisionMask { garbler, evaluator };
    if e.last_partner() != Some(garbler) {
        return Err(no_mask);
    }
    let issued = g.issued_for(evaluator).ok_or(no_mask.clone())?;
    if !issued.statistical || issued.denom_exp != e.denom_exp() {
        return Err(no_mask);
    }
    let exp = e.denom_exp();
    let width = params.ell() + exp;
    if width >= params.n_bits() {
        return Err(ProtocolError::WidthOverflow { needed: width, available: params.n_bits() });
    }
    let garbler_thr = if dual {
        if g.last_partner() != Some(evaluator) || g.denom_exp() != exp {
            return Err(ProtocolError::OutOfOrder { agent: garbler, what: "dual decision without a shared final state" });
        }
        Some(scaled_threshold(thresholds[garbler], params.ell(), exp)?)
    } else {
        None
    };
    let inputs = DecisionInputs {
        layout: DecisionLayout { width, dual },
        mask: issued.value.clone(),
        garbler_thr,
        masked: e.masked_numerator().clone(),
        evaluator_thr: scaled_threshold(thresholds[evaluator], params.ell(), exp)?,
    };
    let outcome = run_decision(&inputs, t, params.n_bits(), rng)?;
    let mut results = vec![(evaluator, outcome.evaluator_result)];
    if let Some(b) = outcome.garbler_result {
        results.push((garbler, b));
    }
    Ok(DecisionRun { plan: *plan, results, width, outcome: Some(outcome) })
}
