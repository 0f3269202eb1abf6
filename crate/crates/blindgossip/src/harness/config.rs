use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::{ModulusParams, Reduction};
use crate::error::Error;
use crate::par::Execution;
use crate::pre::{ExponentGroup, PairingGroup, Supersingular};
use crate::rng::SeedTree;
use crate::simnet::{
    epsilon_averaging_t, final_exponents, plan_schedule, random_values, topology_lambda2, KeyMode, SimConfig, Topology,
    TopologySpec, Verify,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Supersingular-curve pairing.
    Pairing,
    /// Exponent-represented group: fast, insecure, for simulations.
    #[default]
    Test,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Pairing => "pairing",
            Backend::Test => "test",
        }
    }

    /// `(ceil(log2 q), floor(log2 q))`.
    pub fn q_bits(self) -> (u32, u32) {
        match self {
            Backend::Pairing => {
                let g = Supersingular::new();
                (g.order_bits(), g.order_floor_bits())
            }
            Backend::Test => {
                let g = ExponentGroup::new();
                (g.order_bits(), g.order_floor_bits())
            }
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "pairing" => Ok(Backend::Pairing),
            "test" => Ok(Backend::Test),
            _ => Err(Error::Config(format!("unknown backend {s:?}; expected pairing or test"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Keys {
    #[default]
    Dynamic,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_ell")]
    pub ell: u32,
    #[serde(default = "default_t")]
    pub t: u32,
    #[serde(default = "default_n_bits")]
    pub n_bits: u32,
    /// Expected `ceil(log2 q)`; checked against the backend when present.
    pub q_bits: Option<u32>,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { ell: default_ell(), t: default_t(), n_bits: default_n_bits(), q_bits: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSection {
    pub ell1: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyChange {
    pub from_step: u64,
    pub topology: TopologySpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Thresholds {
    All(u64),
    PerAgent(Vec<u64>),
}

/// An experiment as written in a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    pub topology: TopologySpec,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Fixed step count; otherwise derived from `eps` and the spectral bound.
    pub steps: Option<u64>,
    /// Upper cap on the derived step count.
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub keys: Keys,
    #[serde(default = "default_gc_bits")]
    pub gc_label_bits: u32,
    /// Quantized inputs; drawn uniformly in `[0, 2^ell)` when absent.
    pub inputs: Option<Vec<u64>>,
    /// One threshold for all agents or one per agent; drawn when absent.
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub params: ParamsSection,
    pub reduction: Option<ReductionSection>,
    #[serde(default)]
    pub topology_changes: Vec<TopologyChange>,
}

fn default_ell() -> u32 {
    16
}
fn default_t() -> u32 {
    80
}
fn default_n_bits() -> u32 {
    254
}
fn default_eps() -> f64 {
    0.01
}
fn default_gc_bits() -> u32 {
    128
}

impl ExperimentConfig {
    pub fn minimal(topology: TopologySpec) -> Self {
        Self {
            seed: 0,
            backend: Backend::Test,
            topology,
            eps: default_eps(),
            steps: None,
            max_steps: None,
            keys: Keys::Dynamic,
            gc_label_bits: default_gc_bits(),
            inputs: None,
            thresholds: None,
            params: ParamsSection::default(),
            reduction: None,
            topology_changes: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Static checks that need no graph: every violated precondition is
    /// reported together with its governing inequality.
    pub fn violations(&self) -> Vec<String> {
        let p = &self.params;
        let mut v = Vec::new();
        if p.t < 1 {
            v.push(format!("t = {} violates t >= 1", p.t));
        }
        if p.ell < 1 || p.ell > crate::arith::MAX_ELL {
            v.push(format!("ell = {} violates 1 <= ell <= {}", p.ell, crate::arith::MAX_ELL));
        }
        if p.n_bits <= p.ell + p.t + 1 {
            v.push(format!(
                "n_bits = {} violates floor(log2 n) > ell + t + 1 = {}",
                p.n_bits,
                p.ell + p.t + 1
            ));
        }
        let (q_ceil, q_floor) = self.backend.q_bits();
        if p.n_bits > q_floor {
            v.push(format!("n_bits = {} violates n <= q: log2 n <= floor(log2 q) = {q_floor}", p.n_bits));
        }
        if let Some(q) = p.q_bits {
            if q != q_ceil {
                v.push(format!("q_bits = {q} but the {} backend has ceil(log2 q) = {q_ceil}", self.backend.name()));
            }
        }
        if let Some(r) = &self.reduction {
            let bound = i64::from(p.n_bits) - i64::from(p.ell) - i64::from(p.t) - 1;
            if i64::from(r.ell1) >= bound {
                v.push(format!(
                    "ell1 = {} violates the strict inequality ell1 < floor(log2 n) - ell - t - 1 = {bound}",
                    r.ell1
                ));
            }
            if r.k >= r.ell1 {
                v.push(format!("k = {} violates k < ell1 = {}", r.k, r.ell1));
            }
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            v.push(format!("eps = {} violates 0 < eps < 1", self.eps));
        }
        if !(1..=128).contains(&self.gc_label_bits) {
            v.push(format!("gc_label_bits = {} violates 1 <= t <= 128", self.gc_label_bits));
        }
        let fits = |x: u64| p.ell >= 64 || x >> p.ell == 0;
        if let Some(xs) = &self.inputs {
            if let Some(x) = xs.iter().find(|&&x| !fits(x)) {
                v.push(format!("input {x} violates x < 2^ell = 2^{}", p.ell));
            }
        }
        match &self.thresholds {
            Some(Thresholds::All(x)) if !fits(*x) => v.push(format!("threshold {x} violates thr < 2^ell = 2^{}", p.ell)),
            Some(Thresholds::PerAgent(xs)) => {
                if let Some(x) = xs.iter().find(|&&x| !fits(x)) {
                    v.push(format!("threshold {x} violates thr < 2^ell = 2^{}", p.ell));
                }
            }
            _ => {}
        }
        if self.keys == Keys::Static && !self.topology_changes.is_empty() {
            v.push("topology changes need keys = \"dynamic\"".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<(), Error> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("\n")))
        }
    }

    pub fn modulus_params(&self) -> Result<ModulusParams, Error> {
        let (_, q_floor) = self.backend.q_bits();
        Ok(ModulusParams::for_group(self.params.n_bits, self.params.ell, self.params.t, q_floor)?)
    }

    /// Builds graphs, derives the step count, draws missing values, and checks
    /// that every final decision width fits: `ell + e + t + 1 <= log2 n`.
    pub fn resolve(&self, execution: Execution) -> Result<Resolved, Error> {
        self.validate()?;
        let params = self.modulus_params()?;
        let tree = SeedTree::new(self.seed);
        let topology = self.topology.build(&mut tree.rng("topology", 0))?;
        let n = topology.len();
        let mut changes = Vec::new();
        for (k, c) in self.topology_changes.iter().enumerate() {
            changes.push((c.from_step, c.topology.build(&mut tree.rng("topology", k as u64 + 1))?));
        }
        let lambda2 = topology_lambda2(&topology)?;
        let bound_steps = if n < 2 { 0 } else { epsilon_averaging_t(self.eps, lambda2)? };
        let steps = match (self.steps, self.max_steps) {
            (Some(s), _) => s,
            (None, Some(cap)) => bound_steps.min(cap),
            (None, None) => bound_steps,
        };
        let mut values = tree.rng("values", 0);
        let inputs = match &self.inputs {
            Some(xs) => xs.clone(),
            None => random_values(n, params.ell(), &mut values),
        };
        let thresholds = match &self.thresholds {
            Some(Thresholds::All(x)) => vec![*x; n],
            Some(Thresholds::PerAgent(xs)) => xs.clone(),
            None => random_values(n, params.ell(), &mut values),
        };
        let reduction = self.reduction.map(|r| Reduction { ell1: r.ell1, shift: r.k });
        let sim = SimConfig {
            topology,
            topology_changes: changes,
            inputs,
            thresholds,
            params: params.clone(),
            reduction,
            steps,
            gc_label_bits: self.gc_label_bits,
            keys: match self.keys {
                Keys::Dynamic => KeyMode::Dynamic,
                Keys::Static => KeyMode::Static,
            },
            seed: self.seed,
            verify: Verify::Participants,
            fault: None,
            execution,
        };
        crate::simnet::check_config(&sim)?;
        let exps = final_exponents(&plan_schedule(&sim), n, reduction);
        let mut v = Vec::new();
        for (a, &e) in exps.iter().enumerate() {
            let needed = params.ell() + e + params.t() + 1;
            if e > 0 && needed > params.n_bits() {
                v.push(format!(
                    "agent {a}: final width ell + log2 d(T) + t + 1 = {} + {e} + {} + 1 = {needed} exceeds log2 n = {}",
                    params.ell(),
                    params.t(),
                    params.n_bits()
                ));
            }
        }
        if !v.is_empty() {
            return Err(Error::Config(v.join("\n")));
        }
        Ok(Resolved { sim, lambda2, bound_steps, backend: self.backend })
    }
}

/// A configuration turned into a concrete simulation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub sim: SimConfig,
    pub lambda2: f64,
    /// `T(eps)` before any cap or override.
    pub bound_steps: u64,
    pub backend: Backend,
}

impl Resolved {
    pub fn topology(&self) -> &Topology {
        &self.sim.topology
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
