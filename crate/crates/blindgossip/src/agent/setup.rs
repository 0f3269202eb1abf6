use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::{Agent, Directory, Mask};
use crate::arith::{ModulusParams, Reduction};
use crate::error::ProtocolError;
use crate::pre::{PairingGroup, Pre, ReKey};

/// Which re-encryption keys each agent stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyDistribution {
    /// Every ordered pair of other agents, for topologies that may change.
    Dynamic,
    /// Only pairs among the agent's neighbours in a fixed graph.
    Static { neighbours: Vec<Vec<usize>> },
}

impl KeyDistribution {
    /// Agents whose envelopes `holder` may have to forward.
    fn proxied(&self, holder: usize, n: usize) -> Vec<usize> {
        match self {
            KeyDistribution::Dynamic => (0..n).filter(|&a| a != holder).collect(),
            KeyDistribution::Static { neighbours } => neighbours[holder].clone(),
        }
    }
}

/// Validates the reduction parameters against `ell1 < floor(log2 n) - ell - t - 1`
/// and `k < ell1`. `k = 0` is accepted and degenerates to the plain update.
pub fn check_reduction(params: &ModulusParams, red: &Reduction) -> Result<(), ProtocolError> {
    let bound = i64::from(params.n_bits()) - i64::from(params.ell()) - i64::from(params.t()) - 1;
    if i64::from(red.ell1) >= bound {
        return Err(ProtocolError::ReductionBound { ell1: red.ell1, bound });
    }
    if red.shift >= red.ell1 {
        return Err(ProtocolError::ReductionShift { shift: red.shift, ell1: red.ell1 });
    }
    Ok(())
}

/// Trusted setup: key pairs for every agent and the re-encryption keys each
/// one needs to act as a proxy. `rk_{a->b}` for `a != b` are foreign keys;
/// `rk_{a->a}` lets a holder return an agent's own envelope to it when the
/// pair repeats.
pub fn setup<B: PairingGroup, R: Rng + ?Sized>(
    pre: Pre<B>,
    params: ModulusParams,
    reduction: Option<Reduction>,
    inputs: &[u64],
    distribution: &KeyDistribution,
    rng: &mut R,
) -> Result<Vec<Agent<B>>, ProtocolError> {
    if let Some(red) = &reduction {
        check_reduction(&params, red)?;
    }
    let reduction = reduction.filter(|r| r.shift > 0);
    let n = inputs.len();
    if let KeyDistribution::Static { neighbours } = distribution {
        assert_eq!(neighbours.len(), n, "one neighbour list per agent");
    }
    let keys: Vec<_> = (0..n).map(|_| pre.keygen(rng)).collect();
    let dir = Arc::new(Directory {
        public_keys: keys.iter().map(|k| k.pk.clone()).collect(),
        pre,
        params,
        reduction,
    });
    let mut agents = Vec::with_capacity(n);
    for (id, (kp, &x)) in keys.iter().zip(inputs).enumerate() {
        let proxied = distribution.proxied(id, n);
        let mut rekeys = BTreeMap::new();
        for &a in &proxied {
            for &b in &proxied {
                let rk: ReKey<B> = dir.pre.rekey(&keys[a].sk, &dir.public_keys[b]);
                rekeys.insert((a, b), rk);
            }
        }
        agents.push(Agent {
            id,
            dir: Arc::clone(&dir),
            sk: kp.sk.clone(),
            rekeys,
            input: x,
            masked: x.into(),
            denom_exp: 0,
            mask: Mask::Zero,
            issued: BTreeMap::new(),
            pending: None,
            census: Default::default(),
        });
    }
    Ok(agents)
}
