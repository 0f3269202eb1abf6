//! Per-agent protocol state machine.
//!
//! An agent at rest holds `n_i + s_k mod n`, where `s_k` was drawn by its last
//! partner `k`, together with `[[s_k]]` encrypted at level 2 under `pk_k`. One
//! update between `i` and `j`:
//!
//! 1. each side adds a fresh `r` to its masked numerator and re-encrypts the
//!    envelope it holds with `rk_{k->partner}`;
//! 2. each side opens the partner's envelope, strips the partner's old mask,
//!    fuses the two numerators over the common denominator and adds a fresh
//!    mask `s` for the partner, sent with `[[s]]` under its own key;
//! 3. each side removes its own obfuscation, leaving `n(tau) + s_partner`.

mod decision;
mod messages;
mod setup;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;

pub use decision::{plan_decisions, run_decision_plan, DecisionPlan, DecisionRun};
pub use messages::{UpdateMsg1, UpdateMsg2};
pub use setup::{check_reduction, setup, KeyDistribution};

use crate::arith::{lcm_pow2, lcm_shifts, ModulusParams, RationalState, Reduction};
use crate::error::ProtocolError;
use crate::pre::{EnvelopeL2, PairingGroup, Pre, PublicKey, ReKey, SecretKey};

/// Public material shared by all agents after setup.
#[derive(Debug)]
pub struct Directory<B: PairingGroup> {
    pub pre: Pre<B>,
    pub params: ModulusParams,
    pub reduction: Option<Reduction>,
    pub public_keys: Vec<PublicKey<B>>,
}

/// The mask currently covering an agent's numerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mask<B: PairingGroup> {
    /// Bootstrap: nothing is added and there is nothing to forward.
    Zero,
    /// `[[s]]` at level 2 under the key of the agent that drew `s`.
    Held { owner: usize, envelope: EnvelopeL2<B> },
}

/// A mask this agent drew for a partner's state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedMask {
    pub value: BigUint,
    /// Drawn from `Z_{2^{ell + e + t}}` for the partner's final update.
    pub statistical: bool,
    pub denom_exp: u32,
}

/// Cryptographic operations performed, for the per-step census.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    pub updates: u64,
    pub reencryptions: u64,
    pub l2_encryptions: u64,
    pub l1_decryptions: u64,
}

#[derive(Debug, Clone)]
struct Pending {
    partner: usize,
    r: BigUint,
    stage: Stage,
}

#[derive(Debug, Clone)]
enum Stage {
    Sent,
    Fused {
        partner_old_mask: BigUint,
        shift_self: u32,
        shift_partner: u32,
        fused_exp: u32,
        reduced: bool,
    },
}

#[derive(Debug, Clone)]
pub struct Agent<B: PairingGroup> {
    id: usize,
    dir: Arc<Directory<B>>,
    sk: SecretKey,
    rekeys: BTreeMap<(usize, usize), ReKey<B>>,
    input: u64,
    masked: BigUint,
    denom_exp: u32,
    mask: Mask<B>,
    issued: BTreeMap<usize, IssuedMask>,
    pending: Option<Pending>,
    census: Census,
}

impl<B: PairingGroup> Agent<B> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn directory(&self) -> &Directory<B> {
        &self.dir
    }

    pub fn input(&self) -> u64 {
        self.input
    }

    /// The numerator as stored at rest: masked except before the first update.
    pub fn masked_numerator(&self) -> &BigUint {
        &self.masked
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn mask(&self) -> &Mask<B> {
        &self.mask
    }

    pub fn last_partner(&self) -> Option<usize> {
        match self.mask {
            Mask::Zero => None,
            Mask::Held { owner, .. } => Some(owner),
        }
    }

    pub fn issued_for(&self, partner: usize) -> Option<&IssuedMask> {
        self.issued.get(&partner)
    }

    pub fn is_busy(&self) -> bool {
        self.pending.is_some()
    }

    pub fn census(&self) -> Census {
        self.census
    }

    /// Stored re-encryption keys as `(foreign, self-delegation)` counts.
    pub fn rekey_counts(&self) -> (usize, usize) {
        let own = self.rekeys.keys().filter(|(a, b)| a == b).count();
        (self.rekeys.len() - own, own)
    }

    pub fn has_rekey(&self, from: usize, to: usize) -> bool {
        self.rekeys.contains_key(&(from, to))
    }

    /// Harness access: the secret key, so a test oracle holding every key can
    /// unmask states.
    pub fn secret_key(&self) -> &SecretKey {
        &self.sk
    }

    /// Test hook: perturbs the stored numerator by one, simulating a corrupted mask.
    pub fn inject_fault(&mut self) {
        let p = &self.dir.params;
        self.masked = p.add(&self.masked, &BigUint::from(1u8));
    }

    /// Part 1: re-mask and forward the held envelope to `partner`.
    pub fn update_part1<R: Rng + ?Sized>(&mut self, partner: usize, rng: &mut R) -> Result<UpdateMsg1<B>, ProtocolError> {
        if self.pending.is_some() {
            return Err(ProtocolError::Busy(self.id));
        }
        if partner == self.id {
            return Err(ProtocolError::OutOfOrder { agent: self.id, what: "update with itself" });
        }
        let p = &self.dir.params;
        let envelope = match &self.mask {
            Mask::Zero => None,
            Mask::Held { owner, envelope } => {
                let rk = self.rekeys.get(&(*owner, partner)).ok_or(ProtocolError::MissingReKey {
                    agent: self.id,
                    from: *owner,
                    to: partner,
                })?;
                self.census.reencryptions += 1;
                Some(self.dir.pre.reencrypt_envelope(envelope, rk))
            }
        };
        let r = p.sample_uniform(rng);
        let numerator = p.add(&self.masked, &r);
        self.pending = Some(Pending { partner, r, stage: Stage::Sent });
        Ok(UpdateMsg1 { numerator, envelope, denom_exp: self.denom_exp })
    }

    /// Part 2: fuse with the partner's round-1 message and mask the result for
    /// the partner. `partner_final` selects the statistical mask the decision
    /// circuit needs.
    pub fn update_part2<R: Rng + ?Sized>(
        &mut self,
        msg: &UpdateMsg1<B>,
        partner_final: bool,
        rng: &mut R,
    ) -> Result<UpdateMsg2<B>, ProtocolError> {
        let id = self.id;
        let pending = match &self.pending {
            Some(p @ Pending { stage: Stage::Sent, .. }) => p.clone(),
            _ => return Err(ProtocolError::OutOfOrder { agent: id, what: "round-1 message without a pending update" }),
        };
        let dir = Arc::clone(&self.dir);
        let p = &dir.params;
        if let Some(red) = &dir.reduction {
            if msg.denom_exp >= red.ell1 {
                return Err(ProtocolError::DenominatorMismatch { agent: id, expected: red.ell1 - 1, got: msg.denom_exp });
            }
        }
        let partner_old_mask = match &msg.envelope {
            None => BigUint::zero(),
            Some(env) => {
                self.census.l1_decryptions += 1;
                dir.pre.unwrap_scalar(env, &self.sk, p)
            }
        };
        // n_j + r_j
        let partner_blinded = p.sub(&msg.numerator, &partner_old_mask);
        let (shift_self, shift_partner) = lcm_shifts(self.denom_exp, msg.denom_exp);
        // n(tau) + s_k * (lcm / d_i) + r_j * (lcm / d_j)
        let fused = p.add(&p.shl(&self.masked, shift_self), &p.shl(&partner_blinded, shift_partner));
        let fused_exp = lcm_pow2(self.denom_exp, msg.denom_exp) + 1;
        let reduction = dir.reduction.filter(|r| r.triggers(fused_exp));
        let new_exp = fused_exp - reduction.map_or(0, |r| r.shift);
        let (ell, t) = (p.ell(), p.t());
        if partner_final {
            let needed = ell + new_exp + t + 1;
            if needed > p.n_bits() {
                return Err(ProtocolError::WidthOverflow { needed, available: p.n_bits() });
            }
        }
        let (mask, on_wire) = match reduction {
            Some(red) => {
                let s = rng.gen_biguint(u64::from(ell + red.ell1 + t - red.shift));
                let wire = &s << red.shift;
                (s, wire)
            }
            None if partner_final => {
                let s = rng.gen_biguint(u64::from(ell + new_exp + t));
                (s.clone(), s)
            }
            None => {
                let s = p.sample_uniform(rng);
                (s.clone(), s)
            }
        };
        let numerator = p.add(&fused, &p.reduce(&on_wire));
        let envelope = dir.pre.wrap_scalar(&mask, &dir.public_keys[id], p, rng)?;
        self.census.l2_encryptions += 1;
        self.issued.insert(
            pending.partner,
            IssuedMask { value: mask, statistical: partner_final, denom_exp: new_exp },
        );
        self.pending = Some(Pending {
            stage: Stage::Fused { partner_old_mask, shift_self, shift_partner, fused_exp, reduced: reduction.is_some() },
            ..pending
        });
        Ok(UpdateMsg2 { numerator, denom_exp: fused_exp, envelope })
    }

    /// Part 3: strip this side's obfuscation and adopt the partner's mask.
    pub fn update_part3(&mut self, msg: &UpdateMsg2<B>) -> Result<(), ProtocolError> {
        let id = self.id;
        let Some(Pending {
            partner,
            r,
            stage: Stage::Fused { partner_old_mask, shift_self, shift_partner, fused_exp, reduced },
        }) = self.pending.take()
        else {
            return Err(ProtocolError::OutOfOrder { agent: id, what: "round-2 message before fusing" });
        };
        if msg.denom_exp != fused_exp {
            self.pending = None;
            return Err(ProtocolError::DenominatorMismatch { agent: id, expected: fused_exp, got: msg.denom_exp });
        }
        let p = &self.dir.params;
        // s_l * (lcm / d_j) + r_i * (lcm / d_i)
        let obf = p.add(&p.shl(&partner_old_mask, shift_partner), &p.shl(&r, shift_self));
        let mut masked = p.sub(&msg.numerator, &obf);
        let mut exp = fused_exp;
        if reduced {
            let k = self.dir.reduction.expect("reduced implies configured").shift;
            masked >>= k;
            exp -= k;
        }
        self.masked = masked;
        self.denom_exp = exp;
        self.mask = Mask::Held { owner: partner, envelope: msg.envelope.clone() };
        self.census.updates += 1;
        Ok(())
    }
}

/// Byte counts of one update step, per round, both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepWire {
    pub round1: [usize; 2],
    pub round2: [usize; 2],
}

impl StepWire {
    pub fn bytes_round1(&self) -> usize {
        self.round1.iter().sum()
    }

    pub fn bytes_round2(&self) -> usize {
        self.round2.iter().sum()
    }

    pub fn total_bits(&self) -> u64 {
        8 * (self.bytes_round1() + self.bytes_round2()) as u64
    }

    pub fn rounds(&self) -> u8 {
        2
    }
}

/// `16 ceil(log2 q) + 6 ceil(log2 n)`: the strict per-step bit budget.
pub fn step_bit_bound(q_bits: u32, n_bits: u32) -> u64 {
    16 * u64::from(q_bits) + 6 * u64::from(n_bits)
}

pub(crate) fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

/// One full update between `i` and `j`, with every message serialized and
/// parsed back. `finals` flags whether this is the last update of `i` and of `j`.
pub fn update_step<B: PairingGroup, R: Rng + ?Sized>(
    agents: &mut [Agent<B>],
    i: usize,
    j: usize,
    finals: (bool, bool),
    rng_i: &mut R,
    rng_j: &mut R,
) -> Result<StepWire, ProtocolError> {
    let (a, b) = pair_mut(agents, i, j);
    if a.is_busy() {
        return Err(ProtocolError::Busy(i));
    }
    if b.is_busy() {
        return Err(ProtocolError::Busy(j));
    }
    let dir = Arc::clone(&a.dir);
    let (g, p) = (dir.pre.group(), &dir.params);
    let result = (|| {
        let m1a = a.update_part1(j, rng_i)?.encode(g, p);
        let m1b = b.update_part1(i, rng_j)?.encode(g, p);
        let m2a = a.update_part2(&UpdateMsg1::decode(g, p, &m1b)?, finals.1, rng_i)?.encode(g, p);
        let m2b = b.update_part2(&UpdateMsg1::decode(g, p, &m1a)?, finals.0, rng_j)?.encode(g, p);
        a.update_part3(&UpdateMsg2::decode(g, p, &m2b)?)?;
        b.update_part3(&UpdateMsg2::decode(g, p, &m2a)?)?;
        Ok(StepWire { round1: [m1a.len(), m1b.len()], round2: [m2a.len(), m2b.len()] })
    })();
    if result.is_err() {
        a.pending = None;
        b.pending = None;
    }
    result
}

/// Harness oracle: recovers an agent's plaintext state using every secret key.
pub fn unmask<B: PairingGroup>(agent: &Agent<B>, keys: &[&SecretKey]) -> RationalState {
    let dir = agent.directory();
    let numerator = match agent.mask() {
        Mask::Zero => agent.masked_numerator().clone(),
        Mask::Held { owner, envelope } => {
            let s = dir.pre.unwrap_scalar(envelope, keys[*owner], &dir.params);
            dir.params.sub(agent.masked_numerator(), &s)
        }
    };
    RationalState::new(numerator, agent.denom_exp())
}

#[cfg(test)]
mod tests;
