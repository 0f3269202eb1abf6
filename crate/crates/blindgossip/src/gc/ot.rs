//! 1-out-of-2 oblivious transfer from precomputed random OTs.
//!
//! Offline, a dealer hands the sender random pairs `(x0, x1)` and the receiver
//! a random bit `b` with `x_b`. Online, the receiver with choice `c` sends
//! `e = b ^ c`; the sender answers `y0 = m0 ^ x_e`, `y1 = m1 ^ x_{1-e}`; the
//! receiver recovers `m_c = y_c ^ x_b`. Each record serves exactly one transfer.

use rand::Rng;

use super::garble::{label_mask, Label};
use crate::error::GcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SenderRecord {
    x0: Label,
    x1: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ReceiverRecord {
    b: bool,
    xb: Label,
}

#[derive(Debug, Clone)]
pub struct OtSender {
    records: Vec<SenderRecord>,
    used: Vec<bool>,
    next: usize,
}

#[derive(Debug, Clone)]
pub struct OtReceiver {
    records: Vec<ReceiverRecord>,
    used: Vec<bool>,
    next: usize,
}

/// Trusted-dealer precomputation of `count` random OTs on `t`-bit strings.
pub fn ot_precompute<R: Rng + ?Sized>(count: usize, t: u32, rng: &mut R) -> (OtSender, OtReceiver) {
    let mask = label_mask(t);
    let mut sender = Vec::with_capacity(count);
    let mut receiver = Vec::with_capacity(count);
    for _ in 0..count {
        let x0 = rng.gen::<u128>() & mask;
        let x1 = rng.gen::<u128>() & mask;
        let b: bool = rng.gen();
        sender.push(SenderRecord { x0, x1 });
        receiver.push(ReceiverRecord { b, xb: if b { x1 } else { x0 } });
    }
    (
        OtSender { records: sender, used: vec![false; count], next: 0 },
        OtReceiver { records: receiver, used: vec![false; count], next: 0 },
    )
}

/// Receiver state between its request and the sender's answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtTicket {
    pub start: usize,
    pub choices: Vec<bool>,
}

impl OtReceiver {
    pub fn available(&self) -> usize {
        self.records.len() - self.next
    }

    /// Reserves the next records and returns the correction bits to send.
    pub fn request(&mut self, choices: &[bool]) -> Result<(OtTicket, Vec<bool>), GcError> {
        if choices.len() > self.available() {
            return Err(GcError::OtExhausted { needed: choices.len(), available: self.available() });
        }
        let start = self.next;
        let corrections = choices
            .iter()
            .enumerate()
            .map(|(k, &c)| self.correction(start + k, c))
            .collect::<Result<Vec<_>, _>>()?;
        self.next += choices.len();
        Ok((OtTicket { start, choices: choices.to_vec() }, corrections))
    }

    /// Correction bit for record `idx`; consumes the record.
    pub fn correction(&mut self, idx: usize, choice: bool) -> Result<bool, GcError> {
        let avail = self.records.len().saturating_sub(idx);
        let rec = self.records.get(idx).ok_or(GcError::OtExhausted { needed: 1, available: avail })?;
        if std::mem::replace(&mut self.used[idx], true) {
            return Err(GcError::OtReused(idx));
        }
        Ok(rec.b ^ choice)
    }

    pub fn recover(&self, ticket: &OtTicket, responses: &[(Label, Label)]) -> Result<Vec<Label>, GcError> {
        if responses.len() != ticket.choices.len() {
            return Err(GcError::Protocol("OT response count differs from the request"));
        }
        Ok(ticket
            .choices
            .iter()
            .zip(responses)
            .enumerate()
            .map(|(k, (&c, &(y0, y1)))| (if c { y1 } else { y0 }) ^ self.records[ticket.start + k].xb)
            .collect())
    }
}

impl OtSender {
    pub fn available(&self) -> usize {
        self.records.len() - self.next
    }

    /// Answers a batch of corrections with the next unused records, which the
    /// dealer paired with the receiver's in the same order.
    pub fn respond(&mut self, corrections: &[bool], pairs: &[(Label, Label)]) -> Result<Vec<(Label, Label)>, GcError> {
        if corrections.len() != pairs.len() {
            return Err(GcError::Protocol("correction count differs from the label pairs"));
        }
        if corrections.len() > self.available() {
            return Err(GcError::OtExhausted { needed: corrections.len(), available: self.available() });
        }
        let start = self.next;
        let out = corrections
            .iter()
            .zip(pairs)
            .enumerate()
            .map(|(k, (&e, &(m0, m1)))| self.respond_one(start + k, e, m0, m1))
            .collect::<Result<Vec<_>, _>>()?;
        self.next += corrections.len();
        Ok(out)
    }

    pub fn respond_one(&mut self, idx: usize, e: bool, m0: Label, m1: Label) -> Result<(Label, Label), GcError> {
        let avail = self.records.len().saturating_sub(idx);
        let rec = *self.records.get(idx).ok_or(GcError::OtExhausted { needed: 1, available: avail })?;
        if std::mem::replace(&mut self.used[idx], true) {
            return Err(GcError::OtReused(idx));
        }
        let (xe, xne) = if e { (rec.x1, rec.x0) } else { (rec.x0, rec.x1) };
        Ok((m0 ^ xe, m1 ^ xne))
    }
}

/// Runs complete transfers; returns the chosen messages.
pub fn ot_online(
    sender: &mut OtSender,
    receiver: &mut OtReceiver,
    choices: &[bool],
    pairs: &[(Label, Label)],
) -> Result<Vec<Label>, GcError> {
    let (ticket, corrections) = receiver.request(choices)?;
    let responses = sender.respond(&corrections, pairs)?;
    receiver.recover(&ticket, &responses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    proptest! {
        #[test]
        fn transfers_the_chosen_label(seed in any::<u64>(), choices in proptest::collection::vec(any::<bool>(), 1..40)) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (mut s, mut r) = ot_precompute(choices.len(), 80, &mut rng);
            let pairs: Vec<_> = (0..choices.len()).map(|_| (rng.gen::<u128>() & label_mask(80), rng.gen::<u128>() & label_mask(80))).collect();
            let got = ot_online(&mut s, &mut r, &choices, &pairs).unwrap();
            for ((c, p), g) in choices.iter().zip(&pairs).zip(&got) {
                prop_assert_eq!(*g, if *c { p.1 } else { p.0 });
            }
        }
    }

    #[test]
    fn exhaustion_and_reuse() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let (mut s, mut r) = ot_precompute(2, 16, &mut rng);
        let pairs = [(1, 2), (3, 4)];
        assert_eq!(ot_online(&mut s, &mut r, &[true, false], &pairs).unwrap(), vec![2, 3]);
        assert_eq!(r.request(&[true]).unwrap_err(), GcError::OtExhausted { needed: 1, available: 0 });
        assert_eq!(s.respond_one(0, false, 5, 6).unwrap_err(), GcError::OtReused(0));
        assert_eq!(r.correction(1, true).unwrap_err(), GcError::OtReused(1));
    }
}
