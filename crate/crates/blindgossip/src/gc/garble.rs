//! Free-XOR garbling with point-and-permute and three-row reduction.
//!
//! Labels are `t`-bit strings stored in a `u128`; the permute bit is the label's
//! least significant bit and the global offset `delta` has it set. The gate key
//! is `H(A || B || gate_id)` truncated to `t` bits.

use rand::Rng;
use sha2::{Digest, Sha256};

use super::circuit::{check_len, Circuit, Gate};
use crate::error::GcError;

pub type Label = u128;

pub fn label_mask(t: u32) -> Label {
    if t == 128 {
        u128::MAX
    } else {
        (1u128 << t) - 1
    }
}

pub fn check_label_bits(t: u32) -> Result<(), GcError> {
    if (1..=128).contains(&t) {
        Ok(())
    } else {
        Err(GcError::LabelBits(t))
    }
}

/// Counts hash invocations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateHasher {
    t: u32,
    pub calls: u64,
}

impl GateHasher {
    pub fn new(t: u32) -> Self {
        Self { t, calls: 0 }
    }

    pub fn hash(&mut self, a: Label, b: Label, gate: u64) -> Label {
        self.calls += 1;
        let mut h = Sha256::new();
        h.update(a.to_be_bytes());
        h.update(b.to_be_bytes());
        h.update(gate.to_be_bytes());
        let digest = h.finalize();
        let mut head = [0u8; 16];
        head.copy_from_slice(&digest[..16]);
        u128::from_be_bytes(head) & label_mask(self.t)
    }
}

/// Three ciphertext rows of a reduced table, indexed by `2i + j - 1` for
/// permute bits `(i, j) != (0, 0)`.
pub type GarbledTable = [Label; 3];

/// Everything the garbler keeps private.
#[derive(Debug, Clone)]
pub struct GarblerSecrets {
    pub t: u32,
    pub delta: Label,
    /// Zero-label of every wire.
    pub zero_labels: Vec<Label>,
    pub hash_calls: u64,
}

impl GarblerSecrets {
    pub fn label(&self, wire: usize, bit: bool) -> Label {
        self.zero_labels[wire] ^ if bit { self.delta } else { 0 }
    }

    pub fn garbler_input_labels(&self, circuit: &Circuit, bits: &[bool]) -> Result<Vec<Label>, GcError> {
        check_len("garbler", circuit.garbler_inputs().len(), bits.len())?;
        Ok(circuit.garbler_inputs().iter().zip(bits).map(|(&w, &b)| self.label(w, b)).collect())
    }

    /// Label pairs for the evaluator's input wires, offered through OT.
    pub fn evaluator_label_pairs(&self, circuit: &Circuit) -> Vec<(Label, Label)> {
        circuit.evaluator_inputs().iter().map(|&w| (self.label(w, false), self.label(w, true))).collect()
    }

    /// Per output wire: the permute bit of its zero-label.
    pub fn decode_bits(&self, circuit: &Circuit) -> Vec<bool> {
        circuit.outputs().iter().map(|&w| self.zero_labels[w] & 1 == 1).collect()
    }

    /// Maps an output label back to its bit, rejecting anything else.
    pub fn decode_label(&self, circuit: &Circuit, output: usize, label: Label) -> Result<bool, GcError> {
        let w = circuit.outputs()[output];
        if label == self.label(w, false) {
            Ok(false)
        } else if label == self.label(w, true) {
            Ok(true)
        } else {
            Err(GcError::Decode(w))
        }
    }

    /// Free-XOR invariant: every wire's pair is `(l0, l0 ^ delta)` with labels
    /// inside `t` bits, and XOR/NOT outputs are consistent with their inputs.
    pub fn check_offsets(&self, circuit: &Circuit) -> bool {
        let mask = label_mask(self.t);
        let pair = |w: usize| (self.label(w, false), self.label(w, true));
        self.delta & 1 == 1
            && self.zero_labels.iter().all(|&l| l & !mask == 0)
            && circuit.gates().iter().all(|g| match *g {
                Gate::Xor { a, b, out } => {
                    let (o0, o1) = pair(out);
                    o0 == pair(a).0 ^ pair(b).0 && o1 ^ o0 == self.delta
                }
                Gate::Not { a, out } => pair(out) == (pair(a).1, pair(a).0),
                Gate::And { out, .. } => pair(out).1 ^ pair(out).0 == self.delta,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledCircuit {
    pub t: u32,
    /// One table per AND gate, in gate order.
    pub tables: Vec<GarbledTable>,
}

fn random_label<R: Rng + ?Sized>(rng: &mut R, t: u32) -> Label {
    rng.gen::<u128>() & label_mask(t)
}

pub fn garble<R: Rng + ?Sized>(circuit: &Circuit, t: u32, rng: &mut R) -> Result<(GarbledCircuit, GarblerSecrets), GcError> {
    check_label_bits(t)?;
    let delta = random_label(rng, t) | 1;
    let mut zero = vec![0 as Label; circuit.wire_count()];
    for &w in circuit.garbler_inputs().iter().chain(circuit.evaluator_inputs()) {
        zero[w] = random_label(rng, t);
    }
    let mut hasher = GateHasher::new(t);
    let mut tables = Vec::with_capacity(circuit.non_xor_count());
    for (gid, gate) in circuit.gates().iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => zero[out] = zero[a] ^ zero[b],
            // The evaluator passes the label through; the garbler swaps meanings.
            Gate::Not { a, out } => zero[out] = zero[a] ^ delta,
            Gate::And { a, b, out } => {
                let (a0, b0) = (zero[a], zero[b]);
                let (pa, pb) = (a0 & 1 == 1, b0 & 1 == 1);
                let sel = |l0: Label, colour: bool, p: bool| (l0 ^ if colour != p { delta } else { 0 }, colour != p);
                let mut keys = [0 as Label; 4];
                let mut values = [false; 4];
                for i in 0..2 {
                    for j in 0..2 {
                        let (la, va) = sel(a0, i == 1, pa);
                        let (lb, vb) = sel(b0, j == 1, pb);
                        keys[2 * i + j] = hasher.hash(la, lb, gid as u64);
                        values[2 * i + j] = va & vb;
                    }
                }
                // Row (0, 0) is implicit: its key is the output label it selects.
                let c0 = keys[0] ^ if values[0] { delta } else { 0 };
                zero[out] = c0;
                let mut table = [0 as Label; 3];
                for k in 1..4 {
                    table[k - 1] = keys[k] ^ c0 ^ if values[k] { delta } else { 0 };
                }
                tables.push(table);
            }
        }
    }
    let secrets = GarblerSecrets { t, delta, zero_labels: zero, hash_calls: hasher.calls };
    debug_assert!(secrets.check_offsets(circuit));
    Ok((GarbledCircuit { t, tables }, secrets))
}

/// Evaluates on one label per input wire; returns the output labels and the
/// number of hash calls.
pub fn evaluate(
    circuit: &Circuit,
    garbled: &GarbledCircuit,
    garbler_labels: &[Label],
    evaluator_labels: &[Label],
) -> Result<(Vec<Label>, u64), GcError> {
    check_len("garbler", circuit.garbler_inputs().len(), garbler_labels.len())?;
    check_len("evaluator", circuit.evaluator_inputs().len(), evaluator_labels.len())?;
    if garbled.tables.len() != circuit.non_xor_count() {
        return Err(GcError::Protocol("table count does not match the circuit"));
    }
    let mut v = vec![0 as Label; circuit.wire_count()];
    for (&w, &l) in circuit.garbler_inputs().iter().zip(garbler_labels) {
        v[w] = l;
    }
    for (&w, &l) in circuit.evaluator_inputs().iter().zip(evaluator_labels) {
        v[w] = l;
    }
    let mut hasher = GateHasher::new(garbled.t);
    let mut tables = garbled.tables.iter();
    for (gid, gate) in circuit.gates().iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => v[out] = v[a] ^ v[b],
            Gate::Not { a, out } => v[out] = v[a],
            Gate::And { a, b, out } => {
                let table = tables.next().expect("count checked");
                let (la, lb) = (v[a], v[b]);
                let row = 2 * (la & 1) as usize + (lb & 1) as usize;
                let key = hasher.hash(la, lb, gid as u64);
                v[out] = if row == 0 { key } else { key ^ table[row - 1] };
            }
        }
    }
    Ok((circuit.outputs().iter().map(|&w| v[w]).collect(), hasher.calls))
}

/// Output bit from a label's permute bit and the published decode bit.
pub fn decode_with_bit(label: Label, decode_bit: bool) -> bool {
    (label & 1 == 1) ^ decode_bit
}
