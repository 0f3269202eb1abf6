//! Boolean circuits over XOR, AND and NOT, and the decision circuit.

use num_bigint::BigUint;

use crate::error::GcError;

pub type WireId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Xor { a: WireId, b: WireId, out: WireId },
    And { a: WireId, b: WireId, out: WireId },
    Not { a: WireId, out: WireId },
}

/// Topologically ordered circuit. Garbler inputs, then evaluator inputs,
/// occupy the lowest wire ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    wires: usize,
    garbler_inputs: Vec<WireId>,
    evaluator_inputs: Vec<WireId>,
    gates: Vec<Gate>,
    outputs: Vec<WireId>,
}

impl Circuit {
    pub fn wire_count(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn garbler_inputs(&self) -> &[WireId] {
        &self.garbler_inputs
    }

    pub fn evaluator_inputs(&self) -> &[WireId] {
        &self.evaluator_inputs
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    /// Gates that need a garbled table; XOR and NOT are free.
    pub fn non_xor_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::And { .. })).count()
    }

    pub fn xor_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Xor { .. })).count()
    }

    pub fn eval_plain(&self, garbler: &[bool], evaluator: &[bool]) -> Result<Vec<bool>, GcError> {
        check_len("garbler", self.garbler_inputs.len(), garbler.len())?;
        check_len("evaluator", self.evaluator_inputs.len(), evaluator.len())?;
        let mut v = vec![false; self.wires];
        for (&w, &b) in self.garbler_inputs.iter().zip(garbler) {
            v[w] = b;
        }
        for (&w, &b) in self.evaluator_inputs.iter().zip(evaluator) {
            v[w] = b;
        }
        for g in &self.gates {
            match *g {
                Gate::Xor { a, b, out } => v[out] = v[a] ^ v[b],
                Gate::And { a, b, out } => v[out] = v[a] & v[b],
                Gate::Not { a, out } => v[out] = !v[a],
            }
        }
        Ok(self.outputs.iter().map(|&w| v[w]).collect())
    }
}

pub(crate) fn check_len(party: &'static str, expected: usize, got: usize) -> Result<(), GcError> {
    if expected == got {
        Ok(())
    } else {
        Err(GcError::InputCount { party, expected, got })
    }
}

#[derive(Debug, Default)]
pub struct CircuitBuilder {
    wires: usize,
    garbler_inputs: Vec<WireId>,
    evaluator_inputs: Vec<WireId>,
    gates: Vec<Gate>,
    outputs: Vec<WireId>,
    inputs_closed: bool,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self) -> WireId {
        self.wires += 1;
        self.wires - 1
    }

    pub fn garbler_input(&mut self) -> WireId {
        assert!(!self.inputs_closed && self.evaluator_inputs.is_empty(), "declare garbler inputs first");
        let w = self.fresh();
        self.garbler_inputs.push(w);
        w
    }

    pub fn evaluator_input(&mut self) -> WireId {
        assert!(!self.inputs_closed, "inputs must precede gates");
        let w = self.fresh();
        self.evaluator_inputs.push(w);
        w
    }

    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.inputs_closed = true;
        let out = self.fresh();
        self.gates.push(Gate::Xor { a, b, out });
        out
    }

    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.inputs_closed = true;
        let out = self.fresh();
        self.gates.push(Gate::And { a, b, out });
        out
    }

    pub fn not(&mut self, a: WireId) -> WireId {
        self.inputs_closed = true;
        let out = self.fresh();
        self.gates.push(Gate::Not { a, out });
        out
    }

    /// `maj(a, b, c) = a ^ ((a ^ b) & (a ^ c))`, one AND.
    pub fn majority(&mut self, a: WireId, b: WireId, c: WireId) -> WireId {
        let ab = self.xor(a, b);
        let ac = self.xor(a, c);
        let t = self.and(ab, ac);
        self.xor(a, t)
    }

    /// `maj(a, b, 1)`, one AND and no constant wire.
    fn majority_with_one(&mut self, a: WireId, b: WireId) -> WireId {
        let ab = self.xor(a, b);
        let na = self.not(a);
        let t = self.and(ab, na);
        self.xor(a, t)
    }

    /// Ripple computation of `x + !y + 1` over `w` bits (LSB first): the
    /// difference bits and the carry out of the top bit. Uses exactly `w` ANDs.
    pub fn sub_with_carry(&mut self, x: &[WireId], y: &[WireId]) -> (Vec<WireId>, WireId) {
        assert_eq!(x.len(), y.len());
        assert!(!x.is_empty());
        let mut diff = Vec::with_capacity(x.len());
        let mut carry: Option<WireId> = None;
        for (&xi, &yi) in x.iter().zip(y) {
            let nyi = self.not(yi);
            let next = match carry {
                None => {
                    // Carry-in is the constant 1: x ^ !y ^ 1 = x ^ y.
                    diff.push(self.xor(xi, yi));
                    self.majority_with_one(xi, nyi)
                }
                Some(c) => {
                    let t = self.xor(xi, nyi);
                    diff.push(self.xor(t, c));
                    self.majority(xi, nyi, c)
                }
            };
            carry = Some(next);
        }
        (diff, carry.expect("non-empty"))
    }

    /// `x - y mod 2^w`. The borrow out of the top bit is computed as in a full
    /// `w`-bit subtractor but not exposed.
    pub fn sub_mod(&mut self, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
        self.sub_with_carry(x, y).0
    }

    /// `x < y` as `NOT carry(x + !y + 1)`.
    pub fn less_than(&mut self, x: &[WireId], y: &[WireId]) -> WireId {
        let carry = self.carry_out(x, y);
        self.not(carry)
    }

    /// Carry out of `x + !y + 1` without the difference bits.
    fn carry_out(&mut self, x: &[WireId], y: &[WireId]) -> WireId {
        assert_eq!(x.len(), y.len());
        let mut carry: Option<WireId> = None;
        for (&xi, &yi) in x.iter().zip(y) {
            let nyi = self.not(yi);
            carry = Some(match carry {
                None => self.majority_with_one(xi, nyi),
                Some(c) => self.majority(xi, nyi, c),
            });
        }
        carry.expect("non-empty")
    }

    pub fn output(&mut self, w: WireId) {
        self.outputs.push(w);
    }

    pub fn finish(self) -> Circuit {
        Circuit {
            wires: self.wires,
            garbler_inputs: self.garbler_inputs,
            evaluator_inputs: self.evaluator_inputs,
            gates: self.gates,
            outputs: self.outputs,
        }
    }
}

/// Input layout of the decision circuit; all values are `w` bits, LSB first.
///
/// Evaluator: masked numerator, then its scaled threshold.
/// Garbler: the mask, then (dual mode) its own scaled threshold.
/// Output 0 goes to the evaluator, output 1 (dual mode) to the garbler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionLayout {
    pub width: u32,
    pub dual: bool,
}

impl DecisionLayout {
    pub fn garbler_bits(&self) -> usize {
        self.width as usize * if self.dual { 2 } else { 1 }
    }

    pub fn evaluator_bits(&self) -> usize {
        2 * self.width as usize
    }

    pub fn garbler_bit_vector(&self, mask: &BigUint, thr_scaled: Option<&BigUint>) -> Result<Vec<bool>, GcError> {
        let mut bits = to_bits(mask, self.width);
        if let Some(thr) = thr_scaled {
            bits.extend(to_bits(thr, self.width));
        }
        check_len("garbler", self.garbler_bits(), bits.len())?;
        Ok(bits)
    }

    pub fn evaluator_bit_vector(&self, masked: &BigUint, thr_scaled: &BigUint) -> Vec<bool> {
        let mut bits = to_bits(masked, self.width);
        bits.extend(to_bits(thr_scaled, self.width));
        bits
    }
}

/// Low `w` bits of `v`, LSB first; higher bits are dropped (reduction mod `2^w`).
pub fn to_bits(v: &BigUint, w: u32) -> Vec<bool> {
    (0..u64::from(w)).map(|i| v.bit(i)).collect()
}

pub fn from_bits(bits: &[bool]) -> BigUint {
    let mut v = BigUint::default();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            v.set_bit(i as u64, true);
        }
    }
    v
}

/// Subtract-then-compare: `r = masked - mask mod 2^w`, then `r < T_i` (and
/// `r < T_j` in dual mode). `w` ANDs per block: `2w` single, `3w` dual.
pub fn build_decision_circuit(width: u32, dual: bool, modulus_bits: u32) -> Result<Circuit, GcError> {
    if width == 0 || width >= modulus_bits {
        return Err(GcError::Width { width, modulus_bits });
    }
    let w = width as usize;
    let mut b = CircuitBuilder::new();
    let mask: Vec<_> = (0..w).map(|_| b.garbler_input()).collect();
    let thr_j: Vec<_> = if dual { (0..w).map(|_| b.garbler_input()).collect() } else { Vec::new() };
    let masked: Vec<_> = (0..w).map(|_| b.evaluator_input()).collect();
    let thr_i: Vec<_> = (0..w).map(|_| b.evaluator_input()).collect();
    let r = b.sub_mod(&masked, &mask);
    let lt_i = b.less_than(&r, &thr_i);
    b.output(lt_i);
    if dual {
        let lt_j = b.less_than(&r, &thr_j);
        b.output(lt_j);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decide(c: &Circuit, layout: DecisionLayout, masked: u64, mask: u64, ti: u64, tj: Option<u64>) -> Vec<bool> {
        let g = layout.garbler_bit_vector(&mask.into(), tj.map(BigUint::from).as_ref()).unwrap();
        let e = layout.evaluator_bit_vector(&masked.into(), &ti.into());
        c.eval_plain(&g, &e).unwrap()
    }

    #[test]
    fn gate_counts() {
        for w in 1..40 {
            assert_eq!(build_decision_circuit(w, true, 248).unwrap().non_xor_count(), 3 * w as usize);
            assert_eq!(build_decision_circuit(w, false, 248).unwrap().non_xor_count(), 2 * w as usize);
        }
        assert_eq!(build_decision_circuit(8, true, 248).unwrap().non_xor_count(), 24);
        assert_eq!(build_decision_circuit(248, true, 248), Err(GcError::Width { width: 248, modulus_bits: 248 }));
        assert!(build_decision_circuit(0, true, 248).is_err());
    }

    #[test]
    fn plaintext_example() {
        let layout = DecisionLayout { width: 4, dual: false };
        let c = build_decision_circuit(4, false, 248).unwrap();
        assert_eq!(decide(&c, layout, 9, 4, 6, None), vec![true]);
        assert_eq!(decide(&c, layout, 9, 4, 5, None), vec![false]);
    }

    #[test]
    fn truncated_subtraction_is_exact() {
        // Brute force over every numerator for w = 6 with masks wider than 2^w.
        let w = 6u32;
        let layout = DecisionLayout { width: w, dual: true };
        let c = build_decision_circuit(w, true, 248).unwrap();
        for n_val in 0u64..64 {
            for &s in &[0u64, 1, 63, 64, 1000, 123_456_789, u64::MAX >> 8] {
                let masked = (n_val + s) % 64;
                for thr in [0u64, n_val, (n_val + 1).min(63), 63] {
                    let out = decide(&c, layout, masked, s % 64, thr, Some(63 - thr));
                    assert_eq!(out, vec![n_val < thr, n_val < 63 - thr], "n={n_val} s={s} thr={thr}");
                }
            }
        }
    }

    #[test]
    fn input_count_mismatch() {
        let c = build_decision_circuit(3, false, 248).unwrap();
        assert_eq!(
            c.eval_plain(&[true], &[false; 6]),
            Err(GcError::InputCount { party: "garbler", expected: 3, got: 1 })
        );
    }

    proptest! {
        #[test]
        fn subtractor_matches_integers(x in any::<u16>(), y in any::<u16>()) {
            let mut b = CircuitBuilder::new();
            let ys: Vec<_> = (0..16).map(|_| b.garbler_input()).collect();
            let xs: Vec<_> = (0..16).map(|_| b.evaluator_input()).collect();
            let d = b.sub_mod(&xs, &ys);
            let lt = b.less_than(&xs, &ys);
            for w in d {
                b.output(w);
            }
            b.output(lt);
            let c = b.finish();
            let out = c.eval_plain(&to_bits(&y.into(), 16), &to_bits(&x.into(), 16)).unwrap();
            prop_assert_eq!(from_bits(&out[..16]), BigUint::from(x.wrapping_sub(y)));
            prop_assert_eq!(out[16], x < y);
        }
    }
}
