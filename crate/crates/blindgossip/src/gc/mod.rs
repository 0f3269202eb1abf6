//! Two-party threshold decision over a garbled subtract-then-compare circuit.
//!
//! Message flow (one record per arrow, parsed back from its bit payload):
//!
//! ```text
//! round 1  E -> G  OT corrections            (2w bits)
//!          G -> E  tables, garbler labels, OT responses, decode bit
//! round 2  E -> G  output label for the garbler (dual mode only)
//! ```

pub mod circuit;
pub mod garble;
pub mod ot;
pub mod transcript;

use num_bigint::BigUint;
use rand::Rng;

pub use circuit::{build_decision_circuit, from_bits, to_bits, Circuit, CircuitBuilder, DecisionLayout, Gate};
pub use garble::{decode_with_bit, evaluate, garble, GarbledCircuit, GarblerSecrets, Label};
pub use ot::{ot_online, ot_precompute, OtReceiver, OtSender, OtTicket};
pub use transcript::{Direction, Record, RecordKind, Transcript};

use crate::codec::BitWriter;
use crate::error::GcError;
use transcript::{write_bits, write_labels};

/// Final-step core bits for the dual circuit: OT `4wt`, garbler labels `2wt`, tables `9wt`.
pub fn account_final_step(w: u32, t: u32) -> u64 {
    15 * u64::from(w) * u64::from(t)
}

/// Single-output variant: OT `4wt`, garbler labels `wt`, tables `6wt`.
pub fn account_final_step_single(w: u32, t: u32) -> u64 {
    11 * u64::from(w) * u64::from(t)
}

pub fn account_final_step_for(w: u32, t: u32, dual: bool) -> u64 {
    if dual {
        account_final_step(w, t)
    } else {
        account_final_step_single(w, t)
    }
}

/// Garbler side: holds the mask and, in dual mode, its own scaled threshold.
#[derive(Debug)]
pub struct GarblerParty<'c> {
    circuit: &'c Circuit,
    layout: DecisionLayout,
    t: u32,
    bits: Vec<bool>,
    ot: OtSender,
    secrets: Option<GarblerSecrets>,
}

impl<'c> GarblerParty<'c> {
    pub fn new(
        circuit: &'c Circuit,
        layout: DecisionLayout,
        t: u32,
        mask: &BigUint,
        thr_scaled: Option<&BigUint>,
        ot: OtSender,
    ) -> Result<Self, GcError> {
        garble::check_label_bits(t)?;
        if layout.dual != thr_scaled.is_some() {
            return Err(GcError::Protocol("garbler threshold must be present exactly in dual mode"));
        }
        let bits = layout.garbler_bit_vector(mask, thr_scaled)?;
        Ok(Self { circuit, layout, t, bits, ot, secrets: None })
    }

    /// Answers the evaluator's OT corrections with the whole garbled circuit.
    pub fn respond<R: Rng + ?Sized>(&mut self, corrections: &Record, rng: &mut R) -> Result<Vec<Record>, GcError> {
        if self.secrets.is_some() {
            return Err(GcError::Protocol("garbler already answered"));
        }
        let eb = self.layout.evaluator_bits();
        let mut rd = corrections.expect(RecordKind::OtCorrections, eb as u64)?;
        let mut es = Vec::with_capacity(eb);
        for _ in 0..eb {
            es.push(rd.get(1).map_err(|_| GcError::Protocol("short correction record"))? == 1);
        }
        let (gc, secrets) = garble(self.circuit, self.t, rng)?;
        let pairs = secrets.evaluator_label_pairs(self.circuit);
        let responses = self.ot.respond(&es, &pairs)?;
        let g_labels = secrets.garbler_input_labels(self.circuit, &self.bits)?;
        let t = self.t;
        let dir = Direction::GarblerToEvaluator;

        let mut w = BitWriter::new();
        write_labels(&mut w, gc.tables.iter().flatten().copied(), t);
        let tables = Record::new(1, dir, RecordKind::Tables, w);
        let mut w = BitWriter::new();
        write_labels(&mut w, g_labels, t);
        let labels = Record::new(1, dir, RecordKind::GarblerLabels, w);
        let mut w = BitWriter::new();
        write_labels(&mut w, responses.iter().flat_map(|&(a, b)| [a, b]), t);
        let ot = Record::new(1, dir, RecordKind::OtResponses, w);
        let mut w = BitWriter::new();
        write_bits(&mut w, secrets.decode_bits(self.circuit).into_iter().take(1));
        let decode = Record::new(1, dir, RecordKind::DecodeBits, w);

        self.secrets = Some(secrets);
        Ok(vec![tables, labels, ot, decode])
    }

    /// Dual mode: decodes the garbler's own output from the returned label.
    pub fn finish(&self, output: &Record) -> Result<bool, GcError> {
        let secrets = self.secrets.as_ref().ok_or(GcError::Protocol("output label before garbling"))?;
        if !self.layout.dual {
            return Err(GcError::Protocol("single-mode circuit has no garbler output"));
        }
        let mut rd = output.expect(RecordKind::OutputLabel, u64::from(self.t))?;
        let label = rd.get(self.t).map_err(|_| GcError::Protocol("short output label"))?;
        secrets.decode_label(self.circuit, 1, label)
    }

    pub fn hash_calls(&self) -> u64 {
        self.secrets.as_ref().map_or(0, |s| s.hash_calls)
    }
}

/// Evaluator side: holds the masked numerator and its scaled threshold.
#[derive(Debug)]
pub struct EvaluatorParty<'c> {
    circuit: &'c Circuit,
    layout: DecisionLayout,
    t: u32,
    bits: Vec<bool>,
    ot: OtReceiver,
    ticket: Option<OtTicket>,
    hash_calls: u64,
}

impl<'c> EvaluatorParty<'c> {
    pub fn new(
        circuit: &'c Circuit,
        layout: DecisionLayout,
        t: u32,
        masked: &BigUint,
        thr_scaled: &BigUint,
        ot: OtReceiver,
    ) -> Result<Self, GcError> {
        garble::check_label_bits(t)?;
        let bits = layout.evaluator_bit_vector(masked, thr_scaled);
        circuit::check_len("evaluator", circuit.evaluator_inputs().len(), bits.len())?;
        Ok(Self { circuit, layout, t, bits, ot, ticket: None, hash_calls: 0 })
    }

    pub fn request(&mut self) -> Result<Record, GcError> {
        if self.ticket.is_some() {
            return Err(GcError::Protocol("evaluator already requested its labels"));
        }
        let (ticket, corrections) = self.ot.request(&self.bits)?;
        self.ticket = Some(ticket);
        let mut w = BitWriter::new();
        write_bits(&mut w, corrections);
        Ok(Record::new(1, Direction::EvaluatorToGarbler, RecordKind::OtCorrections, w))
    }

    /// Evaluates; returns the evaluator's bit and, in dual mode, the label to
    /// hand back to the garbler.
    pub fn evaluate(&mut self, records: &[Record]) -> Result<(bool, Option<Record>), GcError> {
        let ticket = self.ticket.take().ok_or(GcError::Protocol("garbled circuit before the OT request"))?;
        let [tables, labels, ot, decode] = records else {
            return Err(GcError::Protocol("garbler response must hold four records"));
        };
        let t = self.t;
        let short = |_| GcError::Protocol("short record");
        let ands = self.circuit.non_xor_count();
        let mut rd = tables.expect(RecordKind::Tables, (3 * ands) as u64 * u64::from(t))?;
        let mut gc = GarbledCircuit { t, tables: Vec::with_capacity(ands) };
        for _ in 0..ands {
            gc.tables.push([rd.get(t).map_err(short)?, rd.get(t).map_err(short)?, rd.get(t).map_err(short)?]);
        }
        let gb = self.layout.garbler_bits();
        let mut rd = labels.expect(RecordKind::GarblerLabels, gb as u64 * u64::from(t))?;
        let g_labels = (0..gb).map(|_| rd.get(t).map_err(short)).collect::<Result<Vec<_>, _>>()?;
        let eb = self.bits.len();
        let mut rd = ot.expect(RecordKind::OtResponses, 2 * eb as u64 * u64::from(t))?;
        let responses = (0..eb)
            .map(|_| Ok((rd.get(t).map_err(short)?, rd.get(t).map_err(short)?)))
            .collect::<Result<Vec<_>, GcError>>()?;
        let mut rd = decode.expect(RecordKind::DecodeBits, 1)?;
        let decode_bit = rd.get(1).map_err(short)? == 1;

        let e_labels = self.ot.recover(&ticket, &responses)?;
        let (out, calls) = evaluate(self.circuit, &gc, &g_labels, &e_labels)?;
        self.hash_calls = calls;
        let mine = decode_with_bit(out[0], decode_bit);
        let back = self.layout.dual.then(|| {
            let mut w = BitWriter::new();
            w.put(out[1], t);
            Record::new(2, Direction::EvaluatorToGarbler, RecordKind::OutputLabel, w)
        });
        Ok((mine, back))
    }

    pub fn hash_calls(&self) -> u64 {
        self.hash_calls
    }
}

/// Plaintext inputs of one decision execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionInputs {
    pub layout: DecisionLayout,
    pub mask: BigUint,
    pub garbler_thr: Option<BigUint>,
    pub masked: BigUint,
    pub evaluator_thr: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionOutcome {
    /// `r < thr_evaluator`.
    pub evaluator_result: bool,
    /// `r < thr_garbler`, dual mode only.
    pub garbler_result: Option<bool>,
    pub transcript: Transcript,
    pub garble_hashes: u64,
    pub eval_hashes: u64,
    pub non_xor: usize,
    pub rounds: u8,
    pub label_bits: u32,
}

impl DecisionOutcome {
    pub fn total_hashes(&self) -> u64 {
        self.garble_hashes + self.eval_hashes
    }
}

/// Runs both parties end to end with a fresh OT pool sized to the evaluator's input.
pub fn run_decision<R: Rng + ?Sized>(
    inputs: &DecisionInputs,
    t: u32,
    modulus_bits: u32,
    rng: &mut R,
) -> Result<DecisionOutcome, GcError> {
    let layout = inputs.layout;
    let circuit = build_decision_circuit(layout.width, layout.dual, modulus_bits)?;
    garble::check_label_bits(t)?;
    let (sender, receiver) = ot_precompute(layout.evaluator_bits(), t, rng);
    let mut g = GarblerParty::new(&circuit, layout, t, &inputs.mask, inputs.garbler_thr.as_ref(), sender)?;
    let mut e = EvaluatorParty::new(&circuit, layout, t, &inputs.masked, &inputs.evaluator_thr, receiver)?;

    let mut transcript = Transcript::default();
    let req = e.request()?;
    transcript.push(req.clone());
    let resp = g.respond(&req, rng)?;
    for r in &resp {
        transcript.push(r.clone());
    }
    let (evaluator_result, back) = e.evaluate(&resp)?;
    let garbler_result = match back {
        Some(r) => {
            transcript.push(r.clone());
            Some(g.finish(&r)?)
        }
        None => None,
    };
    Ok(DecisionOutcome {
        evaluator_result,
        garbler_result,
        rounds: transcript.rounds(),
        transcript,
        garble_hashes: g.hash_calls(),
        eval_hashes: e.hash_calls(),
        non_xor: circuit.non_xor_count(),
        label_bits: t,
    })
}
