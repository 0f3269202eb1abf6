//! Framed protocol records with exact bit accounting.

use crate::codec::{BitReader, BitWriter, Reader, Writer};
use crate::error::{CodecError, GcError};

use super::garble::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    GarblerToEvaluator,
    EvaluatorToGarbler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    OtCorrections,
    Tables,
    GarblerLabels,
    OtResponses,
    DecodeBits,
    OutputLabel,
}

impl RecordKind {
    pub const ALL: [RecordKind; 6] = [
        RecordKind::OtCorrections,
        RecordKind::Tables,
        RecordKind::GarblerLabels,
        RecordKind::OtResponses,
        RecordKind::DecodeBits,
        RecordKind::OutputLabel,
    ];

    fn tag(self) -> u8 {
        match self {
            RecordKind::OtCorrections => 1,
            RecordKind::Tables => 2,
            RecordKind::GarblerLabels => 3,
            RecordKind::OtResponses => 4,
            RecordKind::DecodeBits => 5,
            RecordKind::OutputLabel => 6,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Garbled tables, garbler input labels and OT answers: the bulk that
    /// the final-step cost formula counts.
    pub fn is_core(self) -> bool {
        matches!(self, RecordKind::Tables | RecordKind::GarblerLabels | RecordKind::OtResponses)
    }

    pub fn name(self) -> &'static str {
        match self {
            RecordKind::OtCorrections => "ot-corrections",
            RecordKind::Tables => "tables",
            RecordKind::GarblerLabels => "garbler-labels",
            RecordKind::OtResponses => "ot-responses",
            RecordKind::DecodeBits => "decode-bits",
            RecordKind::OutputLabel => "output-label",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub round: u8,
    pub direction: Direction,
    pub kind: RecordKind,
    pub bits: u64,
    pub payload: Vec<u8>,
}

impl Record {
    pub fn new(round: u8, direction: Direction, kind: RecordKind, body: BitWriter) -> Self {
        let (payload, bits) = body.into_parts();
        Self { round, direction, kind, bits, payload }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::new(&self.payload, self.bits)
    }

    pub fn expect(&self, kind: RecordKind, bits: u64) -> Result<BitReader<'_>, GcError> {
        if self.kind != kind {
            return Err(GcError::Protocol("unexpected record kind"));
        }
        if self.bits != bits {
            return Err(GcError::Protocol("record length does not match the circuit"));
        }
        Ok(self.reader())
    }
}

pub fn write_labels(w: &mut BitWriter, labels: impl IntoIterator<Item = Label>, t: u32) {
    for l in labels {
        w.put(l, t);
    }
}

pub fn write_bits(w: &mut BitWriter, bits: impl IntoIterator<Item = bool>) {
    for b in bits {
        w.put(u128::from(b), 1);
    }
}

/// Ordered records of one garbled-circuit execution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Request/response exchanges.
    pub fn rounds(&self) -> u8 {
        self.records.iter().map(|r| r.round).max().unwrap_or(0)
    }

    pub fn bits_of(&self, kind: RecordKind) -> u64 {
        self.records.iter().filter(|r| r.kind == kind).map(|r| r.bits).sum()
    }

    pub fn core_bits(&self) -> u64 {
        self.records.iter().filter(|r| r.kind.is_core()).map(|r| r.bits).sum()
    }

    pub fn auxiliary_bits(&self) -> u64 {
        self.records.iter().filter(|r| !r.kind.is_core()).map(|r| r.bits).sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.records.iter().map(|r| r.bits).sum()
    }

    /// `tag || round || direction || varint(bits) || payload` per record.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        for r in &self.records {
            w.put_u8(r.kind.tag());
            w.put_u8(r.round);
            w.put_u8(match r.direction {
                Direction::GarblerToEvaluator => 0,
                Direction::EvaluatorToGarbler => 1,
            });
            w.put_varint(r.bits);
            w.put_raw(&r.payload);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let mut out = Transcript::default();
        while !r.clone().finish().is_ok() {
            let tag = r.get_u8("record tag")?;
            let kind = RecordKind::from_tag(tag).ok_or_else(|| CodecError::Malformed(format!("record tag {tag}")))?;
            let round = r.get_u8("record round")?;
            let direction = match r.get_u8("record direction")? {
                0 => Direction::GarblerToEvaluator,
                1 => Direction::EvaluatorToGarbler,
                d => return Err(CodecError::Malformed(format!("direction {d}"))),
            };
            let bits = r.get_varint("record length")?;
            let len = usize::try_from(bits.div_ceil(8)).map_err(|_| CodecError::Malformed("record length".into()))?;
            let payload = r.get_bytes(len, "record payload")?.to_vec();
            out.push(Record { round, direction, kind, bits, payload });
        }
        Ok(out)
    }
}
