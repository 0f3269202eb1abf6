//! Canonical wire encodings: LEB128 varints, fixed-width big-endian integers,
//! length-prefixed byte strings, and a bit-granular packer for garbled-circuit
//! records whose label length need not be a multiple of eight.

use num_bigint::BigUint;

use crate::error::CodecError;

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_varint(&mut self, mut v: u64) {
        loop {
            let byte = (v & 0x7f) as u8;
            v >>= 7;
            if v == 0 {
                self.buf.push(byte);
                return;
            }
            self.buf.push(byte | 0x80);
        }
    }

    /// Big-endian, left-padded to exactly `len` bytes.
    pub fn put_fixed(&mut self, v: &BigUint, len: usize) {
        let bytes = v.to_bytes_be();
        assert!(bytes.len() <= len || v.bits() == 0, "value wider than {len} bytes");
        let bytes: &[u8] = if v.bits() == 0 { &[] } else { &bytes };
        self.buf.extend(std::iter::repeat(0u8).take(len - bytes.len()));
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_prefixed(&mut self, bytes: &[u8]) {
        self.put_varint(bytes.len() as u64);
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub fn varint_len(v: u64) -> usize {
    let bits = 64 - v.leading_zeros() as usize;
    bits.max(1).div_ceil(7)
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CodecError> {
        if self.buf.len() - self.pos < n {
            return Err(CodecError::Truncated(what));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn get_u8(&mut self, what: &'static str) -> Result<u8, CodecError> {
        Ok(self.take(1, what)?[0])
    }

    pub fn get_varint(&mut self, what: &'static str) -> Result<u64, CodecError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.get_u8(what)?;
            let chunk = u64::from(b & 0x7f);
            if shift == 63 && chunk > 1 {
                return Err(CodecError::Malformed(format!("{what}: varint overflow")));
            }
            v |= chunk << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(CodecError::Malformed(format!("{what}: varint too long")))
    }

    pub fn get_bytes(&mut self, len: usize, what: &'static str) -> Result<&'a [u8], CodecError> {
        self.take(len, what)
    }

    pub fn get_fixed(&mut self, len: usize, what: &'static str) -> Result<BigUint, CodecError> {
        Ok(BigUint::from_bytes_be(self.take(len, what)?))
    }

    pub fn get_prefixed(&mut self, what: &'static str) -> Result<&'a [u8], CodecError> {
        let len = self.get_varint(what)?;
        let len = usize::try_from(len).map_err(|_| CodecError::Malformed(what.into()))?;
        self.take(len, what)
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(CodecError::Trailing(n)),
        }
    }
}

/// Packs values MSB-first at bit granularity.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, value: u128, width: u32) {
        for i in (0..width).rev() {
            let bit = (value >> i) & 1 == 1;
            if self.bits % 8 == 0 {
                self.bytes.push(0);
            }
            if bit {
                let last = self.bytes.last_mut().expect("pushed above");
                *last |= 0x80 >> (self.bits % 8);
            }
            self.bits += 1;
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bits
    }

    pub fn into_parts(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bits)
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bits: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bits: u64) -> Self {
        Self { bytes, bits, pos: 0 }
    }

    pub fn get(&mut self, width: u32) -> Result<u128, CodecError> {
        if self.pos + u64::from(width) > self.bits {
            return Err(CodecError::Truncated("bit field"));
        }
        let mut v = 0u128;
        for _ in 0..width {
            let byte = self.bytes[(self.pos / 8) as usize];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | u128::from(bit);
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn remaining(&self) -> u64 {
        self.bits - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn varint_lengths() {
        assert_eq!(varint_len(0), 1);
        assert_eq!(varint_len(127), 1);
        assert_eq!(varint_len(128), 2);
        let mut w = Writer::new();
        w.put_varint(300);
        assert_eq!(w.into_bytes(), vec![0xac, 0x02]);
    }

    #[test]
    fn truncated_and_trailing_inputs_are_rejected() {
        let mut r = Reader::new(&[0x80]);
        assert_eq!(r.get_varint("x"), Err(CodecError::Truncated("x")));
        let r = Reader::new(&[1, 2]);
        assert_eq!(r.finish(), Err(CodecError::Trailing(2)));
    }

    proptest! {
        #[test]
        fn writer_reader_roundtrip(a in any::<u64>(), b in proptest::collection::vec(any::<u8>(), 0..40), c in any::<u128>()) {
            let mut w = Writer::new();
            w.put_varint(a);
            w.put_prefixed(&b);
            w.put_fixed(&BigUint::from(c), 16);
            prop_assert_eq!(w.len(), varint_len(a) + varint_len(b.len() as u64) + b.len() + 16);
            let bytes = w.into_bytes();
            let mut r = Reader::new(&bytes);
            prop_assert_eq!(r.get_varint("a").unwrap(), a);
            prop_assert_eq!(r.get_prefixed("b").unwrap(), &b[..]);
            prop_assert_eq!(r.get_fixed(16, "c").unwrap(), BigUint::from(c));
            r.finish().unwrap();
        }

        #[test]
        fn bit_packing_roundtrip(vals in proptest::collection::vec((any::<u128>(), 1u32..=128), 0..20)) {
            let mut w = BitWriter::new();
            for &(v, width) in &vals {
                w.put(v, width);
            }
            let total: u64 = vals.iter().map(|&(_, wd)| u64::from(wd)).sum();
            prop_assert_eq!(w.bit_len(), total);
            let (bytes, bits) = w.into_parts();
            let mut r = BitReader::new(&bytes, bits);
            for &(v, width) in &vals {
                let mask = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
                prop_assert_eq!(r.get(width).unwrap(), v & mask);
            }
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}
