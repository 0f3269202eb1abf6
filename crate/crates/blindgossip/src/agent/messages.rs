use num_bigint::BigUint;

use crate::arith::ModulusParams;
use crate::codec::{Reader, Writer};
use crate::error::{CodecError, PreError};
use crate::pre::{EnvelopeL1, EnvelopeL2, PairingGroup};

/// Round 1: re-masked numerator, the previous mask re-encrypted for the
/// partner (absent while the sender still holds the bootstrap zero mask), and
/// the denominator exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateMsg1<B: PairingGroup> {
    pub numerator: BigUint,
    pub envelope: Option<EnvelopeL1<B>>,
    pub denom_exp: u32,
}

/// Round 2: obfuscated fused numerator, the fused exponent, and a fresh
/// level-2 envelope of the new mask under the sender's own key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateMsg2<B: PairingGroup> {
    pub numerator: BigUint,
    pub denom_exp: u32,
    pub envelope: EnvelopeL2<B>,
}

fn read_numerator(params: &ModulusParams, r: &mut Reader<'_>) -> Result<BigUint, PreError> {
    let v = r.get_fixed(params.byte_len(), "numerator")?;
    if !params.contains(&v) {
        return Err(CodecError::Malformed("numerator is not below n".into()).into());
    }
    Ok(v)
}

fn read_exp(r: &mut Reader<'_>) -> Result<u32, PreError> {
    let e = r.get_varint("denominator exponent")?;
    u32::try_from(e).map_err(|_| CodecError::Malformed(format!("denominator exponent {e}")).into())
}

impl<B: PairingGroup> UpdateMsg1<B> {
    pub fn encode(&self, group: &B, params: &ModulusParams) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_fixed(&self.numerator, params.byte_len());
        w.put_varint(u64::from(self.denom_exp));
        match &self.envelope {
            None => w.put_u8(0),
            Some(env) => {
                w.put_u8(1);
                env.encode(group, params, &mut w);
            }
        }
        w.into_bytes()
    }

    pub fn decode(group: &B, params: &ModulusParams, bytes: &[u8]) -> Result<Self, PreError> {
        let mut r = Reader::new(bytes);
        let numerator = read_numerator(params, &mut r)?;
        let denom_exp = read_exp(&mut r)?;
        let envelope = match r.get_u8("envelope flag")? {
            0 => None,
            1 => Some(EnvelopeL1::decode(group, params, &mut r)?),
            f => return Err(CodecError::Malformed(format!("envelope flag {f}")).into()),
        };
        r.finish()?;
        Ok(Self { numerator, envelope, denom_exp })
    }
}

impl<B: PairingGroup> UpdateMsg2<B> {
    pub fn encode(&self, group: &B, params: &ModulusParams) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_fixed(&self.numerator, params.byte_len());
        w.put_varint(u64::from(self.denom_exp));
        self.envelope.encode(group, params, &mut w);
        w.into_bytes()
    }

    pub fn decode(group: &B, params: &ModulusParams, bytes: &[u8]) -> Result<Self, PreError> {
        let mut r = Reader::new(bytes);
        let numerator = read_numerator(params, &mut r)?;
        let denom_exp = read_exp(&mut r)?;
        let envelope = EnvelopeL2::decode(group, params, &mut r)?;
        r.finish()?;
        Ok(Self { numerator, denom_exp, envelope })
    }
}
