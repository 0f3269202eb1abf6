use num_bigint::BigUint;
use rand::Rng;
use sha2::{Digest, Sha256};

use super::{CiphertextL1, CiphertextL2, Kem, PairingGroup, Pre, PublicKey, ReKey, SecretKey};
use crate::arith::ModulusParams;
use crate::codec::{Reader, Writer};
use crate::error::PreError;

/// A `Z_n` scalar hidden as `pad = s + H(R) mod n`, with `R` carried by the KEM ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope<C> {
    pub kem: C,
    pub pad: BigUint,
}

pub type EnvelopeL2<B> = Envelope<CiphertextL2<B>>;
pub type EnvelopeL1<B> = Envelope<CiphertextL1<B>>;

/// `SHA-256(encode(R)) mod n`.
pub fn pad_hash<B: PairingGroup>(group: &B, r: &B::Gt, params: &ModulusParams) -> BigUint {
    let digest = Sha256::digest(group.gt_to_bytes(r));
    params.reduce(&BigUint::from_bytes_be(&digest))
}

impl<B: PairingGroup> Pre<B> {
    pub fn wrap_scalar<R: Rng + ?Sized>(
        &self,
        s: &BigUint,
        pk: &PublicKey<B>,
        params: &ModulusParams,
        rng: &mut R,
    ) -> Result<EnvelopeL2<B>, PreError> {
        if !params.contains(s) {
            return Err(PreError::PayloadRange(s.to_string()));
        }
        let r = self.random_gt(rng);
        let pad = params.add(s, &pad_hash(self.group(), &r, params));
        Ok(Envelope { kem: self.encrypt_l2(&r, pk, rng), pad })
    }

    /// Transforms only the KEM part; the pad travels unchanged.
    pub fn reencrypt_envelope(&self, env: &EnvelopeL2<B>, rk: &ReKey<B>) -> EnvelopeL1<B> {
        Envelope { kem: self.reencrypt(&env.kem, rk), pad: env.pad.clone() }
    }

    pub fn unwrap_scalar<C: Kem<B>>(&self, env: &Envelope<C>, sk: &SecretKey, params: &ModulusParams) -> BigUint {
        let r = env.kem.open(self, sk);
        params.sub(&env.pad, &pad_hash(self.group(), &r, params))
    }
}

impl<C> Envelope<C> {
    pub fn encode<B: PairingGroup>(&self, group: &B, params: &ModulusParams, w: &mut Writer)
    where
        C: Kem<B>,
    {
        self.kem.encode(group, w);
        w.put_fixed(&self.pad, params.byte_len());
    }

    pub fn decode<B: PairingGroup>(group: &B, params: &ModulusParams, r: &mut Reader<'_>) -> Result<Self, PreError>
    where
        C: Kem<B>,
    {
        let kem = C::decode(group, r)?;
        let pad = r.get_fixed(params.byte_len(), "envelope pad")?;
        if !params.contains(&pad) {
            return Err(PreError::PadRange);
        }
        Ok(Self { kem, pad })
    }

    pub fn encoded_len<B: PairingGroup>(&self, group: &B, params: &ModulusParams) -> usize
    where
        C: Kem<B>,
    {
        let mut w = Writer::new();
        self.encode(group, params, &mut w);
        w.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pre::ExponentGroup;
    use num_traits::Zero;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params() -> ModulusParams {
        ModulusParams::new(248, 16, 80).unwrap()
    }

    #[test]
    fn zero_payload_pad_is_the_hash() {
        let pre = Pre::new(ExponentGroup::new());
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = pre.keygen(&mut rng);
        let env = pre.wrap_scalar(&BigUint::zero(), &kp.pk, &params(), &mut rng).unwrap();
        let r = pre.decrypt_l2(&env.kem, &kp.sk);
        assert_eq!(env.pad, pad_hash(pre.group(), &r, &params()));
    }

    #[test]
    fn out_of_range_payload_and_pad() {
        let pre = Pre::new(ExponentGroup::new());
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = pre.keygen(&mut rng);
        let p = params();
        assert!(matches!(pre.wrap_scalar(&p.n(), &kp.pk, &p, &mut rng), Err(PreError::PayloadRange(_))));
        // 250-bit n leaves spare bits in the 32-byte pad field.
        let p = ModulusParams::new(250, 16, 80).unwrap();
        let mut env = pre.wrap_scalar(&BigUint::from(3u8), &kp.pk, &p, &mut rng).unwrap();
        env.pad = p.n();
        let mut w = Writer::new();
        env.encode(pre.group(), &p, &mut w);
        let bytes = w.into_bytes();
        let got = EnvelopeL2::<ExponentGroup>::decode(pre.group(), &p, &mut Reader::new(&bytes));
        assert_eq!(got, Err(PreError::PadRange));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn handoff_round_trip(seed in any::<u64>(), s in any::<u128>()) {
            let pre = Pre::new(ExponentGroup::new());
            let p = params();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = pre.keygen(&mut rng);
            let b = pre.keygen(&mut rng);
            let s = BigUint::from(s);
            let env = pre.wrap_scalar(&s, &a.pk, &p, &mut rng).unwrap();
            prop_assert_eq!(pre.unwrap_scalar(&env, &a.sk, &p), s.clone());
            let moved = pre.reencrypt_envelope(&env, &pre.rekey(&a.sk, &b.pk));
            prop_assert_eq!(&moved.pad, &env.pad);
            prop_assert_eq!(pre.unwrap_scalar(&moved, &b.sk, &p), s);
            let mut w = Writer::new();
            moved.encode(pre.group(), &p, &mut w);
            let bytes = w.into_bytes();
            prop_assert_eq!(bytes.len(), moved.encoded_len(pre.group(), &p));
            let mut r = Reader::new(&bytes);
            prop_assert_eq!(EnvelopeL1::<ExponentGroup>::decode(pre.group(), &p, &mut r).unwrap(), moved);
        }
    }
}
