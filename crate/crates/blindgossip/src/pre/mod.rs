//! Unidirectional single-hop proxy re-encryption (AFGH) over a symmetric
//! pairing `e: G1 x G1 -> Gt`, and a KEM/DEM envelope carrying `Z_n` scalars.
//!
//! Two backends implement [`PairingGroup`]: [`Supersingular`] is a real pairing
//! on a 256-bit group; [`ExponentGroup`] represents every element by its
//! discrete logarithm and is only suitable for tests and simulations.

mod envelope;
mod exponent;
pub mod fields;
mod supersingular;

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;

pub use envelope::{pad_hash, Envelope, EnvelopeL1, EnvelopeL2};
pub use exponent::ExponentGroup;
pub use supersingular::{G1Point, Supersingular};

use crate::codec::{Reader, Writer};
use crate::error::PreError;

/// A prime-order bilinear group with canonical, validated encodings.
pub trait PairingGroup: Clone + Debug + PartialEq + Eq + Send + Sync + 'static {
    type G1: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;
    type Gt: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn name(&self) -> &'static str;
    /// The prime order `q`.
    fn order(&self) -> &BigUint;
    /// `g`, generating `G1`.
    fn generator(&self) -> Self::G1;
    /// `Z = e(g, g)`.
    fn gt_generator(&self) -> Self::Gt;
    fn g1_mul(&self, a: &Self::G1, k: &BigUint) -> Self::G1;
    fn gt_mul(&self, a: &Self::Gt, b: &Self::Gt) -> Self::Gt;
    fn gt_pow(&self, a: &Self::Gt, k: &BigUint) -> Self::Gt;
    fn gt_inv(&self, a: &Self::Gt) -> Self::Gt;
    fn pair(&self, a: &Self::G1, b: &Self::G1) -> Self::Gt;

    /// Encoded sizes in bytes.
    fn g1_len(&self) -> usize;
    fn gt_len(&self) -> usize;
    fn write_g1(&self, a: &Self::G1, w: &mut Writer);
    fn read_g1(&self, r: &mut Reader<'_>) -> Result<Self::G1, PreError>;
    fn write_gt(&self, a: &Self::Gt, w: &mut Writer);
    fn read_gt(&self, r: &mut Reader<'_>) -> Result<Self::Gt, PreError>;

    /// `ceil(log2 q)`.
    fn order_bits(&self) -> u32 {
        let q = self.order();
        let bits = q.bits() as u32;
        if q.count_ones() == 1 {
            bits - 1
        } else {
            bits
        }
    }

    /// `floor(log2 q)`, the largest admissible `log2 n`.
    fn order_floor_bits(&self) -> u32 {
        self.order().bits() as u32 - 1
    }

    fn gt_to_bytes(&self, a: &Self::Gt) -> Vec<u8> {
        let mut w = Writer::new();
        self.write_gt(a, &mut w);
        w.into_bytes()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub a1: BigUint,
    pub a2: BigUint,
}

impl Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// `(Z^{a1}, g^{a2})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey<B: PairingGroup> {
    pub z_a1: B::Gt,
    pub g_a2: B::G1,
}

#[derive(Debug, Clone)]
pub struct KeyPair<B: PairingGroup> {
    pub pk: PublicKey<B>,
    pub sk: SecretKey,
}

/// `rk_{A->B} = g^{a1 b2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReKey<B: PairingGroup>(pub B::G1);

/// Second-level ciphertext `(g^k, m Z^{a1 k})`; can be re-encrypted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextL2<B: PairingGroup> {
    pub alpha: B::G1,
    pub beta: B::Gt,
}

/// How a first-level ciphertext was produced; selects `a1` or `a2` at decryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum L1Origin {
    /// `(Z^{a1 k}, m Z^k)` from direct first-level encryption.
    Direct,
    /// `(Z^{b2 k'}, m Z^{k'})` from re-encrypting a second-level ciphertext.
    ReEncrypted,
}

/// First-level ciphertext; cannot be re-encrypted again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiphertextL1<B: PairingGroup> {
    pub alpha: B::Gt,
    pub beta: B::Gt,
    pub origin: L1Origin,
}

/// Scheme operations bound to one backend.
#[derive(Debug, Clone)]
pub struct Pre<B: PairingGroup> {
    group: B,
}

impl<B: PairingGroup> Pre<B> {
    pub fn new(group: B) -> Self {
        Self { group }
    }

    pub fn group(&self) -> &B {
        &self.group
    }

    fn nonzero_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let k = rng.gen_biguint_below(self.group.order());
            if !k.is_zero() {
                return k;
            }
        }
    }

    pub fn keygen<R: Rng + ?Sized>(&self, rng: &mut R) -> KeyPair<B> {
        let a1 = self.nonzero_scalar(rng);
        let a2 = self.nonzero_scalar(rng);
        let g = &self.group;
        let pk = PublicKey { z_a1: g.gt_pow(&g.gt_generator(), &a1), g_a2: g.g1_mul(&g.generator(), &a2) };
        KeyPair { pk, sk: SecretKey { a1, a2 } }
    }

    /// `rk_{A->B} = (g^{b2})^{a1}`.
    pub fn rekey(&self, sk_a: &SecretKey, pk_b: &PublicKey<B>) -> ReKey<B> {
        ReKey(self.group.g1_mul(&pk_b.g_a2, &sk_a.a1))
    }

    /// A uniformly random element of `Gt`.
    pub fn random_gt<R: Rng + ?Sized>(&self, rng: &mut R) -> B::Gt {
        let r = rng.gen_biguint_below(self.group.order());
        self.group.gt_pow(&self.group.gt_generator(), &r)
    }

    pub fn encrypt_l2<R: Rng + ?Sized>(&self, m: &B::Gt, pk: &PublicKey<B>, rng: &mut R) -> CiphertextL2<B> {
        let g = &self.group;
        let k = self.nonzero_scalar(rng);
        CiphertextL2 { alpha: g.g1_mul(&g.generator(), &k), beta: g.gt_mul(m, &g.gt_pow(&pk.z_a1, &k)) }
    }

    pub fn encrypt_l1<R: Rng + ?Sized>(&self, m: &B::Gt, pk: &PublicKey<B>, rng: &mut R) -> CiphertextL1<B> {
        let g = &self.group;
        let k = self.nonzero_scalar(rng);
        CiphertextL1 {
            alpha: g.gt_pow(&pk.z_a1, &k),
            beta: g.gt_mul(m, &g.gt_pow(&g.gt_generator(), &k)),
            origin: L1Origin::Direct,
        }
    }

    /// `(e(g^k, rk), m Z^{a1 k})`.
    pub fn reencrypt(&self, c: &CiphertextL2<B>, rk: &ReKey<B>) -> CiphertextL1<B> {
        CiphertextL1 { alpha: self.group.pair(&c.alpha, &rk.0), beta: c.beta.clone(), origin: L1Origin::ReEncrypted }
    }

    /// `beta / e(alpha, g)^{a1}`.
    pub fn decrypt_l2(&self, c: &CiphertextL2<B>, sk: &SecretKey) -> B::Gt {
        let g = &self.group;
        let mask = g.gt_pow(&g.pair(&c.alpha, &g.generator()), &sk.a1);
        g.gt_mul(&c.beta, &g.gt_inv(&mask))
    }

    /// `beta / alpha^{1/a_i}`.
    pub fn decrypt_l1(&self, c: &CiphertextL1<B>, sk: &SecretKey) -> B::Gt {
        let g = &self.group;
        let a = match c.origin {
            L1Origin::Direct => &sk.a1,
            L1Origin::ReEncrypted => &sk.a2,
        };
        let q = g.order();
        let inv = a.modpow(&(q - 2u8), q);
        let mask = g.gt_pow(&c.alpha, &inv);
        g.gt_mul(&c.beta, &g.gt_inv(&mask))
    }
}

/// Ciphertexts that can carry an envelope's key.
pub trait Kem<B: PairingGroup>: Clone + Debug + PartialEq + Send + Sync {
    fn open(&self, pre: &Pre<B>, sk: &SecretKey) -> B::Gt;
    fn encode(&self, group: &B, w: &mut Writer);
    fn decode(group: &B, r: &mut Reader<'_>) -> Result<Self, PreError>;
}

impl<B: PairingGroup> Kem<B> for CiphertextL2<B> {
    fn open(&self, pre: &Pre<B>, sk: &SecretKey) -> B::Gt {
        pre.decrypt_l2(self, sk)
    }

    fn encode(&self, group: &B, w: &mut Writer) {
        w.put_varint(group.g1_len() as u64);
        group.write_g1(&self.alpha, w);
        w.put_varint(group.gt_len() as u64);
        group.write_gt(&self.beta, w);
    }

    fn decode(group: &B, r: &mut Reader<'_>) -> Result<Self, PreError> {
        let alpha = read_prefixed(r, group.g1_len(), |r| group.read_g1(r))?;
        let beta = read_prefixed(r, group.gt_len(), |r| group.read_gt(r))?;
        Ok(Self { alpha, beta })
    }
}

impl<B: PairingGroup> Kem<B> for CiphertextL1<B> {
    fn open(&self, pre: &Pre<B>, sk: &SecretKey) -> B::Gt {
        pre.decrypt_l1(self, sk)
    }

    fn encode(&self, group: &B, w: &mut Writer) {
        w.put_u8(match self.origin {
            L1Origin::Direct => 1,
            L1Origin::ReEncrypted => 2,
        });
        w.put_varint(group.gt_len() as u64);
        group.write_gt(&self.alpha, w);
        w.put_varint(group.gt_len() as u64);
        group.write_gt(&self.beta, w);
    }

    fn decode(group: &B, r: &mut Reader<'_>) -> Result<Self, PreError> {
        let origin = match r.get_u8("ciphertext origin")? {
            1 => L1Origin::Direct,
            2 => L1Origin::ReEncrypted,
            other => return Err(crate::error::CodecError::Malformed(format!("origin tag {other}")).into()),
        };
        let alpha = read_prefixed(r, group.gt_len(), |r| group.read_gt(r))?;
        let beta = read_prefixed(r, group.gt_len(), |r| group.read_gt(r))?;
        Ok(Self { alpha, beta, origin })
    }
}

fn read_prefixed<T>(
    r: &mut Reader<'_>,
    expected: usize,
    f: impl FnOnce(&mut Reader<'_>) -> Result<T, PreError>,
) -> Result<T, PreError> {
    let len = r.get_varint("element length")?;
    if len != expected as u64 {
        return Err(crate::error::CodecError::Malformed(format!("element length {len}, expected {expected}")).into());
    }
    f(r)
}

/// Encoded size in bytes of a ciphertext.
pub fn encoded_len<B: PairingGroup, C: Kem<B>>(group: &B, c: &C) -> usize {
    let mut w = Writer::new();
    c.encode(group, &mut w);
    w.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn roundtrips<B: PairingGroup>(group: B, rounds: usize) {
        let pre = Pre::new(group);
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..rounds {
            let a = pre.keygen(&mut rng);
            let b = pre.keygen(&mut rng);
            let c = pre.keygen(&mut rng);
            let m = pre.random_gt(&mut rng);
            let c2 = pre.encrypt_l2(&m, &a.pk, &mut rng);
            assert_eq!(pre.decrypt_l2(&c2, &a.sk), m);
            assert_ne!(pre.encrypt_l2(&m, &a.pk, &mut rng), c2);
            let c1 = pre.encrypt_l1(&m, &b.pk, &mut rng);
            assert_eq!(pre.decrypt_l1(&c1, &b.sk), m);
            let rk_ab = pre.rekey(&a.sk, &b.pk);
            let re = pre.reencrypt(&c2, &rk_ab);
            assert_eq!(pre.decrypt_l1(&re, &b.sk), m);
            assert_ne!(pre.decrypt_l1(&re, &c.sk), m);
            // Self-delegation.
            let rk_aa = pre.rekey(&a.sk, &a.pk);
            assert_eq!(pre.decrypt_l1(&pre.reencrypt(&c2, &rk_aa), &a.sk), m);
            // Wrong source key.
            let c_under_c = pre.encrypt_l2(&m, &c.pk, &mut rng);
            assert_ne!(pre.decrypt_l1(&pre.reencrypt(&c_under_c, &rk_ab), &b.sk), m);
            // Unidirectional.
            assert_ne!(pre.rekey(&b.sk, &a.pk), rk_ab);
            // Encodings round trip with the expected sizes.
            let g = pre.group();
            let mut w = Writer::new();
            c2.encode(g, &mut w);
            re.encode(g, &mut w);
            let bytes = w.into_bytes();
            assert_eq!(encoded_len(g, &c2) + encoded_len(g, &re), bytes.len());
            let mut r = Reader::new(&bytes);
            assert_eq!(CiphertextL2::decode(g, &mut r).unwrap(), c2);
            assert_eq!(CiphertextL1::decode(g, &mut r).unwrap(), re);
            r.finish().unwrap();
        }
    }

    #[test]
    fn exponent_backend_round_trips() {
        roundtrips(ExponentGroup::new(), 50);
    }

    #[test]
    fn pairing_backend_round_trips() {
        roundtrips(Supersingular::new(), 2);
    }

    #[test]
    fn order_bits() {
        assert_eq!(ExponentGroup::new().order_bits(), 255);
        assert_eq!(ExponentGroup::new().order_floor_bits(), 254);
        assert_eq!(Supersingular::new().order_bits(), 256);
        assert_eq!(Supersingular::new().order_floor_bits(), 255);
    }

    #[test]
    fn bad_origin_tag_is_rejected() {
        let g = ExponentGroup::new();
        let bytes = [7u8, 0, 0];
        assert!(CiphertextL1::<ExponentGroup>::decode(&g, &mut Reader::new(&bytes)).is_err());
    }
}
