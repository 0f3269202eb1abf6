//! Insecure backend: every element is stored as its discrete logarithm modulo
//! `q = 2^255 - 19`, so the group law is addition, exponentiation is
//! multiplication and the pairing is a product. Fast and exact, never secret.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use super::PairingGroup;
use crate::codec::{Reader, Writer};
use crate::error::PreError;

/// `log_g` of a `G1` element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpG1(pub BigUint);

/// `log_Z` of a `Gt` element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpGt(pub BigUint);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentGroup {
    q: Arc<BigUint>,
}

impl Default for ExponentGroup {
    fn default() -> Self {
        Self::new()
    }
}

impl ExponentGroup {
    pub fn new() -> Self {
        let q = (BigUint::one() << 255u32) - 19u8;
        Self { q: Arc::new(q) }
    }

    fn read(&self, r: &mut Reader<'_>, what: &'static str) -> Result<BigUint, PreError> {
        let v = r.get_fixed(32, what)?;
        if v >= *self.q {
            return Err(PreError::Membership(what));
        }
        Ok(v)
    }
}

impl PairingGroup for ExponentGroup {
    type G1 = ExpG1;
    type Gt = ExpGt;

    fn name(&self) -> &'static str {
        "test"
    }

    fn order(&self) -> &BigUint {
        &self.q
    }

    fn generator(&self) -> ExpG1 {
        ExpG1(BigUint::one())
    }

    fn gt_generator(&self) -> ExpGt {
        ExpGt(BigUint::one())
    }

    fn g1_mul(&self, a: &ExpG1, k: &BigUint) -> ExpG1 {
        ExpG1((&a.0 * k) % &*self.q)
    }

    fn gt_mul(&self, a: &ExpGt, b: &ExpGt) -> ExpGt {
        ExpGt((&a.0 + &b.0) % &*self.q)
    }

    fn gt_pow(&self, a: &ExpGt, k: &BigUint) -> ExpGt {
        ExpGt((&a.0 * k) % &*self.q)
    }

    fn gt_inv(&self, a: &ExpGt) -> ExpGt {
        ExpGt((&*self.q - &a.0 % &*self.q) % &*self.q)
    }

    fn pair(&self, a: &ExpG1, b: &ExpG1) -> ExpGt {
        ExpGt((&a.0 * &b.0) % &*self.q)
    }

    fn g1_len(&self) -> usize {
        32
    }

    fn gt_len(&self) -> usize {
        32
    }

    fn write_g1(&self, a: &ExpG1, w: &mut Writer) {
        w.put_fixed(&a.0, 32);
    }

    fn read_g1(&self, r: &mut Reader<'_>) -> Result<ExpG1, PreError> {
        self.read(r, "G1 exponent").map(ExpG1)
    }

    fn write_gt(&self, a: &ExpGt, w: &mut Writer) {
        w.put_fixed(&a.0, 32);
    }

    fn read_gt(&self, r: &mut Reader<'_>) -> Result<ExpGt, PreError> {
        self.read(r, "Gt exponent").map(ExpGt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn bilinearity_on_random_exponents() {
        let g = ExponentGroup::new();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = rng.gen_biguint_below(g.order());
            let b = rng.gen_biguint_below(g.order());
            let lhs = g.pair(&g.g1_mul(&g.generator(), &a), &g.g1_mul(&g.generator(), &b));
            assert_eq!(lhs, g.gt_pow(&g.gt_generator(), &(&a * &b)));
        }
    }

    #[test]
    fn out_of_range_encodings_are_rejected() {
        let g = ExponentGroup::new();
        let bytes = [0xffu8; 32];
        assert!(matches!(g.read_gt(&mut Reader::new(&bytes)), Err(PreError::Membership(_))));
    }
}
