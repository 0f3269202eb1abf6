//! Prime field `F_p` with `p = 3 mod 4` and its quadratic extension `F_p[i]/(i^2 + 1)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeField {
    p: BigUint,
    sqrt_exp: BigUint,
    inv_exp: BigUint,
}

impl PrimeField {
    pub fn new(p: BigUint) -> Self {
        assert_eq!(&p % 4u8, BigUint::from(3u8), "p must be 3 mod 4");
        let sqrt_exp = (&p + 1u8) >> 2;
        let inv_exp = &p - 2u8;
        Self { p, sqrt_exp, inv_exp }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - b + a
        }
    }

    pub fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    pub fn sqr(&self, a: &BigUint) -> BigUint {
        (a * a) % &self.p
    }

    pub fn small(&self, a: &BigUint, k: u32) -> BigUint {
        (a * k) % &self.p
    }

    pub fn inv(&self, a: &BigUint) -> BigUint {
        debug_assert!(!a.is_zero(), "inverse of zero");
        a.modpow(&self.inv_exp, &self.p)
    }

    /// Square root when one exists.
    pub fn sqrt(&self, a: &BigUint) -> Option<BigUint> {
        let r = a.modpow(&self.sqrt_exp, &self.p);
        (self.sqr(&r) == a % &self.p).then_some(r)
    }
}

/// `c0 + c1 i` with `i^2 = -1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fp2 {
    pub c0: BigUint,
    pub c1: BigUint,
}

impl Fp2 {
    pub fn new(c0: BigUint, c1: BigUint) -> Self {
        Self { c0, c1 }
    }

    pub fn one() -> Self {
        Self::new(BigUint::one(), BigUint::zero())
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_one() && self.c1.is_zero()
    }
}

impl PrimeField {
    pub fn fp2_mul(&self, a: &Fp2, b: &Fp2) -> Fp2 {
        // Karatsuba: three base multiplications.
        let v0 = &a.c0 * &b.c0;
        let v1 = &a.c1 * &b.c1;
        let cross = (&a.c0 + &a.c1) * (&b.c0 + &b.c1);
        let c1 = (cross - &v0 - &v1) % &self.p;
        let v0 = v0 % &self.p;
        let v1 = v1 % &self.p;
        Fp2::new(self.sub(&v0, &v1), c1)
    }

    pub fn fp2_sqr(&self, a: &Fp2) -> Fp2 {
        // (a + bi)^2 = (a + b)(a - b) + 2ab i
        let c0 = self.mul(&self.add(&a.c0, &a.c1), &self.sub(&a.c0, &a.c1));
        let c1 = self.small(&(&a.c0 * &a.c1), 2);
        Fp2::new(c0, c1)
    }

    pub fn fp2_conj(&self, a: &Fp2) -> Fp2 {
        Fp2::new(a.c0.clone(), self.neg(&a.c1))
    }

    pub fn fp2_norm(&self, a: &Fp2) -> BigUint {
        self.add(&self.sqr(&a.c0), &self.sqr(&a.c1))
    }

    pub fn fp2_inv(&self, a: &Fp2) -> Fp2 {
        let inv_norm = self.inv(&self.fp2_norm(a));
        let c = self.fp2_conj(a);
        Fp2::new(self.mul(&c.c0, &inv_norm), self.mul(&c.c1, &inv_norm))
    }

    pub fn fp2_pow(&self, a: &Fp2, e: &BigUint) -> Fp2 {
        let mut acc = Fp2::one();
        for i in (0..e.bits()).rev() {
            acc = self.fp2_sqr(&acc);
            if e.bit(i) {
                acc = self.fp2_mul(&acc, a);
            }
        }
        acc
    }
}
