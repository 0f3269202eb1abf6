//! Additive masking.
//!
//! Uniform masks are drawn from `Z_n` and hide `x` perfectly (`y = x + r mod n`).
//! Statistical masks are drawn from `Z_{2^{m+t}}` and added as plain integers; the
//! mutual information between `x` and `y` then decays like `2^-t`.

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

use crate::error::BlindingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlindingMode {
    Uniform,
    /// Mask drawn from `Z_{2^range_bits}`.
    Statistical { range_bits: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindingFactor {
    pub value: BigUint,
    pub mode: BlindingMode,
}

impl BlindingFactor {
    pub fn uniform(value: BigUint) -> Self {
        Self { value, mode: BlindingMode::Uniform }
    }

    pub fn statistical(value: BigUint, range_bits: u32) -> Self {
        Self { value, mode: BlindingMode::Statistical { range_bits } }
    }
}

/// `y = x + r mod n` with `r` uniform over `Z_n`.
pub fn blind_uniform<R: Rng + ?Sized>(
    x: &BigUint,
    n: &BigUint,
    rng: &mut R,
) -> Result<(BigUint, BlindingFactor), BlindingError> {
    if n == &BigUint::from(0u8) {
        return Err(BlindingError::Range("modulus must be positive".into()));
    }
    let r = rng.gen_biguint_below(n);
    let factor = BlindingFactor::uniform(r);
    Ok((blind_with(x, &factor, n)?, factor))
}

/// `y = x + r` over the integers with `r` uniform over `Z_{2^{m+t}}`.
pub fn blind_statistical<R: Rng + ?Sized>(
    x: &BigUint,
    m: u32,
    t: u32,
    n: &BigUint,
    rng: &mut R,
) -> Result<(BigUint, BlindingFactor), BlindingError> {
    let range_bits = m + t;
    let bound = (BigUint::from(1u8) << m) + (BigUint::from(1u8) << range_bits);
    if &bound >= n {
        return Err(BlindingError::Range(format!("2^{m} + 2^{range_bits} is not below n")));
    }
    let factor = BlindingFactor::statistical(rng.gen_biguint(u64::from(range_bits)), range_bits);
    if x.bits() > u64::from(m) {
        return Err(BlindingError::Range(format!("input does not fit in {m} bits")));
    }
    Ok((blind_with(x, &factor, n)?, factor))
}

/// Applies a known factor.
pub fn blind_with(x: &BigUint, r: &BlindingFactor, n: &BigUint) -> Result<BigUint, BlindingError> {
    match r.mode {
        BlindingMode::Uniform => {
            if x >= n || &r.value >= n {
                return Err(BlindingError::Range("operand is not reduced mod n".into()));
            }
            Ok((x + &r.value) % n)
        }
        BlindingMode::Statistical { range_bits } => {
            if r.value.bits() > u64::from(range_bits) {
                return Err(BlindingError::Range(format!("mask exceeds {range_bits} bits")));
            }
            let y = x + &r.value;
            if &y >= n {
                return Err(BlindingError::Range("statistical sum reaches n".into()));
            }
            Ok(y)
        }
    }
}

pub fn unblind(y: &BigUint, r: &BlindingFactor, n: &BigUint) -> Result<BigUint, BlindingError> {
    match r.mode {
        BlindingMode::Uniform => {
            let y = y % n;
            let r = &r.value % n;
            Ok(if y >= r { y - r } else { n - r + y })
        }
        BlindingMode::Statistical { .. } => {
            if y < &r.value {
                return Err(BlindingError::MismatchedFactor);
            }
            Ok(y - &r.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn uniform_examples() {
        let n = b(13);
        assert_eq!(blind_with(&b(5), &BlindingFactor::uniform(b(7)), &n), Ok(b(12)));
        assert_eq!(blind_with(&b(5), &BlindingFactor::uniform(b(8)), &n), Ok(b(0)));
        assert_eq!(blind_with(&b(0), &BlindingFactor::uniform(b(11)), &n), Ok(b(11)));
        assert_eq!(unblind(&b(12), &BlindingFactor::uniform(b(7)), &n), Ok(b(5)));
        assert_eq!(unblind(&b(0), &BlindingFactor::uniform(b(8)), &n), Ok(b(5)));
    }

    #[test]
    fn statistical_examples() {
        let n = b(1 << 20);
        let r = BlindingFactor::statistical(b(41), 6);
        assert_eq!(blind_with(&b(9), &r, &n), Ok(b(50)));
        assert_eq!(unblind(&b(50), &r, &n), Ok(b(9)));
        assert_eq!(blind_with(&b(0), &r, &n), Ok(b(41)));
        assert_eq!(unblind(&b(40), &r, &n), Err(BlindingError::MismatchedFactor));
    }

    #[test]
    fn statistical_range_checks() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert!(blind_statistical(&b(1), 4, 8, &b(1 << 12), &mut rng).is_err());
        assert!(blind_statistical(&b(16), 4, 8, &b(1 << 14), &mut rng).is_err());
        // Bound check on 10^5 draws: y < 2^4 + 2^12 always.
        let n = b(1 << 13);
        for i in 0..100_000u64 {
            let (y, _) = blind_statistical(&b(i % 16), 4, 8, &n, &mut rng).unwrap();
            assert!(y < b(16 + 4096));
        }
    }

    proptest! {
        #[test]
        fn uniform_round_trip(x in any::<u64>(), seed in any::<u64>(), nm in 2u64..u64::MAX) {
            let n = b(nm);
            let x = b(x % nm);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (y, r) = blind_uniform(&x, &n, &mut rng).unwrap();
            prop_assert!(y < n);
            prop_assert_eq!(unblind(&y, &r, &n).unwrap(), x);
        }

        #[test]
        fn statistical_round_trip(x in any::<u32>(), seed in any::<u64>(), t in 1u32..40) {
            let n = b(1) << 80u32;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (y, r) = blind_statistical(&b(x.into()), 32, t, &n, &mut rng).unwrap();
            prop_assert!(y < n);
            prop_assert_eq!(unblind(&y, &r, &n).unwrap(), b(x.into()));
        }
    }
}
