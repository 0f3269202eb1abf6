//! Modular and dyadic-rational arithmetic, and the plaintext gossip oracle.
//!
//! Consensus states are fractions `numerator / 2^denom_exp`. Numerators live in
//! `Z_n` with `n = 2^n_bits`, so reduction is a mask and sampling is exact.

use std::cmp::Ordering;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::ArithError;

/// Largest supported input width; thresholds and inputs travel as `u64`.
pub const MAX_ELL: u32 = 63;

/// Blinding modulus `n = 2^n_bits`, input width `ell` and statistical parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModulusParams {
    n_bits: u32,
    ell: u32,
    t: u32,
}

impl ModulusParams {
    pub fn new(n_bits: u32, ell: u32, t: u32) -> Result<Self, ArithError> {
        if t == 0 {
            return Err(ArithError::Params("t must be at least 1".into()));
        }
        if ell == 0 || ell > MAX_ELL {
            return Err(ArithError::Params(format!("ell = {ell} must lie in 1..={MAX_ELL}")));
        }
        if n_bits <= ell + t + 1 {
            return Err(ArithError::Params(format!(
                "floor(log2 n) = {n_bits} must exceed ell + t + 1 = {}",
                ell + t + 1
            )));
        }
        Ok(Self { n_bits, ell, t })
    }

    /// Like [`ModulusParams::new`], additionally enforcing `n <= q` for a group
    /// order with `floor(log2 q) = q_floor_bits`.
    pub fn for_group(n_bits: u32, ell: u32, t: u32, q_floor_bits: u32) -> Result<Self, ArithError> {
        if n_bits > q_floor_bits {
            return Err(ArithError::Params(format!(
                "n = 2^{n_bits} exceeds the group order (floor(log2 q) = {q_floor_bits})"
            )));
        }
        Self::new(n_bits, ell, t)
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> BigUint {
        BigUint::from(1u8) << self.n_bits
    }

    /// Bytes of a numerator on the wire.
    pub fn byte_len(&self) -> usize {
        (self.n_bits as usize).div_ceil(8)
    }

    pub fn reduce(&self, x: &BigUint) -> BigUint {
        if x.bits() <= u64::from(self.n_bits) {
            return x.clone();
        }
        low_bits(x, self.n_bits)
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        x.bits() <= u64::from(self.n_bits)
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        self.reduce(&(a + b))
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let a = self.reduce(a);
        let b = self.reduce(b);
        if a >= b {
            a - b
        } else {
            self.n() - b + a
        }
    }

    /// `x * 2^k mod n`.
    pub fn shl(&self, x: &BigUint, k: u32) -> BigUint {
        self.reduce(&(x << k))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint(u64::from(self.n_bits))
    }
}

/// `x mod 2^bits`.
pub fn low_bits(x: &BigUint, bits: u32) -> BigUint {
    let mask = (BigUint::from(1u8) << bits) - 1u8;
    x & mask
}

/// An agent's consensus value `numerator / 2^denom_exp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalState {
    pub numerator: BigUint,
    pub denom_exp: u32,
}

impl RationalState {
    pub fn new(numerator: BigUint, denom_exp: u32) -> Self {
        Self { numerator, denom_exp }
    }

    /// State at step zero for a quantized input.
    pub fn initial(x: u64) -> Self {
        Self::new(BigUint::from(x), 0)
    }

    pub fn value(&self) -> f64 {
        dyadic_to_f64(&self.numerator, self.denom_exp)
    }

    /// Exact comparison of the represented values.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let e = self.denom_exp.max(other.denom_exp);
        let a = &self.numerator << (e - self.denom_exp);
        let b = &other.numerator << (e - other.denom_exp);
        a.cmp(&b)
    }

    /// Exact sum of the represented values.
    pub fn add_value(&self, other: &Self) -> Self {
        let e = self.denom_exp.max(other.denom_exp);
        let num = (&self.numerator << (e - self.denom_exp)) + (&other.numerator << (e - other.denom_exp));
        Self::new(num, e)
    }

    /// Exact `|a - b|` of the represented values.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let e = self.denom_exp.max(other.denom_exp);
        let a = &self.numerator << (e - self.denom_exp);
        let b = &other.numerator << (e - other.denom_exp);
        let d = if a >= b { a - b } else { b - a };
        Self::new(d, e)
    }
}

fn dyadic_to_f64(num: &BigUint, exp: u32) -> f64 {
    // Shift large numerators down first so the conversion cannot overflow.
    let bits = num.bits();
    if bits > 1000 {
        let drop = bits - 900;
        let head = (num >> drop).to_f64().unwrap_or(f64::INFINITY);
        return head * 2f64.powf(drop as f64 - f64::from(exp));
    }
    num.to_f64().unwrap_or(f64::INFINITY) * 2f64.powf(-f64::from(exp))
}

/// Fixed-point mapping `x -> floor(K x)` with a power-of-two `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationConfig {
    k: u64,
    ell: u32,
}

impl QuantizationConfig {
    pub fn new(k: u64, ell: u32) -> Result<Self, ArithError> {
        if !k.is_power_of_two() {
            return Err(ArithError::Amplification(k));
        }
        if ell == 0 || ell > MAX_ELL {
            return Err(ArithError::Params(format!("ell = {ell} must lie in 1..={MAX_ELL}")));
        }
        Ok(Self { k, ell })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }
}

/// Returns `floor(K x)`. Negative inputs are rejected; callers offset signed
/// statistics by a public constant first.
pub fn quantize(x: f64, cfg: &QuantizationConfig) -> Result<u64, ArithError> {
    if !x.is_finite() || x < 0.0 {
        return Err(ArithError::Domain(x));
    }
    // Scaling by a power of two is exact in binary floating point.
    let scaled = (x * cfg.k as f64).floor();
    let limit = 2f64.powi(cfg.ell as i32);
    if scaled >= limit {
        return Err(ArithError::Overflow { value: format!("{scaled}"), bits: cfg.ell });
    }
    Ok(scaled as u64)
}

/// Least common multiple of `2^a` and `2^b`, as an exponent.
pub fn lcm_pow2(a: u32, b: u32) -> u32 {
    a.max(b)
}

/// Multipliers `lcm / d_a` and `lcm / d_b` as shift amounts.
pub fn lcm_shifts(a: u32, b: u32) -> (u32, u32) {
    let l = lcm_pow2(a, b);
    (l - a, l - b)
}

/// One plaintext averaging step: `(a + b) / 2` over the common denominator.
pub fn fuse_plain(a: &RationalState, b: &RationalState, params: &ModulusParams) -> RationalState {
    let unreduced = fuse_unreduced(a, b);
    RationalState::new(params.reduce(&unreduced.numerator), unreduced.denom_exp)
}

/// [`fuse_plain`] without the modular reduction.
pub fn fuse_unreduced(a: &RationalState, b: &RationalState) -> RationalState {
    let (sa, sb) = lcm_shifts(a.denom_exp, b.denom_exp);
    let num = (&a.numerator << sa) + (&b.numerator << sb);
    RationalState::new(num, lcm_pow2(a.denom_exp, b.denom_exp) + 1)
}

/// `numerator < thr * 2^denom_exp`.
pub fn decide_plain(s: &RationalState, thr: u64) -> bool {
    s.numerator < (BigUint::from(thr) << s.denom_exp)
}

/// Size-reduction trigger and shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reduction {
    pub ell1: u32,
    pub shift: u32,
}

impl Reduction {
    pub fn triggers(&self, new_exp: u32) -> bool {
        new_exp == self.ell1
    }
}

/// What happened to the pair in one oracle step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    /// Denominator exponent before any size reduction.
    pub fused_exp: u32,
    pub reduced: bool,
}

/// Plaintext gossip on rational states.
///
/// Three tracks run side by side: the `Z_n` state the protocol must reproduce,
/// an unreduced shadow of it (to detect modular wrap), and an exact track that
/// never floors (to measure size-reduction drift).
#[derive(Debug, Clone)]
pub struct PlainGossip {
    params: ModulusParams,
    reduction: Option<Reduction>,
    states: Vec<RationalState>,
    shadow: Vec<RationalState>,
    exact: Vec<RationalState>,
    drift_bound: Vec<RationalState>,
    inputs: Vec<u64>,
    wrapped: bool,
}

impl PlainGossip {
    pub fn new(inputs: &[u64], params: ModulusParams, reduction: Option<Reduction>) -> Self {
        let states: Vec<_> = inputs.iter().map(|&x| RationalState::initial(x)).collect();
        let wrapped = states.iter().any(|s| !params.contains(&s.numerator));
        let states_mod = states.iter().map(|s| RationalState::new(params.reduce(&s.numerator), 0)).collect();
        Self {
            params,
            reduction,
            states: states_mod,
            shadow: states.clone(),
            exact: states,
            drift_bound: vec![RationalState::initial(0); inputs.len()],
            inputs: inputs.to_vec(),
            wrapped,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn params(&self) -> &ModulusParams {
        &self.params
    }

    pub fn step(&mut self, i: usize, j: usize) -> StepOutcome {
        assert_ne!(i, j, "an agent cannot average with itself");
        let fused = fuse_unreduced(&self.shadow[i], &self.shadow[j]);
        let exact = fuse_unreduced(&self.exact[i], &self.exact[j]);
        let mut bound = fuse_unreduced(&self.drift_bound[i], &self.drift_bound[j]);
        let fused_exp = fused.denom_exp;
        let mut shadow = fused;
        let mut reduced = false;
        if let Some(red) = self.reduction.filter(|r| r.triggers(fused_exp)) {
            shadow = RationalState::new(&shadow.numerator >> red.shift, fused_exp - red.shift);
            bound = bound.add_value(&RationalState::new(BigUint::from(1u8), fused_exp - red.shift));
            reduced = true;
        }
        if !self.params.contains(&shadow.numerator) {
            self.wrapped = true;
        }
        let state = RationalState::new(self.params.reduce(&shadow.numerator), shadow.denom_exp);
        for k in [i, j] {
            self.states[k] = state.clone();
            self.shadow[k] = shadow.clone();
            self.exact[k] = exact.clone();
            self.drift_bound[k] = bound.clone();
        }
        StepOutcome { fused_exp, reduced }
    }

    pub fn state(&self, i: usize) -> &RationalState {
        &self.states[i]
    }

    pub fn states(&self) -> &[RationalState] {
        &self.states
    }

    pub fn shadow(&self, i: usize) -> &RationalState {
        &self.shadow[i]
    }

    pub fn exact(&self, i: usize) -> &RationalState {
        &self.exact[i]
    }

    /// Upper bound on `|shadow - exact|` accumulated from size reductions.
    pub fn drift_bound(&self, i: usize) -> &RationalState {
        &self.drift_bound[i]
    }

    pub fn drift(&self, i: usize) -> RationalState {
        self.shadow[i].abs_diff(&self.exact[i])
    }

    /// True once any unreduced numerator reached `n`.
    pub fn wrapped(&self) -> bool {
        self.wrapped
    }

    pub fn inputs(&self) -> &[u64] {
        &self.inputs
    }

    /// Whether the exact track still sums to the input total.
    pub fn exact_mean_conserved(&self) -> bool {
        sum_conserved(&self.exact, &self.inputs)
    }

    /// Whether the floored track sums to the input total; holds exactly
    /// when no size reduction has fired.
    pub fn shadow_mean_conserved(&self) -> bool {
        sum_conserved(&self.shadow, &self.inputs)
    }

    pub fn values(&self) -> Vec<f64> {
        self.shadow.iter().map(RationalState::value).collect()
    }

    pub fn true_mean(&self) -> f64 {
        if self.inputs.is_empty() {
            return 0.0;
        }
        self.inputs.iter().map(|&x| x as f64).sum::<f64>() / self.inputs.len() as f64
    }

    /// `max_i |y_i - mean|`.
    pub fn max_deviation(&self) -> f64 {
        let mean = self.true_mean();
        self.values().iter().map(|y| (y - mean).abs()).fold(0.0, f64::max)
    }

    /// `||y - mean 1||_2 / ||y(0)||_2`, zero when all inputs are zero.
    pub fn normalized_error(&self) -> f64 {
        let mean = self.true_mean();
        let num: f64 = self.values().iter().map(|y| (y - mean).powi(2)).sum::<f64>().sqrt();
        let den: f64 = self.inputs.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

fn sum_conserved(track: &[RationalState], inputs: &[u64]) -> bool {
    let total = track.iter().fold(RationalState::initial(0), |acc, s| acc.add_value(s));
    let initial: BigUint = inputs.iter().map(|&x| BigUint::from(x)).sum();
    total.cmp_value(&RationalState::new(initial, 0)) == Ordering::Equal
}

impl Default for RationalState {
    fn default() -> Self {
        Self::new(BigUint::zero(), 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn params() -> ModulusParams {
        ModulusParams::new(248, 16, 80).unwrap()
    }

    fn st(n: u64, e: u32) -> RationalState {
        RationalState::new(BigUint::from(n), e)
    }

    #[test]
    fn quantize_examples() {
        let q = |x, k| quantize(x, &QuantizationConfig::new(k, 16).unwrap());
        assert_eq!(q(3.75, 4), Ok(15));
        assert_eq!(q(0.0, 1024), Ok(0));
        // Integer-division oracle for floor(256 / 3).
        assert_eq!(q(1.0 / 3.0, 256), Ok(256 / 3));
        assert!(matches!(q(-0.5, 4), Err(ArithError::Domain(_))));
        assert!(matches!(q(f64::NAN, 4), Err(ArithError::Domain(_))));
        assert!(matches!(q(16384.0, 4), Err(ArithError::Overflow { bits: 16, .. })));
        assert_eq!(QuantizationConfig::new(3, 16), Err(ArithError::Amplification(3)));
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_pow2(2, 3), 3);
        assert_eq!(lcm_pow2(0, 0), 0);
        assert_eq!(lcm_pow2(5, 5), 5);
        assert_eq!(lcm_shifts(1, 2), (1, 0));
    }

    #[test]
    fn fuse_examples() {
        let p = params();
        assert_eq!(fuse_plain(&st(3, 0), &st(5, 0), &p), st(8, 1));
        assert_eq!(fuse_plain(&st(8, 1), &st(6, 0), &p), st(20, 2));
        assert_eq!(fuse_plain(&st(7, 3), &st(7, 3), &p), st(14, 4));
    }

    #[test]
    fn fuse_wraps_mod_n() {
        let p = ModulusParams::new(20, 4, 8).unwrap();
        let a = st((1 << 20) - 1, 0);
        let out = fuse_plain(&a, &a, &p);
        assert_eq!(out.numerator, BigUint::from((1u64 << 21) - 2) % p.n());
    }

    #[test]
    fn decide_examples() {
        assert!(decide_plain(&st(20, 2), 6));
        assert!(!decide_plain(&st(20, 2), 5));
        assert!(!decide_plain(&st(8, 1), 4));
    }

    #[test]
    fn params_validation() {
        assert!(ModulusParams::new(97, 16, 80).is_err());
        assert!(ModulusParams::new(98, 16, 80).is_ok());
        assert!(ModulusParams::new(200, 16, 0).is_err());
        assert!(ModulusParams::for_group(255, 16, 80, 254).is_err());
    }

    #[test]
    fn modular_ops() {
        let p = ModulusParams::new(20, 4, 8).unwrap();
        let n = p.n();
        let a = BigUint::from(5u8);
        let b = BigUint::from(9u8);
        assert_eq!(p.sub(&a, &b), &n - 4u8);
        assert_eq!(p.add(&p.sub(&a, &b), &b), a);
        assert_eq!(p.shl(&(&n - 1u8), 1), &n - 2u8);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(p.sample_uniform(&mut rng) < n);
        }
    }

    #[test]
    fn oracle_reduction_tracks_drift() {
        let p = params();
        let red = Reduction { ell1: 4, shift: 2 };
        let mut g = PlainGossip::new(&[1000, 3, 77, 12345], p, Some(red));
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut reduced = 0;
        for _ in 0..200 {
            let i = rng.gen_range(0..4);
            let j = (i + rng.gen_range(1..4)) % 4;
            let out = g.step(i, j);
            reduced += usize::from(out.reduced);
            for k in 0..4 {
                assert!(g.state(k).denom_exp < red.ell1);
                assert_ne!(g.drift(k).cmp_value(g.drift_bound(k)), Ordering::Greater);
            }
            assert!(g.exact_mean_conserved());
        }
        assert!(reduced > 0);
        assert!(!g.wrapped());
    }

    proptest! {
        #[test]
        fn fuse_is_symmetric_and_averages(a in any::<u32>(), ea in 0u32..40, b in any::<u32>(), eb in 0u32..40) {
            let p = params();
            let (x, y) = (st(a.into(), ea), st(b.into(), eb));
            let f = fuse_plain(&x, &y, &p);
            prop_assert_eq!(&f, &fuse_plain(&y, &x, &p));
            prop_assert_eq!(f.denom_exp, ea.max(eb) + 1);
            // (f) * 2 == x + y exactly.
            let twice = f.add_value(&f);
            prop_assert_eq!(twice.cmp_value(&x.add_value(&y)), Ordering::Equal);
        }

        #[test]
        fn lcm_is_symmetric_and_idempotent(a in 0u32..1000, b in 0u32..1000) {
            prop_assert_eq!(lcm_pow2(a, b), lcm_pow2(b, a));
            prop_assert_eq!(lcm_pow2(a, a), a);
            let (sa, sb) = lcm_shifts(a, b);
            prop_assert!(sa == 0 || sb == 0);
        }

        #[test]
        fn quantize_is_monotone(x in 0.0f64..100.0, dx in 0.0f64..10.0, kexp in 0u32..8) {
            let cfg = QuantizationConfig::new(1 << kexp, 20).unwrap();
            prop_assert!(quantize(x, &cfg).unwrap() <= quantize(x + dx, &cfg).unwrap());
        }

        #[test]
        fn denominators_bounded_by_contacts(inputs in proptest::collection::vec(0u64..65536, 2..8), picks in proptest::collection::vec((0usize..64, 1usize..64), 0..60)) {
            let n = inputs.len();
            let mut g = PlainGossip::new(&inputs, params(), None);
            let mut contacts = vec![0u32; n];
            for (tau, &(a, d)) in picks.iter().enumerate() {
                let i = a % n;
                let j = (i + 1 + d % (n - 1)) % n;
                let before = g.state(i).denom_exp.max(g.state(j).denom_exp);
                g.step(i, j);
                contacts[i] += 1;
                contacts[j] += 1;
                prop_assert_eq!(g.state(i).denom_exp, before + 1);
                prop_assert!(g.state(i).denom_exp as usize <= tau + 1);
                prop_assert!(g.shadow_mean_conserved());
            }
            for k in 0..n {
                prop_assert!(g.state(k).denom_exp <= picks.len() as u32);
                if contacts[k] == 0 {
                    prop_assert_eq!(g.state(k), &RationalState::initial(inputs[k]));
                }
            }
        }
    }
}
