//! Symmetric pairing on the supersingular curve `y^2 = x^3 + x` over `F_p`,
//! `p = 3 mod 4`, with embedding degree 2.
//!
//! `#E(F_p) = p + 1 = h q` with a 256-bit prime `q`. The distortion map
//! `(x, y) -> (-x, i y)` sends the order-`q` subgroup to a linearly independent
//! one over `F_p^2`, which makes the reduced Tate pairing non-degenerate on `G1 x G1`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::fields::{Fp2, PrimeField};
use super::PairingGroup;
use crate::codec::{Reader, Writer};
use crate::error::PreError;

const P_HEX: &str = "22c49312fb637b5ef323d040e751fe794a6d16790b03b48c5cadf276b862b4f14b";
const Q_HEX: &str = "f73cf96a89dfdf14f9e23ab1179c66ecbbeb4a7931e175ad3db8834c3ba1787b";
const COFACTOR: u32 = 36;
const GX_HEX: &str = "1e7ebddb54d2dec53eb9bcb9c513175342db047234be28f11ad791896bec9010cc";
const GY_HEX: &str = "99b5f545dc6fe7b970917bb4bff3ef37d7fcbd7f42b9793ed275e3aacea2bf585";

/// Affine point on `E(F_p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum G1Point {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

/// Jacobian coordinates `(X, Y, Z)` for `(X / Z^2, Y / Z^3)`.
#[derive(Debug, Clone)]
struct Jacobian {
    x: BigUint,
    y: BigUint,
    z: BigUint,
}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    fp: PrimeField,
    q: BigUint,
    g: G1Point,
    z: Fp2,
    elem_len: usize,
}

/// Production backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supersingular {
    inner: Arc<Inner>,
}

impl Default for Supersingular {
    fn default() -> Self {
        Self::new()
    }
}

fn hex(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("valid constant")
}

impl Supersingular {
    pub fn new() -> Self {
        let p = hex(P_HEX);
        let q = hex(Q_HEX);
        debug_assert_eq!(&q * COFACTOR, &p + 1u8);
        let fp = PrimeField::new(p);
        let elem_len = (fp.modulus().bits() as usize).div_ceil(8);
        let g = G1Point::Affine { x: hex(GX_HEX), y: hex(GY_HEX) };
        let mut this = Inner { fp, q, g, z: Fp2::one(), elem_len };
        this.z = pairing_inner(&this, &this.g, &this.g);
        Self { inner: Arc::new(this) }
    }

    pub fn field_modulus(&self) -> &BigUint {
        self.inner.fp.modulus()
    }

    pub fn cofactor(&self) -> u32 {
        COFACTOR
    }

    pub fn is_on_curve(&self, pt: &G1Point) -> bool {
        match pt {
            G1Point::Infinity => true,
            G1Point::Affine { x, y } => {
                let f = &self.inner.fp;
                x < f.modulus() && y < f.modulus() && f.sqr(y) == rhs(f, x)
            }
        }
    }

    /// Plain affine addition; used only as a test oracle.
    pub fn add_affine(&self, a: &G1Point, b: &G1Point) -> G1Point {
        let f = &self.inner.fp;
        match (a, b) {
            (G1Point::Infinity, _) => b.clone(),
            (_, G1Point::Infinity) => a.clone(),
            (G1Point::Affine { x: x1, y: y1 }, G1Point::Affine { x: x2, y: y2 }) => {
                let lambda = if x1 == x2 {
                    if f.add(y1, y2).is_zero() {
                        return G1Point::Infinity;
                    }
                    let num = f.add(&f.small(&f.sqr(x1), 3), &BigUint::one());
                    f.mul(&num, &f.inv(&f.small(y1, 2)))
                } else {
                    f.mul(&f.sub(y2, y1), &f.inv(&f.sub(x2, x1)))
                };
                let x3 = f.sub(&f.sub(&f.sqr(&lambda), x1), x2);
                let y3 = f.sub(&f.mul(&lambda, &f.sub(x1, &x3)), y1);
                G1Point::Affine { x: x3, y: y3 }
            }
        }
    }
}

fn rhs(f: &PrimeField, x: &BigUint) -> BigUint {
    f.add(&f.mul(&f.sqr(x), x), x)
}

fn to_jacobian(pt: &G1Point) -> Option<Jacobian> {
    match pt {
        G1Point::Infinity => None,
        G1Point::Affine { x, y } => Some(Jacobian { x: x.clone(), y: y.clone(), z: BigUint::one() }),
    }
}

fn to_affine(f: &PrimeField, pt: Option<Jacobian>) -> G1Point {
    match pt {
        None => G1Point::Infinity,
        Some(j) => {
            let zi = f.inv(&j.z);
            let zi2 = f.sqr(&zi);
            let zi3 = f.mul(&zi2, &zi);
            G1Point::Affine { x: f.mul(&j.x, &zi2), y: f.mul(&j.y, &zi3) }
        }
    }
}

/// Doubling for `a = 1`; returns `None` for points of order two.
fn double(f: &PrimeField, t: &Jacobian) -> Option<Jacobian> {
    if t.y.is_zero() {
        return None;
    }
    let xx = f.sqr(&t.x);
    let yy = f.sqr(&t.y);
    let zz = f.sqr(&t.z);
    let m = f.add(&f.small(&xx, 3), &f.sqr(&zz));
    let s = f.small(&f.mul(&t.x, &yy), 4);
    let x3 = f.sub(&f.sqr(&m), &f.small(&s, 2));
    let y3 = f.sub(&f.mul(&m, &f.sub(&s, &x3)), &f.small(&f.sqr(&yy), 8));
    let z3 = f.small(&f.mul(&t.y, &t.z), 2);
    Some(Jacobian { x: x3, y: y3, z: z3 })
}

/// Mixed addition `T + P` with affine `P`.
fn add_mixed(f: &PrimeField, t: &Jacobian, px: &BigUint, py: &BigUint) -> Option<Jacobian> {
    let zz = f.sqr(&t.z);
    let u2 = f.mul(px, &zz);
    let s2 = f.mul(py, &f.mul(&zz, &t.z));
    let h = f.sub(&u2, &t.x);
    let r = f.sub(&s2, &t.y);
    if h.is_zero() {
        return if r.is_zero() { double(f, t) } else { None };
    }
    let hh = f.sqr(&h);
    let hhh = f.mul(&hh, &h);
    let v = f.mul(&t.x, &hh);
    let x3 = f.sub(&f.sub(&f.sqr(&r), &hhh), &f.small(&v, 2));
    let y3 = f.sub(&f.mul(&r, &f.sub(&v, &x3)), &f.mul(&t.y, &hhh));
    let z3 = f.mul(&t.z, &h);
    Some(Jacobian { x: x3, y: y3, z: z3 })
}

fn scalar_mul(f: &PrimeField, pt: &G1Point, k: &BigUint) -> G1Point {
    let G1Point::Affine { x: px, y: py } = pt else {
        return G1Point::Infinity;
    };
    let mut acc: Option<Jacobian> = None;
    for i in (0..k.bits()).rev() {
        acc = acc.and_then(|a| double(f, &a));
        if k.bit(i) {
            acc = match acc {
                None => to_jacobian(pt),
                Some(a) => add_mixed(f, &a, px, py),
            };
        }
    }
    to_affine(f, acc)
}

/// Reduced Tate pairing `e(P, psi(Q))` with vertical lines dropped; they lie
/// in `F_p` and vanish under the final exponentiation.
fn pairing_inner(inner: &Inner, p: &G1Point, q: &G1Point) -> Fp2 {
    let f = &inner.fp;
    let (G1Point::Affine { x: px, y: py }, G1Point::Affine { x: qx, y: qy }) = (p, q) else {
        return Fp2::one();
    };
    let mut acc = Fp2::one();
    let mut t = to_jacobian(p).expect("affine");
    let bits = inner.q.bits();
    for i in (0..bits - 1).rev() {
        // Tangent at T evaluated at (-qx, i qy), scaled by 2 Y Z^3.
        let zz = f.sqr(&t.z);
        let m = f.add(&f.small(&f.sqr(&t.x), 3), &f.sqr(&zz));
        let re = f.sub(&f.mul(&m, &f.add(&f.mul(qx, &zz), &t.x)), &f.small(&f.sqr(&t.y), 2));
        let im = f.small(&f.mul(&f.mul(&t.y, &f.mul(&zz, &t.z)), qy), 2);
        acc = f.fp2_mul(&f.fp2_sqr(&acc), &Fp2::new(re, im));
        t = double(f, &t).expect("order-q points have no 2-torsion");
        if inner.q.bit(i) {
            if i == 0 {
                // T = -P here; the chord is vertical.
                break;
            }
            // Chord through T and P, scaled by Z (x_P Z^2 - X).
            let zz = f.sqr(&t.z);
            let h = f.sub(&f.mul(px, &zz), &t.x);
            let r = f.sub(&f.mul(py, &f.mul(&zz, &t.z)), &t.y);
            let d = f.mul(&t.z, &h);
            let re = f.sub(&f.mul(&r, &f.add(qx, px)), &f.mul(&d, py));
            let im = f.mul(&d, qy);
            acc = f.fp2_mul(&acc, &Fp2::new(re, im));
            t = add_mixed(f, &t, px, py).expect("no intermediate multiple of P is -P");
        }
    }
    final_exponentiation(f, &acc)
}

/// `f^((p^2 - 1) / q) = (conj(f) / f)^h`.
fn final_exponentiation(f: &PrimeField, x: &Fp2) -> Fp2 {
    let y = f.fp2_mul(&f.fp2_conj(x), &f.fp2_inv(x));
    f.fp2_pow(&y, &BigUint::from(COFACTOR))
}

impl PairingGroup for Supersingular {
    type G1 = G1Point;
    type Gt = Fp2;

    fn name(&self) -> &'static str {
        "pairing"
    }

    fn order(&self) -> &BigUint {
        &self.inner.q
    }

    fn generator(&self) -> G1Point {
        self.inner.g.clone()
    }

    fn gt_generator(&self) -> Fp2 {
        self.inner.z.clone()
    }

    fn g1_mul(&self, a: &G1Point, k: &BigUint) -> G1Point {
        scalar_mul(&self.inner.fp, a, &(k % &self.inner.q))
    }

    fn gt_mul(&self, a: &Fp2, b: &Fp2) -> Fp2 {
        self.inner.fp.fp2_mul(a, b)
    }

    fn gt_pow(&self, a: &Fp2, k: &BigUint) -> Fp2 {
        self.inner.fp.fp2_pow(a, &(k % &self.inner.q))
    }

    fn gt_inv(&self, a: &Fp2) -> Fp2 {
        // Unitary elements: the inverse is the conjugate.
        self.inner.fp.fp2_conj(a)
    }

    fn pair(&self, a: &G1Point, b: &G1Point) -> Fp2 {
        pairing_inner(&self.inner, a, b)
    }

    fn g1_len(&self) -> usize {
        self.inner.elem_len
    }

    fn gt_len(&self) -> usize {
        self.inner.elem_len
    }

    fn write_g1(&self, a: &G1Point, w: &mut Writer) {
        let len = self.inner.elem_len;
        match a {
            G1Point::Infinity => {
                let mut bytes = vec![0u8; len];
                bytes[0] = 0x40;
                w.put_raw(&bytes);
            }
            G1Point::Affine { x, y } => {
                let mut tmp = Writer::new();
                tmp.put_fixed(x, len);
                let mut bytes = tmp.into_bytes();
                if y.bit(0) {
                    bytes[0] |= 0x80;
                }
                w.put_raw(&bytes);
            }
        }
    }

    fn read_g1(&self, r: &mut Reader<'_>) -> Result<G1Point, PreError> {
        let f = &self.inner.fp;
        let raw = r.get_bytes(self.inner.elem_len, "G1 element")?;
        let flags = raw[0] & 0xc0;
        let mut body = raw.to_vec();
        body[0] &= 0x3f;
        let x = BigUint::from_bytes_be(&body);
        if flags & 0x40 != 0 {
            return if flags == 0x40 && x.is_zero() {
                Ok(G1Point::Infinity)
            } else {
                Err(PreError::Membership("malformed point at infinity"))
            };
        }
        if &x >= f.modulus() {
            return Err(PreError::Membership("x coordinate not reduced"));
        }
        let mut y = f.sqrt(&rhs(f, &x)).ok_or(PreError::Membership("x is not on the curve"))?;
        if y.bit(0) != (flags & 0x80 != 0) {
            y = f.neg(&y);
        }
        let pt = G1Point::Affine { x, y };
        if scalar_mul(f, &pt, &self.inner.q) != G1Point::Infinity {
            return Err(PreError::Membership("point outside the order-q subgroup"));
        }
        Ok(pt)
    }

    fn write_gt(&self, a: &Fp2, w: &mut Writer) {
        let mut tmp = Writer::new();
        tmp.put_fixed(&a.c0, self.inner.elem_len);
        let mut bytes = tmp.into_bytes();
        if a.c1.bit(0) {
            bytes[0] |= 0x80;
        }
        w.put_raw(&bytes);
    }

    fn read_gt(&self, r: &mut Reader<'_>) -> Result<Fp2, PreError> {
        let f = &self.inner.fp;
        let raw = r.get_bytes(self.inner.elem_len, "Gt element")?;
        if raw[0] & 0x40 != 0 {
            return Err(PreError::Membership("reserved flag set"));
        }
        let parity = raw[0] & 0x80 != 0;
        let mut body = raw.to_vec();
        body[0] &= 0x3f;
        let c0 = BigUint::from_bytes_be(&body);
        if &c0 >= f.modulus() {
            return Err(PreError::Membership("Gt coordinate not reduced"));
        }
        // Order-q elements have norm one: c1 = +-sqrt(1 - c0^2).
        let rad = f.sub(&BigUint::one(), &f.sqr(&c0));
        let mut c1 = f.sqrt(&rad).ok_or(PreError::Membership("Gt element has no unit-norm lift"))?;
        if c1.bit(0) != parity {
            if c1.is_zero() {
                return Err(PreError::Membership("non-canonical Gt encoding"));
            }
            c1 = f.neg(&c1);
        }
        let e = Fp2::new(c0, c1);
        if !f.fp2_pow(&e, &self.inner.q).is_one() {
            return Err(PreError::Membership("Gt element outside the order-q subgroup"));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use num_bigint::RandBigInt;

    #[test]
    fn parameters_are_consistent() {
        let g = Supersingular::new();
        let p = g.field_modulus();
        assert_eq!(g.order() * COFACTOR, p + 1u8);
        assert_eq!(g.order().bits(), 256);
        assert!(g.is_on_curve(&g.generator()));
        assert_eq!(g.g1_mul(&g.generator(), &(g.order() - 1u8)), {
            let G1Point::Affine { x, y } = g.generator() else { unreachable!() };
            G1Point::Affine { x, y: g.inner.fp.neg(&y) }
        });
        assert!(!g.gt_generator().is_one());
        assert!(g.inner.fp.fp2_pow(&g.gt_generator(), g.order()).is_one());
    }

    #[test]
    fn jacobian_matches_affine_oracle() {
        let g = Supersingular::new();
        let base = g.generator();
        let mut acc = G1Point::Infinity;
        for k in 0u32..20 {
            assert_eq!(g.g1_mul(&base, &BigUint::from(k)), acc);
            acc = g.add_affine(&acc, &base);
        }
    }

    #[test]
    fn pairing_is_bilinear() {
        let g = Supersingular::new();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..3 {
            let a = rng.gen_biguint_below(g.order());
            let b = rng.gen_biguint_below(g.order());
            let lhs = g.pair(&g.g1_mul(&g.generator(), &a), &g.g1_mul(&g.generator(), &b));
            let rhs = g.gt_pow(&g.gt_generator(), &(&a * &b));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn encodings_round_trip() {
        let g = Supersingular::new();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..4 {
            let k = rng.gen_biguint_below(g.order());
            let pt = g.g1_mul(&g.generator(), &k);
            let gt = g.gt_pow(&g.gt_generator(), &k);
            let mut w = Writer::new();
            g.write_g1(&pt, &mut w);
            g.write_gt(&gt, &mut w);
            let bytes = w.into_bytes();
            assert_eq!(bytes.len(), g.g1_len() + g.gt_len());
            let mut r = Reader::new(&bytes);
            assert_eq!(g.read_g1(&mut r).unwrap(), pt);
            assert_eq!(g.read_gt(&mut r).unwrap(), gt);
            r.finish().unwrap();
        }
        let mut w = Writer::new();
        g.write_g1(&G1Point::Infinity, &mut w);
        let bytes = w.into_bytes();
        assert_eq!(g.read_g1(&mut Reader::new(&bytes)).unwrap(), G1Point::Infinity);
    }

    #[test]
    fn off_subgroup_points_are_rejected() {
        let g = Supersingular::new();
        let f = &g.inner.fp;
        // Smallest x on the curve; its point has order divisible by the cofactor.
        let mut x = BigUint::one();
        let pt = loop {
            if let Some(y) = f.sqrt(&rhs(f, &x)) {
                if !y.is_zero() {
                    break G1Point::Affine { x, y };
                }
            }
            x += 1u8;
        };
        let mut w = Writer::new();
        g.write_g1(&pt, &mut w);
        let bytes = w.into_bytes();
        assert!(matches!(g.read_g1(&mut Reader::new(&bytes)), Err(PreError::Membership(_))));
    }
}
