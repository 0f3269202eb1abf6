//! Expected averaging matrix, its second eigenvalue and the epsilon-averaging time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::Topology;
use crate::error::SimError;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "square matrix expected");
        Self { n, data: rows.concat() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.n.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self[(i, j)]).sum()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn uniform_pair_probs(t: &Topology) -> Vec<f64> {
    let m = t.edges().len();
    vec![1.0 / m as f64; m]
}

/// `E[W] = sum_e p_e (I - (e_i - e_j)(e_i - e_j)^T / 2)`, one probability per edge.
pub fn expected_w(t: &Topology, pair_probs: &[f64]) -> Result<Matrix, SimError> {
    let sum: f64 = pair_probs.iter().sum();
    if pair_probs.len() != t.edges().len() || pair_probs.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(SimError::ProbabilitySum(sum));
    }
    let mut w = Matrix::identity(t.len());
    for (&(i, j), &p) in t.edges().iter().zip(pair_probs) {
        let h = p / 2.0;
        w[(i, i)] -= h;
        w[(j, j)] -= h;
        w[(i, j)] += h;
        w[(j, i)] += h;
    }
    Ok(w)
}

pub const LAMBDA2_TOL: f64 = 1e-10;
pub const LAMBDA2_MAX_ITER: usize = 2_000_000;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn deflate(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Largest eigenvalue of `m + shift I` restricted to the complement of the
/// all-ones vector, by power iteration; stops once the residual
/// `|Mv - mu v|` drops below the tolerance, which bounds the eigenvalue error.
fn deflated_power(m: &Matrix, shift: f64) -> Result<f64, SimError> {
    let n = m.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    deflate(&mut v);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    for _ in 0..LAMBDA2_MAX_ITER {
        let mut mv = m.mul_vec(&v);
        mv.iter_mut().zip(&v).for_each(|(y, x)| *y += shift * x);
        deflate(&mut mv);
        let mu: f64 = mv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let residual = norm(&mv.iter().zip(&v).map(|(a, b)| a - mu * b).collect::<Vec<_>>());
        let nm = norm(&mv);
        if residual < LAMBDA2_TOL || nm < LAMBDA2_TOL {
            return Ok(if nm < LAMBDA2_TOL { shift.min(mu) } else { mu });
        }
        v = mv.into_iter().map(|x| x / nm).collect();
    }
    Err(SimError::NoConvergence(LAMBDA2_MAX_ITER))
}

/// Second-largest eigenvalue of a symmetric doubly stochastic matrix.
pub fn lambda2(m: &Matrix) -> Result<f64, SimError> {
    if m.dim() < 2 {
        return Ok(0.0);
    }
    let mu = deflated_power(m, 0.0)?;
    if mu >= 0.0 {
        return Ok(mu);
    }
    // The dominant deflated eigenvalue is negative: shift the spectrum up so
    // the largest algebraic one dominates.
    let shift = -mu;
    Ok(deflated_power(m, shift)? - shift)
}

/// `max(1, ceil(3 ln(1/eps) / ln(1/lam2)))` update steps.
pub fn epsilon_averaging_t(eps: f64, lam2: f64) -> Result<u64, SimError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SimError::Epsilon(eps));
    }
    if !(lam2 < 1.0) || lam2.is_nan() {
        return Err(SimError::Disconnected(lam2));
    }
    let lam2 = lam2.max(0.0);
    let bound = 3.0 * (1.0 / eps).ln() / (1.0 / lam2).ln();
    Ok((bound.ceil() as u64).max(1))
}

/// `lambda2(E[W])` for uniform pair selection.
pub fn topology_lambda2(t: &Topology) -> Result<f64, SimError> {
    if t.len() < 2 {
        return Ok(0.0);
    }
    if !t.is_connected() {
        return Err(SimError::Disconnected(1.0));
    }
    let l = lambda2(&expected_w(t, &uniform_pair_probs(t))?)?;
    if l >= 1.0 - 1e-12 {
        return Err(SimError::Disconnected(l));
    }
    Ok(l)
}
