//! Dense linear algebra, activations and the finite-difference gradient
//! checker that every backward pass in this crate is verified against.
//!
//! Everything here works on plain `f64` slices in row-major order; there is
//! no tensor abstraction beyond [`Matrix`].

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} values, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `W · v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec: {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `out += Wᵀ · u`. Callers guarantee the shapes.
    pub(crate) fn matvec_transpose_acc(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += ur * w;
            }
        }
    }

    /// `W += u ⊗ v`.
    pub(crate) fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        let cols = self.cols;
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0.0 {
                continue;
            }
            for (w, &vc) in self.data[r * cols..(r + 1) * cols].iter_mut().zip(v) {
                *w += ur * vc;
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sigmoid(x: f64) -> f64 {
    // Two branches so that exp never overflows.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the sigmoid expressed through its output `s = σ(x)`.
pub fn sigmoid_grad_from_output(s: f64) -> f64 {
    s * (1.0 - s)
}

pub fn tanh(x: f64) -> f64 {
    x.tanh()
}

/// Derivative of tanh expressed through its output `t = tanh(x)`.
pub fn tanh_grad_from_output(t: f64) -> f64 {
    1.0 - t * t
}

/// Max-shifted softmax.
pub fn softmax(p: &[f64]) -> Vec<f64> {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = p.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest entry; the first one wins on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Compares `analytic` against central differences of `f` around `theta`
/// and returns the largest relative error
/// `|a - n| / max(1e-8, |a| + |n|)` over all coordinates.
pub fn gradient_check<F>(f: F, theta: &[f64], analytic: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if theta.len() != analytic.len() {
        return Err(Error::Dimension(format!(
            "gradient_check: {} parameters but {} gradient entries",
            theta.len(),
            analytic.len()
        )));
    }
    let mut probe = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective at coordinate {i}: f(+h) = {plus}, f(-h) = {minus}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * h);
        let a = analytic[i];
        let rel = (a - numeric).abs() / f64::max(1e-8, a.abs() + numeric.abs());
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Seedable generator with a fixed algorithm (ChaCha8, as implemented by
/// `rand_chacha`), so a seed reproduces the same stream on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent sub-stream of `seed`; used to give every (epoch, pair)
    /// its own dropout masks regardless of which worker computes them.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { inner }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen::<u64>()
    }

    /// Fisher–Yates.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_examples() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(Matrix::identity(3).matvec(&v).unwrap(), v.to_vec());
        assert_eq!(Matrix::zeros(2, 3).matvec(&v).unwrap(), vec![0.0, 0.0]);
        let w = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(w.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert!(matches!(w.matvec(&v), Err(Error::Dimension(_))));
    }

    #[test]
    fn transpose_and_outer() {
        let w = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![1.0; 3];
        w.matvec_transpose_acc(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-2.0, -2.0, -2.0]);

        let mut m = Matrix::zeros(2, 2);
        m.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(m.as_slice(), &[3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn activations() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(sigmoid_grad_from_output(sigmoid(0.0)), 0.25);
        for &x in &[-30.0, -2.5, -0.1, 0.7, 3.0, 40.0] {
            assert!((sigmoid(-x) - (1.0 - sigmoid(x))).abs() < 1e-12);
        }
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0).is_finite() && sigmoid(800.0).is_finite());
    }

    #[test]
    fn softmax_examples() {
        for p in softmax(&[0.0, 0.0, 0.0]) {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln()]);
        let want = [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let base = [0.3, -1.2, 2.0];
        let shifted: Vec<f64> = base.iter().map(|x| x + 17.5).collect();
        for (a, b) in softmax(&base).iter().zip(softmax(&shifted)) {
            assert!((a - b).abs() < 1e-12);
        }
        // No overflow on large logits.
        let big = softmax(&[1000.0, 0.0, -1000.0]);
        assert!((big[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[0.5, 0.5, 0.0]), 0);
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn gradient_check_scalar() {
        let err = gradient_check(|t| t[0] * t[0], &[3.0], &[6.0], 1e-5).unwrap();
        assert!(err < 1e-9, "{err}");
        let err = gradient_check(|_| 4.2, &[1.0, 2.0], &[0.0, 0.0], 1e-5).unwrap();
        assert_eq!(err, 0.0);
        assert!(gradient_check(|t| 1.0 / t[0], &[1e-5], &[0.0], 1e-5).is_err());
    }

    #[test]
    fn rng_reproducible() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(43);
        assert_ne!(Rng::new(42).next_u64(), c.next_u64());
        assert_ne!(
            Rng::with_stream(42, 1).next_u64(),
            Rng::with_stream(42, 2).next_u64()
        );
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut rng = Rng::new(7);
        let mut v: Vec<usize> = (0..100).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
