//! Double-double arithmetic and an independent eval-mode reference loss.
//!
//! A central difference with h = 1e-5 on a loss of size ~1 carries about one
//! ulp of noise per evaluation, i.e. ~1e-11 in the derivative, which is a
//! large relative error for parameters whose gradient is ~1e-7. Evaluating
//! the loss with ~106-bit significands, and reporting it relative to the loss
//! at the unperturbed point, removes that noise floor so the finite
//! difference measures the mathematics rather than rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::model::{EncodedPair, LstmParams, Params, SoftmaxParams};
use crate::numerics::Matrix;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Dekker's splitting into two 26-bit halves.
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact multiplication by a power of two.
    fn ldexp(self, e: i32) -> Dd {
        let s = 2f64.powi(e);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        // x = k ln2 + r, |r| <= ln2/2; exp(r) = (exp(r / 2^10))^(2^10).
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from(k)).ldexp(-10);
        // Taylor series of expm1(r), |r| < 3.4e-4: 12 terms reach ~1e-45.
        let coef = inverse_factorials();
        let mut sum = coef[12];
        for c in coef[1..12].iter().rev() {
            sum = sum * r + *c;
        }
        let mut sum = sum * r;
        // expm1(2x) = expm1(x) (2 + expm1(x)) keeps the small part exact.
        for _ in 0..10 {
            sum = sum * (sum + Dd::from(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    /// `a * self` for a plain f64 `a`.
    pub fn scale(self, a: f64) -> Dd {
        let (p, e) = two_prod(a, self.hi);
        let (hi, lo) = quick_two_sum(p, e + a * self.lo);
        Dd { hi, lo }
    }

    /// Natural log by Newton's method on `exp`.
    pub fn ln(self) -> Dd {
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Dd::ONE;
        }
        x
    }

    pub fn sigmoid(self) -> Dd {
        Dd::ONE / (Dd::ONE + (-self).exp())
    }

    pub fn tanh(self) -> Dd {
        let neg = self.hi < 0.0;
        let t = (if neg { self } else { -self }).ldexp(1).exp();
        let y = (Dd::ONE - t) / (Dd::ONE + t);
        if neg {
            -y
        } else {
            y
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

/// `1/n!` for `n = 0..=12`.
fn inverse_factorials() -> &'static [Dd; 13] {
    static TABLE: OnceLock<[Dd; 13]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Dd::ONE; 13];
        for n in 1..13 {
            t[n] = t[n - 1] / Dd::from(n as f64);
        }
        t
    })
}

fn affine(w: &Matrix, b: &[f64], x: &[Dd]) -> Vec<Dd> {
    (0..w.rows())
        .map(|r| {
            w.row(r)
                .iter()
                .zip(x)
                .fold(Dd::from(b[r]), |acc, (&wi, &xi)| acc + xi.scale(wi))
        })
        .collect()
}

fn encode(p: &LstmParams, steps: &[Vec<f64>]) -> Vec<Dd> {
    let k = p.hidden();
    let mut h = vec![Dd::ZERO; k];
    let mut c = vec![Dd::ZERO; k];
    for z in steps {
        let x: Vec<Dd> = z.iter().map(|&v| Dd::from(v)).chain(h.iter().copied()).collect();
        let i = affine(&p.w_i, &p.b_i, &x);
        let f = affine(&p.w_f, &p.b_f, &x);
        let o = affine(&p.w_o, &p.b_o, &x);
        let g = affine(&p.w_c, &p.b_c, &x);
        for j in 0..k {
            c[j] = f[j].sigmoid() * c[j] + i[j].sigmoid() * g[j].tanh();
            h[j] = o[j].sigmoid() * c[j].tanh();
        }
    }
    h
}

fn decision_loss(s: &SoftmaxParams, features: &[Dd], gold: usize) -> Dd {
    let scores = affine(&s.w, &s.b, features);
    let m = scores.iter().map(|x| x.hi).fold(f64::NEG_INFINITY, f64::max);
    let m = Dd::from(m);
    let total = scores
        .iter()
        .fold(Dd::ZERO, |acc, &x| acc + (x - m).exp());
    m + total.ln() - scores[gold]
}

/// `-log p(gold)` of `pair` in eval mode (no dropout), computed in
/// double-double arithmetic independently of [`crate::model::forward`].
/// Panics if the parameters and the pair disagree in shape.
pub fn reference_loss(params: &Params, pair: &EncodedPair) -> Dd {
    let hyp = encode(&params.hypothesis, &pair.hypothesis.steps);
    let features = match (&params.premise, &pair.premise) {
        (Some(pp), Some(seq)) => {
            let mut f = encode(pp, &seq.steps);
            f.extend(hyp);
            f
        }
        (None, _) => hyp,
        (Some(_), None) => panic!("biway parameters need the premise-side sequence"),
    };
    decision_loss(&params.softmax, &features, pair.label.index())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_beats_f64() {
        // 0.1 + 0.2 - 0.3 is 5.55e-17 in f64 but ~2.8e-17 in decimal; in dd
        // arithmetic over the exact binary inputs it is the exact residue.
        let x = Dd::from(0.1) + Dd::from(0.2) - Dd::from(0.3);
        assert_eq!(x.to_f64(), 2.7755575615628914e-17);
        let third = Dd::ONE / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn transcendentals_are_consistent() {
        for &x in &[-30.0, -1.7, -1e-3, 0.0, 1e-9, 0.3, 2.5, 40.0] {
            let d = Dd::from(x);
            assert!(close(d.exp(), x.exp(), 1e-15), "exp {x}");
            assert!((d.exp().ln() - d).to_f64().abs() < 1e-29 * x.abs().max(1.0), "ln exp {x}");
            assert!(close(d.tanh(), x.tanh(), 1e-15), "tanh {x}");
            let s = d.sigmoid() + (-d).sigmoid() - Dd::ONE;
            assert!(s.to_f64().abs() < 1e-30, "sigmoid symmetry {x}");
        }
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
    }
}
