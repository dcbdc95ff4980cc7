//! Real trigonometric polynomials `p(t) = c + Σ_k (α_k cos kt + β_k sin kt)`.
//!
//! Symbol profiles built from these stay band-limited, so averages and
//! primitives computed on a grid of more than `2·degree` nodes are exact up
//! to rounding.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub constant: f64,
    /// `cos[k-1]` multiplies `cos(k t)`.
    pub cos: Vec<f64>,
    /// `sin[k-1]` multiplies `sin(k t)`.
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, ..Self::default() }
    }

    pub fn cos_k(k: usize, amp: f64) -> Self {
        if k == 0 {
            return Self::constant(amp);
        }
        let mut cos = vec![0.0; k];
        cos[k - 1] = amp;
        Self { constant: 0.0, cos, sin: Vec::new() }
    }

    pub fn sin_k(k: usize, amp: f64) -> Self {
        if k == 0 {
            return Self::default();
        }
        let mut sin = vec![0.0; k];
        sin[k - 1] = amp;
        Self { constant: 0.0, cos: Vec::new(), sin }
    }

    pub fn degree(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
        last(&self.cos).max(last(&self.sin))
    }

    pub fn mean(&self) -> f64 {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.cos.iter().all(|&x| x == 0.0) && self.sin.iter().all(|&x| x == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.constant;
        for (k, a) in self.cos.iter().enumerate() {
            if *a != 0.0 {
                v += a * math::cos((k + 1) as f64 * t);
            }
        }
        for (k, b) in self.sin.iter().enumerate() {
            if *b != 0.0 {
                v += b * math::sin((k + 1) as f64 * t);
            }
        }
        v
    }

    /// `d/dt`.
    pub fn derivative(&self) -> Self {
        let d = self.degree();
        let mut cos = vec![0.0; d];
        let mut sin = vec![0.0; d];
        for k in 1..=d {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            cos[k - 1] = k as f64 * b;
            sin[k - 1] = -(k as f64) * a;
        }
        Self { constant: 0.0, cos, sin }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            constant: self.constant * s,
            cos: self.cos.iter().map(|x| x * s).collect(),
            sin: self.sin.iter().map(|x| x * s).collect(),
        }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::constant(1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    // z_k for k = -d..=d, index k + d
    fn to_exponential(&self) -> Vec<Complex64> {
        let d = self.degree();
        let mut z = vec![Complex64::new(0.0, 0.0); 2 * d + 1];
        z[d] = Complex64::new(self.constant, 0.0);
        for k in 1..=d {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let zk = Complex64::new(a / 2.0, -b / 2.0);
            z[d + k] = zk;
            z[d - k] = zk.conj();
        }
        z
    }

    fn from_exponential(z: &[Complex64]) -> Self {
        let d = (z.len() - 1) / 2;
        let mut cos = vec![0.0; d];
        let mut sin = vec![0.0; d];
        for k in 1..=d {
            let zk = (z[d + k] + z[d - k].conj()) * 0.5;
            cos[k - 1] = 2.0 * zk.re;
            sin[k - 1] = -2.0 * zk.im;
        }
        Self { constant: z[d].re, cos, sin }
    }
}

fn pad(v: &[f64], len: usize) -> impl Iterator<Item = f64> + '_ {
    (0..len).map(move |i| v.get(i).copied().unwrap_or(0.0))
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let lc = self.cos.len().max(rhs.cos.len());
        let ls = self.sin.len().max(rhs.sin.len());
        TrigPoly {
            constant: self.constant + rhs.constant,
            cos: pad(&self.cos, lc).zip(pad(&rhs.cos, lc)).map(|(a, b)| a + b).collect(),
            sin: pad(&self.sin, ls).zip(pad(&rhs.sin, ls)).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self + &(-rhs)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let a = self.to_exponential();
        let b = rhs.to_exponential();
        let (da, db) = ((a.len() - 1) / 2, (b.len() - 1) / 2);
        let d = da + db;
        let mut z = vec![Complex64::new(0.0, 0.0); 2 * d + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                z[i + j] += x * y;
            }
        }
        TrigPoly::from_exponential(&z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_to_sum() {
        let c1 = TrigPoly::cos_k(1, 1.0);
        let s1 = TrigPoly::sin_k(1, 1.0);
        let p = &c1 * &s1; // sin(2t)/2
        for t in [0.1, 0.7, 2.3] {
            assert!((p.eval(t) - 0.5 * math::sin(2.0 * t)).abs() < 1e-15);
        }
        let q = c1.powi(2); // (1 + cos 2t)/2
        assert!((q.mean() - 0.5).abs() < 1e-15);
        assert_eq!(q.degree(), 2);
    }

    #[test]
    fn derivative_matches_eval() {
        let p = &(&TrigPoly::constant(0.2) + &TrigPoly::sin_k(1, 1.0)) + &TrigPoly::cos_k(3, -0.5);
        let d = p.derivative();
        for t in [0.0, 1.0, 4.0] {
            let want = math::cos(t) + 1.5 * math::sin(3.0 * t);
            assert!((d.eval(t) - want).abs() < 1e-14);
        }
    }
}
