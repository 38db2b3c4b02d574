use serde::{Deserialize, Serialize};

use crate::C64;

/// Dense univariate polynomial with complex coefficients in ascending
/// degree order. The leading coefficient is nonzero unless the polynomial is
/// identically zero, in which case `coeffs` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// Drops leading coefficients below `rel * max|coeff|`.
    pub fn trimmed(&self, rel: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= rel * scale) {
            coeffs.pop();
        }
        Polynomial::new(coeffs)
    }

    pub fn constant(c: C64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Polynomial::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(roots: &[C64], lead: C64) -> Self {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Polynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `xi^deg * p(1/xi)`, i.e. the coefficient-reversed polynomial.
    pub fn eval_reversed(&self, xi: C64) -> C64 {
        self.coeffs
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * xi + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Coefficients of `p(center + u)` as a polynomial in `u`.
    pub fn taylor_shift(&self, center: C64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let hi = c[j + 1];
                c[j] += center * hi;
            }
        }
        Polynomial::new(c)
    }

    pub fn scale(&self, s: C64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::new(Vec::new());
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Polynomial::constant(C64::new(1.0, 0.0));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn from_roots_expands() {
        let p = Polynomial::from_roots(&[c(0.0, 1.0), c(0.0, -1.0)], c(1.0, 0.0));
        assert_eq!(p.degree(), 2);
        assert!((p.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(p.coeffs()[1].norm() < 1e-15);
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let center = c(0.7, -1.1);
        let q = p.taylor_shift(center);
        for u in [c(0.0, 0.0), c(0.3, 0.2), c(-1.0, 2.0)] {
            assert!((q.eval(u) - p.eval(center + u)).norm() < 1e-12);
        }
    }

    #[test]
    fn reversed_eval() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let xi = c(0.5, 0.25);
        let expect = xi * xi * p.eval(xi.inv());
        assert!((p.eval_reversed(xi) - expect).norm() < 1e-13);
    }
}
