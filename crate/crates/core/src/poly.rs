use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold below which trailing coefficients are treated as zero.
pub const COEFF_TOL: f64 = 1e-10;

/// Complex polynomial in λ, coefficients stored in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping trailing coefficients that are
    /// negligible relative to the largest one.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `c·λⁿ`
    pub fn monomial(n: usize, c: Complex64) -> Self {
        let mut v = vec![ZERO; n + 1];
        v[n] = c;
        Self::new(v)
    }

    /// `Π (λ − zⱼ)`
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::one();
        for &z in roots {
            p = &p * &Polynomial::new(vec![-z, ONE]);
        }
        p
    }

    fn trim(&mut self) {
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            if scale == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        while let Some(c) = self.coeffs.last() {
            if c.norm() <= COEFF_TOL * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of λⁿ, zero past the stored degree.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * lambda + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_deriv(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * lambda + p;
            p = p * lambda + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| c * n as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Euclidean division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Self::zero(), self.clone());
        }
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let mut q = vec![ZERO; self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + dd] / lead;
            q[k] = c;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= c * dc;
            }
            r[k + dd] = ZERO;
        }
        r.truncate(dd);
        (Self::new(q), Polynomial { coeffs: r })
    }

    /// Exact-zero trimming; used where relative trimming would be wrong
    /// (remainders whose scale is set by the dividend).
    fn trim_abs(mut self, tol: f64) -> Self {
        while let Some(c) = self.coeffs.last() {
            if c.norm() <= tol {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }
}

/// Degree of the monic gcd of `p` and `q`.
///
/// Remainders smaller than [`COEFF_TOL`] relative to the current operands are
/// deflated to zero. Both zero is reported as degree 0.
pub fn gcd_degree(p: &Polynomial, q: &Polynomial) -> usize {
    let normalize = |x: &Polynomial| {
        let m = x.max_abs();
        if m == 0.0 {
            x.clone()
        } else {
            x.scale(Complex64::new(1.0 / m, 0.0))
        }
    };
    let mut a = normalize(p);
    let mut b = normalize(q);
    if a.is_zero() {
        return b.degree();
    }
    if b.is_zero() {
        return a.degree();
    }
    if a.degree() < b.degree() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let (_, r) = a.div_rem(&b);
        let scale = a.max_abs().max(b.max_abs());
        let r = r.trim_abs(1e-8 * scale);
        if r.is_zero() {
            return b.degree();
        }
        a = b;
        b = normalize(&r);
        if b.degree() == 0 {
            return 0;
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Polynomial::new(v)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-ONE)
    }
}
