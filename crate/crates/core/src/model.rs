//! Model problem `-y'' = λy, y'(0) = 0, λ^{M₁}y'(π) = 0` and its kernels.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::{cos_sinc_sqrt, EigenRecord};
use crate::problem::BcCase;
use crate::quad::GaussLegendre;
use crate::spectral::SpectralData;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Highest single λ- or μ-derivative order of `D̃` supported.
pub const MAX_ORDER: usize = 3;

/// Relative switch point between the quotient and diagonal forms of `D̃`.
pub const EPS_D: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelData {
    pub m1: usize,
}

impl ModelData {
    pub fn new(m1: usize) -> Self {
        ModelData { m1 }
    }

    /// `λ̃ₙ`, `n ≥ 1`.
    pub fn lambda(&self, n: usize) -> Complex64 {
        if n <= self.m1 + 1 {
            C0
        } else {
            let k = (n - self.m1 - 1) as f64;
            Complex64::new(k * k, 0.0)
        }
    }

    /// `α̃ₙ`, `n ≥ 1`.
    pub fn alpha(&self, n: usize) -> Complex64 {
        if n == 1 {
            Complex64::new(1.0 / PI, 0.0)
        } else if n <= self.m1 + 1 {
            C0
        } else {
            Complex64::new(2.0 / PI, 0.0)
        }
    }

    /// Records covering indices `1..=k` (at least the zero cluster).
    pub fn records(&self, k: usize) -> Vec<EigenRecord> {
        let mut out = Vec::new();
        let mut zero = EigenRecord::new(C0, self.m1 + 1);
        zero.alpha_coeffs = (1..=self.m1 + 1).map(|n| self.alpha(n)).collect();
        out.push(zero);
        for n in self.m1 + 2..=k {
            let mut r = EigenRecord::new(self.lambda(n), 1);
            r.alpha_coeffs = vec![self.alpha(n)];
            out.push(r);
        }
        out
    }

    pub fn spectral_data(&self, k: usize) -> SpectralData {
        SpectralData {
            m1: self.m1,
            case: BcCase::Equal,
            eigs: self.records(k),
        }
    }

    /// `M̃(λ) = cos ρπ / (ρ sin ρπ)`
    pub fn weyl(&self, lambda: Complex64) -> Complex64 {
        let z = lambda * PI * PI;
        let [f, g, _, _] = cos_sinc_sqrt(z);
        // ρ sin ρπ = λπ·(sin ρπ/(ρπ))
        f / (lambda * PI * g)
    }
}

/// `f^{(a)}(z)` for `f(z) = cos√z`, `a ≤ MAX_ORDER + 2`.
pub fn cos_sqrt_deriv(a: usize, z: Complex64) -> Complex64 {
    if z.norm() < 4.0 {
        // Σ_{n≥a} (−1)^n n!/(n−a)! z^{n−a}/(2n)!
        let mut s = C0;
        // term for n = a
        let mut fact_ratio = 1.0; // n!/(n−a)!
        for i in 1..=a {
            fact_ratio *= i as f64;
        }
        let mut inv_fact = 1.0; // 1/(2n)!
        for i in 1..=(2 * a) {
            inv_fact /= i as f64;
        }
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        let mut t = Complex64::new(sign * fact_ratio * inv_fact, 0.0);
        let mut n = a;
        for _ in 0..40 {
            s += t;
            let n1 = (n + 1) as f64;
            // ratio term(n+1)/term(n) = −z·(n+1)/(n+1−a) / ((2n+1)(2n+2))
            t = -t * z * n1 / ((n1 - a as f64) * (2.0 * n1 - 1.0) * (2.0 * n1));
            n += 1;
            if t.norm() < 1e-18 * s.norm() {
                break;
            }
        }
        s
    } else {
        let [f, g, _, _] = cos_sinc_sqrt(z);
        let mut d0 = f;
        let mut d1 = -g * 0.5;
        if a == 0 {
            return d0;
        }
        for k in 0..a - 1 {
            let d2 = -((4.0 * k as f64 + 2.0) * d1 + d0) / (z * 4.0);
            d0 = d1;
            d1 = d2;
        }
        d1
    }
}

fn inv_factorial(a: usize) -> f64 {
    (1..=a).fold(1.0, |acc, i| acc / i as f64)
}

/// `φ̃_a(x, λ) = (1/a!) ∂^a_λ cos(√λ x)`
pub fn phi_tilde(a: usize, x: f64, lambda: Complex64) -> Complex64 {
    cos_sqrt_deriv(a, lambda * x * x) * x.powi(2 * a as i32) * inv_factorial(a)
}

/// `∂ₓ φ̃_a(x, λ)`
pub fn dphi_tilde_dx(a: usize, x: f64, lambda: Complex64) -> Complex64 {
    let z = lambda * x * x;
    let fa = cos_sqrt_deriv(a, z);
    let fa1 = cos_sqrt_deriv(a + 1, z);
    let lead = if a == 0 {
        C0
    } else {
        fa * (2.0 * a as f64) * x.powi(2 * a as i32 - 1)
    };
    (lead + lambda * fa1 * 2.0 * x.powi(2 * a as i32 + 1)) * inv_factorial(a)
}

/// `∂^j/∂λ^j cos(√λ x)` (not normalized by `j!`).
pub fn model_phi(x: f64, lambda: Complex64, j: usize) -> Complex64 {
    cos_sqrt_deriv(j, lambda * x * x) * x.powi(2 * j as i32)
}

/// `D̃(x, λ, μ) = ∫₀ˣ cos(√λ t) cos(√μ t) dt`
pub fn kernel_d(x: f64, lambda: Complex64, mu: Complex64) -> Complex64 {
    let d = lambda - mu;
    if d.norm() <= EPS_D * (1.0 + lambda.norm()) {
        let c = (lambda + mu) * 0.5;
        // x/2 + sin(2ρx)/(4ρ)
        let [_, g, _, _] = cos_sinc_sqrt(c * 4.0 * x * x);
        return (g + 1.0) * (x * 0.5);
    }
    // ½∫₀ˣ cos((ρ−θ)t) + cos((ρ+θ)t) dt, with the sign of θ chosen so that
    // ρ−θ = (λ−μ)/(ρ+θ) is formed without cancellation.
    let rho = lambda.sqrt();
    let mut theta = mu.sqrt();
    if (rho + theta).norm() < (rho - theta).norm() {
        theta = -theta;
    }
    let s = rho + theta;
    let diff = d / s;
    let [_, g_minus, _, _] = cos_sinc_sqrt(diff * diff * x * x);
    let [_, g_plus, _, _] = cos_sinc_sqrt(s * s * x * x);
    (g_minus + g_plus) * (x * 0.5)
}

/// `D̃_{a,b} = (1/a! b!) ∂^a_λ ∂^b_μ D̃(x, λ, μ)`
pub fn kernel_d_derivs(x: f64, lambda: Complex64, mu: Complex64, a: usize, b: usize) -> Result<Complex64> {
    if a > MAX_ORDER || b > MAX_ORDER {
        return Err(Error::OrderTooHigh(a.max(b)));
    }
    if a == 0 && b == 0 {
        return Ok(kernel_d(x, lambda, mu));
    }
    if x == 0.0 {
        return Ok(C0);
    }
    let rl = lambda.sqrt();
    let rm = mu.sqrt();
    let freq = rl.norm() + rm.norm();
    let pieces = ((x * freq) / 16.0).ceil().max(1.0) as usize;
    let gl = GaussLegendre::cached(24 + 2 * (a + b));
    let h = x / pieces as f64;
    let mut s = C0;
    for p in 0..pieces {
        let lo = h * p as f64;
        s += gl.integrate(lo, lo + h, |t| phi_tilde(a, t, lambda) * phi_tilde(b, t, mu));
    }
    Ok(s)
}

/// `∂ₓ D̃_{a,b}(x, λ, μ) = φ̃_a(x, λ) φ̃_b(x, μ)`
pub fn kernel_d_dx(x: f64, lambda: Complex64, mu: Complex64, a: usize, b: usize) -> Complex64 {
    phi_tilde(a, x, lambda) * phi_tilde(b, x, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn model_phi_examples() {
        assert!((model_phi(PI, c(4.0, 0.0), 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((model_phi(PI, C0, 1) - c(-PI * PI / 2.0, 0.0)).norm() < 1e-14);
        assert!((model_phi(PI / 3.0, c(9.0, 0.0), 0) - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_branches_agree() {
        // Series and recurrence overlap around |z| = 4.
        for a in 0..5 {
            for z in [c(3.99, 0.0), c(-3.99, 0.1), c(0.0, 3.99)] {
                let s = cos_sqrt_deriv(a, z);
                let zz = z * (4.01 / 3.99);
                let r = cos_sqrt_deriv(a, zz);
                // compare series at z with a Taylor step from the recurrence side
                let step = cos_sqrt_deriv(a + 1, zz) * (z - zz);
                assert!((s - (r + step)).norm() < 1e-4 * (1.0 + s.norm()), "a={a} z={z}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for a in 0..4 {
            for z in [c(0.5, 0.2), c(10.0, -3.0), c(-30.0, 1.0)] {
                let h = 1e-5 * (1.0 + z.norm());
                let fd = (cos_sqrt_deriv(a, z + h) - cos_sqrt_deriv(a, z - h)) / (2.0 * h);
                let ex = cos_sqrt_deriv(a + 1, z);
                assert!((fd - ex).norm() < 1e-6 * (1.0 + ex.norm()), "a={a} z={z}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_d(PI, c(1.0, 0.0), c(4.0, 0.0)).norm() < 1e-14);
        assert!((kernel_d(PI, C0, C0) - c(PI, 0.0)).norm() < 1e-14);
        assert!(kernel_d(0.0, c(3.0, 1.0), c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn model_weyl_residue() {
        let md = ModelData::new(0);
        let v = md.weyl(c(-1.0, 0.0));
        assert!((v.re + 1.0 / PI.tanh()).abs() < 1e-13);
    }

    #[test]
    fn records_layout() {
        let r = ModelData::new(2).records(6);
        assert_eq!(r[0].multiplicity, 3);
        assert_eq!(r.len(), 4);
        assert!((r[3].lambda.re - 9.0).abs() < 1e-15);
    }
}
