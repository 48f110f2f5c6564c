//! Weyl-function algebra on spectral data.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::EigenRecord;
use crate::poly::Polynomial;
use crate::problem::BcCase;
use crate::quad::circle_nodes;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Spectral data as read from and written to `spectral_data.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    #[serde(rename = "M1")]
    pub m1: usize,
    pub case: BcCase,
    pub eigs: Vec<EigenRecord>,
}

impl SpectralData {
    /// Number of eigenvalues counted with multiplicity.
    pub fn count(&self) -> usize {
        self.eigs.iter().map(|e| e.multiplicity).sum()
    }

    /// Flat sequence `(λₙ, αₙ)`, `n = 1, 2, …`, repeating multiple eigenvalues.
    pub fn flat(&self) -> Vec<(Complex64, Complex64)> {
        flatten(&self.eigs)
    }

    /// Keeps whole records until at least `k` eigenvalues are covered.
    pub fn truncated(&self, k: usize) -> SpectralData {
        let mut eigs = Vec::new();
        let mut total = 0;
        for e in &self.eigs {
            if total >= k {
                break;
            }
            total += e.multiplicity;
            eigs.push(e.clone());
        }
        SpectralData {
            m1: self.m1,
            case: self.case,
            eigs,
        }
    }
}

pub fn flatten(eigs: &[EigenRecord]) -> Vec<(Complex64, Complex64)> {
    eigs.iter()
        .flat_map(|e| (0..e.multiplicity).map(move |j| (e.lambda, e.alpha_coeffs.get(j).copied().unwrap_or(C0))))
        .collect()
}

/// `M(λ) = p₁(λ)M¹(λ) / (1 + p₂(λ)M¹(λ))`
pub fn reduce_weyl<F: Fn(Complex64) -> Complex64>(
    m1_fn: F,
    p1: &Polynomial,
    p2: &Polynomial,
    lambda: Complex64,
) -> Result<Complex64> {
    let m1 = m1_fn(lambda);
    let t = p2.eval(lambda) * m1;
    let den = C1 + t;
    if den.norm() <= 1e-14 * (1.0 + t.norm()) {
        return Err(Error::DenominatorZero(format!("{lambda}")));
    }
    Ok(p1.eval(lambda) * m1 / den)
}

/// Inverse of [`reduce_weyl`]: `M¹ = M / (p₁ − p₂M)`.
pub fn lift_weyl(m: Complex64, p1: &Polynomial, p2: &Polynomial, lambda: Complex64) -> Result<Complex64> {
    let a = p1.eval(lambda);
    let b = p2.eval(lambda) * m;
    let den = a - b;
    if den.norm() <= 1e-14 * (a.norm() + b.norm()) {
        return Err(Error::DenominatorZero(format!("{lambda}")));
    }
    Ok(m / den)
}

/// Principal parts of the stored records completed by model-problem poles.
#[derive(Debug, Clone)]
pub struct WeylPartialFraction {
    pub records: Vec<EigenRecord>,
    /// `M₁` of the model problem used for the tail.
    pub m1: usize,
}

impl WeylPartialFraction {
    pub fn new(sd: &SpectralData) -> Self {
        WeylPartialFraction {
            records: sd.eigs.clone(),
            m1: sd.m1,
        }
    }
}

/// `Σ_k Σ_j α_{k+j}/(λ − λ_k)^{j+1}` over stored records, then model poles
/// `((n − M₁ − 1)², 2/π)` for the remaining indices up to `k_tail`.
pub fn eval_partial_fraction(pf: &WeylPartialFraction, lambda: Complex64, k_tail: usize) -> Result<Complex64> {
    let mut s = C0;
    let mut n = 0usize;
    for r in &pf.records {
        let d = lambda - r.lambda;
        if d.norm() <= 1e-12 * (1.0 + r.lambda.norm()) {
            return Err(Error::AtPole(format!("{lambda}")));
        }
        let inv = C1 / d;
        let mut p = inv;
        for a in &r.alpha_coeffs {
            s += a * p;
            p *= inv;
        }
        n += r.multiplicity;
    }
    for idx in n + 1..=k_tail {
        let k = idx as f64 - pf.m1 as f64 - 1.0;
        let pole = Complex64::new(k * k, 0.0);
        let d = lambda - pole;
        if d.norm() <= 1e-12 * (1.0 + pole.norm()) {
            return Err(Error::AtPole(format!("{lambda}")));
        }
        s += Complex64::new(2.0 / PI, 0.0) / d;
    }
    Ok(s)
}

/// Reads `M₁` and the boundary-condition class off the eigenvalue asymptotics.
pub fn detect_m1(eigs: &[EigenRecord]) -> Result<(usize, BcCase)> {
    let rhos: Vec<Complex64> = eigs
        .iter()
        .flat_map(|e| std::iter::repeat(e.rho).take(e.multiplicity))
        .collect();
    let total = rhos.len();
    if total < 20 {
        return Err(Error::InvalidInput(format!(
            "need at least 20 eigenvalues to detect M1, got {total}"
        )));
    }
    let start = total - total / 3;
    let vals: Vec<f64> = (start..total)
        .map(|i| (i + 1) as f64 - 1.0 - rhos[i].re)
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let frac = mean - mean.floor();
    if frac <= 0.2 || frac >= 0.8 {
        let m1 = mean.round();
        if m1 < 0.0 {
            return Err(Error::AmbiguousOffset(mean));
        }
        Ok((m1 as usize, BcCase::Equal))
    } else if (0.3..=0.7).contains(&frac) {
        let m2 = (mean + 0.5).round();
        if m2 < 1.0 {
            return Err(Error::AmbiguousOffset(mean));
        }
        Ok((m2 as usize - 1, BcCase::Shifted))
    } else {
        Err(Error::AmbiguousOffset(mean))
    }
}

/// Index set `I` (1-based) of first occurrences and the multiplicity of each.
pub fn group_multiplicities(lambdas: &[Complex64]) -> (Vec<usize>, Vec<usize>) {
    let mut idx = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    for (n, l) in lambdas.iter().enumerate() {
        let same = n > 0 && (l - lambdas[n - 1]).norm() <= 1e-8 * (1.0 + l.norm());
        if same {
            *mult.last_mut().unwrap() += 1;
        } else {
            idx.push(n + 1);
            mult.push(1);
        }
    }
    (idx, mult)
}

/// Regroups a flat list into records.
pub fn records_from_flat(flat: &[(Complex64, Complex64)]) -> Vec<EigenRecord> {
    let lambdas: Vec<Complex64> = flat.iter().map(|p| p.0).collect();
    let (idx, mult) = group_multiplicities(&lambdas);
    idx.iter()
        .zip(mult)
        .map(|(&i, m)| {
            let mut r = EigenRecord::new(flat[i - 1].0, m);
            r.alpha_coeffs = flat[i - 1..i - 1 + m].iter().map(|p| p.1).collect();
            r
        })
        .collect()
}

/// Poles and principal parts of a callable Weyl function near known
/// approximate locations `(λ, multiplicity)`.
///
/// The pole location is refined from contour moments, so the approximation
/// only needs to be well inside the circle of radius `radius`.
pub fn extract_poles<F: Fn(Complex64) -> Result<Complex64> + Sync>(
    m_fn: F,
    approx: &[(Complex64, usize)],
    radius: f64,
) -> Result<Vec<EigenRecord>> {
    let n = 128;
    let mut out = Vec::new();
    for &(c, m) in approx {
        let nodes = circle_nodes(c, radius, n);
        let vals: Vec<Complex64> = nodes.iter().map(|&z| m_fn(z)).collect::<Result<_>>()?;
        // μ_p = (1/2πi)∮ (λ − c)^p M dλ, p = 0..=m
        let mut mu = vec![C0; m + 1];
        for (z, v) in nodes.iter().zip(&vals) {
            let w = *z - c;
            let mut t = v * w;
            for x in mu.iter_mut() {
                *x += t;
                t *= w;
            }
        }
        for x in mu.iter_mut() {
            *x /= n as f64;
        }
        // μ_p = Σ_{j ≤ p} α_j C(p, j) d^{p−j} with d = λ_k − c.
        let solve_alpha = |d: Complex64| -> Vec<Complex64> {
            let mut a = vec![C0; m];
            for p in 0..m {
                let mut acc = mu[p];
                for j in 0..p {
                    acc -= a[j] * binom(p, j) * d.powu((p - j) as u32);
                }
                a[p] = acc;
            }
            a
        };
        let mut d = if mu[0].norm() > 1e-300 && m == 1 { mu[1] / mu[0] } else { C0 };
        for _ in 0..50 {
            let a = solve_alpha(d);
            let f = |d: Complex64| -> Complex64 {
                let mut s = -mu[m];
                for j in 0..m {
                    s += a[j] * binom(m, j) * d.powu((m - j) as u32);
                }
                s
            };
            let h = 1e-7 * (1.0 + d.norm());
            let df = (f(d + h) - f(d - h)) / (2.0 * h);
            if df.norm() == 0.0 {
                break;
            }
            let step = f(d) / df;
            d -= step;
            if step.norm() < 1e-14 * (1.0 + c.norm()) {
                break;
            }
        }
        let mut r = EigenRecord::new(c + d, m);
        r.alpha_coeffs = solve_alpha(d);
        out.push(r);
    }
    Ok(out)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
