//! Regular potential `q ∈ L₂` with polynomial boundary conditions at both ends.
//!
//! The problem `−y'' + qy = λy`, `p₁(λ)y'(0) − p₂(λ)y(0) = 0`,
//! `ř₁(λ)y'(π) + ř₂(λ)y(π) = 0` is reduced to the distributional form with
//! `σ = ∫₀ˣ q`, `r₁ = ř₁`, `r₂ = ř₂ + σ(π)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{EigenRecord, Forward};
use crate::grid::GridFunction;
use crate::poly::Polynomial;
use crate::problem::{FullProblem, ProblemL, SigmaFunction};
use crate::reconstruct::{invert, InvertOptions, Reconstruction};
use crate::spectral::{detect_m1, extract_poles, reduce_weyl, SpectralData};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct RegularProblem {
    pub q: GridFunction,
    pub p1: Polynomial,
    pub zeros_p2: Vec<Complex64>,
    pub r1_check: Polynomial,
    pub r2_check: Polynomial,
}

impl RegularProblem {
    pub fn new(
        q: GridFunction,
        p1: Polynomial,
        zeros_p2: Vec<Complex64>,
        r1_check: Polynomial,
        r2_check: Polynomial,
    ) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidInput("q needs at least two samples".into()));
        }
        if p1.degree() != zeros_p2.len() {
            return Err(Error::InvalidInput(format!(
                "deg p1 = {} must equal the number of zeros of p2 ({})",
                p1.degree(),
                zeros_p2.len()
            )));
        }
        if r1_check.degree() != r2_check.degree() || r2_check.is_zero() {
            return Err(Error::InvalidInput("deg ř1 must equal deg ř2".into()));
        }
        for (name, p) in [("p1", &p1), ("r1_check", &r1_check)] {
            if (p.leading() - C1).norm() > 1e-12 {
                return Err(Error::InvalidInput(format!("{name} must be monic")));
            }
        }
        Ok(RegularProblem {
            q,
            p1,
            zeros_p2,
            r1_check,
            r2_check,
        })
    }

    /// `σ(x) = ∫₀ˣ q` by the trapezoid rule on the grid of `q`.
    pub fn sigma(&self) -> SigmaFunction {
        let h = self.q.step();
        let v = &self.q.values;
        let mut s = Vec::with_capacity(v.len());
        let mut acc = C0;
        s.push(acc);
        for w in v.windows(2) {
            acc += (w[0] + w[1]) * (0.5 * h);
            s.push(acc);
        }
        SigmaFunction::GridSamples { values: s }
    }

    /// `L(σ, ř₁, ř₂ + σ(π))`
    pub fn inner(&self) -> Result<ProblemL> {
        let sigma = self.sigma();
        let s_pi = sigma.eval(std::f64::consts::PI);
        let r2 = &self.r2_check + &Polynomial::constant(s_pi);
        ProblemL::new(sigma, self.r1_check.clone(), r2)
    }

    pub fn full(&self, b_n2: Complex64) -> Result<FullProblem> {
        FullProblem::new(self.p1.clone(), build_p2(&self.zeros_p2, b_n2), self.inner()?)
    }
}

/// `M¹(λ) = ψ(0)/(p₁ψ^{[1]}(0) − p₂ψ(0))` straight from the Weyl solution.
pub fn weyl_m1(fwd: &Forward, p1: &Polynomial, p2: &Polynomial, lambda: Complex64) -> Result<Complex64> {
    let [p, p1v] = fwd.psi0(lambda)?;
    let den = p1.eval(lambda) * p1v - p2.eval(lambda) * p;
    let m = p / den;
    if den == C0 || !m.re.is_finite() || !m.im.is_finite() {
        return Err(Error::AtPole(format!("{lambda}")));
    }
    Ok(m)
}

/// `t` values in `[20, 80]` for [`estimate_bn2`].
pub fn default_bn2_samples() -> Vec<f64> {
    (0..16).map(|i| 20.0 + 60.0 * i as f64 / 15.0).collect()
}

/// Leading coefficient `b_{N₂}` of `p₂` from the decay of `M¹` along `λ = −t²`.
///
/// There `λ^{N₁}M¹(λ) = −t⁻¹(1 − b_{N₂}/t + O(t⁻²))`, so `t(1 + tλ^{N₁}M¹)`
/// is fitted by `b + c/t` and extrapolated to `t = ∞`.
pub fn estimate_bn2<F: Fn(Complex64) -> Result<Complex64>>(m1_fn: F, n1: usize, ts: &[f64]) -> Result<Complex64> {
    if ts.len() < 3 {
        return Err(Error::InvalidInput("need at least three samples".into()));
    }
    let mut u = Vec::with_capacity(ts.len());
    let mut f = Vec::with_capacity(ts.len());
    for &t in ts {
        let lambda = Complex64::new(-t * t, 0.0);
        let v = lambda.powu(n1 as u32) * m1_fn(lambda)?;
        u.push(1.0 / t);
        f.push((C1 + v * t) * t);
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mf = f.iter().sum::<Complex64>() / n;
    let suu: f64 = u.iter().map(|x| (x - mu) * (x - mu)).sum();
    let suf: Complex64 = u.iter().zip(&f).map(|(x, y)| (y - mf) * (x - mu)).sum();
    let slope = suf / suu;
    let b = mf - slope * mu;
    let resid = u
        .iter()
        .zip(&f)
        .map(|(x, y)| (y - b - slope * x).norm())
        .fold(0.0, f64::max);
    let rel = resid / b.norm().max(1e-12);
    if !(rel <= 0.05) {
        return Err(Error::FitUnstable(rel));
    }
    Ok(b)
}

/// `b·Π(λ − z_j)`
pub fn build_p2(zeros: &[Complex64], b: Complex64) -> Polynomial {
    Polynomial::from_roots(zeros).scale(b)
}

#[derive(Debug, Clone)]
pub struct QResult {
    pub q: GridFunction,
    pub sigma_pi: Complex64,
    pub method: String,
}

/// `q = σ'` by fourth-order differences, optionally smoothed by the Tikhonov
/// problem `min ‖q − q_fd‖² + smoothing·‖Lq‖²` with `L` the second difference.
pub fn sigma_to_q(sigma: &GridFunction, smoothing: f64) -> Result<QResult> {
    let n = sigma.len();
    if n < 5 {
        return Err(Error::InvalidInput("σ needs at least five samples".into()));
    }
    let h = sigma.step();
    let s = &sigma.values;
    let mut q = vec![C0; n];
    for j in 2..n - 2 {
        q[j] = (s[j - 2] - s[j - 1] * 8.0 + s[j + 1] * 8.0 - s[j + 2]) / (12.0 * h);
    }
    let one_sided = |a: [Complex64; 5]| -> [Complex64; 2] {
        [
            (a[0] * -25.0 + a[1] * 48.0 - a[2] * 36.0 + a[3] * 16.0 - a[4] * 3.0) / (12.0 * h),
            (a[0] * -3.0 - a[1] * 10.0 + a[2] * 18.0 - a[3] * 6.0 + a[4]) / (12.0 * h),
        ]
    };
    let [a, b] = one_sided([s[0], s[1], s[2], s[3], s[4]]);
    q[0] = a;
    q[1] = b;
    let [a, b] = one_sided([s[n - 1], s[n - 2], s[n - 3], s[n - 4], s[n - 5]]);
    q[n - 1] = -a;
    q[n - 2] = -b;
    let mut method = "five-point differences".to_string();
    if smoothing > 0.0 {
        q = tikhonov(&q, smoothing)?;
        method = format!("five-point differences, Tikhonov smoothing {smoothing:e}");
    }
    Ok(QResult {
        q: GridFunction::new(q),
        sigma_pi: sigma.last(),
        method,
    })
}

/// Smoothing parameter that damps the wavelength `π/K` of the truncation
/// oscillations by a factor of 100 on a grid of `n_x` points.
pub fn gibbs_smoothing(k: usize, n_x: usize) -> f64 {
    let h = std::f64::consts::PI / (n_x - 1) as f64;
    let w = (2.0 * k as f64 * h).min(std::f64::consts::PI);
    let d = 2.0 - 2.0 * w.cos();
    100.0 / (d * d)
}

fn second_diff(v: &[Complex64]) -> Vec<Complex64> {
    (1..v.len() - 1).map(|j| v[j - 1] - v[j] * 2.0 + v[j + 1]).collect()
}

fn second_diff_t(w: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![C0; n];
    for (k, x) in w.iter().enumerate() {
        out[k] += x;
        out[k + 1] -= x * 2.0;
        out[k + 2] += x;
    }
    out
}

/// Conjugate gradients for the real symmetric `I + αLᵀL` applied to complex data.
fn tikhonov(rhs: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
    let n = rhs.len();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let lt = second_diff_t(&second_diff(v), n);
        v.iter().zip(&lt).map(|(a, b)| a + b * alpha).collect()
    };
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let nrm = |a: &[Complex64]| a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let mut x = rhs.to_vec();
    let ax = apply(&x);
    let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let tol = 1e-13 * nrm(rhs).max(1e-300);
    for _ in 0..10 * n {
        if nrm(&r) <= tol {
            return Ok(x);
        }
        let ap = apply(&p);
        let a = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if nrm(&r) <= 1e-8 * nrm(rhs).max(1e-300) {
        Ok(x)
    } else {
        Err(Error::NoConvergence("Tikhonov smoothing".into()))
    }
}

#[derive(Debug, Clone)]
pub struct RegularOptions {
    pub invert: InvertOptions,
    pub smoothing: f64,
    pub bn2_samples: Vec<f64>,
}

impl Default for RegularOptions {
    fn default() -> Self {
        RegularOptions {
            invert: InvertOptions::default(),
            smoothing: 0.0,
            bn2_samples: default_bn2_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularSummary {
    pub b_n2: Complex64,
    pub p2: Polynomial,
    pub r1_check: Polynomial,
    pub r2_check: Polynomial,
    pub sigma_pi: Complex64,
    pub q_method: String,
}

#[derive(Debug, Clone)]
pub struct RegularResult {
    pub summary: RegularSummary,
    pub q: GridFunction,
    pub spectral: SpectralData,
    pub reconstruction: Reconstruction,
}

/// Poles and principal parts of `M = p₁M¹/(1 + p₂M¹)` near `approx`.
pub fn spectral_data_from_m1<F: Fn(Complex64) -> Result<Complex64> + Sync>(
    m1_fn: &F,
    p1: &Polynomial,
    p2: &Polynomial,
    approx: &[(Complex64, usize)],
) -> Result<SpectralData> {
    let m_fn = |z: Complex64| -> Result<Complex64> {
        let m1 = m1_fn(z)?;
        reduce_weyl(|_| m1, p1, p2, z)
    };
    let mut eigs: Vec<EigenRecord> = Vec::with_capacity(approx.len());
    for (i, &(c, m)) in approx.iter().enumerate() {
        let gap = approx
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| (o.0 - c).norm())
            .fold(f64::INFINITY, f64::min);
        let r = (0.25 * gap).min(0.5);
        eigs.extend(extract_poles(&m_fn, &[(c, m)], r)?);
    }
    let (m1, case) = detect_m1(&eigs)?;
    Ok(SpectralData { m1, case, eigs })
}

/// Recovery of `q`, `ř₁`, `ř₂` and `b_{N₂}` from `M¹`, `p₁`, the zeros of `p₂`
/// and approximate pole locations of `M`.
pub fn invert_regular<F: Fn(Complex64) -> Result<Complex64> + Sync>(
    m1_fn: F,
    p1: &Polynomial,
    zeros_p2: &[Complex64],
    approx: &[(Complex64, usize)],
    opts: &RegularOptions,
) -> Result<RegularResult> {
    let b_n2 = estimate_bn2(&m1_fn, p1.degree(), &opts.bn2_samples)?;
    let p2 = build_p2(zeros_p2, b_n2);
    let sd = spectral_data_from_m1(&m1_fn, p1, &p2, approx)?;
    let rec = invert(&sd, &opts.invert)?;
    let qr = sigma_to_q(&rec.sigma, opts.smoothing)?;
    let r2_check = &rec.r2 - &Polynomial::constant(qr.sigma_pi);
    let summary = RegularSummary {
        b_n2,
        p2,
        r1_check: rec.r1.clone(),
        r2_check,
        sigma_pi: qr.sigma_pi,
        q_method: qr.method,
    };
    Ok(RegularResult {
        summary,
        q: qr.q,
        spectral: sd,
        reconstruction: rec,
    })
}
