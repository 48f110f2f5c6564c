//! Reconstruction of `σᴷ`, `r₁ᴷ`, `r₂ᴷ` from the solved main equation.
//!
//! Every contour integral over `Γ_N` is a finite residue sum over the clusters
//! inside `Γ_N`; the remaining clusters up to `K` form the tail sums. The two
//! parts are kept apart only for diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::main_eq::{solve_on_grid, Cluster, PhiTable, PointSolution, SlotLayout};
use crate::model::{dphi_tilde_dx, kernel_d_derivs, phi_tilde, ModelData};
use crate::poly::Polynomial;
use crate::problem::BcCase;
use crate::quad::chebyshev_points;
use crate::spectral::{detect_m1, SpectralData};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Relative fit residual above which a polynomial fit is rejected.
pub const FIT_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub n: usize,
    pub radius: f64,
}

impl ContourSpec {
    /// Circle `|λ| = (N − M₁ − ½)²`, which separates indices `≤ N` from the
    /// rest since `λₙ ≈ (n − M₁ − 1)²`.
    pub fn new(n: usize, m1: usize) -> Self {
        let r = n as f64 - m1 as f64 - 0.5;
        ContourSpec { n, radius: r * r }
    }
}

/// Smallest `N` covering every multiple eigenvalue, every index `n ≤ M₁+1`
/// and every index with `ξₙ > ½·max ξ`, plus `margin`.
pub fn choose_contour(layout: &SlotLayout, margin: usize) -> Result<ContourSpec> {
    let mut need = layout.m1 + 1;
    for c in &layout.clusters {
        if c.mult > 1 {
            need = need.max(c.start + c.mult - 1);
        }
    }
    let xmax = layout.xi.iter().cloned().fold(0.0, f64::max);
    for (i, &x) in layout.xi.iter().enumerate() {
        if xmax > 0.0 && x > 0.5 * xmax {
            need = need.max(i + 1);
        }
    }
    let mut n = need + margin;
    while n < layout.k {
        let spec = ContourSpec::new(n, layout.m1);
        if validate_contour(layout, &spec).is_ok() {
            return Ok(spec);
        }
        n += 1;
    }
    Err(Error::InvalidInput(format!(
        "no contour index N < K = {} separates the spectrum (needed N ≥ {})",
        layout.k,
        need + margin
    )))
}

/// Poles with index `≤ N` strictly inside `Γ_N`, the rest strictly outside,
/// none within a relative `1e−6` of the circle.
pub fn validate_contour(layout: &SlotLayout, spec: &ContourSpec) -> Result<()> {
    if spec.n <= layout.m1 {
        return Err(Error::InvalidInput(format!("N = {} must exceed M1 = {}", spec.n, layout.m1)));
    }
    if spec.n >= layout.k {
        return Err(Error::InvalidInput(format!("K = {} must exceed N = {}", layout.k, spec.n)));
    }
    for c in &layout.clusters {
        let r = c.lambda.norm();
        if (r - spec.radius).abs() <= 1e-6 * spec.radius {
            return Err(Error::ContourThroughPole(format!("{}", c.lambda)));
        }
        let inside = r < spec.radius;
        let first = c.start <= spec.n;
        let last = c.start + c.mult - 1 <= spec.n;
        if inside != first || first != last {
            return Err(Error::InvalidInput(format!(
                "cluster at {} (index {}) is on the wrong side of Γ_{}",
                c.lambda, c.start, spec.n
            )));
        }
    }
    Ok(())
}

fn side_sign(side: usize) -> f64 {
    if side == 0 {
        1.0
    } else {
        -1.0
    }
}

fn cluster_phi_k(point: &PointSolution, c: &Cluster, q: usize) -> Complex64 {
    point.phi[2 * (c.start + q - 1) + c.side]
}

fn cluster_dphi_k(point: &PointSolution, c: &Cluster, q: usize) -> Complex64 {
    point.dphi[2 * (c.start + q - 1) + c.side]
}

/// `Ã_{k+q,i}(x, λ) = Σ_{s≥q} α_{k+s,i} D̃_{0,s−q}(x, λ, λ_{ki})` and its x-derivative.
fn a_tilde(x: f64, lambda: Complex64, c: &Cluster, q: usize) -> Result<(Complex64, Complex64)> {
    let mut v = C0;
    let mut d = C0;
    let p0 = phi_tilde(0, x, lambda);
    for s in q..c.mult {
        let a = c.alpha[s];
        if a == C0 {
            continue;
        }
        v += a * kernel_d_derivs(x, lambda, c.lambda, 0, s - q)?;
        d += a * p0 * phi_tilde(s - q, x, c.lambda);
    }
    Ok((v, d))
}

/// `φᴷ(x, λ)` and `∂ₓφᴷ(x, λ)` from a solved point.
pub fn phi_k_at(layout: &SlotLayout, point: &PointSolution, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    let x = point.x;
    let mut v = phi_tilde(0, x, lambda);
    let mut d = dphi_tilde_dx(0, x, lambda);
    for c in &layout.clusters {
        let sg = side_sign(c.side);
        for q in 0..c.mult {
            let (a, da) = a_tilde(x, lambda, c, q)?;
            let f = cluster_phi_k(point, c, q);
            let df = cluster_dphi_k(point, c, q);
            v -= (a * f) * sg;
            d -= (da * f + a * df) * sg;
        }
    }
    Ok((v, d))
}

/// `φᴷ(x_j, λ)` at grid node `j`.
pub fn phi_k_of_lambda(table: &PhiTable, j: usize, lambda: Complex64) -> Result<Complex64> {
    phi_k_at(&table.layout, &table.points[j], lambda).map(|p| p.0)
}

/// `∂ₓφᴷ(x_j, λ)` at grid node `j`.
pub fn dphi_k_dx(table: &PhiTable, j: usize, lambda: Complex64) -> Result<Complex64> {
    phi_k_at(&table.layout, &table.points[j], lambda).map(|p| p.1)
}

/// Residue at cluster `c` of `(φ̃(x,μ)φᴷ(x,μ) − shift)·α-part`.
fn residue_product(point: &PointSolution, c: &Cluster, shift: f64) -> Complex64 {
    let x = point.x;
    let mut r = C0;
    for t in 0..c.mult {
        let a = c.alpha[t];
        if a == C0 {
            continue;
        }
        let mut f = C0;
        for p in 0..=t {
            f += phi_tilde(p, x, c.lambda) * cluster_phi_k(point, c, t - p);
        }
        if t == 0 {
            f -= shift;
        }
        r += a * f;
    }
    r
}

/// `(contour part, tail part)` of `σᴷ(x)` at one solved point.
pub fn sigma_at(layout: &SlotLayout, point: &PointSolution, n: usize) -> (Complex64, Complex64) {
    let mut inner = C0;
    let mut tail = C0;
    for c in &layout.clusters {
        let v = residue_product(point, c, 0.5) * (-2.0 * side_sign(c.side));
        if c.start <= n {
            inner += v;
        } else {
            tail += v;
        }
    }
    (inner, tail)
}

#[derive(Debug, Clone)]
pub struct SigmaResult {
    pub sigma: GridFunction,
    pub contour_part: GridFunction,
    pub tail_part: GridFunction,
}

pub fn reconstruct_sigma(table: &PhiTable, contour: &ContourSpec) -> Result<SigmaResult> {
    validate_contour(&table.layout, contour)?;
    let parts: Vec<(Complex64, Complex64)> = table
        .points
        .iter()
        .map(|p| sigma_at(&table.layout, p, contour.n))
        .collect();
    Ok(SigmaResult {
        sigma: GridFunction::new(parts.iter().map(|p| p.0 + p.1).collect()),
        contour_part: GridFunction::new(parts.iter().map(|p| p.0).collect()),
        tail_part: GridFunction::new(parts.iter().map(|p| p.1).collect()),
    })
}

/// `Π_{n≤M₁}(λ − λ_{n0}) Π_{M₁<n≤K}(λ − λ_{n0})/(λ − λ_{n1})`
pub fn product_factor(layout: &SlotLayout, lambda: Complex64) -> Complex64 {
    let mut p = C1;
    for n in 1..=layout.k {
        let l0 = layout.lambda_of(n, 0);
        if n <= layout.m1 {
            p *= lambda - l0;
        } else {
            p *= (lambda - l0) / (lambda - layout.lambda_of(n, 1));
        }
    }
    p
}

/// Residue at a data cluster of `φ̃'(π,μ)·g(μ)·M(μ)/(λ − μ)` where the
/// Taylor coefficients of `g` at the cluster are `gq`.
fn residue_over_lambda(c: &Cluster, gq: &[Complex64], lambda: Complex64) -> Complex64 {
    let m = c.mult;
    let inv = C1 / (lambda - c.lambda);
    // 1/(λ − μ) = Σ_r (μ − λc)^r / (λ − λc)^{r+1}
    let mut cr = vec![C0; m];
    let mut t = inv;
    for v in cr.iter_mut() {
        *v = t;
        t *= inv;
    }
    let ap: Vec<Complex64> = (0..m).map(|p| dphi_tilde_dx(p, PI, c.lambda)).collect();
    let mut r = C0;
    for tt in 0..m {
        let a = c.alpha[tt];
        if a == C0 {
            continue;
        }
        let mut g = C0;
        for p in 0..=tt {
            for q in 0..=(tt - p) {
                g += ap[p] * gq[q] * cr[tt - p - q];
            }
        }
        r += a * g;
    }
    r
}

/// Pieces of the reconstruction formulas evaluated at `x = π`.
#[derive(Debug, Clone)]
pub struct EndData<'a> {
    pub layout: &'a SlotLayout,
    pub point: &'a PointSolution,
    pub sigma_pi: Complex64,
    pub n: usize,
}

impl<'a> EndData<'a> {
    pub fn new(table: &'a PhiTable, sigma_pi: Complex64, contour: &ContourSpec) -> Self {
        EndData {
            layout: &table.layout,
            point: table.points.last().unwrap(),
            sigma_pi,
            n: contour.n,
        }
    }

    fn data_clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.layout.clusters.iter().filter(|c| c.side == 0)
    }

    /// `Σ Res[φ̃'(π,μ)φᴷ(π,μ)M(μ)/(λ−μ)]` split into (inside `Γ_N`, tail).
    pub fn r1_sums(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let mut inner = C0;
        let mut tail = C0;
        for c in self.data_clusters() {
            let g: Vec<Complex64> = (0..c.mult).map(|q| cluster_phi_k(self.point, c, q)).collect();
            let v = residue_over_lambda(c, &g, lambda);
            if c.start <= self.n {
                inner += v;
            } else {
                tail += v;
            }
        }
        (inner, tail)
    }

    /// `E(λ) = 1 − Σ Res[…]`, the bracket of the `r₁ᴷ` formula.
    pub fn e_factor(&self, lambda: Complex64) -> Complex64 {
        let (a, b) = self.r1_sums(lambda);
        C1 - a - b
    }

    /// `Σ Res[φ̃'(π,μ)φᴷ^{[1]}(π,μ)M(μ)/(λ−μ)]` split into (inside, tail).
    pub fn r2_first_sums(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let mut inner = C0;
        let mut tail = C0;
        for c in self.data_clusters() {
            let g: Vec<Complex64> = (0..c.mult)
                .map(|q| cluster_dphi_k(self.point, c, q) - self.sigma_pi * cluster_phi_k(self.point, c, q))
                .collect();
            let v = residue_over_lambda(c, &g, lambda);
            if c.start <= self.n {
                inner += v;
            } else {
                tail += v;
            }
        }
        (inner, tail)
    }

    /// `−Σ_i (−1)^i Σ Res[(φ̃(π,μ)φᴷ(π,μ) − 1)M̂(μ)]` split into (inside, tail).
    pub fn r2_constant_sums(&self) -> (Complex64, Complex64) {
        let mut inner = C0;
        let mut tail = C0;
        for c in &self.layout.clusters {
            let v = -residue_product(self.point, c, 1.0) * side_sign(c.side);
            if c.start <= self.n {
                inner += v;
            } else {
                tail += v;
            }
        }
        (inner, tail)
    }

    /// The bracket of the `r₂ᴷ` formula.
    pub fn f_factor(&self, lambda: Complex64) -> Complex64 {
        let (a, b) = self.r2_first_sums(lambda);
        let (c, d) = self.r2_constant_sums();
        a + b + c + d
    }

    /// Pre-fit rational expression for `r₁ᴷ(λ)`.
    pub fn r1_expression(&self, lambda: Complex64) -> Complex64 {
        product_factor(self.layout, lambda) * self.e_factor(lambda)
    }

    /// Pre-fit rational expression for `r₂ᴷ(λ)`.
    pub fn r2_expression(&self, lambda: Complex64) -> Complex64 {
        product_factor(self.layout, lambda) * self.f_factor(lambda)
    }

    /// `|E(λ)|` relative to the size of its terms; zero at every model eigenvalue.
    pub fn e_relative(&self, lambda: Complex64) -> f64 {
        let mut scale = 1.0;
        for c in self.data_clusters() {
            let g: Vec<Complex64> = (0..c.mult).map(|q| cluster_phi_k(self.point, c, q)).collect();
            scale += residue_over_lambda(c, &g, lambda).norm();
        }
        self.e_factor(lambda).norm() / scale
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub residual: f64,
    pub holdout_residual: f64,
    pub samples: usize,
}

/// Chebyshev sample points `[A, A+25] + 0.5i` with `A = max |λ| inside Γ_N + 5`.
pub fn default_samples(layout: &SlotLayout, contour: &ContourSpec, count: usize) -> Vec<Complex64> {
    let a = layout
        .clusters
        .iter()
        .filter(|c| c.start <= contour.n)
        .map(|c| c.lambda.norm())
        .fold(0.0, f64::max)
        + 5.0;
    chebyshev_points(a, a + 25.0, count)
        .into_iter()
        .map(|x| Complex64::new(x, 0.5))
        .collect()
}

/// Least-squares polynomial of degree `≤ deg` through `(z, v)` samples.
pub fn fit_polynomial(z: &[Complex64], v: &[Complex64], deg: usize) -> Polynomial {
    let n = z.len();
    let m = deg + 1;
    let center = z.iter().sum::<Complex64>() / n as f64;
    let scale = z.iter().map(|w| (w - center).norm()).fold(0.0, f64::max).max(1e-300);
    let u: Vec<Complex64> = z.iter().map(|w| (w - center) / scale).collect();
    // Modified Gram–Schmidt QR of the Vandermonde matrix in u.
    let mut cols: Vec<Vec<Complex64>> = (0..m)
        .map(|k| u.iter().map(|x| x.powu(k as u32)).collect())
        .collect();
    let mut r = vec![vec![C0; m]; m];
    for k in 0..m {
        for j in 0..k {
            let dot: Complex64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a.conj() * b).sum();
            r[j][k] = dot;
            let cj = cols[j].clone();
            for (x, y) in cols[k].iter_mut().zip(&cj) {
                *x -= dot * y;
            }
        }
        let nrm = cols[k].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        r[k][k] = Complex64::new(nrm, 0.0);
        if nrm > 0.0 {
            for x in cols[k].iter_mut() {
                *x /= nrm;
            }
        }
    }
    let qtb: Vec<Complex64> = (0..m)
        .map(|k| cols[k].iter().zip(v).map(|(a, b)| a.conj() * b).sum())
        .collect();
    let mut cu = vec![C0; m];
    for k in (0..m).rev() {
        let mut s = qtb[k];
        for j in k + 1..m {
            s -= r[k][j] * cu[j];
        }
        cu[k] = if r[k][k].norm() > 0.0 { s / r[k][k] } else { C0 };
    }
    // Σ c_k ((λ − center)/scale)^k in monomials of λ.
    let lin = Polynomial::new(vec![-center / scale, Complex64::new(1.0 / scale, 0.0)]);
    let mut out = Polynomial::zero();
    let mut pw = Polynomial::one();
    for c in cu {
        out = &out + &pw.scale(c);
        pw = &pw * &lin;
    }
    // Keep exactly `deg` as the storage length even when the top term is small.
    out
}

fn fit_with_report(
    what: &str,
    samples: &[Complex64],
    holdout: &[Complex64],
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    deg: usize,
    floor: f64,
) -> Result<(Polynomial, FitReport)> {
    let v: Vec<Complex64> = samples.par_iter().map(|&z| f(z)).collect();
    let p = fit_polynomial(samples, &v, deg);
    let scale = v.iter().map(|x| x.norm()).fold(floor, f64::max).max(1e-300);
    let res = samples
        .iter()
        .zip(&v)
        .map(|(z, y)| (p.eval(*z) - y).norm())
        .fold(0.0, f64::max)
        / scale;
    let hv: Vec<Complex64> = holdout.par_iter().map(|&z| f(z)).collect();
    let hres = holdout
        .iter()
        .zip(&hv)
        .map(|(z, y)| (p.eval(*z) - y).norm())
        .fold(0.0, f64::max)
        / scale;
    if !(res <= FIT_LIMIT) {
        return Err(Error::FitResidualTooLarge {
            what: what.to_string(),
            residual: res,
            limit: FIT_LIMIT,
        });
    }
    if hres > 10.0 * res.max(1e-11) {
        log::warn!("{what}: held-out residual {hres:.2e} exceeds 10× fit residual {res:.2e}");
    }
    Ok((
        p,
        FitReport {
            residual: res,
            holdout_residual: hres,
            samples: samples.len(),
        },
    ))
}

fn holdout_of(samples: &[Complex64]) -> Vec<Complex64> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    s.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect()
}

pub fn reconstruct_r1(end: &EndData, samples: &[Complex64]) -> Result<(Polynomial, FitReport)> {
    let h = holdout_of(samples);
    fit_with_report("r1", samples, &h, &|z| end.r1_expression(z), end.layout.m1, 0.0)
}

/// Residuals are measured against the larger of `|r₂ᴷ|` and `|r₁ᴷ|` on the samples.
pub fn reconstruct_r2(end: &EndData, samples: &[Complex64]) -> Result<(Polynomial, FitReport)> {
    let h = holdout_of(samples);
    let floor = samples
        .iter()
        .map(|&z| end.r1_expression(z).norm())
        .fold(0.0, f64::max);
    fit_with_report("r2", samples, &h, &|z| end.r2_expression(z), end.layout.m1, floor)
}

/// `(b₀, b̌₀ = b₀ − σᴷ(π))` for `M₁ = 0`.
pub fn robin_constants(end: &EndData) -> Result<(Complex64, Complex64)> {
    if end.layout.m1 != 0 {
        return Err(Error::InvalidInput("Robin constants need M1 = 0".into()));
    }
    let (a, b) = end.r2_constant_sums();
    let b0 = a + b;
    Ok((b0, b0 - end.sigma_pi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourChoice {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct InvertOptions {
    /// Truncation; all records are used when `None`.
    pub k: Option<usize>,
    pub n_x: usize,
    pub contour: ContourChoice,
    pub margin: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            k: None,
            n_x: 512,
            contour: ContourChoice::Auto,
            margin: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M1")]
    pub m1: usize,
    pub max_condition: f64,
    pub max_residual: f64,
    pub condition: Vec<f64>,
    pub residual: Vec<f64>,
    pub r1_fit: FitReport,
    pub r2_fit: FitReport,
    pub sigma_tail_l2: f64,
    pub r1_leading_before_normalization: Complex64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub sigma: GridFunction,
    pub r1: Polynomial,
    pub r2: Polynomial,
    pub contour: ContourSpec,
    pub table: PhiTable,
    pub diagnostics: Diagnostics,
}

/// Resolves `M₁` from the data and checks the supported class.
pub fn resolve_m1(sd: &SpectralData) -> Result<usize> {
    if sd.count() >= 20 {
        let (m1, case) = detect_m1(&sd.eigs)?;
        if case == BcCase::Shifted {
            return Err(Error::Unsupported(
                "reconstruction for the case M1 = M2 - 1 is not implemented".into(),
            ));
        }
        if m1 != sd.m1 {
            log::warn!("stated M1 = {} differs from the asymptotic estimate {m1}; using {m1}", sd.m1);
        }
        Ok(m1)
    } else {
        if sd.case == BcCase::Shifted {
            return Err(Error::Unsupported(
                "reconstruction for the case M1 = M2 - 1 is not implemented".into(),
            ));
        }
        Ok(sd.m1)
    }
}

/// Full inversion of spectral data `{λₙ, αₙ}` into `(σᴷ, r₁ᴷ, r₂ᴷ)`.
pub fn invert(sd: &SpectralData, opts: &InvertOptions) -> Result<Reconstruction> {
    let m1 = resolve_m1(sd)?;
    let md = ModelData::new(m1);
    let k = opts.k.unwrap_or_else(|| sd.count());
    if k > sd.count() {
        return Err(Error::IndexOutOfRange(format!(
            "K = {k} exceeds the {} available eigenvalues",
            sd.count()
        )));
    }
    let layout = SlotLayout::new(sd, &md, k)?;
    let contour = match opts.contour {
        ContourChoice::Auto => choose_contour(&layout, opts.margin)?,
        ContourChoice::Fixed(n) => {
            let c = ContourSpec::new(n, m1);
            validate_contour(&layout, &c)?;
            c
        }
    };
    let table = solve_on_grid(&layout, opts.n_x)?;
    let sig = reconstruct_sigma(&table, &contour)?;
    let sigma_pi = sig.sigma.last();
    let end = EndData::new(&table, sigma_pi, &contour);
    let samples = default_samples(&layout, &contour, 2 * m1 + 4);
    let (r1, f1) = reconstruct_r1(&end, &samples)?;
    let (r2, f2) = reconstruct_r2(&end, &samples)?;
    let lead = r1.coeff(m1);
    let s = C1 / lead;
    let mut r1c = r1.scale(s).coeffs().to_vec();
    r1c.resize(m1 + 1, C0);
    r1c[m1] = C1;
    let r1 = Polynomial::new(r1c);
    let r2 = r2.scale(s);
    let condition: Vec<f64> = table.points.iter().map(|p| p.condition).collect();
    let residual: Vec<f64> = table.points.iter().map(|p| p.residual).collect();
    let diagnostics = Diagnostics {
        k: layout.k,
        n: contour.n,
        m1,
        max_condition: condition.iter().cloned().fold(0.0, f64::max),
        max_residual: residual.iter().cloned().fold(0.0, f64::max),
        condition,
        residual,
        r1_fit: f1,
        r2_fit: f2,
        sigma_tail_l2: sig.tail_part.l2_norm(),
        r1_leading_before_normalization: lead,
    };
    Ok(Reconstruction {
        sigma: sig.sigma,
        r1,
        r2,
        contour,
        table,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fit_recovers_polynomial() {
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.25, 0.0)]);
        let z: Vec<Complex64> = chebyshev_points(10.0, 35.0, 8).into_iter().map(|x| c(x, 0.5)).collect();
        let v: Vec<Complex64> = z.iter().map(|w| p.eval(*w)).collect();
        let f = fit_polynomial(&z, &v, 2);
        for k in 0..3 {
            assert!((f.coeff(k) - p.coeff(k)).norm() < 1e-9, "{:?}", f);
        }
    }

    #[test]
    fn model_fixed_point_small() {
        for m1 in 0..3 {
            let md = ModelData::new(m1);
            let sd = md.spectral_data(12);
            let rec = invert(&sd, &InvertOptions { n_x: 65, ..Default::default() }).unwrap();
            assert!(rec.sigma.l2_norm() < 1e-12);
            let d = &rec.r1 - &Polynomial::monomial(m1, C1);
            assert!(d.max_abs() < 1e-10, "{:?}", rec.r1);
            assert!(rec.r2.max_abs() < 1e-10, "{:?}", rec.r2);
        }
    }

    #[test]
    fn contour_choice_covers_cluster() {
        let md = ModelData::new(2);
        let lay = SlotLayout::new(&md.spectral_data(12), &md, 12).unwrap();
        let c = choose_contour(&lay, 0).unwrap();
        assert_eq!(c.n, 3);
        assert!(validate_contour(&lay, &ContourSpec::new(12, 2)).is_err());
    }
}
