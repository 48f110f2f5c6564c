//! Forward problem: solutions of `-(y^{[1]})' - σy^{[1]} - σ²y = λy`,
//! characteristic function, eigenvalues, weight numbers and the Weyl function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::uniform_grid;
use crate::ode::{integrate, OdeOptions};
use crate::problem::{BcCase, ProblemL, SigmaFunction};
use crate::quad::circle_nodes;
use crate::rho_of;
use crate::roots::{aberth, brent, cluster_points, poly_from_power_sums, power_sums_from_logderiv};

pub const DEFAULT_NX: usize = 1024;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Solution values on the uniform grid, always stored in increasing `x`.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub grid: Vec<f64>,
    pub y: Vec<Complex64>,
    pub y_quasi: Vec<Complex64>,
}

/// One distinct eigenvalue with its principal-part coefficients `α_{k+j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawRecord", into = "RawRecord")]
pub struct EigenRecord {
    pub lambda: Complex64,
    pub rho: Complex64,
    pub multiplicity: usize,
    pub alpha_coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    lambda: Complex64,
    multiplicity: usize,
    alpha: Vec<Complex64>,
}

impl From<RawRecord> for EigenRecord {
    fn from(r: RawRecord) -> Self {
        EigenRecord {
            lambda: r.lambda,
            rho: rho_of(r.lambda),
            multiplicity: r.multiplicity,
            alpha_coeffs: r.alpha,
        }
    }
}

impl From<EigenRecord> for RawRecord {
    fn from(r: EigenRecord) -> Self {
        RawRecord {
            lambda: r.lambda,
            multiplicity: r.multiplicity,
            alpha: r.alpha_coeffs,
        }
    }
}

impl EigenRecord {
    pub fn new(lambda: Complex64, multiplicity: usize) -> Self {
        EigenRecord {
            lambda,
            rho: rho_of(lambda),
            multiplicity,
            alpha_coeffs: Vec::new(),
        }
    }
}

/// `(cos√z, sin√z/√z)` and their `z`-derivatives; entire in `z`.
pub(crate) fn cos_sinc_sqrt(z: Complex64) -> [Complex64; 4] {
    if z.norm() < 1.0 {
        let mut f = C0;
        let mut g = C0;
        let mut df = C0;
        let mut dg = C0;
        // t = (−z)^n / (2n)!, u = (−z)^n / (2n+1)!
        let mut t = C1;
        let mut u = C1;
        let mut tm = C0; // (−z)^{n−1}/(2n)! · n·(−1)
        for n in 0..24 {
            f += t;
            g += u;
            if n >= 1 {
                df += tm;
                dg += tm / (2 * n + 1) as f64;
            }
            let nn = (n + 1) as f64;
            // next n: (−z)^{n+1}/(2n+2)!
            tm = -t * nn / ((2.0 * nn - 1.0) * (2.0 * nn));
            t = -t * z / ((2.0 * nn - 1.0) * (2.0 * nn));
            u = -u * z / ((2.0 * nn) * (2.0 * nn + 1.0));
        }
        [f, g, df, dg]
    } else {
        let s = z.sqrt();
        let f = s.cos();
        let g = s.sin() / s;
        [f, g, -g * 0.5, (f - g) / (z * 2.0)]
    }
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Exact transfer over a piece where `σ ≡ c`, with the `λ`-derivative carried
/// along: state is `(y, y^{[1]}, ∂_λ y, ∂_λ y^{[1]})`.
fn exact_step(c: Complex64, lambda: Complex64, h: f64, s: &[Complex64; 4], with_deriv: bool) -> [Complex64; 4] {
    let z = lambda * h * h;
    let [f, g, df, dg] = cos_sinc_sqrt(z);
    let sn = g * h;
    let a = [[c, C1], [-(c * c + lambda), -c]];
    let u = [
        [f + sn * a[0][0], sn * a[0][1]],
        [sn * a[1][0], f + sn * a[1][1]],
    ];
    let y = u[0][0] * s[0] + u[0][1] * s[1];
    let y1 = u[1][0] * s[0] + u[1][1] * s[1];
    if !with_deriv {
        return [y, y1, C0, C0];
    }
    let p = df * h * h;
    let q = dg * h * h * h;
    let du = [
        [p + q * a[0][0], q * a[0][1]],
        [q * a[1][0] - sn, p + q * a[1][1]],
    ];
    let yl = du[0][0] * s[0] + du[0][1] * s[1] + u[0][0] * s[2] + u[0][1] * s[3];
    let y1l = du[1][0] * s[0] + du[1][1] * s[1] + u[1][0] * s[2] + u[1][1] * s[3];
    [y, y1, yl, y1l]
}

/// Integration engine for a fixed `σ` and grid resolution.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    sigma: &'a SigmaFunction,
    n_x: usize,
    ode: OdeOptions,
    /// Constant value of σ on each piece between breakpoints, if σ is
    /// piecewise constant.
    pieces: Option<Vec<(f64, f64, Complex64)>>,
}

impl<'a> Integrator<'a> {
    pub fn new(sigma: &'a SigmaFunction, n_x: usize) -> Result<Self> {
        if n_x < 33 {
            return Err(Error::InvalidInput(format!("n_x = {n_x} is below 33")));
        }
        sigma.validate()?;
        let mut pts = vec![0.0];
        pts.extend(sigma.breakpoints());
        pts.push(PI);
        let pieces: Option<Vec<_>> = pts
            .windows(2)
            .map(|w| sigma.constant_on(w[0], w[1]).map(|c| (w[0], w[1], c)))
            .collect();
        let ode = OdeOptions {
            h_max: PI / (n_x - 1) as f64,
            ..OdeOptions::default()
        };
        Ok(Integrator {
            sigma,
            n_x,
            ode,
            pieces,
        })
    }

    pub fn with_tolerance(mut self, rtol: f64) -> Self {
        self.ode.rtol = rtol;
        self.ode.atol = rtol * 1e-2;
        self
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    fn sigma_at(&self, x: f64) -> Complex64 {
        self.sigma.eval(x)
    }

    /// Propagates `state` from `x0` to `x1` visiting `stops` strictly between
    /// them in order; `visit` receives every stop including both ends.
    fn run<V: FnMut(f64, &[Complex64; 4])>(
        &self,
        lambda: Complex64,
        stops: &[f64],
        state: [Complex64; 4],
        with_deriv: bool,
        mut visit: V,
    ) -> Result<[Complex64; 4]> {
        let bad = |x: f64| Error::NonFiniteState {
            x,
            lambda: format!("{lambda}"),
        };
        if let Some(pieces) = &self.pieces {
            let mut s = state;
            visit(stops[0], &s);
            for w in stops.windows(2) {
                let (a, b) = (w[0], w[1]);
                let mid = 0.5 * (a + b);
                let c = pieces
                    .iter()
                    .find(|(lo, hi, _)| mid >= *lo && mid <= *hi)
                    .map(|p| p.2)
                    .unwrap_or_else(|| self.sigma_at(mid));
                if b != a {
                    s = exact_step(c, lambda, b - a, &s, with_deriv);
                }
                if !finite(&s) {
                    return Err(bad(b));
                }
                visit(b, &s);
            }
            return Ok(s);
        }
        let sig = self.sigma;
        let out = if with_deriv {
            integrate(
                |x, y: &[Complex64; 4]| {
                    let s = sig.eval(x);
                    let k = s * s + lambda;
                    [
                        s * y[0] + y[1],
                        -s * y[1] - k * y[0],
                        s * y[2] + y[3],
                        -s * y[3] - k * y[2] - y[0],
                    ]
                },
                stops,
                state,
                &self.ode,
                |j, y| visit(stops[j], y),
            )
        } else {
            let st2 = [state[0], state[1]];
            integrate(
                |x, y: &[Complex64; 2]| {
                    let s = sig.eval(x);
                    [s * y[0] + y[1], -s * y[1] - (s * s + lambda) * y[0]]
                },
                stops,
                st2,
                &self.ode,
                |j, y| visit(stops[j], &[y[0], y[1], C0, C0]),
            )
            .map(|y| [y[0], y[1], C0, C0])
        };
        match out {
            Err(Error::NonFiniteState { x, .. }) => Err(bad(x)),
            Err(e) => Err(e),
            Ok(y) if !finite(&y) => Err(bad(stops[stops.len() - 1])),
            Ok(y) => Ok(y),
        }
    }

    fn endpoint_stops(&self, dir: Direction) -> Vec<f64> {
        let mut s = vec![0.0];
        s.extend(self.sigma.breakpoints());
        s.push(PI);
        if dir == Direction::RightToLeft {
            s.reverse();
        }
        s
    }

    /// Values at the far end only.
    pub fn shoot(&self, lambda: Complex64, init: [Complex64; 2], dir: Direction) -> Result<[Complex64; 2]> {
        let stops = self.endpoint_stops(dir);
        let s = self.run(lambda, &stops, [init[0], init[1], C0, C0], false, |_, _| {})?;
        Ok([s[0], s[1]])
    }

    /// Values at the far end together with their `λ`-derivatives;
    /// `dinit` is the `λ`-derivative of the initial data.
    pub fn shoot_with_deriv(
        &self,
        lambda: Complex64,
        init: [Complex64; 2],
        dinit: [Complex64; 2],
        dir: Direction,
    ) -> Result<[Complex64; 4]> {
        let stops = self.endpoint_stops(dir);
        self.run(lambda, &stops, [init[0], init[1], dinit[0], dinit[1]], true, |_, _| {})
    }

    /// Full trace on the uniform grid.
    pub fn trace(&self, lambda: Complex64, init: [Complex64; 2], dir: Direction) -> Result<SolutionTrace> {
        let grid = uniform_grid(self.n_x);
        let mut stops: Vec<f64> = grid.clone();
        stops.extend(self.sigma.breakpoints());
        stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
        stops.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        if dir == Direction::RightToLeft {
            stops.reverse();
        }
        let mut y = vec![C0; self.n_x];
        let mut yq = vec![C0; self.n_x];
        let h = PI / (self.n_x - 1) as f64;
        self.run(lambda, &stops, [init[0], init[1], C0, C0], false, |x, s| {
            let j = (x / h).round() as usize;
            if j < self.n_x && (grid[j] - x).abs() < 1e-12 {
                y[j] = s[0];
                yq[j] = s[1];
            }
        })?;
        Ok(SolutionTrace { grid, y, y_quasi: yq })
    }
}

/// Trace of the solution with the given initial data at `x = 0`
/// (left-to-right) or `x = π` (right-to-left).
pub fn integrate_solution(
    sigma: &SigmaFunction,
    lambda: Complex64,
    init: (Complex64, Complex64),
    direction: Direction,
    n_x: usize,
) -> Result<SolutionTrace> {
    Integrator::new(sigma, n_x)?.trace(lambda, [init.0, init.1], direction)
}

/// `(φ(π,λ), φ^{[1]}(π,λ))`
pub fn phi_at(sigma: &SigmaFunction, lambda: Complex64, n_x: usize) -> Result<(Complex64, Complex64)> {
    let [a, b] = Integrator::new(sigma, n_x)?.shoot(lambda, [C1, C0], Direction::LeftToRight)?;
    Ok((a, b))
}

/// `Δ(λ) = r₁(λ)φ^{[1]}(π,λ) + r₂(λ)φ(π,λ)`
pub fn char_delta(prob: &ProblemL, lambda: Complex64, n_x: usize) -> Result<Complex64> {
    Forward::new(prob, n_x)?.delta(lambda)
}

/// Weyl function `M(λ) = ψ(0,λ)/ψ^{[1]}(0,λ)`.
pub fn weyl_m(prob: &ProblemL, lambda: Complex64, n_x: usize) -> Result<Complex64> {
    Forward::new(prob, n_x)?.weyl_m(lambda)
}

/// First `K` eigenvalues counted with multiplicity, grouped into records.
pub fn find_eigenvalues(prob: &ProblemL, k: usize, n_x: usize) -> Result<Vec<EigenRecord>> {
    Forward::new(prob, n_x)?.eigenvalues(k)
}

/// Fills `alpha_coeffs` of every record.
pub fn weight_numbers(prob: &ProblemL, eigs: &[EigenRecord], n_x: usize) -> Result<Vec<EigenRecord>> {
    Forward::new(prob, n_x)?.weight_numbers(eigs)
}

/// Eigenvalues with weight numbers.
pub fn spectral_data(prob: &ProblemL, k: usize, n_x: usize) -> Result<Vec<EigenRecord>> {
    let f = Forward::new(prob, n_x)?;
    let e = f.eigenvalues(k)?;
    f.weight_numbers(&e)
}

/// Forward solver bound to one problem.
#[derive(Debug, Clone)]
pub struct Forward<'a> {
    pub prob: &'a ProblemL,
    integ: Integrator<'a>,
    /// Extra windows folded into the low-index disk.
    pub disk_extra: usize,
}

impl<'a> Forward<'a> {
    pub fn new(prob: &'a ProblemL, n_x: usize) -> Result<Self> {
        Ok(Forward {
            prob,
            integ: Integrator::new(&prob.sigma, n_x)?,
            disk_extra: 3,
        })
    }

    pub fn integrator(&self) -> &Integrator<'a> {
        &self.integ
    }

    pub fn phi_pi(&self, lambda: Complex64) -> Result<[Complex64; 4]> {
        self.integ
            .shoot_with_deriv(lambda, [C1, C0], [C0, C0], Direction::LeftToRight)
    }

    pub fn delta(&self, lambda: Complex64) -> Result<Complex64> {
        let [p, p1] = self.integ.shoot(lambda, [C1, C0], Direction::LeftToRight)?;
        Ok(self.prob.r1.eval(lambda) * p1 + self.prob.r2.eval(lambda) * p)
    }

    /// `(Δ(λ), Δ'(λ))` with the derivative from the variational system.
    pub fn delta_with_deriv(&self, lambda: Complex64) -> Result<(Complex64, Complex64)> {
        let [p, p1, pl, p1l] = self.phi_pi(lambda)?;
        let (r1, dr1) = self.prob.r1.eval_with_deriv(lambda);
        let (r2, dr2) = self.prob.r2.eval_with_deriv(lambda);
        Ok((r1 * p1 + r2 * p, dr1 * p1 + r1 * p1l + dr2 * p + r2 * pl))
    }

    /// `(ψ(0,λ), ψ^{[1]}(0,λ))`
    pub fn psi0(&self, lambda: Complex64) -> Result<[Complex64; 2]> {
        let init = [self.prob.r1.eval(lambda), -self.prob.r2.eval(lambda)];
        self.integ.shoot(lambda, init, Direction::RightToLeft)
    }

    /// `M(λ) = ψ(0,λ)/ψ^{[1]}(0,λ) = −ψ(0,λ)/Δ(λ)`, the sign for which
    /// `Φ = S + Mφ` and the weight numbers are positive in the self-adjoint case.
    pub fn weyl_m(&self, lambda: Complex64) -> Result<Complex64> {
        let [p, p1] = self.psi0(lambda)?;
        let m = p / p1;
        if p1 == C0 || !m.re.is_finite() || !m.im.is_finite() || p1.norm() < 1e-14 * p.norm() {
            return Err(Error::AtPole(format!("{lambda}")));
        }
        Ok(m)
    }

    fn expected_disk(&self, extra: usize) -> (f64, usize, usize) {
        let m1 = self.prob.m1;
        let m0 = m1.max(self.prob.m2()) + extra;
        match self.prob.case {
            BcCase::Equal => {
                let r = m0 as f64 + 0.5;
                (r * r, m1 + 1 + m0, m0)
            }
            BcCase::Shifted => {
                let r = m0 as f64;
                (r * r, self.prob.m2() + m0, m0)
            }
        }
    }

    /// Zeros of `Δ` in `|λ| < R` with multiplicities.
    fn disk_roots(&self, radius: f64, expected: usize) -> Result<Vec<(Complex64, usize)>> {
        let mut n = 512;
        loop {
            let nodes = circle_nodes(C0, radius, n);
            let g: Vec<Complex64> = nodes
                .par_iter()
                .map(|&z| self.delta_with_deriv(z).map(|(d, dd)| dd / d))
                .collect::<Result<_>>()?;
            let s = power_sums_from_logderiv(radius, &g, expected + 1);
            let count = s[0].re.round();
            let ok = (s[0].re - count).abs() < 0.05 && s[0].im.abs() < 0.05;
            if ok && count as i64 == expected as i64 {
                let p = poly_from_power_sums(&s, expected);
                let approx: Vec<Complex64> = aberth(&p).into_iter().map(|z| z * radius).collect();
                return self.refine_roots(&approx, radius);
            }
            if n >= 4096 {
                return Err(Error::CountMismatch {
                    window: format!("|λ| < {radius:.3}"),
                    found: if ok { count as i64 } else { -1 },
                    expected: expected as i64,
                });
            }
            n *= 2;
        }
    }

    /// Local moment analysis around coarse root estimates.
    fn refine_roots(&self, approx: &[Complex64], scale: f64) -> Result<Vec<(Complex64, usize)>> {
        let coarse = 1e-3 * (1.0 + scale);
        let groups = cluster_points(approx, |a, b| (a - b).norm() < coarse);
        let centers: Vec<Complex64> = groups
            .iter()
            .map(|g| g.iter().map(|&i| approx[i]).sum::<Complex64>() / g.len() as f64)
            .collect();
        let mut out = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            let c = centers[gi];
            let m = g.len();
            if m == 1 {
                out.push((self.newton_polish(c)?, 1));
                continue;
            }
            let dmin = centers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != gi)
                .map(|(_, z)| (z - c).norm())
                .fold(f64::INFINITY, f64::min);
            let r = (0.05 * c.norm().max(1.0)).min(0.3 * dmin);
            out.extend(self.local_cluster(c, r, m)?);
        }
        Ok(out)
    }

    /// Resolves a cluster of `m` zeros inside `|λ − c| < r`.
    fn local_cluster(&self, c: Complex64, r: f64, m: usize) -> Result<Vec<(Complex64, usize)>> {
        let nodes = circle_nodes(c, r, 64);
        let g: Vec<Complex64> = nodes
            .par_iter()
            .map(|&z| self.delta_with_deriv(z).map(|(d, dd)| dd / d))
            .collect::<Result<_>>()?;
        let s = power_sums_from_logderiv(r, &g, m);
        let count = s[0].re.round() as usize;
        if (s[0].re - count as f64).abs() > 0.05 || count != m {
            return Err(Error::CountMismatch {
                window: format!("|λ − {c}| < {r:.3e}"),
                found: count as i64,
                expected: m as i64,
            });
        }
        let mean_w = s[1] / m as f64;
        let mean = c + mean_w * r;
        // Central power sums of w − mean_w; all vanish iff the roots coincide.
        let mut spread = 0.0f64;
        for p in 2..=m {
            let mut acc = C0;
            for k in 0..=p {
                let binom = binomial(p, k);
                acc += s[k] * (-mean_w).powu((p - k) as u32) * binom;
            }
            spread = spread.max((acc / m as f64).norm().powf(1.0 / p as f64) * r);
        }
        let rho = rho_of(mean).norm();
        let tol = 1e-5 * (1.0 + 2.0 * rho);
        if spread < tol {
            return Ok(vec![(mean, m)]);
        }
        let p = poly_from_power_sums(&s, m);
        let roots: Vec<Complex64> = aberth(&p).into_iter().map(|w| c + w * r).collect();
        let groups = cluster_points(&roots, |a, b| (a - b).norm() < tol);
        let mut out = Vec::new();
        for g in groups {
            let z = g.iter().map(|&i| roots[i]).sum::<Complex64>() / g.len() as f64;
            if g.len() == 1 {
                out.push((self.newton_polish(z)?, 1));
            } else {
                out.push((z, g.len()));
            }
        }
        Ok(out)
    }

    fn newton_polish(&self, mut z: Complex64) -> Result<Complex64> {
        for _ in 0..8 {
            let (d, dd) = self.delta_with_deriv(z)?;
            if dd == C0 {
                break;
            }
            let step = d / dd;
            z -= step;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        Ok(z)
    }

    /// Eigenvalue in the `m`-th asymptotic window.
    fn window_root(&self, m: usize) -> Result<Complex64> {
        let (lo, hi) = match self.prob.case {
            BcCase::Equal => (m as f64 - 0.5, m as f64 + 0.5),
            BcCase::Shifted => (m as f64 - 1.0, m as f64),
        };
        if self.prob.is_real() {
            let f = |rho: f64| -> f64 {
                self.delta(Complex64::new(rho * rho, 0.0))
                    .map(|d| d.re)
                    .unwrap_or(f64::NAN)
            };
            let (fa, fb) = (f(lo), f(hi));
            if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
                let r = brent(f, lo, hi, fa, fb, 1e-15 * hi, 200).ok_or_else(|| {
                    Error::NoConvergence(format!("Brent failed in window {m}"))
                })?;
                let z = self.newton_polish(Complex64::new(r * r, 0.0))?;
                return Ok(Complex64::new(z.re, 0.0));
            }
        }
        self.rectangle_root(lo, hi, m)
    }

    /// Unique zero of `ρ ↦ Δ(ρ²)` in `[lo, hi] × [−2, 2]`.
    fn rectangle_root(&self, lo: f64, hi: f64, m: usize) -> Result<Complex64> {
        let corners = [
            Complex64::new(lo, -2.0),
            Complex64::new(hi, -2.0),
            Complex64::new(hi, 2.0),
            Complex64::new(lo, 2.0),
        ];
        let mut pieces = 1;
        let mut last = (C0, C0);
        for _ in 0..4 {
            let gl = crate::quad::GaussLegendre::cached(32);
            let mut pts = Vec::new();
            for side in 0..4 {
                let (a, b) = (corners[side], corners[(side + 1) % 4]);
                for p in 0..pieces {
                    let pa = a + (b - a) * (p as f64 / pieces as f64);
                    let pb = a + (b - a) * ((p + 1) as f64 / pieces as f64);
                    let half = (pb - pa) * 0.5;
                    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                        pts.push((pa + half * (1.0 + x), half * *w));
                    }
                }
            }
            let vals: Vec<(Complex64, Complex64)> = pts
                .par_iter()
                .map(|&(rho, _)| {
                    let (d, dd) = self.delta_with_deriv(rho * rho)?;
                    Ok((d, dd * rho * 2.0))
                })
                .collect::<Result<_>>()?;
            let mut n0 = C0;
            let mut n1 = C0;
            for ((rho, w), (d, dd)) in pts.iter().zip(&vals) {
                let q = dd / d * *w;
                n0 += q;
                n1 += q * rho;
            }
            let i2pi = Complex64::new(0.0, 2.0 * PI);
            let (n0, n1) = (n0 / i2pi, n1 / i2pi);
            if (n0 - last.0).norm() < 1e-6 && (n0.re - 1.0).abs() < 0.01 {
                let rho = n1 / n0;
                let z = self.newton_polish(rho * rho)?;
                return Ok(z);
            }
            last = (n0, n1);
            pieces *= 2;
        }
        Err(Error::CountMismatch {
            window: format!("ρ-window {m} [{lo}, {hi}]"),
            found: last.0.re.round() as i64,
            expected: 1,
        })
    }

    /// First `k` eigenvalues (with multiplicity) as records sorted per the
    /// asymptotic numbering.
    pub fn eigenvalues(&self, k: usize) -> Result<Vec<EigenRecord>> {
        if k < self.prob.m1 + 2 {
            return Err(Error::InvalidInput(format!(
                "K = {k} must be at least M1 + 2 = {}",
                self.prob.m1 + 2
            )));
        }
        // The asymptotic count is reliable once the disk is large compared
        // with the eigenvalue shift, so the disk grows until the count agrees.
        let mut attempt = None;
        for extra in self.disk_extra..=self.disk_extra + 8 {
            let (radius, expected, m0) = self.expected_disk(extra);
            match self.disk_roots(radius, expected) {
                Ok(v) => {
                    attempt = Some(Ok((v, m0)));
                    break;
                }
                Err(e @ Error::CountMismatch { .. }) => {
                    log::debug!("{e}; enlarging the disk");
                    attempt = Some(Err(e));
                }
                Err(e) => return Err(e),
            }
        }
        let (mut low, m0) = attempt.expect("at least one disk attempt")?;
        low.sort_by(|a, b| {
            let (ra, rb) = (rho_of(a.0), rho_of(b.0));
            ra.re
                .partial_cmp(&rb.re)
                .unwrap()
                .then(ra.im.partial_cmp(&rb.im).unwrap())
        });
        let mut recs: Vec<EigenRecord> = low.into_iter().map(|(l, m)| EigenRecord::new(l, m)).collect();
        let have: usize = recs.iter().map(|r| r.multiplicity).sum();
        if have < k {
            let windows: Vec<usize> = (m0 + 1..=m0 + (k - have)).collect();
            let more: Vec<Complex64> = windows
                .par_iter()
                .map(|&m| self.window_root(m))
                .collect::<Result<_>>()?;
            recs.extend(more.into_iter().map(|l| EigenRecord::new(l, 1)));
        }
        let mut out = Vec::new();
        let mut total = 0;
        for r in recs {
            if total >= k {
                break;
            }
            total += r.multiplicity;
            out.push(r);
        }
        Ok(out)
    }

    /// Principal-part coefficients by circle quadrature of `M(λ)(λ − λₖ)^j`.
    pub fn alpha_by_quadrature(&self, lambda: Complex64, m: usize, radius: f64) -> Result<Vec<Complex64>> {
        let nodes = circle_nodes(lambda, radius, 64);
        let vals: Vec<Complex64> = nodes
            .par_iter()
            .map(|&z| self.weyl_m(z))
            .collect::<Result<_>>()?;
        let mut out = vec![C0; m];
        for (z, v) in nodes.iter().zip(&vals) {
            let w = *z - lambda;
            let mut t = *v * w;
            for o in out.iter_mut() {
                *o += t;
                t *= w;
            }
        }
        Ok(out.into_iter().map(|v| v / 64.0).collect())
    }

    /// Residue `−ψ(0,λₙ)/Δ'(λₙ)` at a simple zero of `Δ`.
    pub fn alpha_simple(&self, lambda: Complex64) -> Result<Complex64> {
        let [p, p1, pl, p1l] = self.phi_pi(lambda)?;
        let (r1, dr1) = self.prob.r1.eval_with_deriv(lambda);
        let (r2, dr2) = self.prob.r2.eval_with_deriv(lambda);
        let dd = dr1 * p1 + r1 * p1l + dr2 * p + r2 * pl;
        // ψ = ψ(0)·φ at an eigenvalue; read ψ(0) off whichever end value is larger.
        let psi0 = if p.norm() >= p1.norm() { r1 / p } else { -r2 / p1 };
        let alpha = -psi0 / dd;
        let h = 1e-5 * lambda.norm().max(1.0);
        let dp = self.delta(lambda + h)?;
        let dm = self.delta(lambda - h)?;
        let dd_fd = (dp - dm) / (2.0 * h);
        let rel = (dd_fd - dd).norm() / dd.norm().max(1e-300);
        if rel > 1e-4 {
            log::warn!(
                "Δ' cross-check at λ = {lambda}: variational {dd}, central difference {dd_fd} (rel {rel:.2e})"
            );
        }
        Ok(alpha)
    }

    pub fn weight_numbers(&self, eigs: &[EigenRecord]) -> Result<Vec<EigenRecord>> {
        eigs.par_iter()
            .enumerate()
            .map(|(i, e)| {
                let mut e = e.clone();
                e.alpha_coeffs = if e.multiplicity == 1 {
                    vec![self.alpha_simple(e.lambda)?]
                } else {
                    let dist = eigs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, o)| (o.lambda - e.lambda).norm())
                        .fold(f64::INFINITY, f64::min);
                    let r = (1e-2f64).min(0.25 * dist);
                    self.alpha_by_quadrature(e.lambda, e.multiplicity, r)?
                };
                Ok(e)
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
