//! Truncated main equation `(E + H̃ᴷ(x))ψᴷ(x) = ψ̃(x)`.
//!
//! Unknowns are `φ_{n,i}(x)`, `n ≤ K`, `i ∈ {0, 1}`, flattened as `2(n−1)+i`.
//! Index `i = 0` refers to the given data, `i = 1` to the model problem.
//! Inside a multiplicity cluster starting at `k`, slot `k+j` carries the
//! normalized derivative `φ_j(x, λ_k) = (1/j!)∂^j_λ φ(x, λ_k)`.
//!
//! Sign convention: with `Ã_{k+q,i}(x,λ) = Σ_{s≥q} α_{k+s,i} D̃_{0,s−q}(x,λ,λ_{ki})`
//! (all `α` as given, model ones positive),
//! `φ̃(x,λ) = φ(x,λ) + Σ_i (−1)^i Σ_k Σ_q Ã_{k+q,i}(x,λ) φ_{k+q,i}(x)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::uniform_grid;
use crate::linalg::{max_abs, solve_refined, Lu, Matrix};
use crate::model::{kernel_d_derivs, kernel_d_dx, phi_tilde, dphi_tilde_dx, ModelData};
use crate::rho_of;
use crate::spectral::SpectralData;
use crate::forward::cos_sinc_sqrt;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// `ξ` below this is treated as exactly zero.
pub const XI_CUTOFF: f64 = 1e-12;
/// Condition estimate above which the system is reported singular.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub lambda: Complex64,
    /// First index `k` (1-based).
    pub start: usize,
    pub mult: usize,
    /// Principal-part coefficients `α_{k+j}`.
    pub alpha: Vec<Complex64>,
    pub side: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub cluster: usize,
    pub order: usize,
}

#[derive(Debug, Clone)]
pub struct SlotLayout {
    pub k: usize,
    pub m1: usize,
    pub clusters: Vec<Cluster>,
    /// `slots[n−1][i]`
    pub slots: Vec<[Slot; 2]>,
    pub xi: Vec<f64>,
    pub chi: Vec<f64>,
}

impl SlotLayout {
    /// Layout for the first `k` indices of `sd` against the model problem `md`.
    ///
    /// A data cluster straddling index `k` is kept whole, which may enlarge `k`.
    pub fn new(sd: &SpectralData, md: &ModelData, k: usize) -> Result<Self> {
        let mut clusters = Vec::new();
        let mut slots0 = Vec::new();
        let mut n = 1;
        for e in &sd.eigs {
            if n > k {
                break;
            }
            if e.alpha_coeffs.len() != e.multiplicity || e.multiplicity == 0 {
                return Err(Error::InvalidInput(format!(
                    "record at λ = {} has {} coefficients for multiplicity {}",
                    e.lambda,
                    e.alpha_coeffs.len(),
                    e.multiplicity
                )));
            }
            let id = clusters.len();
            clusters.push(Cluster {
                lambda: e.lambda,
                start: n,
                mult: e.multiplicity,
                alpha: e.alpha_coeffs.clone(),
                side: 0,
            });
            for j in 0..e.multiplicity {
                slots0.push(Slot { cluster: id, order: j });
            }
            n += e.multiplicity;
        }
        let k = slots0.len();
        if k < md.m1 + 2 {
            return Err(Error::IndexOutOfRange(format!(
                "spectral data cover {k} indices, need at least M1 + 2 = {}",
                md.m1 + 2
            )));
        }
        let mut slots1 = Vec::new();
        for r in md.records(k) {
            let id = clusters.len();
            let start = slots1.len() + 1;
            for j in 0..r.multiplicity {
                slots1.push(Slot { cluster: id, order: j });
            }
            clusters.push(Cluster {
                lambda: r.lambda,
                start,
                mult: r.multiplicity,
                alpha: r.alpha_coeffs,
                side: 1,
            });
        }
        slots1.truncate(k);
        let flat = sd.flat();
        let mut xi = Vec::with_capacity(k);
        let mut chi = Vec::with_capacity(k);
        for idx in 1..=k {
            let (l, a) = flat[idx - 1];
            let x = (rho_of(l) - rho_of(md.lambda(idx))).norm() + (a - md.alpha(idx)).norm();
            if x < XI_CUTOFF {
                xi.push(0.0);
                chi.push(0.0);
            } else {
                xi.push(x);
                chi.push(1.0 / x);
            }
        }
        let slots = slots0.into_iter().zip(slots1).map(|(a, b)| [a, b]).collect();
        Ok(SlotLayout {
            k,
            m1: md.m1,
            clusters,
            slots,
            xi,
            chi,
        })
    }

    pub fn slot(&self, n: usize, i: usize) -> Slot {
        self.slots[n - 1][i]
    }

    pub fn lambda_of(&self, n: usize, i: usize) -> Complex64 {
        self.clusters[self.slot(n, i).cluster].lambda
    }

    /// Clusters of one side with `start ≤ k`.
    pub fn side_clusters(&self, side: usize) -> impl Iterator<Item = (usize, &Cluster)> {
        self.clusters
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.side == side && c.start <= self.k)
    }

    /// Number of slots of cluster `c` that fall inside the truncation.
    pub fn active_mult(&self, c: &Cluster) -> usize {
        c.mult.min(self.k + 1 - c.start)
    }

    /// `Q̃` and `∂ₓQ̃` at `x`, indexed `[row slot][column slot]`.
    pub fn q_matrices(&self, x: f64, with_dx: bool) -> Result<(Matrix, Matrix)> {
        let n2 = 2 * self.k;
        let mut q = Matrix::zeros(n2);
        let mut dq = Matrix::zeros(if with_dx { n2 } else { 0 });
        // Per-cluster values f(λx²), sin√/√ used by the closed-form D̃.
        let fg: Vec<[Complex64; 4]> = self
            .clusters
            .iter()
            .map(|c| cos_sinc_sqrt(c.lambda * x * x))
            .collect();
        let rows: Vec<(usize, usize, usize)> = (1..=self.k)
            .flat_map(|n| (0..2).map(move |i| (n, i)))
            .map(|(n, i)| {
                let s = self.slot(n, i);
                (2 * (n - 1) + i, s.cluster, s.order)
            })
            .collect();
        let cols = rows.clone();
        for &(ri, rc, p) in &rows {
            let lr = self.clusters[rc].lambda;
            for &(ci, cc, qo) in &cols {
                let col = &self.clusters[cc];
                let lc = col.lambda;
                let mut v = C0;
                let mut dv = C0;
                for s in qo..col.mult {
                    let a = col.alpha[s];
                    if a == C0 {
                        continue;
                    }
                    let t = s - qo;
                    let d = if p == 0 && t == 0 {
                        d_closed(x, lr, lc, &fg[rc], &fg[cc])
                    } else {
                        kernel_d_derivs(x, lr, lc, p, t)?
                    };
                    v += a * d;
                    if with_dx {
                        dv += a * kernel_d_dx(x, lr, lc, p, t);
                    }
                }
                q[(ri, ci)] = v;
                if with_dx {
                    dq[(ri, ci)] = dv;
                }
            }
        }
        Ok((q, dq))
    }

    /// `H = T·Q·S·R` blockwise, with `T_n = [[χ, −χ], [0, 1]]`,
    /// `S·R_k = [[ξ, 1], [0, −1]]`.
    pub fn h_from_q(&self, q: &Matrix) -> Matrix {
        let n2 = 2 * self.k;
        let mut h = Matrix::zeros(n2);
        for n in 0..self.k {
            let chi = self.chi[n];
            for k in 0..self.k {
                let xi = self.xi[k];
                let b = [
                    [q[(2 * n, 2 * k)], q[(2 * n, 2 * k + 1)]],
                    [q[(2 * n + 1, 2 * k)], q[(2 * n + 1, 2 * k + 1)]],
                ];
                // T·B
                let tb = [
                    [(b[0][0] - b[1][0]) * chi, (b[0][1] - b[1][1]) * chi],
                    [b[1][0], b[1][1]],
                ];
                for r in 0..2 {
                    h[(2 * n + r, 2 * k)] = tb[r][0] * xi;
                    h[(2 * n + r, 2 * k + 1)] = tb[r][0] - tb[r][1];
                }
            }
        }
        h
    }

    /// `φ̃_{n,i}(x)` and `∂ₓφ̃_{n,i}(x)` for all slots.
    pub fn phi_tilde_vector(&self, x: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut v = Vec::with_capacity(2 * self.k);
        let mut d = Vec::with_capacity(2 * self.k);
        for n in 1..=self.k {
            for i in 0..2 {
                let s = self.slot(n, i);
                let l = self.clusters[s.cluster].lambda;
                v.push(phi_tilde(s.order, x, l));
                d.push(dphi_tilde_dx(s.order, x, l));
            }
        }
        (v, d)
    }

    /// `ψ = T·Φ` blockwise.
    pub fn to_psi(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![C0; phi.len()];
        for n in 0..self.k {
            out[2 * n] = (phi[2 * n] - phi[2 * n + 1]) * self.chi[n];
            out[2 * n + 1] = phi[2 * n + 1];
        }
        out
    }
}

/// `D̃(x, λ, μ)` from precomputed `(cos√z, sin√z/√z)` at `z = λx²`, `μx²`.
fn d_closed(x: f64, l: Complex64, m: Complex64, fl: &[Complex64; 4], fm: &[Complex64; 4]) -> Complex64 {
    let d = l - m;
    if d.norm() <= crate::model::EPS_D * (1.0 + l.norm()) {
        return crate::model::kernel_d(x, l, m);
    }
    (l * fl[1] * fm[0] - m * fl[0] * fm[1]) * x / d
}

/// Entries `Q̃_{n,i;k,j}(x)` with 1-based `n`, `k`.
pub fn q_coefficients(layout: &SlotLayout, x: f64, n: usize, i: usize, k: usize, j: usize) -> Result<Complex64> {
    if n == 0 || k == 0 || n > layout.k || k > layout.k || i > 1 || j > 1 {
        return Err(Error::IndexOutOfRange(format!("({n},{i};{k},{j}) with K = {}", layout.k)));
    }
    let (q, _) = layout.q_matrices(x, false)?;
    Ok(q[(2 * (n - 1) + i, 2 * (k - 1) + j)])
}

/// The assembled system at one grid point.
#[derive(Debug, Clone)]
pub struct MainEquationSystem {
    pub k: usize,
    pub x: f64,
    pub psi_tilde: Vec<Complex64>,
    pub h: Matrix,
    /// `∂ₓψ̃` and `∂ₓH`, used for the analytic x-derivative of the solution.
    pub dpsi_tilde: Vec<Complex64>,
    pub dh: Matrix,
}

pub fn build_system(layout: &SlotLayout, x: f64) -> Result<MainEquationSystem> {
    let (q, dq) = layout.q_matrices(x, true)?;
    let (pt, dpt) = layout.phi_tilde_vector(x);
    Ok(MainEquationSystem {
        k: layout.k,
        x,
        psi_tilde: layout.to_psi(&pt),
        h: layout.h_from_q(&q),
        dpsi_tilde: layout.to_psi(&dpt),
        dh: layout.h_from_q(&dq),
    })
}

#[derive(Debug, Clone)]
pub struct SolvedSystem {
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub condition: f64,
    pub residual: f64,
}

pub fn solve_system(sys: &MainEquationSystem) -> Result<SolvedSystem> {
    let n = sys.psi_tilde.len();
    let mut a = sys.h.clone();
    for i in 0..n {
        a[(i, i)] += C1;
    }
    let lu = Lu::new(&a);
    let condition = if lu.singular {
        f64::INFINITY
    } else {
        a.norm_1() * lu.inv_norm1_estimate()
    };
    if !(condition <= COND_LIMIT) {
        return Err(Error::Singular { x: sys.x, condition });
    }
    let (psi, res) = solve_refined(&a, &lu, &sys.psi_tilde);
    let scale = max_abs(&sys.psi_tilde);
    let residual = if scale > 0.0 { res / scale } else { res };
    if residual > 1e-10 {
        log::warn!("main equation residual {residual:.2e} at x = {}", sys.x);
    }
    let hp = sys.dh.mul_vec(&psi);
    let rhs: Vec<Complex64> = sys.dpsi_tilde.iter().zip(&hp).map(|(a, b)| a - b).collect();
    let (dpsi, _) = solve_refined(&a, &lu, &rhs);
    Ok(SolvedSystem {
        psi,
        dpsi,
        condition,
        residual,
    })
}

/// `φ_{n,0} = ξₙψ_{n0} + ψ_{n1}`, `φ_{n,1} = ψ_{n1}`
pub fn recover_phi(psi: &[Complex64], xi: &[f64]) -> Vec<Complex64> {
    let mut out = vec![C0; psi.len()];
    for n in 0..psi.len() / 2 {
        out[2 * n] = psi[2 * n] * xi[n] + psi[2 * n + 1];
        out[2 * n + 1] = psi[2 * n + 1];
    }
    out
}

#[derive(Debug, Clone)]
pub struct PointSolution {
    pub x: f64,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    pub condition: f64,
    pub residual: f64,
}

/// `φᴷ_{n,i}(x)` and `∂ₓφᴷ_{n,i}(x)` on the uniform grid.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub layout: SlotLayout,
    pub points: Vec<PointSolution>,
}

impl PhiTable {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// Entry for slot `(n, i)` at grid index `j`.
    pub fn phi(&self, j: usize, n: usize, i: usize) -> Complex64 {
        self.points[j].phi[2 * (n - 1) + i]
    }
}

pub fn solve_point(layout: &SlotLayout, x: f64) -> Result<PointSolution> {
    let sys = build_system(layout, x)?;
    let sol = solve_system(&sys)?;
    Ok(PointSolution {
        x,
        phi: recover_phi(&sol.psi, &layout.xi),
        dphi: recover_phi(&sol.dpsi, &layout.xi),
        condition: sol.condition,
        residual: sol.residual,
    })
}

pub fn solve_on_grid(layout: &SlotLayout, n_x: usize) -> Result<PhiTable> {
    let xs = uniform_grid(n_x);
    let points = xs
        .par_iter()
        .map(|&x| solve_point(layout, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiTable {
        layout: layout.clone(),
        points,
    })
}
