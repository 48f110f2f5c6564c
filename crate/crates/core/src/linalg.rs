//! Dense complex LU with partial pivoting and a 1-norm condition estimate.

use num_complex::Complex64;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![C0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Max row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    pub singular: bool,
}

impl Lu {
    pub fn new(a: &Matrix) -> Self {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f != C0 {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] -= f * v;
                    }
                }
            }
        }
        Lu { lu, perm, singular }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = self.lu[(i, j)] * y[j];
                y[i] -= v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = self.lu[(i, j)] * y[j];
                y[i] -= v;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    /// Solves `Aᴴx = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        // Aᴴ = Uᴴ Lᴴ P
        let mut z = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let v = self.lu[(j, i)].conj() * z[j];
                z[i] -= v;
            }
            z[i] /= self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = self.lu[(j, i)].conj() * z[j];
                z[i] -= v;
            }
        }
        let mut x = vec![C0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Hager–Higham estimate of `‖A⁻¹‖₁`.
    pub fn inv_norm1_estimate(&self) -> f64 {
        let n = self.lu.n;
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.norm()).sum();
            let xi: Vec<Complex64> = y
                .iter()
                .map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if new_est <= est || zmax <= zx {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x = vec![C0; n];
            x[j] = Complex64::new(1.0, 0.0);
        }
        // Higham's alternating-sign safeguard vector.
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// Result of a checked dense solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<Complex64>,
    pub condition: f64,
    pub residual: f64,
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Solves `Ax = b` by LU with one step of iterative refinement.
pub fn solve_refined(a: &Matrix, lu: &Lu, b: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut x = lu.solve(b);
    let r: Vec<Complex64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let dx = lu.solve(&r);
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi += d;
    }
    let r: Vec<Complex64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    (x, max_abs(&r))
}
