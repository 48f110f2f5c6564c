use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex samples on the uniform grid `x_j = πj/(n−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(values.len() >= 2, "grid needs at least two points");
        GridFunction { values }
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(n: usize, mut f: F) -> Self {
        Self::new(uniform_grid(n).into_iter().map(&mut f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        PI / (self.values.len() - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        uniform_grid(self.values.len())
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().unwrap()
    }

    /// `‖f‖_{L₂(0,π)}` by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        let h = self.step();
        let n = self.values.len();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * v.norm_sqr()
            })
            .sum();
        (s * h).sqrt()
    }

    /// `‖self − g‖_{L₂}` with `g` sampled at the grid nodes.
    pub fn l2_distance<F: Fn(f64) -> Complex64>(&self, g: F) -> f64 {
        let xs = self.xs();
        let diff = GridFunction::new(
            self.values
                .iter()
                .zip(xs)
                .map(|(v, x)| *v - g(x))
                .collect(),
        );
        diff.l2_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    let h = PI / (n - 1) as f64;
    (0..n)
        .map(|j| if j == n - 1 { PI } else { h * j as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_of_constant() {
        let g = GridFunction::from_fn(101, |_| Complex64::new(2.0, 0.0));
        assert!((g.l2_norm() - 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_endpoints() {
        let xs = uniform_grid(5);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[4], PI);
    }
}
