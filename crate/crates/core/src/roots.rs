//! Root-finding building blocks: contour power sums, Newton identities,
//! Aberth iteration and Brent's method.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::poly::Polynomial;

/// Scaled power sums `s_p = Σ ((zₖ − c)/r)^p`, `p = 0..=pmax`, of the zeros
/// of `f` inside `|λ − c| < r`, given samples of the logarithmic derivative
/// `g = f'/f` at the trapezoid nodes `c + r·e^{2πik/n}`.
pub fn power_sums_from_logderiv(
    radius: f64,
    g: &[Complex64],
    pmax: usize,
) -> Vec<Complex64> {
    let n = g.len();
    let mut s = vec![Complex64::new(0.0, 0.0); pmax + 1];
    for (k, gk) in g.iter().enumerate() {
        let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        let mut t = gk * w * radius;
        for sp in s.iter_mut() {
            *sp += t;
            t *= w;
        }
    }
    for sp in s.iter_mut() {
        *sp /= n as f64;
    }
    s
}

/// Monic polynomial whose roots have power sums `s[1..=d]`.
pub fn poly_from_power_sums(s: &[Complex64], d: usize) -> Polynomial {
    // e_k from Newton's identities: k·e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} s_i.
    let mut e = vec![Complex64::new(0.0, 0.0); d + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for k in 1..=d {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += e[k - i] * s[i] * sign;
        }
        e[k] = acc / k as f64;
    }
    // Π(z − z_j) = Σ_k (−1)^k e_k z^{d−k}
    let mut c = vec![Complex64::new(0.0, 0.0); d + 1];
    for k in 0..=d {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[d - k] = e[k] * sign;
    }
    Polynomial::new(c)
}

/// All roots of `p` by Aberth–Ehrlich iteration.
pub fn aberth(p: &Polynomial) -> Vec<Complex64> {
    let d = p.degree();
    if p.is_zero() || d == 0 {
        return Vec::new();
    }
    let lead = p.leading();
    let monic = p.scale(Complex64::new(1.0, 0.0) / lead);
    if d == 1 {
        return vec![-monic.coeff(0)];
    }
    let bound = 1.0
        + monic
            .coeffs()
            .iter()
            .take(d)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let r0 = bound.min(
        (0..d)
            .map(|k| monic.coeff(k).norm().powf(1.0 / (d - k) as f64))
            .fold(0.0, f64::max)
            .max(1e-3),
    );
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(r0, 2.0 * PI * k as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (v, dv) = monic.eval_with_deriv(z[i]);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = v / dv;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != Complex64::new(0.0, 0.0) {
                        sum += Complex64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Brent's method on `[a, b]` with `f(a)·f(b) ≤ 0`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
    }
    Some(b)
}

/// Groups points whose mutual distance is below `tol(a, b)` (single linkage).
pub fn cluster_points<T: Fn(Complex64, Complex64) -> bool>(
    pts: &[Complex64],
    close: T,
) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if close(pts[i], pts[j]) {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}
