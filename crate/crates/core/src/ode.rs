//! Dormand–Prince 5(4) on complex state vectors, with mandatory stop points.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_max: 0.05,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex64; N];

fn lin<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        let s = h * c;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `stops[0]` through every point of `stops`
/// (monotone, either direction), calling `visit(j, y)` on arrival at `stops[j]`.
///
/// `f` is never evaluated exactly on a stop point from the wrong side, so
/// coefficients with jumps at stop points are handled correctly.
pub fn integrate<const N: usize, F, V>(
    f: F,
    stops: &[f64],
    y0: State<N>,
    opts: &OdeOptions,
    mut visit: V,
) -> Result<State<N>>
where
    F: Fn(f64, &State<N>) -> State<N>,
    V: FnMut(usize, &State<N>),
{
    let mut y = y0;
    visit(0, &y);
    let mut h_prev: Option<f64> = None;
    let mut steps = 0usize;
    for j in 1..stops.len() {
        let (a, b) = (stops[j - 1], stops[j]);
        let len = b - a;
        if len == 0.0 {
            visit(j, &y);
            continue;
        }
        let dir = len.signum();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let eps = 1e-13 * hi.abs().max(1.0);
        let fx = |x: f64, y: &State<N>| {
            let xe = if hi - lo > 2.0 * eps {
                x.clamp(lo + eps, hi - eps)
            } else {
                0.5 * (lo + hi)
            };
            f(xe, y)
        };
        let mut x = a;
        let mut h = h_prev.unwrap_or(len.abs().min(opts.h_max)).min(opts.h_max) * dir;
        let mut k1 = fx(x, &y);
        loop {
            let remaining = b - x;
            let last = h.abs() >= remaining.abs() * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let k2 = fx(x + C2 * h, &lin(&y, h, &[(A21, &k1)]));
            let k3 = fx(x + C3 * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = fx(
                x + C4 * h,
                &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = fx(
                x + C5 * h,
                &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = fx(
                x + h,
                &lin(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = lin(
                &y,
                h,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let x_new = if last { b } else { x + h };
            let k7 = fx(x_new, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6
                    + k7[i] * E7)
                    * h;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NoConvergence(format!(
                    "ODE step limit reached at x = {x}"
                )));
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                if h.abs() < 1e-12 {
                    return Err(Error::NonFiniteState {
                        x,
                        lambda: String::from("?"),
                    });
                }
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let h_next = (h.abs() * fac).min(opts.h_max);
                if last {
                    h_prev = Some(h_next);
                    break;
                }
                h = h_next * dir;
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h *= fac;
                if h.abs() < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::NoConvergence(format!(
                        "ODE step size underflow at x = {x}"
                    )));
                }
            }
        }
        visit(j, &y);
    }
    Ok(y)
}
