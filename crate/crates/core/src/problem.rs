use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{gcd_degree, Polynomial};

/// Antiderivative `σ` of the potential `q = σ'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SigmaFunction {
    Zero,
    /// `σ = height` on `[jump_point, π]` and 0 before it, i.e. `q = height·δ(x − jump_point)`.
    Step { height: Complex64, jump_point: f64 },
    /// `σ(x) = Σ coeffs[k]·xᵏ`
    #[serde(rename = "polynomial")]
    PolynomialInX { coeffs: Vec<Complex64> },
    /// Samples on the uniform grid over `[0, π]`, linearly interpolated.
    #[serde(rename = "grid")]
    GridSamples { values: Vec<Complex64> },
}

impl SigmaFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            SigmaFunction::Step { jump_point, height } => {
                if !(*jump_point > 0.0 && *jump_point < PI) {
                    return Err(Error::InvalidInput(format!(
                        "step jump point {jump_point} must lie in (0, π)"
                    )));
                }
                if !(height.re.is_finite() && height.im.is_finite()) {
                    return Err(Error::InvalidInput("non-finite step height".into()));
                }
            }
            SigmaFunction::GridSamples { values } if values.len() < 2 => {
                return Err(Error::InvalidInput(
                    "grid sigma needs at least 2 samples".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            SigmaFunction::Zero => Complex64::new(0.0, 0.0),
            SigmaFunction::Step { height, jump_point } => {
                if x >= *jump_point {
                    *height
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            SigmaFunction::PolynomialInX { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c),
            SigmaFunction::GridSamples { values } => {
                let n = values.len() - 1;
                let t = (x / PI).clamp(0.0, 1.0) * n as f64;
                let i = (t.floor() as usize).min(n - 1);
                let w = t - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// Points in `(0, π)` where `σ` is not smooth; integrators must step onto them.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            SigmaFunction::Step { jump_point, .. } => vec![*jump_point],
            SigmaFunction::GridSamples { values } => {
                let n = values.len() - 1;
                (1..n).map(|i| PI * i as f64 / n as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `Some(c)` when `σ ≡ c` on the whole of `(a, b)`.
    pub fn constant_on(&self, a: f64, b: f64) -> Option<Complex64> {
        match self {
            SigmaFunction::Zero => Some(Complex64::new(0.0, 0.0)),
            SigmaFunction::Step { height, jump_point } => {
                if b <= *jump_point {
                    Some(Complex64::new(0.0, 0.0))
                } else if a >= *jump_point {
                    Some(*height)
                } else {
                    None
                }
            }
            SigmaFunction::PolynomialInX { coeffs } => {
                if coeffs.iter().skip(1).all(|c| *c == Complex64::new(0.0, 0.0)) {
                    Some(coeffs.first().copied().unwrap_or_default())
                } else {
                    None
                }
            }
            SigmaFunction::GridSamples { .. } => None,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            SigmaFunction::Zero => true,
            SigmaFunction::Step { height, .. } => height.im == 0.0,
            SigmaFunction::PolynomialInX { coeffs } => coeffs.iter().all(|c| c.im == 0.0),
            SigmaFunction::GridSamples { values } => values.iter().all(|c| c.im == 0.0),
        }
    }
}

/// Which branch of the normalization class a boundary pair falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcCase {
    /// `deg r₁ ≥ deg r₂`, `r₁` monic, `M₂` padded up to `M₁`.
    #[serde(rename = "M1=M2")]
    Equal,
    /// `deg r₁ < deg r₂`, `r₂` monic, `M₁ = M₂ − 1`.
    #[serde(rename = "M1=M2-1")]
    Shifted,
}

impl BcCase {
    pub fn label(self) -> &'static str {
        match self {
            BcCase::Equal => "M1=M2",
            BcCase::Shifted => "M1=M2-1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPair {
    pub r1: Polynomial,
    pub r2: Polynomial,
    pub case: BcCase,
    /// Stored degree `M₁`.
    pub m1: usize,
}

/// Scales `(r1, r2)` by a common constant so the designated leading
/// coefficient is exactly 1.
pub fn normalize_pair(r1: &Polynomial, r2: &Polynomial) -> Result<NormalizedPair> {
    if r1.is_zero() && r2.is_zero() {
        return Err(Error::BothZero);
    }
    // A vanishing polynomial leaves a one-term condition such as the model
    // problem's `λ^{M₁}y^{[1]}(π) = 0`, which is admitted.
    let g = if r1.is_zero() || r2.is_zero() { 0 } else { gcd_degree(r1, r2) };
    if g > 0 {
        return Err(Error::NotCoprime(g));
    }
    let first = !r1.is_zero() && (r2.is_zero() || r1.degree() >= r2.degree());
    let (lead, case, m1) = if first {
        (r1.leading(), BcCase::Equal, r1.degree())
    } else {
        (r2.leading(), BcCase::Shifted, r2.degree().saturating_sub(1))
    };
    let s = Complex64::new(1.0, 0.0) / lead;
    let mut r1 = r1.scale(s);
    let mut r2 = r2.scale(s);
    // Pin the designated coefficient to exactly one after the division.
    let pin = |p: &mut Polynomial| {
        let mut c = p.coeffs().to_vec();
        *c.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        *p = Polynomial::new(c);
    };
    if first {
        pin(&mut r1);
    } else {
        pin(&mut r2);
    }
    Ok(NormalizedPair { r1, r2, case, m1 })
}

/// Problem `L(σ, r₁, r₂)`: boundary condition `y^{[1]}(0) = 0` at the left end,
/// `r₁(λ)y^{[1]}(π) + r₂(λ)y(π) = 0` at the right end.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemL {
    pub sigma: SigmaFunction,
    pub r1: Polynomial,
    pub r2: Polynomial,
    pub case: BcCase,
    pub m1: usize,
}

impl ProblemL {
    pub fn new(sigma: SigmaFunction, r1: Polynomial, r2: Polynomial) -> Result<Self> {
        sigma.validate()?;
        let n = normalize_pair(&r1, &r2)?;
        Ok(ProblemL {
            sigma,
            r1: n.r1,
            r2: n.r2,
            case: n.case,
            m1: n.m1,
        })
    }

    /// The model problem `L(0, λ^{M₁}, 0)`.
    pub fn model(m1: usize) -> Self {
        ProblemL {
            sigma: SigmaFunction::Zero,
            r1: Polynomial::monomial(m1, Complex64::new(1.0, 0.0)),
            r2: Polynomial::zero(),
            case: BcCase::Equal,
            m1,
        }
    }

    pub fn m2(&self) -> usize {
        match self.case {
            BcCase::Equal => self.m1,
            BcCase::Shifted => self.m1 + 1,
        }
    }

    /// Real σ and real boundary coefficients.
    pub fn is_real(&self) -> bool {
        self.sigma.is_real()
            && self.r1.coeffs().iter().all(|c| c.im == 0.0)
            && self.r2.coeffs().iter().all(|c| c.im == 0.0)
    }
}

/// Problem with the polynomial boundary condition
/// `p₁(λ)y^{[1]}(0) − p₂(λ)y(0) = 0` at the left end as well.
#[derive(Debug, Clone, PartialEq)]
pub struct FullProblem {
    pub p1: Polynomial,
    pub p2: Polynomial,
    pub inner: ProblemL,
}

impl FullProblem {
    /// `(p₁, p₂)` is normalized with the same rule as `(r₁, r₂)`.
    pub fn new(p1: Polynomial, p2: Polynomial, inner: ProblemL) -> Result<Self> {
        let n = normalize_pair(&p1, &p2)?;
        Ok(FullProblem {
            p1: n.r1,
            p2: n.r2,
            inner,
        })
    }
}
