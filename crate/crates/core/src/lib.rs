//! Forward and inverse spectral problems for the Sturm–Liouville equation
//! with a distributional potential `q = σ'` and polynomial dependence on the
//! spectral parameter in the boundary conditions.
//!
//! The crate is organized bottom-up:
//!
//! * [`poly`] and [`problem`] hold the problem data (polynomials, `σ`,
//!   normalized boundary-condition pairs).
//! * [`forward`] integrates the quasi-derivative system and produces
//!   eigenvalues, weight numbers and Weyl-function values.
//! * [`spectral`] is the Weyl-function algebra on spectral data.
//! * [`model`] holds the closed-form objects of the model problem
//!   `-y'' = λy, y'(0) = 0, λ^M y'(π) = 0`.
//! * [`main_eq`] assembles and solves the truncated main equation per grid point.
//! * [`reconstruct`] turns the solution of the main equation into `σ`, `r₁`, `r₂`.
//! * [`regular`] handles the regular-potential problem with boundary
//!   conditions at both ends.

pub mod error;
pub mod forward;
pub mod grid;
pub mod json;
pub mod linalg;
pub mod main_eq;
pub mod model;
pub mod ode;
pub mod poly;
pub mod problem;
pub mod quad;
pub mod reconstruct;
pub mod regular;
pub mod roots;
pub mod spectral;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use problem::{BcCase, FullProblem, ProblemL, SigmaFunction};

/// Principal square root with `arg ρ ∈ [−π/2, π/2)`.
///
/// This differs from [`Complex64::sqrt`] only on the negative real axis, where
/// the result is `−i√|λ|` instead of `+i√|λ|`.
pub fn rho_of(lambda: Complex64) -> Complex64 {
    let r = lambda.sqrt();
    if r.re == 0.0 && r.im > 0.0 {
        -r
    } else {
        r
    }
}
