//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Always exits 0 so the workspace test run completes; read the lines.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use isturm::forward::{spectral_data, Forward};
use isturm::grid::GridFunction;
use isturm::main_eq::{build_system, SlotLayout};
use isturm::model::{dphi_tilde_dx, kernel_d, kernel_d_derivs, phi_tilde, ModelData, EPS_D};
use isturm::quad::circle_integral;
use isturm::reconstruct::{invert, phi_k_at, robin_constants, sigma_at, EndData, InvertOptions, Reconstruction};
use isturm::regular::{gibbs_smoothing, invert_regular, weyl_m1, RegularOptions, RegularProblem};
use isturm::spectral::SpectralData;
use isturm::{Complex64, Polynomial, ProblemL, SigmaFunction};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn step() -> SigmaFunction {
    SigmaFunction::Step {
        height: c(1.0, 0.0),
        jump_point: FRAC_PI_2,
    }
}

fn problem(sigma: SigmaFunction, r1: &[Complex64], r2: &[Complex64]) -> ProblemL {
    ProblemL::new(sigma, Polynomial::new(r1.to_vec()), Polynomial::new(r2.to_vec())).unwrap()
}

fn robin() -> ProblemL {
    problem(SigmaFunction::Zero, &[c(1.0, 0.0)], &[c(1.0, 0.0)])
}

fn poly_bc() -> ProblemL {
    problem(SigmaFunction::Zero, &[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)])
}

fn step_problem() -> ProblemL {
    problem(step(), &[c(1.0, 0.0)], &[c(1.0, 0.0)])
}

/// Robin condition `y^{[1]}(π) + b·y(π) = 0` tuned so that
/// `−ρ sin ρπ + b cos ρπ` has a double zero: with `z = 2ρπ`, `z + sin z = 0`.
fn double_root_problem() -> (ProblemL, Complex64) {
    let mut z = c(4.2124, 2.2507);
    for _ in 0..50 {
        z -= (z + z.sin()) / (1.0 + z.cos());
    }
    let rho = z / (2.0 * PI);
    let b = rho * (rho * PI).tan();
    (problem(SigmaFunction::Zero, &[c(1.0, 0.0)], &[b]), rho * rho)
}

fn forward_sd(prob: &ProblemL, k: usize) -> SpectralData {
    SpectralData {
        m1: prob.m1,
        case: prob.case,
        eigs: spectral_data(prob, k, 512).unwrap(),
    }
}

fn opts() -> InvertOptions {
    InvertOptions {
        n_x: 512,
        ..Default::default()
    }
}

fn coeff_error(a: &Polynomial, b: &Polynomial) -> f64 {
    (a - b).max_abs()
}

fn criterion_1() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for m1 in 0..3 {
        let t = Instant::now();
        let rec = match invert(&ModelData::new(m1).spectral_data(40), &opts()) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("M1 = {m1}: {e}")),
        };
        let secs = t.elapsed().as_secs_f64();
        let r1 = coeff_error(&rec.r1, &Polynomial::monomial(m1, c(1.0, 0.0)));
        let r = r1.max(rec.r2.max_abs());
        worst = (worst.0.max(rec.sigma.l2_norm()), worst.1.max(r), worst.2.max(secs));
    }
    outcome(
        worst.0 < 1e-8 && worst.1 < 1e-8 && worst.2 < 30.0,
        format!("max ‖σᴷ‖ {:.2e}, max coefficient error {:.2e}, slowest {:.1}s", worst.0, worst.1, worst.2),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let rec = invert(&forward_sd(&robin(), 60), &opts()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let end = EndData::new(&rec.table, rec.sigma.last(), &rec.contour);
    let (b0, _) = robin_constants(&end).unwrap();
    let db = (b0 - 1.0).norm();
    let agree = (b0 - rec.r2.coeff(0)).norm();
    let s = rec.sigma.l2_norm();
    outcome(
        db < 5e-3 && s < 5e-2 && agree < 1e-6 && secs < 120.0,
        format!("|b₀ − 1| {db:.2e}, ‖σᴷ‖ {s:.3e} (target 5e-2), limit vs fit {agree:.2e}, {secs:.1}s"),
    )
}

fn criterion_3() -> Outcome {
    let prob = poly_bc();
    let rec = invert(&forward_sd(&prob, 60), &opts()).unwrap();
    let e1 = coeff_error(&rec.r1, &prob.r1);
    let e2 = coeff_error(&rec.r2, &prob.r2);
    let s = rec.sigma.l2_norm();
    outcome(
        e1 < 5e-3 && e2 < 5e-3 && s < 5e-2,
        format!("r1 error {e1:.2e}, r2 error {e2:.2e}, ‖σᴷ‖ {s:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let prob = step_problem();
    let sigma = step();
    let err = |k: usize| {
        let rec = invert(&forward_sd(&prob, k), &opts()).unwrap();
        rec.sigma.l2_distance(|x| sigma.eval(x))
    };
    let (e60, e80) = (err(60), err(80));
    outcome(e60 < 0.1 && e80 < e60, format!("‖σᴷ − σ‖ {e60:.4} at K=60, {e80:.4} at K=80"))
}

fn criterion_5() -> Outcome {
    let one = c(1.0, 0.0);
    let n_grid = 1024;
    let rp = RegularProblem::new(
        GridFunction::from_fn(n_grid, |_| one),
        Polynomial::one(),
        vec![],
        Polynomial::one(),
        Polynomial::one(),
    )
    .unwrap();
    let full = rp.full(one).unwrap();
    let fwd = Forward::new(&full.inner, n_grid).unwrap();
    let m1 = |l| weyl_m1(&fwd, &full.p1, &full.p2, l);
    let approx: Vec<_> = fwd
        .eigenvalues(60)
        .unwrap()
        .iter()
        .map(|e| (e.lambda, e.multiplicity))
        .collect();
    let mut o = RegularOptions::default();
    o.smoothing = gibbs_smoothing(60, o.invert.n_x);
    let res = match invert_regular(m1, &Polynomial::one(), &[], &approx, &o) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("{e}")),
    };
    let n = res.q.len();
    let inner = &res.q.values[n / 20..n - n / 20];
    let q_err = inner.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    let mid = &res.q.values[n / 20..n * 17 / 20];
    let mid_err = mid.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    let b_err = (res.summary.b_n2 - 1.0).norm();
    outcome(
        q_err < 5e-2 && b_err < 2e-2,
        format!("q error {q_err:.3e} on inner 90% ({mid_err:.2e} on [5%, 85%]), b_N2 error {:.2}%", 100.0 * b_err),
    )
}

fn criterion_6() -> Outcome {
    let q1 = problem(
        SigmaFunction::PolynomialInX {
            coeffs: vec![c(0.0, 0.0), c(1.0, 0.0)],
        },
        &[c(1.0, 0.0)],
        &[c(1.0 + PI, 0.0)],
    );
    let fixtures = [
        ("robin", robin()),
        ("polynomial", poly_bc()),
        ("step", step_problem()),
        ("linear sigma", q1),
        ("double root", double_root_problem().0),
    ];
    let mut worst = 0.0f64;
    let mut summable = true;
    for (_, prob) in &fixtures {
        let sd = forward_sd(prob, 60);
        let flat = sd.flat();
        let m1 = sd.m1 as f64;
        let mut block = [0.0f64; 3];
        for (idx, (l, a)) in flat.iter().enumerate() {
            let n = idx + 1;
            let kappa = isturm::rho_of(*l) - (n as f64 - m1 - 1.0);
            let da = a - 2.0 / PI;
            if n > 40 {
                worst = worst.max(kappa.norm()).max(da.norm());
            }
            if (1..=60).contains(&n) {
                block[(n - 1) / 20] += kappa.norm_sqr() + da.norm_sqr();
            }
        }
        // Square-summable partial sums: later blocks add less.
        summable &= block[2] <= block[1];
    }
    outcome(
        worst < 0.05 && summable,
        format!("max |κₙ|, |αₙ − 2/π| for n > 40: {worst:.2e}; block sums decreasing: {summable}"),
    )
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    ok &= kernel_d(PI, c(1.0, 0.0), c(4.0, 0.0)).norm() < 1e-14;
    ok &= (kernel_d(PI, c(0.0, 0.0), c(0.0, 0.0)) - PI).norm() < 1e-14;
    let mut sym = 0.0f64;
    for (l, m) in [(c(2.0, 1.0), c(-3.0, 0.5)), (c(50.0, 0.0), c(3.0, -2.0))] {
        sym = sym.max((kernel_d(2.0, l, m) - kernel_d(2.0, m, l)).norm());
    }
    ok &= sym < 1e-12;
    // Values at ε_D/2 (near branch) and 2ε_D (far branch) differ by one Taylor step.
    let mut branch = 0.0f64;
    let x = 1.7;
    for l in [c(2.7, 0.0), c(-5.0, 1.0), c(30.0, -2.0)] {
        let eps = EPS_D * (1.0 + l.norm());
        let a = kernel_d(x, l, l + eps * 0.5);
        let b = kernel_d(x, l, l + eps * 2.0);
        let slope = kernel_d_derivs(x, l, l, 0, 1).unwrap();
        branch = branch.max((b - a - slope * (eps * 1.5)).norm());
    }
    ok &= branch < 1e-9;
    let h = 1e-4;
    let mut fd = 0.0f64;
    let (l, m) = (c(2.0, 0.5), c(6.0, -1.0));
    for a in 0..3 {
        for b in 0..3 {
            let g = |mm: Complex64| kernel_d_derivs(2.3, l, mm, a, b).unwrap();
            let est = (g(m + h) - g(m - h)) / (2.0 * h);
            let got = kernel_d_derivs(2.3, l, m, a, b + 1).unwrap() * (b + 1) as f64;
            fd = fd.max((got - est).norm() / (1.0 + est.norm()));
        }
    }
    ok &= fd < 1e-6;
    notes.push(format!("symmetry {sym:.1e}, branch {branch:.1e}, finite differences {fd:.1e}"));
    outcome(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let prob = step_problem();
    let sd = forward_sd(&prob, 160);
    let md = ModelData::new(0);
    let mut cs = Vec::new();
    for k in [20usize, 40, 80] {
        let big = SlotLayout::new(&sd, &md, 2 * k).unwrap();
        let small = SlotLayout::new(&sd, &md, k).unwrap();
        let tail = big.xi[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut diff = 0.0f64;
        for x in [PI / 4.0, PI / 2.0, 0.75 * PI, PI] {
            let hb = build_system(&big, x).unwrap().h;
            let hs = build_system(&small, x).unwrap().h;
            for r in 0..4 * k {
                let mut row = 0.0;
                for col in 0..4 * k {
                    let v = if r < 2 * k && col < 2 * k {
                        hb[(r, col)] - hs[(r, col)]
                    } else {
                        hb[(r, col)]
                    };
                    row += v.norm();
                }
                diff = diff.max(row);
            }
        }
        cs.push(diff / tail);
    }
    let mut sorted = cs.clone();
    sorted.sort_by(f64::total_cmp);
    let med = sorted[1];
    let stable = cs.iter().all(|v| (v / med - 1.0).abs() <= 0.5);
    outcome(stable, format!("C at K = 20, 40, 80: {:.2}, {:.2}, {:.2}", cs[0], cs[1], cs[2]))
}

/// Largest gap between residue sums and 256-node quadrature on Γ_N.
fn residue_gap(prob: &ProblemL, rec: &Reconstruction) -> f64 {
    let table = &rec.table;
    let lay = &table.layout;
    let md = ModelData::new(lay.m1);
    let fwd = Forward::new(prob, 512).unwrap();
    let contour = &rec.contour;
    let nodes = 256;
    let m = |mu: Complex64| fwd.weyl_m(mu).unwrap();
    let mut gap = 0.0f64;
    let n_pts = table.points.len();
    for j in [n_pts / 8, n_pts / 2, n_pts * 7 / 8] {
        let pt = &table.points[j];
        let (inner, _) = sigma_at(lay, pt, contour.n);
        let quad = circle_integral(c(0.0, 0.0), contour.radius, nodes, |mu| {
            let (pk, _) = phi_k_at(lay, pt, mu).unwrap();
            (phi_tilde(0, pt.x, mu) * pk - 0.5) * (m(mu) - md.weyl(mu))
        }) * -2.0;
        gap = gap.max((inner - quad).norm());
    }
    let sp = sigma_at(lay, table.points.last().unwrap(), contour.n);
    let end = EndData::new(table, sp.0 + sp.1, contour);
    let pt = table.points.last().unwrap();
    for lambda in [c(40.0, 0.5), c(-30.0, 3.0)] {
        let (inner, _) = end.r1_sums(lambda);
        let quad = circle_integral(c(0.0, 0.0), contour.radius, nodes, |mu| {
            let (pk, _) = phi_k_at(lay, pt, mu).unwrap();
            dphi_tilde_dx(0, PI, mu) * pk * m(mu) / (lambda - mu)
        });
        gap = gap.max((inner - quad).norm());
        let (inner, _) = end.r2_first_sums(lambda);
        let quad = circle_integral(c(0.0, 0.0), contour.radius, nodes, |mu| {
            let (pk, dpk) = phi_k_at(lay, pt, mu).unwrap();
            dphi_tilde_dx(0, PI, mu) * (dpk - end.sigma_pi * pk) * m(mu) / (lambda - mu)
        });
        gap = gap.max((inner - quad).norm());
    }
    let (inner, _) = end.r2_constant_sums();
    let quad = -circle_integral(c(0.0, 0.0), contour.radius, nodes, |mu| {
        let (pk, _) = phi_k_at(lay, pt, mu).unwrap();
        (phi_tilde(0, PI, mu) * pk - 1.0) * (m(mu) - md.weyl(mu))
    });
    gap.max((inner - quad).norm())
}

/// Worst relative size of the pre-fit `r₁` expression at the model
/// eigenvalues, and the larger of the two fit residuals.
fn degree_check(rec: &Reconstruction) -> (f64, f64) {
    let end = EndData::new(&rec.table, rec.sigma.last(), &rec.contour);
    let lay = &rec.table.layout;
    let e = (lay.m1 + 1..=lay.k)
        .map(|n| end.e_relative(lay.lambda_of(n, 1)))
        .fold(0.0, f64::max);
    let fit = rec.diagnostics.r1_fit.residual.max(rec.diagnostics.r2_fit.residual);
    (e, fit)
}

fn criterion_9() -> Outcome {
    let prob = poly_bc();
    let rec = invert(&forward_sd(&prob, 60), &opts()).unwrap();
    let gap = residue_gap(&prob, &rec);
    outcome(gap < 1e-6, format!("max residue vs quadrature gap {gap:.2e} (N = {})", rec.contour.n))
}

fn criterion_10() -> Outcome {
    let rec = invert(&forward_sd(&poly_bc(), 60), &opts()).unwrap();
    let (e, fit) = degree_check(&rec);
    outcome(e < 1e-6 && fit < 1e-3, format!("max relative value at λₙ₁ {e:.2e}, fit residual {fit:.2e}"))
}

fn criterion_11() -> Outcome {
    let (prob, ls) = double_root_problem();
    let fwd = Forward::new(&prob, 512).unwrap();
    let count = circle_integral(ls, 0.3, 256, |l| {
        let (d, dd) = fwd.delta_with_deriv(l).unwrap();
        dd / d
    });
    let sd = forward_sd(&prob, 60);
    let double = sd.eigs.iter().any(|e| e.multiplicity == 2 && (e.lambda - ls).norm() < 1e-6);
    let rec = match invert(&sd, &opts()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("inversion failed: {e}")),
    };
    let gap = residue_gap(&prob, &rec);
    let (e, fit) = degree_check(&rec);
    let r2_err = coeff_error(&rec.r2, &prob.r2);
    outcome(
        (count - 2.0).norm() < 1e-6 && double && gap < 1e-6 && e < 1e-6 && fit < 1e-3,
        format!(
            "zero count {:.6}, double record found: {double}, residue gap {gap:.2e}, degree check {e:.2e}, fit {fit:.2e}; reported only: ‖σᴷ‖ {:.3}, r2 error {r2_err:.2e}",
            count.re,
            rec.sigma.l2_norm()
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut passed = 0;
    for (id, f) in criteria {
        let t = Instant::now();
        let o = f();
        if o.pass {
            passed += 1;
        }
        println!(
            "criterion {id:>2}: {} {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/11 criteria passed");
}
