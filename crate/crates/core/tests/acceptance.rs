//! Acceptance suite: one pass/fail line per criterion. Runs without the
//! libtest harness so the report is always printed; exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use leakywire::bie::{omega, Direction};
use leakywire::comparison1d::{
    conjecture_test, ground_state_1d, mesh_for_alpha, scattering_potential, CurvatureProfile, RectangularWell,
    PROFILE_SAMPLES,
};
use leakywire::geometry::{build_geometry, DeformedLineGeometry, GeometryFamily, GeometrySpec, MeshParams};
use leakywire::greens::{
    brute_force_correction, epsilon_limit, line_kernel, sigma_green_farfield, sigma_green_onshell,
    sigma_green_resolvent, EnergySpec, KernelPoint,
};
use leakywire::scattering::{
    amplitudes, field_amplitudes, field_map, solve_scattering, AmplitudeConvention, GridSpec,
};
use leakywire::spectrum::{find_bound_states, ScanRange, SpectrumProblem};
use leakywire::specfun::{k0_expansions, macdonald_k0};
use leakywire::Complex64;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry(family: GeometryFamily) -> DeformedLineGeometry {
    build_geometry(&family.spec()).expect("fixture geometry")
}

fn bump(height: f64) -> DeformedLineGeometry {
    geometry(GeometryFamily::Bump { height, width: 1.0 })
}

fn line_kernel_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for kappa in [1.0, 2.0, 5.0] {
        for d in [0.1, 1.0, 5.0] {
            let v = line_kernel(Complex64::new(0.0, kappa), d).map_err(|e| e.to_string())?;
            let exact = macdonald_k0(kappa * d).unwrap() / (2.0 * PI);
            worst = worst.max((v - exact).norm());
        }
    }
    check(worst <= 1e-8, format!("max error {worst:.2e} (tol 1e-8)"))
}

fn resolvent_oracle() -> Outcome {
    let energy = EnergySpec::new(1.0, -1.0).unwrap();
    let points = [(1.0, 0.5, 0.5), (0.0, 0.3, 0.2), (2.0, 0.1, 0.4), (0.5, 1.0, 0.0), (3.0, 0.2, 0.2)];
    let mut worst: f64 = 0.0;
    for (d, x2, y2) in points {
        let p = KernelPoint::new(d, x2, y2);
        let reduced = sigma_green_resolvent(&energy, &p).map_err(|e| e.to_string())?.re;
        let g0 = macdonald_k0(f64::hypot(d, x2 - y2)).unwrap() / (2.0 * PI);
        let brute = g0 + brute_force_correction(1.0, 1.0, &p);
        worst = worst.max((reduced - brute).abs() / brute.abs());
    }
    check(worst <= 1e-6, format!("max relative error {worst:.2e} over 5 points (tol 1e-6)"))
}

fn onshell_limit() -> Outcome {
    let (alpha, lambda) = (5.0, -3.0);
    let energy = EnergySpec::new(alpha, lambda).unwrap();
    let points = [(0.7, 0.2, 0.3), (0.0, 0.1, 0.3), (1.5, 0.0, 0.2), (3.0, 0.5, 0.5), (0.4, 0.3, 0.0)];
    let mut worst: f64 = 0.0;
    for (d, x2, y2) in points {
        let p = KernelPoint::new(d, x2, y2);
        let on = sigma_green_onshell(&energy, &p).map_err(|e| e.to_string())?;
        let lim = epsilon_limit(alpha, lambda, &p, 0.1).map_err(|e| e.to_string())?;
        worst = worst.max((on - lim).norm() / on.norm());
    }
    check(worst <= 1e-4, format!("max relative error {worst:.2e} over 5 points (tol 1e-4)"))
}

fn far_field() -> Outcome {
    let energy = EnergySpec::new(5.0, -3.0).unwrap();
    let devs: Vec<f64> = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
        .iter()
        .map(|m| {
            let p = KernelPoint::new(m / energy.alpha, 0.1, 0.1);
            let on = sigma_green_onshell(&energy, &p).unwrap();
            let ff = sigma_green_farfield(&energy, &p).unwrap();
            (on - ff).norm() / ff.norm()
        })
        .collect();
    let last = *devs.last().unwrap();
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    check(last <= 1e-2 && monotone, format!("deviation at 30/α {last:.2e} (tol 1e-2), decreasing: {monotone}"))
}

fn empty_deformation() -> Outcome {
    let g = build_geometry(&GeometrySpec::default()).unwrap();
    let alpha = 5.0;
    let energy = EnergySpec::new(alpha, -alpha * alpha / 8.0).unwrap();
    let params = MeshParams::default();
    let a = amplitudes(&g, &energy, &params).map_err(|e| e.to_string())?;
    let states = find_bound_states(&g, alpha, &ScanRange::below_threshold(alpha, 16), &params).map_err(|e| e.to_string())?;
    let sol = solve_scattering(&g, &energy, &params, Direction::LeftIncoming, AmplitudeConvention::default())
        .map_err(|e| e.to_string())?;
    let grid = GridSpec { x1_min: -3.0, x1_max: 3.0, n1: 7, x2_min: -1.0, x2_max: 1.0, n2: 5 };
    let map = field_map(&sol, &grid).map_err(|e| e.to_string())?;
    let psi_exact = map
        .samples
        .iter()
        .all(|s| s.psi == Some(omega(&energy, s.point, Direction::LeftIncoming)));
    let ok = a.t == Complex64::new(1.0, 0.0) && a.r == Complex64::new(0.0, 0.0) && states.is_empty() && psi_exact;
    check(ok, format!("T = {}, R = {}, {} bound states, ψ = ω exactly: {psi_exact}", a.t, a.r, states.len()))
}

fn unitarity() -> Outcome {
    let alpha = 5.0;
    let energy = EnergySpec::new(alpha, -alpha * alpha / 8.0).unwrap();
    let fixtures = [
        ("gap", geometry(GeometryFamily::Gap { length: 1.0 })),
        ("stub", geometry(GeometryFamily::Stub { length: 1.0, gap: 0.5 })),
        ("bump", bump(0.5)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, g) in &fixtures {
        let defect = |n: usize| -> Result<(f64, usize), String> {
            let p = MeshParams::default().with_node_count(g, n).map_err(|e| e.to_string())?;
            let a = amplitudes(g, &energy, &p).map_err(|e| e.to_string())?;
            Ok((a.unitarity_defect, a.n))
        };
        let (d400, n400) = defect(400)?;
        let (d800, n800) = defect(800)?;
        // below 1e-12 both defects are round-off and halving is not measurable
        let halves = d800 <= (0.5 * d400).max(1e-12);
        ok &= d400 <= 1e-3 && halves;
        parts.push(format!("{name}: {d400:.1e} (N={n400}) -> {d800:.1e} (N={n800})"));
    }
    check(ok, format!("{} (tol 1e-3, halving above 1e-12)", parts.join("; ")))
}

fn amplitude_consistency() -> Outcome {
    let alpha = 5.0;
    let energy = EnergySpec::new(alpha, -alpha * alpha / 8.0).unwrap();
    let fixtures = [("gap", geometry(GeometryFamily::Gap { length: 1.0 })), ("bump", bump(0.5))];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, g) in &fixtures {
        let sol = solve_scattering(g, &energy, &MeshParams::default(), Direction::LeftIncoming, AmplitudeConvention::default())
            .map_err(|e| e.to_string())?;
        let edge = g.bounding_box().map_or(0.0, |b| b.min.x1.abs().max(b.max.x1.abs()));
        let errs: Vec<f64> = [5.0, 10.0, 20.0, 30.0]
            .iter()
            .map(|m| {
                let (t, r) = field_amplitudes(&sol, edge + m / alpha).unwrap();
                (t - sol.amplitudes.t).norm().max((r - sol.amplitudes.r).norm())
            })
            .collect();
        let improving = errs.windows(2).all(|w| w[1] < w[0]);
        ok &= errs.iter().all(|&e| e <= 5e-2) && improving;
        parts.push(format!("{name}: {:.1e} at 5/α -> {:.1e} at 30/α", errs[0], errs[3]));
    }
    check(ok, format!("{} (tol 5e-2, improving with distance)", parts.join("; ")))
}

fn bound_state_existence() -> Outcome {
    let alpha = 5.0;
    let g = bump(0.5);
    let range = ScanRange::below_threshold(alpha, 16);
    let params = MeshParams::default();
    let coarse = find_bound_states(&g, alpha, &range, &params).map_err(|e| e.to_string())?;
    let fine = find_bound_states(&g, alpha, &range, &params.refined()).map_err(|e| e.to_string())?;
    let (Some(a), Some(b)) = (coarse.first(), fine.first()) else {
        return Err(format!("found {} and {} states", coarse.len(), fine.len()));
    };
    let rel = (a.lambda_star - b.lambda_star).abs() / b.lambda_star.abs();
    let ok = a.lambda_star < -6.25 && rel <= 1e-4;
    check(ok, format!("λ* = {:.10} (N={}), {:.10} (N={}), relative change {rel:.1e} (tol 1e-4)", a.lambda_star, a.n, b.lambda_star, b.n))
}

fn strong_coupling() -> Outcome {
    let alpha = 20.0;
    let g = bump(0.5);
    let profile = CurvatureProfile::from_geometry(&g, PROFILE_SAMPLES).map_err(|e| e.to_string())?;
    let mu = ground_state_1d(&profile).map_err(|e| e.to_string())?.ok_or("K has no bound state")?.mu;
    let params = mesh_for_alpha(&MeshParams::default(), alpha);
    let problem = SpectrumProblem::new(&g, alpha, &params).map_err(|e| e.to_string())?;
    let (_, states) = problem.find(&ScanRange::below_threshold(alpha, 16), 1e-6 * alpha).map_err(|e| e.to_string())?;
    let s = states.first().ok_or("no bound state found")?;
    let rel = (s.binding - mu).abs() / mu.abs();
    check(rel <= 0.1, format!("λ* + α²/4 = {:.6e}, μ1(K) = {mu:.6e}, relative difference {rel:.3} (tol 0.1)", s.binding))
}

fn conjecture_trend() -> Outcome {
    let g = bump(0.3);
    let rep = conjecture_test(&g, 1.0, &[5.0, 10.0, 20.0, 40.0], &MeshParams::default()).map_err(|e| e.to_string())?;
    let disc: Vec<String> = rep.rows.iter().map(|r| format!("{:.3e}", r.disc_phasemin)).collect();
    check(rep.strictly_decreasing(), format!("phase-minimized discrepancy [{}] over α = 5, 10, 20, 40", disc.join(", ")))
}

fn one_d_solver() -> Outcome {
    let (depth, length) = (2.0, 1.5);
    let well = RectangularWell { depth, start: -0.5 * length, length };
    let mut worst_t: f64 = 0.0;
    let mut worst_u: f64 = 0.0;
    for k in [0.3, 1.0, 2.5] {
        let s = scattering_potential(&well, k).map_err(|e| e.to_string())?;
        let q = (k * k + depth).sqrt();
        // transmission through a square well of width L, plane waves referenced at the well edges
        let (sn, cs) = (q * length).sin_cos();
        let denom = Complex64::new(cs, -(q * q + k * k) / (2.0 * q * k) * sn);
        let t_exact = Complex64::from_polar(1.0, -k * length) / denom;
        worst_t = worst_t.max((s.t - t_exact).norm());
        worst_u = worst_u.max(s.unitarity_defect());
    }
    check(worst_t <= 1e-8 && worst_u <= 1e-10, format!("transmission error {worst_t:.1e} (tol 1e-8), unitarity defect {worst_u:.1e} (tol 1e-10)"))
}

/// `K0(x) = ∫₀^∞ e^{-x cosh t} dt` by the trapezoidal rule, which converges
/// geometrically for this integrand.
fn k0_integral(x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh()).exp();
        sum += term;
        if term < 1e-30 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

fn k0_accuracy() -> Outcome {
    let mut worst: f64 = 0.0;
    let n = 400;
    for i in 0..=n {
        let x = 1e-6 * (50.0f64 / 1e-6).powf(i as f64 / n as f64);
        let v = macdonald_k0(x).unwrap();
        worst = worst.max((v - k0_integral(x)).abs() / v);
    }
    let mut overlap: f64 = 0.0;
    for i in 0..=40 {
        let x = 1.5 + 0.05 * i as f64;
        let (series, fraction) = k0_expansions(x);
        overlap = overlap.max((series - fraction).abs() / fraction);
    }
    check(
        worst <= 1e-12 && overlap <= 1e-12,
        format!("max relative error {worst:.1e} on [1e-6, 50], expansion overlap {overlap:.1e} (tol 1e-12)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("line-kernel identity", line_kernel_identity),
        ("resolvent kernel vs triple integral", resolvent_oracle),
        ("on-shell kernel limit", onshell_limit),
        ("far-field asymptotics", far_field),
        ("empty deformation exactness", empty_deformation),
        ("unitarity", unitarity),
        ("two amplitude extractions", amplitude_consistency),
        ("bound state existence", bound_state_existence),
        ("strong-coupling eigenvalue", strong_coupling),
        ("conjecture trend", conjecture_trend),
        ("1D solver", one_d_solver),
        ("K0 accuracy", k0_accuracy),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| *x == id || name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
