//! Self-test of the kernel evaluations against independent routes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{
    line_kernel, sigma_green, sigma_green_complex_energy, sigma_green_farfield, sigma_green_onshell,
    sigma_green_resolvent, EnergySpec, KernelPoint,
};
use crate::error::Result;
use crate::specfun::{integrate_adaptive, integrate_to_infinity, macdonald_k0, AdaptiveOptions};

/// Outcome of one kernel self-test.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCheck {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl KernelCheck {
    fn new(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self { name: name.into(), observed, tolerance, passed: observed <= tolerance }
    }
}

/// `∫_ℝ cos(q a)/(q² + τ²) dq` by quadrature, real `τ > 0`.
pub(crate) fn lorentzian_transform(a: f64, tau: f64) -> f64 {
    let opts = AdaptiveOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_segments: 20_000 };
    let f = |q: f64| (q * a).cos() / (q * q + tau * tau);
    let a = a.abs();
    if a == 0.0 {
        return 2.0 * integrate_to_infinity(f, 0.0, tau, opts).0;
    }
    let cut = (400.0 * tau).max(400.0 / a);
    let n = (cut * a / PI).ceil().clamp(1.0, 20_000.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| cut * i as f64 / n as f64).collect();
    let head = integrate_adaptive(f, &breaks, opts).0;
    // two integrations by parts for the tail
    let g = 1.0 / (cut * cut + tau * tau);
    let g1 = -2.0 * cut * g * g;
    let (s, c) = (cut * a).sin_cos();
    2.0 * (head - g * s / a - g1 * c / (a * a))
}

/// `G_Σ - G0` from the triple momentum integral, with both transverse
/// integrals done numerically. Needs `|x2| + |y2| > 0`.
pub fn brute_force_correction(alpha: f64, kappa: f64, p: &KernelPoint) -> f64 {
    let c = p.transverse_sum();
    assert!(c > 0.0, "brute-force route needs a transverse offset");
    let f = |q: f64| {
        let tau = (q * q + kappa * kappa).sqrt();
        let ix = lorentzian_transform(p.x2, tau);
        let iy = lorentzian_transform(p.y2, tau);
        (q * p.d1).cos() * ix * iy * tau / (2.0 * tau - alpha)
    };
    let mut cut = 4.0 * kappa.max(alpha);
    while (-cut * c).exp() / (cut * c) > 1e-16 {
        cut *= 1.5;
    }
    let n = ((cut * p.d1.abs() / PI).ceil() as usize).clamp(8, 2000);
    let breaks: Vec<f64> = (0..=n).map(|i| cut * i as f64 / n as f64).collect();
    let opts = AdaptiveOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_segments: 4000 };
    2.0 * alpha / (4.0 * PI * PI * PI) * integrate_adaptive(f, &breaks, opts).0
}

/// Richardson extrapolation of the complex-energy kernel to `ε → 0⁺` from
/// `ε, ε/2, ε/4`.
pub fn epsilon_limit(alpha: f64, lambda: f64, p: &KernelPoint, eps: f64) -> Result<Complex64> {
    let at = |e: f64| sigma_green_complex_energy(alpha, Complex64::new(lambda, e), p);
    Ok((at(eps)? - 6.0 * at(0.5 * eps)? + 8.0 * at(0.25 * eps)?) / 3.0)
}

/// Runs the oracle chain and reports observed errors.
pub fn run_kernel_check() -> Result<Vec<KernelCheck>> {
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for kappa in [1.0, 2.0, 5.0] {
        for d in [0.1, 1.0, 5.0] {
            let v = line_kernel(Complex64::new(0.0, kappa), d)?.re;
            worst = worst.max((v - macdonald_k0(kappa * d)? / (2.0 * PI)).abs());
        }
    }
    out.push(KernelCheck::new("line kernel vs K0/(2π)", worst, 1e-8));

    let energy = EnergySpec::new(1.0, -1.0)?;
    let mut worst: f64 = 0.0;
    for p in [KernelPoint::new(1.0, 0.5, 0.5), KernelPoint::new(0.0, 0.3, 0.2)] {
        let reduced = sigma_green_resolvent(&energy, &p)?.re;
        let g0 = reduced - super::sigma_correction(&energy, &p).re;
        let brute = g0 + brute_force_correction(1.0, 1.0, &p);
        worst = worst.max((reduced - brute).abs() / brute.abs());
    }
    out.push(KernelCheck::new("resolvent form vs triple integral", worst, 1e-6));

    let mut worst: f64 = 0.0;
    for p in [KernelPoint::new(1.0, 0.5, 0.5), KernelPoint::new(2.0, 0.0, 0.0), KernelPoint::new(0.1, 0.0, 0.05)] {
        let a = sigma_green(&energy, &p)?.re;
        let b = sigma_green_resolvent(&energy, &p)?.re;
        worst = worst.max((a - b).abs() / b.abs());
    }
    out.push(KernelCheck::new("rotated contour vs real axis (bound regime)", worst, 1e-8));

    let energy = EnergySpec::new(5.0, -3.0)?;
    let p = KernelPoint::new(0.7, 0.2, 0.3);
    let on = sigma_green_onshell(&energy, &p)?;
    let lim = epsilon_limit(5.0, -3.0, &p, 0.1)?;
    out.push(KernelCheck::new("on-shell vs ε-limit", (on - lim).norm() / on.norm(), 1e-4));

    let d = 30.0 / energy.alpha;
    let p = KernelPoint::new(d, 0.1, 0.1);
    let on = sigma_green_onshell(&energy, &p)?;
    let ff = sigma_green_farfield(&energy, &p)?;
    out.push(KernelCheck::new("far field at |d1| = 30/α", (on - ff).norm() / ff.norm(), 1e-2));
    Ok(out)
}
