//! Evaluation of the line kernel and of the straight-wire correction `ξ`.
//!
//! Production values come from rotating the `p` contour into the first
//! quadrant, where `e^{i p |d|} e^{-τ c}` decays exponentially for any
//! `d, c ≥ 0`. Rotating past the guided-mode pole at `p = k_α` (scattering
//! regime, pole approached from above) leaves its residue, which is the
//! outgoing guided wave `s_α e^{i k_α |d|} e^{-α c/2}`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use super::{free_green_real, s_alpha, EnergySpec, KernelPoint, Regime};
use crate::error::{Error, Result};
use crate::specfun::{integrate_adaptive, integrate_to_infinity, macdonald_k0_complex, AdaptiveOptions};

/// `e^{iθ}` of the rotated ray, `θ = π/4`.
const RAY: Complex64 = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);

const KERNEL_OPTS: AdaptiveOptions = AdaptiveOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_segments: 4000 };

/// `(1/π) Re[e^{iθ} ∫₀^∞ h(t e^{iθ}) dt]` for an integrand analytic in the
/// sector `0 ≤ arg p ≤ θ` and decaying like `e^{-t·rate}` or `t^{-2}`.
fn ray_integral<H: Fn(Complex64) -> Complex64>(h: H, scales: &[f64], rate: f64) -> f64 {
    let g = |t: f64| (RAY * h(RAY * t)).re;
    let top = 4.0 * scales.iter().cloned().fold(1e-3, f64::max);
    let mut breaks = vec![0.0];
    let mut inner: Vec<f64> = scales.iter().cloned().filter(|&s| s > 0.0 && s < top).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * top);
    breaks.extend(inner);
    breaks.push(top);
    let (head, _) = integrate_adaptive(g, &breaks, KERNEL_OPTS);
    let length = if rate > 0.0 { (1.0 / rate).max(top) } else { top };
    let (tail, _) = integrate_to_infinity(g, top, length, KERNEL_OPTS);
    (head + tail) / PI
}

/// Line kernel `(1/4π) ∫ e^{i p d} (p² - k²)^{-1/2} dp` for `k = iκ`.
pub fn line_kernel(k: Complex64, d: f64) -> Result<Complex64> {
    if !(k.im > 0.0) || k.re.abs() > 1e-14 * k.im {
        return Err(Error::Domain(format!(
            "line kernel integral diverges or is not absolutely convergent for k = {k}"
        )));
    }
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Domain("line kernel is logarithmically divergent at d = 0".into()));
    }
    let kappa = k.im;
    let ad = d.abs();
    // (1/4π)·2·Re∫₀^∞ = (1/2π) Re∫₀^∞
    let v = 0.5 * ray_integral(|p| (Complex64::i() * p * ad).exp() / (p * p + kappa * kappa).sqrt(), &[kappa], ad * FRAC_1_SQRT_2);
    Ok(Complex64::new(v, 0.0))
}

/// Rotated-ray part of `ξ(d, c)`: real, and smooth in `(|d|, c)` away
/// from the origin.
pub(crate) fn correction_ray(energy: &EnergySpec, d: f64, c: f64) -> f64 {
    let alpha = energy.alpha;
    let kappa = energy.kappa();
    let kappa2 = kappa * kappa;
    let ad = d.abs();
    let h = |p: Complex64| {
        let tau = (p * p + kappa2).sqrt();
        (Complex64::i() * p * ad - tau * c).exp() * alpha / (2.0 * tau * (2.0 * tau - alpha))
    };
    ray_integral(h, &[energy.k_alpha().norm(), kappa, 0.5 * alpha], (ad + c) * FRAC_1_SQRT_2)
}

/// Residue of the guided-mode pole, present only in the scattering regime.
#[inline]
pub(crate) fn correction_pole(energy: &EnergySpec, d: f64, c: f64) -> Complex64 {
    if energy.regime() != Regime::Scattering {
        return Complex64::new(0.0, 0.0);
    }
    let k = energy.k_alpha().re;
    s_alpha(energy) * (Complex64::i() * k * d.abs()).exp() * (-0.5 * energy.alpha * c).exp()
}

/// Correction `ξ(d, c)` at real energy below zero, any regime.
fn correction_value(energy: &EnergySpec, d: f64, c: f64) -> Complex64 {
    correction_ray(energy, d, c) + correction_pole(energy, d, c)
}

/// Correction `ξ = G_Σ - G0`, finite also at coincident points.
pub fn sigma_correction(energy: &EnergySpec, p: &KernelPoint) -> Complex64 {
    correction_value(energy, p.d1, p.transverse_sum())
}

/// Straight-wire kernel `G_Σ` at real energy, either regime. In the
/// scattering regime this is the boundary value from `Im λ > 0`.
pub fn sigma_green(energy: &EnergySpec, p: &KernelPoint) -> Result<Complex64> {
    let r = p.distance();
    if !(r > 0.0) {
        return Err(Error::Domain("kernel evaluated at coincident points".into()));
    }
    Ok(free_green_real(energy.kappa(), r) + sigma_correction(energy, p))
}

/// On-shell kernel in the scattering regime.
pub fn sigma_green_onshell(energy: &EnergySpec, p: &KernelPoint) -> Result<Complex64> {
    if energy.regime() != Regime::Scattering {
        return Err(Error::Regime(format!("on-shell kernel needs -α²/4 < λ < 0, got λ = {}", energy.lambda)));
    }
    sigma_green(energy, p)
}

/// Single outgoing-mode term `s_α e^{i k_α |d1|} e^{-α (|x2|+|y2|)/2}`.
pub fn sigma_green_farfield(energy: &EnergySpec, p: &KernelPoint) -> Result<Complex64> {
    if energy.regime() != Regime::Scattering {
        return Err(Error::Regime("far-field term exists only in the scattering regime".into()));
    }
    let k = energy.k_alpha().re;
    Ok(s_alpha(energy) * (Complex64::i() * k * p.d1.abs()).exp() * (-0.5 * energy.alpha * p.transverse_sum()).exp())
}

/// Resolvent form at a real energy in the Euclidean regime `κ > α/2`:
/// momentum integral along the real axis.
pub fn sigma_green_resolvent(energy: &EnergySpec, p: &KernelPoint) -> Result<Complex64> {
    if energy.regime() != Regime::Bound {
        return Err(Error::Regime(format!(
            "resolvent form needs κ > α/2, got κ = {} and α = {}",
            energy.kappa(),
            energy.alpha
        )));
    }
    sigma_green_complex_energy(energy.alpha, Complex64::new(energy.lambda, 0.0), p)
}

/// `G_Σ` at a complex energy `z` off `[−α²/4, ∞)` by real-axis quadrature in
/// the longitudinal momentum.
pub fn sigma_green_complex_energy(alpha: f64, z: Complex64, p: &KernelPoint) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("α must be positive".into()));
    }
    if z.im == 0.0 && z.re >= -0.25 * alpha * alpha {
        return Err(Error::Domain(format!("energy {z} lies on the spectrum; use a complex energy")));
    }
    let r = p.distance();
    if !(r > 0.0) {
        return Err(Error::Domain("kernel evaluated at coincident points".into()));
    }
    let sqrt_minus_z = (-z).sqrt();
    let free = if z.im == 0.0 {
        Complex64::new(free_green_real(sqrt_minus_z.re, r), 0.0)
    } else {
        macdonald_k0_complex(sqrt_minus_z * r)? / (2.0 * PI)
    };
    let d = p.d1.abs();
    let c = p.transverse_sum();
    let g = |q: f64| {
        let tau = (Complex64::new(q * q, 0.0) - z).sqrt();
        (-tau * c).exp() * alpha / (2.0 * tau * (2.0 * tau - alpha))
    };
    let f = |q: f64| g(q) * (q * d).cos();
    let k_re = (z + 0.25 * alpha * alpha).sqrt().re;
    let scale = k_re.max(sqrt_minus_z.norm()).max(alpha);
    let mut breaks = vec![0.0];
    for s in [0.5 * k_re, k_re, 1.5 * k_re, sqrt_minus_z.norm()] {
        if s > 0.0 {
            breaks.push(s);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let opts = AdaptiveOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 20_000 };
    let value = if c > 0.0 {
        // truncate where e^{-q c}·α/(4 q²) falls below 1e-17 of the scale
        let mut cut = 4.0 * scale;
        while (-cut * c).exp() * alpha / (4.0 * cut * cut * c) > 1e-17 {
            cut *= 1.5;
        }
        push_oscillation_breaks(&mut breaks, cut, d);
        integrate_adaptive(f, &breaks, opts).0
    } else if d > 0.0 {
        let cut = (200.0 * scale).max(400.0 / d);
        push_oscillation_breaks(&mut breaks, cut, d);
        let head = integrate_adaptive(f, &breaks, opts).0;
        // asymptotic tail by three integrations by parts
        let h = 1e-3 * cut;
        let (gm, g0, gp) = (g(cut - h), g(cut), g(cut + h));
        let g1 = (gp - gm) / (2.0 * h);
        let g2 = (gp - g0 * 2.0 + gm) / (h * h);
        let (s, co) = (cut * d).sin_cos();
        head - g0 * (s / d) - g1 * (co / (d * d)) + g2 * (s / (d * d * d))
    } else {
        let top = 4.0 * scale;
        breaks.push(top);
        integrate_adaptive(f, &breaks, opts).0 + integrate_to_infinity(f, top, top, opts).0
    };
    Ok(free + value / PI)
}

fn push_oscillation_breaks(breaks: &mut Vec<f64>, cut: f64, d: f64) {
    breaks.retain(|&b| b < cut);
    let start = *breaks.last().unwrap();
    let n = ((cut - start) * d / PI).ceil().clamp(1.0, 5000.0) as usize;
    for i in 1..=n {
        breaks.push(start + (cut - start) * i as f64 / n as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate_adaptive as ia, macdonald_k0, macdonald_k1_scaled};

    /// Bound-regime oracle: `1/(2τ-α) - 1/(2τ)` as a Laplace transform in
    /// `s` turns the momentum integral into a K1 integral.
    pub(super) fn laplace_oracle(alpha: f64, kappa: f64, d: f64, c: f64) -> f64 {
        let f = |s: f64| {
            let b = c + 2.0 * s;
            let rho = d.hypot(b);
            if rho == 0.0 {
                // limit b K1(κ b)/b → 1/b² ... only at s = 0 with c = d = 0
                return 0.0;
            }
            let x = kappa * rho;
            (alpha * s).exp_m1() * kappa * b * macdonald_k1_scaled(x) * (-x).exp() / rho
        };
        let rate = 2.0 * kappa - alpha;
        let top = 40.0 / rate;
        let breaks: Vec<f64> = (0..=40).map(|i| top * i as f64 / 40.0).collect();
        ia(f, &breaks, AdaptiveOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 4000 }).0 / PI
    }

    #[test]
    fn line_kernel_identity() {
        for &kappa in &[1.0, 2.0, 5.0] {
            for &d in &[0.1, 1.0, 5.0, -1.0] {
                let v = line_kernel(Complex64::new(0.0, kappa), d).unwrap();
                let exact = macdonald_k0(kappa * d.abs()).unwrap() / (2.0 * PI);
                assert!((v.re - exact).abs() < 1e-10, "κ={kappa} d={d}: {} vs {exact}", v.re);
            }
        }
        assert!(line_kernel(Complex64::new(0.0, 1.0), 0.0).is_err());
        assert!(line_kernel(Complex64::new(1.0, 0.5), 1.0).is_err());
    }

    #[test]
    fn rotated_correction_matches_laplace_form() {
        let e = EnergySpec::new(1.0, -1.0).unwrap();
        for &(d, c) in &[(1.0, 1.0), (0.0, 0.5), (2.0, 0.0), (0.3, 0.05), (5.0, 2.0), (0.0, 0.0)] {
            let v = correction_value(&e, d, c);
            let o = laplace_oracle(1.0, 1.0, d, c);
            assert!(v.im == 0.0);
            assert!((v.re - o).abs() < 1e-10 * (1.0 + o.abs()), "d={d} c={c}: {} vs {o}", v.re);
        }
    }

    #[test]
    fn real_axis_matches_rotation_in_bound_regime() {
        let e = EnergySpec::new(3.0, -4.0).unwrap();
        for &(d, x2, y2) in &[(1.0, 0.5, 0.5), (0.2, 0.0, 0.1), (2.0, 0.0, 0.0), (0.0, 0.3, -0.2)] {
            let p = KernelPoint::new(d, x2, y2);
            let a = sigma_green(&e, &p).unwrap();
            let b = sigma_green_resolvent(&e, &p).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm(), "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn onshell_matches_complex_energy_limit() {
        let e = EnergySpec::new(5.0, -3.0).unwrap();
        let p = KernelPoint::new(0.7, 0.2, 0.3);
        let on = sigma_green_onshell(&e, &p).unwrap();
        let at = |eps: f64| sigma_green_complex_energy(5.0, Complex64::new(-3.0, eps), &p).unwrap();
        let h = 0.02;
        let extrap = (at(h) - 6.0 * at(0.5 * h) + 8.0 * at(0.25 * h)) / 3.0;
        assert!((on - extrap).norm() < 1e-6 * on.norm(), "{on} vs {extrap}");
    }

    #[test]
    fn symmetries_and_reality() {
        let b = EnergySpec::new(2.0, -2.0).unwrap();
        let s = EnergySpec::new(2.0, -0.6).unwrap();
        let p = KernelPoint::new(0.8, 0.3, -0.1);
        for e in [b, s] {
            let v = sigma_green(&e, &p).unwrap();
            let w = sigma_green(&e, &p.swapped()).unwrap();
            assert!((v - w).norm() < 1e-14 * v.norm());
            let m = sigma_green(&e, &KernelPoint::new(-0.8, -0.3, 0.1)).unwrap();
            assert!((v - m).norm() < 1e-14 * v.norm());
        }
        assert_eq!(sigma_green(&b, &p).unwrap().im, 0.0);
        assert!(sigma_green(&s, &p).unwrap().im != 0.0);
    }

    #[test]
    fn weak_coupling_limit() {
        let p = KernelPoint::new(1.0, 0.5, 0.5);
        let e = EnergySpec::new(1e-6, -1.0).unwrap();
        let g0 = free_green_real(1.0, p.distance());
        assert!((sigma_green(&e, &p).unwrap().re - g0).abs() < 1e-7);
    }

    #[test]
    fn farfield_values() {
        let e = EnergySpec::new(5.0, -25.0 / 8.0).unwrap();
        let k = (25.0f64 / 8.0).sqrt();
        let v = sigma_green_farfield(&e, &KernelPoint::new(10.0, 0.0, 0.0)).unwrap();
        assert!((v.norm() - 5.0 / (4.0 * k)).abs() < 1e-14);
        let a = sigma_green_farfield(&e, &KernelPoint::new(1.0, 0.1, 0.2)).unwrap();
        let b = sigma_green_farfield(&e, &KernelPoint::new(2.0, 0.1, 0.2)).unwrap();
        assert!(((b / a).arg() - k).abs() < 1e-12);
        assert!((a.norm() - s_alpha(&e).norm() * (-0.75f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn onshell_approaches_farfield() {
        let alpha = 5.0;
        let e = EnergySpec::new(alpha, -3.0).unwrap();
        let mut prev = f64::INFINITY;
        for &d in &[1.0, 2.0, 4.0, 6.0, 8.0] {
            let p = KernelPoint::new(d, 0.1, 0.2);
            let on = sigma_green_onshell(&e, &p).unwrap();
            let ff = sigma_green_farfield(&e, &p).unwrap();
            let dev = (on - ff).norm() / ff.norm();
            assert!(dev < prev, "d={d}: {dev}");
            prev = dev;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn regime_errors() {
        let b = EnergySpec::new(2.0, -2.0).unwrap();
        let s = EnergySpec::new(2.0, -0.5).unwrap();
        let p = KernelPoint::new(1.0, 0.0, 0.0);
        assert!(sigma_green_onshell(&b, &p).is_err());
        assert!(sigma_green_farfield(&b, &p).is_err());
        assert!(sigma_green_resolvent(&s, &p).is_err());
        assert!(sigma_green(&s, &KernelPoint::new(0.0, 0.3, 0.3)).is_err());
        assert!(sigma_correction(&s, &KernelPoint::new(0.0, 0.0, 0.0)).norm().is_finite());
    }
}
