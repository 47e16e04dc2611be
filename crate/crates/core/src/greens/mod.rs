//! Free and straight-wire Green's functions at negative energies.
//!
//! The straight-wire kernel splits as `G_Σ = G0 + ξ` with the free part
//! `G0 = K0(κ r)/(2π)` and the transverse correction
//!
//! ```text
//! ξ(d, c) = (1/π) ∫₀^∞ cos(p d) e^{-τ c} α / (2τ (2τ - α)) dp,   τ = (p² + κ²)^{1/2},
//! ```
//!
//! where `d = x1 - y1` and `c = |x2| + |y2|`.

mod check;
mod sigma;
mod table;

pub use check::{brute_force_correction, epsilon_limit, run_kernel_check, KernelCheck};
pub use table::CorrectionTable;
pub use sigma::{
    line_kernel, sigma_correction, sigma_green, sigma_green_complex_energy, sigma_green_farfield, sigma_green_onshell,
    sigma_green_resolvent,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::specfun::{k0_unchecked, macdonald_k0_complex};

/// Relative distance (in units of `α²`) an energy must keep from `-α²/4` and `0`.
pub const THRESHOLD_GUARD: f64 = 1e-6;

/// Which side of the guided-mode threshold `-α²/4` the energy lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `-α²/4 < λ < 0`: one open guided channel, `k_α` real.
    Scattering,
    /// `λ < -α²/4`: `k_α = iκ'` and the wire kernel decays in all directions.
    /// This is also the Euclidean regime `κ > α/2` of the free momentum.
    Bound,
}

/// Coupling and energy, with the derived momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySpec {
    pub alpha: f64,
    pub lambda: f64,
}

impl EnergySpec {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("coupling α must be positive and finite, got {alpha}")));
        }
        if !lambda.is_finite() || lambda >= 0.0 {
            return Err(Error::Domain(format!("only negative energies are supported, got λ = {lambda}")));
        }
        let guard = THRESHOLD_GUARD * alpha * alpha;
        let threshold = -0.25 * alpha * alpha;
        if (lambda - threshold).abs() < guard {
            return Err(Error::Threshold { lambda, detail: "too close to the guided-mode threshold -α²/4".into() });
        }
        if lambda.abs() < guard {
            return Err(Error::Threshold { lambda, detail: "too close to 0".into() });
        }
        Ok(Self { alpha, lambda })
    }

    /// Guided-mode threshold `-α²/4`.
    pub fn threshold(&self) -> f64 {
        -0.25 * self.alpha * self.alpha
    }

    pub fn regime(&self) -> Regime {
        if self.lambda > self.threshold() {
            Regime::Scattering
        } else {
            Regime::Bound
        }
    }

    /// `k_α = (λ + α²/4)^{1/2}` with `Im k_α ≥ 0`.
    pub fn k_alpha(&self) -> Complex64 {
        let q = self.lambda + 0.25 * self.alpha * self.alpha;
        if q >= 0.0 {
            Complex64::new(q.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-q).sqrt())
        }
    }

    /// Free decay rate `κ = |λ|^{1/2}`, i.e. the free momentum is `k = iκ`.
    pub fn kappa(&self) -> f64 {
        (-self.lambda).sqrt()
    }
}

/// Source/target pair in the coordinates the straight-wire kernel uses.
///
/// Transverse coordinates are kept signed because the free part depends on
/// the true distance; the correction only sees `|x2| + |y2|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPoint {
    /// `x1 - y1`.
    pub d1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl KernelPoint {
    pub fn new(d1: f64, x2: f64, y2: f64) -> Self {
        Self { d1, x2, y2 }
    }

    pub fn between(x: Point2, y: Point2) -> Self {
        Self { d1: x.x1 - y.x1, x2: x.x2, y2: y.x2 }
    }

    pub fn ax2(&self) -> f64 {
        self.x2.abs()
    }

    pub fn ay2(&self) -> f64 {
        self.y2.abs()
    }

    /// `|x2| + |y2|`.
    pub fn transverse_sum(&self) -> f64 {
        self.x2.abs() + self.y2.abs()
    }

    /// Euclidean distance `|x - y|`.
    pub fn distance(&self) -> f64 {
        self.d1.hypot(self.x2 - self.y2)
    }

    /// The pair with source and target exchanged.
    pub fn swapped(&self) -> Self {
        Self { d1: -self.d1, x2: self.y2, y2: self.x2 }
    }
}

/// Free kernel `G^k(r) = K0(-i k r)/(2π)` with `Im k > 0`, so that it decays.
pub fn free_green(k: Complex64, r: f64) -> Result<Complex64> {
    if !(k.im > 0.0) {
        return Err(Error::Domain(format!("free kernel needs Im k > 0, got k = {k}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("free kernel is singular at r = {r}")));
    }
    let z = Complex64::new(0.0, -1.0) * k * r;
    if k.re == 0.0 {
        return Ok(Complex64::new(k0_unchecked(z.re) / (2.0 * std::f64::consts::PI), 0.0));
    }
    Ok(macdonald_k0_complex(z)? / (2.0 * std::f64::consts::PI))
}

/// `K0(κ r)/(2π)` for `κ, r > 0`, without checks.
#[inline]
pub(crate) fn free_green_real(kappa: f64, r: f64) -> f64 {
    k0_unchecked(kappa * r) * (0.5 / std::f64::consts::PI)
}

/// Guided-mode amplitude `s_α(λ) = iα/(4 k_α)`, the residue coefficient of
/// the pole of `ξ` at `p = k_α`.
pub fn s_alpha(energy: &EnergySpec) -> Complex64 {
    Complex64::new(0.0, energy.alpha) / (4.0 * energy.k_alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::macdonald_k0;

    #[test]
    fn energy_regimes_and_momenta() {
        let e = EnergySpec::new(2.0, -0.5).unwrap();
        assert_eq!(e.regime(), Regime::Scattering);
        assert!((e.k_alpha().re - 0.5f64.sqrt()).abs() < 1e-15 && e.k_alpha().im == 0.0);
        let b = EnergySpec::new(2.0, -3.0).unwrap();
        assert_eq!(b.regime(), Regime::Bound);
        assert!(b.k_alpha().re == 0.0 && (b.k_alpha().im - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.kappa() > 0.5 * b.alpha);
    }

    #[test]
    fn threshold_guard() {
        assert!(matches!(EnergySpec::new(2.0, -1.0), Err(Error::Threshold { .. })));
        assert!(matches!(EnergySpec::new(2.0, -1.0 + 1e-7), Err(Error::Threshold { .. })));
        assert!(EnergySpec::new(2.0, -1.0 + 1e-5).is_ok());
        assert!(matches!(EnergySpec::new(2.0, -1e-7), Err(Error::Threshold { .. })));
        assert!(EnergySpec::new(2.0, 0.5).is_err());
        assert!(EnergySpec::new(-1.0, -0.5).is_err());
    }

    #[test]
    fn s_alpha_values() {
        let e = EnergySpec::new(2.0, -0.5).unwrap();
        let s = s_alpha(&e);
        assert!(s.re == 0.0);
        assert!((s.im - 2.0 / (4.0 * 0.5f64.sqrt())).abs() < 1e-14);
        // blows up towards the threshold
        let near = EnergySpec::new(2.0, -1.0 + 1e-4).unwrap();
        assert!(s_alpha(&near).norm() > 20.0 * s.norm());
    }

    #[test]
    fn free_green_examples() {
        let i = Complex64::new(0.0, 1.0);
        let g = free_green(i, 1.0).unwrap();
        assert!((g.re - 0.421_024_438_240_708_34 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((g.re - 0.067_008_12).abs() < 1e-9);
        for &kappa in &[0.3, 1.0, 4.0] {
            for &r in &[0.01, 0.5, 3.0] {
                let a = free_green(Complex64::new(0.0, kappa), r).unwrap();
                let b = free_green(i, kappa * r).unwrap();
                assert!((a - b).norm() < 1e-15);
            }
        }
        let mut prev = f64::INFINITY;
        for j in 1..200 {
            let v = free_green(i, 0.1 * j as f64).unwrap().re;
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(free_green(i, 0.0).is_err());
        assert!(free_green(Complex64::new(1.0, 0.0), 1.0).is_err());
        // off-axis momentum uses the complex branch
        let k = Complex64::new(0.3, 1.0);
        let z = Complex64::new(1.0, -0.3);
        assert!((free_green(k, 1.0).unwrap() - macdonald_k0_complex(z).unwrap() / (2.0 * std::f64::consts::PI)).norm() < 1e-15);
        assert!((free_green(i, 2.0).unwrap().re - macdonald_k0(2.0).unwrap() / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    }

    #[test]
    fn kernel_point_geometry() {
        let p = KernelPoint::between(Point2::new(1.0, 0.5), Point2::new(0.0, -0.25));
        assert_eq!(p.d1, 1.0);
        assert_eq!(p.transverse_sum(), 0.75);
        assert!((p.distance() - (1.0f64 + 0.75 * 0.75).sqrt()).abs() < 1e-15);
        let q = p.swapped();
        assert_eq!(q.distance(), p.distance());
        assert_eq!(q.transverse_sum(), p.transverse_sum());
    }
}
