//! Distance between the on-shell S-matrix of the deformed wire at
//! `λ = k² - α²/4` and the S-matrix of `K` at `k²`.
//!
//! Both matrices are written as `[[T, R'], [R, T']]` (columns: incidence
//! from the left, from the right) with plane waves referenced at `x₁ = 0`
//! and `s = 0`, the deformation being centred. Since `x₁` and `s` differ
//! inside the deformation, the distance is also reported minimized over a
//! global phase.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::{scattering_1d, CurvatureProfile, OneDScattering};
use crate::error::{Error, Result};
use crate::geometry::{DeformedLineGeometry, MeshParams};
use crate::greens::EnergySpec;
use crate::bie::DEFAULT_CONDITION_CAP;
use crate::scattering::{amplitudes_both, AmplitudeConvention};

/// Curvature samples used for the comparison profile.
pub const PROFILE_SAMPLES: usize = 4001;

pub const CONJECTURE_CSV_HEADER: &str =
    "alpha,lambda,re_T2d,im_T2d,re_R2d,im_R2d,re_TK,im_TK,re_RK,im_RK,disc_raw,disc_phasemin";

/// One coupling constant of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub alpha: f64,
    pub lambda: f64,
    pub s_2d: [[Complex64; 2]; 2],
    pub s_1d: [[Complex64; 2]; 2],
    pub disc_raw: f64,
    pub disc_phasemin: f64,
    pub n: usize,
}

/// Comparison table at fixed momentum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub k: f64,
    pub one_d: OneDScattering,
    pub rows: Vec<ConjectureRow>,
}

impl ConjectureReport {
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let (t, rr) = (r.s_2d[0][0], r.s_2d[1][0]);
            let (tk, rk) = (r.s_1d[0][0], r.s_1d[1][0]);
            let _ = writeln!(
                out,
                "{:.6e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{:.6e}",
                r.alpha, r.lambda, t.re, t.im, rr.re, rr.im, tk.re, tk.im, rk.re, rk.im, r.disc_raw, r.disc_phasemin
            );
        }
        out
    }

    /// `true` when the phase-minimized discrepancy strictly decreases along
    /// the rows.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].disc_phasemin < w[0].disc_phasemin)
    }
}

fn frobenius(a: &[[Complex64; 2]; 2]) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A - B‖_F` and `min_θ ‖A - e^{iθ} B‖_F`.
pub(crate) fn discrepancies(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> (f64, f64) {
    let inner: Complex64 = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| y.conj() * x).sum();
    // the optimal phase aligns B with A
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    let dist = |p: Complex64| {
        let d = [0, 1].map(|i| [0, 1].map(|j| a[i][j] - p * b[i][j]));
        frobenius(&d)
    };
    (dist(Complex64::new(1.0, 0.0)), dist(phase))
}

fn s_matrix(t: Complex64, r: Complex64, t_right: Complex64, r_right: Complex64) -> [[Complex64; 2]; 2] {
    [[t, r_right], [r, t_right]]
}

/// Mesh for coupling `α`: panels no longer than `4/α`, so the transverse
/// decay length of the guided mode stays resolved.
pub fn mesh_for_alpha(params: &MeshParams, alpha: f64) -> MeshParams {
    MeshParams { panel_length: params.panel_length.min(4.0 / alpha), ..*params }
}

/// Compares the deformed wire with `K` at momentum `k` for each `α`.
pub fn conjecture_test(geom: &DeformedLineGeometry, k: f64, alphas: &[f64], params: &MeshParams) -> Result<ConjectureReport> {
    let profile = CurvatureProfile::from_geometry(geom, PROFILE_SAMPLES)?;
    let one_d = scattering_1d(&profile, k)?;
    let rows = alphas.iter().map(|&a| conjecture_row(geom, &one_d, a, params)).collect::<Result<Vec<_>>>()?;
    Ok(ConjectureReport { k, one_d, rows })
}

/// One row of the comparison, given the 1D data at the same `k`.
pub fn conjecture_row(geom: &DeformedLineGeometry, one_d: &OneDScattering, alpha: f64, params: &MeshParams) -> Result<ConjectureRow> {
    let k = one_d.k;
    if !(k > 0.0 && k < 0.5 * alpha) {
        return Err(Error::Domain(format!("need 0 < k < α/2 for the scattering window, got k = {k}, α = {alpha}")));
    }
    let lambda = k * k - 0.25 * alpha * alpha;
    let energy = EnergySpec::new(alpha, lambda)?;
    let mesh = mesh_for_alpha(params, alpha);
    let [left, right] = amplitudes_both(geom, &energy, &mesh, AmplitudeConvention::default(), DEFAULT_CONDITION_CAP)?;
    let s_2d = s_matrix(left.t, left.r, right.t, right.r);
    let s_1d = s_matrix(one_d.t, one_d.r, one_d.t_right, one_d.r_right);
    let (disc_raw, disc_phasemin) = discrepancies(&s_2d, &s_1d);
    Ok(ConjectureRow { alpha, lambda, s_2d, s_1d, disc_raw, disc_phasemin, n: left.n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryFamily, GeometrySpec};

    #[test]
    fn flat_geometry_has_zero_discrepancy() {
        let g = build_geometry(&GeometrySpec::default()).unwrap();
        let rep = conjecture_test(&g, 1.0, &[5.0, 10.0], &MeshParams::default()).unwrap();
        for r in &rep.rows {
            assert_eq!(r.disc_raw, 0.0);
            assert_eq!(r.disc_phasemin, 0.0);
        }
    }

    #[test]
    fn phase_minimization() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let a = [[one, z], [z, one]];
        let ph = Complex64::from_polar(1.0, 0.7);
        let b = [[ph, z], [z, ph]];
        let (raw, min) = discrepancies(&a, &b);
        assert!(raw > 0.5 && min < 1e-15);
    }

    #[test]
    fn window_condition() {
        let g = build_geometry(&GeometryFamily::Bump { height: 0.3, width: 1.0 }.spec()).unwrap();
        assert!(matches!(conjecture_test(&g, 3.0, &[5.0], &MeshParams::default()), Err(Error::Domain(_))));
        let gap = build_geometry(&GeometryFamily::Gap { length: 1.0 }.spec()).unwrap();
        assert!(matches!(conjecture_test(&gap, 1.0, &[5.0], &MeshParams::default()), Err(Error::Geometry(_))));
    }
}
