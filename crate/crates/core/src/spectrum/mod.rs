//! Discrete eigenvalues below `-α²/4` as the energies where `Θ^{k_α(λ)}`
//! becomes singular.
//!
//! In the bound regime every kernel is real, so the assembled matrix is real
//! and `f(λ) = sign(det Θ) σ_min(Θ)` changes sign exactly where an eigenvalue
//! of `Θ` crosses zero. The scan brackets such sign changes and local minima
//! of `σ_min`; sign changes are refined by a safeguarded secant on `f`,
//! other minima by golden-section search on `σ_min`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bie::{assemble_theta, Factorization, ThetaSystem};
use crate::error::{Error, Result};
use crate::geometry::{DeformedLineGeometry, MeshParams, PanelMesh};
use crate::greens::{EnergySpec, Regime, THRESHOLD_GUARD};

const SIGMA_TOL: f64 = 1e-12;
const SIGMA_ITER: usize = 400;

/// Energies scanned for bound states. Samples are uniform in the decay rate
/// `(-α²/4 - λ)^{1/2}` so that weakly bound states are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl ScanRange {
    /// Default window for coupling `α`: binding energies from `10⁻⁵α²` up
    /// to `α²/4`.
    pub fn below_threshold(alpha: f64, points: usize) -> Self {
        let th = -0.25 * alpha * alpha;
        Self { lambda_min: th - 0.25 * alpha * alpha, lambda_max: th - 1e-5 * alpha * alpha, points }
    }

    /// Scan energies for coupling `alpha`.
    pub fn samples(&self, alpha: f64) -> Vec<f64> {
        let th = -0.25 * alpha * alpha;
        let a = (th - self.lambda_max).sqrt();
        let b = (th - self.lambda_min).sqrt();
        let n = self.points.max(2);
        (0..n)
            .map(|k| {
                let kp = a + (b - a) * k as f64 / (n - 1) as f64;
                th - kp * kp
            })
            .collect()
    }
}

/// A located eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundStateResult {
    pub lambda_star: f64,
    /// `λ* + α²/4 < 0`.
    pub binding: f64,
    pub sigma_min: f64,
    /// Right singular vector of the symmetrized matrix at `λ*`, scaled back
    /// to node values `q_j` and normalized in the discrete `L²(ν)` norm.
    pub null_vector: Vec<Complex64>,
    pub n: usize,
}

/// One evaluation of the singular-value profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub lambda: f64,
    pub sigma_min: f64,
    pub det_sign: f64,
}

impl ScanSample {
    fn signed(&self) -> f64 {
        self.det_sign * self.sigma_min
    }
}

fn bound_energy(alpha: f64, lambda: f64) -> Result<EnergySpec> {
    let e = EnergySpec::new(alpha, lambda)?;
    if e.regime() != Regime::Bound {
        return Err(Error::Regime(format!("bound states lie below -α²/4 = {}, got λ = {lambda}", e.threshold())));
    }
    Ok(e)
}

/// Singular-value profile of `Θ` on a fixed mesh.
pub struct SpectrumProblem {
    mesh: PanelMesh,
    alpha: f64,
}

impl SpectrumProblem {
    pub fn new(geom: &DeformedLineGeometry, alpha: f64, params: &MeshParams) -> Result<Self> {
        if geom.is_straight() {
            return Err(Error::Geometry("no deformation, no discrete spectrum".into()));
        }
        let mesh = params.build(geom)?;
        Ok(Self { mesh, alpha })
    }

    pub fn mesh(&self) -> &PanelMesh {
        &self.mesh
    }

    fn factor(&self, lambda: f64) -> Result<(ThetaSystem, Factorization)> {
        let e = bound_energy(self.alpha, lambda)?;
        let system = assemble_theta(&self.mesh, &e)?;
        let f = Factorization::new(system.matrix());
        Ok((system, f))
    }

    pub fn sample(&self, lambda: f64) -> Result<ScanSample> {
        let (_, f) = self.factor(lambda)?;
        let (sigma_min, _) = f.smallest_singular(SIGMA_TOL, SIGMA_ITER);
        Ok(ScanSample { lambda, sigma_min, det_sign: f.det_sign_real() })
    }

    /// 1-norm condition estimate of `Θ` at `λ`.
    pub fn condition(&self, lambda: f64) -> Result<f64> {
        Ok(self.factor(lambda)?.1.condition_estimate())
    }

    fn result_at(&self, lambda: f64) -> Result<BoundStateResult> {
        let (system, f) = self.factor(lambda)?;
        let (sigma_min, v) = f.smallest_singular(SIGMA_TOL, SIGMA_ITER);
        let null_vector = v.iter().zip(system.sqrt_weights()).map(|(z, s)| z / *s).collect();
        Ok(BoundStateResult {
            lambda_star: lambda,
            binding: lambda + 0.25 * self.alpha * self.alpha,
            sigma_min,
            null_vector,
            n: system.len(),
        })
    }

    /// Secant with Illinois modification on a bracketing pair.
    fn refine_sign_change(&self, mut a: ScanSample, mut b: ScanSample, tol: f64) -> Result<f64> {
        let mut side = 0i8;
        for _ in 0..100 {
            let (fa, fb) = (a.signed(), b.signed());
            let width = (b.lambda - a.lambda).abs();
            if width <= tol * b.lambda.abs() {
                break;
            }
            let mut x = b.lambda - fb * (b.lambda - a.lambda) / (fb - fa);
            let (lo, hi) = (a.lambda.min(b.lambda), a.lambda.max(b.lambda));
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let c = self.sample(x)?;
            if c.signed() == 0.0 {
                return Ok(x);
            }
            if c.signed().signum() == fb.signum() {
                b = c;
                if side == 1 {
                    a.sigma_min *= 0.5;
                }
                side = 1;
            } else {
                a = b;
                b = c;
                side = -1;
            }
        }
        Ok(if b.sigma_min <= a.sigma_min { b.lambda } else { a.lambda })
    }

    fn golden_section(&self, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = self.sample(x1)?.sigma_min;
        let mut f2 = self.sample(x2)?.sigma_min;
        while (hi - lo).abs() > tol * lo.abs().max(hi.abs()) {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = self.sample(x1)?.sigma_min;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = self.sample(x2)?.sigma_min;
            }
        }
        Ok(if f1 < f2 { x1 } else { x2 })
    }

    /// Scans `range` and refines every candidate. Returns the scan profile
    /// and the accepted bound states, ordered by energy.
    pub fn find(&self, range: &ScanRange, detect: f64) -> Result<(Vec<ScanSample>, Vec<BoundStateResult>)> {
        let scan = range.samples(self.alpha).iter().map(|&l| self.sample(l)).collect::<Result<Vec<_>>>()?;
        self.refine(scan, detect)
    }

    /// Refines candidates of a precomputed scan (see [`find`](Self::find)).
    pub fn refine(&self, mut scan: Vec<ScanSample>, detect: f64) -> Result<(Vec<ScanSample>, Vec<BoundStateResult>)> {
        scan.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let tol = 1e-12;
        let mut found: Vec<f64> = Vec::new();
        for w in scan.windows(2) {
            if w[0].det_sign != w[1].det_sign {
                found.push(self.refine_sign_change(w[0], w[1], tol)?);
            }
        }
        for w in scan.windows(3) {
            let interior = w[1].sigma_min < w[0].sigma_min && w[1].sigma_min < w[2].sigma_min;
            let bracketed = w[0].det_sign != w[1].det_sign || w[1].det_sign != w[2].det_sign;
            if interior && !bracketed {
                found.push(self.golden_section(w[0].lambda, w[2].lambda, tol)?);
            }
        }
        let mut states = Vec::new();
        for l in found {
            let r = self.result_at(l)?;
            if r.sigma_min <= detect {
                states.push(r);
            }
        }
        states.sort_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star));
        Ok((scan, states))
    }
}

/// Smallest singular value of the symmetrized `Θ` at `λ < -α²/4`.
pub fn smallest_singular(geom: &DeformedLineGeometry, alpha: f64, lambda: f64, params: &MeshParams) -> Result<f64> {
    bound_energy(alpha, lambda)?;
    Ok(SpectrumProblem::new(geom, alpha, params)?.sample(lambda)?.sigma_min)
}

/// Bound states in `range`, detection threshold `10⁻⁶ α`. A straight wire
/// has none.
pub fn find_bound_states(
    geom: &DeformedLineGeometry,
    alpha: f64,
    range: &ScanRange,
    params: &MeshParams,
) -> Result<Vec<BoundStateResult>> {
    if !(range.lambda_min < range.lambda_max) {
        return Err(Error::Domain("empty scan range".into()));
    }
    let guard = -0.25 * alpha * alpha - THRESHOLD_GUARD * alpha * alpha;
    if range.lambda_max >= guard {
        return Err(Error::Threshold {
            lambda: range.lambda_max,
            detail: "scan range must lie below the guided-mode threshold".into(),
        });
    }
    if geom.is_straight() {
        return Ok(vec![]);
    }
    let problem = SpectrumProblem::new(geom, alpha, params)?;
    Ok(problem.find(range, 1e-6 * alpha)?.1)
}
