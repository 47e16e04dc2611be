//! Transmission and reflection of the guided mode, field maps and the
//! diagnostics that tie the two together.
//!
//! With `q = Θ⁻¹ J_Λ φ` for the incoming mode `φ` (`ω` from the left, `ω̄`
//! from the right), the field is `ψ = φ + Σ_j w_j G_Σ(·, y_j) q_j` and
//!
//! ```text
//! T = 1 + s_α (q, φ)_h,    R = s_α (q, φ̄)_h,
//! ```
//!
//! with the sesquilinear `(a, b)_h = Σ_j w_j a_j conj(b_j)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bie::{
    assemble_theta, omega, solve_charge, solve_charge_capped, solve_with, ChargeVector, Direction, Factorization, ThetaSystem,
    DEFAULT_CONDITION_CAP,
};
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, DeformedLineGeometry, MeshParams, Point2};
use crate::greens::{free_green_real, s_alpha, sigma_green, CorrectionTable, EnergySpec, KernelPoint, Regime};

/// Absolute tolerance of the `ξ` table used for field maps.
const FIELD_TABLE_TOL: f64 = 1e-11;

/// How the pairing `(q, φ)_h` treats its second argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeConvention {
    /// `Σ w q conj(φ)`. Exactly unitary on the discrete level; the default.
    #[default]
    Sesquilinear,
    /// `Σ w q φ`. Kept for comparison only.
    Bilinear,
}

/// Amplitudes for one energy and incidence direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringAmplitudes {
    pub lambda: f64,
    pub alpha: f64,
    pub k_alpha: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub unitarity_defect: f64,
    /// Mesh size.
    pub n: usize,
    pub direction: Direction,
    pub convention: AmplitudeConvention,
}

/// Column header of sweep CSV files.
pub const SWEEP_CSV_HEADER: &str = "lambda,k_alpha,re_T,im_T,re_R,im_R,absT2,absR2,defect,N";

impl ScatteringAmplitudes {
    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{}",
            self.lambda,
            self.k_alpha,
            self.t.re,
            self.t.im,
            self.r.re,
            self.r.im,
            self.t.norm_sqr(),
            self.r.norm_sqr(),
            self.unitarity_defect,
            self.n
        )
    }
}

/// `| |T|² + |R|² - 1 |`.
pub fn unitarity_defect(t: Complex64, r: Complex64) -> f64 {
    (t.norm_sqr() + r.norm_sqr() - 1.0).abs()
}

/// Everything a scattering solve produces.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub system: ThetaSystem,
    pub charge: ChargeVector,
    pub amplitudes: ScatteringAmplitudes,
    bbox: Option<BoundingBox>,
}

fn require_scattering(energy: &EnergySpec) -> Result<()> {
    if energy.regime() != Regime::Scattering {
        return Err(Error::Regime(format!(
            "scattering needs -α²/4 < λ < 0, got λ = {} with α = {}",
            energy.lambda, energy.alpha
        )));
    }
    Ok(())
}

/// Amplitudes from a solved system.
pub fn amplitudes_from(system: &ThetaSystem, charge: &ChargeVector, convention: AmplitudeConvention) -> ScatteringAmplitudes {
    let energy = system.energy();
    let direction = system.direction();
    let s = s_alpha(energy);
    let mut same = Complex64::new(0.0, 0.0);
    let mut other = Complex64::new(0.0, 0.0);
    for (node, q) in system.nodes().iter().zip(&charge.coefficients) {
        let phi = omega(energy, node.point, direction);
        let wq = q * node.weight;
        match convention {
            AmplitudeConvention::Sesquilinear => {
                same += wq * phi.conj();
                other += wq * phi;
            }
            AmplitudeConvention::Bilinear => {
                same += wq * phi;
                other += wq * phi.conj();
            }
        }
    }
    let t = 1.0 + s * same;
    let r = s * other;
    ScatteringAmplitudes {
        lambda: energy.lambda,
        alpha: energy.alpha,
        k_alpha: energy.k_alpha().re,
        t,
        r,
        unitarity_defect: unitarity_defect(t, r),
        n: system.len(),
        direction,
        convention,
    }
}

/// Assembles, solves and extracts amplitudes for one incidence direction.
pub fn solve_scattering(
    geom: &DeformedLineGeometry,
    energy: &EnergySpec,
    params: &MeshParams,
    direction: Direction,
    convention: AmplitudeConvention,
) -> Result<ScatteringSolution> {
    solve_scattering_capped(geom, energy, params, direction, convention, DEFAULT_CONDITION_CAP)
}

/// [`solve_scattering`] with an explicit condition-number cap.
pub fn solve_scattering_capped(
    geom: &DeformedLineGeometry,
    energy: &EnergySpec,
    params: &MeshParams,
    direction: Direction,
    convention: AmplitudeConvention,
    cap: f64,
) -> Result<ScatteringSolution> {
    require_scattering(energy)?;
    let mesh = params.build(geom)?;
    let system = assemble_theta(&mesh, energy)?.with_direction(direction);
    let charge = solve_charge_capped(&system, cap)?;
    let amplitudes = amplitudes_from(&system, &charge, convention);
    Ok(ScatteringSolution { system, charge, amplitudes, bbox: geom.bounding_box() })
}

/// Amplitudes for incidence from the left and from the right, sharing one
/// factorization.
pub fn amplitudes_both(
    geom: &DeformedLineGeometry,
    energy: &EnergySpec,
    params: &MeshParams,
    convention: AmplitudeConvention,
    cap: f64,
) -> Result<[ScatteringAmplitudes; 2]> {
    require_scattering(energy)?;
    let mesh = params.build(geom)?;
    let system = assemble_theta(&mesh, energy)?.with_direction(Direction::LeftIncoming);
    if system.is_empty() {
        let left = amplitudes_from(&system, &solve_charge(&system)?, convention);
        let system = system.with_direction(Direction::RightIncoming);
        return Ok([left, amplitudes_from(&system, &solve_charge(&system)?, convention)]);
    }
    let f = Factorization::new(system.matrix());
    let q = solve_with(&system, &f, system.rhs(), cap)?;
    let left = amplitudes_from(&system, &q, convention);
    let system = system.with_direction(Direction::RightIncoming);
    let q = solve_with(&system, &f, system.rhs(), cap)?;
    Ok([left, amplitudes_from(&system, &q, convention)])
}

/// Left-incidence amplitudes with the default convention.
pub fn amplitudes(geom: &DeformedLineGeometry, energy: &EnergySpec, params: &MeshParams) -> Result<ScatteringAmplitudes> {
    Ok(solve_scattering(geom, energy, params, Direction::LeftIncoming, AmplitudeConvention::default())?.amplitudes)
}

/// Rectangular evaluation grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x1_min: f64,
    pub x1_max: f64,
    pub n1: usize,
    pub x2_min: f64,
    pub x2_max: f64,
    pub n2: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Point2> {
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![0.5 * (lo + hi)],
                _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
            }
        };
        let xs = axis(self.x1_min, self.x1_max, self.n1);
        let ys = axis(self.x2_min, self.x2_max, self.n2);
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| Point2::new(x, y))).collect()
    }
}

/// One field sample; `psi` is `None` where the point is too close to `Λ`
/// for the plain quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: Point2,
    pub psi: Option<Complex64>,
}

/// Samples of the generalized eigenfunction.
#[derive(Debug, Clone, Serialize)]
pub struct FieldMap {
    pub samples: Vec<FieldSample>,
    pub direction: Direction,
    pub energy: EnergySpec,
    #[serde(skip)]
    bbox: Option<BoundingBox>,
}

/// Field CSV header.
pub const FIELD_CSV_HEADER: &str = "x1,x2,re_psi,im_psi";

impl FieldMap {
    /// Number of points skipped near `Λ`.
    pub fn skipped(&self) -> usize {
        self.samples.iter().filter(|s| s.psi.is_none()).count()
    }

    /// CSV body (no header); skipped points are written as `nan`.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let (re, im) = s.psi.map_or((f64::NAN, f64::NAN), |z| (z.re, z.im));
            let _ = writeln!(out, "{:.10e},{:.10e},{:.12e},{:.12e}", s.point.x1, s.point.x2, re, im);
        }
        out
    }
}

fn field_with<G>(solution: &ScatteringSolution, x: Point2, green: G) -> Result<Option<Complex64>>
where
    G: Fn(Point2, Point2) -> Result<Complex64>,
{
    let system = &solution.system;
    let mut psi = omega(system.energy(), x, system.direction());
    for ((node, q), len) in system.nodes().iter().zip(&solution.charge.coefficients).zip(system.panel_lengths()) {
        if x.dist(node.point) < 0.5 * len {
            return Ok(None);
        }
        psi += green(x, node.point)? * (q * node.weight);
    }
    Ok(Some(psi))
}

/// `ψ(x) = φ(x) + Σ_j w_j G_Σ(x, y_j) q_j` at one point, or `None` within
/// half a panel length of a node.
pub fn field_value(solution: &ScatteringSolution, x: Point2) -> Result<Option<Complex64>> {
    let energy = solution.system.energy();
    field_with(solution, x, |x, y| sigma_green(energy, &KernelPoint::between(x, y)))
}

/// Field on a grid, with `ξ` tabulated once over the grid's extent.
pub fn field_map(solution: &ScatteringSolution, grid: &GridSpec) -> Result<FieldMap> {
    let energy = solution.system.energy();
    let points = grid.points();
    let nodes = solution.system.nodes();
    let (mut lo, mut hi, mut cx, mut cy) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for p in &points {
        (lo, hi, cx) = (lo.min(p.x1), hi.max(p.x1), cx.max(p.x2.abs()));
    }
    for n in nodes {
        (lo, hi, cy) = (lo.min(n.point.x1), hi.max(n.point.x1), cy.max(n.point.x2.abs()));
    }
    let table = (!nodes.is_empty()).then(|| CorrectionTable::new(energy, hi - lo, cx + cy, FIELD_TABLE_TOL));
    let kappa = energy.kappa();
    let green = |x: Point2, y: Point2| -> Result<Complex64> {
        let table = table.as_ref().expect("nodes present");
        Ok(table.eval(x.x1 - y.x1, x.x2.abs() + y.x2.abs()) + free_green_real(kappa, x.dist(y)))
    };
    let samples = points
        .into_iter()
        .map(|p| Ok(FieldSample { point: p, psi: field_with(solution, p, green)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldMap {
        samples,
        direction: solution.system.direction(),
        energy: *solution.system.energy(),
        bbox: solution.bbox,
    })
}

/// Largest deviation of `ψ` from the two one-sided guided-mode asymptotics,
/// relative to the unit incoming amplitude, over the samples on `x2 = 0`
/// lying in the outer 20% of the grid on each side.
///
/// The grid must reach `30/α` beyond the bounding box on both sides.
pub fn asymptote_residual(field: &FieldMap, amps: &ScatteringAmplitudes) -> Result<f64> {
    let energy = &field.energy;
    let probe: Vec<(Point2, Complex64)> =
        field.samples.iter().filter(|s| s.point.x2 == 0.0).filter_map(|s| s.psi.map(|z| (s.point, z))).collect();
    if probe.is_empty() {
        return Err(Error::Domain("field grid has no samples on the line x2 = 0".into()));
    }
    let lo = probe.iter().map(|p| p.0.x1).fold(f64::INFINITY, f64::min);
    let hi = probe.iter().map(|p| p.0.x1).fold(f64::NEG_INFINITY, f64::max);
    let (box_lo, box_hi) = field.bbox.map_or((0.0, 0.0), |b| (b.min.x1, b.max.x1));
    let reach = 30.0 / energy.alpha;
    if lo > box_lo - reach || hi < box_hi + reach {
        return Err(Error::Domain(format!(
            "field grid [{lo}, {hi}] must extend {reach} beyond the deformation [{box_lo}, {box_hi}]"
        )));
    }
    let band = 0.2 * (hi - lo);
    let forward = |x: Point2| omega(energy, x, field.direction);
    let backward = |x: Point2| forward(x).conj();
    // downstream carries T·φ, upstream φ + R·φ̄
    let down_is_right = field.direction == Direction::LeftIncoming;
    let mut worst: f64 = 0.0;
    for (x, psi) in probe {
        let right = x.x1 >= hi - band;
        let left = x.x1 <= lo + band;
        if !(right || left) {
            continue;
        }
        let downstream = right == down_is_right;
        let model = if downstream { amps.t * forward(x) } else { forward(x) + amps.r * backward(x) };
        worst = worst.max((psi - model).norm());
    }
    Ok(worst)
}

/// `T` and `R` read off the field at `(±x, 0)`, downstream and upstream of
/// the deformation.
pub fn field_amplitudes(solution: &ScatteringSolution, x: f64) -> Result<(Complex64, Complex64)> {
    let energy = solution.system.energy();
    let dir = solution.system.direction();
    let (down, up) = match dir {
        Direction::LeftIncoming => (Point2::new(x, 0.0), Point2::new(-x, 0.0)),
        Direction::RightIncoming => (Point2::new(-x, 0.0), Point2::new(x, 0.0)),
    };
    let at = |p: Point2| -> Result<Complex64> {
        field_value(solution, p)?.ok_or_else(|| Error::Domain(format!("probe point {p:?} lies on the deformation")))
    };
    let t = at(down)? / omega(energy, down, dir);
    let r = (at(up)? - omega(energy, up, dir)) / omega(energy, up, dir).conj();
    Ok((t, r))
}
