//! The comparison operator `K = -d²/ds² - κ(s)²/4` on the line: its
//! scattering data, its ground state, and the comparison of its S-matrix
//! with the one of the deformed wire at strong coupling.

mod conjecture;
mod ground;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DeformedLineGeometry, GraphProfile, SegmentShape};

pub use conjecture::{conjecture_row, conjecture_test, mesh_for_alpha, ConjectureReport, ConjectureRow, CONJECTURE_CSV_HEADER, PROFILE_SAMPLES};
pub use ground::{ground_state_1d, GroundState1d};

/// Per-piece tolerance of the transfer-matrix integration.
const ODE_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 1 << 20;

/// A real potential supported on a bounded interval.
pub trait Potential1d {
    /// `[s0, s1]` outside of which the potential vanishes.
    fn support(&self) -> (f64, f64);
    fn value(&self, s: f64) -> f64;
    /// `true` when the potential is identically zero.
    fn is_zero(&self) -> bool;
    /// Points between which the potential is smooth, covering the support.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support();
        vec![a, b]
    }
}

/// Differentiability class of a curvature profile's source curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    C2,
    C4,
    Smooth,
}

/// Curvature `κ(s)` sampled uniformly on its support `[s0, s1]`, with arc
/// length measured from the midpoint of the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub s0: f64,
    pub s1: f64,
    pub samples: Vec<f64>,
    pub smoothness: Smoothness,
}

/// Stencil size of the local Lagrange interpolation of samples.
const STENCIL: usize = 6;

impl CurvatureProfile {
    /// Checks the grid and compact support.
    pub fn from_samples(s0: f64, s1: f64, samples: Vec<f64>, smoothness: Smoothness) -> Result<Self> {
        if !(s0.is_finite() && s1.is_finite() && s0 <= s1) {
            return Err(Error::Domain(format!("support [{s0}, {s1}] is not an interval")));
        }
        if samples.iter().any(|k| !k.is_finite()) {
            return Err(Error::Domain("curvature samples must be finite".into()));
        }
        if s1 > s0 && samples.len() < STENCIL {
            return Err(Error::Domain(format!("need at least {STENCIL} samples")));
        }
        let scale = samples.iter().fold(0.0f64, |m, k| m.max(k.abs())).max(1.0);
        if let (Some(a), Some(b)) = (samples.first(), samples.last()) {
            if a.abs() > 1e-8 * scale || b.abs() > 1e-8 * scale {
                return Err(Error::Domain("curvature must vanish at the support endpoints".into()));
            }
        }
        Ok(Self { s0, s1, samples, smoothness })
    }

    /// The straight line.
    pub fn flat() -> Self {
        Self { s0: 0.0, s1: 0.0, samples: vec![], smoothness: Smoothness::Smooth }
    }

    /// Curvature of the graph `x2 = f(x1)` over `[x_start, x_end]`, sampled
    /// at `n` arc-length points.
    pub fn from_graph(profile: &GraphProfile, x_start: f64, x_end: f64, n: usize) -> Result<Self> {
        let segment = crate::geometry::CurveSegment::new(SegmentShape::Graph { profile: *profile, x_start, x_end })?;
        let smoothness = match profile {
            GraphProfile::Bump { .. } => Smoothness::C4,
            GraphProfile::Gaussian { .. } => Smoothness::Smooth,
        };
        let len = segment.length();
        let n = n.max(STENCIL);
        let samples = (0..n)
            .map(|j| {
                let s = len * j as f64 / (n - 1) as f64;
                let x = segment.point_at(s).x1;
                let (_, fp, fpp) = profile.eval(x);
                fpp / (1.0 + fp * fp).powf(1.5)
            })
            .collect();
        Self::from_samples(-0.5 * len, 0.5 * len, samples, smoothness)
    }

    /// Profile of a single smooth graph deformation; the flat profile for the
    /// straight line.
    pub fn from_geometry(geom: &DeformedLineGeometry, n: usize) -> Result<Self> {
        if geom.is_straight() {
            return Ok(Self::flat());
        }
        let seg = geom
            .smooth_graph()
            .ok_or_else(|| Error::Geometry("curvature profile needs a single smooth graph deformation".into()))?;
        match *seg.shape() {
            SegmentShape::Graph { profile, x_start, x_end } => {
                if profile.support_half_width().is_none() {
                    return Err(Error::Geometry("curvature profile needs a compactly supported graph".into()));
                }
                Self::from_graph(&profile, x_start, x_end, n)
            }
            _ => unreachable!("smooth_graph returns graph segments"),
        }
    }

    /// Interpolated `κ(s)`; zero outside the support.
    pub fn kappa(&self, s: f64) -> f64 {
        let n = self.samples.len();
        if n == 0 || s <= self.s0 || s >= self.s1 {
            return 0.0;
        }
        let h = (self.s1 - self.s0) / (n - 1) as f64;
        let u = (s - self.s0) / h;
        let first = ((u.floor() as isize) - (STENCIL as isize / 2 - 1)).clamp(0, (n - STENCIL) as isize) as usize;
        let mut acc = 0.0;
        for j in first..first + STENCIL {
            let mut l = 1.0;
            for m in first..first + STENCIL {
                if m != j {
                    l *= (u - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += l * self.samples[j];
        }
        acc
    }
}

impl Potential1d for CurvatureProfile {
    fn support(&self) -> (f64, f64) {
        (self.s0, self.s1)
    }

    fn value(&self, s: f64) -> f64 {
        let k = self.kappa(s);
        -0.25 * k * k
    }

    fn is_zero(&self) -> bool {
        self.samples.iter().all(|&k| k == 0.0)
    }

    // the interpolation stencil changes at every sample
    fn breakpoints(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n).map(|j| self.s0 + (self.s1 - self.s0) * j as f64 / (n - 1) as f64).collect()
    }
}

/// `-V₀` on `[start, start + length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangularWell {
    pub depth: f64,
    pub start: f64,
    pub length: f64,
}

impl Potential1d for RectangularWell {
    fn support(&self) -> (f64, f64) {
        (self.start, self.start + self.length)
    }

    fn value(&self, s: f64) -> f64 {
        if s >= self.start && s <= self.start + self.length {
            -self.depth
        } else {
            0.0
        }
    }

    fn is_zero(&self) -> bool {
        self.depth == 0.0 || self.length == 0.0
    }
}

/// Scattering data of `K` at momentum `k`. `t`, `r` are for incidence from
/// the left, `t_right`, `r_right` from the right; plane waves are referenced
/// at `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneDScattering {
    pub k: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub t_right: Complex64,
    pub r_right: Complex64,
}

impl OneDScattering {
    pub fn unitarity_defect(&self) -> f64 {
        (self.t.norm_sqr() + self.r.norm_sqr() - 1.0).abs()
    }
}

type Mat2 = [[f64; 2]; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// One fourth-order Magnus step for `(ψ, ψ')' = [[0, 1], [q, 0]] (ψ, ψ')`
/// over `[s, s + h]`, with the exponential of the traceless `Ω` in closed
/// form.
fn magnus_step<Q: Fn(f64) -> f64>(q: &Q, s: f64, h: f64) -> Mat2 {
    let off = 3f64.sqrt() / 6.0;
    let (q1, q2) = (q(s + (0.5 - off) * h), q(s + (0.5 + off) * h));
    let d = 3f64.sqrt() / 12.0 * h * h * (q1 - q2);
    let omega = [[d, h], [0.5 * h * (q1 + q2), -d]];
    let delta2 = d * d + omega[0][1] * omega[1][0];
    let (c, sh) = if delta2.abs() < 1e-8 {
        (1.0 + 0.5 * delta2 + delta2 * delta2 / 24.0, 1.0 + delta2 / 6.0 + delta2 * delta2 / 120.0)
    } else if delta2 > 0.0 {
        let x = delta2.sqrt();
        (x.cosh(), x.sinh() / x)
    } else {
        let x = (-delta2).sqrt();
        (x.cos(), x.sin() / x)
    };
    [[c + sh * omega[0][0], sh * omega[0][1]], [sh * omega[1][0], c + sh * omega[1][1]]]
}

fn magnus<Q: Fn(f64) -> f64>(q: &Q, a: f64, b: f64, steps: usize) -> Mat2 {
    let h = (b - a) / steps as f64;
    (0..steps).fold([[1.0, 0.0], [0.0, 1.0]], |m, j| mul(&magnus_step(q, a + j as f64 * h, h), &m))
}

/// Transfer matrix over one smooth piece: Magnus steps, doubled until the
/// Richardson correction falls below `ODE_TOL`.
fn piece_transfer<Q: Fn(f64) -> f64>(q: &Q, a: f64, b: f64) -> Result<Mat2> {
    let mut steps = 1;
    let mut coarse = magnus(q, a, b, steps);
    while steps < MAX_STEPS {
        steps *= 2;
        let fine = magnus(q, a, b, steps);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 1.0;
        let mut out = fine;
        for i in 0..2 {
            for j in 0..2 {
                let corr = (fine[i][j] - coarse[i][j]) / 15.0;
                out[i][j] += corr;
                err = err.max(corr.abs());
                scale = scale.max(fine[i][j].abs());
            }
        }
        if err <= ODE_TOL * scale {
            return Ok(out);
        }
        coarse = fine;
    }
    Err(Error::Convergence(format!("transfer matrix on [{a}, {b}] not resolved with {MAX_STEPS} steps")))
}

/// Transfer matrix `[[u, v], [u', v']]` of `ψ'' = (V - k²)ψ` across the
/// support.
pub fn transfer_matrix<P: Potential1d + ?Sized>(potential: &P, k: f64) -> Result<Mat2> {
    let (a, b) = potential.support();
    if b <= a || potential.is_zero() {
        let (sn, cs) = (k * (b - a)).sin_cos();
        return Ok(if b <= a { [[1.0, 0.0], [0.0, 1.0]] } else { [[cs, sn / k], [-k * sn, cs]] });
    }
    let q = |s: f64| potential.value(s) - k * k;
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for w in potential.breakpoints().windows(2) {
        if w[1] > w[0] {
            m = mul(&piece_transfer(&q, w[0], w[1])?, &m);
        }
    }
    Ok(m)
}

/// Transmission and reflection of `-ψ'' + Vψ = k²ψ`.
pub fn scattering_potential<P: Potential1d + ?Sized>(potential: &P, k: f64) -> Result<OneDScattering> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("momentum must be positive, got {k}")));
    }
    let one = Complex64::new(1.0, 0.0);
    if potential.is_zero() {
        return Ok(OneDScattering { k, t: one, r: Complex64::default(), t_right: one, r_right: Complex64::default() });
    }
    let (a, b) = potential.support();
    let m = transfer_matrix(potential, k)?;
    let ik = Complex64::new(0.0, k);
    let apply = |z: [Complex64; 2]| [m[0][0] * z[0] + m[0][1] * z[1], m[1][0] * z[0] + m[1][1] * z[1]];
    let ea = (ik * a).exp();
    let eb = (ik * b).exp();
    let u = apply([ea, ik * ea]);
    let v = apply([1.0 / ea, -ik / ea]);
    let out_v = v[1] - ik * v[0];
    if out_v.norm() == 0.0 {
        return Err(Error::Convergence("degenerate transfer matrix".into()));
    }
    let r = -(u[1] - ik * u[0]) / out_v;
    let t = (u[0] + r * v[0]) / eb;
    let t_right = -2.0 * ik / (eb * out_v);
    let r_right = (v[0] * t_right - 1.0 / eb) / eb;
    Ok(OneDScattering { k, t, r, t_right, r_right })
}

/// Scattering data of `K` for a curvature profile.
pub fn scattering_1d(profile: &CurvatureProfile, k: f64) -> Result<OneDScattering> {
    scattering_potential(profile, k)
}
