//! Run configuration: TOML schema, defaults table and validation.
//!
//! ```toml
//! alpha = 5.0
//!
//! [geometry]              # omitted: straight line
//! family = "bump"         # or `file = "geom.toml"`, or an inline
//! height = 0.5            # `removed_intervals` / `[[geometry.segments]]`
//! width = 1.0
//!
//! [mesh]
//! panel_length = 0.1
//!
//! [scatter]
//! lambda_min = -6.0
//! lambda_max = -2.0
//! count = 16
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use leakywire::bie::Direction;
use leakywire::geometry::{build_geometry, DeformedLineGeometry, GeometryFamily, GeometrySpec, MeshParams};
use leakywire::greens::THRESHOLD_GUARD;
use leakywire::scattering::{AmplitudeConvention, GridSpec};
use leakywire::spectrum::ScanRange;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Every default used by the CLI. Energies are given relative to the
/// coupling so that one table serves all `α`.
#[derive(Debug, Clone, Serialize)]
pub struct Defaults {
    pub mesh: MeshParams,
    pub tolerances: Tolerances,
    /// Scatter sweep: `k_α` range as fractions of `α/2`.
    pub scatter_k_fraction: [f64; 2],
    pub scatter_count: usize,
    pub direction: Direction,
    pub convention: AmplitudeConvention,
    /// Field map energy: `k_α` as a fraction of `α/2`.
    pub field_k_fraction: f64,
    /// Field grid reach beyond the deformation, in units of `1/α`.
    pub field_reach: f64,
    pub field_n1: usize,
    pub field_n2: usize,
    /// Far-field probe distance beyond the deformation, in units of `1/α`.
    pub probe_distance: f64,
    /// Spectrum scan: binding energies `-(λ + α²/4)` as fractions of `α²`.
    pub spectrum_binding_fraction: [f64; 2],
    pub spectrum_points: usize,
    pub conjecture_k: f64,
    pub conjecture_alphas: Vec<f64>,
    /// Minimum distance of any energy from `-α²/4`, relative to `α²`.
    pub threshold_guard: f64,
}

pub fn defaults() -> Defaults {
    Defaults {
        mesh: MeshParams::default(),
        tolerances: Tolerances::default(),
        scatter_k_fraction: [0.05, 0.95],
        scatter_count: 16,
        direction: Direction::LeftIncoming,
        convention: AmplitudeConvention::default(),
        field_k_fraction: 0.5,
        field_reach: 40.0,
        field_n1: 161,
        field_n2: 41,
        probe_distance: 30.0,
        spectrum_binding_fraction: [1e-5, 0.25],
        spectrum_points: 64,
        conjecture_k: 1.0,
        conjecture_alphas: vec![5.0, 10.0, 20.0, 40.0],
        threshold_guard: THRESHOLD_GUARD,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted condition estimate of the discretized system.
    pub condition_cap: f64,
    /// Bound-state detection threshold on `σ_min`, relative to `α`.
    pub detect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { condition_cap: leakywire::bie::DEFAULT_CONDITION_CAP, detect: 1e-6 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub count: Option<usize>,
    pub direction: Option<Direction>,
    pub convention: Option<AmplitudeConvention>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub lambda: Option<f64>,
    pub direction: Option<Direction>,
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjectureConfig {
    pub k: Option<f64>,
    pub alphas: Option<Vec<f64>>,
}

/// Config file as written by the user.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: Option<f64>,
    geometry: Option<toml::Table>,
    #[serde(default)]
    mesh: MeshParams,
    #[serde(default)]
    scatter: ScatterConfig,
    #[serde(default)]
    field: FieldConfig,
    #[serde(default)]
    spectrum: SpectrumConfig,
    #[serde(default)]
    conjecture: ConjectureConfig,
    #[serde(default)]
    tolerances: Tolerances,
}

/// Parsed configuration with the geometry resolved to a spec.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub geometry: GeometrySpec,
    pub mesh: MeshParams,
    pub scatter: ScatterConfig,
    pub field: FieldConfig,
    pub spectrum: SpectrumConfig,
    pub conjecture: ConjectureConfig,
    pub tolerances: Tolerances,
}

/// Error in the configuration (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("invalid config: {0}")]
pub struct ConfigError(pub String);

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn resolve_geometry(table: Option<toml::Table>, base: &Path) -> anyhow::Result<GeometrySpec> {
    let Some(table) = table else {
        return Ok(GeometrySpec::default());
    };
    if table.contains_key("family") {
        let fam: GeometryFamily = toml::Value::Table(table).try_into().map_err(|e| invalid(format!("geometry: {e}")))?;
        return Ok(fam.spec());
    }
    if let Some(file) = table.get("file") {
        if table.len() > 1 {
            return Err(invalid("geometry: `file` cannot be combined with other geometry fields"));
        }
        let path = file.as_str().ok_or_else(|| invalid("geometry.file: expected a path string"))?;
        let path: PathBuf = base.join(path);
        let text = std::fs::read_to_string(&path).map_err(|e| invalid(format!("geometry.file {}: {e}", path.display())))?;
        return toml::from_str(&text).map_err(|e| invalid(format!("geometry.file {}: {e}", path.display())));
    }
    toml::Value::Table(table).try_into().map_err(|e| invalid(format!("geometry: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        let geometry = resolve_geometry(raw.geometry, base)?;
        let cfg = Self {
            alpha: raw.alpha,
            geometry,
            mesh: raw.mesh,
            scatter: raw.scatter,
            field: raw.field,
            spectrum: raw.spectrum,
            conjecture: raw.conjecture,
            tolerances: raw.tolerances,
        };
        cfg.check_common()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(|e| invalid(format!("{e:#}")))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// SHA-256 of the resolved configuration (defaults and file geometry
    /// included), hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn check_common(&self) -> anyhow::Result<()> {
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(invalid(format!("alpha: must be a positive number, got {a}")));
            }
        }
        let m = &self.mesh;
        if m.nodes_per_panel < 2 {
            return Err(invalid("mesh.nodes_per_panel: need at least 2"));
        }
        if !(m.panel_length.is_finite() && m.panel_length > 0.0) {
            return Err(invalid("mesh.panel_length: must be positive"));
        }
        let t = &self.tolerances;
        if !(t.condition_cap > 1.0) {
            return Err(invalid("tolerances.condition_cap: must exceed 1"));
        }
        if !(t.detect > 0.0) {
            return Err(invalid("tolerances.detect: must be positive"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> anyhow::Result<f64> {
        self.alpha.ok_or_else(|| invalid("alpha: required for this task"))
    }

    pub fn build_geometry(&self) -> anyhow::Result<DeformedLineGeometry> {
        build_geometry(&self.geometry).map_err(|e| invalid(format!("geometry: {e}")))
    }

    /// Sweep energies, all inside the scattering window.
    pub fn scatter_lambdas(&self) -> anyhow::Result<Vec<f64>> {
        let d = defaults();
        let alpha = self.alpha()?;
        let s = &self.scatter;
        let from_k = |f: f64| (0.5 * f * alpha).powi(2) - 0.25 * alpha * alpha;
        let lo = s.lambda_min.unwrap_or(from_k(d.scatter_k_fraction[0]));
        let hi = s.lambda_max.unwrap_or(from_k(d.scatter_k_fraction[1]));
        let count = s.count.unwrap_or(d.scatter_count);
        if count == 0 {
            return Err(invalid("scatter.count: must be at least 1"));
        }
        let th = -0.25 * alpha * alpha;
        for (name, v) in [("scatter.lambda_min", lo), ("scatter.lambda_max", hi)] {
            if !(v > th && v < 0.0) {
                return Err(invalid(format!("{name}: {v} lies outside the scattering window ({th}, 0)")));
            }
        }
        if lo > hi {
            return Err(invalid("scatter.lambda_min: exceeds scatter.lambda_max"));
        }
        Ok(if count == 1 {
            vec![lo]
        } else {
            (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
        })
    }

    pub fn field_lambda(&self) -> anyhow::Result<f64> {
        let alpha = self.alpha()?;
        let th = -0.25 * alpha * alpha;
        let lambda = self.field.lambda.unwrap_or((0.5 * defaults().field_k_fraction * alpha).powi(2) + th);
        if !(lambda > th && lambda < 0.0) {
            return Err(invalid(format!("field.lambda: {lambda} lies outside the scattering window ({th}, 0)")));
        }
        Ok(lambda)
    }

    /// Field grid; the default reaches far enough for the asymptote check
    /// and contains the line `x2 = 0`.
    pub fn field_grid(&self, geom: &DeformedLineGeometry) -> anyhow::Result<GridSpec> {
        if let Some(g) = self.field.grid {
            if g.n1 == 0 || g.n2 == 0 || !(g.x1_min <= g.x1_max && g.x2_min <= g.x2_max) {
                return Err(invalid("field.grid: empty grid"));
            }
            return Ok(g);
        }
        let d = defaults();
        let alpha = self.alpha()?;
        let reach = d.field_reach / alpha;
        let (lo, hi, top) = geom
            .bounding_box()
            .map_or((0.0, 0.0, 0.0), |b| (b.min.x1, b.max.x1, b.min.x2.abs().max(b.max.x2.abs())));
        let h = top + 10.0 / alpha;
        Ok(GridSpec { x1_min: lo - reach, x1_max: hi + reach, n1: d.field_n1, x2_min: -h, x2_max: h, n2: d.field_n2 })
    }

    pub fn scan_range(&self) -> anyhow::Result<ScanRange> {
        let d = defaults();
        let alpha = self.alpha()?;
        let th = -0.25 * alpha * alpha;
        let s = &self.spectrum;
        let range = ScanRange {
            lambda_min: s.lambda_min.unwrap_or(th - d.spectrum_binding_fraction[1] * alpha * alpha),
            lambda_max: s.lambda_max.unwrap_or(th - d.spectrum_binding_fraction[0] * alpha * alpha),
            points: s.points.unwrap_or(d.spectrum_points),
        };
        let guard = th - d.threshold_guard * alpha * alpha;
        if !(range.lambda_max < guard) {
            return Err(invalid(format!("spectrum.lambda_max: {} must lie below -α²/4 = {th}", range.lambda_max)));
        }
        if !(range.lambda_min < range.lambda_max) {
            return Err(invalid("spectrum.lambda_min: must be below spectrum.lambda_max"));
        }
        if range.points < 3 {
            return Err(invalid("spectrum.points: need at least 3"));
        }
        Ok(range)
    }

    pub fn conjecture_params(&self) -> anyhow::Result<(f64, Vec<f64>)> {
        let d = defaults();
        let k = self.conjecture.k.unwrap_or(d.conjecture_k);
        let alphas = self.conjecture.alphas.clone().unwrap_or(d.conjecture_alphas);
        if !(k > 0.0) {
            return Err(invalid("conjecture.k: must be positive"));
        }
        if alphas.is_empty() {
            return Err(invalid("conjecture.alphas: empty list"));
        }
        if let Some(a) = alphas.iter().find(|&&a| !(a > 2.0 * k)) {
            return Err(invalid(format!("conjecture.alphas: {a} leaves no scattering window at k = {k} (need α > 2k)")));
        }
        Ok((k, alphas))
    }
}

/// The defaults table rendered as TOML.
pub fn defaults_toml() -> String {
    toml::to_string_pretty(&defaults()).unwrap_or_else(|e| format!("# {}", anyhow!(e)))
}
