//! Task runners. Each writes CSV files led by a `# config_sha256=` line
//! and a JSON summary into the output directory.

use std::path::{Path, PathBuf};

use anyhow::Context;
use leakywire::comparison1d::{
    conjecture_row, scattering_1d, ConjectureReport, CurvatureProfile, CONJECTURE_CSV_HEADER, PROFILE_SAMPLES,
};
use leakywire::geometry::DeformedLineGeometry;
use leakywire::greens::{run_kernel_check, EnergySpec};
use leakywire::scattering::{
    asymptote_residual, field_amplitudes, field_map, solve_scattering_capped, ScatteringAmplitudes, FIELD_CSV_HEADER,
    SWEEP_CSV_HEADER,
};
use leakywire::spectrum::SpectrumProblem;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{defaults, RunConfig};

/// A numerical check that ran but did not pass (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct NumericalFailure(pub String);

pub struct Output {
    dir: PathBuf,
    hash: String,
    jobs: usize,
}

impl Output {
    pub fn new(dir: &Path, hash: String, jobs: usize) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), hash, jobs })
    }

    fn csv(&self, name: &str, header: &str, body: &str) -> anyhow::Result<()> {
        let text = format!("# config_sha256={}\n{header}\n{body}", self.hash);
        let path = self.dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    fn summary(&self, task: &str, cfg: &RunConfig, headline: Value) -> anyhow::Result<()> {
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "task": task,
            "config_sha256": self.hash,
            "tolerances": cfg.tolerances,
            "mesh": cfg.mesh,
            "headline": headline,
        });
        let path = self.dir.join(format!("{task}_summary.json"));
        let text = serde_json::to_string_pretty(&doc)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// Runs `f` on a pool of `jobs` threads.
    fn pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build()?;
        Ok(pool.install(f))
    }
}

pub fn scatter(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let alpha = cfg.alpha()?;
    let lambdas = cfg.scatter_lambdas()?;
    let geom = cfg.build_geometry()?;
    let d = defaults();
    let direction = cfg.scatter.direction.unwrap_or(d.direction);
    let convention = cfg.scatter.convention.unwrap_or(d.convention);
    let cap = cfg.tolerances.condition_cap;
    let rows: Vec<ScatteringAmplitudes> = out.pool(|| {
        lambdas
            .par_iter()
            .map(|&l| -> leakywire::Result<_> {
                let e = EnergySpec::new(alpha, l)?;
                Ok(solve_scattering_capped(&geom, &e, &cfg.mesh, direction, convention, cap)?.amplitudes)
            })
            .collect::<leakywire::Result<Vec<_>>>()
    })??;
    let body: String = rows.iter().map(|a| a.csv_row() + "\n").collect();
    out.csv("scatter.csv", SWEEP_CSV_HEADER, &body)?;
    let max_defect = rows.iter().map(|a| a.unitarity_defect).fold(0.0, f64::max);
    out.summary(
        "scatter",
        cfg,
        json!({
            "alpha": alpha,
            "direction": direction,
            "convention": convention,
            "count": rows.len(),
            "n": rows.first().map(|a| a.n),
            "max_unitarity_defect": max_defect,
        }),
    )
}

fn probe_distance(geom: &DeformedLineGeometry, alpha: f64) -> f64 {
    let edge = geom.bounding_box().map_or(0.0, |b| b.min.x1.abs().max(b.max.x1.abs()));
    edge + defaults().probe_distance / alpha
}

pub fn field(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let alpha = cfg.alpha()?;
    let lambda = cfg.field_lambda()?;
    let geom = cfg.build_geometry()?;
    let grid = cfg.field_grid(&geom)?;
    let d = defaults();
    let direction = cfg.field.direction.unwrap_or(d.direction);
    let e = EnergySpec::new(alpha, lambda)?;
    let sol = solve_scattering_capped(&geom, &e, &cfg.mesh, direction, d.convention, cfg.tolerances.condition_cap)?;
    let map = out.pool(|| field_map(&sol, &grid))??;
    out.csv("field.csv", FIELD_CSV_HEADER, &map.csv_rows())?;
    // the residual needs a grid that reaches the far field on both sides
    let residual = asymptote_residual(&map, &sol.amplitudes).ok();
    let (t_far, r_far) = field_amplitudes(&sol, probe_distance(&geom, alpha))?;
    let a = &sol.amplitudes;
    out.summary(
        "field",
        cfg,
        json!({
            "alpha": alpha,
            "lambda": lambda,
            "direction": direction,
            "grid": grid,
            "n": a.n,
            "t": a.t,
            "r": a.r,
            "unitarity_defect": a.unitarity_defect,
            "t_far_field": t_far,
            "r_far_field": r_far,
            "asymptote_residual": residual,
            "skipped_points": map.skipped(),
        }),
    )
}

pub fn spectrum(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let alpha = cfg.alpha()?;
    let range = cfg.scan_range()?;
    let geom = cfg.build_geometry()?;
    let detect = cfg.tolerances.detect * alpha;
    let (scan, states) = if geom.is_straight() {
        (Vec::new(), Vec::new())
    } else {
        let problem = SpectrumProblem::new(&geom, alpha, &cfg.mesh)?;
        let lambdas = range.samples(alpha);
        let scan = out.pool(|| lambdas.par_iter().map(|&l| problem.sample(l)).collect::<leakywire::Result<Vec<_>>>())??;
        problem.refine(scan, detect)?
    };
    let body: String = scan.iter().map(|s| format!("{:.12e},{:.12e}\n", s.lambda, s.sigma_min)).collect();
    out.csv("spectrum_scan.csv", "lambda,sigma_min", &body)?;
    let th = -0.25 * alpha * alpha;
    out.summary(
        "spectrum",
        cfg,
        json!({
            "alpha": alpha,
            "threshold": th,
            "scan_range": range,
            "detect": detect,
            "count": states.len(),
            "bound_states": states,
        }),
    )
}

pub fn conjecture(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let (k, alphas) = cfg.conjecture_params()?;
    let geom = cfg.build_geometry()?;
    let profile = CurvatureProfile::from_geometry(&geom, PROFILE_SAMPLES)?;
    let one_d = scattering_1d(&profile, k)?;
    let rows = out.pool(|| {
        alphas
            .par_iter()
            .map(|&a| conjecture_row(&geom, &one_d, a, &cfg.mesh))
            .collect::<leakywire::Result<Vec<_>>>()
    })??;
    let report = ConjectureReport { k, one_d, rows };
    out.csv("conjecture.csv", CONJECTURE_CSV_HEADER, &report.csv_rows())?;
    let disc: Vec<_> = report.rows.iter().map(|r| json!({"alpha": r.alpha, "raw": r.disc_raw, "phasemin": r.disc_phasemin, "n": r.n})).collect();
    out.summary(
        "conjecture",
        cfg,
        json!({
            "k": k,
            "t_k": report.one_d.t,
            "r_k": report.one_d.r,
            "discrepancy": disc,
            "strictly_decreasing": report.strictly_decreasing(),
        }),
    )
}

pub fn selftest(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let checks = run_kernel_check()?;
    let passed = checks.iter().all(|c| c.passed);
    out.summary("selftest", cfg, json!({ "passed": passed, "checks": checks }))?;
    for c in &checks {
        eprintln!("{} {:<40} {:.3e} (tol {:.1e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.observed, c.tolerance);
    }
    if passed {
        Ok(())
    } else {
        Err(NumericalFailure("kernel self-test failed".into()).into())
    }
}
