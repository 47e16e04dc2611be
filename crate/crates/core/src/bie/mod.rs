//! Nyström discretization of `Θ = -(α⁻¹ Ǐ + R_{Σ,νν})` on `Λ = Γ△Σ`.
//!
//! The matrix is stored in the symmetrized weighted-node form
//!
//! ```text
//! S_ij = -sign_i δ_ij / α - √w_i G_Σ(x_i, x_j) √w_j
//! ```
//!
//! acting on `v_j = √w_j q_j`, so that discrete `L²(ν)` norms are plain
//! Euclidean norms. Far pairs use the kernel value. Panels close to the
//! target use product weights on an adaptive subdivision, with singularity
//! subtraction for the logarithmic part `K0(κr)/(2π)`.

mod dense;
mod near;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use dense::Factorization;

use crate::error::{Error, Result};
use crate::geometry::{MeshNode, PanelMesh, Point2};
use crate::greens::{free_green_real, CorrectionTable, EnergySpec, Regime};
use near::{is_near, NearQuadrature};

/// Default cap on the condition estimate accepted by [`solve_charge`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;
/// Relative residual every accepted solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Direction of the incoming guided mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftIncoming,
    RightIncoming,
}

/// Which kernel terms enter the assembled matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMode {
    #[default]
    Full,
    /// Sign term only. Test mode: the solution is known entry-wise.
    DiagonalOnly,
}

/// The guided mode `ω(x) = e^{i k_α x1} e^{-α|x2|/2}`, or its conjugate for
/// right incidence.
pub fn omega(energy: &EnergySpec, x: Point2, direction: Direction) -> Complex64 {
    let k = energy.k_alpha();
    let phase = Complex64::i() * k * x.x1;
    let w = (phase - 0.5 * energy.alpha * x.x2.abs()).exp();
    match direction {
        Direction::LeftIncoming => w,
        Direction::RightIncoming => w.conj(),
    }
}

/// Node samples of `ω` (or `ω̄`) on the mesh.
pub fn embed_omega(mesh: &PanelMesh, energy: &EnergySpec, direction: Direction) -> Vec<Complex64> {
    mesh.nodes().iter().map(|n| omega(energy, n.point, direction)).collect()
}

/// Assembled discrete `Θ` with its right-hand side.
#[derive(Debug, Clone)]
pub struct ThetaSystem {
    matrix: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
    nodes: Vec<MeshNode>,
    sqrt_w: Vec<f64>,
    panel_len: Vec<f64>,
    energy: EnergySpec,
    direction: Direction,
}

impl ThetaSystem {
    /// Symmetrized matrix `S` (see the module docs).
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Scaled right-hand side `√w_j ω(x_j)`.
    pub fn rhs(&self) -> &DVector<Complex64> {
        &self.rhs
    }

    pub fn nodes(&self) -> &[MeshNode] {
        &self.nodes
    }

    pub fn energy(&self) -> &EnergySpec {
        &self.energy
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Square roots of the node weights.
    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }

    /// Length of the panel carrying each node.
    pub fn panel_lengths(&self) -> &[f64] {
        &self.panel_len
    }

    /// Same matrix, right-hand side for the other incidence direction.
    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.rhs = rhs_vector(&self.nodes, &self.sqrt_w, &self.energy, direction);
        self.direction = direction;
        self
    }

    /// Matrix multiplied by a scalar; used to test homogeneity.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.matrix *= Complex64::new(factor, 0.0);
        s
    }

    /// Largest `|S_ij - S_ji|` over pairs assembled from plain kernel values.
    /// Product-integrated near pairs are symmetric only up to quadrature error.
    pub fn far_asymmetry(&self, mesh: &PanelMesh) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let pi = &mesh.panels()[self.nodes[j].panel];
                let pj = &mesh.panels()[self.nodes[i].panel];
                if is_near(mesh, pi, self.nodes[i].point) || is_near(mesh, pj, self.nodes[j].point) {
                    continue;
                }
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst
    }
}

fn rhs_vector(nodes: &[MeshNode], sqrt_w: &[f64], energy: &EnergySpec, direction: Direction) -> DVector<Complex64> {
    if energy.regime() == Regime::Bound {
        return DVector::zeros(nodes.len());
    }
    DVector::from_iterator(nodes.len(), nodes.iter().zip(sqrt_w).map(|(n, s)| omega(energy, n.point, direction) * *s))
}

/// Assembles `Θ` at `k_α(λ)` with left incidence on the right-hand side.
/// In the bound regime the right-hand side is zero.
pub fn assemble_theta(mesh: &PanelMesh, energy: &EnergySpec) -> Result<ThetaSystem> {
    assemble_theta_with(mesh, energy, KernelMode::Full)
}

/// [`assemble_theta`] with a selectable kernel mode.
pub fn assemble_theta_with(mesh: &PanelMesh, energy: &EnergySpec, mode: KernelMode) -> Result<ThetaSystem> {
    let energy = EnergySpec::new(energy.alpha, energy.lambda)?;
    let nodes = mesh.nodes().to_vec();
    let n = nodes.len();
    for p in mesh.panels() {
        if p.length() <= 0.0 {
            return Err(Error::Mesh("degenerate panel".into()));
        }
    }
    let sqrt_w: Vec<f64> = nodes.iter().map(|nd| nd.weight.sqrt()).collect();
    let panel_len = nodes.iter().map(|nd| mesh.panels()[nd.panel].length()).collect();
    let alpha = energy.alpha;
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for (i, nd) in nodes.iter().enumerate() {
        matrix[(i, i)] = Complex64::new(-nd.sign.value() / alpha, 0.0);
    }
    if mode == KernelMode::Full && n > 0 {
        add_kernel(mesh, &energy, &nodes, &sqrt_w, &mut matrix);
    }
    let rhs = rhs_vector(&nodes, &sqrt_w, &energy, Direction::LeftIncoming);
    Ok(ThetaSystem { matrix, rhs, nodes, sqrt_w, panel_len, energy, direction: Direction::LeftIncoming })
}

/// Absolute tolerance (relative to `max(1, |ξ(0, 0)|)`) of the `ξ` table.
const TABLE_TOL: f64 = 1e-11;

/// Table of `ξ` covering every pair the assembly can request.
fn correction_table(mesh: &PanelMesh, energy: &EnergySpec) -> CorrectionTable {
    let margin = mesh.panels().iter().map(|p| p.length()).fold(0.0, f64::max);
    let (mut lo, mut hi, mut c) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for n in mesh.nodes() {
        lo = lo.min(n.point.x1);
        hi = hi.max(n.point.x1);
        c = c.max(n.point.x2.abs());
    }
    CorrectionTable::new(energy, hi - lo + 2.0 * margin, 2.0 * (c + margin), TABLE_TOL)
}

fn add_kernel(mesh: &PanelMesh, energy: &EnergySpec, nodes: &[MeshNode], sqrt_w: &[f64], m: &mut DMatrix<Complex64>) {
    let kappa = energy.kappa();
    let table = correction_table(mesh, energy);
    let xi = |x: Point2, y: Point2| table.eval(x.x1 - y.x1, x.x2.abs() + y.x2.abs());
    let near = NearQuadrature::new(mesh, kappa);
    for (i, node) in nodes.iter().enumerate() {
        let x = node.point;
        for (pk, panel) in mesh.panels().iter().enumerate() {
            if is_near(mesh, panel, x) {
                let on = (node.panel == pk).then_some(node.param);
                let w = near.weights(panel, x, on, |y| xi(x, y));
                for (j, wj) in panel.nodes.clone().zip(w) {
                    m[(i, j)] -= wj * (sqrt_w[i] / sqrt_w[j]);
                }
            } else {
                for j in panel.nodes.clone() {
                    let y = nodes[j].point;
                    let g = xi(x, y) + free_green_real(kappa, x.dist(y));
                    m[(i, j)] -= g * (sqrt_w[i] * sqrt_w[j]);
                }
            }
        }
    }
}

/// Solution of `Θ q = J_Λ ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeVector {
    /// Node values `q_j`.
    pub coefficients: Vec<Complex64>,
    /// `√w_j q_j`, the unknown of the symmetrized system.
    pub scaled: Vec<Complex64>,
    pub residual: f64,
    pub condition: f64,
}

impl ChargeVector {
    /// Discrete `L²(ν)` norm `(Σ w_j |q_j|²)^{1/2}`.
    pub fn h_norm(&self) -> f64 {
        self.scaled.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// 1-norm condition estimate of the assembled matrix.
pub fn condition_estimate(system: &ThetaSystem) -> f64 {
    Factorization::new(&system.matrix).condition_estimate()
}

/// Dense LU solve with the default condition cap.
pub fn solve_charge(system: &ThetaSystem) -> Result<ChargeVector> {
    solve_charge_capped(system, DEFAULT_CONDITION_CAP)
}

/// Dense LU solve; rejects matrices whose condition estimate exceeds `cap`.
pub fn solve_charge_capped(system: &ThetaSystem, cap: f64) -> Result<ChargeVector> {
    if system.is_empty() {
        return Ok(ChargeVector { coefficients: vec![], scaled: vec![], residual: 0.0, condition: 1.0 });
    }
    let f = Factorization::new(&system.matrix);
    solve_with(system, &f, &system.rhs, cap)
}

/// Solves with an existing factorization of `system.matrix()` and any
/// scaled right-hand side.
pub fn solve_with(system: &ThetaSystem, f: &Factorization, rhs: &DVector<Complex64>, cap: f64) -> Result<ChargeVector> {
    let condition = f.condition_estimate();
    if !(condition <= cap) {
        return Err(Error::IllConditioned { condition });
    }
    let mut v = f.solve(rhs).ok_or(Error::IllConditioned { condition })?;
    let scale = rhs.norm().max(f64::MIN_POSITIVE);
    let mut residual = (&system.matrix * &v - rhs).norm() / scale;
    if residual > RESIDUAL_TOL {
        // one step of iterative refinement
        let r = rhs - &system.matrix * &v;
        if let Some(dv) = f.solve(&r) {
            v += dv;
            residual = (&system.matrix * &v - rhs).norm() / scale;
        }
    }
    if rhs.norm() == 0.0 {
        residual = 0.0;
    }
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Convergence(format!(
            "LU residual {residual:e} above {RESIDUAL_TOL:e} (condition estimate {condition:e})"
        )));
    }
    let coefficients = v.iter().zip(&system.sqrt_w).map(|(z, s)| z / *s).collect();
    Ok(ChargeVector { coefficients, scaled: v.iter().cloned().collect(), residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, build_mesh, GeometryFamily, GeometrySpec, Sign};

    fn gap_mesh(panel: f64) -> PanelMesh {
        let g = build_geometry(&GeometryFamily::Gap { length: 1.0 }.spec()).unwrap();
        build_mesh(&g, 8, panel).unwrap()
    }

    #[test]
    fn omega_examples() {
        let e = EnergySpec::new(2.0, -0.5).unwrap();
        assert_eq!(omega(&e, Point2::new(0.0, 0.0), Direction::LeftIncoming), Complex64::new(1.0, 0.0));
        assert!((omega(&e, Point2::new(3.7, 0.0), Direction::LeftIncoming).norm() - 1.0).abs() < 1e-15);
        let v = omega(&e, Point2::new(0.0, -0.8), Direction::RightIncoming);
        assert!(v.im == 0.0 && (v.re - (-0.8f64).exp()).abs() < 1e-15);
        let x = Point2::new(1.3, 0.2);
        assert_eq!(omega(&e, x, Direction::RightIncoming), omega(&e, x, Direction::LeftIncoming).conj());
    }

    #[test]
    fn single_node_sign_structure() {
        let e = EnergySpec::new(5.0, -3.0).unwrap();
        let plus = build_mesh(&build_geometry(&GeometrySpec { removed_intervals: vec![[0.0, 1.0]], segments: vec![] }).unwrap(), 2, 10.0).unwrap();
        let s = assemble_theta_with(&plus, &e, KernelMode::DiagonalOnly).unwrap();
        assert!(s.nodes().iter().all(|n| n.sign == Sign::Plus));
        assert!((s.matrix()[(0, 0)].re + 0.2).abs() < 1e-15);
        let stub = build_mesh(&build_geometry(&GeometryFamily::Stub { length: 1.0, gap: 0.5 }.spec()).unwrap(), 2, 10.0).unwrap();
        let s = assemble_theta_with(&stub, &e, KernelMode::DiagonalOnly).unwrap();
        let i = s.nodes().iter().position(|n| n.sign == Sign::Minus).unwrap();
        assert!((s.matrix()[(i, i)].re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn diagonal_only_solve() {
        let e = EnergySpec::new(5.0, -25.0 / 8.0).unwrap();
        let g = build_geometry(&GeometryFamily::Stub { length: 1.0, gap: 1.0 }.spec()).unwrap();
        let mesh = build_mesh(&g, 6, 0.25).unwrap();
        let s = assemble_theta_with(&mesh, &e, KernelMode::DiagonalOnly).unwrap();
        let q = solve_charge(&s).unwrap();
        for (j, n) in mesh.nodes().iter().enumerate() {
            let expect = omega(&e, n.point, Direction::LeftIncoming) / (-n.sign.value() / 5.0);
            assert!((q.coefficients[j] - expect).norm() < 1e-13);
        }
        assert!((condition_estimate(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_mesh_is_noop() {
        let g = build_geometry(&GeometrySpec::default()).unwrap();
        let mesh = build_mesh(&g, 8, 0.2).unwrap();
        let s = assemble_theta(&mesh, &EnergySpec::new(5.0, -3.0).unwrap()).unwrap();
        assert!(s.is_empty());
        assert!(solve_charge(&s).unwrap().coefficients.is_empty());
    }

    #[test]
    fn assembled_gap_system() {
        let mesh = gap_mesh(0.25);
        let e = EnergySpec::new(5.0, -25.0 / 8.0).unwrap();
        let s = assemble_theta(&mesh, &e).unwrap();
        assert!(s.far_asymmetry(&mesh) < 1e-10);
        let q = solve_charge(&s).unwrap();
        assert!(q.residual <= RESIDUAL_TOL);
        assert!(q.coefficients.iter().all(|z| z.is_finite()));
        let c = condition_estimate(&s);
        assert!((condition_estimate(&s.scaled(2.0)) - c).abs() < 1e-9 * c);
    }

    #[test]
    fn gap_refinement_contracts() {
        let e = EnergySpec::new(5.0, -25.0 / 8.0).unwrap();
        let norms: Vec<f64> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&h| solve_charge(&assemble_theta(&gap_mesh(h), &e).unwrap()).unwrap().h_norm())
            .collect();
        let d1 = (norms[1] - norms[0]).abs();
        let d2 = (norms[2] - norms[1]).abs();
        assert!(d2 <= 0.5 * d1.max(1e-13), "{norms:?}");
    }
}
