//! Product-integration weights for the straight-wire kernel on panels that
//! are close to (or contain) the target point.
//!
//! The free part `K0(κr)/(2π)` carries a logarithmic singularity; the
//! correction `ξ` is continuous but behaves like `a|d| + b d² ln|d|` on Σ,
//! so pieces touching the target are refined geometrically towards it and
//! both parts are integrated on the same subdivision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::{Panel, PanelMesh, Point2};
use crate::specfun::{bessel_i0, gauss_legendre, k0_unchecked, log_product_rule, QuadratureRule, EULER_GAMMA};

const SUB_ORDER: usize = 16;
/// Pieces shorter than this fraction of the panel are never split again.
const MIN_PIECE: f64 = 1e-13;
/// Largest piece touching the target, as a fraction of the panel.
const TOUCH_PIECE: f64 = 1.0 / 1024.0;

/// Barycentric Lagrange interpolation on the Gauss–Legendre nodes of a panel.
pub(crate) struct PanelInterpolant {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl PanelInterpolant {
    pub(crate) fn new(reference: &QuadratureRule) -> Self {
        let nodes = reference.nodes.clone();
        let bary = (0..nodes.len())
            .map(|j| {
                let p: f64 = (0..nodes.len()).filter(|&m| m != j).map(|m| nodes[j] - nodes[m]).product();
                1.0 / p
            })
            .collect();
        Self { nodes, bary }
    }

    /// Basis values `L_j(u)` at reference coordinate `u ∈ [-1, 1]`, added into
    /// `out` scaled by `scale`.
    fn accumulate(&self, u: f64, scale: Complex64, out: &mut [Complex64]) {
        if let Some(j) = self.nodes.iter().position(|&x| x == u) {
            out[j] += scale;
            return;
        }
        let terms: Vec<f64> = self.nodes.iter().zip(&self.bary).map(|(&x, &b)| b / (u - x)).collect();
        let denom: f64 = terms.iter().sum();
        for (o, t) in out.iter_mut().zip(terms) {
            *o += scale * t / denom;
        }
    }
}

/// Shared state for near-field weight computations.
pub(crate) struct NearQuadrature<'m> {
    mesh: &'m PanelMesh,
    interp: PanelInterpolant,
    gl: QuadratureRule,
    kappa: f64,
}

/// Whether panel `panel` must be product-integrated for target `x`.
pub(crate) fn is_near(mesh: &PanelMesh, panel: &Panel, x: Point2) -> bool {
    let mid = 0.5 * (panel.param.0 + panel.param.1);
    let (c, _) = mesh.eval(panel, mid);
    c.dist(x) < 2.0 * panel.length()
}

impl<'m> NearQuadrature<'m> {
    pub(crate) fn new(mesh: &'m PanelMesh, kappa: f64) -> Self {
        Self { mesh, interp: PanelInterpolant::new(mesh.reference_rule()), gl: gauss_legendre(SUB_ORDER), kappa }
    }

    /// Weights `ω_j` over the panel's nodes with
    /// `Σ ω_j f(y_j) ≈ ∫_panel [K0(κ|x - y|)/(2π) + ξ(y)] f(y) ds(y)`,
    /// where `ξ` is the continuous part of the kernel for this target.
    ///
    /// `on_panel` carries the target's parameter when the target lies on the
    /// panel.
    pub(crate) fn weights<X>(&self, panel: &Panel, x: Point2, on_panel: Option<f64>, xi: X) -> Vec<Complex64>
    where
        X: FnMut(Point2) -> Complex64,
    {
        let mut xi = xi;
        let mut out = vec![Complex64::new(0.0, 0.0); panel.nodes.len()];
        let (a, b) = panel.param;
        let mut stack: Vec<(f64, f64)> = Vec::new();
        match on_panel {
            Some(t) => {
                if t > a {
                    stack.push((a, t));
                }
                if t < b {
                    stack.push((t, b));
                }
            }
            None => stack.push((a, b)),
        }
        let floor = MIN_PIECE * panel.length();
        while let Some((lo, hi)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let (c, speed) = self.mesh.eval(panel, mid);
            let len = speed * (hi - lo);
            let tiny = len <= floor || !(lo < mid && mid < hi);
            let touches = on_panel.filter(|&t| t == lo || t == hi);
            if let Some(t) = touches {
                if (self.kappa * len <= 1.0 && len <= TOUCH_PIECE * panel.length()) || tiny {
                    self.log_piece(panel, x, t, lo, hi, &mut xi, &mut out);
                    continue;
                }
            } else {
                let dist = c.dist(x);
                let resolved = dist >= len && (self.kappa * len <= 8.0 || self.kappa * dist >= 40.0);
                if resolved || tiny {
                    self.smooth_piece(panel, x, lo, hi, &mut xi, &mut out);
                    continue;
                }
            }
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
        out
    }

    fn reference_coord(panel: &Panel, t: f64) -> f64 {
        let (a, b) = panel.param;
        (2.0 * t - a - b) / (b - a)
    }

    fn smooth_piece<X>(&self, panel: &Panel, x: Point2, lo: f64, hi: f64, xi: &mut X, out: &mut [Complex64])
    where
        X: FnMut(Point2) -> Complex64,
    {
        let half = 0.5 * (hi - lo);
        for (&u, &g) in self.gl.nodes.iter().zip(&self.gl.weights) {
            let t = lo + half * (u + 1.0);
            let (y, speed) = self.mesh.eval(panel, t);
            let r = y.dist(x);
            let k = if r > 0.0 { k0_unchecked(self.kappa * r) } else { 0.0 };
            let w = (xi(y) + k / (2.0 * PI)) * (g * half * speed);
            self.interp.accumulate(Self::reference_coord(panel, t), w, out);
        }
    }

    /// Piece with the target at one end: `K0(κr) = -I0(κr) ln|t - t0| + S(t)`.
    #[allow(clippy::too_many_arguments)]
    fn log_piece<X>(&self, panel: &Panel, x: Point2, t0: f64, lo: f64, hi: f64, xi: &mut X, out: &mut [Complex64])
    where
        X: FnMut(Point2) -> Complex64,
    {
        let rule = log_product_rule(lo, hi, t0, SUB_ORDER).expect("target is an endpoint of the piece");
        let half = 0.5 * (hi - lo);
        for (k, (&u, &g)) in self.gl.nodes.iter().zip(&self.gl.weights).enumerate() {
            let t = lo + half * (u + 1.0);
            let (y, speed) = self.mesh.eval(panel, t);
            let r = y.dist(x);
            let z = self.kappa * r;
            let i0 = bessel_i0(z);
            let ln_dt = (t - t0).abs().ln();
            let smooth = if r > 0.0 {
                k0_unchecked(z) + i0 * ln_dt
            } else {
                -(0.5 * self.kappa * speed).ln() - EULER_GAMMA
            };
            let w = (rule.weights[k] * (-i0) + g * half * smooth) * speed / (2.0 * PI);
            let w = xi(y) * (g * half * speed) + w;
            self.interp.accumulate(Self::reference_coord(panel, t), w, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, build_mesh, GeometryFamily, GeometrySpec};
    use crate::specfun::{integrate_adaptive, AdaptiveOptions};

    fn adaptive_reference(mesh: &PanelMesh, panel: &Panel, x: Point2, kappa: f64, f: impl Fn(Point2) -> f64) -> f64 {
        let g = |t: f64| {
            let (y, speed) = mesh.eval(panel, t);
            let r = y.dist(x);
            if r == 0.0 {
                0.0
            } else {
                k0_unchecked(kappa * r) / (2.0 * PI) * speed * f(y)
            }
        };
        let mut breaks = vec![panel.param.0, panel.param.1];
        let nodes = &mesh.nodes()[panel.nodes.clone()];
        for n in nodes {
            if n.point.dist(x) < 1e-14 {
                breaks.insert(1, n.param);
            }
        }
        integrate_adaptive(g, &breaks, AdaptiveOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 20_000 }).0
    }

    #[test]
    fn straight_panel_self_and_neighbour() {
        let spec = GeometrySpec { removed_intervals: vec![[0.0, 1.0]], segments: vec![] };
        let g = build_geometry(&spec).unwrap();
        let mesh = build_mesh(&g, 8, 0.25).unwrap();
        let kappa = 3.0;
        let near = NearQuadrature::new(&mesh, kappa);
        let f = |y: Point2| 1.0 + y.x1 - 2.0 * y.x1 * y.x1;
        for target in [0usize, 3, 9, 12] {
            let node = mesh.nodes()[target];
            for panel in mesh.panels() {
                let on = (panel.nodes.contains(&target)).then_some(node.param);
                let w = near.weights(panel, node.point, on, |_| Complex64::new(0.0, 0.0));
                let approx: f64 = mesh.nodes()[panel.nodes.clone()].iter().zip(&w).map(|(n, w)| w.re * f(n.point)).sum();
                let exact = adaptive_reference(&mesh, panel, node.point, kappa, f);
                assert!((approx - exact).abs() < 1e-12, "target {target}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn curved_panel_self_term() {
        let g = build_geometry(&GeometryFamily::SemicircleDetour { radius: 1.0 }.spec()).unwrap();
        let mesh = build_mesh(&g, 10, 0.3).unwrap();
        let kappa = 2.0;
        let near = NearQuadrature::new(&mesh, kappa);
        let f = |y: Point2| (2.0 * y.x1).cos() + y.x2;
        for (i, node) in mesh.nodes().iter().enumerate().filter(|(_, n)| n.component == 1).step_by(7) {
            let panel = &mesh.panels()[node.panel];
            let w = near.weights(panel, node.point, Some(node.param), |_| Complex64::new(0.0, 0.0));
            let approx: f64 = mesh.nodes()[panel.nodes.clone()].iter().zip(&w).map(|(n, w)| w.re * f(n.point)).sum();
            let exact = adaptive_reference(&mesh, panel, node.point, kappa, f);
            assert!((approx - exact).abs() < 1e-10, "node {i}: {approx} vs {exact}");
        }
    }

    #[test]
    fn nearly_touching_components() {
        let g = build_geometry(&GeometryFamily::Bump { height: 0.5, width: 1.0 }.spec()).unwrap();
        let mesh = build_mesh(&g, 8, 0.2).unwrap();
        let kappa = 2.5;
        let near = NearQuadrature::new(&mesh, kappa);
        let f = |y: Point2| 1.0 + 0.3 * y.x1;
        // a Σ node near the end of the bump against graph panels above it
        let node = mesh.nodes()[2];
        for panel in mesh.panels().iter().filter(|p| p.component == 1 && is_near(&mesh, p, node.point)) {
            let w = near.weights(panel, node.point, None, |_| Complex64::new(0.0, 0.0));
            let approx: f64 = mesh.nodes()[panel.nodes.clone()].iter().zip(&w).map(|(n, w)| w.re * f(n.point)).sum();
            let exact = adaptive_reference(&mesh, panel, node.point, kappa, f);
            assert!((approx - exact).abs() < 1e-11, "{approx} vs {exact}");
        }
    }
}
