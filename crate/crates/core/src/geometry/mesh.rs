//! Composite Gauss–Legendre meshes on the signed components.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::curve::Point2;
use super::{decompose, DeformedLineGeometry, Sign, SignedComponent};
use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, QuadratureRule};

const MIN_PANEL_LENGTH: f64 = 1e-8;
const MAX_PANELS: usize = 200_000;

/// A panel: one parameter interval of one smooth piece of a component.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub component: usize,
    pub piece: usize,
    /// Interval of the piece parameter covered by the panel.
    pub param: (f64, f64),
    /// Same interval in component arc length.
    pub arc: (f64, f64),
    /// Indices of this panel's nodes in [`PanelMesh::nodes`].
    pub nodes: Range<usize>,
}

impl Panel {
    pub fn length(&self) -> f64 {
        self.arc.1 - self.arc.0
    }
}

/// A quadrature node of the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNode {
    pub point: Point2,
    /// Arc length along the component.
    pub s: f64,
    /// Piece parameter of the node.
    pub param: f64,
    pub weight: f64,
    pub sign: Sign,
    pub component: usize,
    pub panel: usize,
}

/// Discretization of the measure on `Γ△Σ`.
#[derive(Debug, Clone)]
pub struct PanelMesh {
    components: Vec<SignedComponent>,
    panels: Vec<Panel>,
    nodes: Vec<MeshNode>,
    nodes_per_panel: usize,
    target_length: f64,
    reference: QuadratureRule,
}

impl PanelMesh {
    pub fn components(&self) -> &[SignedComponent] {
        &self.components
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn nodes(&self) -> &[MeshNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    /// The refinement parameter the mesh was built with.
    pub fn target_length(&self) -> f64 {
        self.target_length
    }

    /// Gauss–Legendre rule on `[-1, 1]` used on every panel.
    pub fn reference_rule(&self) -> &QuadratureRule {
        &self.reference
    }

    /// Point and speed `|dx/dt|` at piece parameter `t` of a panel.
    pub fn eval(&self, panel: &Panel, t: f64) -> (Point2, f64) {
        let piece = &self.components[panel.component].curve.pieces()[panel.piece];
        let (p, d) = piece.eval(t);
        (p, d.norm())
    }

    /// Total weight on each component.
    pub fn component_weights(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.components.len()];
        for n in &self.nodes {
            sums[n.component] += n.weight;
        }
        sums
    }
}

/// Dyadic refinement levels applied at piece ends by [`build_mesh`].
pub const DEFAULT_GRADING: usize = 6;

/// Mesh resolution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshParams {
    pub nodes_per_panel: usize,
    pub panel_length: f64,
    /// Dyadic refinement levels at piece ends.
    pub grading: usize,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { nodes_per_panel: 8, panel_length: 0.1, grading: DEFAULT_GRADING }
    }
}

impl MeshParams {
    pub fn build(&self, geom: &DeformedLineGeometry) -> Result<PanelMesh> {
        build_mesh_graded(geom, self.nodes_per_panel, self.panel_length, self.grading)
    }

    /// Same parameters with the panel length halved.
    pub fn refined(&self) -> Self {
        Self { panel_length: 0.5 * self.panel_length, ..*self }
    }

    /// Parameters whose mesh on `geom` has the node count closest to `target`
    /// (bisection on the panel length, other fields kept).
    pub fn with_node_count(&self, geom: &DeformedLineGeometry, target: usize) -> Result<Self> {
        let count = |h: f64| -> Result<usize> { Ok(Self { panel_length: h, ..*self }.build(geom)?.len()) };
        let (mut lo, mut hi) = (1e-4f64, 1e3f64);
        let mut best = (usize::MAX, self.panel_length);
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            let n = count(mid)?;
            if n.abs_diff(target) < best.0 {
                best = (n.abs_diff(target), mid);
            }
            if n == target {
                break;
            }
            if n > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self { panel_length: best.1, ..*self })
    }
}

/// Meshes every signed component of `geom` with panels of roughly
/// `panel_length` carrying `nodes_per_panel` Gauss–Legendre nodes each.
///
/// Panels never straddle a corner of a polyline. The end panels of every
/// smooth piece are split dyadically [`DEFAULT_GRADING`] times, since the
/// charge density is singular at endpoints, corners and junctions.
pub fn build_mesh(geom: &DeformedLineGeometry, nodes_per_panel: usize, panel_length: f64) -> Result<PanelMesh> {
    build_mesh_graded(geom, nodes_per_panel, panel_length, DEFAULT_GRADING)
}

/// [`build_mesh`] with an explicit number of grading levels (0 = uniform).
pub fn build_mesh_graded(
    geom: &DeformedLineGeometry,
    nodes_per_panel: usize,
    panel_length: f64,
    grading: usize,
) -> Result<PanelMesh> {
    if nodes_per_panel < 2 {
        return Err(Error::Mesh(format!("need at least 2 nodes per panel, got {nodes_per_panel}")));
    }
    if !(panel_length >= MIN_PANEL_LENGTH) || !panel_length.is_finite() {
        return Err(Error::Mesh(format!("panel length {panel_length} below geometric resolution")));
    }
    let components = decompose(geom);
    let reference = gauss_legendre(nodes_per_panel);
    let mut panels = Vec::new();
    let mut nodes = Vec::new();
    for (ci, comp) in components.iter().enumerate() {
        let curve = &comp.curve;
        for (pi, piece) in curve.pieces().iter().enumerate() {
            let (t_lo, t_hi) = piece.param_range();
            let offset = curve.piece_offset(pi);
            let len = piece.s_of_param(t_hi);
            let count = (len / panel_length).ceil().max(1.0);
            if count > MAX_PANELS as f64 || panels.len() + count as usize > MAX_PANELS {
                return Err(Error::Mesh(format!("panel length {panel_length} gives more than {MAX_PANELS} panels")));
            }
            let arcs = graded_breaks(len, count as usize, grading);
            let breaks: Vec<f64> = arcs
                .iter()
                .enumerate()
                .map(|(k, &s)| match k {
                    0 => t_lo,
                    k if k == arcs.len() - 1 => t_hi,
                    _ => piece.param_of_s(s),
                })
                .collect();
            for (k, w) in breaks.windows(2).enumerate() {
                let (a, b) = (w[0], w[1]);
                let half = 0.5 * (b - a);
                let start = nodes.len();
                let panel_index = panels.len();
                for (&t, &g) in reference.nodes.iter().zip(&reference.weights) {
                    let tn = 0.5 * (a + b) + half * t;
                    let (point, d) = piece.eval(tn);
                    nodes.push(MeshNode {
                        point,
                        s: offset + piece.s_of_param(tn),
                        param: tn,
                        weight: g * half * d.norm(),
                        sign: comp.sign,
                        component: ci,
                        panel: panel_index,
                    });
                }
                let arc = (offset + arcs[k], offset + arcs[k + 1]);
                panels.push(Panel { component: ci, piece: pi, param: (a, b), arc, nodes: start..nodes.len() });
            }
        }
    }
    Ok(PanelMesh { components, panels, nodes, nodes_per_panel, target_length: panel_length, reference })
}

/// Arc-length breakpoints: `count` uniform panels, the two end panels split
/// dyadically towards the ends `grading` times.
fn graded_breaks(len: f64, count: usize, grading: usize) -> Vec<f64> {
    let h = len / count as f64;
    let mut out = vec![0.0];
    out.extend((0..grading).rev().map(|l| h * 0.5f64.powi(l as i32 + 1)));
    out.extend((1..count).map(|k| h * k as f64));
    out.extend((0..grading).map(|l| len - h * 0.5f64.powi(l as i32 + 1)));
    out.push(len);
    out.dedup();
    out
}
