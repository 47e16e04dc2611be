//! The deformed line `Γ`, its symmetric difference with the straight line
//! `Σ = {x2 = 0}`, and quadrature meshes on it.

mod curve;
mod input;
mod mesh;

pub use curve::{
    check_chord_arc, curvature, ChordArcReport, CurveSegment, GraphProfile, Point2, Sample, SegmentKind, SegmentShape,
};
pub use input::{GeometryFamily, GeometrySpec, SegmentSpec};
pub use mesh::{build_mesh, build_mesh_graded, MeshNode, MeshParams, Panel, PanelMesh, DEFAULT_GRADING};

use crate::error::{Error, Result};

/// Endpoints closer than this are one junction point.
pub const TOUCH_TOL: f64 = 1e-9;
/// Smallest admissible `sin(φ/2)` between outgoing tangents at a junction,
/// i.e. the chord-arc ratio of the two branches there.
pub const JUNCTION_CHORD_ARC: f64 = 1e-2;
const MAX_COORD: f64 = 1e6;

/// Axis-aligned rectangle containing the whole deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

/// `+1` on `Λ0 = Σ∖Γ`, `-1` on `Λ1 = Γ∖Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Where a signed component lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Removed interval `(a, b)` of the straight line.
    SigmaInterval { a: f64, b: f64 },
    /// Deformation segment with the given index.
    Deformation(usize),
}

/// One connected piece of `Γ△Σ` with its sign.
#[derive(Debug, Clone)]
pub struct SignedComponent {
    pub support: Support,
    pub sign: Sign,
    /// The support as a curve; removed intervals run left to right.
    pub curve: CurveSegment,
}

impl SignedComponent {
    pub fn length(&self) -> f64 {
        self.curve.length()
    }
}

/// Validated geometry: `Γ = (Σ minus removed intervals) ∪ segments`.
#[derive(Debug, Clone)]
pub struct DeformedLineGeometry {
    segments: Vec<CurveSegment>,
    removed: Vec<(f64, f64)>,
    bbox: Option<BoundingBox>,
}

impl DeformedLineGeometry {
    /// The undeformed line `Γ = Σ`.
    pub fn straight() -> Self {
        Self { segments: Vec::new(), removed: Vec::new(), bbox: None }
    }

    pub fn segments(&self) -> &[CurveSegment] {
        &self.segments
    }

    pub fn removed_intervals(&self) -> &[(f64, f64)] {
        &self.removed
    }

    /// The compact set outside which `Γ` coincides with `Σ`; `None` when `Γ = Σ`.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        self.bbox
    }

    pub fn is_straight(&self) -> bool {
        self.segments.is_empty() && self.removed.is_empty()
    }

    /// Reflection across `x1 → -x1`.
    pub fn mirrored(&self) -> Result<Self> {
        let segments = self.segments.iter().map(|s| s.mirrored()).collect::<Result<Vec<_>>>()?;
        let removed = self.removed.iter().map(|&(a, b)| (-b, -a)).collect();
        Self::from_parts(segments, removed)
    }

    /// If the deformation is a single graph over exactly one removed interval,
    /// returns it. Only such geometries have a well-defined smooth curvature
    /// profile along the whole of `Γ`.
    pub fn smooth_graph(&self) -> Option<&CurveSegment> {
        match (self.segments.as_slice(), self.removed.as_slice()) {
            ([seg], &[(a, b)]) => match seg.shape() {
                SegmentShape::Graph { x_start, x_end, .. }
                    if (x_start - a).abs() < TOUCH_TOL && (x_end - b).abs() < TOUCH_TOL =>
                {
                    Some(seg)
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Validates and assembles a geometry.
    pub fn from_parts(segments: Vec<CurveSegment>, mut removed: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &removed {
            if !a.is_finite() || !b.is_finite() || a.abs() > MAX_COORD || b.abs() > MAX_COORD {
                return Err(Error::Geometry(format!("removed interval ({a}, {b}) is unbounded")));
            }
            if !(a < b) {
                return Err(Error::Geometry(format!("removed interval ({a}, {b}) needs a < b")));
            }
        }
        removed.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in removed.windows(2) {
            if w[1].0 < w[0].1 + TOUCH_TOL {
                return Err(Error::Geometry(format!("removed intervals {:?} and {:?} overlap", w[0], w[1])));
            }
        }
        for seg in &segments {
            if seg.samples().iter().any(|s| s.point.x1.abs() > MAX_COORD || s.point.x2.abs() > MAX_COORD) {
                return Err(Error::Geometry("deformation segment is unbounded".into()));
            }
        }
        let geom = Self { bbox: bounding_box(&segments, &removed), segments, removed };
        geom.check_intersections()?;
        geom.check_junctions()?;
        Ok(geom)
    }

    fn on_straight_part(&self, x1: f64) -> bool {
        !self.removed.iter().any(|&(a, b)| x1 > a + TOUCH_TOL && x1 < b - TOUCH_TOL)
    }

    fn is_endpoint(seg: &CurveSegment, p: Point2) -> bool {
        p.dist(seg.start()) < 1e3 * TOUCH_TOL || p.dist(seg.end()) < 1e3 * TOUCH_TOL
    }

    fn check_intersections(&self) -> Result<()> {
        for (i, seg) in self.segments.iter().enumerate() {
            let pts: Vec<Point2> = seg.samples().iter().map(|s| s.point).collect();
            let n = pts.len() - 1;
            // self-intersection on non-adjacent chords
            for a in 0..n {
                for b in a + 2..n {
                    if seg.is_closed() && a == 0 && b == n - 1 {
                        continue;
                    }
                    if let Some(p) = chord_intersection(pts[a], pts[a + 1], pts[b], pts[b + 1]) {
                        return Err(Error::Geometry(format!(
                            "segment {i} intersects itself near ({:.6}, {:.6})",
                            p.x1, p.x2
                        )));
                    }
                }
            }
            // meeting the straight part of Γ away from the segment's endpoints
            for w in pts.windows(2) {
                let (p, q) = (w[0], w[1]);
                if p.x2 * q.x2 > 0.0 {
                    continue;
                }
                let cross = if p.x2 == q.x2 { vec![p, q] } else { vec![p + (q - p).scale(p.x2 / (p.x2 - q.x2))] };
                for c in cross {
                    if c.x2.abs() <= TOUCH_TOL && self.on_straight_part(c.x1) && !Self::is_endpoint(seg, c) {
                        return Err(Error::Geometry(format!(
                            "segment {i} meets the straight line at x1 = {:.6} away from its endpoints",
                            c.x1
                        )));
                    }
                }
            }
            for (j, other) in self.segments.iter().enumerate().skip(i + 1) {
                for w in pts.windows(2) {
                    for v in other.samples().windows(2) {
                        if let Some(p) = chord_intersection(w[0], w[1], v[0].point, v[1].point) {
                            if !(Self::is_endpoint(seg, p) && Self::is_endpoint(other, p)) {
                                return Err(Error::Geometry(format!(
                                    "segments {i} and {j} cross near ({:.6}, {:.6})",
                                    p.x1, p.x2
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Every point where pieces of `Γ` meet must not form a cusp.
    fn check_junctions(&self) -> Result<()> {
        let mut points: Vec<Point2> = Vec::new();
        for seg in self.segments.iter().filter(|s| !s.is_closed()) {
            points.push(seg.start());
            points.push(seg.end());
        }
        for &(a, b) in &self.removed {
            points.push(Point2::new(a, 0.0));
            points.push(Point2::new(b, 0.0));
        }
        for p in points {
            let mut outgoing: Vec<Point2> = Vec::new();
            if p.x2.abs() < TOUCH_TOL {
                let left_open = self.removed.iter().any(|&(a, b)| p.x1 > a + TOUCH_TOL && p.x1 < b + TOUCH_TOL);
                let right_open = self.removed.iter().any(|&(a, b)| p.x1 > a - TOUCH_TOL && p.x1 < b - TOUCH_TOL);
                if !left_open {
                    outgoing.push(Point2::new(-1.0, 0.0));
                }
                if !right_open {
                    outgoing.push(Point2::new(1.0, 0.0));
                }
            }
            for seg in self.segments.iter().filter(|s| !s.is_closed()) {
                if seg.start().dist(p) < TOUCH_TOL {
                    outgoing.push(seg.tangent_at(0.0));
                }
                if seg.end().dist(p) < TOUCH_TOL {
                    outgoing.push(seg.tangent_at(seg.length()).scale(-1.0));
                }
            }
            for (i, u) in outgoing.iter().enumerate() {
                for v in &outgoing[i + 1..] {
                    // sin of half the angle between the branches
                    let ratio = 0.5 * (*u - *v).norm();
                    if ratio < JUNCTION_CHORD_ARC {
                        return Err(Error::Geometry(format!(
                            "cusp at junction ({:.6}, {:.6}): branch chord-arc ratio {ratio:.2e}",
                            p.x1, p.x2
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn bounding_box(segments: &[CurveSegment], removed: &[(f64, f64)]) -> Option<BoundingBox> {
    let mut pts: Vec<Point2> = segments.iter().flat_map(|s| s.samples().iter().map(|x| x.point)).collect();
    for &(a, b) in removed {
        pts.push(Point2::new(a, 0.0));
        pts.push(Point2::new(b, 0.0));
    }
    if pts.is_empty() {
        return None;
    }
    let mut min = pts[0];
    let mut max = pts[0];
    for p in &pts {
        min = Point2::new(min.x1.min(p.x1), min.x2.min(p.x2));
        max = Point2::new(max.x1.max(p.x1), max.x2.max(p.x2));
    }
    Some(BoundingBox { min, max })
}

/// Intersection point of chords `[p, q]` and `[r, s]`, if any.
fn chord_intersection(p: Point2, q: Point2, r: Point2, s: Point2) -> Option<Point2> {
    let d1 = q - p;
    let d2 = s - r;
    let denom = d1.cross(d2);
    let scale = d1.norm() * d2.norm();
    if denom.abs() <= 1e-14 * scale {
        // parallel: only collinear overlaps count
        if (r - p).cross(d1).abs() > 1e-12 * d1.norm() * (1.0 + (r - p).norm()) {
            return None;
        }
        let len2 = d1.dot(d1);
        for (c, t) in [(r, (r - p).dot(d1) / len2), (s, (s - p).dot(d1) / len2)] {
            if (0.0..=1.0).contains(&t) {
                return Some(c);
            }
        }
        return None;
    }
    let t = (r - p).cross(d2) / denom;
    let u = (r - p).cross(d1) / denom;
    let eps = 1e-12;
    if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
        Some(p + d1.scale(t))
    } else {
        None
    }
}

/// Builds and validates a geometry from its structured description.
pub fn build_geometry(spec: &GeometrySpec) -> Result<DeformedLineGeometry> {
    let segments = spec.segments.iter().map(|s| CurveSegment::new(s.to_shape())).collect::<Result<Vec<_>>>()?;
    let removed = spec.removed_intervals.iter().map(|r| (r[0], r[1])).collect();
    DeformedLineGeometry::from_parts(segments, removed)
}

/// Splits `Γ△Σ` into signed components: removed intervals (sign `+1`) in
/// increasing order, then deformation segments (sign `-1`).
pub fn decompose(geom: &DeformedLineGeometry) -> Vec<SignedComponent> {
    let mut out = Vec::new();
    for &(a, b) in geom.removed_intervals() {
        let curve = CurveSegment::new(SegmentShape::Polyline(vec![Point2::new(a, 0.0), Point2::new(b, 0.0)]))
            .expect("validated interval");
        out.push(SignedComponent { support: Support::SigmaInterval { a, b }, sign: Sign::Plus, curve });
    }
    for (i, seg) in geom.segments().iter().enumerate() {
        out.push(SignedComponent { support: Support::Deformation(i), sign: Sign::Minus, curve: seg.clone() });
    }
    out
}
