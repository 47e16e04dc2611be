//! Arc-length parameterized curve segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gauss_legendre;

/// A point (or a direction) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    pub fn scale(self, c: f64) -> Point2 {
        Point2::new(c * self.x1, c * self.x2)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Reflection across the `x2` axis, `x1 → -x1`.
    pub fn mirrored(self) -> Point2 {
        Point2::new(-self.x1, self.x2)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

/// Height profiles for graph-type deformations `x2 = f(x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum GraphProfile {
    /// `h (1 - x²/(5w²))^5` on `|x| < √5 w`, zero outside. A compactly
    /// supported C⁴ stand-in for `h exp(-x²/w²)` with the same second
    /// derivative at the origin.
    Bump { height: f64, width: f64 },
    /// `h exp(-x²/w²)`; not compactly supported, used for curvature checks.
    Gaussian { height: f64, width: f64 },
}

impl GraphProfile {
    /// Values `(f, f', f'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            GraphProfile::Bump { height: h, width: w } => {
                let a2 = 5.0 * w * w;
                let u = 1.0 - x * x / a2;
                if u <= 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let u3 = u * u * u;
                let u4 = u3 * u;
                let f = h * u4 * u;
                let fp = h * 5.0 * u4 * (-2.0 * x / a2);
                let fpp = h * (20.0 * u3 * (4.0 * x * x / (a2 * a2)) - 10.0 * u4 / a2);
                (f, fp, fpp)
            }
            GraphProfile::Gaussian { height: h, width: w } => {
                let e = (-(x * x) / (w * w)).exp();
                let f = h * e;
                let fp = -2.0 * x / (w * w) * f;
                let fpp = (4.0 * x * x / (w * w * w * w) - 2.0 / (w * w)) * f;
                (f, fp, fpp)
            }
        }
    }

    /// Half-width of the support, if compact.
    pub fn support_half_width(&self) -> Option<f64> {
        match *self {
            GraphProfile::Bump { width, .. } => Some(5f64.sqrt() * width),
            GraphProfile::Gaussian { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let (h, w) = match *self {
            GraphProfile::Bump { height, width } | GraphProfile::Gaussian { height, width } => (height, width),
        };
        if !h.is_finite() || !(w > 0.0) || !w.is_finite() {
            return Err(Error::Geometry(format!("graph profile needs finite height and positive width, got h={h}, w={w}")));
        }
        Ok(())
    }
}

/// Kind of a [`CurveSegment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Polyline,
    CircularArc,
    ParametricSampled,
}

/// One entry of a segment's sample table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub point: Point2,
    pub tangent: Point2,
}

const GRAPH_KNOTS: usize = 1024;
const GRAPH_GL: usize = 12;
const SAMPLE_MISMATCH: f64 = 1e-6;

/// Smooth piece of a segment. Lines and arcs are parameterized by local arc
/// length; graphs by `x1`.
#[derive(Debug, Clone)]
pub(crate) enum Piece {
    Line { a: Point2, dir: Point2, length: f64 },
    Arc { center: Point2, radius: f64, start_angle: f64, orientation: f64, length: f64 },
    Graph { profile: GraphProfile, knots: Vec<f64>, cumulative: Vec<f64>, gl: (Vec<f64>, Vec<f64>) },
}

impl Piece {
    fn length(&self) -> f64 {
        match self {
            Piece::Line { length, .. } | Piece::Arc { length, .. } => *length,
            Piece::Graph { cumulative, .. } => *cumulative.last().unwrap(),
        }
    }

    pub(crate) fn param_range(&self) -> (f64, f64) {
        match self {
            Piece::Line { length, .. } | Piece::Arc { length, .. } => (0.0, *length),
            Piece::Graph { knots, .. } => (knots[0], *knots.last().unwrap()),
        }
    }

    /// Point and derivative with respect to the piece parameter.
    pub(crate) fn eval(&self, t: f64) -> (Point2, Point2) {
        match self {
            Piece::Line { a, dir, .. } => (*a + dir.scale(t), *dir),
            Piece::Arc { center, radius, start_angle, orientation, .. } => {
                let phi = start_angle + orientation * t / radius;
                let (s, c) = phi.sin_cos();
                (*center + Point2::new(c, s).scale(*radius), Point2::new(-s, c).scale(*orientation))
            }
            Piece::Graph { profile, .. } => {
                let (f, fp, _) = profile.eval(t);
                (Point2::new(t, f), Point2::new(1.0, fp))
            }
        }
    }

    fn graph_speed(profile: &GraphProfile, x: f64) -> f64 {
        let fp = profile.eval(x).1;
        (1.0 + fp * fp).sqrt()
    }

    fn graph_partial(profile: &GraphProfile, gl: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        gl.0.iter().zip(&gl.1).map(|(&t, &w)| w * Self::graph_speed(profile, mid + half * t)).sum::<f64>() * half
    }

    /// Local arc length at parameter `t`.
    pub(crate) fn s_of_param(&self, t: f64) -> f64 {
        match self {
            Piece::Line { .. } | Piece::Arc { .. } => t,
            Piece::Graph { profile, knots, cumulative, gl } => {
                let h = knots[1] - knots[0];
                let k = (((t - knots[0]) / h).floor() as isize).clamp(0, knots.len() as isize - 2) as usize;
                cumulative[k] + Self::graph_partial(profile, gl, knots[k], t)
            }
        }
    }

    /// Parameter at local arc length `s`.
    pub(crate) fn param_of_s(&self, s: f64) -> f64 {
        match self {
            Piece::Line { .. } | Piece::Arc { .. } => s,
            Piece::Graph { profile, knots, cumulative, .. } => {
                let k = cumulative.partition_point(|&c| c <= s).clamp(1, knots.len() - 1) - 1;
                let (s0, s1) = (cumulative[k], cumulative[k + 1]);
                let mut x = knots[k] + (knots[k + 1] - knots[k]) * (s - s0) / (s1 - s0);
                for _ in 0..30 {
                    let dx = (self.s_of_param(x) - s) / Self::graph_speed(profile, x);
                    x -= dx;
                    if dx.abs() < 1e-15 * (1.0 + x.abs()) {
                        break;
                    }
                }
                x
            }
        }
    }
}

/// Description used to construct a [`CurveSegment`].
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentShape {
    /// Open polyline through at least two points.
    Polyline(Vec<Point2>),
    /// Arc of a circle, angles in radians; a sweep of ±2π gives a closed circle.
    Arc { center: Point2, radius: f64, start_angle: f64, sweep: f64 },
    /// Graph `x2 = profile(x1)` over `[x_start, x_end]`, traversed left to right.
    Graph { profile: GraphProfile, x_start: f64, x_end: f64 },
}

/// A finite curve `Γ_i` with an arc-length sample table.
#[derive(Debug, Clone)]
pub struct CurveSegment {
    kind: SegmentKind,
    shape: SegmentShape,
    pieces: Vec<Piece>,
    offsets: Vec<f64>,
    length: f64,
    closed: bool,
    samples: Vec<Sample>,
}

impl CurveSegment {
    pub fn new(shape: SegmentShape) -> Result<Self> {
        let (kind, pieces, closed) = match &shape {
            SegmentShape::Polyline(pts) => {
                if pts.len() < 2 {
                    return Err(Error::Geometry("polyline needs at least two points".into()));
                }
                if pts.iter().any(|p| !p.is_finite()) {
                    return Err(Error::Geometry("polyline has non-finite coordinates".into()));
                }
                let mut pieces = Vec::new();
                for w in pts.windows(2) {
                    let d = w[1] - w[0];
                    let length = d.norm();
                    if length <= 0.0 {
                        return Err(Error::Geometry("polyline has a zero-length edge".into()));
                    }
                    pieces.push(Piece::Line { a: w[0], dir: d.scale(1.0 / length), length });
                }
                (SegmentKind::Polyline, pieces, false)
            }
            &SegmentShape::Arc { center, radius, start_angle, sweep } => {
                if !center.is_finite() || !start_angle.is_finite() || !sweep.is_finite() || !(radius > 0.0) {
                    return Err(Error::Geometry(format!("invalid arc radius {radius} or angles")));
                }
                let two_pi = 2.0 * std::f64::consts::PI;
                if sweep == 0.0 || sweep.abs() > two_pi * (1.0 + 1e-12) {
                    return Err(Error::Geometry(format!("arc sweep {sweep} must lie in (0, 2π] in magnitude")));
                }
                let closed = (sweep.abs() - two_pi).abs() < 1e-12;
                let piece = Piece::Arc {
                    center,
                    radius,
                    start_angle,
                    orientation: sweep.signum(),
                    length: radius * sweep.abs(),
                };
                (SegmentKind::CircularArc, vec![piece], closed)
            }
            &SegmentShape::Graph { profile, x_start, x_end } => {
                profile.validate()?;
                if !(x_end > x_start) || !x_start.is_finite() || !x_end.is_finite() {
                    return Err(Error::Geometry(format!("graph range [{x_start}, {x_end}] is empty or infinite")));
                }
                let rule = gauss_legendre(GRAPH_GL);
                let gl = (rule.nodes, rule.weights);
                let knots: Vec<f64> = (0..=GRAPH_KNOTS)
                    .map(|i| x_start + (x_end - x_start) * i as f64 / GRAPH_KNOTS as f64)
                    .collect();
                let mut cumulative = vec![0.0; knots.len()];
                for k in 0..GRAPH_KNOTS {
                    cumulative[k + 1] = cumulative[k] + Piece::graph_partial(&profile, &gl, knots[k], knots[k + 1]);
                }
                (SegmentKind::ParametricSampled, vec![Piece::Graph { profile, knots, cumulative, gl }], false)
            }
        };
        let mut offsets = Vec::with_capacity(pieces.len());
        let mut length = 0.0;
        for p in &pieces {
            offsets.push(length);
            length += p.length();
        }
        if !(length > 0.0) {
            return Err(Error::Geometry("degenerate segment of zero length".into()));
        }
        let mut seg = CurveSegment { kind, shape, pieces, offsets, length, closed, samples: Vec::new() };
        seg.samples = seg.build_samples();
        Ok(seg)
    }

    /// Refines a per-piece uniform sampling until every sample spacing matches
    /// its chord to `SAMPLE_MISMATCH`.
    fn build_samples(&self) -> Vec<Sample> {
        let mut per_piece = 8usize;
        loop {
            let mut samples = Vec::new();
            for (i, p) in self.pieces.iter().enumerate() {
                let len = p.length();
                let n = ((per_piece as f64 * len / self.length).ceil() as usize).max(4);
                let start = if i == 0 { 0 } else { 1 };
                for j in start..=n {
                    let s = self.offsets[i] + len * j as f64 / n as f64;
                    let (point, tangent) = self.locate(i, s - self.offsets[i]);
                    samples.push(Sample { s, point, tangent });
                }
            }
            let worst = samples
                .windows(2)
                .map(|w| {
                    let ds = w[1].s - w[0].s;
                    (ds - w[0].point.dist(w[1].point)).abs() / ds
                })
                .fold(0.0, f64::max);
            if worst < SAMPLE_MISMATCH || per_piece > 1 << 20 {
                return samples;
            }
            per_piece *= 2;
        }
    }

    fn locate(&self, piece: usize, s_local: f64) -> (Point2, Point2) {
        let p = &self.pieces[piece];
        let (pt, d) = p.eval(p.param_of_s(s_local));
        (pt, d.scale(1.0 / d.norm()))
    }

    fn piece_at(&self, s: f64) -> usize {
        self.offsets.partition_point(|&o| o <= s).max(1) - 1
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn shape(&self) -> &SegmentShape {
        &self.shape
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn start(&self) -> Point2 {
        self.samples[0].point
    }

    pub fn end(&self) -> Point2 {
        self.samples.last().unwrap().point
    }

    /// Point at arc length `s ∈ [0, length]`.
    pub fn point_at(&self, s: f64) -> Point2 {
        let i = self.piece_at(s);
        self.locate(i, s - self.offsets[i]).0
    }

    /// Unit tangent at arc length `s`. At a polyline corner the outgoing
    /// edge is used.
    pub fn tangent_at(&self, s: f64) -> Point2 {
        let i = self.piece_at(s);
        self.locate(i, s - self.offsets[i]).1
    }

    /// Arc-length breakpoints between smooth pieces, including both ends.
    pub fn smooth_breaks(&self) -> Vec<f64> {
        let mut b = self.offsets.clone();
        b.push(self.length);
        b
    }

    pub(crate) fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn piece_offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    /// Reflection across `x1 → -x1`.
    pub fn mirrored(&self) -> Result<CurveSegment> {
        let shape = match &self.shape {
            SegmentShape::Polyline(pts) => SegmentShape::Polyline(pts.iter().map(|p| p.mirrored()).collect()),
            &SegmentShape::Arc { center, radius, start_angle, sweep } => SegmentShape::Arc {
                center: center.mirrored(),
                radius,
                start_angle: std::f64::consts::PI - start_angle,
                sweep: -sweep,
            },
            // both profiles are even
            &SegmentShape::Graph { profile, x_start, x_end } => {
                SegmentShape::Graph { profile, x_start: -x_end, x_end: -x_start }
            }
        };
        CurveSegment::new(shape)
    }
}

/// Result of [`check_chord_arc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordArcReport {
    /// Smallest sampled value of `|Γ(s) - Γ(s')| / |s - s'|`.
    pub worst_ratio: f64,
    pub constant: f64,
    pub passed: bool,
}

/// Minimum chord-to-arc ratio over all sample pairs, compared with `c`.
///
/// For closed segments the arc distance is taken modulo the total length.
pub fn check_chord_arc(segment: &CurveSegment, c: f64) -> Result<ChordArcReport> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("chord-arc constant must be positive, got {c}")));
    }
    if !(segment.length() > 0.0) {
        return Err(Error::Geometry("degenerate segment".into()));
    }
    let samples = segment.samples();
    let total = segment.length();
    let mut worst = f64::INFINITY;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let mut arc = b.s - a.s;
            if segment.is_closed() {
                arc = arc.min(total - arc);
            }
            if arc <= 1e-12 * total {
                continue;
            }
            worst = worst.min(a.point.dist(b.point) / arc);
        }
    }
    let worst = worst.min(1.0);
    Ok(ChordArcReport { worst_ratio: worst, constant: c, passed: worst >= c })
}

/// Signed curvature `dθ/ds` from centred differences of the tangent angle.
pub fn curvature(segment: &CurveSegment, s: f64) -> Result<f64> {
    let len = segment.length();
    if !(s >= 0.0 && s <= len) {
        return Err(Error::Domain(format!("arc length {s} outside [0, {len}]")));
    }
    let h = (1e-5 * len).min(1e-4);
    let angle = |s: f64| {
        let t = segment.tangent_at(s);
        t.x2.atan2(t.x1)
    };
    let wrap = |d: f64| {
        let tau = 2.0 * std::f64::consts::PI;
        d - tau * (d / tau).round()
    };
    let (lo, hi) = if s - h < 0.0 {
        (0.0, 2.0 * h)
    } else if s + h > len {
        (len - 2.0 * h, len)
    } else {
        (s - h, s + h)
    };
    let mid = 0.5 * (lo + hi);
    // second-order one-sided correction near the ends
    let k_mid = wrap(angle(hi) - angle(lo)) / (hi - lo);
    if (mid - s).abs() < 1e-15 {
        return Ok(k_mid);
    }
    let k_left = wrap(angle(mid) - angle(lo)) / (mid - lo);
    let k_right = wrap(angle(hi) - angle(mid)) / (hi - mid);
    let slope = (k_right - k_left) / (0.5 * (hi - lo));
    Ok(k_mid + slope * (s - mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn semicircle(r: f64) -> CurveSegment {
        CurveSegment::new(SegmentShape::Arc { center: Point2::new(0.0, 0.0), radius: r, start_angle: PI, sweep: -PI })
            .unwrap()
    }

    #[test]
    fn semicircle_length_and_endpoints() {
        let c = semicircle(1.0);
        assert!((c.length() - PI).abs() < 1e-14);
        assert!(c.start().dist(Point2::new(-1.0, 0.0)) < 1e-14);
        assert!(c.end().dist(Point2::new(1.0, 0.0)) < 1e-14);
        assert!(c.point_at(0.5 * PI).dist(Point2::new(0.0, 1.0)) < 1e-14);
        // chord-sum oracle for the length
        let chord_sum: f64 = c.samples().windows(2).map(|w| w[0].point.dist(w[1].point)).sum();
        assert!((chord_sum - PI).abs() < 1e-5);
    }

    #[test]
    fn sample_spacing_matches_chords() {
        for seg in [
            semicircle(0.3),
            CurveSegment::new(SegmentShape::Graph {
                profile: GraphProfile::Bump { height: 0.5, width: 0.4 },
                x_start: -0.4 * 5f64.sqrt(),
                x_end: 0.4 * 5f64.sqrt(),
            })
            .unwrap(),
        ] {
            for w in seg.samples().windows(2) {
                let ds = w[1].s - w[0].s;
                assert!(((ds - w[0].point.dist(w[1].point)) / ds).abs() < SAMPLE_MISMATCH);
            }
        }
    }

    #[test]
    fn chord_arc_examples() {
        let line = CurveSegment::new(SegmentShape::Polyline(vec![Point2::new(0.0, 0.0), Point2::new(2.0, 1.0)])).unwrap();
        let r = check_chord_arc(&line, 1.0).unwrap();
        assert!(r.passed && (r.worst_ratio - 1.0).abs() < 1e-12);

        let r = check_chord_arc(&semicircle(1.0), 0.5).unwrap();
        assert!((r.worst_ratio - 2.0 / PI).abs() < 1e-6, "{}", r.worst_ratio);
        assert!(r.passed);

        let circle = CurveSegment::new(SegmentShape::Arc {
            center: Point2::new(0.0, 1.0),
            radius: 1.0,
            start_angle: -0.5 * PI,
            sweep: 2.0 * PI,
        })
        .unwrap();
        assert!(circle.is_closed());
        let r = check_chord_arc(&circle, 0.5).unwrap();
        assert!((r.worst_ratio - 2.0 / PI).abs() < 1e-6);
        assert!(check_chord_arc(&circle, 0.0).is_err());
    }

    #[test]
    fn graph_arc_length_inverts() {
        let seg = CurveSegment::new(SegmentShape::Graph {
            profile: GraphProfile::Gaussian { height: 1.0, width: 1.0 },
            x_start: -2.0,
            x_end: 3.0,
        })
        .unwrap();
        for i in 0..=20 {
            let s = seg.length() * i as f64 / 20.0;
            let p = seg.point_at(s);
            let back = seg.pieces()[0].s_of_param(p.x1);
            assert!((back - s).abs() < 1e-12, "s={s} back={back}");
            assert!((p.x2 - (-p.x1 * p.x1).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn curvature_examples() {
        let line = CurveSegment::new(SegmentShape::Polyline(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)])).unwrap();
        assert!(curvature(&line, 0.3).unwrap().abs() < 1e-12);

        let r = 0.7;
        let c = semicircle(r);
        for &s in &[0.0, 0.5, 1.0, c.length()] {
            assert!((curvature(&c, s).unwrap().abs() - 1.0 / r).abs() < 1e-6);
        }

        for &h in &[0.2, 1.0, 2.0] {
            let g = CurveSegment::new(SegmentShape::Graph {
                profile: GraphProfile::Gaussian { height: h, width: 1.0 },
                x_start: -3.0,
                x_end: 3.0,
            })
            .unwrap();
            let s0 = g.pieces()[0].s_of_param(0.0);
            let k = curvature(&g, s0).unwrap();
            assert!((k + 2.0 * h).abs() < 1e-6, "h={h}: {k}");
        }
        assert!(curvature(&line, 5.0).is_err());
    }

    #[test]
    fn bump_matches_gaussian_curvature_at_top() {
        let (h, w) = (0.3, 0.8);
        let (_, fp, fpp) = GraphProfile::Bump { height: h, width: w }.eval(0.0);
        assert_eq!(fp, 0.0);
        assert!((fpp + 2.0 * h / (w * w)).abs() < 1e-14);
        // derivative consistency away from the top
        let p = GraphProfile::Bump { height: h, width: w };
        for &x in &[-1.2, -0.3, 0.5, 1.5] {
            let e = 1e-5;
            let fd1 = (p.eval(x + e).0 - p.eval(x - e).0) / (2.0 * e);
            let fd2 = (p.eval(x + e).1 - p.eval(x - e).1) / (2.0 * e);
            assert!((fd1 - p.eval(x).1).abs() < 1e-8);
            assert!((fd2 - p.eval(x).2).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(CurveSegment::new(SegmentShape::Polyline(vec![Point2::new(0.0, 0.0)])).is_err());
        assert!(CurveSegment::new(SegmentShape::Polyline(vec![Point2::new(1.0, 0.0), Point2::new(1.0, 0.0)])).is_err());
        assert!(CurveSegment::new(SegmentShape::Arc {
            center: Point2::new(0.0, 0.0),
            radius: 0.0,
            start_angle: 0.0,
            sweep: 1.0
        })
        .is_err());
    }

    #[test]
    fn mirrored_arc_reflects_points() {
        let arc = CurveSegment::new(SegmentShape::Arc {
            center: Point2::new(0.5, 0.2),
            radius: 0.4,
            start_angle: 0.1,
            sweep: 2.0,
        })
        .unwrap();
        let m = arc.mirrored().unwrap();
        for i in 0..=10 {
            let s = arc.length() * i as f64 / 10.0;
            let p = arc.point_at(s).mirrored();
            assert!(m.point_at(m.length() - s).dist(p) < 1e-13 || m.point_at(s).dist(p) < 1e-13);
        }
    }
}
