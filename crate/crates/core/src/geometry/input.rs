//! Structured geometry descriptions and the built-in families.

use serde::{Deserialize, Serialize};

use super::curve::{GraphProfile, Point2, SegmentShape};

/// Serializable description of a deformation.
///
/// ```toml
/// removed_intervals = [[-1.0, 1.0]]
/// [[segments]]
/// kind = "arc"
/// center = [0.0, 0.0]
/// radius = 1.0
/// start_angle = 3.141592653589793
/// sweep = -3.141592653589793
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default)]
    pub removed_intervals: Vec<[f64; 2]>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

/// One deformation segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Polyline { points: Vec<[f64; 2]> },
    Arc { center: [f64; 2], radius: f64, start_angle: f64, sweep: f64 },
    Graph { x_start: f64, x_end: f64, profile: GraphProfile },
}

impl SegmentSpec {
    pub fn to_shape(&self) -> SegmentShape {
        match self {
            SegmentSpec::Polyline { points } => {
                SegmentShape::Polyline(points.iter().map(|p| Point2::new(p[0], p[1])).collect())
            }
            &SegmentSpec::Arc { center, radius, start_angle, sweep } => {
                SegmentShape::Arc { center: Point2::new(center[0], center[1]), radius, start_angle, sweep }
            }
            &SegmentSpec::Graph { x_start, x_end, profile } => SegmentShape::Graph { profile, x_start, x_end },
        }
    }
}

/// Named geometry families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryFamily {
    /// Straight line with the interval `(-L/2, L/2)` removed.
    Gap { length: f64 },
    /// Smooth graph `h (1 - x1²/(5w²))^5` replacing `|x1| < √5 w`.
    Bump { height: f64, width: f64 },
    /// Gap `(-g/2, g/2)` with a detached vertical stub of length `L` above
    /// it, starting at height `g/2`.
    Stub { length: f64, gap: f64 },
    /// Full circle of radius `r` resting on the line at `x1 = contact`.
    Circle { radius: f64, contact: f64 },
    /// Semicircle of radius `r` bridging the removed interval `(-r, r)`.
    SemicircleDetour { radius: f64 },
}

impl GeometryFamily {
    pub fn spec(&self) -> GeometrySpec {
        use std::f64::consts::PI;
        match *self {
            GeometryFamily::Gap { length } => {
                GeometrySpec { removed_intervals: vec![[-0.5 * length, 0.5 * length]], segments: vec![] }
            }
            GeometryFamily::Bump { height, width } => {
                let a = 5f64.sqrt() * width;
                GeometrySpec {
                    removed_intervals: vec![[-a, a]],
                    segments: vec![SegmentSpec::Graph {
                        x_start: -a,
                        x_end: a,
                        profile: GraphProfile::Bump { height, width },
                    }],
                }
            }
            GeometryFamily::Stub { length, gap } => GeometrySpec {
                removed_intervals: vec![[-0.5 * gap, 0.5 * gap]],
                segments: vec![SegmentSpec::Polyline { points: vec![[0.0, 0.5 * gap], [0.0, 0.5 * gap + length]] }],
            },
            GeometryFamily::Circle { radius, contact } => GeometrySpec {
                removed_intervals: vec![],
                segments: vec![SegmentSpec::Arc {
                    center: [contact, radius],
                    radius,
                    start_angle: -0.5 * PI,
                    sweep: 2.0 * PI,
                }],
            },
            GeometryFamily::SemicircleDetour { radius } => GeometrySpec {
                removed_intervals: vec![[-radius, radius]],
                segments: vec![SegmentSpec::Arc { center: [0.0, 0.0], radius, start_angle: PI, sweep: -PI }],
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_round_trip_through_json() {
        let f = GeometryFamily::Bump { height: 0.2, width: 0.5 };
        let text = serde_json::to_string(&f.spec()).unwrap();
        let back: GeometrySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f.spec());
    }
}
