//! Gauss–Legendre rules, a log-weighted product rule and adaptive
//! Gauss–Kronrod integration.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A quadrature rule on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: (f64, f64),
}

impl QuadratureRule {
    /// Affinely maps the rule onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let (lo, hi) = self.domain;
        let scale = (b - a) / (hi - lo);
        QuadratureRule {
            nodes: self.nodes.iter().map(|&t| a + (t - lo) * scale).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
            domain: (a, b),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Values `P_0(x), …, P_{n-1}(x)`.
pub(crate) fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    if n == 1 {
        return out;
    }
    out.push(x);
    for k in 2..n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

/// The `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights, domain: (-1.0, 1.0) }
}

/// Moments `∫_{-1}^{1} P_m(t) ln|t - t0| dt` for `m < n`.
fn log_moments(n: usize, t0: f64) -> Vec<f64> {
    let mut mom = vec![0.0; n];
    let at_end = (1.0 - t0.abs()) < 1e-14;
    if at_end {
        // Legendre expansion of ln(1 - t): (ln 2 - 1) P_0 - Σ (2m+1)/(m(m+1)) P_m
        let sign = t0.signum();
        for (m, slot) in mom.iter_mut().enumerate() {
            let v = if m == 0 {
                2.0 * std::f64::consts::LN_2 - 2.0
            } else {
                -2.0 / ((m * (m + 1)) as f64)
            };
            // ln|t + 1| is the mirror image: P_m(-t) = (-1)^m P_m(t)
            *slot = if sign > 0.0 || m % 2 == 0 { v } else { -v };
        }
        return mom;
    }
    // Legendre functions of the second kind on the cut
    let mut q = vec![0.0; n + 1];
    q[0] = 0.5 * ((1.0 + t0) / (1.0 - t0)).ln();
    if n >= 1 {
        q[1] = t0 * q[0] - 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        q[k + 1] = ((2.0 * kf + 1.0) * t0 * q[k] - kf * q[k - 1]) / (kf + 1.0);
    }
    mom[0] = (1.0 - t0) * (1.0 - t0).ln() + (1.0 + t0) * (1.0 + t0).ln() - 2.0;
    for m in 1..n {
        mom[m] = 2.0 * (q[m + 1] - q[m - 1]) / (2.0 * m as f64 + 1.0);
    }
    mom
}

/// Product rule on `[a, b]` for `∫ f(s) ln|s - s0| ds` at the `n` Gauss–Legendre
/// nodes of the interval; exact for polynomial `f` of degree below `n`.
pub fn log_product_rule(a: f64, b: f64, s0: f64, n: usize) -> Result<QuadratureRule> {
    let half = 0.5 * (b - a);
    if !(half > 0.0) {
        return Err(Error::Domain(format!("degenerate panel [{a}, {b}]")));
    }
    let mid = 0.5 * (a + b);
    let t0 = if s0 == a {
        -1.0
    } else if s0 == b {
        1.0
    } else {
        (s0 - mid) / half
    };
    if t0.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("target {s0} outside panel [{a}, {b}]")));
    }
    let t0 = t0.clamp(-1.0, 1.0);
    let gl = gauss_legendre(n);
    let mom = log_moments(n, t0);
    let ln_half = half.ln();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&t, &g) in gl.nodes.iter().zip(&gl.weights) {
        let p = legendre_values(n, t);
        let w_ref: f64 = (0..n).map(|m| 0.5 * (2.0 * m as f64 + 1.0) * p[m] * mom[m]).sum::<f64>() * g;
        nodes.push(mid + half * t);
        weights.push(half * (w_ref + g * ln_half));
    }
    Ok(QuadratureRule { nodes, weights, domain: (a, b) })
}

/// Values the adaptive integrator can accumulate.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let est = kron * h;
    let err = ((kron - gauss) * h).magnitude();
    (est, err)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_segments: 2000 }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over the given
/// breakpoints. Returns the estimate and the summed error estimate.
pub fn integrate_adaptive<T: Integrand, F: FnMut(f64) -> T>(
    mut f: F,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> (T, f64) {
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let mut count = heap.len();
    while total_err > opts.abs_tol.max(opts.rel_tol * total.magnitude()) && count < opts.max_segments {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed accumulated rounding
    let mut sum = T::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        sum = sum + s.value;
        err += s.error;
    }
    (sum, err)
}

/// Adaptive integration over `[a, ∞)` by the map `t = a + L u / (1 - u)`.
pub fn integrate_to_infinity<T: Integrand, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    length_scale: f64,
    opts: AdaptiveOptions,
) -> (T, f64) {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        if one_minus <= 0.0 {
            return T::zero();
        }
        let t = a + length_scale * u / one_minus;
        let jac = length_scale / (one_minus * one_minus);
        let v = f(t);
        if v.magnitude() == 0.0 {
            T::zero()
        } else {
            v * jac
        }
    };
    integrate_adaptive(g, &[0.0, 0.25, 0.5, 0.75, 1.0], opts)
}
