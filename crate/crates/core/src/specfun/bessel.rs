//! Modified Bessel functions of integer order 0 and 1.
//!
//! `K0` and `K1` use the ascending series below `x = 2` and Steed's
//! continued fraction (Temme's CF2) above it. The two branches agree to a
//! few ulps on the overlap region, which the tests check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// Macdonald function `K0(x)` for `x > 0`.
///
/// Underflows to zero beyond `x ≈ 745`.
pub fn macdonald_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K0 needs a positive finite argument, got {x}")));
    }
    Ok(if x < SERIES_CUTOFF {
        k0_series(x)
    } else {
        k01_continued_fraction(x).0 * (-x).exp()
    })
}

/// `K1(x)` for `x > 0`.
pub fn macdonald_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K1 needs a positive finite argument, got {x}")));
    }
    Ok(if x < SERIES_CUTOFF {
        k1_series(x)
    } else {
        k01_continued_fraction(x).1 * (-x).exp()
    })
}

/// `K1(x)·e^x` for `x > 0`, safe for large arguments.
pub fn macdonald_k1_scaled(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        k1_series(x) * x.exp()
    } else {
        k01_continued_fraction(x).1
    }
}

/// `K0(x)` from the ascending series and from the continued fraction, in
/// that order. Used to cross-check the branches where both converge.
pub fn k0_expansions(x: f64) -> (f64, f64) {
    (k0_series(x), k01_continued_fraction(x).0 * (-x).exp())
}

/// `K0` without the domain check; callers guarantee `x > 0`.
#[inline]
pub(crate) fn k0_unchecked(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        k0_series(x)
    } else if x > 745.0 {
        0.0
    } else {
        k01_continued_fraction(x).0 * (-x).exp()
    }
}

/// `I0(x)` by its power series. Intended for moderate arguments.
pub fn bessel_i0(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * kf);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `I1(x)` by its power series.
pub fn bessel_i1(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

/// Ascending series `K0(x) = -(ln(x/2)+γ) I0(x) + Σ H_k (x²/4)^k / (k!)²`.
pub(crate) fn k0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let lead = -((0.5 * x).ln() + EULER_GAMMA);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut rest = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        rest += harmonic * term;
        if term * (1.0 + harmonic) < 1e-18 * (i0 + rest.abs()) {
            break;
        }
    }
    lead * i0 + rest
}

/// `K1(x) = 1/x + ln(x/2) I1(x) - (x/4) Σ (ψ(k+1)+ψ(k+2)) (x²/4)^k / (k!(k+1)!)`.
pub(crate) fn k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut h_k = 0.0;
    let mut sum = (-2.0 * EULER_GAMMA + 1.0) * term;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        let h_k1 = h_k + 1.0 / (kf + 1.0);
        let add = (-2.0 * EULER_GAMMA + h_k + h_k1) * term;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * bessel_i1(x) - 0.25 * x * sum
}

/// Steed's continued fraction for order zero; returns `(K0(x)e^x, K1(x)e^x)`.
pub(crate) fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=20_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `K0(z)` for complex `z` with `Re z > 0`, from `∫₀^∞ exp(-z cosh t) dt`.
///
/// The trapezoidal rule converges geometrically for this integrand; the
/// step is halved until two passes agree.
pub fn macdonald_k0_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("complex K0 needs Re z > 0, got {z}")));
    }
    let f = |t: f64| (-z * t.cosh()).exp();
    // cut where |integrand| < 1e-300 relative scale
    let t_max = (2.0 * 745.0 / z.re).ln().max(1.0) + 1.0;
    let mut h = 0.25;
    let mut prev: Option<Complex64> = None;
    loop {
        let n = (t_max / h).ceil() as usize;
        let mut sum = 0.5 * f(0.0);
        for i in 1..=n {
            sum += f(i as f64 * h);
        }
        let val = sum * h;
        if let Some(p) = prev {
            if (val - p).norm() <= 1e-14 * val.norm().max(1e-300) || h < 1e-4 {
                return Ok(val);
            }
        }
        prev = Some(val);
        h *= 0.5;
    }
}
