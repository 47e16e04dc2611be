//! Principal values of `∫₀^∞ f(t)/(t - t0) dt`.

use crate::error::{Error, Result};

use super::quadrature::{integrate_adaptive, AdaptiveOptions, Integrand};

/// Numerator `f` and the singular point `t0 > 0` of a principal-value integral
/// over `[0, ∞)`.
pub struct PvIntegrand<F> {
    pub numerator: F,
    pub singular_point: f64,
}

/// How the neighbourhood of the singular point is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvScheme {
    /// Integrate `(f(t) - f(t0))/(t - t0)` over `[0, 2 t0]`; the subtracted
    /// constant has zero principal value on the symmetric window.
    Subtraction,
    /// Fold the window: `∫₀^{t0} (f(t0+u) - f(t0-u))/u du`.
    SymmetricWindow,
}

const MAX_CUTOFF: f64 = 1e8;

/// Principal value over `[0, ∞)`.
///
/// `decay_rate` is an exponential rate `r` such that `|f(t)|` is bounded by
/// `|f(T)| e^{-r (t - T)}` past the truncation point `T`; it sets where the
/// tail is dropped with a bound below `tol`.
pub fn pv_semiinfinite<T, F>(integrand: &PvIntegrand<F>, decay_rate: f64, scheme: PvScheme, tol: f64) -> Result<T>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    let t0 = integrand.singular_point;
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::Domain(format!("singular point {t0} must lie inside (0, ∞)")));
    }
    if !(decay_rate > 0.0) {
        return Err(Error::Domain("tail decay rate must be positive".into()));
    }
    let f = &integrand.numerator;
    let opts = AdaptiveOptions { abs_tol: 0.1 * tol, rel_tol: 1e-13, max_segments: 4000 };

    let window = match scheme {
        PvScheme::Subtraction => {
            let f0 = f(t0);
            integrate_adaptive(|t| (f(t) - f0) * (1.0 / (t - t0)), &[0.0, t0, 2.0 * t0], opts).0
        }
        PvScheme::SymmetricWindow => {
            integrate_adaptive(|u| (f(t0 + u) - f(t0 - u)) * (1.0 / u), &[0.0, t0], opts).0
        }
    };

    let start = 2.0 * t0;
    let mut cutoff = start + 1.0 / decay_rate;
    loop {
        // envelope over a short window past the cut, so oscillating numerators are not caught at a zero
        let envelope = (0..8)
            .map(|j| f(cutoff + j as f64 * 0.25 / decay_rate).magnitude())
            .fold(0.0, f64::max);
        let bound = envelope / (decay_rate * (cutoff - t0));
        if bound < 0.1 * tol {
            break;
        }
        cutoff = start + 2.0 * (cutoff - start);
        if cutoff > MAX_CUTOFF {
            return Err(Error::Convergence(format!(
                "principal-value tail bound {bound:e} not reachable below {tol:e}"
            )));
        }
    }
    let n_pieces = ((cutoff - start) * decay_rate).ceil().clamp(1.0, 400.0) as usize;
    let breaks: Vec<f64> = (0..=n_pieces).map(|i| start + (cutoff - start) * i as f64 / n_pieces as f64).collect();
    let tail = integrate_adaptive(|t| f(t) * (1.0 / (t - t0)), &breaks, opts).0;
    Ok(window + tail)
}
