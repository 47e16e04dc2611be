//! Special functions and quadrature primitives.

mod bessel;
mod pv;
mod quadrature;

pub use bessel::{bessel_i0, bessel_i1, k0_expansions, macdonald_k0, macdonald_k0_complex, macdonald_k1, macdonald_k1_scaled, EULER_GAMMA};
pub(crate) use bessel::k0_unchecked;
pub use pv::{pv_semiinfinite, PvIntegrand, PvScheme};
pub use quadrature::{
    gauss_legendre, integrate_adaptive, integrate_to_infinity, log_product_rule, AdaptiveOptions, Integrand,
    QuadratureRule,
};
