//! Deterministic scalar numerics shared by every other module.

mod quadrature;
mod rng;

pub use quadrature::{expect_std_normal, gauss_hermite_rule, QuadratureRule, DEFAULT_ORDER, MAX_ORDER};
pub use rng::{rng_stream, stream_id_for, RngStream, StreamPurpose};

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
