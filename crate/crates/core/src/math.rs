//! Small numerical helpers shared across the crate.


/// sqrt(2/pi), the leading coefficient of the constant-boundary survival
/// asymptotics.
pub const SQRT_2_OVER_PI: f64 = 0.7978845608028654;

/// 2*sqrt(2/pi), the mean modulus of a standard three-dimensional normal
/// vector. Used as the default repulsion constant c1 = c2.
pub const BESSEL3_MEAN: f64 = 1.5957691216057308;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Density of N(0, var) at x.
pub fn norm_pdf_var(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}
