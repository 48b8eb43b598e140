use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_CIRCLE_NODES: usize = 16;

/// Trapezoid rule for `∫₀¹ u(z0 + r e^{2πiτ}) dτ` with `nodes` equispaced samples.
///
/// Spectrally accurate for smooth periodic integrands and exact for trigonometric
/// polynomials of degree below `nodes`.
pub fn circle_average<F>(u: F, z0: Complex64, r: f64, nodes: usize) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    try_circle_average(|z| Some(u(z)), z0, r, nodes)
}

/// As [`circle_average`] but `u` may decline to produce a value (masked sample).
pub fn try_circle_average<F>(u: F, z0: Complex64, r: f64, nodes: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Option<f64>,
{
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("circle radius must be positive".into()));
    }
    if nodes < MIN_CIRCLE_NODES {
        return Err(Error::InvalidArgument(format!(
            "circle average needs at least {MIN_CIRCLE_NODES} nodes"
        )));
    }
    let mut sum = 0.0;
    for k in 0..nodes {
        let z = z0 + Complex64::from_polar(r, TAU * k as f64 / nodes as f64);
        match u(z) {
            Some(v) if v.is_finite() => sum += v,
            _ => return Err(Error::NonFinite(z)),
        }
    }
    Ok(sum / nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_mean_value() {
        let z0 = Complex64::new(0.3, -1.2);
        let avg = circle_average(|z| z.re, z0, 0.7, 32).unwrap();
        assert!((avg - z0.re).abs() < 1e-14);
    }

    #[test]
    fn abs_squared_average() {
        let avg = circle_average(|z| z.norm_sqr(), Complex64::new(0.0, 0.0), 1.0, 16).unwrap();
        assert!((avg - 1.0).abs() < 1e-14);
        // |c|^2 + r^2
        let c = Complex64::new(0.5, 0.25);
        let avg = circle_average(|z| z.norm_sqr(), c, 0.3, 16).unwrap();
        assert!((avg - (0.3125 + 0.09)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_sample_is_flagged() {
        let r = circle_average(|z| z.re.sqrt(), Complex64::new(0.0, 0.0), 1.0, 16);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(circle_average(|z| z.re, Complex64::new(0.0, 0.0), 1.0, 8).is_err());
    }
}
