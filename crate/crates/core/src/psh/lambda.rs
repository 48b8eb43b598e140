//! Finite-radius sub-mean-value quotients.
//!
//! `Λu(z0) = limsup_{r→0} r⁻²(⨍_{|z−z0|=r} u − u(z0))`. The limit is replaced by a
//! maximum over a fixed ladder of radii; for `u ∈ C²` every rung converges to
//! `∂²u/∂z∂z̄` with an `O(r²)` error.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::quadrature::try_circle_average;
use crate::random::{complex_normal, Prng};

/// `r⁻²(circle average − u(z0))` at each radius; `None` where the circle is invalid.
pub fn lambda_ladder<F>(u: F, z0: Complex64, radii: &[f64], nodes: usize) -> Result<Vec<Option<f64>>>
where
    F: Fn(Complex64) -> Option<f64>,
{
    let centre = match u(z0) {
        Some(v) if v.is_finite() => v,
        _ => return Err(Error::NonFinite(z0)),
    };
    check_radii(radii)?;
    radii
        .iter()
        .map(|&r| match try_circle_average(&u, z0, r, nodes) {
            Ok(avg) => Ok(Some((avg - centre) / (r * r))),
            Err(Error::NonFinite(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Maximum of [`lambda_ladder`] over the valid radii.
pub fn lambda_estimate<F>(u: F, z0: Complex64, radii: &[f64], nodes: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Option<f64>,
{
    lambda_ladder(u, z0, radii, nodes)?
        .into_iter()
        .flatten()
        .reduce(f64::max)
        .ok_or_else(|| Error::NonFinite(z0))
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    Ok(())
}

/// `ξξ̄u` at `s` on a multi-dimensional base: the minimum of `Λ(u∘f)(0)` over the
/// affine disk `f(z) = s + zξ` and `disk_samples` random quadratic disks
/// `f(z) = s + zξ + z²η`.
pub fn xi_xibar_estimate<F>(
    u: F,
    s: &[Complex64],
    xi: &[Complex64],
    disk_samples: usize,
    radii: &[f64],
    nodes: usize,
    rng: &mut Prng,
) -> Result<f64>
where
    F: Fn(&[Complex64]) -> f64,
{
    if s.is_empty() || s.len() != xi.len() {
        return Err(Error::Shape(
            "base point and direction must have the same positive dimension".into(),
        ));
    }
    let xi_norm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut disks = vec![vec![Complex64::new(0.0, 0.0); s.len()]];
    for _ in 0..disk_samples {
        let eta: Vec<Complex64> = (0..s.len())
            .map(|_| complex_normal(rng) * xi_norm.max(1.0) * rng.random::<f64>())
            .collect();
        disks.push(eta);
    }
    let mut best = f64::INFINITY;
    for eta in &disks {
        let restricted = |z: Complex64| {
            let p: Vec<Complex64> = (0..s.len()).map(|d| s[d] + z * xi[d] + z * z * eta[d]).collect();
            let v = u(&p);
            v.is_finite().then_some(v)
        };
        best = best.min(lambda_estimate(restricted, Complex64::new(0.0, 0.0), radii, nodes)?);
    }
    Ok(best)
}
