//! Seeded random generators for fields, metrics and vectors.
//!
//! Everything random in the crate flows from a [`Prng`] (ChaCha8) seeded from an
//! explicit `u64`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{CMatrix, CVector, MatrixPolyField};

pub type Prng = ChaCha8Rng;

pub const PRNG_NAME: &str = "ChaCha8";

pub fn prng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream seed (splitmix64 of `seed` and `stream`).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_normal(rng: &mut Prng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rng: &mut Prng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng) * scale)
}

pub fn random_vector(rng: &mut Prng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng))
}

/// Uniform random direction in `ℂⁿ` (Euclidean unit length).
pub fn random_unit_vector(rng: &mut Prng, n: usize) -> CVector {
    loop {
        let v = random_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// `Σ_{j≤degree} G_j s^j` with entries of size `scale / (j+1)`.
pub fn random_holomorphic(
    rng: &mut Prng,
    rows: usize,
    cols: usize,
    degree: usize,
    scale: f64,
) -> MatrixPolyField {
    let terms = (0..=degree)
        .map(|j| (j, 0, random_matrix(rng, rows, cols, scale / (j + 1) as f64)))
        .collect::<Vec<_>>();
    MatrixPolyField::from_terms(rows, cols, terms).expect("consistent shapes")
}

/// Random positive-definite metric `c·I + G(s)^* G(s)` with `G` holomorphic.
pub fn random_metric(rng: &mut Prng, n: usize, degree: usize, scale: f64) -> MatrixPolyField {
    let g = random_holomorphic(rng, n, n, degree, scale);
    let floor = 0.5 + 0.5 * rng.random::<f64>();
    let gram = &g.adjoint() * &g;
    &MatrixPolyField::constant(CMatrix::identity(n, n) * Complex64::new(floor, 0.0)) + &gram
}

/// Random real-valued scalar polynomial in `(s, s̄)` of total degree ≤ `degree`.
pub fn random_real_poly(rng: &mut Prng, degree: usize, scale: f64) -> MatrixPolyField {
    let mut terms = Vec::new();
    for j in 0..=degree {
        for k in j..=degree - j {
            let c = complex_normal(rng) * scale;
            if j == k {
                terms.push((j, k, Complex64::new(c.re, 0.0)));
            } else {
                terms.push((j, k, c));
                terms.push((k, j, c.conj()));
            }
        }
    }
    MatrixPolyField::scalar_from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = random_matrix(&mut prng(7), 2, 2, 1.0);
        let b = random_matrix(&mut prng(7), 2, 2, 1.0);
        assert_eq!(a, b);
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
    }

    #[test]
    fn random_metric_is_hermitian_table() {
        let p = random_metric(&mut prng(3), 3, 2, 0.5);
        assert!(p.hermitian_symmetry_residual() < 1e-14);
    }

    #[test]
    fn random_real_poly_is_real() {
        let u = random_real_poly(&mut prng(11), 3, 1.0);
        let v = u.eval_scalar(Complex64::new(0.3, -0.7));
        assert!(v.im.abs() < 1e-14);
    }
}
