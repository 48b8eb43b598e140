//! Taylor surrogates for non-polynomial fields.
//!
//! Exponentials of real polynomials and pointwise inverses of metric fields are not
//! polynomial; these routines build polynomial stand-ins about a chosen centre and
//! certify them against the exact pointwise values on a grid.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::grid::GridDomain;
use crate::field::poly::{CMatrix, MatrixPolyField};

/// Default number of Taylor terms for exponential surrogates.
pub const DEFAULT_EXP_ORDER: usize = 10;
/// Default total degree for inverse / connection-form surrogates.
pub const DEFAULT_SURROGATE_DEGREE: usize = 10;

/// `e^{u}` truncated after `order` terms of the exponential series about `center`.
///
/// `u` must be a scalar field. With `N = u − u(center)` the result is
/// `e^{u(center)} Σ_{n≤order} Nⁿ/n!`, so for `u = |s|²` and `center = 0` it is the
/// familiar `Σ |s|^{2n}/n!`.
pub fn exp_series(u: &MatrixPolyField, center: Complex64, order: usize) -> MatrixPolyField {
    LocalExpSums::new(u, center)
        .nth(order)
        .expect("the series never ends")
        .translate(-center)
}

/// Partial sums `e^{u(c)} Σ_{n≤k} Nⁿ/n!` for `k = 0, 1, …`, in the local variable
/// `t = s − c`.
struct LocalExpSums {
    rest: MatrixPolyField,
    term: MatrixPolyField,
    sum: Option<MatrixPolyField>,
    n: usize,
}

impl LocalExpSums {
    fn new(u: &MatrixPolyField, center: Complex64) -> Self {
        assert_eq!(u.shape(), (1, 1), "exp_series expects a scalar field");
        let local = u.translate(center);
        let u0 = local.coeff(0, 0).map(|m| m[(0, 0)]).unwrap_or_default();
        let mut rest = local.clone();
        if let Some(c) = local.coeff(0, 0) {
            rest.add_term(0, 0, &(-c));
            rest.prune();
        }
        let term = MatrixPolyField::constant(CMatrix::from_element(1, 1, u0.exp()));
        Self {
            rest,
            term,
            sum: None,
            n: 0,
        }
    }
}

impl Iterator for LocalExpSums {
    type Item = MatrixPolyField;

    fn next(&mut self) -> Option<MatrixPolyField> {
        let sum = match self.sum.take() {
            None => self.term.clone(),
            Some(prev) => {
                self.n += 1;
                self.term = (&self.term * &self.rest).scale(Complex64::new(1.0 / self.n as f64, 0.0));
                &prev + &self.term
            }
        };
        self.sum = Some(sum.clone());
        Some(sum)
    }
}

/// An exponential surrogate together with its certified relative residual.
#[derive(Clone, Debug)]
pub struct ExpSurrogate {
    pub field: MatrixPolyField,
    pub order: usize,
    pub residual: f64,
}

/// Smallest-order exponential surrogate whose relative error on `domain` is below
/// `rel_tol`, searching up to `max_order` terms.
pub fn exp_certified(
    u: &MatrixPolyField,
    domain: &GridDomain,
    rel_tol: f64,
    max_order: usize,
) -> Result<ExpSurrogate> {
    let check = certification_points(domain);
    let exact: Vec<f64> = check.iter().map(|&s| u.eval_scalar(s).re.exp()).collect();
    let c = domain.center();
    let mut last = f64::INFINITY;
    for (order, local) in LocalExpSums::new(u, c).take(max_order + 1).enumerate() {
        let residual = check
            .iter()
            .zip(&exact)
            .map(|(&s, &e)| (local.eval_scalar(s - c).re - e).abs() / e)
            .fold(0.0, f64::max);
        last = residual;
        if residual <= rel_tol {
            return Ok(ExpSurrogate {
                field: local.translate(-c),
                order,
                residual,
            });
        }
    }
    Err(Error::SurrogateResidual {
        residual: last,
        tolerance: rel_tol,
        degree: max_order,
    })
}

/// Degree-`degree` Taylor polynomial of `P(s)⁻¹` about `center`.
pub fn inverse_taylor(p: &MatrixPolyField, center: Complex64, degree: usize) -> Result<MatrixPolyField> {
    Ok(inverse_taylor_local(p, center, degree)?.translate(-center))
}

/// As [`inverse_taylor`] but expressed in the local variable `t = s − center`.
pub(crate) fn inverse_taylor_local(
    p: &MatrixPolyField,
    center: Complex64,
    degree: usize,
) -> Result<MatrixPolyField> {
    if !p.is_square() {
        return Err(Error::Shape("inverse of a non-square field".into()));
    }
    let n = p.rows();
    let local = p.translate(center);
    let p0 = local
        .coeff(0, 0)
        .cloned()
        .unwrap_or_else(|| DMatrix::zeros(n, n));
    let p0_inv = p0
        .clone()
        .try_inverse()
        .ok_or(Error::Factorization(center))?;
    let mut rest = local.clone();
    rest.add_term(0, 0, &(-&p0));
    rest.prune();
    // P⁻¹ = Σ (−P0⁻¹ N)ⁿ P0⁻¹
    let step = rest.left_mul_const(&(-&p0_inv));
    let mut term = MatrixPolyField::constant(p0_inv.clone());
    let mut sum = term.clone();
    for _ in 1..=degree {
        term = step.mul_truncated(&term, Some(degree));
        if term.is_zero() {
            break;
        }
        sum = &sum + &term;
    }
    Ok(sum)
}

/// Points used to certify surrogates: a 33×33 sub-sampling of the domain.
pub(crate) fn certification_points(domain: &GridDomain) -> Vec<Complex64> {
    let coarse = domain
        .with_resolution(domain.resolution().min(33))
        .expect("valid resolution");
    coarse.nodes().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs2() -> MatrixPolyField {
        MatrixPolyField::scalar_monomial(1, 1, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn exp_series_of_abs2_has_factorial_coefficients() {
        let e = exp_series(&abs2(), Complex64::new(0.0, 0.0), 4);
        for n in 0..=4usize {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let c = e.coeff(n, n).unwrap()[(0, 0)];
            assert!((c.re - 1.0 / fact).abs() < 1e-15);
        }
        assert_eq!(e.max_degree(), 8);
    }

    #[test]
    fn exp_certified_reaches_tolerance() {
        let d = GridDomain::square(Complex64::new(0.0, 0.0), 1.0, 65).unwrap();
        let e = exp_certified(&abs2(), &d, 1e-12, 40).unwrap();
        assert!(e.residual <= 1e-12);
        let s = Complex64::new(0.6, -0.8);
        assert!((e.field.eval_scalar(s).re - 1f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn exp_about_offset_center() {
        let u = &abs2().scale(Complex64::new(-0.5, 0.0))
            + &MatrixPolyField::scalar_from_terms([(1, 0, Complex64::new(0.2, 0.0)), (0, 1, Complex64::new(0.2, 0.0))]);
        let d = GridDomain::square(Complex64::new(0.5, 0.5), 0.5, 33).unwrap();
        let e = exp_certified(&u, &d, 1e-12, 40).unwrap();
        let s = Complex64::new(0.9, 0.1);
        let exact = u.eval_scalar(s).re.exp();
        assert!((e.field.eval_scalar(s).re - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn inverse_taylor_of_one_plus_abs2() {
        let p = &MatrixPolyField::identity(1) + &abs2();
        let inv = inverse_taylor(&p, Complex64::new(0.0, 0.0), 24).unwrap();
        let s = Complex64::new(0.2, 0.1);
        let exact = 1.0 / (1.0 + s.norm_sqr());
        assert!((inv.eval_scalar(s).re - exact).abs() < 1e-12);
    }
}
