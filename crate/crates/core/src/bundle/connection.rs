//! Chern connection, covariant derivative and curvature of a [`MetricField`].
//!
//! In the holomorphic frame the connection form on `∂/∂s` is `A = P⁻¹∂P`, so for a
//! holomorphic section `f` we have `∇f = ∂f/∂s + A f`, and the curvature operator
//! `R(∂/∂s, ∂/∂s̄) = ∇_s∇_s̄ − ∇_s̄∇_s` reduces to `−∂̄A`.

use num_complex::Complex64;

use crate::bundle::metric::{MetricField, PointMetric};
use crate::error::{Error, Result};
use crate::field::fd::fd_levi_extrapolated;
use crate::field::poly::{CMatrix, CVector, MatrixPolyField};
use crate::field::surrogate::{certification_points, inverse_taylor_local};

/// Curvature self-adjointness tolerance on the exact path.
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-8;
/// Residual allowed for a connection-form surrogate (relative to `1 + ‖A‖`).
pub const CONNECTION_SURROGATE_TOLERANCE: f64 = 1e-8;

/// A section `s ↦ f(s) ∈ ℂⁿ` of the trivial bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionField {
    f: MatrixPolyField,
}

impl SectionField {
    pub fn new(f: MatrixPolyField) -> Result<Self> {
        if f.cols() != 1 {
            return Err(Error::Shape(format!(
                "a section must be a column field, got {} columns",
                f.cols()
            )));
        }
        Ok(Self { f })
    }

    /// The constant section `f ≡ w`.
    pub fn constant(w: &CVector) -> Self {
        Self {
            f: MatrixPolyField::constant(CMatrix::from_column_slice(w.len(), 1, w.as_slice())),
        }
    }

    pub fn field(&self) -> &MatrixPolyField {
        &self.f
    }

    pub fn rank(&self) -> usize {
        self.f.rows()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.f.is_holomorphic()
    }

    pub fn eval(&self, s: Complex64) -> CVector {
        self.f.eval_vector(s)
    }

    fn require_holomorphic(&self) -> Result<()> {
        if self.is_holomorphic() {
            Ok(())
        } else {
            Err(Error::InvalidArgument("section must be holomorphic".into()))
        }
    }
}

/// `‖PR − R^*P‖ / ‖PR‖`, with the denominator floored at a small multiple of the
/// magnitude of the two terms making up `PR` (so a genuinely flat point reports 0).
pub fn self_adjointness_residual(pm: &PointMetric) -> f64 {
    let t1 = &pm.dbp * pm.solve(&pm.dp);
    let pr = &t1 - &pm.ddbp;
    let r = pm.solve(&pr);
    let lhs = &pm.p * &r;
    let num = (&lhs - lhs.adjoint()).norm();
    if num == 0.0 {
        return 0.0;
    }
    let floor = 1e-6 * (t1.norm() + pm.ddbp.norm());
    num / lhs.norm().max(floor)
}

impl MetricField {
    /// Connection matrix `A(s) = P(s)⁻¹ ∂P(s)`, by a per-point solve.
    pub fn connection_at(&self, s: Complex64) -> Result<CMatrix> {
        Ok(self.at(s)?.connection())
    }

    /// Degree-`degree` Taylor surrogate of `θ(∂/∂s) = P⁻¹∂P` about the domain
    /// centre, certified against per-point solves on the domain.
    pub fn connection_form(&self, degree: usize) -> Result<MatrixPolyField> {
        let center = self.domain().center();
        let inv = inverse_taylor_local(self.field(), center, degree)?;
        let dp_local = self.field().d_s().translate(center);
        let theta = inv.mul_truncated(&dp_local, Some(degree)).translate(-center);
        let mut worst: f64 = 0.0;
        for s in certification_points(self.domain()) {
            let exact = self.connection_at(s)?;
            let err = (theta.eval(s) - &exact).norm() / (1.0 + exact.norm());
            worst = worst.max(err);
        }
        if worst > CONNECTION_SURROGATE_TOLERANCE {
            return Err(Error::SurrogateResidual {
                residual: worst,
                tolerance: CONNECTION_SURROGATE_TOLERANCE,
                degree,
            });
        }
        Ok(theta)
    }

    /// `∇_{∂/∂s} φ = ∂f/∂s + A f` at `s`.
    pub fn covariant_derivative(&self, section: &SectionField, s: Complex64) -> Result<CVector> {
        section.require_holomorphic()?;
        self.check_rank(section)?;
        let pm = self.at(s)?;
        Ok(covariant_at(&pm, section, s))
    }

    /// Curvature operator `R(∂/∂s, ∂/∂s̄)` at `s`, checked for `h`-self-adjointness.
    pub fn curvature_operator(&self, s: Complex64) -> Result<CMatrix> {
        let pm = self.at(s)?;
        let residual = self_adjointness_residual(&pm);
        if residual > SELF_ADJOINT_TOLERANCE {
            return Err(Error::SelfAdjointness {
                node: s,
                residual,
                tolerance: SELF_ADJOINT_TOLERANCE,
            });
        }
        Ok(pm.curvature())
    }

    /// Both sides of the identity
    /// `∂∂̄ log h(φ,φ) = −h(φ,Rφ)/h(φ,φ) + [h(∇φ,∇φ)h(φ,φ) − |h(∇φ,φ)|²]/h(φ,φ)²`,
    /// the left by extrapolated finite differences and the right from the exact curvature.
    pub fn eq23(&self, section: &SectionField, s: Complex64, step: f64) -> Result<Eq23> {
        section.require_holomorphic()?;
        self.check_rank(section)?;
        let pm = self.at(s)?;
        let phi = section.eval(s);
        let h = pm.norm_sqr(&phi);
        if !(h > 0.0) {
            return Err(Error::VanishingSection(s));
        }
        let log_h = |z: Complex64| {
            let v = section.eval(z);
            let pz = self.field().eval(z);
            v.dotc(&(pz * &v)).re.ln()
        };
        let lhs = fd_levi_extrapolated(log_h, s, step, Some(self.domain()))?;

        let r_phi = pm.curvature() * &phi;
        let nabla = covariant_at(&pm, section, s);
        let h_phi_rphi = pm.inner(&phi, &r_phi).re;
        let h_nn = pm.norm_sqr(&nabla);
        let h_np = pm.inner(&nabla, &phi);
        let rhs = -h_phi_rphi / h + (h_nn * h - h_np.norm_sqr()) / (h * h);
        Ok(Eq23 {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        })
    }

    /// `|LHS − RHS|` of [`MetricField::eq23`].
    pub fn eq23_residual(&self, section: &SectionField, s: Complex64, step: f64) -> Result<f64> {
        Ok(self.eq23(section, s, step)?.residual)
    }

    fn check_rank(&self, section: &SectionField) -> Result<()> {
        if section.rank() != self.rank() {
            return Err(Error::Shape(format!(
                "section of rank {} for a rank-{} metric",
                section.rank(),
                self.rank()
            )));
        }
        Ok(())
    }
}

pub(crate) fn covariant_at(pm: &PointMetric, section: &SectionField, s: Complex64) -> CVector {
    let f = section.eval(s);
    let df = section.field().d_s().eval_vector(s);
    df + pm.connection() * f
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eq23 {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fd::{fd_derivative, FdKind};
    use crate::field::surrogate::exp_certified;
    use crate::field::GridDomain;
    use crate::random::{prng, random_holomorphic, random_metric};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn abs2(scale: f64) -> MatrixPolyField {
        MatrixPolyField::scalar_monomial(1, 1, c(scale, 0.0))
    }

    fn exp_metric(scale: f64, domain: &GridDomain) -> MetricField {
        let e = exp_certified(&abs2(scale), domain, 1e-14, 60).unwrap();
        MetricField::validate(e.field, domain).unwrap()
    }

    #[test]
    fn flat_metric_has_zero_connection_and_curvature() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 9).unwrap();
        let m = MetricField::flat(2, &d);
        assert!(m.connection_form(10).unwrap().is_zero());
        assert_eq!(m.curvature_operator(c(0.3, 0.4)).unwrap().norm(), 0.0);
        let w = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let nabla = m.covariant_derivative(&SectionField::constant(&w), c(0.1, 0.2)).unwrap();
        assert_eq!(nabla.norm(), 0.0);
    }

    #[test]
    fn exp_metric_connection_is_sbar() {
        let d = GridDomain::square(c(0.0, 0.0), 0.5, 33).unwrap();
        let m = exp_metric(1.0, &d);
        let theta = m.connection_form(24).unwrap();
        for s in [c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.5)] {
            assert!((theta.eval_scalar(s) - s.conj()).norm() < 1e-8);
        }
        let one = CVector::from_vec(vec![c(1.0, 0.0)]);
        let s = c(0.3, -0.2);
        let nabla = m.covariant_derivative(&SectionField::constant(&one), s).unwrap();
        assert!((nabla[0] - s.conj()).norm() < 1e-12);
    }

    #[test]
    fn diagonal_connection_matches_log_derivative_oracle() {
        let d = GridDomain::square(c(0.0, 0.0), 0.3, 17).unwrap();
        let one_plus = &MatrixPolyField::identity(1) + &abs2(1.0);
        let p = MatrixPolyField::block_diagonal(&[MatrixPolyField::identity(1), one_plus.clone()]);
        let m = MetricField::validate(p, &d).unwrap();
        let theta = m.connection_form(24).unwrap();
        for s in [c(0.1, 0.05), c(-0.2, 0.25)] {
            let oracle: Complex64 = fd_derivative(
                |z| c((1.0 + z.norm_sqr()).ln(), 0.0),
                s,
                FdKind::Ds,
                1e-5,
                None,
            )
            .unwrap();
            let t = theta.eval(s);
            assert!(t[(0, 0)].norm() < 1e-12);
            assert!((t[(1, 1)] - oracle).norm() < 1e-8);
            assert!((t[(1, 1)] - s.conj() / (1.0 + s.norm_sqr())).norm() < 1e-8);
        }
    }

    #[test]
    fn connection_surrogate_breakdown_is_reported() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let p = &MatrixPolyField::identity(1) + &abs2(1.0);
        let m = MetricField::validate(p, &d).unwrap();
        assert!(matches!(m.connection_form(10), Err(Error::SurrogateResidual { .. })));
    }

    #[test]
    fn scalar_exponential_curvatures() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let pos = exp_metric(-1.0, &d);
        let neg = exp_metric(1.0, &d);
        for s in [c(0.0, 0.0), c(0.5, -0.7), c(-0.9, 0.9)] {
            assert!((pos.curvature_operator(s).unwrap()[(0, 0)] - 1.0).norm() < 1e-10);
            assert!((neg.curvature_operator(s).unwrap()[(0, 0)] + 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn eq23_on_exponential_metric() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let m = exp_metric(1.0, &d);
        let one = SectionField::constant(&CVector::from_vec(vec![c(1.0, 0.0)]));
        let e = m.eq23(&one, c(0.3, 0.4), 1e-4).unwrap();
        assert!((e.lhs - 1.0).abs() < 1e-6);
        assert!((e.rhs - 1.0).abs() < 1e-10);
        assert!(e.residual < 1e-6);
    }

    #[test]
    fn eq23_flat_constant_section() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let m = MetricField::flat(2, &d);
        let w = SectionField::constant(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        assert!(m.eq23_residual(&w, c(0.2, 0.1), 1e-4).unwrap() < 1e-8);
    }

    #[test]
    fn eq23_random_rank_two() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let mut rng = prng(20);
        let m = MetricField::validate(random_metric(&mut rng, 2, 2, 0.6), &d).unwrap();
        let sec = SectionField::new(random_holomorphic(&mut rng, 2, 1, 2, 1.0)).unwrap();
        for _ in 0..20 {
            let s = c(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9));
            let r = m.eq23_residual(&sec, s, 1e-4).unwrap();
            assert!(r < 1e-5, "residual {r} at {s}");
        }
    }

    #[test]
    fn eq23_rejects_vanishing_section() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 17).unwrap();
        let m = MetricField::flat(1, &d);
        let sec = SectionField::new(MatrixPolyField::scalar_monomial(1, 0, c(1.0, 0.0))).unwrap();
        assert!(matches!(
            m.eq23(&sec, c(0.0, 0.0), 1e-4),
            Err(Error::VanishingSection(_))
        ));
    }

    #[test]
    fn non_holomorphic_section_is_rejected() {
        let d = GridDomain::square(c(0.0, 0.0), 1.0, 9).unwrap();
        let m = MetricField::flat(1, &d);
        let sec = SectionField::new(abs2(1.0)).unwrap();
        assert!(m.covariant_derivative(&sec, c(0.0, 0.0)).is_err());
    }
}
