use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::bundle::{MetricField, PointMetric};
use crate::error::{Error, Result};
use crate::field::{CMatrix, CVector, GridDomain, MatrixPolyField, ScalarSampleField};

/// A holomorphic bundle map `A(s): (ℂⁿ, h_s) → (ℂⁿ', h'_s)`.
#[derive(Clone, Debug)]
pub struct HomomorphismField {
    a: MatrixPolyField,
    source: MetricField,
    target: MetricField,
}

/// Operator norm at a point together with a maximizing source vector.
#[derive(Clone, Debug)]
pub struct PointNorm {
    pub norm: f64,
    /// `v` with `p'(Av)/p(v) = ‖A‖`, normalized to `h(v, v) = 1`.
    pub top_vector: CVector,
}

impl HomomorphismField {
    pub fn new(a: MatrixPolyField, source: MetricField, target: MetricField) -> Result<Self> {
        if !a.is_holomorphic() {
            return Err(Error::InvalidArgument(
                "homomorphism field must be holomorphic (no s̄ terms)".into(),
            ));
        }
        if a.rows() != target.rank() || a.cols() != source.rank() {
            return Err(Error::Shape(format!(
                "homomorphism is {}×{} but maps rank {} to rank {}",
                a.rows(),
                a.cols(),
                source.rank(),
                target.rank()
            )));
        }
        Ok(Self { a, source, target })
    }

    /// The identity map between two metrics on the same trivial bundle.
    pub fn identity(source: MetricField, target: MetricField) -> Result<Self> {
        Self::new(MatrixPolyField::identity(source.rank()), source, target)
    }

    pub fn map(&self) -> &MatrixPolyField {
        &self.a
    }

    pub fn source(&self) -> &MetricField {
        &self.source
    }

    pub fn target(&self) -> &MetricField {
        &self.target
    }

    pub fn domain(&self) -> &GridDomain {
        self.source.domain()
    }

    /// The same bundle map multiplied by a constant.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self {
            a: self.a.scale(lambda),
            ..self.clone()
        }
    }

    /// `‖A(s)‖ = σ_max(L'^* A L^{-*})` where `P = LL^*`, `P' = L'L'^*`.
    pub fn norm_at(&self, s: Complex64) -> Result<PointNorm> {
        let (_, chol) = self.source.at_value(s)?;
        let (_, chol_t) = self.target.at_value(s)?;
        Ok(point_norm(&self.a.eval(s), &chol, &chol_t))
    }

    /// Samples of `‖A‖` on `domain`.
    pub fn operator_norm_field(&self, domain: &GridDomain) -> ScalarSampleField {
        ScalarSampleField::from_fn(domain, |s| self.norm_at(s).ok().map(|n| n.norm))
    }

    /// Samples of `log ‖A‖`, masked where `A(s) = 0`.
    pub fn log_norm_field(&self, domain: &GridDomain) -> ScalarSampleField {
        ScalarSampleField::from_fn(domain, |s| {
            self.norm_at(s)
                .ok()
                .filter(|n| n.norm > 0.0)
                .map(|n| n.norm.ln())
        })
    }

    /// `p'(A(s)v) / p(v)`.
    pub fn ratio_at(&self, s: Complex64, v: &CVector) -> Result<f64> {
        let pv = self.source.norm(s, v)?;
        if pv == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.target.norm(s, &(self.a.eval(s) * v))? / pv)
    }
}

pub(crate) fn point_norm(
    a: &CMatrix,
    chol: &Cholesky<Complex64, nalgebra::Dyn>,
    chol_t: &Cholesky<Complex64, nalgebra::Dyn>,
) -> PointNorm {
    let n = a.ncols();
    let l_inv_h = chol
        .l()
        .adjoint()
        .solve_upper_triangular(&CMatrix::identity(n, n))
        .expect("Cholesky factor is invertible");
    let b = chol_t.l().adjoint() * a * &l_inv_h;
    let svd = b.svd(false, true);
    let idx = svd.singular_values.imax();
    let norm = svd.singular_values[idx];
    let v_t = svd.v_t.expect("right singular vectors requested");
    let x: CVector = v_t.row(idx).adjoint();
    PointNorm {
        norm,
        top_vector: l_inv_h * x,
    }
}

/// Griffiths curvature `K_ξ(v) = |ξ|² h(v, Rv) / h(v, v)`.
pub fn griffiths_curvature(
    metric: &MetricField,
    s: Complex64,
    xi: Complex64,
    v: &CVector,
) -> Result<f64> {
    if v.len() != metric.rank() {
        return Err(Error::Shape(format!(
            "vector of length {} for a rank-{} metric",
            v.len(),
            metric.rank()
        )));
    }
    let pm = metric.at(s)?;
    griffiths_at(&pm, v).map(|k| xi.norm_sqr() * k)
}

pub(crate) fn griffiths_at(pm: &PointMetric, v: &CVector) -> Result<f64> {
    let denom = pm.norm_sqr(v);
    if !(denom > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(v.dotc(&(pm.p_times_curvature() * v)).re / denom)
}
