use nalgebra::{Cholesky, Dyn, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CMatrix, CVector, GridDomain, MatrixPolyField};

/// Relative hermitian tolerance applied node by node during validation.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// A validated positive-definite hermitian metric `h(v, w) = ⟨P(s)v, w⟩ = w^* P(s) v`
/// on the trivial bundle `domain × ℂⁿ`.
///
/// The derivative fields `∂P`, `∂̄P`, `∂∂̄P` are computed once at validation.
#[derive(Clone, Debug)]
pub struct MetricField {
    p: MatrixPolyField,
    dp: MatrixPolyField,
    dbp: MatrixPolyField,
    ddbp: MatrixPolyField,
    domain: GridDomain,
    spd_margin: f64,
}

/// Everything about `P` needed at one base point.
#[derive(Clone, Debug)]
pub struct PointMetric {
    pub p: CMatrix,
    pub dp: CMatrix,
    pub dbp: CMatrix,
    pub ddbp: CMatrix,
    chol: Cholesky<Complex64, Dyn>,
}

impl PointMetric {
    pub fn cholesky(&self) -> &Cholesky<Complex64, Dyn> {
        &self.chol
    }

    /// `P⁻¹ M`.
    pub fn solve(&self, m: &CMatrix) -> CMatrix {
        self.chol.solve(m)
    }

    pub fn solve_vec(&self, v: &CVector) -> CVector {
        self.chol.solve(v)
    }

    /// Lower Cholesky factor `L` with `P = L L^*`.
    pub fn lower(&self) -> CMatrix {
        self.chol.l()
    }

    /// Connection matrix `A = P⁻¹ ∂P`.
    pub fn connection(&self) -> CMatrix {
        self.solve(&self.dp)
    }

    /// `P · R` where `R = −∂̄(P⁻¹∂P) = P⁻¹(∂̄P P⁻¹ ∂P − ∂∂̄P)`.
    pub fn p_times_curvature(&self) -> CMatrix {
        &self.dbp * self.solve(&self.dp) - &self.ddbp
    }

    pub fn curvature(&self) -> CMatrix {
        self.solve(&self.p_times_curvature())
    }

    /// `h(v, w) = w^* P v`.
    pub fn inner(&self, v: &CVector, w: &CVector) -> Complex64 {
        w.dotc(&(&self.p * v))
    }

    pub fn norm_sqr(&self, v: &CVector) -> f64 {
        self.inner(v, v).re
    }
}

impl MetricField {
    /// Check that `P` is hermitian and positive definite at every node of `domain`.
    pub fn validate(p: MatrixPolyField, domain: &GridDomain) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::Shape(format!(
                "metric field must be square, got {}×{}",
                p.rows(),
                p.cols()
            )));
        }
        let nodes: Vec<Complex64> = domain.nodes().collect();
        let hermitian_worst = nodes
            .par_iter()
            .map(|&s| {
                let m = p.eval(s);
                let scale = m.norm().max(f64::MIN_POSITIVE);
                ((&m - m.adjoint()).norm() / scale, s)
            })
            .reduce(|| (0.0, domain.center()), |a, b| if b.0 > a.0 { b } else { a });
        let coeff_residual = p.hermitian_symmetry_residual() / p.coeff_max_abs().max(1.0);
        if hermitian_worst.0 > HERMITIAN_TOLERANCE || coeff_residual > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian {
                node: hermitian_worst.1,
                residual: hermitian_worst.0.max(coeff_residual),
            });
        }
        // Remove roundoff-level asymmetry so the table is exactly hermitian.
        let p = (&p + &p.adjoint()).scale(Complex64::new(0.5, 0.0));

        let (margin, witness) = nodes
            .par_iter()
            .map(|&s| (min_eigenvalue(&p.eval(s)), s))
            .reduce(
                || (f64::INFINITY, domain.center()),
                |a, b| if b.0 < a.0 { b } else { a },
            );
        if !(margin > 0.0) {
            return Err(Error::NotPositive {
                node: witness,
                eigenvalue: margin,
            });
        }
        let dp = p.d_s();
        let dbp = p.d_sbar();
        let ddbp = dp.d_sbar();
        Ok(Self {
            p,
            dp,
            dbp,
            ddbp,
            domain: domain.clone(),
            spd_margin: margin,
        })
    }

    /// The flat metric `P ≡ I` of rank `n`.
    pub fn flat(n: usize, domain: &GridDomain) -> Self {
        Self::validate(MatrixPolyField::identity(n), domain).expect("identity is a metric")
    }

    pub fn rank(&self) -> usize {
        self.p.rows()
    }

    pub fn field(&self) -> &MatrixPolyField {
        &self.p
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Smallest eigenvalue of `P(s)` over the validation grid.
    pub fn spd_margin(&self) -> f64 {
        self.spd_margin
    }

    pub fn at(&self, s: Complex64) -> Result<PointMetric> {
        let p = self.p.eval(s);
        let chol = Cholesky::new(p.clone()).ok_or(Error::Factorization(s))?;
        Ok(PointMetric {
            p,
            dp: self.dp.eval(s),
            dbp: self.dbp.eval(s),
            ddbp: self.ddbp.eval(s),
            chol,
        })
    }

    /// Only `P(s)` and its factorization, skipping derivative fields.
    pub fn at_value(&self, s: Complex64) -> Result<(CMatrix, Cholesky<Complex64, Dyn>)> {
        let p = self.p.eval(s);
        let chol = Cholesky::new(p.clone()).ok_or(Error::Factorization(s))?;
        Ok((p, chol))
    }

    /// `h_s(v, w) = ⟨P(s)v, w⟩`.
    pub fn inner_product(&self, s: Complex64, v: &CVector, w: &CVector) -> Result<Complex64> {
        let n = self.rank();
        if v.len() != n || w.len() != n {
            return Err(Error::Shape(format!(
                "vectors of length {} and {} for a rank-{n} metric",
                v.len(),
                w.len()
            )));
        }
        Ok(w.dotc(&(self.p.eval(s) * v)))
    }

    /// `p(v) = h_s(v, v)^{1/2}`.
    pub fn norm(&self, s: Complex64, v: &CVector) -> Result<f64> {
        Ok(self.inner_product(s, v, v)?.re.max(0.0).sqrt())
    }
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}
