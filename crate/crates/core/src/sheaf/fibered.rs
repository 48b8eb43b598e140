use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{MetricField, SectionField};
use crate::error::{Error, Result};
use crate::field::surrogate::{certification_points, exp_certified};
use crate::field::{CMatrix, CVector, GridDomain, MatrixPolyField, ScalarSampleField};

/// Relative accuracy of the exponential surrogates behind [`FiberedMetric::induced_hermitian`].
pub const INDUCED_EXP_TOLERANCE: f64 = 1e-11;
const INDUCED_EXP_MAX_ORDER: usize = 80;

/// One quadrature point of a fiber, with an optional fiber metric `P_x(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberPoint {
    pub weight: f64,
    pub metric: Option<MatrixPolyField>,
}

/// A finite weighted fiber `{x₁, …, x_m}` with exponent `a ≥ 2`.
///
/// A vector of the total space is the concatenation of `m` blocks of length
/// `fiber_rank`; block `i` is the value at `x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedMetric {
    points: Vec<FiberPoint>,
    a: f64,
    fiber_rank: usize,
}

impl FiberedMetric {
    pub fn new(points: Vec<FiberPoint>, a: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("a fiber needs at least one point".into()));
        }
        if !(a >= 2.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent a = {a} must be finite and ≥ 2")));
        }
        if let Some(p) = points.iter().find(|p| !(p.weight > 0.0 && p.weight.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "fiber weights must be positive, got {}",
                p.weight
            )));
        }
        let ranks: Vec<usize> = points
            .iter()
            .map(|p| p.metric.as_ref().map_or(1, |m| m.rows()))
            .collect();
        let fiber_rank = ranks[0];
        for p in &points {
            if let Some(m) = &p.metric {
                if !m.is_square() || m.rows() != fiber_rank {
                    return Err(Error::Shape(
                        "fiber metrics must be square and of a common rank".into(),
                    ));
                }
            }
        }
        if ranks.iter().any(|&r| r != fiber_rank) {
            return Err(Error::Shape("fiber metrics must share one rank".into()));
        }
        Ok(Self {
            points,
            a,
            fiber_rank,
        })
    }

    /// Scalar fiber with the given weights and no fiber metric.
    pub fn weighted(weights: &[f64], a: f64) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .map(|&weight| FiberPoint {
                    weight,
                    metric: None,
                })
                .collect(),
            a,
        )
    }

    pub fn with_exponent(&self, a: f64) -> Result<Self> {
        Self::new(self.points.clone(), a)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn points(&self) -> &[FiberPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn fiber_rank(&self) -> usize {
        self.fiber_rank
    }

    /// Length of a total-space vector, `m · fiber_rank`.
    pub fn total_rank(&self) -> usize {
        self.points.len() * self.fiber_rank
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub(crate) fn check_len(&self, w: &CVector) -> Result<()> {
        if w.len() != self.total_rank() {
            return Err(Error::Shape(format!(
                "vector of length {} for a fiber of total rank {}",
                w.len(),
                self.total_rank()
            )));
        }
        Ok(())
    }

    pub(crate) fn block<'v>(&self, w: &'v CVector, i: usize) -> nalgebra::DVectorView<'v, Complex64> {
        w.rows(i * self.fiber_rank, self.fiber_rank)
    }

    /// `|w_i|²` in the fiber metric at `x_i`, Euclidean when none is given.
    pub(crate) fn fiber_sqnorm(&self, i: usize, s: Complex64, w: &CVector) -> Result<f64> {
        let block = self.block(w, i);
        let value = match &self.points[i].metric {
            None => block.norm_squared(),
            Some(m) => block.dotc(&(m.eval(s) * block)).re,
        };
        if value < 0.0 {
            return Err(Error::NegativeIntegrand(s));
        }
        Ok(value)
    }

    /// `⟨P_x w_i, p_i⟩`-type pairing `w_i^* P_x p_i` used by the dual map.
    pub(crate) fn fiber_pairing(&self, i: usize, s: Complex64, w: &CVector, p: &CVector) -> Complex64 {
        let wb = self.block(w, i);
        let pb = self.block(p, i);
        match &self.points[i].metric {
            None => wb.dotc(&pb),
            Some(m) => wb.dotc(&(m.eval(s) * pb)),
        }
    }

    /// The `a = 2` metric as a hermitian metric field
    /// `P(s) = diag(μ_i e^{ρ_i(s)} P_{x_i}(s))`, with certified exponential surrogates.
    pub fn induced_hermitian(&self, rho: &WeightField, domain: &GridDomain) -> Result<MetricField> {
        rho.check_len(self)?;
        let blocks = self
            .points
            .iter()
            .zip(rho.fields())
            .map(|(p, r)| {
                let e = exp_certified(r, domain, INDUCED_EXP_TOLERANCE, INDUCED_EXP_MAX_ORDER)?;
                let scaled = e.field.scale(Complex64::new(p.weight, 0.0));
                Ok(match &p.metric {
                    None => scaled,
                    Some(m) => &scalar_times_identity(&scaled, self.fiber_rank) * m,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MetricField::validate(MatrixPolyField::block_diagonal(&blocks), domain)
    }
}

fn scalar_times_identity(f: &MatrixPolyField, n: usize) -> MatrixPolyField {
    let mut out = MatrixPolyField::zeros(n, n);
    let id = CMatrix::identity(n, n);
    for (j, k, c) in f.terms() {
        out.add_term(j, k, &(&id * c[(0, 0)]));
    }
    out
}

/// Bounds on `ρ` and its derivatives up to order 2 over a domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightCertificate {
    pub sup_rho: f64,
    pub sup_first: f64,
    pub sup_second: f64,
}

/// Real weights `ρ_i(s)`, one scalar polynomial per fiber point.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    rho: Vec<MatrixPolyField>,
    d_rho: Vec<MatrixPolyField>,
    certificate: WeightCertificate,
}

impl WeightField {
    pub fn new(rho: Vec<MatrixPolyField>, domain: &GridDomain) -> Result<Self> {
        for r in &rho {
            if r.shape() != (1, 1) {
                return Err(Error::Shape("weights must be scalar fields".into()));
            }
            if r.hermitian_symmetry_residual() > 1e-12 * r.coeff_max_abs().max(1.0) {
                return Err(Error::InvalidArgument("weights must be real-valued".into()));
            }
        }
        let d_rho: Vec<_> = rho.iter().map(|r| r.d_s()).collect();
        let points = certification_points(domain);
        let sup = |fields: &[MatrixPolyField]| {
            fields
                .iter()
                .map(|f| f.sup_norm_on(points.iter().copied()))
                .fold(0.0, f64::max)
        };
        let second: Vec<_> = rho
            .iter()
            .flat_map(|r| [r.d_s().d_s(), r.d_s().d_sbar()])
            .collect();
        let certificate = WeightCertificate {
            sup_rho: sup(&rho),
            sup_first: sup(&d_rho),
            sup_second: sup(&second),
        };
        if !(certificate.sup_rho.is_finite()
            && certificate.sup_first.is_finite()
            && certificate.sup_second.is_finite())
        {
            return Err(Error::InvalidArgument("weight derivatives are not bounded".into()));
        }
        Ok(Self {
            rho,
            d_rho,
            certificate,
        })
    }

    /// `ρ ≡ 0` on `m` points.
    pub fn zero(m: usize, domain: &GridDomain) -> Self {
        Self::new(vec![MatrixPolyField::zeros(1, 1); m], domain).expect("zero weights are valid")
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn fields(&self) -> &[MatrixPolyField] {
        &self.rho
    }

    pub fn certificate(&self) -> WeightCertificate {
        self.certificate
    }

    pub fn value(&self, i: usize, s: Complex64) -> f64 {
        self.rho[i].eval_scalar(s).re
    }

    /// `∂ρ_i/∂s` at `s`.
    pub fn d_s(&self, i: usize, s: Complex64) -> Complex64 {
        self.d_rho[i].eval_scalar(s)
    }

    pub(crate) fn check_len(&self, fm: &FiberedMetric) -> Result<()> {
        if self.len() != fm.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} fiber points",
                self.len(),
                fm.len()
            )));
        }
        Ok(())
    }
}

/// `q(s, w) = (Σ μ_i |w_i|^a e^{ρ_i(s)})^{1/a}`.
pub fn lp_metric(fm: &FiberedMetric, rho: &WeightField, s: Complex64, w: &CVector) -> Result<f64> {
    rho.check_len(fm)?;
    fm.check_len(w)?;
    if w.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(s));
    }
    let a = fm.a();
    let mut sum = 0.0;
    for (i, p) in fm.points().iter().enumerate() {
        let n2 = fm.fiber_sqnorm(i, s, w)?;
        sum += p.weight * n2.powf(0.5 * a) * rho.value(i, s).exp();
    }
    Ok(sum.powf(1.0 / a))
}

/// Fiber-integral norm `(Σ ν_i e^{ρ_i(s)} h_{x_i}(Φ_i, Φ_i))^{1/2}` of a section
/// of the total space, sampled on `grid`.
pub fn direct_image_metric(
    fm: &FiberedMetric,
    rho: &WeightField,
    phi: &SectionField,
    grid: &GridDomain,
) -> Result<ScalarSampleField> {
    rho.check_len(fm)?;
    if phi.rank() != fm.total_rank() {
        return Err(Error::Shape(format!(
            "section of rank {} on a fiber of total rank {}",
            phi.rank(),
            fm.total_rank()
        )));
    }
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.unindex(idx);
            let s = grid.node(i, j);
            direct_image_value(fm, rho, s, &phi.eval(s)).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarSampleField::from_samples(grid.clone(), samples))
}

pub(crate) fn direct_image_value(
    fm: &FiberedMetric,
    rho: &WeightField,
    s: Complex64,
    v: &CVector,
) -> Result<f64> {
    let mut sum = 0.0;
    for (i, p) in fm.points().iter().enumerate() {
        sum += p.weight * rho.value(i, s).exp() * fm.fiber_sqnorm(i, s, v)?;
    }
    Ok(sum.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RhoCoeff {
    j: usize,
    k: usize,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FiberPointSpec {
    weight: f64,
    #[serde(default)]
    rho_coeffs: Vec<RhoCoeff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<MatrixPolyField>,
}

/// JSON form `{fiber_points: [{weight, rho_coeffs: [{j, k, re, im}], metric?}], a}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberedConfig {
    fiber_points: Vec<FiberPointSpec>,
    a: f64,
}

impl FiberedConfig {
    pub fn build(&self, domain: &GridDomain) -> Result<(FiberedMetric, WeightField)> {
        let fm = FiberedMetric::new(
            self.fiber_points
                .iter()
                .map(|p| FiberPoint {
                    weight: p.weight,
                    metric: p.metric.clone(),
                })
                .collect(),
            self.a,
        )?;
        let rho = self
            .fiber_points
            .iter()
            .map(|p| {
                MatrixPolyField::scalar_from_terms(
                    p.rho_coeffs
                        .iter()
                        .map(|c| (c.j, c.k, Complex64::new(c.re, c.im))),
                )
            })
            .collect();
        Ok((fm, WeightField::new(rho, domain)?))
    }

    pub fn from_parts(fm: &FiberedMetric, rho: &WeightField) -> Self {
        let fiber_points = fm
            .points()
            .iter()
            .zip(rho.fields())
            .map(|(p, r)| FiberPointSpec {
                weight: p.weight,
                rho_coeffs: r
                    .terms()
                    .map(|(j, k, m)| RhoCoeff {
                        j,
                        k,
                        re: m[(0, 0)].re,
                        im: m[(0, 0)].im,
                    })
                    .collect(),
                metric: p.metric.clone(),
            })
            .collect();
        Self {
            fiber_points,
            a: fm.a(),
        }
    }
}

/// Parse a fibered metric and its weights from JSON.
pub fn parse_fibered(json: &str, domain: &GridDomain) -> Result<(FiberedMetric, WeightField)> {
    let config: FiberedConfig = serde_json::from_str(json)?;
    config.build(domain)
}
