use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::{MetricField, SectionField};
use crate::bundle::connection::covariant_at;
use crate::error::{Error, Result};
use crate::field::{circle_average, CMatrix, CVector, MatrixPolyField};
use crate::homomorphism::field::HomomorphismField;
use crate::random::{prng, random_unit_vector};
use crate::report::{VerificationReport, Witness};

/// Allowed spread (as a ratio) of the fitted local constant.
pub const BOUND32_STABILITY: f64 = 2.0;
/// Values below this are treated as an exact zero when forming ratios.
const ZERO_FLOOR: f64 = 1e-12;
const ANGLES: usize = 32;
const CIRCLE_NODES: usize = 128;

/// The holomorphic section `f(s) = w + (s₀ − s) A(s₀) w`, `A = P⁻¹∂P`, which is
/// covariantly constant to first order at `s₀`.
pub fn proof_section(metric: &MetricField, s0: Complex64, w: &CVector) -> Result<SectionField> {
    if w.len() != metric.rank() {
        return Err(Error::Shape(format!(
            "vector of length {} for a rank-{} metric",
            w.len(),
            metric.rank()
        )));
    }
    if w.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    let aw = metric.connection_at(s0)? * w;
    let c0 = w + &aw * s0;
    let n = w.len();
    let f = MatrixPolyField::from_terms(
        n,
        1,
        [
            (0, 0, CMatrix::from_column_slice(n, 1, c0.as_slice())),
            (1, 0, CMatrix::from_column_slice(n, 1, (-aw).as_slice())),
        ],
    )?;
    SectionField::new(f)
}

/// Fitted local constants: for `|s − s₀| < ε`,
/// `|p(φ)(s) − p(φ)(s₀)| ≤ C|s − s₀| p(φ)(s₀)` and `p(∇φ)(s) ≤ C|s − s₀| p(φ)(s₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound32Fit {
    pub epsilon: f64,
    pub c: f64,
    pub radii: Vec<f64>,
    /// Per-vector constant (max over radii).
    pub per_vector: Vec<f64>,
}

impl Bound32Fit {
    /// `ε₁ = min(ε, 1/(2C))`.
    pub fn epsilon1(&self) -> f64 {
        if self.c > 0.0 {
            self.epsilon.min(0.5 / self.c)
        } else {
            self.epsilon
        }
    }

    /// `C₁ = 2C²`.
    pub fn c1(&self) -> f64 {
        2.0 * self.c * self.c
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= ZERO_FLOOR {
        return 1.0;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= ZERO_FLOOR {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ratio `max(|p(φ)(s) − p(φ)(s₀)|, p(∇φ)(s)) / (r p(φ)(s₀))` maximized over a circle.
fn circle_ratio(metric: &MetricField, section: &SectionField, s0: Complex64, r: f64, p0: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..ANGLES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / ANGLES as f64;
        let s = s0 + Complex64::from_polar(r, theta);
        let pm = metric.at(s)?;
        let p = pm.norm_sqr(&section.eval(s)).max(0.0).sqrt();
        let nabla = pm.norm_sqr(&covariant_at(&pm, section, s)).max(0.0).sqrt();
        worst = worst.max((p - p0).abs().max(nabla) / (r * p0));
    }
    Ok(worst)
}

/// Fit `ε, C` for the special sections through random unit vectors at `s₀` and
/// check that the constant does not depend on the vector.
///
/// `ε` is half the distance from `s₀` to the domain boundary; ratios are taken on
/// circles of radii `ε/2, ε/4, ε/8`. The check passes when every vector's ratios
/// agree across radii within a factor 2, and the constant fitted from the first half
/// of the vectors is within a factor 2 of the one fitted from all of them.
pub fn bound32_check(
    metric: &MetricField,
    s0: Complex64,
    trials: usize,
    seed: u64,
) -> Result<(VerificationReport, Bound32Fit)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let epsilon = 0.5 * metric.domain().boundary_distance(s0);
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("{s0} is not interior to the domain")));
    }
    let radii = vec![epsilon / 2.0, epsilon / 4.0, epsilon / 8.0];
    let mut rng = prng(seed);
    let mut per_vector = Vec::with_capacity(trials);
    let mut radius_spread: f64 = 1.0;
    let mut worst_w = None;
    for _ in 0..trials {
        let w = random_unit_vector(&mut rng, metric.rank());
        let section = proof_section(metric, s0, &w)?;
        let p0 = metric.norm(s0, &w)?;
        let ratios = radii
            .iter()
            .map(|&r| circle_ratio(metric, &section, s0, r, p0))
            .collect::<Result<Vec<_>>>()?;
        let sp = spread(&ratios);
        if sp >= radius_spread {
            radius_spread = sp;
            worst_w = Some(w.clone());
        }
        per_vector.push(ratios.iter().copied().fold(0.0, f64::max));
    }
    let c = per_vector.iter().copied().fold(0.0, f64::max);
    let half = &per_vector[..trials.div_ceil(2)];
    let c_half = half.iter().copied().fold(0.0, f64::max);
    let vector_spread = spread(&[c_half, c]);
    let residual = radius_spread.max(vector_spread);
    let fit = Bound32Fit {
        epsilon,
        c,
        radii,
        per_vector,
    };
    let mut witness = Witness::at(s0).with_note("worst ratio spread across radii");
    if let Some(w) = &worst_w {
        witness = witness.with_vector(w);
    }
    let report = VerificationReport::judge("bound32", residual, BOUND32_STABILITY, trials, witness)
        .with_seed(seed)
        .with_detail("epsilon", fit.epsilon)
        .with_detail("c", fit.c)
        .with_detail("epsilon1", fit.epsilon1())
        .with_detail("c1", fit.c1())
        .with_detail("radius_spread", radius_spread)
        .with_detail("vector_spread", vector_spread);
    Ok((report, fit))
}

/// Mean-value inequality on the circle `|s − s₀| = r`:
///
/// `avg log‖A‖ ≥ avg log(p'(Aφ)/p(φ)) ≥ log(p'(Aφ)(s₀)/p(φ)(s₀)) − C₁r⁴`
///
/// for the special section `φ` through the top singular vector of `A(s₀)`, with
/// `C₁ = 2C²` from `fit` (fitted on the source metric). Requires `0 < r < ε₁`.
pub fn inequality33_check(
    h: &HomomorphismField,
    s0: Complex64,
    r: f64,
    fit: &Bound32Fit,
) -> Result<VerificationReport> {
    let eps1 = fit.epsilon1();
    if !(r > 0.0 && r < eps1) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must lie in (0, ε₁ = {eps1})"
        )));
    }
    let top = h.norm_at(s0)?;
    if top.norm <= 0.0 {
        return Err(Error::VanishingNorm(s0));
    }
    let phi = proof_section(h.source(), s0, &top.top_vector)?;
    let log_ratio = |s: Complex64| -> f64 {
        let f = phi.eval(s);
        let af = h.map().eval(s) * &f;
        let num = h.target().norm(s, &af).unwrap_or(0.0);
        let den = h.source().norm(s, &f).unwrap_or(0.0);
        (num / den).ln()
    };
    let outer = circle_average(
        |s| h.norm_at(s).map(|n| n.norm.ln()).unwrap_or(f64::NAN),
        s0,
        r,
        CIRCLE_NODES,
    )?;
    let middle = circle_average(log_ratio, s0, r, CIRCLE_NODES)?;
    let centre = log_ratio(s0);
    let bound = centre - fit.c1() * r.powi(4);
    let residual = (bound - middle).max(middle - outer);
    let tol = 1e-12 * (1.0 + centre.abs());
    Ok(VerificationReport::judge(
        "inequality33",
        residual,
        tol,
        CIRCLE_NODES,
        Witness::at(s0)
            .with_vector(&top.top_vector)
            .with_note(format!("r = {r:.6e}")),
    )
    .with_detail("radius", r)
    .with_detail("norm_average", outer)
    .with_detail("ratio_average", middle)
    .with_detail("lower_bound", bound)
    .with_detail("c1", fit.c1()))
}
