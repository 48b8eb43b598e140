use num_complex::Complex64;
use rayon::prelude::*;

use crate::bundle::{MetricField, SectionField};
use crate::error::{Error, Result};
use crate::field::{CVector, GridDomain, ScalarSampleField};
use crate::random::{prng, random_holomorphic};
use crate::report::{VerificationReport, Witness};
use crate::sheaf::fibered::{direct_image_value, lp_metric, FiberedMetric, WeightField};

/// Relative tolerance for the triangle inequality and homogeneity.
pub const AXIOM_TOLERANCE: f64 = 1e-10;

/// A metric on sections that depends only on the value `φ(s)` at each point.
pub trait SheafMetric: Sync {
    /// Length of the value vectors.
    fn rank(&self) -> usize;
    /// `p(φ)(s)` given `v = φ(s)`.
    fn value(&self, s: Complex64, v: &CVector) -> Result<f64>;
}

/// `p = √h` for a hermitian metric.
pub struct BundleNorm<'a>(pub &'a MetricField);

impl SheafMetric for BundleNorm<'_> {
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn value(&self, s: Complex64, v: &CVector) -> Result<f64> {
        self.0.norm(s, v)
    }
}

/// The weighted `L^a` norm `q(s, ·)`.
pub struct LpNorm<'a> {
    pub fibered: &'a FiberedMetric,
    pub rho: &'a WeightField,
}

impl SheafMetric for LpNorm<'_> {
    fn rank(&self) -> usize {
        self.fibered.total_rank()
    }

    fn value(&self, s: Complex64, v: &CVector) -> Result<f64> {
        lp_metric(self.fibered, self.rho, s, v)
    }
}

/// The fiber-integral norm of the direct image.
pub struct DirectImageNorm<'a> {
    pub fibered: &'a FiberedMetric,
    pub rho: &'a WeightField,
}

impl SheafMetric for DirectImageNorm<'_> {
    fn rank(&self) -> usize {
        self.fibered.total_rank()
    }

    fn value(&self, s: Complex64, v: &CVector) -> Result<f64> {
        self.rho.check_len(self.fibered)?;
        self.fibered.check_len(v)?;
        direct_image_value(self.fibered, self.rho, s, v)
    }
}

/// A deliberately wrong evaluator `p(φ)²`, which is not homogeneous.
pub struct SquaredNorm<M>(pub M);

impl<M: SheafMetric> SheafMetric for SquaredNorm<M> {
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn value(&self, s: Complex64, v: &CVector) -> Result<f64> {
        Ok(self.0.value(s, v)?.powi(2))
    }
}

/// `p(φ)` sampled on `grid`.
pub fn section_norm_field(
    metric: &dyn SheafMetric,
    phi: &SectionField,
    grid: &GridDomain,
) -> Result<ScalarSampleField> {
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = grid.unindex(idx);
            let s = grid.node(i, j);
            metric.value(s, &phi.eval(s)).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarSampleField::from_samples(grid.clone(), samples))
}

#[derive(Clone, Copy, Default)]
struct Worst {
    triangle: f64,
    homogeneity: f64,
    at: Option<Complex64>,
    what: &'static str,
}

/// Check `p(φ + ψ) ≤ p(φ) + p(ψ)` and `p(fφ) = |f| p(φ)` on every node of `domain`
/// for `section_samples` random pairs of holomorphic sections and random
/// holomorphic scalars `f`, and that only the zero section has zero norm.
pub fn metric_axioms_check(
    metric: &dyn SheafMetric,
    domain: &GridDomain,
    section_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if section_samples < 2 {
        return Err(Error::InvalidArgument("need at least two section samples".into()));
    }
    let n = metric.rank();
    let mut rng = prng(seed);
    let sections: Vec<SectionField> = (0..section_samples)
        .map(|_| SectionField::new(random_holomorphic(&mut rng, n, 1, 2, 1.0)))
        .collect::<Result<_>>()?;
    let scalars: Vec<_> = (0..section_samples)
        .map(|_| random_holomorphic(&mut rng, 1, 1, 2, 1.0))
        .collect();
    let nodes: Vec<Complex64> = domain.nodes().collect();
    let zero = CVector::zeros(n);

    let per_node = nodes
        .par_iter()
        .map(|&s| -> Result<(Worst, f64, bool)> {
            let mut w = Worst::default();
            let zero_norm: f64 = metric.value(s, &zero)?.abs();
            let mut degenerate = false;
            for k in 0..section_samples {
                let phi = sections[k].eval(s);
                let psi = sections[(k + 1) % section_samples].eval(s);
                let p_phi = metric.value(s, &phi)?;
                let p_psi = metric.value(s, &psi)?;
                let p_sum = metric.value(s, &(&phi + &psi))?;
                let tri = (p_sum - p_phi - p_psi) / (p_phi + p_psi).max(f64::MIN_POSITIVE);
                if tri > w.triangle {
                    w = Worst { triangle: tri, at: Some(s), what: "triangle", ..w };
                }
                let f = scalars[k].eval_scalar(s);
                let p_f = metric.value(s, &(&phi * f))?;
                let target = f.norm() * p_phi;
                let hom = (p_f - target).abs() / target.max(f64::MIN_POSITIVE);
                if hom > w.homogeneity {
                    w.homogeneity = hom;
                    if hom > w.triangle {
                        w.at = Some(s);
                        w.what = "homogeneity";
                    }
                }
                if phi.norm() > 0.0 && !(p_phi > 0.0) {
                    degenerate = true;
                }
            }
            Ok((w, zero_norm, degenerate))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut triangle: f64 = 0.0;
    let mut homogeneity: f64 = 0.0;
    let mut zero_norm: f64 = 0.0;
    let mut degenerate_nodes = 0usize;
    let mut witness = Witness::default();
    let mut worst_total: f64 = f64::NEG_INFINITY;
    for (w, z, d) in &per_node {
        triangle = triangle.max(w.triangle);
        homogeneity = homogeneity.max(w.homogeneity);
        zero_norm = zero_norm.max(*z);
        degenerate_nodes += usize::from(*d);
        let total = w.triangle.max(w.homogeneity);
        if total > worst_total {
            worst_total = total;
            if let Some(s) = w.at {
                witness = Witness::at(s).with_note(w.what);
            }
        }
    }
    // A nonzero section vanishing in norm on the whole grid violates nondegeneracy.
    let nondegenerate = if degenerate_nodes == nodes.len() { 1.0 } else { 0.0 };
    let residual = triangle.max(homogeneity).max(zero_norm).max(nondegenerate);
    Ok(VerificationReport::judge(
        "axioms",
        residual,
        AXIOM_TOLERANCE,
        section_samples * nodes.len(),
        witness,
    )
    .with_seed(seed)
    .with_detail("triangle_residual", triangle)
    .with_detail("homogeneity_residual", homogeneity)
    .with_detail("zero_section_norm", zero_norm)
    .with_detail("degenerate_nodes", degenerate_nodes as f64))
}
