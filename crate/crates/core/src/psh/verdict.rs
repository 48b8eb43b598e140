use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::grid::{GridDomain, ScalarSampleField};
use crate::field::json::Point;
use crate::psh::lambda::lambda_ladder;

/// Radius ladder and tolerance used by [`psh_verdict`].
///
/// Radii are `multiples × Δ` (Δ the grid spacing) and the grid tolerance is
/// `tol_factor × Δ²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiiPolicy {
    pub multiples: Vec<f64>,
    pub circle_nodes: usize,
    pub tol_factor: f64,
}

impl Default for RadiiPolicy {
    fn default() -> Self {
        Self {
            multiples: vec![16.0, 8.0, 4.0],
            circle_nodes: 128,
            tol_factor: 10.0,
        }
    }
}

impl RadiiPolicy {
    /// Radii for `domain`, largest first.
    pub fn radii(&self, domain: &GridDomain) -> Vec<f64> {
        let delta = domain.spacing();
        let mut r: Vec<f64> = self.multiples.iter().map(|m| m * delta).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        r
    }

    pub fn tolerance(&self, domain: &GridDomain) -> f64 {
        grid_tolerance(domain, self.tol_factor)
    }
}

/// `factor · Δ²`.
pub fn grid_tolerance(domain: &GridDomain, factor: f64) -> f64 {
    let d = domain.spacing();
    factor * d * d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PshVerdict {
    Psh,
    NotPsh,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PshReport {
    pub verdict: PshVerdict,
    pub worst_node: Point,
    /// Λ estimate (max over the ladder) at the worst node.
    pub worst_lambda: f64,
    /// Per-radius estimates at the worst node, aligned with `radii`.
    pub worst_ladder: Vec<Option<f64>>,
    pub radii: Vec<f64>,
    pub tolerance: f64,
    pub nodes_examined: usize,
    pub nodes_skipped: usize,
}

impl PshReport {
    /// `min Λ + tol`: positive when the verdict holds with room to spare.
    pub fn margin(&self) -> f64 {
        self.worst_lambda + self.tolerance
    }
}

/// Nodes whose widest circle fits inside the domain.
fn eligible_nodes(domain: &GridDomain, r_max: f64) -> Vec<(usize, usize)> {
    let n = domain.resolution();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if domain.boundary_distance(domain.node(i, j)) >= r_max * (1.0 - 1e-12) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Per-node ladders `(i, j, ladder)` for every eligible, unmasked node.
fn node_ladders(
    u: &ScalarSampleField,
    policy: &RadiiPolicy,
) -> Result<(Vec<f64>, Vec<(usize, usize, Vec<Option<f64>>)>)> {
    let domain = u.domain();
    let radii = policy.radii(domain);
    let nodes = eligible_nodes(domain, radii[0]);
    if nodes.is_empty() {
        return Err(Error::DomainTooSmall(format!(
            "no node admits a circle of radius {:.3e}",
            radii[0]
        )));
    }
    let interp = |z: Complex64| u.interpolate(z);
    let ladders: Vec<_> = nodes
        .par_iter()
        .filter(|&&(i, j)| u.get(i, j).is_some())
        .map(|&(i, j)| {
            let z0 = domain.node(i, j);
            let ladder = lambda_ladder(interp, z0, &radii, policy.circle_nodes)
                .expect("centre value is valid");
            (i, j, ladder)
        })
        .collect();
    if ladders.is_empty() {
        return Err(Error::EmptyInterior(
            "every interior node is masked".into(),
        ));
    }
    Ok((radii, ladders))
}

/// Plurisubharmonicity verdict for a sampled field.
///
/// * `psh` if `min Λ ≥ −tol` over interior nodes;
/// * `not-psh` if some node has `Λ(r) < −2·tol` on every radius of the ladder
///   (it fails by more than `tol` beyond the admissible band);
/// * `inconclusive` otherwise.
pub fn psh_verdict(u: &ScalarSampleField, policy: &RadiiPolicy) -> Result<PshReport> {
    let domain = u.domain();
    let tol = policy.tolerance(domain);
    let (radii, ladders) = node_ladders(u, policy)?;
    let mut examined = 0;
    let mut skipped = 0;
    let mut worst: Option<(f64, usize, usize, Vec<Option<f64>>)> = None;
    for (i, j, ladder) in ladders {
        let Some(best) = ladder.iter().flatten().copied().reduce(f64::max) else {
            skipped += 1;
            continue;
        };
        examined += 1;
        if worst.as_ref().is_none_or(|w| best < w.0) {
            worst = Some((best, i, j, ladder));
        }
    }
    let Some((worst_lambda, wi, wj, worst_ladder)) = worst else {
        return Err(Error::EmptyInterior(
            "no interior node has a valid circle".into(),
        ));
    };
    let verdict = if worst_lambda >= -tol {
        PshVerdict::Psh
    } else if worst_lambda < -2.0 * tol {
        PshVerdict::NotPsh
    } else {
        PshVerdict::Inconclusive
    };
    Ok(PshReport {
        verdict,
        worst_node: domain.node(wi, wj).into(),
        worst_lambda,
        worst_ladder,
        radii,
        tolerance: tol,
        nodes_examined: examined,
        nodes_skipped: skipped,
    })
}

/// Per-node Λ estimates (max over the ladder), masked off the interior.
pub fn lambda_map(u: &ScalarSampleField, policy: &RadiiPolicy) -> Result<ScalarSampleField> {
    let domain = u.domain();
    let (_, ladders) = node_ladders(u, policy)?;
    let mut samples = vec![None; domain.len()];
    for (i, j, ladder) in ladders {
        samples[domain.index(i, j)] = ladder.into_iter().flatten().reduce(f64::max);
    }
    Ok(ScalarSampleField::from_samples(domain.clone(), samples))
}

/// Five-point discrete Levi form `¼(∂xx + ∂yy)` at nodes whose four neighbours
/// are valid.
pub fn discrete_levi(u: &ScalarSampleField) -> ScalarSampleField {
    let domain = u.domain();
    let n = domain.resolution();
    let (dx, dy) = domain.spacing_xy();
    let mut samples = vec![None; domain.len()];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let (Some(c), Some(xp), Some(xm), Some(yp), Some(ym)) = (
                u.get(i, j),
                u.get(i + 1, j),
                u.get(i - 1, j),
                u.get(i, j + 1),
                u.get(i, j - 1),
            ) else {
                continue;
            };
            let lap = (xp + xm - 2.0 * c) / (dx * dx) + (yp + ym - 2.0 * c) / (dy * dy);
            samples[domain.index(i, j)] = Some(0.25 * lap);
        }
    }
    ScalarSampleField::from_samples(domain.clone(), samples)
}

/// Minimum of the discrete Levi form and where it occurs.
pub fn min_discrete_levi(u: &ScalarSampleField) -> Option<(f64, Complex64)> {
    let levi = discrete_levi(u);
    let domain = levi.domain();
    (0..domain.len())
        .filter(|&idx| levi.mask()[idx])
        .map(|idx| {
            let (i, j) = domain.unindex(idx);
            (levi.values()[idx], domain.node(i, j))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(res: usize) -> GridDomain {
        GridDomain::square(Complex64::new(0.0, 0.0), 1.0, res).unwrap()
    }

    fn verdict_of(res: usize, f: impl Fn(Complex64) -> f64 + Sync) -> PshReport {
        let u = ScalarSampleField::from_fn(&square(res), |z| Some(f(z)));
        psh_verdict(&u, &RadiiPolicy::default()).unwrap()
    }

    #[test]
    fn zero_is_psh() {
        assert_eq!(verdict_of(65, |_| 0.0).verdict, PshVerdict::Psh);
    }

    #[test]
    fn half_abs2_is_psh_with_lambda_half() {
        let r = verdict_of(65, |z| 0.5 * z.norm_sqr());
        assert_eq!(r.verdict, PshVerdict::Psh);
        assert!((r.worst_lambda - 0.5).abs() < r.tolerance);
    }

    #[test]
    fn negative_half_abs2_is_not_psh() {
        let r = verdict_of(65, |z| -0.5 * z.norm_sqr());
        assert_eq!(r.verdict, PshVerdict::NotPsh);
        for (lambda, radius) in r.worst_ladder.iter().zip(&r.radii) {
            assert!((lambda.unwrap() + 0.5).abs() < 10.0 * radius * radius);
        }
    }

    #[test]
    fn calibration_suite_is_stable_under_refinement() {
        type Case = (&'static str, fn(Complex64) -> f64, PshVerdict);
        let cases: [Case; 6] = [
            ("zero", |_| 0.0, PshVerdict::Psh),
            ("re", |z| z.re, PshVerdict::Psh),
            ("abs2", |z| z.norm_sqr(), PshVerdict::Psh),
            ("neg-abs2", |z| -z.norm_sqr(), PshVerdict::NotPsh),
            ("log", |z| (z - Complex64::new(2.0, 0.0)).norm().ln(), PshVerdict::Psh),
            ("ramp", |z| z.re.max(0.0), PshVerdict::Psh),
        ];
        for (name, f, expected) in cases {
            for res in [65, 129] {
                assert_eq!(verdict_of(res, f).verdict, expected, "{name} at {res}");
            }
        }
    }

    #[test]
    fn masked_singularity_is_skipped() {
        let u = ScalarSampleField::from_fn(&square(65), |z| Some(z.norm().ln()));
        let r = psh_verdict(&u, &RadiiPolicy::default()).unwrap();
        assert_eq!(r.verdict, PshVerdict::Psh);
    }

    #[test]
    fn tiny_domain_is_rejected() {
        let u = ScalarSampleField::from_fn(&square(9), |z| Some(z.re));
        assert!(matches!(
            psh_verdict(&u, &RadiiPolicy::default()),
            Err(Error::DomainTooSmall(_))
        ));
    }

    #[test]
    fn discrete_levi_of_abs2() {
        let u = ScalarSampleField::from_fn(&square(33), |z| Some(z.norm_sqr()));
        let (m, _) = min_discrete_levi(&u).unwrap();
        assert!((m - 1.0).abs() < 1e-10);
    }
}
