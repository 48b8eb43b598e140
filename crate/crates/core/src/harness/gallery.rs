use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{CMatrix, GridDomain, MatrixPolyField};
use crate::harness::scenario::{
    Check, FamilySpec, HomSpec, LpSpec, MetricSpec, Scenario, Tolerances, TruncationSpec,
};
use crate::homomorphism::{conclusion_check, HomomorphismField};
use crate::psh::{PshVerdict, RadiiPolicy};
use crate::report::{Outcome, VerificationReport, Witness};
use crate::sheaf::{FiberPoint, FiberedConfig, FiberedMetric, WeightField};

const NAMES: [&str; 8] = [
    "flat-identity",
    "berndtsson-case",
    "conformal-ordered",
    "anti-ordered",
    "rank2-diagonal",
    "lp-example",
    "direct-image-product",
    "truncation-study",
];

pub const TRUNCATION_RANKS: [usize; 4] = [2, 4, 8, 16];

pub fn gallery_names() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// The prebuilt scenario called `name`.
pub fn gallery(name: &str) -> Result<Scenario> {
    Ok(match name {
        "flat-identity" => flat_identity(),
        "berndtsson-case" => berndtsson_case(),
        "conformal-ordered" => conformal(1.0),
        "anti-ordered" => conformal(-1.0),
        "rank2-diagonal" => rank2_diagonal(),
        "lp-example" => lp_example(),
        "direct-image-product" => direct_image_product(),
        "truncation-study" => truncation(),
        _ => {
            return Err(Error::UnknownGallery {
                name: name.into(),
                available: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The standard gallery domain `[−1, 1]²` at 65 × 65.
pub fn gallery_domain() -> GridDomain {
    GridDomain::square(c(0.0), 1.0, 65).expect("valid domain")
}

/// `k·|s|²`.
fn abs2(k: f64) -> MatrixPolyField {
    MatrixPolyField::scalar_monomial(1, 1, c(k))
}

fn weight(k: f64) -> MetricSpec {
    MetricSpec::Conformal { u: abs2(k), base: None }
}

fn all_pass(checks: &[Check]) -> BTreeMap<Check, Outcome> {
    checks.iter().map(|&c| (c, Outcome::Pass)).collect()
}

fn scenario(
    name: &str,
    source: MetricSpec,
    target: MetricSpec,
    homomorphism: HomSpec,
    checks: Vec<Check>,
) -> Scenario {
    Scenario {
        name: name.into(),
        source,
        target,
        homomorphism,
        domain: gallery_domain(),
        expected: all_pass(&checks),
        checks,
        seed: 0,
        tolerances: Tolerances::default(),
        lp: None,
        direct_image: None,
        family: None,
        truncation: None,
    }
}

fn flat_identity() -> Scenario {
    use Check::*;
    scenario(
        "flat-identity",
        MetricSpec::Flat { rank: 2 },
        MetricSpec::Flat { rank: 2 },
        HomSpec::Identity,
        vec![Validate, CurvatureMap, Hypothesis, Conclusion, MaxPrinciple, ProofTrace, Eq23, Axioms, HomFamily],
    )
}

/// Flat source, `P' = I + G^*G` with `G` holomorphic (Griffiths seminegative).
fn berndtsson_case() -> Scenario {
    use Check::*;
    let g = MatrixPolyField::from_terms(
        2,
        2,
        [
            (0, 0, CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.2), c(0.0), c(0.0)])),
            (1, 0, CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), Complex64::new(0.0, 0.3)])),
            (2, 0, CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.1), c(0.0)])),
        ],
    )
    .expect("consistent shapes");
    let p = &MatrixPolyField::identity(2) + &(&g.adjoint() * &g);
    scenario(
        "berndtsson-case",
        MetricSpec::Flat { rank: 2 },
        MetricSpec::Field(p),
        HomSpec::Identity,
        vec![Validate, CurvatureMap, Hypothesis, Conclusion, MaxPrinciple, ProofTrace, Eq23, HomFamily],
    )
}

/// `h ≡ 1`, `h' = e^{±|s|²}`, `A = id`.
fn conformal(sign: f64) -> Scenario {
    use Check::*;
    if sign > 0.0 {
        scenario(
            "conformal-ordered",
            MetricSpec::Flat { rank: 1 },
            weight(1.0),
            HomSpec::Identity,
            vec![Validate, CurvatureMap, Hypothesis, Conclusion, MaxPrinciple, ProofTrace, Eq23, HomFamily],
        )
    } else {
        let mut s = scenario(
            "anti-ordered",
            MetricSpec::Flat { rank: 1 },
            weight(-1.0),
            HomSpec::Identity,
            vec![Validate, Hypothesis, Conclusion, MaxPrinciple],
        );
        for check in [Hypothesis, Conclusion, MaxPrinciple] {
            s.expected.insert(check, Outcome::Fail);
        }
        s
    }
}

fn rank2_diagonal() -> Scenario {
    use Check::*;
    let a = MatrixPolyField::from_terms(
        2,
        2,
        [
            (0, 0, CMatrix::identity(2, 2)),
            (1, 0, CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.5), c(0.0)])),
        ],
    )
    .expect("consistent shapes");
    let e12 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let shifted = MatrixPolyField::from_terms(
        2,
        2,
        [
            (1, 0, CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)])),
            (0, 0, CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)])),
        ],
    )
    .expect("consistent shapes");
    let mut s = scenario(
        "rank2-diagonal",
        MetricSpec::Diagonal(vec![weight(-1.0), weight(-2.0)]),
        MetricSpec::Diagonal(vec![MetricSpec::Flat { rank: 1 }, weight(1.0)]),
        HomSpec::Field(a),
        vec![Validate, CurvatureMap, Hypothesis, Conclusion, MaxPrinciple, ProofTrace, Eq23, HomFamily],
    );
    s.family = Some(FamilySpec {
        generators: vec![MatrixPolyField::identity(2), MatrixPolyField::constant(e12), shifted],
        combinations: 3,
    });
    s
}

/// Three fiber points with weights `1, ½, 2` and
/// `ρ = (|s|², Re s, ½|s|² − 0.3 Re s²)`.
pub fn lp_weights() -> Vec<MatrixPolyField> {
    vec![
        abs2(1.0),
        MatrixPolyField::scalar_from_terms([(1, 0, c(0.5)), (0, 1, c(0.5))]),
        MatrixPolyField::scalar_from_terms([(1, 1, c(0.5)), (2, 0, c(-0.15)), (0, 2, c(-0.15))]),
    ]
}

fn fibered_config(weights: &[f64], rho: Vec<MatrixPolyField>, a: f64) -> FiberedConfig {
    let domain = gallery_domain();
    let fm = FiberedMetric::new(
        weights
            .iter()
            .map(|&weight| FiberPoint { weight, metric: None })
            .collect(),
        a,
    )
    .expect("valid fiber");
    let rho = WeightField::new(rho, &domain).expect("real weights");
    FiberedConfig::from_parts(&fm, &rho)
}

fn lp_example() -> Scenario {
    use Check::*;
    let mut s = scenario(
        "lp-example",
        MetricSpec::Flat { rank: 3 },
        MetricSpec::Flat { rank: 3 },
        HomSpec::Identity,
        vec![Validate, Axioms, LpStationarity],
    );
    s.lp = Some(LpSpec {
        config: fibered_config(&[1.0, 0.5, 2.0], lp_weights(), 4.0),
        s0: c(0.3).into(),
        w: None,
        probes: 4,
    });
    s
}

/// Product fibration with three fiber points, `h(s, x_i) = e^{−c_i|s|²}`.
fn direct_image_product() -> Scenario {
    use Check::*;
    let config = fibered_config(&[1.0, 1.0, 2.0], vec![abs2(-1.0), abs2(-0.5), abs2(-2.0)], 2.0);
    let mut s = scenario(
        "direct-image-product",
        MetricSpec::Fibered(config.clone()),
        MetricSpec::Flat { rank: 3 },
        HomSpec::Identity,
        vec![Validate, Hypothesis, Conclusion, MaxPrinciple, Eq23, Axioms],
    );
    s.direct_image = Some(config);
    s
}

/// Rank-`n` truncation: source `diag(e^{−λ_k|s|²})`, `λ_k = 1 + 1/(k+1)`, flat
/// target, constant map with couplings `A_{ij} = 4^{−(i+j)}` (diagonal `2^{−i}`).
pub fn truncation_pair(n: usize) -> (MetricSpec, MetricSpec, HomSpec) {
    let source = MetricSpec::Diagonal(
        (0..n)
            .map(|k| weight(-(1.0 + 1.0 / (k as f64 + 1.0))))
            .collect(),
    );
    let a = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(0.5f64.powi(i as i32))
        } else {
            c(0.25f64.powi((i + j) as i32))
        }
    });
    (source, MetricSpec::Flat { rank: n }, HomSpec::Field(MatrixPolyField::constant(a)))
}

fn truncation() -> Scenario {
    use Check::*;
    let (source, target, hom) = truncation_pair(4);
    let mut s = scenario(
        "truncation-study",
        source,
        target,
        hom,
        vec![Validate, Hypothesis, Conclusion],
    );
    s.truncation = Some(TruncationSpec {
        ranks: TRUNCATION_RANKS.to_vec(),
    });
    s
}

/// Psh margin of `log ‖A‖` for each truncation rank. Stable when the verdict
/// never changes, successive margin changes do not grow (beyond the grid
/// tolerance) and the last doubling moves the margin by at most the grid tolerance.
pub fn truncation_study(ranks: &[usize], domain: &GridDomain, policy: &RadiiPolicy) -> Result<VerificationReport> {
    if ranks.len() < 2 {
        return Err(Error::InvalidArgument("a truncation study needs at least two ranks".into()));
    }
    let mut margins = Vec::new();
    let mut verdicts = Vec::new();
    let mut tol = 0.0;
    for &n in ranks {
        let (source, target, hom) = truncation_pair(n);
        let HomSpec::Field(a) = hom else { unreachable!() };
        let h = HomomorphismField::new(a, source.build(domain)?, target.build(domain)?)?;
        let (_, psh) = conclusion_check(&h, domain, policy)?;
        tol = psh.tolerance;
        margins.push(psh.worst_lambda);
        verdicts.push(psh.verdict);
    }
    let deltas: Vec<f64> = margins.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let growth = deltas
        .windows(2)
        .map(|w| w[1] - w[0] - tol)
        .fold(f64::NEG_INFINITY, f64::max);
    let flips = verdicts.windows(2).any(|w| w[0] != w[1]) || verdicts[0] != PshVerdict::Psh;
    let residual = if flips {
        f64::MAX
    } else {
        deltas.last().copied().unwrap_or(0.0).max(growth)
    };
    let mut report = VerificationReport::judge(
        "truncation-stability",
        residual,
        tol,
        ranks.len(),
        Witness::default().with_note("psh margin across truncation ranks"),
    );
    for (n, m) in ranks.iter().zip(&margins) {
        report = report.with_detail(&format!("margin_rank_{n}"), *m);
    }
    Ok(report)
}
