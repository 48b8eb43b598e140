//! Randomized search for counterexamples to "curvature-decreasing maps have
//! plurisubharmonic `log ‖A‖`".
//!
//! Even trials use the conformal construction `h' = e^u h`, `A = id`, `u`
//! subharmonic. Odd trials draw a random pair of rank ≤ 3: `A = A0 + A1 s` with
//! `A0` dominant, a random target `Q`, and then shift the target by
//! `e^{(m+δ)|s|²}` where `m` is the worst ordering gap against `Q` on a coarse
//! grid. Both are filtered through the hypothesis check on the fine grid.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CMatrix, GridDomain, MatrixPolyField};
use crate::harness::run::max_principle_report;
use crate::harness::scenario::{Check, HomSpec, MetricSpec, Scenario, Tolerances};
use crate::homomorphism::{conclusion_check, gap_map, hypothesis_check, HomomorphismField, HypothesisMode};
use crate::psh::{grid_tolerance, min_discrete_levi, PshVerdict, RadiiPolicy};
use crate::random::{derive_seed, prng, random_matrix, random_metric, Prng, PRNG_NAME};
use crate::report::Outcome;

pub const FALSIFY_RESOLUTION: usize = 65;
pub const FALSIFY_HALF_WIDTH: f64 = 0.5;
pub const LEVI_FACTOR: f64 = 10.0;
const COARSE_RESOLUTION: usize = 17;
const VECTOR_SAMPLES: usize = 4;
/// Pairs whose coarse gap exceeds this are discarded before the fine check.
const MAX_SHIFT: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    Conformal,
    RandomPair,
}

/// A generated scenario that passed the hypothesis but not the conclusion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub kind: TrialKind,
    pub seed: u64,
    pub reason: String,
    pub min_levi: f64,
    /// Re-runnable with `curvlab run`.
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifySummary {
    pub trials: usize,
    pub seed: u64,
    pub prng: String,
    pub resolution: usize,
    pub levi_tolerance: f64,
    pub conformal_trials: usize,
    pub pair_trials: usize,
    /// Trials that passed the hypothesis check and were tested.
    pub tested: usize,
    /// Generated pairs rejected by the hypothesis check (or the generator).
    pub rejected: usize,
    /// Tested trials whose circle-average verdict was inconclusive.
    pub inconclusive: usize,
    /// Smallest discrete Levi value over all tested trials.
    pub min_levi: Option<f64>,
    /// Tested trials where an interior maximum of `log ‖A‖` beat the boundary
    /// maximum by more than the grid tolerance, on any of the nested rectangles.
    pub max_principle_failures: usize,
    /// Largest `interior max − boundary max − tolerance` over tested trials.
    pub max_principle_worst_excess: Option<f64>,
    pub counterexamples: Vec<Counterexample>,
}

impl FalsifySummary {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

pub fn falsify_domain() -> GridDomain {
    GridDomain::square(Complex64::new(0.0, 0.0), FALSIFY_HALF_WIDTH, FALSIFY_RESOLUTION).expect("valid domain")
}

enum Trial {
    Tested {
        min_levi: f64,
        max_principle_excess: f64,
        inconclusive: bool,
        failure: Option<String>,
    },
    Rejected,
}

/// Run `config.trials` trials; trial `k` draws from sub-stream `k` of the seed.
pub fn falsify(config: FalsifyConfig) -> Result<FalsifySummary> {
    let domain = falsify_domain();
    let levi_tolerance = grid_tolerance(&domain, LEVI_FACTOR);
    let mut summary = FalsifySummary {
        trials: config.trials,
        seed: config.seed,
        prng: PRNG_NAME.into(),
        resolution: FALSIFY_RESOLUTION,
        levi_tolerance,
        conformal_trials: 0,
        pair_trials: 0,
        tested: 0,
        rejected: 0,
        inconclusive: 0,
        min_levi: None,
        max_principle_failures: 0,
        max_principle_worst_excess: None,
        counterexamples: Vec::new(),
    };
    for trial in 0..config.trials {
        let seed = derive_seed(config.seed, trial as u64);
        let mut rng = prng(seed);
        let kind = if trial % 2 == 0 {
            summary.conformal_trials += 1;
            TrialKind::Conformal
        } else {
            summary.pair_trials += 1;
            TrialKind::RandomPair
        };
        let scenario = match kind {
            TrialKind::Conformal => conformal_scenario(&mut rng, &domain),
            TrialKind::RandomPair => match pair_scenario(&mut rng, &domain)? {
                Some(s) => s,
                None => {
                    summary.rejected += 1;
                    continue;
                }
            },
        };
        let scenario = Scenario {
            name: format!("falsify-{}-{trial}", config.seed),
            seed,
            ..scenario
        };
        match run_trial(&scenario, &domain, levi_tolerance)? {
            Trial::Rejected => summary.rejected += 1,
            Trial::Tested {
                min_levi,
                max_principle_excess,
                inconclusive,
                failure,
            } => {
                summary.tested += 1;
                summary.max_principle_failures += (max_principle_excess > 0.0) as usize;
                summary.max_principle_worst_excess = Some(
                    summary
                        .max_principle_worst_excess
                        .map_or(max_principle_excess, |m| m.max(max_principle_excess)),
                );
                summary.inconclusive += inconclusive as usize;
                summary.min_levi = Some(summary.min_levi.map_or(min_levi, |m| m.min(min_levi)));
                if let Some(reason) = failure {
                    summary.counterexamples.push(Counterexample {
                        trial,
                        kind,
                        seed,
                        reason,
                        min_levi,
                        scenario,
                    });
                }
            }
        }
    }
    Ok(summary)
}

fn run_trial(scenario: &Scenario, domain: &GridDomain, levi_tolerance: f64) -> Result<Trial> {
    let hom = scenario.build()?.hom;
    let hyp = hypothesis_check(&hom, domain, VECTOR_SAMPLES, scenario.seed, HypothesisMode::Auto)?;
    if hyp.outcome != Outcome::Pass {
        return Ok(Trial::Rejected);
    }
    let policy = RadiiPolicy::default();
    let (_, psh) = conclusion_check(&hom, domain, &policy)?;
    let log_norm = hom.log_norm_field(domain);
    let (min_levi, at) = min_discrete_levi(&log_norm)
        .ok_or_else(|| Error::EmptyInterior("no node has a discrete Levi value".into()))?;
    let max_principle = max_principle_report(&hom, domain, LEVI_FACTOR)?;

    let mut reasons = Vec::new();
    if min_levi < -levi_tolerance {
        reasons.push(format!("discrete Levi {min_levi:.3e} at {at}"));
    }
    if psh.verdict == PshVerdict::NotPsh {
        reasons.push(format!("circle averages give Lambda {:.3e}", psh.worst_lambda));
    }
    if max_principle.outcome == Outcome::Fail {
        reasons.push(format!("maximum principle excess {:.3e}", max_principle.residual));
    }
    Ok(Trial::Tested {
        min_levi,
        max_principle_excess: max_principle.residual - max_principle.tolerance,
        inconclusive: psh.verdict == PshVerdict::Inconclusive,
        failure: (!reasons.is_empty()).then(|| reasons.join("; ")),
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn trial_scenario(source: MetricSpec, target: MetricSpec, homomorphism: HomSpec, domain: &GridDomain) -> Scenario {
    let checks = vec![Check::Validate, Check::Hypothesis, Check::Conclusion, Check::MaxPrinciple];
    Scenario {
        name: String::new(),
        source,
        target,
        homomorphism,
        domain: domain.clone(),
        expected: checks.iter().map(|&k| (k, Outcome::Pass)).collect(),
        checks,
        seed: 0,
        tolerances: Tolerances::default(),
        lp: None,
        direct_image: None,
        family: None,
        truncation: None,
    }
}

/// `u = c|s|² + Re(b s²) + Re(d s)` with `c ∈ [0.2, 2]` and small harmonic part.
fn random_subharmonic(rng: &mut Prng) -> MatrixPolyField {
    let k = 0.2 + 1.8 * rng.random::<f64>();
    let b = random_matrix(rng, 1, 1, 0.3)[(0, 0)];
    let d = random_matrix(rng, 1, 1, 0.3)[(0, 0)];
    MatrixPolyField::scalar_from_terms([
        (1, 1, c(k)),
        (2, 0, b * 0.5),
        (0, 2, b.conj() * 0.5),
        (1, 0, d * 0.5),
        (0, 1, d.conj() * 0.5),
    ])
}

fn conformal_scenario(rng: &mut Prng, domain: &GridDomain) -> Scenario {
    let n = rng.random_range(1..=3);
    let h = MetricSpec::Field(random_metric(rng, n, 1, 0.5));
    let target = MetricSpec::Conformal {
        u: random_subharmonic(rng),
        base: Some(Box::new(h.clone())),
    };
    trial_scenario(h, target, HomSpec::Identity, domain)
}

fn pair_scenario(rng: &mut Prng, domain: &GridDomain) -> Result<Option<Scenario>> {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=3);
    let source = MetricSpec::Field(random_metric(rng, n, 1, 0.5));
    let q = MetricSpec::Field(random_metric(rng, m, 1, 0.5));
    let a0 = CMatrix::identity(m, n) + random_matrix(rng, m, n, 0.2);
    let a1 = random_matrix(rng, m, n, 0.3);
    let a = MatrixPolyField::from_terms(m, n, [(0, 0, a0), (1, 0, a1)])?;

    let coarse = domain.with_resolution(COARSE_RESOLUTION)?;
    let probe = HomomorphismField::new(a.clone(), source.build(&coarse)?, q.build(&coarse)?)?;
    let worst = gap_map(&probe, &coarse, VECTOR_SAMPLES, rng.random(), HypothesisMode::Auto)?
        .into_iter()
        .filter_map(|g| g.worst.map(|w| w.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() || worst > MAX_SHIFT {
        return Ok(None);
    }
    let shift = worst + 0.2 + 0.1 * worst.abs();
    let target = MetricSpec::Conformal {
        u: MatrixPolyField::scalar_monomial(1, 1, c(shift)),
        base: Some(Box::new(q)),
    };
    Ok(Some(trial_scenario(source, target, HomSpec::Field(a), domain)))
}
