use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::connection::SELF_ADJOINT_TOLERANCE;
use crate::bundle::{self_adjointness_residual, MetricField, SectionField};
use crate::error::{Error, Result};
use crate::field::GridDomain;
use crate::harness::maps::{curvature_csv, levi_csv, norm_csv, scalar_csv};
use crate::harness::scenario::{point_vector, BuiltScenario, Check, Scenario};
use crate::homomorphism::{bound32_check, conclusion_check, hypothesis_check, inequality33_check};
use crate::psh::{grid_tolerance, max_principle_check, RadiiPolicy};
use crate::random::{derive_seed, prng, random_holomorphic, random_vector, PRNG_NAME};
use crate::report::{Outcome, VerificationReport, Witness};
use crate::sheaf::{
    hom_family_griffiths_check, metric_axioms_check, stationarity_check, BundleNorm, DirectImageNorm,
    LpNorm, SectionFamily, SheafMetric, STATIONARITY_STEP,
};

pub const EQ23_TOLERANCE: f64 = 1e-5;
const EQ23_SECTIONS: usize = 10;
const EQ23_POINTS: usize = 5;
const BOUND32_TRIALS: usize = 10;
const AXIOM_SAMPLES: usize = 4;
const AXIOM_RESOLUTION: usize = 17;
pub const MAX_PRINCIPLE_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

/// Exit status of a scenario run.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Reports and heatmaps produced by one scenario.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub scenario: String,
    pub seed: u64,
    pub reports: Vec<VerificationReport>,
    /// File name → CSV contents.
    pub maps: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub check: String,
    pub outcome: Outcome,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub prng: String,
    pub exit_code: i32,
    pub checks: Vec<SummaryLine>,
}

impl RunOutput {
    /// 1 if any check failed, else 3 if any was inconclusive, else 0.
    /// Vacuous checks never affect the status.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.reports)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            scenario: self.scenario.clone(),
            seed: self.seed,
            prng: PRNG_NAME.into(),
            exit_code: self.exit_code(),
            checks: self
                .reports
                .iter()
                .map(|r| SummaryLine {
                    check: r.check.clone(),
                    outcome: r.outcome,
                    residual: r.residual,
                    tolerance: r.tolerance,
                })
                .collect(),
        }
    }

    pub fn report(&self, check: &str) -> Option<&VerificationReport> {
        self.reports.iter().find(|r| r.check == check)
    }

    /// Write one JSON file per report, the CSV maps, `summary.json`, and a
    /// separate `metadata.json` carrying the only non-deterministic data.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for r in &self.reports {
            fs::write(dir.join(format!("{}.json", r.check)), to_json(r)?)?;
        }
        for (name, csv) in &self.maps {
            fs::write(dir.join(name), csv)?;
        }
        fs::write(dir.join("summary.json"), to_json(&self.summary())?)?;
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = serde_json::json!({
            "scenario": self.scenario,
            "seed": self.seed,
            "prng": PRNG_NAME,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": stamp,
        });
        fs::write(dir.join("metadata.json"), to_json(&meta)?)?;
        Ok(())
    }
}

pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.outcome == Outcome::Fail) {
        EXIT_FAIL
    } else if reports.iter().any(|r| r.outcome == Outcome::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PASS
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Run every check of `scenario` in order.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    scenario.check_inputs()?;
    let built = scenario.build()?;
    let mut out = RunOutput {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        reports: Vec::new(),
        maps: BTreeMap::new(),
    };
    for (k, &check) in scenario.checks.iter().enumerate() {
        let seed = derive_seed(scenario.seed, k as u64);
        let report = run_check(scenario, &built, check, seed, &mut out.maps)?;
        out.reports.push(report);
    }
    if let Some(t) = &scenario.truncation {
        let policy = policy(scenario);
        out.reports.push(crate::harness::gallery::truncation_study(
            &t.ranks,
            &scenario.domain,
            &policy,
        )?);
    }
    Ok(out)
}

fn policy(scenario: &Scenario) -> RadiiPolicy {
    RadiiPolicy {
        tol_factor: scenario.grid_factor(),
        ..RadiiPolicy::default()
    }
}

fn run_check(
    scenario: &Scenario,
    built: &BuiltScenario,
    check: Check,
    seed: u64,
    maps: &mut BTreeMap<String, String>,
) -> Result<VerificationReport> {
    let hom = &built.hom;
    let domain = &scenario.domain;
    let policy = policy(scenario);
    let report = match check {
        Check::Validate => validate_report(hom.source(), hom.target(), domain)?,
        Check::CurvatureMap => {
            let src = curvature_csv(hom.source(), domain)?;
            let tgt = curvature_csv(hom.target(), domain)?;
            let norm = norm_csv(hom, domain);
            let levi = levi_csv(hom, domain);
            let bad = [&src, &tgt]
                .iter()
                .map(|csv| csv.matches("NaN").count() + csv.matches("inf").count())
                .sum::<usize>();
            maps.insert("curvature_source.csv".into(), src);
            maps.insert("curvature_target.csv".into(), tgt);
            maps.insert("norm.csv".into(), norm);
            maps.insert("levi.csv".into(), levi);
            VerificationReport::judge(
                "curvature-map",
                bad as f64,
                0.0,
                domain.len() * 2,
                Witness::default().with_note("non-finite curvature entries"),
            )
        }
        Check::Hypothesis => {
            let r = hypothesis_check(hom, domain, scenario.vector_samples(), seed, scenario.hypothesis_mode())?;
            match scenario.tolerances.hypothesis {
                Some(tol) if r.outcome != Outcome::Vacuous => rejudge(r, tol),
                _ => r,
            }
        }
        Check::Conclusion => {
            let (r, _) = conclusion_check(hom, domain, &policy)?;
            maps.insert(
                "log_norm.csv".into(),
                scalar_csv(&hom.log_norm_field(domain)),
            );
            r
        }
        Check::MaxPrinciple => max_principle_report(hom, domain, scenario.grid_factor())?,
        Check::ProofTrace => proof_trace_report(hom, domain, seed)?,
        Check::Eq23 => eq23_report(hom.source(), hom.target(), domain, seed, scenario)?,
        Check::Axioms => axioms_report(scenario, built, seed)?,
        Check::LpStationarity => {
            let spec = scenario
                .lp
                .as_ref()
                .ok_or_else(|| Error::Scenario("lp-stationarity requires an `lp` block".into()))?;
            let (fm, rho) = built.lp.as_ref().expect("lp block was built");
            let w = match &spec.w {
                Some(w) => point_vector(w),
                None => random_vector(&mut prng(seed), fm.total_rank()),
            };
            stationarity_check(
                fm,
                rho,
                spec.s0.into(),
                &w,
                spec.probes,
                seed,
                STATIONARITY_STEP,
                SectionFamily::Stationary,
            )?
        }
        Check::HomFamily => {
            let (gens, combos) = match &scenario.family {
                Some(f) => (f.generators.clone(), f.combinations),
                None => (vec![hom.map().clone()], 0),
            };
            hom_family_griffiths_check(hom.source(), hom.target(), &gens, domain, combos, seed, &policy)?
        }
    };
    Ok(VerificationReport {
        check: check.name().into(),
        ..report
    }
    .with_seed(seed))
}

/// Re-judge a report against a different tolerance.
pub fn rejudge(r: VerificationReport, tolerance: f64) -> VerificationReport {
    let pass = r.residual <= tolerance;
    VerificationReport {
        pass,
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        tolerance,
        ..r
    }
}

/// Hermitian, positive and curvature self-adjoint at every node.
pub fn validate_report(source: &MetricField, target: &MetricField, domain: &GridDomain) -> Result<VerificationReport> {
    let mut worst = (0.0, domain.center());
    for metric in [source, target] {
        for s in domain.nodes() {
            let r = self_adjointness_residual(&metric.at(s)?);
            if r > worst.0 {
                worst = (r, s);
            }
        }
    }
    Ok(VerificationReport::judge(
        "validate",
        worst.0,
        SELF_ADJOINT_TOLERANCE,
        2 * domain.len(),
        Witness::at(worst.1).with_note("curvature self-adjointness residual"),
    )
    .with_detail("source_spd_margin", source.spd_margin())
    .with_detail("target_spd_margin", target.spd_margin()))
}

/// `max_interior log‖A‖ ≤ max_boundary log‖A‖ + k·Δ²` on nested concentric rectangles.
pub fn max_principle_report(
    hom: &crate::homomorphism::HomomorphismField,
    domain: &GridDomain,
    grid_factor: f64,
) -> Result<VerificationReport> {
    let u = hom.log_norm_field(domain);
    let tol = grid_tolerance(domain, grid_factor);
    let mut worst: Option<VerificationReport> = None;
    for fraction in MAX_PRINCIPLE_FRACTIONS {
        let r = max_principle_check(&u, domain.concentric(fraction)?, tol)?;
        if worst.as_ref().is_none_or(|w| r.residual > w.residual) {
            worst = Some(r.with_detail("fraction", fraction));
        }
    }
    Ok(worst.expect("three sub-rectangles"))
}

fn proof_trace_report(
    hom: &crate::homomorphism::HomomorphismField,
    domain: &GridDomain,
    seed: u64,
) -> Result<VerificationReport> {
    let s0 = domain.center();
    let (bound, fit) = bound32_check(hom.source(), s0, BOUND32_TRIALS, seed)?;
    let mut parts = vec![bound];
    for divisor in [2.0, 4.0] {
        match inequality33_check(hom, s0, fit.epsilon1() / divisor, &fit) {
            Ok(r) => parts.push(r),
            Err(Error::VanishingNorm(s)) => {
                return Ok(VerificationReport::vacuous(
                    "proof-trace",
                    0.0,
                    Witness::at(s).with_note("A vanishes at the base point"),
                ))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(combine("proof-trace", &parts)
        .with_detail("epsilon", fit.epsilon)
        .with_detail("c", fit.c)
        .with_detail("epsilon1", fit.epsilon1())
        .with_detail("c1", fit.c1()))
}

/// Merge reports: residual is the largest excess over each part's tolerance.
pub fn combine(check: &str, parts: &[VerificationReport]) -> VerificationReport {
    let worst = parts
        .iter()
        .max_by(|a, b| (a.residual - a.tolerance).total_cmp(&(b.residual - b.tolerance)))
        .expect("at least one part");
    let samples = parts.iter().map(|p| p.samples).sum();
    let mut out = VerificationReport::judge(
        check,
        worst.residual - worst.tolerance,
        0.0,
        samples,
        worst.witness.clone().with_note(format!("{}: {}", worst.check, worst.witness.note)),
    );
    for (k, p) in parts.iter().enumerate() {
        out = out
            .with_detail(&format!("{k}_{}_residual", p.check), p.residual)
            .with_detail(&format!("{k}_{}_tolerance", p.check), p.tolerance);
    }
    out
}

fn eq23_report(
    source: &MetricField,
    target: &MetricField,
    domain: &GridDomain,
    seed: u64,
    scenario: &Scenario,
) -> Result<VerificationReport> {
    let mut rng = prng(seed);
    let step = domain.default_fd_step();
    let (hx, hy) = domain.half_widths();
    let mut worst = (0.0, domain.center());
    let mut samples = 0;
    for metric in [source, target] {
        for _ in 0..EQ23_SECTIONS {
            let section = SectionField::new(random_holomorphic(&mut rng, metric.rank(), 1, 2, 1.0))?;
            for _ in 0..EQ23_POINTS {
                let s = domain.center()
                    + Complex64::new(
                        hx * 0.8 * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0),
                        hy * 0.8 * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0),
                    );
                match metric.eq23_residual(&section, s, step) {
                    Ok(r) => {
                        samples += 1;
                        if r > worst.0 {
                            worst = (r, s);
                        }
                    }
                    Err(Error::VanishingSection(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(VerificationReport::judge(
        "eq23",
        worst.0,
        scenario.tolerances.eq23.unwrap_or(EQ23_TOLERANCE),
        samples,
        Witness::at(worst.1).with_note("|lhs - rhs| of the log-norm Laplacian identity"),
    ))
}

fn axioms_report(scenario: &Scenario, built: &BuiltScenario, seed: u64) -> Result<VerificationReport> {
    let domain = scenario.domain.with_resolution(scenario.domain.resolution().min(AXIOM_RESOLUTION))?;
    let source = BundleNorm(built.hom.source());
    let target = BundleNorm(built.hom.target());
    let mut subjects: Vec<(&str, Box<dyn SheafMetric + '_>)> =
        vec![("source", Box::new(source)), ("target", Box::new(target))];
    if let Some((fm, rho)) = &built.lp {
        subjects.push(("lp", Box::new(LpNorm { fibered: fm, rho })));
    }
    if let Some((fm, rho)) = &built.direct_image {
        subjects.push(("direct_image", Box::new(DirectImageNorm { fibered: fm, rho })));
    }
    let mut parts = Vec::new();
    for (k, (name, metric)) in subjects.iter().enumerate() {
        let r = metric_axioms_check(metric.as_ref(), &domain, AXIOM_SAMPLES, derive_seed(seed, k as u64))?;
        parts.push(VerificationReport {
            check: (*name).into(),
            ..r
        });
    }
    Ok(combine("axioms", &parts))
}
