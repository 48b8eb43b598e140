use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::MetricField;
use crate::error::{Error, Result};
use crate::field::json::Point;
use crate::field::surrogate::exp_certified;
use crate::field::{CMatrix, GridDomain, MatrixPolyField};
use crate::homomorphism::{HomomorphismField, HypothesisMode};
use crate::report::Outcome;
use crate::sheaf::{FiberedConfig, FiberedMetric, WeightField};

/// Relative accuracy of exponential weights built from scenario files.
pub const SCENARIO_EXP_TOLERANCE: f64 = 1e-12;
const SCENARIO_EXP_MAX_ORDER: usize = 80;

/// The checks a scenario may request, run in the order listed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Validate,
    CurvatureMap,
    Hypothesis,
    Conclusion,
    MaxPrinciple,
    ProofTrace,
    Eq23,
    Axioms,
    LpStationarity,
    HomFamily,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Validate,
        Check::CurvatureMap,
        Check::Hypothesis,
        Check::Conclusion,
        Check::MaxPrinciple,
        Check::ProofTrace,
        Check::Eq23,
        Check::Axioms,
        Check::LpStationarity,
        Check::HomFamily,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Validate => "validate",
            Check::CurvatureMap => "curvature-map",
            Check::Hypothesis => "hypothesis",
            Check::Conclusion => "conclusion",
            Check::MaxPrinciple => "max-principle",
            Check::ProofTrace => "proof-trace",
            Check::Eq23 => "eq23",
            Check::Axioms => "axioms",
            Check::LpStationarity => "lp-stationarity",
            Check::HomFamily => "hom-family",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown check `{s}`")))
    }
}

/// How a metric is specified in a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpec {
    /// An explicit polynomial matrix field.
    Field(MatrixPolyField),
    /// `P ≡ I`.
    Flat { rank: usize },
    /// `e^{u} · base` for a real scalar polynomial `u` (base defaults to rank 1 flat).
    Conformal {
        u: MatrixPolyField,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Box<MetricSpec>>,
    },
    /// Block-diagonal sum.
    Diagonal(Vec<MetricSpec>),
    /// The `a = 2` metric induced by a fibered configuration.
    Fibered(FiberedConfig),
    /// A side of a gallery entry.
    Gallery { entry: String, side: Side },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Target,
}

impl MetricSpec {
    /// The matrix field this spec denotes on `domain` (exponentials certified there).
    pub fn field(&self, domain: &GridDomain) -> Result<MatrixPolyField> {
        Ok(match self {
            MetricSpec::Field(f) => f.clone(),
            MetricSpec::Flat { rank } => {
                if *rank == 0 {
                    return Err(Error::Scenario("flat metric of rank 0".into()));
                }
                MatrixPolyField::identity(*rank)
            }
            MetricSpec::Conformal { u, base } => {
                if u.shape() != (1, 1) {
                    return Err(Error::Scenario("conformal factor must be scalar".into()));
                }
                let e = exp_certified(u, domain, SCENARIO_EXP_TOLERANCE, SCENARIO_EXP_MAX_ORDER)?.field;
                match base {
                    None => e,
                    Some(b) => {
                        let b = b.field(domain)?;
                        let mut scaled = MatrixPolyField::zeros(b.rows(), b.cols());
                        let id = CMatrix::identity(b.rows(), b.rows());
                        for (j, k, c) in e.terms() {
                            scaled.add_term(j, k, &(&id * c[(0, 0)]));
                        }
                        &scaled * &b
                    }
                }
            }
            MetricSpec::Diagonal(parts) => {
                if parts.is_empty() {
                    return Err(Error::Scenario("empty diagonal metric".into()));
                }
                let blocks = parts
                    .iter()
                    .map(|p| p.field(domain))
                    .collect::<Result<Vec<_>>>()?;
                MatrixPolyField::block_diagonal(&blocks)
            }
            MetricSpec::Fibered(config) => {
                let (fm, rho) = config.build(domain)?;
                return Ok(fm.induced_hermitian(&rho, domain)?.field().clone());
            }
            MetricSpec::Gallery { entry, side } => {
                let s = crate::harness::gallery::gallery(entry)?;
                let spec = match side {
                    Side::Source => s.source,
                    Side::Target => s.target,
                };
                spec.field(domain)?
            }
        })
    }

    pub fn build(&self, domain: &GridDomain) -> Result<MetricField> {
        MetricField::validate(self.field(domain)?, domain)
    }
}

/// The bundle map of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomSpec {
    Identity,
    Field(MatrixPolyField),
}

/// Overrides for the default tolerances and sampling sizes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<f64>,
    /// Multiplier `k` in the grid tolerance `k·Δ²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eq23: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_mode: Option<HypothesisMode>,
}

/// Parameters of the `L^a` checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSpec {
    pub config: FiberedConfig,
    pub s0: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Point>>,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_probes() -> usize {
    4
}

/// Generators for the homomorphism-family check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub generators: Vec<MatrixPolyField>,
    #[serde(default = "default_combinations")]
    pub combinations: usize,
}

fn default_combinations() -> usize {
    3
}

/// A truncation sweep: the scenario is rebuilt at each rank by `ranks`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub ranks: Vec<usize>,
}

/// A complete, self-describing run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub source: MetricSpec,
    pub target: MetricSpec,
    pub homomorphism: HomSpec,
    pub domain: GridDomain,
    pub checks: Vec<Check>,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_image: Option<FiberedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSpec>,
    /// Expected outcome per check, for gallery regression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<Check, Outcome>,
}

/// Metrics and map of a scenario, validated on its domain.
#[derive(Clone, Debug)]
pub struct BuiltScenario {
    pub hom: HomomorphismField,
    pub lp: Option<(FiberedMetric, WeightField)>,
    pub direct_image: Option<(FiberedMetric, WeightField)>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.check_inputs()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Every requested check has the inputs it needs.
    pub fn check_inputs(&self) -> Result<()> {
        if self.checks.contains(&Check::LpStationarity) && self.lp.is_none() {
            return Err(Error::Scenario("lp-stationarity requires an `lp` block".into()));
        }
        if let Some(f) = &self.family {
            if f.generators.is_empty() {
                return Err(Error::Scenario("family needs at least one generator".into()));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<BuiltScenario> {
        let source = self.source.build(&self.domain)?;
        let target = self.target.build(&self.domain)?;
        let a = match &self.homomorphism {
            HomSpec::Identity => {
                if source.rank() != target.rank() {
                    return Err(Error::Scenario(format!(
                        "identity between ranks {} and {}",
                        source.rank(),
                        target.rank()
                    )));
                }
                MatrixPolyField::identity(source.rank())
            }
            HomSpec::Field(f) => f.clone(),
        };
        let hom = HomomorphismField::new(a, source, target)?;
        let lp = self
            .lp
            .as_ref()
            .map(|l| l.config.build(&self.domain))
            .transpose()?;
        let direct_image = self
            .direct_image
            .as_ref()
            .map(|c| c.build(&self.domain))
            .transpose()?;
        Ok(BuiltScenario {
            hom,
            lp,
            direct_image,
        })
    }

    pub fn grid_factor(&self) -> f64 {
        self.tolerances.grid_factor.unwrap_or(10.0)
    }

    pub fn vector_samples(&self) -> usize {
        self.tolerances.vector_samples.unwrap_or(4)
    }

    pub fn hypothesis_mode(&self) -> HypothesisMode {
        self.tolerances.hypothesis_mode.unwrap_or_default()
    }
}

pub(crate) fn point_vector(points: &[Point]) -> crate::field::CVector {
    crate::field::CVector::from_iterator(points.len(), points.iter().map(|&p| Complex64::from(p)))
}
