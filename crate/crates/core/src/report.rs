use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::json::{point_vec, Point};
use crate::field::CVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    /// The check's premise does not hold, so nothing was asserted.
    Vacuous,
}

/// Where the worst case of a check occurred.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<Vec<Point>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi: Option<Point>,
    pub note: String,
}

impl Witness {
    pub fn at(s: Complex64) -> Self {
        Self {
            s: Some(s.into()),
            ..Self::default()
        }
    }

    pub fn with_vector(mut self, v: &CVector) -> Self {
        self.v = Some(point_vec(v));
        self
    }

    pub fn with_direction(mut self, xi: Complex64) -> Self {
        self.xi = Some(xi.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Structured outcome of a numerical check.
///
/// `pass` is true exactly when `residual <= tolerance` (and the outcome is not
/// inconclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub outcome: Outcome,
    pub residual: f64,
    pub witness: Witness,
    pub samples: usize,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, f64>,
}

impl VerificationReport {
    /// Pass/fail from `residual <= tolerance`.
    pub fn judge(
        check: impl Into<String>,
        residual: f64,
        tolerance: f64,
        samples: usize,
        witness: Witness,
    ) -> Self {
        let residual = finite_or_max(residual);
        let pass = residual <= tolerance;
        Self {
            check: check.into(),
            pass,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            residual,
            witness,
            samples,
            tolerance,
            seed: None,
            details: BTreeMap::new(),
        }
    }

    pub fn inconclusive(
        check: impl Into<String>,
        residual: f64,
        tolerance: f64,
        samples: usize,
        witness: Witness,
    ) -> Self {
        Self {
            pass: false,
            outcome: Outcome::Inconclusive,
            ..Self::judge(check, residual, tolerance, samples, witness)
        }
    }

    /// The premise failed by `residual`; reported but not counted as a failure.
    pub fn vacuous(check: impl Into<String>, residual: f64, witness: Witness) -> Self {
        Self {
            pass: false,
            outcome: Outcome::Vacuous,
            ..Self::judge(check, residual, 0.0, 0, witness)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), finite_or_max(value));
        self
    }

    pub fn is_failure(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_residual_within_tolerance() {
        let r = VerificationReport::judge("x", 1e-9, 1e-8, 3, Witness::default());
        assert!(r.pass);
        let r = VerificationReport::judge("x", 2e-8, 1e-8, 3, Witness::default());
        assert!(!r.pass && r.outcome == Outcome::Fail);
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport::judge("hypothesis", 0.5, 1e-8, 10, Witness::at(Complex64::new(0.1, 0.2)).with_note("K'-K"))
            .with_seed(42);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["check", "pass", "residual", "witness", "samples", "tolerance", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["witness"]["s"]["re"], 0.1);
        let back: VerificationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn non_finite_residuals_are_clamped() {
        let r = VerificationReport::judge("x", f64::INFINITY, 1.0, 0, Witness::default());
        assert!(serde_json::to_string(&r).is_ok());
        assert!(!r.pass);
    }
}
