use num_complex::Complex64;

use crate::bundle::MetricField;
use crate::error::{Error, Result};
use crate::field::{GridDomain, MatrixPolyField};
use crate::homomorphism::{curvature_ordering_check, HomomorphismField};
use crate::psh::{psh_verdict, PshVerdict, RadiiPolicy};
use crate::random::{complex_normal, prng};
use crate::report::{VerificationReport, Witness};

/// Seminegativity test for the norm on homomorphisms: when `inf K ≥ sup K'`
/// pointwise, `log ‖α‖` must be plurisubharmonic for every holomorphic family
/// `α`. Tests each generator and `combinations` random complex combinations.
///
/// If the ordering fails the check does not apply and is reported as vacuous.
pub fn hom_family_griffiths_check(
    source: &MetricField,
    target: &MetricField,
    generators: &[MatrixPolyField],
    domain: &GridDomain,
    combinations: usize,
    seed: u64,
    policy: &RadiiPolicy,
) -> Result<VerificationReport> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("at least one generator is required".into()));
    }
    let ordering = curvature_ordering_check(source, target, domain)?;
    if !ordering.pass {
        let witness = ordering.witness.clone().with_note("curvature ordering fails; not applicable");
        return Ok(VerificationReport::vacuous("hom-family", ordering.residual, witness)
            .with_seed(seed)
            .with_detail("ordering_gap", ordering.residual));
    }
    let mut rng = prng(seed);
    let mut families: Vec<MatrixPolyField> = generators.to_vec();
    for _ in 0..combinations {
        let mut alpha = MatrixPolyField::zeros(generators[0].rows(), generators[0].cols());
        for g in generators {
            alpha = &alpha + &g.scale(complex_normal(&mut rng));
        }
        families.push(alpha);
    }
    let mut worst: Option<(f64, Complex64, f64)> = None;
    let mut inconclusive = 0usize;
    let mut failures = 0usize;
    for alpha in &families {
        let h = HomomorphismField::new(alpha.clone(), source.clone(), target.clone())?;
        let field = h.log_norm_field(domain);
        if field.valid_count() == 0 {
            continue;
        }
        let report = psh_verdict(&field, policy)?;
        match report.verdict {
            PshVerdict::NotPsh => failures += 1,
            PshVerdict::Inconclusive => inconclusive += 1,
            PshVerdict::Psh => {}
        }
        let residual = -report.worst_lambda;
        if worst.as_ref().is_none_or(|w| residual > w.0) {
            worst = Some((residual, report.worst_node.into(), report.tolerance));
        }
    }
    let Some((residual, s, tol)) = worst else {
        return Ok(VerificationReport::vacuous(
            "hom-family",
            0.0,
            Witness::default().with_note("every family vanishes identically"),
        )
        .with_seed(seed));
    };
    let witness = Witness::at(s).with_note("worst circle-average Lambda of log|alpha|");
    let report = if failures == 0 && inconclusive > 0 {
        VerificationReport::inconclusive("hom-family", residual, tol, families.len(), witness)
    } else {
        VerificationReport::judge("hom-family", residual, tol, families.len(), witness)
    };
    Ok(report
        .with_seed(seed)
        .with_detail("ordering_gap", ordering.residual)
        .with_detail("families", families.len() as f64)
        .with_detail("not_psh", failures as f64)
        .with_detail("inconclusive", inconclusive as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::surrogate::exp_series;
    use crate::field::CMatrix;
    use crate::report::Outcome;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn domain() -> GridDomain {
        GridDomain::square(c(0.0), 1.0, 65).unwrap()
    }

    fn exp_abs2(sign: f64) -> MetricField {
        let u = MatrixPolyField::scalar_monomial(1, 1, c(sign));
        MetricField::validate(exp_series(&u, c(0.0), 30), &domain()).unwrap()
    }

    #[test]
    fn flat_families_are_psh() {
        let d = domain();
        let flat = MetricField::flat(2, &d);
        let a0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(-1.0)]);
        let constant = MatrixPolyField::constant(a0.clone());
        let linear = MatrixPolyField::from_terms(2, 2, [(1, 0, a0)]).unwrap();
        let policy = RadiiPolicy::default();
        let r = hom_family_griffiths_check(&flat, &flat, &[constant.clone()], &d, 0, 1, &policy).unwrap();
        assert!(r.pass);
        let r = hom_family_griffiths_check(&flat, &flat, &[linear, constant], &d, 2, 1, &policy).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn conformal_identity_is_psh() {
        let d = domain();
        let r = hom_family_griffiths_check(
            &MetricField::flat(1, &d),
            &exp_abs2(1.0),
            &[MatrixPolyField::identity(1)],
            &d,
            1,
            0,
            &RadiiPolicy::default(),
        )
        .unwrap();
        assert!(r.pass);
    }

    #[test]
    fn reversed_ordering_is_not_applicable() {
        let d = domain();
        let r = hom_family_griffiths_check(
            &MetricField::flat(1, &d),
            &exp_abs2(-1.0),
            &[MatrixPolyField::identity(1)],
            &d,
            1,
            0,
            &RadiiPolicy::default(),
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::Vacuous);
        assert!(!r.is_failure());
    }
}
