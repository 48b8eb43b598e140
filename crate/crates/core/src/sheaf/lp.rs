use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::SectionField;
use crate::error::{Error, Result};
use crate::field::{CMatrix, CVector, MatrixPolyField};
use crate::random::{prng, random_vector};
use crate::report::{VerificationReport, Witness};
use crate::sheaf::fibered::{lp_metric, FiberedMetric, WeightField};

/// Default finite-difference step for [`stationarity_check`].
pub const STATIONARITY_STEP: f64 = 1e-3;
const GAMMA_STEP: f64 = 1e-3;

/// Which holomorphic family `s ↦ F(s, w)` through `w` to test.
///
/// Every family has the form `F(s, w)(x) = w(x)·(1 + k ∂ρ(s₀, x)/∂s · (s − s₀))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectionFamily {
    /// `k = −2/a`, for which `γ(F(s, w))` is antiholomorphically stationary at `s₀`.
    Stationary,
    /// `k = 1/a`.
    InverseExponent,
    /// `k = 0`, the constant extension `F ≡ w`.
    Naive,
    Coefficient(f64),
}

impl SectionFamily {
    pub fn coefficient(self, a: f64) -> f64 {
        match self {
            SectionFamily::Stationary => -2.0 / a,
            SectionFamily::InverseExponent => 1.0 / a,
            SectionFamily::Naive => 0.0,
            SectionFamily::Coefficient(k) => k,
        }
    }
}

/// The family `F(s, w)` through `w` at `s₀` (see [`SectionFamily`]); blocks of `w`
/// are scaled per fiber point.
pub fn lp_section_family(
    rho: &WeightField,
    a: f64,
    s0: Complex64,
    w: &CVector,
    family: SectionFamily,
) -> Result<SectionField> {
    let m = rho.len();
    if m == 0 || w.len() % m != 0 {
        return Err(Error::Shape(format!(
            "vector of length {} does not split over {m} fiber points",
            w.len()
        )));
    }
    if w.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    let r = w.len() / m;
    let k = family.coefficient(a);
    let mut c0 = w.clone();
    let mut c1 = CVector::zeros(w.len());
    for i in 0..m {
        let slope = rho.d_s(i, s0) * k;
        for t in i * r..(i + 1) * r {
            c0[t] = w[t] * (Complex64::new(1.0, 0.0) - slope * s0);
            c1[t] = w[t] * slope;
        }
    }
    let n = w.len();
    SectionField::new(MatrixPolyField::from_terms(
        n,
        1,
        [
            (0, 0, CMatrix::from_column_slice(n, 1, c0.as_slice())),
            (1, 0, CMatrix::from_column_slice(n, 1, c1.as_slice())),
        ],
    )?)
}

/// The stationary family, `F(s, w)(x) = w(x)(1 − (2/a) ∂ρ(s₀, x)/∂s · (s − s₀))`.
pub fn lp_section(rho: &WeightField, a: f64, s0: Complex64, w: &CVector) -> Result<SectionField> {
    lp_section_family(rho, a, s0, w, SectionFamily::Stationary)
}

/// The (1,0)-differential of `q(s, ·)` at `w` applied to `probe`:
/// `γ_w(p) = ∂/∂t q(s, w + t p)|_{t=0}` (complex-linear in `p`), by Richardson-
/// extrapolated central differences along the real and imaginary directions of `t`.
///
/// With this convention `γ_w(w) = q(s, w)/2`, and for `a = 2`
/// `γ_w(p) = h_s(p, w)/(2 q(s, w))`.
pub fn dual_map_gamma(
    fm: &FiberedMetric,
    rho: &WeightField,
    s: Complex64,
    w: &CVector,
    probe: &CVector,
) -> Result<Complex64> {
    check_gamma_args(fm, rho, w, probe)?;
    if probe.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = GAMMA_STEP * w.norm() / probe.norm();
    let directional = |p: &CVector| -> Result<f64> {
        let central = |h: f64| -> Result<f64> {
            let plus = lp_metric(fm, rho, s, &(w + p * Complex64::new(h, 0.0)))?;
            let minus = lp_metric(fm, rho, s, &(w - p * Complex64::new(h, 0.0)))?;
            Ok((plus - minus) / (2.0 * h))
        };
        Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
    };
    let d_re = directional(probe)?;
    let d_im = directional(&(probe * Complex64::new(0.0, 1.0)))?;
    Ok(Complex64::new(0.5 * d_re, -0.5 * d_im))
}

/// Closed form `γ_w(p) = (1/(2q^{a−1})) Σ μ_i e^{ρ_i} |w_i|^{a−2} w_i^* P_{x_i} p_i`.
pub fn dual_map_gamma_closed(
    fm: &FiberedMetric,
    rho: &WeightField,
    s: Complex64,
    w: &CVector,
    probe: &CVector,
) -> Result<Complex64> {
    check_gamma_args(fm, rho, w, probe)?;
    let a = fm.a();
    let mut q_a = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, point) in fm.points().iter().enumerate() {
        let n2 = fm.fiber_sqnorm(i, s, w)?;
        let weight = point.weight * rho.value(i, s).exp();
        q_a += weight * n2.powf(0.5 * a);
        if n2 > 0.0 {
            sum += fm.fiber_pairing(i, s, w, probe) * (weight * n2.powf(0.5 * a - 1.0));
        }
    }
    let q = q_a.powf(1.0 / a);
    Ok(sum / (2.0 * q.powf(a - 1.0)))
}

fn check_gamma_args(fm: &FiberedMetric, rho: &WeightField, w: &CVector, probe: &CVector) -> Result<()> {
    rho.check_len(fm)?;
    fm.check_len(w)?;
    fm.check_len(probe)?;
    if w.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Is `s ↦ γ(F(s, w))(p)` antiholomorphically stationary at `s₀`?
///
/// `∂/∂s̄` is estimated by central differences with step `step` for `probes`
/// random probes; the check passes when every estimate is below
/// `100·step²·scale`, `scale = max(1, |γ|)`. The residual of the constant family
/// is reported alongside for comparison.
#[allow(clippy::too_many_arguments)]
pub fn stationarity_check(
    fm: &FiberedMetric,
    rho: &WeightField,
    s0: Complex64,
    w: &CVector,
    probes: usize,
    seed: u64,
    step: f64,
    family: SectionFamily,
) -> Result<VerificationReport> {
    if probes == 0 {
        return Err(Error::InvalidArgument("probes must be at least 1".into()));
    }
    let a = fm.a();
    let section = lp_section_family(rho, a, s0, w, family)?;
    let naive = lp_section_family(rho, a, s0, w, SectionFamily::Naive)?;
    let mut rng = prng(seed);
    let mut worst: f64 = 0.0;
    let mut worst_naive: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let mut worst_probe = None;
    for _ in 0..probes {
        let p = random_vector(&mut rng, fm.total_rank());
        let g = |f: &SectionField, s: Complex64| dual_map_gamma_closed(fm, rho, s, &f.eval(s), &p);
        scale = scale.max(g(&section, s0)?.norm());
        let r = dbar_fd(|s| g(&section, s), s0, step)?.norm();
        let rn = dbar_fd(|s| g(&naive, s), s0, step)?.norm();
        if r >= worst {
            worst = r;
            worst_probe = Some(p.clone());
        }
        worst_naive = worst_naive.max(rn);
    }
    let tol = 100.0 * step * step * scale;
    let mut witness = Witness::at(s0).with_note("largest |d/ds̄ γ(F(s,w))(p)|");
    if let Some(p) = &worst_probe {
        witness = witness.with_vector(p);
    }
    Ok(VerificationReport::judge("lp-stationarity", worst, tol, probes, witness)
        .with_seed(seed)
        .with_detail("a", a)
        .with_detail("coefficient", family.coefficient(a))
        .with_detail("step", step)
        .with_detail("naive_residual", worst_naive)
        .with_detail(
            "naive_ratio",
            if worst > 0.0 { worst_naive / worst } else { f64::INFINITY },
        ))
}

/// Central-difference `∂/∂s̄ = ½(∂x + i∂y)`.
fn dbar_fd<F>(g: F, s: Complex64, step: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let dx = (g(s + step)? - g(s - step)?) / (2.0 * step);
    let i_step = Complex64::new(0.0, step);
    let dy = (g(s + i_step)? - g(s - i_step)?) / (2.0 * step);
    Ok((dx + dy * Complex64::new(0.0, 1.0)) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridDomain;
    use crate::homomorphism::proof_section;
    use crate::random::{random_real_poly, random_vector};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn domain() -> GridDomain {
        GridDomain::square(c(0.0), 1.0, 9).unwrap()
    }

    fn random_setup(a: f64, seed: u64) -> (FiberedMetric, WeightField) {
        let mut rng = prng(seed);
        let fm = FiberedMetric::weighted(&[0.6, 1.0, 1.4], a).unwrap();
        let rho = (0..3).map(|_| random_real_poly(&mut rng, 2, 0.5)).collect();
        (fm, WeightField::new(rho, &domain()).unwrap())
    }

    #[test]
    fn constant_weights_give_constant_section() {
        let rho = WeightField::zero(2, &domain());
        let w = CVector::from_vec(vec![c(1.0), Complex64::new(0.5, 0.5)]);
        let f = lp_section(&rho, 3.0, c(0.2), &w).unwrap();
        assert_eq!(f.eval(Complex64::new(-0.7, 0.1)), w);
    }

    #[test]
    fn sections_pass_through_w() {
        let (_, rho) = random_setup(3.0, 1);
        let w = random_vector(&mut prng(2), 3);
        let s0 = Complex64::new(0.1, -0.3);
        for family in [SectionFamily::Stationary, SectionFamily::InverseExponent, SectionFamily::Naive] {
            let f = lp_section_family(&rho, 3.0, s0, &w, family).unwrap();
            assert!((f.eval(s0) - &w).norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_weight_sections() {
        let d = domain();
        let rho = WeightField::new(vec![MatrixPolyField::scalar_monomial(1, 1, c(1.0))], &d).unwrap();
        let s0 = Complex64::new(0.4, 0.2);
        let w = CVector::from_element(1, c(1.0));
        let s = Complex64::new(-0.3, 0.5);
        let literal = lp_section_family(&rho, 2.0, s0, &w, SectionFamily::InverseExponent).unwrap();
        let expected = c(1.0) + s0.conj() * (s - s0) / 2.0;
        assert!((literal.eval(s)[0] - expected).norm() < 1e-15);
        let stationary = lp_section(&rho, 2.0, s0, &w).unwrap();
        let expected = c(1.0) - s0.conj() * (s - s0);
        assert!((stationary.eval(s)[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn quadratic_section_is_the_chern_special_section() {
        let d = domain();
        let (fm, rho) = random_setup(2.0, 3);
        let metric = fm.induced_hermitian(&rho, &d).unwrap();
        let w = random_vector(&mut prng(4), 3);
        let s0 = Complex64::new(0.2, 0.1);
        let f = lp_section(&rho, 2.0, s0, &w).unwrap();
        let g = proof_section(&metric, s0, &w).unwrap();
        for s in [c(0.0), Complex64::new(-0.5, 0.6)] {
            assert!((f.eval(s) - g.eval(s)).norm() < 1e-8);
        }
    }

    #[test]
    fn differences_match_closed_form() {
        for a in [2.0, 3.0, 4.0, 5.5] {
            let (fm, rho) = random_setup(a, 7);
            let mut rng = prng(8);
            for _ in 0..5 {
                let w = random_vector(&mut rng, 3);
                let p = random_vector(&mut rng, 3);
                let s = Complex64::new(0.3, -0.2);
                let g = dual_map_gamma(&fm, &rho, s, &w, &p).unwrap();
                let gc = dual_map_gamma_closed(&fm, &rho, s, &w, &p).unwrap();
                assert!((g - gc).norm() < 1e-10 * (1.0 + gc.norm()), "a = {a}: {g} vs {gc}");
            }
        }
    }

    #[test]
    fn euler_relation_and_quadratic_closed_form() {
        let d = domain();
        let (fm, rho) = random_setup(2.0, 9);
        let metric = fm.induced_hermitian(&rho, &d).unwrap();
        let mut rng = prng(10);
        let s = Complex64::new(-0.1, 0.4);
        let w = random_vector(&mut rng, 3);
        let p = random_vector(&mut rng, 3);
        let q = lp_metric(&fm, &rho, s, &w).unwrap();
        let gw = dual_map_gamma(&fm, &rho, s, &w, &w).unwrap();
        assert!((gw - q / 2.0).norm() < 1e-10 * q);
        let g = dual_map_gamma(&fm, &rho, s, &w, &p).unwrap();
        let closed = metric.inner_product(s, &p, &w).unwrap() / (2.0 * q);
        assert!((g - closed).norm() < 1e-10 * closed.norm().max(1.0));
        for a in [3.0, 4.0] {
            let fm = fm.with_exponent(a).unwrap();
            let q = lp_metric(&fm, &rho, s, &w).unwrap();
            let gw = dual_map_gamma(&fm, &rho, s, &w, &w).unwrap();
            assert!((gw - q / 2.0).norm() < 1e-10 * q);
        }
    }

    #[test]
    fn orthogonal_and_disjoint_probes_vanish() {
        let d = domain();
        let e1 = CVector::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
        let e2 = CVector::from_vec(vec![c(0.0), c(1.0), c(0.0)]);
        let fm = FiberedMetric::weighted(&[1.0, 2.0, 3.0], 2.0).unwrap();
        let rho = WeightField::zero(3, &d);
        assert_eq!(dual_map_gamma_closed(&fm, &rho, c(0.0), &e1, &e2).unwrap(), c(0.0));
        assert!(dual_map_gamma(&fm, &rho, c(0.0), &e1, &e2).unwrap().norm() < 1e-15);
        let (fm, rho) = random_setup(3.5, 11);
        let w = CVector::from_vec(vec![c(1.0), Complex64::new(0.0, 2.0), c(0.0)]);
        let p = CVector::from_vec(vec![c(0.0), c(0.0), Complex64::new(1.0, 1.0)]);
        assert!(dual_map_gamma(&fm, &rho, c(0.1), &w, &p).unwrap().norm() < 1e-15);
        assert!(matches!(
            dual_map_gamma(&fm, &rho, c(0.1), &CVector::zeros(3), &p),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn gamma_is_invariant_under_positive_scaling() {
        let (fm, rho) = random_setup(3.0, 12);
        let mut rng = prng(13);
        let w = random_vector(&mut rng, 3);
        let p = random_vector(&mut rng, 3);
        let s = Complex64::new(0.2, 0.2);
        let g = dual_map_gamma(&fm, &rho, s, &w, &p).unwrap();
        for t in [0.1, 3.0, 17.0] {
            let gt = dual_map_gamma(&fm, &rho, s, &(&w * c(t)), &p).unwrap();
            assert!((gt - g).norm() < 1e-10 * g.norm().max(1.0));
        }
    }

    #[test]
    fn constant_weights_are_exactly_stationary() {
        let fm = FiberedMetric::weighted(&[1.0, 2.0], 4.0).unwrap();
        let rho = WeightField::zero(2, &domain());
        let w = CVector::from_vec(vec![c(1.0), c(0.5)]);
        let r = stationarity_check(&fm, &rho, c(0.1), &w, 3, 1, STATIONARITY_STEP, SectionFamily::Stationary).unwrap();
        assert!(r.pass);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn stationary_family_beats_naive() {
        for a in [2.0, 3.0, 4.0] {
            let (fm, rho) = random_setup(a, 20);
            let w = random_vector(&mut prng(21), 3);
            let s0 = Complex64::new(0.25, -0.15);
            let r = stationarity_check(&fm, &rho, s0, &w, 4, 22, STATIONARITY_STEP, SectionFamily::Stationary).unwrap();
            assert!(r.pass, "a = {a}: {r:?}");
            assert!(r.details["naive_ratio"] >= 10.0);
            let literal =
                stationarity_check(&fm, &rho, s0, &w, 4, 22, STATIONARITY_STEP, SectionFamily::InverseExponent)
                    .unwrap();
            assert!(!literal.pass);
        }
    }

    #[test]
    fn gaussian_weight_with_quartic_exponent() {
        let d = domain();
        let fm = FiberedMetric::weighted(&[1.0], 4.0).unwrap();
        let rho = WeightField::new(vec![MatrixPolyField::scalar_monomial(1, 1, c(1.0))], &d).unwrap();
        let w = CVector::from_element(1, Complex64::new(0.8, -0.6));
        let r = stationarity_check(&fm, &rho, c(0.3), &w, 3, 5, STATIONARITY_STEP, SectionFamily::Stationary).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
