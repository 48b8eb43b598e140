use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{MetricField, PointMetric};
use crate::error::{Error, Result};
use crate::field::{CMatrix, CVector, GridDomain};
use crate::homomorphism::field::HomomorphismField;
use crate::psh::{psh_verdict, PshReport, PshVerdict, RadiiPolicy};
use crate::random::{derive_seed, prng, random_unit_vector, Prng};
use crate::report::{VerificationReport, Witness};

/// Curvature-ordering tolerance for `max (K'(Av) − K(v))`.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-8;
/// Largest source rank handled by the exhaustive search in [`HypothesisMode::Auto`].
pub const EXHAUSTIVE_MAX_RANK: usize = 4;

const ASCENT_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisMode {
    /// Random unit vectors plus the singular vectors of the norm problem.
    Sampled,
    /// Multi-start ascent of `K'(Av) − K(v)` over the unit sphere.
    Exhaustive,
    /// Exhaustive for source rank ≤ 4, sampled above.
    #[default]
    Auto,
}

impl HypothesisMode {
    fn exhaustive_for(self, rank: usize) -> bool {
        match self {
            HypothesisMode::Sampled => false,
            HypothesisMode::Exhaustive => true,
            HypothesisMode::Auto => rank <= EXHAUSTIVE_MAX_RANK,
        }
    }
}

/// Worst ordering gap found at one base point.
#[derive(Clone, Debug)]
pub struct NodeGap {
    pub s: Complex64,
    /// `max K'(Av) − K(v)` over non-vacuous candidates, with its maximizer.
    pub worst: Option<(f64, CVector)>,
    pub samples: usize,
    pub vacuous: usize,
}

/// The two Rayleigh quotients expressed in `h`-orthonormal coordinates `x = L^* v`:
/// `K(v) = x^* M x`, `K'(Av) = x^* M' x / x^* N' x`.
struct Forms {
    m: CMatrix,
    m_t: CMatrix,
    n_t: CMatrix,
    b: CMatrix,
    l_inv_h: CMatrix,
    norm_sqr: f64,
}

impl Forms {
    fn new(a: &CMatrix, pm: &PointMetric, pt: &PointMetric) -> Self {
        let n = a.ncols();
        let l_inv_h = pm
            .lower()
            .adjoint()
            .solve_upper_triangular(&CMatrix::identity(n, n))
            .expect("Cholesky factor is invertible");
        let m = hermitian(&(l_inv_h.adjoint() * pm.p_times_curvature() * &l_inv_h));
        let al = a * &l_inv_h;
        let m_t = hermitian(&(al.adjoint() * pt.p_times_curvature() * &al));
        let n_t = hermitian(&(al.adjoint() * &pt.p * &al));
        let b = pt.lower().adjoint() * &al;
        let norm_sqr = SymmetricEigen::new(n_t.clone()).eigenvalues.max().max(0.0);
        Self {
            m,
            m_t,
            n_t,
            b,
            l_inv_h,
            norm_sqr,
        }
    }

    /// The three quadratic forms at unit `x`, or `None` when `Ax` is negligible
    /// (hypothesis vacuous).
    fn probe(&self, x: CVector) -> Option<Probe> {
        let ntx = &self.n_t * &x;
        let q = x.dotc(&ntx).re;
        if !(q > 1e-20 * self.norm_sqr) || q <= 0.0 {
            return None;
        }
        let mtx = &self.m_t * &x;
        let mx = &self.m * &x;
        let kt = x.dotc(&mtx).re / q;
        let k = x.dotc(&mx).re;
        Some(Probe {
            x,
            mx,
            mtx,
            ntx,
            q,
            kt,
            k,
        })
    }

    /// Gap at unit `x`, or `None` when the hypothesis is vacuous there.
    fn gap(&self, x: &CVector) -> Option<f64> {
        self.probe(x.clone()).map(|p| p.value())
    }

    fn ascend(&self, x: CVector) -> Option<(f64, CVector)> {
        let mut cur = self.probe(x)?;
        let scale = 1.0 + self.m.norm();
        let mut eta = 0.5 / scale;
        for _ in 0..ASCENT_ITERATIONS {
            let best = cur.value();
            let g = cur.gradient();
            if g.norm() < 1e-14 * (scale + best.abs()) {
                break;
            }
            let mut next = None;
            for _ in 0..30 {
                let trial = unit(&(&cur.x + &g * Complex64::new(eta, 0.0)));
                match self.probe(trial) {
                    Some(p) if p.value() > best => {
                        next = Some(p);
                        eta *= 2.0;
                        break;
                    }
                    _ => eta *= 0.5,
                }
            }
            let Some(p) = next else { break };
            let gain = p.value() - best;
            cur = p;
            if gain < 1e-12 * (1.0 + best.abs()) {
                break;
            }
        }
        Some((cur.value(), cur.x))
    }

    fn to_source(&self, x: &CVector) -> CVector {
        &self.l_inv_h * x
    }
}

/// A unit vector with its images under the three forms.
struct Probe {
    x: CVector,
    mx: CVector,
    mtx: CVector,
    ntx: CVector,
    q: f64,
    kt: f64,
    k: f64,
}

impl Probe {
    fn value(&self) -> f64 {
        self.kt - self.k
    }

    /// Projected gradient of the gap on the unit sphere.
    fn gradient(&self) -> CVector {
        let g = (&self.mtx - &self.ntx * Complex64::new(self.kt, 0.0)) / Complex64::new(self.q, 0.0)
            - (&self.mx - &self.x * Complex64::new(self.k, 0.0));
        let radial = self.x.dotc(&g);
        g - &self.x * radial
    }
}

fn hermitian(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn unit(x: &CVector) -> CVector {
    x / Complex64::new(x.norm(), 0.0)
}

fn eigenvectors(m: &CMatrix) -> Vec<CVector> {
    let eig = SymmetricEigen::new(m.clone());
    (0..m.ncols()).map(|i| eig.eigenvectors.column(i).into_owned()).collect()
}

/// Worst ordering gap at `s`.
pub fn node_gap(
    h: &HomomorphismField,
    s: Complex64,
    vector_samples: usize,
    mode: HypothesisMode,
    rng: &mut Prng,
) -> Result<NodeGap> {
    let pm = h.source().at(s)?;
    let pt = h.target().at(s)?;
    let forms = Forms::new(&h.map().eval(s), &pm, &pt);
    let n = h.source().rank();

    let mut starts: Vec<CVector> = (0..vector_samples).map(|_| random_unit_vector(rng, n)).collect();
    let svd = forms.b.clone().svd(false, true);
    if let Some(v_t) = &svd.v_t {
        starts.extend((0..v_t.nrows()).map(|i| v_t.row(i).adjoint()));
    }
    let exhaustive = mode.exhaustive_for(n);
    if exhaustive {
        starts.extend(eigenvectors(&forms.m));
        // preimages of the target curvature eigenvectors
        let n_t = h.target().rank();
        let target_m = pt
            .lower()
            .solve_lower_triangular(&pt.p_times_curvature())
            .and_then(|y| pt.lower().solve_lower_triangular(&y.adjoint()))
            .map(|y| hermitian(&y));
        if let Some(target_m) = target_m {
            for y in eigenvectors(&target_m) {
                debug_assert_eq!(y.len(), n_t);
                if let Ok(x) = svd_solve(&forms.b, &y) {
                    starts.push(x);
                }
            }
        }
    }

    let mut out = NodeGap {
        s,
        worst: None,
        samples: 0,
        vacuous: 0,
    };
    for x in starts {
        if !(x.norm() > 1e-12) {
            continue;
        }
        let x = unit(&x);
        out.samples += 1;
        let found = if exhaustive && n > 1 {
            forms.ascend(x)
        } else {
            forms.gap(&x).map(|g| (g, x))
        };
        match found {
            None => out.vacuous += 1,
            Some((g, x)) => {
                if out.worst.as_ref().is_none_or(|w| g > w.0) {
                    out.worst = Some((g, forms.to_source(&x)));
                }
            }
        }
    }
    Ok(out)
}

fn svd_solve(b: &CMatrix, y: &CVector) -> Result<CVector> {
    b.clone()
        .svd(true, true)
        .solve(y, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Gaps at every node of `domain`, in row-major order. Node `k` draws its random
/// vectors from sub-stream `k` of `seed`.
pub fn gap_map(
    h: &HomomorphismField,
    domain: &GridDomain,
    vector_samples: usize,
    seed: u64,
    mode: HypothesisMode,
) -> Result<Vec<NodeGap>> {
    (0..domain.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = domain.unindex(idx);
            let mut rng = prng(derive_seed(seed, idx as u64));
            node_gap(h, domain.node(i, j), vector_samples, mode, &mut rng)
        })
        .collect()
}

/// Does `A` decrease curvature, `K'_ξ(Av) ≤ K_ξ(v)` whenever `Av ≠ 0`, on `domain`?
pub fn hypothesis_check(
    h: &HomomorphismField,
    domain: &GridDomain,
    vector_samples: usize,
    seed: u64,
    mode: HypothesisMode,
) -> Result<VerificationReport> {
    if vector_samples == 0 {
        return Err(Error::InvalidArgument("vector_samples must be at least 1".into()));
    }
    let gaps = gap_map(h, domain, vector_samples, seed, mode)?;
    let samples: usize = gaps.iter().map(|g| g.samples).sum();
    let vacuous: usize = gaps.iter().map(|g| g.vacuous).sum();
    let worst = gaps
        .iter()
        .filter_map(|g| g.worst.as_ref().map(|(val, v)| (*val, v, g.s)))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let exhaustive = mode.exhaustive_for(h.source().rank());
    let report = match worst {
        None => VerificationReport::vacuous(
            "hypothesis",
            0.0,
            Witness::default().with_note("A vanishes at every sampled point"),
        ),
        Some((gap, v, s)) => VerificationReport::judge(
            "hypothesis",
            gap,
            HYPOTHESIS_TOLERANCE,
            samples,
            Witness::at(s)
                .with_vector(v)
                .with_direction(Complex64::new(1.0, 0.0))
                .with_note("max of K'(Av) - K(v)"),
        ),
    };
    Ok(report
        .with_seed(seed)
        .with_detail("vacuous_samples", vacuous as f64)
        .with_detail("nodes", domain.len() as f64)
        .with_detail("exhaustive", if exhaustive { 1.0 } else { 0.0 }))
}

/// Is `log ‖A‖` plurisubharmonic on `domain`?
pub fn conclusion_check(
    h: &HomomorphismField,
    domain: &GridDomain,
    policy: &RadiiPolicy,
) -> Result<(VerificationReport, PshReport)> {
    let field = h.log_norm_field(domain);
    if field.valid_count() == 0 {
        return Err(Error::InvalidArgument("A vanishes identically".into()));
    }
    let psh = psh_verdict(&field, policy)?;
    let witness = Witness::at(psh.worst_node.into()).with_note(format!(
        "worst circle-average Lambda {:.6e}",
        psh.worst_lambda
    ));
    let residual = -psh.worst_lambda;
    let report = match psh.verdict {
        PshVerdict::Inconclusive => VerificationReport::inconclusive(
            "conclusion",
            residual,
            psh.tolerance,
            psh.nodes_examined,
            witness,
        ),
        _ => VerificationReport::judge(
            "conclusion",
            residual,
            psh.tolerance,
            psh.nodes_examined,
            witness,
        ),
    };
    let report = report
        .with_detail("worst_lambda", psh.worst_lambda)
        .with_detail("nodes_skipped", psh.nodes_skipped as f64);
    Ok((report, psh))
}

/// Extremes of the curvature eigenvalues at `s`: `(inf_v K(v), sup_v K(v))` for `ξ = 1`.
pub fn curvature_range(metric: &MetricField, s: Complex64) -> Result<(f64, f64)> {
    let pm = metric.at(s)?;
    let l = pm.lower();
    let y = l
        .solve_lower_triangular(&pm.p_times_curvature())
        .ok_or(Error::Factorization(s))?;
    let m = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or(Error::Factorization(s))?;
    let eig = SymmetricEigen::new(hermitian(&m)).eigenvalues;
    Ok((eig.min(), eig.max()))
}

/// Pointwise ordering `inf K ≥ sup K'` between two metrics on `domain`.
pub fn curvature_ordering_check(
    source: &MetricField,
    target: &MetricField,
    domain: &GridDomain,
) -> Result<VerificationReport> {
    let nodes: Vec<Complex64> = domain.nodes().collect();
    let gaps = nodes
        .par_iter()
        .map(|&s| {
            let (k_min, _) = curvature_range(source, s)?;
            let (_, kt_max) = curvature_range(target, s)?;
            Ok((kt_max - k_min, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let (gap, s) = gaps
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is non-empty");
    Ok(VerificationReport::judge(
        "curvature-ordering",
        gap,
        HYPOTHESIS_TOLERANCE,
        nodes.len(),
        Witness::at(s).with_note("sup K' - inf K"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::surrogate::exp_series;
    use crate::field::MatrixPolyField;
    use crate::random::{random_holomorphic, random_metric};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn domain(res: usize) -> GridDomain {
        GridDomain::square(c(0.0), 1.0, res).unwrap()
    }

    fn exp_abs2(sign: f64, d: &GridDomain) -> MetricField {
        let u = MatrixPolyField::scalar_monomial(1, 1, c(sign));
        MetricField::validate(exp_series(&u, c(0.0), 30), d).unwrap()
    }

    #[test]
    fn flat_pair_passes_with_zero_gap() {
        let d = domain(9);
        let mut rng = prng(1);
        let a = random_holomorphic(&mut rng, 2, 2, 2, 1.0);
        let h = HomomorphismField::new(a, MetricField::flat(2, &d), MetricField::flat(2, &d)).unwrap();
        let r = hypothesis_check(&h, &d, 4, 7, HypothesisMode::Auto).unwrap();
        assert!(r.pass);
        assert!(r.residual.abs() < 1e-14);
    }

    #[test]
    fn conformal_ordered_gap_is_minus_one() {
        let d = domain(9);
        let h = HomomorphismField::identity(MetricField::flat(1, &d), exp_abs2(1.0, &d)).unwrap();
        let r = hypothesis_check(&h, &d, 3, 0, HypothesisMode::Auto).unwrap();
        assert!(r.pass);
        assert!((r.residual + 1.0).abs() < 1e-9, "{}", r.residual);
    }

    #[test]
    fn anti_ordered_fails_with_unit_gap() {
        let d = domain(9);
        let h = HomomorphismField::identity(MetricField::flat(1, &d), exp_abs2(-1.0, &d)).unwrap();
        let r = hypothesis_check(&h, &d, 3, 0, HypothesisMode::Sampled).unwrap();
        assert!(!r.pass);
        assert!((r.residual - 1.0).abs() < 1e-9);
        assert!(r.witness.s.is_some() && r.witness.v.is_some());
    }

    #[test]
    fn kernel_vectors_are_vacuous() {
        let d = domain(5);
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let h = HomomorphismField::new(
            MatrixPolyField::constant(a),
            MetricField::flat(2, &d),
            MetricField::flat(2, &d),
        )
        .unwrap();
        let r = hypothesis_check(&h, &d, 2, 3, HypothesisMode::Sampled).unwrap();
        assert!(r.pass);
        // the singular vector for σ = 0 lies in the kernel at every node
        assert!(r.details["vacuous_samples"] >= d.len() as f64);
    }

    #[test]
    fn zero_map_is_vacuous_not_failed() {
        let d = domain(5);
        let h = HomomorphismField::new(
            MatrixPolyField::zeros(1, 1),
            MetricField::flat(1, &d),
            exp_abs2(-1.0, &d),
        )
        .unwrap();
        let r = hypothesis_check(&h, &d, 2, 3, HypothesisMode::Auto).unwrap();
        assert!(!r.is_failure());
        assert_eq!(r.outcome, crate::report::Outcome::Vacuous);
    }

    #[test]
    fn exhaustive_search_dominates_sampling() {
        let d = domain(5);
        let mut rng = prng(5);
        let src = MetricField::validate(random_metric(&mut rng, 3, 2, 0.7), &d).unwrap();
        let tgt = MetricField::validate(random_metric(&mut rng, 2, 2, 0.7), &d).unwrap();
        let a = random_holomorphic(&mut rng, 2, 3, 1, 1.0);
        let h = HomomorphismField::new(a, src, tgt).unwrap();
        let sampled = gap_map(&h, &d, 50, 9, HypothesisMode::Sampled).unwrap();
        let exhaustive = gap_map(&h, &d, 4, 9, HypothesisMode::Exhaustive).unwrap();
        for (x, y) in sampled.iter().zip(&exhaustive) {
            let xs = x.worst.as_ref().unwrap().0;
            let ys = y.worst.as_ref().unwrap().0;
            assert!(ys >= xs - 1e-10, "{ys} < {xs}");
        }
    }

    #[test]
    fn exhaustive_matches_eigenvalue_gap_for_identity() {
        // A = id between metrics on the same bundle: the max gap is at least
        // the gap for the pair of extremal eigenvectors and is found exactly
        // when both metrics share eigenvectors.
        let d = domain(5);
        let src = MetricField::validate(
            MatrixPolyField::block_diagonal(&[
                exp_abs2(-1.0, &d).field().clone(),
                exp_abs2(-2.0, &d).field().clone(),
            ]),
            &d,
        )
        .unwrap();
        let tgt = MetricField::validate(
            MatrixPolyField::block_diagonal(&[
                MatrixPolyField::identity(1),
                exp_abs2(1.0, &d).field().clone(),
            ]),
            &d,
        )
        .unwrap();
        let h = HomomorphismField::identity(src, tgt).unwrap();
        // K ∈ [1, 2], K' ∈ [−1, 0]; the worst gap is K'(e1) − K(e1) = 0 − 1
        let r = hypothesis_check(&h, &d, 2, 1, HypothesisMode::Exhaustive).unwrap();
        assert!((r.residual + 1.0).abs() < 1e-8, "{}", r.residual);
    }

    #[test]
    fn scale_equivariance() {
        let d = domain(65);
        let mut rng = prng(8);
        let src = MetricField::validate(random_metric(&mut rng, 2, 1, 0.5), &d).unwrap();
        let tgt = MetricField::flat(2, &d);
        let a = random_holomorphic(&mut rng, 2, 2, 1, 1.0);
        let h = HomomorphismField::new(a, src, tgt).unwrap();
        let lambda = Complex64::new(0.3, -2.0);
        let hs = h.scaled(lambda);
        let f = h.log_norm_field(&d);
        let fs = hs.log_norm_field(&d);
        for (x, y) in f.values().iter().zip(fs.values()) {
            assert!((y - x - lambda.norm().ln()).abs() < 1e-12);
        }
        let r = hypothesis_check(&h, &domain(5), 2, 4, HypothesisMode::Auto).unwrap();
        let rs = hypothesis_check(&hs, &domain(5), 2, 4, HypothesisMode::Auto).unwrap();
        assert_eq!(r.pass, rs.pass);
        assert!((r.residual - rs.residual).abs() < 1e-9 * (1.0 + r.residual.abs()));
    }

    #[test]
    fn conclusion_examples() {
        let d = domain(65);
        let policy = RadiiPolicy::default();
        let flat = HomomorphismField::identity(MetricField::flat(2, &d), MetricField::flat(2, &d)).unwrap();
        assert!(conclusion_check(&flat, &d, &policy).unwrap().0.pass);

        let ordered = HomomorphismField::identity(MetricField::flat(1, &d), exp_abs2(1.0, &d)).unwrap();
        let (report, psh) = conclusion_check(&ordered, &d, &policy).unwrap();
        assert!(report.pass);
        assert!((psh.worst_lambda - 0.5).abs() < psh.tolerance);

        let anti = HomomorphismField::identity(MetricField::flat(1, &d), exp_abs2(-1.0, &d)).unwrap();
        let (report, psh) = conclusion_check(&anti, &d, &policy).unwrap();
        assert!(report.is_failure());
        assert_eq!(psh.verdict, PshVerdict::NotPsh);
    }

    #[test]
    fn curvature_ordering_of_conformal_pair() {
        let d = domain(9);
        let ok = curvature_ordering_check(&MetricField::flat(1, &d), &exp_abs2(1.0, &d), &d).unwrap();
        assert!(ok.pass && (ok.residual + 1.0).abs() < 1e-9);
        let bad = curvature_ordering_check(&MetricField::flat(1, &d), &exp_abs2(-1.0, &d), &d).unwrap();
        assert!(!bad.pass);
    }
}
