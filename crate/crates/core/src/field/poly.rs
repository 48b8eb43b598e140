//! Matrix-valued polynomials in `(s, s̄)`.
//!
//! A [`MatrixPolyField`] stores `F(s) = Σ C_{jk} s^j s̄^k` as a table keyed by the
//! bidegree `(j, k)`. Every metric, homomorphism, section and connection form in the
//! crate is carried by this type, which makes all Wirtinger derivatives exact.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;

/// Which Wirtinger derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wirtinger {
    /// ∂/∂s
    Holomorphic,
    /// ∂/∂s̄
    AntiHolomorphic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolyField {
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<(usize, usize), CMatrix>,
}

impl MatrixPolyField {
    /// The zero field of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "field shape must be positive");
        Self {
            rows,
            cols,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(matrix: CMatrix) -> Self {
        let mut field = Self::zeros(matrix.nrows(), matrix.ncols());
        field.coeffs.insert((0, 0), matrix);
        field.prune();
        field
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMatrix::identity(n, n))
    }

    /// Scalar (1×1) field with a single monomial `c s^j s̄^k`.
    pub fn scalar_monomial(j: usize, k: usize, c: Complex64) -> Self {
        Self::scalar_from_terms([(j, k, c)])
    }

    pub fn scalar_from_terms(terms: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut field = Self::zeros(1, 1);
        for (j, k, c) in terms {
            field.add_term(j, k, &CMatrix::from_element(1, 1, c));
        }
        field.prune();
        field
    }

    /// Build a field from `(j, k, matrix)` triples; repeated bidegrees accumulate.
    pub fn from_terms(
        rows: usize,
        cols: usize,
        terms: impl IntoIterator<Item = (usize, usize, CMatrix)>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("field shape must be positive".into()));
        }
        let mut field = Self::zeros(rows, cols);
        for (j, k, m) in terms {
            if m.shape() != (rows, cols) {
                return Err(Error::Shape(format!(
                    "coefficient ({j},{k}) has shape {:?}, expected ({rows}, {cols})",
                    m.shape()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient ({j},{k}) has non-finite entries"
                )));
            }
            field.add_term(j, k, &m);
        }
        field.prune();
        Ok(field)
    }

    /// Block-diagonal field `diag(F_1, …, F_m)`.
    pub fn block_diagonal(blocks: &[MatrixPolyField]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for (&key, m) in &b.coeffs {
                let entry = out
                    .coeffs
                    .entry(key)
                    .or_insert_with(|| CMatrix::zeros(rows, cols));
                entry.view_mut((r0, c0), (b.rows, b.cols)).copy_from(m);
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Stack fields of equal column count vertically.
    pub fn vstack(parts: &[MatrixPolyField]) -> Self {
        let cols = parts[0].cols;
        assert!(parts.iter().all(|p| p.cols == cols), "vstack column mismatch");
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            for (&key, m) in &p.coeffs {
                let entry = out
                    .coeffs
                    .entry(key)
                    .or_insert_with(|| CMatrix::zeros(rows, cols));
                entry.view_mut((r0, 0), (p.rows, cols)).copy_from(m);
            }
            r0 += p.rows;
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn coeff(&self, j: usize, k: usize) -> Option<&CMatrix> {
        self.coeffs.get(&(j, k))
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &CMatrix)> {
        self.coeffs.iter().map(|(&(j, k), m)| (j, k, m))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest total degree `j + k` with a nonzero coefficient.
    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    /// True when no coefficient carries a power of `s̄`.
    pub fn is_holomorphic(&self) -> bool {
        self.coeffs.keys().all(|&(_, k)| k == 0)
    }

    /// Largest absolute coefficient entry.
    pub fn coeff_max_abs(&self) -> f64 {
        self.coeffs
            .values()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max_{jk} ‖C_{jk} − C_{kj}^*‖`, zero exactly for hermitian-valued fields.
    pub fn hermitian_symmetry_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let zero = CMatrix::zeros(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for (&(j, k), m) in &self.coeffs {
            let mirror = self.coeffs.get(&(k, j)).unwrap_or(&zero);
            worst = worst.max((m - mirror.adjoint()).norm());
        }
        worst
    }

    /// Accumulate `m` into the `(j, k)` coefficient.
    pub fn add_term(&mut self, j: usize, k: usize, m: &CMatrix) {
        assert_eq!(m.shape(), (self.rows, self.cols), "term shape mismatch");
        match self.coeffs.get_mut(&(j, k)) {
            Some(existing) => *existing += m,
            None => {
                self.coeffs.insert((j, k), m.clone());
            }
        }
    }

    /// Drop coefficients that are exactly zero.
    pub fn prune(&mut self) {
        self.coeffs
            .retain(|_, m| m.iter().any(|z| *z != Complex64::new(0.0, 0.0)));
    }

    pub fn eval(&self, s: Complex64) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        if self.coeffs.is_empty() {
            return out;
        }
        let (pj, pk) = self.max_powers();
        let sp = powers(s, pj);
        let sbp = powers(s.conj(), pk);
        for (&(j, k), m) in &self.coeffs {
            accumulate(&mut out, sp[j] * sbp[k], m);
        }
        out
    }

    /// Value of a 1×1 field.
    pub fn eval_scalar(&self, s: Complex64) -> Complex64 {
        assert_eq!(self.shape(), (1, 1), "eval_scalar on a non-scalar field");
        self.eval(s)[(0, 0)]
    }

    /// Value of a column field as a vector.
    pub fn eval_vector(&self, s: Complex64) -> CVector {
        assert_eq!(self.cols, 1, "eval_vector on a field with more than one column");
        self.eval(s).column(0).into_owned()
    }

    fn max_powers(&self) -> (usize, usize) {
        self.coeffs
            .keys()
            .fold((0, 0), |(a, b), &(j, k)| (a.max(j), b.max(k)))
    }

    /// Exact formal Wirtinger derivative.
    pub fn wirtinger(&self, which: Wirtinger) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for (&(j, k), m) in &self.coeffs {
            match which {
                Wirtinger::Holomorphic if j > 0 => {
                    out.coeffs.insert((j - 1, k), m * Complex64::new(j as f64, 0.0));
                }
                Wirtinger::AntiHolomorphic if k > 0 => {
                    out.coeffs.insert((j, k - 1), m * Complex64::new(k as f64, 0.0));
                }
                _ => {}
            }
        }
        out
    }

    pub fn d_s(&self) -> Self {
        self.wirtinger(Wirtinger::Holomorphic)
    }

    pub fn d_sbar(&self) -> Self {
        self.wirtinger(Wirtinger::AntiHolomorphic)
    }

    /// Pointwise adjoint: the field `s ↦ F(s)^*`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for (&(j, k), m) in &self.coeffs {
            out.coeffs.insert((k, j), m.adjoint());
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.coeffs.values_mut() {
            *m *= c;
        }
        out.prune();
        out
    }

    /// Left-multiply every coefficient by a constant matrix.
    pub fn left_mul_const(&self, m: &CMatrix) -> Self {
        assert_eq!(m.ncols(), self.rows, "left_mul_const shape mismatch");
        let mut out = Self::zeros(m.nrows(), self.cols);
        for (&key, c) in &self.coeffs {
            out.coeffs.insert(key, m * c);
        }
        out.prune();
        out
    }

    /// Right-multiply every coefficient by a constant matrix.
    pub fn right_mul_const(&self, m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), self.cols, "right_mul_const shape mismatch");
        let mut out = Self::zeros(self.rows, m.ncols());
        for (&key, c) in &self.coeffs {
            out.coeffs.insert(key, c * m);
        }
        out.prune();
        out
    }

    /// Drop every term of total degree above `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|&(j, k), _| j + k <= degree);
        out
    }

    /// Polynomial product, optionally discarding terms above a total degree.
    pub fn mul_truncated(&self, other: &Self, max_degree: Option<usize>) -> Self {
        assert_eq!(self.cols, other.rows, "field product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for (&(j1, k1), a) in &self.coeffs {
            for (&(j2, k2), b) in &other.coeffs {
                let (j, k) = (j1 + j2, k1 + k2);
                if max_degree.is_some_and(|d| j + k > d) {
                    continue;
                }
                let prod = a * b;
                match out.coeffs.get_mut(&(j, k)) {
                    Some(existing) => *existing += prod,
                    None => {
                        out.coeffs.insert((j, k), prod);
                    }
                }
            }
        }
        out.prune();
        out
    }

    /// Re-expand about a new origin: returns `G` with `G(t) = F(t + c)`.
    pub fn translate(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        let (pj, pk) = self.max_powers();
        let cp = powers(c, pj);
        let cbp = powers(c.conj(), pk);
        let binom = binomial_table(pj.max(pk));
        let mut out = Self::zeros(self.rows, self.cols);
        for (&(j, k), m) in &self.coeffs {
            for a in 0..=j {
                let fa = binom[j][a] * cp[j - a];
                for b in 0..=k {
                    let w = fa * binom[k][b] * cbp[k - b];
                    let scaled = m * w;
                    match out.coeffs.get_mut(&(a, b)) {
                        Some(existing) => *existing += scaled,
                        None => {
                            out.coeffs.insert((a, b), scaled);
                        }
                    }
                }
            }
        }
        out.prune();
        out
    }

    /// Largest Frobenius norm of `F(s)` over the supplied points.
    pub fn sup_norm_on(&self, points: impl IntoIterator<Item = Complex64>) -> f64 {
        points
            .into_iter()
            .map(|s| self.eval(s).norm())
            .fold(0.0, f64::max)
    }
}

/// `out += w · m`.
pub(crate) fn accumulate(out: &mut CMatrix, w: Complex64, m: &CMatrix) {
    for (o, x) in out.iter_mut().zip(m.iter()) {
        *o += w * x;
    }
}

pub(crate) fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    out.push(acc);
    for _ in 0..n {
        acc *= z;
        out.push(acc);
    }
    out
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0; 1]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let mut row = vec![1.0; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        t.push(row);
    }
    t
}

impl Add for &MatrixPolyField {
    type Output = MatrixPolyField;

    fn add(self, rhs: &MatrixPolyField) -> MatrixPolyField {
        assert_eq!(self.shape(), rhs.shape(), "field sum shape mismatch");
        let mut out = self.clone();
        for (&(j, k), m) in &rhs.coeffs {
            out.add_term(j, k, m);
        }
        out.prune();
        out
    }
}

impl Sub for &MatrixPolyField {
    type Output = MatrixPolyField;

    fn sub(self, rhs: &MatrixPolyField) -> MatrixPolyField {
        self + &(-rhs)
    }
}

impl Neg for &MatrixPolyField {
    type Output = MatrixPolyField;

    fn neg(self) -> MatrixPolyField {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MatrixPolyField {
    type Output = MatrixPolyField;

    fn mul(self, rhs: &MatrixPolyField) -> MatrixPolyField {
        self.mul_truncated(rhs, None)
    }
}
