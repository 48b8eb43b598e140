//! JSON wire format for fields:
//! `{rows, cols, coeffs: [{j, k, matrix: [[{re, im}, …], …]}]}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::field::poly::{CMatrix, MatrixPolyField};

/// A complex number as `{re, im}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl From<Point> for Complex64 {
    fn from(p: Point) -> Self {
        Complex64::new(p.re, p.im)
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point { re: z.re, im: z.im }
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    j: usize,
    k: usize,
    matrix: Vec<Vec<Point>>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    rows: usize,
    cols: usize,
    coeffs: Vec<TermRepr>,
}

impl TryFrom<FieldRepr> for MatrixPolyField {
    type Error = Error;

    fn try_from(repr: FieldRepr) -> Result<Self, Error> {
        let mut terms = Vec::with_capacity(repr.coeffs.len());
        for t in repr.coeffs {
            if t.matrix.len() != repr.rows || t.matrix.iter().any(|r| r.len() != repr.cols) {
                return Err(Error::Shape(format!(
                    "coefficient ({},{}) does not have shape {}×{}",
                    t.j, t.k, repr.rows, repr.cols
                )));
            }
            let m = CMatrix::from_fn(repr.rows, repr.cols, |r, c| t.matrix[r][c].into());
            terms.push((t.j, t.k, m));
        }
        MatrixPolyField::from_terms(repr.rows, repr.cols, terms)
    }
}

impl From<&MatrixPolyField> for FieldRepr {
    fn from(f: &MatrixPolyField) -> Self {
        FieldRepr {
            rows: f.rows(),
            cols: f.cols(),
            coeffs: f
                .terms()
                .map(|(j, k, m)| TermRepr {
                    j,
                    k,
                    matrix: (0..m.nrows())
                        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].into()).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl Serialize for MatrixPolyField {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FieldRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixPolyField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(deserializer)?;
        MatrixPolyField::try_from(repr).map_err(serde::de::Error::custom)
    }
}

pub fn point_vec(v: &crate::field::poly::CVector) -> Vec<Point> {
    v.iter().map(|&z| z.into()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_format() {
        let text = r#"{"rows":1,"cols":1,"coeffs":[
            {"j":0,"k":0,"matrix":[[{"re":1.0,"im":0.0}]]},
            {"j":1,"k":1,"matrix":[[{"re":1.0,"im":0.0}]]}]}"#;
        let f: MatrixPolyField = serde_json::from_str(text).unwrap();
        assert_eq!(f.eval_scalar(Complex64::new(1.0, 1.0)), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_ragged_matrix() {
        let text = r#"{"rows":2,"cols":2,"coeffs":[{"j":0,"k":0,"matrix":[[{"re":1.0,"im":0.0}]]}]}"#;
        assert!(serde_json::from_str::<MatrixPolyField>(text).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(entries in proptest::collection::vec((0usize..4, 0usize..4, -5.0f64..5.0, -5.0f64..5.0), 1..8)) {
            let f = MatrixPolyField::scalar_from_terms(
                entries.iter().map(|&(j, k, re, im)| (j, k, Complex64::new(re, im))));
            let text = serde_json::to_string(&f).unwrap();
            let back: MatrixPolyField = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
