//! CSV heatmap data. Rows follow the grid's row-major order; every file starts
//! with a header naming its columns.

use std::fmt::Write;

use crate::bundle::MetricField;
use crate::error::Result;
use crate::field::{GridDomain, ScalarSampleField};
use crate::homomorphism::HomomorphismField;
use crate::psh::discrete_levi;

/// `re,im,value`; masked nodes are written as `nan`.
pub fn scalar_csv(field: &ScalarSampleField) -> String {
    let d = field.domain();
    let mut out = String::from("re,im,value\n");
    for idx in 0..d.len() {
        let (i, j) = d.unindex(idx);
        let s = d.node(i, j);
        match field.get(i, j) {
            Some(v) => writeln!(out, "{:.17e},{:.17e},{:.17e}", s.re, s.im, v),
            None => writeln!(out, "{:.17e},{:.17e},nan", s.re, s.im),
        }
        .expect("writing to a string");
    }
    out
}

/// `re,im` followed by the entries of `R(s)` in row-major order, each as a
/// `_re,_im` pair.
pub fn curvature_csv(metric: &MetricField, domain: &GridDomain) -> Result<String> {
    let n = metric.rank();
    let mut out = String::from("re,im");
    for r in 0..n {
        for c in 0..n {
            write!(out, ",r{r}{c}_re,r{r}{c}_im").expect("writing to a string");
        }
    }
    out.push('\n');
    for s in domain.nodes() {
        let curv = metric.at(s)?.curvature();
        write!(out, "{:.17e},{:.17e}", s.re, s.im).expect("writing to a string");
        for r in 0..n {
            for c in 0..n {
                let z = curv[(r, c)];
                write!(out, ",{:.17e},{:.17e}", z.re, z.im).expect("writing to a string");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn norm_csv(hom: &HomomorphismField, domain: &GridDomain) -> String {
    scalar_csv(&hom.operator_norm_field(domain))
}

/// Five-point discrete Levi form of `log ‖A‖`.
pub fn levi_csv(hom: &HomomorphismField, domain: &GridDomain) -> String {
    scalar_csv(&discrete_levi(&hom.log_norm_field(domain)))
}
