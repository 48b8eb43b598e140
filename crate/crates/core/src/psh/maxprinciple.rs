use crate::error::{Error, Result};
use crate::field::grid::{ScalarSampleField, SubRect};
use crate::report::{VerificationReport, Witness};

/// Compare the maximum of `u` over the interior nodes of `sub` with its maximum over
/// the boundary nodes of `sub`. Passes iff `max_int ≤ max_∂ + tol`.
pub fn max_principle_check(u: &ScalarSampleField, sub: SubRect, tol: f64) -> Result<VerificationReport> {
    let n = u.domain().resolution();
    if sub.i0 == 0 || sub.j0 == 0 || sub.i1 >= n - 1 || sub.j1 >= n - 1 {
        return Err(Error::InvalidArgument(
            "sub-rectangle must lie strictly inside the sampled domain".into(),
        ));
    }
    if sub.i1 < sub.i0 + 2 || sub.j1 < sub.j0 + 2 {
        return Err(Error::EmptyInterior("sub-rectangle has no interior nodes".into()));
    }
    let mut interior: Option<(f64, usize, usize)> = None;
    let mut boundary: Option<f64> = None;
    let mut samples = 0;
    for j in sub.j0..=sub.j1 {
        for i in sub.i0..=sub.i1 {
            let Some(v) = u.get(i, j) else { continue };
            samples += 1;
            if sub.is_boundary(i, j) {
                boundary = Some(boundary.map_or(v, |b| b.max(v)));
            } else if interior.is_none_or(|(m, _, _)| v > m) {
                interior = Some((v, i, j));
            }
        }
    }
    let (max_int, wi, wj) =
        interior.ok_or_else(|| Error::EmptyInterior("every interior node is masked".into()))?;
    let max_bd = boundary.ok_or_else(|| Error::EmptyInterior("every boundary node is masked".into()))?;
    let witness = Witness::at(u.domain().node(wi, wj)).with_note("interior maximum");
    Ok(
        VerificationReport::judge("max-principle", max_int - max_bd, tol, samples, witness)
            .with_detail("interior_max", max_int)
            .with_detail("boundary_max", max_bd),
    )
}
