//! Central finite-difference Wirtinger derivatives, used as an independent oracle
//! for every exact derivative in the crate.
//!
//! With `s = x + iy`, `∂/∂s = ½(∂x − i∂y)`, `∂/∂s̄ = ½(∂x + i∂y)` and
//! `∂²/∂s∂s̄ = ¼(∂xx + ∂yy)`. All three stencils are central and accurate to
//! `O(step²)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::grid::GridDomain;
use crate::field::poly::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdKind {
    /// ∂/∂s
    Ds,
    /// ∂/∂s̄
    DsBar,
    /// ∂²/∂s∂s̄
    Levi,
}

/// Values that can be combined linearly by a stencil.
pub trait StencilValue: Sized {
    fn combine(terms: &[(Complex64, &Self)]) -> Self;
}

impl StencilValue for Complex64 {
    fn combine(terms: &[(Complex64, &Self)]) -> Self {
        terms.iter().map(|(w, v)| w * **v).sum()
    }
}

impl StencilValue for CMatrix {
    fn combine(terms: &[(Complex64, &Self)]) -> Self {
        let mut out = CMatrix::zeros(terms[0].1.nrows(), terms[0].1.ncols());
        for (w, v) in terms {
            crate::field::poly::accumulate(&mut out, *w, v);
        }
        out
    }
}

/// Finite-difference Wirtinger derivative of `f` at `s`.
///
/// If `bounds` is given, every stencil point must lie in that rectangle.
pub fn fd_derivative<T, F>(
    f: F,
    s: Complex64,
    kind: FdKind,
    step: f64,
    bounds: Option<&GridDomain>,
) -> Result<T>
where
    T: StencilValue,
    F: Fn(Complex64) -> T,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let h = step;
    let offsets = [
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, h),
        Complex64::new(0.0, -h),
    ];
    if let Some(domain) = bounds {
        for z in offsets.iter().map(|o| s + o).chain(std::iter::once(s)) {
            if !domain.contains(z) {
                return Err(Error::StencilOutsideDomain(z));
            }
        }
    }
    let [xp, xm, yp, ym] = offsets.map(|o| f(s + o));
    let i = Complex64::new(0.0, 1.0);
    let c = Complex64::new(1.0 / (4.0 * h), 0.0);
    Ok(match kind {
        FdKind::Ds => T::combine(&[(c, &xp), (-c, &xm), (-i * c, &yp), (i * c, &ym)]),
        FdKind::DsBar => T::combine(&[(c, &xp), (-c, &xm), (i * c, &yp), (-i * c, &ym)]),
        FdKind::Levi => {
            let centre = f(s);
            let w = Complex64::new(1.0 / (4.0 * h * h), 0.0);
            T::combine(&[
                (w, &xp),
                (w, &xm),
                (w, &yp),
                (w, &ym),
                (-4.0 * w, &centre),
            ])
        }
    })
}

/// Real-valued convenience wrapper: `∂²u/∂s∂s̄` of a real function.
pub fn fd_levi_real<F>(u: F, s: Complex64, step: f64, bounds: Option<&GridDomain>) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    let v: Complex64 = fd_derivative(
        |z| Complex64::new(u(z), 0.0),
        s,
        FdKind::Levi,
        step,
        bounds,
    )?;
    Ok(v.re)
}

/// [`fd_levi_real`] with one Richardson step, `(4L(h/2) − L(h))/3`: `O(step⁴)`.
pub fn fd_levi_extrapolated<F>(u: F, s: Complex64, step: f64, bounds: Option<&GridDomain>) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    let coarse = fd_levi_real(&u, s, step, bounds)?;
    let fine = fd_levi_real(&u, s, 0.5 * step, bounds)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
