//! Rectangular sampling grids over a complex rectangle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::json::Point;

pub const DEFAULT_RESOLUTION: usize = 65;

/// A rectangle `center ± (hx, hy)` sampled at `resolution × resolution` nodes.
///
/// The resolution is always odd so the center is itself a node. Node `(i, j)`
/// sits at `center + (−hx + iΔx) + i(−hy + jΔy)`; flat indices are row-major with
/// `j` (imaginary axis) as the outer loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct GridDomain {
    center: Complex64,
    half_widths: (f64, f64),
    resolution: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridSpec {
    center: Point,
    half_widths: [f64; 2],
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

impl TryFrom<GridSpec> for GridDomain {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        GridDomain::new(
            spec.center.into(),
            spec.half_widths[0],
            spec.half_widths[1],
            spec.resolution,
        )
    }
}

impl From<GridDomain> for GridSpec {
    fn from(d: GridDomain) -> Self {
        GridSpec {
            center: d.center.into(),
            half_widths: [d.half_widths.0, d.half_widths.1],
            resolution: d.resolution,
        }
    }
}

impl GridDomain {
    pub fn new(center: Complex64, hx: f64, hy: f64, resolution: usize) -> Result<Self> {
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidArgument("grid center must be finite".into()));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::InvalidArgument(
                "grid half-widths must be positive and finite".into(),
            ));
        }
        if resolution < 3 {
            return Err(Error::InvalidArgument("grid resolution must be at least 3".into()));
        }
        let resolution = resolution | 1;
        Ok(Self {
            center,
            half_widths: (hx, hy),
            resolution,
        })
    }

    /// Square domain `center ± h` in both directions.
    pub fn square(center: Complex64, half_width: f64, resolution: usize) -> Result<Self> {
        Self::new(center, half_width, half_width, resolution)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn half_widths(&self) -> (f64, f64) {
        self.half_widths
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing_xy(&self) -> (f64, f64) {
        let n = (self.resolution - 1) as f64;
        (2.0 * self.half_widths.0 / n, 2.0 * self.half_widths.1 / n)
    }

    /// The coarser of the two grid spacings.
    pub fn spacing(&self) -> f64 {
        let (dx, dy) = self.spacing_xy();
        dx.max(dy)
    }

    /// Finite-difference step used for derivative cross-checks: 1e-4 × half-width.
    pub fn default_fd_step(&self) -> f64 {
        1e-4 * self.half_widths.0.min(self.half_widths.1)
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let (dx, dy) = self.spacing_xy();
        Complex64::new(
            self.center.re - self.half_widths.0 + i as f64 * dx,
            self.center.im - self.half_widths.1 + j as f64 * dy,
        )
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution + i
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize) {
        (idx % self.resolution, idx / self.resolution)
    }

    /// All nodes in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |idx| {
            let (i, j) = self.unindex(idx);
            self.node(i, j)
        })
    }

    /// Closed-rectangle membership, with a relative slack for roundoff.
    pub fn contains(&self, z: Complex64) -> bool {
        let slack = 1e-12 * (1.0 + self.half_widths.0.max(self.half_widths.1));
        (z.re - self.center.re).abs() <= self.half_widths.0 + slack
            && (z.im - self.center.im).abs() <= self.half_widths.1 + slack
    }

    /// Distance from `z` to the rectangle boundary (negative outside).
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let dx = self.half_widths.0 - (z.re - self.center.re).abs();
        let dy = self.half_widths.1 - (z.im - self.center.im).abs();
        dx.min(dy)
    }

    /// Grid with the same rectangle and `2(n−1)+1` nodes per axis.
    pub fn refined(&self) -> Self {
        Self {
            resolution: 2 * (self.resolution - 1) + 1,
            ..self.clone()
        }
    }

    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        Self::new(self.center, self.half_widths.0, self.half_widths.1, resolution)
    }

    /// Concentric sub-rectangle covering `fraction` of the half-widths, snapped to nodes.
    pub fn concentric(&self, fraction: f64) -> Result<SubRect> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidArgument(
                "sub-rectangle fraction must lie in (0, 1)".into(),
            ));
        }
        let mid = self.resolution / 2;
        let half = ((mid as f64) * fraction).round() as usize;
        if half < 1 {
            return Err(Error::DomainTooSmall(
                "sub-rectangle collapses to a single node".into(),
            ));
        }
        Ok(SubRect {
            i0: mid - half,
            i1: mid + half,
            j0: mid - half,
            j1: mid + half,
        })
    }
}

/// An index rectangle `[i0, i1] × [j0, j1]` of grid nodes (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl SubRect {
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == self.i0 || i == self.i1 || j == self.j0 || j == self.j1
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        (self.i0..=self.i1).contains(&i) && (self.j0..=self.j1).contains(&j)
    }
}

/// A real scalar sampled on a [`GridDomain`], with a validity mask.
#[derive(Clone, Debug)]
pub struct ScalarSampleField {
    domain: GridDomain,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarSampleField {
    /// Sample `f` at every node; `None` or non-finite values are masked out.
    pub fn from_fn<F>(domain: &GridDomain, f: F) -> Self
    where
        F: Fn(Complex64) -> Option<f64> + Sync,
    {
        let samples: Vec<Option<f64>> = (0..domain.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = domain.unindex(idx);
                f(domain.node(i, j)).filter(|v| v.is_finite())
            })
            .collect();
        Self::from_samples(domain.clone(), samples)
    }

    pub fn from_samples(domain: GridDomain, samples: Vec<Option<f64>>) -> Self {
        assert_eq!(samples.len(), domain.len(), "sample count must match grid");
        let mask: Vec<bool> = samples.iter().map(|v| v.is_some_and(f64::is_finite)).collect();
        let values = samples
            .into_iter()
            .zip(&mask)
            .map(|(v, &ok)| if ok { v.unwrap_or(0.0) } else { 0.0 })
            .collect();
        Self {
            domain,
            values,
            mask,
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = self.domain.index(i, j);
        self.mask[idx].then(|| self.values[idx])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Apply `f` to every valid value; results that are not finite become masked.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let samples = self
            .values
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| if m { Some(f(v)) } else { None })
            .collect();
        Self::from_samples(self.domain.clone(), samples)
    }

    /// Bilinear interpolation; `None` outside the rectangle or next to a masked node.
    pub fn interpolate(&self, z: Complex64) -> Option<f64> {
        let d = &self.domain;
        if !d.contains(z) {
            return None;
        }
        let (dx, dy) = d.spacing_xy();
        let n = d.resolution();
        let x = ((z.re - (d.center.re - d.half_widths.0)) / dx).clamp(0.0, (n - 1) as f64);
        let y = ((z.im - (d.center.im - d.half_widths.1)) / dy).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let j = (y.floor() as usize).min(n - 2);
        let (tx, ty) = (x - i as f64, y - j as f64);
        // corners with negligible weight may be masked
        let mut acc = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if w > 1e-12 {
                acc += w * self.get(i + di, j + dj)?;
            }
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_forced_odd() {
        let d = GridDomain::square(Complex64::new(0.0, 0.0), 1.0, 64).unwrap();
        assert_eq!(d.resolution(), 65);
        assert_eq!(d.node(32, 32), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_degenerate_domains() {
        let c = Complex64::new(0.0, 0.0);
        assert!(GridDomain::new(c, 0.0, 1.0, 9).is_err());
        assert!(GridDomain::new(c, 1.0, 1.0, 2).is_err());
        assert!(GridDomain::new(Complex64::new(f64::NAN, 0.0), 1.0, 1.0, 9).is_err());
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_functions() {
        let d = GridDomain::square(Complex64::new(0.5, -0.25), 1.0, 9).unwrap();
        let f = |z: Complex64| 1.0 + 2.0 * z.re - 3.0 * z.im + 0.5 * z.re * z.im;
        let field = ScalarSampleField::from_fn(&d, |z| Some(f(z)));
        for z in [Complex64::new(0.13, 0.2), Complex64::new(1.4, -1.2)] {
            let v = field.interpolate(z).unwrap();
            assert!((v - f(z)).abs() < 1e-12);
        }
        assert!(field.interpolate(Complex64::new(3.0, 0.0)).is_none());
    }

    #[test]
    fn masked_nodes_block_interpolation() {
        let d = GridDomain::square(Complex64::new(0.0, 0.0), 1.0, 5).unwrap();
        let field = ScalarSampleField::from_fn(&d, |z| Some(z.norm().ln()));
        assert_eq!(field.valid_count(), 24);
        assert!(field.interpolate(Complex64::new(0.1, 0.1)).is_none());
        assert!(field.interpolate(Complex64::new(0.9, 0.9)).is_some());
    }

    #[test]
    fn concentric_subrect_is_centered() {
        let d = GridDomain::square(Complex64::new(0.0, 0.0), 1.0, 65).unwrap();
        let u = d.concentric(0.5).unwrap();
        assert_eq!((u.i0, u.i1), (16, 48));
        assert!(u.is_boundary(16, 30));
        assert!(!u.is_boundary(17, 30));
    }
}
