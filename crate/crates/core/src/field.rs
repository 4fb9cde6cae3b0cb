//! Uniform grids over `[-L, L]^2` and the sample fields that live on them.
//!
//! Samples are cell-centered: sample `(i, j)` sits at
//! `z = (-L + (i + 1/2) h) + i (-L + (j + 1/2) h)` with `h = 2L / n`, so no
//! sample coincides with the origin and integrals are midpoint-rule sums
//! weighted by `h^2`. Layout is row-major with the x index outermost.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::util;

/// Grid geometry: `n x n` cells covering `[-L, L]^2`.
///
/// `n` must be a power of two and at least 64 so spectral transforms stay
/// exact and cheap; `L >= 2` keeps the unit disk well inside the square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n}, need a power of two >= 64"
            )));
        }
        if !(half_width >= 2.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half width L = {half_width}, need L >= 2"
            )));
        }
        Ok(Grid { n, half_width })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Cell side `h = 2L / n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight `h^2` of one cell.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Total number of samples `n^2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Sample location of cell `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(
            -self.half_width + (i as f64 + 0.5) * h,
            -self.half_width + (j as f64 + 0.5) * h,
        )
    }

    /// Sample location by flat index.
    #[inline]
    pub fn point_at(&self, idx: usize) -> Complex64 {
        self.point(idx / self.n, idx % self.n)
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Complex-valued samples on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Evaluate `f` at every sample point in parallel.
    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        let n = grid.n();
        let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
        samples
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, s) in row.iter_mut().enumerate() {
                    *s = f(grid.point(i, j));
                }
            });
        ComplexField { grid, samples }
    }

    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match grid {}^2",
                samples.len(),
                grid.n()
            )));
        }
        Ok(ComplexField { grid, samples })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Discrete L2 norm `sqrt(h^2 sum |f|^2)` over the whole square.
    pub fn l2_norm(&self) -> f64 {
        let s = &self.samples;
        let sq = util::indexed_sum(s.len(), |i| s[i].norm_sqr());
        (self.grid.cell_area() * sq).sqrt()
    }

    /// L2 norm of the restriction to `mask` without materializing it.
    pub fn l2_norm_on(&self, mask: &RegionMask) -> Result<f64> {
        self.grid.check_same(&mask.grid)?;
        let s = &self.samples;
        let b = &mask.bits;
        let sq = util::indexed_sum(s.len(), |i| if b[i] { s[i].norm_sqr() } else { 0.0 });
        Ok((self.grid.cell_area() * sq).sqrt())
    }

    /// Mean value over the square.
    pub fn mean(&self) -> Complex64 {
        let s = &self.samples;
        util::indexed_sum_c(s.len(), |i| s[i]) / s.len() as f64
    }

    /// Zero out samples outside `mask`.
    pub fn restrict(&self, mask: &RegionMask) -> Result<ComplexField> {
        self.grid.check_same(&mask.grid)?;
        let mut out = self.clone();
        out.samples
            .par_iter_mut()
            .zip(mask.bits.par_iter())
            .for_each(|(s, &keep)| {
                if !keep {
                    *s = Complex64::new(0.0, 0.0);
                }
            });
        Ok(out)
    }

    /// Elementwise product `self * other`.
    pub fn mul(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        out.samples
            .par_iter_mut()
            .zip(other.samples.par_iter())
            .for_each(|(a, b)| *a *= b);
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &ComplexField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        self.samples
            .par_iter_mut()
            .zip(other.samples.par_iter())
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        out.samples
            .par_iter_mut()
            .zip(other.samples.par_iter())
            .for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        let mut out = self.clone();
        out.samples.par_iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn add_scalar(&self, c: Complex64) -> ComplexField {
        let mut out = self.clone();
        out.samples.par_iter_mut().for_each(|a| *a += c);
        out
    }

    /// Largest `|f|` over all samples.
    pub fn max_abs(&self) -> f64 {
        let s = &self.samples;
        util::indexed_max(s.len(), |i| s[i].norm())
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    /// Real part as a [`RealField`].
    pub fn real_part(&self) -> RealField {
        RealField {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s.re).collect(),
        }
    }
}

/// Real-valued samples on a [`Grid`]. Used for Jacobians, distortion fields
/// and potentials.
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        RealField {
            grid,
            samples: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> f64 + Sync) -> Self {
        let n = grid.n();
        let mut samples = vec![0.0; grid.len()];
        samples
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, s) in row.iter_mut().enumerate() {
                    *s = f(grid.point(i, j));
                }
            });
        RealField { grid, samples }
    }

    pub fn from_samples(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match grid {}^2",
                samples.len(),
                grid.n()
            )));
        }
        Ok(RealField { grid, samples })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn l2_norm(&self) -> f64 {
        let s = &self.samples;
        let sq = util::indexed_sum(s.len(), |i| s[i] * s[i]);
        (self.grid.cell_area() * sq).sqrt()
    }

    /// Midpoint-rule integral `h^2 sum` over the square.
    pub fn integral(&self) -> f64 {
        let s = &self.samples;
        self.grid.cell_area() * util::indexed_sum(s.len(), |i| s[i])
    }

    /// Midpoint-rule integral over `mask`.
    pub fn integral_on(&self, mask: &RegionMask) -> Result<f64> {
        self.grid.check_same(&mask.grid)?;
        let s = &self.samples;
        let b = &mask.bits;
        Ok(self.grid.cell_area() * util::indexed_sum(s.len(), |i| if b[i] { s[i] } else { 0.0 }))
    }

    pub fn max(&self) -> f64 {
        util::indexed_max(self.samples.len(), |i| self.samples[i])
    }

    pub fn min(&self) -> f64 {
        -util::indexed_max(self.samples.len(), |i| -self.samples[i])
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            samples: self.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// Boolean sample mask describing a measurable region at grid resolution.
#[derive(Clone, Debug)]
pub struct RegionMask {
    grid: Grid,
    bits: Vec<bool>,
}

impl RegionMask {
    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> bool + Sync) -> Self {
        let n = grid.n();
        let mut bits = vec![false; grid.len()];
        bits.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, b) in row.iter_mut().enumerate() {
                *b = f(grid.point(i, j));
            }
        });
        RegionMask { grid, bits }
    }

    /// Closed disk `|z - center| <= radius`.
    pub fn disk(grid: Grid, center: Complex64, radius: f64) -> Self {
        RegionMask::from_fn(grid, |z| (z - center).norm() <= radius)
    }

    /// Half-open annulus `inner < |z| <= outer`, so a disk and the annulus on
    /// top of it partition the larger disk exactly.
    pub fn annulus(grid: Grid, inner: f64, outer: f64) -> Self {
        RegionMask::from_fn(grid, |z| {
            let r = z.norm();
            r > inner && r <= outer
        })
    }

    pub fn full(grid: Grid) -> Self {
        RegionMask {
            grid,
            bits: vec![true; grid.len()],
        }
    }

    pub fn from_bits(grid: Grid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "bit count {} does not match grid {}^2",
                bits.len(),
                grid.n()
            )));
        }
        Ok(RegionMask { grid, bits })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Lebesgue measure at grid resolution: `h^2 * count`.
    pub fn measure(&self) -> f64 {
        self.grid.cell_area() * self.count() as f64
    }

    pub fn complement(&self) -> RegionMask {
        RegionMask {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersect(&self, other: &RegionMask) -> Result<RegionMask> {
        self.grid.check_same(&other.grid)?;
        Ok(RegionMask {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(other.bits.iter())
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        self.grid.check_same(&other.grid)?;
        Ok(RegionMask {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(other.bits.iter())
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    /// Indicator as a complex field (1 inside, 0 outside).
    pub fn indicator(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            samples: self
                .bits
                .iter()
                .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        }
    }
}

/// Measure of the image `f(E)` through the Jacobian: `h^2 sum_E J`.
///
/// Errors if any Jacobian sample on `E` is below `-1e-9`; tiny negative
/// values from rounding are summed as-is.
pub fn image_measure(jacobian: &RealField, region: &RegionMask) -> Result<f64> {
    if jacobian.grid != region.grid {
        return Err(Error::GridMismatch);
    }
    for (idx, (&j, &b)) in jacobian.samples.iter().zip(region.bits.iter()).enumerate() {
        if b && j < -1e-9 {
            return Err(Error::NegativeJacobian { index: idx, value: j });
        }
    }
    jacobian.integral_on(region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, l: f64) -> Grid {
        Grid::new(n, l).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(48, 2.0).is_err());
        assert!(Grid::new(100, 2.0).is_err());
        assert!(Grid::new(64, 1.5).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
        assert!(Grid::new(64, 2.0).is_ok());
    }

    #[test]
    fn no_sample_at_origin() {
        let g = grid(256, 2.0);
        let mut min = f64::INFINITY;
        for i in 0..g.n() {
            for j in 0..g.n() {
                min = min.min(g.point(i, j).norm());
            }
        }
        // Closest cell center is at h/sqrt(2) from the origin.
        let expect = g.spacing() / std::f64::consts::SQRT_2;
        assert!((min - expect).abs() < 1e-12, "min |z| = {min}");
    }

    #[test]
    fn unit_disk_indicator_norm() {
        let g = grid(256, 2.0);
        let chi = RegionMask::disk(g, Complex64::new(0.0, 0.0), 1.0).indicator();
        let expect = std::f64::consts::PI.sqrt();
        let got = chi.l2_norm();
        assert!(
            (got - expect).abs() <= 2.0 * g.spacing(),
            "norm {got} vs sqrt(pi) {expect}"
        );
    }

    #[test]
    fn annulus_restriction_norm() {
        let g = grid(512, 2.0);
        let chi = RegionMask::disk(g, Complex64::new(0.0, 0.0), 1.0).indicator();
        let ann = RegionMask::annulus(g, 0.5, 1.0);
        let r = chi.restrict(&ann).unwrap();
        let got = r.l2_norm().powi(2);
        let expect = std::f64::consts::PI * 0.75;
        assert!((got - expect).abs() < 6.0 * g.spacing(), "{got} vs {expect}");
    }

    #[test]
    fn mask_partition_is_exact() {
        let g = grid(128, 2.0);
        let disk_half = RegionMask::disk(g, Complex64::new(0.0, 0.0), 0.5);
        let ann = RegionMask::annulus(g, 0.5, 1.0);
        let disk_one = RegionMask::disk(g, Complex64::new(0.0, 0.0), 1.0);
        // Disjoint by construction, union is the big disk, counts add exactly.
        assert_eq!(disk_half.intersect(&ann).unwrap().count(), 0);
        assert_eq!(
            disk_half.count() + ann.count(),
            disk_one.count()
        );
        assert_eq!(
            disk_half.measure() + ann.measure(),
            disk_one.measure()
        );
    }

    #[test]
    fn pythagorean_split_of_l2_norm() {
        let g = grid(128, 2.0);
        let f = ComplexField::from_fn(g, |z| Complex64::new(z.re.cos(), (z.im * 0.7).sin()));
        let mask = RegionMask::disk(g, Complex64::new(0.3, -0.2), 0.8);
        let inside = f.restrict(&mask).unwrap().l2_norm().powi(2);
        let outside = f.restrict(&mask.complement()).unwrap().l2_norm().powi(2);
        let total = f.l2_norm().powi(2);
        assert!((inside + outside - total).abs() < 1e-12 * total.max(1.0));
        // Masked norm shortcut agrees with materialized restriction.
        let shortcut = f.l2_norm_on(&mask).unwrap().powi(2);
        assert!((shortcut - inside).abs() < 1e-12 * total.max(1.0));
    }

    #[test]
    fn norm_invariant_under_permutation() {
        let g = grid(64, 2.0);
        let f = ComplexField::from_fn(g, |z| Complex64::new(z.re, z.im * z.re));
        let mut perm: Vec<Complex64> = f.samples().to_vec();
        perm.reverse();
        let fp = ComplexField::from_samples(g, perm).unwrap();
        assert!((f.l2_norm() - fp.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn image_measure_of_radial_square_root_map() {
        // f(z) = z |z|^{-1/2} has J = 1/(2|z|) inside the disk, so |f(D_r)| = pi r.
        let g = grid(512, 2.0);
        let jac = RealField::from_fn(g, |z| {
            let r = z.norm();
            if r <= 1.0 {
                0.5 / r
            } else {
                1.0
            }
        });
        for r in [0.3, 0.6, 0.9] {
            let e = RegionMask::disk(g, Complex64::new(0.0, 0.0), r);
            let got = image_measure(&jac, &e).unwrap();
            let expect = std::f64::consts::PI * r;
            assert!(
                (got - expect).abs() < 6.0 * g.spacing(),
                "r = {r}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn image_measure_rejects_negative_jacobian() {
        let g = grid(64, 2.0);
        let mut jac = RealField::zeros(g);
        jac.samples_mut()[10] = -1e-3;
        let e = RegionMask::full(g);
        assert!(matches!(
            image_measure(&jac, &e),
            Err(Error::NegativeJacobian { index: 10, .. })
        ));
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = ComplexField::zeros(grid(64, 2.0));
        let b = ComplexField::zeros(grid(128, 2.0));
        assert!(matches!(a.mul(&b), Err(Error::GridMismatch)));
        let c = ComplexField::zeros(grid(64, 2.5));
        assert!(matches!(a.mul(&c), Err(Error::GridMismatch)));
    }
}
