//! Beurling and Cauchy transforms as Fourier multipliers on the periodic
//! square, plus spectral derivatives.
//!
//! On `[-L, L]^2` the Fourier basis is `exp(i (pi/L) (m1 x + m2 y))` with
//! integer `(m1, m2)`; write `xi = (pi/L)(m1 + i m2)`. The operators used
//! here are diagonal in that basis:
//!
//! * `dbar` has symbol `(i/2) xi`,
//! * `dz` has symbol `(i/2) conj(xi)`,
//! * the Beurling transform `S = dz o dbar^{-1}` has symbol `conj(xi)/xi`,
//!   which is unimodular away from `xi = 0`,
//! * the Cauchy transform inverts `dbar` with the zero mode removed, so
//!   `dbar(cauchy(f)) = f - mean(f)` and `cauchy(f)` has zero mean.
//!
//! The zero mode of `S` and of `cauchy` is set to zero. Periodization of the
//! plane kernels onto the torus biases far-field values by `O(1/L^2)`; the
//! intended use keeps the coefficient supported in the unit disk with
//! `L >= 2` and measures errors on interior annuli.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, RealField};

/// Cached FFT plans and the frequency lattice for one grid size.
pub struct SpectralPlan {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed frequency component per index: `freq[k] = pi/L * m(k)`.
    freq: Vec<f64>,
}

impl SpectralPlan {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let scale = std::f64::consts::PI / grid.half_width();
        let freq = (0..n)
            .map(|k| {
                let m = if k <= n / 2 - 1 { k as i64 } else { k as i64 - n as i64 };
                scale * m as f64
            })
            .collect();
        SpectralPlan {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            freq,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn check(&self, f: &ComplexField) -> Result<()> {
        if f.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// One-dimensional transforms along contiguous rows.
    fn fft_rows(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.grid.n();
        let fft = if inverse { &self.inverse } else { &self.forward };
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, row| {
                fft.process_with_scratch(row, scratch);
            },
        );
    }

    fn transpose(&self, data: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n();
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = data[i * n + j];
            }
        });
    }

    /// Apply the diagonal operator `symbol(xi)` in frequency space.
    ///
    /// `symbol` receives `xi = (pi/L)(m1 + i m2)` and must be finite for
    /// every lattice point including zero.
    pub fn apply_multiplier(
        &self,
        f: &ComplexField,
        symbol: impl Fn(Complex64) -> Complex64 + Sync,
    ) -> Result<ComplexField> {
        self.check(f)?;
        let n = self.grid.n();
        let mut work: Vec<Complex64> = f.samples().to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); work.len()];

        // Forward transform: rows along j (second index), then along i.
        self.fft_rows(&mut work, false);
        self.transpose(&work, &mut scratch);
        self.fft_rows(&mut scratch, false);
        // scratch is now indexed [k2 * n + k1].
        let freq = &self.freq;
        scratch.par_chunks_mut(n).enumerate().for_each(|(k2, row)| {
            let xi2 = freq[k2];
            for (k1, v) in row.iter_mut().enumerate() {
                *v *= symbol(Complex64::new(freq[k1], xi2));
            }
        });
        self.fft_rows(&mut scratch, true);
        self.transpose(&scratch, &mut work);
        self.fft_rows(&mut work, true);
        let scale = 1.0 / (n * n) as f64;
        work.par_iter_mut().for_each(|v| *v *= scale);
        ComplexField::from_samples(self.grid, work)
    }

    /// Beurling transform: symbol `conj(xi)/xi`, zero mode dropped.
    pub fn beurling(&self, f: &ComplexField) -> Result<ComplexField> {
        self.apply_multiplier(f, |xi| {
            if xi.re == 0.0 && xi.im == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                xi.conj() / xi
            }
        })
    }

    /// Cauchy transform: mean-zero periodic solution of `dbar u = f - mean(f)`.
    pub fn cauchy(&self, f: &ComplexField) -> Result<ComplexField> {
        self.apply_multiplier(f, |xi| {
            if xi.re == 0.0 && xi.im == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                // 1 / ((i/2) xi)
                Complex64::new(2.0, 0.0) / (Complex64::new(0.0, 1.0) * xi)
            }
        })
    }

    /// Spectral `d/dzbar`.
    pub fn dbar(&self, f: &ComplexField) -> Result<ComplexField> {
        self.apply_multiplier(f, |xi| Complex64::new(0.0, 0.5) * xi)
    }

    /// Spectral `d/dz`.
    pub fn dz(&self, f: &ComplexField) -> Result<ComplexField> {
        self.apply_multiplier(f, |xi| Complex64::new(0.0, 0.5) * xi.conj())
    }

    /// Spectral gradient `(u_x, u_y)` of a real field.
    pub fn gradient(&self, u: &RealField) -> Result<(RealField, RealField)> {
        let uc = u.to_complex();
        let ux = self.apply_multiplier(&uc, |xi| Complex64::new(0.0, xi.re))?;
        let uy = self.apply_multiplier(&uc, |xi| Complex64::new(0.0, xi.im))?;
        Ok((ux.real_part(), uy.real_part()))
    }
}
