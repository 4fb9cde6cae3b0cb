//! Correspondence between symmetric uniformly elliptic matrix fields and
//! Beltrami data.
//!
//! A divergence-form equation `div(A grad u) = 0` with symmetric `A` has a
//! conjugate function `v` with `grad v = J A grad u` (`J` is rotation by a
//! right angle), and `f = u + iv` then solves the R-linear equation
//! `f_zbar = mu f_z + nu conj(f_z)` with `(mu, nu)` explicit in the
//! entries of `A`. This module carries the dictionary in both directions
//! and verifies the equivalence on given `(u, v)` pairs; it does not solve
//! either equation.
//!
//! The orientation convention is `J (p, q) = (-q, p)`, fixed by the
//! constant-coefficient pair `A = diag(K, 1/K)`, `u = x`, `v = K y`, for
//! which both residuals vanish identically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, RealField, RegionMask};
use crate::report::ReportTable;
use crate::util;

/// Symmetric 2x2 matrix samples `[[a11, a12], [a12, a22]]` on a grid.
pub struct MatrixField {
    a11: RealField,
    a12: RealField,
    a22: RealField,
}

impl MatrixField {
    pub fn new(a11: RealField, a12: RealField, a22: RealField) -> Result<Self> {
        if a11.grid() != a12.grid() || a11.grid() != a22.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(MatrixField { a11, a12, a22 })
    }

    pub fn identity(grid: Grid) -> Self {
        MatrixField {
            a11: RealField::from_fn(grid, |_| 1.0),
            a12: RealField::zeros(grid),
            a22: RealField::from_fn(grid, |_| 1.0),
        }
    }

    pub fn grid(&self) -> Grid {
        self.a11.grid()
    }

    pub fn a11(&self) -> &RealField {
        &self.a11
    }

    pub fn a12(&self) -> &RealField {
        &self.a12
    }

    pub fn a22(&self) -> &RealField {
        &self.a22
    }

    /// Index of the first sample that is not symmetric positive definite,
    /// by the Sylvester test `a11 > 0`, `det > 0`.
    fn first_non_spd(&self) -> Option<usize> {
        let (a, b, c) = (self.a11.samples(), self.a12.samples(), self.a22.samples());
        (0..a.len()).find(|&i| {
            !(a[i] > 0.0 && a[i] * c[i] - b[i] * b[i] > 0.0)
                || !(a[i].is_finite() && b[i].is_finite() && c[i].is_finite())
        })
    }

    fn require_spd(&self) -> Result<()> {
        match self.first_non_spd() {
            Some(index) => Err(Error::NotSpd { index }),
            None => Ok(()),
        }
    }
}

/// Pointwise ellipticity constant `K(z) = max(lambda_max, 1/lambda_min)`
/// of a symmetric positive definite matrix field; always `>= 1`.
pub fn ellipticity(a: &MatrixField) -> Result<RealField> {
    a.require_spd()?;
    let (p, q, r) = (a.a11.samples(), a.a12.samples(), a.a22.samples());
    let samples: Vec<f64> = (0..p.len())
        .map(|i| {
            let mean = 0.5 * (p[i] + r[i]);
            let off = (0.25 * (p[i] - r[i]).powi(2) + q[i] * q[i]).sqrt();
            let hi = mean + off;
            let lo = mean - off;
            hi.max(1.0 / lo)
        })
        .collect();
    RealField::from_samples(a.grid(), samples)
}

/// The Beltrami pair of a symmetric elliptic matrix field:
/// `mu = (a22 - a11 - 2i a12) / (1 + tr A + det A)` and
/// `nu = (1 - det A) / (1 + tr A + det A)`.
///
/// `|mu| + |nu| < 1` wherever `A` is symmetric positive definite, and
/// [`matrix_from_beltrami`] inverts the map.
pub fn beltrami_from_matrix(a: &MatrixField) -> Result<(ComplexField, ComplexField)> {
    a.require_spd()?;
    let (p, q, r) = (a.a11.samples(), a.a12.samples(), a.a22.samples());
    let mut mu = Vec::with_capacity(p.len());
    let mut nu = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let det = p[i] * r[i] - q[i] * q[i];
        let d = 1.0 + p[i] + r[i] + det;
        mu.push(Complex64::new((r[i] - p[i]) / d, -2.0 * q[i] / d));
        nu.push(Complex64::new((1.0 - det) / d, 0.0));
    }
    Ok((
        ComplexField::from_samples(a.grid(), mu)?,
        ComplexField::from_samples(a.grid(), nu)?,
    ))
}

/// Inverse of [`beltrami_from_matrix`]: the symmetric elliptic matrix
/// field whose Beltrami pair is `(mu, nu)`.
///
/// Requires `nu` real (symmetric matrices produce real `nu`; a complex
/// `nu` has no symmetric preimage) and `|mu| + |nu| < 1` per sample.
pub fn matrix_from_beltrami(mu: &ComplexField, nu: &ComplexField) -> Result<MatrixField> {
    if mu.grid() != nu.grid() {
        return Err(Error::GridMismatch);
    }
    let (m, v) = (mu.samples(), nu.samples());
    let mut a11 = Vec::with_capacity(m.len());
    let mut a12 = Vec::with_capacity(m.len());
    let mut a22 = Vec::with_capacity(m.len());
    for i in 0..m.len() {
        if v[i].im.abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "nu sample {i} = {} is not real; no symmetric matrix matches",
                v[i]
            )));
        }
        let nv = v[i].re;
        if m[i].norm() + nv.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|mu| + |nu| = {} at sample {i}, need < 1 for ellipticity",
                m[i].norm() + nv.abs()
            )));
        }
        // The denominator d = 1 + tr A + det A satisfies
        // d [(1 + nu)^2 - |mu|^2] = 4, which pins tr A and det A.
        let d = 4.0 / ((1.0 + nv).powi(2) - m[i].norm_sqr());
        let tr = d * (1.0 + nv) - 2.0;
        a11.push(0.5 * (tr - d * m[i].re));
        a22.push(0.5 * (tr + d * m[i].re));
        a12.push(-0.5 * d * m[i].im);
    }
    MatrixField::new(
        RealField::from_samples(mu.grid(), a11)?,
        RealField::from_samples(mu.grid(), a12)?,
        RealField::from_samples(mu.grid(), a22)?,
    )
}

/// Centered second-order differences in the interior, one-sided
/// second-order stencils at the array edges. Exact on fields that are
/// linear in `x` and `y`, unlike spectral derivatives of aperiodic data.
fn fd_gradient(u: &RealField) -> (RealField, RealField) {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let s = u.samples();
    let at = |i: usize, j: usize| s[i * n + j];
    let mut ux = vec![0.0; s.len()];
    let mut uy = vec![0.0; s.len()];
    for i in 0..n {
        for j in 0..n {
            ux[i * n + j] = if i == 0 {
                (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(n - 1, j) - 4.0 * at(n - 2, j) + at(n - 3, j)) / (2.0 * h)
            } else {
                (at(i + 1, j) - at(i - 1, j)) / (2.0 * h)
            };
            uy[i * n + j] = if j == 0 {
                (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * at(i, n - 1) - 4.0 * at(i, n - 2) + at(i, n - 3)) / (2.0 * h)
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (2.0 * h)
            };
        }
    }
    (
        RealField::from_samples(grid, ux).expect("same grid"),
        RealField::from_samples(grid, uy).expect("same grid"),
    )
}

/// Verify on the unit disk that the conjugate relation
/// `grad v = J A grad u` and the R-linear equation
/// `f_zbar = mu f_z + nu conj(f_z)` for `f = u + iv` vanish together:
/// the table records `r1 = |grad v - J A grad u|_2`,
/// `r2 = |f_zbar - mu f_z - nu conj(f_z)|_2` and checks
/// `r2 <= 10 r1 + 1e-8 |Df|_2`.
///
/// Derivatives are one-stencil finite differences, so manufactured linear
/// pairs give exactly zero residuals; norms are restricted to the disk to
/// keep one-sided edge stencils of aperiodic data out of the comparison.
pub fn conjugate_relation_check(
    u: &RealField,
    v: &RealField,
    a: &MatrixField,
) -> Result<ReportTable> {
    let grid = u.grid();
    if v.grid() != grid || a.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let (mu, nu) = beltrami_from_matrix(a)?;
    let (ux, uy) = fd_gradient(u);
    let (vx, vy) = fd_gradient(v);

    let n = grid.len();
    let disk = RegionMask::disk(grid, Complex64::new(0.0, 0.0), 1.0);
    let bits = disk.bits();
    let (p, q, r) = (a.a11.samples(), a.a12.samples(), a.a22.samples());
    let (mus, nus) = (mu.samples(), nu.samples());
    let (uxs, uys) = (ux.samples(), uy.samples());
    let (vxs, vys) = (vx.samples(), vy.samples());

    let cell = grid.cell_area();
    let r1_sq = util::indexed_sum(n, |i| {
        if !bits[i] {
            return 0.0;
        }
        let aux = p[i] * uxs[i] + q[i] * uys[i];
        let auy = q[i] * uxs[i] + r[i] * uys[i];
        (vxs[i] + auy).powi(2) + (vys[i] - aux).powi(2)
    }) * cell;
    let (r2_sq, df_sq) = {
        let r2 = util::indexed_sum(n, |i| {
            if !bits[i] {
                return 0.0;
            }
            let fx = Complex64::new(uxs[i], vxs[i]);
            let fy = Complex64::new(uys[i], vys[i]);
            let fz = 0.5 * (fx - Complex64::i() * fy);
            let fzbar = 0.5 * (fx + Complex64::i() * fy);
            (fzbar - mus[i] * fz - nus[i] * fz.conj()).norm_sqr()
        }) * cell;
        let df = util::indexed_sum(n, |i| {
            if !bits[i] {
                return 0.0;
            }
            uxs[i] * uxs[i] + uys[i] * uys[i] + vxs[i] * vxs[i] + vys[i] * vys[i]
        }) * cell;
        (r2, df)
    };
    let (r1, r2, df) = (r1_sq.sqrt(), r2_sq.sqrt(), df_sq.sqrt());

    let mut table = ReportTable::new(
        "conjugate relation vs R-linear equation",
        &["r1", "r2", "df_norm"],
    );
    table.push_row(vec![r1, r2, df]);
    let bound = 10.0 * r1 + 1e-8 * df;
    table.add_check("conjugate_equivalence", r2 <= bound, r2, bound);
    Ok(table)
}

/// Dirichlet energy `h^2 sum <grad u, A grad u>` over a region; the
/// integrand equals the Jacobian of `u + iv` for conjugate pairs.
pub fn energy(u: &RealField, a: &MatrixField, region: &RegionMask) -> Result<f64> {
    let grid = u.grid();
    if a.grid() != grid || region.grid() != grid {
        return Err(Error::GridMismatch);
    }
    a.require_spd()?;
    let (ux, uy) = fd_gradient(u);
    let (uxs, uys) = (ux.samples(), uy.samples());
    let (p, q, r) = (a.a11.samples(), a.a12.samples(), a.a22.samples());
    let bits = region.bits();
    Ok(util::indexed_sum(grid.len(), |i| {
        if !bits[i] {
            return 0.0;
        }
        p[i] * uxs[i] * uxs[i] + 2.0 * q[i] * uxs[i] * uys[i] + r[i] * uys[i] * uys[i]
    }) * grid.cell_area())
}
