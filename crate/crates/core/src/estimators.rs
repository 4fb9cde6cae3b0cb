//! Quantitative checks for the continuity, energy, restricted-norm, area
//! distortion, rearrangement, and Orlicz estimates.
//!
//! Each operation evaluates both sides of one inequality and records them
//! in a [`ReportTable`] with an explicit pass/fail check; nothing here is
//! asserted silently. Radial families are handled by adaptive quadrature
//! in `u = log(1/t)`, which is the only way to resolve the borderline
//! `log log` behavior; grids cannot.
//!
//! Conventions fixed here and used throughout:
//! * `|Df|` is the Hilbert-Schmidt norm, `|Df|^2 = 2(|f_z|^2 + |f_zbar|^2)`,
//!   so the identity map has `|Df|^2 = 2`; for a radial profile this is
//!   `rho'^2 + (rho/t)^2`.
//! * inverse maps `g = f^{-1}` of radial profiles are evaluated through the
//!   monotone inverse of a normalized profile, with `g` collapsing to 0 on
//!   the sub-double range the log-decaying profiles cannot represent (the
//!   limiting integrands are used there).

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{DistortionField, RadialProfile};
use crate::error::{Error, Result};
use crate::field::{RealField, RegionMask};
use crate::neumann::{NeumannRun, PrincipalSolution};
use crate::quad;
use crate::report::ReportTable;
use crate::transforms::SpectralPlan;

/// Bilinear interpolation of cell-centered samples at an arbitrary point;
/// coordinates are clamped to the sampled box.
fn bilinear(u: &RealField, z: Complex64) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.spacing();
    let l = grid.half_width();
    let top = (n - 1) as f64;
    let fx = ((z.re + l) / h - 0.5).clamp(0.0, top);
    let fy = ((z.im + l) / h - 0.5).clamp(0.0, top);
    let i0 = fx.floor() as usize;
    let j0 = fy.floor() as usize;
    let i1 = (i0 + 1).min(n - 1);
    let j1 = (j0 + 1).min(n - 1);
    let ax = fx - i0 as f64;
    let ay = fy - j0 as f64;
    let s = u.samples();
    let v00 = s[i0 * n + j0];
    let v10 = s[i1 * n + j0];
    let v01 = s[i0 * n + j1];
    let v11 = s[i1 * n + j1];
    (1.0 - ax) * ((1.0 - ay) * v00 + ay * v01) + ax * ((1.0 - ay) * v10 + ay * v11)
}

/// Smooth cutoff: 1 for `r <= r0`, 0 for `r >= r1`, C-infinity between.
fn taper(r: f64, r0: f64, r1: f64) -> f64 {
    if r <= r0 {
        return 1.0;
    }
    if r >= r1 {
        return 0.0;
    }
    let s = (r - r0) / (r1 - r0);
    let q = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    q(1.0 - s) / (q(s) + q(1.0 - s))
}

/// Radius for u-substituted integrands. The endpoint `u = 0` is nudged
/// inside the disk: piecewise profiles take their exterior branch at
/// `t = 1` exactly, and that one-point jump makes adaptive quadrature
/// grind on the endpoint of a long interval.
fn radius_at(u: f64) -> f64 {
    (-u).exp().min(1.0 - f64::EPSILON)
}

/// Integral of `f(t) 2 pi t dt` over `(exp(-u_hi), exp(-u_lo))`, computed
/// in the substitution `t = exp(-u)` so log-decaying tails stay resolved.
fn disk_radial_integral(
    f: impl Fn(f64) -> f64,
    u_lo: f64,
    u_hi: f64,
    tol: f64,
) -> Result<f64> {
    quad::integrate(
        |u| {
            let t = radius_at(u);
            f(t) * 2.0 * PI * t * t
        },
        u_lo,
        u_hi,
        tol,
    )
}

/// `integral_D K dA` for a radial profile, by quadrature.
fn distortion_integral(profile: &RadialProfile) -> Result<f64> {
    disk_radial_integral(|t| profile.distortion(t), 0.0, 700.0, 1e-10)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Verify the logarithmic modulus of continuity
/// `|u(a) - u(b)|^2 <= pi (integral_{3D} |grad u|^2) / log(e + 1/|a-b|)`
/// for each pair of points of the unit disk.
///
/// The gradient is spectral; `u` is multiplied by a smooth radial cutoff
/// (identically 1 on the integration region `3D`) before differentiation
/// so its periodization is smooth, which needs `half_width >= 3.5`. The
/// monotonicity hypothesis is probed on 50 seeded random subdisks by
/// comparing interior and boundary-ring extrema; violations are recorded
/// as warnings, not errors, since the grid test is heuristic.
pub fn modulus_check(
    u: &RealField,
    plan: &SpectralPlan,
    pairs: &[(Complex64, Complex64)],
    seed: u64,
) -> Result<ReportTable> {
    let grid = u.grid();
    if plan.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if grid.half_width() < 3.5 {
        return Err(Error::InvalidGrid(format!(
            "modulus check integrates over the 3-disk and tapers beyond it; \
             half width {} < 3.5",
            grid.half_width()
        )));
    }
    for (a, b) in pairs {
        if a.norm() >= 1.0 || b.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "modulus check pair ({a}, {b}) leaves the unit disk"
            )));
        }
    }

    let n = grid.n();
    let r1 = grid.half_width() - 0.25;
    let mut tapered = u.samples().to_vec();
    for i in 0..n {
        for j in 0..n {
            tapered[i * n + j] *= taper(grid.point(i, j).norm(), 3.0, r1);
        }
    }
    let tapered = RealField::from_samples(grid, tapered)?;
    let (ux, uy) = plan.gradient(&tapered)?;
    let energy_density = RealField::from_samples(
        grid,
        ux.samples()
            .iter()
            .zip(uy.samples())
            .map(|(a, b)| a * a + b * b)
            .collect(),
    )?;
    let origin = Complex64::new(0.0, 0.0);
    let energy = energy_density.integral_on(&RegionMask::disk(grid, origin, 3.0))?;

    let mut table = ReportTable::new(
        "logarithmic modulus of continuity",
        &["a_re", "a_im", "b_re", "b_im", "lhs", "rhs", "ratio"],
    );
    let mut worst: f64 = 0.0;
    for (a, b) in pairs {
        let gap = (a - b).norm();
        let lhs = {
            let d = bilinear(u, *a) - bilinear(u, *b);
            d * d
        };
        let rhs = PI * energy / (E + 1.0 / gap.max(1e-300)).ln();
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        worst = worst.max(ratio);
        table.push_row(vec![a.re, a.im, b.re, b.im, lhs, rhs, ratio]);
    }
    table.add_meta("dirichlet_energy_3d", energy);
    table.add_check("modulus_of_continuity", worst <= 1.0, worst, 1.0);

    // Heuristic maximum-principle probe for the monotonicity hypothesis.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = grid.spacing();
    let tol = 1e-9 + 1e-3 * h * (u.max() - u.min()).abs();
    let mut flagged = 0usize;
    for _ in 0..50 {
        let c = loop {
            let x = rng.gen_range(-0.5..0.5);
            let y = rng.gen_range(-0.5..0.5);
            if x * x + y * y <= 0.25 {
                break Complex64::new(x, y);
            }
        };
        let r = rng.gen_range(0.1..(0.95 - c.norm()).min(0.45).max(0.1001));
        let mut interior = (f64::NEG_INFINITY, f64::INFINITY);
        let mut ring = (f64::NEG_INFINITY, f64::INFINITY);
        let lo_i = (((c.re - r - h + grid.half_width()) / h - 0.5).floor()).max(0.0) as usize;
        let hi_i = ((((c.re + r + h + grid.half_width()) / h - 0.5).ceil()) as usize).min(n - 1);
        let lo_j = (((c.im - r - h + grid.half_width()) / h - 0.5).floor()).max(0.0) as usize;
        let hi_j = ((((c.im + r + h + grid.half_width()) / h - 0.5).ceil()) as usize).min(n - 1);
        for i in lo_i..=hi_i {
            for j in lo_j..=hi_j {
                let d = (grid.point(i, j) - c).norm();
                let v = u.samples()[i * n + j];
                if d <= r - 1.5 * h {
                    interior.0 = interior.0.max(v);
                    interior.1 = interior.1.min(v);
                } else if d <= r + 0.5 * h {
                    ring.0 = ring.0.max(v);
                    ring.1 = ring.1.min(v);
                }
            }
        }
        if interior.0.is_finite()
            && ring.0.is_finite()
            && (interior.0 > ring.0 + tol || interior.1 < ring.1 - tol)
        {
            flagged += 1;
            table.warn(format!(
                "interior extremum exceeds boundary ring on the disk at \
                 ({:.3}, {:.3}) radius {:.3}",
                c.re, c.im, r
            ));
        }
    }
    table.add_meta("monotonicity_flags", flagged);
    Ok(table)
}

/// Verify the inverse-map energy bound
/// `integral_D (|g_wbar|^2 + |g_w - 1|^2) <= 2 integral_D K(z,f)` for the
/// inverse `g = f^{-1}` of a radial map, both sides by radial quadrature.
///
/// The profile is normalized first so `f` fixes the unit circle (its
/// distortion is unchanged); the inverse profile is then a map of the unit
/// disk to itself and `g_w`, `g_wbar` reduce to half the sum and
/// difference of `sigma'` and `sigma/s` for `sigma = rho^{-1}`.
pub fn inverse_energy_check(profile: &RadialProfile) -> Result<ReportTable> {
    profile.check_monotone()?;
    let prof = profile.normalized()?;
    let lhs = disk_radial_integral(
        |s| {
            let t = prof.inverse_radius(s).unwrap_or(0.0);
            let (sp, ratio) = if t == 0.0 {
                (0.0, 0.0)
            } else {
                let d = prof.drho(t);
                let sp = if d.is_finite() && d > 0.0 { 1.0 / d } else { 0.0 };
                (sp, t / s)
            };
            let g_wbar = 0.5 * (sp - ratio);
            let g_w = 0.5 * (sp + ratio);
            g_wbar * g_wbar + (g_w - 1.0) * (g_w - 1.0)
        },
        0.0,
        45.0,
        1e-10,
    )?;
    let k_int = distortion_integral(&prof)?;
    let rhs = 2.0 * k_int;

    let mut table = ReportTable::new("inverse map energy", &["lhs", "rhs"]);
    table.push_row(vec![lhs, rhs]);
    table.add_meta("distortion_integral", k_int);
    table.add_meta("profile", prof.label());
    table.add_check("inverse_energy", lhs <= rhs, lhs, rhs);
    Ok(table)
}

/// Verify the continuity estimate for the inverse map: for points of the
/// `R`-disk, `|g(a) - g(b)|^2 <= (4 pi)^2 (R^2 + integral_D K) / log(e + 1/|a-b|)`.
pub fn continuity_bound_check(
    profile: &RadialProfile,
    r_outer: f64,
    pairs: &[(Complex64, Complex64)],
) -> Result<ReportTable> {
    if !(r_outer >= 1.0 && r_outer.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "continuity bound radius R = {r_outer}, need R >= 1"
        )));
    }
    profile.check_monotone()?;
    let prof = profile.normalized()?;
    for (a, b) in pairs {
        if a.norm() > r_outer || b.norm() > r_outer {
            return Err(Error::InvalidParameter(format!(
                "continuity bound pair ({a}, {b}) leaves the {r_outer}-disk"
            )));
        }
    }
    let k_int = distortion_integral(&prof)?;
    let constant = (4.0 * PI).powi(2) * (r_outer * r_outer + k_int);

    let inverse_point = |w: &Complex64| -> Complex64 {
        let s = w.norm();
        if s == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let t = prof.inverse_radius(s).unwrap_or(0.0);
            w * (t / s)
        }
    };

    let mut table = ReportTable::new(
        "inverse map modulus of continuity",
        &["a_re", "a_im", "b_re", "b_im", "lhs", "rhs", "ratio"],
    );
    let mut worst: f64 = 0.0;
    for (a, b) in pairs {
        let gap = (a - b).norm();
        let lhs = (inverse_point(a) - inverse_point(b)).norm_sqr();
        let rhs = constant / (E + 1.0 / gap.max(1e-300)).ln();
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        worst = worst.max(ratio);
        table.push_row(vec![a.re, a.im, b.re, b.im, lhs, rhs, ratio]);
    }
    table.add_meta("distortion_integral", k_int);
    table.add_meta("outer_radius", r_outer);
    table.add_check("inverse_continuity", worst <= 1.0, worst, 1.0);
    Ok(table)
}

/// Restricted-norm curve: for each region `E`, the quantity
/// `|chi_E sigma|_2 + |chi_E S sigma|_2` against `log^{1-beta/2}(e + 1/|E|)`.
///
/// Needs `beta > 2`; the hypothesis that the coefficient has `exp(K)` in
/// `L^p` with `p > beta` is the caller's. The ratio column must stay
/// bounded: max over regions at most twice the median.
pub fn restricted_norm_curve(
    run: &NeumannRun,
    masks: &[RegionMask],
    beta: f64,
) -> Result<ReportTable> {
    if !(beta > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "restricted norm exponent beta = {beta}, need beta > 2"
        )));
    }
    if masks.is_empty() {
        return Err(Error::InvalidParameter(
            "restricted norm needs at least one region".to_string(),
        ));
    }
    let mut table = ReportTable::new(
        "restricted norms of sigma and S sigma",
        &["measure", "lhs", "ratio"],
    );
    let mut ratios = Vec::with_capacity(masks.len());
    for mask in masks {
        let m = mask.measure();
        if m <= 0.0 {
            return Err(Error::InvalidParameter(
                "restricted norm region has zero measure at this resolution".to_string(),
            ));
        }
        let lhs = run.sigma().l2_norm_on(mask)? + run.s_sigma().l2_norm_on(mask)?;
        let ratio = lhs / (E + 1.0 / m).ln().powf(1.0 - beta / 2.0);
        ratios.push(ratio);
        table.push_row(vec![m, lhs, ratio]);
    }
    let max = ratios.iter().cloned().fold(0.0f64, f64::max);
    let med = median(&ratios);
    table.add_meta("beta", beta);
    table.add_meta("ratio_median", med);
    table.add_check("ratio_bounded", max <= 2.0 * med, max, 2.0 * med);
    Ok(table)
}

/// Area distortion along a radial family: for disks `E = D_r` the image
/// measure is exactly `pi rho(r)^2`, weighted by `log^beta(e + 1/|E|)`.
///
/// For `beta < p` the weighted column must stay bounded (max at most twice
/// the median); at `beta >= p` the table instead records the growth factor
/// from the largest to the smallest radius and checks it reaches 2.
pub fn area_distortion_curve(
    profile: &RadialProfile,
    radii: &[f64],
    beta: f64,
    p: f64,
) -> Result<ReportTable> {
    if !(beta > 0.0 && p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "area distortion exponents beta = {beta}, p = {p}"
        )));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidParameter(
            "area distortion radii must lie in (0, 1)".to_string(),
        ));
    }
    let mut table = ReportTable::new(
        "area distortion of radial disks",
        &["r", "measure", "image", "weighted"],
    );
    let mut weighted = Vec::with_capacity(radii.len());
    for &r in radii {
        let area = PI * r * r;
        let image = PI * profile.rho(r) * profile.rho(r);
        let w = image * (E + 1.0 / area).ln().powf(beta);
        weighted.push(w);
        table.push_row(vec![r, area, image, w]);
    }
    table.add_meta("beta", beta);
    table.add_meta("p", p);
    if beta < p {
        let max = weighted.iter().cloned().fold(0.0f64, f64::max);
        let med = median(&weighted);
        table.add_meta("max_over_median", max / med);
        table.add_check("weighted_bounded", max <= 2.0 * med, max, 2.0 * med);
    } else {
        let (mut i_min, mut i_max) = (0usize, 0usize);
        for (k, &r) in radii.iter().enumerate() {
            if r < radii[i_min] {
                i_min = k;
            }
            if r > radii[i_max] {
                i_max = k;
            }
        }
        let growth = weighted[i_min] / weighted[i_max];
        table.add_meta("growth_factor", growth);
        table.add_check("weighted_growth", growth >= 2.0, growth, 2.0);
    }
    Ok(table)
}

/// Nonincreasing rearrangement of a nonnegative field over a region.
pub struct RearrangedField {
    values: Vec<f64>,
    cell_measure: f64,
    cumulative: Vec<f64>,
}

impl RearrangedField {
    /// Sorted sample values, largest first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Prefix masses: `cumulative[k]` is the integral of the rearrangement
    /// over `(0, k h^2)`; length is `values.len() + 1`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_measure(&self) -> f64 {
        self.cell_measure * self.values.len() as f64
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// The step value of the rearrangement at measure parameter `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let k = ((t / self.cell_measure).floor() as usize).min(self.values.len() - 1);
        self.values[k]
    }

    /// Integral of the rearrangement over `(0, t)`, linearly interpolated
    /// inside the cell containing `t`.
    pub fn mass_up_to(&self, t: f64) -> f64 {
        if self.values.is_empty() || t <= 0.0 {
            return 0.0;
        }
        let t = t.min(self.total_measure());
        let k = ((t / self.cell_measure).floor() as usize).min(self.values.len() - 1);
        let rem = t - k as f64 * self.cell_measure;
        self.cumulative[k] + rem * self.values[k]
    }
}

/// Sort the samples of `j` on `region` in nonincreasing order with their
/// cell measure and prefix masses. Values below `-1e-9` are rejected.
pub fn rearrange(j: &RealField, region: &RegionMask) -> Result<RearrangedField> {
    if j.grid() != region.grid() {
        return Err(Error::GridMismatch);
    }
    let mut values = Vec::with_capacity(region.count());
    for (idx, (&v, &inside)) in j.samples().iter().zip(region.bits()).enumerate() {
        if inside {
            if v < -1e-9 {
                return Err(Error::NegativeJacobian { index: idx, value: v });
            }
            values.push(v.max(0.0));
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let cell_measure = j.grid().cell_area();
    let mut cumulative = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for &v in &values {
        acc += v * cell_measure;
        cumulative.push(acc);
    }
    Ok(RearrangedField {
        values,
        cell_measure,
        cumulative,
    })
}

/// Sweep the truncation `epsilon` of the annulus `(epsilon, 1)` through
/// `{1e-3, ..., 1e-12}` and accumulate the two regularity integrals
/// `integral |Df|^2 log^{beta-1}(e + |Df|)` and
/// `integral J log^beta(e + J)` of a radial profile by quadrature.
///
/// For `beta < p` the sweep must be Cauchy (last two values within 1% in
/// both columns); at `beta >= p` the table instead checks for divergence,
/// operationalized as growth by at least 2x across the sweep with a
/// positive final increment.
pub fn regularity_sweep(profile: &RadialProfile, beta: f64, p: f64) -> Result<ReportTable> {
    if !(beta > 0.0 && p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularity exponents beta = {beta}, p = {p}"
        )));
    }
    profile.check_monotone()?;

    // Integrands in u = log(1/t), with products grouped so that nothing
    // overflows even where |Df| and J leave the double range.
    let grad_term = |u: f64| {
        let t = radius_at(u);
        let dt = profile.drho(t) * t;
        let r = profile.rho(t);
        let df2_t2 = dt * dt + r * r;
        let ln_df = 0.5 * df2_t2.ln() + u;
        let w = if ln_df > 40.0 {
            ln_df
        } else {
            (E + df2_t2.sqrt() * u.exp()).ln()
        };
        2.0 * PI * df2_t2 * w.powf(beta - 1.0)
    };
    let jac_term = |u: f64| {
        let t = radius_at(u);
        let j_t2 = profile.rho(t) * profile.drho(t) * t;
        let ln_j = j_t2.ln() + 2.0 * u;
        let w = if ln_j > 40.0 {
            ln_j
        } else {
            (E + j_t2 * (2.0 * u).exp()).ln()
        };
        2.0 * PI * j_t2 * w.powf(beta)
    };

    let mut table = ReportTable::new(
        "regularity integrals over (epsilon, 1)",
        &["epsilon", "gradient_integral", "jacobian_integral"],
    );
    let mut grad = Vec::new();
    let mut jac = Vec::new();
    let mut u_prev = 0.0;
    let (mut acc_g, mut acc_j) = (0.0, 0.0);
    for k in 3..=12 {
        let u = 10f64.ln() * k as f64;
        acc_g += quad::integrate(grad_term, u_prev, u, 1e-9)?;
        acc_j += quad::integrate(jac_term, u_prev, u, 1e-9)?;
        grad.push(acc_g);
        jac.push(acc_j);
        table.push_row(vec![10f64.powi(-k), acc_g, acc_j]);
        u_prev = u;
    }
    table.add_meta("beta", beta);
    table.add_meta("p", p);
    let last = grad.len() - 1;
    if beta < p {
        let rel = |v: &[f64]| (v[last] - v[last - 1]).abs() / v[last].abs().max(1e-300);
        let worst = rel(&grad).max(rel(&jac));
        table.add_check("epsilon_sweep_converged", worst <= 0.01, worst, 0.01);
    } else {
        let growth = (grad[last] / grad[0]).min(jac[last] / jac[0]);
        let still_growing = grad[last] > grad[last - 1] && jac[last] > jac[last - 1];
        table.add_meta("growth_factor", growth);
        table.add_check(
            "epsilon_sweep_diverged",
            growth >= 2.0 && still_growing,
            growth,
            2.0,
        );
    }
    Ok(table)
}

/// The two regularity integrals of a grid solution over the unit disk, as
/// single numbers (grids cannot resolve the borderline sweep).
pub fn regularity_grid(solution: &PrincipalSolution, beta: f64) -> Result<ReportTable> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularity exponent beta = {beta}"
        )));
    }
    let grid = solution.fz().grid();
    let disk = RegionMask::disk(grid, Complex64::new(0.0, 0.0), 1.0);
    let grad_density = RealField::from_samples(
        grid,
        solution
            .fz()
            .samples()
            .iter()
            .zip(solution.fzbar().samples())
            .map(|(a, b)| {
                let df2 = 2.0 * (a.norm_sqr() + b.norm_sqr());
                df2 * (E + df2.sqrt()).ln().powf(beta - 1.0)
            })
            .collect(),
    )?;
    let jac_density = RealField::from_samples(
        grid,
        solution
            .jacobian()
            .samples()
            .iter()
            .map(|&j| {
                let j = j.max(0.0);
                j * (E + j).ln().powf(beta)
            })
            .collect(),
    )?;
    let mut table = ReportTable::new(
        "regularity integrals on the grid",
        &["gradient_integral", "jacobian_integral"],
    );
    table.push_row(vec![
        grad_density.integral_on(&disk)?,
        jac_density.integral_on(&disk)?,
    ]);
    table.add_meta("beta", beta);
    Ok(table)
}

/// Verify the Orlicz bound
/// `integral |Df|^2/log(e+|Df|) <= (2/p) integral J + (2/p) integral (e^{pK}-1)`
/// over the unit disk for a radial profile, by quadrature.
pub fn orlicz_bound_check(profile: &RadialProfile, p: f64) -> Result<ReportTable> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("orlicz exponent p = {p}")));
    }
    profile.check_monotone()?;
    let lhs = quad::integrate(
        |u| {
            let t = radius_at(u);
            let dt = profile.drho(t) * t;
            let r = profile.rho(t);
            let df2_t2 = dt * dt + r * r;
            let ln_df = 0.5 * df2_t2.ln() + u;
            let denom = if ln_df > 40.0 {
                ln_df
            } else {
                (E + df2_t2.sqrt() * u.exp()).ln()
            };
            2.0 * PI * df2_t2 / denom
        },
        0.0,
        700.0,
        1e-9,
    )?;
    let jac_int = quad::integrate(
        |u| {
            let t = radius_at(u);
            2.0 * PI * profile.rho(t) * profile.drho(t) * t
        },
        0.0,
        700.0,
        1e-9,
    )?;
    let exp_int = quad::integrate(
        |u| {
            let t = radius_at(u);
            let pk = p * profile.distortion(t);
            if pk > 300.0 {
                2.0 * PI * (pk - 2.0 * u).exp()
            } else {
                2.0 * PI * pk.exp_m1() * t * t
            }
        },
        0.0,
        700.0,
        1e-9,
    )?;
    let rhs = 2.0 / p * (jac_int + exp_int);

    let mut table = ReportTable::new("orlicz gradient bound", &["lhs", "rhs"]);
    table.push_row(vec![lhs, rhs]);
    table.add_meta("p", p);
    table.add_meta("jacobian_integral", jac_int);
    table.add_meta("exp_distortion_integral", exp_int);
    table.add_check("orlicz_bound", lhs <= rhs, lhs, rhs);
    Ok(table)
}

/// Grid version of the Orlicz bound for a computed solution and the
/// distortion of its coefficient.
pub fn orlicz_bound_grid(
    solution: &PrincipalSolution,
    distortion: &DistortionField,
    p: f64,
) -> Result<ReportTable> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("orlicz exponent p = {p}")));
    }
    let grid = solution.fz().grid();
    if distortion.field().grid() != grid {
        return Err(Error::GridMismatch);
    }
    let disk = RegionMask::disk(grid, Complex64::new(0.0, 0.0), 1.0);
    let lhs_density = RealField::from_samples(
        grid,
        solution
            .fz()
            .samples()
            .iter()
            .zip(solution.fzbar().samples())
            .map(|(a, b)| {
                let df2 = 2.0 * (a.norm_sqr() + b.norm_sqr());
                df2 / (E + df2.sqrt()).ln()
            })
            .collect(),
    )?;
    let lhs = lhs_density.integral_on(&disk)?;
    let jac_int = solution.jacobian().integral_on(&disk)?;
    let exp_int = distortion.exp_integral_on(p, &disk)? - disk.measure();
    let rhs = 2.0 / p * (jac_int + exp_int);

    let mut table = ReportTable::new("orlicz gradient bound on the grid", &["lhs", "rhs"]);
    table.push_row(vec![lhs, rhs]);
    table.add_meta("p", p);
    table.add_meta("jacobian_integral", jac_int);
    table.add_meta("exp_distortion_integral", exp_int);
    table.add_check("orlicz_bound", lhs <= rhs, lhs, rhs);
    Ok(table)
}

/// Find constants for the pointwise inequality
/// `x y log^{beta-1}(e + sqrt(x y)) <= C1 x log^beta(e + x) + C2 e^{p y}`
/// and verify them on a 200 x 200 log-spaced lattice with `x` up to 1e12
/// and `y` up to 100.
///
/// The constants come from the case split at `x = e^{p y / 2}`: below it
/// the left side is charged to the exponential term, above it to the
/// `x log^beta` term. Each case supremum is taken over a wider and finer
/// lattice and inflated by 1.5 before verification.
pub fn elementary_inequality_check(beta: f64, p: f64) -> Result<(f64, f64, ReportTable)> {
    if !(beta > 0.0 && p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "elementary inequality exponents beta = {beta}, p = {p}"
        )));
    }
    let lhs = |x: f64, y: f64| x * y * (E + (x * y).sqrt()).ln().powf(beta - 1.0);

    let mut c1: f64 = 1.0;
    let mut c2: f64 = 1.0;
    for i in 0..400 {
        let x = 10f64.powf(-14.0 + 28.0 * i as f64 / 399.0);
        for j in 0..400 {
            let y = 10f64.powf(-10.0 + 12.3 * j as f64 / 399.0);
            let l = lhs(x, y);
            if x < (p * y / 2.0).exp() {
                c2 = c2.max(l / (p * y).exp());
            } else {
                c1 = c1.max(l / (x * (E + x).ln().powf(beta)));
            }
        }
    }
    c1 *= 1.5;
    c2 *= 1.5;

    let mut worst: f64 = 0.0;
    let (mut wx, mut wy) = (0.0, 0.0);
    for i in 0..200 {
        let x = 10f64.powf(-12.0 + 24.0 * i as f64 / 199.0);
        for j in 0..200 {
            let y = 10f64.powf(-8.0 + 10.0 * j as f64 / 199.0);
            let rhs = c1 * x * (E + x).ln().powf(beta) + c2 * (p * y).exp();
            let ratio = lhs(x, y) / rhs;
            if ratio > worst {
                worst = ratio;
                wx = x;
                wy = y;
            }
        }
    }
    let mut table = ReportTable::new(
        "elementary log-exp inequality",
        &["c1", "c2", "max_ratio"],
    );
    table.push_row(vec![c1, c2, worst]);
    table.add_meta("beta", beta);
    table.add_meta("p", p);
    table.add_meta("worst_x", wx);
    table.add_meta("worst_y", wy);
    table.add_check("lattice_bound", worst <= 1.0, worst, 1.0);
    Ok((c1, c2, table))
}
