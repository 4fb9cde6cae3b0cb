//! Pointwise hyperbolic splitting of a Beltrami coefficient.
//!
//! A coefficient `mu` with distortion `K_mu = (1+|mu|)/(1-|mu|)` is split
//! along the hyperbolic geodesic from 0 to `mu(z)`: the inner part `nu`
//! absorbs whatever distortion exceeds a budget `M`, and the Mobius
//! remainder
//!
//! `kappa = (mu - nu) / (1 - mu conj(nu))`
//!
//! keeps distortion at most `M` exactly. Writing `f = g . F` with `F`
//! solving the `nu` equation and `g` the `kappa` equation, the split turns
//! one degenerate problem into a controlled one plus a uniformly elliptic
//! one. Everything here is per-sample algebra; the only analysis is the
//! budget inequality `M K_nu <= K_mu + M`, which the split satisfies with
//! equality wherever the cap is active.
//!
//! `kappa` is represented in z-coordinates (evaluated at `z`, not at
//! `F(z)`), and the unimodular factor `(F_z/|F_z|)^2` is carried as an
//! explicit `phase` argument where it matters; neither choice affects any
//! modulus bound. For radial profiles the full two-dimensional composition
//! reduces to one dimension and is implemented exactly via
//! [`compose_radial`] and [`split_radial`].

use std::sync::Arc;

use num_complex::Complex64;

use crate::coefficients::{BeltramiCoefficient, DistortionField, RadialProfile};
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField, RegionMask};
use crate::report::ReportTable;
use crate::util;

/// Deviation allowed when checking identities that are exact in real
/// arithmetic but accumulate a few ulps of rounding on the grid.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Hyperbolic distance between two points of the unit disk, in the
/// convention where distance from the origin is `log((1+t)/(1-t))`.
pub fn hyperbolic_distance(a: Complex64, b: Complex64) -> f64 {
    let t = ((a - b) / (Complex64::new(1.0, 0.0) - a * b.conj())).norm();
    ((1.0 + t) / (1.0 - t)).ln()
}

/// Pointwise split moduli: for `a = |mu(z)|` and a distortion budget
/// `M > 1`, returns `(|nu|, |kappa|)`.
///
/// With `K = (1+a)/(1-a)`: if `K <= M` then `nu = 0` and `kappa` keeps all
/// of `mu`; otherwise `K_nu = K/M`, so the remainder has distortion exactly
/// `M`. Moduli are recovered from distortions by `t = (K-1)/(K+1)`, and
/// `|kappa|` is the hyperbolic difference of `a` and `|nu|`.
pub fn split_modulus(abs_mu: f64, budget: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&abs_mu) && budget > 1.0);
    let k_mu = (1.0 + abs_mu) / (1.0 - abs_mu);
    if k_mu <= budget {
        return (0.0, abs_mu);
    }
    let k_nu = k_mu / budget;
    let abs_nu = (k_nu - 1.0) / (k_nu + 1.0);
    let abs_kappa = (abs_mu - abs_nu) / (1.0 - abs_mu * abs_nu);
    (abs_nu, abs_kappa)
}

/// Dilatation of the outer factor `g` where `f = g . F`, all evaluated at
/// the same point `z`. `phase` is the unimodular factor `F_z/|F_z|`; it
/// rotates the result without changing its modulus.
pub fn compose_dilatation(mu_f: Complex64, mu_inner: Complex64, phase: Complex64) -> Complex64 {
    (mu_f - mu_inner) / (Complex64::new(1.0, 0.0) - mu_f * mu_inner.conj()) * phase * phase
}

/// Inverse of [`compose_dilatation`] at unit phase: recovers the composite
/// dilatation from the pair `(kappa, nu)`.
pub fn recompose_dilatation(kappa: Complex64, nu: Complex64) -> Complex64 {
    (kappa + nu) / (Complex64::new(1.0, 0.0) + kappa * nu.conj())
}

/// The split of a coefficient field at a fixed distortion budget.
pub struct SplitResult {
    nu: BeltramiCoefficient,
    kappa_tilde: ComplexField,
    budget: f64,
    k_nu: RealField,
    k_mu: RealField,
}

impl SplitResult {
    /// The inner coefficient carrying the distortion excess over the budget.
    pub fn nu(&self) -> &BeltramiCoefficient {
        &self.nu
    }

    /// The remainder dilatation in z-coordinates, distortion at most the
    /// budget at every sample.
    pub fn kappa_tilde(&self) -> &ComplexField {
        &self.kappa_tilde
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Distortion of `nu`; equals `K_mu / M` where the cap is active and 1
    /// elsewhere.
    pub fn k_nu(&self) -> &RealField {
        &self.k_nu
    }

    /// Distortion of the input coefficient.
    pub fn k_mu(&self) -> &RealField {
        &self.k_mu
    }
}

/// Split `mu` pointwise along hyperbolic geodesics at distortion budget
/// `M > 1`. `nu` keeps the phase of `mu` wherever it is nonzero.
pub fn hyperbolic_split(mu: &BeltramiCoefficient, budget: f64) -> Result<SplitResult> {
    if !(budget.is_finite() && budget > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "distortion budget M = {budget}, need M > 1"
        )));
    }
    let grid = mu.grid();
    let samples = mu.field().samples();
    let len = samples.len();
    let mut nu = vec![Complex64::new(0.0, 0.0); len];
    let mut kappa = vec![Complex64::new(0.0, 0.0); len];
    let mut k_mu = vec![1.0; len];
    let mut k_nu = vec![1.0; len];
    for i in 0..len {
        let m = samples[i];
        let a = m.norm();
        k_mu[i] = (1.0 + a) / (1.0 - a);
        if a == 0.0 {
            continue;
        }
        let (abs_nu, _) = split_modulus(a, budget);
        if abs_nu > 0.0 {
            k_nu[i] = k_mu[i] / budget;
            nu[i] = m * (abs_nu / a);
        }
        kappa[i] = (m - nu[i]) / (Complex64::new(1.0, 0.0) - m * nu[i].conj());
    }
    Ok(SplitResult {
        nu: BeltramiCoefficient::from_field(ComplexField::from_samples(grid, nu)?)?,
        kappa_tilde: ComplexField::from_samples(grid, kappa)?,
        budget,
        k_nu: RealField::from_samples(grid, k_nu)?,
        k_mu: RealField::from_samples(grid, k_mu)?,
    })
}

/// Worst-sample deviations of the split identities, reported so that every
/// column is `<= 0` when the split is correct.
///
/// Columns:
/// * `identity_dev`: `| (1+|kappa|)/(1-|kappa|) - min(K_mu, M) |` minus the
///   rounding allowance;
/// * `budget_excess`: `M K_nu - K_mu - M` as-is (the inequality has slack
///   `>= M - 1` against rounding, so no allowance is needed);
/// * `additivity_dev`: `| d(0,nu) + d(nu,mu) - d(0,mu) |` in the
///   hyperbolic metric, minus the allowance, over samples with `nu != 0`;
/// * `recompose_dev`: `| |(kappa + nu)/(1 + kappa conj(nu))| - |mu| |`
///   minus the allowance.
pub fn violation_report(split: &SplitResult, mu: &BeltramiCoefficient) -> Result<ReportTable> {
    if mu.grid() != split.nu.grid() {
        return Err(Error::GridMismatch);
    }
    let m = mu.field().samples();
    let nu = split.nu.field().samples();
    let kappa = split.kappa_tilde.samples();
    let k_mu = split.k_mu.samples();
    let k_nu = split.k_nu.samples();
    let budget = split.budget;
    let len = m.len();

    let identity_dev = util::indexed_max(len, |i| {
        let ak = kappa[i].norm();
        let k_kappa = (1.0 + ak) / (1.0 - ak);
        (k_kappa - k_mu[i].min(budget)).abs()
    });
    let budget_excess = util::indexed_max(len, |i| budget * k_nu[i] - k_mu[i] - budget);
    let additivity_dev = util::indexed_max(len, |i| {
        if nu[i].norm() == 0.0 {
            return 0.0;
        }
        let d0 = Complex64::new(0.0, 0.0);
        let lhs = hyperbolic_distance(d0, nu[i]) + hyperbolic_distance(nu[i], m[i]);
        (lhs - hyperbolic_distance(d0, m[i])).abs()
    });
    let recompose_dev = util::indexed_max(len, |i| {
        (recompose_dilatation(kappa[i], nu[i]).norm() - m[i].norm()).abs()
    });

    let mut table = ReportTable::new(
        "hyperbolic split violations",
        &[
            "identity_dev",
            "budget_excess",
            "additivity_dev",
            "recompose_dev",
        ],
    );
    table.push_row(vec![
        identity_dev - IDENTITY_TOL,
        budget_excess,
        additivity_dev - IDENTITY_TOL,
        recompose_dev - IDENTITY_TOL,
    ]);
    table.add_meta("budget", budget);
    table.add_meta("sup_abs_mu", mu.sup_abs());
    table.add_check("magnitude_identity", identity_dev <= IDENTITY_TOL, identity_dev, IDENTITY_TOL);
    table.add_check("distortion_budget", budget_excess <= 0.0, budget_excess, 0.0);
    table.add_check("hyperbolic_additivity", additivity_dev <= IDENTITY_TOL, additivity_dev, IDENTITY_TOL);
    table.add_check("recompose_modulus", recompose_dev <= IDENTITY_TOL, recompose_dev, IDENTITY_TOL);
    Ok(table)
}

/// Check `integral exp(p M K_nu) <= exp(p M) integral exp(p K_mu)` over
/// the unit disk, together with the pointwise exponent inequality that
/// implies it.
pub fn exp_bound_check(split: &SplitResult, p: f64) -> Result<ReportTable> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p = {p}")));
    }
    let budget = split.budget;
    let lhs = DistortionField::new(split.k_nu.clone(), p)?.exp_integral(p * budget);
    let rhs = (p * budget).exp() * DistortionField::new(split.k_mu.clone(), p)?.exp_integral(p);

    let disk = RegionMask::disk(split.k_nu.grid(), Complex64::new(0.0, 0.0), 1.0);
    let bits = disk.bits();
    let k_nu = split.k_nu.samples();
    let k_mu = split.k_mu.samples();
    let pointwise_excess = util::indexed_max(k_nu.len(), |i| {
        if bits[i] {
            p * budget * k_nu[i] - p * budget - p * k_mu[i]
        } else {
            f64::NEG_INFINITY
        }
    });

    let mut table = ReportTable::new(
        "exponential distortion budget",
        &["lhs", "rhs", "pointwise_excess"],
    );
    table.push_row(vec![lhs, rhs, pointwise_excess]);
    table.add_meta("p", p);
    table.add_meta("budget", budget);
    table.add_check("exp_integral_bound", lhs <= rhs, lhs, rhs);
    table.add_check(
        "exp_pointwise_bound",
        pointwise_excess <= 0.0,
        pointwise_excess,
        0.0,
    );
    Ok(table)
}

fn require_unit(profile: &RadialProfile, role: &str) -> Result<()> {
    let r1 = profile.rho(1.0);
    if (r1 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{role} profile `{}` has rho(1) = {r1}, expected a normalized profile",
            profile.label()
        )));
    }
    Ok(())
}

/// Compose two normalized radial profiles: the result maps `t` to
/// `rho_outer(rho_inner(t))` with the chain-rule derivative, which is the
/// exact one-dimensional reduction of composing the radial maps.
///
/// Monotonicity is checked on the inner profile and on the composition;
/// the outer profile is only ever evaluated on the range of the inner one,
/// so probing it at arbitrary radii would reject conjugated profiles (see
/// [`split_radial`]) whose domain floor is the inner map's smallest
/// representable image.
pub fn compose_radial(inner: &RadialProfile, outer: &RadialProfile) -> Result<RadialProfile> {
    inner.check_monotone()?;
    require_unit(inner, "inner")?;
    require_unit(outer, "outer")?;
    let (rho_i, drho_i) = inner.rho_parts();
    let (rho_o, drho_o) = outer.rho_parts();
    let rho = {
        let (rho_i, rho_o) = (rho_i.clone(), rho_o.clone());
        Arc::new(move |t: f64| rho_o(rho_i(t)))
    };
    let drho = Arc::new(move |t: f64| drho_o(rho_i(t)) * drho_i(t));
    let composed = RadialProfile::from_parts(
        rho,
        drho,
        format!("compose({}, {})", outer.label(), inner.label()),
    );
    composed.check_monotone()?;
    Ok(composed)
}

/// Split a normalized radial profile at distortion budget `M > 1` into
/// `(inner, outer)` with `compose_radial(inner, outer)` reproducing it.
///
/// The inner profile is rebuilt by quadrature from the capped dilatation
/// `nu` of [`split_modulus`]; the outer profile is the exact conjugation
/// `rho_outer = rho . rho_inner^{-1}`, evaluated by monotone bisection.
/// For real dilatations the outer distortion is at most `M`; the
/// recomposition identity holds for any profile because the outer factor
/// is defined as the conjugation.
pub fn split_radial(
    profile: &RadialProfile,
    budget: f64,
) -> Result<(RadialProfile, RadialProfile)> {
    if !(budget.is_finite() && budget > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "distortion budget M = {budget}, need M > 1"
        )));
    }
    profile.check_monotone()?;
    require_unit(profile, "split")?;

    let gamma_inner = {
        let profile = profile.clone();
        move |t: f64| {
            let g = profile.gamma(t);
            let a = g.norm();
            if a == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (abs_nu, _) = split_modulus(a, budget);
            g * (abs_nu / a)
        }
    };
    let inner = RadialProfile::from_gamma(
        gamma_inner,
        format!("split-inner({}, M={budget})", profile.label()),
    )?;

    let (rho_mu, drho_mu) = profile.rho_parts();
    let (_, drho_inner) = inner.rho_parts();
    let rho_outer = {
        let (inner, rho_mu) = (inner.clone(), rho_mu.clone());
        Arc::new(move |s: f64| match inner.inverse_radius(s) {
            Ok(u) => rho_mu(u),
            Err(_) => f64::NAN,
        })
    };
    let drho_outer = {
        let inner = inner.clone();
        Arc::new(move |s: f64| match inner.inverse_radius(s) {
            Ok(u) => drho_mu(u) / drho_inner(u),
            Err(_) => f64::NAN,
        })
    };
    let outer = RadialProfile::from_parts(
        rho_outer,
        drho_outer,
        format!("split-outer({}, M={budget})", profile.label()),
    );
    Ok((inner, outer))
}
