//! Scalar quadrature and root bracketing used by the radial profiles.

use crate::error::{Error, Result};

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Classic recursive halving with Richardson correction; the tolerance is
/// distributed over subintervals, so the returned value is accurate to
/// about `tol` in absolute terms for smooth integrands.
pub fn integrate(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "integrate over [{a}, {b}] with tol {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut unresolved = 0.0;
    let v = adapt(f, a, b, fa, fm, fb, whole, tol, 60, &mut unresolved);
    if unresolved > 0.0 {
        return Err(Error::QuadratureNonConvergence { tol, reached: unresolved });
    }
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: impl Fn(f64) -> f64 + Copy,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // The tolerance is halved per level for a global bound, but floored so
    // that integrable endpoint singularities (whose deep subintervals carry
    // negligible mass) are not rejected on tolerance exhaustion alone.
    let tol_eff = tol.max(1e-17);
    if delta.abs() <= 15.0 * tol_eff || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol_eff {
            *unresolved = unresolved.max(delta.abs());
        }
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (zero endpoints are
/// returned directly). Runs until the bracket width drops below `xtol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter(format!(
            "bisect: no sign change on [{lo}, {hi}] ({flo} .. {fhi})"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
