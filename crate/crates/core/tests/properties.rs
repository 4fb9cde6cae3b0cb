//! Randomized invariants: algebraic identities that must hold for every
//! input, checked on small grids over proptest-generated data.

use num_complex::Complex64;
use proptest::prelude::*;

use beltrami_core::coefficients::{chebychev_bound, BeltramiCoefficient, RadialProfile};
use beltrami_core::elliptic::{beltrami_from_matrix, matrix_from_beltrami, MatrixField};
use beltrami_core::estimators::rearrange;
use beltrami_core::factorization::split_modulus;
use beltrami_core::{ComplexField, Grid, RealField, RegionMask, SpectralPlan};

type Bump = (f64, f64, f64, f64, f64);

fn bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec(
        (
            -1.5..1.5f64,
            -1.5..1.5f64,
            0.15..0.5f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
        ),
        1..6,
    )
}

fn bump_field(grid: Grid, params: &[Bump]) -> ComplexField {
    ComplexField::from_fn(grid, |z| {
        params
            .iter()
            .map(|&(cx, cy, w, re, im)| {
                let d = z - Complex64::new(cx, cy);
                Complex64::new(re, im) * (-d.norm_sqr() / (w * w)).exp()
            })
            .sum()
    })
}

fn grid64() -> Grid {
    Grid::new(64, 2.0).unwrap()
}

fn hyperbolic(x: f64) -> f64 {
    ((1.0 + x) / (1.0 - x)).ln()
}

proptest! {
    #[test]
    fn mask_partition_preserves_l2(
        params in bumps(),
        cx in -1.0..1.0f64,
        cy in -1.0..1.0f64,
        r in 0.1..1.5f64,
    ) {
        let grid = grid64();
        let f = bump_field(grid, &params);
        let mask = RegionMask::disk(grid, Complex64::new(cx, cy), r);
        let inside = f.restrict(&mask).unwrap().l2_norm();
        let outside = f.restrict(&mask.complement()).unwrap().l2_norm();
        let total = f.l2_norm();
        let dev = (inside * inside + outside * outside - total * total).abs();
        prop_assert!(dev <= 1e-12 * total * total.max(1.0), "partition defect {dev}");
    }

    #[test]
    fn beurling_is_isometric_off_the_mean(params in bumps()) {
        let grid = grid64();
        let plan = SpectralPlan::new(grid);
        let f = bump_field(grid, &params);
        let f = f.add_scalar(-f.mean());
        prop_assume!(f.l2_norm() > 1e-9);
        let ratio = plan.beurling(&f).unwrap().l2_norm() / f.l2_norm();
        prop_assert!((ratio - 1.0).abs() <= 1e-12, "ratio {ratio}");
    }

    #[test]
    fn cauchy_inverts_dbar_up_to_the_mean(params in bumps()) {
        let grid = grid64();
        let plan = SpectralPlan::new(grid);
        let f = bump_field(grid, &params);
        prop_assume!(f.l2_norm() > 1e-9);
        let u = plan.cauchy(&f).unwrap();
        let back = plan.dbar(&u).unwrap();
        let expect = f.add_scalar(-f.mean());
        let err = back.sub(&expect).unwrap().l2_norm();
        prop_assert!(err <= 1e-12 * f.l2_norm().max(1.0), "residual {err}");
    }

    #[test]
    fn truncation_is_idempotent_and_contractive(
        params in bumps(),
        amp in 0.1..0.97f64,
        m in 1u32..20,
    ) {
        let grid = grid64();
        let f = bump_field(grid, &params)
            .restrict(&RegionMask::disk(grid, Complex64::new(0.0, 0.0), 1.0))
            .unwrap();
        let sup = f.max_abs();
        prop_assume!(sup > 1e-9);
        let mu = BeltramiCoefficient::from_field(f.scale(Complex64::new(amp / sup, 0.0))).unwrap();

        let once = mu.truncate(m).unwrap();
        let twice = once.truncate(m).unwrap();
        let cap = 1.0 - 1.0 / m as f64;
        prop_assert!(once.sup_abs() <= cap + 1e-15);
        prop_assert!(once.sup_abs() <= mu.sup_abs() + 1e-15);
        for (a, b) in once.field().samples().iter().zip(twice.field().samples()) {
            prop_assert!((a - b).norm() <= 1e-15, "not idempotent: {a} vs {b}");
        }
        for (orig, cut) in mu.field().samples().iter().zip(once.field().samples()) {
            prop_assert!(cut.norm() <= orig.norm() + 1e-15, "modulus grew");
            // The phase is preserved where the cap bites.
            if orig.norm() > 1e-12 {
                let cross = (orig * cut.conj()).im.abs();
                prop_assert!(cross <= 1e-12 * orig.norm(), "phase moved");
            }
        }
    }

    #[test]
    fn stretch_profile_matches_power_law(g in -0.85..0.85f64, t in 1e-6..1.0f64) {
        let profile = RadialProfile::stretch(g).unwrap();
        let a = (1.0 + g) / (1.0 - g);
        let expect = t.powf(a);
        let got = profile.rho(t);
        prop_assert!(
            (got - expect).abs() <= 1e-7 * expect.max(1e-12),
            "rho({t}) = {got} vs t^{a} = {expect}"
        );
    }

    #[test]
    fn profile_radius_round_trips(which in 0..3usize, p in 0.5..3.0f64, t in 1e-4..1.0f64) {
        let profile = match which {
            0 => RadialProfile::gp(p).unwrap(),
            1 => RadialProfile::stretch(0.3 * p - 0.5).unwrap(),
            _ => RadialProfile::alpha(0.3 * p, Complex64::new(1.0, 0.0)).unwrap(),
        };
        let s = profile.rho(t);
        let back = profile.inverse_radius(s).unwrap();
        prop_assert!(
            (back - t).abs() <= 1e-8 * t.max(1e-10),
            "inverse_radius(rho({t})) = {back}"
        );
    }

    #[test]
    fn hyperbolic_split_modulus_identities(a in 0.0..0.999f64, m in 1.01..20.0f64) {
        let (nu, kappa) = split_modulus(a, m);
        prop_assert!((0.0..1.0).contains(&nu) && (0.0..1.0).contains(&kappa));

        // The outer factor carries min(K, M); the inner keeps the rest.
        let k_mu = (1.0 + a) / (1.0 - a);
        let k_kappa = (1.0 + kappa) / (1.0 - kappa);
        prop_assert!(
            (k_kappa - k_mu.min(m)).abs() <= 1e-10 * k_mu.min(m),
            "outer distortion {k_kappa} vs {}", k_mu.min(m)
        );

        // Splitting walks along the hyperbolic geodesic through 0.
        let additivity = hyperbolic(nu) + (hyperbolic(a) - hyperbolic(nu)) - hyperbolic(a);
        prop_assert!(additivity.abs() <= 1e-12);

        // Moebius recomposition restores the modulus.
        let recomposed = (kappa + nu) / (1.0 + kappa * nu);
        prop_assert!((recomposed - a).abs() <= 1e-12, "recomposed {recomposed} vs {a}");
    }

    #[test]
    fn chebychev_tail_bound_holds_for_any_field(
        params in bumps(),
        amp in 0.1..0.98f64,
        p in 0.3..2.0f64,
    ) {
        let grid = grid64();
        let f = bump_field(grid, &params)
            .restrict(&RegionMask::disk(grid, Complex64::new(0.0, 0.0), 1.0))
            .unwrap();
        let sup = f.max_abs();
        prop_assume!(sup > 1e-9);
        let mu = BeltramiCoefficient::from_field(f.scale(Complex64::new(amp / sup, 0.0))).unwrap();
        let e = mu.distortion(p).unwrap().exp_integral(p);
        for n in 1..=4u32 {
            let measured = mu.bad_set_measure(n, 0.5).unwrap();
            let bound = chebychev_bound(e, n, 0.5, p);
            prop_assert!(measured <= bound * (1.0 + 1e-12), "n={n}: {measured} > {bound}");
        }
    }

    #[test]
    fn rearrangement_preserves_mass_and_decreases(
        params in bumps(),
        r in 0.3..1.8f64,
        split in 0.05..0.95f64,
    ) {
        let grid = grid64();
        let f = bump_field(grid, &params);
        let j = RealField::from_samples(
            grid,
            f.samples().iter().map(|v| v.norm_sqr()).collect(),
        )
        .unwrap();
        let region = RegionMask::disk(grid, Complex64::new(0.0, 0.0), r);
        let rearranged = rearrange(&j, &region).unwrap();

        let direct = j.integral_on(&region).unwrap();
        prop_assert!(
            (rearranged.total_mass() - direct).abs() <= 1e-10 * direct.max(1.0),
            "mass {} vs {direct}", rearranged.total_mass()
        );
        prop_assert!((rearranged.total_measure() - region.measure()).abs() <= 1e-12);
        for w in rearranged.values().windows(2) {
            prop_assert!(w[0] >= w[1], "not decreasing");
        }

        // Integrating a decreasing function front-loads the mass.
        let s = split * rearranged.total_measure();
        let head = rearranged.mass_up_to(s);
        let share = if rearranged.total_measure() > 0.0 {
            s / rearranged.total_measure()
        } else {
            0.0
        };
        prop_assert!(
            head >= share * rearranged.total_mass() - 1e-10 * rearranged.total_mass().max(1.0),
            "head {head} below proportional share"
        );
    }

    #[test]
    fn elliptic_round_trip_on_random_spd(
        l1 in 0.01..100.0f64,
        l2 in 0.01..100.0f64,
        theta in 0.0..std::f64::consts::PI,
    ) {
        let grid = grid64();
        let (s, c) = theta.sin_cos();
        let (a11, a12, a22) = (
            c * c * l1 + s * s * l2,
            s * c * (l1 - l2),
            s * s * l1 + c * c * l2,
        );
        let a = MatrixField::new(
            RealField::from_fn(grid, |_| a11),
            RealField::from_fn(grid, |_| a12),
            RealField::from_fn(grid, |_| a22),
        )
        .unwrap();
        let (mu, nu) = beltrami_from_matrix(&a).unwrap();
        prop_assert!(mu.max_abs() < 1.0 && nu.max_abs() < 1.0, "coefficients not elliptic");
        let back = matrix_from_beltrami(&mu, &nu).unwrap();
        let scale = a11.abs().max(a22.abs()).max(1.0);
        let dev = (back.a11().samples()[0] - a11)
            .abs()
            .max((back.a12().samples()[0] - a12).abs())
            .max((back.a22().samples()[0] - a22).abs());
        prop_assert!(dev <= 1e-11 * scale, "round trip deviation {dev}");
    }
}
