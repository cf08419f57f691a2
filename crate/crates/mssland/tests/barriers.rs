// SPDX-License-Identifier: Apache-2.0

//! Barrier geometry against brute-force and closed-form oracles.

use approx::assert_relative_eq;
use mssland::guidance_laws::{divert_rate, GuidanceConfig};
use mssland::terrain_barriers::{
    barrier_distance, build_barriers, critical_distance, horizontal_barrier, vertical_barrier, BarrierSet,
    LateralAxis, StepTerrain, TerrainStep, VerticalCase, VerticalRule,
};
use mssland::{Error, Vec3};
use proptest::prelude::*;

fn terrain_strategy() -> impl Strategy<Value = StepTerrain> {
    (1usize..5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((10.0f64..800.0, 10.0f64..900.0, 1u32..15), n),
                0.01f64..20.0,
            )
        })
        .prop_map(|(raw, theta)| {
            let (mut h, mut w) = (0.0, 0.0);
            let mut steps = Vec::new();
            let mut lambda = Vec::new();
            for (dh, dw, l) in raw {
                h += dh;
                w += dw;
                steps.push(TerrainStep {
                    height_m: h,
                    half_width_m: w,
                });
                lambda.push(2 * l);
            }
            StepTerrain::symmetric(steps, lambda, theta)
        })
}

/// Direct evaluation from the knot table, independent of the stored segments.
fn oracle_half_width(t: &StepTerrain, r_z: f64) -> f64 {
    let (mut h0, mut w0) = (0.0, 0.0);
    for (j, s) in t.steps.iter().enumerate() {
        if r_z <= s.height_m {
            let lam = f64::from(t.lambda[0][j]);
            let frac = ((r_z - h0) / (s.height_m - h0)).max(0.0);
            return w0 + (s.half_width_m - w0) * frac.powf(1.0 / lam);
        }
        h0 = s.height_m;
        w0 = s.half_width_m;
    }
    w0 + (r_z - h0) / t.theta_deg.to_radians().tan()
}

fn reference(rule: VerticalRule) -> BarrierSet {
    build_barriers(&StepTerrain::reference(), 95.5)
        .expect("reference terrain")
        .with_vertical_rule(rule)
}

proptest! {
    #[test]
    fn barrier_matches_knot_oracle(t in terrain_strategy(), u in 0.0f64..1.5) {
        let b = build_barriers(&t, 95.5).unwrap();
        let top = t.steps.last().unwrap().height_m;
        let r_z = u * top;
        let got = horizontal_barrier(&b, LateralAxis::X, 1.0, r_z).unwrap();
        let want = oracle_half_width(&t, r_z);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn barrier_is_monotone_and_symmetric(t in terrain_strategy(), a in 0.0f64..3000.0, b in 0.0f64..3000.0) {
        let set = build_barriers(&t, 95.5).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let f = |z| horizontal_barrier(&set, LateralAxis::Y, 1.0, z).unwrap();
        prop_assert!(f(lo) <= f(hi) + 1e-9);
        prop_assert_eq!(horizontal_barrier(&set, LateralAxis::Y, -1.0, hi).unwrap(), -f(hi));
    }

    #[test]
    fn barrier_is_continuous_at_knots(t in terrain_strategy(), eps in 1e-9f64..1.0) {
        let b = build_barriers(&t, 95.5).unwrap();
        let w_n = t.steps.last().unwrap().half_width_m;
        let f = |z| horizontal_barrier(&b, LateralAxis::X, 1.0, z).unwrap();
        for (j, s) in t.steps.iter().enumerate() {
            prop_assert!((f(s.height_m) - s.half_width_m).abs() <= 1e-9 * w_n);
            // Above a knot the next root segment rises no faster than Δw (ε/Δh)^{1/λ}.
            let rise = f(s.height_m + eps) - s.half_width_m;
            let bound = match t.steps.get(j + 1) {
                Some(next) => {
                    let lam = f64::from(t.lambda[0][j + 1]);
                    (next.half_width_m - s.half_width_m) * (eps / (next.height_m - s.height_m)).min(1.0).powf(1.0 / lam)
                }
                None => eps / t.theta_deg.to_radians().tan(),
            };
            prop_assert!(rise >= -1e-9 * w_n && rise <= bound * (1.0 + 1e-9) + 1e-9 * w_n, "rise {rise} bound {bound}");
        }
    }

    #[test]
    fn terrain_beneath_rule_matches_brute_force(x in -3000.0f64..3000.0, y in -3000.0f64..3000.0, z in 0.0f64..3000.0) {
        let b = reference(VerticalRule::TerrainBeneath);
        let t = StepTerrain::reference();
        // Scan outward: the first band containing the lander defines the ground beneath it.
        let lateral = x.abs().max(y.abs());
        let mut ground = t.steps.last().unwrap().height_m;
        let mut inner = 0.0;
        for s in &t.steps {
            if lateral <= s.half_width_m {
                ground = inner;
                break;
            }
            inner = s.height_m;
        }
        let v = vertical_barrier(&b, &Vec3::new(x, y, z));
        prop_assert_eq!(v.rho_z, ground + 95.5);
        prop_assert_eq!(barrier_distance(&b, &Vec3::new(x, y, z)).z, z - v.rho_z);
    }

    #[test]
    fn divert_rate_peaks_at_critical_distance(l1 in 0.1f64..10.0, l2 in 100.0f64..20000.0) {
        let cfg = GuidanceConfig { l1: Vec3::repeat(l1), l2: Vec3::repeat(l2), ..GuidanceConfig::default() };
        let d_star = critical_distance(l1, l2).unwrap();
        let p = |d: f64| divert_rate(&Vec3::repeat(d), &cfg).x;
        let peak = p(d_star);
        for k in 1..200 {
            let d = d_star * k as f64 / 50.0;
            prop_assert!(p(d) <= peak * (1.0 + 1e-12), "p({d}) = {} > p(d*) = {peak}", p(d));
        }
    }
}

#[test]
fn reference_knots_and_top_segment() {
    let b = reference(VerticalRule::TerrainBeneath);
    assert_relative_eq!(horizontal_barrier(&b, LateralAxis::X, 1.0, 500.0).unwrap(), 600.0, max_relative = 1e-12);
    assert_relative_eq!(horizontal_barrier(&b, LateralAxis::X, 1.0, 1000.0).unwrap(), 1000.0, max_relative = 1e-12);
    let cot = 1.0 / 0.05f64.to_radians().tan();
    assert_relative_eq!(
        horizontal_barrier(&b, LateralAxis::X, 1.0, 1200.0).unwrap(),
        1000.0 + 200.0 * cot,
        max_relative = 1e-12
    );
}

#[test]
fn negative_altitude_is_a_domain_error() {
    let b = reference(VerticalRule::TerrainBeneath);
    assert!(matches!(horizontal_barrier(&b, LateralAxis::X, 1.0, -1.0), Err(Error::Domain(_))));
    assert!(matches!(horizontal_barrier(&b, LateralAxis::X, 1.0, f64::NAN), Err(Error::Domain(_))));
}

#[test]
fn height_first_rule_cases() {
    let b = reference(VerticalRule::HeightFirst);
    assert_eq!(vertical_barrier(&b, &Vec3::new(0.0, 0.0, 1500.0)).case, VerticalCase::Top);
    let inner = vertical_barrier(&b, &Vec3::new(300.0, 0.0, 200.0));
    assert_eq!((inner.case, inner.rho_z), (VerticalCase::Step(1), 95.5));
    let outer = vertical_barrier(&b, &Vec3::new(800.0, 0.0, 700.0));
    assert_eq!((outer.case, outer.rho_z), (VerticalCase::Step(2), 595.5));
    let off = vertical_barrier(&b, &Vec3::new(900.0, 0.0, 100.0));
    assert_eq!((off.case, off.rho_z), (VerticalCase::Fallback, 95.5));
}

#[test]
fn invalid_terrain_is_rejected() {
    let mut t = StepTerrain::reference();
    t.lambda[0][0] = 3;
    assert!(matches!(build_barriers(&t, 95.5), Err(Error::Config { .. })));
    assert!(build_barriers(&StepTerrain::reference(), 0.0).is_err());
    assert!(critical_distance(0.0, 1.0).is_err());
}
