// SPDX-License-Identifier: Apache-2.0

//! Guidance-law invariants.

use approx::assert_relative_eq;
use mssland::guidance_laws::{
    divert_rate, divert_term, guidance, mss_otalg_accel, ogl_accel, sat, sliding_parameter, sliding_surfaces, zem_zev,
    GuidanceConfig, Law,
};
use mssland::{LanderState, Vec3};
use proptest::prelude::*;

const G: Vec3 = Vec3::new(0.0, 0.0, -3.7114);

fn vec3(range: std::ops::Range<f64>) -> impl Strategy<Value = Vec3> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn state() -> impl Strategy<Value = LanderState> {
    (vec3(-3000.0..3000.0), vec3(-200.0..200.0)).prop_map(|(r, v)| LanderState::new(r, v, 1905.0))
}

proptest! {
    #[test]
    fn divert_rate_is_odd_and_bounded(d in vec3(-5000.0..5000.0)) {
        let cfg = GuidanceConfig::default();
        let p = divert_rate(&d, &cfg);
        prop_assert_eq!(divert_rate(&-d, &cfg), -p);
        let d_star = mssland::terrain_barriers::critical_distance(1.0, 9500.0).unwrap();
        let p_max = divert_rate(&Vec3::repeat(d_star), &cfg).x;
        for i in 0..3 {
            prop_assert!(p[i].abs() <= p_max * (1.0 + 1e-12));
            prop_assert!(p[i] * d[i] >= 0.0);
        }
    }

    #[test]
    fn sat_is_odd_monotone_and_bounded(x in -10.0f64..10.0, y in -10.0f64..10.0, eps in 1e-3f64..5.0) {
        prop_assert_eq!(sat(-x, eps), -sat(x, eps));
        prop_assert!(sat(x, eps).abs() <= 1.0);
        if x <= y {
            prop_assert!(sat(x, eps) <= sat(y, eps));
        }
        if x.abs() < eps {
            prop_assert!((sat(x, eps) - x / eps).abs() < 1e-15);
        }
    }

    #[test]
    fn mss_command_decomposes(s in state(), d in vec3(-2000.0..2000.0), t_go in 0.1f64..100.0) {
        let cfg = GuidanceConfig::default();
        let out = mss_otalg_accel(&s, &d, &cfg, &G, t_go);
        let (s1, s2) = sliding_surfaces(&s, &cfg, t_go);
        let phi = sliding_parameter(&out.p, t_go, &cfg);
        let switching = Vec3::from_fn(|i, _| phi[i] * sat(s2[i], cfg.eps_boundary));
        let (zem, zev) = zem_zev(&s, &cfg, &G, t_go);
        // Gravity-free bracket equals the gravity-inclusive OGL term plus g.
        let bracket = ogl_accel(&zem, &zev, t_go) + G;
        let want = bracket + divert_term(&out.p, t_go) - switching - G;
        let scale = want.norm().max(1.0);
        prop_assert!((out.a_cmd - want).norm() <= 1e-12 * scale);
        prop_assert!((out.ogl_term - bracket).norm() <= 1e-12 * scale);
        prop_assert_eq!(out.s1, s1);
        prop_assert_eq!(out.phi, phi);
    }

    #[test]
    fn otalg_adds_only_the_divert_term(s in state(), d in vec3(-2000.0..2000.0), t_go in 0.1f64..100.0) {
        let cfg = GuidanceConfig::default();
        let ogl = guidance(Law::Ogl, &s, &d, &cfg, &G, t_go);
        let otalg = guidance(Law::Otalg, &s, &d, &cfg, &G, t_go);
        prop_assert_eq!(ogl.divert_term, Vec3::zeros());
        let diff = otalg.a_cmd - ogl.a_cmd - divert_term(&divert_rate(&d, &cfg), t_go);
        prop_assert!(diff.norm() <= 1e-12 * otalg.a_cmd.norm().max(1.0));
    }

    #[test]
    fn sliding_parameter_has_floor(p in vec3(-5.0..5.0), t_go in 0.1f64..100.0) {
        let cfg = GuidanceConfig::default();
        let phi = sliding_parameter(&p, t_go, &cfg);
        for i in 0..3 {
            prop_assert!(phi[i] >= cfg.k2 * cfg.a_p_max);
            prop_assert!(phi[i] >= cfg.k1 * divert_term(&p, t_go)[i].abs());
        }
    }
}

#[test]
fn zem_zev_on_target_is_gravity_only() {
    let cfg = GuidanceConfig::default();
    let s = LanderState::new(Vec3::zeros(), Vec3::zeros(), 1905.0);
    let (zem, zev) = zem_zev(&s, &cfg, &G, 10.0);
    assert_relative_eq!(zem, -G * 50.0, max_relative = 1e-15);
    assert_relative_eq!(zev, -G * 10.0, max_relative = 1e-15);
    // OGL then holds exactly against gravity.
    assert_relative_eq!(ogl_accel(&zem, &zev, 10.0), -G, max_relative = 1e-14);
}

#[test]
fn law_names_round_trip() {
    for law in Law::ALL {
        assert_eq!(law.name().parse::<Law>().unwrap(), law);
    }
    assert!("sliding".parse::<Law>().is_err());
}

#[test]
fn lambda_validation() {
    let mut cfg = GuidanceConfig::default();
    assert_eq!(cfg.validate().unwrap(), None);
    cfg.lambda = 2.5;
    assert!(cfg.validate().unwrap().is_some());
    cfg.lambda = 0.5;
    assert!(cfg.validate().is_err());
}
