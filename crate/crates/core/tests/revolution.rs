mod common;

use cmcnet::conserved::{mean_curvature_data, pcq_verify};
use cmcnet::isothermic::verify_isothermic;
use cmcnet::revolution::*;
use cmcnet::Error;
use common::*;

const CASES: [(f64, f64); 5] = [(0.0, 0.0), (0.5, 0.0), (0.0, -1.0), (0.3, 1.0), (1.0, -1.0)];

#[test]
fn every_space_form_case_builds() {
    for (h, k) in CASES {
        let r = revolution(h, k, 6, 12).unwrap_or_else(|e| panic!("({h}, {k}): {e}"));
        assert!(r.meridian.defect() < 1e-10, "({h}, {k}) meridian defect {}", r.meridian.defect());
        assert!(verify_isothermic(&r.net.lifts, tol().scaled(100.0)).is_ok());
        assert!(pcq_verify(&r.net, &r.quantity, tol()).pass);
        let (hh, kk) = mean_curvature_data(&r.quantity, tol()).unwrap();
        assert!((hh - h).abs() < 1e-9 && (kk - k).abs() < 1e-9, "({h}, {k}) -> ({hh}, {kk})");
        assert_eq!(r.net.domain().rows(), 2 + 2 * 6);
    }
}

#[test]
fn quantity_is_rotation_equivariant() {
    let r = revolution(0.5, 0.0, 4, 10).unwrap();
    let profile = RotationProfile::uniform(10, 2.0 * std::f64::consts::PI / 10.0);
    let rep = symmetric_pcq_check(&r.net, &r.quantity, &profile, tol());
    assert!(rep.equivariant && rep.inner_n_independent, "defect {}", rep.max_defect);
    assert!(rep.consistent());
}

#[test]
fn seed_step_reproduces_second_point() {
    for (h, k) in CASES {
        let q = space_form_q(k);
        let (m0, m1) = (meridian_point(1.0, 0.5), meridian_point(1.1, 0.55));
        let seed = seed_edge(&q, h, &m0, &m1, tol()).unwrap()[0];
        let par = MeridianParams { q, alpha: seed.alpha, c: seed.alpha * (-1.0 - m0.inner(&m1)), h, kappa: k };
        let cands = meridian_candidates(&m0, &seed.s0, &par, tol()).unwrap();
        let (near, far) = if (cands[0] - m1).euclid_norm() < (cands[1] - m1).euclid_norm() { (0, 1) } else { (1, 0) };
        assert!((cands[near] - m1).euclid_norm() < 1e-9, "({h}, {k}): no candidate reaches M1");
        // Passing the other candidate as `prev` selects the one reaching M1.
        let (m, s1) = meridian_step(&m0, &seed.s0, &par, Some(&cands[far]), tol()).unwrap();
        assert!((m - m1).euclid_norm() < 1e-9);
        assert!((s1 - seed.s1).euclid_norm() < 1e-9, "({h}, {k}): sphere mismatch");
    }
}

#[test]
fn seed_spheres_are_unit() {
    let q = space_form_q(0.0);
    let sols = seed_edge(&q, 0.5, &meridian_point(1.0, 0.5), &meridian_point(1.1, 0.55), tol()).unwrap();
    assert!(!sols.is_empty());
    for s in sols {
        assert!((s.s0.norm_sq() - 1.0).abs() < 1e-9 && (s.s1.norm_sq() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn seed_on_infinity_boundary_is_rejected() {
    let q = space_form_q(-1.0);
    let r = seed_edge(&q, 0.0, &meridian_point(0.0, 1.0), &meridian_point(0.3, 1.1), tol());
    assert!(matches!(r, Err(Error::InfinityBoundary)), "{r:?}");
}

#[test]
fn lift_rejects_axis_points() {
    let profile = RotationProfile::uniform(4, 0.5);
    let r = revolution_lift(&[0.0, 1.0], &[1.0, 0.0], &profile, tol());
    assert!(matches!(r, Err(Error::AxisPoint)), "{r:?}");
}

#[test]
fn lift_factorizer_is_moutard() {
    let profile = RotationProfile::uniform(5, 0.4);
    let net = revolution_lift(&[0.0, 0.3, 0.5, 0.9], &[1.0, 1.2, 0.8, 1.1], &profile, tol()).unwrap();
    for (i, j) in net.domain().edges() {
        let g = net.lift(i).inner(net.lift(j));
        assert!((g - net.a.at(i, j)).abs() < 1e-12);
    }
}

#[test]
fn hyperbolic_catenoid_stays_off_the_axis() {
    let r = revolution(0.0, -1.0, 10, 8).unwrap();
    assert!(r.meridian.points.iter().all(|m| m[0] + m[4] > 0.0));
    assert!(r.meridian.closure_defect() > 0.0);
}
