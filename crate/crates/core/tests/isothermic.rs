mod common;

use cmcnet::isothermic::*;
use cmcnet::minkowski::{euclidean_lift, euclidean_point};
use cmcnet::{Error, Face, GridDomain, Vertex, VertexField};
use common::*;
use proptest::prelude::*;

#[test]
fn cylinder_factorizer_is_recovered_up_to_scale() {
    let (e, net) = cylinder_net(5, 6, 0.3, 0.7);
    let a = verify_isothermic(&net.lifts, tol()).unwrap();
    let (i0, j0) = net.domain().edges().next().unwrap();
    let s = a.at(i0, j0) / e.a.at(i0, j0);
    for (i, j) in net.domain().edges() {
        assert!((a.at(i, j) - s * e.a.at(i, j)).abs() < 1e-12);
    }
}

#[test]
fn generic_net_is_not_isothermic() {
    let mut r = rng(1);
    let d = GridDomain::sized(3, 3);
    let lifts = VertexField::from_fn(d, |_| euclidean_lift(random_point(&mut r)));
    assert!(verify_isothermic(&lifts, tol()).is_err());
}

#[test]
fn moutard_lift_has_parallel_diagonals() {
    let mut r = rng(2);
    let net = random_isothermic(&mut r, 4, 4);
    let scaled = net.lifts.map(|v, f| *f * (1.0 + 0.1 * (v.m + 2 * v.n) as f64));
    let m = moutard_lift(&scaled, &net.a, tol()).unwrap();
    for (i, j) in net.domain().edges() {
        let g = m[i].inner(&m[j]);
        assert!((g - net.a.at(i, j)).abs() < 1e-9 * net.a.at(i, j).abs().max(1.0), "edge {i}-{j}: {g}");
    }
    assert!(moutard_check(&m, tol()).pass);
}

#[test]
fn diagonal_star_of_isothermic_net_is_cospherical() {
    let mut r = rng(3);
    let net = random_isothermic(&mut r, 3, 3);
    let rep = vertex_star_cospherical(&net.lifts, Vertex::new(1, 1), tol()).unwrap();
    assert!(rep.diagonal);
    assert!(rep.central_sphere.is_some());
    assert!(matches!(vertex_star_cospherical(&net.lifts, Vertex::new(0, 0), tol()), Err(Error::OutOfDomain(_))));
}

#[test]
fn calapso_at_zero_is_identity() {
    let (_, net) = cylinder_net(4, 4, 0.3, 0.7);
    let (frame, t) = calapso(&net, 0.0, Vertex::new(0, -1), tol()).unwrap();
    assert!(frame.residual < 1e-14);
    for v in net.domain().vertices() {
        assert!((*t.lift(v) - *net.lift(v)).euclid_norm() < 1e-14);
    }
}

#[test]
fn calapso_rejects_pole_parameter() {
    let (e, net) = cylinder_net(4, 4, 0.3, 0.7);
    let pole = 1.0 / e.a.vertical(0);
    assert!(calapso(&net, pole, Vertex::new(0, -1), tol()).is_err());
}

#[test]
fn connection_maps_lifts_to_lifts() {
    let mut r = rng(4);
    let net = random_isothermic(&mut r, 3, 3);
    for (i, j) in net.domain().edges() {
        let g = connection_edge(&net, 0.7, i, j, tol()).unwrap();
        assert!(g.isometry_defect() < 1e-10);
        assert!(euclidean_point(&g.apply(net.lift(j)), tol()).is_ok());
        // Gamma fixes the two points of the edge as rays.
        assert!(cmcnet::minkowski::parallel_residual(&g.apply(net.lift(j)), net.lift(j)) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn isothermic_nets_are_flat(seed in 0u64..1000, lambda in -3.0f64..3.0) {
        let mut r = rng(seed);
        let net = random_isothermic(&mut r, 3, 4);
        match holonomy_residual(&net, lambda, tol()) {
            Ok(h) => prop_assert!(h < 1e-9, "holonomy {}", h),
            Err(Error::PoleParameter { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn perturbation_breaks_flatness(seed in 0u64..1000, dir in prop::array::uniform3(-1.0f64..1.0)) {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        prop_assume!(n > 0.1);
        let mut r = rng(seed);
        let mut net = random_isothermic(&mut r, 3, 3);
        let v = Vertex::new(1, 1);
        let p = euclidean_point(net.lift(v), tol()).unwrap();
        net.lifts[v] = euclidean_lift([0, 1, 2].map(|k| p[k] + 1e-3 * dir[k] / n));
        let h = face_holonomy(&net, 1.3, Face { base: Vertex::new(0, 0) }, tol());
        if let Ok(h) = h {
            prop_assert!(h > 1e-7, "holonomy {}", h);
        }
    }

    #[test]
    fn factorizer_ratio_matches_face_cross_ratio(seed in 0u64..1000) {
        let mut r = rng(seed);
        let net = random_isothermic(&mut r, 3, 3);
        for face in net.domain().faces() {
            let cr = net.face_cross_ratio(face, tol()).unwrap();
            let want = net.a.face_ratio(face.base);
            prop_assert!((cr - want).abs() < 1e-8 * (1.0 + want.abs()));
        }
    }
}
