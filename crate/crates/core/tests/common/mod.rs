//! Builders shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;

use cmcnet::cmc::{cylinder, EuclideanNet};
use cmcnet::conserved::lcq_solve_grid;
use cmcnet::minkowski::{euclidean_lift, euclidean_point};
use cmcnet::revolution::{build_revolution_cmc, meridian_point, space_form_q, RevolutionCmc, RevolutionSpec, RotationProfile};
use cmcnet::transforms::darboux_stack;
use cmcnet::{ConservedQuantity, GridDomain, IsothermicNet, MVector, Tol};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn tol() -> Tol<f64> {
    Tol::default()
}

pub fn random_point(rng: &mut Rng8) -> [f64; 3] {
    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
}

/// A value in `[lo, hi]` with a random sign.
pub fn signed(rng: &mut Rng8, lo: f64, hi: f64) -> f64 {
    let x = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// Random isothermic net: a random polygon stacked by Darboux transforms with
/// random parameters and random start points. Retries on draws with a face
/// whose closest vertex pair is under 5% of its widest: such faces amplify the
/// propagation roundoff by orders of magnitude.
pub fn random_isothermic(rng: &mut Rng8, rows: usize, cols: usize) -> IsothermicNet<f64> {
    loop {
        let curve: Vec<MVector<f64>> = (0..cols).map(|_| euclidean_lift(random_point(rng))).collect();
        let v: Vec<f64> = (1..cols).map(|_| signed(rng, 0.5, 1.5)).collect();
        let mus: Vec<f64> = (1..rows).map(|_| signed(rng, 0.5, 2.0)).collect();
        let starts: Vec<MVector<f64>> = (1..rows).map(|_| euclidean_lift(random_point(rng))).collect();
        if let Ok(net) = darboux_stack(&curve, &v, &mus, &starts, tol()) {
            if well_conditioned(&net, 0.05) {
                return net;
            }
        }
    }
}

/// Every face has its closest vertex pair at least `ratio` times its widest.
pub fn well_conditioned(net: &IsothermicNet<f64>, ratio: f64) -> bool {
    net.domain().faces().all(|face| {
        let Ok(p) = face.vertices().map(|v| euclidean_point(net.lift(v), tol())).into_iter().collect::<Result<Vec<_>, _>>()
        else {
            return false;
        };
        let mut d = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                d.push(((0..3).map(|k| (p[i][k] - p[j][k]).powi(2)).sum::<f64>()).sqrt());
            }
        }
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        lo >= ratio * hi
    })
}

/// The discrete cylinder on `rows x cols` with `n` starting at -1.
pub fn cylinder_net(rows: usize, cols: usize, eta: f64, phi: f64) -> (EuclideanNet<f64>, IsothermicNet<f64>) {
    let d = GridDomain::new(0, rows as i32 - 1, -1, cols as i32 - 2).unwrap();
    let e = cylinder(d, eta, phi);
    let net = e.isothermic(tol()).unwrap();
    (e, net)
}

/// Cylinder with its normalised linear conserved quantity in the Euclidean gauge.
pub fn cylinder_cmc(rows: usize, cols: usize) -> (EuclideanNet<f64>, IsothermicNet<f64>, ConservedQuantity<f64>) {
    cylinder_cmc_with(rows, cols, 0.3, FRAC_PI_4)
}

pub fn cylinder_cmc_with(
    rows: usize,
    cols: usize,
    eta: f64,
    phi: f64,
) -> (EuclideanNet<f64>, IsothermicNet<f64>, ConservedQuantity<f64>) {
    let (e, net) = cylinder_net(rows, cols, eta, phi);
    let rep = lcq_solve_grid(&net, MVector::q_euclid(), None, tol()).unwrap();
    assert!(rep.pass, "cylinder quantity: incidence {}", rep.max_incidence);
    (e, net, rep.quantity)
}

/// Surface of revolution with the default seed edge.
pub fn revolution(h: f64, kappa: f64, steps: usize, angles: usize) -> cmcnet::Result<RevolutionCmc<f64>> {
    revolution_seeded(h, kappa, (1.0, 0.5), (1.1, 0.55), steps, angles)
}

pub fn revolution_seeded(
    h: f64,
    kappa: f64,
    e0: (f64, f64),
    e1: (f64, f64),
    steps: usize,
    angles: usize,
) -> cmcnet::Result<RevolutionCmc<f64>> {
    let spec = RevolutionSpec {
        q: space_form_q(kappa),
        h,
        m0: meridian_point(e0.0, e0.1),
        m1: meridian_point(e1.0, e1.1),
        steps,
        profile: RotationProfile::uniform(angles, 2.0 * std::f64::consts::PI / angles as f64),
        branch: 0,
    };
    build_revolution_cmc(&spec, tol())
}
