//! Discrete surfaces of revolution and the construction of cmc nets of
//! revolution with prescribed mean curvature in any space form.
//!
//! R^{4,1} splits as R^{2,1} (components 0, 1, 4) plus R^2 (components 2, 3).
//! The meridian `M` lives in the hyperbolic plane `|M|^2 = -1` of R^{2,1} and
//! the rotation acts on R^2.

use crate::conserved::{mean_curvature_data, normalize_top, pcq_verify, ConservedQuantity};
use crate::error::{Error, Result};
use crate::grid::{EdgeFunction, GridDomain, Vertex, VertexField};
use crate::isothermic::{verify_isothermic, IsothermicNet};
use crate::linalg;
use crate::minkowski::{gram_det, MVector};
use crate::poly::MPoly;
use crate::scalar::{Real, Tol};

const SPLIT: [usize; 3] = [0, 1, 4];

/// Point of the hyperbolic half-plane for the meridian point `(eta, rho)`, `rho > 0`.
pub fn meridian_point<T: Real>(eta: T, rho: T) -> MVector<T> {
    let two = T::lit(2.0);
    let s = eta * eta + rho * rho;
    MVector([(T::one() + s) / (two * rho), eta / rho, T::zero(), T::zero(), (T::one() - s) / (two * rho)])
}

/// Inverse of [`meridian_point`]: `rho = 1/(M0 + M4)`, `eta = rho M1`.
pub fn meridian_coords<T: Real>(m: &MVector<T>) -> (T, T) {
    let rho = T::one() / (m[0] + m[4]);
    (m[1] * rho, rho)
}

/// Rotation angles `phi_n` acting on the unit vector `C = (1, 0)` of R^2.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationProfile<T> {
    pub angles: Vec<T>,
}

impl<T: Real> RotationProfile<T> {
    /// `count` angles `n * step`.
    pub fn uniform(count: usize, step: T) -> Self {
        RotationProfile { angles: (0..count).map(|n| step * T::from_usize(n).unwrap()).collect() }
    }

    fn rotor(&self, n: usize) -> MVector<T> {
        let p = self.angles[n];
        MVector([T::zero(), T::zero(), p.cos(), p.sin(), T::zero()])
    }

    fn check(&self, tol: Tol<T>) -> Result<()> {
        if self.angles.len() < 2 {
            return Err(Error::DimensionMismatch("need at least two rotation angles".into()));
        }
        for w in self.angles.windows(2) {
            if tol.small((T::lit(0.5) * (w[1] - w[0])).sin(), T::one()) {
                return Err(Error::RepeatedPoint);
            }
        }
        Ok(())
    }
}

/// `F_(m,n) = (-1)^m (M_m + Phi_n C)` for the meridian points `ms` indexed from `m1`,
/// with its Moutard factorizer `a = <F_i, F_j>`:
/// `-1 - <M_m, M_(m+1)>` on meridian edges and `-2 sin^2(dphi/2)` on circles.
pub fn revolution_lift_meridian<T: Real>(
    m1: i32,
    ms: &[MVector<T>],
    profile: &RotationProfile<T>,
    tol: Tol<T>,
) -> Result<IsothermicNet<T>> {
    profile.check(tol)?;
    for m in ms {
        if m[0] + m[4] <= T::zero() || !(T::one() / (m[0] + m[4])).is_finite() {
            return Err(Error::AxisPoint);
        }
    }
    for w in ms.windows(2) {
        if (w[1] - w[0]).euclid_norm() <= tol.rel * w[0].euclid_norm() {
            return Err(Error::RepeatedPoint);
        }
    }
    let domain = GridDomain::new(m1, m1 + ms.len() as i32 - 1, 0, profile.angles.len() as i32 - 1)?;
    let lifts = VertexField::from_fn(domain, |v| {
        let x = ms[(v.m - m1) as usize] + profile.rotor(v.n as usize);
        if v.m.rem_euclid(2) == 0 {
            x
        } else {
            -x
        }
    });
    let u = ms.windows(2).map(|w| -T::one() - w[0].inner(&w[1])).collect();
    let two = T::lit(2.0);
    let v = profile.angles.windows(2).map(|w| -two * (T::lit(0.5) * (w[1] - w[0])).sin().powi(2)).collect();
    let a = EdgeFunction::new(domain, u, v)?;
    IsothermicNet::new(lifts, a, tol.scaled(T::lit(100.0)))
}

/// Surface of revolution from meridian coordinates `(eta_m, rho_m)`.
pub fn revolution_lift<T: Real>(
    eta: &[T],
    rho: &[T],
    profile: &RotationProfile<T>,
    tol: Tol<T>,
) -> Result<IsothermicNet<T>> {
    if eta.len() != rho.len() {
        return Err(Error::DimensionMismatch("eta and rho lengths differ".into()));
    }
    if rho.iter().any(|r| *r <= tol.abs) {
        return Err(Error::AxisPoint);
    }
    let ms: Vec<_> = eta.iter().zip(rho).map(|(e, r)| meridian_point(*e, *r)).collect();
    revolution_lift_meridian(0, &ms, profile, tol)
}

fn rotate<T: Real>(x: &MVector<T>, angle: T) -> MVector<T> {
    let (s, c) = angle.sin_cos();
    let mut y = *x;
    y[2] = c * x[2] - s * x[3];
    y[3] = s * x[2] + c * x[3];
    y
}

/// Rotational symmetry of a quantity on a net of revolution.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryReport<T> {
    /// `P_(m,n) = Phi_n Phat_m` for every vertex.
    pub equivariant: bool,
    /// `<P(lambda), F>` does not depend on `n`.
    pub inner_n_independent: bool,
    pub max_defect: T,
}

impl<T> SymmetryReport<T> {
    /// Both criteria agree, as they must for a conserved quantity.
    pub fn consistent(&self) -> bool {
        self.equivariant == self.inner_n_independent
    }
}

pub fn symmetric_pcq_check<T: Real>(
    net: &IsothermicNet<T>,
    p: &ConservedQuantity<T>,
    profile: &RotationProfile<T>,
    tol: Tol<T>,
) -> SymmetryReport<T> {
    let d = net.domain();
    let t = tol.scaled(T::lit(100.0));
    let mut equivariant = true;
    let mut indep = true;
    let mut max_defect = T::zero();
    for m in d.m1..=d.m2 {
        let first = Vertex::new(m, d.n1);
        let phi0 = profile.angles[0];
        let hat = MPoly::new(p.at(first).coeffs.iter().map(|c| rotate(c, -phi0)).collect());
        let inner0 = p.at(first).inner_vec(net.lift(first));
        for n in d.n1..=d.n2 {
            let v = Vertex::new(m, n);
            let want = MPoly::new(hat.coeffs.iter().map(|c| rotate(c, profile.angles[n as usize])).collect());
            let scale = want.max_norm().max(T::one());
            let e = p.at(v).max_diff(&want);
            max_defect = max_defect.max(e / scale);
            equivariant &= t.small(e, scale);
            let inner = p.at(v).inner_vec(net.lift(v));
            let diff = (&inner - &inner0).max_abs();
            indep &= t.small(diff, inner0.max_abs().max(T::one()));
        }
    }
    SymmetryReport { equivariant, inner_n_independent: indep, max_defect }
}

/// A solution of the seed-edge problem: Moutard factor and the two spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSolution<T> {
    pub alpha: T,
    pub s0: MVector<T>,
    pub s1: MVector<T>,
}

/// The scalars of the seed-edge quadratic `|S|^2 = (C^2/A) H^2 - (A/Delta)(alpha + BH/A)^2`.
#[derive(Debug, Clone, Copy)]
pub struct SeedConstants<T> {
    pub delta: T,
    pub a: T,
    pub b: T,
    pub c: T,
}

pub fn seed_constants<T: Real>(q: &MVector<T>, m0: &MVector<T>, m1: &MVector<T>) -> SeedConstants<T> {
    let two = T::lit(2.0);
    let mb = (*m0 + *m1) * T::lit(0.5);
    let dm = *m1 - *m0;
    let d2 = dm.norm_sq();
    let delta = gram_det(&[*q, *m0, *m1]);
    let c = d2 * mb.inner(q);
    let b = -d2 * (mb.norm_sq() * m0.inner(q) * m1.inner(q) + two * mb.inner(q).powi(2));
    let w2 = gram_det(&[*m0, *m1]);
    let a = -(b * b - delta * c * c) / w2;
    SeedConstants { delta, a, b, c }
}

/// Solves for the Moutard factor `alpha` and the spheres `S0, S1` on the
/// seed edge `(M0, M1)`, for the space form `Q` (in R^{2,1}) and mean curvature `H`.
///
/// For `H = 0` the roots come in pairs `alpha, -alpha` whose quantities
/// differ by `lambda -> -lambda`; only the positive representative is returned.
pub fn seed_edge<T: Real>(
    q: &MVector<T>,
    h: T,
    m0: &MVector<T>,
    m1: &MVector<T>,
    tol: Tol<T>,
) -> Result<Vec<SeedSolution<T>>> {
    for m in [m0, m1] {
        if tol.small(m.inner(q), q.euclid_norm() * m.euclid_norm()) {
            return Err(Error::InfinityBoundary);
        }
    }
    let k = seed_constants(q, m0, m1);
    let scale = (q.euclid_norm() * m0.euclid_norm() * m1.euclid_norm()).powi(2);
    if tol.small(k.delta, scale) {
        return Err(Error::DegenerateBasis);
    }
    if k.a <= T::zero() {
        return Err(Error::ConstraintViolated(format!("A = {} is not positive", k.a)));
    }
    let disc_rel = T::one() - k.c * k.c * h * h / k.a;
    if disc_rel < -tol.rel {
        return Err(Error::ConstraintViolated(format!("C^2 H^2 = {} exceeds A = {}", k.c * k.c * h * h, k.a)));
    }
    let rhs = (-(k.delta / k.a) * disc_rel).max(T::zero());
    let centre = -k.b * h / k.a;
    let root = rhs.sqrt();
    let mut alphas = vec![centre + root];
    if root > tol.rel * (T::one() + centre.abs()) && h != T::zero() {
        alphas.push(centre - root);
    }
    let basis = [*q, *m0, *m1];
    let g: Vec<Vec<T>> = basis.iter().map(|x| basis.iter().map(|y| x.inner(y)).collect()).collect();
    let mb = (*m0 + *m1) * T::lit(0.5);
    let w = mb.inner(q) * (*m1 - *m0).norm_sq();
    let mut out = Vec::new();
    for alpha in alphas {
        if tol.small(alpha, T::one()) {
            continue;
        }
        let r0 = [-h + alpha * m0.inner(q).powi(2), T::zero(), -alpha * w];
        let r1 = [-h + alpha * m1.inner(q).powi(2), -alpha * w, T::zero()];
        let solve = |r: [T; 3]| -> Result<MVector<T>> {
            let x = linalg::solve_dense(&g, &r, tol).map_err(|_| Error::DegenerateBasis)?;
            Ok(basis[0] * x[0] + basis[1] * x[1] + basis[2] * x[2])
        };
        let (s0, s1) = (solve(r0)?, solve(r1)?);
        let t = tol.scaled(T::lit(1e3));
        if t.close(s0.norm_sq(), T::one()) && t.close(s1.norm_sq(), T::one()) {
            out.push(SeedSolution { alpha, s0, s1 });
        }
    }
    Ok(out)
}

/// Constant data of a meridian propagation.
#[derive(Debug, Clone, Copy)]
pub struct MeridianParams<T> {
    pub q: MVector<T>,
    pub alpha: T,
    /// Meridian edge value of the factorizer, `alpha (-1 - <M_m, M_(m+1)>)`.
    pub c: T,
    pub h: T,
    pub kappa: T,
}

impl<T: Real> MeridianParams<T> {
    /// `1 - 2cH - c^2 kappa`, the same on every meridian edge.
    pub fn step_discriminant(&self) -> T {
        T::one() - T::lit(2.0) * self.c * self.h - self.c * self.c * self.kappa
    }
}

/// The two candidates for the neighbour of `M` along the meridian, and `X`.
pub fn meridian_candidates<T: Real>(
    m: &MVector<T>,
    s: &MVector<T>,
    par: &MeridianParams<T>,
    tol: Tol<T>,
) -> Result<[MVector<T>; 2]> {
    let (q, alpha, c) = (par.q, par.alpha, par.c);
    if c / alpha <= T::zero() {
        return Err(Error::ConstraintViolated("c / alpha must be positive".into()));
    }
    let qm = q.inner(m);
    if tol.small(qm, q.euclid_norm() * m.euclid_norm()) {
        return Err(Error::InfinityBoundary);
    }
    let disc = par.step_discriminant();
    if disc < -tol.rel {
        return Err(Error::ConstraintViolated(format!("1 - 2cH - c^2 kappa = {disc} is negative")));
    }
    let x = *s + (q + *m * qm) * c;
    let xx = x.norm_sq();
    if tol.small(xx.abs().sqrt(), s.euclid_norm()) {
        return Err(Error::VanishingX);
    }
    let (mv, xv) = (SPLIT.map(|k| m[k]), SPLIT.map(|k| x[k]));
    let w = linalg::cross3(mv, xv);
    let mut y = MVector::zero();
    y[0] = -w[0];
    y[1] = w[1];
    y[4] = w[2];
    let yv = SPLIT.map(|k| y[k]);
    let det = linalg::det(&[mv.to_vec(), xv.to_vec(), yv.to_vec()]);
    if det < T::zero() {
        y = -y;
    }
    y = y * (xx / y.norm_sq()).sqrt();
    let growth = (alpha + c).powi(2) - alpha * alpha;
    let base = *m * ((alpha + c) / alpha) - x * (growth * qm / (alpha * xx));
    let t = (growth * disc.max(T::zero())).sqrt() / alpha.abs();
    if tol.small(t, T::one()) {
        return Err(Error::Alternating);
    }
    let dy = y * (t / xx);
    Ok([base + dy, base - dy])
}

/// One meridian step from `(M_m, S_m)`. With `prev` the branch returning to
/// it is discarded; without, the branch advancing in the `eta / rho` slot is taken.
pub fn meridian_step<T: Real>(
    m: &MVector<T>,
    s: &MVector<T>,
    par: &MeridianParams<T>,
    prev: Option<&MVector<T>>,
    tol: Tol<T>,
) -> Result<(MVector<T>, MVector<T>)> {
    let [c0, c1] = meridian_candidates(m, s, par, tol)?;
    let next = match prev {
        Some(p) => {
            if (c0 - *p).euclid_norm() >= (c1 - *p).euclid_norm() {
                c0
            } else {
                c1
            }
        }
        None => {
            if c0[1] >= c1[1] {
                c0
            } else {
                c1
            }
        }
    };
    if next[0] + next[4] <= T::zero() {
        return Err(Error::AxisCrossing);
    }
    let mb = (*m + next) * T::lit(0.5);
    let s_next = *s + (next - *m) * (T::lit(2.0) * par.alpha * par.q.inner(&mb));
    Ok((next, s_next))
}

/// Meridian curve `M`, sphere curve `S` and the constants of the construction.
#[derive(Debug, Clone)]
pub struct Meridian<T> {
    /// Index of the first point.
    pub m1: i32,
    pub points: Vec<MVector<T>>,
    pub spheres: Vec<MVector<T>>,
    pub params: MeridianParams<T>,
}

impl<T: Real> Meridian<T> {
    /// Largest violation of the meridian invariants.
    pub fn defect(&self) -> T {
        let p = &self.params;
        let mut worst = T::zero();
        for (m, s) in self.points.iter().zip(&self.spheres) {
            worst = worst
                .max((m.norm_sq() + T::one()).abs())
                .max((s.norm_sq() - T::one()).abs())
                .max(s.inner(m).abs())
                .max((s.inner(&p.q) + p.h - p.alpha * m.inner(&p.q).powi(2)).abs());
        }
        for k in 0..self.points.len().saturating_sub(1) {
            let (m0, m1) = (self.points[k], self.points[k + 1]);
            let ds = self.spheres[k + 1] - self.spheres[k];
            let want = (m1 - m0) * (T::lit(2.0) * p.alpha * p.q.inner(&((m0 + m1) * T::lit(0.5))));
            worst = worst
                .max((ds - want).euclid_norm())
                .max((m0.inner(&m1) + T::one() + p.c / p.alpha).abs());
        }
        worst
    }

    /// Smallest Euclidean distance from the first point to a later non-adjacent
    /// point; a measure of how far the meridian is from closing up.
    pub fn closure_defect(&self) -> T {
        let first = self.points[0];
        self.points.iter().skip(2).map(|m| (*m - first).euclid_norm()).fold(T::infinity(), T::min)
    }
}

/// Space form vector for curvature `kappa` in R^{2,1}: `Q0` for `kappa = 0`,
/// `sqrt(kappa) e0` for `kappa > 0` and `sqrt(-kappa) e1` for `kappa < 0`
/// (upper half-plane model, infinity boundary `eta = 0`).
pub fn space_form_q<T: Real>(kappa: T) -> MVector<T> {
    if kappa == T::zero() {
        MVector::q_euclid()
    } else if kappa > T::zero() {
        MVector::basis(0) * kappa.sqrt()
    } else {
        MVector::basis(1) * (-kappa).sqrt()
    }
}

/// Inputs of [`build_revolution_cmc`].
#[derive(Debug, Clone)]
pub struct RevolutionSpec<T> {
    pub q: MVector<T>,
    pub h: T,
    pub m0: MVector<T>,
    pub m1: MVector<T>,
    /// Meridian steps taken beyond each end of the seed edge.
    pub steps: usize,
    pub profile: RotationProfile<T>,
    /// Index into the seed solutions.
    pub branch: usize,
}

/// A cmc net of revolution with its normalised linear conserved quantity.
#[derive(Debug, Clone)]
pub struct RevolutionCmc<T> {
    pub net: IsothermicNet<T>,
    pub quantity: ConservedQuantity<T>,
    pub meridian: Meridian<T>,
    pub mean_curvature: T,
    pub kappa: T,
    pub conservation_residual: T,
    /// The meridian crosses the infinity boundary somewhere.
    pub crosses_infinity: bool,
}

pub fn build_revolution_cmc<T: Real>(spec: &RevolutionSpec<T>, tol: Tol<T>) -> Result<RevolutionCmc<T>> {
    let q = spec.q;
    if q[2] != T::zero() || q[3] != T::zero() {
        return Err(Error::ConstraintViolated("Q must lie in R^{2,1}".into()));
    }
    let seeds = seed_edge(&q, spec.h, &spec.m0, &spec.m1, tol)?;
    let seed = *seeds
        .get(spec.branch)
        .ok_or_else(|| Error::ConstraintViolated(format!("seed branch {} of {} unavailable", spec.branch, seeds.len())))?;
    let alpha = seed.alpha;
    let par = MeridianParams {
        q,
        alpha,
        c: alpha * (-T::one() - spec.m0.inner(&spec.m1)),
        h: spec.h,
        kappa: -q.norm_sq(),
    };
    let mut fwd = vec![(spec.m0, seed.s0), (spec.m1, seed.s1)];
    for _ in 0..spec.steps {
        let k = fwd.len();
        let (m, s) = fwd[k - 1];
        let prev = fwd[k - 2].0;
        fwd.push(meridian_step(&m, &s, &par, Some(&prev), tol)?);
    }
    let mut back = vec![(spec.m1, seed.s1), (spec.m0, seed.s0)];
    for _ in 0..spec.steps {
        let k = back.len();
        let (m, s) = back[k - 1];
        let prev = back[k - 2].0;
        back.push(meridian_step(&m, &s, &par, Some(&prev), tol)?);
    }
    let mut pts: Vec<(MVector<T>, MVector<T>)> = back[2..].iter().rev().copied().collect();
    pts.extend(fwd);
    let m1 = -(spec.steps as i32);
    let meridian = Meridian {
        m1,
        points: pts.iter().map(|p| p.0).collect(),
        spheres: pts.iter().map(|p| p.1).collect(),
        params: par,
    };
    let sign = |m: &MVector<T>| m.inner(&q) > T::zero();
    let crosses_infinity = meridian.points.windows(2).any(|w| sign(&w[0]) != sign(&w[1]));
    let moutard = revolution_lift_meridian(m1, &meridian.points, &spec.profile, tol)?;
    let lifts = moutard.lifts;
    verify_isothermic(&lifts, tol.scaled(T::lit(100.0)))?;
    let a = moutard.a.map(|x| x * alpha);
    let net = IsothermicNet::new(lifts, a, tol.scaled(T::lit(100.0)))?;
    let z = net.lifts.map(|v, f| meridian.spheres[(v.m - m1) as usize] - *f * (alpha * q.inner(f)));
    let quantity = ConservedQuantity::linear(&z, q);
    let report = pcq_verify(&net, &quantity, tol.scaled(T::lit(10.0)));
    if !report.pass {
        return Err(Error::NotConserved { vertex: report.failing[0].0, residual: report.max.as_f64() });
    }
    normalize_top(&quantity, tol)?;
    let (h, kappa) = mean_curvature_data(&quantity, tol)?;
    Ok(RevolutionCmc {
        net,
        quantity,
        meridian,
        mean_curvature: h,
        kappa,
        conservation_residual: report.max,
        crosses_infinity,
    })
}
