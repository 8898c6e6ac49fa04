//! Darboux and Bäcklund transforms, Bianchi permutability, complementary nets,
//! reconstruction from parallel sections and the Calapso action on conserved
//! quantities.

use crate::conserved::{pcq_verify, ConservedQuantity};
use crate::error::{Error, Result};
use crate::grid::{Vertex, VertexField};
use crate::isothermic::{connection_edge, CalapsoFrame, IsothermicNet};
use crate::minkowski::{cross_ratio_real, orthonormal_complement, parallel_residual, Isometry, MVector};
use crate::poly::{MPoly, Poly};
use crate::scalar::{Real, Tol};

/// A `Gamma^mu`-parallel lightlike section of a net.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxTransform<T> {
    pub mu: T,
    pub fhat: VertexField<MVector<T>>,
}

/// Residuals of the two defining conditions of a Darboux transform.
#[derive(Debug, Clone)]
pub struct DarbouxReport<T> {
    /// Largest relative defect of `Fhat_i = Gamma^mu_ij Fhat_j`.
    pub parallel: T,
    /// Largest `|cr(F_i, F_j, Fhat_j, Fhat_i) - a_ij mu|`.
    pub cross_ratio: T,
    pub pass: bool,
}

impl<T: Real> DarbouxTransform<T> {
    /// The transformed net, isothermic with the same factorizing function.
    pub fn net(&self, net: &IsothermicNet<T>, tol: Tol<T>) -> Result<IsothermicNet<T>> {
        IsothermicNet::new(self.fhat.clone(), net.a.clone(), tol)
    }

    pub fn check(&self, net: &IsothermicNet<T>, tol: Tol<T>) -> Result<DarbouxReport<T>> {
        let mut parallel = T::zero();
        let mut cross = T::zero();
        for (i, j) in net.domain().edges() {
            let g = connection_edge(net, self.mu, i, j, tol)?;
            let moved = g.apply(&self.fhat[j]);
            let scale = self.fhat[i].euclid_norm().max(moved.euclid_norm());
            parallel = parallel.max((moved - self.fhat[i]).euclid_norm() / scale);
            let cr = cross_ratio_real([net.lift(i), net.lift(j), &self.fhat[j], &self.fhat[i]], tol)?;
            let target = net.a.at(i, j) * self.mu;
            cross = cross.max((cr - target).abs() / (T::one() + target.abs()));
        }
        let lim = tol.rel * T::lit(100.0);
        Ok(DarbouxReport { parallel, cross_ratio: cross, pass: parallel <= lim && cross <= lim })
    }
}

/// Propagates a lightlike start vector at `base` by the connection at `mu`.
pub fn darboux_propagate<T: Real>(
    net: &IsothermicNet<T>,
    mu: T,
    fhat0: MVector<T>,
    base: Vertex,
    tol: Tol<T>,
) -> Result<DarbouxTransform<T>> {
    if !fhat0.is_lightlike(tol) {
        return Err(Error::DegenerateStart("start vector is not lightlike".into()));
    }
    if parallel_residual(&fhat0, net.lift(base)) <= tol.rel.sqrt() {
        return Err(Error::DegenerateStart("start vector is proportional to the lift at the basepoint".into()));
    }
    let d = net.domain();
    let mut fhat = VertexField::from_fn(d, |_| MVector::zero());
    fhat[base] = fhat0;
    for (p, c) in d.spanning_tree(base)? {
        fhat[c] = connection_edge(net, mu, c, p, tol)?.apply(&fhat[p]);
    }
    let dt = DarbouxTransform { mu, fhat };
    let report = dt.check(net, tol)?;
    if !report.pass {
        return Err(Error::NotFlat(report.parallel.max(report.cross_ratio).as_f64()));
    }
    dt.net(net, tol.scaled(T::lit(100.0)))?;
    Ok(dt)
}

/// A lightlike vector orthogonal to `V`, on the circle
/// `e0 + ((1-s^2)/(1+s^2)) e1 + (2s/(1+s^2)) e2` of the null cone of `V^perp`.
///
/// `e0` is the timelike and `e1, e2, e3` the spacelike members of a fixed
/// orthonormal basis of `V^perp`. A lightlike `V` is returned unchanged.
pub fn backlund_start_vector<T: Real>(v: &MVector<T>, s: T, tol: Tol<T>) -> Result<MVector<T>> {
    let basis = backlund_basis(v, tol)?;
    let Some(basis) = basis else { return Ok(*v) };
    let d = T::one() + s * s;
    Ok(basis[0] + basis[1] * ((T::one() - s * s) / d) + basis[2] * (T::lit(2.0) * s / d))
}

/// A lightlike vector orthogonal to `V` in the direction `u` of the spacelike
/// part of the basis, covering the whole sphere of null directions in `V^perp`.
pub fn backlund_start_direction<T: Real>(v: &MVector<T>, u: [T; 3], tol: Tol<T>) -> Result<MVector<T>> {
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    if n == T::zero() {
        return Err(Error::DegenerateStart("zero direction".into()));
    }
    let Some(b) = backlund_basis(v, tol)? else { return Ok(*v) };
    Ok(b[0] + b[1] * (u[0] / n) + b[2] * (u[1] / n) + b[3] * (u[2] / n))
}

fn backlund_basis<T: Real>(v: &MVector<T>, tol: Tol<T>) -> Result<Option<Vec<MVector<T>>>> {
    let e = v.euclid_norm();
    if e == T::zero() {
        return Err(Error::DegenerateStart("P(mu) vanishes".into()));
    }
    let vv = v.norm_sq();
    if tol.small(vv, e * e) {
        return Ok(None);
    }
    if vv < T::zero() {
        return Err(Error::EmptyConic);
    }
    let b = orthonormal_complement(v);
    if b.len() != 4 || b[0].norm_sq() >= T::zero() {
        return Err(Error::EmptyConic);
    }
    Ok(Some(b))
}

/// Bäcklund start at the basepoint: a lightlike `X` with `<P(mu), X> = 0`.
pub fn backlund_init<T: Real>(
    net: &IsothermicNet<T>,
    p: &ConservedQuantity<T>,
    mu: T,
    s: T,
    base: Vertex,
    tol: Tol<T>,
) -> Result<MVector<T>> {
    let x = backlund_start_vector(&p.at(base).eval(mu), s, tol)?;
    if parallel_residual(&x, net.lift(base)) <= tol.rel.sqrt() {
        return Err(Error::DegenerateStart("start lies on the net".into()));
    }
    Ok(x)
}

/// `Gamma^{1 - lambda/mu}_{p,p'} X(lambda)` as a polynomial; requires
/// `<X(mu), P> = 0` so that the division by `lambda - mu` is exact.
fn gamma_poly<T: Real>(
    x: &MPoly<T>,
    p: &MVector<T>,
    pp: &MVector<T>,
    mu: T,
    tol: Tol<T>,
) -> Result<MPoly<T>> {
    let g = p.inner(pp);
    let xp = x.inner_vec(p);
    let (quot, rem) = xp.div_linear(mu);
    let scale = x.max_norm() * p.euclid_norm();
    if !tol.small(rem, scale) {
        return Err(Error::NotBacklund((rem.abs() / scale).as_f64()));
    }
    let lam = Poly::new(vec![T::zero(), T::one()]);
    let t1 = MPoly::from_poly_times(&(&lam * &x.inner_vec(pp)), p).scale(-T::one() / (mu * g));
    let t2 = MPoly::from_poly_times(&(&lam * &quot), pp).scale(-T::one() / g);
    Ok(&(x + &t1) + &t2)
}

/// `(lambda - mu) Gamma^{1-lambda/mu}_{fhat,f} P(lambda)`, a conserved quantity
/// of the Darboux transform of degree one higher.
pub fn pcq_darboux<T: Real>(
    p: &ConservedQuantity<T>,
    net: &IsothermicNet<T>,
    dt: &DarbouxTransform<T>,
    tol: Tol<T>,
) -> Result<ConservedQuantity<T>> {
    let mu = dt.mu;
    let lam = Poly::new(vec![T::zero(), T::one()]);
    let lm = Poly::new(vec![-mu, T::one()]);
    let deg = p.degree(tol).unwrap_or(0);
    let values = VertexField::try_from_fn(p.domain(), |v| {
        let (f, fh) = (net.lift(v), &dt.fhat[v]);
        let x = p.at(v);
        let g = f.inner(fh);
        let c1 = (&lam * &lm).scale(T::one() / (mu * g));
        let t1 = MPoly::from_poly_times(&(&c1 * &x.inner_vec(f)), fh);
        let t2 = MPoly::from_poly_times(&(&lam * &x.inner_vec(fh)).scale(T::one() / g), f);
        let out = &(&x.mul_poly(&lm) - &t1) - &t2;
        // The lambda^{N+2} coefficient is -<Z,F> Fhat / (mu g), zero by incidence.
        let over = out.coeff(deg + 2).euclid_norm();
        if !tol.scaled(T::lit(10.0)).small(over, out.max_norm()) {
            return Err(Error::NotPolynomial((over / out.max_norm()).as_f64()));
        }
        Ok(MPoly::new(out.coeffs.into_iter().take(deg + 2).collect()))
    })?;
    Ok(ConservedQuantity::new(values))
}

/// `Gamma^{1-lambda/mu}_{fhat,f} P(lambda)` for a Bäcklund transform, same degree.
pub fn pcq_backlund<T: Real>(
    p: &ConservedQuantity<T>,
    net: &IsothermicNet<T>,
    bt: &DarbouxTransform<T>,
    tol: Tol<T>,
) -> Result<ConservedQuantity<T>> {
    let values =
        VertexField::try_from_fn(p.domain(), |v| gamma_poly(p.at(v), &bt.fhat[v], net.lift(v), bt.mu, tol))?;
    Ok(ConservedQuantity::new(values))
}

/// The sphere congruence enveloped by both a net and its Bäcklund transform,
/// computed both ways. Returns the spheres and the largest relative disagreement.
pub fn ribaucour_sphere<T: Real>(
    net: &IsothermicNet<T>,
    p: &ConservedQuantity<T>,
    bt: &DarbouxTransform<T>,
    phat: &ConservedQuantity<T>,
    tol: Tol<T>,
) -> (VertexField<MVector<T>>, T) {
    let n = p.degree(tol).unwrap_or(0).max(1);
    let mut worst = T::zero();
    let s = p.values.map(|v, x| {
        let (f, fh) = (net.lift(v), &bt.fhat[v]);
        let xh = phat.at(v);
        let mg = bt.mu * f.inner(fh);
        let s1 = x.coeff(n) + *f * (xh.coeff(n - 1).inner(fh) / mg);
        let s2 = xh.coeff(n) + *fh * (x.coeff(n - 1).inner(f) / mg);
        let scale = s1.euclid_norm().max(s2.euclid_norm()).max(T::one());
        worst = worst.max((s1 - s2).euclid_norm() / scale);
        s1
    });
    (s, worst)
}

/// Fourth net of a Bianchi quadrilateral, with its conserved quantity when the
/// inputs are Bäcklund transforms.
#[derive(Debug, Clone)]
pub struct BianchiOutcome<T> {
    pub f12: VertexField<MVector<T>>,
    /// Cross-ratio defects of `f12` as a Darboux transform of `fhat1` (parameter
    /// `mu2`) and of `fhat2` (parameter `mu1`).
    pub cross_ratio: (T, T),
    pub quantity: Option<ConservedQuantity<T>>,
    /// Disagreement between the two routes to the conserved quantity.
    pub route_gap: Option<T>,
}

/// `f12 = Gamma^{mu2/mu1}_{fhat1, fhat2} f`.
pub fn bianchi<T: Real>(
    net: &IsothermicNet<T>,
    d1: &DarbouxTransform<T>,
    d2: &DarbouxTransform<T>,
    p: Option<&ConservedQuantity<T>>,
    tol: Tol<T>,
) -> Result<BianchiOutcome<T>> {
    let (mu1, mu2) = (d1.mu, d2.mu);
    if tol.close(mu1, mu2) {
        return Err(Error::ConstraintViolated("Bianchi permutability needs distinct parameters".into()));
    }
    let d = net.domain();
    let mut f12 = VertexField::from_fn(d, |_| MVector::zero());
    for v in d.vertices() {
        let (a, b) = (&d1.fhat[v], &d2.fhat[v]);
        if parallel_residual(a, b) <= tol.rel.sqrt() {
            return Err(Error::CoincidentTransforms(v));
        }
        f12[v] = Isometry::gamma(mu2 / mu1, a, b, tol)?.apply(net.lift(v));
    }
    let mut cr1 = T::zero();
    let mut cr2 = T::zero();
    for (i, j) in d.edges() {
        let a = net.a.at(i, j);
        let c1 = cross_ratio_real([&d1.fhat[i], &d1.fhat[j], &f12[j], &f12[i]], tol)?;
        let c2 = cross_ratio_real([&d2.fhat[i], &d2.fhat[j], &f12[j], &f12[i]], tol)?;
        cr1 = cr1.max((c1 - a * mu2).abs() / (T::one() + (a * mu2).abs()));
        cr2 = cr2.max((c2 - a * mu1).abs() / (T::one() + (a * mu1).abs()));
    }
    let (quantity, route_gap) = match p {
        None => (None, None),
        Some(p) => {
            let p1 = pcq_backlund(p, net, d1, tol)?;
            let p2 = pcq_backlund(p, net, d2, tol)?;
            let r1 = VertexField::try_from_fn(d, |v| gamma_poly(p1.at(v), &f12[v], &d1.fhat[v], mu2, tol))?;
            let r2 = VertexField::try_from_fn(d, |v| gamma_poly(p2.at(v), &f12[v], &d2.fhat[v], mu1, tol))?;
            let (r1, r2) = (ConservedQuantity::new(r1), ConservedQuantity::new(r2));
            let gap = r1.max_diff(&r2) / r1.max_norm().max(T::one());
            (Some(r1), Some(gap))
        }
    };
    Ok(BianchiOutcome { f12, cross_ratio: (cr1, cr2), quantity, route_gap })
}

/// A real root `mu` of `|P(lambda)|^2` and the section `P(mu)`.
#[derive(Debug, Clone)]
pub struct Complementary<T> {
    pub mu: T,
    pub multiplicity: usize,
    pub fhat: VertexField<MVector<T>>,
}

/// Complementary nets: the sections `P(mu)` at the real roots of `|P(lambda)|^2`.
pub fn complementary<T: Real>(p: &ConservedQuantity<T>, tol: Tol<T>) -> Vec<Complementary<T>> {
    let d = p.domain();
    let n = p.at(Vertex::new(d.m1, d.n1)).norm_sq();
    n.real_roots(tol, T::lit(1e-7), T::lit(1e-6))
        .into_iter()
        .map(|(mu, multiplicity)| Complementary { mu, multiplicity, fhat: p.eval(mu) })
        .collect()
}

/// `P(lambda) = sum_n alpha_n Fhat^n prod_{m != n} (lambda - mu_m)` from
/// `Gamma^{mu_n}`-parallel sections.
pub fn pcq_from_parallel_sections<T: Real>(
    net: &IsothermicNet<T>,
    sections: &[(T, VertexField<MVector<T>>)],
    alphas: &[T],
    tol: Tol<T>,
) -> Result<ConservedQuantity<T>> {
    if sections.len() != alphas.len() || sections.is_empty() {
        return Err(Error::DimensionMismatch("one coefficient per section".into()));
    }
    for (k, (mu, _)) in sections.iter().enumerate() {
        if sections[..k].iter().any(|(m, _)| tol.close(*m, *mu)) {
            return Err(Error::ConstraintViolated("section parameters must be distinct".into()));
        }
    }
    let d = net.domain();
    for (mu, s) in sections {
        for (i, j) in d.edges() {
            let moved = connection_edge(net, *mu, i, j, tol)?.apply(&s[j]);
            let scale = s[i].euclid_norm().max(moved.euclid_norm());
            let r = (moved - s[i]).euclid_norm();
            if !tol.scaled(T::lit(100.0)).small(r, scale) {
                return Err(Error::NotParallel((r / scale).as_f64()));
            }
        }
    }
    let mut worst = T::zero();
    for v in d.vertices() {
        let z: MVector<T> = sections.iter().zip(alphas).map(|((_, s), a)| s[v] * *a).sum();
        let f = net.lift(v);
        worst = worst.max(z.inner(f).abs() / (z.euclid_norm() * f.euclid_norm()).max(T::min_positive_value()));
    }
    if worst > tol.rel * T::lit(100.0) {
        return Err(Error::IncidenceFailure(worst.as_f64()));
    }
    let weights: Vec<Poly<T>> = (0..sections.len())
        .map(|n| {
            sections
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != n)
                .fold(Poly::constant(alphas[n]), |acc, (_, (mu, _))| &acc * &Poly::new(vec![-*mu, T::one()]))
        })
        .collect();
    let values = VertexField::from_fn(d, |v| {
        sections
            .iter()
            .zip(&weights)
            .fold(MPoly::zero(), |acc, ((_, s), w)| &acc + &MPoly::from_poly_times(w, &s[v]))
    });
    let cq = ConservedQuantity::new(values);
    let report = pcq_verify(net, &cq, tol.scaled(T::lit(100.0)));
    if !report.pass {
        return Err(Error::NotConserved { vertex: report.failing[0].0, residual: report.max.as_f64() });
    }
    Ok(cq)
}

/// `P^mu(lambda) = T^mu P(mu + lambda)`, a conserved quantity of the Calapso transform.
pub fn calapso_pcq<T: Real>(p: &ConservedQuantity<T>, frame: &CalapsoFrame<T>) -> ConservedQuantity<T> {
    ConservedQuantity::new(p.values.map(|v, x| x.shift(frame.mu).apply(&frame.frames[v])))
}

/// Builds a net row by row: row `m + 1` is the Darboux transform of row `m`
/// with parameter `mus[m]` and start `starts[m]` at the first vertex of the row.
///
/// The result is isothermic with `a = 1/mu_m` on `m`-edges and `v` on `n`-edges.
pub fn darboux_stack<T: Real>(
    curve: &[MVector<T>],
    v: &[T],
    mus: &[T],
    starts: &[MVector<T>],
    tol: Tol<T>,
) -> Result<IsothermicNet<T>> {
    let cols = curve.len();
    if v.len() + 1 != cols || mus.len() != starts.len() || cols < 2 {
        return Err(Error::DimensionMismatch("darboux_stack input lengths".into()));
    }
    let rows = mus.len() + 1;
    let domain = crate::grid::GridDomain::sized(rows, cols);
    let u: Vec<T> = mus.iter().map(|m| T::one() / *m).collect();
    let a = crate::grid::EdgeFunction::new(domain, u, v.to_vec())?;
    let mut lifts = VertexField::from_fn(domain, |p| if p.m == 0 { curve[p.n as usize] } else { MVector::zero() });
    for (m, (mu, start)) in mus.iter().zip(starts).enumerate() {
        let m = m as i32;
        let row = domain.sub(m, m, 0, cols as i32 - 1)?;
        let curve_net = IsothermicNet { lifts: lifts.restrict(row)?, a: a.restrict(row) };
        let dt = darboux_propagate(&curve_net, *mu, *start, Vertex::new(m, 0), tol)?;
        for n in 0..cols as i32 {
            lifts[Vertex::new(m + 1, n)] = dt.fhat[Vertex::new(m, n)];
        }
    }
    IsothermicNet::new(lifts, a, tol.scaled(T::lit(100.0)))
}
