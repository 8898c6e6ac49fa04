//! Polynomial conserved quantities: verification, propagation, algebra and
//! the linear solvers.

use crate::error::{Error, Result};
use crate::grid::{GridDomain, Vertex, VertexField};
use crate::isothermic::IsothermicNet;
use crate::linalg;
use crate::minkowski::{hyperplane_normal, MVector};
use crate::poly::{MPoly, Poly};
use crate::scalar::{Real, Tol};

/// A vertex field of R^{4,1}-valued polynomials `P(lambda)`.
///
/// Conservation is a property relative to a net; it is checked by
/// [`pcq_verify`] and not stored here.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedQuantity<T> {
    pub values: VertexField<MPoly<T>>,
}

impl<T: Real> ConservedQuantity<T> {
    pub fn new(values: VertexField<MPoly<T>>) -> Self {
        ConservedQuantity { values }
    }

    /// Linear quantity `lambda Z + Q` with a constant `Q`.
    pub fn linear(z: &VertexField<MVector<T>>, q: MVector<T>) -> Self {
        ConservedQuantity { values: z.map(|_, z| MPoly::linear(*z, q)) }
    }

    pub fn domain(&self) -> GridDomain {
        self.values.domain()
    }

    pub fn at(&self, v: Vertex) -> &MPoly<T> {
        &self.values[v]
    }

    /// Largest degree over all vertices.
    pub fn degree(&self, tol: Tol<T>) -> Option<usize> {
        self.values.values().iter().filter_map(|p| p.degree(tol)).max()
    }

    /// Coefficient of `lambda^k` as a vertex field.
    pub fn coeff_field(&self, k: usize) -> VertexField<MVector<T>> {
        self.values.map(|_, p| p.coeff(k))
    }

    /// Top coefficient field `Z` for the common degree.
    pub fn top(&self, tol: Tol<T>) -> VertexField<MVector<T>> {
        self.coeff_field(self.degree(tol).unwrap_or(0))
    }

    /// Constant coefficient at a vertex; constant over the net for a conserved quantity.
    pub fn constant(&self, v: Vertex) -> MVector<T> {
        self.values[v].coeff(0)
    }

    pub fn eval(&self, lambda: T) -> VertexField<MVector<T>> {
        self.values.map(|_, p| p.eval(lambda))
    }

    pub fn scale(&self, s: T) -> Self {
        ConservedQuantity { values: self.values.map(|_, p| p.scale(s)) }
    }

    /// Multiplies every value by a real polynomial.
    pub fn mul_poly(&self, p: &Poly<T>) -> Self {
        ConservedQuantity { values: self.values.map(|_, x| x.mul_poly(p)) }
    }

    pub fn add(&self, o: &Self) -> Self {
        ConservedQuantity { values: self.values.map(|v, p| p + &o.values[v]) }
    }

    pub fn max_diff(&self, o: &Self) -> T {
        self.values.iter().fold(T::zero(), |m, (v, p)| m.max(p.max_diff(&o.values[v])))
    }

    pub fn max_norm(&self) -> T {
        self.values.values().iter().fold(T::zero(), |m, p| m.max(p.max_norm()))
    }

    pub fn restrict(&self, sub: GridDomain) -> Result<Self> {
        Ok(ConservedQuantity { values: self.values.restrict(sub)? })
    }
}

/// Per-edge residuals of the conservation equation.
#[derive(Debug, Clone)]
pub struct PcqReport<T> {
    /// `((i, j), relative residual)` for every undirected edge.
    pub edges: Vec<((Vertex, Vertex), T)>,
    pub max: T,
    pub failing: Vec<(Vertex, Vertex)>,
    pub pass: bool,
}

/// `(lambda a / <F_i, F_j>) (<P_j, F_j> F_i - <P_i, F_i> F_j)`, the right side
/// of the conservation equation on the edge `i -> j`.
fn edge_increment<T: Real>(net: &IsothermicNet<T>, p: &ConservedQuantity<T>, i: Vertex, j: Vertex) -> MPoly<T> {
    let (fi, fj) = (net.lift(i), net.lift(j));
    let g = fi.inner(fj);
    let a = net.a.at(i, j);
    let pj = p.at(j).inner_vec(fj);
    let pi = p.at(i).inner_vec(fi);
    let body = &MPoly::from_poly_times(&pj, fi) - &MPoly::from_poly_times(&pi, fj);
    body.mul_poly(&Poly::new(vec![T::zero(), a / g]))
}

/// Checks `dP_ij = (lambda a_ij / <F_i,F_j>) (<P_j,F_j> F_i - <P_i,F_i> F_j)` on every edge.
///
/// Residuals are relative to the largest coefficient of `P` on the edge.
pub fn pcq_verify<T: Real>(net: &IsothermicNet<T>, p: &ConservedQuantity<T>, tol: Tol<T>) -> PcqReport<T> {
    let mut edges = Vec::new();
    let mut failing = Vec::new();
    let mut max = T::zero();
    for (i, j) in net.domain().edges() {
        let d = p.at(j) - p.at(i);
        let r = d.max_diff(&edge_increment(net, p, i, j));
        let scale = p.at(i).max_norm().max(p.at(j).max_norm());
        let rel = if scale > T::zero() { r / scale } else { r };
        if !tol.small(r, scale) {
            failing.push((i, j));
        }
        max = max.max(rel);
        edges.push(((i, j), rel));
    }
    let pass = failing.is_empty();
    PcqReport { edges, max, failing, pass }
}

/// Transports a polynomial from `j` to the adjacent vertex `i` by the
/// connection, `P_i = Gamma^lambda_ij P_j`, written without denominators in `lambda`.
///
/// `p_i = <P_j, F_i> / (1 - lambda a_ij)` must be an exact polynomial division.
pub fn pcq_transport<T: Real>(
    net: &IsothermicNet<T>,
    pj: &MPoly<T>,
    j: Vertex,
    i: Vertex,
    tol: Tol<T>,
) -> Result<MPoly<T>> {
    let (fi, fj) = (net.lift(i), net.lift(j));
    let a = net.a.get(i, j)?;
    let g = fi.inner(fj);
    let num = pj.inner_vec(fi);
    let (pi, rem) = num.div_one_minus(a);
    if !tol.small(rem, T::one() + num.max_abs()) {
        return Err(Error::NotConserved { vertex: i, residual: rem.abs().as_f64() });
    }
    let pjj = pj.inner_vec(fj);
    let body = &MPoly::from_poly_times(&pjj, fi) - &MPoly::from_poly_times(&pi, fj);
    Ok(pj - &body.mul_poly(&Poly::new(vec![T::zero(), a / g])))
}

/// Extends `P` from the basepoint to the whole net and verifies the result.
pub fn pcq_propagate<T: Real>(
    net: &IsothermicNet<T>,
    p0: &MPoly<T>,
    base: Vertex,
    tol: Tol<T>,
) -> Result<ConservedQuantity<T>> {
    let d = net.domain();
    let mut values = VertexField::from_fn(d, |_| MPoly::zero());
    values[base] = p0.clone();
    for (parent, child) in d.spanning_tree(base)? {
        values[child] = pcq_transport(net, &values[parent], parent, child, tol)?;
    }
    let cq = ConservedQuantity { values };
    let deg0 = p0.degree(tol);
    for (v, p) in cq.values.iter() {
        if p.degree(tol) > deg0 {
            return Err(Error::NotConserved { vertex: v, residual: p.coeff(p.coeffs.len() - 1).euclid_norm().as_f64() });
        }
    }
    let report = pcq_verify(net, &cq, tol.scaled(T::lit(10.0)));
    if let Some(&(i, _)) = report.failing.first() {
        return Err(Error::NotConserved { vertex: i, residual: report.max.as_f64() });
    }
    Ok(cq)
}

/// `P(lambda) / (lambda - mu)` for a quantity vanishing at `mu`.
pub fn degree_reduce<T: Real>(p: &ConservedQuantity<T>, mu: T, tol: Tol<T>) -> Result<ConservedQuantity<T>> {
    let mut out = Vec::with_capacity(p.domain().len());
    for (_, x) in p.values.iter() {
        let (q, r) = x.div_linear(mu);
        if !tol.small(r.euclid_norm(), x.max_norm()) {
            return Err(Error::NonzeroRoot(r.euclid_norm().as_f64()));
        }
        out.push(q);
    }
    Ok(ConservedQuantity { values: VertexField::from_vec(p.domain(), out)? })
}

/// `|P(lambda)|^2` together with its spread over the vertices.
#[derive(Debug, Clone)]
pub struct NormReport<T> {
    pub poly: Poly<T>,
    /// Largest coefficient deviation from the basepoint polynomial.
    pub spread: T,
    /// For linear quantities, the spread of `<Z, Q>` over the vertices.
    pub zq_spread: Option<T>,
}

pub fn norm_poly<T: Real>(p: &ConservedQuantity<T>, tol: Tol<T>) -> NormReport<T> {
    let d = p.domain();
    let base = Vertex::new(d.m1, d.n1);
    let poly = p.at(base).norm_sq();
    let mut spread = T::zero();
    for (_, x) in p.values.iter() {
        let n = x.norm_sq();
        let len = n.coeffs.len().max(poly.coeffs.len());
        for k in 0..len {
            let a = n.coeffs.get(k).copied().unwrap_or(T::zero());
            let b = poly.coeffs.get(k).copied().unwrap_or(T::zero());
            spread = spread.max((a - b).abs());
        }
    }
    let zq_spread = (p.degree(tol) == Some(1)).then(|| {
        let zq = |x: &MPoly<T>| x.coeff(1).inner(&x.coeff(0));
        let z0 = zq(p.at(base));
        p.values.values().iter().fold(T::zero(), |m, x| m.max((zq(x) - z0).abs()))
    });
    NormReport { poly, spread, zq_spread }
}

/// `P(alpha lambda)`, a conserved quantity for the factorizing function `alpha a`.
pub fn reparametrize<T: Real>(
    net: &IsothermicNet<T>,
    p: &ConservedQuantity<T>,
    alpha: T,
) -> (IsothermicNet<T>, ConservedQuantity<T>) {
    let new_net = IsothermicNet { lifts: net.lifts.clone(), a: net.a.map(|x| x * alpha) };
    (new_net, ConservedQuantity { values: p.values.map(|_, x| x.scale_arg(alpha)) })
}

/// Scales `P` so that its top coefficient has unit length.
pub fn normalize_top<T: Real>(p: &ConservedQuantity<T>, tol: Tol<T>) -> Result<ConservedQuantity<T>> {
    let d = p.domain();
    let z = p.top(tol)[Vertex::new(d.m1, d.n1)];
    let e = z.euclid_norm();
    let n2 = z.norm_sq();
    if n2 <= T::zero() || tol.small(n2, e * e) {
        return Err(Error::DegenerateTop);
    }
    Ok(p.scale(T::one() / n2.sqrt()))
}

/// Mean curvature `H = -<Z, Q>` and curvature `kappa = -|Q|^2` of a normalized
/// linear quantity.
pub fn mean_curvature_data<T: Real>(p: &ConservedQuantity<T>, tol: Tol<T>) -> Result<(T, T)> {
    if p.degree(tol) != Some(1) {
        return Err(Error::NotNormalizedLinear(format!("degree {:?}", p.degree(tol))));
    }
    let d = p.domain();
    let base = p.at(Vertex::new(d.m1, d.n1));
    let (z, q) = (base.coeff(1), base.coeff(0));
    if !tol.scaled(T::lit(10.0)).close(z.norm_sq(), T::one()) {
        return Err(Error::NotNormalizedLinear(format!("|Z|^2 = {}", z.norm_sq())));
    }
    Ok((-z.inner(&q), -q.norm_sq()))
}

/// Largest disagreement between the two edge expressions of the curvature sphere,
/// `Z_i + a <Y_j,F_j>/<F_i,F_j> F_i` and `Z_j + a <Y_i,F_i>/<F_i,F_j> F_j`,
/// where `Y` is the coefficient below the top one.
pub fn curvature_sphere_residual<T: Real>(net: &IsothermicNet<T>, p: &ConservedQuantity<T>, tol: Tol<T>) -> T {
    let n = p.degree(tol).unwrap_or(0);
    if n == 0 {
        return T::zero();
    }
    let z = p.coeff_field(n);
    let y = p.coeff_field(n - 1);
    let mut worst = T::zero();
    for (i, j) in net.domain().edges() {
        let (fi, fj) = (net.lift(i), net.lift(j));
        let a = net.a.at(i, j);
        let g = fi.inner(fj);
        let s1 = z[i] + *fi * (a * y[j].inner(fj) / g);
        let s2 = z[j] + *fj * (a * y[i].inner(fi) / g);
        let scale = s1.euclid_norm().max(s2.euclid_norm()).max(T::one());
        worst = worst.max((s1 - s2).euclid_norm() / scale);
    }
    worst
}

/// Type of a net relative to the supplied candidate quantities.
#[derive(Debug, Clone)]
pub struct TypeReport<T> {
    /// Unit normal of the hyperplane containing every lift (type 0).
    pub sphere: Option<MVector<T>>,
    /// Smallest degree among verified normalizable candidates, 0 for spherical nets.
    pub min_degree: Option<usize>,
    /// A verified candidate with lightlike top coefficient was supplied.
    pub degenerate_present: bool,
    /// Number of candidates that passed verification.
    pub verified: usize,
}

pub fn classify_type<T: Real>(net: &IsothermicNet<T>, candidates: &[ConservedQuantity<T>], tol: Tol<T>) -> TypeReport<T> {
    if let Some(n) = hyperplane_normal(net.lifts.values(), tol) {
        return TypeReport { sphere: Some(n), min_degree: Some(0), degenerate_present: false, verified: 0 };
    }
    let mut min_degree = None;
    let mut degenerate_present = false;
    let mut verified = 0;
    for c in candidates {
        if !pcq_verify(net, c, tol.scaled(T::lit(10.0))).pass {
            continue;
        }
        verified += 1;
        match normalize_top(c, tol) {
            Ok(_) => {
                let d = c.degree(tol).unwrap_or(0);
                min_degree = Some(min_degree.map_or(d, |m: usize| m.min(d)));
            }
            Err(_) => degenerate_present = true,
        }
    }
    TypeReport { sphere: None, min_degree, degenerate_present, verified }
}

/// Transport of `Z` along an edge for a fixed `Q`:
/// `Z_j - Z_i = (a / <F_i,F_j>) (<Q,F_j> F_i - <Q,F_i> F_j)`.
fn z_increment<T: Real>(net: &IsothermicNet<T>, q: &MVector<T>, i: Vertex, j: Vertex) -> MVector<T> {
    let (fi, fj) = (net.lift(i), net.lift(j));
    let a = net.a.at(i, j);
    (*fi * q.inner(fj) - *fj * q.inner(fi)) * (a / fi.inner(fj))
}

/// Offsets `D_v` with `Z_v = Z_c + D_v`, integrated along a spanning tree from `c`.
fn z_offsets<T: Real>(net: &IsothermicNet<T>, q: &MVector<T>, c: Vertex) -> Result<VertexField<MVector<T>>> {
    let d = net.domain();
    let mut off = VertexField::from_fn(d, |_| MVector::zero());
    for (p, ch) in d.spanning_tree(c)? {
        off[ch] = off[p] + z_increment(net, q, p, ch);
    }
    Ok(off)
}

/// The unique linear conserved quantity with constant term `Q` on a 3x3 net.
pub fn lcq_solve_3x3<T: Real>(net: &IsothermicNet<T>, q: MVector<T>, tol: Tol<T>) -> Result<ConservedQuantity<T>> {
    let d = net.domain();
    if d.rows() != 3 || d.cols() != 3 {
        return Err(Error::DimensionMismatch(format!("expected a 3x3 net, got {}x{}", d.rows(), d.cols())));
    }
    let c = Vertex::new(d.m1 + 1, d.n1 + 1);
    let mut rows = vec![net.lift(c).flip_time().0.to_vec()];
    let mut rhs = vec![T::zero()];
    for nb in d.neighbours(c) {
        let f = net.lift(nb);
        rows.push(f.flip_time().0.to_vec());
        rhs.push(-net.a.at(c, nb) * q.inner(f));
    }
    // Balance rows; the solve is invariant under row scaling.
    for (r, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        let n = r.iter().map(|x| *x * *x).sum::<T>().sqrt();
        r.iter_mut().for_each(|x| *x /= n);
        *b /= n;
    }
    let zc = linalg::solve_dense(&rows, &rhs, tol).map_err(|_| Error::SphericalStar)?;
    let zc = MVector([zc[0], zc[1], zc[2], zc[3], zc[4]]);
    let off = z_offsets(net, &q, c)?;
    Ok(ConservedQuantity::linear(&off.map(|_, o| zc + *o), q))
}

/// Outcome of the least-squares linear solve on a larger net.
#[derive(Debug, Clone)]
pub struct LcqGridReport<T> {
    pub quantity: ConservedQuantity<T>,
    /// Centre of the extended star the solve used.
    pub center: Vertex,
    /// Largest relative incidence residual `|<Z,F>| / (|Z| |F|)`.
    pub max_incidence: T,
    pub worst_vertex: Vertex,
    pub conservation: PcqReport<T>,
    pub pass: bool,
}

/// Solves for `Z` on the extended vertex star (centre, axis neighbours and the
/// vertices two steps out) in the least-squares sense, propagates it, and
/// checks incidence and conservation everywhere. A failing report means the
/// net admits no linear conserved quantity with this `Q`.
pub fn lcq_solve_grid<T: Real>(
    net: &IsothermicNet<T>,
    q: MVector<T>,
    center: Option<Vertex>,
    tol: Tol<T>,
) -> Result<LcqGridReport<T>> {
    let d = net.domain();
    if d.rows() < 3 || d.cols() < 3 {
        return Err(Error::DimensionMismatch("lcq_solve_grid needs at least a 3x3 net".into()));
    }
    let c = center.unwrap_or_else(|| Vertex::new((d.m1 + 2).min(d.m2 - 1), (d.n1 + 2).min(d.n2 - 1)));
    if !d.is_interior(c) {
        return Err(Error::OutOfDomain(c));
    }
    let off = z_offsets(net, &q, c)?;
    let star = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (2, 0), (-2, 0), (0, 2), (0, -2)];
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (dm, dn) in star {
        let v = c.shift(dm, dn);
        if !d.contains(v) {
            continue;
        }
        let f = net.lift(v);
        let n = f.euclid_norm();
        rows.push(f.flip_time().0.iter().map(|x| *x / n).collect::<Vec<T>>());
        rhs.push(-off[v].inner(f) / n);
    }
    let zc = linalg::least_squares(&rows, &rhs, tol).map_err(|_| Error::SphericalStar)?;
    let zc = MVector([zc[0], zc[1], zc[2], zc[3], zc[4]]);
    let z = off.map(|_, o| zc + *o);
    let mut max_incidence = T::zero();
    let mut worst_vertex = c;
    for (v, zv) in z.iter() {
        let f = net.lift(v);
        let r = zv.inner(f).abs() / (zv.euclid_norm() * f.euclid_norm()).max(T::min_positive_value());
        if r > max_incidence {
            max_incidence = r;
            worst_vertex = v;
        }
    }
    let quantity = ConservedQuantity::linear(&z, q);
    let conservation = pcq_verify(net, &quantity, tol.scaled(T::lit(10.0)));
    let pass = max_incidence <= tol.rel * T::lit(10.0) && conservation.pass;
    Ok(LcqGridReport { quantity, center: c, max_incidence, worst_vertex, conservation, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::cylinder;
    use crate::minkowski::euclidean_lift;

    fn cyl() -> (IsothermicNet<f64>, ConservedQuantity<f64>) {
        let net = cylinder(GridDomain::new(0, 4, -1, 3).unwrap(), 0.3f64, 0.7).isothermic(Tol::default()).unwrap();
        let p = lcq_solve_grid(&net, MVector::q_euclid(), None, Tol::default()).unwrap().quantity;
        (net, p)
    }

    #[test]
    fn transport_round_trip() {
        let (net, p) = cyl();
        let (i, j) = (Vertex::new(1, 1), Vertex::new(2, 1));
        let there = pcq_transport(&net, p.at(i), i, j, Tol::default()).unwrap();
        assert!(there.max_diff(p.at(j)) < 1e-12);
        let back = pcq_transport(&net, &there, j, i, Tol::default()).unwrap();
        assert!(back.max_diff(p.at(i)) < 1e-12);
    }

    #[test]
    fn propagation_reproduces_quantity() {
        let (net, p) = cyl();
        let c = Vertex::new(2, 1);
        let q = pcq_propagate(&net, p.at(c), c, Tol::default()).unwrap();
        assert!(q.max_diff(&p) < 1e-10);
    }

    #[test]
    fn perturbed_quantity_fails_verification() {
        let (net, p) = cyl();
        let mut bad = p.clone();
        bad.values[Vertex::new(1, 1)].coeffs[1][2] += 1e-4;
        let rep = pcq_verify(&net, &bad, Tol::default());
        assert!(!rep.pass);
        assert!(rep.failing.iter().all(|(i, j)| *i == Vertex::new(1, 1) || *j == Vertex::new(1, 1)));
    }

    #[test]
    fn norm_polynomial_is_constant_over_the_net() {
        let (_, p) = cyl();
        let n = norm_poly(&p, Tol::default());
        assert!(n.spread < 1e-10);
        // |Q + lambda Z|^2 = lambda^2 - 2 H lambda - kappa with H = 1/2, kappa = 0.
        assert!((n.poly.eval(2.0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reparametrization_scales_the_factorizer() {
        let (net, p) = cyl();
        let (n2, q2) = reparametrize(&net, &p, 2.0);
        let (i, j) = (Vertex::new(0, 0), Vertex::new(1, 0));
        assert!((n2.a.at(i, j) - 2.0 * net.a.at(i, j)).abs() < 1e-15);
        assert!(pcq_verify(&n2, &q2, Tol::default()).pass);
    }

    #[test]
    fn mean_curvature_data_requires_normalisation() {
        let (_, p) = cyl();
        assert!(mean_curvature_data(&p.scale(2.0), Tol::default()).is_err());
        let n = normalize_top(&p.scale(2.0), Tol::default()).unwrap();
        let (h, k) = mean_curvature_data(&n, Tol::default()).unwrap();
        assert!(k.abs() < 1e-9 && h.abs() > 0.0);
    }

    #[test]
    fn type_one_for_the_cylinder() {
        let (net, p) = cyl();
        let rep = classify_type(&net, &[p], Tol::default());
        assert!(rep.sphere.is_none());
        assert_eq!(rep.min_degree, Some(1));
    }

    #[test]
    fn lcq_3x3_rejects_wrong_size() {
        let (net, _) = cyl();
        assert!(matches!(lcq_solve_3x3(&net, MVector::q_euclid(), Tol::default()), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn linear_quantity_from_fields() {
        let d = GridDomain::sized(2, 2);
        let z = VertexField::from_fn(d, |v| euclidean_lift([v.m as f64, v.n as f64, 0.0f64]));
        let p = ConservedQuantity::linear(&z, MVector::q_euclid());
        assert_eq!(p.degree(Tol::default()), Some(1));
        assert_eq!(p.constant(Vertex::new(1, 1)), MVector::q_euclid());
    }

    #[test]
    fn generic_in_single_precision() {
        let net = cylinder(GridDomain::sized(4, 4), 0.3f32, 0.7).isothermic(Tol::default()).unwrap();
        let rep = lcq_solve_grid(&net, MVector::q_euclid(), None, Tol::default()).unwrap();
        assert!(rep.pass, "{}", rep.max_incidence);
        let (h, _) = mean_curvature_data(&rep.quantity, Tol::default()).unwrap();
        assert!((h - 0.5).abs() < 1e-3);
    }
}
