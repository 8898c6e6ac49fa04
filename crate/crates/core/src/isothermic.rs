//! Discrete isothermic nets: verification, Moutard lifts, vertex stars, the
//! isothermic family of connections and Calapso transformations.

use crate::error::{Error, Result};
use crate::grid::{EdgeFunction, Face, GridDomain, Vertex, VertexField};
use crate::minkowski::{cross_ratio, hyperplane_normal, parallel_residual, Isometry, MVector};
use crate::scalar::{Real, Tol};

/// Lifts of a net together with a cross-ratio factorizing edge function.
#[derive(Debug, Clone, PartialEq)]
pub struct IsothermicNet<T> {
    pub lifts: VertexField<MVector<T>>,
    pub a: EdgeFunction<T>,
}

impl<T: Real> IsothermicNet<T> {
    /// Pairs lifts with an edge function. Only shapes and lightlikeness are
    /// checked here; use [`verify_isothermic`] or [`IsothermicNet::factorization_residual`]
    /// for the geometric conditions.
    pub fn new(lifts: VertexField<MVector<T>>, a: EdgeFunction<T>, tol: Tol<T>) -> Result<Self> {
        let d = lifts.domain();
        if a.m1 != d.m1 || a.n1 != d.n1 || a.u.len() + 1 != d.rows() || a.v.len() + 1 != d.cols() {
            return Err(Error::DimensionMismatch("edge function does not match the lift domain".into()));
        }
        for (_, f) in lifts.iter() {
            if !f.is_lightlike(tol) {
                let e = f.euclid_norm();
                return Err(Error::NotLightlike((f.norm_sq() / (e * e)).as_f64()));
            }
        }
        Ok(IsothermicNet { lifts, a })
    }

    pub fn domain(&self) -> GridDomain {
        self.lifts.domain()
    }

    pub fn lift(&self, v: Vertex) -> &MVector<T> {
        &self.lifts[v]
    }

    /// Restriction to a sub-rectangle.
    pub fn restrict(&self, sub: GridDomain) -> Result<Self> {
        Ok(IsothermicNet { lifts: self.lifts.restrict(sub)?, a: self.a.restrict(sub) })
    }

    /// Cross-ratio `[f_i; f_j; f_k; f_l]` of a face; must be real.
    pub fn face_cross_ratio(&self, face: Face, tol: Tol<T>) -> Result<T> {
        face_cross_ratio(&self.lifts, face, tol)
    }

    /// Largest relative deviation of a face cross-ratio from `a_ij / a_il`.
    pub fn factorization_residual(&self, tol: Tol<T>) -> Result<T> {
        let mut worst = T::zero();
        for face in self.domain().faces() {
            let q = self.face_cross_ratio(face, tol)?;
            let want = self.a.face_ratio(face.base);
            worst = worst.max((q - want).abs() / (T::one() + want.abs()));
        }
        Ok(worst)
    }
}

fn face_cross_ratio<T: Real>(lifts: &VertexField<MVector<T>>, face: Face, tol: Tol<T>) -> Result<T> {
    let [i, j, k, l] = face.vertices();
    let p = [&lifts[i], &lifts[j], &lifts[k], &lifts[l]];
    for a in 0..4 {
        for b in a + 1..4 {
            if tol.small(p[a].inner(p[b]), p[a].euclid_norm() * p[b].euclid_norm()) {
                return Err(Error::IrregularFace { face: face.base });
            }
        }
    }
    let q = cross_ratio(p, tol).map_err(|_| Error::IrregularFace { face: face.base })?;
    if q.im != T::zero() {
        return Err(Error::NonConcircularFace { face: face.base, imag: q.im.as_f64() });
    }
    Ok(q.re)
}

/// Checks that a net is isothermic and reconstructs its factorizing function.
///
/// The free global factor is fixed by `v[0] = -1` when every face cross-ratio
/// is negative (the embedded case), and `v[0] = +1` otherwise.
pub fn verify_isothermic<T: Real>(lifts: &VertexField<MVector<T>>, tol: Tol<T>) -> Result<EdgeFunction<T>> {
    let d = lifts.domain();
    for (_, f) in lifts.iter() {
        if !f.is_lightlike(tol) {
            let e = f.euclid_norm();
            return Err(Error::NotLightlike((f.norm_sq() / (e * e)).as_f64()));
        }
    }
    let mut q = VertexField::from_fn(d, |_| T::zero());
    for face in d.faces() {
        q[face.base] = face_cross_ratio(lifts, face, tol)?;
    }
    // Product-one condition on every 3x3 block.
    for m in d.m1 + 1..d.m2 {
        for n in d.n1 + 1..d.n2 {
            let v = Vertex::new(m, n);
            let prod = q[Vertex::new(m, n - 1)] / q[v] * q[Vertex::new(m - 1, n)] / q[Vertex::new(m - 1, n - 1)];
            if !tol.small(prod - T::one(), T::one()) {
                return Err(Error::FactorizationFailure { vertex: v, residual: (prod - T::one()).abs().as_f64() });
            }
        }
    }
    let rows = d.rows();
    let cols = d.cols();
    if rows < 2 || cols < 2 {
        return EdgeFunction::new(d, vec![T::one(); rows - 1], vec![-T::one(); cols - 1]);
    }
    let all_negative = d.faces().all(|f| q[f.base] < T::zero());
    let v0 = if all_negative { -T::one() } else { T::one() };
    let u: Vec<T> = (d.m1..d.m2).map(|m| q[Vertex::new(m, d.n1)] * v0).collect();
    let v: Vec<T> = (d.n1..d.n2).map(|n| u[0] / q[Vertex::new(d.m1, n)]).collect();
    let a = EdgeFunction::new(d, u, v)?;
    for face in d.faces() {
        let want = a.face_ratio(face.base);
        if !tol.close(q[face.base], want) {
            return Err(Error::FactorizationFailure { vertex: face.base, residual: (q[face.base] - want).abs().as_f64() });
        }
    }
    Ok(a)
}

/// Rescales the lifts so that `<F_i, F_j> = a_ij` on every edge.
///
/// The corner lift is kept. Rows and columns through the corner are scaled one
/// edge at a time, then every face is filled by the Moutard equation
/// `F_k = F_i + (a_ij - a_il) / <F_j, F_l> (F_j - F_l)`. The stored lift is the
/// input ray rescaled to agree with that value, which must lie on the ray.
pub fn moutard_lift<T: Real>(
    lifts: &VertexField<MVector<T>>,
    a: &EdgeFunction<T>,
    tol: Tol<T>,
) -> Result<VertexField<MVector<T>>> {
    let d = lifts.domain();
    let mut out = lifts.clone();
    let scale_to = |prev: &MVector<T>, next: &MVector<T>, want: T, i: Vertex, j: Vertex| -> Result<MVector<T>> {
        let g = prev.inner(next);
        if tol.small(g, prev.euclid_norm() * next.euclid_norm()) {
            return Err(Error::DegenerateEdge(i, j));
        }
        Ok(*next * (want / g))
    };
    for m in d.m1..d.m2 {
        let (i, j) = (Vertex::new(m, d.n1), Vertex::new(m + 1, d.n1));
        out[j] = scale_to(&out[i], &lifts[j], a.horizontal(m), i, j)?;
    }
    for n in d.n1..d.n2 {
        let (i, j) = (Vertex::new(d.m1, n), Vertex::new(d.m1, n + 1));
        out[j] = scale_to(&out[i], &lifts[j], a.vertical(n), i, j)?;
    }
    for n in d.n1..d.n2 {
        for m in d.m1..d.m2 {
            let face = Face { base: Vertex::new(m, n) };
            let [i, j, k, l] = face.vertices();
            let g = out[j].inner(&out[l]);
            if tol.small(g, out[j].euclid_norm() * out[l].euclid_norm()) {
                return Err(Error::DegenerateEdge(j, l));
            }
            let fk = out[i] + (out[j] - out[l]) * ((a.horizontal(m) - a.vertical(n)) / g);
            let r = parallel_residual(&fk, &lifts[k]);
            if r > tol.rel * T::lit(1e3) {
                return Err(Error::MoutardMismatch { vertex: k, residual: r.as_f64() });
            }
            out[k] = scale_to(&out[j], &lifts[k], a.vertical(n), j, k)?;
        }
    }
    Ok(out)
}

/// Per-face result of the diagonal parallelism test.
#[derive(Debug, Clone)]
pub struct MoutardReport<T> {
    pub faces: Vec<(Vertex, T)>,
    pub max: T,
    pub pass: bool,
}

/// Checks `F_k - F_i` parallel to `F_j - F_l` on every face. The residual is the
/// sine of the angle between the two diagonals.
pub fn moutard_check<T: Real>(lifts: &VertexField<MVector<T>>, tol: Tol<T>) -> MoutardReport<T> {
    let d = lifts.domain();
    let mut faces = Vec::with_capacity(d.face_count());
    let mut max = T::zero();
    for face in d.faces() {
        let [i, j, k, l] = face.vertices();
        let r = parallel_residual(&(lifts[k] - lifts[i]), &(lifts[j] - lifts[l]));
        max = max.max(r);
        faces.push((face.base, r));
    }
    MoutardReport { faces, max, pass: max <= tol.rel * T::lit(10.0) }
}

/// Cosphericity of the diagonal and axis vertex stars at an interior vertex.
#[derive(Debug, Clone)]
pub struct StarReport<T> {
    /// Centre and its four diagonal neighbours span at most four dimensions.
    pub diagonal: bool,
    /// Centre and its four axis neighbours span at most four dimensions.
    pub cross: bool,
    /// Unit normal of the diagonal star's span, when it is a hyperplane.
    pub central_sphere: Option<MVector<T>>,
}

pub fn vertex_star_cospherical<T: Real>(
    lifts: &VertexField<MVector<T>>,
    center: Vertex,
    tol: Tol<T>,
) -> Result<StarReport<T>> {
    if !lifts.domain().is_interior(center) {
        return Err(Error::OutOfDomain(center));
    }
    let c = lifts[center];
    let diag: Vec<MVector<T>> =
        std::iter::once(c).chain([(1, 1), (-1, 1), (-1, -1), (1, -1)].iter().map(|&(a, b)| lifts[center.shift(a, b)])).collect();
    let cross: Vec<MVector<T>> =
        std::iter::once(c).chain([(1, 0), (0, 1), (-1, 0), (0, -1)].iter().map(|&(a, b)| lifts[center.shift(a, b)])).collect();
    let central_sphere = hyperplane_normal(&diag, tol);
    Ok(StarReport { diagonal: central_sphere.is_some(), cross: hyperplane_normal(&cross, tol).is_some(), central_sphere })
}

/// `Gamma^lambda_ij = Gamma^{1 - lambda a_ij}_{f_i, f_j}`, mapping the fibre at `j` to the fibre at `i`.
pub fn connection_edge<T: Real>(net: &IsothermicNet<T>, lambda: T, i: Vertex, j: Vertex, tol: Tol<T>) -> Result<Isometry<T>> {
    let q = T::one() - lambda * net.a.get(i, j)?;
    if tol.small(q, T::one()) {
        return Err(Error::PoleParameter { edge: Some((i, j)) });
    }
    Isometry::gamma(q, net.lift(i), net.lift(j), tol)
}

/// Holonomy defect of a face: relative difference of the two transports
/// `Gamma_ij Gamma_jk` and `Gamma_il Gamma_lk` from `k` to `i`.
pub fn face_holonomy<T: Real>(net: &IsothermicNet<T>, lambda: T, face: Face, tol: Tol<T>) -> Result<T> {
    let [i, j, k, l] = face.vertices();
    let a = connection_edge(net, lambda, i, j, tol)? * connection_edge(net, lambda, j, k, tol)?;
    let b = connection_edge(net, lambda, i, l, tol)? * connection_edge(net, lambda, l, k, tol)?;
    Ok(a.rel_diff(&b))
}

/// Largest face holonomy defect of the net at `lambda`.
pub fn holonomy_residual<T: Real>(net: &IsothermicNet<T>, lambda: T, tol: Tol<T>) -> Result<T> {
    let mut worst = T::zero();
    for face in net.domain().faces() {
        worst = worst.max(face_holonomy(net, lambda, face, tol)?);
    }
    Ok(worst)
}

/// Defect of the four-point identity
/// `Gamma^{1-a l}_{p1,p2} Gamma^{1-b l}_{p2,p3} = Gamma^{1-b l}_{p1,p4} Gamma^{1-a l}_{p4,p3}`
/// for concircular points with cross-ratio `a / b`.
pub fn circle_identity_check<T: Real>(p: [&MVector<T>; 4], a: T, b: T, lambda: T, tol: Tol<T>) -> Result<T> {
    let qa = T::one() - a * lambda;
    let qb = T::one() - b * lambda;
    if tol.small(qa, T::one()) || tol.small(qb, T::one()) {
        return Err(Error::PoleParameter { edge: None });
    }
    let lhs = Isometry::gamma(qa, p[0], p[1], tol)? * Isometry::gamma(qb, p[1], p[2], tol)?;
    let rhs = Isometry::gamma(qb, p[0], p[3], tol)? * Isometry::gamma(qa, p[3], p[2], tol)?;
    Ok(lhs.rel_diff(&rhs))
}

/// Gauge `T` trivialising the connection at a fixed parameter: `T_j = T_i Gamma^mu_ij`,
/// identity at the basepoint.
#[derive(Debug, Clone)]
pub struct CalapsoFrame<T> {
    pub mu: T,
    pub base: Vertex,
    pub frames: VertexField<Isometry<T>>,
    /// Largest path-independence defect over all edges.
    pub residual: T,
}

/// Integrates the connection at `mu` along a spanning tree and checks every edge.
pub fn calapso_frame<T: Real>(net: &IsothermicNet<T>, mu: T, base: Vertex, tol: Tol<T>) -> Result<CalapsoFrame<T>> {
    let d = net.domain();
    let mut frames = VertexField::from_fn(d, |_| Isometry::identity());
    for (p, c) in d.spanning_tree(base)? {
        frames[c] = frames[p] * connection_edge(net, mu, p, c, tol)?;
    }
    let mut residual = T::zero();
    for (i, j) in d.edges() {
        let g = connection_edge(net, mu, i, j, tol)?;
        residual = residual.max(frames[j].rel_diff(&(frames[i] * g)));
    }
    if residual > tol.rel * T::lit(10.0) {
        return Err(Error::NotFlat(residual.as_f64()));
    }
    Ok(CalapsoFrame { mu, base, frames, residual })
}

/// Calapso transform `f^mu = T^mu f` with factorizing function `a / (1 - mu a)`.
pub fn calapso<T: Real>(
    net: &IsothermicNet<T>,
    mu: T,
    base: Vertex,
    tol: Tol<T>,
) -> Result<(CalapsoFrame<T>, IsothermicNet<T>)> {
    let frame = calapso_frame(net, mu, base, tol)?;
    let lifts = net.lifts.map(|v, f| frame.frames[v].apply(f));
    for (i, j) in net.domain().edges() {
        if tol.small(T::one() - mu * net.a.at(i, j), T::one()) {
            return Err(Error::PoleParameter { edge: Some((i, j)) });
        }
    }
    let a = net.a.map(|x| x / (T::one() - mu * x));
    Ok((frame, IsothermicNet { lifts, a }))
}
