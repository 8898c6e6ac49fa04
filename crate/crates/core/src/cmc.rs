//! Euclidean specialisations: Christoffel transforms, parallel cmc nets, the
//! mean curvature sphere, and classification of linear conserved quantities.

use std::fmt;

use crate::conserved::{mean_curvature_data, pcq_verify, ConservedQuantity};
use crate::error::{Error, Result};
use crate::grid::{closedness_check, EdgeFunction, GridDomain, Vertex, VertexField};
use crate::isothermic::IsothermicNet;
use crate::minkowski::{euclidean_lift, euclidean_point, MVector};
use crate::scalar::{Real, Tol};

pub type Point3<T> = [T; 3];

fn sub3<T: Real>(a: Point3<T>, b: Point3<T>) -> Point3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add3<T: Real>(a: Point3<T>, b: Point3<T>) -> Point3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale3<T: Real>(a: Point3<T>, s: T) -> Point3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot3<T: Real>(a: Point3<T>, b: Point3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3<T: Real>(a: Point3<T>) -> T {
    dot3(a, a).sqrt()
}

/// An isothermic net in R^3 with its factorizing function.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanNet<T> {
    pub points: VertexField<Point3<T>>,
    pub a: EdgeFunction<T>,
}

impl<T: Real> EuclideanNet<T> {
    pub fn domain(&self) -> GridDomain {
        self.points.domain()
    }

    pub fn lifts(&self) -> VertexField<MVector<T>> {
        self.points.map(|_, p| euclidean_lift(*p))
    }

    /// The light cone net, checked against `a`.
    pub fn isothermic(&self, tol: Tol<T>) -> Result<IsothermicNet<T>> {
        IsothermicNet::new(self.lifts(), self.a.clone(), tol)
    }

    /// Reads points off Euclidean lifts (`<F, Q0> = -1` after rescaling).
    pub fn from_lifts(net: &IsothermicNet<T>, tol: Tol<T>) -> Result<Self> {
        let points = VertexField::try_from_fn(net.domain(), |v| euclidean_point(net.lift(v), tol))?;
        Ok(EuclideanNet { points, a: net.a.clone() })
    }

    pub fn translated(&self, t: Point3<T>) -> Self {
        EuclideanNet { points: self.points.map(|_, p| add3(*p, t)), a: self.a.clone() }
    }

    /// Largest distance to another net after removing the translation at the basepoint.
    pub fn distance_mod_translation(&self, other: &Self) -> T {
        let d = self.domain();
        let b = Vertex::new(d.m1, d.n1);
        let shift = sub3(other.points[b], self.points[b]);
        self.points.iter().fold(T::zero(), |m, (v, p)| m.max(norm3(sub3(add3(*p, shift), other.points[v]))))
    }
}

/// Discrete circular cylinder `f(m, n) = (eta m, cos n phi, sin n phi)` with the
/// factorizing function of its parallel net at distance 2:
/// `a = -eta^2/4` on `m`-edges and `(1 - cos phi)/2` on `n`-edges.
pub fn cylinder<T: Real>(domain: GridDomain, eta: T, phi: T) -> EuclideanNet<T> {
    let points = VertexField::from_fn(domain, |v| {
        let t = phi * T::from_i32(v.n).unwrap();
        [eta * T::from_i32(v.m).unwrap(), t.cos(), t.sin()]
    });
    let u = -eta * eta / T::lit(4.0);
    let w = (T::one() - phi.cos()) / T::lit(2.0);
    EuclideanNet { points, a: EdgeFunction::constant(domain, u, w) }
}

/// `omega_ij = -scale (a_ij / |df_ij|^2) df_ij` integrated from `f*(base) = 0`.
fn christoffel_scaled<T: Real>(net: &EuclideanNet<T>, scale: T, tol: Tol<T>) -> Result<EuclideanNet<T>> {
    let d = net.domain();
    for (i, j) in d.edges() {
        let df = sub3(net.points[j], net.points[i]);
        let e = norm3(net.points[i]).max(norm3(net.points[j])).max(T::one());
        if norm3(df) <= tol.rel * e {
            return Err(Error::DegenerateEdge(i, j));
        }
    }
    let omega = |i: Vertex, j: Vertex| -> Point3<T> {
        let df = sub3(net.points[j], net.points[i]);
        scale3(df, -scale * net.a.at(i, j) / dot3(df, df))
    };
    let report = closedness_check(
        d,
        |i, j| {
            let w = omega(i, j);
            MVector([T::zero(), w[0], w[1], w[2], T::zero()])
        },
        tol.scaled(T::lit(10.0)),
    );
    if !report.pass {
        return Err(Error::NotClosed(report.max.as_f64()));
    }
    let base = Vertex::new(d.m1, d.n1);
    let mut points = VertexField::from_fn(d, |_| [T::zero(); 3]);
    for (p, c) in d.spanning_tree(base)? {
        points[c] = add3(points[p], omega(p, c));
    }
    Ok(EuclideanNet { points, a: net.a.clone() })
}

/// Christoffel transform `df* = -(a / |df|^2) df`, based at the origin.
pub fn christoffel<T: Real>(net: &EuclideanNet<T>, tol: Tol<T>) -> Result<EuclideanNet<T>> {
    christoffel_scaled(net, T::one(), tol)
}

/// Christoffel transform with the scaling of a parallel cmc net,
/// `df* = -(2a / (H |df|^2)) df`.
pub fn christoffel_canonical<T: Real>(net: &EuclideanNet<T>, h: T, tol: Tol<T>) -> Result<EuclideanNet<T>> {
    if h == T::zero() {
        return Err(Error::ConstraintViolated("canonical scaling needs H != 0".into()));
    }
    christoffel_scaled(net, T::lit(2.0) / h, tol)
}

/// The normalised linear quantity `lambda (H F* - Q0/(2H)) + Q0` of a cmc
/// net with parallel net `f*` at distance `1/H`.
pub fn parallel_lcq<T: Real>(
    net: &EuclideanNet<T>,
    fstar: &EuclideanNet<T>,
    h: T,
    tol: Tol<T>,
) -> Result<ConservedQuantity<T>> {
    if h == T::zero() {
        return Err(Error::NotParallel(f64::INFINITY));
    }
    let d = net.domain();
    for v in d.vertices() {
        let r = norm3(sub3(fstar.points[v], net.points[v])) * h.abs() - T::one();
        if !tol.scaled(T::lit(10.0)).small(r, T::one()) {
            return Err(Error::NotParallel(r.as_f64()));
        }
    }
    for (i, j) in d.edges() {
        let df = sub3(net.points[j], net.points[i]);
        let dfs = sub3(fstar.points[j], fstar.points[i]);
        let want = scale3(df, -T::lit(2.0) * net.a.at(i, j) / (h * dot3(df, df)));
        let r = norm3(sub3(dfs, want));
        if !tol.scaled(T::lit(10.0)).small(r, norm3(dfs).max(norm3(want))) {
            return Err(Error::NotChristoffel(r.as_f64()));
        }
    }
    let q = MVector::q_euclid();
    let z = fstar.points.map(|_, p| euclidean_lift(*p) * h - q / (T::lit(2.0) * h));
    let cq = ConservedQuantity::linear(&z, q);
    let report = pcq_verify(&net.isothermic(tol.scaled(T::lit(100.0)))?, &cq, tol.scaled(T::lit(10.0)));
    if !report.pass {
        return Err(Error::NotChristoffel(report.max.as_f64()));
    }
    Ok(cq)
}

/// The complementary net `F* = (2H Z + Q) / (2H^2)` of a Euclidean cmc net,
/// read off as points in R^3.
pub fn extract_parallel<T: Real>(
    net: &EuclideanNet<T>,
    p: &ConservedQuantity<T>,
    tol: Tol<T>,
) -> Result<EuclideanNet<T>> {
    let (h, kappa) = mean_curvature_data(p, tol)?;
    if !tol.small(kappa, T::one()) {
        return Err(Error::ModelMismatch(format!("Euclidean parallel net needs kappa = 0, got {kappa}")));
    }
    if tol.small(h, T::one()) {
        return Err(Error::ConstraintViolated("minimal nets have no parallel cmc net".into()));
    }
    let two_h = T::lit(2.0) * h;
    let points = VertexField::try_from_fn(p.domain(), |v| {
        let x = p.at(v);
        let fs = (x.coeff(1) * two_h + x.coeff(0)) / (two_h * h);
        euclidean_point(&fs, tol.scaled(T::lit(100.0)))
    })?;
    Ok(EuclideanNet { points, a: net.a.clone() })
}

/// An oriented sphere in R^3: `Z = (1/r) ((1 + |c|^2 - r^2)/2, c, (1 - |c|^2 + r^2)/2)`.
///
/// `radius` is signed; its sign is the orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere<T> {
    pub center: Point3<T>,
    pub radius: T,
}

impl<T: Real> Sphere<T> {
    pub fn encode(&self) -> MVector<T> {
        let (c, r) = (self.center, self.radius);
        let c2 = dot3(c, c);
        let two = T::lit(2.0);
        MVector([(T::one() + c2 - r * r) / two, c[0], c[1], c[2], (T::one() - c2 + r * r) / two]) / r
    }

    /// Inverse of [`Sphere::encode`] for `|Z|^2 = 1`; planes report `PlanarSphere`.
    pub fn decode(z: &MVector<T>, tol: Tol<T>) -> Result<Self> {
        let inv_r = z[0] + z[4];
        if tol.small(inv_r, z.euclid_norm()) {
            return Err(Error::PlanarSphere);
        }
        let r = T::one() / inv_r;
        Ok(Sphere { center: [z[1] * r, z[2] * r, z[3] * r], radius: r })
    }
}

/// The plane `<n, x> = d` encoded by `Z = (d, n, -d)`, for `Z0 + Z4 = 0`.
pub fn decode_plane<T: Real>(z: &MVector<T>) -> (Point3<T>, T) {
    let n = [z[1], z[2], z[3]];
    let l = norm3(n);
    (scale3(n, T::one() / l), z[0] / l)
}

/// Mean curvature sphere at a vertex, from the top coefficient of a
/// normalised linear quantity in the Euclidean gauge.
pub fn bp_sphere<T: Real>(p: &ConservedQuantity<T>, v: Vertex, tol: Tol<T>) -> Result<Sphere<T>> {
    let x = p.at(v);
    let q = x.coeff(0);
    if (q - MVector::q_euclid()).euclid_norm() > tol.rel * T::lit(10.0) {
        return Err(Error::ModelMismatch("mean curvature spheres need Q = (1,0,0,0,-1)".into()));
    }
    Sphere::decode(&x.coeff(1), tol)
}

/// Residuals of the three vertex-star characterisations of the mean curvature
/// sphere at an interior vertex, each relative to the radius.
#[derive(Debug, Clone, Copy)]
pub struct BopiReport<T> {
    /// Opposite neighbours are equidistant from the centre, per direction.
    pub equidistant: T,
    /// `(|f_nbr - c|^2 - |f - c|^2) / a` agrees for both directions.
    pub weighted_power: T,
    /// The vertex lies on the sphere.
    pub incidence: T,
}

impl<T: Real> BopiReport<T> {
    pub fn max(&self) -> T {
        self.equidistant.max(self.weighted_power).max(self.incidence)
    }
}

pub fn bopi_residuals<T: Real>(
    net: &EuclideanNet<T>,
    sphere: &Sphere<T>,
    v: Vertex,
) -> Result<BopiReport<T>> {
    let d = net.domain();
    if !d.is_interior(v) {
        return Err(Error::OutOfDomain(v));
    }
    let c = sphere.center;
    let r = sphere.radius.abs();
    let dist = |w: Vertex| norm3(sub3(net.points[w], c));
    let (e1p, e1m) = (v.shift(1, 0), v.shift(-1, 0));
    let (e2p, e2m) = (v.shift(0, 1), v.shift(0, -1));
    let equidistant = (dist(e1p) - dist(e1m)).abs().max((dist(e2p) - dist(e2m)).abs()) / r;
    let d0 = dist(v);
    let pw = |w: Vertex| (dist(w).powi(2) - d0 * d0) / net.a.at(v, w);
    let weighted_power = (pw(e1p) - pw(e2p)).abs() / (r * r).max(pw(e1p).abs());
    let incidence = (d0 - r).abs() / r;
    Ok(BopiReport { equidistant, weighted_power, incidence })
}

/// Geometric type of a normalised linear conserved quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmcClass {
    MinimalEuclidean,
    CmcEuclidean,
    /// `H^2 + kappa = 0` with `kappa < 0`.
    Horospherical,
    /// Sign of `H^2 + kappa` in a non-flat space form.
    CmcSpaceForm(i8),
}

impl fmt::Display for CmcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmcClass::MinimalEuclidean => write!(f, "minimal-euclidean"),
            CmcClass::CmcEuclidean => write!(f, "cmc-euclidean"),
            CmcClass::Horospherical => write!(f, "horospherical"),
            CmcClass::CmcSpaceForm(s) => write!(f, "cmc-spaceform({})", match s {
                1 => "+",
                -1 => "-",
                _ => "0",
            }),
        }
    }
}

pub fn classify_cmc<T: Real>(p: &ConservedQuantity<T>, tol: Tol<T>) -> Result<(CmcClass, T, T)> {
    let (h, kappa) = mean_curvature_data(p, tol)?;
    let t = tol.scaled(T::lit(10.0));
    let lawson = h * h + kappa;
    let class = if t.small(kappa, T::one()) {
        if t.small(h, T::one()) {
            CmcClass::MinimalEuclidean
        } else {
            CmcClass::CmcEuclidean
        }
    } else if t.small(lawson, T::one() + kappa.abs()) {
        if kappa < T::zero() {
            CmcClass::Horospherical
        } else {
            CmcClass::CmcSpaceForm(0)
        }
    } else {
        CmcClass::CmcSpaceForm(if lawson > T::zero() { 1 } else { -1 })
    };
    Ok((class, h, kappa))
}
