//! Minkowski space R^{4,1}, lightcone lifts, cross-ratios and the
//! Gamma transformations.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, Tol};

/// A vector of R^{4,1}; component 0 is the timelike one.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MVector<T>(pub [T; 5]);

impl<T: fmt::Debug> fmt::Debug for MVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MVector{:?}", self.0)
    }
}

impl<T: Real> MVector<T> {
    pub fn new(c: [T; 5]) -> Self {
        MVector(c)
    }

    pub fn zero() -> Self {
        MVector([T::zero(); 5])
    }

    /// Standard basis vector `e_k`.
    pub fn basis(k: usize) -> Self {
        let mut c = [T::zero(); 5];
        c[k] = T::one();
        MVector(c)
    }

    /// The point at infinity of Euclidean space, `(1, 0, 0, 0, -1)`.
    pub fn q_euclid() -> Self {
        MVector([T::one(), T::zero(), T::zero(), T::zero(), -T::one()])
    }

    pub fn from_f64(c: [f64; 5]) -> Self {
        MVector(c.map(T::lit))
    }

    pub fn to_f64(&self) -> [f64; 5] {
        self.0.map(|x| x.as_f64())
    }

    /// `<x, y> = -x0 y0 + x1 y1 + x2 y2 + x3 y3 + x4 y4`.
    #[inline]
    pub fn inner(&self, other: &Self) -> T {
        let (a, b) = (&self.0, &other.0);
        -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] + a[4] * b[4]
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    /// Euclidean length of the coordinate vector, used for scaling tolerances.
    #[inline]
    pub fn euclid_norm(&self) -> T {
        self.0.iter().map(|x| *x * *x).sum::<T>().sqrt()
    }

    #[inline]
    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Euclidean dot product of coordinates.
    #[inline]
    pub fn euclid_dot(&self, other: &Self) -> T {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| *a * *b).sum()
    }

    /// Flips the timelike component, so that `<x, y> = x.flip_time() . y`.
    #[inline]
    pub fn flip_time(&self) -> Self {
        let mut c = self.0;
        c[0] = -c[0];
        MVector(c)
    }

    pub fn is_lightlike(&self, tol: Tol<T>) -> bool {
        let e = self.euclid_norm();
        tol.small(self.norm_sq(), e * e)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Whether `self` and `other` span at most a line, relative to `tol`.
    pub fn is_parallel(&self, other: &Self, tol: Tol<T>) -> bool {
        parallel_residual(self, other) <= tol.rel
    }

    /// The three Euclidean coordinates of a lift normalised by `<Y, Q0> = -1`.
    pub fn euclid_coords(&self) -> [T; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }
}

/// Sine of the angle between two coordinate vectors; zero iff they are parallel.
pub fn parallel_residual<T: Real>(a: &MVector<T>, b: &MVector<T>) -> T {
    let na = a.euclid_norm();
    let nb = b.euclid_norm();
    if na == T::zero() || nb == T::zero() {
        return T::zero();
    }
    // Chord between the unit vectors (sign-aligned); sqrt(1 - cos^2) would
    // lose half the digits near zero.
    let sign = if a.euclid_dot(b) < T::zero() { -T::one() } else { T::one() };
    let c = (*a * (T::one() / na) - *b * (sign / nb)).euclid_norm();
    c * (T::one() - c * c / T::lit(4.0)).max(T::zero()).sqrt()
}

impl<T> Index<usize> for MVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for MVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for MVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        MVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl<T: Real> Sub for MVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        MVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl<T: Real> Neg for MVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        MVector(self.0.map(|x| -x))
    }
}

impl<T: Real> Mul<T> for MVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        MVector(self.0.map(|x| x * s))
    }
}

impl<T: Real> Div<T> for MVector<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        MVector(self.0.map(|x| x / s))
    }
}

impl<T: Real> AddAssign for MVector<T> {
    fn add_assign(&mut self, o: Self) {
        for i in 0..5 {
            self.0[i] += o.0[i];
        }
    }
}

impl<T: Real> SubAssign for MVector<T> {
    fn sub_assign(&mut self, o: Self) {
        for i in 0..5 {
            self.0[i] -= o.0[i];
        }
    }
}

impl<T: Real> std::iter::Sum for MVector<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MVector::zero(), |a, b| a + b)
    }
}

/// Lift of a Euclidean point onto the lightcone: `((1+|f|^2)/2, f, (1-|f|^2)/2)`.
///
/// Satisfies `<F, Q0> = -1` and `<F(f), F(g)> = -|f - g|^2 / 2`.
pub fn euclidean_lift<T: Real>(f: [T; 3]) -> MVector<T> {
    let half = T::lit(0.5);
    let r2 = f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
    MVector([half * (T::one() + r2), f[0], f[1], f[2], half * (T::one() - r2)])
}

/// Euclidean point of an arbitrary lift, after normalising by `<F, Q0> = -1`.
pub fn euclidean_point<T: Real>(f: &MVector<T>, tol: Tol<T>) -> Result<[T; 3]> {
    Ok(spaceform_point(f, &MVector::q_euclid(), tol)?.euclid_coords())
}

/// The representative `F / (-<F, Q>)` on the space form quadric of `Q`.
pub fn spaceform_point<T: Real>(f: &MVector<T>, q: &MVector<T>, tol: Tol<T>) -> Result<MVector<T>> {
    let d = f.inner(q);
    if tol.small(d, f.euclid_norm() * q.euclid_norm()) {
        return Err(Error::DegenerateLift);
    }
    Ok(*f / (-d))
}

/// Sectional curvature `-|Q|^2` of the space form selected by `Q`.
pub fn curvature<T: Real>(q: &MVector<T>) -> T {
    -q.norm_sq()
}

/// Gram matrix of a list of vectors.
pub fn gram_matrix<T: Real>(v: &[MVector<T>]) -> Vec<Vec<T>> {
    v.iter().map(|a| v.iter().map(|b| a.inner(b)).collect()).collect()
}

/// Determinant of the Gram matrix, `|v_1 ^ ... ^ v_k|^2`.
pub fn gram_det<T: Real>(v: &[MVector<T>]) -> T {
    linalg::det(&gram_matrix(v))
}

/// Minkowski normal of a hyperplane containing every vector, if one exists.
/// Needs at least four non-zero vectors.
///
/// Four pivot vectors are chosen by pivoted Gram-Schmidt; the candidate normal
/// is their generalised cross product, accepted when every input is orthogonal
/// to it within `tol` (relative to the Euclidean norms). The result is scaled
/// to unit length when spacelike.
pub fn hyperplane_normal<T: Real>(v: &[MVector<T>], tol: Tol<T>) -> Option<MVector<T>> {
    let rows: Vec<Vec<T>> = v.iter().map(|x| x.0.to_vec()).collect();
    let piv = linalg::pivot_rows(&rows, 4);
    if piv.len() < 4 {
        return None;
    }
    let basis: Vec<MVector<T>> = piv.iter().map(|&i| v[i]).collect();
    let n = normal_of(&basis)?;
    let ne = n.euclid_norm();
    for x in v {
        if !tol.small(n.inner(x), ne * x.euclid_norm()) {
            return None;
        }
    }
    Some(n)
}

fn normal_of<T: Real>(basis: &[MVector<T>]) -> Option<MVector<T>> {
    if basis.len() != 4 {
        return None;
    }
    let w = linalg::cross5([basis[0].0, basis[1].0, basis[2].0, basis[3].0]);
    // <N, x> = N.flip_time() . x, so the Minkowski normal is the flipped cross product.
    let n = MVector(w).flip_time();
    let n2 = n.norm_sq();
    if n2 > T::zero() {
        Some(n / n2.sqrt())
    } else if n.max_abs() > T::zero() {
        Some(n / n.euclid_norm())
    } else {
        None
    }
}

/// Cross-ratio `[p1; p2; p3; p4]` of four points given by lightlike lifts.
///
/// Real iff the points are concircular. Otherwise the branch with positive
/// imaginary part is returned. Lifts must be lightlike: the closed form of the
/// Gram determinant below assumes a vanishing diagonal.
pub fn cross_ratio<T: Real>(p: [&MVector<T>; 4], tol: Tol<T>) -> Result<Complex<T>> {
    let g = |i: usize, j: usize| p[i].inner(p[j]);
    let x = g(0, 1) * g(2, 3);
    let y = g(0, 2) * g(1, 3);
    let w = g(0, 3) * g(1, 2);
    let scale = x.abs() + y.abs() + w.abs();
    if tol.small(w, scale) {
        return Err(Error::DegenerateQuadruple);
    }
    let two = T::lit(2.0);
    let det = x * x + y * y + w * w - two * (x * y + x * w + y * w);
    let num = x - y + w;
    if det >= T::zero() || tol.small(det, scale * scale) {
        // Concircular, or numerically so: a non-positive discriminant below the
        // floor is rounding noise, a positive one cannot occur for a Minkowski 4-space.
        let sq = if det > T::zero() && !tol.small(det, scale * scale) { det.sqrt() } else { T::zero() };
        return Ok(Complex::new((num + sq) / (two * w), T::zero()));
    }
    let im = (-det).sqrt() / (two * w);
    Ok(Complex::new(num / (two * w), im.abs()))
}

/// Cross-ratio of a quadruple that must be concircular.
pub fn cross_ratio_real<T: Real>(p: [&MVector<T>; 4], tol: Tol<T>) -> Result<T> {
    let q = cross_ratio(p, tol)?;
    if q.im != T::zero() {
        return Err(Error::NotConcircular(q.im.as_f64()));
    }
    Ok(q.re)
}

/// `Gamma^q_{p,p'}(X) = X + ((q-1)<X,P'> P + (1/q - 1)<X,P> P') / <P,P'>`.
///
/// Scales `P` by `q`, `P'` by `1/q` and fixes `span(P, P')^perp`.
pub fn gamma_transform<T: Real>(
    q: T,
    p: &MVector<T>,
    pp: &MVector<T>,
    x: &MVector<T>,
    tol: Tol<T>,
) -> Result<MVector<T>> {
    Ok(Isometry::gamma(q, p, pp, tol)?.apply(x))
}

/// Orthonormal basis of `V^perp` for a non-null `V`: Minkowski Gram-Schmidt
/// with pivoting on the normalised norm. Timelike vectors come first.
pub fn orthonormal_complement<T: Real>(v: &MVector<T>) -> Vec<MVector<T>> {
    let vv = v.norm_sq();
    let mut work: Vec<MVector<T>> =
        (0..5).map(|k| MVector::basis(k)).map(|e: MVector<T>| e - *v * (e.inner(v) / vv)).collect();
    let mut out = Vec::new();
    while out.len() < 4 && !work.is_empty() {
        let (idx, _) = work
            .iter()
            .enumerate()
            .map(|(i, w)| (i, w.norm_sq().abs() / w.euclid_norm().powi(2).max(T::min_positive_value())))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let w = work.swap_remove(idx);
        let n = w.norm_sq();
        if n.abs() <= T::epsilon() * w.euclid_norm().powi(2) {
            break;
        }
        let b = w / n.abs().sqrt();
        let bb = b.norm_sq();
        for x in work.iter_mut() {
            *x -= b * (x.inner(&b) / bb);
        }
        out.push(b);
    }
    out.sort_by(|a, b| a.norm_sq().partial_cmp(&b.norm_sq()).unwrap());
    out
}

/// A linear map of R^{4,1}, stored row-major. Used for Gamma transformations and
/// Calapso frames, which are isometries.
#[derive(Clone, Copy, PartialEq)]
pub struct Isometry<T>(pub [[T; 5]; 5]);

impl<T: fmt::Debug> fmt::Debug for Isometry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry{:?}", self.0)
    }
}

impl<T: Real> Isometry<T> {
    pub fn identity() -> Self {
        Isometry(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { T::one() } else { T::zero() })))
    }

    /// Matrix of `Gamma^q_{p,p'}`.
    pub fn gamma(q: T, p: &MVector<T>, pp: &MVector<T>, tol: Tol<T>) -> Result<Self> {
        if tol.small(q, T::one()) {
            return Err(Error::SingularParameter);
        }
        let d = p.inner(pp);
        if tol.small(d, p.euclid_norm() * pp.euclid_norm()) {
            return Err(Error::DegeneratePair);
        }
        let a = (q - T::one()) / d;
        let b = (T::one() / q - T::one()) / d;
        // X -> X + a <X,P'> P + b <X,P> P', and <X,Y> = X . flip(Y).
        let fp = pp.flip_time();
        let f = p.flip_time();
        let mut m = Self::identity().0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += a * p[i] * fp[j] + b * pp[i] * f[j];
            }
        }
        Ok(Isometry(m))
    }

    pub fn apply(&self, x: &MVector<T>) -> MVector<T> {
        MVector(std::array::from_fn(|i| (0..5).map(|j| self.0[i][j] * x[j]).sum()))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Isometry(std::array::from_fn(|i| std::array::from_fn(|j| (0..5).map(|k| self.0[i][k] * other.0[k][j]).sum())))
    }

    /// Inverse of an isometry, `J A^T J`.
    pub fn inverse(&self) -> Self {
        let s = |i: usize| if i == 0 { -T::one() } else { T::one() };
        Isometry(std::array::from_fn(|i| std::array::from_fn(|j| s(i) * self.0[j][i] * s(j))))
    }

    pub fn frobenius(&self) -> T {
        self.0.iter().flatten().map(|x| *x * *x).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0.iter().flatten().zip(other.0.iter().flatten()).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// `|A - B|_F / (|A|_F + |B|_F)`.
    pub fn rel_diff(&self, other: &Self) -> T {
        let num = self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
        let den = self.frobenius() + other.frobenius();
        if den == T::zero() {
            T::zero()
        } else {
            num / den
        }
    }

    /// Largest deviation of `A^T J A` from `J`.
    pub fn isometry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..5 {
            for j in 0..5 {
                let ci = MVector(std::array::from_fn(|k| self.0[k][i]));
                let cj = MVector(std::array::from_fn(|k| self.0[k][j]));
                let want = MVector::<T>::basis(i).inner(&MVector::basis(j));
                worst = worst.max((ci.inner(&cj) - want).abs());
            }
        }
        worst
    }
}

impl<T: Real> Mul for Isometry<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.compose(&o)
    }
}
