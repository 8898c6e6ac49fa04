//! Rectangular lattice domains, vertex fields, edge functions and discrete
//! one-forms.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::MVector;
use crate::scalar::{Real, Tol};

/// Lattice point `(m, n)`; `m` is the horizontal (first) direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub m: i32,
    pub n: i32,
}

impl Vertex {
    pub const fn new(m: i32, n: i32) -> Self {
        Vertex { m, n }
    }

    pub const fn shift(self, dm: i32, dn: i32) -> Self {
        Vertex { m: self.m + dm, n: self.n + dn }
    }

    pub fn is_adjacent(self, other: Vertex) -> bool {
        (self.m - other.m).abs() + (self.n - other.n).abs() == 1
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// Vertices of an elementary quadrilateral in the order `(i, j, k, l)`, i.e.
/// `(m,n), (m+1,n), (m+1,n+1), (m,n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub base: Vertex,
}

impl Face {
    pub fn vertices(&self) -> [Vertex; 4] {
        let b = self.base;
        [b, b.shift(1, 0), b.shift(1, 1), b.shift(0, 1)]
    }
}

/// Rectangle `[m1, m2] x [n1, n2]` of the square lattice (bounds inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDomain {
    pub m1: i32,
    pub m2: i32,
    pub n1: i32,
    pub n2: i32,
}

impl GridDomain {
    pub fn new(m1: i32, m2: i32, n1: i32, n2: i32) -> Result<Self> {
        if m2 < m1 || n2 < n1 {
            return Err(Error::DimensionMismatch(format!("empty domain [{m1},{m2}]x[{n1},{n2}]")));
        }
        Ok(GridDomain { m1, m2, n1, n2 })
    }

    /// Domain with `rows` values of `m` and `cols` values of `n`, starting at the origin.
    pub fn sized(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "domain must be non-empty");
        GridDomain { m1: 0, m2: rows as i32 - 1, n1: 0, n2: cols as i32 - 1 }
    }

    pub fn rows(&self) -> usize {
        (self.m2 - self.m1 + 1) as usize
    }

    pub fn cols(&self) -> usize {
        (self.n2 - self.n1 + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.m >= self.m1 && v.m <= self.m2 && v.n >= self.n1 && v.n <= self.n2
    }

    pub fn is_interior(&self, v: Vertex) -> bool {
        v.m > self.m1 && v.m < self.m2 && v.n > self.n1 && v.n < self.n2
    }

    /// Dense row-major index; `m` selects the row.
    pub fn index(&self, v: Vertex) -> Option<usize> {
        self.contains(v).then(|| ((v.m - self.m1) as usize) * self.cols() + (v.n - self.n1) as usize)
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        let c = self.cols();
        Vertex::new(self.m1 + (idx / c) as i32, self.n1 + (idx % c) as i32)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len()).map(move |i| self.vertex_at(i))
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        (self.m1..self.m2).flat_map(move |m| (self.n1..self.n2).map(move |n| Face { base: Vertex::new(m, n) }))
    }

    pub fn face_count(&self) -> usize {
        (self.rows() - 1) * (self.cols() - 1)
    }

    /// Each undirected edge once, oriented towards increasing index.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices().flat_map(move |v| {
            let h = v.shift(1, 0);
            let w = v.shift(0, 1);
            let a = self.contains(h).then_some((v, h));
            let b = self.contains(w).then_some((v, w));
            a.into_iter().chain(b)
        })
    }

    pub fn neighbours(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().map(move |(a, b)| v.shift(a, b)).filter(move |w| self.contains(*w))
    }

    /// Tree edges `(parent, child)` of a spanning tree rooted at `base`, in an
    /// order where every parent precedes its children: first along the row of
    /// `base` (varying `m`), then along every column (varying `n`).
    pub fn spanning_tree(&self, base: Vertex) -> Result<Vec<(Vertex, Vertex)>> {
        if !self.contains(base) {
            return Err(Error::OutOfDomain(base));
        }
        let mut out = Vec::with_capacity(self.len().saturating_sub(1));
        for m in (base.m + 1)..=self.m2 {
            out.push((Vertex::new(m - 1, base.n), Vertex::new(m, base.n)));
        }
        for m in (self.m1..base.m).rev() {
            out.push((Vertex::new(m + 1, base.n), Vertex::new(m, base.n)));
        }
        for m in self.m1..=self.m2 {
            for n in (base.n + 1)..=self.n2 {
                out.push((Vertex::new(m, n - 1), Vertex::new(m, n)));
            }
            for n in (self.n1..base.n).rev() {
                out.push((Vertex::new(m, n + 1), Vertex::new(m, n)));
            }
        }
        Ok(out)
    }

    /// The domain with every side shrunk to the given sub-rectangle.
    pub fn sub(&self, m1: i32, m2: i32, n1: i32, n2: i32) -> Result<Self> {
        let d = GridDomain::new(m1, m2, n1, n2)?;
        if !self.contains(Vertex::new(m1, n1)) || !self.contains(Vertex::new(m2, n2)) {
            return Err(Error::OutOfDomain(Vertex::new(m2, n2)));
        }
        Ok(d)
    }
}

/// A value per vertex, stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexField<V> {
    domain: GridDomain,
    values: Vec<V>,
}

impl<V> VertexField<V> {
    pub fn from_fn(domain: GridDomain, mut f: impl FnMut(Vertex) -> V) -> Self {
        let values = domain.vertices().map(&mut f).collect();
        VertexField { domain, values }
    }

    pub fn try_from_fn<E>(domain: GridDomain, mut f: impl FnMut(Vertex) -> Result<V, E>) -> Result<Self, E> {
        let values = domain.vertices().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        Ok(VertexField { domain, values })
    }

    pub fn from_vec(domain: GridDomain, values: Vec<V>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DimensionMismatch(format!("{} values for {} vertices", values.len(), domain.len())));
        }
        Ok(VertexField { domain, values })
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn get(&self, v: Vertex) -> Option<&V> {
        self.domain.index(v).map(|i| &self.values[i])
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, &V)> {
        self.values.iter().enumerate().map(|(i, v)| (self.domain.vertex_at(i), v))
    }

    pub fn map<W>(&self, mut f: impl FnMut(Vertex, &V) -> W) -> VertexField<W> {
        VertexField { domain: self.domain, values: self.iter().map(|(v, x)| f(v, x)).collect() }
    }

    /// Restriction to a sub-rectangle.
    pub fn restrict(&self, sub: GridDomain) -> Result<Self>
    where
        V: Clone,
    {
        let sub = self.domain.sub(sub.m1, sub.m2, sub.n1, sub.n2)?;
        Ok(VertexField::from_fn(sub, |v| self[v].clone()))
    }
}

impl<V> Index<Vertex> for VertexField<V> {
    type Output = V;
    fn index(&self, v: Vertex) -> &V {
        match self.domain.index(v) {
            Some(i) => &self.values[i],
            None => panic!("vertex {v} outside domain {:?}", self.domain),
        }
    }
}

impl<V> IndexMut<Vertex> for VertexField<V> {
    fn index_mut(&mut self, v: Vertex) -> &mut V {
        match self.domain.index(v) {
            Some(i) => &mut self.values[i],
            None => panic!("vertex {v} outside domain {:?}", self.domain),
        }
    }
}

/// A factorizing edge function: horizontal edges `(m,n)-(m+1,n)` carry
/// `u[m - m1]`, vertical edges `(m,n)-(m,n+1)` carry `v[n - n1]`.
///
/// Edge functions are symmetric, `a_ij = a_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction<T> {
    pub m1: i32,
    pub n1: i32,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> EdgeFunction<T> {
    /// Edge function on `domain` from its horizontal and vertical labels.
    pub fn new(domain: GridDomain, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if u.len() + 1 != domain.rows() && !(u.is_empty() && domain.rows() == 1) {
            return Err(Error::DimensionMismatch(format!("{} horizontal labels for {} rows", u.len(), domain.rows())));
        }
        if v.len() + 1 != domain.cols() && !(v.is_empty() && domain.cols() == 1) {
            return Err(Error::DimensionMismatch(format!("{} vertical labels for {} columns", v.len(), domain.cols())));
        }
        Ok(EdgeFunction { m1: domain.m1, n1: domain.n1, u, v })
    }

    pub fn constant(domain: GridDomain, u: T, v: T) -> Self {
        EdgeFunction { m1: domain.m1, n1: domain.n1, u: vec![u; domain.rows() - 1], v: vec![v; domain.cols() - 1] }
    }

    pub fn horizontal(&self, m: i32) -> T {
        self.u[(m - self.m1) as usize]
    }

    pub fn vertical(&self, n: i32) -> T {
        self.v[(n - self.n1) as usize]
    }

    /// `a_ij` for adjacent `i`, `j`.
    pub fn get(&self, i: Vertex, j: Vertex) -> Result<T> {
        if !i.is_adjacent(j) {
            return Err(Error::NotAdjacent(i, j));
        }
        let idx_ok = |k: i32, len: usize| k >= 0 && (k as usize) < len;
        if i.n == j.n {
            let k = i.m.min(j.m) - self.m1;
            if !idx_ok(k, self.u.len()) {
                return Err(Error::OutOfDomain(i));
            }
            Ok(self.u[k as usize])
        } else {
            let k = i.n.min(j.n) - self.n1;
            if !idx_ok(k, self.v.len()) {
                return Err(Error::OutOfDomain(i));
            }
            Ok(self.v[k as usize])
        }
    }

    /// `a` for adjacent vertices already known to lie in the domain.
    pub fn at(&self, i: Vertex, j: Vertex) -> T {
        self.get(i, j).expect("edge inside the domain")
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        EdgeFunction { m1: self.m1, n1: self.n1, u: self.u.iter().map(|x| f(*x)).collect(), v: self.v.iter().map(|x| f(*x)).collect() }
    }

    /// Restriction to a sub-rectangle.
    pub fn restrict(&self, sub: GridDomain) -> Self {
        let u = (sub.m1..sub.m2).map(|m| self.horizontal(m)).collect();
        let v = (sub.n1..sub.n2).map(|n| self.vertical(n)).collect();
        EdgeFunction { m1: sub.m1, n1: sub.n1, u, v }
    }

    /// Face label `a_ij / a_il` of the face based at `base`.
    pub fn face_ratio(&self, base: Vertex) -> T {
        self.horizontal(base.m) / self.vertical(base.n)
    }
}

/// Edge difference `X_j - X_i`.
pub fn d_edge<V: Clone + Sub<Output = V>>(x: &VertexField<V>, i: Vertex, j: Vertex) -> V {
    x[j].clone() - x[i].clone()
}

/// Edge average `(X_i + X_j) / 2`.
pub fn avg_edge<T: Real, V: Clone + Add<Output = V> + Mul<T, Output = V>>(x: &VertexField<V>, i: Vertex, j: Vertex) -> V {
    (x[i].clone() + x[j].clone()) * T::lit(0.5)
}

/// Per-face closedness residuals of a discrete one-form.
#[derive(Debug, Clone)]
pub struct ClosednessReport<T> {
    /// `(face base, |w_ij + w_jk + w_kl + w_li|)` for every face.
    pub faces: Vec<(Vertex, T)>,
    pub max: T,
    /// Faces whose residual exceeds the tolerance.
    pub failing: Vec<Vertex>,
    pub pass: bool,
}

/// Checks that an antisymmetric edge one-form sums to zero around every face.
///
/// `omega(i, j)` is the value on the directed edge `i -> j`. The residual of a
/// face is compared against `tol` scaled by the largest edge value on it.
pub fn closedness_check<T: Real>(
    domain: GridDomain,
    omega: impl Fn(Vertex, Vertex) -> MVector<T>,
    tol: Tol<T>,
) -> ClosednessReport<T> {
    let mut faces = Vec::with_capacity(domain.face_count());
    let mut max = T::zero();
    let mut failing = Vec::new();
    for face in domain.faces() {
        let [i, j, k, l] = face.vertices();
        let edges = [omega(i, j), omega(j, k), omega(k, l), omega(l, i)];
        let scale = edges.iter().fold(T::zero(), |m, e| m.max(e.euclid_norm()));
        let r = edges.iter().copied().sum::<MVector<T>>().euclid_norm();
        if !tol.small(r, scale) {
            failing.push(face.base);
        }
        max = max.max(r);
        faces.push((face.base, r));
    }
    let pass = failing.is_empty();
    ClosednessReport { faces, max, failing, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_counts() {
        let d = GridDomain::new(-1, 2, 3, 5).unwrap();
        assert_eq!((d.rows(), d.cols(), d.len(), d.face_count()), (4, 3, 12, 6));
        assert_eq!(d.edges().count(), 3 * 3 + 4 * 2);
        assert!(d.is_interior(Vertex::new(0, 4)) && !d.is_interior(Vertex::new(0, 5)));
        assert!(GridDomain::new(2, 1, 0, 0).is_err());
        for k in 0..d.len() {
            assert_eq!(d.index(d.vertex_at(k)), Some(k));
        }
    }

    #[test]
    fn spanning_tree_reaches_every_vertex_once() {
        let d = GridDomain::sized(4, 5);
        let tree = d.spanning_tree(Vertex::new(2, 3)).unwrap();
        assert_eq!(tree.len(), d.len() - 1);
        let mut seen = std::collections::HashSet::from([Vertex::new(2, 3)]);
        for (p, c) in tree {
            assert!(seen.contains(&p) && p.is_adjacent(c));
            assert!(seen.insert(c));
        }
        assert!(d.spanning_tree(Vertex::new(9, 9)).is_err());
    }

    #[test]
    fn edge_function_is_symmetric_and_labelled() {
        let d = GridDomain::sized(3, 3);
        let a = EdgeFunction::new(d, vec![1.0, 2.0], vec![-3.0, -4.0]).unwrap();
        let (i, j) = (Vertex::new(1, 2), Vertex::new(2, 2));
        assert_eq!(a.at(i, j), 2.0);
        assert_eq!(a.at(j, i), 2.0);
        assert_eq!(a.at(Vertex::new(0, 1), Vertex::new(0, 2)), -4.0);
        assert!(a.get(Vertex::new(0, 0), Vertex::new(1, 1)).is_err());
        assert_eq!(a.face_ratio(Vertex::new(1, 0)), 2.0 / -3.0);
        assert!(EdgeFunction::new(d, vec![1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn restriction_keeps_values() {
        let d = GridDomain::sized(4, 4);
        let f = VertexField::from_fn(d, |v| v.m * 10 + v.n);
        let sub = d.sub(1, 2, 2, 3).unwrap();
        let r = f.restrict(sub).unwrap();
        assert_eq!(r[Vertex::new(2, 3)], 23);
        assert!(d.sub(0, 4, 0, 0).is_err());
    }
}
