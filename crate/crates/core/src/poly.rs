//! Real and R^{4,1}-valued polynomials in the spectral parameter.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::minkowski::{Isometry, MVector};
use crate::scalar::{Real, Tol};

/// Real polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// `lambda - mu`.
    pub fn linear_root(mu: T) -> Self {
        Poly { coeffs: vec![-mu, T::one()] }
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x + *c)
    }

    pub fn scale(&self, s: T) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Degree after dropping trailing coefficients that are small relative to
    /// the largest one. `None` for the zero polynomial.
    pub fn degree(&self, tol: Tol<T>) -> Option<usize> {
        let s = self.max_abs();
        self.coeffs.iter().rposition(|c| !tol.small(*c, s) && *c != T::zero())
    }

    /// Drops negligible leading coefficients.
    pub fn trimmed(&self, tol: Tol<T>) -> Self {
        match self.degree(tol) {
            Some(d) => Poly { coeffs: self.coeffs[..=d].to_vec() },
            None => Poly::zero(),
        }
    }

    /// Synthetic division by `lambda - mu`: returns quotient and remainder `p(mu)`.
    pub fn div_linear(&self, mu: T) -> (Self, T) {
        if self.coeffs.is_empty() {
            return (Poly::zero(), T::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![T::zero(); n - 1];
        let mut carry = T::zero();
        for k in (0..n).rev() {
            let c = self.coeffs[k] + carry * mu;
            if k == 0 {
                return (Poly { coeffs: q }, c);
            }
            q[k - 1] = c;
            carry = c;
        }
        unreachable!()
    }

    /// Division by `1 - a lambda`, the factor appearing in the Gamma parameters.
    /// Returns quotient and remainder (the remainder is a constant).
    pub fn div_one_minus(&self, a: T) -> (Self, T) {
        if a == T::zero() {
            return (self.clone(), T::zero());
        }
        // 1 - a l = -a (l - 1/a).
        let (q, r) = self.div_linear(T::one() / a);
        (q.scale(-T::one() / a), r)
    }

    /// Real roots from the eigenvalues of the companion matrix, clustered.
    ///
    /// A root is real when `|im| <= imag_tol * (1 + |re|)`; roots closer than
    /// `cluster` are merged and their multiplicities added.
    pub fn real_roots(&self, tol: Tol<T>, imag_tol: T, cluster: T) -> Vec<(T, usize)> {
        let p = self.trimmed(tol);
        let deg = match p.degree(tol) {
            Some(d) if d > 0 => d,
            _ => return vec![],
        };
        let lead = p.coeffs[deg];
        let mut comp = vec![T::zero(); deg * deg];
        for j in 0..deg {
            comp[j] = -p.coeffs[deg - 1 - j] / lead;
        }
        for i in 1..deg {
            comp[i * deg + (i - 1)] = T::one();
        }
        let eig: Vec<Complex<T>> = T::eigenvalues(deg, &comp);
        let mut reals: Vec<T> =
            eig.iter().filter(|z| z.im.abs() <= imag_tol * (T::one() + z.re.abs())).map(|z| z.re).collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<(T, usize, T)> = Vec::new();
        for r in reals {
            match out.last_mut() {
                Some((c, k, sum)) if (r - *c).abs() <= cluster => {
                    *sum += r;
                    *k += 1;
                    *c = *sum / T::from_usize(*k).unwrap();
                }
                _ => out.push((r, 1, r)),
            }
        }
        out.into_iter().map(|(c, k, _)| (c, k)).collect()
    }
}

impl<T: Real> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let g = |p: &Poly<T>, k: usize| p.coeffs.get(k).copied().unwrap_or(T::zero());
        Poly { coeffs: (0..n).map(|k| g(self, k) + g(o, k)).collect() }
    }
}

impl<T: Real> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: &Poly<T>) -> Poly<T> {
        self + &o.scale(-T::one())
    }
}

impl<T: Real> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: &Poly<T>) -> Poly<T> {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut c = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += *a * *b;
            }
        }
        Poly { coeffs: c }
    }
}

/// Polynomial with coefficients in R^{4,1}, ascending order: `sum_k lambda^k c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly<T> {
    pub coeffs: Vec<MVector<T>>,
}

impl<T: Real> MPoly<T> {
    pub fn new(coeffs: Vec<MVector<T>>) -> Self {
        MPoly { coeffs }
    }

    pub fn zero() -> Self {
        MPoly { coeffs: vec![] }
    }

    pub fn constant(c: MVector<T>) -> Self {
        MPoly { coeffs: vec![c] }
    }

    /// `lambda z + q`.
    pub fn linear(z: MVector<T>, q: MVector<T>) -> Self {
        MPoly { coeffs: vec![q, z] }
    }

    pub fn coeff(&self, k: usize) -> MVector<T> {
        self.coeffs.get(k).copied().unwrap_or_else(MVector::zero)
    }

    pub fn eval(&self, x: T) -> MVector<T> {
        self.coeffs.iter().rev().fold(MVector::zero(), |acc, c| acc * x + *c)
    }

    pub fn max_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.euclid_norm()))
    }

    pub fn degree(&self, tol: Tol<T>) -> Option<usize> {
        let s = self.max_norm();
        self.coeffs.iter().rposition(|c| !tol.small(c.euclid_norm(), s) && c.max_abs() != T::zero())
    }

    pub fn trimmed(&self, tol: Tol<T>) -> Self {
        match self.degree(tol) {
            Some(d) => MPoly { coeffs: self.coeffs[..=d].to_vec() },
            None => MPoly::zero(),
        }
    }

    /// Leading coefficient after trimming.
    pub fn top(&self, tol: Tol<T>) -> MVector<T> {
        self.degree(tol).map(|d| self.coeffs[d]).unwrap_or_else(MVector::zero)
    }

    pub fn scale(&self, s: T) -> Self {
        MPoly { coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    /// `<P(lambda), x>` as a real polynomial.
    pub fn inner_vec(&self, x: &MVector<T>) -> Poly<T> {
        Poly { coeffs: self.coeffs.iter().map(|c| c.inner(x)).collect() }
    }

    /// `<P(lambda), R(lambda)>`.
    pub fn inner(&self, o: &MPoly<T>) -> Poly<T> {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut c = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a.inner(b);
            }
        }
        Poly { coeffs: c }
    }

    pub fn norm_sq(&self) -> Poly<T> {
        self.inner(self)
    }

    /// Product with a real polynomial.
    pub fn mul_poly(&self, p: &Poly<T>) -> Self {
        if self.coeffs.is_empty() || p.coeffs.is_empty() {
            return MPoly::zero();
        }
        let mut c = vec![MVector::zero(); self.coeffs.len() + p.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in p.coeffs.iter().enumerate() {
                c[i + j] += *a * *b;
            }
        }
        MPoly { coeffs: c }
    }

    /// `p(lambda) x` for a fixed vector `x`.
    pub fn from_poly_times(p: &Poly<T>, x: &MVector<T>) -> Self {
        MPoly { coeffs: p.coeffs.iter().map(|c| *x * *c).collect() }
    }

    /// `P(lambda + mu)`.
    pub fn shift(&self, mu: T) -> Self {
        // Horner in the shifted variable.
        let mut out = MPoly::zero();
        let lin = Poly { coeffs: vec![mu, T::one()] };
        for c in self.coeffs.iter().rev() {
            out = out.mul_poly(&lin);
            if out.coeffs.is_empty() {
                out.coeffs.push(MVector::zero());
            }
            out.coeffs[0] += *c;
        }
        out
    }

    /// `P(alpha lambda)`.
    pub fn scale_arg(&self, alpha: T) -> Self {
        let mut s = T::one();
        MPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let r = *c * s;
                    s *= alpha;
                    r
                })
                .collect(),
        }
    }

    /// Synthetic division by `lambda - mu`; the remainder is `P(mu)`.
    pub fn div_linear(&self, mu: T) -> (Self, MVector<T>) {
        if self.coeffs.is_empty() {
            return (MPoly::zero(), MVector::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![MVector::zero(); n - 1];
        let mut carry = MVector::zero();
        for k in (0..n).rev() {
            let c = self.coeffs[k] + carry * mu;
            if k == 0 {
                return (MPoly { coeffs: q }, c);
            }
            q[k - 1] = c;
            carry = c;
        }
        unreachable!()
    }

    /// Coefficientwise image under a linear map.
    pub fn apply(&self, a: &Isometry<T>) -> Self {
        MPoly { coeffs: self.coeffs.iter().map(|c| a.apply(c)).collect() }
    }

    /// Largest coefficient difference, in Euclidean norm.
    pub fn max_diff(&self, o: &MPoly<T>) -> T {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).fold(T::zero(), |m, k| m.max((self.coeff(k) - o.coeff(k)).euclid_norm()))
    }
}

impl<T: Real> Add for &MPoly<T> {
    type Output = MPoly<T>;
    fn add(self, o: &MPoly<T>) -> MPoly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        MPoly { coeffs: (0..n).map(|k| self.coeff(k) + o.coeff(k)).collect() }
    }
}

impl<T: Real> Sub for &MPoly<T> {
    type Output = MPoly<T>;
    fn sub(self, o: &MPoly<T>) -> MPoly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        MPoly { coeffs: (0..n).map(|k| self.coeff(k) - o.coeff(k)).collect() }
    }
}

impl<T: Real> Neg for &MPoly<T> {
    type Output = MPoly<T>;
    fn neg(self) -> MPoly<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Add for MPoly<T> {
    type Output = MPoly<T>;
    fn add(self, o: MPoly<T>) -> MPoly<T> {
        &self + &o
    }
}

impl<T: Real> Sub for MPoly<T> {
    type Output = MPoly<T>;
    fn sub(self, o: MPoly<T>) -> MPoly<T> {
        &self - &o
    }
}

impl<T: Real> Mul<T> for MPoly<T> {
    type Output = MPoly<T>;
    fn mul(self, s: T) -> MPoly<T> {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_with_multiplicity() {
        // (x - 1)^2 (x + 2)
        let p = Poly::new(vec![2.0f64, -3.0, 0.0, 1.0]);
        let r = p.real_roots(Tol::default(), 1e-7, 1e-6);
        assert_eq!(r.len(), 2);
        assert!((r[0].0 + 2.0).abs() < 1e-9 && r[0].1 == 1);
        assert!((r[1].0 - 1.0).abs() < 1e-6 && r[1].1 == 2);
        assert!(Poly::new(vec![1.0, 0.0, 1.0]).real_roots(Tol::default(), 1e-7, 1e-6).is_empty());
        assert!(Poly::constant(3.0).real_roots(Tol::default(), 1e-7, 1e-6).is_empty());
    }

    #[test]
    fn vector_division_by_root() {
        let z = MVector::new([1.0, 2.0, 3.0, 4.0, 5.0]);
        let p = MPoly::from_poly_times(&Poly::new(vec![-2.0, 1.0]), &z);
        let (q, r) = p.div_linear(2.0);
        assert!(r.euclid_norm() < 1e-15);
        assert_eq!(q.coeff(0), z);
    }

    proptest! {
        #[test]
        fn div_linear_reconstructs(c in prop::collection::vec(-5.0f64..5.0, 1..6), mu in -3.0f64..3.0) {
            let p = Poly::new(c);
            let (q, r) = p.div_linear(mu);
            let back = &(&q * &Poly::new(vec![-mu, 1.0])) + &Poly::constant(r);
            for x in [-1.3, 0.0, 0.7, 2.1] {
                prop_assert!((back.eval(x) - p.eval(x)).abs() < 1e-9 * (1.0 + p.max_abs() * 50.0));
            }
        }

        #[test]
        fn shift_evaluates_at_offset(c in prop::collection::vec(prop::array::uniform5(-2.0f64..2.0), 1..4), mu in -2.0f64..2.0, x in -2.0f64..2.0) {
            let p = MPoly::new(c.into_iter().map(MVector::new).collect());
            let d = (p.shift(mu).eval(x) - p.eval(mu + x)).euclid_norm();
            prop_assert!(d < 1e-10 * (1.0 + p.max_norm() * 100.0));
        }

        #[test]
        fn norm_sq_matches_pointwise(c in prop::collection::vec(prop::array::uniform5(-2.0f64..2.0), 1..4), x in -2.0f64..2.0) {
            let p = MPoly::new(c.into_iter().map(MVector::new).collect());
            let v = p.eval(x);
            prop_assert!((p.norm_sq().eval(x) - v.norm_sq()).abs() < 1e-9 * (1.0 + v.euclid_norm().powi(2)));
        }
    }
}
