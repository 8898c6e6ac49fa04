//! Small dense linear algebra on `Vec<Vec<T>>`, sized for systems of at most a
//! dozen unknowns.

use crate::error::{Error, Result};
use crate::scalar::{Real, Tol};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot below `tol.rel * max|a|` reports `SingularSystem`.
pub fn solve_dense<T: Real>(a: &[Vec<T>], b: &[T], tol: Tol<T>) -> Result<Vec<T>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("solve_dense expects a square {n}x{n} system")));
    }
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().flatten().fold(T::zero(), |s, x| s.max(x.abs()));
    if scale == T::zero() {
        return Err(Error::SingularSystem);
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() <= tol.rel * scale {
            return Err(Error::SingularSystem);
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// Determinant by elimination with partial pivoting.
pub fn det<T: Real>(a: &[Vec<T>]) -> T {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    d
}

/// Least squares solution of an overdetermined system via Householder QR.
///
/// Returns `SingularSystem` when the column rank is deficient relative to `tol`.
pub fn least_squares<T: Real>(a: &[Vec<T>], b: &[T], tol: Tol<T>) -> Result<Vec<T>> {
    let rows = a.len();
    if rows == 0 || b.len() != rows {
        return Err(Error::DimensionMismatch("least_squares row count".into()));
    }
    let cols = a[0].len();
    if rows < cols || a.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("least_squares needs rows >= cols".into()));
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().flatten().fold(T::zero(), |s, x| s.max(x.abs()));
    for k in 0..cols {
        let norm = (k..rows).map(|i| m[i][k] * m[i][k]).sum::<T>().sqrt();
        if norm <= tol.rel * scale {
            return Err(Error::SingularSystem);
        }
        let alpha = if m[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| m[i][k]).collect();
        v[0] -= alpha;
        let vn2: T = v.iter().map(|x| *x * *x).sum();
        if vn2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for j in k..cols {
            let s: T = (k..rows).map(|i| v[i - k] * m[i][j]).sum();
            let f = two * s / vn2;
            for i in k..rows {
                m[i][j] -= f * v[i - k];
            }
        }
        let s: T = (k..rows).map(|i| v[i - k] * rhs[i]).sum();
        let f = two * s / vn2;
        for i in k..rows {
            rhs[i] -= f * v[i - k];
        }
    }
    let mut x = vec![T::zero(); cols];
    for row in (0..cols).rev() {
        let mut s = rhs[row];
        for k in row + 1..cols {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// Euclidean cross product of three vectors in R^3.
pub fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Generalised Euclidean cross product of four vectors in R^5: the vector
/// whose dot product with any `x` equals `det(v0, v1, v2, v3, x)`.
pub fn cross5<T: Real>(v: [[T; 5]; 4]) -> [T; 5] {
    let mut out = [T::zero(); 5];
    for (k, o) in out.iter_mut().enumerate() {
        let minor: Vec<Vec<T>> =
            v.iter().map(|row| (0..5).filter(|&c| c != k).map(|c| row[c]).collect()).collect();
        let sign = if (k + 4) % 2 == 0 { T::one() } else { -T::one() };
        *o = sign * det(&minor);
    }
    out
}

/// Indices of up to `k` rows chosen greedily by pivoted Gram-Schmidt, most
/// independent first. Rows are normalised before pivoting.
pub fn pivot_rows<T: Real>(rows: &[Vec<T>], k: usize) -> Vec<usize> {
    let mut work: Vec<(usize, Vec<T>)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let n = r.iter().map(|x| *x * *x).sum::<T>().sqrt();
            (n > T::zero()).then(|| (i, r.iter().map(|x| *x / n).collect()))
        })
        .collect();
    let mut out = Vec::new();
    while out.len() < k && !work.is_empty() {
        let (best, bn) = work
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (i, v.iter().map(|x| *x * *x).sum::<T>().sqrt()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if bn == T::zero() {
            break;
        }
        let (idx, v) = work.swap_remove(best);
        let q: Vec<T> = v.iter().map(|x| *x / bn).collect();
        for (_, w) in work.iter_mut() {
            let d: T = w.iter().zip(&q).map(|(a, b)| *a * *b).sum();
            for (wi, qi) in w.iter_mut().zip(&q) {
                *wi -= d * *qi;
            }
        }
        out.push(idx);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singular_system_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&a, &[1.0, 2.0], Tol::default()).is_err());
        assert_eq!(det(&a), 0.0);
    }

    #[test]
    fn cross3_is_orthogonal() {
        let c: [f64; 3] = cross3([1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]);
        assert!((c[0] * 1.0 + c[1] * 2.0 + c[2] * 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn solve_recovers_solution(a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 4), x in prop::collection::vec(-1.0f64..1.0, 4)) {
            prop_assume!(det(&a).abs() > 1e-2);
            let b: Vec<f64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
            let y = solve_dense(&a, &b, Tol::default()).unwrap();
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-8);
            }
        }

        #[test]
        fn least_squares_solves_consistent_overdetermined(x in prop::collection::vec(-1.0f64..1.0, 3), a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 6)) {
            let sq: Vec<Vec<f64>> = a[..3].to_vec();
            prop_assume!(det(&sq).abs() > 1e-2);
            let b: Vec<f64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
            let y = least_squares(&a, &b, Tol::default()).unwrap();
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-8);
            }
        }
    }
}
