//! Small dense linear algebra over any [`Scalar`]: Gaussian elimination,
//! rank, determinants and matrix products.  In exact mode every result is an
//! exact rational; in float mode partial pivoting is used.

use super::numeric::Scalar;

pub type Matrix<T> = Vec<Vec<T>>;

/// Row-major product `a * b`.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "matmul dimension mismatch");
            (0..cols)
                .map(|j| {
                    let mut s = T::zero();
                    for (k, aik) in row.iter().enumerate() {
                        if !aik.is_zero() && !b[k][j].is_zero() {
                            s = s + aik.clone() * b[k][j].clone();
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `a * x` for a vector `x`.
pub fn matvec<T: Scalar>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s = s + x.clone() * y.clone();
        }
    }
    s
}

pub fn transpose<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

fn pivot_row<T: Scalar>(m: &Matrix<T>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in from..m.len() {
        if m[r][col].is_zero() {
            continue;
        }
        match best {
            None => best = Some(r),
            Some(b) if m[r][col].abs_val() > m[b][col].abs_val() => best = Some(r),
            _ => {}
        }
    }
    best
}

/// Reduced row-echelon form in place; returns the pivot columns.
pub fn rref<T: Scalar>(m: &mut Matrix<T>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pivot_row(m, c, r) else { continue };
        m.swap(r, p);
        let inv = T::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                        m[i][j] = v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Scalar>(a: &Matrix<T>) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

/// Solve the square system `a x = b`; `None` when `a` is singular.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut m: Matrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            assert_eq!(row.len(), n, "solve needs a square matrix");
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut m);
    if piv.len() < n || piv.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Determinant by elimination.
pub fn det<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut d = T::one();
    for c in 0..n {
        let Some(p) = pivot_row(&m, c, c) else { return T::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        let piv = m[c][c].clone();
        d = d * piv.clone();
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = m[i][c].clone() / piv.clone();
                for j in c..n {
                    let v = m[i][j].clone() - f.clone() * m[c][j].clone();
                    m[i][j] = v;
                }
            }
        }
    }
    d
}

/// Inverse of a square matrix; `None` when singular.
pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut m);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::numeric::{q, qi, Q};

    fn m(rows: &[&[i64]]) -> Matrix<Q> {
        rows.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect()
    }

    #[test]
    fn solve_exact() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let x = solve(&a, &[qi(3), qi(5)]).unwrap();
        assert_eq!(x, vec![q(4, 5), q(7, 5)]);
        assert!(solve(&m(&[&[1, 2], &[2, 4]]), &[qi(1), qi(2)]).is_none());
    }

    #[test]
    fn det_rank_inverse() {
        let a = m(&[&[1, 2, 3], &[0, 1, 4], &[5, 6, 0]]);
        assert_eq!(det(&a), qi(1));
        assert_eq!(rank(&a), 3);
        let inv = inverse(&a).unwrap();
        let id = matmul(&a, &inv);
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { qi(1) } else { qi(0) });
            }
        }
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4], &[3, 6]])), 1);
    }
}
