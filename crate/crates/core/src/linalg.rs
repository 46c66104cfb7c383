//! Exact linear algebra over the rationals and the integers.
//!
//! Matrices are row-major `Vec<Vec<_>>`. Rational matrices use `BigRational`;
//! integer matrices use `i64` with `i128` intermediates. Sizes here are tiny
//! (at most a dozen rows), so clarity wins over speed.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type QMat = Vec<Vec<Q>>;
pub type IMat = Vec<Vec<i64>>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Canonical `"p/q"` rendering with `q > 0` and `gcd(p, q) = 1`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn q_to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

pub fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("floor out of i64 range")
}

pub fn to_qmat(m: &IMat) -> QMat {
    m.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect()
}

pub fn to_qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| qi(x)).collect()
}

/// Reduced row echelon form; returns the matrix and its pivot columns.
pub fn rref(m: &QMat) -> (QMat, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &QMat) -> usize {
    rref(m).1.len()
}

pub fn rank_i(m: &IMat) -> usize {
    rank(&to_qmat(m))
}

/// Basis of the right kernel `{x | m x = 0}`.
pub fn kernel(m: &QMat, cols: usize) -> QMat {
    let (a, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Vec::new();
    for &f in &free {
        let mut v = vec![Q::zero(); cols];
        v[f] = Q::one();
        for (row, &p) in pivots.iter().enumerate() {
            v[p] = -a[row][f].clone();
        }
        out.push(v);
    }
    out
}

/// Basis of the left kernel `{y | y m = 0}`.
pub fn left_kernel(m: &QMat) -> QMat {
    let rows = m.len();
    kernel(&transpose(m), rows)
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Some solution of `a x = b`, if one exists.
pub fn solve(a: &QMat, b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let aug: QMat = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let (e, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = e[row][cols].clone();
    }
    Some(x)
}

/// Some solution of `x a = b` (row vector times matrix).
pub fn solve_left(a: &QMat, b: &[Q]) -> Option<Vec<Q>> {
    solve(&transpose(a), b)
}

pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let (e, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(e.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul_q(a: &QMat, b: &QMat) -> QMat {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| (0..inner).fold(Q::zero(), |acc, k| acc + &r[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn vec_mat_q(v: &[Q], m: &QMat) -> Vec<Q> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| v.iter().zip(m).fold(Q::zero(), |acc, (a, r)| acc + a * &r[j]))
        .collect()
}

pub fn identity_i(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul_i(a: &IMat, b: &IMat) -> IMat {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| {
                    let s: i128 = (0..inner).map(|k| r[k] as i128 * b[k][j] as i128).sum();
                    i64::try_from(s).expect("integer matrix entry overflow")
                })
                .collect()
        })
        .collect()
}

pub fn vec_mat_i(v: &[i64], m: &IMat) -> Vec<i64> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| {
            let s: i128 = v.iter().zip(m).map(|(a, r)| *a as i128 * r[j] as i128).sum();
            i64::try_from(s).expect("integer vector entry overflow")
        })
        .collect()
}

/// Determinant by fraction-free elimination over the rationals.
pub fn det_q(m: &QMat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &a[c][j] * &f;
                a[i][j] -= t;
            }
        }
    }
    det
}

pub fn det_i(m: &IMat) -> i64 {
    q_to_i64(&det_q(&to_qmat(m))).expect("integer determinant")
}

/// Inverse of an integer matrix when it is itself integral.
pub fn inverse_i(m: &IMat) -> Option<IMat> {
    let inv = inverse(&to_qmat(m))?;
    inv.iter()
        .map(|r| r.iter().map(q_to_i64).collect::<Option<Vec<_>>>())
        .collect()
}

pub fn inverse_q_of_i(m: &IMat) -> Option<QMat> {
    inverse(&to_qmat(m))
}

/// Scales a rational vector to a primitive integer vector.
pub fn primitive_integer(v: &[Q]) -> Vec<i64> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return vec![0; v.len()];
    }
    ints.iter()
        .map(|x| (x / &g).to_i64().expect("primitive vector overflow"))
        .collect()
}

/// Basis (as rows) of the integer kernel `{x in Z^cols | m x = 0}`.
pub fn integer_kernel(m: &IMat, cols: usize) -> IMat {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();
    // column operations on a, mirrored on u (columns of u are indexed like columns of a)
    let col_op = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, f: i128| {
        for r in a.iter_mut() {
            r[dst] -= f * r[src];
        }
        for r in u.iter_mut() {
            r[dst] -= f * r[src];
        }
    };
    let swap = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, x: usize, y: usize| {
        for r in a.iter_mut() {
            r.swap(x, y);
        }
        for r in u.iter_mut() {
            r.swap(x, y);
        }
    };
    let mut col = 0;
    for row in 0..a.len() {
        if col >= cols {
            break;
        }
        loop {
            let nz: Vec<usize> = (col..cols).filter(|&j| a[row][j] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&j| a[row][j].abs()).unwrap();
            swap(&mut a, &mut u, col, p);
            let mut done = true;
            for j in col + 1..cols {
                if a[row][j] != 0 {
                    let f = a[row][j].div_euclid(a[row][col]);
                    col_op(&mut a, &mut u, j, col, f);
                    if a[row][j] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                col += 1;
                break;
            }
        }
    }
    (col..cols)
        .map(|j| u.iter().map(|r| i64::try_from(r[j]).expect("kernel overflow")).collect())
        .collect()
}

/// Row Hermite normal form of the lattice spanned by `rows`; zero rows dropped.
pub fn hnf(rows: &IMat, cols: usize) -> IMat {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut prow = 0;
    for c in 0..cols {
        if prow >= a.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (prow..a.len()).filter(|&i| a[i][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| a[i][c].abs()).unwrap();
            a.swap(prow, p);
            let mut done = true;
            for i in prow + 1..a.len() {
                if a[i][c] != 0 {
                    let f = a[i][c].div_euclid(a[prow][c]);
                    for j in 0..cols {
                        let t = f * a[prow][j];
                        a[i][j] -= t;
                    }
                    if a[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if prow < a.len() && a[prow][c] != 0 {
            if a[prow][c] < 0 {
                for v in a[prow].iter_mut() {
                    *v = -*v;
                }
            }
            for i in 0..prow {
                let f = a[i][c].div_euclid(a[prow][c]);
                if f != 0 {
                    for j in 0..cols {
                        let t = f * a[prow][j];
                        a[i][j] -= t;
                    }
                }
            }
            prow += 1;
        }
    }
    a.truncate(prow);
    a.into_iter()
        .map(|r| r.into_iter().map(|v| i64::try_from(v).expect("hnf overflow")).collect())
        .collect()
}

/// HNF basis of the saturated lattice `Q^r C ∩ Z^s` spanned rationally by the rows of `c`.
pub fn saturated_row_lattice(c: &IMat, s: usize) -> IMat {
    let ker = kernel(&to_qmat(c), s);
    if ker.is_empty() {
        return identity_i(s);
    }
    let kmat: IMat = ker.iter().map(|v| primitive_integer(v)).collect();
    hnf(&integer_kernel(&kmat, s), s)
}

/// Canonical representative of `v` modulo the lattice with HNF basis `h`.
pub fn reduce_mod_lattice(v: &[i64], h: &IMat) -> Vec<i64> {
    let mut out = v.to_vec();
    for row in h {
        let Some(p) = row.iter().position(|&x| x != 0) else {
            continue;
        };
        let f = out[p].div_euclid(row[p]);
        if f != 0 {
            for j in 0..out.len() {
                out[j] -= f * row[j];
            }
        }
    }
    out
}

pub fn is_nonneg(v: &[i64]) -> bool {
    v.iter().all(|&x| x >= 0)
}

pub fn q_sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel() {
        let m = to_qmat(&vec![vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(rank(&m), 1);
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let prod: Vec<Q> = m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
            assert!(prod.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn inverse_and_det() {
        let m = vec![vec![2, 1], vec![1, 1]];
        assert_eq!(det_i(&m), 1);
        let inv = inverse_i(&m).unwrap();
        assert_eq!(mat_mul_i(&m, &inv), identity_i(2));
        assert!(inverse_i(&vec![vec![2, 0], vec![0, 1]]).is_none());
    }

    #[test]
    fn integer_kernel_basis() {
        let k = integer_kernel(&vec![vec![2, 3]], 2);
        assert_eq!(k.len(), 1);
        assert_eq!(2 * k[0][0] + 3 * k[0][1], 0);
        assert_eq!(k[0][0].abs(), 3);
    }

    #[test]
    fn saturation_of_row_lattice() {
        // Q(2,4) ∩ Z^2 = Z(1,2)
        let h = saturated_row_lattice(&vec![vec![2, 4]], 2);
        assert_eq!(h, vec![vec![1, 2]]);
        assert_eq!(reduce_mod_lattice(&[3, 7], &h), vec![0, 1]);
        let full = saturated_row_lattice(&vec![vec![2]], 1);
        assert_eq!(full, vec![vec![1]]);
    }

    #[test]
    fn hnf_canonical() {
        let a = hnf(&vec![vec![4, 6], vec![2, 2]], 2);
        let b = hnf(&vec![vec![2, 4], vec![2, 2]], 2);
        assert_eq!(a, b);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(fmt_q(&parse_q("6/-4").unwrap()), "-3/2");
        assert_eq!(fmt_q(&parse_q("5").unwrap()), "5/1");
        assert!(parse_q("1/0").is_err());
    }
}
