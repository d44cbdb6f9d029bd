//! Dense exact linear algebra over the rationals (small systems only).

use num_traits::{One, Zero};

use crate::qlattice::Rational;

/// Determinant by fraction-exact Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Leading principal minors `det(M[..k, ..k])` for `k = 1..=n`.
pub fn leading_minors(m: &[Vec<Rational>]) -> Vec<Rational> {
    (1..=m.len())
        .map(|k| {
            let sub: Vec<Vec<Rational>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&sub)
        })
        .collect()
}

/// Sylvester's criterion: `(-1)^k * minor_k > 0` for every `k`.
pub fn is_negative_definite(m: &[Vec<Rational>]) -> bool {
    leading_minors(m).iter().enumerate().all(|(i, d)| {
        let k = i + 1;
        if k % 2 == 1 {
            *d < Rational::zero()
        } else {
            *d > Rational::zero()
        }
    })
}

/// Solves `M x = b`; `None` when `M` is singular.
pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for c in col..=n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..=n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlattice::{int, ratio};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|v| int(*v)).collect()).collect()
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&mat(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(determinant(&mat(&[&[2, 1], &[4, 2]])), int(0));
        assert_eq!(determinant(&mat(&[&[-2, 1, 0], &[1, -2, 1], &[0, 1, -2]])), int(-4));
    }

    #[test]
    fn solve_small() {
        let m = mat(&[&[-2, 1], &[1, -3]]);
        let x = solve(&m, &[int(0), int(-1)]).unwrap();
        assert_eq!(x, vec![ratio(1, 5), ratio(2, 5)]);
        assert!(solve(&mat(&[&[1, 1], &[1, 1]]), &[int(1), int(2)]).is_none());
    }

    #[test]
    fn sylvester() {
        assert!(is_negative_definite(&mat(&[&[-2, 1], &[1, -2]])));
        assert!(!is_negative_definite(&mat(&[&[-1, 1], &[1, -1]])));
        assert!(!is_negative_definite(&mat(&[&[1]])));
    }
}
