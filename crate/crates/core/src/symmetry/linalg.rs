//! Exact linear algebra over the rationals, fraction-free on integer rows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::symbolic::Rational;

/// Clears denominators so that the row becomes primitive integers.
fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = row
        .iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect();
    primitive(ints)
}

fn primitive(mut row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v /= &g;
        }
    }
    row
}

/// Reduced row echelon form. Returns the rational RREF rows (zero rows dropped)
/// and the pivot columns.
///
/// Elimination runs on primitive integer rows (`r_j <- p·r_j − q·r_i`, then divide by
/// the row content) so intermediate entries stay small; the final normalization
/// divides by the pivots.
pub fn rref(rows: &[Vec<Rational>], cols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| integer_row(r))
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= m.len() {
            break;
        }
        // smallest nonzero pivot keeps growth down
        let Some(p) = (row..m.len())
            .filter(|&r| !m[r][col].is_zero())
            .min_by(|&a, &b| m[a][col].abs().cmp(&m[b][col].abs()))
        else {
            continue;
        };
        m.swap(row, p);
        let pivot_row = m[row].clone();
        let pv = pivot_row[col].clone();
        for (r, target) in m.iter_mut().enumerate() {
            if r == row || target[col].is_zero() {
                continue;
            }
            let q = target[col].clone();
            let g = pv.gcd(&q);
            let (a, b) = (&pv / &g, &q / &g);
            let reduced: Vec<BigInt> = target
                .iter()
                .zip(&pivot_row)
                .map(|(t, pr)| &a * t - &b * pr)
                .collect();
            *target = primitive(reduced);
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    let out = m
        .iter()
        .zip(&pivots)
        .map(|(r, &c)| {
            let pv = Rational::from_integer(r[c].clone());
            r.iter()
                .map(|v| Rational::from_integer(v.clone()) / &pv)
                .collect()
        })
        .collect();
    (out, pivots)
}

pub fn rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    rref(rows, cols).1.len()
}

/// Basis of `{v : M v = 0}`, one vector per free column (that entry set to 1).
pub fn nullspace(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Scales `v` to primitive integers with a positive first nonzero entry.
pub fn primitive_vector(v: &[Rational]) -> Vec<Rational> {
    let mut ints = integer_row(v);
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in ints.iter_mut() {
            *x = -x.clone();
        }
    }
    ints.into_iter().map(Rational::from_integer).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{integer, rational};

    fn row(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| integer(x)).collect()
    }

    #[test]
    fn nullspace_of_small_system() {
        let m = vec![row(&[1, 2, 3]), row(&[2, 4, 6]), row(&[1, 0, 1])];
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        for r in &m {
            let dot: Rational = r.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert_eq!(primitive_vector(&ns[0]), row(&[1, 1, -1]));
    }

    #[test]
    fn rational_entries_and_rank() {
        let m = vec![
            vec![rational(1, 2), rational(1, 3)],
            vec![rational(3, 2), integer(1)],
        ];
        assert_eq!(rank(&m, 2), 1);
        assert_eq!(rank(&[], 4), 0);
        assert_eq!(nullspace(&[], 2).len(), 2);
    }
}
