//! Rank of collected coefficient rows.
//!
//! [`RankTracker`] keeps an integer row-echelon basis and reports exactly
//! whether each new row is innovative over the rationals. Elimination is
//! fraction-free (`v <- b_c v - v_c b`) and every reduced row is divided by
//! the gcd of its entries, so numbers stay small for the sparse rows used here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub struct RankTracker {
    width: usize,
    /// Basis row whose first non-zero entry sits in each column.
    pivots: Vec<Option<Vec<BigInt>>>,
    rank: usize,
}

impl RankTracker {
    pub fn new(width: usize) -> Self {
        RankTracker {
            width,
            pivots: vec![None; width],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.width
    }

    /// Add a row; returns true when it increased the rank.
    pub fn insert(&mut self, row: &[i64]) -> bool {
        assert_eq!(row.len(), self.width, "row width mismatch");
        let mut v: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
        for c in 0..self.width {
            if v[c].is_zero() {
                continue;
            }
            match &self.pivots[c] {
                Some(b) => {
                    let (bc, vc) = (b[c].clone(), v[c].clone());
                    for j in c..self.width {
                        if b[j].is_zero() && v[j].is_zero() {
                            continue;
                        }
                        v[j] = &bc * &v[j] - &vc * &b[j];
                    }
                    normalize(&mut v[c..]);
                }
                None => {
                    normalize(&mut v[c..]);
                    self.pivots[c] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

fn normalize(v: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g == BigInt::from(1) {
                return;
            }
        }
    }
    if g.is_zero() || g.abs() == BigInt::from(1) {
        return;
    }
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x /= &g;
        }
    }
}

/// Exact rank over the rationals.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut t = RankTracker::new(first.len());
    for r in rows {
        t.insert(r);
    }
    t.rank()
}

/// Floating-point rank: Gaussian elimination with partial pivoting, counting
/// pivots larger than `tol` times the largest absolute entry.
pub fn float_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let nrows = m.len();
    let Some(ncols) = m.first().map(|r| r.len()) else { return 0 };
    let scale = m.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for c in 0..ncols {
        if rank == nrows {
            break;
        }
        let (piv, val) = (rank..nrows)
            .map(|r| (r, m[r][c].abs()))
            .fold((rank, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if val <= tol * scale {
            continue;
        }
        m.swap(rank, piv);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot = &top[rank];
        for row in rest {
            let f = row[c] / pivot[c];
            if f != 0.0 {
                row[c..].iter_mut().zip(&pivot[c..]).for_each(|(x, y)| *x -= f * y);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over GF(2) of the rows reduced mod 2.
pub fn gf2_rank(rows: &[Vec<i64>]) -> usize {
    let Some(width) = rows.first().map(|r| r.len()) else { return 0 };
    let words = width.div_ceil(64);
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; width];
    let mut rank = 0;
    for r in rows {
        let mut v = vec![0u64; words];
        for (j, &x) in r.iter().enumerate() {
            if x.rem_euclid(2) == 1 {
                v[j / 64] |= 1 << (j % 64);
            }
        }
        for c in 0..width {
            if v[c / 64] >> (c % 64) & 1 == 0 {
                continue;
            }
            match &basis[c] {
                Some(b) => v.iter_mut().zip(b).for_each(|(x, y)| *x ^= y),
                None => {
                    basis[c] = Some(v);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_duplicates() {
        let id: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| (i == j) as i64).collect()).collect();
        assert_eq!(rational_rank(&id), 5);
        let mut dup = id.clone();
        dup[4] = dup[1].clone();
        assert_eq!(rational_rank(&dup), 4);
    }

    #[test]
    fn crafted_singular_integer_matrices() {
        // third row = 2*first - 3*second
        let m = vec![vec![1, 2, 3, 4], vec![0, 1, -1, 2], vec![2, 1, 9, 2], vec![5, 0, 0, 1]];
        assert_eq!(rational_rank(&m), 3);
        // full rank over Q but singular over GF(2)
        let m = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        assert_eq!(rational_rank(&m), 3);
        assert_eq!(gf2_rank(&m), 2);
        assert_eq!(float_rank(&m.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect::<Vec<_>>(), 1e-9), 3);
    }

    #[test]
    fn tracker_reports_innovation() {
        let mut t = RankTracker::new(3);
        assert!(t.insert(&[1, 1, 0]));
        assert!(!t.insert(&[2, 2, 0]));
        assert!(t.insert(&[0, 1, 1]));
        assert!(!t.insert(&[1, 2, 1]));
        assert!(t.insert(&[1, 0, 1]));
        assert!(t.is_full());
        assert!(!t.insert(&[7, -3, 5]));
    }
}
