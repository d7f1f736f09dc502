//! Phase-one simplex over a generic ordered field.
//!
//! Only feasibility of `A x = b, x >= 0` is needed, so this never runs a
//! second phase. The same code drives `f64` (with a tolerance) and exact
//! rationals (tolerance zero).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + PartialOrd
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Values at or below this magnitude count as zero.
    fn tolerance() -> Self;
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }
}

fn positive<T: Scalar>(v: &T) -> bool {
    *v > T::tolerance()
}

fn negative<T: Scalar>(v: &T) -> bool {
    *v < -T::tolerance()
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
const MAX_PIVOTS: usize = 200_000;

/// Find `x >= 0` with `a x = b`. Rows with negative `b` are negated first.
///
/// Returns `None` when the system is infeasible (or, for floating point, when
/// the pivot budget runs out).
pub fn feasible_point<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    // tableau rows: original columns, one artificial per row, then rhs
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    for (row, rhs) in a.iter().zip(b) {
        let flip = rhs.is_negative();
        let mut r = Vec::with_capacity(width);
        for v in row {
            r.push(if flip { -v.clone() } else { v.clone() });
        }
        r.resize(width, T::zero());
        r[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
        rows.push(r);
    }
    for (i, r) in rows.iter_mut().enumerate() {
        r[n + i] = T::one();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs of the phase-one objective (sum of artificials)
    let mut cost = vec![T::zero(); width];
    for r in &rows {
        for j in 0..n {
            cost[j] = cost[j].clone() - r[j].clone();
        }
        cost[width - 1] = cost[width - 1].clone() - r[width - 1].clone();
    }

    let mut bland = false;
    let mut stall = 0;
    for _ in 0..MAX_PIVOTS {
        let entering = if bland {
            (0..n + m).find(|&j| negative(&cost[j]))
        } else {
            let mut best: Option<usize> = None;
            for j in 0..n + m {
                if negative(&cost[j]) && best.map_or(true, |k| cost[j] < cost[k]) {
                    best = Some(j);
                }
            }
            best
        };
        let Some(col) = entering else { break };

        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !positive(&rows[i][col]) {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(k) => {
                    let lhs = rows[i][width - 1].clone() * rows[k][col].clone();
                    let rhs = rows[k][width - 1].clone() * rows[i][col].clone();
                    if lhs < rhs || (lhs == rhs && basis[i] < basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        // phase one is bounded below by zero, so an entering column always has a pivot row
        let row = leave?;

        if !positive(&rows[row][width - 1]) {
            stall += 1;
            if stall > STALL_LIMIT {
                bland = true;
            }
        } else {
            stall = 0;
        }
        pivot(&mut rows, &mut cost, row, col);
        basis[row] = col;
    }

    if negative(&cost[width - 1]) {
        return None;
    }
    if cost.iter().take(n + m).any(negative) {
        // pivot budget exhausted
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = rows[i][width - 1].clone();
        }
    }
    Some(x)
}

fn pivot<T: Scalar>(rows: &mut [Vec<T>], cost: &mut [T], row: usize, col: usize) {
    let p = rows[row][col].clone();
    for v in rows[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = rows[row].clone();
    let eliminate = |target: &mut Vec<T>| {
        let factor = target[col].clone();
        if factor.is_zero() {
            return;
        }
        for (t, pv) in target.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *t = t.clone() - factor.clone() * pv.clone();
            }
        }
    };
    for (i, r) in rows.iter_mut().enumerate() {
        if i != row {
            eliminate(r);
        }
    }
    let mut c = cost.to_vec();
    eliminate(&mut c);
    cost.clone_from_slice(&c);
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn simple_feasible_system() {
        // x + y = 2, x - y = 0
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let x = feasible_point(&a, &[2.0, 0.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simple_infeasible_system() {
        // x + y = -1 with x, y >= 0
        assert!(feasible_point(&[vec![1.0, 1.0]], &[-1.0]).is_none());
        assert!(feasible_point(&[vec![q(1), q(1)]], &[q(-1)]).is_none());
        // x = 1 and x = 2
        assert!(feasible_point(&[vec![q(1)], vec![q(1)]], &[q(1), q(2)]).is_none());
    }

    #[test]
    fn exact_solution_satisfies_system() {
        let a = vec![vec![q(2), q(1), q(0)], vec![q(0), q(3), q(1)]];
        let b = vec![q(5), q(7)];
        let x = feasible_point(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(&b) {
            let lhs = row.iter().zip(&x).fold(q(0), |acc, (r, v)| acc + r.clone() * v.clone());
            assert_eq!(&lhs, rhs);
        }
        assert!(x.iter().all(|v| !v.is_negative()));
    }
}
