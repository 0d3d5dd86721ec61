//! Slow reference computations used to cross-check the fast paths.
//!
//! Nothing here shares code with the enumeration in [`crate::lattice`]: the box
//! oracle walks every coefficient vector in a bounding box and evaluates the
//! exact quadratic form directly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{make_lattice, LatticeBasis};
use crate::scalar::Scalar;

/// Shells `(|x|^2, count)` of an exact lattice found by walking the box
/// `|x_i| <= sqrt(R (G^{-1})_{ii})`, which contains every point of norm at most `R`.
///
/// Fails with `BudgetExceeded` if the box holds more than `max_box` points.
pub fn box_shells(
    b: &LatticeBasis,
    norm_sq_max: &BigRational,
    include_zero: bool,
    max_box: u64,
) -> Result<Vec<(BigRational, u64)>> {
    let gram = b
        .gram_exact()
        .ok_or_else(|| Error::InvalidUse("box oracle needs an exact basis".into()))?;
    let n = gram.len();
    let inv = invert(gram)?;
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let q = &inv[i][i] * norm_sq_max;
            isqrt_floor(&q)
        })
        .collect::<Result<_>>()?;
    radius
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(2 * r as u64 + 1))
        .filter(|&s| s <= max_box)
        .ok_or(Error::BudgetExceeded {
            predicted: radius.iter().map(|&r| (2 * r + 1) as f64).product(),
            cap: max_box,
        })?;

    // integer form D * G
    let denom = gram
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let int_gram: Vec<Vec<i128>> = gram
        .iter()
        .map(|row| {
            row.iter()
                .map(|q| {
                    (q.numer() * (&denom / q.denom()))
                        .to_i128()
                        .ok_or(Error::Overflow("box oracle Gram entry"))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let limit = (norm_sq_max * BigRational::from_integer(denom.clone())).floor().to_integer();
    let limit = limit.to_i128().ok_or(Error::Overflow("box oracle bound"))?;

    let mut hist: BTreeMap<i128, u64> = BTreeMap::new();
    let mut x: Vec<i64> = radius.iter().map(|r| -r).collect();
    loop {
        let mut v: i128 = 0;
        for i in 0..n {
            for j in 0..n {
                v += int_gram[i][j] * x[i] as i128 * x[j] as i128;
            }
        }
        if v <= limit && (include_zero || v != 0) {
            *hist.entry(v).or_insert(0) += 1;
        }
        // odometer step
        let mut k = 0;
        loop {
            if k == n {
                return Ok(hist
                    .into_iter()
                    .map(|(v, c)| (BigRational::new(BigInt::from(v), denom.clone()), c))
                    .collect());
            }
            if x[k] < radius[k] {
                x[k] += 1;
                break;
            }
            x[k] = -radius[k];
            k += 1;
        }
    }
}

fn isqrt_floor(q: &BigRational) -> Result<i64> {
    if q.is_negative() {
        return Err(Error::InvalidUse("negative radius".into()));
    }
    let fl = q.floor().to_integer();
    let mut r = fl.sqrt();
    while (&r + 1u32) * (&r + 1u32) <= fl {
        r += 1u32;
    }
    r.to_i64().ok_or(Error::Overflow("box radius"))
}

fn invert(m: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidBasis("singular Gram matrix".into()))?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, p) in a[r].iter_mut().zip(pivot_row) {
                    *v = &*v - &f * p;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// A random full-rank rational basis: a diagonal in `{1/2, 2/3, 1, 3/2}` plus
/// off-diagonal entries `p/q` with `|p| <= 1`, `q <= 3`. Bases whose oracle box
/// for `norm_sq_max` would exceed `max_box` points are redrawn.
pub fn random_rational_basis<R: Rng>(rng: &mut R, dim: usize, norm_sq_max: &BigRational, max_box: u64) -> LatticeBasis {
    const DIAG: [(i64, i64); 4] = [(1, 2), (2, 3), (1, 1), (3, 2)];
    loop {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            let (p, q) = DIAG[rng.gen_range(0..DIAG.len())];
                            Scalar::ratio(p, q)
                        } else if rng.gen_bool(0.4) {
                            Scalar::ratio(rng.gen_range(-1..=1), rng.gen_range(1..=3))
                        } else {
                            Scalar::integer(0)
                        }
                    })
                    .collect()
            })
            .collect();
        let Ok(b) = make_lattice(rows) else { continue };
        if box_size(&b, norm_sq_max).is_some_and(|s| s <= max_box) {
            return b;
        }
    }
}

fn box_size(b: &LatticeBasis, norm_sq_max: &BigRational) -> Option<u64> {
    let inv = invert(b.gram_exact()?).ok()?;
    (0..inv.len()).try_fold(1u64, |acc, i| {
        let r = isqrt_floor(&(&inv[i][i] * norm_sq_max)).ok()?;
        acc.checked_mul(2 * r as u64 + 1)
    })
}

/// `r_dim(k)`: the number of ways to write `k` as an ordered sum of `dim`
/// squares of integers (signs counted), for `k = 0..=k_max`.
pub fn sum_of_squares_counts(dim: usize, k_max: usize) -> Vec<u64> {
    let mut one = vec![0u64; k_max + 1];
    let mut m = 0usize;
    while m * m <= k_max {
        one[m * m] += if m == 0 { 1 } else { 2 };
        m += 1;
    }
    let mut acc = vec![0u64; k_max + 1];
    acc[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u64; k_max + 1];
        for (i, &a) in acc.iter().enumerate().filter(|(_, &a)| a != 0) {
            for (j, &o) in one.iter().enumerate().take(k_max + 1 - i) {
                next[i + j] += a * o;
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r4_is_jacobi() {
        // r_4(k) = 8 * sum of divisors of k not divisible by 4
        let r4 = sum_of_squares_counts(4, 30);
        for k in 1..=30u64 {
            let s: u64 = (1..=k).filter(|d| k % d == 0 && d % 4 != 0).sum();
            assert_eq!(r4[k as usize], 8 * s, "k={k}");
        }
        assert_eq!(sum_of_squares_counts(2, 5), vec![1, 4, 4, 0, 4, 8]);
    }

    #[test]
    fn box_on_z2() {
        let b = LatticeBasis::integer_lattice(2).unwrap();
        let shells = box_shells(&b, &BigRational::from_integer(5.into()), false, 1000).unwrap();
        let counts: Vec<u64> = shells.iter().map(|s| s.1).collect();
        assert_eq!(counts, vec![4, 4, 4, 8]);
        assert!(box_shells(&b, &BigRational::from_integer(10_000.into()), true, 1000).is_err());
    }
}
