use hgreen_core::oracle::{box_shells, random_rational_basis, sum_of_squares_counts};
use hgreen_core::{LatticeBasis, Scalar};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUDGET: u64 = 1 << 40;

fn shells_exact(b: &LatticeBasis, r: &BigRational, include_zero: bool) -> Vec<(BigRational, u64)> {
    b.enumerate_by_norm(r.to_f64().unwrap(), include_zero, BUDGET)
        .unwrap()
        .into_iter()
        .map(|s| (s.norm_sq.as_rational().unwrap().clone(), s.count))
        .collect()
}

#[test]
fn random_bases_match_box_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (dim, cap) in [(2usize, 50i64), (4, 20), (6, 8), (8, 4)] {
        for _ in 0..4 {
            let r = BigRational::from_integer(cap.into());
            let b = random_rational_basis(&mut rng, dim, &r, 3_000_000);
            let oracle = box_shells(&b, &r, true, 3_000_000).unwrap();
            assert_eq!(shells_exact(&b, &r, true), oracle, "dim {dim}: {b:?}");
        }
    }
}

#[test]
fn integer_lattice_counts_are_sums_of_squares() {
    for dim in [2usize, 4, 6] {
        let r = sum_of_squares_counts(dim, 20);
        let b = LatticeBasis::integer_lattice(dim).unwrap();
        let shells = b.enumerate_by_norm(20.0, true, BUDGET).unwrap();
        let mut got = vec![0u64; 21];
        for s in shells {
            got[s.norm_sq.to_f64() as usize] = s.count;
        }
        assert_eq!(got, r, "dim {dim}");
    }
}

#[test]
fn dual_of_dual_is_same_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = BigRational::from_integer(6.into());
    for dim in [2usize, 4] {
        for _ in 0..5 {
            let b = random_rational_basis(&mut rng, dim, &r, 200_000);
            let bb = b.dual().unwrap().dual().unwrap();
            // same shell structure, and B pairs with its dual to the identity
            assert_eq!(shells_exact(&b, &r, true), shells_exact(&bb, &r, true));
            let pairing = pair(&b, &b.dual().unwrap());
            for (i, row) in pairing.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_eq!(*v, BigRational::from_integer(((i == j) as i64).into()));
                }
            }
        }
    }
}

fn pair(a: &LatticeBasis, b: &LatticeBasis) -> Vec<Vec<BigRational>> {
    let q = |s: &Scalar| s.as_rational().unwrap().clone();
    a.rows()
        .iter()
        .map(|ra| {
            b.rows()
                .iter()
                .map(|rb| ra.iter().zip(rb).map(|(x, y)| q(x) * q(y)).sum())
                .collect()
        })
        .collect()
}

#[test]
fn shell_bound_dominates_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [2usize, 4, 6] {
        let r = BigRational::from_integer(8.into());
        let b = random_rational_basis(&mut rng, dim, &r, 2_000_000);
        for radius in [0.5f64, 1.0, 2.0, 8f64.sqrt()] {
            let total: u64 = b
                .enumerate_by_norm(radius * radius, true, BUDGET)
                .unwrap()
                .iter()
                .map(|s| s.count)
                .sum();
            assert!(total as f64 <= b.shell_count_upper_bound(radius), "dim {dim} radius {radius}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shells_are_ascending_and_symmetric(seed in any::<u64>(), cap in 1i64..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = BigRational::from_integer(cap.into());
        let b = random_rational_basis(&mut rng, 2, &r, 100_000);
        let shells = shells_exact(&b, &r, false);
        prop_assert!(shells.windows(2).all(|w| w[0].0 < w[1].0));
        // x and -x share a shell
        prop_assert!(shells.iter().all(|s| s.1 % 2 == 0));
        prop_assert!(shells.iter().all(|s| s.0 <= r));
    }

    #[test]
    fn memoized_prefix_agrees(cap in 1u32..40, smaller in 0u32..40) {
        let b = LatticeBasis::integer_lattice(4).unwrap();
        let big = b.enumerate_by_norm(cap as f64, false, BUDGET).unwrap();
        let small = b.enumerate_by_norm(smaller.min(cap) as f64, false, BUDGET).unwrap();
        prop_assert!(small.len() <= big.len());
        prop_assert_eq!(&big[..small.len()], &small[..]);
    }
}
