use std::f64::consts::{FRAC_PI_2, PI};

use hgreen_core::schatten::{schatten_terms, KernelPolicy};
use hgreen_core::sum::neumaier_sum;
use hgreen_core::{counting_function, schatten_partial, Cutoffs, ManifoldParams, Multiplicity};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Non-kernel eigenvalue count below `lam` by direct double loop over (n, j)
/// and a box walk over Z^{2d}.
fn brute_count(d: u32, c: f64, alpha: f64, big_l: u64, lam: f64) -> u64 {
    let a = PI / (2.0 * c);
    let mut total = 0;
    for n in (-200i64..=200).filter(|&n| n != 0) {
        for j in 0..200u64 {
            let w = d as f64 + 2.0 * j as f64 - alpha * n.signum() as f64;
            let l = a * n.unsigned_abs() as f64 * w;
            if w > 0.0 && l <= lam {
                total += n.unsigned_abs().pow(d) * big_l * binom(j + d as u64 - 1, d as u64 - 1);
            }
        }
    }
    let r = ((2.0 * lam / PI).sqrt()) as i64;
    let dim = 2 * d as usize;
    let mut x = vec![-r; dim];
    loop {
        let q: i64 = x.iter().map(|v| v * v).sum();
        if q > 0 && FRAC_PI_2 * q as f64 <= lam {
            total += 1;
        }
        let mut k = 0;
        loop {
            if k == dim {
                return total;
            }
            if x[k] < r {
                x[k] += 1;
                break;
            }
            x[k] = -r;
            k += 1;
        }
    }
}

#[test]
fn counting_function_matches_brute_force() {
    for (d, c, alpha, big_l, lam) in [
        (1u32, 1.0, 0.0, 1u64, 40.0),
        (1, FRAC_PI_2, 0.5, 3, 25.0),
        (2, 1.0, -1.0, 1, 30.0),
        (2, FRAC_PI_2, 2.0, 3, 20.0),
        (3, 1.0, 1.5, 1, 15.0),
    ] {
        let p = ManifoldParams::standard(d, c, alpha, big_l).unwrap();
        let got = counting_function(&p, lam).unwrap();
        assert_eq!(got, brute_count(d, c, alpha, big_l, lam), "d={d} alpha={alpha}");
    }
}

#[test]
fn endpoint_kernel_is_infinite() {
    let p = ManifoldParams::standard(2, 1.0, -2.0, 1).unwrap();
    let spec = hgreen_core::spectrum_stream(&p, 5.0, true).unwrap();
    assert_eq!(spec.total_multiplicity().unwrap(), Multiplicity::Infinite);
}

#[test]
fn shuffled_summation_agrees() {
    let p = ManifoldParams::standard(2, 1.0, 1.0, 3).unwrap();
    let cut = Cutoffs::new(100, 100, 40.0);
    let mut terms = schatten_terms(&p, 3.5, &cut, KernelPolicy::Exclude).unwrap();
    let reference = schatten_partial(&p, 3.5, &cut).unwrap().partial_sum;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        terms.shuffle(&mut rng);
        let v = neumaier_sum(terms.iter().copied());
        assert!((v - reference).abs() <= 1e-12 * reference);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_holds_when_refined(d in 1u32..=2, ai in -2i32..=2, big_l in 1u64..=3, extra in 1.1f64..2.5) {
        let alpha = ai as f64 * d as f64 / 2.0;
        let p = ManifoldParams::standard(d, 1.0, alpha, big_l).unwrap();
        let r = d as f64 + 1.0 + extra;
        let cut = Cutoffs::new(40, 40, 16.0);
        let coarse = schatten_partial(&p, r, &cut).unwrap();
        let fine = schatten_partial(&p, r, &cut.scaled(2)).unwrap();
        let tail = coarse.tail_upper_bound.finite().unwrap();
        prop_assert!(fine.partial_sum >= coarse.partial_sum);
        prop_assert!(fine.partial_sum <= coarse.partial_sum + tail);
    }
}
