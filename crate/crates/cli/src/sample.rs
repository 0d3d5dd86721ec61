//! Seeded random spectral functions.

use std::collections::HashSet;

use hgreen_core::spectrum::multiplicity_of;
use hgreen_core::{
    is_kernel, spectrum_records, EigenIndex, ManifoldParams, Multiplicity, Result, SpectralFunction, SpectralTerm,
};
use num_complex::Complex64;
use rand::Rng;

/// Slots drawn per eigenspace are capped at this many.
pub const SLOT_CAP: u64 = 64;

/// Eigenspaces with `lambda <= lambda_max` and how many slots to draw from.
pub fn index_pool(p: &ManifoldParams, lambda_max: f64, kernel: KernelChoice) -> Result<Vec<(EigenIndex, u64)>> {
    Ok(spectrum_records(p, lambda_max)?
        .into_iter()
        .filter(|r| match kernel {
            KernelChoice::Any => true,
            KernelChoice::Exclude => !is_kernel(p, &r.index),
            KernelChoice::Only => is_kernel(p, &r.index),
        })
        .map(|r| match (r.multiplicity, &r.index) {
            (Multiplicity::Finite(m), _) => Ok(vec![(r.index, m.min(SLOT_CAP))]),
            // the kernel half-family stands for (n, 0) with |n| >= 1
            (Multiplicity::Infinite, EigenIndex::TypeA { n: sign, .. }) => (1..=KERNEL_SPREAD)
                .map(|m| {
                    let idx = EigenIndex::TypeA { n: sign * m, j: 0 };
                    Ok((idx.clone(), multiplicity_of(p, &idx)?.min(SLOT_CAP)))
                })
                .collect(),
            (Multiplicity::Infinite, _) => Ok(vec![]),
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

/// How many members of an infinite kernel family enter a pool.
pub const KERNEL_SPREAD: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Any,
    Exclude,
    Only,
}

/// Uniform on the closed complex unit disk.
pub fn unit_disk<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if z.norm_sqr() <= 1.0 {
            return z;
        }
    }
}

/// Between 1 and `max_terms` distinct terms drawn from `pool`.
pub fn random_function<R: Rng>(
    p: &ManifoldParams,
    rng: &mut R,
    pool: &[(EigenIndex, u64)],
    max_terms: usize,
) -> Result<SpectralFunction> {
    let k = rng.gen_range(1..=max_terms);
    let mut seen = HashSet::new();
    let mut terms = Vec::with_capacity(k);
    for _ in 0..4 * k {
        if terms.len() == k {
            break;
        }
        let i = rng.gen_range(0..pool.len());
        let slot = rng.gen_range(0..pool[i].1);
        if seen.insert((i, slot)) {
            terms.push(SpectralTerm {
                index: pool[i].0.clone(),
                slot,
                coeff: unit_disk(rng),
            });
        }
    }
    SpectralFunction::new(p, terms)
}
