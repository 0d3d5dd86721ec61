//! The invariant suite behind `hgreen check`.
//!
//! Every invariant draws from its own ChaCha stream derived from the seed, so
//! results do not depend on which other invariants ran. Output carries no
//! timings and is byte-identical for a fixed seed.

use std::f64::consts::FRAC_PI_2;

use hgreen_core::green::{gain_check_with, type_b_ratio_verdict};
use hgreen_core::oracle::{box_shells, random_rational_basis, sum_of_squares_counts};
use hgreen_core::schatten::{growth_witness, schatten_partial_with, schatten_terms, KernelPolicy};
use hgreen_core::sum::neumaier_sum;
use hgreen_core::{
    closed_form_constant, green_apply, monotonicity_check, operator_apply, ratio_bounded_verdict, schatten_partial,
    sharp_constant, sobolev_norm, spectrum_records, Cutoffs, EigenIndex, Grid, LatticeBasis, ManifoldParams,
    RatioVerdict, Result, SpectralFunction, SpectralTerm, TailBound,
};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::Sabotage;
use crate::sample::{index_pool, random_function, KernelChoice};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut Ctx) -> Result<(bool, String)>;

struct Ctx {
    rng: ChaCha8Rng,
    sabotage: Option<Sabotage>,
}

const SUITE: &[(&str, &str, Check)] = &[
    ("lattice", "box-oracle", lattice_box_oracle),
    ("lattice", "sums-of-squares", lattice_sums_of_squares),
    ("lattice", "dual-involution", lattice_dual_involution),
    ("lattice", "shell-bound", lattice_shell_bound),
    ("spectrum", "alpha-reflection", spectrum_alpha_reflection),
    ("spectrum", "sorted-nonnegative", spectrum_sorted),
    ("schatten", "threshold", schatten_threshold),
    ("schatten", "sandwich", schatten_sandwich),
    ("schatten", "kernel-exclusion", schatten_kernel_exclusion),
    ("schatten", "witness-growth", schatten_witness_growth),
    ("schatten", "shuffle-invariance", schatten_shuffle),
    ("green", "inverse-identity", green_inverse),
    ("green", "scaling", green_scaling),
    ("green", "sobolev-monotone", green_sobolev_monotone),
    ("green", "gain-inequality", green_gain),
    ("green", "sharp-constant", green_sharp_constant),
    ("green", "ratio-threshold", green_ratio_threshold),
    ("green", "monotonicity", green_monotonicity),
];

pub fn run_suite(seed: u64, sabotage: Option<Sabotage>) -> Vec<Outcome> {
    SUITE
        .iter()
        .enumerate()
        .map(|(i, (module, name, f))| {
            let mut ctx = Ctx {
                rng: ChaCha8Rng::seed_from_u64(seed),
                sabotage,
            };
            ctx.rng.set_stream(i as u64);
            let (passed, detail) = match f(&mut ctx) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            Outcome {
                module,
                name: (*name).into(),
                passed,
                detail,
            }
        })
        .collect()
}

fn params(d: u32, c: f64, alpha: f64, big_l: u64) -> Result<ManifoldParams> {
    ManifoldParams::standard(d, c, alpha, big_l)
}

/// Small parameter grid: d in {1, 2}, alpha in {0, +-d/2, +-d}, c in {1, pi/2}.
fn grid() -> Result<Vec<ManifoldParams>> {
    let mut out = Vec::new();
    for d in 1..=2u32 {
        let df = d as f64;
        for alpha in [0.0, df / 2.0, -df / 2.0, df, -df] {
            for c in [1.0, FRAC_PI_2] {
                out.push(params(d, c, alpha, 1 + (d as u64 % 2) * 2)?);
            }
        }
    }
    Ok(out)
}

fn lattice_box_oracle(ctx: &mut Ctx) -> Result<(bool, String)> {
    let mut worst = String::from("all equal");
    let mut ok = true;
    for i in 0..8 {
        let dim = [2usize, 4, 6][i % 3];
        let cap: i64 = ctx.rng.gen_range(1..=[30, 12, 5][i % 3]);
        let r = BigRational::from_integer(cap.into());
        let b = random_rational_basis(&mut ctx.rng, dim, &r, 400_000);
        let oracle = box_shells(&b, &r, true, 400_000)?;
        let fast: Vec<(BigRational, u64)> = b
            .enumerate_by_norm(cap as f64, true, u64::MAX)?
            .into_iter()
            .map(|s| (s.norm_sq.as_rational().cloned().unwrap_or_default(), s.count))
            .collect();
        if fast != oracle {
            ok = false;
            worst = format!("mismatch in dim {dim} at bound {cap}");
        }
    }
    Ok((ok, format!("8 random rational bases: {worst}")))
}

fn lattice_sums_of_squares(_: &mut Ctx) -> Result<(bool, String)> {
    for dim in [2usize, 4, 6] {
        let want = sum_of_squares_counts(dim, 20);
        let mut got = vec![0u64; 21];
        for s in LatticeBasis::integer_lattice(dim)?.enumerate_by_norm(20.0, true, u64::MAX)? {
            got[s.norm_sq.to_f64() as usize] = s.count;
        }
        if got != want {
            return Ok((false, format!("Z^{dim} counts differ")));
        }
    }
    Ok((true, "Z^2, Z^4, Z^6 up to k = 20".into()))
}

fn lattice_dual_involution(ctx: &mut Ctx) -> Result<(bool, String)> {
    let r = BigRational::from_integer(5.into());
    for _ in 0..4 {
        let b = random_rational_basis(&mut ctx.rng, 4, &r, 100_000);
        let bb = b.dual()?.dual()?;
        let a = b.enumerate_by_norm(5.0, true, u64::MAX)?;
        let c = bb.enumerate_by_norm(5.0, true, u64::MAX)?;
        if a != c {
            return Ok((false, "dual of dual has different shells".into()));
        }
    }
    Ok((true, "4 random bases in dim 4".into()))
}

fn lattice_shell_bound(ctx: &mut Ctx) -> Result<(bool, String)> {
    let r = BigRational::from_integer(6.into());
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let b = random_rational_basis(&mut ctx.rng, 4, &r, 200_000);
        for radius in [1.0f64, 1.5, 6f64.sqrt()] {
            let n: u64 = b
                .enumerate_by_norm(radius * radius, true, u64::MAX)?
                .iter()
                .map(|s| s.count)
                .sum();
            worst = worst.max(n as f64 / b.shell_count_upper_bound(radius));
        }
    }
    Ok((worst <= 1.0, format!("max count/bound = {worst:.6}")))
}

fn spectrum_alpha_reflection(_: &mut Ctx) -> Result<(bool, String)> {
    for p in grid()? {
        let q = p.with_alpha(-p.alpha())?;
        let mut a: Vec<(u64, u64)> = Vec::new();
        let mut b: Vec<(u64, u64)> = Vec::new();
        for (v, src) in [(&mut a, &p), (&mut b, &q)] {
            for r in spectrum_records(src, 30.0)? {
                v.push((r.lambda.to_bits(), r.multiplicity.finite().unwrap_or(u64::MAX)));
            }
            v.sort_unstable();
        }
        if a != b {
            return Ok((false, format!("d={} alpha={} differs from -alpha", p.d(), p.alpha())));
        }
    }
    Ok((true, "spectrum below 30 is symmetric under alpha -> -alpha".into()))
}

fn spectrum_sorted(_: &mut Ctx) -> Result<(bool, String)> {
    for p in grid()? {
        let recs = spectrum_records(&p, 40.0)?;
        if !recs.windows(2).all(|w| w[0].lambda <= w[1].lambda) || recs.iter().any(|r| r.lambda < 0.0) {
            return Ok((false, format!("d={} alpha={}", p.d(), p.alpha())));
        }
    }
    Ok((true, "20 parameter sets".into()))
}

fn schatten_threshold(_: &mut Ctx) -> Result<(bool, String)> {
    let cut = Cutoffs::new(100, 100, 20.0);
    for p in grid()? {
        let d = p.d() as f64;
        for r in [d + 1.25, d + 2.0] {
            if !schatten_partial(&p, r, &cut)?.verdict.converges() {
                return Ok((false, format!("d={d} r={r} should converge")));
            }
        }
        for r in [d + 0.5, d + 1.0] {
            let rep = schatten_partial(&p, r, &cut)?;
            if rep.verdict.converges() || rep.tail_upper_bound != TailBound::Infinite {
                return Ok((false, format!("d={d} r={r} should diverge")));
            }
        }
    }
    Ok((true, "converges iff r > d + 1 on 20 parameter sets".into()))
}

fn schatten_sandwich(_: &mut Ctx) -> Result<(bool, String)> {
    let cut = Cutoffs::new(60, 60, 16.0);
    let mut worst: f64 = 0.0;
    for p in grid()? {
        let r = p.d() as f64 + 1.25;
        let coarse = schatten_partial(&p, r, &cut)?;
        let fine = schatten_partial(&p, r, &cut.scaled(2))?;
        let tail = coarse.tail_upper_bound.finite().unwrap_or(f64::NAN);
        let used = (fine.partial_sum - coarse.partial_sum) / tail;
        if !(fine.partial_sum >= coarse.partial_sum && used <= 1.0) {
            return Ok((false, format!("d={} alpha={} left the interval", p.d(), p.alpha())));
        }
        worst = worst.max(used);
    }
    Ok((true, format!("refined sums stay inside; max tail fraction used {worst:.4}")))
}

fn schatten_kernel_exclusion(ctx: &mut Ctx) -> Result<(bool, String)> {
    let policy = match ctx.sabotage {
        Some(Sabotage::IncludeKernel) => KernelPolicy::Include,
        None => KernelPolicy::Exclude,
    };
    let cut = Cutoffs::new(30, 30, 10.0);
    for p in grid()? {
        let rep = schatten_partial_with(&p, p.d() as f64 + 2.0, &cut, policy)?;
        if !rep.partial_sum.is_finite() {
            return Ok((false, format!("d={} alpha={}: partial sum {}", p.d(), p.alpha(), rep.partial_sum)));
        }
    }
    Ok((true, "kernel eigenvalues never enter the sums".into()))
}

fn schatten_witness_growth(_: &mut Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in grid()? {
        let d = p.d() as f64;
        for r in [d + 0.5, d + 1.0] {
            let w = growth_witness(&p, r, &[1_000, 10_000, 100_000])?;
            if !w.points.windows(2).all(|x| x[1].1 > x[0].1) {
                return Ok((false, "witness not increasing".into()));
            }
            for (obs, pred) in &w.increments {
                worst = worst.max((obs - pred).abs() / pred);
            }
        }
    }
    Ok((worst <= 0.05, format!("max relative increment error {worst:.3e}")))
}

fn schatten_shuffle(ctx: &mut Ctx) -> Result<(bool, String)> {
    let cut = Cutoffs::new(80, 80, 20.0);
    let mut worst: f64 = 0.0;
    for p in grid()?.iter().step_by(3) {
        let r = p.d() as f64 + 1.5;
        let reference = schatten_partial(p, r, &cut)?.partial_sum;
        let mut terms = schatten_terms(p, r, &cut, KernelPolicy::Exclude)?;
        terms.shuffle(&mut ctx.rng);
        worst = worst.max((neumaier_sum(terms.iter().copied()) - reference).abs() / reference);
    }
    Ok((worst <= 1e-12, format!("max relative difference {worst:.3e}")))
}

fn functions(ctx: &mut Ctx, p: &ManifoldParams, count: usize, kernel: KernelChoice) -> Result<Vec<SpectralFunction>> {
    let pool = index_pool(p, 25.0, kernel)?;
    (0..count)
        .map(|_| random_function(p, &mut ctx.rng, &pool, 50))
        .collect()
}

fn green_inverse(ctx: &mut Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in grid()? {
        for f in functions(ctx, &p, 10, KernelChoice::Exclude)? {
            let back = operator_apply(&p, &green_apply(&p, &f));
            if back.len() != f.len() {
                return Ok((false, "terms lost".into()));
            }
            for (x, y) in back.terms().iter().zip(f.terms()) {
                worst = worst.max((x.coeff - y.coeff).norm() / y.coeff.norm());
            }
        }
        if p.is_endpoint() {
            let idx = EigenIndex::TypeA {
                n: p.alpha().signum() as i64 * 3,
                j: 0,
            };
            let k = SpectralFunction::new(&p, vec![term(idx, 5, 1.0)])?;
            if !green_apply(&p, &k).is_empty() || !operator_apply(&p, &k).is_empty() {
                return Ok((false, "kernel term survived".into()));
            }
        }
    }
    Ok((worst <= 1e-15, format!("max relative error {worst:.3e}")))
}

fn term(index: EigenIndex, slot: u64, re: f64) -> SpectralTerm {
    SpectralTerm {
        index,
        slot,
        coeff: Complex64::new(re, 0.0),
    }
}

fn green_scaling(ctx: &mut Ctx) -> Result<(bool, String)> {
    let p = params(2, 1.0, 1.0, 1)?;
    let mut worst: f64 = 0.0;
    for f in functions(ctx, &p, 20, KernelChoice::Any)? {
        let k = Complex64::new(ctx.rng.gen_range(-4.0..4.0), ctx.rng.gen_range(-4.0..4.0));
        let s = ctx.rng.gen_range(-3.0..3.0);
        let a = sobolev_norm(&p, &f.scale(k), s);
        let b = k.norm() * sobolev_norm(&p, &f, s);
        worst = worst.max((a - b).abs() / b.max(f64::MIN_POSITIVE));
        for (x, y) in green_apply(&p, &f.scale(k)).terms().iter().zip(green_apply(&p, &f).terms()) {
            worst = worst.max((x.coeff - y.coeff * k).norm() / (y.coeff * k).norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok((worst <= 1e-13, format!("max relative deviation {worst:.3e}")))
}

fn green_sobolev_monotone(ctx: &mut Ctx) -> Result<(bool, String)> {
    let p = params(1, FRAC_PI_2, 0.5, 3)?;
    for f in functions(ctx, &p, 20, KernelChoice::Any)? {
        let mut prev = 0.0;
        for i in -8..=8 {
            let v = sobolev_norm(&p, &f, i as f64 * 0.5);
            if v < prev {
                return Ok((false, format!("decrease at s = {}", i as f64 * 0.5)));
            }
            prev = v;
        }
    }
    Ok((true, "s -> ||f||_s nondecreasing on 20 functions".into()))
}

fn green_gain(ctx: &mut Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in grid()? {
        let c = closed_form_constant(&p)?;
        for f in functions(ctx, &p, 10, KernelChoice::Any)? {
            for s in [-2.0, 0.0, 1.0, 3.5] {
                let g = gain_check_with(&p, &f, s, c);
                if !g.holds {
                    return Ok((false, format!("d={} alpha={} s={s}: {} > {}", p.d(), p.alpha(), g.lhs, g.rhs)));
                }
                if g.rhs > 0.0 {
                    worst = worst.max(g.lhs / g.rhs);
                }
            }
        }
    }
    Ok((true, format!("max lhs/rhs {worst:.6}")))
}

fn green_sharp_constant(_: &mut Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in grid()? {
        let rep = sharp_constant(&p, 60.0)?;
        worst = worst.max((rep.numeric_sup - rep.closed_form).abs() / rep.closed_form);
    }
    let p = params(1, FRAC_PI_2, 0.0, 1)?;
    let sqrt3 = (closed_form_constant(&p)? - 3f64.sqrt()).abs();
    Ok((
        worst <= 1e-12 && sqrt3 <= 1e-15,
        format!("max relative gap {worst:.3e}; |C - sqrt 3| = {sqrt3:.1e} at d=1, c=pi/2, alpha=0"),
    ))
}

fn green_ratio_threshold(_: &mut Ctx) -> Result<(bool, String)> {
    for p in grid()? {
        for s in [0.5, 1.0] {
            if !ratio_bounded_verdict(&p, s, 12)?.is_bounded() {
                return Ok((false, format!("s={s} should be bounded")));
            }
        }
        for s in [1.01, 1.5, 2.0] {
            match ratio_bounded_verdict(&p, s, 12)? {
                RatioVerdict::Unbounded { witness } if witness.windows(2).all(|w| w[1].1 > w[0].1) => {}
                _ => return Ok((false, format!("s={s} should be unbounded with increasing witness"))),
            }
        }
        if !type_b_ratio_verdict(&p, 2.0, 8)?.is_bounded() || type_b_ratio_verdict(&p, 2.5, 8)?.is_bounded() {
            return Ok((false, "lattice-only threshold is not s = 2".into()));
        }
    }
    Ok((true, "bounded iff s <= 1 on 20 parameter sets".into()))
}

fn green_monotonicity(_: &mut Ctx) -> Result<(bool, String)> {
    for p in grid()? {
        let y0 = u32::from(p.is_endpoint());
        if !monotonicity_check(&p, &Grid::integer(20, 20, y0))? {
            return Ok((false, format!("d={} alpha={}", p.d(), p.alpha())));
        }
    }
    Ok((true, "20x20 grids, partials match central differences".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for o in run_suite(1, None) {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn sabotage_is_caught() {
        let out = run_suite(1, Some(Sabotage::IncludeKernel));
        let failed: Vec<_> = out.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
        assert_eq!(failed, ["kernel-exclusion"]);
    }
}
