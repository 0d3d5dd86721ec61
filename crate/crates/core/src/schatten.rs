//! Schatten r-norms of the Green operator.
//!
//! The eigenvalues of the Green operator are `1 / lambda` on the non-kernel
//! spectrum of `L_alpha`, so
//!
//! ```text
//! ||G||_r^r = sum_{n != 0, j >= 0} L |n|^d binom(j+d-1, d-1) (2c / (pi |n| w))^r
//!           + sum_{xi != 0} (2 / (pi |xi|^2))^r,          w = d + 2j - alpha sgn n
//! ```
//!
//! The norm is finite exactly when `r > d + 1`. Partial sums are computed with
//! compensated summation; omitted tails are bounded from above by integral
//! comparison, and divergence is evidenced by the `j = 0` subfamily.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::unit_ball_volume;
use crate::spectrum::{binomial, ManifoldParams};
use crate::sum::{neumaier_sum, NeumaierSum};

/// Truncation of the index sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    /// Largest |n| summed.
    pub n_max: u64,
    /// Largest j summed.
    pub j_max: u64,
    /// Largest lattice |xi|^2 summed.
    pub norm_sq_max: f64,
}

impl Cutoffs {
    pub fn new(n_max: u64, j_max: u64, norm_sq_max: f64) -> Self {
        Self {
            n_max,
            j_max,
            norm_sq_max,
        }
    }

    /// All cutoffs multiplied by `k` (the lattice cutoff scales the squared norm).
    pub fn scaled(&self, k: u64) -> Self {
        Self {
            n_max: self.n_max * k,
            j_max: self.j_max * k,
            norm_sq_max: self.norm_sq_max * k as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::param("n_max", "must be >= 1"));
        }
        if self.j_max == 0 {
            return Err(Error::param("j_max", "must be >= 1"));
        }
        if !(self.norm_sq_max > 0.0) || !self.norm_sq_max.is_finite() {
            return Err(Error::param(
                "norm_sq_max",
                format!("must be finite and > 0, got {}", self.norm_sq_max),
            ));
        }
        Ok(())
    }
}

/// Whether kernel eigenvalues enter the sum. Only [`KernelPolicy::Exclude`] is
/// correct; `Include` exists so that checks can demonstrate the difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPolicy {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    Finite(f64),
    Infinite,
}

impl TailBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            TailBound::Finite(v) => Some(v),
            TailBound::Infinite => None,
        }
    }
}

/// Per-piece upper bounds on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailParts {
    /// Type (a), |n| > n_max (all j).
    pub n_tail: f64,
    /// Type (a), |n| <= n_max and j > j_max.
    pub j_tail: f64,
    /// Type (b), |xi|^2 > norm_sq_max.
    pub lattice_tail: f64,
}

/// Partial sums of the divergence witness at increasing N.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthWitness {
    pub points: Vec<(u64, f64)>,
    /// `(observed, predicted)` increments between consecutive points.
    pub increments: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Converges {
        norm_upper_bound: f64,
        norm_lower_bound: f64,
    },
    Diverges {
        growth_witness: GrowthWitness,
    },
}

impl Verdict {
    pub fn converges(&self) -> bool {
        matches!(self, Verdict::Converges { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchattenReport {
    pub r: f64,
    pub cutoffs: Cutoffs,
    /// Sum of `lambda^{-r}` with multiplicity over the truncated non-kernel spectrum.
    pub partial_sum: f64,
    pub type_a_partial: f64,
    pub type_b_partial: f64,
    pub tail_upper_bound: TailBound,
    pub tail_parts: Option<TailParts>,
    /// Certified lower bound on `||G||_r^r`: the partial sum itself (all terms positive).
    pub lower_bound_at_cutoff: f64,
    /// `d + 1`; the norm is finite iff `r` exceeds it.
    pub threshold: f64,
    pub verdict: Verdict,
}

fn validate_r(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidR(r));
    }
    Ok(())
}

/// `L (2c / pi)^r`, the common type (a) factor.
fn type_a_factor(p: &ManifoldParams, r: f64) -> f64 {
    p.big_l() as f64 * (2.0 * p.c() / PI).powf(r)
}

/// `binom(j+d-1, d-1) / w^r` for one sign, j = 0..=j_max. Kernel levels give 0 or inf.
fn level_weights(p: &ManifoldParams, r: f64, sign: i64, j_max: u64, policy: KernelPolicy) -> Vec<f64> {
    let d = p.d() as u64;
    (0..=j_max)
        .map(|j| {
            let w = d as f64 + 2.0 * j as f64 - p.alpha() * sign as f64;
            let b = binomial(j + d - 1, d - 1).map(|b| b as f64).unwrap_or_else(|_| {
                // falls back to the float product for very large j
                (1..d).map(|k| (j + k) as f64 / k as f64).product()
            });
            if w == 0.0 {
                match policy {
                    KernelPolicy::Exclude => 0.0,
                    KernelPolicy::Include => f64::INFINITY,
                }
            } else {
                b / w.powf(r)
            }
        })
        .collect()
}

/// Every term of the truncated sum, in a fixed order: type (a) for n > 0 then
/// n < 0 (each by |n| then j), then type (b) shells by increasing norm.
pub fn schatten_terms(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs, policy: KernelPolicy) -> Result<Vec<f64>> {
    validate_r(r)?;
    cutoffs.validate()?;
    let mut terms = type_a_terms(p, r, cutoffs, policy)?;
    terms.extend(type_b_terms(p, r, cutoffs, policy)?);
    Ok(terms)
}

fn type_a_terms(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs, policy: KernelPolicy) -> Result<Vec<f64>> {
    let k = type_a_factor(p, r);
    let dr = p.d() as f64 - r;
    let n_pow: Vec<f64> = (1..=cutoffs.n_max).map(|n| (n as f64).powf(dr)).collect();
    let mut out = Vec::with_capacity(2 * n_pow.len() * (cutoffs.j_max as usize + 1));
    for sign in [1i64, -1] {
        let lw = level_weights(p, r, sign, cutoffs.j_max, policy);
        for np in &n_pow {
            out.extend(lw.iter().map(|w| k * np * w));
        }
    }
    Ok(out)
}

fn type_b_terms(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs, policy: KernelPolicy) -> Result<Vec<f64>> {
    let include_zero = policy == KernelPolicy::Include;
    let shells = p
        .lattice()
        .enumerate_by_norm(cutoffs.norm_sq_max, include_zero, p.point_budget())?;
    Ok(shells
        .iter()
        .map(|s| s.count as f64 * (2.0 / (PI * s.norm_sq.to_f64())).powf(r))
        .collect())
}

/// Upper bound on the tail omitted by `cutoffs`; infinite iff `r <= d + 1`.
pub fn tail_bound(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs) -> Result<TailBound> {
    validate_r(r)?;
    cutoffs.validate()?;
    Ok(match tail_parts(p, r, cutoffs)? {
        Some(t) => TailBound::Finite(t.n_tail + t.j_tail + t.lattice_tail),
        None => TailBound::Infinite,
    })
}

fn tail_parts(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs) -> Result<Option<TailParts>> {
    let d = p.d() as f64;
    if r <= d + 1.0 {
        return Ok(None);
    }
    let k = type_a_factor(p, r);
    let jm = cutoffs.j_max as f64;
    let nm = cutoffs.n_max as f64;

    // sum_{j > J} binom(j+d-1, d-1) / w^r <= (1/(d-1)!) int_J^inf (t+d-1)^{d-1} (2t)^{-r} dt
    let fact: f64 = (1..p.d()).map(|i| i as f64).product();
    let level_tail = (1.0 + (d - 1.0) / jm).powf(d - 1.0) * 2f64.powf(-r) * jm.powf(d - r) / ((r - d) * fact);

    let phi: f64 = [1i64, -1]
        .iter()
        .map(|&s| neumaier_sum(level_weights(p, r, s, cutoffs.j_max, KernelPolicy::Exclude)))
        .sum();
    let h_n = neumaier_sum((1..=cutoffs.n_max).map(|n| (n as f64).powf(d - r)));
    // sum_{n > N} n^{d-r} <= N^{d-r+1} / (r-d-1)
    let n_sum_tail = nm.powf(d - r + 1.0) / (r - d - 1.0);

    let j_tail = k * 2.0 * h_n * level_tail;
    let n_tail = k * n_sum_tail * (phi + 2.0 * level_tail);
    let lattice_tail = lattice_tail_bound(p, r, cutoffs.norm_sq_max)?;
    Ok(Some(TailParts {
        n_tail,
        j_tail,
        lattice_tail,
    }))
}

/// Bound on `sum_{|xi|^2 > R^2} (2 / (pi |xi|^2))^r` for `r > d`.
///
/// Summation by parts against the counting function N(t) gives
/// `tail = -f(R) N(R) + int_R^inf N(t) (-f'(t)) dt` with `f(t) = (2/(pi t^2))^r`;
/// N(t) is replaced by the volume bound `omega (t + rho)^{2d} / covol` inside
/// the integral and by the exact count at `R`.
pub fn lattice_tail_bound(p: &ManifoldParams, r: f64, norm_sq_max: f64) -> Result<f64> {
    let d = p.d();
    if r <= d as f64 {
        return Ok(f64::INFINITY);
    }
    let lat = p.lattice();
    let dim = lat.dim();
    let radius = norm_sq_max.sqrt();
    let rho = lat.covering_radius_bound();
    let omega = unit_ball_volume(dim) / lat.covolume();
    let kappa = (2.0 / PI).powf(r);

    // int_R^inf (t + rho)^dim 2 r kappa t^{-2r-1} dt, expanded binomially
    let mut integral = NeumaierSum::new();
    for k in 0..=dim {
        let binom = binomial(dim as u64, k as u64)? as f64;
        integral.add(binom * rho.powi((dim - k) as i32) * radius.powf(k as f64 - 2.0 * r) / (2.0 * r - k as f64));
    }
    let integral = 2.0 * r * kappa * omega * integral.value();

    let inside: u64 = lat
        .enumerate_by_norm(norm_sq_max, true, p.point_budget())?
        .iter()
        .map(|s| s.count)
        .sum();
    let boundary = kappa * radius.powf(-2.0 * r) * inside as f64;
    Ok(integral - boundary)
}

/// Lower bound on the partial sum from the non-kernel `j = 0` subfamily,
/// `sum_{n=1}^N n^{d-r} L (2c/pi)^r / (d + |alpha|)^r`. Only meaningful for `r <= d + 1`.
pub fn divergence_witness(p: &ManifoldParams, r: f64, n: u64) -> Result<f64> {
    validate_r(r)?;
    let d = p.d() as f64;
    if r > d + 1.0 {
        return Err(Error::InvalidUse(format!(
            "divergence witness requires r <= d + 1 = {}, got r = {r}",
            d + 1.0
        )));
    }
    let k = witness_factor(p, r);
    Ok(k * neumaier_sum((1..=n).map(|m| (m as f64).powf(d - r))))
}

fn witness_factor(p: &ManifoldParams, r: f64) -> f64 {
    type_a_factor(p, r) / (p.d() as f64 + p.alpha().abs()).powf(r)
}

/// Predicted growth of the witness between `n_lo` and `n_hi`: the integral of
/// `t^{d-r}` (logarithmic at `r = d + 1`, power law below).
pub fn witness_growth_prediction(p: &ManifoldParams, r: f64, n_lo: u64, n_hi: u64) -> f64 {
    let q = p.d() as f64 - r + 1.0;
    let (lo, hi) = (n_lo as f64, n_hi as f64);
    let integral = if q == 0.0 {
        (hi / lo).ln()
    } else {
        (hi.powf(q) - lo.powf(q)) / q
    };
    witness_factor(p, r) * integral
}

/// Witness values at `ns` with observed and predicted increments.
pub fn growth_witness(p: &ManifoldParams, r: f64, ns: &[u64]) -> Result<GrowthWitness> {
    let points = ns
        .iter()
        .map(|&n| divergence_witness(p, r, n).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    let increments = points
        .windows(2)
        .map(|w| (w[1].1 - w[0].1, witness_growth_prediction(p, r, w[0].0, w[1].0)))
        .collect();
    Ok(GrowthWitness { points, increments })
}

/// Truncated Schatten sum with tail bound and convergence verdict.
pub fn schatten_partial(p: &ManifoldParams, r: f64, cutoffs: &Cutoffs) -> Result<SchattenReport> {
    schatten_partial_with(p, r, cutoffs, KernelPolicy::Exclude)
}

/// [`schatten_partial`] with an explicit kernel policy.
pub fn schatten_partial_with(
    p: &ManifoldParams,
    r: f64,
    cutoffs: &Cutoffs,
    policy: KernelPolicy,
) -> Result<SchattenReport> {
    validate_r(r)?;
    cutoffs.validate()?;
    let a_terms = type_a_terms(p, r, cutoffs, policy)?;
    let b_terms = type_b_terms(p, r, cutoffs, policy)?;
    let type_a_partial = neumaier_sum(a_terms.iter().copied());
    let type_b_partial = neumaier_sum(b_terms.iter().copied());
    let partial_sum = neumaier_sum(a_terms.into_iter().chain(b_terms));

    let parts = tail_parts(p, r, cutoffs)?;
    let tail_upper_bound = match parts {
        Some(t) => TailBound::Finite(t.n_tail + t.j_tail + t.lattice_tail),
        None => TailBound::Infinite,
    };
    let threshold = p.d() as f64 + 1.0;
    let verdict = match tail_upper_bound {
        TailBound::Finite(t) => Verdict::Converges {
            norm_upper_bound: (partial_sum + t).powf(1.0 / r),
            norm_lower_bound: partial_sum.powf(1.0 / r),
        },
        TailBound::Infinite => {
            let n = cutoffs.n_max;
            Verdict::Diverges {
                growth_witness: growth_witness(p, r, &[n, 10 * n, 100 * n])?,
            }
        }
    };
    Ok(SchattenReport {
        r,
        cutoffs: *cutoffs,
        partial_sum,
        type_a_partial,
        type_b_partial,
        tail_upper_bound,
        tail_parts: parts,
        lower_bound_at_cutoff: partial_sum,
        threshold,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(d: u32, c: f64, alpha: f64) -> ManifoldParams {
        ManifoldParams::standard(d, c, alpha, 1).unwrap()
    }

    const CUT: Cutoffs = Cutoffs {
        n_max: 200,
        j_max: 200,
        norm_sq_max: 400.0,
    };

    #[test]
    fn threshold_d1() {
        let p = params(1, 1.0, 0.0);
        assert!(schatten_partial(&p, 3.0, &CUT).unwrap().verdict.converges());
        let rep = schatten_partial(&p, 2.0, &CUT).unwrap();
        assert!(!rep.verdict.converges());
        assert_eq!(rep.tail_upper_bound, TailBound::Infinite);
    }

    #[test]
    fn z2_lattice_part_matches_oracle() {
        // mpmath brute force: (2/pi)^3 sum_{0 < |z|^2 <= 400} |z|^{-6}
        let p = params(1, FRAC_PI_2, 0.0);
        let rep = schatten_partial(&p, 3.0, &CUT).unwrap();
        assert!((rep.type_b_partial - 1.2020543704441382).abs() < 1e-14);
        // the full lattice sum is (2/pi)^3 * 4 zeta(3) beta(3) = zeta(3)
        let true_tail = 1.2020569031595943 - 1.2020543704441382;
        let bound = lattice_tail_bound(&p, 3.0, 400.0).unwrap();
        assert!(bound >= true_tail, "{bound} < {true_tail}");
        assert!(bound < 2.0 * true_tail);
    }

    #[test]
    fn lattice_tail_dominates_brute_force_reference() {
        // (2/pi)^3 sum_{400 < |z|^2 <= 10000} |z|^{-6}, mpmath
        let reference = 9.80055254016941e-6 * (2.0 / PI).powi(3);
        let p = params(1, 1.0, 0.0);
        assert!(lattice_tail_bound(&p, 3.0, 400.0).unwrap() >= reference);
    }

    #[test]
    fn tails_shrink_with_cutoffs() {
        let p = params(2, 1.0, 1.0);
        let r = 4.0;
        let small = tail_bound(&p, r, &Cutoffs::new(20, 20, 20.0)).unwrap().finite().unwrap();
        let large = tail_bound(&p, r, &Cutoffs::new(80, 80, 80.0)).unwrap().finite().unwrap();
        assert!(large < small);
        assert_eq!(tail_bound(&p, 3.0, &CUT).unwrap(), TailBound::Infinite);
        assert_eq!(tail_bound(&p, 2.5, &CUT).unwrap(), TailBound::Infinite);
    }

    #[test]
    fn invalid_r_rejected() {
        let p = params(1, 1.0, 0.0);
        assert_eq!(schatten_partial(&p, 0.5, &CUT).unwrap_err(), Error::InvalidR(0.5));
        assert!(matches!(divergence_witness(&p, 3.0, 10), Err(Error::InvalidUse(_))));
    }

    #[test]
    fn witness_log_growth() {
        let p = params(1, FRAC_PI_2, 0.0);
        let w3 = divergence_witness(&p, 2.0, 1_000).unwrap();
        let w6 = divergence_witness(&p, 2.0, 1_000_000).unwrap();
        // H_{10^6} / H_{10^3} = 14.392726722865723 / 7.485470860550345
        let ratio = w6 / w3;
        assert!((ratio - 1.9227550265031).abs() < 1e-9, "{ratio}");
        // removing Euler's constant leaves ln(10^6) / ln(10^3)
        let k = (2.0 * FRAC_PI_2 / PI).powi(2);
        let g = 0.5772156649015329 * k;
        assert!(((w6 - g) / (w3 - g) - 2.0).abs() < 1e-3);
        let inc = divergence_witness(&p, 2.0, 10_000).unwrap() - w3;
        let pred = witness_growth_prediction(&p, 2.0, 1_000, 10_000);
        assert!((inc - pred).abs() / pred < 0.05);
        assert!((pred - 10f64.ln() * (2.0 * FRAC_PI_2 / PI).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn witness_is_increasing() {
        let p = params(2, 1.0, -1.0);
        let mut prev = 0.0;
        for n in 1..200 {
            let v = divergence_witness(&p, 2.5, n).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn kernel_policy_changes_endpoint_sum() {
        let p = params(1, 1.0, 1.0);
        let cut = Cutoffs::new(20, 20, 20.0);
        let ok = schatten_partial(&p, 3.0, &cut).unwrap();
        let bad = schatten_partial_with(&p, 3.0, &cut, KernelPolicy::Include).unwrap();
        assert!(ok.partial_sum.is_finite());
        assert_ne!(ok.partial_sum, bad.partial_sum);
    }

    #[test]
    fn symmetric_in_alpha() {
        let cut = Cutoffs::new(50, 50, 30.0);
        for alpha in [0.5, 1.0, 2.0] {
            let a = schatten_partial(&params(2, 1.0, alpha), 3.5, &cut).unwrap();
            let b = schatten_partial(&params(2, 1.0, -alpha), 3.5, &cut).unwrap();
            assert!((a.partial_sum - b.partial_sum).abs() <= 1e-13 * a.partial_sum);
        }
    }
}
