//! Spectral functions, the Green operator and Sobolev norms.
//!
//! Functions are finite coefficient vectors on an abstract orthonormal
//! eigenbasis: each term names an eigenspace and a slot inside it. The Green
//! operator divides by `lambda` off the kernel and kills the kernel.
//!
//! The sharp one-derivative gain constant is `sup (1 + mu)^{1/2} / lambda`
//! over the non-kernel spectrum. Along type (a) the ratio decreases in `|n|`
//! and in `j`, and along the shells it decreases in `|xi|`, so the supremum is
//! attained on a short explicit candidate list.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{rel_close, Scalar};
use crate::spectrum::{
    is_kernel, lambda_of, mu_of, multiplicity_of, spectrum_records, EigenIndex, ManifoldParams,
};
use crate::sum::NeumaierSum;

/// Slack factor applied to the right-hand side of the gain inequality.
pub const GAIN_SLACK: f64 = 1e-12;

/// Step for the central differences in [`monotonicity_check`].
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTerm {
    pub index: EigenIndex,
    pub slot: u64,
    pub coeff: Complex64,
}

/// A finite linear combination of eigenfunctions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralFunction {
    terms: Vec<SpectralTerm>,
}

impl SpectralFunction {
    /// Validates slots, duplicate pairs and, for type (b), that the shell exists.
    ///
    /// A type (b) index may carry `count = 0`, meaning "look it up"; the stored
    /// index then carries the true shell size.
    pub fn new(p: &ManifoldParams, terms: Vec<SpectralTerm>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut shells: BTreeMap<String, u64> = BTreeMap::new();
        let mut out = Vec::with_capacity(terms.len());
        for (ordinal, mut t) in terms.into_iter().enumerate() {
            let bad = |reason: String| Error::InvalidTerm { ordinal, reason };
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(bad("coefficient is not finite".into()));
            }
            let mult = match &mut t.index {
                EigenIndex::TypeA { n, j } => {
                    if *n == 0 {
                        return Err(bad("type A index needs n != 0".into()));
                    }
                    match multiplicity_of(p, &EigenIndex::TypeA { n: *n, j: *j }) {
                        Ok(m) => m,
                        Err(Error::Overflow(_)) => u64::MAX,
                        Err(e) => return Err(e),
                    }
                }
                EigenIndex::TypeB { norm_sq, count } => {
                    let key = norm_sq.to_string();
                    let found = match shells.get(&key) {
                        Some(&m) => m,
                        None => {
                            let m = shell_size(p, norm_sq)?;
                            shells.insert(key, m);
                            m
                        }
                    };
                    if found == 0 {
                        return Err(bad(format!("no lattice vector has squared norm {norm_sq}")));
                    }
                    if *count != 0 && *count != found {
                        return Err(bad(format!("shell {norm_sq} has {found} points, not {count}")));
                    }
                    *count = found;
                    found
                }
            };
            if t.slot >= mult {
                return Err(bad(format!(
                    "slot {} out of range for {} (multiplicity {mult})",
                    t.slot, t.index
                )));
            }
            if !seen.insert((t.index.to_string(), t.slot)) {
                return Err(bad(format!("duplicate term {} slot {}", t.index, t.slot)));
            }
            out.push(t);
        }
        Ok(Self { terms: out })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[SpectralTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `k f`.
    pub fn scale(&self, k: Complex64) -> Self {
        self.map(|_, c| Some(c * k))
    }

    fn map(&self, mut f: impl FnMut(&EigenIndex, Complex64) -> Option<Complex64>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter_map(|t| {
                    f(&t.index, t.coeff).map(|coeff| SpectralTerm {
                        index: t.index.clone(),
                        slot: t.slot,
                        coeff,
                    })
                })
                .collect(),
        }
    }
}

fn shell_size(p: &ManifoldParams, norm_sq: &Scalar) -> Result<u64> {
    let target = norm_sq.to_f64();
    if !(target >= 0.0) || !target.is_finite() {
        return Ok(0);
    }
    let shells = p.lattice().enumerate_by_norm(target, true, p.point_budget())?;
    Ok(shells
        .iter()
        .find(|s| match (s.norm_sq.as_rational(), norm_sq.as_rational()) {
            (Some(a), Some(b)) => a == b,
            _ => rel_close(s.norm_sq.to_f64(), target, crate::lattice::FLOAT_SHELL_TOL),
        })
        .map_or(0, |s| s.count))
}

/// `sqrt(sum |c|^2)`.
pub fn l2_norm(f: &SpectralFunction) -> f64 {
    let mut acc = NeumaierSum::new();
    for t in f.terms() {
        acc.add(t.coeff.norm_sqr());
    }
    acc.value().sqrt()
}

/// `sqrt(sum (1 + mu)^s |c|^2)`, with `mu` the eigenvalue of `L_eps`.
pub fn sobolev_norm(p: &ManifoldParams, f: &SpectralFunction, s: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for t in f.terms() {
        acc.add((1.0 + mu_of(p, &t.index)).powf(s) * t.coeff.norm_sqr());
    }
    acc.value().sqrt()
}

/// The Green operator: divide by `lambda`, drop kernel terms.
pub fn green_apply(p: &ManifoldParams, f: &SpectralFunction) -> SpectralFunction {
    f.map(|idx, c| (!is_kernel(p, idx)).then(|| c / lambda_of(p, idx)))
}

/// `L_alpha f`; kernel terms vanish and are dropped.
pub fn operator_apply(p: &ManifoldParams, f: &SpectralFunction) -> SpectralFunction {
    f.map(|idx, c| (!is_kernel(p, idx)).then(|| c * lambda_of(p, idx)))
}

/// `(1 + mu)^{s/2} / lambda` on a non-kernel eigenspace.
pub fn ratio(p: &ManifoldParams, idx: &EigenIndex, s: f64) -> Result<f64> {
    if is_kernel(p, idx) {
        return Err(Error::KernelIndex(idx.to_string()));
    }
    Ok((1.0 + mu_of(p, idx)).powf(s / 2.0) / lambda_of(p, idx))
}

/// An eigenspace where the ratio supremum may be attained.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub index: EigenIndex,
    pub lambda: f64,
    pub value: f64,
}

/// Candidate eigenspaces for the supremum of the ratio at any `s <= 1`:
/// `|n| = 1` at the smallest non-kernel level of each relevant sign, and the
/// shortest lattice shell.
pub fn ratio_candidates(p: &ManifoldParams, s: f64) -> Result<Vec<Candidate>> {
    let sgn = if p.alpha() < 0.0 { -1 } else { 1 };
    let mut idx = if p.is_endpoint() {
        vec![EigenIndex::TypeA { n: sgn, j: 1 }, EigenIndex::TypeA { n: -sgn, j: 0 }]
    } else {
        vec![EigenIndex::TypeA { n: sgn, j: 0 }]
    };
    idx.push(EigenIndex::type_b(&p.lattice().minimal_vector()?));
    idx.into_iter()
        .map(|index| {
            Ok(Candidate {
                lambda: lambda_of(p, &index),
                value: ratio(p, &index, s)?,
                index,
            })
        })
        .collect()
}

/// The sharp constant from the explicit formula:
///
/// ```text
/// |alpha| < d:  max{ sqrt(1 + a d + eps a^2) / (a (d - |alpha|)),  sqrt(1 + t0) / t0 }
/// |alpha| = d:  max{ sqrt(1 + a (d + 2) + eps a^2) / (2a),
///                    sqrt(1 + a d + eps a^2) / (2 a d),           sqrt(1 + t0) / t0 }
/// ```
///
/// with `a = pi / 2c` and `t0 = (pi/2) |xi_0|^2` for the shortest lattice vector.
pub fn closed_form_constant(p: &ManifoldParams) -> Result<f64> {
    let a = p.scale();
    let d = p.d() as f64;
    let eps = p.epsilon();
    let t0 = 0.5 * PI * p.lattice().minimal_vector()?.norm_sq.to_f64();
    let lattice_term = (1.0 + t0).sqrt() / t0;
    let a_term = if p.is_endpoint() {
        let same = (1.0 + a * (d + 2.0) + eps * a * a).sqrt() / (2.0 * a);
        let opposite = (1.0 + a * d + eps * a * a).sqrt() / (2.0 * a * d);
        same.max(opposite)
    } else {
        (1.0 + a * d + eps * a * a).sqrt() / (a * (d - p.alpha().abs()))
    };
    Ok(a_term.max(lattice_term))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReport {
    pub closed_form: f64,
    /// Largest ratio at `s = 1` over the non-kernel spectrum with `lambda <= probe`.
    pub numeric_sup: f64,
    pub argmax: EigenIndex,
    pub candidates: Vec<Candidate>,
    pub probe: f64,
}

/// Closed form and numeric supremum of `(1 + mu)^{1/2} / lambda`.
pub fn sharp_constant(p: &ManifoldParams, lambda_max_probe: f64) -> Result<ConstantReport> {
    let candidates = ratio_candidates(p, 1.0)?;
    if let Some(c) = candidates.iter().find(|c| c.lambda > lambda_max_probe) {
        return Err(Error::ProbeTooSmall {
            probe: lambda_max_probe,
            candidate: c.index.to_string(),
            lambda: c.lambda,
        });
    }
    let (numeric_sup, argmax) = numeric_sup(p, 1.0, lambda_max_probe)?;
    Ok(ConstantReport {
        closed_form: closed_form_constant(p)?,
        numeric_sup,
        argmax,
        candidates,
        probe: lambda_max_probe,
    })
}

/// Maximum ratio over the enumerated non-kernel spectrum; ties go to the
/// first eigenspace in spectrum order.
fn numeric_sup(p: &ManifoldParams, s: f64, lambda_max: f64) -> Result<(f64, EigenIndex)> {
    let mut best: Option<(f64, EigenIndex)> = None;
    for rec in spectrum_records(p, lambda_max)? {
        if is_kernel(p, &rec.index) {
            continue;
        }
        let v = ratio(p, &rec.index, s)?;
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, rec.index));
        }
    }
    best.ok_or_else(|| Error::InvalidUse(format!("no non-kernel eigenvalue below {lambda_max}")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatioVerdict {
    Bounded {
        sup: f64,
        argmax: EigenIndex,
    },
    /// Ratios along a subsequence on which they increase without bound.
    Unbounded {
        witness: Vec<(EigenIndex, f64)>,
    },
}

impl RatioVerdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self, RatioVerdict::Bounded { .. })
    }
}

/// Boundedness of `(1 + mu)^{s/2} / lambda` over the whole spectrum.
///
/// For `s <= 1` the supremum sits on [`ratio_candidates`]; it is recomputed
/// over the spectrum up to twice the largest candidate eigenvalue. For `s > 1`
/// the witness runs along `j = 0` with the sign of `n` opposite to `alpha`,
/// at `|n| = 2^k` for `probe_depth + 1` consecutive `k`, starting where the
/// ratio has become increasing.
pub fn ratio_bounded_verdict(p: &ManifoldParams, s: f64, probe_depth: u32) -> Result<RatioVerdict> {
    validate_depth(probe_depth)?;
    if !s.is_finite() {
        return Err(Error::param("s", format!("must be finite, got {s}")));
    }
    if s <= 1.0 {
        let cands = ratio_candidates(p, s)?;
        let reach = cands.iter().map(|c| c.lambda).fold(0.0, f64::max);
        let (sup, argmax) = numeric_sup(p, s, 2.0 * reach)?;
        return Ok(RatioVerdict::Bounded { sup, argmax });
    }
    let a = p.scale();
    let d = p.d() as f64;
    let eps = p.epsilon();
    // (1 + a d x + eps a^2 x^2)^{s/2} / x increases once
    // (s-1) eps a^2 x^2 + (s/2 - 1) a d x - 1 > 0
    let (qa, qb) = ((s - 1.0) * eps * a * a, (s / 2.0 - 1.0) * a * d);
    let root = (-qb + (qb * qb + 4.0 * qa).sqrt()) / (2.0 * qa);
    let k0 = root.max(1.0).log2().ceil() as u32;
    let sign = if p.alpha() >= 0.0 { -1 } else { 1 };
    let witness = (k0..=k0 + probe_depth)
        .map(|k| {
            let n = 1i64
                .checked_shl(k)
                .filter(|&n| n > 0 && k < 62)
                .ok_or(Error::Overflow("witness index 2^k"))?;
            let idx = EigenIndex::TypeA { n: sign * n, j: 0 };
            Ok((idx.clone(), ratio(p, &idx, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioVerdict::Unbounded { witness })
}

/// [`ratio_bounded_verdict`] restricted to the lattice shells, where
/// `mu = lambda` and the ratio `(1 + t)^{s/2} / t` is bounded iff `s <= 2`.
/// The witness runs along the multiples `2^k xi_0` once the ratio is increasing.
pub fn type_b_ratio_verdict(p: &ManifoldParams, s: f64, probe_depth: u32) -> Result<RatioVerdict> {
    validate_depth(probe_depth)?;
    let min = p.lattice().minimal_vector()?;
    let idx_at = |k: u32| -> Result<EigenIndex> {
        let f = 4u64.checked_pow(k).ok_or(Error::Overflow("witness shell 4^k"))?;
        let norm_sq = match &min.norm_sq {
            Scalar::Rational(q) => Scalar::Rational(q * num_bigint::BigInt::from(f)),
            Scalar::Float(x) => Scalar::Float(x * f as f64),
        };
        Ok(EigenIndex::TypeB { norm_sq, count: 0 })
    };
    let value = |idx: &EigenIndex| {
        let t = lambda_of(p, idx);
        (1.0 + t).powf(s / 2.0) / t
    };
    if s <= 2.0 {
        let argmax = EigenIndex::type_b(&min);
        return Ok(RatioVerdict::Bounded {
            sup: value(&argmax),
            argmax,
        });
    }
    // (1 + t)^{s/2} / t increases once t > 1 / (s/2 - 1)
    let t0 = lambda_of(p, &EigenIndex::type_b(&min));
    let k0 = (1.0 / ((s / 2.0 - 1.0) * t0)).max(1.0).log(4.0).ceil() as u32;
    let witness = (k0..=k0 + probe_depth)
        .map(|k| {
            let idx = idx_at(k)?;
            let v = value(&idx);
            Ok((idx, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioVerdict::Unbounded { witness })
}

fn validate_depth(depth: u32) -> Result<()> {
    if depth == 0 {
        return Err(Error::param("probe_depth", "must be >= 1"));
    }
    Ok(())
}

/// The auxiliary function of the monotonicity argument,
/// `f(x, y) = (1 + a x (d + 2y) + eps a^2 x^2) / (a^2 x^2 (d + 2y - |alpha|)^2)`,
/// which is the squared ratio at `s = 1` for `|n| = x`, `j = y` on the worse sign.
pub fn monotonicity_f(p: &ManifoldParams, x: f64, y: f64) -> f64 {
    let (a, d, al) = (p.scale(), p.d() as f64, p.alpha().abs());
    let w = d + 2.0 * y - al;
    (1.0 + a * x * (d + 2.0 * y) + p.epsilon() * a * a * x * x) / (a * a * x * x * w * w)
}

/// Closed-form `df/dx = -(a x (d + 2y) + 2) / (a^2 x^3 w^2)`.
pub fn monotonicity_dfdx(p: &ManifoldParams, x: f64, y: f64) -> f64 {
    let (a, d, al) = (p.scale(), p.d() as f64, p.alpha().abs());
    let w = d + 2.0 * y - al;
    -(a * x * (d + 2.0 * y) + 2.0) / (a * a * x * x * x * w * w)
}

/// Closed-form `df/dy = -2 (a x (d + 2y) + a x |alpha| + 2 + 2 eps a^2 x^2) / (a^2 x^2 w^3)`.
pub fn monotonicity_dfdy(p: &ManifoldParams, x: f64, y: f64) -> f64 {
    let (a, d, al) = (p.scale(), p.d() as f64, p.alpha().abs());
    let w = d + 2.0 * y - al;
    let num = a * x * (d + 2.0 * y) + a * x * al + 2.0 + 2.0 * p.epsilon() * a * a * x * x;
    -2.0 * num / (a * a * x * x * w * w * w)
}

/// Axes of a monotonicity grid; both strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid {
    /// `x = 1..=nx`, `y = y0..y0 + ny`.
    pub fn integer(nx: u32, ny: u32, y0: u32) -> Self {
        Self {
            xs: (1..=nx).map(f64::from).collect(),
            ys: (y0..y0 + ny).map(f64::from).collect(),
        }
    }
}

/// Checks that `f` is nonincreasing along both axes and that both closed-form
/// partials are negative and match central differences.
///
/// At `|alpha| = d` the denominator of `f` vanishes at `y = 0` (that level is
/// the kernel), so the grid must then have `y > 0`.
pub fn monotonicity_check(p: &ManifoldParams, grid: &Grid) -> Result<bool> {
    let bad = |m: String| Err(Error::InvalidGrid(m));
    if grid.xs.is_empty() || grid.ys.is_empty() {
        return bad("grid axes must be nonempty".into());
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
    if !increasing(&grid.xs) || !increasing(&grid.ys) {
        return bad("grid axes must be finite and strictly increasing".into());
    }
    if grid.xs[0] <= 0.0 {
        return bad(format!("x must be > 0, got {}", grid.xs[0]));
    }
    if grid.ys[0] < 0.0 {
        return bad(format!("y must be >= 0, got {}", grid.ys[0]));
    }
    if p.is_endpoint() && grid.ys[0] <= FD_STEP {
        return bad("at |alpha| = d the grid needs y > 0".into());
    }

    let f = |x, y| monotonicity_f(p, x, y);
    let h = FD_STEP;
    let close = |fd: f64, cf: f64| (fd - cf).abs() <= f64::max(1e-6, 1e-4 * cf.abs());
    for (ix, &x) in grid.xs.iter().enumerate() {
        for (iy, &y) in grid.ys.iter().enumerate() {
            let v = f(x, y);
            if ix > 0 && v > f(grid.xs[ix - 1], y) {
                return Ok(false);
            }
            if iy > 0 && v > f(x, grid.ys[iy - 1]) {
                return Ok(false);
            }
            let (dx, dy) = (monotonicity_dfdx(p, x, y), monotonicity_dfdy(p, x, y));
            if !(dx < 0.0 && dy < 0.0) {
                return Ok(false);
            }
            let fdx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let fdy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            if !close(fdx, dx) || !close(fdy, dy) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainCheck {
    /// `||G f||_{s+1}`.
    pub lhs: f64,
    /// `C ||f||_s` with the closed-form constant.
    pub rhs: f64,
    pub holds: bool,
}

/// `||G f||_{s+1} <= C ||f||_s`, up to the factor `1 + GAIN_SLACK`.
pub fn sobolev_gain_check(p: &ManifoldParams, f: &SpectralFunction, s: f64) -> Result<GainCheck> {
    let c = closed_form_constant(p)?;
    Ok(gain_check_with(p, f, s, c))
}

/// [`sobolev_gain_check`] against a precomputed constant.
pub fn gain_check_with(p: &ManifoldParams, f: &SpectralFunction, s: f64, constant: f64) -> GainCheck {
    let lhs = sobolev_norm(p, &green_apply(p, f), s + 1.0);
    let rhs = constant * sobolev_norm(p, f, s);
    GainCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + GAIN_SLACK),
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} lambda={} value={}", self.index, self.lambda, self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    use proptest::prelude::*;

    fn params(d: u32, c: f64, alpha: f64) -> ManifoldParams {
        ManifoldParams::standard(d, c, alpha, 1).unwrap()
    }

    fn a(n: i64, j: u64) -> EigenIndex {
        EigenIndex::TypeA { n, j }
    }

    fn b(q: i64) -> EigenIndex {
        EigenIndex::TypeB {
            norm_sq: Scalar::integer(q),
            count: 0,
        }
    }

    fn term(index: EigenIndex, slot: u64, re: f64, im: f64) -> SpectralTerm {
        SpectralTerm {
            index,
            slot,
            coeff: Complex64::new(re, im),
        }
    }

    #[test]
    fn l2_examples() {
        let p = params(1, 1.0, 0.0);
        assert_eq!(l2_norm(&SpectralFunction::zero()), 0.0);
        let f = SpectralFunction::new(&p, vec![term(a(1, 0), 0, 3.0, 0.0)]).unwrap();
        assert_eq!(l2_norm(&f), 3.0);
        let f = SpectralFunction::new(&p, vec![term(b(1), 0, 3.0, 0.0), term(b(1), 1, 0.0, 4.0)]).unwrap();
        assert_eq!(l2_norm(&f), 5.0);
    }

    #[test]
    fn validation() {
        let p = params(1, 1.0, 0.0);
        let err = SpectralFunction::new(&p, vec![term(b(1), 4, 1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidTerm { ordinal: 0, .. }));
        let err = SpectralFunction::new(&p, vec![term(b(3), 0, 1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidTerm { .. }));
        let dup = vec![term(a(2, 1), 1, 1.0, 0.0), term(a(2, 1), 1, 2.0, 0.0)];
        assert!(matches!(SpectralFunction::new(&p, dup), Err(Error::InvalidTerm { ordinal: 1, .. })));
        // |n|^d L binom(j+d-1, d-1) = 2 at n = 2, d = 1
        assert!(SpectralFunction::new(&p, vec![term(a(2, 7), 2, 1.0, 0.0)]).is_err());
        let f = SpectralFunction::new(&p, vec![term(b(5), 7, 1.0, 0.0)]).unwrap();
        assert_eq!(f.terms()[0].index, EigenIndex::TypeB { norm_sq: Scalar::integer(5), count: 8 });
    }

    #[test]
    fn sobolev_examples() {
        // d = 1, c = pi/2: mu(A(+-1, 0)) = 1 + 1 = 2
        let p = params(1, FRAC_PI_2, 0.0);
        let f = SpectralFunction::new(&p, vec![term(a(1, 0), 0, 1.0, 0.0)]).unwrap();
        assert_eq!(sobolev_norm(&p, &f, 0.0), l2_norm(&f));
        let g = SpectralFunction::new(&p, vec![term(a(-1, 0), 0, 1.0, 0.0)]).unwrap();
        assert!((sobolev_norm(&p, &g, 2.0) - 3.0).abs() < 1e-15);
        assert!((sobolev_norm(&p, &g, -2.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sobolev_mu_three() {
        // d = 2, c = pi/2: mu(A(1,0)) = 2 + 1 = 3
        let p = params(2, FRAC_PI_2, 0.0);
        let f = SpectralFunction::new(&p, vec![term(a(1, 0), 0, 1.0, 0.0)]).unwrap();
        assert_eq!(sobolev_norm(&p, &f, 2.0), 4.0);
        assert_eq!(sobolev_norm(&p, &f, -2.0), 0.25);
    }

    #[test]
    fn green_examples() {
        let p = params(1, 1.0, 1.0);
        let constant = SpectralFunction::new(&p, vec![term(b(0), 0, 1.0, 0.0)]).unwrap();
        assert!(green_apply(&p, &constant).is_empty());
        assert!(operator_apply(&p, &constant).is_empty());
        let kernel = SpectralFunction::new(&p, vec![term(a(1, 0), 0, 1.0, 0.0)]).unwrap();
        assert!(green_apply(&p, &kernel).is_empty());
        // lambda(A(-1,0)) = (pi/2) * 2 = pi
        let f = SpectralFunction::new(&p, vec![term(a(-1, 0), 0, PI, 0.0)]).unwrap();
        assert_eq!(green_apply(&p, &f).terms()[0].coeff, Complex64::new(1.0, 0.0));

        let q = params(1, FRAC_PI_2, 0.0);
        // lambda(A(1,1)) = 3, lambda(B(1)) = pi/2
        let f = SpectralFunction::new(&q, vec![term(b(1), 0, 2.0, 0.0)]).unwrap();
        assert_eq!(operator_apply(&q, &f).terms()[0].coeff, Complex64::new(PI, 0.0));
        let q2 = params(2, FRAC_PI_2, 0.0);
        let f = SpectralFunction::new(&q2, vec![term(a(1, 0), 0, 1.0, 0.0)]).unwrap();
        assert_eq!(green_apply(&q2, &f).terms()[0].coeff, Complex64::new(0.5, 0.0));
    }

    #[test]
    fn ratio_examples() {
        let p = params(1, FRAC_PI_2, 0.0);
        assert!((ratio(&p, &a(1, 0), 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        let t = 0.5 * PI * 2.0;
        assert!((ratio(&p, &b(2), 2.0).unwrap() - (1.0 + t) / t).abs() < 1e-15);
        assert_eq!(ratio(&p, &b(2), 0.0).unwrap(), 1.0 / t);
        assert!(matches!(ratio(&p, &b(0), 1.0), Err(Error::KernelIndex(_))));
        let q = params(1, 1.0, -1.0);
        assert!(matches!(ratio(&q, &a(-3, 0), 1.0), Err(Error::KernelIndex(_))));
    }

    #[test]
    fn sharp_constant_sqrt3() {
        let p = params(1, FRAC_PI_2, 0.0);
        let rep = sharp_constant(&p, 100.0).unwrap();
        assert!((rep.closed_form - 3f64.sqrt()).abs() <= 1e-15);
        assert!((rep.numeric_sup - rep.closed_form).abs() <= 1e-12 * rep.closed_form);
        assert_eq!(rep.argmax, a(1, 0));
        let lattice_value = (1.0 + FRAC_PI_2).sqrt() / FRAC_PI_2;
        assert!(rep.candidates.iter().any(|c| (c.value - lattice_value).abs() < 1e-15));
    }

    #[test]
    fn fine_lattice_dominates() {
        let rows = vec![
            vec![Scalar::ratio(1, 10), Scalar::integer(0)],
            vec![Scalar::integer(0), Scalar::ratio(1, 10)],
        ];
        let lat = std::sync::Arc::new(crate::lattice::make_lattice(rows).unwrap());
        let p = ManifoldParams::new(1, Scalar::Float(FRAC_PI_2), 0.0, 1, lat).unwrap();
        let rep = sharp_constant(&p, 10.0).unwrap();
        assert!(matches!(rep.argmax, EigenIndex::TypeB { .. }));
        let t0 = 0.5 * PI * 0.01;
        assert!((rep.closed_form - (1.0 + t0).sqrt() / t0).abs() < 1e-12 * rep.closed_form);
        assert!((rep.numeric_sup - rep.closed_form).abs() <= 1e-12 * rep.closed_form);
    }

    #[test]
    fn sharp_constant_grid_small() {
        for d in 1..=2u32 {
            let df = d as f64;
            for alpha in [0.0, df / 2.0, -df / 2.0, df, -df] {
                for c in [1.0, FRAC_PI_2] {
                    let p = params(d, c, alpha);
                    let rep = sharp_constant(&p, 60.0).unwrap();
                    let rel = (rep.numeric_sup - rep.closed_form).abs() / rep.closed_form;
                    assert!(rel <= 1e-12, "d={d} alpha={alpha} c={c}: {rep:?}");
                }
            }
        }
    }

    #[test]
    fn probe_too_small() {
        let p = params(1, FRAC_PI_2, 0.0);
        assert!(matches!(sharp_constant(&p, 0.5), Err(Error::ProbeTooSmall { .. })));
    }

    #[test]
    fn ratio_verdicts() {
        let p = params(1, FRAC_PI_2, 0.0);
        match ratio_bounded_verdict(&p, 1.0, 10).unwrap() {
            RatioVerdict::Bounded { sup, .. } => assert!((sup - 3f64.sqrt()).abs() < 1e-15),
            v => panic!("{v:?}"),
        }
        for s in [1.01, 1.5, 2.0] {
            match ratio_bounded_verdict(&p, s, 10).unwrap() {
                RatioVerdict::Unbounded { witness } => {
                    assert_eq!(witness.len(), 11);
                    assert!(witness.windows(2).all(|w| w[1].1 > w[0].1));
                    assert!(witness.iter().all(|(i, _)| matches!(i, EigenIndex::TypeA { n, j: 0 } if *n < 0)));
                }
                v => panic!("{v:?}"),
            }
        }
        assert!(type_b_ratio_verdict(&p, 2.0, 5).unwrap().is_bounded());
        match type_b_ratio_verdict(&p, 2.5, 5).unwrap() {
            RatioVerdict::Unbounded { witness } => assert!(witness.windows(2).all(|w| w[1].1 > w[0].1)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn monotonicity_examples() {
        let p = params(1, FRAC_PI_2, 0.0);
        assert!(monotonicity_check(&p, &Grid::integer(20, 21, 0)).unwrap());
        assert!(monotonicity_f(&p, 1.0, 0.0) > monotonicity_f(&p, 2.0, 0.0));
        let (x, y) = (3.0, 4.0);
        let h = FD_STEP;
        let fd = (monotonicity_f(&p, x + h, y) - monotonicity_f(&p, x - h, y)) / (2.0 * h);
        let cf = monotonicity_dfdx(&p, x, y);
        assert!((fd - cf).abs() <= f64::max(1e-6, 1e-4 * cf.abs()));
        let e = params(1, 1.0, 1.0);
        assert!(matches!(monotonicity_check(&e, &Grid::integer(5, 5, 0)), Err(Error::InvalidGrid(_))));
        assert!(monotonicity_check(&e, &Grid::integer(20, 20, 1)).unwrap());
    }

    #[test]
    fn partials_match_c_form() {
        // the same derivatives written in terms of c instead of a = pi / 2c
        for (d, c, al) in [(1u32, 1.0, 0.5), (2, FRAC_PI_2, 1.0), (3, 1.0, 0.0)] {
            let p = params(d, c, al);
            let df = d as f64;
            for (x, y) in [(1.0, 0.0), (3.0, 4.0), (7.5, 2.25)] {
                let w = df + 2.0 * y - al;
                let fx = -2.0 * c * ((PI * df + 2.0 * PI * y) * x + 4.0 * c) / (PI * PI * w * w * x.powi(3));
                let fy = -4.0 * (2.0 * PI * c * x * y + PI * PI * x * x + PI * c * (df + al) * x + 4.0 * c * c)
                    / (PI * PI * x * x * w.powi(3));
                assert!(rel_close(monotonicity_dfdx(&p, x, y), fx, 1e-13));
                assert!(rel_close(monotonicity_dfdy(&p, x, y), fy, 1e-13));
            }
        }
    }

    #[test]
    fn gain_equality_at_argmax() {
        let p = params(2, 1.0, 1.0);
        let rep = sharp_constant(&p, 30.0).unwrap();
        let f = SpectralFunction::new(&p, vec![term(rep.argmax.clone(), 0, 0.3, -0.4)]).unwrap();
        for s in [-2.0, 0.0, 1.0, 3.5] {
            let g = sobolev_gain_check(&p, &f, s).unwrap();
            assert!(g.holds);
            assert!(g.lhs >= g.rhs * (1.0 - 1e-12));
        }
        let k = SpectralFunction::new(&p, vec![term(b(0), 0, 1.0, 0.0)]).unwrap();
        let g = sobolev_gain_check(&p, &k, 0.0).unwrap();
        assert_eq!(g.lhs, 0.0);
        assert!(g.holds);
    }

    fn pool(p: &ManifoldParams) -> Vec<EigenIndex> {
        spectrum_records(p, 25.0)
            .unwrap()
            .into_iter()
            .filter(|r| !is_kernel(p, &r.index))
            .map(|r| r.index)
            .collect()
    }

    fn arb_function(p: ManifoldParams) -> impl Strategy<Value = SpectralFunction> {
        let pool = pool(&p);
        let n = pool.len();
        prop::collection::btree_map(0..n, (-1.0..1.0f64, -1.0..1.0f64), 0..20).prop_map(move |m| {
            let terms = m
                .into_iter()
                .map(|(i, (re, im))| term(pool[i].clone(), 0, re, im))
                .collect();
            SpectralFunction::new(&p, terms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_scaling(f in arb_function(params(2, 1.0, 0.5)), kr in -3.0..3.0f64, ki in -3.0..3.0f64, s in -3.0..3.0f64) {
            let p = params(2, 1.0, 0.5);
            let k = Complex64::new(kr, ki);
            let lhs = green_apply(&p, &f.scale(k));
            let rhs = green_apply(&p, &f).scale(k);
            for (x, y) in lhs.terms().iter().zip(rhs.terms()) {
                prop_assert!((x.coeff - y.coeff).norm() <= 1e-14 * (1.0 + y.coeff.norm()));
            }
            let n1 = sobolev_norm(&p, &f.scale(k), s);
            let n2 = k.norm() * sobolev_norm(&p, &f, s);
            prop_assert!((n1 - n2).abs() <= 1e-13 * (1.0 + n2));
        }

        #[test]
        fn prop_inverse_identity(f in arb_function(params(1, 1.0, -1.0))) {
            let p = params(1, 1.0, -1.0);
            let back = operator_apply(&p, &green_apply(&p, &f));
            prop_assert_eq!(back.len(), f.len());
            for (x, y) in back.terms().iter().zip(f.terms()) {
                prop_assert!((x.coeff - y.coeff).norm() <= 1e-15 * y.coeff.norm().max(f64::MIN_POSITIVE) * 2.0);
            }
        }

        #[test]
        fn prop_sobolev_monotone_in_s(f in arb_function(params(1, FRAC_PI_2, 0.0)), s in -4.0..4.0f64, ds in 0.0..2.0f64) {
            let p = params(1, FRAC_PI_2, 0.0);
            prop_assert!(sobolev_norm(&p, &f, s) <= sobolev_norm(&p, &f, s + ds) * (1.0 + 1e-15));
        }

        #[test]
        fn prop_gain_holds(f in arb_function(params(2, FRAC_PI_2, -2.0)), s in -3.0..4.0f64) {
            let p = params(2, FRAC_PI_2, -2.0);
            prop_assert!(sobolev_gain_check(&p, &f, s).unwrap().holds);
        }
    }
}
