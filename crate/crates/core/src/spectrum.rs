//! Eigenvalues and multiplicities of `L_alpha` and of the Riemannian Laplacian `L_eps`.
//!
//! The joint spectrum splits into two families. Type (a) eigenspaces are
//! labelled by a nonzero integer `n` and a level `j >= 0`:
//!
//! ```text
//! lambda = (pi |n| / 2c) (d + 2j - alpha sgn n)
//! mu     = (pi |n| / 2c) (d + 2j) + eps (pi^2 / 4c^2) n^2
//! mult   = |n|^d L binom(j + d - 1, d - 1)
//! ```
//!
//! Type (b) eigenspaces are the shells of the dual lattice, with
//! `lambda = mu = (pi / 2) |xi|^2` and multiplicity equal to the shell size.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBasis, Shell, DEFAULT_POINT_BUDGET};
use crate::scalar::{f64_to_rational, rel_close, Scalar};

/// Relative tolerance for float grouping of eigenvalues.
pub const LAMBDA_GROUP_TOL: f64 = 1e-9;

/// Default cap on the number of type (a) index pairs in one spectrum request.
pub const DEFAULT_INDEX_BUDGET: u64 = 50_000_000;

/// A compact Heisenberg manifold together with the operator parameters.
#[derive(Debug, Clone)]
pub struct ManifoldParams {
    d: u32,
    c: f64,
    c_exact: Option<BigRational>,
    alpha: f64,
    alpha_exact: BigRational,
    big_l: u64,
    lattice: Arc<LatticeBasis>,
    epsilon: f64,
    point_budget: u64,
    index_budget: u64,
}

impl ManifoldParams {
    /// `lattice` is the dual lattice whose shells give the type (b) spectrum.
    pub fn new(d: u32, c: Scalar, alpha: f64, big_l: u64, lattice: Arc<LatticeBasis>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "must be a positive integer"));
        }
        let c_f = c.to_f64();
        if !(c_f > 0.0) || !c_f.is_finite() {
            return Err(Error::param("c", format!("must be finite and > 0, got {c}")));
        }
        if !alpha.is_finite() || alpha.abs() > d as f64 {
            return Err(Error::param(
                "alpha",
                format!("|alpha| <= d required (got alpha = {alpha}, d = {d})"),
            ));
        }
        if big_l == 0 {
            return Err(Error::param("big_l", "multiplicity constant L must be >= 1"));
        }
        if lattice.dim() != 2 * d as usize {
            return Err(Error::param(
                "lattice",
                format!("dual lattice must have dimension 2d = {}, got {}", 2 * d, lattice.dim()),
            ));
        }
        Ok(Self {
            d,
            c: c_f,
            c_exact: c.as_rational().cloned(),
            alpha,
            alpha_exact: f64_to_rational(alpha).expect("finite alpha"),
            big_l,
            lattice,
            epsilon: 1.0,
            point_budget: DEFAULT_POINT_BUDGET,
            index_budget: DEFAULT_INDEX_BUDGET,
        })
    }

    /// Convenience constructor with the standard lattice Z^{2d} as dual lattice.
    pub fn standard(d: u32, c: f64, alpha: f64, big_l: u64) -> Result<Self> {
        let lattice = LatticeBasis::integer_lattice(2 * d.max(1) as usize)?;
        Self::new(d, Scalar::Float(c), alpha, big_l, Arc::new(lattice))
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_point_budget(mut self, budget: u64) -> Self {
        self.point_budget = budget;
        self
    }

    pub fn with_index_budget(mut self, budget: u64) -> Self {
        self.index_budget = budget;
        self
    }

    /// Same manifold with a different alpha.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let c = match &self.c_exact {
            Some(q) => Scalar::Rational(q.clone()),
            None => Scalar::Float(self.c),
        };
        Ok(Self::new(self.d, c, alpha, self.big_l, self.lattice.clone())?
            .with_epsilon(self.epsilon)?
            .with_point_budget(self.point_budget)
            .with_index_budget(self.index_budget))
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn c_exact(&self) -> Option<&BigRational> {
        self.c_exact.as_ref()
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn big_l(&self) -> u64 {
        self.big_l
    }
    pub fn lattice(&self) -> &Arc<LatticeBasis> {
        &self.lattice
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn point_budget(&self) -> u64 {
        self.point_budget
    }

    /// `pi / (2c)`, the type (a) scale.
    pub fn scale(&self) -> f64 {
        PI / (2.0 * self.c)
    }

    /// True when |alpha| = d, i.e. a whole half-family of type (a) spaces is kernel.
    pub fn is_endpoint(&self) -> bool {
        self.alpha.abs() == self.d as f64
    }
}

/// Label of a joint eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenIndex {
    TypeA { n: i64, j: u64 },
    TypeB { norm_sq: Scalar, count: u64 },
}

impl EigenIndex {
    pub fn type_b(shell: &Shell) -> Self {
        EigenIndex::TypeB {
            norm_sq: shell.norm_sq.clone(),
            count: shell.count,
        }
    }

    pub fn is_type_a(&self) -> bool {
        matches!(self, EigenIndex::TypeA { .. })
    }
}

impl fmt::Display for EigenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenIndex::TypeA { n, j } => write!(f, "A({n},{j})"),
            EigenIndex::TypeB { norm_sq, .. } => write!(f, "B({norm_sq})"),
        }
    }
}

/// Multiplicity of an eigenvalue; the kernel at |alpha| = d is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(u64),
    Infinite,
}

impl Multiplicity {
    pub fn finite(self) -> Option<u64> {
        match self {
            Multiplicity::Finite(m) => Some(m),
            Multiplicity::Infinite => None,
        }
    }

    pub fn checked_add(self, other: Multiplicity) -> Result<Multiplicity> {
        match (self, other) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => a
                .checked_add(b)
                .map(Multiplicity::Finite)
                .ok_or(Error::Overflow("multiplicity sum")),
            _ => Ok(Multiplicity::Infinite),
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(m) => write!(f, "{m}"),
            Multiplicity::Infinite => f.write_str("infinite"),
        }
    }
}

/// One eigenspace of `L_alpha` with its `L_eps` eigenvalue.
///
/// A record with [`Multiplicity::Infinite`] stands for the whole kernel
/// half-family `{(n, 0) : sgn n = sgn alpha}` at |alpha| = d; its index is the
/// representative `(sgn alpha, 0)` and `mu` is the value at that representative.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub index: EigenIndex,
    pub lambda: f64,
    pub mu: f64,
    pub multiplicity: Multiplicity,
}

/// Eigenvalue of `L_alpha` on the type (a) space `(n, j)`.
pub fn type_a_lambda(p: &ManifoldParams, n: i64, j: u64) -> f64 {
    debug_assert!(n != 0);
    let w = type_a_weight(p, n, j);
    // clamp the -0.0 / rounding case at the kernel
    (p.scale() * n.unsigned_abs() as f64 * w).max(0.0)
}

/// `d + 2j - alpha sgn n`.
fn type_a_weight(p: &ManifoldParams, n: i64, j: u64) -> f64 {
    p.d as f64 + 2.0 * j as f64 - p.alpha * n.signum() as f64
}

/// `|n|^d L binom(j + d - 1, d - 1)`, overflow-checked.
pub fn type_a_multiplicity(p: &ManifoldParams, n: i64, j: u64) -> Result<u64> {
    let d = p.d;
    let pow = n
        .unsigned_abs()
        .checked_pow(d)
        .ok_or(Error::Overflow("|n|^d"))?;
    let b = binomial(j + d as u64 - 1, d as u64 - 1)?;
    pow.checked_mul(p.big_l)
        .and_then(|v| v.checked_mul(b))
        .ok_or(Error::Overflow("type (a) multiplicity"))
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i as u128 + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// `(pi / 2) |xi|^2`.
pub fn type_b_lambda(norm_sq: &Scalar) -> f64 {
    0.5 * PI * norm_sq.to_f64()
}

/// Eigenvalue of `L_alpha` on any eigenspace.
pub fn lambda_of(p: &ManifoldParams, idx: &EigenIndex) -> f64 {
    match idx {
        EigenIndex::TypeA { n, j } => type_a_lambda(p, *n, *j),
        EigenIndex::TypeB { norm_sq, .. } => type_b_lambda(norm_sq),
    }
}

/// Eigenvalue of `L_eps` on the same joint eigenspace.
pub fn mu_of(p: &ManifoldParams, idx: &EigenIndex) -> f64 {
    match idx {
        EigenIndex::TypeA { n, j } => {
            let a = p.scale();
            let nf = *n as f64;
            a * nf.abs() * (p.d as f64 + 2.0 * *j as f64) + p.epsilon * a * a * nf * nf
        }
        EigenIndex::TypeB { norm_sq, .. } => type_b_lambda(norm_sq),
    }
}

/// Multiplicity of a single eigenspace.
pub fn multiplicity_of(p: &ManifoldParams, idx: &EigenIndex) -> Result<u64> {
    match idx {
        EigenIndex::TypeA { n, j } => type_a_multiplicity(p, *n, *j),
        EigenIndex::TypeB { count, .. } => Ok(*count),
    }
}

/// True iff `L_alpha` vanishes on the eigenspace.
pub fn is_kernel(p: &ManifoldParams, idx: &EigenIndex) -> bool {
    match idx {
        EigenIndex::TypeA { n, j } => {
            *j == 0 && p.is_endpoint() && n.signum() as f64 == p.alpha.signum()
        }
        EigenIndex::TypeB { norm_sq, .. } => norm_sq.is_zero(),
    }
}

fn record(p: &ManifoldParams, index: EigenIndex, multiplicity: Multiplicity) -> EigenRecord {
    EigenRecord {
        lambda: lambda_of(p, &index),
        mu: mu_of(p, &index),
        index,
        multiplicity,
    }
}

/// All eigenspaces with `lambda <= lambda_max`, sorted by lambda.
///
/// Kernel spaces appear first with lambda = 0: the constants (zero shell) and,
/// at |alpha| = d, a single record of infinite multiplicity for the kernel
/// half-family.
pub fn spectrum_records(p: &ManifoldParams, lambda_max: f64) -> Result<Vec<EigenRecord>> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(Error::param("lambda_max", format!("must be finite and >= 0, got {lambda_max}")));
    }
    let mut out = Vec::new();

    if p.is_endpoint() {
        let rep = EigenIndex::TypeA {
            n: p.alpha.signum() as i64,
            j: 0,
        };
        out.push(record(p, rep, Multiplicity::Infinite));
    }

    let a = p.scale();
    let mut visited: u64 = 0;
    for sign in [1i64, -1] {
        for j in 0u64.. {
            let w = type_a_weight(p, sign, j);
            if w == 0.0 {
                continue;
            }
            if a * w > lambda_max {
                break;
            }
            let n_max = (lambda_max / (a * w)).floor() as i64 + 1;
            for m in 1..=n_max {
                let lambda = type_a_lambda(p, sign * m, j);
                if lambda > lambda_max {
                    break;
                }
                visited += 1;
                if visited > p.index_budget {
                    return Err(Error::BudgetExceeded {
                        predicted: visited as f64,
                        cap: p.index_budget,
                    });
                }
                let mult = type_a_multiplicity(p, sign * m, j)?;
                out.push(EigenRecord {
                    index: EigenIndex::TypeA { n: sign * m, j },
                    lambda,
                    mu: mu_of(p, &EigenIndex::TypeA { n: sign * m, j }),
                    multiplicity: Multiplicity::Finite(mult),
                });
            }
        }
    }

    let shells = p
        .lattice
        .enumerate_by_norm(2.0 * lambda_max / PI, true, p.point_budget)?;
    for s in &shells {
        let idx = EigenIndex::type_b(s);
        if lambda_of(p, &idx) <= lambda_max {
            out.push(record(p, idx, Multiplicity::Finite(s.count)));
        }
    }

    out.sort_by(compare_records);
    Ok(out)
}

/// Tie-break order: type (b) first, then type (a) by descending `n` and ascending `j`.
fn tie_key(idx: &EigenIndex) -> (u8, i64, u64) {
    match idx {
        EigenIndex::TypeB { .. } => (0, 0, 0),
        EigenIndex::TypeA { n, j } => (1, -*n, *j),
    }
}

fn compare_records(a: &EigenRecord, b: &EigenRecord) -> Ordering {
    a.lambda
        .total_cmp(&b.lambda)
        .then_with(|| tie_key(&a.index).cmp(&tie_key(&b.index)))
}

/// Exact descriptor of an eigenvalue: `lambda = pi * value`, when known exactly.
#[derive(Debug, Clone, PartialEq)]
enum Descriptor {
    /// Type (a): `lambda = (pi / 2c) * q` with `q = |n| (d + 2j - alpha sgn n)` exact.
    A(BigRational),
    /// Type (b): `lambda = (pi / 2) * |xi|^2`; `None` for float lattices.
    B(Option<BigRational>),
}

fn descriptor(p: &ManifoldParams, idx: &EigenIndex) -> Descriptor {
    match idx {
        EigenIndex::TypeA { n, j } => {
            let absn = BigRational::from_integer(BigInt::from(n.unsigned_abs()));
            let w = BigRational::from_integer(BigInt::from(p.d as u64 + 2 * j))
                - &p.alpha_exact * BigRational::from_integer(BigInt::from(n.signum()));
            Descriptor::A(absn * w)
        }
        EigenIndex::TypeB { norm_sq, .. } => Descriptor::B(norm_sq.as_rational().cloned()),
    }
}

/// Records sharing one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGroup {
    pub lambda: f64,
    pub multiplicity: Multiplicity,
    pub members: Vec<EigenRecord>,
    /// The group contains both type (a) and type (b) members.
    pub cross_family: bool,
    /// Members were merged by float tolerance rather than exact comparison.
    pub inexact_merge: bool,
}

impl SpectralGroup {
    pub fn is_kernel(&self) -> bool {
        self.lambda == 0.0
    }
}

/// Merges records with equal eigenvalue, summing multiplicities.
///
/// Within a family equality is decided on exact descriptors. A type (a) and a
/// type (b) value are compared exactly when both `c` and the lattice are exact
/// (then `lambda_a = lambda_b` iff `q_a / c = |xi|^2`); otherwise they are merged
/// when within [`LAMBDA_GROUP_TOL`] and the group is marked `inexact_merge`.
pub fn coalesce_records(p: &ManifoldParams, records: &[EigenRecord]) -> Result<Vec<SpectralGroup>> {
    let mut groups: Vec<SpectralGroup> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let start = records[i].lambda;
        let mut end = i + 1;
        while end < records.len() && records[end].lambda - start <= LAMBDA_GROUP_TOL * start {
            end += 1;
        }
        // buckets keyed by exact descriptor within the float cluster
        let mut buckets: Vec<(Descriptor, Vec<EigenRecord>)> = Vec::new();
        for r in &records[i..end] {
            let key = descriptor(p, &r.index);
            let same = |k: &Descriptor| match (k, &key) {
                (Descriptor::A(x), Descriptor::A(y)) => x == y,
                (Descriptor::B(Some(x)), Descriptor::B(Some(y))) => x == y,
                (Descriptor::B(None), Descriptor::B(None)) => true,
                _ => false,
            };
            match buckets.iter_mut().find(|(k, _)| same(k)) {
                Some((_, v)) => v.push(r.clone()),
                None => buckets.push((key, vec![r.clone()])),
            }
        }
        let (mut a_side, b_side): (Vec<_>, Vec<_>) = buckets
            .into_iter()
            .partition(|(k, _)| matches!(k, Descriptor::A(_)));
        let mut cluster: Vec<SpectralGroup> = Vec::new();
        let mut merged_a = vec![false; a_side.len()];
        for (bk, bmembers) in b_side {
            let mut group = new_group(bmembers);
            for (ai, (ak, amembers)) in a_side.iter_mut().enumerate() {
                if merged_a[ai] {
                    continue;
                }
                let (Descriptor::A(qa), Descriptor::B(qb)) = (&*ak, &bk) else {
                    unreachable!()
                };
                let verdict = match (qb, p.c_exact()) {
                    _ if qa.is_zero() || qb.as_ref().is_some_and(Zero::is_zero) => {
                        Some(qa.is_zero() && qb.as_ref().is_some_and(Zero::is_zero))
                    }
                    (Some(qb), Some(c)) => Some(&(qa / c) == qb),
                    _ => None,
                };
                let join = match verdict {
                    Some(v) => v,
                    None => rel_close(group.lambda, amembers[0].lambda, LAMBDA_GROUP_TOL),
                };
                if join {
                    merged_a[ai] = true;
                    group.members.append(amembers);
                    group.cross_family = true;
                    group.inexact_merge |= verdict.is_none();
                }
            }
            cluster.push(group);
        }
        for (ai, (_, amembers)) in a_side.into_iter().enumerate() {
            if !merged_a[ai] {
                cluster.push(new_group(amembers));
            }
        }
        for g in &mut cluster {
            g.members.sort_by(compare_records);
            g.lambda = g.members[0].lambda;
            g.multiplicity = g
                .members
                .iter()
                .try_fold(Multiplicity::Finite(0), |acc, m| acc.checked_add(m.multiplicity))?;
        }
        cluster.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
        groups.extend(cluster);
        i = end;
    }
    Ok(groups)
}

fn new_group(members: Vec<EigenRecord>) -> SpectralGroup {
    SpectralGroup {
        lambda: members[0].lambda,
        multiplicity: Multiplicity::Finite(0),
        members,
        cross_family: false,
        inexact_merge: false,
    }
}

/// Raw or coalesced spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Raw(Vec<EigenRecord>),
    Coalesced(Vec<SpectralGroup>),
}

impl Spectrum {
    pub fn total_multiplicity(&self) -> Result<Multiplicity> {
        let it: Box<dyn Iterator<Item = Multiplicity>> = match self {
            Spectrum::Raw(r) => Box::new(r.iter().map(|r| r.multiplicity)),
            Spectrum::Coalesced(g) => Box::new(g.iter().map(|g| g.multiplicity)),
        };
        it.into_iter()
            .try_fold(Multiplicity::Finite(0), |acc, m| acc.checked_add(m))
    }
}

/// Spectrum of `L_alpha` up to `lambda_max`, optionally coalesced by eigenvalue.
pub fn spectrum_stream(p: &ManifoldParams, lambda_max: f64, coalesce: bool) -> Result<Spectrum> {
    let records = spectrum_records(p, lambda_max)?;
    if coalesce {
        Ok(Spectrum::Coalesced(coalesce_records(p, &records)?))
    } else {
        Ok(Spectrum::Raw(records))
    }
}

/// Number of non-kernel eigenvalues `<= lambda_max`, counted with multiplicity.
pub fn counting_function(p: &ManifoldParams, lambda_max: f64) -> Result<u64> {
    spectrum_records(p, lambda_max)?
        .iter()
        .filter(|r| !is_kernel(p, &r.index))
        .try_fold(0u64, |acc, r| {
            let m = r.multiplicity.finite().ok_or(Error::Overflow("counting function"))?;
            acc.checked_add(m).ok_or(Error::Overflow("counting function"))
        })
}

/// First coordinate of the joint spectrum of `(L_0, i^{-1} T)`: `(pi |n| / 2c)(d + 2j)`.
pub fn joint_l0_eigenvalue(p: &ManifoldParams, n: i64, j: u64) -> f64 {
    p.scale() * n.unsigned_abs() as f64 * (p.d as f64 + 2.0 * j as f64)
}

/// Second coordinate of the joint spectrum: `pi n / 2c`.
pub fn joint_t_eigenvalue(p: &ManifoldParams, n: i64) -> f64 {
    p.scale() * n as f64
}
