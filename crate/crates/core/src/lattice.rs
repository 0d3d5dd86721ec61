//! Full-rank lattices in even-dimensional Euclidean space.
//!
//! A [`LatticeBasis`] keeps its rows either as exact rationals or as floats.
//! Points are enumerated by increasing squared norm with a Fincke–Pohst style
//! bounded search on the Cholesky factor of the Gram matrix. When every entry
//! is rational the squared norms are evaluated in integer arithmetic, so shells
//! (points of equal squared norm) are grouped exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{f64_to_rational, rel_close, Scalar};

/// Relative tolerance for grouping float squared norms into shells.
pub const FLOAT_SHELL_TOL: f64 = 1e-9;

/// Relative threshold below which a float Gram determinant counts as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

/// Default cap on the predicted number of enumerated points.
pub const DEFAULT_POINT_BUDGET: u64 = 5_000_000_000;

/// Histograms with at most this many bins are kept in a dense vector.
const DENSE_HISTOGRAM_BINS: i128 = 1 << 22;

/// A point of the lattice, in basis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub norm_sq: Scalar,
}

/// All lattice points sharing one squared norm.
#[derive(Debug, Clone)]
pub struct Shell {
    pub norm_sq: Scalar,
    pub count: u64,
    pub representatives: Option<Vec<LatticePoint>>,
}

impl PartialEq for Shell {
    /// Shells compare by squared norm and count; representatives are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.norm_sq == other.norm_sq && self.count == other.count
    }
}

/// Integer Gram matrix: `|x|^2 = x^T g x / denom` for integer coefficient vectors.
#[derive(Debug, Clone)]
struct IntGram {
    denom: i128,
    g: Vec<Vec<i128>>,
}

#[derive(Debug)]
struct ShellTable {
    bound: f64,
    shells: Vec<Shell>,
}

/// An ordered basis of a full-rank lattice in R^dim, dim even.
pub struct LatticeBasis {
    dim: usize,
    rows: Vec<Vec<Scalar>>,
    rows_f: Vec<Vec<f64>>,
    gram_f: Vec<Vec<f64>>,
    gram_q: Option<Vec<Vec<BigRational>>>,
    int_gram: Option<IntGram>,
    // q[i][i] = r_ii^2, q[i][j] = r_ij / r_ii for the upper Cholesky factor r
    form: Vec<Vec<f64>>,
    covolume: f64,
    cache: Mutex<Option<Arc<ShellTable>>>,
}

impl fmt::Debug for LatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeBasis")
            .field("dim", &self.dim)
            .field("exact", &self.is_exact())
            .field("rows", &self.rows)
            .finish()
    }
}

impl Clone for LatticeBasis {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            rows: self.rows.clone(),
            rows_f: self.rows_f.clone(),
            gram_f: self.gram_f.clone(),
            gram_q: self.gram_q.clone(),
            int_gram: self.int_gram.clone(),
            form: self.form.clone(),
            covolume: self.covolume,
            cache: Mutex::new(None),
        }
    }
}

/// Validates `rows` and builds the basis with its Gram data cached.
pub fn make_lattice(rows: Vec<Vec<Scalar>>) -> Result<LatticeBasis> {
    let dim = rows.len();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidBasis(format!(
            "dimension must be a positive even integer, got {dim}"
        )));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(Error::InvalidBasis(format!(
            "row {i} has {} entries, expected {dim}",
            r.len()
        )));
    }
    let rows_f: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(Scalar::to_f64).collect())
        .collect();
    if rows_f.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidBasis("non-finite entry".into()));
    }
    let exact = rows.iter().flatten().all(Scalar::is_exact);

    let gram_f: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| dot(&rows_f[i], &rows_f[j])).collect())
        .collect();

    let (gram_q, int_gram) = if exact {
        let rq: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.as_rational().unwrap().clone()).collect())
            .collect();
        let gq: Vec<Vec<BigRational>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        rq[i]
                            .iter()
                            .zip(&rq[j])
                            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
                    })
                    .collect()
            })
            .collect();
        if rational_det(&gq).is_zero() {
            return Err(Error::SingularBasis(0.0));
        }
        let ig = integerize(&gq)?;
        (Some(gq), Some(ig))
    } else {
        (None, None)
    };

    let (form, det) = match quadratic_form(&gram_f) {
        Some(v) => v,
        None if exact => {
            return Err(Error::InvalidBasis(
                "Gram matrix too ill-conditioned for float Cholesky".into(),
            ))
        }
        None => return Err(Error::SingularBasis(0.0)),
    };
    if !exact {
        let hadamard: f64 = (0..dim).map(|i| gram_f[i][i]).product();
        if !(det > SINGULAR_REL_TOL * hadamard) {
            return Err(Error::SingularBasis(det));
        }
    }

    Ok(LatticeBasis {
        dim,
        rows,
        rows_f,
        gram_f,
        gram_q,
        int_gram,
        form,
        covolume: det.sqrt(),
        cache: Mutex::new(None),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky-derived quadratic form and the Gram determinant, or `None` if not positive definite.
fn quadratic_form(g: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, f64)> {
    let n = g.len();
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        let s = g[i][i] - (0..i).map(|k| r[k][i] * r[k][i]).sum::<f64>();
        if !(s > 0.0) {
            return None;
        }
        r[i][i] = s.sqrt();
        for j in i + 1..n {
            let t = g[i][j] - (0..i).map(|k| r[k][i] * r[k][j]).sum::<f64>();
            r[i][j] = t / r[i][i];
        }
    }
    let det: f64 = (0..n).map(|i| r[i][i] * r[i][i]).product();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        q[i][i] = r[i][i] * r[i][i];
        for j in i + 1..n {
            q[i][j] = r[i][j] / r[i][i];
        }
    }
    Some((q, det))
}

fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

fn rational_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let piv = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] /= &piv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn float_inverse(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col] == 0.0 {
            return None;
        }
        a.swap(p, col);
        let piv = a[col][col];
        for c in 0..2 * n {
            a[col][c] /= piv;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn integerize(g: &[Vec<BigRational>]) -> Result<IntGram> {
    let denom = g
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let to_i128 = |b: BigInt| b.to_i128().ok_or(Error::Overflow("integer Gram matrix"));
    let ig = g
        .iter()
        .map(|row| {
            row.iter()
                .map(|q| to_i128(q.numer() * (&denom / q.denom())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntGram {
        denom: to_i128(denom)?,
        g: ig,
    })
}

/// Volume of the unit ball in R^dim.
pub fn unit_ball_volume(dim: usize) -> f64 {
    if dim % 2 == 0 {
        let k = dim / 2;
        PI.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>()
    } else {
        // 2^k+1 pi^k k! / (2k+1)! for dim = 2k+1
        let k = (dim - 1) / 2;
        let num = 2f64.powi(2 * k as i32 + 1) * PI.powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>();
        num / (1..=dim).map(|i| i as f64).product::<f64>()
    }
}

trait Tally {
    fn add(&mut self, key: i128, weight: u64);
}

impl Tally for Vec<u64> {
    #[inline]
    fn add(&mut self, key: i128, weight: u64) {
        self[key as usize] += weight;
    }
}

impl Tally for BTreeMap<i128, u64> {
    fn add(&mut self, key: i128, weight: u64) {
        *self.entry(key).or_insert(0) += weight;
    }
}

impl LatticeBasis {
    /// The standard lattice Z^dim.
    pub fn integer_lattice(dim: usize) -> Result<Self> {
        make_lattice(
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| Scalar::integer((i == j) as i64))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_exact(&self) -> bool {
        self.int_gram.is_some()
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn rows_f64(&self) -> &[Vec<f64>] {
        &self.rows_f
    }

    pub fn gram_f64(&self) -> &[Vec<f64>] {
        &self.gram_f
    }

    pub fn gram_exact(&self) -> Option<&[Vec<BigRational>]> {
        self.gram_q.as_deref()
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Upper bound on the covering radius: half the sum of the basis vector lengths.
    pub fn covering_radius_bound(&self) -> f64 {
        0.5 * (0..self.dim).map(|i| self.gram_f[i][i].sqrt()).sum::<f64>()
    }

    /// Squared norm of the point with coordinates `coeffs`.
    pub fn norm_sq_of(&self, coeffs: &[i64]) -> Scalar {
        match &self.int_gram {
            Some(ig) => Scalar::Rational(BigRational::new(
                BigInt::from(int_form(ig, coeffs)),
                BigInt::from(ig.denom),
            )),
            None => Scalar::Float(float_form(&self.gram_f, coeffs)),
        }
    }

    /// Ambient coordinates of the point with basis coordinates `coeffs`.
    pub fn embed(&self, coeffs: &[i64]) -> Vec<f64> {
        (0..self.dim)
            .map(|k| (0..self.dim).map(|i| coeffs[i] as f64 * self.rows_f[i][k]).sum())
            .collect()
    }

    /// Basis of the dual lattice `{xi : <xi, v> in Z for all v}`.
    pub fn dual(&self) -> Result<LatticeBasis> {
        dual_lattice(self)
    }

    /// Upper bound on `#{xi : |xi| <= radius}` from a volume argument.
    pub fn shell_count_upper_bound(&self, radius: f64) -> f64 {
        shell_count_upper_bound(self, radius)
    }

    /// Enumerates all shells with squared norm at most `norm_sq_max`, ascending.
    ///
    /// Results are memoized per basis, so repeated calls with a smaller bound
    /// are answered from the largest enumeration done so far. Shells returned
    /// here carry no representatives; see [`Self::enumerate_with_points`].
    pub fn enumerate_by_norm(
        &self,
        norm_sq_max: f64,
        include_zero: bool,
        budget: u64,
    ) -> Result<Vec<Shell>> {
        if !(norm_sq_max >= 0.0) || !norm_sq_max.is_finite() {
            return Err(Error::param(
                "norm_sq_max",
                format!("must be finite and >= 0, got {norm_sq_max}"),
            ));
        }
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        let table = match guard.as_ref() {
            Some(t) if t.bound >= norm_sq_max => t.clone(),
            _ => {
                self.check_budget(norm_sq_max, budget)?;
                let t = Arc::new(ShellTable {
                    bound: norm_sq_max,
                    shells: self.compute_shells(norm_sq_max),
                });
                *guard = Some(t.clone());
                t
            }
        };
        drop(guard);
        let limit = self.inclusion_limit(norm_sq_max);
        Ok(table
            .shells
            .iter()
            .filter(|s| include_zero || !s.norm_sq.is_zero())
            .take_while(|s| limit.admits(&s.norm_sq))
            .cloned()
            .collect())
    }

    /// Like [`Self::enumerate_by_norm`] but keeps every point as a representative.
    pub fn enumerate_with_points(
        &self,
        norm_sq_max: f64,
        include_zero: bool,
        budget: u64,
    ) -> Result<Vec<Shell>> {
        if !(norm_sq_max >= 0.0) || !norm_sq_max.is_finite() {
            return Err(Error::param(
                "norm_sq_max",
                format!("must be finite and >= 0, got {norm_sq_max}"),
            ));
        }
        self.check_budget(norm_sq_max, budget)?;
        let limit = self.inclusion_limit(norm_sq_max);
        let mut points = Vec::new();
        self.for_each_candidate(norm_sq_max, |x| {
            let norm_sq = self.norm_sq_of(x);
            if limit.admits(&norm_sq) && (include_zero || !norm_sq.is_zero()) {
                points.push(LatticePoint {
                    coeffs: x.to_vec(),
                    norm_sq,
                });
            }
        });
        points.sort_by(|a, b| {
            a.norm_sq
                .partial_cmp(&b.norm_sq)
                .unwrap()
                .then_with(|| a.coeffs.cmp(&b.coeffs))
        });
        let mut shells: Vec<Shell> = Vec::new();
        for p in points {
            match shells.last_mut() {
                Some(s) if self.same_shell(&s.norm_sq, &p.norm_sq) => {
                    s.count += 1;
                    s.representatives.as_mut().unwrap().push(p);
                }
                _ => shells.push(Shell {
                    norm_sq: p.norm_sq.clone(),
                    count: 1,
                    representatives: Some(vec![p]),
                }),
            }
        }
        Ok(shells)
    }

    /// The first nonzero shell; its squared norm is the minimal squared length.
    pub fn minimal_vector(&self) -> Result<Shell> {
        minimal_vector(self)
    }

    fn same_shell(&self, a: &Scalar, b: &Scalar) -> bool {
        match (a, b) {
            (Scalar::Rational(x), Scalar::Rational(y)) => x == y,
            _ => {
                let (x, y) = (a.to_f64(), b.to_f64());
                x == y || rel_close(x, y, FLOAT_SHELL_TOL)
            }
        }
    }

    fn inclusion_limit(&self, norm_sq_max: f64) -> Limit {
        if self.is_exact() {
            Limit::Exact(f64_to_rational(norm_sq_max).expect("finite bound"))
        } else {
            Limit::Float(norm_sq_max * (1.0 + FLOAT_SHELL_TOL))
        }
    }

    fn check_budget(&self, norm_sq_max: f64, budget: u64) -> Result<()> {
        let predicted = self.shell_count_upper_bound(norm_sq_max.sqrt());
        if predicted > budget as f64 {
            return Err(Error::BudgetExceeded {
                predicted,
                cap: budget,
            });
        }
        Ok(())
    }

    fn search_bound(&self, norm_sq_max: f64) -> f64 {
        let scale = (0..self.dim).map(|i| self.gram_f[i][i]).fold(0.0, f64::max);
        norm_sq_max * (1.0 + 1e-8) + 1e-10 * scale
    }

    /// Visits every coefficient vector in the (slightly enlarged) ellipsoid.
    fn for_each_candidate(&self, norm_sq_max: f64, mut visit: impl FnMut(&[i64])) {
        let mut x = vec![0i64; self.dim];
        let bound = self.search_bound(norm_sq_max);
        self.candidates_rec(self.dim - 1, &mut x, bound, &mut visit);
    }

    fn candidates_rec(
        &self,
        level: usize,
        x: &mut [i64],
        remaining: f64,
        visit: &mut impl FnMut(&[i64]),
    ) {
        let q = &self.form;
        let center = -(level + 1..self.dim)
            .map(|j| q[level][j] * x[j] as f64)
            .sum::<f64>();
        let half = (remaining.max(0.0) / q[level][level]).sqrt();
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for v in lo..=hi {
            x[level] = v;
            if level == 0 {
                visit(x);
            } else {
                let t = v as f64 - center;
                let rem = remaining - q[level][level] * t * t;
                self.candidates_rec(level - 1, x, rem, visit);
            }
        }
        x[level] = 0;
    }

    fn compute_shells(&self, norm_sq_max: f64) -> Vec<Shell> {
        match &self.int_gram {
            Some(ig) => {
                let max_q = f64_to_rational(norm_sq_max).expect("finite bound");
                let limit = (max_q * BigRational::from_integer(BigInt::from(ig.denom)))
                    .floor()
                    .to_integer()
                    .to_i128()
                    .unwrap_or(i128::MAX);
                let to_shell = |num: i128, count: u64| Shell {
                    norm_sq: Scalar::Rational(BigRational::new(
                        BigInt::from(num),
                        BigInt::from(ig.denom),
                    )),
                    count,
                    representatives: None,
                };
                if limit < DENSE_HISTOGRAM_BINS {
                    let mut hist = vec![0u64; limit as usize + 1];
                    self.count_exact(ig, norm_sq_max, limit, &mut hist);
                    hist.iter()
                        .enumerate()
                        .filter(|(_, &c)| c > 0)
                        .map(|(k, &c)| to_shell(k as i128, c))
                        .collect()
                } else {
                    let mut hist = BTreeMap::new();
                    self.count_exact(ig, norm_sq_max, limit, &mut hist);
                    hist.into_iter().map(|(k, c)| to_shell(k, c)).collect()
                }
            }
            None => {
                let limit = norm_sq_max * (1.0 + FLOAT_SHELL_TOL);
                let mut norms = Vec::new();
                self.for_each_candidate(norm_sq_max, |x| {
                    let v = float_form(&self.gram_f, x);
                    if v <= limit {
                        norms.push(if x.iter().all(|&c| c == 0) { 0.0 } else { v });
                    }
                });
                norms.sort_by(f64::total_cmp);
                let mut shells: Vec<Shell> = Vec::new();
                for v in norms {
                    match shells.last_mut() {
                        Some(s) if rel_close(s.norm_sq.to_f64(), v, FLOAT_SHELL_TOL) => {
                            s.count += 1
                        }
                        _ => shells.push(Shell {
                            norm_sq: Scalar::Float(v),
                            count: 1,
                            representatives: None,
                        }),
                    }
                }
                shells
            }
        }
    }

    /// Exact shell histogram over one half of the lattice (x and -x share a norm).
    fn count_exact<T: Tally>(&self, ig: &IntGram, norm_sq_max: f64, limit: i128, hist: &mut T) {
        let mut x = vec![0i64; self.dim];
        let bound = self.search_bound(norm_sq_max);
        let mut ctx = CountCtx {
            form: &self.form,
            g: &ig.g,
            limit,
            hist,
        };
        ctx.rec(self.dim - 1, &mut x, bound, 0, true);
    }
}

struct CountCtx<'a, T> {
    form: &'a [Vec<f64>],
    g: &'a [Vec<i128>],
    limit: i128,
    hist: &'a mut T,
}

impl<T: Tally> CountCtx<'_, T> {
    /// `partial` is the exact form restricted to coordinates above `level`.
    fn rec(&mut self, level: usize, x: &mut [i64], remaining: f64, partial: i128, zero_above: bool) {
        let n = x.len();
        let q = self.form;
        let center = if zero_above {
            0.0
        } else {
            -(level + 1..n).map(|j| q[level][j] * x[j] as f64).sum::<f64>()
        };
        let half = (remaining.max(0.0) / q[level][level]).sqrt();
        let mut lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        if zero_above {
            lo = lo.max(0);
        }
        let lin: i128 = (level + 1..n).map(|j| self.g[level][j] * x[j] as i128).sum();
        let gkk = self.g[level][level];
        if level == 0 {
            for v in lo..=hi {
                let vv = v as i128;
                let num = partial + vv * (gkk * vv + 2 * lin);
                if num <= self.limit {
                    let w = if zero_above && v == 0 { 1 } else { 2 };
                    self.hist.add(num, w);
                }
            }
            return;
        }
        for v in lo..=hi {
            x[level] = v;
            let vv = v as i128;
            let next = partial + vv * (gkk * vv + 2 * lin);
            let t = v as f64 - center;
            let rem = remaining - q[level][level] * t * t;
            self.rec(level - 1, x, rem, next, zero_above && v == 0);
        }
        x[level] = 0;
    }
}

enum Limit {
    Exact(BigRational),
    Float(f64),
}

impl Limit {
    fn admits(&self, v: &Scalar) -> bool {
        match (self, v) {
            (Limit::Exact(m), Scalar::Rational(q)) => q <= m,
            (Limit::Exact(m), Scalar::Float(f)) => *f <= crate::scalar::rational_to_f64(m),
            (Limit::Float(m), v) => v.to_f64() <= *m,
        }
    }
}

fn int_form(ig: &IntGram, x: &[i64]) -> i128 {
    let n = x.len();
    let mut s = 0i128;
    for i in 0..n {
        let xi = x[i] as i128;
        if xi == 0 {
            continue;
        }
        s += ig.g[i][i] * xi * xi;
        for j in i + 1..n {
            s += 2 * ig.g[i][j] * xi * x[j] as i128;
        }
    }
    s
}

fn float_form(g: &[Vec<f64>], x: &[i64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[i][j] * x[i] as f64 * x[j] as f64;
        }
    }
    s
}

/// Basis of the dual lattice under the integer pairing: rows of `(B^{-1})^T`.
pub fn dual_lattice(b: &LatticeBasis) -> Result<LatticeBasis> {
    let n = b.dim;
    let rows = if b.rows.iter().flatten().all(Scalar::is_exact) {
        let m: Vec<Vec<BigRational>> = b
            .rows
            .iter()
            .map(|r| r.iter().map(|s| s.as_rational().unwrap().clone()).collect())
            .collect();
        let inv = rational_inverse(&m).ok_or(Error::SingularBasis(0.0))?;
        (0..n)
            .map(|i| (0..n).map(|j| Scalar::Rational(inv[j][i].clone())).collect())
            .collect()
    } else {
        let inv = float_inverse(&b.rows_f).ok_or(Error::SingularBasis(0.0))?;
        (0..n)
            .map(|i| (0..n).map(|j| Scalar::Float(inv[j][i])).collect())
            .collect()
    };
    make_lattice(rows)
}

/// First nonzero shell of the lattice.
pub fn minimal_vector(b: &LatticeBasis) -> Result<Shell> {
    // every basis vector is a lattice vector, so the shortest one bounds the minimum
    let bound = (0..b.dim).map(|i| b.gram_f[i][i]).fold(f64::INFINITY, f64::min);
    let shells = b.enumerate_by_norm(bound, false, u64::MAX)?;
    shells
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidBasis("no nonzero lattice vector found".into()))
}

/// `vol(B(R + rho)) / covolume`, an upper bound on the points in the closed ball of radius R.
pub fn shell_count_upper_bound(b: &LatticeBasis, radius: f64) -> f64 {
    let r = radius.max(0.0) + b.covering_radius_bound();
    unit_ball_volume(b.dim) * r.powi(b.dim as i32) / b.covolume
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[&[i64]]) -> LatticeBasis {
        make_lattice(
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::integer(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn counts(shells: &[Shell]) -> Vec<(f64, u64)> {
        shells.iter().map(|s| (s.norm_sq.to_f64(), s.count)).collect()
    }

    #[test]
    fn identity_is_exact_integer_lattice() {
        let z2 = lat(&[&[1, 0], &[0, 1]]);
        assert!(z2.is_exact());
        assert_eq!(z2.covolume(), 1.0);
    }

    #[test]
    fn scaled_lattice_gram() {
        let b = lat(&[&[2, 0], &[0, 2]]);
        let g = b.gram_exact().unwrap();
        assert_eq!(g[0][0], BigRational::from_integer(4.into()));
        assert!(g[0][1].is_zero());
        assert_eq!(g[1][1], BigRational::from_integer(4.into()));
    }

    #[test]
    fn rank_deficient_rows_are_rejected() {
        let err = make_lattice(vec![
            vec![Scalar::integer(1), Scalar::integer(0)],
            vec![Scalar::integer(1), Scalar::integer(0)],
        ])
        .unwrap_err();
        assert!(matches!(err, Error::SingularBasis(_)));
        let err = make_lattice(vec![
            vec![Scalar::Float(1.0), Scalar::Float(2.0)],
            vec![Scalar::Float(2.0), Scalar::Float(4.0 + 1e-15)],
        ])
        .unwrap_err();
        assert!(matches!(err, Error::SingularBasis(_)));
    }

    #[test]
    fn odd_or_ragged_dimensions_are_rejected() {
        assert!(make_lattice(vec![vec![Scalar::integer(1)]]).is_err());
        assert!(make_lattice(vec![vec![Scalar::integer(1)], vec![Scalar::integer(1)]]).is_err());
        assert!(make_lattice(vec![]).is_err());
    }

    #[test]
    fn duals_of_simple_lattices() {
        let z4 = LatticeBasis::integer_lattice(4).unwrap();
        let d = z4.dual().unwrap();
        assert_eq!(d.rows(), z4.rows());

        let two = lat(&[&[2, 0], &[0, 2]]);
        let d = two.dual().unwrap();
        assert_eq!(d.rows()[0][0], Scalar::ratio(1, 2));
        assert!(d.rows()[0][1].is_zero());
        assert_eq!(d.rows()[1][1], Scalar::ratio(1, 2));
    }

    #[test]
    fn dual_pairs_integrally() {
        let b = make_lattice(vec![
            vec![Scalar::ratio(3, 2), Scalar::integer(1)],
            vec![Scalar::ratio(-1, 3), Scalar::integer(2)],
        ])
        .unwrap();
        let d = b.dual().unwrap();
        for (i, bi) in b.rows().iter().enumerate() {
            for (j, dj) in d.rows().iter().enumerate() {
                let p = bi
                    .iter()
                    .zip(dj)
                    .fold(BigRational::zero(), |acc, (x, y)| {
                        acc + x.as_rational().unwrap() * y.as_rational().unwrap()
                    });
                assert_eq!(p, BigRational::from_integer(((i == j) as i64).into()));
            }
        }
    }

    #[test]
    fn z2_shells_up_to_two() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        let s = z2.enumerate_by_norm(2.0, true, 1000).unwrap();
        assert_eq!(counts(&s), vec![(0.0, 1), (1.0, 4), (2.0, 4)]);
        assert_eq!(s.iter().map(|s| s.count).sum::<u64>(), 9);
        let w = z2.enumerate_with_points(2.0, true, 1000).unwrap();
        assert_eq!(counts(&w), counts(&s));
        assert_eq!(w[1].representatives.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn z2_below_first_shell_is_empty() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        assert!(z2.enumerate_by_norm(0.5, false, 1000).unwrap().is_empty());
    }

    #[test]
    fn two_z2_single_shell() {
        let b = lat(&[&[2, 0], &[0, 2]]);
        let s = b.enumerate_by_norm(4.0, false, 1000).unwrap();
        assert_eq!(counts(&s), vec![(4.0, 4)]);
    }

    #[test]
    fn cache_serves_smaller_bounds() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        let big = z2.enumerate_by_norm(25.0, true, 10_000).unwrap();
        let small = z2.enumerate_by_norm(2.0, true, 10_000).unwrap();
        assert_eq!(counts(&small), vec![(0.0, 1), (1.0, 4), (2.0, 4)]);
        assert!(big.len() > small.len());
    }

    #[test]
    fn minimal_vectors() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        let m = z2.minimal_vector().unwrap();
        assert_eq!((m.norm_sq.to_f64(), m.count), (1.0, 4));
        let m = lat(&[&[2, 0], &[0, 2]]).minimal_vector().unwrap();
        assert_eq!((m.norm_sq.to_f64(), m.count), (4.0, 4));
        let hex = make_lattice(vec![
            vec![Scalar::Float(1.0), Scalar::Float(0.0)],
            vec![Scalar::Float(0.5), Scalar::Float(0.8660254037844386)],
        ])
        .unwrap();
        assert!(!hex.is_exact());
        let m = hex.minimal_vector().unwrap();
        assert!((m.norm_sq.to_f64() - 1.0).abs() < 1e-9);
        assert_eq!(m.count, 6);
    }

    #[test]
    fn count_bounds() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        assert!(z2.shell_count_upper_bound(10.0) >= 317.0);
        assert!(z2.shell_count_upper_bound(0.0) >= 1.0);
        let b = lat(&[&[2, 0], &[0, 2]]);
        assert!(b.shell_count_upper_bound(2.0) >= 5.0);
        let mut prev = 0.0;
        for k in 0..50 {
            let v = z2.shell_count_upper_bound(k as f64 * 0.37);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn budget_is_enforced() {
        let z4 = LatticeBasis::integer_lattice(4).unwrap();
        let err = z4.enumerate_by_norm(100.0, true, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn negative_bound_rejected() {
        let z2 = LatticeBasis::integer_lattice(2).unwrap();
        assert!(z2.enumerate_by_norm(-1.0, true, 10).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }
}
