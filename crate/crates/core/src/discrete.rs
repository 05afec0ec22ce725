//! Integer Gelfand-Tsetlin schemes: exact counts, relative dimensions and
//! the comparison of the discrete projection with the continuous density.
//!
//! Counting runs a dynamic program over rows. For a row `Y` of length `m + 1`
//! the predecessors `W` with `W ≺ Y` fill the integer box
//! `[y_1, y_2] x ... x [y_m, y_{m+1}]`, so each transition is a box sum over
//! the previous table, answered from inclusive prefix sums by
//! inclusion-exclusion.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::density::CornerDensity;
use crate::error::{Error, Result};
use crate::geometry::{min_gap, Spectrum};

/// A weakly increasing integer tuple (a point of `GT_N`). The highest weight
/// of the matching representation lists the same entries in reverse order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Signature {
    values: Vec<i64>,
}

impl Signature {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("signature must not be empty".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Argument("signature must be weakly increasing".into()));
        }
        Ok(Signature { values })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shifted(&self, c: i64) -> Signature {
        Signature {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

impl TryFrom<Vec<i64>> for Signature {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Signature::new(v)
    }
}

impl From<Signature> for Vec<i64> {
    fn from(s: Signature) -> Self {
        s.values
    }
}

/// Cap on the number of cells of a single dynamic-programming table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountBudget {
    pub max_cells: usize,
}

impl Default for CountBudget {
    fn default() -> Self {
        CountBudget {
            max_cells: 20_000_000,
        }
    }
}

/// Dense table over the integer cube `[lo, lo + side)^dim`, row-major.
#[derive(Debug, Clone)]
struct Table {
    lo: i64,
    side: usize,
    dim: usize,
    data: Vec<BigInt>,
}

impl Table {
    fn new(lo: i64, side: usize, dim: usize, budget: CountBudget) -> Result<Self> {
        let cells = side
            .checked_pow(dim as u32)
            .filter(|&c| c <= budget.max_cells)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "a {dim}-dimensional table with side {side} exceeds the budget of {} cells",
                    budget.max_cells
                ))
            })?;
        Ok(Table {
            lo,
            side,
            dim,
            data: vec![BigInt::zero(); cells],
        })
    }

    fn offset(&self, point: &[i64]) -> usize {
        point
            .iter()
            .fold(0, |acc, &p| acc * self.side + (p - self.lo) as usize)
    }

    fn set(&mut self, point: &[i64], v: BigInt) {
        let o = self.offset(point);
        self.data[o] = v;
    }

    fn get(&self, point: &[i64]) -> &BigInt {
        &self.data[self.offset(point)]
    }

    /// Inclusive prefix sums along every axis.
    fn prefix_sums(mut self) -> Table {
        let mut stride = 1;
        for _ in 0..self.dim {
            for idx in 0..self.data.len() {
                if (idx / stride) % self.side != 0 {
                    let prev = self.data[idx - stride].clone();
                    self.data[idx] += prev;
                }
            }
            stride *= self.side;
        }
        self
    }

    /// Sum of the original entries over the box `[lower, upper]` (inclusive),
    /// given `self` holds prefix sums. Bounds are clipped to the table.
    fn box_sum(&self, lower: &[i64], upper: &[i64]) -> BigInt {
        let hi = self.lo + self.side as i64 - 1;
        let mut lo_c = Vec::with_capacity(self.dim);
        let mut hi_c = Vec::with_capacity(self.dim);
        for (&l, &u) in lower.iter().zip(upper) {
            let (l, u) = (l.max(self.lo), u.min(hi));
            if l > u {
                return BigInt::zero();
            }
            lo_c.push(l);
            hi_c.push(u);
        }
        let mut total = BigInt::zero();
        let mut corner = vec![0i64; self.dim];
        for mask in 0u32..(1 << self.dim) {
            let mut negative = false;
            let mut skip = false;
            for i in 0..self.dim {
                if mask & (1 << i) != 0 {
                    corner[i] = lo_c[i] - 1;
                    negative = !negative;
                    if corner[i] < self.lo {
                        skip = true;
                        break;
                    }
                } else {
                    corner[i] = hi_c[i];
                }
            }
            if skip {
                continue;
            }
            let v = self.get(&corner);
            if negative {
                total -= v;
            } else {
                total += v;
            }
        }
        total
    }
}

/// Calls `f` on every weakly increasing `dim`-tuple with entries in `[lo, hi]`.
fn for_each_increasing(lo: i64, hi: i64, dim: usize, mut f: impl FnMut(&[i64])) {
    if dim == 0 || lo > hi {
        return;
    }
    let mut t = vec![lo; dim];
    loop {
        f(&t);
        // advance the last coordinate that can still grow
        let mut i = dim;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if t[i] < hi {
                t[i] += 1;
                let v = t[i];
                for slot in &mut t[i + 1..] {
                    *slot = v;
                }
                break;
            }
        }
    }
}

fn to_biguint(v: BigInt) -> BigUint {
    debug_assert!(v.sign() != Sign::Minus);
    v.to_biguint().unwrap_or_default()
}

/// Tables `g_m(W)` = number of integer patterns hanging below the row `W`
/// (all rows `W ≻ ... ≻ W^(1)`), for every weakly increasing `W` of length `m`.
struct SchemeTables {
    lo: i64,
    hi: i64,
    // prefix-summed table for the largest completed row length
    prefix: Table,
    len: usize,
    budget: CountBudget,
    last: Table,
}

impl SchemeTables {
    fn new(lo: i64, hi: i64, budget: CountBudget) -> Result<Self> {
        let side = (hi - lo + 1) as usize;
        let mut t1 = Table::new(lo, side, 1, budget)?;
        for v in lo..=hi {
            t1.set(&[v], BigInt::one());
        }
        Ok(SchemeTables {
            lo,
            hi,
            prefix: t1.clone().prefix_sums(),
            len: 1,
            budget,
            last: t1,
        })
    }

    /// Count below a row `y` of length `len + 1`.
    fn extend_value(&self, y: &[i64]) -> BigInt {
        let lower = &y[..y.len() - 1];
        let upper = &y[1..];
        self.prefix.box_sum(lower, upper)
    }

    /// Advances to tables for rows of length `len + 1`.
    fn advance(&mut self) -> Result<()> {
        let side = (self.hi - self.lo + 1) as usize;
        let mut next = Table::new(self.lo, side, self.len + 1, self.budget)?;
        let mut cells = Vec::new();
        for_each_increasing(self.lo, self.hi, self.len + 1, |y| {
            cells.push((y.to_vec(), self.extend_value(y)));
        });
        for (y, v) in cells {
            next.set(&y, v);
        }
        self.len += 1;
        self.prefix = next.clone().prefix_sums();
        self.last = next;
        Ok(())
    }

    fn count(&mut self, y: &[i64]) -> Result<BigInt> {
        if y.len() == 1 {
            return Ok(BigInt::one());
        }
        while self.len + 1 < y.len() {
            self.advance()?;
        }
        if self.len + 1 == y.len() {
            Ok(self.extend_value(y))
        } else {
            Ok(self.last.get(y).clone())
        }
    }
}

/// Number of integer Gelfand-Tsetlin schemes with top row `x`, i.e. the
/// dimension of the irreducible representation with signature `x`.
pub fn count_schemes(x: &Signature) -> Result<BigUint> {
    count_schemes_with_budget(x, CountBudget::default())
}

pub fn count_schemes_with_budget(x: &Signature, budget: CountBudget) -> Result<BigUint> {
    let xs = x.values();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut tables = SchemeTables::new(lo, hi, budget)?;
    Ok(to_biguint(tables.count(xs)?))
}

fn check_between(x: &Signature, y: &Signature) -> Result<()> {
    if y.len() >= x.len() {
        return Err(Error::Dimension(format!(
            "lower row has length {}, must be shorter than the top row ({})",
            y.len(),
            x.len()
        )));
    }
    Ok(())
}

/// Table of chain counts `h_K(W)` = number of integer chains
/// `x ≻ Y^(N-1) ≻ ... ≻ Y^(K+1) ≻ W`, for every weakly increasing `W` of length `K`.
fn chain_table(x: &Signature, k: usize, budget: CountBudget) -> Result<Table> {
    let xs = x.values();
    let n = xs.len();
    let (lo, hi) = (xs[0], xs[n - 1]);
    let side = (hi - lo + 1) as usize;
    // layer N-1: indicator of W ≺ x
    let mut current = Table::new(lo, side, n - 1, budget)?;
    let mut hits = Vec::new();
    for_each_increasing(lo, hi, n - 1, |w| {
        if w.iter().enumerate().all(|(i, &v)| xs[i] <= v && v <= xs[i + 1]) {
            hits.push(w.to_vec());
        }
    });
    for w in hits {
        current.set(&w, BigInt::one());
    }
    for m in (k..n - 1).rev() {
        let prefix = current.prefix_sums();
        let mut next = Table::new(lo, side, m, budget)?;
        let mut cells = Vec::new();
        for_each_increasing(lo, hi, m, |w| {
            // V ≻ W: v_1 <= w_1, w_i <= v_{i+1} <= w_{i+1}, v_{m+1} >= w_m
            let mut lower = Vec::with_capacity(m + 1);
            let mut upper = Vec::with_capacity(m + 1);
            lower.push(lo);
            upper.push(w[0]);
            for i in 0..m {
                lower.push(w[i]);
                upper.push(if i + 1 < m { w[i + 1] } else { hi });
            }
            let v = prefix.box_sum(&lower, &upper);
            if !v.is_zero() {
                cells.push((w.to_vec(), v));
            }
        });
        for (w, v) in cells {
            next.set(&w, v);
        }
        current = next;
    }
    Ok(current)
}

/// Number of integer chains `x ≻ Y^(N-1) ≻ ... ≻ Y^(K+1) ≻ y`.
pub fn count_between(x: &Signature, y: &Signature) -> Result<BigUint> {
    count_between_with_budget(x, y, CountBudget::default())
}

pub fn count_between_with_budget(
    x: &Signature,
    y: &Signature,
    budget: CountBudget,
) -> Result<BigUint> {
    check_between(x, y)?;
    let xs = x.values();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if y.values().iter().any(|&v| v < lo || v > hi) {
        return Ok(BigUint::zero());
    }
    let table = chain_table(x, y.len(), budget)?;
    Ok(to_biguint(table.get(y.values()).clone()))
}

/// `nu_{x,K}(y)`: the fraction of schemes with top row `x` whose row of
/// length `K` equals `y`.
pub fn relative_dimension(x: &Signature, y: &Signature) -> Result<BigRational> {
    check_between(x, y)?;
    let between = count_between(x, y)?;
    if between.is_zero() {
        return Ok(BigRational::zero());
    }
    let below = count_schemes(y)?;
    let total = count_schemes(x)?;
    Ok(BigRational::new(
        BigInt::from(between * below),
        BigInt::from(total),
    ))
}

/// The whole law `nu_{x,K}` as `(y, mass)` pairs over its support, in
/// lexicographic order of `y`.
pub fn relative_dimension_distribution(
    x: &Signature,
    k: usize,
) -> Result<Vec<(Signature, BigRational)>> {
    let xs = x.values();
    let n = xs.len();
    if k < 1 || k >= n {
        return Err(Error::Argument(format!("K={k} must satisfy 1 <= K < N={n}")));
    }
    let budget = CountBudget::default();
    let (lo, hi) = (xs[0], xs[n - 1]);
    let chains = chain_table(x, k, budget)?;
    let total = BigInt::from(count_schemes(x)?);
    let mut below = SchemeTables::new(lo, hi, budget)?;
    let mut support = Vec::new();
    for_each_increasing(lo, hi, k, |y| support.push(y.to_vec()));
    let mut out = Vec::new();
    for y in support {
        let c = chains.get(&y).clone();
        if c.is_zero() {
            continue;
        }
        let b = below.count(&y)?;
        out.push((Signature { values: y }, BigRational::new(c * b, total.clone())));
    }
    Ok(out)
}

/// One evaluation point of [`scaling_limit_compare`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub point: Vec<f64>,
    /// `L^K nu_{X_L,K}(round(L a))`.
    pub discrete: f64,
    /// The continuous density at `a`.
    pub continuous: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub scale: u64,
    pub top_row: Vec<i64>,
    pub rows: Vec<LimitRow>,
}

fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Compares the rescaled discrete law of `X_L = round(L x)` with the
/// continuous density of the `K x K` corner at the given points.
pub fn scaling_limit_compare(
    x: &Spectrum,
    k: usize,
    scale: u64,
    points: &[Vec<f64>],
) -> Result<LimitReport> {
    if scale == 0 {
        return Err(Error::Argument("scale L must be at least 1".into()));
    }
    x.require_strict()?;
    let l = scale as f64;
    let top: Vec<i64> = x.values().iter().map(|&v| round_half_up(l * v)).collect();
    if top.windows(2).any(|w| w[0] >= w[1]) {
        let suggested = (2.0 / min_gap(x.values())).ceil();
        return Err(Error::Argument(format!(
            "rounding L*x collides at L={scale}; use L >= {suggested}"
        )));
    }
    let density = CornerDensity::new(x.clone(), k)?;
    let top_sig = Signature::new(top.clone())?;
    let mut rows = Vec::with_capacity(points.len());
    for a in points {
        let continuous = density.eval(a)?;
        let y = Signature::new(a.iter().map(|&v| round_half_up(l * v)).collect())?;
        let nu = relative_dimension(&top_sig, &y)?;
        let discrete = l.powi(k as i32) * ratio_to_f64(&nu);
        rows.push(LimitRow {
            point: a.clone(),
            discrete,
            continuous,
            abs_diff: (discrete - continuous).abs(),
        });
    }
    Ok(LimitReport {
        scale,
        top_row: top,
        rows,
    })
}

/// Nearest `f64` to a big rational, robust to huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // shift both to about 60 significant bits
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}
