//! Chamber and interlacing geometry: ordered spectra, the interlacing
//! relation, Vandermonde products and Gelfand-Tsetlin patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weakly increasing real tuple, i.e. a point of the closed Weyl chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum, rejecting non-finite or decreasing coordinates.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("spectrum must have at least one coordinate".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite coordinate {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] > w[1]) {
            return Err(Error::Argument(format!(
                "coordinates must be weakly increasing, found {} > {}",
                w[0], w[1]
            )));
        }
        Ok(Spectrum { values })
    }

    /// Builds a spectrum that must lie in the open chamber (strictly increasing).
    pub fn strict(values: Vec<f64>) -> Result<Self> {
        let s = Self::new(values)?;
        s.require_strict()?;
        Ok(s)
    }

    /// Sorts arbitrary finite values into a spectrum.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        min_gap(&self.values) > 0.0
    }

    pub fn require_strict(&self) -> Result<()> {
        let gap = min_gap(&self.values);
        if gap > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateSpectrum { min_gap: gap })
        }
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Applies the affine map `v -> scale * v + shift` (scale > 0).
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Argument(format!("scale must be positive, got {scale}")));
        }
        Self::new(self.values.iter().map(|v| scale * v + shift).collect())
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Spectrum::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

/// Smallest gap between consecutive coordinates; `+inf` for fewer than two.
pub fn min_gap(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Checks `x_1 <= y_1 <= x_2 <= ... <= y_{N-1} <= x_N`.
pub fn interlaces(y: &[f64], x: &[f64]) -> Result<bool> {
    if y.len() + 1 != x.len() {
        return Err(Error::Dimension(format!(
            "interlacing needs lengths N-1 and N, got {} and {}",
            y.len(),
            x.len()
        )));
    }
    Ok(y
        .iter()
        .enumerate()
        .all(|(i, &yi)| x[i] <= yi && yi <= x[i + 1]))
}

/// `prod_{j>i} (x_j - x_i)`; the empty product is 1.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 1..x.len() {
        for i in 0..j {
            v *= x[j] - x[i];
        }
    }
    v
}

/// Natural logarithm of `|V(x)|`, for large tuples where the product overflows.
pub fn ln_abs_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 1..x.len() {
        for i in 0..j {
            s += (x[j] - x[i]).abs().ln();
        }
    }
    s
}

/// A triangular array `(Y^(N-1), ..., Y^(1))`, stored with the longest row first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GtPattern {
    rows: Vec<Vec<f64>>,
}

impl GtPattern {
    /// Wraps rows of lengths `m, m-1, ..., 1`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != m - k {
                return Err(Error::Dimension(format!(
                    "pattern row {k} has length {}, expected {}",
                    row.len(),
                    m - k
                )));
            }
        }
        Ok(GtPattern { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The row of length `k` (the spectrum of the `k x k` corner).
    pub fn row(&self, k: usize) -> Option<&[f64]> {
        let m = self.rows.len();
        (1..=m).contains(&k).then(|| self.rows[m - k].as_slice())
    }

    /// Size N of the top row this pattern hangs below.
    pub fn top_size(&self) -> usize {
        self.rows.len() + 1
    }
}

/// Whether `pattern` is a point of the Gelfand-Tsetlin polytope of `x`.
pub fn pattern_in_polytope(pattern: &GtPattern, x: &[f64]) -> Result<bool> {
    if pattern.top_size() != x.len() {
        return Err(Error::Dimension(format!(
            "pattern of depth {} does not fit a top row of length {}",
            pattern.rows.len(),
            x.len()
        )));
    }
    let mut upper = x;
    for row in &pattern.rows {
        if !interlaces(row, upper)? {
            return Ok(false);
        }
        upper = row;
    }
    Ok(true)
}
