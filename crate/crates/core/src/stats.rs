//! Goodness-of-fit statistics comparing Monte Carlo corner samples with the
//! closed-form densities.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::density::{chamber_box_probability, CornerDensity, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::Spectrum;
use crate::matrixmodel::sample_corner_spectra;

/// Where a sample set came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetadata {
    pub spectrum: Vec<f64>,
    pub k: usize,
    pub seed: Option<u64>,
}

/// Points of the closed chamber `a_1 <= ... <= a_K`, validated on ingestion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    metadata: SampleMetadata,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, metadata: SampleMetadata) -> Result<Self> {
        let k = metadata.k;
        for (i, p) in points.iter().enumerate() {
            if p.len() != k {
                return Err(Error::Dimension(format!(
                    "sample {i} has length {}, expected {k}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) || p.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Argument(format!(
                    "sample {i} is not a weakly increasing finite tuple"
                )));
            }
        }
        Ok(SampleSet { points, metadata })
    }

    /// Draws `count` corner spectra of the orbit of `x`.
    pub fn from_orbit(x: &Spectrum, k: usize, count: usize, seed: u64, threads: usize) -> Result<Self> {
        let points = sample_corner_spectra(x, k, count, seed, threads)?;
        SampleSet::new(
            points,
            SampleMetadata {
                spectrum: x.values().to_vec(),
                k,
                seed: Some(seed),
            },
        )
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn metadata(&self) -> &SampleMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `j`-th coordinate of every sample.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[j]).collect()
    }
}

/// Kolmogorov-Smirnov distance `sup_t |F_n(t) - F(t)|`. Both one-sided limits
/// of the empirical step function are compared at each jump, the left one
/// against `cdf` at the next smaller float.
pub fn ks_statistic_1d<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("KS statistic needs at least one sample".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument("samples must not contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let before = i as f64 / n;
        let after = j as f64 / n;
        d = d.max((after - cdf(v)).abs());
        d = d.max((before - cdf(v.next_down())).abs());
        i = j;
    }
    Ok(d)
}

fn validate_grid_point(t: &[f64], k: usize) -> Result<()> {
    if t.len() != k {
        return Err(Error::Dimension(format!(
            "grid point has length {}, expected {k}",
            t.len()
        )));
    }
    if t.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument("grid point contains NaN".into()));
    }
    Ok(())
}

/// Model probability `P(a_j <= t_j for all j)` under the corner density.
pub fn model_cdf(d: &CornerDensity, t: &[f64], quad: QuadratureSpec) -> Result<f64> {
    validate_grid_point(t, d.k())?;
    let lower = vec![d.spectrum().first(); d.k()];
    if t.iter().any(|&v| v < lower[0]) {
        return Ok(0.0);
    }
    chamber_box_probability(d, &lower, t, quad)
}

/// `max_t |empirical P(A <= t) - model P(A <= t)|` over the grid points.
pub fn grid_cdf_discrepancy(samples: &SampleSet, d: &CornerDensity, grid: &[Vec<f64>]) -> Result<f64> {
    grid_cdf_discrepancy_with(samples, d, grid, QuadratureSpec::default())
}

pub fn grid_cdf_discrepancy_with(
    samples: &SampleSet,
    d: &CornerDensity,
    grid: &[Vec<f64>],
    quad: QuadratureSpec,
) -> Result<f64> {
    if samples.metadata().k != d.k() {
        return Err(Error::Dimension("sample set and density disagree on K".into()));
    }
    if samples.is_empty() {
        return Err(Error::Argument("empty sample set".into()));
    }
    let n = samples.len() as f64;
    let mut worst: f64 = 0.0;
    for t in grid {
        let model = model_cdf(d, t, quad)?;
        let hits = samples
            .points()
            .iter()
            .filter(|a| a.iter().zip(t).all(|(ai, ti)| ai <= ti))
            .count();
        worst = worst.max((hits as f64 / n - model).abs());
    }
    Ok(worst)
}

/// Histogram cells: the chamber is cut by the same edges along every axis and
/// each bin is a nondecreasing sequence of cell indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    edges: Vec<f64>,
}

impl Binning {
    /// Explicit edges covering the support, strictly increasing.
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Argument("binning needs at least two edges".into()));
        }
        if edges.iter().any(|v| !v.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("bin edges must be finite and strictly increasing".into()));
        }
        Ok(Binning { edges })
    }

    /// `cells` equal cells per axis across `[x_1, x_N]`.
    pub fn uniform(x: &Spectrum, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Argument("need at least one cell per axis".into()));
        }
        let (lo, hi) = (x.first(), x.last());
        let step = (hi - lo) / cells as f64;
        let mut edges: Vec<f64> = (0..cells).map(|i| lo + step * i as f64).collect();
        edges.push(hi);
        Binning::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// Cell index along one axis; the last cell is closed on the right.
    /// Values outside the edges land in the nearest end cell.
    fn cell_of(&self, v: f64) -> usize {
        let idx = self.edges.partition_point(|&e| e <= v);
        idx.saturating_sub(1).min(self.cells() - 1)
    }

    /// Bins in lexicographic order.
    fn bins(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; k];
        fn rec(pos: usize, start: usize, cells: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for c in start..cells {
                cur[pos] = c;
                rec(pos + 1, c, cells, cur, out);
            }
        }
        rec(0, 0, self.cells(), &mut cur, &mut out);
        out
    }
}

/// Pearson statistic with its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

impl ChiSquare {
    /// The central band `[q(alpha/2), q(1 - alpha/2)]` of the chi-square law.
    pub fn band(&self, alpha: f64) -> (f64, f64) {
        chi2_band(self.dof, alpha)
    }
}

pub fn chi2_band(dof: usize, alpha: f64) -> (f64, f64) {
    let law = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (law.inverse_cdf(alpha / 2.0), law.inverse_cdf(1.0 - alpha / 2.0))
}

/// Minimum expected count of a retained bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-square of observed against expected counts after merging
/// consecutive bins until each expected count reaches [`MIN_EXPECTED`].
pub fn pearson_chi2(observed: &[f64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::Dimension("observed and expected lengths differ".into()));
    }
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= MIN_EXPECTED {
            merged.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => merged.push((o_acc, e_acc)),
        }
    }
    if merged.len() < 2 {
        return Err(Error::Argument(format!(
            "only {} bin(s) retained after merging; need at least 2",
            merged.len()
        )));
    }
    let statistic = merged.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare {
        statistic,
        dof: merged.len() - 1,
    })
}

/// Pearson chi-square of a sample set against the exact bin probabilities.
pub fn histogram_chi2(samples: &SampleSet, d: &CornerDensity, bins: &Binning) -> Result<ChiSquare> {
    histogram_chi2_with(samples, d, bins, QuadratureSpec::default())
}

pub fn histogram_chi2_with(
    samples: &SampleSet,
    d: &CornerDensity,
    bins: &Binning,
    quad: QuadratureSpec,
) -> Result<ChiSquare> {
    let k = d.k();
    if samples.metadata().k != k {
        return Err(Error::Dimension("sample set and density disagree on K".into()));
    }
    let all = bins.bins(k);
    let mut index = std::collections::HashMap::with_capacity(all.len());
    for (i, b) in all.iter().enumerate() {
        index.insert(b.clone(), i);
    }
    let mut observed = vec![0.0; all.len()];
    for p in samples.points() {
        let cell: Vec<usize> = p.iter().map(|&v| bins.cell_of(v)).collect();
        observed[index[&cell]] += 1.0;
    }
    let n = samples.len() as f64;
    let edges = bins.edges();
    let mut expected = Vec::with_capacity(all.len());
    for b in &all {
        let lower: Vec<f64> = b.iter().map(|&c| edges[c]).collect();
        let upper: Vec<f64> = b.iter().map(|&c| edges[c + 1]).collect();
        expected.push(n * chamber_box_probability(d, &lower, &upper, quad)?.max(0.0));
    }
    pearson_chi2(&observed, &expected)
}
