//! End-to-end verification suites. Each check compares an implemented formula
//! against an independent oracle (quadrature, Monte Carlo, enumeration) and
//! reports `{test, statistic, threshold, pass}`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::density::{
    column_reduction_sides, compose_kernel, gt_volume, hciz, kernel_density, normalization,
    ComplexSpectrum, CornerDensity, QuadratureSpec,
};
use crate::discrete::{
    count_schemes, relative_dimension, relative_dimension_distribution,
    scaling_limit_compare, Signature,
};
use crate::error::{Error, Result};
use crate::geometry::Spectrum;
use crate::linalg::CMatrix;
use crate::matrixmodel::{laplace_mc, RandomStream};
use crate::quadrature::{cut_points, GaussLegendre};
use crate::splines::{
    fundamental_spline, spline_tail_integrals, truncated_power_divided_difference, KnotVector,
};
use crate::stats::{
    chi2_band, grid_cdf_discrepancy, histogram_chi2, ks_statistic_1d, Binning, SampleSet,
};

/// Spectrum whose prefixes serve as the fixed `X` of the continuous checks.
pub const DEFAULT_SPECTRUM: [f64; 8] = [0.0, 1.0, 3.0, 7.0, 12.0, 18.0, 25.0, 33.0];
/// Largest `N` of the continuous suites.
pub const MAX_CONTINUOUS_N: usize = 8;
/// Largest `N` of the exhaustive discrete enumeration.
pub const MAX_DISCRETE_N: usize = 4;
/// Largest admissible Monte Carlo sample count.
pub const MAX_SAMPLES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Splines,
    Kernel,
    Theorem,
    Volume,
    Hciz,
    Recurrence,
    Discrete,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Splines,
        Suite::Kernel,
        Suite::Theorem,
        Suite::Volume,
        Suite::Hciz,
        Suite::Recurrence,
        Suite::Discrete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Splines => "splines",
            Suite::Kernel => "kernel",
            Suite::Theorem => "theorem",
            Suite::Volume => "volume",
            Suite::Hciz => "hciz",
            Suite::Recurrence => "recurrence",
            Suite::Discrete => "discrete",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .copied()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyParams {
    /// Upper bound on `N` for every check.
    pub max_n: usize,
    pub seed: u64,
    /// Overrides the Monte Carlo sample counts when set.
    pub samples: Option<usize>,
    pub threads: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            max_n: MAX_CONTINUOUS_N,
            seed: 7,
            samples: None,
            threads: 1,
        }
    }
}

impl VerifyParams {
    fn validate(&self) -> Result<()> {
        if self.max_n < 2 {
            return Err(Error::Argument("--n must be at least 2".into()));
        }
        if self.max_n > MAX_CONTINUOUS_N {
            return Err(Error::Resource(format!(
                "N={} exceeds the verification budget N <= {MAX_CONTINUOUS_N}",
                self.max_n
            )));
        }
        match self.samples {
            Some(0) => Err(Error::Argument("--samples must be positive".into())),
            Some(s) if s > MAX_SAMPLES => Err(Error::Resource(format!(
                "{s} samples exceed the budget of {MAX_SAMPLES}"
            ))),
            _ => Ok(()),
        }
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    /// Independent generator for one named check.
    fn rng(&self, check: u64) -> RandomStream {
        RandomStream::with_stream(self.seed, 1 << 40 | check)
    }

    /// Seed for the chunked samplers, distinct per check.
    fn sampler_seed(&self, check: u64) -> u64 {
        self.seed ^ (check.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        CheckReport {
            test: test.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    /// Passes when `statistic < threshold`.
    pub fn below(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        CheckReport {
            test: test.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
        }
    }

    /// Passes when `statistic` lies in `[lo, hi]`; `threshold` records `hi`.
    pub fn within(test: impl Into<String>, statistic: f64, lo: f64, hi: f64) -> Self {
        CheckReport {
            test: test.into(),
            statistic,
            threshold: hi,
            pass: lo <= statistic && statistic <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<CheckReport>) -> Self {
        SuiteReport {
            suite: suite.name().into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

pub fn run_suite(suite: Suite, params: &VerifyParams) -> Result<SuiteReport> {
    params.validate()?;
    let checks = match suite {
        Suite::Splines => spline_checks(params)?,
        Suite::Kernel => kernel_checks(params)?,
        Suite::Theorem => {
            let mut c = okounkov_checks(params)?;
            c.extend(interior_checks(params)?);
            c.extend(normalization_checks(params)?);
            c.extend(column_reduction_checks(params)?);
            c
        }
        Suite::Volume => volume_checks(params)?,
        Suite::Hciz => hciz_checks(params)?,
        Suite::Recurrence => recurrence_checks(params)?,
        Suite::Discrete => discrete_checks(params)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, params)?.checks);
            }
            all
        }
    };
    Ok(SuiteReport::new(suite, checks))
}

fn default_spectrum(n: usize) -> Spectrum {
    Spectrum::strict(DEFAULT_SPECTRUM[..n].to_vec()).expect("fixed spectrum is strict")
}

fn random_knots(rng: &mut RandomStream, n: usize, min_gap: f64, max_gap: f64) -> Vec<f64> {
    let mut y = vec![rng.random_range(-5.0..5.0)];
    for _ in 1..n {
        let last = y[y.len() - 1];
        y.push(last + rng.random_range(min_gap..max_gap));
    }
    y
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        (value - reference).abs() / reference.abs()
    }
}

/// Normalization, tail integrals, the divided-difference representation,
/// support and sign of the fundamental spline on random knot vectors.
pub fn spline_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    const VECTORS: usize = 200;
    const MAX_KNOTS: usize = 12;
    let mut rng = params.rng(1);
    let mut norm_err: f64 = 0.0;
    let mut tail_err: f64 = 0.0;
    let mut dd_err: f64 = 0.0;
    let mut support_violations = 0usize;
    for _ in 0..VECTORS {
        let n = rng.random_range(2..=MAX_KNOTS);
        let y = KnotVector::new(random_knots(&mut rng, n, 0.05, 2.0))?;
        let (lo, hi) = (y.first(), y.last());
        let span = hi - lo;
        let rule = GaussLegendre::for_degree(n - 2);
        let per_cell = |b: f64, c: f64| -> f64 {
            cut_points(b, c, y.knots().iter().copied())
                .windows(2)
                .map(|w| rule.integrate(w[0], w[1], |a| fundamental_spline(a, &y)))
                .sum()
        };
        let total = per_cell(lo, hi);
        norm_err = norm_err.max((total - 1.0).abs());
        norm_err = norm_err.max((spline_tail_integrals(f64::NEG_INFINITY, f64::INFINITY, &y)? - 1.0).abs());
        for _ in 0..5 {
            let mut b = rng.random_range(lo - 1.0..hi + 1.0);
            let mut c = rng.random_range(lo - 1.0..hi + 1.0);
            if b > c {
                std::mem::swap(&mut b, &mut c);
            }
            tail_err = tail_err.max((spline_tail_integrals(b, c, &y)? - per_cell(b, c)).abs());
            tail_err = tail_err.max(
                (spline_tail_integrals(f64::NEG_INFINITY, c, &y)? - per_cell(lo.min(c), c)).abs(),
            );
            tail_err = tail_err.max(
                (spline_tail_integrals(b, f64::INFINITY, &y)? - per_cell(b.max(lo), hi.max(b))).abs(),
            );
        }
        let peak = 2.0 * (n - 1) as f64 / span;
        for _ in 0..50 {
            let a = rng.random_range(lo..hi);
            let m = fundamental_spline(a, &y);
            let dd = (n - 1) as f64 * truncated_power_divided_difference(a, (n - 2) as u32, &y);
            dd_err = dd_err.max((m - dd).abs() / m.abs().max(peak));
        }
        let (g_lo, g_hi) = (lo - 0.25 * span, hi + 0.25 * span);
        for i in 0..1000 {
            let a = g_lo + (g_hi - g_lo) * i as f64 / 999.0;
            let m = fundamental_spline(a, &y);
            let inside = lo <= a && a <= hi;
            if (!inside && m != 0.0) || m < 0.0 || !m.is_finite() {
                support_violations += 1;
            }
        }
    }
    Ok(vec![
        CheckReport::at_most("splines.normalization", norm_err, 1e-10),
        CheckReport::at_most("splines.tail_integrals", tail_err, 1e-10),
        CheckReport::at_most("splines.divided_difference", dd_err, 1e-10),
        CheckReport::at_most("splines.support_and_sign", support_violations as f64, 0.0),
    ])
}

/// A point strictly interlacing `x`, uniform in the product of gaps.
fn interior_interlacing(rng: &mut RandomStream, x: &[f64]) -> Vec<f64> {
    x.windows(2)
        .map(|w| {
            let v = rng.random_range(w[0]..w[1]);
            if v == w[0] {
                0.5 * (w[0] + w[1])
            } else {
                v
            }
        })
        .collect()
}

/// The `(N-1) x (N-1)` corner density against the one-step kernel.
pub fn kernel_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut rng = params.rng(2);
    let mut worst: f64 = 0.0;
    for n in 2..=params.max_n.min(MAX_CONTINUOUS_N) {
        let x = default_spectrum(n);
        let d = CornerDensity::new(x.clone(), n - 1)?;
        for _ in 0..1000 {
            let a = interior_interlacing(&mut rng, x.values());
            worst = worst.max(relative_error(d.eval(&a)?, kernel_density(&x, &a)?));
        }
    }
    Ok(vec![CheckReport::at_most("kernel.top_corner", worst, 1e-10)])
}

/// `K = 1`: the density is the fundamental spline, and orbit samples of the
/// top-left entry pass a Kolmogorov-Smirnov test against its integral.
pub fn okounkov_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut rng = params.rng(3);
    let mut worst: f64 = 0.0;
    for n in 2..=params.max_n.min(MAX_CONTINUOUS_N) {
        let x = default_spectrum(n);
        let d = CornerDensity::new(x.clone(), 1)?;
        let knots = KnotVector::new(x.values().to_vec())?;
        for _ in 0..1000 {
            let a = rng.random_range(x.first()..x.last());
            worst = worst.max(relative_error(d.eval(&[a])?, fundamental_spline(a, &knots)));
        }
    }
    let mut out = vec![CheckReport::at_most("theorem.k1_spline", worst, 1e-12)];
    if params.max_n >= 4 {
        let x = Spectrum::strict(vec![0.0, 1.0, 3.0, 7.0])?;
        let samples = params.samples_or(100_000);
        let set = SampleSet::from_orbit(&x, 1, samples, params.sampler_seed(3), params.threads)?;
        let knots = KnotVector::new(x.values().to_vec())?;
        let ks = ks_statistic_1d(&set.coordinate(0), |t| {
            spline_tail_integrals(f64::NEG_INFINITY, t, &knots).unwrap_or(f64::NAN)
        })?;
        out.push(CheckReport::below("theorem.k1_ks", ks, 1.63 / (samples as f64).sqrt()));
    }
    Ok(out)
}

/// Corners of size `1 < K < N - 1` against Monte Carlo: CDF discrepancy on a
/// `5^K` grid and a chi-square test on a histogram of the chamber.
pub fn interior_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (i, &(n, k)) in [(4usize, 2usize), (5, 2), (5, 3)].iter().enumerate() {
        if n > params.max_n {
            continue;
        }
        let x = default_spectrum(n);
        let d = CornerDensity::new(x.clone(), k)?;
        let samples = params.samples_or(100_000);
        let seed = params.sampler_seed(40 + i as u64);
        let set = SampleSet::from_orbit(&x, k, samples, seed, params.threads)?;
        let (lo, hi) = (x.first(), x.last());
        let axis: Vec<f64> = (1..=5).map(|j| lo + (hi - lo) * j as f64 / 5.0).collect();
        let mut grid = vec![Vec::new()];
        for _ in 0..k {
            grid = grid
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        let disc = grid_cdf_discrepancy(&set, &d, &grid)?;
        out.push(CheckReport::below(
            format!("theorem.grid_cdf.n{n}k{k}"),
            disc,
            5.0 / (samples as f64).sqrt(),
        ));
        let cells = if k == 2 { 8 } else { 5 };
        let chi = histogram_chi2(&set, &d, &Binning::uniform(&x, cells)?)?;
        let (band_lo, band_hi) = chi2_band(chi.dof, 0.01);
        out.push(CheckReport::within(
            format!("theorem.chi2.n{n}k{k}"),
            chi.statistic,
            band_lo,
            band_hi,
        ));
    }
    Ok(out)
}

/// Total mass one for every corner size, `N <= 6`.
pub fn normalization_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut worst: f64 = 0.0;
    for n in 2..=params.max_n.min(6) {
        for k in 1..n {
            let d = CornerDensity::new(default_spectrum(n), k)?;
            worst = worst.max((normalization(&d, QuadratureSpec::default())? - 1.0).abs());
        }
    }
    Ok(vec![CheckReport::at_most("theorem.normalization", worst, 1e-8)])
}

/// Both sides of the column-reduction identity on random spectra and cut points.
pub fn column_reduction_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut rng = params.rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=params.max_n.min(MAX_CONTINUOUS_N));
        let x = Spectrum::strict(random_knots(&mut rng, n, 0.2, 2.0))?;
        let xs = x.values();
        for k in 1..n {
            // b_j in the support of M(.; x_j, ..., x_{N-K+j+1})
            let mut b: Vec<f64> = (0..k - 1)
                .map(|j| rng.random_range(xs[j]..xs[n - k + j + 1]))
                .collect();
            b.sort_by(f64::total_cmp);
            let (lhs, rhs) = column_reduction_sides(&x, k, &b)?;
            let scale = lhs.abs().max(rhs.abs());
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok(vec![CheckReport::at_most("theorem.column_reduction", worst, 1e-10)])
}

/// Gelfand-Tsetlin polytope volume: exact small case and bounding-box
/// Monte Carlo hit rates.
pub fn volume_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let exact = gt_volume(&Spectrum::strict(vec![0.0, 1.0, 2.0])?)?;
    let mut out = vec![CheckReport::at_most("volume.hand_value", (exact - 1.0).abs(), 1e-12)];
    for n in 3..=params.max_n.min(4) {
        let x = default_spectrum(n);
        let samples = params.samples.map_or(1_000_000, |s| s.saturating_mul(10));
        let (estimate, se) = volume_mc(x.values(), samples, &mut params.rng(60 + n as u64));
        let z = (estimate - gt_volume(&x)?).abs() / se;
        out.push(CheckReport::at_most(format!("volume.mc.n{n}"), z, 3.0));
    }
    Ok(out)
}

/// Hit-rate estimate of the polytope volume and its standard error. Row `m`
/// entry `i` of a pattern lies in `[x_i, x_{i+N-m}]`, which bounds the box.
pub fn volume_mc(x: &[f64], samples: usize, rng: &mut RandomStream) -> (f64, f64) {
    let n = x.len();
    let bounds: Vec<Vec<(f64, f64)>> = (1..n)
        .map(|m| (0..m).map(|i| (x[i], x[i + n - m])).collect())
        .collect();
    let box_volume: f64 = bounds.iter().flatten().map(|(a, b)| b - a).product();
    let mut rows: Vec<Vec<f64>> = bounds.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut hits = 0usize;
    for _ in 0..samples {
        for (row, b) in rows.iter_mut().zip(&bounds) {
            for (v, &(lo, hi)) in row.iter_mut().zip(b) {
                *v = rng.random_range(lo..hi);
            }
        }
        let mut ok = true;
        let mut upper: &[f64] = x;
        for row in rows.iter().rev() {
            if !row.iter().enumerate().all(|(i, &v)| upper[i] <= v && v <= upper[i + 1]) {
                ok = false;
                break;
            }
            upper = row;
        }
        hits += ok as usize;
    }
    let p = hits as f64 / samples as f64;
    let se = box_volume * (p * (1.0 - p) / samples as f64).sqrt();
    (box_volume * p, se)
}

const Z_TILDE: [Complex64; 3] = [
    Complex64::new(0.3, 0.2),
    Complex64::new(-0.4, 0.1),
    Complex64::new(0.15, -0.3),
];

/// HCIZ closed form against Monte Carlo, the corner identity and relabeling.
pub fn hciz_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    if params.max_n >= 3 {
        let x = Spectrum::strict(vec![0.0, 1.0, 2.0])?;
        let z = [0.3, 0.1, 0.0];
        let exact = hciz(&x, &ComplexSpectrum::from_real(&z)?)?;
        let samples = params.samples_or(100_000);
        let est = laplace_mc(&x, &CMatrix::from_real_diagonal(&z), samples, &mut params.rng(7))?;
        out.push(CheckReport::at_most(
            "hciz.laplace_mc",
            (est.mean - exact).norm() / est.std_error,
            3.0,
        ));
    }
    let mut corner_err: f64 = 0.0;
    for n in 2..=params.max_n.min(4) {
        let x = default_spectrum(n);
        let zt = &Z_TILDE[..n - 1];
        let mut full = zt.to_vec();
        full.push(Complex64::new(0.0, 0.0));
        let lhs = hciz(&x, &ComplexSpectrum::new(full)?)?;
        let rhs = corner_identity_rhs(x.values(), zt)?;
        corner_err = corner_err.max((lhs - rhs).norm() / lhs.norm());
    }
    out.push(CheckReport::at_most("hciz.corner_identity", corner_err, 1e-6));

    let mut rng = params.rng(8);
    let mut perm_err: f64 = 0.0;
    for n in 2..=params.max_n.min(MAX_CONTINUOUS_N) {
        for _ in 0..10 {
            let x = Spectrum::strict(random_knots(&mut rng, n, 0.2, 1.0))?;
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let base = hciz(&x, &ComplexSpectrum::new(z.clone())?)?;
            let mut shuffled = z;
            shuffled.shuffle(&mut rng);
            let other = hciz(&x, &ComplexSpectrum::new(shuffled)?)?;
            perm_err = perm_err.max((base - other).norm() / base.norm());
        }
    }
    out.push(CheckReport::at_most("hciz.permutation", perm_err, 1e-12));
    Ok(out)
}

/// `(N-1)!/V(X) int_{Y < X} V(Y) hciz(Y, z~) dY` by tensor Gauss-Legendre over
/// the box `prod [x_i, x_{i+1}]`.
fn corner_identity_rhs(x: &[f64], zt: &[Complex64]) -> Result<Complex64> {
    let m = x.len() - 1;
    let rule = GaussLegendre::new(24);
    let axes: Vec<Vec<(f64, f64)>> =
        x.windows(2).map(|w| rule.on_interval(w[0], w[1]).collect()).collect();
    let zs = ComplexSpectrum::new(zt.to_vec())?;
    let mut idx = vec![0usize; m];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let y: Vec<f64> = (0..m).map(|i| axes[i][idx[i]].0).collect();
        let w: f64 = (0..m).map(|i| axes[i][idx[i]].1).product();
        let ys = Spectrum::strict(y.clone())?;
        total += hciz(&ys, &zs)? * (w * crate::geometry::vandermonde(&y));
        let mut d = 0;
        while d < m {
            idx[d] += 1;
            if idx[d] < rule.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == m {
            break;
        }
    }
    let scale = crate::density::factorial(m) / crate::geometry::vandermonde(x);
    Ok(total * scale)
}

/// Integrating the corner density against the one-step kernel gives the
/// density of the next smaller corner.
pub fn recurrence_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut rng = params.rng(9);
    let mut worst: f64 = 0.0;
    for n in 3..=params.max_n.min(5) {
        let x = default_spectrum(n);
        for k in 2..n {
            let d = CornerDensity::new(x.clone(), k)?;
            let smaller = CornerDensity::new(x.clone(), k - 1)?;
            for _ in 0..10 {
                let mut b: Vec<f64> = (0..k - 1)
                    .map(|_| rng.random_range(x.first()..x.last()))
                    .collect();
                b.sort_by(f64::total_cmp);
                let composed = compose_kernel(&d, &b, QuadratureSpec::default())?;
                let direct = smaller.eval(&b)?;
                worst = worst.max((composed - direct).abs() / direct.abs().max(1.0));
            }
        }
    }
    Ok(vec![CheckReport::at_most("recurrence.compose_kernel", worst, 1e-8)])
}

/// All integer patterns below `x`, tallied by row.
fn enumerate_patterns(x: &[i64]) -> (u64, Vec<HashMap<Vec<i64>, u64>>) {
    fn descend(upper: &[i64], total: &mut u64, tally: &mut Vec<HashMap<Vec<i64>, u64>>, rows: &mut Vec<Vec<i64>>) {
        if upper.len() == 1 {
            *total += 1;
            for r in rows.iter() {
                *tally[r.len()].entry(r.clone()).or_default() += 1;
            }
            return;
        }
        let ranges: Vec<(i64, i64)> = upper.windows(2).map(|w| (w[0], w[1])).collect();
        let mut row: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            rows.push(row.clone());
            descend(&row.clone(), total, tally, rows);
            rows.pop();
            let mut i = 0;
            while i < row.len() {
                if row[i] < ranges[i].1 {
                    row[i] += 1;
                    break;
                }
                row[i] = ranges[i].0;
                i += 1;
            }
            if i == row.len() {
                return;
            }
        }
    }
    let mut total = 0;
    let mut tally = vec![HashMap::new(); x.len()];
    descend(x, &mut total, &mut tally, &mut Vec::new());
    (total, tally)
}

fn all_signatures(max_n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut layer: Vec<Vec<i64>> = (lo..=hi).map(|v| vec![v]).collect();
    for _ in 0..max_n {
        out.extend(layer.iter().cloned());
        layer = layer
            .into_iter()
            .flat_map(|s| {
                let last = s[s.len() - 1];
                (last..=hi).map(move |v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Exact counts and relative dimensions against enumeration, exact total mass,
/// and decreasing distance to the continuous density as the lattice refines.
pub fn discrete_checks(params: &VerifyParams) -> Result<Vec<CheckReport>> {
    let mut count_mismatches = 0usize;
    let mut reldim_mismatches = 0usize;
    let mut mass_mismatches = 0usize;
    for x in all_signatures(params.max_n.min(MAX_DISCRETE_N), 0, 4) {
        let (total, tally) = enumerate_patterns(&x);
        let sig = Signature::new(x.clone())?;
        if count_schemes(&sig)? != BigUint::from(total) {
            count_mismatches += 1;
        }
        for (k, rows) in tally.iter().enumerate().skip(1) {
            for (y, &c) in rows {
                let want = BigRational::new(c.into(), total.into());
                if relative_dimension(&sig, &Signature::new(y.clone())?)? != want {
                    reldim_mismatches += 1;
                }
            }
            let law = relative_dimension_distribution(&sig, k)?;
            let mass: BigRational = law.iter().map(|(_, p)| p.clone()).sum();
            if mass != BigRational::one() || law.len() != rows.len() {
                mass_mismatches += 1;
            }
        }
    }
    let x = Spectrum::strict(vec![0.0, 1.0, 2.0])?;
    let diffs = [10u64, 20, 40]
        .iter()
        .map(|&l| Ok(scaling_limit_compare(&x, 1, l, &[vec![1.0]])?.rows[0].abs_diff))
        .collect::<Result<Vec<f64>>>()?;
    let worst_ratio = diffs
        .windows(2)
        .map(|w| if w[0].is_zero() { f64::INFINITY } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    Ok(vec![
        CheckReport::at_most("discrete.count_schemes", count_mismatches as f64, 0.0),
        CheckReport::at_most("discrete.relative_dimension", reldim_mismatches as f64, 0.0),
        CheckReport::at_most("discrete.total_mass", mass_mismatches as f64, 0.0),
        CheckReport::below("discrete.scaling_limit", worst_ratio, 1.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn budgets() {
        let too_big = VerifyParams { max_n: 9, ..Default::default() };
        assert!(matches!(run_suite(Suite::Kernel, &too_big), Err(Error::Resource(_))));
        let too_many = VerifyParams { samples: Some(MAX_SAMPLES + 1), ..Default::default() };
        assert!(matches!(run_suite(Suite::Hciz, &too_many), Err(Error::Resource(_))));
    }

    #[test]
    fn enumeration_matches_small_counts() {
        assert_eq!(enumerate_patterns(&[0, 1, 2]).0, 8);
        assert_eq!(enumerate_patterns(&[0, 1]).0, 2);
        assert_eq!(all_signatures(2, 0, 1).len(), 5);
    }

    #[test]
    fn volume_mc_small_case() {
        let mut rng = RandomStream::new(3);
        let (v, se) = volume_mc(&[0.0, 1.0, 2.0], 200_000, &mut rng);
        assert!((v - 1.0).abs() < 4.0 * se, "{v} {se}");
    }
}
