//! Exact cell-wise integration of the corner densities.
//!
//! On every product of knot cells the density is a polynomial of known
//! degree in each coordinate, so a tensor Gauss-Legendre rule of matching
//! order integrates it up to roundoff.

use crate::error::{Error, Result};
use crate::quadrature::{nodes_for_degree, GaussLegendre};

use super::{kernel_density, CornerDensity};
use crate::geometry::Spectrum;

/// Budget for the cell-wise tensor quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Largest number of integrand evaluations a single integral may use.
    pub max_evaluations: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            max_evaluations: 200_000_000,
        }
    }
}

/// Integrates `f` over `{a_1 <= ... <= a_K, lower_i <= a_i <= upper_i}`.
///
/// `f` must be a polynomial of degree at most `degree` in each coordinate on
/// every product of cells cut by `breaks` (and the bounds), and symmetric in
/// any group of coordinates that share a cell. Within such a group the ordered
/// region is `1/m!` of the cube, so every cell contributes a plain tensor rule.
pub fn ordered_box_integral<F>(
    f: F,
    lower: &[f64],
    upper: &[f64],
    breaks: &[f64],
    degree: usize,
    quad: QuadratureSpec,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let k = lower.len();
    if upper.len() != k || k == 0 {
        return Err(Error::Dimension("bounds must have the same positive length".into()));
    }
    if lower.iter().chain(upper).any(|v| !v.is_finite()) {
        return Err(Error::Argument("integration bounds must be finite".into()));
    }
    let mut grid: Vec<f64> = breaks
        .iter()
        .chain(lower)
        .chain(upper)
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let cells: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
    // allowed cell range for each coordinate
    let allowed: Vec<(usize, usize)> = (0..k)
        .map(|i| {
            let first = cells.partition_point(|c| c.0 < lower[i]);
            let end = cells.partition_point(|c| c.1 <= upper[i]);
            (first, end)
        })
        .collect();
    if allowed.iter().any(|&(a, b)| a >= b) {
        return Ok(0.0);
    }

    let rule = GaussLegendre::new(nodes_for_degree(degree));
    let per_cell = (rule.len() as u64).saturating_pow(k as u32);
    let sequences = count_sequences(&allowed);
    let needed = sequences.saturating_mul(per_cell);
    if needed > quad.max_evaluations {
        return Err(Error::Resource(format!(
            "cell-wise quadrature needs {needed} evaluations, budget is {}",
            quad.max_evaluations
        )));
    }

    let mut total = 0.0;
    let mut seq = vec![0usize; k];
    let mut point = vec![0.0; k];
    // depth-first enumeration of nondecreasing cell sequences
    fn recurse<F: Fn(&[f64]) -> f64>(
        pos: usize,
        min_cell: usize,
        seq: &mut [usize],
        allowed: &[(usize, usize)],
        cells: &[(f64, f64)],
        rule: &GaussLegendre,
        f: &F,
        point: &mut [f64],
        total: &mut f64,
    ) {
        let k = seq.len();
        if pos == k {
            let mut weight = 1.0;
            let mut run = 1;
            for i in 1..k {
                if seq[i] == seq[i - 1] {
                    run += 1;
                    weight /= run as f64;
                } else {
                    run = 1;
                }
            }
            *total += weight * tensor_cell(seq, cells, rule, f, point);
            return;
        }
        let (lo, hi) = allowed[pos];
        for c in lo.max(min_cell)..hi {
            seq[pos] = c;
            recurse(pos + 1, c, seq, allowed, cells, rule, f, point, total);
        }
    }
    recurse(
        0, 0, &mut seq, &allowed, &cells, &rule, &f, &mut point, &mut total,
    );
    Ok(total)
}

fn count_sequences(allowed: &[(usize, usize)]) -> u64 {
    // number of nondecreasing sequences, by dynamic programming over the last cell
    let max_cell = allowed.iter().map(|a| a.1).max().unwrap_or(0);
    let mut ways = vec![0u64; max_cell];
    for w in &mut ways[allowed[0].0..allowed[0].1] {
        *w = 1;
    }
    for &(lo, hi) in &allowed[1..] {
        let mut next = vec![0u64; max_cell];
        let mut prefix = 0u64;
        for c in 0..max_cell {
            prefix = prefix.saturating_add(ways[c]);
            if c >= lo && c < hi {
                next[c] = prefix;
            }
        }
        ways = next;
    }
    ways.iter().fold(0u64, |a, &b| a.saturating_add(b))
}

fn tensor_cell<F: Fn(&[f64]) -> f64>(
    seq: &[usize],
    cells: &[(f64, f64)],
    rule: &GaussLegendre,
    f: &F,
    point: &mut [f64],
) -> f64 {
    let k = seq.len();
    let m = rule.len();
    let mut idx = vec![0usize; k];
    let mut sum = 0.0;
    let halves: Vec<(f64, f64)> = seq
        .iter()
        .map(|&c| {
            let (a, b) = cells[c];
            (0.5 * (b - a), 0.5 * (a + b))
        })
        .collect();
    loop {
        let mut w = 1.0;
        for i in 0..k {
            let (half, mid) = halves[i];
            point[i] = mid + half * rule.nodes()[idx[i]];
            w *= half * rule.weights()[idx[i]];
        }
        sum += w * f(point);
        // odometer increment
        let mut i = 0;
        loop {
            if i == k {
                return sum;
            }
            idx[i] += 1;
            if idx[i] < m {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Total mass of the corner density over the chamber `a_1 <= ... <= a_K`.
pub fn normalization(d: &CornerDensity, quad: QuadratureSpec) -> Result<f64> {
    let (lo, hi) = (d.spectrum().first(), d.spectrum().last());
    let k = d.k();
    chamber_box_probability(d, &vec![lo; k], &vec![hi; k], quad)
}

/// Mass of `{A in chamber : lower_i <= a_i <= upper_i}`; infinite bounds are
/// clipped to the support `[x_1, x_N]`.
pub fn chamber_box_probability(
    d: &CornerDensity,
    lower: &[f64],
    upper: &[f64],
    quad: QuadratureSpec,
) -> Result<f64> {
    let k = d.k();
    if lower.len() != k || upper.len() != k {
        return Err(Error::Dimension(format!(
            "box bounds must have length {k}"
        )));
    }
    let (lo, hi) = (d.spectrum().first(), d.spectrum().last());
    let lower: Vec<f64> = lower.iter().map(|&v| v.clamp(lo, hi)).collect();
    let upper: Vec<f64> = upper.iter().map(|&v| v.clamp(lo, hi)).collect();
    ordered_box_integral(
        |a| d.eval_unordered(a),
        &lower,
        &upper,
        d.spectrum().values(),
        d.cell_degree(),
        quad,
    )
}

/// `int corner_density(d, A) Lambda^K_{K-1}(A, B) dA` over `A` interlacing `B`,
/// which reproduces the density of the `(K-1) x (K-1)` corner at `B`.
pub fn compose_kernel(d: &CornerDensity, b: &[f64], quad: QuadratureSpec) -> Result<f64> {
    let k = d.k();
    if k < 2 {
        return Err(Error::Argument("composition needs K >= 2".into()));
    }
    if b.len() + 1 != k {
        return Err(Error::Dimension(format!(
            "target point must have length {}, got {}",
            k - 1,
            b.len()
        )));
    }
    if b.windows(2).any(|w| w[0] > w[1]) || b.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument("target point must be weakly increasing".into()));
    }
    let (lo, hi) = (d.spectrum().first(), d.spectrum().last());
    if b[0] < lo || b[k - 2] > hi {
        return Ok(0.0);
    }
    // b_{j-1} <= a_j <= b_j with b_0 = x_1 and b_K = x_N
    let mut lower = vec![lo];
    lower.extend_from_slice(b);
    let mut upper = b.to_vec();
    upper.push(hi);
    let bspec = b.to_vec();
    let integrand = |a: &[f64]| -> f64 {
        let density = d.eval_unordered(a);
        if density == 0.0 {
            return 0.0;
        }
        let Ok(aspec) = Spectrum::new(a.to_vec()) else {
            return 0.0;
        };
        density * kernel_density(&aspec, &bspec).unwrap_or(0.0)
    };
    let degree = d.n() - k - 1;
    ordered_box_integral(integrand, &lower, &upper, d.spectrum().values(), degree, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::{fundamental_spline, KnotVector};

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::strict(v.to_vec()).unwrap()
    }

    #[test]
    fn ordered_integral_of_constant_is_simplex_volume() {
        // vol{0 <= a1 <= a2 <= a3 <= 1} = 1/6
        let v = ordered_box_integral(|_| 1.0, &[0.0; 3], &[1.0; 3], &[0.25, 0.5], 0, QuadratureSpec::default()).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        // symmetric polynomial a1 a2 over the ordered unit square: 1/8
        let v = ordered_box_integral(|a| a[0] * a[1], &[0.0; 2], &[1.0; 2], &[], 1, QuadratureSpec::default()).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
        // empty box
        let v = ordered_box_integral(|_| 1.0, &[0.5, 0.0], &[1.0, 0.4], &[], 0, QuadratureSpec::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn sequence_count() {
        assert_eq!(count_sequences(&[(0, 3), (0, 3)]), 6);
        assert_eq!(count_sequences(&[(0, 2), (1, 3)]), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let d = CornerDensity::new(spec(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 3).unwrap();
        let tiny = QuadratureSpec { max_evaluations: 10 };
        assert!(matches!(normalization(&d, tiny), Err(Error::Resource(_))));
    }

    #[test]
    fn normalization_examples() {
        let d = CornerDensity::new(spec(&[0.0, 1.0, 2.0]), 2).unwrap();
        let v = normalization(&d, QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
        let d = CornerDensity::new(spec(&[0.0, 1.0, 3.0, 7.0]), 1).unwrap();
        assert!((normalization(&d, QuadratureSpec::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compose_examples() {
        let x = spec(&[0.0, 1.0, 2.0]);
        let d = CornerDensity::new(x.clone(), 2).unwrap();
        let v = compose_kernel(&d, &[1.0], QuadratureSpec::default()).unwrap();
        let target = fundamental_spline(1.0, &KnotVector::new(x.values().to_vec()).unwrap());
        assert!((v - target).abs() < 1e-8, "{v} vs {target}");
        assert_eq!(compose_kernel(&d, &[2.5], QuadratureSpec::default()).unwrap(), 0.0);
        assert_eq!(compose_kernel(&d, &[-0.5], QuadratureSpec::default()).unwrap(), 0.0);
        assert!(compose_kernel(&d, &[0.5, 1.0], QuadratureSpec::default()).is_err());
        let d1 = CornerDensity::new(x, 1).unwrap();
        assert!(compose_kernel(&d1, &[], QuadratureSpec::default()).is_err());
    }

    #[test]
    fn compose_four_three_to_two() {
        let x = spec(&[0.0, 1.0, 3.0, 7.0]);
        let d3 = CornerDensity::new(x.clone(), 3).unwrap();
        let d2 = CornerDensity::new(x, 2).unwrap();
        for (i, b) in [[0.5, 2.0], [1.5, 4.0], [0.2, 6.5], [2.0, 2.5], [3.5, 6.0]].iter().enumerate() {
            let got = compose_kernel(&d3, b, QuadratureSpec::default()).unwrap();
            let want = d2.eval(b).unwrap();
            assert!((got - want).abs() < 1e-8, "point {i}: {got} vs {want}");
        }
    }
}
