//! Closed-form densities of corner projections of orbital measures.
//!
//! For a strictly increasing `X = (x_1 < ... < x_N)` the radial part of the
//! `K x K` corner has density
//!
//! ```text
//! c_{N,K} V(A) det[ M(a_j; x_i, ..., x_{N-K+i}) ]_{i,j=1..K}
//! ---------------------------------------------------------
//!            prod_{j - i >= N-K+1} (x_j - x_i)
//! ```
//!
//! with `c_{N,K} = prod_{i=1}^{K-1} binom(N-K+i, i)` and `M` the fundamental
//! spline. The one-step kernel `Lambda^N_{N-1}(X, A) = (N-1)! V(A) / V(X)` on
//! the interlacing set, the volume of the Gelfand-Tsetlin polytope and the
//! HCIZ integral live here as well.

mod hciz;
mod integrals;

pub use hciz::{exp_divided_differences, hciz, ComplexSpectrum};
pub use integrals::{
    chamber_box_probability, compose_kernel, normalization, ordered_box_integral, QuadratureSpec,
};

use crate::error::{Error, Result};
use crate::geometry::{interlaces, ln_abs_vandermonde, vandermonde, Spectrum};
use crate::linalg::{determinant, MAX_DET_ORDER};
use crate::splines::{fundamental_spline, spline_tail_integrals, KnotVector};

/// Above this size constants and gap products are assembled in log space.
pub const LOG_SPACE_THRESHOLD: usize = 20;

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// `c_N = (N-1)! (N-2)! ... 0!`.
pub fn superfactorial(n: usize) -> f64 {
    (0..n).map(factorial).product()
}

pub fn ln_superfactorial(n: usize) -> f64 {
    (0..n).map(ln_factorial).sum()
}

fn check_corner_range(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::Argument(format!(
            "corner size K={k} must satisfy 1 <= K <= N-1 for N={n}"
        )));
    }
    Ok(())
}

/// `c_{N,K} = prod_{i=1}^{K-1} binom(N-K+i, i)`.
pub fn c_constant(n: usize, k: usize) -> Result<f64> {
    check_corner_range(n, k)?;
    Ok((1..k).map(|i| binomial(n - k + i, i)).product())
}

/// `ln c_{N,K}`.
pub fn ln_c_constant(n: usize, k: usize) -> Result<f64> {
    check_corner_range(n, k)?;
    Ok((1..k)
        .map(|i| {
            (1..=i)
                .map(|t| ((n - k + t) as f64 / t as f64).ln())
                .sum::<f64>()
        })
        .sum())
}

fn binomial(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, t| acc * (n - k + t) as f64 / t as f64).round()
}

/// Density of `Lambda^N_{N-1}(X, .)`: `(N-1)! V(A) / V(X)` if `A` interlaces `X`, else 0.
pub fn kernel_density(x: &Spectrum, a: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Dimension("the corner kernel needs N >= 2".into()));
    }
    x.require_strict()?;
    if !interlaces(a, x.values())? {
        return Ok(0.0);
    }
    if n > LOG_SPACE_THRESHOLD {
        let va = vandermonde_signed_ln(a);
        return Ok(match va {
            None => 0.0,
            Some(ln_va) => (ln_factorial(n - 1) + ln_va - ln_abs_vandermonde(x.values())).exp(),
        });
    }
    Ok(factorial(n - 1) * vandermonde(a) / vandermonde(x.values()))
}

fn vandermonde_signed_ln(a: &[f64]) -> Option<f64> {
    let v = ln_abs_vandermonde(a);
    v.is_finite().then_some(v)
}

/// Volume of the Gelfand-Tsetlin polytope `P_X`, `V(X) / ((N-1)! ... 0!)`.
pub fn gt_volume(x: &Spectrum) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::Dimension("the Gelfand-Tsetlin polytope needs N >= 2".into()));
    }
    x.require_strict()?;
    let n = x.len();
    if n > LOG_SPACE_THRESHOLD {
        Ok((ln_abs_vandermonde(x.values()) - ln_superfactorial(n)).exp())
    } else {
        Ok(vandermonde(x.values()) / superfactorial(n))
    }
}

/// The density of the radial part of the `K x K` corner of a matrix drawn from
/// the orbital measure of `X`.
#[derive(Debug, Clone)]
pub struct CornerDensity {
    x: Spectrum,
    k: usize,
    rows: Vec<KnotVector>,
    c: f64,
    gap_product: f64,
    // ln(c_{N,K}) - ln(gap product), used in log-space mode
    ln_prefactor: f64,
}

impl CornerDensity {
    pub fn new(x: Spectrum, k: usize) -> Result<Self> {
        let n = x.len();
        check_corner_range(n, k)?;
        if k > MAX_DET_ORDER {
            return Err(Error::Argument(format!(
                "corner size {k} exceeds the supported maximum {MAX_DET_ORDER}"
            )));
        }
        x.require_strict()?;
        let xs = x.values();
        let rows = (0..k)
            .map(|i| KnotVector::new(xs[i..=n - k + i].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let mut gap_product = 1.0;
        let mut ln_gap = 0.0;
        for j in 0..n {
            for i in 0..j {
                if j - i > n - k {
                    gap_product *= xs[j] - xs[i];
                    ln_gap += (xs[j] - xs[i]).ln();
                }
            }
        }
        let c = c_constant(n, k)?;
        let ln_prefactor = ln_c_constant(n, k)? - ln_gap;
        Ok(CornerDensity {
            x,
            k,
            rows,
            c,
            gap_product,
            ln_prefactor,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `c_{N,K}`.
    pub fn constant(&self) -> f64 {
        self.c
    }

    /// `prod_{j - i >= N-K+1} (x_j - x_i)`.
    pub fn gap_product(&self) -> f64 {
        self.gap_product
    }

    /// Knot windows `(x_i, ..., x_{N-K+i})`, one per determinant row.
    pub fn rows(&self) -> &[KnotVector] {
        &self.rows
    }

    /// Polynomial degree of the density in each coordinate on a knot cell.
    pub fn cell_degree(&self) -> usize {
        self.n() - 2
    }

    /// Density at a weakly increasing `A`.
    pub fn eval(&self, a: &[f64]) -> Result<f64> {
        if a.len() != self.k {
            return Err(Error::Dimension(format!(
                "density of the {}x{} corner evaluated at a point of length {}",
                self.k,
                self.k,
                a.len()
            )));
        }
        if a.iter().any(|v| v.is_nan()) {
            return Err(Error::Argument("evaluation point contains NaN".into()));
        }
        if a.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Argument("evaluation point must be weakly increasing".into()));
        }
        Ok(self.eval_unordered(a))
    }

    /// The determinantal formula at an arbitrary (unordered) point. The
    /// expression is symmetric in `A`, so this is the density of the
    /// symmetrized measure times `K!`.
    pub fn eval_unordered(&self, a: &[f64]) -> f64 {
        let (lo, hi) = (self.x.first(), self.x.last());
        if a.iter().any(|&v| v < lo || v > hi) {
            return 0.0;
        }
        let k = self.k;
        let mut m = Vec::with_capacity(k * k);
        for row in &self.rows {
            for &aj in a {
                m.push(fundamental_spline(aj, row));
            }
        }
        for j in 0..k {
            if (0..k).all(|i| m[i * k + j] == 0.0) {
                return 0.0;
            }
        }
        let det = determinant(m, k);
        if det == 0.0 {
            return 0.0;
        }
        if self.n() > LOG_SPACE_THRESHOLD {
            let va = vandermonde(a);
            if va == 0.0 {
                return 0.0;
            }
            let sign = va.signum() * det.signum();
            sign * (self.ln_prefactor + ln_abs_vandermonde(a) + det.abs().ln()).exp()
        } else {
            self.c * vandermonde(a) * det / self.gap_product
        }
    }
}

/// Convenience wrapper around [`CornerDensity::eval`].
pub fn corner_density(d: &CornerDensity, a: &[f64]) -> Result<f64> {
    d.eval(a)
}

/// Both sides of the column-reduction identity behind the induction step
/// from `K` to `K-1`:
///
/// `det[ int_{b_{j-1}}^{b_j} M(a; Y_i) da ]_{K x K}` with `b_0 = -inf`, `b_K = +inf`,
/// `Y_i = (x_i, ..., x_{N-K+i})`, and
/// `(N-K+1)^{-(K-1)} prod_{i<K} (x_{N-K+i+1} - x_i) det[ M(b_j; x_i, ..., x_{N-K+i+1}) ]_{(K-1) x (K-1)}`.
pub fn column_reduction_sides(x: &Spectrum, k: usize, b: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    check_corner_range(n, k)?;
    x.require_strict()?;
    if b.len() + 1 != k {
        return Err(Error::Dimension(format!(
            "column reduction for K={k} needs {} cut points, got {}",
            k - 1,
            b.len()
        )));
    }
    if b.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument("cut points must be weakly increasing".into()));
    }
    let xs = x.values();
    let windows = (0..k)
        .map(|i| KnotVector::new(xs[i..=n - k + i].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut f = Vec::with_capacity(k * k);
    for w in &windows {
        for j in 0..k {
            let lo = if j == 0 { f64::NEG_INFINITY } else { b[j - 1] };
            let hi = if j == k - 1 { f64::INFINITY } else { b[j] };
            f.push(spline_tail_integrals(lo, hi, w)?);
        }
    }
    let lhs = determinant(f, k);

    let wider = (0..k - 1)
        .map(|i| KnotVector::new(xs[i..=n - k + i + 1].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut m = Vec::with_capacity((k - 1) * (k - 1));
    for w in &wider {
        for &bj in b {
            m.push(fundamental_spline(bj, w));
        }
    }
    let spread: f64 = (0..k - 1).map(|i| xs[n - k + i + 1] - xs[i]).product();
    let scale = ((n - k + 1) as f64).powi(-((k - 1) as i32));
    let rhs = scale * spread * determinant(m, k - 1);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::strict(v.to_vec()).unwrap()
    }

    #[test]
    fn constants() {
        for n in 2..10 {
            assert_eq!(c_constant(n, 1).unwrap(), 1.0);
            assert_eq!(c_constant(n, n - 1).unwrap(), factorial(n - 1));
            for k in 2..n {
                let lhs = c_constant(n, k).unwrap();
                let rhs = c_constant(n, k - 1).unwrap() * ((n - k + 1) as f64).powi(k as i32 - 1)
                    / factorial(k - 1);
                assert!((lhs - rhs).abs() <= 1e-12 * lhs, "n={n} k={k}");
                assert!((ln_c_constant(n, k).unwrap() - lhs.ln()).abs() < 1e-12);
            }
        }
        assert_eq!(c_constant(4, 2).unwrap(), 3.0);
        assert!(c_constant(4, 4).is_err());
        assert!(c_constant(4, 0).is_err());
        assert_eq!(superfactorial(4), 12.0);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_density(&spec(&[0.0, 1.0]), &[0.3]).unwrap(), 1.0);
        assert_eq!(kernel_density(&spec(&[0.0, 1.0, 2.0]), &[0.5, 1.5]).unwrap(), 1.0);
        assert_eq!(kernel_density(&spec(&[0.0, 1.0, 2.0]), &[1.2, 1.5]).unwrap(), 0.0);
        let tied = Spectrum::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            kernel_density(&tied, &[0.5, 1.0]),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn volume_examples() {
        assert_eq!(gt_volume(&spec(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((gt_volume(&spec(&[0.0, 1.0, 2.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((gt_volume(&spec(&[0.0, 3.5])).unwrap() - 3.5).abs() < 1e-15);
        assert!(gt_volume(&Spectrum::new(vec![0.0, 0.0]).unwrap()).is_err());
        // log-space path agrees with the direct product where both are representable
        let x: Vec<f64> = (0..22).map(|i| i as f64 * 0.5).collect();
        let direct = vandermonde(&x) / superfactorial(22);
        let v = gt_volume(&spec(&x)).unwrap();
        assert!((v - direct).abs() <= 1e-10 * direct, "{v} vs {direct}");
    }

    #[test]
    fn corner_examples() {
        let d = CornerDensity::new(spec(&[0.0, 1.0]), 1).unwrap();
        assert_eq!(d.eval(&[0.5]).unwrap(), 1.0);
        let x = spec(&[0.0, 1.0, 3.0, 7.0]);
        let d1 = CornerDensity::new(x.clone(), 1).unwrap();
        let spline = KnotVector::new(x.values().to_vec()).unwrap();
        for a in [0.1, 1.0, 2.5, 6.9] {
            assert_eq!(d1.eval(&[a]).unwrap(), fundamental_spline(a, &spline));
        }
        let d3 = CornerDensity::new(x.clone(), 3).unwrap();
        let a = [0.5, 2.0, 4.0];
        let k = kernel_density(&x, &a).unwrap();
        assert!((d3.eval(&a).unwrap() - k).abs() <= 1e-12 * k);
        assert_eq!(d3.eval(&[0.5, 2.0, 8.0]).unwrap(), 0.0);
        assert!(d3.eval(&[2.0, 0.5, 4.0]).is_err());
        assert!(d3.eval(&[2.0, 4.0]).is_err());
        assert!(CornerDensity::new(x.clone(), 4).is_err());
        assert!(matches!(
            CornerDensity::new(Spectrum::new(vec![0.0, 1.0, 1.0]).unwrap(), 1),
            Err(Error::DegenerateSpectrum { .. })
        ));
        // ties in A make V(A) vanish
        let d2 = CornerDensity::new(x, 2).unwrap();
        assert_eq!(d2.eval(&[2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn log_space_matches_direct() {
        let x: Vec<f64> = (0..21).map(|i| i as f64 + 0.1 * (i as f64).sin()).collect();
        let small: Vec<f64> = x[..20].to_vec();
        let big = CornerDensity::new(spec(&x), 2).unwrap();
        let d = CornerDensity::new(spec(&small), 2).unwrap();
        // direct and log-space assembly of the same formula
        let a = [5.3, 9.7];
        let v = big.eval(&a).unwrap();
        let direct = big.c * vandermonde(&a)
            * determinant(
                big.rows.iter().flat_map(|r| a.iter().map(move |&t| fundamental_spline(t, r))).collect(),
                2,
            )
            / big.gap_product;
        assert!((v - direct).abs() <= 1e-10 * direct.abs(), "{v} vs {direct}");
        assert!(d.eval(&a).unwrap() > 0.0);
    }

    #[test]
    fn column_reduction_small_case() {
        // N = 3, K = 2, b = 1: F = [[1 - f, f], [1 - g, g]], det = g - f
        let x = spec(&[0.0, 1.0, 2.0]);
        let (lhs, rhs) = column_reduction_sides(&x, 2, &[1.0]).unwrap();
        // f = int_1^inf M(.;0,1) = 0, g = int_1^inf M(.;1,2) = 1, so det F = 1;
        // rhs = (1/2) (x_3 - x_1) M(1; 0,1,2) = 1
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((rhs - 1.0).abs() < 1e-15);
    }

    fn strict_spectrum(n: usize) -> impl Strategy<Value = Vec<f64>> {
        (prop::collection::vec(0.3f64..2.0, n - 1), -3.0f64..3.0).prop_map(|(gaps, start)| {
            let mut v = vec![start];
            for g in gaps {
                v.push(v[v.len() - 1] + g);
            }
            v
        })
    }

    fn case() -> impl Strategy<Value = (Vec<f64>, usize, Vec<f64>)> {
        (2usize..=8)
            .prop_flat_map(|n| (strict_spectrum(n), 1..n))
            .prop_flat_map(|(x, k)| {
                let (lo, hi) = (x[0], x[x.len() - 1]);
                (Just(x), Just(k), prop::collection::vec(lo..hi, k))
            })
            .prop_map(|(x, k, mut a)| {
                a.sort_by(f64::total_cmp);
                (x, k, a)
            })
    }

    proptest! {
        #[test]
        fn nonnegative((x, k, a) in case()) {
            let d = CornerDensity::new(spec(&x), k).unwrap();
            prop_assert!(d.eval(&a).unwrap() >= -1e-9);
        }

        #[test]
        fn symmetric_extension((x, k, a) in case(), seed in 0u64..1000) {
            let d = CornerDensity::new(spec(&x), k).unwrap();
            let mut shuffled = a.clone();
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            let v = d.eval(&a).unwrap();
            prop_assert!((d.eval_unordered(&shuffled) - v).abs() <= 1e-12 * v.abs().max(1.0));
        }

        #[test]
        fn affine_equivariance((x, k, a) in case(), lambda in 0.3f64..3.0, mu in -5.0f64..5.0) {
            let d = CornerDensity::new(spec(&x), k).unwrap();
            let moved = CornerDensity::new(spec(&x).affine(lambda, mu).unwrap(), k).unwrap();
            let am: Vec<f64> = a.iter().map(|t| lambda * t + mu).collect();
            let lhs = d.eval(&a).unwrap();
            let rhs = lambda.powi(k as i32) * moved.eval(&am).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
        }

        #[test]
        fn support((x, k, a) in case(), shift in 0.01f64..3.0) {
            let d = CornerDensity::new(spec(&x), k).unwrap();
            let mut out = a.clone();
            out[k - 1] = x[x.len() - 1] + shift;
            prop_assert_eq!(d.eval(&out).unwrap(), 0.0);
            let mut out = a.clone();
            out[0] = x[0] - shift;
            prop_assert_eq!(d.eval(&out).unwrap(), 0.0);
        }
    }
}
