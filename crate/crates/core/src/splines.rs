//! Fundamental splines `M(a; Y)`, B-splines, truncated powers and divided
//! differences, together with closed-form integrals of `M` over half-lines
//! and intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::min_gap;

/// Knot vectors whose relative minimal gap is below this are rejected.
pub const CONDITIONING_THRESHOLD: f64 = 1e-8;

/// `x_+^s`: `x^s` for `x > 0`, zero otherwise (so `0_+^0 = 0`).
pub fn truncated_power(x: f64, s: i32) -> Result<f64> {
    if s < 0 {
        return Err(Error::Argument(format!("truncated power exponent {s} is negative")));
    }
    Ok(tpow(x, s as u32))
}

#[inline]
fn tpow(x: f64, s: u32) -> f64 {
    if x > 0.0 {
        x.powi(s as i32)
    } else {
        0.0
    }
}

/// `f[y_1, ..., y_n]` by the triangular recursion
/// `f[y_1..y_n] = (f[y_2..y_n] - f[y_1..y_{n-1}]) / (y_n - y_1)`.
pub fn divided_difference<F: Fn(f64) -> f64>(f: F, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Argument("divided difference needs at least one point".into()));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument(
            "divided difference points must be strictly increasing (confluent case unsupported)".into(),
        ));
    }
    let mut table: Vec<f64> = points.iter().map(|&y| f(y)).collect();
    let n = points.len();
    for level in 1..n {
        for i in 0..n - level {
            table[i] = (table[i + 1] - table[i]) / (points[i + level] - points[i]);
        }
    }
    Ok(table[0])
}

/// Strictly increasing knots `y_1 < ... < y_n`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct KnotVector {
    knots: Vec<f64>,
    // 1 / prod_{r != i} (y_i - y_r)
    weights: Vec<f64>,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Dimension(format!(
                "a knot vector needs at least 2 knots, got {}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::Argument("knots must be finite".into()));
        }
        let gap = min_gap(&knots);
        if !(gap > 0.0) {
            return Err(Error::DegenerateSpectrum { min_gap: gap });
        }
        let ratio = gap / (knots[knots.len() - 1] - knots[0]);
        if ratio < CONDITIONING_THRESHOLD {
            return Err(Error::Conditioning {
                ratio,
                threshold: CONDITIONING_THRESHOLD,
            });
        }
        let weights = (0..knots.len())
            .map(|i| {
                let p: f64 = knots
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| r != i)
                    .map(|(_, &y)| knots[i] - y)
                    .product();
                1.0 / p
            })
            .collect();
        Ok(KnotVector { knots, weights })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Index `k` of the knot interval `[y_k, y_{k+1})` containing `a`, if any.
    fn interval_of(&self, a: f64) -> Option<usize> {
        let k = self.knots.partition_point(|&y| y <= a);
        (k >= 1 && k < self.knots.len()).then(|| k - 1)
    }

    /// Whether the interval with index `k` is better served by the left-hand sum.
    fn use_left_sum(&self, k: usize) -> bool {
        k < self.knots.len() - 1 - k
    }
}

impl TryFrom<Vec<f64>> for KnotVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        KnotVector::new(v)
    }
}

impl From<KnotVector> for Vec<f64> {
    fn from(k: KnotVector) -> Self {
        k.knots
    }
}

/// The fundamental spline
/// `M(a; Y) = (n-1) sum_{i: y_i > a} (y_i - a)^{n-2} / prod_{r != i} (y_i - y_r)`.
///
/// Vanishes for `a < y_1` and `a >= y_n`. Inside the support the sum is taken
/// over whichever side of `a` holds fewer knots; the two sides differ by the sign
/// only, since the full sum is a divided difference of a polynomial of degree
/// `n - 2` and therefore zero.
pub fn fundamental_spline(a: f64, y: &KnotVector) -> f64 {
    let n = y.len();
    let Some(k) = y.interval_of(a) else {
        return 0.0;
    };
    let deg = (n - 2) as i32;
    let sum: f64 = if y.use_left_sum(k) {
        -(0..=k)
            .map(|i| (y.knots[i] - a).powi(deg) * y.weights[i])
            .sum::<f64>()
    } else {
        (k + 1..n)
            .map(|i| (y.knots[i] - a).powi(deg) * y.weights[i])
            .sum::<f64>()
    };
    (n - 1) as f64 * sum
}

/// De Boor's normalization `B(a; Y) = M(a; Y) (y_n - y_1) / (n - 1)`.
pub fn b_spline(a: f64, y: &KnotVector) -> f64 {
    fundamental_spline(a, y) * (y.last() - y.first()) / (y.len() - 1) as f64
}

/// `g[Y]` for the truncated power `g(x) = (x - t)_+^s`, `s <= n - 1`, by the
/// triangular recursion.
///
/// When `t` lies in the left half of the knots the recursion runs on the
/// mirrored power `(t - x)_+^s` instead, using
/// `(x - t)_+^s = (x - t)^s - (-1)^s (t - x)_+^s`: the divided difference of the
/// polynomial `(x - t)^s` is 1 for `s = n - 1` and 0 for `s < n - 1`. This keeps
/// the tabulated values small and avoids the cancellation of the plain recursion.
pub fn truncated_power_divided_difference(t: f64, s: u32, y: &KnotVector) -> f64 {
    let n = y.len();
    assert!((s as usize) < n, "exponent {s} too large for {n} knots");
    let monic = if s as usize == n - 1 { 1.0 } else { 0.0 };
    if t <= y.first() {
        return monic;
    }
    if t >= y.last() {
        return 0.0;
    }
    let k = y.interval_of(t).expect("t lies strictly inside the support");
    if y.use_left_sum(k) {
        let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mirrored = divided_difference(|x| tpow(t - x, s), &y.knots)
            .expect("knots are strictly increasing");
        monic - sign * mirrored
    } else {
        divided_difference(|x| tpow(x - t, s), &y.knots).expect("knots are strictly increasing")
    }
}

/// `f_t[Y]` for `f_t(x) = (x - t)_+^{n-1}`, which equals `int_t^inf M(a; Y) da`.
pub fn tail_divided_difference(t: f64, y: &KnotVector) -> f64 {
    truncated_power_divided_difference(t, (y.len() - 1) as u32, y)
}

/// `(int_{-inf}^t M, int_t^inf M, left_is_direct)`. The mass on the side of `t`
/// holding fewer knots is evaluated directly from its own divided difference,
/// the other one as its complement, so small masses keep full relative accuracy.
fn tail_masses(t: f64, y: &KnotVector) -> (f64, f64, bool) {
    if t <= y.first() {
        return (0.0, 1.0, true);
    }
    if t >= y.last() {
        return (1.0, 0.0, false);
    }
    let n = y.len();
    let k = y.interval_of(t).expect("t lies strictly inside the support");
    if y.use_left_sum(k) {
        let s = (n - 1) as u32;
        let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
        let left = sign
            * divided_difference(|x| tpow(t - x, s), &y.knots).expect("knots are strictly increasing");
        (left, 1.0 - left, true)
    } else {
        let right = tail_divided_difference(t, y);
        (1.0 - right, right, false)
    }
}

/// `int_b^c M(a; Y) da`; either bound may be infinite.
pub fn spline_tail_integrals(b: f64, c: f64, y: &KnotVector) -> Result<f64> {
    if b.is_nan() || c.is_nan() {
        return Err(Error::Argument("integration bounds must not be NaN".into()));
    }
    if b > c {
        return Err(Error::Argument(format!("lower bound {b} exceeds upper bound {c}")));
    }
    let (left_b, right_b, direct_b) = tail_masses(b, y);
    let (left_c, right_c, direct_c) = tail_masses(c, y);
    Ok(match (b == f64::NEG_INFINITY, c == f64::INFINITY) {
        (true, true) => 1.0,
        (true, false) => left_c,
        (false, true) => right_b,
        (false, false) => {
            if direct_c {
                left_c - left_b
            } else if !direct_b {
                right_b - right_c
            } else {
                1.0 - left_b - right_c
            }
        }
    })
}

/// A piecewise polynomial, zero outside `[breakpoints[0], breakpoints[last]]`.
/// Piece `k` is stored in powers of `(a - breakpoints[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 || coefficients.len() + 1 != breakpoints.len() {
            return Err(Error::Dimension(format!(
                "{} breakpoints do not match {} pieces",
                breakpoints.len(),
                coefficients.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Argument("breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewisePolynomial {
            breakpoints,
            coefficients,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Evaluates with the same half-open convention as [`fundamental_spline`].
    pub fn eval(&self, a: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&y| y <= a);
        if k == 0 || k == self.breakpoints.len() {
            return 0.0;
        }
        let t = a - self.breakpoints[k - 1];
        self.coefficients[k - 1]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c)
    }

    /// Exact integral over the real line.
    pub fn integral(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(c, w)| {
                let h = w[1] - w[0];
                c.iter()
                    .enumerate()
                    .map(|(m, &cm)| cm * h.powi(m as i32 + 1) / (m + 1) as f64)
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Exact monomial coefficients of `M(.; Y)` on every knot interval.
pub fn to_piecewise(y: &KnotVector) -> PiecewisePolynomial {
    let n = y.len();
    let deg = n - 2;
    let binom = binomial_row(deg);
    let mut coefficients = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let left = y.knots[k];
        let (range, sign) = if y.use_left_sum(k) {
            (0..k + 1, -1.0)
        } else {
            (k + 1..n, 1.0)
        };
        let mut c = vec![0.0; deg + 1];
        for i in range {
            // (y_i - left - t)^deg = sum_m C(deg, m) (y_i - left)^(deg - m) (-t)^m
            let d = y.knots[i] - left;
            for (m, cm) in c.iter_mut().enumerate() {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                *cm += sign * s * binom[m] * d.powi((deg - m) as i32) * y.weights[i];
            }
        }
        for cm in &mut c {
            *cm *= (n - 1) as f64;
        }
        coefficients.push(c);
    }
    PiecewisePolynomial {
        breakpoints: y.knots.clone(),
        coefficients,
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for m in 1..n {
        row[m] = row[m - 1] * (n - m + 1) as f64 / m as f64;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use proptest::prelude::*;

    fn kv(v: &[f64]) -> KnotVector {
        KnotVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn truncated_power_examples() {
        assert_eq!(truncated_power(2.0, 3).unwrap(), 8.0);
        assert_eq!(truncated_power(-1.0, 2).unwrap(), 0.0);
        assert_eq!(truncated_power(0.0, 0).unwrap(), 0.0);
        assert_eq!(truncated_power(0.5, 0).unwrap(), 1.0);
        assert!(truncated_power(1.0, -1).is_err());
    }

    #[test]
    fn divided_difference_examples() {
        let sq = |x: f64| x * x;
        assert_eq!(divided_difference(sq, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(divided_difference(sq, &[0.0, 1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(divided_difference(sq, &[3.0]).unwrap(), 9.0);
        let cubic = |x: f64| 2.0 * x * x * x - x + 4.0;
        let dd = divided_difference(cubic, &[-1.0, 0.5, 1.0, 2.0, 3.5]).unwrap();
        assert!(dd.abs() < 1e-14);
        assert!(divided_difference(sq, &[]).is_err());
        assert!(divided_difference(sq, &[0.0, 0.0]).is_err());
        assert!(divided_difference(sq, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn spline_examples() {
        assert_eq!(fundamental_spline(0.5, &kv(&[0.0, 1.0])), 1.0);
        assert!((fundamental_spline(0.5, &kv(&[0.0, 1.0, 2.0])) - 0.5).abs() < 1e-15);
        assert!((fundamental_spline(1.0, &kv(&[0.0, 1.0, 2.0])) - 1.0).abs() < 1e-15);
        assert_eq!(fundamental_spline(3.0, &kv(&[0.0, 1.0, 2.0])), 0.0);
        // closed support on the left for n = 2, as written with y_i > a
        assert_eq!(fundamental_spline(0.0, &kv(&[0.0, 2.0])), 0.5);
        assert_eq!(fundamental_spline(2.0, &kv(&[0.0, 2.0])), 0.0);
        assert_eq!(fundamental_spline(0.0, &kv(&[0.0, 1.0, 2.0])), 0.0);
    }

    #[test]
    fn b_spline_examples() {
        // (y_n - y_1) / (n - 1) = 1 here, so B coincides with M = 1
        assert_eq!(b_spline(0.5, &kv(&[0.0, 1.0])), 1.0);
        assert_eq!(b_spline(0.5, &kv(&[0.0, 2.0])), 1.0);
        assert!((b_spline(1.0, &kv(&[0.0, 1.0, 2.0])) - 1.0).abs() < 1e-15);
        assert_eq!(b_spline(-1.0, &kv(&[0.0, 1.0, 2.0])), 0.0);
    }

    #[test]
    fn tail_integral_examples() {
        let y = kv(&[0.0, 1.0, 2.0]);
        let inf = f64::INFINITY;
        assert_eq!(spline_tail_integrals(-inf, inf, &y).unwrap(), 1.0);
        assert!((spline_tail_integrals(0.0, 1.0, &y).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(spline_tail_integrals(2.0, inf, &y).unwrap(), 0.0);
        assert!((spline_tail_integrals(-inf, 0.5, &y).unwrap() - 0.125).abs() < 1e-15);
        assert!(spline_tail_integrals(1.0, 0.0, &y).is_err());
    }

    #[test]
    fn knot_vector_errors() {
        assert!(matches!(KnotVector::new(vec![1.0]), Err(Error::Dimension(_))));
        assert!(matches!(
            KnotVector::new(vec![0.0, 0.0, 1.0]),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            KnotVector::new(vec![0.0, 1e-10, 1.0]),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn piecewise_examples() {
        let p = to_piecewise(&kv(&[0.0, 1.0]));
        assert_eq!(p.pieces(), &[vec![1.0]]);
        assert_eq!(p.eval(-0.1), 0.0);
        assert_eq!(p.eval(1.0), 0.0);
        let p = to_piecewise(&kv(&[0.0, 1.0, 2.0]));
        // a on [0,1], 2 - a = 1 - (a - 1) on [1,2]
        let want = [[0.0, 1.0], [1.0, -1.0]];
        for (piece, w) in p.pieces().iter().zip(want) {
            for (c, wc) in piece.iter().zip(w) {
                assert!((c - wc).abs() < 1e-15, "{piece:?}");
            }
        }
        assert!((p.integral() - 1.0).abs() < 1e-15);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn smoothness_class() {
        // derivative of order n-3 is continuous across interior knots
        let y = kv(&[0.0, 0.7, 1.5, 2.1, 3.0, 4.2]);
        let p = to_piecewise(&y);
        let n = y.len();
        let order = n - 3;
        let deriv_at = |piece: &[f64], t: f64| -> f64 {
            (order..piece.len())
                .map(|m| {
                    let falling: f64 = ((m - order + 1)..=m).map(|v| v as f64).product();
                    piece[m] * falling * t.powi((m - order) as i32)
                })
                .sum()
        };
        for k in 1..n - 1 {
            let h = y.knots()[k] - y.knots()[k - 1];
            let left = deriv_at(&p.pieces()[k - 1], h);
            let right = deriv_at(&p.pieces()[k], 0.0);
            assert!((left - right).abs() <= 1e-9 * left.abs().max(1.0), "knot {k}: {left} vs {right}");
        }
        // and a finite-difference check on M itself
        let fd = |a: f64, h: f64| -> f64 {
            // central (order)-th difference
            let mut s = 0.0;
            for j in 0..=order {
                let c = binomial_row(order)[j] * if j % 2 == 0 { 1.0 } else { -1.0 };
                s += c * fundamental_spline(a + (order as f64 / 2.0 - j as f64) * h, &y);
            }
            s / h.powi(order as i32)
        };
        for &knot in &y.knots()[1..n - 1] {
            let h = 1e-3;
            let below = fd(knot - 4.0 * h, h);
            let above = fd(knot + 4.0 * h, h);
            let jump = (above - below).abs();
            assert!(jump < 1e-1 * below.abs().max(1.0), "jump {jump} at {knot}");
        }
    }

    fn knot_strategy() -> impl Strategy<Value = Vec<f64>> {
        (2usize..=12, -5.0f64..5.0)
            .prop_flat_map(|(n, start)| {
                prop::collection::vec(0.05f64..2.0, n - 1).prop_map(move |gaps| {
                    let mut v = vec![start];
                    for g in gaps {
                        v.push(v[v.len() - 1] + g);
                    }
                    v
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn normalization_by_cellwise_quadrature(knots in knot_strategy()) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let rule = GaussLegendre::for_degree(y.len() - 2);
            let total: f64 = knots
                .windows(2)
                .map(|w| rule.integrate(w[0], w[1], |a| fundamental_spline(a, &y)))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "total {}", total);
            prop_assert!((to_piecewise(&y).integral() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn support_and_sign(knots in knot_strategy(), t in 0.0f64..1.0) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let (lo, hi) = (y.first(), y.last());
            let a = lo + t * (hi - lo);
            prop_assert!(fundamental_spline(a, &y) >= 0.0);
            prop_assert_eq!(fundamental_spline(lo - 1e-3 - t, &y), 0.0);
            prop_assert_eq!(fundamental_spline(hi + t, &y), 0.0);
        }

        #[test]
        fn divided_difference_form_agrees(knots in knot_strategy(), t in 0.0f64..1.0) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let n = y.len();
            let a = y.first() + t * (y.last() - y.first());
            prop_assume!(!knots.contains(&a));
            let via_dd = (n - 1) as f64 * truncated_power_divided_difference(a, (n - 2) as u32, &y);
            let m = fundamental_spline(a, &y);
            let peak = 2.0 * (n - 1) as f64 / (y.last() - y.first());
            prop_assert!((via_dd - m).abs() <= 1e-10 * m.abs().max(peak), "{} vs {}", via_dd, m);
        }

        #[test]
        fn leading_coefficient_identity(knots in knot_strategy()) {
            let n = knots.len();
            let mid = 0.5 * (knots[0] + knots[n - 1]);
            let dd = divided_difference(|x| (x - mid).powi((n - 1) as i32), &knots).unwrap();
            prop_assert!((dd - 1.0).abs() < 1e-9, "{}", dd);
        }

        #[test]
        fn affine_covariance(knots in knot_strategy(), t in 0.0f64..1.0, lambda in 0.2f64..5.0, mu in -3.0f64..3.0) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let moved = KnotVector::new(knots.iter().map(|k| lambda * k + mu).collect()).unwrap();
            let a = y.first() + t * (y.last() - y.first());
            let lhs = fundamental_spline(lambda * a + mu, &moved);
            let rhs = fundamental_spline(a, &y) / lambda;
            let peak = 2.0 * (y.len() - 1) as f64 / (y.last() - y.first()) / lambda;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * peak, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn piecewise_matches_pointwise(knots in knot_strategy(), t in 0.0f64..1.0) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let p = to_piecewise(&y);
            let a = y.first() + t * (y.last() - y.first());
            let m = fundamental_spline(a, &y);
            let peak = 2.0 * (y.len() - 1) as f64 / (y.last() - y.first());
            prop_assert!((p.eval(a) - m).abs() <= 1e-12 * m.abs().max(peak), "{} vs {}", p.eval(a), m);
        }

        #[test]
        fn tail_integrals_match_quadrature(knots in knot_strategy(), s in 0.0f64..1.0, u in 0.0f64..1.0) {
            let y = KnotVector::new(knots.clone()).unwrap();
            let (lo, hi) = (y.first(), y.last());
            let (mut b, mut c) = (lo + s * (hi - lo), lo + u * (hi - lo));
            if b > c { std::mem::swap(&mut b, &mut c); }
            let rule = GaussLegendre::for_degree(y.len() - 2);
            let cuts = crate::quadrature::cut_points(b, c, knots.iter().copied());
            let quad: f64 = cuts.windows(2).map(|w| rule.integrate(w[0], w[1], |a| fundamental_spline(a, &y))).sum();
            let closed = spline_tail_integrals(b, c, &y).unwrap();
            prop_assert!((quad - closed).abs() < 1e-10, "{} vs {}", quad, closed);
            let left = spline_tail_integrals(f64::NEG_INFINITY, c, &y).unwrap();
            let right = spline_tail_integrals(c, f64::INFINITY, &y).unwrap();
            prop_assert!((left + right - 1.0).abs() < 1e-12);
        }
    }
}
