use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ln_abs_vandermonde, vandermonde, Spectrum};
use crate::linalg::determinant;

use super::{ln_superfactorial, superfactorial, LOG_SPACE_THRESHOLD};

/// Pairwise distinct complex eigenvalues `z_1, ..., z_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("complex spectrum must not be empty".into()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("complex spectrum has non-finite entries".into()));
        }
        let mut min_gap = f64::INFINITY;
        for i in 0..values.len() {
            for j in 0..i {
                min_gap = min_gap.min((values[i] - values[j]).norm());
            }
        }
        if min_gap == 0.0 {
            return Err(Error::DegenerateSpectrum { min_gap });
        }
        Ok(ComplexSpectrum { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Divided differences `e^{t .}[z_1, ..., z_k]`, `k = 1..n`, of the
/// exponential `z -> e^{t z}`.
///
/// They form the first row of `exp(t J)`, `J` the upper bidiagonal matrix with
/// `z` on the diagonal and ones above it, which is computed by scaling and
/// squaring. Unlike the difference quotients this stays accurate for nearly
/// coincident `z`.
pub fn exp_divided_differences(t: f64, z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; n * n];
    for i in 0..n {
        a[i * n + i] = z[i] * t;
        if i + 1 < n {
            a[i * n + i + 1] = Complex64::new(t, 0.0);
        }
    }
    let norm = (0..n)
        .map(|i| (i..n).map(|j| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    for v in &mut a {
        *v *= scale;
    }

    // Taylor series of the upper triangular matrix
    let mut result = vec![zero; n * n];
    let mut term = vec![zero; n * n];
    for i in 0..n {
        result[i * n + i] = Complex64::new(1.0, 0.0);
        term[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..60 {
        term = upper_mul(&term, &a, n);
        let inv = 1.0 / k as f64;
        for v in &mut term {
            *v *= inv;
        }
        let mut biggest: f64 = 0.0;
        for (r, tv) in result.iter_mut().zip(&term) {
            *r += tv;
            biggest = biggest.max(tv.norm());
        }
        if biggest < 1e-18 * (1.0 + result.iter().map(|v| v.norm()).fold(0.0, f64::max))
            && k > n
        {
            break;
        }
    }
    for _ in 0..squarings {
        result = upper_mul(&result, &result, n);
    }
    result[..n].to_vec()
}

fn upper_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in i..n {
            let aik = a[i * n + k];
            for j in k..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// The HCIZ integral `int exp(Tr(Z H)) mu_X(dH)`:
///
/// `c_N det[e^{z_i x_j}] / (prod_{j>i} (z_j - z_i) prod_{j>i} (x_j - x_i))`,
/// `c_N = (N-1)! ... 0!`, where `z` are the eigenvalues of `Z`.
///
/// Row operations turn `det[e^{z_i x_j}] / V(z)` into the determinant of the
/// divided differences `e^{x_j .}[z_1..z_i]`, which is evaluated instead.
/// Both spectra are first centered, using
/// `hciz(X + c, z + w) = e^{N c w} hciz(X, z)` for centered `X` and `z`.
pub fn hciz(x: &Spectrum, z: &ComplexSpectrum) -> Result<Complex64> {
    let n = x.len();
    if z.len() != n {
        return Err(Error::Dimension(format!(
            "spectrum of length {n} paired with {} eigenvalues of Z",
            z.len()
        )));
    }
    x.require_strict()?;
    let cx = x.values().iter().sum::<f64>() / n as f64;
    let cz = z.values().iter().sum::<Complex64>() / n as f64;
    let xs: Vec<f64> = x.values().iter().map(|v| v - cx).collect();
    let zs: Vec<Complex64> = z.values().iter().map(|v| v - cz).collect();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for (j, &xj) in xs.iter().enumerate() {
        let dd = exp_divided_differences(xj, &zs);
        for (i, v) in dd.into_iter().enumerate() {
            g[i * n + j] = v;
        }
    }
    let det = determinant(g, n);
    let shift = cz * (n as f64 * cx);
    let value = if n > LOG_SPACE_THRESHOLD {
        det * (shift + (ln_superfactorial(n) - ln_abs_vandermonde(&xs))).exp()
    } else if shift == Complex64::new(0.0, 0.0) {
        det * (superfactorial(n) / vandermonde(&xs))
    } else {
        det * (superfactorial(n) / vandermonde(&xs)) * shift.exp()
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Range("exp(z x) overflows; rescale X or Z".into()));
    }
    Ok(value)
}
