//! Small dense linear algebra: LU determinants, complex square matrices,
//! Householder QR and a Hermitian eigensolver (Householder reduction to
//! tridiagonal form followed by implicit-shift QL).

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalars admitted by [`determinant`].
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Largest order accepted by [`determinant`].
pub const MAX_DET_ORDER: usize = 32;

/// Determinant of the row-major `n x n` matrix `a` by LU with partial pivoting.
pub fn determinant<T: Scalar>(mut a: Vec<T>, n: usize) -> T {
    assert_eq!(a.len(), n * n, "determinant: buffer is not n x n");
    assert!(n <= MAX_DET_ORDER, "determinant: order {n} exceeds {MAX_DET_ORDER}");
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].modulus().total_cmp(&a[j * n + col].modulus()))
            .unwrap();
        if a[pivot * n + col].modulus() == 0.0 {
            return T::zero();
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det = det * p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor.modulus() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - factor * v;
            }
        }
    }
    det
}

/// A dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows must form a square".into()));
        }
        Ok(CMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Upper-left `k x k` block.
    pub fn leading_block(&self, k: usize) -> CMatrix {
        let mut m = Self::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Householder vector `v` (with `v[0]` real positive scale folded in) and the
/// value `alpha` such that `(I - tau v v*) x = alpha e_1`, `tau = 2 / |v|^2`.
/// Returns `None` when `x` is already a multiple of `e_1`.
fn householder(x: &[Complex64]) -> (Option<(Vec<Complex64>, f64)>, Complex64) {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return (None, Complex64::new(0.0, 0.0));
    }
    if tail == 0.0 {
        return (None, x[0]);
    }
    let phase = if x[0].norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x[0] / x[0].norm()
    };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    (Some((v, 2.0 / vnorm2)), alpha)
}

/// QR factorization by Householder reflections: `a = q r`, with `r` upper
/// triangular. Returns `(q, diag(r))`.
pub fn qr_householder(a: &CMatrix) -> (CMatrix, Vec<Complex64>) {
    let n = a.size();
    let mut r = a.clone();
    let mut q = CMatrix::identity(n);
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let x: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        let (reflector, alpha) = householder(&x);
        diag[k] = alpha;
        let Some((v, tau)) = reflector else {
            continue;
        };
        // r <- (I - tau v v*) r on rows k..n
        for j in k..n {
            let s: Complex64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            let s = s * tau;
            for i in k..n {
                r[(i, j)] -= v[i - k] * s;
            }
        }
        // q <- q (I - tau v v*) on columns k..n
        for i in 0..n {
            let s: Complex64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            let s = s * tau;
            for j in k..n {
                q[(i, j)] -= s * v[j - k].conj();
            }
        }
    }
    (q, diag)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors, if requested.
    pub vectors: Option<CMatrix>,
}

/// Asymmetry tolerance (relative to the Frobenius norm) for Hermitian input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub fn hermitian_eigen(h: &CMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    let n = h.size();
    let scale = h.frobenius_norm().max(1.0);
    if h.hermitian_defect() > HERMITIAN_TOLERANCE * scale {
        return Err(Error::Argument(format!(
            "matrix is not Hermitian (asymmetry {:e})",
            h.hermitian_defect()
        )));
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: want_vectors.then(|| CMatrix::zeros(0)),
        });
    }
    let mut a = h.clone();
    // exact symmetrization of the input
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut q = want_vectors.then(|| CMatrix::identity(n));

    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let (reflector, _) = householder(&x);
        let Some((v, tau)) = reflector else {
            continue;
        };
        let off = k + 1;
        // p = tau A v, w = p - (tau v* p / 2) v, A <- A - v w* - w v*
        let p: Vec<Complex64> = (0..n)
            .map(|i| {
                tau * (off..n)
                    .map(|j| a[(i, j)] * v[j - off])
                    .sum::<Complex64>()
            })
            .collect();
        let vp: Complex64 = (off..n).map(|i| v[i - off].conj() * p[i]).sum();
        let mut w = p;
        for i in off..n {
            w[i] -= 0.5 * tau * vp * v[i - off];
        }
        for i in 0..n {
            for j in 0..n {
                let vi = if i >= off { v[i - off] } else { Complex64::new(0.0, 0.0) };
                let vj = if j >= off { v[j - off] } else { Complex64::new(0.0, 0.0) };
                a[(i, j)] -= vi * w[j].conj() + w[i] * vj.conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let s: Complex64 = (off..n).map(|j| q[(i, j)] * v[j - off]).sum();
                let s = s * tau;
                for j in off..n {
                    q[(i, j)] -= s * v[j - off].conj();
                }
            }
        }
    }

    // phase rotation making the subdiagonal real and nonnegative
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut sub = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n - 1 {
        let e = a[(k + 1, k)];
        let r = e.norm();
        sub[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * (e / r) } else { phases[k] };
    }

    let mut z = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tridiagonal_ql(&mut diag, &mut sub, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            // V = Q D Z
            let mut out = CMatrix::zeros(n);
            for i in 0..n {
                for (col, &src) in order.iter().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        s += q[(i, k)] * phases[k] * z[k * n + src];
                    }
                    out[(i, col)] = s;
                }
            }
            Some(out)
        }
        _ => None,
    };
    Ok(HermitianEigen { values, vectors })
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix with diagonal
/// `d` and subdiagonal `e` (`e[i]` couples `i` and `i+1`). Eigenvectors are
/// accumulated into the row-major `z` when supplied.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Range("tridiagonal QL failed to converge".into()));
            }
            // Wilkinson-type shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_determinants() {
        assert_eq!(determinant(vec![2.0], 1), 2.0);
        assert_eq!(determinant(Vec::<f64>::new(), 0), 1.0);
        assert!((determinant(vec![1.0, 2.0, 3.0, 4.0], 2) + 2.0).abs() < 1e-15);
        // needs pivoting
        assert!((determinant(vec![0.0, 1.0, 1.0, 0.0], 2) + 1.0).abs() < 1e-15);
        let a = vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        assert!((determinant(a, 3) - 4.0).abs() < 1e-14);
        assert_eq!(determinant(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn complex_determinant() {
        let a = vec![c(1.0, 1.0), c(0.0, 2.0), c(3.0, 0.0), c(1.0, -1.0)];
        let want = c(1.0, 1.0) * c(1.0, -1.0) - c(0.0, 2.0) * c(3.0, 0.0);
        assert!((determinant(a, 2) - want).norm() < 1e-14);
    }

    fn test_matrix() -> CMatrix {
        CMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5), c(0.3, 0.0)],
            vec![c(1.0, -1.0), c(-1.0, 0.0), c(0.7, 0.2), c(0.0, 1.0)],
            vec![c(0.0, 0.5), c(0.7, -0.2), c(0.5, 0.0), c(1.5, -0.4)],
            vec![c(0.3, 0.0), c(0.0, -1.0), c(1.5, 0.4), c(3.0, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn qr_reconstructs() {
        let a = test_matrix();
        let (q, diag) = qr_householder(&a);
        let qq = q.adjoint().matmul(&q);
        assert!(qq.sub(&CMatrix::identity(4)).frobenius_norm() < 1e-14);
        let r = q.adjoint().matmul(&a);
        for i in 0..4 {
            assert!((r[(i, i)] - diag[i]).norm() < 1e-13);
            for j in 0..i {
                assert!(r[(i, j)].norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eigen_backward_stable() {
        let h = test_matrix();
        let eig = hermitian_eigen(&h, true).unwrap();
        let v = eig.vectors.unwrap();
        let lambda = CMatrix::from_real_diagonal(&eig.values);
        let rebuilt = v.matmul(&lambda).matmul(&v.adjoint());
        assert!(rebuilt.sub(&h).frobenius_norm() <= 1e-12 * h.frobenius_norm());
        assert!(v.adjoint().matmul(&v).sub(&CMatrix::identity(4)).frobenius_norm() < 1e-13);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-13);
    }

    #[test]
    fn eigen_small_cases() {
        let pauli = CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let eig = hermitian_eigen(&pauli, false).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15 && (eig.values[1] - 1.0).abs() < 1e-15);
        let d = CMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(hermitian_eigen(&d, false).unwrap().values, vec![-1.0, 2.0, 3.0]);
        let one = CMatrix::from_real_diagonal(&[4.5]);
        assert_eq!(hermitian_eigen(&one, true).unwrap().values, vec![4.5]);
        let bad = CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(hermitian_eigen(&bad, false), Err(Error::Argument(_))));
    }
}
