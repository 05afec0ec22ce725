//! Random matrices on a unitary conjugation orbit: Haar unitaries, orbit
//! samples `U diag(X) U*`, corners, spectra and Gelfand-Tsetlin patterns,
//! and Monte Carlo estimates of the orbital Laplace transform.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GtPattern, Spectrum};
use crate::linalg::{hermitian_eigen, qr_householder, CMatrix};

/// Reproducible random source: a ChaCha stream selected by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` under the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut RandomStream) -> CMatrix {
    let mut g = CMatrix::zeros(n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = Complex64::new(s * rng.standard_normal(), s * rng.standard_normal());
        }
    }
    let (mut q, diag) = qr_householder(&g);
    for (k, r) in diag.iter().enumerate() {
        let phase = if r.norm() > 0.0 { r / r.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// `U diag(x) U*`, or just the leading `k x k` block of it.
fn conjugate_diagonal(u: &CMatrix, x: &[f64], k: usize) -> CMatrix {
    let mut h = CMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let s: Complex64 = x
                .iter()
                .enumerate()
                .map(|(l, &xl)| u[(i, l)] * xl * u[(j, l)].conj())
                .sum();
            if i == j {
                h[(i, i)] = Complex64::new(s.re, 0.0);
            } else {
                h[(i, j)] = s;
                h[(j, i)] = s.conj();
            }
        }
    }
    h
}

/// A draw from the orbital measure of `x`: `H = U diag(x) U*` with Haar `U`.
pub fn orbit_sample(x: &Spectrum, rng: &mut RandomStream) -> CMatrix {
    let n = x.len();
    let u = haar_unitary(n, rng);
    if x.values().iter().all(|&v| v == x.first()) {
        // central orbit
        return CMatrix::from_real_diagonal(x.values());
    }
    conjugate_diagonal(&u, x.values(), n)
}

/// The upper-left `k x k` corner.
pub fn corner(h: &CMatrix, k: usize) -> Result<CMatrix> {
    if k < 1 || k > h.size() {
        return Err(Error::Dimension(format!(
            "corner size {k} out of range 1..={}",
            h.size()
        )));
    }
    Ok(h.leading_block(k))
}

pub fn hermitian_spectrum(h: &CMatrix) -> Result<Spectrum> {
    let eig = hermitian_eigen(h, false)?;
    Spectrum::new(eig.values)
}

/// Spectra of the corners of sizes `N-1, ..., 1`.
///
/// Each row is clamped onto the interlacing box of the row above it (the top
/// row being the computed spectrum of `h`). Rayleigh interlacing holds exactly
/// in theory; the clamp only absorbs roundoff, which matters when `h` has
/// repeated eigenvalues.
pub fn gt_pattern_of(h: &CMatrix) -> Result<GtPattern> {
    let n = h.size();
    if n < 2 {
        return Err(Error::Dimension("patterns need N >= 2".into()));
    }
    let mut upper = hermitian_eigen(h, false)?.values;
    let mut rows = Vec::with_capacity(n - 1);
    for k in (1..n).rev() {
        let mut row = hermitian_eigen(&h.leading_block(k), false)?.values;
        for (i, v) in row.iter_mut().enumerate() {
            *v = v.clamp(upper[i], upper[i + 1]);
        }
        upper = row.clone();
        rows.push(row);
    }
    GtPattern::new(rows)
}

/// A Monte Carlo mean with its (jackknife) standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

/// Estimates `int exp(Tr(Z H)) mu_X(dH)` from `samples` orbit draws.
pub fn laplace_mc(
    x: &Spectrum,
    z: &CMatrix,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<McEstimate> {
    let n = x.len();
    if z.size() != n {
        return Err(Error::Dimension(format!(
            "Z is {}x{}, spectrum has length {n}",
            z.size(),
            z.size()
        )));
    }
    if samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let bound = z.frobenius_norm() * x.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    if bound > 700.0 {
        return Err(Error::Range(format!(
            "|Tr(ZH)| may reach {bound:.1}, exp overflows; rescale Z or X"
        )));
    }
    let values: Vec<Complex64> = (0..samples)
        .map(|_| {
            let h = if n == 1 {
                CMatrix::from_real_diagonal(x.values())
            } else {
                orbit_sample(x, rng)
            };
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    tr += z[(i, j)] * h[(j, i)];
                }
            }
            tr.exp()
        })
        .collect();
    Ok(jackknife_mean(&values))
}

fn jackknife_mean(values: &[Complex64]) -> McEstimate {
    let n = values.len();
    // shift by the first value so constant samples give an exact mean and zero error
    let origin = values[0];
    let shifted: Vec<Complex64> = values.iter().map(|v| v - origin).collect();
    let total: Complex64 = shifted.iter().sum();
    let mean = origin + total / n as f64;
    if n < 2 {
        return McEstimate {
            mean,
            std_error: 0.0,
            samples: n,
        };
    }
    let m = (n - 1) as f64;
    let loo: Vec<Complex64> = shifted.iter().map(|v| (total - v) / m).collect();
    let loo_mean: Complex64 = loo.iter().sum::<Complex64>() / n as f64;
    let var = loo.iter().map(|t| (t - loo_mean).norm_sqr()).sum::<f64>() * m / n as f64;
    McEstimate {
        mean,
        std_error: var.sqrt(),
        samples: n,
    }
}

/// Samples per random stream in the parallel samplers.
pub const CHUNK: usize = 1024;

fn chunked<T: Send, F>(samples: usize, seed: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(&mut RandomStream) -> Result<T> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let work = |c: usize| -> Result<Vec<T>> {
        let mut rng = RandomStream::with_stream(seed, c as u64);
        let len = CHUNK.min(samples - c * CHUNK);
        (0..len).map(|_| f(&mut rng)).collect()
    };
    let parts: Vec<Result<Vec<T>>> = if threads <= 1 {
        (0..chunks).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(work).collect())
    };
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Spectra of the `k x k` corners of `samples` independent orbit draws.
///
/// Chunk `c` of [`CHUNK`] samples always uses stream `c` of `seed`, so the
/// output does not depend on the thread count.
pub fn sample_corner_spectra(
    x: &Spectrum,
    k: usize,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    if k < 1 || k > n {
        return Err(Error::Dimension(format!("corner size {k} out of range 1..={n}")));
    }
    chunked(samples, seed, threads, |rng| {
        let u = haar_unitary(n, rng);
        let block = conjugate_diagonal(&u, x.values(), k);
        Ok(hermitian_eigen(&block, false)?.values)
    })
}

/// Full Gelfand-Tsetlin patterns of `samples` orbit draws.
pub fn sample_patterns(
    x: &Spectrum,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<GtPattern>> {
    chunked(samples, seed, threads, |rng| gt_pattern_of(&orbit_sample(x, rng)))
}
