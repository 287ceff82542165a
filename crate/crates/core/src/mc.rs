//! Monte Carlo estimation of the spherical integral.
//!
//! [`haar_sample`] draws Haar-distributed matrices from `O(N)` (β = 1),
//! `U(N)` (β = 2), or the compact symplectic group `Sp(N/2)` realized as
//! `N × N` complex matrices (β = 4, `N` even), via Gram–Schmidt on a
//! Gaussian matrix with the positive-diagonal convention that makes the
//! factorization unique (and hence the sample exactly Haar).
//!
//! [`hciz_mc_estimate`] averages `e^{N Tr(U A U* B)}` over a fixed number
//! of samples split into RNG-stream-indexed chunks. Results are
//! bit-reproducible for a given `(seed, samples, chunks)` triple no matter
//! how many worker threads run the chunks, because each chunk derives its
//! own counter-based RNG stream and the per-chunk partial sums are merged
//! in chunk order.

use crate::error::{Error, Result};
use crate::measures::Spectrum;
use crate::transforms::BetaClass;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;

/// A Haar-distributed sample from one of the three compact groups.
#[derive(Debug, Clone)]
pub enum HaarMatrix {
    /// Orthogonal `O(N)`, β = 1.
    Real(DMatrix<f64>),
    /// Unitary `U(N)`, β = 2.
    Complex(DMatrix<C64>),
    /// Compact symplectic `Sp(N/2) ⊂ U(N)`, β = 4 (`N` even).
    Symplectic(DMatrix<C64>),
}

impl HaarMatrix {
    pub fn dim(&self) -> usize {
        match self {
            HaarMatrix::Real(m) => m.nrows(),
            HaarMatrix::Complex(m) | HaarMatrix::Symplectic(m) => m.nrows(),
        }
    }

    pub fn beta(&self) -> BetaClass {
        match self {
            HaarMatrix::Real(_) => BetaClass::Orthogonal,
            HaarMatrix::Complex(_) => BetaClass::Unitary,
            HaarMatrix::Symplectic(_) => BetaClass::Symplectic,
        }
    }

    /// `|U_ij|²`.
    pub fn abs2(&self, i: usize, j: usize) -> f64 {
        match self {
            HaarMatrix::Real(m) => m[(i, j)] * m[(i, j)],
            HaarMatrix::Complex(m) | HaarMatrix::Symplectic(m) => m[(i, j)].norm_sqr(),
        }
    }

    /// `max_ij |(U*U − I)_ij|` — how far the sample is from the group.
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            HaarMatrix::Real(m) => {
                let p = m.transpose() * m;
                max_defect_real(&p)
            }
            HaarMatrix::Complex(m) | HaarMatrix::Symplectic(m) => {
                let p = m.adjoint() * m;
                max_defect_complex(&p)
            }
        }
    }

    /// `max_ij |(U J Uᵀ − J)_ij|` with `J` the standard symplectic form
    /// (block-diagonal `[[0, 1], [−1, 0]]`); `None` for β ∈ {1, 2}.
    pub fn symplectic_defect(&self) -> Option<f64> {
        let HaarMatrix::Symplectic(m) = self else {
            return None;
        };
        let n = m.nrows();
        let mut j_form = DMatrix::<C64>::zeros(n, n);
        for b in 0..n / 2 {
            j_form[(2 * b, 2 * b + 1)] = C64::new(1.0, 0.0);
            j_form[(2 * b + 1, 2 * b)] = C64::new(-1.0, 0.0);
        }
        let prod = m * &j_form * m.transpose() - &j_form;
        Some(prod.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

fn max_defect_real(p: &DMatrix<f64>) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).abs());
        }
    }
    worst
}

fn max_defect_complex(p: &DMatrix<C64>) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Real modified Gram–Schmidt with one reorthogonalization pass and
/// positive diagonal (division by the positive column norm).
fn orthonormalize_real(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for k in 0..n {
        for _pass in 0..2 {
            for j in 0..k {
                let proj = m.column(j).dot(&m.column(k));
                let col_j = m.column(j).clone_owned();
                m.column_mut(k).axpy(-proj, &col_j, 1.0);
            }
        }
        let norm = m.column(k).norm();
        m.column_mut(k).unscale_mut(norm);
    }
}

fn orthonormalize_complex(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for k in 0..n {
        for _pass in 0..2 {
            for j in 0..k {
                let proj = m.column(j).dotc(&m.column(k));
                let col_j = m.column(j).clone_owned();
                m.column_mut(k).axpy(-proj, &col_j, C64::new(1.0, 0.0));
            }
        }
        let norm = m.column(k).norm();
        m.column_mut(k).unscale_mut(norm);
    }
}

/// Draw a Haar sample from the β-indexed compact group in dimension `n`.
///
/// β = 4 requires even `n`; the sample is returned in its `n × n` complex
/// realization, built from quaternionic 2 × 2 blocks
/// `[[z, w], [−w̄, z̄]]`. Orthonormalization works on even-indexed columns
/// only; each odd column is the exact quaternionic partner of its
/// predecessor, which keeps the symplectic structure to rounding error.
pub fn haar_sample<R: Rng + ?Sized>(beta: BetaClass, n: usize, rng: &mut R) -> Result<HaarMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    match beta {
        BetaClass::Orthogonal => {
            let mut m = DMatrix::<f64>::from_fn(n, n, |_, _| gaussian(rng));
            orthonormalize_real(&mut m);
            Ok(HaarMatrix::Real(m))
        }
        BetaClass::Unitary => {
            let mut m =
                DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(gaussian(rng), gaussian(rng)));
            orthonormalize_complex(&mut m);
            Ok(HaarMatrix::Complex(m))
        }
        BetaClass::Symplectic => {
            if !n.is_multiple_of(2) {
                return Err(Error::OddSymplecticDimension(n));
            }
            let half = n / 2;
            let mut m = DMatrix::<C64>::zeros(n, n);
            for bk in 0..half {
                for bm in 0..half {
                    let z = C64::new(gaussian(rng), gaussian(rng));
                    let w = C64::new(gaussian(rng), gaussian(rng));
                    m[(2 * bm, 2 * bk)] = z;
                    m[(2 * bm, 2 * bk + 1)] = w;
                    m[(2 * bm + 1, 2 * bk)] = -w.conj();
                    m[(2 * bm + 1, 2 * bk + 1)] = z.conj();
                }
            }
            for bk in 0..half {
                let k = 2 * bk;
                for _pass in 0..2 {
                    for j in 0..k {
                        let proj = m.column(j).dotc(&m.column(k));
                        let col_j = m.column(j).clone_owned();
                        m.column_mut(k).axpy(-proj, &col_j, C64::new(1.0, 0.0));
                    }
                }
                let norm = m.column(k).norm();
                m.column_mut(k).unscale_mut(norm);
                // Partner column: per block (α, β) ↦ (−β̄, ᾱ). It is exactly
                // orthonormal to every previously fixed column.
                for bm in 0..half {
                    let alpha = m[(2 * bm, k)];
                    let beta_e = m[(2 * bm + 1, k)];
                    m[(2 * bm, k + 1)] = -beta_e.conj();
                    m[(2 * bm + 1, k + 1)] = alpha.conj();
                }
            }
            Ok(HaarMatrix::Symplectic(m))
        }
    }
}

/// `Tr(U A U* B)` for diagonal `A`, `B` given by spectra:
/// `Σ_{i,j} b_i |U_ij|² a_j`. Zero entries of `A` are skipped, so rank-one
/// perturbations cost `O(N)` per sample.
pub fn trace_form(u: &HaarMatrix, a: &Spectrum, b: &Spectrum) -> Result<f64> {
    let n = u.dim();
    if a.dim() != n || b.dim() != n {
        return Err(Error::DimensionMismatch {
            left: a.dim().max(b.dim()),
            right: n,
        });
    }
    let mut total = 0.0;
    for (j, &aj) in a.values().iter().enumerate() {
        if aj == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for (i, &bi) in b.values().iter().enumerate() {
            if bi != 0.0 {
                col += bi * u.abs2(i, j);
            }
        }
        total += aj * col;
    }
    Ok(total)
}

/// Sampling plan for [`hciz_mc_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub beta: BetaClass,
    pub samples: u64,
    pub seed: u64,
    pub chunks: u32,
}

impl McParams {
    pub fn new(beta: BetaClass, samples: u64, seed: u64, chunks: u32) -> Result<Self> {
        if samples < 2 {
            return Err(Error::TooFewSamples(samples as usize));
        }
        if chunks == 0 || chunks as u64 > samples {
            return Err(Error::InvalidArgument(format!(
                "chunks must satisfy 1 ≤ chunks ≤ samples, got {chunks} for {samples} samples"
            )));
        }
        Ok(Self {
            beta,
            samples,
            seed,
            chunks,
        })
    }
}

/// Monte Carlo estimate of `log I_N^(β)(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// `ln( mean of e^{N Tr(U A U* B)} )`.
    pub log_mean: f64,
    /// Delta-method standard error of `log_mean`.
    pub stderr: f64,
    pub samples: u64,
}

struct ChunkSums {
    max: f64,
    s1: f64,
    s2: f64,
}

/// Average `e^{N Tr(U A U* B)}` over Haar samples.
///
/// Samples are split across `params.chunks` RNG streams (ChaCha12 with
/// stream index = chunk index); chunks may run on any number of threads
/// and the result is bitwise identical. Accumulation is in shifted
/// exponential space, so exponents of order `N·‖a‖·‖b‖` never overflow.
/// A zero perturbation (`A = 0`) short-circuits to `log_mean = 0` with
/// zero standard error.
pub fn hciz_mc_estimate(a: &Spectrum, b: &Spectrum, params: &McParams) -> Result<McEstimate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim();
    if params.beta == BetaClass::Symplectic && !n.is_multiple_of(2) {
        return Err(Error::OddSymplecticDimension(n));
    }
    McParams::new(params.beta, params.samples, params.seed, params.chunks)?;
    if a.rank() == 0 {
        return Ok(McEstimate {
            log_mean: 0.0,
            stderr: 0.0,
            samples: params.samples,
        });
    }
    let nf = n as f64;
    let base = params.samples / params.chunks as u64;
    let rem = params.samples % params.chunks as u64;
    let parts: Vec<ChunkSums> = (0..params.chunks)
        .into_par_iter()
        .map(|c| {
            let count = base + u64::from((c as u64) < rem);
            let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
            rng.set_stream(c as u64);
            let mut max = f64::NEG_INFINITY;
            let mut s1 = 0.0f64;
            let mut s2 = 0.0f64;
            for _ in 0..count {
                let u = haar_sample(params.beta, n, &mut rng).expect("dimensions validated");
                let y = nf * trace_form(&u, a, b).expect("dimensions validated");
                if y > max {
                    let shift = (max - y).exp();
                    s1 *= shift;
                    s2 *= shift * shift;
                    max = y;
                }
                let e = (y - max).exp();
                s1 += e;
                s2 += e * e;
            }
            ChunkSums { max, s1, s2 }
        })
        .collect();

    let global_max = parts.iter().map(|p| p.max).fold(f64::NEG_INFINITY, f64::max);
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    for p in &parts {
        let shift = (p.max - global_max).exp();
        s1 += p.s1 * shift;
        s2 += p.s2 * shift * shift;
    }
    let total = params.samples as f64;
    let log_mean = global_max + s1.ln() - total.ln();
    // Delta method: Var(ln X̄) ≈ Var(X̄)/X̄², with the sample variance
    // written through D = ln(ΣY²) − ln(n·Ȳ²) to stay in log space.
    let d = (2.0 * global_max + s2.ln()) - total.ln() - 2.0 * log_mean;
    let stderr = (d.exp_m1().max(0.0) / (total - 1.0)).sqrt();
    Ok(McEstimate {
        log_mean,
        stderr,
        samples: params.samples,
    })
}
