//! Shared helpers for the integration suites.
// Each test binary compiles its own copy and uses only a subset.
#![allow(dead_code)]

use hciz::Spectrum;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random spectrum with entries in `[lo, hi]` and pairwise relative gaps
/// above `1e-3` (safe for the plain determinant path).
pub fn random_distinct_spectrum(r: &mut ChaCha12Rng, n: usize, lo: f64, hi: f64) -> Spectrum {
    loop {
        let vals: Vec<f64> = (0..n).map(|_| r.random_range(lo..hi)).collect();
        let s = Spectrum::new(vals).expect("finite values");
        if n < 2 || s.min_rel_gap() > 1e-3 {
            return s;
        }
    }
}

/// Random rank-`m` nonnegative spectrum of dimension `n`: `m` strictly
/// positive well-separated values padded with zeros.
pub fn random_low_rank_nonneg(r: &mut ChaCha12Rng, n: usize, m: usize) -> Spectrum {
    loop {
        let mut vals: Vec<f64> = (0..m).map(|_| r.random_range(0.05..1.0)).collect();
        vals.resize(n, 0.0);
        let s = Spectrum::new(vals).expect("finite values");
        let positive: Vec<f64> = s.values()[..m].to_vec();
        let sep = positive
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        if m < 2 || sep > 1e-3 {
            return s;
        }
    }
}
