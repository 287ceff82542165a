//! Spectral measures and finite spectra.
//!
//! [`SpectralMeasure`] represents a compactly supported probability measure
//! on the reals in one of three families: purely atomic, uniform density on
//! an interval, or the semicircle law. [`Spectrum`] is a finite
//! sorted-descending list of eigenvalues. Together they carry the limiting
//! measure and the finite-dimensional matrices whose spherical integrals
//! the rest of the crate evaluates.

use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Atoms closer than this (absolute) are merged during canonicalization.
const ATOM_MERGE_TOL: f64 = 1e-12;

/// Weights must sum to one within this tolerance.
const WEIGHT_SUM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// A finite list of real eigenvalues, sorted descending.
///
/// The rank is the number of exactly nonzero entries; padding zeros of a
/// small-rank matrix are stored explicitly so the dimension is always
/// `values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct Spectrum {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    values: Vec<f64>,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;
    fn try_from(repr: SpectrumRepr) -> Result<Self> {
        Spectrum::new(repr.values)
    }
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> Self {
        SpectrumRepr { values: s.values }
    }
}

impl Spectrum {
    /// Build a spectrum from eigenvalues in any order; they are sorted
    /// descending.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(bad));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
        Ok(Spectrum { values })
    }

    /// The rank-`1..=n` spectrum `diag(t, 0, …, 0)` in dimension `n`
    /// (`mult` copies of `t`, then zeros).
    pub fn rank_perturbation(t: f64, mult: usize, n: usize) -> Result<Self> {
        if mult == 0 || mult > n {
            return Err(Error::InvalidArgument(format!(
                "multiplicity {mult} must lie in 1..={n}"
            )));
        }
        let mut values = vec![t; mult];
        values.resize(n, 0.0);
        Spectrum::new(values)
    }

    /// Eigenvalues, sorted descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Number of exactly nonzero eigenvalues.
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Largest eigenvalue.
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// Smallest eigenvalue.
    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectra are nonempty")
    }

    /// Sum of the eigenvalues (the trace of the diagonal matrix).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Magnitude scale used for relative gap thresholds: `max(1, max|λ|)`.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// Smallest gap between consecutive sorted eigenvalues, relative to
    /// [`Spectrum::scale`]. Returns `+∞` for a single eigenvalue.
    pub fn min_rel_gap(&self) -> f64 {
        let s = self.scale();
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]).abs() / s)
            .fold(f64::INFINITY, f64::min)
    }

    /// Shift every eigenvalue by `x`.
    pub fn shifted(&self, x: f64) -> Spectrum {
        Spectrum {
            values: self.values.iter().map(|v| v + x).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// SpectralMeasure
// ---------------------------------------------------------------------------

/// A compactly supported probability measure on the reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub enum SpectralMeasure {
    /// Finitely many atoms with positive weights summing to one;
    /// `points` strictly increasing after canonicalization.
    Atomic { points: Vec<f64>, weights: Vec<f64> },
    /// Uniform density on `[a, b]` with `a < b`.
    Uniform { a: f64, b: f64 },
    /// Semicircle law `ρ(x) = 2√(r² − (x−c)²)/(πr²)` on `[c−r, c+r]`.
    Semicircle { center: f64, radius: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureRepr {
    Atomic { points: Vec<f64>, weights: Vec<f64> },
    Uniform { a: f64, b: f64 },
    Semicircle { center: f64, radius: f64 },
}

impl TryFrom<MeasureRepr> for SpectralMeasure {
    type Error = Error;
    fn try_from(repr: MeasureRepr) -> Result<Self> {
        match repr {
            MeasureRepr::Atomic { points, weights } => SpectralMeasure::atomic(points, weights),
            MeasureRepr::Uniform { a, b } => SpectralMeasure::uniform(a, b),
            MeasureRepr::Semicircle { center, radius } => {
                SpectralMeasure::semicircle(center, radius)
            }
        }
    }
}

impl From<SpectralMeasure> for MeasureRepr {
    fn from(m: SpectralMeasure) -> Self {
        match m {
            SpectralMeasure::Atomic { points, weights } => MeasureRepr::Atomic { points, weights },
            SpectralMeasure::Uniform { a, b } => MeasureRepr::Uniform { a, b },
            SpectralMeasure::Semicircle { center, radius } => {
                MeasureRepr::Semicircle { center, radius }
            }
        }
    }
}

impl SpectralMeasure {
    /// Atomic measure; atoms are sorted, near-duplicates (within 1e-12)
    /// merged by weight addition, and zero-weight atoms dropped.
    pub fn atomic(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some(&p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {p}")));
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        let mut pairs: Vec<(f64, f64)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite atoms compare"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            match merged.last_mut() {
                Some(last) if (p - last.0).abs() <= ATOM_MERGE_TOL => last.1 += w,
                _ => merged.push((p, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        if merged.is_empty() {
            return Err(Error::InvalidMeasure("all atoms have zero weight".into()));
        }
        Ok(SpectralMeasure::Atomic {
            points: merged.iter().map(|x| x.0).collect(),
            weights: merged.iter().map(|x| x.1).collect(),
        })
    }

    /// The Dirac mass at `p`.
    pub fn dirac(p: f64) -> Self {
        SpectralMeasure::atomic(vec![p], vec![1.0]).expect("a Dirac mass is always valid")
    }

    /// Uniform density on `[a, b]`, `a < b`, both finite.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::InvalidMeasure(format!(
                "uniform endpoints must satisfy a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(SpectralMeasure::Uniform { a, b })
    }

    /// Semicircle law with the given center and positive radius.
    pub fn semicircle(center: f64, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "semicircle needs finite center and positive radius, got \
                 center = {center}, radius = {radius}"
            )));
        }
        Ok(SpectralMeasure::Semicircle { center, radius })
    }

    /// Left support edge λ_min.
    pub fn support_min(&self) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, .. } => points[0],
            SpectralMeasure::Uniform { a, .. } => *a,
            SpectralMeasure::Semicircle { center, radius } => center - radius,
        }
    }

    /// Right support edge λ_max.
    pub fn support_max(&self) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, .. } => *points.last().expect("atoms nonempty"),
            SpectralMeasure::Uniform { b, .. } => *b,
            SpectralMeasure::Semicircle { center, radius } => center + radius,
        }
    }

    /// Atoms as `(points, weights)` when the measure is atomic.
    pub fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match self {
            SpectralMeasure::Atomic { points, weights } => Some((points, weights)),
            _ => None,
        }
    }

    /// Density at `x` for the continuous kinds; zero outside the support.
    /// Atomic measures have no density, reported as `None`.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            SpectralMeasure::Atomic { .. } => None,
            SpectralMeasure::Uniform { a, b } => {
                Some(if x >= *a && x <= *b { 1.0 / (b - a) } else { 0.0 })
            }
            SpectralMeasure::Semicircle { center, radius } => {
                let d2 = radius * radius - (x - center) * (x - center);
                Some(if d2 > 0.0 {
                    2.0 * d2.sqrt() / (PI * radius * radius)
                } else {
                    0.0
                })
            }
        }
    }

    /// `∫ g dμ` to absolute tolerance `tol`.
    ///
    /// Atomic measures sum exactly. The uniform part integrates `g` over
    /// `[a, b]`. The semicircle part substitutes `λ = c + r·sinθ`, turning
    /// the square-root density into the smooth weight `(2/π)cos²θ` so edge
    /// behavior costs nothing.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F, tol: f64) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(&p, &w)| w * g(p))
                .sum::<f64>(),
            SpectralMeasure::Uniform { a, b } => {
                let width = b - a;
                quad::integrate(|x| g(x) / width, *a, *b, tol, quad::DEFAULT_MAX_SEGMENTS).value
            }
            SpectralMeasure::Semicircle { center, radius } => {
                let (c, r) = (*center, *radius);
                quad::integrate(
                    |th: f64| 2.0 / PI * g(c + r * th.sin()) * th.cos().powi(2),
                    -PI / 2.0,
                    PI / 2.0,
                    tol,
                    quad::DEFAULT_MAX_SEGMENTS,
                )
                .value
            }
        }
    }

    /// `∫_{lo}^{hi} g dμ` (intersecting `[lo, hi]` with the support),
    /// used for grid-cell weights. Atomic: atoms in `[lo, hi)` count,
    /// plus atoms at `hi` when `closed_right`.
    pub fn integrate_window<F: Fn(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        closed_right: bool,
        g: F,
        tol: f64,
    ) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .filter(|(&p, _)| p >= lo && (p < hi || (closed_right && p == hi)))
                .map(|(&p, &w)| w * g(p))
                .sum::<f64>(),
            SpectralMeasure::Uniform { a, b } => {
                let (wlo, whi) = (lo.max(*a), hi.min(*b));
                if wlo >= whi {
                    return 0.0;
                }
                let width = b - a;
                quad::integrate(|x| g(x) / width, wlo, whi, tol, quad::DEFAULT_MAX_SEGMENTS).value
            }
            SpectralMeasure::Semicircle { center, radius } => {
                let (wlo, whi) = (lo.max(center - radius), hi.min(center + radius));
                if wlo >= whi {
                    return 0.0;
                }
                // Work in the trig coordinate so the edge square root stays
                // smooth even when the window touches the support edge.
                let (c, r) = (*center, *radius);
                let t0 = ((wlo - c) / r).clamp(-1.0, 1.0).asin();
                let t1 = ((whi - c) / r).clamp(-1.0, 1.0).asin();
                quad::integrate(
                    |th: f64| 2.0 / PI * g(c + r * th.sin()) * th.cos().powi(2),
                    t0,
                    t1,
                    tol,
                    quad::DEFAULT_MAX_SEGMENTS,
                )
                .value
            }
        }
    }

    /// The mean `∫ λ dμ(λ)`.
    pub fn mean(&self) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(&p, &w)| w * p)
                .sum::<f64>(),
            SpectralMeasure::Uniform { a, b } => 0.5 * (a + b),
            SpectralMeasure::Semicircle { center, .. } => *center,
        }
    }

    /// Cumulative distribution function `F(x) = μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            SpectralMeasure::Atomic { points, weights } => points
                .iter()
                .zip(weights)
                .take_while(|(&p, _)| p <= x)
                .map(|(_, &w)| w)
                .sum::<f64>(),
            SpectralMeasure::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            SpectralMeasure::Semicircle { center, radius } => {
                let u = ((x - center) / radius).clamp(-1.0, 1.0);
                0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
            }
        }
    }

    /// Generalized inverse CDF (quantile function) for `p ∈ (0, 1)`.
    ///
    /// Uniform quantiles are closed-form; semicircle quantiles are found by
    /// bisection to absolute tolerance 1e-12 in `x`; atomic quantiles jump
    /// to the first atom whose cumulative weight reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0, "quantiles need p in (0, 1)");
        match self {
            SpectralMeasure::Atomic { points, weights } => {
                let mut acc = 0.0;
                for (&pt, &w) in points.iter().zip(weights) {
                    acc += w;
                    if acc >= p - 1e-15 {
                        return pt;
                    }
                }
                *points.last().expect("atoms nonempty")
            }
            SpectralMeasure::Uniform { a, b } => a + (b - a) * p,
            SpectralMeasure::Semicircle { center, radius } => {
                let (mut lo, mut hi) = (center - radius, center + radius);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// A short human-readable descriptor used in report metadata.
    pub fn describe(&self) -> String {
        match self {
            SpectralMeasure::Atomic { points, .. } => format!("atomic({} atoms)", points.len()),
            SpectralMeasure::Uniform { a, b } => format!("uniform[{a}, {b}]"),
            SpectralMeasure::Semicircle { center, radius } => {
                format!("semicircle(center {center}, radius {radius})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The empirical measure `N⁻¹ Σ δ_{b_i}` of a spectrum (duplicate
/// eigenvalues merge their weights).
pub fn empirical_measure(s: &Spectrum) -> SpectralMeasure {
    let n = s.dim() as f64;
    SpectralMeasure::atomic(s.values().to_vec(), vec![1.0 / n; s.dim()])
        .expect("empirical weights always sum to one")
}

/// Check the spacing condition `b_{i+1} + c/N ≥ b_i` for all consecutive
/// pairs of the descending spectrum.
pub fn check_spacing(s: &Spectrum, c: f64) -> Result<bool> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::NonPositiveSpacing(c));
    }
    let n = s.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spacing check needs at least two eigenvalues".into(),
        ));
    }
    // Allow 1e-12·scale of representation rounding so that grids whose
    // gaps are exactly c/N in decimal (but not in binary) pass as intended.
    let slack = c / n as f64 + 1e-12 * s.scale();
    Ok(s.values().windows(2).all(|w| w[1] + slack >= w[0]))
}

/// Which end of the spectrum survives a trim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrimSide {
    /// Keep the `N+1−i` largest eigenvalues `b_1, …, b_{N+1−i}`.
    Upper,
    /// Keep the `N+1−i` smallest eigenvalues `b_i, …, b_N`.
    Lower,
}

/// Step-`i` trim of a spectrum: both sides return dimension `N + 1 − i`,
/// the lower side keeping the smallest values and the upper side the
/// largest. Step 1 is the identity.
pub fn trim_spectrum(s: &Spectrum, i: usize, side: TrimSide) -> Result<Spectrum> {
    let n = s.dim();
    if i == 0 || i > n {
        return Err(Error::TrimOutOfRange { step: i, dim: n });
    }
    let keep = n + 1 - i;
    let values = match side {
        TrimSide::Upper => s.values()[..keep].to_vec(),
        TrimSide::Lower => s.values()[n - keep..].to_vec(),
    };
    Spectrum::new(values)
}

/// Deterministic size-`n` realization of a measure.
///
/// Continuous kinds place eigenvalues at the quantiles `(i − ½)/n`, which
/// makes the empirical measures converge weakly (and in the
/// bounded-Lipschitz metric) with evenly controlled spacing. Atomic kinds
/// use largest-remainder proportional rounding of the weights. The result
/// is the same for every `seed`; the parameter is part of the signature so
/// call sites that later switch to randomized sampling stay stable.
pub fn sample_spectrum(m: &SpectralMeasure, n: usize, _seed: u64) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let values = match m {
        SpectralMeasure::Atomic { points, weights } => {
            // Largest-remainder apportionment of n slots to the atoms.
            let raw: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
            let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..points.len()).collect();
            // Ties broken by atom index: deterministic.
            order.sort_by(|&i, &j| {
                let ri = raw[i] - raw[i].floor();
                let rj = raw[j] - raw[j].floor();
                rj.partial_cmp(&ri)
                    .expect("finite remainders compare")
                    .then(i.cmp(&j))
            });
            for k in 0..(n - assigned) {
                counts[order[k % order.len()]] += 1;
            }
            let mut values = Vec::with_capacity(n);
            for (idx, &count) in counts.iter().enumerate() {
                values.extend(std::iter::repeat_n(points[idx], count));
            }
            values
        }
        _ => (1..=n)
            .map(|i| m.quantile((i as f64 - 0.5) / n as f64))
            .collect(),
    };
    Spectrum::new(values)
}
