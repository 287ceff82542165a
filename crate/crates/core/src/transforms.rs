//! Free-probability transforms of a spectral measure.
//!
//! * [`hilbert_transform`]: `H(z) = ∫ (z − λ)⁻¹ dμ(λ)` for `z` off the
//!   support, strictly decreasing on each side.
//! * [`hilbert_edges`]: the monotone limits `H_min = lim_{z↑λ_min} H(z)`
//!   and `H_max = lim_{z↓λ_max} H(z)`, possibly infinite.
//! * [`r_transform`]: Voiculescu's R-transform, defined by the inversion
//!   `H(1/t + R(t)) = t` on the band `(H_min, H_max)`.
//! * [`v_branch`]: the three-case branch function — `R(2t/β)` in band,
//!   `λ_max − β/(2t)` above, `λ_min − β/(2t)` below — the phase boundary
//!   of the spherical-integral limit.
//! * [`f_beta`] / [`f_beta_integral_form`]: the limit function `f^(β)` in
//!   its closed `v`-form and as the integral of the R-transform (the two
//!   agree in band, which tests integrate-vs-differentiate consistency).

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::quad;
use serde::{Deserialize, Serialize};

/// Symmetry class of the matrix group: β = 1 (orthogonal), 2 (unitary),
/// 4 (compact symplectic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BetaClass {
    /// β = 1, Haar measure on O(N).
    Orthogonal,
    /// β = 2, Haar measure on U(N).
    Unitary,
    /// β = 4, Haar measure on Sp(N/2) in its 2×2-block complex form.
    Symplectic,
}

impl BetaClass {
    /// Parse from the numeric β value.
    pub fn from_beta(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(BetaClass::Orthogonal),
            2 => Ok(BetaClass::Unitary),
            4 => Ok(BetaClass::Symplectic),
            other => Err(Error::InvalidBeta(other)),
        }
    }

    /// The numeric β ∈ {1, 2, 4}.
    pub fn beta(self) -> u8 {
        match self {
            BetaClass::Orthogonal => 1,
            BetaClass::Unitary => 2,
            BetaClass::Symplectic => 4,
        }
    }

    /// β as a float.
    pub fn beta_f64(self) -> f64 {
        f64::from(self.beta())
    }

    /// Conventional group symbol.
    pub fn group_name(self) -> &'static str {
        match self {
            BetaClass::Orthogonal => "O(N)",
            BetaClass::Unitary => "U(N)",
            BetaClass::Symplectic => "Sp(N/2)",
        }
    }
}

impl TryFrom<u8> for BetaClass {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        BetaClass::from_beta(b)
    }
}

impl From<BetaClass> for u8 {
    fn from(b: BetaClass) -> u8 {
        b.beta()
    }
}

impl std::fmt::Display for BetaClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.beta())
    }
}

/// Edge limits of the Hilbert transform; infinite entries flag divergence
/// (an atom at the edge, or density bounded below near it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HilbertEdges {
    /// `lim_{z↑λ_min} H(z)` (≤ 0, possibly −∞).
    pub h_min: f64,
    /// `lim_{z↓λ_max} H(z)` (≥ 0, possibly +∞).
    pub h_max: f64,
}

/// Which case of the branch function produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// In-band: `v = R(2t/β)`.
    R,
    /// Saturated above: `v = λ_max − β/(2t)`.
    Upper,
    /// Saturated below: `v = λ_min − β/(2t)`.
    Lower,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::R => write!(f, "R"),
            Branch::Upper => write!(f, "upper"),
            Branch::Lower => write!(f, "lower"),
        }
    }
}

/// Absolute tolerance for Hilbert-transform quadrature.
const H_TOL: f64 = 1e-11;

/// Looser tolerance for the near-edge probes of `hilbert_edges`, where the
/// integrand is nearly singular and full accuracy is not needed.
const PROBE_TOL: f64 = 1e-9;

/// Magnitude above which an edge probe is declared divergent outright.
const DIVERGENCE_MAGNITUDE: f64 = 1e8;

/// Scale used to make probe distances and brackets relative.
fn support_scale(m: &SpectralMeasure) -> f64 {
    let (lo, hi) = (m.support_min(), m.support_max());
    1.0_f64.max(lo.abs()).max(hi.abs()).max(hi - lo)
}

/// `H(z)` without the support check (caller guarantees `z` off-support).
fn hilbert_at(m: &SpectralMeasure, z: f64) -> f64 {
    match m.atoms() {
        Some((points, weights)) => points
            .iter()
            .zip(weights)
            .map(|(&p, &w)| w / (z - p))
            .sum::<f64>(),
        None => m.integrate(|lambda| 1.0 / (z - lambda), H_TOL),
    }
}

/// The Hilbert transform `H(z) = ∫ (z − λ)⁻¹ dμ(λ)`.
///
/// `z` must lie strictly outside the support hull `[λ_min, λ_max]`;
/// principal values are not supported.
pub fn hilbert_transform(m: &SpectralMeasure, z: f64) -> Result<f64> {
    let (lo, hi) = (m.support_min(), m.support_max());
    if !z.is_finite() || (z >= lo && z <= hi) {
        return Err(Error::InsideSupport {
            z,
            support_min: lo,
            support_max: hi,
        });
    }
    Ok(hilbert_at(m, z))
}

/// Classify one edge from three probes at geometrically shrinking
/// distances. `values[k]` is `H` at distance `scale·10^{-6-2k}`; the
/// magnitudes increase toward the edge. Returns the finite extrapolated
/// limit, or `±∞`.
fn classify_edge(values: [f64; 3], toward: f64) -> f64 {
    let [h1, h2, h3] = values;
    if h3.abs() > DIVERGENCE_MAGNITUDE || !h3.is_finite() {
        return toward;
    }
    let d1 = h2 - h1;
    let d2 = h3 - h2;
    if d1 == 0.0 && d2 == 0.0 {
        return h3;
    }
    let ratio = if d1 == 0.0 { 1.0 } else { (d2 / d1).abs() };
    if ratio >= 0.5 {
        // Increments not decaying: logarithmic (or worse) divergence.
        return toward;
    }
    // Geometric tail extrapolation: remaining increments sum to
    // d2·ratio/(1 − ratio). For a square-root approach the per-decade²
    // ratio is 0.1, reproducing Richardson's d2/9 correction.
    h3 + d2 * ratio / (1.0 - ratio)
}

/// Edge limits `H_min`, `H_max` of the Hilbert transform.
///
/// Atomic measures always diverge at both edges (there is an atom at each
/// edge by construction). Continuous measures are probed at relative
/// distances `10^-6, 10^-8, 10^-10`; diverging probe sequences (magnitude
/// beyond 1e8, or increments failing to decay geometrically) yield `±∞`,
/// converging ones are extrapolated to the edge.
pub fn hilbert_edges(m: &SpectralMeasure) -> HilbertEdges {
    if m.atoms().is_some() {
        return HilbertEdges {
            h_min: f64::NEG_INFINITY,
            h_max: f64::INFINITY,
        };
    }
    let scale = support_scale(m);
    let (lo, hi) = (m.support_min(), m.support_max());
    let distances = [1e-6 * scale, 1e-8 * scale, 1e-10 * scale];
    let probe = |z: f64| m.integrate(|lambda| 1.0 / (z - lambda), PROBE_TOL);
    let upper = [
        probe(hi + distances[0]),
        probe(hi + distances[1]),
        probe(hi + distances[2]),
    ];
    let lower = [
        probe(lo - distances[0]),
        probe(lo - distances[1]),
        probe(lo - distances[2]),
    ];
    HilbertEdges {
        h_min: classify_edge(lower, f64::NEG_INFINITY),
        h_max: classify_edge(upper, f64::INFINITY),
    }
}

/// Solve `H(z) = t` for `z` off-support by bracketed bisection; `edges`
/// gates admissibility. Returns `R(t) = z − 1/t`.
fn r_transform_inner(m: &SpectralMeasure, t: f64, edges: &HilbertEdges) -> Result<f64> {
    if t == 0.0 {
        return Ok(m.mean());
    }
    if t <= edges.h_min || t >= edges.h_max {
        return Err(Error::OutOfBand {
            t,
            h_min: edges.h_min,
            h_max: edges.h_max,
        });
    }
    let scale = support_scale(m);
    let (lambda_min, lambda_max) = (m.support_min(), m.support_max());
    // Bracket [lo, hi] with H(lo) > t > H(hi); H is strictly decreasing on
    // each component of the complement of the support.
    let (mut lo, mut hi) = if t > 0.0 {
        // |H(z)| ≤ 1/(z − λ_max) guarantees H < t at the far end.
        let far = lambda_max + scale + 1.0 / t;
        let near = probe_toward_edge(m, lambda_max, scale, |h| h > t)
            .ok_or(Error::OutOfBand {
                t,
                h_min: edges.h_min,
                h_max: edges.h_max,
            })?;
        (near, far)
    } else {
        let far = lambda_min - scale + 1.0 / t; // 1/t < 0
        let near = probe_toward_edge(m, lambda_min, -scale, |h| h < t)
            .ok_or(Error::OutOfBand {
                t,
                h_min: edges.h_min,
                h_max: edges.h_max,
            })?;
        (far, near)
    };
    // Plain bisection on z. No residual-based early exit: out at z ≈ 1/t
    // the slope dH/dz ≈ −t² is tiny, so a small H-residual can hide an
    // O(1) error in z (and hence in R = z − 1/t). The z-interval width is
    // the only trustworthy convergence measure.
    let mut z = 0.5 * (lo + hi);
    while hi - lo > 1e-15 * z.abs().max(1.0) {
        z = 0.5 * (lo + hi);
        let h = hilbert_at(m, z);
        if h > t {
            lo = z;
        } else {
            hi = z;
        }
    }
    Ok(z - 1.0 / t)
}

/// Walk a probe point toward the edge (side encoded in the sign of
/// `step_scale`) until `accept` holds for `H` there; `None` when the edge
/// is reached at floating-point resolution first.
fn probe_toward_edge<F: Fn(f64) -> bool>(
    m: &SpectralMeasure,
    edge: f64,
    step_scale: f64,
    accept: F,
) -> Option<f64> {
    let mut d = step_scale * 1e-3;
    let d_floor = step_scale.abs().max(edge.abs()) * 1e-15;
    while d.abs() >= d_floor {
        let z = edge + d;
        if z != edge && accept(hilbert_at(m, z)) {
            return Some(z);
        }
        d *= 0.125;
    }
    None
}

/// The R-transform `R(t)`, defined by `H(1/t + R(t)) = t`, for `t` in the
/// open band `(H_min, H_max)`; `R(0)` is the mean (analytic limit).
pub fn r_transform(m: &SpectralMeasure, t: f64) -> Result<f64> {
    let edges = hilbert_edges(m);
    r_transform_inner(m, t, &edges)
}

/// The branch function `v(t)` together with the branch that produced it.
///
/// Total on the reals: in-band arguments use the R-transform, saturated
/// arguments the edge formulas `λ_max − β/(2t)` / `λ_min − β/(2t)`, and
/// `t = 0` returns the mean.
pub fn v_branch_detailed(m: &SpectralMeasure, t: f64, b: BetaClass) -> (f64, Branch) {
    if t == 0.0 {
        return (m.mean(), Branch::R);
    }
    let edges = hilbert_edges(m);
    let s = 2.0 * t / b.beta_f64();
    if s > edges.h_max {
        return (m.support_max() - 1.0 / s, Branch::Upper);
    }
    if s < edges.h_min {
        return (m.support_min() - 1.0 / s, Branch::Lower);
    }
    match r_transform_inner(m, s, &edges) {
        Ok(r) => (r, Branch::R),
        // Boundary-of-band numerics: fall back to the adjacent saturated
        // branch, which is continuous across the boundary.
        Err(_) => {
            if s > 0.0 {
                (m.support_max() - 1.0 / s, Branch::Upper)
            } else {
                (m.support_min() - 1.0 / s, Branch::Lower)
            }
        }
    }
}

/// The branch function `v(t)` (see [`v_branch_detailed`]).
pub fn v_branch(m: &SpectralMeasure, t: f64, b: BetaClass) -> f64 {
    v_branch_detailed(m, t, b).0
}

/// The limit function `f^(β)(t)` in closed `v`-form:
///
/// `f(t) = t·v(t) − (β/2) ∫ log(1 + (2/β)·t·v(t) − (2/β)·t·λ) dμ(λ)`
///
/// for β ∈ {1, 2}, and `f^(4)(t) = −f^(2)(−t)` by reflection (the β = 4
/// case is *defined* through the β = 2 function, and the computation path
/// is literally that call, so the reflection identity holds bitwise).
pub fn f_beta(m: &SpectralMeasure, t: f64, b: BetaClass) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if b == BetaClass::Symplectic {
        return Ok(-f_beta(m, -t, BetaClass::Unitary)?);
    }
    let beta = b.beta_f64();
    let v = v_branch(m, t, b);
    let s = 2.0 * t / beta;
    let arg = |lambda: f64| 1.0 + s * v - s * lambda;
    // The argument is linear in λ, so its minimum over the support is at
    // an endpoint. It must be nonnegative (zero exactly at a saturated
    // edge, where the log singularity is integrable).
    let arg_min = arg(m.support_min()).min(arg(m.support_max()));
    if arg_min < -1e-9 * support_scale(m) {
        return Err(Error::InvalidArgument(format!(
            "internal: log argument {arg_min} negative over the support \
             (inconsistent branch value v = {v})"
        )));
    }
    let integral = m.integrate(|lambda| arg(lambda).max(1e-300).ln(), H_TOL);
    Ok(t * v - 0.5 * beta * integral)
}

/// The in-band integral form `f(t) = (β/2) ∫_0^{2t/β} R(s) ds`.
///
/// Valid when `2t/β` lies inside the band `[H_min, H_max]`; out-of-band
/// arguments are a domain error (use [`f_beta`], which handles saturation).
/// Serves as an independent oracle for [`f_beta`]: the two agree in band
/// because `f′(t) = v(t) = R(2t/β)` there. For β = 4 the reflection
/// `f^(4)(t) = −f^(2)(−t)` is applied first, consistent with [`f_beta`].
pub fn f_beta_integral_form(m: &SpectralMeasure, t: f64, b: BetaClass) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if b == BetaClass::Symplectic {
        return Ok(-f_beta_integral_form(m, -t, BetaClass::Unitary)?);
    }
    let beta = b.beta_f64();
    let s_end = 2.0 * t / beta;
    let edges = hilbert_edges(m);
    if s_end < edges.h_min || s_end > edges.h_max {
        return Err(Error::OutOfBand {
            t: s_end,
            h_min: edges.h_min,
            h_max: edges.h_max,
        });
    }
    // The R-transform is smooth on the open band; each evaluation is a
    // bisection solve, so keep the outer tolerance moderate.
    let result = quad::integrate(
        |s| {
            r_transform_inner(m, s, &edges)
                .expect("interior quadrature nodes stay inside the band")
        },
        0.0,
        s_end,
        1e-10,
        10_000,
    );
    Ok(0.5 * beta * result.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn semicircle2() -> SpectralMeasure {
        SpectralMeasure::semicircle(0.0, 2.0).unwrap()
    }

    fn uniform01() -> SpectralMeasure {
        SpectralMeasure::uniform(0.0, 1.0).unwrap()
    }

    fn rademacher() -> SpectralMeasure {
        SpectralMeasure::atomic(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn beta_class_round_trip() {
        for b in [1u8, 2, 4] {
            assert_eq!(BetaClass::from_beta(b).unwrap().beta(), b);
        }
        assert!(BetaClass::from_beta(3).is_err());
        let json = serde_json::to_string(&BetaClass::Symplectic).unwrap();
        assert_eq!(json, "4");
    }

    #[test]
    fn hilbert_atom() {
        let m = SpectralMeasure::dirac(0.0);
        assert_relative_eq!(hilbert_transform(&m, 2.0).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn hilbert_uniform_closed_form() {
        // H(z) = ln(z/(z−1)) for the uniform measure on [0, 1].
        let m = uniform01();
        for &z in &[2.0_f64, 1.5, 5.0, -0.75] {
            // z/(z−1) is positive on both components of the complement.
            let closed = (z / (z - 1.0)).ln();
            assert_relative_eq!(hilbert_transform(&m, z).unwrap(), closed, epsilon = 1e-9);
        }
        assert_relative_eq!(
            hilbert_transform(&m, 2.0).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-10
        );
    }

    #[test]
    fn hilbert_semicircle_closed_form() {
        // H(z) = (z − √(z² − 4))/2 outside [−2, 2].
        let m = semicircle2();
        for &z in &[2.0_f64 + 1e-6, 2.5, 3.0, 10.0] {
            let closed = (z - (z * z - 4.0).sqrt()) / 2.0;
            assert_relative_eq!(
                hilbert_transform(&m, z).unwrap(),
                closed,
                max_relative = 1e-8
            );
        }
        assert_relative_eq!(
            hilbert_transform(&m, 2.0 + 1e-9).unwrap(),
            1.0,
            max_relative = 1e-4
        );
    }

    #[test]
    fn hilbert_rejects_support() {
        let m = uniform01();
        assert!(matches!(
            hilbert_transform(&m, 0.5),
            Err(Error::InsideSupport { .. })
        ));
        assert!(matches!(
            hilbert_transform(&m, 0.0),
            Err(Error::InsideSupport { .. })
        ));
    }

    #[test]
    fn hilbert_monotone_decreasing_off_support() {
        let m = semicircle2();
        let mut prev = f64::INFINITY;
        for &z in &[2.001, 2.01, 2.1, 3.0, 10.0] {
            let h = hilbert_transform(&m, z).unwrap();
            assert!(h < prev);
            prev = h;
        }
    }

    #[test]
    fn edges_atomic_infinite() {
        let e = hilbert_edges(&SpectralMeasure::dirac(0.3));
        assert_eq!(e.h_min, f64::NEG_INFINITY);
        assert_eq!(e.h_max, f64::INFINITY);
    }

    #[test]
    fn edges_uniform_infinite() {
        let e = hilbert_edges(&uniform01());
        assert_eq!(e.h_min, f64::NEG_INFINITY);
        assert_eq!(e.h_max, f64::INFINITY);
    }

    #[test]
    fn edges_semicircle_finite() {
        let e = hilbert_edges(&semicircle2());
        assert_relative_eq!(e.h_max, 1.0, epsilon = 1e-4);
        assert_relative_eq!(e.h_min, -1.0, epsilon = 1e-4);
    }

    #[test]
    fn r_transform_dirac() {
        let m = SpectralMeasure::dirac(0.7);
        for &t in &[-2.0, -0.3, 0.0, 0.4, 3.0] {
            assert_relative_eq!(r_transform(&m, t).unwrap(), 0.7, epsilon = 1e-9);
        }
    }

    #[test]
    fn r_transform_semicircle_is_identity() {
        let m = semicircle2();
        assert_relative_eq!(r_transform(&m, 0.3).unwrap(), 0.3, epsilon = 1e-8);
        assert_relative_eq!(r_transform(&m, -0.6).unwrap(), -0.6, epsilon = 1e-8);
    }

    #[test]
    fn r_transform_two_atoms_closed_form() {
        // H(z) = z/(z²−1) inverts to R(t) = (√(1+4t²) − 1)/(2t).
        let m = rademacher();
        for &t in &[0.25_f64, 1.0, -1.5] {
            let closed = ((1.0 + 4.0 * t * t).sqrt() - 1.0) / (2.0 * t);
            assert_relative_eq!(r_transform(&m, t).unwrap(), closed, epsilon = 1e-9);
        }
        assert_relative_eq!(
            r_transform(&m, 1.0).unwrap(),
            (5.0_f64.sqrt() - 1.0) / 2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn r_transform_out_of_band() {
        let m = semicircle2();
        assert!(matches!(
            r_transform(&m, 1.5),
            Err(Error::OutOfBand { .. })
        ));
        assert!(matches!(
            r_transform(&m, -1.5),
            Err(Error::OutOfBand { .. })
        ));
    }

    #[test]
    fn r_transform_uniform_closed_form() {
        let m = uniform01();
        for &t in &[0.5_f64, 2.0, -1.0] {
            let closed = 1.0 / (1.0 - (-t).exp()) - 1.0 / t;
            assert_relative_eq!(r_transform(&m, t).unwrap(), closed, epsilon = 1e-8);
        }
    }

    #[test]
    fn v_branch_dirac_always_r() {
        let m = SpectralMeasure::dirac(0.4);
        for &t in &[-3.0, -0.5, 0.0, 0.2, 5.0] {
            let (v, branch) = v_branch_detailed(&m, t, BetaClass::Unitary);
            assert_relative_eq!(v, 0.4, epsilon = 1e-9);
            assert_eq!(branch, Branch::R);
        }
    }

    #[test]
    fn v_branch_semicircle_cases() {
        let m = semicircle2();
        let (v, branch) = v_branch_detailed(&m, 0.5, BetaClass::Unitary);
        assert_relative_eq!(v, 0.5, epsilon = 1e-8);
        assert_eq!(branch, Branch::R);
        // 2t/β = 2 > H_max = 1: saturated, v = λ_max − β/(2t) = 2 − 0.5.
        let (v, branch) = v_branch_detailed(&m, 2.0, BetaClass::Unitary);
        assert_relative_eq!(v, 1.5, epsilon = 1e-12);
        assert_eq!(branch, Branch::Upper);
        let (v, branch) = v_branch_detailed(&m, -2.0, BetaClass::Unitary);
        assert_relative_eq!(v, -1.5, epsilon = 1e-12);
        assert_eq!(branch, Branch::Lower);
    }

    #[test]
    fn f_beta_zero_and_dirac() {
        let m = semicircle2();
        assert_eq!(f_beta(&m, 0.0, BetaClass::Unitary).unwrap(), 0.0);
        let d = SpectralMeasure::dirac(0.9);
        // v ≡ b makes the log term vanish: f(t) = t·b.
        assert_relative_eq!(
            f_beta(&d, 0.7, BetaClass::Unitary).unwrap(),
            0.63,
            epsilon = 1e-9
        );
    }

    #[test]
    fn f_beta_semicircle_quadratic_in_band() {
        // R(s) = s gives f(t) = t²/2 in band for β = 2.
        let m = semicircle2();
        assert_relative_eq!(
            f_beta(&m, 0.5, BetaClass::Unitary).unwrap(),
            0.125,
            epsilon = 1e-7
        );
    }

    #[test]
    fn f_beta_integral_form_examples() {
        let m = semicircle2();
        assert_relative_eq!(
            f_beta_integral_form(&m, 0.5, BetaClass::Unitary).unwrap(),
            0.125,
            epsilon = 1e-7
        );
        assert_relative_eq!(
            f_beta_integral_form(&m, 0.25, BetaClass::Orthogonal).unwrap(),
            0.0625,
            epsilon = 1e-7
        );
        let d = SpectralMeasure::dirac(0.9);
        assert_relative_eq!(
            f_beta_integral_form(&d, 0.7, BetaClass::Unitary).unwrap(),
            0.63,
            epsilon = 1e-9
        );
        assert!(f_beta_integral_form(&m, 2.0, BetaClass::Unitary).is_err());
    }

    #[test]
    fn f_beta_saturated_branch_closed_form() {
        // Radius-2 semicircle at t = 2, β = 2: v = 1.5 and the log
        // potential at the edge gives f(2) = 2.5 − ln 2.
        let m = semicircle2();
        let f = f_beta(&m, 2.0, BetaClass::Unitary).unwrap();
        assert_relative_eq!(f, 2.5 - std::f64::consts::LN_2, epsilon = 1e-6);
    }

    #[test]
    fn f_beta_symplectic_reflection_is_bitwise() {
        let m = semicircle2();
        for &t in &[0.3, 0.8, 2.0, -0.4] {
            let f4 = f_beta(&m, t, BetaClass::Symplectic).unwrap();
            let f2 = f_beta(&m, -t, BetaClass::Unitary).unwrap();
            assert_eq!(f4.to_bits(), (-f2).to_bits());
        }
    }
}
