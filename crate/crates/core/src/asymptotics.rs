//! Finite-`N` laboratory for the small-rank asymptotics of the spherical
//! integral.
//!
//! The central empirical claim tested here: for `A_N` of small rank `M`
//! (with `M = o(N)`) and `B_N` converging to a measure `μ`,
//!
//! `(1/(MN)) · log I_N^(β)(A_N, B_N)  ≈  (1/M) Σ_i f_μ^(β)(a_i)`,
//!
//! with the gap shrinking as `N` grows. [`convergence_study`] tabulates
//! both sides along a dimension ladder, [`sandwich_bounds`] provides
//! rigorous finite-`N` two-sided bounds by recursive rank-one peeling, and
//! [`dilute_rank_limit`] probes the extensive-but-dilute regime
//! `M = a·N` with the rank fraction `a` sent toward zero.

use crate::error::{Error, Result};
use crate::exact::{hciz_confluent, hciz_exact_auto, hciz_rank_one, DEFAULT_PRECISION_BITS, HARD_GAP};
use crate::log_scalar::LogScalar;
use crate::mc::{hciz_mc_estimate, McParams};
use crate::measures::{sample_spectrum, trim_spectrum, SpectralMeasure, Spectrum, TrimSide};
use crate::transforms::{f_beta, BetaClass};
use serde::{Deserialize, Serialize};

/// How the finite-`N` integral is evaluated inside the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Method {
    /// Determinantal evaluation (β = 2 only).
    Exact { precision_bits: u32 },
    /// Monte Carlo over the appropriate compact group (any β).
    Mc { samples: u64, chunks: u32 },
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact { .. } => "exact",
            Method::Mc { .. } => "mc",
        }
    }
}

/// Whether [`rhs_f_average`] multiplies the f-average by `β/2` or leaves
/// the plain average (the two conventions coincide at β = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorMode {
    #[default]
    Default,
    BetaHalf,
}

/// Rank schedules `M(N)`, all `o(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankRule {
    One,
    Cbrt,
    Sqrt,
    NOverLogN,
}

impl RankRule {
    /// `M(N)`, always in `1..=N`.
    pub fn apply(&self, n: usize) -> usize {
        let nf = n as f64;
        let raw = match self {
            RankRule::One => 1.0,
            RankRule::Cbrt => nf.cbrt(),
            RankRule::Sqrt => nf.sqrt(),
            RankRule::NOverLogN => {
                if n < 2 {
                    1.0
                } else {
                    nf / nf.ln()
                }
            }
        };
        ((raw - 1e-9).ceil().max(1.0) as usize).min(n)
    }

    pub fn label(&self) -> &'static str {
        match self {
            RankRule::One => "one",
            RankRule::Cbrt => "cbrt",
            RankRule::Sqrt => "sqrt",
            RankRule::NOverLogN => "n-over-log-n",
        }
    }
}

impl std::str::FromStr for RankRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "1" => Ok(RankRule::One),
            "cbrt" => Ok(RankRule::Cbrt),
            "sqrt" => Ok(RankRule::Sqrt),
            "n-over-log-n" | "nlogn" => Ok(RankRule::NOverLogN),
            other => Err(Error::InvalidArgument(format!(
                "unknown rank rule '{other}' (expected one|cbrt|sqrt|n-over-log-n)"
            ))),
        }
    }
}

/// Scaled left-hand side `(1/(N·M)) log I_N^(β)(A, B)` with `M` the rank
/// of `a`. Returns the value and its standard error (zero for the exact
/// method).
pub fn lhs_scaled_log(
    a: &Spectrum,
    b: &Spectrum,
    beta: BetaClass,
    method: &Method,
    seed: u64,
) -> Result<(f64, f64)> {
    let m = a.rank();
    if m == 0 {
        return Err(Error::ZeroRank);
    }
    let n = a.dim();
    let scale = 1.0 / (n as f64 * m as f64);
    match *method {
        Method::Exact { precision_bits } => {
            if beta != BetaClass::Unitary {
                return Err(Error::UnsupportedMethod {
                    method: "exact".into(),
                    beta: beta.beta(),
                });
            }
            let v = hciz_exact_auto(a, b, precision_bits)?;
            Ok((scale * v.log_abs(), 0.0))
        }
        Method::Mc { samples, chunks } => {
            let params = McParams::new(beta, samples, seed, chunks)?;
            let est = hciz_mc_estimate(a, b, &params)?;
            Ok((scale * est.log_mean, scale * est.stderr))
        }
    }
}

/// Scaled right-hand side `(1/M) Σ_i f_μ^(β)(a_i)` over the nonzero
/// entries of `a`; [`PrefactorMode::BetaHalf`] multiplies by `β/2`.
pub fn rhs_f_average(
    a: &Spectrum,
    m: &SpectralMeasure,
    beta: BetaClass,
    mode: PrefactorMode,
) -> Result<f64> {
    let nonzero: Vec<f64> = a.values().iter().cloned().filter(|v| *v != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::ZeroRank);
    }
    // Values repeat in the studies; evaluate f once per distinct value.
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for v in &nonzero {
        match distinct.iter_mut().find(|(d, _)| d == v) {
            Some(entry) => entry.1 += 1,
            None => distinct.push((*v, 1)),
        }
    }
    let mut total = 0.0;
    for (v, count) in &distinct {
        total += f_beta(m, *v, beta)? * *count as f64;
    }
    let mut avg = total / nonzero.len() as f64;
    if mode == PrefactorMode::BetaHalf {
        avg *= beta.beta_f64() / 2.0;
    }
    Ok(avg)
}

/// Two-sided bounds on `log I_N^(β)(A, B)` from recursive rank-one
/// peeling.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SandwichBounds {
    /// Log-domain lower bound on the integral.
    pub lower: LogScalar,
    /// Log-domain upper bound on the integral.
    pub upper: LogScalar,
    /// Standard error of `lower.log_abs()` (zero for exact factors).
    pub stderr_lower: f64,
    /// Standard error of `upper.log_abs()`.
    pub stderr_upper: f64,
    /// The translation applied to make `b` nonnegative (0 when none).
    pub shift: f64,
}

/// Rank-one factor `I_{n_i}(diag(t, 0, …), b_i)` for the sandwich product.
fn rank_one_factor(
    t: f64,
    b: &Spectrum,
    beta: BetaClass,
    method: &Method,
    seed: u64,
    precision_bits: u32,
) -> Result<(f64, f64)> {
    match *method {
        Method::Exact { .. } => {
            if beta != BetaClass::Unitary {
                return Err(Error::UnsupportedMethod {
                    method: "exact".into(),
                    beta: beta.beta(),
                });
            }
            let v = if b.dim() == 1 || b.min_rel_gap() > HARD_GAP {
                hciz_rank_one(t, b)?
            } else {
                // Trimmed spectra can carry exact repeats; fall back to the
                // confluent evaluator.
                let a = Spectrum::rank_perturbation(t, 1, b.dim())?;
                hciz_confluent(&a, b, precision_bits)?
            };
            Ok((v.log_abs(), 0.0))
        }
        Method::Mc { samples, chunks } => {
            let a = Spectrum::rank_perturbation(t, 1, b.dim())?;
            let params = McParams::new(beta, samples, seed, chunks)?;
            let est = hciz_mc_estimate(&a, b, &params)?;
            Ok((est.log_mean, est.stderr))
        }
    }
}

/// Finite-`N` sandwich for `log I_N^(β)(A, B)` with `A = diag(a_1 ≥ … ≥
/// a_M > 0, 0, …)`:
///
/// `∏_{i=1}^M I_{N+1−i}( N·a_i/(N+1−i), b↓ᵢ )  ≤  I_N(A, B)  ≤
///  ∏_{i=1}^M I_{N+1−i}( N·a_i/(N+1−i), b↑ᵢ )`,
///
/// where `b↓ᵢ` / `b↑ᵢ` drop the `i−1` largest / smallest eigenvalues of
/// `b` (eigenvalue interlacing of compressions plus monotonicity of the
/// rank-one integral in each eigenvalue). The peeled factor at step `i`
/// lives in dimension `N+1−i` and carries the inflated weight
/// `N·a_i/(N+1−i)` so its exponent matches the original normalization.
///
/// Requires `a ≥ 0` entrywise. `b` of either sign is handled by an
/// internal translation to `b − min(b)` with the exact correction
/// `N·min(b)·Σ_i a_i` applied to both bounds. β = 4 is limited to `M = 1`
/// (intermediate symplectic dimensions would be odd).
pub fn sandwich_bounds(
    a: &Spectrum,
    b: &Spectrum,
    beta: BetaClass,
    method: &Method,
    seed: u64,
) -> Result<SandwichBounds> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim();
    let m = a.rank();
    if m == 0 {
        return Err(Error::ZeroRank);
    }
    if let Some(&neg) = a.values().iter().find(|v| **v < 0.0) {
        return Err(Error::NegativePerturbation(neg));
    }
    if beta == BetaClass::Symplectic && m >= 2 {
        return Err(Error::UnsupportedMethod {
            method: format!("sandwich with rank {m} (intermediate dimension {} is odd)", n - 1),
            beta: beta.beta(),
        });
    }
    let precision_bits = match method {
        Method::Exact { precision_bits } => *precision_bits,
        _ => DEFAULT_PRECISION_BITS,
    };
    let min_b = b.min();
    let shift = if min_b < 0.0 { -min_b } else { 0.0 };
    let b_shifted = if shift > 0.0 { b.shifted(shift) } else { b.clone() };
    let top: Vec<f64> = a.values()[..m].to_vec();
    let correction = n as f64 * min_b.min(0.0) * top.iter().sum::<f64>();

    let mut lower_log = correction;
    let mut upper_log = correction;
    let mut var_lower = 0.0f64;
    let mut var_upper = 0.0f64;
    for (i, &ai) in top.iter().enumerate() {
        let step = i + 1;
        let sub_dim = n + 1 - step;
        let t = n as f64 * ai / sub_dim as f64;
        let b_lo = trim_spectrum(&b_shifted, step, TrimSide::Lower)?;
        let b_hi = trim_spectrum(&b_shifted, step, TrimSide::Upper)?;
        let factor_seed = seed.wrapping_add(step as u64 * 0x100_0000_01b3);
        let (lo, se_lo) = rank_one_factor(t, &b_lo, beta, method, factor_seed, precision_bits)?;
        let (hi, se_hi) = rank_one_factor(
            t,
            &b_hi,
            beta,
            method,
            factor_seed.wrapping_add(0x9e37_79b9),
            precision_bits,
        )?;
        lower_log += lo;
        upper_log += hi;
        var_lower += se_lo * se_lo;
        var_upper += se_hi * se_hi;
    }
    Ok(SandwichBounds {
        lower: LogScalar::from_log(lower_log),
        upper: LogScalar::from_log(upper_log),
        stderr_lower: var_lower.sqrt(),
        stderr_upper: var_upper.sqrt(),
        shift,
    })
}

/// One row of a convergence or dilute-rank report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub m: usize,
    /// Rank fraction for dilute studies; absent in plain convergence rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Scaled log-integral (left-hand side).
    pub lhs: f64,
    /// Limit prediction (right-hand side).
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub gap: f64,
    /// Lower bound on the *unscaled* `log I`, when available.
    pub lower: Option<f64>,
    /// Upper bound on the unscaled `log I`, when available.
    pub upper: Option<f64>,
    /// Standard error of `lhs` (None for exact evaluation).
    pub stderr: Option<f64>,
    pub method: String,
}

/// Rows plus run metadata for the study drivers.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub metadata: serde_json::Value,
}

impl ConvergenceReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::NAN, f64::max)
    }

    pub fn first_gap(&self) -> f64 {
        self.rows.first().map_or(f64::NAN, |r| r.gap)
    }

    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.gap)
    }

    /// Whether the last row improved on the first (the studies order rows
    /// so that "later" means "closer to the limit").
    pub fn monotone(&self) -> bool {
        self.final_gap() < self.first_gap()
    }
}

fn row_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Tabulate both sides of the small-rank limit along a dimension ladder.
///
/// For each `N` in `dims` (ascending): `A_N` has `M = rank_rule(N)`
/// eigenvalues equal to `t` (rest zero), `B_N` is the deterministic
/// quantile discretization of `m`, and the row records the scaled
/// log-integral, the `f`-average prediction, their gap, and — when the
/// sandwich applies (`t ≥ 0`, and `M = 1` for β = 4) — two-sided bounds
/// on `log I`. Monte Carlo rows derive per-row seeds from `seed` and the
/// row index.
pub fn convergence_study(
    m: &SpectralMeasure,
    rank_rule: RankRule,
    t: f64,
    dims: &[usize],
    beta: BetaClass,
    method: &Method,
    seed: u64,
) -> Result<ConvergenceReport> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("dims must be non-empty".into()));
    }
    let mut dims: Vec<usize> = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let rhs_value = {
        // a-independent across rows (all nonzero entries equal t).
        let probe = Spectrum::rank_perturbation(t, 1, 1.max(dims[0]))?;
        rhs_f_average(&probe, m, beta, PrefactorMode::Default)?
    };
    let mut rows = Vec::with_capacity(dims.len());
    for (idx, &n) in dims.iter().enumerate() {
        let rank = rank_rule.apply(n);
        let a = Spectrum::rank_perturbation(t, rank, n)?;
        let b = sample_spectrum(m, n, seed)?;
        let rseed = row_seed(seed, idx);
        let (lhs, stderr) = lhs_scaled_log(&a, &b, beta, method, rseed)?;
        let bounds = sandwich_bounds(&a, &b, beta, method, rseed).ok();
        rows.push(ReportRow {
            n,
            m: rank,
            a: None,
            lhs,
            rhs: rhs_value,
            gap: (lhs - rhs_value).abs(),
            lower: bounds.as_ref().map(|s| s.lower.log_abs()),
            upper: bounds.as_ref().map(|s| s.upper.log_abs()),
            stderr: match method {
                Method::Exact { .. } => None,
                Method::Mc { .. } => Some(stderr),
            },
            method: method.label().to_string(),
        });
    }
    let metadata = serde_json::json!({
        "study": "converge",
        "measure": m.describe(),
        "rank_rule": rank_rule.label(),
        "t": t,
        "beta": beta.beta(),
        "method": method,
        "seed": seed,
        "dims": dims,
    });
    Ok(ConvergenceReport { rows, metadata })
}

/// Probe the dilute extensive-rank regime `M = ⌈a·n⌉` at fixed `n`,
/// sending the rank fraction `a` toward zero.
///
/// For each `a` in the grid (processed in descending order, so the last
/// row is the most dilute): `A_n` carries `M = ⌈a·n⌉` nonzero eigenvalues
/// drawn as quantiles of `ν`, `B_n` is the quantile discretization of
/// `μ`, and the row compares `a⁻¹·n⁻²·log I_n` against the target
/// `∫ f_μ^(β) dν` (atomic `ν`: exact sum; continuous `ν`: 512-point
/// quantile average).
pub fn dilute_rank_limit(
    nu: &SpectralMeasure,
    mu: &SpectralMeasure,
    a_grid: &[f64],
    n: usize,
    beta: BetaClass,
    method: &Method,
    seed: u64,
) -> Result<ConvergenceReport> {
    if a_grid.is_empty() {
        return Err(Error::InvalidArgument("a-grid must be non-empty".into()));
    }
    let mut grid: Vec<f64> = a_grid.to_vec();
    for &a in &grid {
        if !(a > 0.0 && a <= 1.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rank fractions must lie in (0, 1], got {a}"
            )));
        }
        if a * (n as f64) < 1.0 - 1e-9 {
            return Err(Error::DiluteResolution { a, n });
        }
    }
    grid.sort_by(|x, y| y.partial_cmp(x).expect("finite fractions"));
    grid.dedup();

    // Target ∫ f_μ^(β) dν.
    let target = match nu.atoms() {
        Some((points, weights)) => {
            let mut acc = 0.0;
            for (&p, &w) in points.iter().zip(weights) {
                if w > 0.0 {
                    acc += w * f_beta(mu, p, beta)?;
                }
            }
            acc
        }
        None => {
            let k = 512;
            let mut acc = 0.0;
            for i in 0..k {
                let q = (i as f64 + 0.5) / k as f64;
                acc += f_beta(mu, nu.quantile(q), beta)?;
            }
            acc / k as f64
        }
    };

    let b = sample_spectrum(mu, n, seed)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (idx, &afrac) in grid.iter().enumerate() {
        let m_rank = (((afrac * n as f64) - 1e-9).ceil().max(1.0) as usize).min(n);
        let nonzero = sample_spectrum(nu, m_rank, seed)?;
        let mut values = nonzero.values().to_vec();
        values.resize(n, 0.0);
        let a_spec = Spectrum::new(values)?;
        let rseed = row_seed(seed, idx);
        let scale = 1.0 / (afrac * (n * n) as f64);
        let (log_i, stderr) = match *method {
            Method::Exact { precision_bits } => {
                if beta != BetaClass::Unitary {
                    return Err(Error::UnsupportedMethod {
                        method: "exact".into(),
                        beta: beta.beta(),
                    });
                }
                (hciz_exact_auto(&a_spec, &b, precision_bits)?.log_abs(), 0.0)
            }
            Method::Mc { samples, chunks } => {
                let params = McParams::new(beta, samples, rseed, chunks)?;
                let est = hciz_mc_estimate(&a_spec, &b, &params)?;
                (est.log_mean, est.stderr)
            }
        };
        let lhs = scale * log_i;
        let bounds = sandwich_bounds(&a_spec, &b, beta, method, rseed).ok();
        rows.push(ReportRow {
            n,
            m: m_rank,
            a: Some(afrac),
            lhs,
            rhs: target,
            gap: (lhs - target).abs(),
            lower: bounds.as_ref().map(|s| s.lower.log_abs()),
            upper: bounds.as_ref().map(|s| s.upper.log_abs()),
            stderr: match method {
                Method::Exact { .. } => None,
                Method::Mc { .. } => Some(scale * stderr),
            },
            method: method.label().to_string(),
        });
    }
    let metadata = serde_json::json!({
        "study": "dilute",
        "nu": nu.describe(),
        "mu": mu.describe(),
        "a_grid": grid,
        "n": n,
        "beta": beta.beta(),
        "method": method,
        "seed": seed,
    });
    Ok(ConvergenceReport { rows, metadata })
}
