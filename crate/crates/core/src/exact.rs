//! Exact evaluation of the β = 2 spherical integral.
//!
//! For distinct spectra the Harish-Chandra formula expresses the integral
//! as a determinant ratio
//!
//! `I_N(A, B) = c_N · det(e^{N a_i b_j}) / (Δ(a) Δ(b))`,
//!
//! with `Δ` the Vandermonde determinant and the constant
//! `c_N = (∏_{p=1}^{N-1} p!) / N^{N(N-1)/2}` fixed by the normalization
//! `I_N(0, B) = 1` (Haar measure is a probability measure).
//!
//! Three evaluation paths are provided:
//!
//! * [`hciz_det`] — signed log-domain LU with full pivoting, for spectra
//!   whose eigenvalue gaps are comfortably away from zero;
//! * [`hciz_rank_one`] — the confluent limit for `A = diag(t, 0, …, 0)`,
//!   evaluated through a cancellation-free divided-difference series (the
//!   textbook alternating sum loses `Θ(N·t·‖b‖)` bits and is kept only as
//!   a small-`N` test oracle);
//! * [`hciz_confluent`] — arbitrary repeated eigenvalues on both sides via
//!   divided-difference (derivative) rows and columns, computed in
//!   configurable-precision floating point with a doubled-precision
//!   verification pass.

use crate::error::{Error, Result};
use crate::log_scalar::LogScalar;
use crate::measures::Spectrum;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

type Big = FBig<HalfEven, 2>;

/// Below this relative gap the plain determinant formula refuses to run.
pub const HARD_GAP: f64 = 1e-10;

/// Below this relative gap the auto-dispatcher routes to the confluent
/// evaluator (the determinant loses roughly `-log10(gap)` digits).
pub const ROUTE_GAP: f64 = 1e-6;

/// Default significand size for the confluent evaluator.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Relative agreement required between the base- and doubled-precision
/// confluent passes.
const VERIFY_REL_TOL: f64 = 1e-9;

/// `ln(n!)` by direct summation (exact to f64 rounding at desk scale).
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln c_N = Σ_{p=1}^{N-1} ln p! − (N(N−1)/2) ln N`, using
/// `Σ_{p<N} ln p! = Σ_{q<N} (N−q) ln q`.
fn log_normalization(n: usize) -> f64 {
    let sum_lnfact: f64 = (2..n).map(|q| (n - q) as f64 * (q as f64).ln()).sum();
    let nf = n as f64;
    sum_lnfact - 0.5 * nf * (nf - 1.0) * nf.ln()
}

/// The Vandermonde determinant `Δ(s) = ∏_{i<j} (s_i − s_j)` as a signed
/// log-domain scalar; zero when any two eigenvalues coincide.
pub fn vandermonde_log(s: &Spectrum) -> LogScalar {
    let v = s.values();
    let mut sign = 1i8;
    let mut log_abs = 0.0f64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = v[i] - v[j];
            if d == 0.0 {
                return LogScalar::zero();
            }
            if d < 0.0 {
                sign = -sign;
            }
            log_abs += d.abs().ln();
        }
    }
    LogScalar::new(sign, log_abs)
}

/// Determinant of a matrix of signed log-domain entries by LU elimination
/// with full pivoting (pivot = largest log-magnitude in the active block).
fn lu_det_log(mut m: Vec<Vec<LogScalar>>) -> LogScalar {
    let n = m.len();
    let mut det = LogScalar::one();
    for k in 0..n {
        let (mut pi, mut pj) = (k, k);
        let mut best = f64::NEG_INFINITY;
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, val) in row.iter().enumerate().skip(k) {
                if val.log_abs() > best {
                    best = val.log_abs();
                    (pi, pj) = (i, j);
                }
            }
        }
        if m[pi][pj].is_zero() {
            return LogScalar::zero();
        }
        if pi != k {
            m.swap(k, pi);
            det = -det;
        }
        if pj != k {
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            det = -det;
        }
        let pivot = m[k][k];
        det = det * pivot;
        for i in (k + 1)..n {
            let factor = m[i][k] / pivot;
            if factor.is_zero() {
                continue;
            }
            let (head, tail) = m.split_at_mut(i);
            let (row_k, row_i) = (&head[k], &mut tail[0]);
            for (x, &y) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                *x = *x - factor * y;
            }
        }
    }
    det
}

fn check_same_dim(a: &Spectrum, b: &Spectrum) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Exact `I_N^(2)(A, B)` by the Harish-Chandra determinant formula.
///
/// Requires all eigenvalues distinct within each spectrum (relative gaps
/// above [`HARD_GAP`]); near-degenerate inputs are rejected with a
/// [`Error::Degenerate`] pointing at [`hciz_confluent`].
pub fn hciz_det(a: &Spectrum, b: &Spectrum) -> Result<LogScalar> {
    check_same_dim(a, b)?;
    let n = a.dim();
    if n == 1 {
        return Ok(LogScalar::from_log(a.values()[0] * b.values()[0]));
    }
    for s in [a, b] {
        let gap = s.min_rel_gap();
        if gap <= HARD_GAP {
            return Err(Error::Degenerate {
                gap,
                threshold: HARD_GAP,
            });
        }
    }
    let nf = n as f64;
    // Center both spectra so the factored exponent is as small as possible:
    // N·a_i·b_j = N(a_i−a0)(b_j−b0) + N·b0·a_i + N·a0·b_j − N·a0·b0.
    let a0 = 0.5 * (a.max() + a.min());
    let b0 = 0.5 * (b.max() + b.min());
    let m: Vec<Vec<LogScalar>> = a
        .values()
        .iter()
        .map(|&ai| {
            b.values()
                .iter()
                .map(|&bj| LogScalar::from_log(nf * (ai - a0) * (bj - b0)))
                .collect()
        })
        .collect();
    let det = lu_det_log(m);
    let factored = nf * (b0 * a.sum() + a0 * b.sum() - nf * a0 * b0);
    let value = det.mul_exp(factored + log_normalization(n))
        / (vandermonde_log(a) * vandermonde_log(b));
    Ok(value)
}

/// Divided difference of `λ ↦ e^{xλ}` over the given (distinct, sorted
/// descending) nodes, as a signed log-domain scalar.
///
/// Uses the identity `dd[b_1..b_n](e^{x·}) = [e^{xZ}]_{1,n}` with `Z` the
/// bidiagonal matrix carrying the nodes on the diagonal and ones above it.
/// After shifting the nodes to be nonnegative (and reflecting when
/// `x < 0`), every term of the series `Σ_k x^k Z^k / k!` is nonnegative,
/// so the log-domain summation never cancels.
fn divided_difference_exp(x: f64, nodes: &[f64]) -> LogScalar {
    let n = nodes.len();
    if n == 1 {
        return LogScalar::from_log(x * nodes[0]);
    }
    if x == 0.0 {
        // dd of the constant 1 vanishes for n ≥ 2.
        return LogScalar::zero();
    }
    if x < 0.0 {
        // dd[b](e^{xλ}) = (−1)^{n−1} dd[−b](e^{−xλ}) (reflect λ → −λ;
        // each difference order flips one sign).
        let reflected: Vec<f64> = nodes.iter().map(|v| -v).collect();
        let sign = if (n - 1).is_multiple_of(2) { 1 } else { -1 };
        let base = divided_difference_exp(-x, &reflected);
        return LogScalar::new(sign, base.log_abs());
    }
    // Shift nodes to [0, range]: dd picks up the factor e^{x·min}.
    let shift = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let c: Vec<f64> = nodes.iter().map(|v| v - shift).collect();
    let c_max = c.iter().cloned().fold(0.0f64, f64::max);
    let log_c: Vec<f64> = c.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
    // u_0 = e_n; u_{k+1} = (x/(k+1)) Z u_k; all entries stay ≥ 0.
    let mut u = vec![f64::NEG_INFINITY; n];
    u[n - 1] = 0.0;
    let mut acc = f64::NEG_INFINITY;
    let burn_in = 2.0 * x * (c_max + 1.0) + n as f64;
    let max_iter = (10.0 * (x * c_max + n as f64) + 1000.0) as usize;
    for k in 1..=max_iter {
        let step = (x / k as f64).ln();
        let mut next = vec![f64::NEG_INFINITY; n];
        for i in 0..n {
            let diag = log_c[i] + u[i];
            let upper = if i + 1 < n { u[i + 1] } else { f64::NEG_INFINITY };
            next[i] = step + logaddexp(diag, upper);
        }
        u = next;
        acc = logaddexp(acc, u[0]);
        if k as f64 > burn_in && u[0] < acc - 50.0 {
            break;
        }
    }
    LogScalar::new(1, acc + x * shift)
}

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exact `I_N^(2)(diag(t, 0, …, 0), B)` — the rank-one confluent limit
///
/// `I = (N−1)! · (Nt)^{-(N-1)} · Σ_j e^{N t b_j} / ∏_{k≠j} (b_j − b_k)`,
///
/// the sum being the divided difference of `e^{Ntλ}` over the eigenvalues
/// of `B`, here evaluated by the cancellation-free series of
/// [`divided_difference_exp`]. `t = 0` returns 1 exactly.
pub fn hciz_rank_one(t: f64, b: &Spectrum) -> Result<LogScalar> {
    if !t.is_finite() {
        return Err(Error::NonFiniteValue(t));
    }
    let n = b.dim();
    if n == 1 {
        return Ok(LogScalar::from_log(t * b.values()[0]));
    }
    if t == 0.0 {
        return Ok(LogScalar::one());
    }
    let gap = b.min_rel_gap();
    if gap <= HARD_GAP {
        return Err(Error::Degenerate {
            gap,
            threshold: HARD_GAP,
        });
    }
    let x = n as f64 * t;
    let dd = divided_difference_exp(x, b.values());
    let prefactor =
        LogScalar::from_log(ln_factorial(n - 1)) * LogScalar::from_f64(x).powi(-(n as i32 - 1));
    let value = prefactor * dd;
    debug_assert!(
        value.sign() == 1,
        "spherical integrals are positive; got sign {} (t={t}, n={n})",
        value.sign()
    );
    Ok(value)
}

// ---------------------------------------------------------------------------
// Confluent evaluation in configurable precision
// ---------------------------------------------------------------------------

/// Distinct eigenvalues with multiplicities, descending.
fn group(values: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

fn big_from(x: f64, precision: usize) -> Big {
    Big::try_from(x)
        .expect("finite f64 converts exactly")
        .with_precision(precision)
        .value()
}

fn big_abs(x: &Big) -> Big {
    if *x < Big::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

/// One confluent evaluation at a fixed precision. Returns the sign and the
/// natural log of the magnitude.
fn confluent_eval(a: &Spectrum, b: &Spectrum, precision: usize) -> Result<(i8, f64)> {
    let n = a.dim();
    let nf_big = big_from(n as f64, precision);
    let groups_a = group(a.values());
    let groups_b = group(b.values());

    // Shared tables: factorial reciprocals, powers of N.
    let max_mult = groups_a
        .iter()
        .chain(&groups_b)
        .map(|g| g.1)
        .max()
        .unwrap_or(1);
    let one = big_from(1.0, precision);
    let mut fact: Vec<Big> = Vec::with_capacity(max_mult + 1);
    fact.push(one.clone());
    for k in 1..=max_mult {
        let kb = big_from(k as f64, precision);
        let prev = fact[k - 1].clone();
        fact.push(&prev * &kb);
    }
    let inv_fact: Vec<Big> = fact.iter().map(|f| &one / f).collect();
    let mut npow: Vec<Big> = Vec::with_capacity(2 * max_mult + 1);
    npow.push(one.clone());
    for k in 1..=2 * max_mult {
        let prev = npow[k - 1].clone();
        npow.push(&prev * &nf_big);
    }

    // Per-group eigenvalue power tables.
    let pow_table = |groups: &[(f64, usize)]| -> Vec<Vec<Big>> {
        groups
            .iter()
            .map(|&(v, _)| {
                let vb = big_from(v, precision);
                let mut pows = Vec::with_capacity(max_mult + 1);
                pows.push(one.clone());
                for k in 1..=max_mult {
                    let prev: Big = pows[k - 1].clone();
                    pows.push(&prev * &vb);
                }
                pows
            })
            .collect()
    };
    let apow = pow_table(&groups_a);
    let bpow = pow_table(&groups_b);

    // Assemble the confluent matrix block by block. Row (g, r) carries the
    // r-th divided-difference (derivative/r!) of a ↦ e^{N a b} at α_g;
    // column (h, s) the s-th in b at β_h:
    //   E_{(g,r),(h,s)} = e^{N α_g β_h} · Σ_k N^{r+s−k} α_g^{s−k} β_h^{r−k}
    //                                        / (k! (s−k)! (r−k)!).
    let mut matrix: Vec<Vec<Big>> = vec![vec![Big::ZERO; n]; n];
    let mut row0 = 0usize;
    for (gi, &(alpha, ma)) in groups_a.iter().enumerate() {
        let alpha_big = big_from(alpha, precision);
        let mut col0 = 0usize;
        for (hi, &(beta, mb)) in groups_b.iter().enumerate() {
            let beta_big = big_from(beta, precision);
            let exponent = &(&nf_big * &alpha_big) * &beta_big;
            let e0 = exponent.exp();
            for r in 0..ma {
                for s in 0..mb {
                    let mut poly = Big::ZERO;
                    for k in 0..=r.min(s) {
                        let term = &(&(&npow[r + s - k] * &apow[gi][s - k]) * &bpow[hi][r - k])
                            * &(&(&inv_fact[k] * &inv_fact[s - k]) * &inv_fact[r - k]);
                        poly = &poly + &term;
                    }
                    matrix[row0 + r][col0 + s] = &e0 * &poly;
                }
            }
            col0 += mb;
        }
        row0 += ma;
    }

    // LU with partial pivoting in big floats.
    let mut det_sign = 1i8;
    let mut log_det = Big::ZERO.with_precision(precision).value();
    let mut mref = matrix;
    for k in 0..n {
        let mut p = k;
        let mut best = big_abs(&mref[k][k]);
        for (i, row) in mref.iter().enumerate().skip(k + 1) {
            let mag = big_abs(&row[k]);
            if mag > best {
                best = mag;
                p = i;
            }
        }
        if best == Big::ZERO {
            return Err(Error::Precision {
                bits: precision as u32,
                verify_bits: precision as u32,
                residual: f64::INFINITY,
            });
        }
        if p != k {
            mref.swap(k, p);
            det_sign = -det_sign;
        }
        let pivot = mref[k][k].clone();
        if pivot < Big::ZERO {
            det_sign = -det_sign;
        }
        log_det = &log_det + &big_abs(&pivot).ln();
        for i in (k + 1)..n {
            let factor = &mref[i][k] / &pivot;
            let (head, tail) = mref.split_at_mut(i);
            let (row_k, row_i) = (&head[k], &mut tail[0]);
            for (x, y) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                *x = &*x - &(&factor * y);
            }
        }
    }

    // Group Vandermonde denominators Δ_G = ∏_{g<g'} (v_g − v_{g'})^{m_g m_{g'}}
    // (positive since groups are descending) and the per-group confluence
    // sign (−1)^{C(m,2)} from reordering derivative rows.
    let mut log_denom = Big::ZERO.with_precision(precision).value();
    let mut conf_sign = 1i8;
    for groups in [&groups_a, &groups_b] {
        for (i, &(vi, mi)) in groups.iter().enumerate() {
            if mi % 4 == 2 || mi % 4 == 3 {
                // C(m,2) odd ⇔ m ≡ 2, 3 (mod 4).
                conf_sign = -conf_sign;
            }
            for &(vj, mj) in groups.iter().skip(i + 1) {
                let diff = big_from(vi - vj, precision);
                let mult = big_from((mi * mj) as f64, precision);
                log_denom = &log_denom + &(&big_abs(&diff).ln() * &mult);
            }
        }
    }

    // log c_N = ln ∏_{p<N} p! − (N(N−1)/2) ln N, all in big floats.
    let mut log_cn = Big::ZERO.with_precision(precision).value();
    let mut run = one.clone();
    for p in 1..n {
        let pb = big_from(p as f64, precision);
        run = &run * &pb; // run = p!
        log_cn = &log_cn + &run.ln();
    }
    let half_pairs = big_from((n * (n - 1) / 2) as f64, precision);
    log_cn = &log_cn - &(&nf_big.ln() * &half_pairs);

    let total = &(&log_cn + &log_det) - &log_denom;
    Ok((det_sign * conf_sign, total.to_f64().value()))
}

/// Exact `I_N^(2)(A, B)` with arbitrary (exactly) repeated eigenvalues on
/// either side, evaluated in `precision_bits`-bit floating point with a
/// verification pass at twice the precision.
///
/// Repeated eigenvalues must repeat *exactly* (bitwise); distinct but
/// close eigenvalues are handled as distinct, which is fine at high
/// precision. Disagreement between the two passes beyond `1e-9` relative
/// (in the log value) raises [`Error::Precision`].
pub fn hciz_confluent(a: &Spectrum, b: &Spectrum, precision_bits: u32) -> Result<LogScalar> {
    check_same_dim(a, b)?;
    if precision_bits < 53 {
        return Err(Error::InvalidArgument(format!(
            "precision_bits must be at least 53, got {precision_bits}"
        )));
    }
    let n = a.dim();
    if n == 1 {
        return Ok(LogScalar::from_log(a.values()[0] * b.values()[0]));
    }
    let (sign_lo, log_lo) = confluent_eval(a, b, precision_bits as usize)?;
    let verify_bits = 2 * precision_bits;
    let (sign_hi, log_hi) = confluent_eval(a, b, verify_bits as usize)?;
    let residual = (log_lo - log_hi).abs() / log_hi.abs().max(1.0);
    if sign_lo != sign_hi || residual > VERIFY_REL_TOL {
        return Err(Error::Precision {
            bits: precision_bits,
            verify_bits,
            residual: if sign_lo != sign_hi {
                f64::INFINITY
            } else {
                residual
            },
        });
    }
    if sign_hi != 1 {
        // The integral of a positive integrand is positive; a negative
        // determinant ratio can only be a precision artifact.
        return Err(Error::Precision {
            bits: precision_bits,
            verify_bits,
            residual: f64::INFINITY,
        });
    }
    Ok(LogScalar::new(1, log_hi))
}

/// Route to the cheapest applicable exact evaluator: rank-one series when
/// `A = diag(t, 0, …, 0)` and `B` is well separated; plain determinant
/// when both spectra have relative gaps above [`ROUTE_GAP`]; the
/// configurable-precision confluent path otherwise.
pub fn hciz_exact_auto(a: &Spectrum, b: &Spectrum, precision_bits: u32) -> Result<LogScalar> {
    check_same_dim(a, b)?;
    let n = a.dim();
    if n == 1 {
        return Ok(LogScalar::from_log(a.values()[0] * b.values()[0]));
    }
    // A = 0 or B = 0 normalizes the integrand to 1 identically.
    if a.rank() == 0 || b.rank() == 0 {
        return Ok(LogScalar::one());
    }
    let nonzero = a.rank();
    if nonzero == 1 && b.min_rel_gap() > ROUTE_GAP {
        let t = a
            .values()
            .iter()
            .cloned()
            .find(|v| *v != 0.0)
            .expect("rank-one spectrum has a nonzero value");
        return hciz_rank_one(t, b);
    }
    if a.min_rel_gap() > ROUTE_GAP && b.min_rel_gap() > ROUTE_GAP {
        return hciz_det(a, b);
    }
    hciz_confluent(a, b, precision_bits)
}
