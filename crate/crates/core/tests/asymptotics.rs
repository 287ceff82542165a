//! Integration tests for the finite-N asymptotics laboratory: interlacing
//! of spectral compressions, sandwich-bound validity, and the convergence
//! and dilute-rank study drivers.

mod common;

use common::{random_distinct_spectrum, random_low_rank_nonneg, rng};
use hciz::asymptotics::{
    convergence_study, dilute_rank_limit, lhs_scaled_log, rhs_f_average, sandwich_bounds, Method,
    PrefactorMode, RankRule,
};
use hciz::exact::hciz_exact_auto;
use hciz::mc::{haar_sample, HaarMatrix};
use hciz::measures::{sample_spectrum, trim_spectrum, SpectralMeasure, TrimSide};
use hciz::transforms::{f_beta, BetaClass};
use hciz::{Error, Spectrum};
use nalgebra::{DMatrix, DVector};
use rand::RngCore;

const EXACT: Method = Method::Exact {
    precision_bits: 256,
};

#[test]
fn trimmed_spectra_bracket_corner_eigenvalues() {
    // Cauchy interlacing: the (n−1)-corner of Q·diag(b)·Qᵀ has eigenvalues
    // between the upper and lower trims of b, entrywise. The sandwich
    // construction rests on exactly this.
    let mut r = rng(301);
    for _ in 0..30 {
        let n = 3 + (r.next_u64() % 4) as usize;
        let b = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let q = match haar_sample(BetaClass::Orthogonal, n, &mut r).unwrap() {
            HaarMatrix::Real(q) => q,
            _ => unreachable!("β = 1 samples are real"),
        };
        let d = DMatrix::from_diagonal(&DVector::from_vec(b.values().to_vec()));
        let h = &q * d * q.transpose();
        let corner = h.view((0, 0), (n - 1, n - 1)).into_owned();
        let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(corner)
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let lower = trim_spectrum(&b, 2, TrimSide::Lower).unwrap();
        let upper = trim_spectrum(&b, 2, TrimSide::Upper).unwrap();
        for (i, ((&lo, &e), &up)) in lower
            .values()
            .iter()
            .zip(&eig)
            .zip(upper.values())
            .enumerate()
        {
            assert!(
                lo <= e + 1e-10 && e <= up + 1e-10,
                "interlacing violated at position {i}: {lo} ≤ {e} ≤ {up} fails"
            );
        }
    }
}

#[test]
fn sandwich_brackets_the_exact_value() {
    let mut r = rng(302);
    for trial in 0..50 {
        let n = 3 + (r.next_u64() % 4) as usize;
        let m = 1 + (r.next_u64() % 3) as usize;
        let a = random_low_rank_nonneg(&mut r, n, m.min(n));
        let b = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let exact = hciz_exact_auto(&a, &b, 256).unwrap().log_abs();
        let s = sandwich_bounds(&a, &b, BetaClass::Unitary, &EXACT, 0).unwrap();
        assert!(
            s.lower.log_abs() <= exact + 1e-9,
            "trial {trial}: lower {} > exact {exact}",
            s.lower.log_abs()
        );
        assert!(
            exact <= s.upper.log_abs() + 1e-9,
            "trial {trial}: exact {exact} > upper {}",
            s.upper.log_abs()
        );
        assert_eq!(s.stderr_lower, 0.0);
        assert_eq!(s.stderr_upper, 0.0);
        // The shift is whatever makes b nonnegative.
        assert_eq!(s.shift, (-b.min()).max(0.0));
    }
}

#[test]
fn sandwich_handles_repeated_b_via_confluent_fallback() {
    // Quantile samples of atomic measures carry exact repeats, which the
    // trimmed sub-spectra inherit; the factor evaluation must fall back to
    // the confluent route and still bracket correctly.
    let nu = SpectralMeasure::atomic(vec![0.1, 0.8], vec![0.5, 0.5]).unwrap();
    let b = sample_spectrum(&nu, 6, 0).unwrap();
    assert!(b.min_rel_gap() == 0.0, "repeats expected");
    let a = Spectrum::rank_perturbation(0.7, 2, 6).unwrap();
    let exact = hciz_exact_auto(&a, &b, 256).unwrap().log_abs();
    let s = sandwich_bounds(&a, &b, BetaClass::Unitary, &EXACT, 0).unwrap();
    assert!(s.lower.log_abs() <= exact + 1e-9 && exact <= s.upper.log_abs() + 1e-9);
}

#[test]
fn sandwich_mc_brackets_within_noise() {
    let mut r = rng(303);
    let n = 5;
    let a = random_low_rank_nonneg(&mut r, n, 2);
    let b = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
    let exact = hciz_exact_auto(&a, &b, 256).unwrap().log_abs();
    let mc = Method::Mc {
        samples: 20_000,
        chunks: 8,
    };
    let s = sandwich_bounds(&a, &b, BetaClass::Unitary, &mc, 11).unwrap();
    assert!(s.stderr_lower > 0.0 && s.stderr_upper > 0.0);
    assert!(
        s.lower.log_abs() - 4.0 * s.stderr_lower <= exact,
        "lower {} (se {}) vs exact {exact}",
        s.lower.log_abs(),
        s.stderr_lower
    );
    assert!(
        exact <= s.upper.log_abs() + 4.0 * s.stderr_upper,
        "upper {} (se {}) vs exact {exact}",
        s.upper.log_abs(),
        s.stderr_upper
    );
}

#[test]
fn sandwich_rejects_unsupported_requests() {
    let a = Spectrum::new(vec![0.5, -0.1, 0.0]).unwrap();
    let b = Spectrum::new(vec![1.0, 0.3, -0.4]).unwrap();
    assert!(matches!(
        sandwich_bounds(&a, &b, BetaClass::Unitary, &EXACT, 0),
        Err(Error::NegativePerturbation(_))
    ));
    let a2 = Spectrum::new(vec![0.5, 0.2, 0.0, 0.0]).unwrap();
    let b4 = Spectrum::new(vec![1.0, 0.5, 0.2, -0.1]).unwrap();
    let mc = Method::Mc {
        samples: 100,
        chunks: 1,
    };
    assert!(matches!(
        sandwich_bounds(&a2, &b4, BetaClass::Symplectic, &mc, 0),
        Err(Error::UnsupportedMethod { .. })
    ));
    // Rank one is fine for β = 4 (the single factor keeps the dimension).
    let a1 = Spectrum::rank_perturbation(0.5, 1, 4).unwrap();
    assert!(sandwich_bounds(&a1, &b4, BetaClass::Symplectic, &mc, 0).is_ok());
}

#[test]
fn convergence_study_tightens_along_the_ladder() {
    let m = SpectralMeasure::uniform(0.0, 1.0).unwrap();
    let report = convergence_study(
        &m,
        RankRule::Cbrt,
        0.5,
        &[8, 16],
        BetaClass::Unitary,
        &EXACT,
        0,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].m, 2);
    assert_eq!(report.rows[1].m, 3);
    assert!(report.monotone(), "gap 8 → 16 should shrink: {:?}", report.rows);
    for row in &report.rows {
        assert_eq!(row.method, "exact");
        assert!(row.stderr.is_none());
        let (lower, upper) = (row.lower.unwrap(), row.upper.unwrap());
        let unscaled = row.lhs * (row.n * row.m) as f64;
        assert!(
            lower <= unscaled + 1e-9 && unscaled <= upper + 1e-9,
            "row bounds violated: {lower} ≤ {unscaled} ≤ {upper}"
        );
    }
    assert_eq!(report.metadata["study"], "converge");
    assert_eq!(report.metadata["rank_rule"], "cbrt");
}

#[test]
fn convergence_study_runs_under_monte_carlo() {
    let m = SpectralMeasure::semicircle(0.0, 1.0).unwrap();
    let method = Method::Mc {
        samples: 2_000,
        chunks: 4,
    };
    let report = convergence_study(
        &m,
        RankRule::One,
        0.4,
        &[4, 8],
        BetaClass::Orthogonal,
        &method,
        5,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert_eq!(row.method, "mc");
        assert!(row.stderr.unwrap() > 0.0);
        assert!(row.lhs.is_finite() && row.gap.is_finite());
        assert!(row.lower.is_some() && row.upper.is_some());
    }
}

#[test]
fn dilute_study_orders_rows_by_descending_fraction() {
    let nu = SpectralMeasure::dirac(0.5);
    let mu = SpectralMeasure::uniform(0.0, 1.0).unwrap();
    let report = dilute_rank_limit(
        &nu,
        &mu,
        &[0.25, 0.5],
        16,
        BetaClass::Unitary,
        &EXACT,
        0,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].a, Some(0.5));
    assert_eq!(report.rows[1].a, Some(0.25));
    assert_eq!(report.rows[0].m, 8);
    assert_eq!(report.rows[1].m, 4);
    // The common target is ∫f dν = f(1/2).
    let f_half = f_beta(&mu, 0.5, BetaClass::Unitary).unwrap();
    for row in &report.rows {
        assert!((row.rhs - f_half).abs() < 1e-12);
        assert!(row.gap < 0.1, "gap {} unexpectedly large", row.gap);
    }
    assert_eq!(report.metadata["study"], "dilute");
}

#[test]
fn dilute_study_validates_the_fraction_grid() {
    let nu = SpectralMeasure::dirac(0.5);
    let mu = SpectralMeasure::uniform(0.0, 1.0).unwrap();
    assert!(matches!(
        dilute_rank_limit(&nu, &mu, &[1.5], 16, BetaClass::Unitary, &EXACT, 0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        dilute_rank_limit(&nu, &mu, &[0.01], 16, BetaClass::Unitary, &EXACT, 0),
        Err(Error::DiluteResolution { n: 16, .. })
    ));
    assert!(matches!(
        dilute_rank_limit(&nu, &mu, &[], 16, BetaClass::Unitary, &EXACT, 0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn rhs_average_matches_direct_sum_and_beta_half_prefactor() {
    let m = SpectralMeasure::uniform(0.0, 1.0).unwrap();
    let a = Spectrum::new(vec![0.5, 0.5, 0.3, 0.0, 0.0]).unwrap();
    let direct = (2.0 * f_beta(&m, 0.5, BetaClass::Orthogonal).unwrap()
        + f_beta(&m, 0.3, BetaClass::Orthogonal).unwrap())
        / 3.0;
    let avg = rhs_f_average(&a, &m, BetaClass::Orthogonal, PrefactorMode::Default).unwrap();
    assert!((avg - direct).abs() < 1e-12);
    let halved = rhs_f_average(&a, &m, BetaClass::Orthogonal, PrefactorMode::BetaHalf).unwrap();
    assert!((halved - 0.5 * direct).abs() < 1e-12);
    // At β = 2 the two modes coincide.
    let d2 = rhs_f_average(&a, &m, BetaClass::Unitary, PrefactorMode::Default).unwrap();
    let p2 = rhs_f_average(&a, &m, BetaClass::Unitary, PrefactorMode::BetaHalf).unwrap();
    assert_eq!(d2, p2);
}

#[test]
fn lhs_scaling_and_error_paths() {
    let b = Spectrum::new(vec![1.0, 0.4, -0.2]).unwrap();
    let zero = Spectrum::new(vec![0.0; 3]).unwrap();
    assert!(matches!(
        lhs_scaled_log(&zero, &b, BetaClass::Unitary, &EXACT, 0),
        Err(Error::ZeroRank)
    ));
    assert!(matches!(
        lhs_scaled_log(&b, &b, BetaClass::Orthogonal, &EXACT, 0),
        Err(Error::UnsupportedMethod { .. })
    ));
    // Scalar sanity: rank-one a in dimension 3 divides the log by 3·1.
    let a = Spectrum::rank_perturbation(0.7, 1, 3).unwrap();
    let (lhs, se) = lhs_scaled_log(&a, &b, BetaClass::Unitary, &EXACT, 0).unwrap();
    let log_i = hciz_exact_auto(&a, &b, 256).unwrap().log_abs();
    assert!((lhs - log_i / 3.0).abs() < 1e-12);
    assert_eq!(se, 0.0);
}

#[test]
fn report_rows_serialize_with_stable_field_names() {
    let m = SpectralMeasure::uniform(0.0, 1.0).unwrap();
    let report = convergence_study(
        &m,
        RankRule::One,
        0.5,
        &[4],
        BetaClass::Unitary,
        &EXACT,
        0,
    )
    .unwrap();
    let v = serde_json::to_value(&report.rows[0]).unwrap();
    for key in ["n", "m", "lhs", "rhs", "gap", "lower", "upper", "stderr", "method"] {
        assert!(v.get(key).is_some(), "missing field {key}");
    }
    assert!(v.get("a").is_none(), "convergence rows omit the fraction");
    let nu = SpectralMeasure::dirac(0.5);
    let dilute = dilute_rank_limit(&nu, &m, &[0.5], 8, BetaClass::Unitary, &EXACT, 0).unwrap();
    let v = serde_json::to_value(&dilute.rows[0]).unwrap();
    assert_eq!(v["a"], 0.5);
}
