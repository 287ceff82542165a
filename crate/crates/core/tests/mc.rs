//! Integration tests for Haar sampling and Monte Carlo estimation:
//! statistical agreement with exact values, group-theoretic exactness
//! checks, and scheduling-independent reproducibility.

mod common;

use common::{random_distinct_spectrum, rng};
use hciz::exact::{hciz_det, hciz_rank_one};
use hciz::mc::{haar_sample, hciz_mc_estimate, trace_form, McParams};
use hciz::transforms::BetaClass;
use hciz::{Error, Spectrum};

#[test]
fn estimates_agree_with_exact_unitary_values() {
    let mut r = rng(201);
    for trial in 0..5u64 {
        let n = 2 + (trial % 2) as usize;
        let a = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let b = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let exact = hciz_det(&a, &b).unwrap().log_abs();
        let params = McParams::new(BetaClass::Unitary, 20_000, 900 + trial, 8).unwrap();
        let est = hciz_mc_estimate(&a, &b, &params).unwrap();
        let dev = (est.log_mean - exact).abs();
        assert!(
            dev < 4.0 * est.stderr,
            "trial {trial}: deviation {dev} vs stderr {}",
            est.stderr
        );
    }
}

#[test]
fn beta_one_estimate_matches_bessel_oracle() {
    // N = 2, A = diag(1, 0), B = diag(1, 0), β = 1: the exponent is
    // 2·cos²θ for a uniform angle, so I = e·I₀(1) with the modified
    // Bessel function I₀(x) = Σ (x/2)^{2k}/(k!)².
    let i0_of_1: f64 = (0..20)
        .map(|k| {
            let kf: f64 = (1..=k).product::<u64>() as f64;
            0.25f64.powi(k as i32) / (kf * kf)
        })
        .sum();
    let exact = 1.0 + i0_of_1.ln();
    let a = Spectrum::new(vec![1.0, 0.0]).unwrap();
    let params = McParams::new(BetaClass::Orthogonal, 200_000, 31, 16).unwrap();
    let est = hciz_mc_estimate(&a, &a, &params).unwrap();
    let dev = (est.log_mean - exact).abs();
    assert!(
        dev < 4.0 * est.stderr,
        "deviation {dev} vs stderr {}",
        est.stderr
    );
}

#[test]
fn estimate_matches_rank_one_formula() {
    let mut r = rng(202);
    let b = random_distinct_spectrum(&mut r, 3, -1.0, 1.0);
    let a = Spectrum::rank_perturbation(0.7, 1, 3).unwrap();
    let exact = hciz_rank_one(0.7, &b).unwrap().log_abs();
    let params = McParams::new(BetaClass::Unitary, 40_000, 7, 8).unwrap();
    let est = hciz_mc_estimate(&a, &b, &params).unwrap();
    let dev = (est.log_mean - exact).abs();
    assert!(dev < 4.0 * est.stderr, "deviation {dev}");
}

#[test]
fn scalar_b_makes_every_sample_exact() {
    // B = cI forces Tr(UAU*B) = c·Tr A by unitarity, for every sample and
    // every symmetry class; the estimator returns the deterministic value.
    let mut r = rng(203);
    for beta in [BetaClass::Orthogonal, BetaClass::Unitary, BetaClass::Symplectic] {
        let n = 4;
        let a = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let c = 0.6;
        let b = Spectrum::new(vec![c; n]).unwrap();
        let params = McParams::new(beta, 100, 5, 4).unwrap();
        let est = hciz_mc_estimate(&a, &b, &params).unwrap();
        let expect = n as f64 * c * a.sum();
        assert!(
            (est.log_mean - expect).abs() < 1e-10,
            "β = {beta}: {} vs {expect}",
            est.log_mean
        );
        assert!(est.stderr < 1e-7, "β = {beta}: stderr {}", est.stderr);
    }
}

#[test]
fn haar_samples_are_unitary_and_symplectic() {
    let mut r = rng(204);
    for beta in [BetaClass::Orthogonal, BetaClass::Unitary, BetaClass::Symplectic] {
        for n in [2usize, 6, 16] {
            let u = haar_sample(beta, n, &mut r).unwrap();
            assert_eq!(u.dim(), n);
            assert_eq!(u.beta(), beta);
            assert!(
                u.unitarity_defect() < 1e-12,
                "β = {beta}, n = {n}: defect {}",
                u.unitarity_defect()
            );
            match u.symplectic_defect() {
                Some(d) => {
                    assert_eq!(beta, BetaClass::Symplectic);
                    assert!(d < 1e-12, "symplectic defect {d}");
                }
                None => assert_ne!(beta, BetaClass::Symplectic),
            }
        }
    }
    assert!(matches!(
        haar_sample(BetaClass::Symplectic, 3, &mut r),
        Err(Error::OddSymplecticDimension(3))
    ));
}

#[test]
fn first_column_moment_matches_haar_theory() {
    // E|U_11|² = 1/N for every class (columns are exchangeable unit
    // vectors). Deterministic given the seed; tolerance is ~4 standard
    // errors of the 1e5-sample mean.
    let n = 4;
    for beta in [BetaClass::Orthogonal, BetaClass::Unitary] {
        let mut r = rng(205);
        let mut sum = 0.0;
        let samples = 100_000;
        for _ in 0..samples {
            let u = haar_sample(beta, n, &mut r).unwrap();
            sum += u.abs2(0, 0);
        }
        let mean = sum / samples as f64;
        assert!(
            (mean - 0.25).abs() < 3e-3,
            "β = {beta}: E|U11|² = {mean}"
        );
    }
}

#[test]
fn trace_form_is_pathwise_monotone_for_nonnegative_b() {
    // The coefficient of a_j in Tr(UAU*B) is Σ_i b_i|U_ij|² ≥ 0 when
    // b ≥ 0, so bumping one a-eigenvalue can only raise the trace form —
    // sample by sample, not just on average.
    let mut r = rng(206);
    for beta in [BetaClass::Orthogonal, BetaClass::Unitary, BetaClass::Symplectic] {
        let n = 4;
        let a = random_distinct_spectrum(&mut r, n, -1.0, 1.0);
        let b = random_distinct_spectrum(&mut r, n, 0.0, 1.0);
        let mut bumped: Vec<f64> = a.values().to_vec();
        bumped[1] += 0.3;
        let a_up = Spectrum::new(bumped).unwrap();
        for _ in 0..200 {
            let u = haar_sample(beta, n, &mut r).unwrap();
            let before = trace_form(&u, &a, &b).unwrap();
            let after = trace_form(&u, &a_up, &b).unwrap();
            assert!(after >= before - 1e-12, "β = {beta}: {after} < {before}");
        }
    }
}

#[test]
fn estimates_are_bitwise_reproducible_across_thread_counts() {
    let mut r = rng(207);
    let a = random_distinct_spectrum(&mut r, 6, -1.0, 1.0);
    let b = random_distinct_spectrum(&mut r, 6, -1.0, 1.0);
    let params = McParams::new(BetaClass::Unitary, 5_000, 99, 16).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| hciz_mc_estimate(&a, &b, &params).unwrap())
    };
    let one = run(1);
    let eight = run(8);
    assert_eq!(one.log_mean.to_bits(), eight.log_mean.to_bits());
    assert_eq!(one.stderr.to_bits(), eight.stderr.to_bits());
    // Changing the chunk count is allowed to change the value…
    let other = McParams::new(BetaClass::Unitary, 5_000, 99, 7).unwrap();
    let rechunked = hciz_mc_estimate(&a, &b, &other).unwrap();
    assert_ne!(one.log_mean.to_bits(), rechunked.log_mean.to_bits());
    // …but the same plan on the same thread pool reproduces exactly.
    let again = run(8);
    assert_eq!(eight.log_mean.to_bits(), again.log_mean.to_bits());
}

#[test]
fn zero_perturbation_short_circuits() {
    let a = Spectrum::new(vec![0.0; 5]).unwrap();
    let b = Spectrum::new(vec![1.0, 0.5, 0.0, -0.5, -1.0]).unwrap();
    let params = McParams::new(BetaClass::Orthogonal, 10, 0, 1).unwrap();
    let est = hciz_mc_estimate(&a, &b, &params).unwrap();
    assert_eq!(est.log_mean, 0.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn invalid_plans_are_rejected() {
    assert!(matches!(
        McParams::new(BetaClass::Unitary, 1, 0, 1),
        Err(Error::TooFewSamples(1))
    ));
    assert!(matches!(
        McParams::new(BetaClass::Unitary, 10, 0, 0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        McParams::new(BetaClass::Unitary, 10, 0, 11),
        Err(Error::InvalidArgument(_))
    ));
    let a = Spectrum::new(vec![1.0, 0.0, -1.0]).unwrap();
    let params = McParams::new(BetaClass::Symplectic, 10, 0, 1).unwrap();
    assert!(matches!(
        hciz_mc_estimate(&a, &a, &params),
        Err(Error::OddSymplecticDimension(3))
    ));
}
