//! Numerical laboratory for spherical (HCIZ-type) matrix integrals.
//!
//! The central object is the integral
//! `I_N^(β)(A, B) = ∫ exp(N · Tr(U A U* B)) dm_N^β(U)`
//! over the orthogonal (β = 1), unitary (β = 2) or compact symplectic
//! (β = 4) group equipped with Haar probability measure, where `A` and `B`
//! are real diagonal matrices. The crate provides:
//!
//! * exact evaluation for β = 2 through the Harish-Chandra determinant
//!   formula, including confluent (repeated-eigenvalue) cases via divided
//!   differences in configurable-precision arithmetic ([`exact`]);
//! * Monte Carlo estimation for all three symmetry classes with
//!   reproducible, counter-based parallel sampling ([`mc`]);
//! * the free-probability toolkit: Hilbert transform, R-transform, the
//!   branch function `v(t)` and the limit function `f^(β)` ([`transforms`]);
//! * spectral-measure machinery: empirical measures, quantile sampling,
//!   the bounded-Lipschitz metric, spectrum trimming ([`measures`]);
//! * small-rank asymptotics: scaled log values, sandwich bounds from
//!   recursive rank-one peeling, convergence and dilute-rank studies
//!   ([`asymptotics`]).
//!
//! All integral values are carried as signed log-domain scalars
//! ([`LogScalar`]) because `I_N^(β)` scales like `exp(Θ(N·M))` and
//! overflows native floats at desk scale already.

pub mod asymptotics;
pub mod bl;
pub mod error;
pub mod exact;
pub mod log_scalar;
pub mod mc;
pub mod measures;
pub mod quad;
pub mod transforms;

pub use bl::{bl_distance, bl_distance_with_grid};
pub use error::{Error, Result};
pub use log_scalar::LogScalar;
pub use measures::{
    check_spacing, empirical_measure, sample_spectrum, trim_spectrum, SpectralMeasure, Spectrum,
    TrimSide,
};
pub use transforms::{
    f_beta, f_beta_integral_form, hilbert_edges, hilbert_transform, r_transform, v_branch,
    BetaClass, Branch, HilbertEdges,
};
pub use exact::{hciz_confluent, hciz_det, hciz_exact_auto, hciz_rank_one, vandermonde_log};
pub use mc::{haar_sample, hciz_mc_estimate, trace_form, HaarMatrix, McEstimate, McParams};
pub use asymptotics::{
    convergence_study, dilute_rank_limit, lhs_scaled_log, rhs_f_average, sandwich_bounds,
    ConvergenceReport, Method, PrefactorMode, RankRule, ReportRow, SandwichBounds,
};
