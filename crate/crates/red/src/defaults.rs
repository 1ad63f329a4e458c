//! Central defaults for every tunable knob in the pipeline.
//!
//! Each constant is overridable by a CLI flag or an explicit function
//! argument; nothing else in the crate hard-codes these values. Logarithms
//! are natural (base e) throughout the library: polynomial predictions are
//! invariant under a log-base change, the triangulated interpolant is not,
//! so the base is fixed here once.

/// Two-sided significance level for the energy-stability confidence interval.
pub const STABILITY_ALPHA: f64 = 0.01;

/// Maximum relative confidence-interval half-width accepted as "stable".
pub const STABILITY_BETA: f64 = 0.02;

/// Cells per axis for dominance grids.
pub const GRID_CELLS: usize = 200;

/// Tie tolerance for rate-energy dominance (dB of predicted distortion).
pub const TIE_TOL_RE: f64 = 1e-6;

/// Tie tolerance for energy-distortion dominance (log-rate units).
pub const TIE_TOL_ED: f64 = 1e-6;

/// Dominance margin below which a configuration is not reported as occluded.
/// Zero means any strict dominance counts.
pub const OCCLUSION_MARGIN: f64 = 0.0;

/// Distortion tolerance for rate inversion (dB).
pub const INVERSION_TOL: f64 = 1e-8;

/// Sample count for the pre-inversion monotonicity scan.
pub const MONOTONE_SAMPLES: usize = 64;

/// Largest tolerated decrease between consecutive monotonicity samples.
pub const MONOTONE_EPS: f64 = 1e-9;

/// Bisection iteration cap; exceeding it is a convergence failure, never a
/// silent approximate return.
pub const BISECT_MAX_ITERS: usize = 200;

/// Condition-estimate threshold beyond which a design matrix is treated as
/// rank deficient.
pub const MAX_CONDITION: f64 = 1e12;
