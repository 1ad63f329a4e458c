//! Bracketing root search for strictly monotone 1-D slices.
//!
//! The search succeeds only when it finds an argument whose function value is
//! within `tol` of the target; it never settles for a narrow bracket with a
//! poor residual. On a continuous slice the residual shrinks with the
//! bracket, so the iteration cap is generous headroom, not a stop criterion.

use crate::defaults::BISECT_MAX_ITERS;
use crate::error::{RedError, Result};

/// Finds `x` in `[lo, hi]` with `|f(x) - target| <= tol` by bisection.
///
/// `f(lo) - target` and `f(hi) - target` must differ in sign (a value already
/// within `tol` at an endpoint counts as a hit). Evaluation errors from `f`
/// propagate unchanged; if the cap of [`BISECT_MAX_ITERS`] halvings passes
/// without meeting the tolerance the search fails with
/// [`RedError::ConvergenceFailure`].
pub fn bisect_root<F>(mut f: F, lo: f64, hi: f64, target: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !tol.is_finite() || tol <= 0.0 {
        return Err(RedError::BadTolerance(tol));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(RedError::BadBracket { lo, hi });
    }
    let mut flo = f(lo)? - target;
    if flo.abs() <= tol {
        return Ok(lo);
    }
    let fhi = f(hi)? - target;
    if fhi.abs() <= tol {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(RedError::NoSignChange { lo, hi, target });
    }

    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid)? - target;
        if fmid.abs() <= tol {
            return Ok(mid);
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Err(RedError::ConvergenceFailure(BISECT_MAX_ITERS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let root = bisect_root(|x| Ok(x * x * x - 2.0 * x - 5.0), 2.0, 3.0, 0.0, 1e-12).unwrap();
        assert!((root - 2.094_551_481_542_326_5).abs() <= 1e-10);
        assert!((root.powi(3) - 2.0 * root - 5.0).abs() <= 1e-12);
    }

    #[test]
    fn inverts_against_nonzero_target() {
        let x = bisect_root(|x| Ok(x * x), 0.0, 5.0, 9.0, 1e-10).unwrap();
        assert!((x - 3.0).abs() <= 1e-9);
        // Decreasing slice: same machinery, opposite sign arrangement.
        let x = bisect_root(|x| Ok(10.0 - 3.0 * x), 0.0, 4.0, 4.0, 1e-10).unwrap();
        assert!((x - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn endpoint_already_within_tolerance() {
        let x = bisect_root(Ok, 1.0, 2.0, 1.0 + 1e-12, 1e-9).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        assert!(matches!(
            bisect_root(|x| Ok(x * x), 3.0, 4.0, 100.0, 1e-9),
            Err(RedError::NoSignChange { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            bisect_root(Ok, 0.0, 1.0, 0.5, 0.0),
            Err(RedError::BadTolerance(_))
        ));
        assert!(matches!(
            bisect_root(Ok, 0.0, 1.0, 0.5, -1.0),
            Err(RedError::BadTolerance(_))
        ));
        assert!(matches!(
            bisect_root(Ok, 2.0, 1.0, 0.5, 1e-9),
            Err(RedError::BadBracket { .. })
        ));
    }

    #[test]
    fn reports_convergence_failure_on_unattainable_residual() {
        // A step function crosses the target but never lands within tol of
        // it, so the search must exhaust its budget and say so.
        let mut evals = 0usize;
        let step = |x: f64| {
            Ok(if x < 0.3 { -1.0 } else { 1.0 })
        };
        let result = bisect_root(
            |x| {
                evals += 1;
                step(x)
            },
            0.0,
            1.0,
            0.0,
            0.5,
        );
        assert!(matches!(result, Err(RedError::ConvergenceFailure(n)) if n == BISECT_MAX_ITERS));
        assert_eq!(evals, BISECT_MAX_ITERS + 2);
    }

    #[test]
    fn propagates_evaluation_errors() {
        let result = bisect_root(
            |x| {
                if x > 0.6 {
                    Err(RedError::OutOfHull { x, y: 0.0 })
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            0.5,
            1e-9,
        );
        assert!(matches!(result, Err(RedError::OutOfHull { .. })));
    }
}
