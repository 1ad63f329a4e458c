//! Dense linear least squares via Householder QR.
//!
//! Columns are equilibrated to unit maximum magnitude before factorization,
//! which keeps the diagonal-ratio condition estimate meaningful when basis
//! columns live on very different scales (1 vs r^3). Solutions are rejected
//! as rank deficient when the estimate exceeds [`MAX_CONDITION`].

use crate::defaults::MAX_CONDITION;
use crate::error::{RedError, Result};

/// Row-major design matrix for an overdetermined linear system.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    /// Per-column maximum absolute value; strictly positive.
    column_scales: Vec<f64>,
}

impl DesignMatrix {
    /// Wraps `entries` (row-major, `rows * cols` values) and computes the
    /// column scales. A column of zeros has no scale and is reported as rank
    /// deficient immediately.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(RedError::DimensionMismatch {
                detail: format!(
                    "{} entries for a {rows} x {cols} design matrix",
                    entries.len()
                ),
            });
        }
        for (i, row) in entries.chunks(cols).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(RedError::NonFiniteCoordinate { index: i });
            }
        }
        let mut column_scales = vec![0.0_f64; cols];
        for row in entries.chunks(cols) {
            for (s, v) in column_scales.iter_mut().zip(row) {
                *s = s.max(v.abs());
            }
        }
        if column_scales.contains(&0.0) {
            return Err(RedError::RankDeficient {
                cond: f64::INFINITY,
            });
        }
        Ok(DesignMatrix {
            rows,
            cols,
            entries,
            column_scales,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }
}

/// A least-squares solution with its conditioning diagnostic.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    /// Coefficients in the original (unscaled) column basis.
    pub coefficients: Vec<f64>,
    /// Ratio of the largest to smallest |R| diagonal of the equilibrated
    /// factorization; near 1 for well-posed systems.
    pub condition: f64,
}

/// Solves `min ||A x - y||_2` for x.
///
/// Requires at least as many rows as columns. Fails with
/// [`RedError::RankDeficient`] when the equilibrated R factor has a diagonal
/// ratio above [`MAX_CONDITION`], which covers exactly dependent columns as
/// well as numerically indistinguishable ones.
pub fn solve_least_squares(design: &DesignMatrix, rhs: &[f64]) -> Result<LstsqSolution> {
    let n = design.rows;
    let k = design.cols;
    if rhs.len() != n {
        return Err(RedError::DimensionMismatch {
            detail: format!("{} right-hand values for {n} rows", rhs.len()),
        });
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(RedError::NonFiniteCoordinate {
            index: rhs.iter().position(|v| !v.is_finite()).unwrap_or(0),
        });
    }
    if n < k {
        return Err(RedError::UnderdeterminedSystem { rows: n, cols: k });
    }

    // Equilibrated working copy, reduced in place to R.
    let mut a = vec![0.0_f64; n * k];
    for i in 0..n {
        for j in 0..k {
            a[i * k + j] = design.entry(i, j) / design.column_scales[j];
        }
    }
    let mut y = rhs.to_vec();
    let mut v = vec![0.0_f64; n];

    for col in 0..k {
        let norm = a[col * k + col..]
            .iter()
            .step_by(k)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(RedError::RankDeficient {
                cond: f64::INFINITY,
            });
        }
        let pivot = a[col * k + col];
        let alpha = if pivot > 0.0 { -norm } else { norm };
        for i in col..n {
            v[i] = a[i * k + col];
        }
        v[col] -= alpha;
        let beta: f64 = v[col..n].iter().map(|x| x * x).sum();
        if beta > 0.0 {
            for target in col + 1..k {
                let dot: f64 = (col..n).map(|i| v[i] * a[i * k + target]).sum();
                let factor = 2.0 * dot / beta;
                for i in col..n {
                    a[i * k + target] -= factor * v[i];
                }
            }
            let dot: f64 = (col..n).map(|i| v[i] * y[i]).sum();
            let factor = 2.0 * dot / beta;
            for i in col..n {
                y[i] -= factor * v[i];
            }
        }
        a[col * k + col] = alpha;
        for i in col + 1..n {
            a[i * k + col] = 0.0;
        }
    }

    let diag: Vec<f64> = (0..k).map(|j| a[j * k + j].abs()).collect();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0_f64);
    for &d in &diag {
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let condition = dmax / dmin;
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(RedError::RankDeficient { cond: condition });
    }

    let mut x = vec![0.0_f64; k];
    for j in (0..k).rev() {
        let tail: f64 = (j + 1..k).map(|l| a[j * k + l] * x[l]).sum();
        x[j] = (y[j] - tail) / a[j * k + j];
    }
    for (xj, scale) in x.iter_mut().zip(&design.column_scales) {
        *xj /= scale;
    }
    Ok(LstsqSolution {
        coefficients: x,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn line_fit_matches_normal_equations() {
        // Hand-solved via the normal equations: intercept 1/2, slope 1.
        let design = DesignMatrix::new(
            4,
            2,
            vec![1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0],
        )
        .unwrap();
        let sol = solve_least_squares(&design, &[1.0, 2.0, 0.0, 5.0]).unwrap();
        assert!((sol.coefficients[0] - 0.5).abs() <= 1e-12);
        assert!((sol.coefficients[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn exact_system_is_reproduced() {
        // Square full-rank system: the residual must vanish.
        let design = DesignMatrix::new(
            3,
            3,
            vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0],
        )
        .unwrap();
        let sol = solve_least_squares(&design, &[8.0, -11.0, -3.0]).unwrap();
        let expected = [2.0, 3.0, -1.0];
        for (got, want) in sol.coefficients.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(6..40);
            let k = rng.gen_range(1..6);
            let entries: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let design = match DesignMatrix::new(n, k, entries) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let sol = match solve_least_squares(&design, &rhs) {
                Ok(s) => s,
                Err(RedError::RankDeficient { .. }) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            };
            let residual: Vec<f64> = (0..n)
                .map(|i| {
                    let fit: f64 = (0..k).map(|j| design.entry(i, j) * sol.coefficients[j]).sum();
                    rhs[i] - fit
                })
                .collect();
            for j in 0..k {
                let dot: f64 = (0..n).map(|i| design.entry(i, j) * residual[i]).sum();
                let col_norm: f64 = (0..n).map(|i| design.entry(i, j).powi(2)).sum::<f64>().sqrt();
                let res_norm: f64 = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
                assert!(
                    dot.abs() <= 1e-9 * (1.0 + col_norm * res_norm),
                    "residual not orthogonal to column {j}: {dot}"
                );
            }
        }
    }

    #[test]
    fn column_scaling_does_not_change_predictions() {
        // Same model expressed with a column blown up by 1e9: fitted values
        // must agree even though the raw coefficient shrinks accordingly.
        let xs = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        let ys = [1.1, 1.9, 3.2, 3.8, 5.1, 5.9];
        let plain: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let blown: Vec<f64> = xs.iter().flat_map(|&x| [1.0, 1e9 * x]).collect();
        let d1 = DesignMatrix::new(6, 2, plain).unwrap();
        let d2 = DesignMatrix::new(6, 2, blown).unwrap();
        let s1 = solve_least_squares(&d1, &ys).unwrap();
        let s2 = solve_least_squares(&d2, &ys).unwrap();
        for &x in &xs {
            let p1 = s1.coefficients[0] + s1.coefficients[1] * x;
            let p2 = s2.coefficients[0] + s2.coefficients[1] * (1e9 * x);
            assert!((p1 - p2).abs() <= 1e-9, "{p1} vs {p2}");
        }
        assert!(s2.condition < 10.0, "equilibration keeps conditioning tame");
    }

    #[test]
    fn dependent_columns_are_rejected() {
        // Second column is exactly three times the first.
        let entries = vec![1.0, 3.0, 2.0, 6.0, -1.0, -3.0, 4.0, 12.0];
        let design = DesignMatrix::new(4, 2, entries).unwrap();
        match solve_least_squares(&design, &[1.0, 2.0, 3.0, 4.0]) {
            Err(RedError::RankDeficient { cond }) => assert!(cond > 1e12 || !cond.is_finite()),
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn zero_column_is_rejected_at_construction() {
        assert!(matches!(
            DesignMatrix::new(2, 2, vec![1.0, 0.0, 2.0, 0.0]),
            Err(RedError::RankDeficient { .. })
        ));
    }

    #[test]
    fn shape_errors_are_reported() {
        assert!(matches!(
            DesignMatrix::new(2, 2, vec![1.0, 2.0, 3.0]),
            Err(RedError::DimensionMismatch { .. })
        ));
        let design = DesignMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(matches!(
            solve_least_squares(&design, &[1.0, 2.0]),
            Err(RedError::UnderdeterminedSystem { rows: 2, cols: 3 })
        ));
        let square = DesignMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            solve_least_squares(&square, &[1.0]),
            Err(RedError::DimensionMismatch { .. })
        ));
    }
}
