//! Fit-quality metrics — MAPE per point class, SSE, R² — and the evaluation
//! table across encoders and methods.

use crate::error::{RedError, Result};
use crate::fitting::{fit_surface, Method, Surface};
use crate::ingest::{PointSet, RedPoint};

/// One evaluation-table row: how well `method` fits `encoder_id`'s data.
///
/// Metric values are means across the encoder's sequences; the point counts
/// are totals. `mape_non_supporting` is absent when no sequence contributed
/// non-supporting points.
#[derive(Debug, Clone, PartialEq)]
pub struct FitMetrics {
    pub encoder_id: String,
    pub method: Method,
    /// Percent; in-sample (scored on the same points the fit used).
    pub mape_supporting: f64,
    /// Percent; held-out configurations.
    pub mape_non_supporting: Option<f64>,
    /// Squared dB, on supporting points.
    pub sse: f64,
    /// On supporting points; 1 for an interpolating fit.
    pub r_square: f64,
    pub n_supporting: usize,
    pub n_non_supporting: usize,
}

/// Evaluates the surface at every point, tagging failures with the point
/// that caused them.
fn predictions(surface: &Surface, points: &[RedPoint]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(RedError::EmptyPointList);
    }
    let mut hint = 0;
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            surface
                .eval_with_hint(p.r, p.e, &mut hint)
                .map(|ev| ev.value)
                .map_err(|err| RedError::PointEvaluation {
                    index,
                    r: p.r,
                    e: p.e,
                    source: Box::new(err),
                })
        })
        .collect()
}

/// Mean absolute percentage error, 100 · (1/N) · Σ |d̂ᵢ − dᵢ| / |dᵢ|.
pub fn mape(surface: &Surface, points: &[RedPoint]) -> Result<f64> {
    let predicted = predictions(surface, points)?;
    if let Some(index) = points.iter().position(|p| p.d == 0.0) {
        return Err(RedError::ZeroDistortion { index });
    }
    let total: f64 = predicted
        .iter()
        .zip(points)
        .map(|(d_hat, p)| (d_hat - p.d).abs() / p.d.abs())
        .sum();
    Ok(100.0 * total / points.len() as f64)
}

/// Sum of squared prediction errors, Σ (d̂ᵢ − dᵢ)².
pub fn sse(surface: &Surface, points: &[RedPoint]) -> Result<f64> {
    let predicted = predictions(surface, points)?;
    Ok(predicted
        .iter()
        .zip(points)
        .map(|(d_hat, p)| (d_hat - p.d) * (d_hat - p.d))
        .sum())
}

/// Coefficient of determination, 1 − SSE/SST. Exactly 1 for a perfect fit;
/// undefined (and an error) when all distortions are equal.
pub fn r_square(surface: &Surface, points: &[RedPoint]) -> Result<f64> {
    let residual = sse(surface, points)?;
    let mean = points.iter().map(|p| p.d).sum::<f64>() / points.len() as f64;
    let total: f64 = points.iter().map(|p| (p.d - mean) * (p.d - mean)).sum();
    if total <= 0.0 {
        return Err(RedError::ZeroVariance);
    }
    Ok(1.0 - residual / total)
}

/// Fits and scores every (encoder, method) pair.
///
/// Each point set is fitted and scored on its own; rows for encoders that
/// appear with several sequences hold the unweighted arithmetic mean of the
/// per-sequence metric values and summed point counts. Output order follows
/// first appearance of each encoder, then `methods` order.
pub fn evaluate_all(pointsets: &[PointSet], methods: &[Method]) -> Result<Vec<FitMetrics>> {
    if pointsets.is_empty() {
        return Err(RedError::EmptyPointList);
    }
    let mut encoders: Vec<&str> = Vec::new();
    for ps in pointsets {
        if !encoders.iter().any(|e| *e == ps.encoder_id) {
            encoders.push(&ps.encoder_id);
        }
    }

    let mut out = Vec::new();
    for encoder in &encoders {
        let sets: Vec<&PointSet> = pointsets
            .iter()
            .filter(|ps| ps.encoder_id == *encoder)
            .collect();
        for &method in methods {
            let mut mape_s_sum = 0.0;
            let mut sse_sum = 0.0;
            let mut rsq_sum = 0.0;
            let mut mape_ns = Vec::new();
            let mut n_s = 0;
            let mut n_ns = 0;
            for ps in &sets {
                let tag = |source: RedError| RedError::Scoring {
                    encoder: ps.encoder_id.clone(),
                    sequence: ps.sequence_name.clone(),
                    method: method.name(),
                    source: Box::new(source),
                };
                let surface = fit_surface(ps, method).map_err(tag)?;
                let sup: Vec<RedPoint> = ps.supporting().cloned().collect();
                let non: Vec<RedPoint> = ps.non_supporting().cloned().collect();
                mape_s_sum += mape(&surface, &sup).map_err(tag)?;
                sse_sum += sse(&surface, &sup).map_err(tag)?;
                rsq_sum += r_square(&surface, &sup).map_err(tag)?;
                if !non.is_empty() {
                    mape_ns.push(mape(&surface, &non).map_err(tag)?);
                }
                n_s += sup.len();
                n_ns += non.len();
            }
            let seqs = sets.len() as f64;
            out.push(FitMetrics {
                encoder_id: encoder.to_string(),
                method,
                mape_supporting: mape_s_sum / seqs,
                mape_non_supporting: if mape_ns.is_empty() {
                    None
                } else {
                    Some(mape_ns.iter().sum::<f64>() / mape_ns.len() as f64)
                },
                sse: sse_sum / seqs,
                r_square: rsq_sum / seqs,
                n_supporting: n_s,
                n_non_supporting: n_ns,
            });
        }
    }
    Ok(out)
}

/// Renders the evaluation table as CSV. Absent values print as `-`.
pub fn write_report(rows: &[FitMetrics]) -> String {
    write_report_classes(rows, true, true)
}

/// Report emission with point classes masked out: a suppressed class keeps
/// its columns (the schema is fixed) but prints `-` in the MAPE cell.
pub fn write_report_classes(rows: &[FitMetrics], show_s: bool, show_ns: bool) -> String {
    let absent = || "-".to_string();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "encoder",
        "method",
        "mape_supporting_pct",
        "mape_non_supporting_pct",
        "sse",
        "r_square",
        "n_s",
        "n_ns",
    ])
    .expect("in-memory write");
    for row in rows {
        w.write_record([
            row.encoder_id.clone(),
            row.method.name().to_string(),
            if show_s {
                row.mape_supporting.to_string()
            } else {
                absent()
            },
            if show_ns {
                row.mape_non_supporting
                    .map(|v| v.to_string())
                    .unwrap_or_else(absent)
            } else {
                absent()
            },
            row.sse.to_string(),
            row.r_square.to_string(),
            row.n_supporting.to_string(),
            row.n_non_supporting.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
