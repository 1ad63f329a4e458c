//! Plane projections of fitted surfaces: per-cell encoder dominance on the
//! R-E and E-D planes, rate inversion, and occluded-configuration reports.
//!
//! Orientation is fixed to the domain's semantics: higher PSNR wins the R-E
//! plane, lower rate wins the E-D plane.

use crate::defaults;
use crate::error::{RedError, Result};
use crate::fitting::{FitDomain, Surface};
use crate::ingest::PointSet;
use crate::numerics::bisect_root;

/// Which projection of the (r, e, d) surface a grid rasterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// Rate-energy: cells over (r, e), surfaces compete on distortion.
    Re,
    /// Energy-distortion: cells over (e, d), surfaces compete on rate.
    Ed,
}

impl Plane {
    pub fn name(self) -> &'static str {
        match self {
            Plane::Re => "re",
            Plane::Ed => "ed",
        }
    }

    pub fn parse(name: &str) -> Option<Plane> {
        match name {
            "re" => Some(Plane::Re),
            "ed" => Some(Plane::Ed),
            _ => None,
        }
    }
}

/// One grid axis: `cells` equal-width cells spanning [min, max], evaluated
/// at cell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    min: f64,
    max: f64,
    cells: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, cells: usize) -> Result<AxisSpec> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(RedError::BadAxis {
                detail: format!("bounds [{min}, {max}] must be finite"),
            });
        }
        if min >= max {
            return Err(RedError::BadAxis {
                detail: format!("min {min} must lie strictly below max {max}"),
            });
        }
        if cells < 2 {
            return Err(RedError::BadAxis {
                detail: format!("need at least 2 cells, got {cells}"),
            });
        }
        Ok(AxisSpec { min, max, cells })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Center of cell `i`: min + (i + 0.5)·(max − min)/cells.
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * (self.max - self.min) / self.cells as f64
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellOutcome {
    /// Index into the grid's encoder list.
    Winner(usize),
    /// The two best candidates are within the tie tolerance.
    Tie,
    /// No surface was evaluable inside its trusted region.
    OutOfDomain,
}

/// Rasterized dominance over one plane.
///
/// Cells are stored row-major: index = y·x_cells + x. `values` carries the
/// winning quantity (best d̂ for R-E, lowest implied r for E-D) for winner
/// and tie cells, `None` where no surface applied.
#[derive(Debug, Clone)]
pub struct DominanceGrid {
    pub plane: Plane,
    pub x_axis: AxisSpec,
    pub y_axis: AxisSpec,
    pub encoder_ids: Vec<String>,
    pub cells: Vec<CellOutcome>,
    pub values: Vec<Option<f64>>,
}

impl DominanceGrid {
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.x_axis.cells + x
    }

    pub fn outcome(&self, x: usize, y: usize) -> CellOutcome {
        self.cells[self.index(x, y)]
    }

    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        self.values[self.index(x, y)]
    }

    /// Cell counts per outcome: (per-encoder wins, ties, out-of-domain).
    pub fn tally(&self) -> (Vec<usize>, usize, usize) {
        let mut wins = vec![0; self.encoder_ids.len()];
        let mut ties = 0;
        let mut out = 0;
        for cell in &self.cells {
            match cell {
                CellOutcome::Winner(k) => wins[*k] += 1,
                CellOutcome::Tie => ties += 1,
                CellOutcome::OutOfDomain => out += 1,
            }
        }
        (wins, ties, out)
    }
}

/// One dominated supporting configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionEntry {
    pub encoder_id: String,
    pub preset: String,
    pub quality: i64,
    pub occluding_encoder_id: String,
    /// dB of distortion headroom (R-E) or log-rate savings (E-D) offered by
    /// the occluder; always above the configured threshold.
    pub margin: f64,
}

/// All occluded configurations found on one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionReport {
    pub plane: Plane,
    pub entries: Vec<OcclusionEntry>,
}

/// Whether a candidate quantity improves on another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Better {
    Higher,
    Lower,
}

/// Decides one cell from the evaluable candidates, independent of grid
/// geometry: a winner must beat the runner-up by more than `tie_tol`.
fn decide_cell(
    candidates: &[(usize, f64)],
    tie_tol: f64,
    better: Better,
) -> (CellOutcome, Option<f64>) {
    let Some(&first) = candidates.first() else {
        return (CellOutcome::OutOfDomain, None);
    };
    let mut best = first;
    let mut runner_up: Option<f64> = None;
    for &(idx, value) in &candidates[1..] {
        let improves = match better {
            Better::Higher => value > best.1,
            Better::Lower => value < best.1,
        };
        if improves {
            runner_up = Some(best.1);
            best = (idx, value);
        } else if runner_up.is_none_or(|r| match better {
            Better::Higher => value > r,
            Better::Lower => value < r,
        }) {
            runner_up = Some(value);
        }
    }
    match runner_up {
        Some(second) if (best.1 - second).abs() <= tie_tol => (CellOutcome::Tie, Some(best.1)),
        _ => (CellOutcome::Winner(best.0), Some(best.1)),
    }
}

fn check_surfaces(surfaces: &[(&str, &Surface)]) -> Result<()> {
    if surfaces.is_empty() {
        return Err(RedError::TooFewEncoders(0));
    }
    Ok(())
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(RedError::BadTolerance(tol));
    }
    Ok(())
}

/// Rasterizes R-E dominance: at every cell center (r, e) the surface with
/// the highest predicted distortion wins. Surfaces that fail to evaluate or
/// leave their trusted region at a cell are excluded from that cell only.
pub fn sample_re_grid(
    surfaces: &[(&str, &Surface)],
    x_axis: &AxisSpec,
    y_axis: &AxisSpec,
    tie_tol: f64,
) -> Result<DominanceGrid> {
    check_surfaces(surfaces)?;
    check_tolerance(tie_tol)?;
    let mut cells = Vec::with_capacity(x_axis.cells * y_axis.cells);
    let mut values = Vec::with_capacity(x_axis.cells * y_axis.cells);
    let mut hints = vec![0usize; surfaces.len()];
    let mut candidates = Vec::with_capacity(surfaces.len());
    for yi in 0..y_axis.cells {
        let e = y_axis.center(yi);
        for xi in 0..x_axis.cells {
            let r = x_axis.center(xi);
            candidates.clear();
            for (k, (_, surface)) in surfaces.iter().enumerate() {
                if let Ok(ev) = surface.eval_with_hint(r, e, &mut hints[k]) {
                    if !ev.extrapolated {
                        candidates.push((k, ev.value));
                    }
                }
            }
            let (outcome, value) = decide_cell(&candidates, tie_tol, Better::Higher);
            cells.push(outcome);
            values.push(value);
        }
    }
    Ok(DominanceGrid {
        plane: Plane::Re,
        x_axis: *x_axis,
        y_axis: *y_axis,
        encoder_ids: surfaces.iter().map(|(id, _)| id.to_string()).collect(),
        cells,
        values,
    })
}

/// Finds the log-rate at which `surface` reaches `d_target` along fixed
/// log-energy `e`, by bisection over `r_bracket`.
///
/// The restriction D(·, e) is first sampled across the bracket; any decrease
/// beyond a small slack flags the inversion as ambiguous instead of
/// returning an arbitrary root.
pub fn invert_rate(
    surface: &Surface,
    e: f64,
    d_target: f64,
    r_bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = r_bracket;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(RedError::BadBracket { lo, hi });
    }
    let mut hint = 0;
    let mut previous = f64::NEG_INFINITY;
    for i in 0..defaults::MONOTONE_SAMPLES {
        let r = lo + (hi - lo) * i as f64 / (defaults::MONOTONE_SAMPLES - 1) as f64;
        let value = surface.eval_with_hint(r, e, &mut hint)?.value;
        if value < previous - defaults::MONOTONE_EPS {
            return Err(RedError::NonMonotone { lo, hi });
        }
        previous = previous.max(value);
    }
    bisect_root(
        |r| Ok(surface.eval_with_hint(r, e, &mut hint)?.value),
        lo,
        hi,
        d_target,
        tol,
    )
}

/// Rasterizes E-D dominance: at every cell center (e, d) each surface's
/// implied log-rate is computed by inversion and the lowest rate wins.
/// Surfaces whose inversion fails, or whose implied rate leaves the trusted
/// region, are excluded from that cell only.
pub fn sample_ed_grid(
    surfaces: &[(&str, &Surface)],
    x_axis: &AxisSpec,
    y_axis: &AxisSpec,
    r_bracket: (f64, f64),
    tie_tol: f64,
) -> Result<DominanceGrid> {
    check_surfaces(surfaces)?;
    check_tolerance(tie_tol)?;
    let mut cells = Vec::with_capacity(x_axis.cells * y_axis.cells);
    let mut values = Vec::with_capacity(x_axis.cells * y_axis.cells);
    let mut candidates = Vec::with_capacity(surfaces.len());
    for yi in 0..y_axis.cells {
        let d = y_axis.center(yi);
        for xi in 0..x_axis.cells {
            let e = x_axis.center(xi);
            candidates.clear();
            for (k, (_, surface)) in surfaces.iter().enumerate() {
                let Ok(r) = invert_rate(surface, e, d, r_bracket, defaults::INVERSION_TOL)
                else {
                    continue;
                };
                if surface.fit_domain().contains(r, e) {
                    candidates.push((k, r));
                }
            }
            let (outcome, value) = decide_cell(&candidates, tie_tol, Better::Lower);
            cells.push(outcome);
            values.push(value);
        }
    }
    Ok(DominanceGrid {
        plane: Plane::Ed,
        x_axis: *x_axis,
        y_axis: *y_axis,
        encoder_ids: surfaces.iter().map(|(id, _)| id.to_string()).collect(),
        cells,
        values,
    })
}

/// Intersection of every surface's fit domain; the region where all
/// encoders are trustworthy at once.
pub fn intersect_domains(surfaces: &[(&str, &Surface)]) -> Result<FitDomain> {
    check_surfaces(surfaces)?;
    let mut dom = surfaces[0].1.fit_domain();
    for (_, surface) in &surfaces[1..] {
        let other = surface.fit_domain();
        dom.r_min = dom.r_min.max(other.r_min);
        dom.r_max = dom.r_max.min(other.r_max);
        dom.e_min = dom.e_min.max(other.e_min);
        dom.e_max = dom.e_max.min(other.e_max);
    }
    if dom.r_min >= dom.r_max || dom.e_min >= dom.e_max {
        return Err(RedError::EmptyDomain);
    }
    Ok(dom)
}

/// Default R-E axes: the shared fit domain, `cells` × `cells`.
pub fn default_re_axes(
    surfaces: &[(&str, &Surface)],
    cells: (usize, usize),
) -> Result<(AxisSpec, AxisSpec)> {
    let dom = intersect_domains(surfaces)?;
    Ok((
        AxisSpec::new(dom.r_min, dom.r_max, cells.0)?,
        AxisSpec::new(dom.e_min, dom.e_max, cells.1)?,
    ))
}

/// Default E-D axes: energy from the shared fit domain, distortion spanning
/// the union of the surfaces' covered ranges. Also returns the default rate
/// bracket (the shared domain's rate extent).
pub fn default_ed_axes(
    surfaces: &[(&str, &Surface)],
    cells: (usize, usize),
) -> Result<(AxisSpec, AxisSpec, (f64, f64))> {
    let dom = intersect_domains(surfaces)?;
    let mut d_lo = f64::INFINITY;
    let mut d_hi = f64::NEG_INFINITY;
    for (_, surface) in surfaces {
        let (lo, hi) = surface.distortion_range();
        d_lo = d_lo.min(lo);
        d_hi = d_hi.max(hi);
    }
    // Negated on purpose: NaN from a degenerate range must also error.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(d_lo < d_hi) {
        return Err(RedError::EmptyDomain);
    }
    Ok((
        AxisSpec::new(dom.e_min, dom.e_max, cells.0)?,
        AxisSpec::new(d_lo, d_hi, cells.1)?,
        (dom.r_min, dom.r_max),
    ))
}

/// Finds supporting configurations that another encoder strictly improves
/// on, by more than `margin_threshold`, at their own operating point.
///
/// On the R-E plane a config at (r, e, d) is occluded when some other
/// surface predicts d̂ > d + threshold at (r, e); on the E-D plane when some
/// other surface reaches d at energy e with rate < r − threshold. Each entry
/// reports the strongest occluder; entries are sorted by falling margin.
pub fn occluded_configs(
    encoders: &[(&PointSet, &Surface)],
    plane: Plane,
    margin_threshold: f64,
) -> Result<OcclusionReport> {
    if !margin_threshold.is_finite() {
        return Err(RedError::BadTolerance(margin_threshold));
    }
    for pair in encoders.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        if a.sequence_name != b.sequence_name {
            return Err(RedError::MismatchedSequences {
                a: a.sequence_name.clone(),
                b: b.sequence_name.clone(),
            });
        }
    }

    let mut entries = Vec::new();
    for (i, (points, _)) in encoders.iter().enumerate() {
        for point in points.supporting() {
            let mut strongest: Option<(usize, f64)> = None;
            for (j, (_, other)) in encoders.iter().enumerate() {
                if j == i {
                    continue;
                }
                let margin = match plane {
                    Plane::Re => match other.eval(point.r, point.e) {
                        Ok(ev) if !ev.extrapolated => ev.value - point.d,
                        _ => continue,
                    },
                    Plane::Ed => {
                        let dom = other.fit_domain();
                        let implied = match invert_rate(
                            other,
                            point.e,
                            point.d,
                            (dom.r_min, dom.r_max),
                            defaults::INVERSION_TOL,
                        ) {
                            Ok(r) if dom.contains(r, point.e) => r,
                            _ => continue,
                        };
                        point.r - implied
                    }
                };
                if margin > margin_threshold
                    && strongest.is_none_or(|(_, best)| margin > best)
                {
                    strongest = Some((j, margin));
                }
            }
            if let Some((j, margin)) = strongest {
                entries.push(OcclusionEntry {
                    encoder_id: points.encoder_id.clone(),
                    preset: point.config.0.clone(),
                    quality: point.config.1,
                    occluding_encoder_id: encoders[j].0.encoder_id.clone(),
                    margin,
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        b.margin
            .partial_cmp(&a.margin)
            .expect("finite margins")
            .then_with(|| a.encoder_id.cmp(&b.encoder_id))
            .then_with(|| a.preset.cmp(&b.preset))
            .then_with(|| a.quality.cmp(&b.quality))
    });
    Ok(OcclusionReport { plane, entries })
}

/// Renders a grid as CSV: one row per cell, y-major, with `-` where no
/// surface applied.
pub fn write_grid(grid: &DominanceGrid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x_center", "y_center", "outcome", "winning_value"])
        .expect("in-memory write");
    for yi in 0..grid.y_axis.cells {
        for xi in 0..grid.x_axis.cells {
            let outcome = match grid.outcome(xi, yi) {
                CellOutcome::Winner(k) => grid.encoder_ids[k].clone(),
                CellOutcome::Tie => "tie".to_string(),
                CellOutcome::OutOfDomain => "out_of_domain".to_string(),
            };
            let value = grid
                .value(xi, yi)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".to_string());
            w.write_record([
                grid.x_axis.center(xi).to_string(),
                grid.y_axis.center(yi).to_string(),
                outcome,
                value,
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Renders an occlusion report as CSV, in the report's (falling-margin)
/// order.
pub fn write_occlusion_report(report: &OcclusionReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["plane", "encoder", "preset", "quality", "occluded_by", "margin"])
        .expect("in-memory write");
    for entry in &report.entries {
        w.write_record([
            report.plane.name().to_string(),
            entry.encoder_id.clone(),
            entry.preset.clone(),
            entry.quality.to_string(),
            entry.occluding_encoder_id.clone(),
            entry.margin.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
