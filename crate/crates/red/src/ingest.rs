//! Measurement ingestion: CSV parsing, encoding-energy derivation, the
//! repeated-measurement stability check, and the transform into log-domain
//! R-E-D point sets.
//!
//! All logarithms are natural; see the crate-level notes in [`crate::defaults`].

use std::collections::BTreeSet;
use std::io;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{RedError, Result};

/// One raw encode observation as it appears in a measurement log.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub sequence_name: String,
    pub encoder_id: String,
    pub preset: String,
    /// Quality control parameter (CRF or QP).
    pub quality_param: i64,
    /// Bitrate in kb/s; strictly positive.
    pub rate: f64,
    /// Total energy over the encode, Joules.
    pub energy_total: f64,
    /// Idle energy over the same span, Joules.
    pub energy_idle: f64,
    /// Encode duration in seconds, when the log provides it.
    pub duration: Option<f64>,
    /// Peak signal-to-noise ratio in dB; positive and finite.
    pub psnr: f64,
    pub repeat_index: u32,
    /// Point-class tag when the log carries one.
    pub origin: Option<Origin>,
    /// 1-based source line, kept for diagnostics.
    pub row: usize,
}

impl MeasurementRecord {
    /// Human-readable configuration key used in error messages.
    pub fn config_label(&self) -> String {
        format!(
            "{}/{}/{}/q{}",
            self.sequence_name, self.encoder_id, self.preset, self.quality_param
        )
    }
}

/// Whether a point belongs to the surface-defining grid or is held out for
/// accuracy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Supporting,
    NonSupporting,
}

/// Outcome of the repeated-measurement confidence-interval check.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub sample_count: usize,
    /// Mean energy across repeats, Joules.
    pub mean_energy: f64,
    /// Two-sided (1 − alpha) confidence half-width of the mean, Joules.
    pub ci_half_width: f64,
    /// `ci_half_width / mean_energy`.
    pub relative_half_width: f64,
    pub alpha: f64,
    pub beta: f64,
    /// True exactly when `relative_half_width <= beta`.
    pub passed: bool,
}

/// One (r, e, d) triplet in log-rate / log-energy / PSNR space.
#[derive(Debug, Clone, PartialEq)]
pub struct RedPoint {
    /// Natural log of rate (rate in kb/s).
    pub r: f64,
    /// Natural log of encoding energy (energy in Joules).
    pub e: f64,
    /// PSNR in dB; positive.
    pub d: f64,
    pub origin: Origin,
    /// The (preset, quality) configuration the point came from.
    pub config: (String, i64),
}

/// All points of one encoder on one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub encoder_id: String,
    pub sequence_name: String,
    pub points: Vec<RedPoint>,
}

impl PointSet {
    pub fn supporting(&self) -> impl Iterator<Item = &RedPoint> {
        self.points.iter().filter(|p| p.origin == Origin::Supporting)
    }

    pub fn non_supporting(&self) -> impl Iterator<Item = &RedPoint> {
        self.points
            .iter()
            .filter(|p| p.origin == Origin::NonSupporting)
    }
}

/// Maps the logical measurement fields onto column names in the input header.
///
/// The defaults are the canonical names; override individual fields to ingest
/// logs with different spellings.
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub sequence: String,
    pub encoder: String,
    pub preset: String,
    pub quality: String,
    pub rate: String,
    pub energy_total: String,
    pub energy_idle: String,
    pub idle_power: String,
    pub duration: String,
    pub psnr: String,
    pub repeat: String,
    pub origin: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            sequence: "sequence".into(),
            encoder: "encoder".into(),
            preset: "preset".into(),
            quality: "quality".into(),
            rate: "rate_kbps".into(),
            energy_total: "energy_total_j".into(),
            energy_idle: "energy_idle_j".into(),
            idle_power: "idle_power_w".into(),
            duration: "duration_s".into(),
            psnr: "psnr_db".into(),
            repeat: "repeat".into(),
            origin: "origin".into(),
        }
    }
}

/// How records receive their supporting / non-supporting tag.
#[derive(Debug, Clone)]
pub enum OriginRule {
    /// Trust the per-record origin column; every record must carry a tag.
    Column,
    /// A record is supporting exactly when its preset and quality both belong
    /// to the configured grid.
    Grid {
        presets: Vec<String>,
        qualities: Vec<i64>,
    },
}

/// Parses delimiter-separated measurement logs.
///
/// The header must name every required column per `schema`; idle energy
/// arrives either as an energy column or as idle power times duration, and
/// supplying both forms is an error. Range and uniqueness invariants are
/// enforced per record, with offending rows named.
pub fn parse_measurements<R: io::Read>(
    source: R,
    schema: &ColumnSchema,
) -> Result<Vec<MeasurementRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| col(name).ok_or_else(|| RedError::MissingColumn(name.into()));

    let c_sequence = require(&schema.sequence)?;
    let c_encoder = require(&schema.encoder)?;
    let c_preset = require(&schema.preset)?;
    let c_quality = require(&schema.quality)?;
    let c_rate = require(&schema.rate)?;
    let c_total = require(&schema.energy_total)?;
    let c_psnr = require(&schema.psnr)?;
    let c_repeat = require(&schema.repeat)?;
    let c_idle_energy = col(&schema.energy_idle);
    let c_idle_power = col(&schema.idle_power);
    let c_duration = col(&schema.duration);
    let c_origin = col(&schema.origin);

    match (c_idle_energy, c_idle_power) {
        (Some(_), Some(_)) => {
            return Err(RedError::AmbiguousIdleForm(
                schema.energy_idle.clone(),
                schema.idle_power.clone(),
            ))
        }
        (None, None) => return Err(RedError::MissingColumn(schema.energy_idle.clone())),
        (None, Some(_)) if c_duration.is_none() => {
            return Err(RedError::MissingColumn(schema.duration.clone()))
        }
        _ => {}
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = row
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(i + 2);

        let text = |c: usize| row.get(c).unwrap_or("").to_string();
        let numeric = |c: usize, name: &str| -> Result<f64> {
            let raw = row.get(c).unwrap_or("");
            raw.parse::<f64>().map_err(|_| RedError::BadCell {
                row: line,
                column: name.into(),
                value: raw.into(),
            })
        };
        let invalid = |detail: String| RedError::BadRecord { row: line, detail };

        let quality_raw = row.get(c_quality).unwrap_or("");
        let quality_param = quality_raw.parse::<i64>().map_err(|_| RedError::BadCell {
            row: line,
            column: schema.quality.clone(),
            value: quality_raw.into(),
        })?;
        let repeat_raw = row.get(c_repeat).unwrap_or("");
        let repeat_index = repeat_raw.parse::<u32>().map_err(|_| RedError::BadCell {
            row: line,
            column: schema.repeat.clone(),
            value: repeat_raw.into(),
        })?;

        let rate = numeric(c_rate, &schema.rate)?;
        if !rate.is_finite() || rate <= 0.0 {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        let psnr = numeric(c_psnr, &schema.psnr)?;
        if !psnr.is_finite() || psnr <= 0.0 {
            return Err(invalid(format!(
                "psnr must be positive and finite, got {psnr}"
            )));
        }
        let energy_total = numeric(c_total, &schema.energy_total)?;

        let mut duration = None;
        if let Some(c) = c_duration {
            let raw = row.get(c).unwrap_or("");
            if !raw.is_empty() {
                let v = numeric(c, &schema.duration)?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(invalid(format!("duration must be positive, got {v}")));
                }
                duration = Some(v);
            }
        }

        let energy_idle = match (c_idle_energy, c_idle_power) {
            (Some(c), None) => numeric(c, &schema.energy_idle)?,
            (None, Some(c)) => {
                let power = numeric(c, &schema.idle_power)?;
                if !power.is_finite() || power < 0.0 {
                    return Err(invalid(format!(
                        "idle power must be nonnegative, got {power}"
                    )));
                }
                let dur = duration.ok_or_else(|| {
                    invalid(format!("column `{}` is empty", schema.duration))
                })?;
                power * dur
            }
            _ => unreachable!("validated above"),
        };
        if !energy_idle.is_finite() || energy_idle < 0.0 || !energy_total.is_finite() {
            return Err(invalid(format!(
                "energies must be nonnegative, got total {energy_total} J, idle {energy_idle} J"
            )));
        }
        if energy_total < energy_idle {
            return Err(invalid(format!(
                "total energy {energy_total} J is below idle energy {energy_idle} J"
            )));
        }

        let origin = match c_origin {
            Some(c) => match row.get(c).unwrap_or("") {
                "" => None,
                "s" => Some(Origin::Supporting),
                "ns" => Some(Origin::NonSupporting),
                other => {
                    return Err(RedError::BadCell {
                        row: line,
                        column: schema.origin.clone(),
                        value: other.into(),
                    })
                }
            },
            None => None,
        };

        let record = MeasurementRecord {
            sequence_name: text(c_sequence),
            encoder_id: text(c_encoder),
            preset: text(c_preset),
            quality_param,
            rate,
            energy_total,
            energy_idle,
            duration,
            psnr,
            repeat_index,
            origin,
            row: line,
        };
        let key = (
            record.sequence_name.clone(),
            record.encoder_id.clone(),
            record.preset.clone(),
            record.quality_param,
            record.repeat_index,
        );
        if !seen.insert(key) {
            return Err(RedError::DuplicateRecord {
                row: line,
                key: format!("{}#r{}", record.config_label(), record.repeat_index),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records back out in the canonical column layout.
///
/// Numeric fields use the shortest representation that round-trips, so a
/// parse → write → parse cycle reproduces them exactly.
pub fn write_measurements<W: io::Write>(records: &[MeasurementRecord], out: W) -> Result<()> {
    let schema = ColumnSchema::default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        schema.sequence.as_str(),
        schema.encoder.as_str(),
        schema.preset.as_str(),
        schema.quality.as_str(),
        schema.rate.as_str(),
        schema.energy_total.as_str(),
        schema.energy_idle.as_str(),
        schema.duration.as_str(),
        schema.psnr.as_str(),
        schema.repeat.as_str(),
        schema.origin.as_str(),
    ])?;
    for r in records {
        let fields: [String; 11] = [
            r.sequence_name.clone(),
            r.encoder_id.clone(),
            r.preset.clone(),
            r.quality_param.to_string(),
            r.rate.to_string(),
            r.energy_total.to_string(),
            r.energy_idle.to_string(),
            r.duration.map(|d| d.to_string()).unwrap_or_default(),
            r.psnr.to_string(),
            r.repeat_index.to_string(),
            match r.origin {
                Some(Origin::Supporting) => "s",
                Some(Origin::NonSupporting) => "ns",
                None => "",
            }
            .to_string(),
        ];
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Encoding energy: total consumption minus the idle baseline over the same
/// span.
pub fn encoding_energy(energy_total: f64, energy_idle: f64) -> Result<f64> {
    if !(energy_total.is_finite() && energy_idle.is_finite())
        || energy_idle < 0.0
        || energy_total < energy_idle
    {
        return Err(RedError::InconsistentEnergy {
            total: energy_total,
            idle: energy_idle,
        });
    }
    Ok(energy_total - energy_idle)
}

/// Confidence-interval stability check over repeated energy samples.
///
/// Computes the two-sided (1 − `alpha`) confidence half-width of the mean
/// using the Student-t quantile with n − 1 degrees of freedom; the verdict
/// passes when the half-width is at most `beta` of the mean.
pub fn validate_stability(samples: &[f64], alpha: f64, beta: f64) -> Result<StabilityVerdict> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(RedError::BadSignificance);
    }
    if samples.len() < 2 {
        return Err(RedError::TooFewSamples(samples.len()));
    }
    for &s in samples {
        if !s.is_finite() || s <= 0.0 {
            return Err(RedError::NonpositiveSample(s));
        }
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = variance.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid t distribution parameters")
        .inverse_cdf(1.0 - alpha / 2.0);
    let half_width = t * sd / (n as f64).sqrt();
    let relative = half_width / mean;
    Ok(StabilityVerdict {
        sample_count: n,
        mean_energy: mean,
        ci_half_width: half_width,
        relative_half_width: relative,
        alpha,
        beta,
        passed: relative <= beta,
    })
}

/// Groups records by (sequence, encoder), averages encoding energy across
/// repeats per configuration, and maps each configuration to a natural-log
/// (r, e, d) point.
///
/// Rate and PSNR are taken from the first repeat after checking that all
/// repeats agree on them (encodes are deterministic; only energy varies).
/// Group order and point order follow first appearance in the input.
pub fn to_red_points(
    records: &[MeasurementRecord],
    origin_rule: &OriginRule,
) -> Result<Vec<PointSet>> {
    if records.is_empty() {
        return Err(RedError::EmptyInput);
    }

    // (sequence, encoder) -> (preset, quality) -> accumulated repeats,
    // everything in first-appearance order.
    let mut sets: Vec<PointSet> = Vec::new();
    let mut groups: Vec<Vec<ConfigAccumulator>> = Vec::new();
    for record in records {
        let set_pos = match sets.iter().position(|s| {
            s.sequence_name == record.sequence_name && s.encoder_id == record.encoder_id
        }) {
            Some(p) => p,
            None => {
                sets.push(PointSet {
                    encoder_id: record.encoder_id.clone(),
                    sequence_name: record.sequence_name.clone(),
                    points: Vec::new(),
                });
                groups.push(Vec::new());
                sets.len() - 1
            }
        };
        let configs = &mut groups[set_pos];
        let config_pos = configs.iter().position(|c| {
            c.preset == record.preset && c.quality == record.quality_param
        });
        let energy = encoding_energy(record.energy_total, record.energy_idle)?;
        match config_pos {
            Some(p) => configs[p].merge(record, energy)?,
            None => configs.push(ConfigAccumulator::new(record, energy)),
        }
    }

    for (set, configs) in sets.iter_mut().zip(groups) {
        for config in configs {
            let label = format!(
                "{}/{}/{}/q{}",
                set.sequence_name, set.encoder_id, config.preset, config.quality
            );
            let mean_energy = config.energy_sum / config.repeats as f64;
            if mean_energy <= 0.0 {
                return Err(RedError::NonpositiveEnergy {
                    config: label,
                    energy: mean_energy,
                });
            }
            if !(config.psnr.is_finite() && config.psnr > 0.0) {
                return Err(RedError::BadDistortion {
                    config: label,
                    psnr: config.psnr,
                });
            }
            let origin = match origin_rule {
                OriginRule::Column => config.origin.ok_or(RedError::MissingOrigin {
                    config: label.clone(),
                })?,
                OriginRule::Grid { presets, qualities } => {
                    if presets.contains(&config.preset) && qualities.contains(&config.quality) {
                        Origin::Supporting
                    } else {
                        Origin::NonSupporting
                    }
                }
            };
            let point = RedPoint {
                r: config.rate.ln(),
                e: mean_energy.ln(),
                d: config.psnr,
                origin,
                config: (config.preset.clone(), config.quality),
            };
            if set
                .points
                .iter()
                .any(|p| p.r == point.r && p.e == point.e)
            {
                return Err(RedError::DuplicateCoordinate { config: label });
            }
            set.points.push(point);
        }
    }
    Ok(sets)
}

struct ConfigAccumulator {
    preset: String,
    quality: i64,
    rate: f64,
    psnr: f64,
    origin: Option<Origin>,
    energy_sum: f64,
    repeats: usize,
}

impl ConfigAccumulator {
    fn new(record: &MeasurementRecord, energy: f64) -> Self {
        ConfigAccumulator {
            preset: record.preset.clone(),
            quality: record.quality_param,
            rate: record.rate,
            psnr: record.psnr,
            origin: record.origin,
            energy_sum: energy,
            repeats: 1,
        }
    }

    fn merge(&mut self, record: &MeasurementRecord, energy: f64) -> Result<()> {
        let mismatch = |field: &str| RedError::InconsistentRepeats {
            config: record.config_label(),
            field: field.to_string(),
        };
        if record.rate != self.rate {
            return Err(mismatch("rate"));
        }
        if record.psnr != self.psnr {
            return Err(mismatch("psnr"));
        }
        if record.origin != self.origin {
            return Err(mismatch("origin"));
        }
        self.energy_sum += energy;
        self.repeats += 1;
        Ok(())
    }
}
