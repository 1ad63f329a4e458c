//! Lists encoder configurations that another encoder's surface occludes,
//! on both projection planes — the configurations a practitioner should
//! avoid because a competitor does strictly better there.
//!
//! A supporting configuration is occluded in the R-E plane when some other
//! encoder's surface predicts higher PSNR at the same (log-rate,
//! log-energy), and in the E-D plane when another encoder reaches the same
//! PSNR at the same log-energy with a lower log-rate.
//!
//! Run with: cargo run --example recommend_configs

use std::fs::File;

use red::error::Result;
use red::fitting::{fit_surface, Method, Surface};
use red::ingest::{parse_measurements, to_red_points, ColumnSchema, OriginRule, PointSet};
use red::projection::{occluded_configs, Plane};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");

fn main() -> Result<()> {
    let records = parse_measurements(File::open(DATA)?, &ColumnSchema::default())?;
    let sets = to_red_points(&records, &OriginRule::Column)?;
    let fitted: Vec<Surface> = sets
        .iter()
        .map(|ps| fit_surface(ps, Method::PolyMixed))
        .collect::<Result<_>>()?;
    let pairs: Vec<(&PointSet, &Surface)> = sets.iter().zip(&fitted).collect();

    for plane in [Plane::Re, Plane::Ed] {
        let report = occluded_configs(&pairs, plane, 0.0)?;
        println!(
            "== {} plane: {} of {} supporting configurations occluded",
            plane.name(),
            report.entries.len(),
            sets.iter().map(|ps| ps.supporting().count()).sum::<usize>()
        );
        let unit = match plane {
            Plane::Re => "dB PSNR",
            Plane::Ed => "log-rate",
        };
        for entry in &report.entries {
            println!(
                "  {:<8} {:<10} crf {:>2}  behind {:<8} by {:.3} {unit}",
                entry.encoder_id,
                entry.preset,
                entry.quality,
                entry.occluding_encoder_id,
                entry.margin
            );
        }
        println!();
    }
    Ok(())
}
