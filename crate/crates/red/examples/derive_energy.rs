//! Derives per-configuration encoding energy from the bundled measurement
//! campaign and checks each configuration's repeat stability.
//!
//! Encoding energy is the measured total minus the idle baseline over the
//! same span. A configuration is stable when the Student-t confidence
//! interval of its repeats is narrow relative to the mean.
//!
//! Run with: cargo run --example derive_energy

use std::fs::File;

use red::defaults;
use red::error::Result;
use red::ingest::{encoding_energy, parse_measurements, ColumnSchema};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");

fn main() -> Result<()> {
    let records = parse_measurements(File::open(DATA)?, &ColumnSchema::default())?;
    println!("{} measurement rows loaded from {DATA}", records.len());
    println!();

    // Group encode-energy samples per configuration, in file order.
    let mut keys: Vec<(String, String, i64)> = Vec::new();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for r in &records {
        let key = (r.encoder_id.clone(), r.preset.clone(), r.quality_param);
        let energy = encoding_energy(r.energy_total, r.energy_idle)?;
        match keys.iter().position(|k| *k == key) {
            Some(i) => samples[i].push(energy),
            None => {
                keys.push(key);
                samples.push(vec![energy]);
            }
        }
    }

    println!(
        "{:<8} {:<10} {:>3}  {:>8}  {:>12}  {:>9}  stable",
        "encoder", "preset", "crf", "E_enc J", "ci half J", "relative"
    );
    let mut unstable = 0;
    for ((encoder, preset, quality), values) in keys.iter().zip(&samples) {
        let v = red::ingest::validate_stability(
            values,
            defaults::STABILITY_ALPHA,
            defaults::STABILITY_BETA,
        )?;
        if !v.passed {
            unstable += 1;
        }
        println!(
            "{encoder:<8} {preset:<10} {quality:>3}  {:>8.2}  {:>12.4}  {:>9.5}  {}",
            v.mean_energy, v.ci_half_width, v.relative_half_width, v.passed
        );
    }
    println!();
    println!(
        "{} configurations, {} unstable (alpha = {}, beta = {})",
        keys.len(),
        unstable,
        defaults::STABILITY_ALPHA,
        defaults::STABILITY_BETA
    );
    Ok(())
}
