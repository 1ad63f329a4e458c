//! Scores every fitting method against the bundled campaign: in-sample
//! accuracy on the supporting grid and held-out accuracy on the
//! non-supporting probes.
//!
//! The piecewise-linear interpolant passes through its supporting points,
//! so its supporting MAPE is exactly zero; the polynomial families trade
//! that exactness for smoothness and full-domain evaluation.
//!
//! Run with: cargo run --example evaluate_accuracy

use std::fs::File;

use red::error::Result;
use red::fitting::Method;
use red::ingest::{parse_measurements, to_red_points, ColumnSchema, OriginRule};
use red::metrics::{evaluate_all, write_report};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");

fn main() -> Result<()> {
    let records = parse_measurements(File::open(DATA)?, &ColumnSchema::default())?;
    let sets = to_red_points(&records, &OriginRule::Column)?;

    let rows = evaluate_all(&sets, &Method::ALL[..])?;
    print!("{}", write_report(&rows));

    println!();
    println!("columns: MAPE in percent; sse and r_square on supporting points;");
    println!("n_s / n_ns count supporting and non-supporting points scored.");
    Ok(())
}
