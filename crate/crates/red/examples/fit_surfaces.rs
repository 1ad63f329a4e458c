//! Fits every surface model to the bundled campaign and prints what each
//! fit produced: triangulation size and domain for the piecewise-linear
//! interpolant, coefficient vectors for the two polynomial families.
//!
//! Run with: cargo run --example fit_surfaces

use std::fs::File;

use red::error::Result;
use red::fitting::{fit_surface, Method, Surface};
use red::ingest::{parse_measurements, to_red_points, ColumnSchema, OriginRule};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");

fn main() -> Result<()> {
    let records = parse_measurements(File::open(DATA)?, &ColumnSchema::default())?;
    let sets = to_red_points(&records, &OriginRule::Column)?;

    for ps in &sets {
        println!(
            "== {} / {} ({} supporting, {} non-supporting points)",
            ps.encoder_id,
            ps.sequence_name,
            ps.supporting().count(),
            ps.non_supporting().count()
        );
        for method in Method::ALL {
            let surface = fit_surface(ps, method)?;
            let dom = surface.fit_domain();
            print!("  {:<12}", method.name());
            match &surface {
                Surface::Linear(s) => {
                    println!(
                        "{} vertices, {} triangles over r in [{:.3}, {:.3}], e in [{:.3}, {:.3}]",
                        s.triangulation().vertices().len(),
                        s.triangulation().triangles().len(),
                        dom.r_min,
                        dom.r_max,
                        dom.e_min,
                        dom.e_max
                    );
                }
                Surface::Poly(p) => {
                    let terms: Vec<String> = p
                        .coefficients()
                        .iter()
                        .map(|c| format!("{c:+.4}"))
                        .collect();
                    println!("[{}]", terms.join(", "));
                }
            }
        }
        println!();
    }
    Ok(())
}
