//! Rasterizes both projection planes for the bundled two-encoder campaign
//! and reports how much of each plane every encoder wins.
//!
//! R-E plane: at each (log-rate, log-energy) cell the surface predicting
//! the highest PSNR wins. E-D plane: at each (log-energy, PSNR) cell the
//! surface reaching the target PSNR at the lowest log-rate wins; cells a
//! surface cannot reach, or where its inversion leaves its trusted region,
//! exclude that surface only.
//!
//! Run with: cargo run --example project_planes

use std::fs::File;

use red::defaults;
use red::error::Result;
use red::fitting::{fit_surface, Method, Surface};
use red::ingest::{parse_measurements, to_red_points, ColumnSchema, OriginRule};
use red::projection::{
    default_ed_axes, default_re_axes, sample_ed_grid, sample_re_grid, DominanceGrid,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");
const CELLS: (usize, usize) = (48, 48);

fn tally(label: &str, grid: &DominanceGrid) {
    let (wins, ties, out) = grid.tally();
    let total = (grid.x_axis.cells() * grid.y_axis.cells()) as f64;
    println!(
        "{label}: x in [{:.3}, {:.3}], y in [{:.3}, {:.3}], {} cells",
        grid.x_axis.min(),
        grid.x_axis.max(),
        grid.y_axis.min(),
        grid.y_axis.max(),
        total as usize
    );
    for (encoder, count) in grid.encoder_ids.iter().zip(&wins) {
        println!("  {encoder:<8} wins {count:>5}  ({:.1} %)", 100.0 * *count as f64 / total);
    }
    println!("  ties {ties}, out of domain {out}");
    println!();
}

fn main() -> Result<()> {
    let records = parse_measurements(File::open(DATA)?, &ColumnSchema::default())?;
    let sets = to_red_points(&records, &OriginRule::Column)?;
    let fitted: Vec<(String, Surface)> = sets
        .iter()
        .map(|ps| Ok((ps.encoder_id.clone(), fit_surface(ps, Method::PolyMixed)?)))
        .collect::<Result<_>>()?;
    let surfaces: Vec<(&str, &Surface)> =
        fitted.iter().map(|(id, s)| (id.as_str(), s)).collect();

    let (x, y) = default_re_axes(&surfaces, CELLS)?;
    let re = sample_re_grid(&surfaces, &x, &y, defaults::TIE_TOL_RE)?;
    tally("R-E plane (highest predicted PSNR wins)", &re);

    let (x, y, bracket) = default_ed_axes(&surfaces, CELLS)?;
    let ed = sample_ed_grid(&surfaces, &x, &y, bracket, defaults::TIE_TOL_ED)?;
    tally("E-D plane (lowest implied log-rate wins)", &ed);

    Ok(())
}
