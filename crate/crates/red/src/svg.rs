//! Self-contained SVG heatmaps of dominance grids.
//!
//! Output is plain text with a fixed layout and palette, so identical grids
//! render to identical bytes.

use crate::projection::{CellOutcome, DominanceGrid, Plane};

/// Fill colors assigned to encoders in list order (cycling past the end).
const PALETTE: [&str; 8] = [
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2", "#9d755d", "#eeca3b",
];
const TIE_COLOR: &str = "#bbbbbb";
const OUT_COLOR: &str = "#ffffff";

const PLOT_LEFT: f64 = 70.0;
const PLOT_TOP: f64 = 34.0;
const PLOT_W: f64 = 420.0;
const PLOT_H: f64 = 320.0;
const LEGEND_X: f64 = PLOT_LEFT + PLOT_W + 18.0;
const LEGEND_W: f64 = 150.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn cell_color<'a>(grid: &DominanceGrid, x: usize, y: usize) -> &'a str {
    match grid.outcome(x, y) {
        CellOutcome::Winner(k) => PALETTE[k % PALETTE.len()],
        CellOutcome::Tie => TIE_COLOR,
        CellOutcome::OutOfDomain => OUT_COLOR,
    }
}

fn axis_titles(plane: Plane) -> (&'static str, &'static str) {
    match plane {
        Plane::Re => ("r = ln(rate in kb/s)", "e = ln(energy in J)"),
        Plane::Ed => ("e = ln(energy in J)", "d = PSNR in dB"),
    }
}

/// Renders the grid as an SVG heatmap with an embedded legend. Horizontal
/// runs of equal outcome collapse into single rectangles.
pub fn render_heatmap(grid: &DominanceGrid) -> String {
    let nx = grid.x_axis.cells();
    let ny = grid.y_axis.cells();
    let cw = PLOT_W / nx as f64;
    let ch = PLOT_H / ny as f64;
    let width = LEGEND_X + LEGEND_W;
    let height = PLOT_TOP + PLOT_H + 46.0;
    let (x_title, y_title) = axis_titles(grid.plane);
    let title = match grid.plane {
        Plane::Re => "R-E plane dominance (highest predicted PSNR wins)",
        Plane::Ed => "E-D plane dominance (lowest implied rate wins)",
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{PLOT_LEFT}\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape(title)
    ));

    // Cells, one merged rect per run; the y axis points up, SVG's down.
    for yi in 0..ny {
        let top = PLOT_TOP + (ny - 1 - yi) as f64 * ch;
        let mut xi = 0;
        while xi < nx {
            let color = cell_color(grid, xi, yi);
            let mut run = 1;
            while xi + run < nx && cell_color(grid, xi + run, yi) == color {
                run += 1;
            }
            if color != OUT_COLOR {
                out.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                    PLOT_LEFT + xi as f64 * cw,
                    top,
                    run as f64 * cw,
                    ch,
                    color
                ));
            }
            xi += run;
        }
    }

    out.push_str(&format!(
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         fill=\"none\" stroke=\"#333333\"/>\n"
    ));

    // Axis extents and titles.
    let bottom = PLOT_TOP + PLOT_H;
    out.push_str(&format!(
        "<text x=\"{PLOT_LEFT}\" y=\"{:.0}\" text-anchor=\"start\">{:.3}</text>\n",
        bottom + 16.0,
        grid.x_axis.min()
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"end\">{:.3}</text>\n",
        PLOT_LEFT + PLOT_W,
        bottom + 16.0,
        grid.x_axis.max()
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\">{}</text>\n",
        PLOT_LEFT + PLOT_W / 2.0,
        bottom + 34.0,
        escape(x_title)
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"end\">{:.3}</text>\n",
        PLOT_LEFT - 6.0,
        bottom,
        grid.y_axis.min()
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"end\">{:.3}</text>\n",
        PLOT_LEFT - 6.0,
        PLOT_TOP + 10.0,
        grid.y_axis.max()
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{:.0}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.0})\">{}</text>\n",
        PLOT_TOP + PLOT_H / 2.0,
        PLOT_TOP + PLOT_H / 2.0,
        escape(y_title)
    ));

    // Legend: encoders in order, then the tie and no-data classes.
    let mut legend: Vec<(&str, String)> = grid
        .encoder_ids
        .iter()
        .enumerate()
        .map(|(k, id)| (PALETTE[k % PALETTE.len()], escape(id)))
        .collect();
    legend.push((TIE_COLOR, "tie".to_string()));
    legend.push((OUT_COLOR, "out of domain".to_string()));
    for (row, (color, label)) in legend.iter().enumerate() {
        let y = PLOT_TOP + row as f64 * 20.0;
        out.push_str(&format!(
            "<rect x=\"{LEGEND_X}\" y=\"{y:.0}\" width=\"14\" height=\"14\" fill=\"{color}\" \
             stroke=\"#333333\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.0}\">{label}</text>\n",
            LEGEND_X + 20.0,
            y + 12.0
        ));
    }

    out.push_str("</svg>\n");
    out
}
