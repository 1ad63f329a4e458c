//! Command-line front end: energy derivation, fitting, evaluation, plane
//! projection, and configuration recommendation.
//!
//! Every command reads measurement CSVs or model JSON, writes its outputs
//! atomically (temp file, then rename), and drops a `<output>.manifest.json`
//! sidecar recording the command, parameters, and input digests. Outputs are
//! byte-deterministic for identical inputs and flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::defaults;
use crate::error::{ErrorCategory, RedError, Result};
use crate::fitting::{fit_surface, Method};
use crate::ingest::{
    parse_measurements, to_red_points, validate_stability, ColumnSchema, MeasurementRecord,
    OriginRule, PointSet,
};
use crate::metrics::{mape, r_square, sse, write_report_classes, FitMetrics};
use crate::model::{read_model_file, write_model, SurfaceModel};
use crate::projection::{
    default_ed_axes, default_re_axes, occluded_configs, sample_ed_grid, sample_re_grid,
    write_grid, write_occlusion_report, AxisSpec, Plane,
};
use crate::svg::render_heatmap;

const EXIT_CODE_HELP: &str = "Exit codes:\n  \
    0  success\n  \
    2  usage error (bad flags or arguments)\n  \
    3  parse error (malformed input or model file)\n  \
    4  numerical error (rank deficiency, failed convergence)\n  \
    5  domain error (out-of-hull queries, empty shared domain)\n  \
    6  stability failure (--strict energy check)";

/// Fits and compares rate-energy-distortion surfaces of video encoders.
#[derive(Debug, Parser)]
#[command(name = "red", version, after_help = EXIT_CODE_HELP)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive per-configuration encoding energy and check repeat stability.
    Energy(EnergyArgs),
    /// Fit one encoder's surface and write it as a model file.
    Fit(FitArgs),
    /// Score fitted models against measured points.
    Eval(EvalArgs),
    /// Rasterize per-cell encoder dominance over a projection plane.
    Project(ProjectArgs),
    /// List encoder configurations occluded by another encoder's surface.
    Recommend(RecommendArgs),
}

#[derive(Debug, Args)]
struct EnergyArgs {
    /// Measurement CSV.
    #[arg(long)]
    input: PathBuf,
    /// Per-configuration energy and stability CSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Significance level of the confidence interval.
    #[arg(long, default_value_t = defaults::STABILITY_ALPHA)]
    alpha: f64,
    /// Largest relative half-width accepted as stable.
    #[arg(long, default_value_t = defaults::STABILITY_BETA)]
    beta: f64,
    /// Fail (exit 6) when any configuration is unstable.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    PolyCustom,
    PolyMixed,
}

impl From<MethodArg> for Method {
    fn from(arg: MethodArg) -> Method {
        match arg {
            MethodArg::Linear => Method::Linear,
            MethodArg::PolyCustom => Method::PolyCustom,
            MethodArg::PolyMixed => Method::PolyMixed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlaneArg {
    Re,
    Ed,
}

impl From<PlaneArg> for Plane {
    fn from(arg: PlaneArg) -> Plane {
        match arg {
            PlaneArg::Re => Plane::Re,
            PlaneArg::Ed => Plane::Ed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassesArg {
    /// Supporting points only.
    S,
    /// Non-supporting points only.
    Ns,
    /// Both classes.
    Both,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Measurement CSV.
    #[arg(long)]
    input: PathBuf,
    /// Encoder id to fit.
    #[arg(long)]
    encoder: String,
    /// Sequence name; only needed when the encoder has several.
    #[arg(long)]
    sequence: Option<String>,
    /// Fitting method.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Model file to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Measurement CSV.
    #[arg(long)]
    input: PathBuf,
    /// Model files to score, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<PathBuf>,
    /// Point classes to score.
    #[arg(long, value_enum, default_value_t = ClassesArg::Both)]
    classes: ClassesArg,
    /// Report CSV to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Model files, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<PathBuf>,
    /// Projection plane.
    #[arg(long, value_enum)]
    plane: PlaneArg,
    /// Grid resolution as WIDTHxHEIGHT.
    #[arg(long, default_value = "200x200", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Also write an SVG heatmap next to the output.
    #[arg(long)]
    svg: bool,
    /// Grid CSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Override the x-axis lower bound (default: shared fit domain).
    #[arg(long)]
    x_min: Option<f64>,
    /// Override the x-axis upper bound.
    #[arg(long)]
    x_max: Option<f64>,
    /// Override the y-axis lower bound.
    #[arg(long)]
    y_min: Option<f64>,
    /// Override the y-axis upper bound.
    #[arg(long)]
    y_max: Option<f64>,
    /// Rate-bracket lower bound for E-D inversion (default: shared domain).
    #[arg(long)]
    r_min: Option<f64>,
    /// Rate-bracket upper bound for E-D inversion.
    #[arg(long)]
    r_max: Option<f64>,
    /// Tie tolerance (dB for re, log-rate for ed).
    #[arg(long)]
    tie_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    /// Measurement CSV holding the supporting configurations.
    #[arg(long)]
    input: PathBuf,
    /// Model files for the competing encoders, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<PathBuf>,
    /// Projection plane.
    #[arg(long, value_enum)]
    plane: PlaneArg,
    /// Minimum advantage before a config counts as occluded.
    #[arg(long, default_value_t = defaults::OCCLUSION_MARGIN)]
    margin: f64,
    /// Occlusion report CSV to write.
    #[arg(long)]
    output: PathBuf,
}

fn parse_grid(text: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = text
        .split_once('x')
        .ok_or_else(|| format!("`{text}` is not WIDTHxHEIGHT"))?;
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("`{s}` is not a positive integer"))
    };
    Ok((parse(w)?, parse(h)?))
}

/// Maps an error class to the command's exit status.
pub fn exit_code(category: ErrorCategory) -> i32 {
    match category {
        ErrorCategory::Usage => 2,
        ErrorCategory::Parse => 3,
        ErrorCategory::Numerical => 4,
        ErrorCategory::Domain => 5,
        ErrorCategory::Stability => 6,
    }
}

/// Parses argv and runs the selected command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Energy(args) => cmd_energy(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Project(args) => cmd_project(args),
        Command::Recommend(args) => cmd_recommend(args),
    }
}

// ---- shared plumbing ----

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
}

/// Sidecar provenance record: enough to re-run the command and to check the
/// inputs have not changed. Deliberately carries no timestamps so reruns
/// are byte-identical.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Vec<ManifestInput>,
    parameters: BTreeMap<String, String>,
    outputs: Vec<String>,
}

fn digest_file(path: &Path) -> Result<ManifestInput> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut sha256 = String::with_capacity(64);
    for byte in digest {
        sha256.push_str(&format!("{byte:02x}"));
    }
    Ok(ManifestInput {
        path: path.display().to_string(),
        sha256,
    })
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| RedError::Usage(format!("output path `{}` has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_manifest(
    command: &'static str,
    inputs: &[&Path],
    parameters: BTreeMap<String, String>,
    outputs: &[&Path],
) -> Result<()> {
    let manifest = RunManifest {
        tool: "red",
        version: env!("CARGO_PKG_VERSION"),
        command,
        inputs: inputs
            .iter()
            .map(|p| digest_file(p))
            .collect::<Result<Vec<_>>>()?,
        parameters,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut text = serde_json::to_string(&manifest).expect("manifest serializes");
    text.push('\n');
    let primary = outputs[0];
    let mut name = primary
        .file_name()
        .expect("validated by write_atomic")
        .to_os_string();
    name.push(".manifest.json");
    write_atomic(&primary.with_file_name(name), text.as_bytes())
}

fn load_records(path: &Path) -> Result<Vec<MeasurementRecord>> {
    let file = fs::File::open(path)?;
    parse_measurements(file, &ColumnSchema::default())
}

fn load_pointsets(path: &Path) -> Result<Vec<PointSet>> {
    let records = load_records(path)?;
    to_red_points(&records, &OriginRule::Column)
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<SurfaceModel>> {
    let models = paths
        .iter()
        .map(|p| read_model_file(p))
        .collect::<Result<Vec<_>>>()?;
    for pair in models.windows(2) {
        if pair[0].sequence_name != pair[1].sequence_name {
            return Err(RedError::MismatchedSequences {
                a: pair[0].sequence_name.clone(),
                b: pair[1].sequence_name.clone(),
            });
        }
    }
    Ok(models)
}

fn matching_pointset<'a>(sets: &'a [PointSet], model: &SurfaceModel) -> Result<&'a PointSet> {
    sets.iter()
        .find(|ps| {
            ps.encoder_id == model.encoder_id && ps.sequence_name == model.sequence_name
        })
        .ok_or_else(|| RedError::EncoderMismatch {
            encoder: model.encoder_id.clone(),
            sequence: model.sequence_name.clone(),
        })
}

// ---- energy ----

fn cmd_energy(args: EnergyArgs) -> Result<()> {
    let records = load_records(&args.input)?;

    // Configurations in first-appearance order, with their encode-energy
    // samples across repeats.
    let mut keys: Vec<(String, String, String, i64)> = Vec::new();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for r in &records {
        let key = (
            r.sequence_name.clone(),
            r.encoder_id.clone(),
            r.preset.clone(),
            r.quality_param,
        );
        let energy = crate::ingest::encoding_energy(r.energy_total, r.energy_idle)?;
        match keys.iter().position(|k| *k == key) {
            Some(i) => samples[i].push(energy),
            None => {
                keys.push(key);
                samples.push(vec![energy]);
            }
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sequence",
        "encoder",
        "preset",
        "quality",
        "n_repeats",
        "energy_enc_j",
        "ci_half_width_j",
        "relative_half_width",
        "stable",
    ])
    .expect("in-memory write");
    let mut failed = 0;
    for (key, values) in keys.iter().zip(&samples) {
        let verdict = validate_stability(values, args.alpha, args.beta)?;
        if !verdict.passed {
            failed += 1;
        }
        w.write_record([
            key.0.clone(),
            key.1.clone(),
            key.2.clone(),
            key.3.to_string(),
            verdict.sample_count.to_string(),
            verdict.mean_energy.to_string(),
            verdict.ci_half_width.to_string(),
            verdict.relative_half_width.to_string(),
            verdict.passed.to_string(),
        ])
        .expect("in-memory write");
    }
    let text =
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8");
    write_atomic(&args.output, text.as_bytes())?;

    let mut params = BTreeMap::new();
    params.insert("alpha".into(), args.alpha.to_string());
    params.insert("beta".into(), args.beta.to_string());
    params.insert("strict".into(), args.strict.to_string());
    write_manifest("energy", &[&args.input], params, &[&args.output])?;

    if args.strict && failed > 0 {
        return Err(RedError::StabilityFailure {
            failed,
            total: keys.len(),
        });
    }
    Ok(())
}

// ---- fit ----

fn cmd_fit(args: FitArgs) -> Result<()> {
    let sets = load_pointsets(&args.input)?;
    let mut matching: Vec<&PointSet> = sets
        .iter()
        .filter(|ps| ps.encoder_id == args.encoder)
        .collect();
    if let Some(sequence) = &args.sequence {
        matching.retain(|ps| &ps.sequence_name == sequence);
    }
    let ps = match matching.as_slice() {
        [] => {
            return Err(RedError::EncoderMismatch {
                encoder: args.encoder.clone(),
                sequence: args.sequence.clone().unwrap_or_else(|| "any".into()),
            })
        }
        [one] => *one,
        several => {
            return Err(RedError::Usage(format!(
                "encoder `{}` appears with {} sequences; pass --sequence",
                args.encoder,
                several.len()
            )))
        }
    };

    let method: Method = args.method.into();
    let surface = fit_surface(ps, method)?;
    let text = write_model(&SurfaceModel {
        encoder_id: ps.encoder_id.clone(),
        sequence_name: ps.sequence_name.clone(),
        surface,
    })?;
    write_atomic(&args.output, text.as_bytes())?;

    let mut params = BTreeMap::new();
    params.insert("encoder".into(), args.encoder.clone());
    params.insert("method".into(), method.name().into());
    params.insert("sequence".into(), ps.sequence_name.clone());
    write_manifest("fit", &[&args.input], params, &[&args.output])
}

// ---- eval ----

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let sets = load_pointsets(&args.input)?;
    let models = load_models(&args.models)?;
    let (score_s, score_ns) = match args.classes {
        ClassesArg::S => (true, false),
        ClassesArg::Ns => (false, true),
        ClassesArg::Both => (true, true),
    };

    // One partial row per model, then rows of the same (encoder, method)
    // average across sequences with summed counts.
    struct Partial {
        mape_s: f64,
        mape_ns: Option<f64>,
        sse: f64,
        r_square: f64,
        n_s: usize,
        n_ns: usize,
    }
    let mut order: Vec<(String, Method)> = Vec::new();
    let mut buckets: Vec<Vec<Partial>> = Vec::new();
    for model in &models {
        let ps = matching_pointset(&sets, model)?;
        let tag = |source: RedError| RedError::Scoring {
            encoder: model.encoder_id.clone(),
            sequence: model.sequence_name.clone(),
            method: model.surface.method().name(),
            source: Box::new(source),
        };
        let sup: Vec<_> = ps.supporting().cloned().collect();
        let non: Vec<_> = ps.non_supporting().cloned().collect();
        let partial = Partial {
            // Supporting MAPE always computes (supporting points are, by
            // construction, evaluable); emission masks it per --classes.
            mape_s: mape(&model.surface, &sup).map_err(tag)?,
            mape_ns: if score_ns && !non.is_empty() {
                Some(mape(&model.surface, &non).map_err(tag)?)
            } else {
                None
            },
            sse: sse(&model.surface, &sup).map_err(tag)?,
            r_square: r_square(&model.surface, &sup).map_err(tag)?,
            n_s: sup.len(),
            n_ns: non.len(),
        };
        let key = (model.encoder_id.clone(), model.surface.method());
        match order.iter().position(|k| *k == key) {
            Some(i) => buckets[i].push(partial),
            None => {
                order.push(key);
                buckets.push(vec![partial]);
            }
        }
    }

    let rows: Vec<FitMetrics> = order
        .iter()
        .zip(&buckets)
        .map(|((encoder, method), parts)| {
            let n = parts.len() as f64;
            let ns_values: Vec<f64> = parts.iter().filter_map(|p| p.mape_ns).collect();
            FitMetrics {
                encoder_id: encoder.clone(),
                method: *method,
                mape_supporting: parts.iter().map(|p| p.mape_s).sum::<f64>() / n,
                mape_non_supporting: if ns_values.is_empty() {
                    None
                } else {
                    Some(ns_values.iter().sum::<f64>() / ns_values.len() as f64)
                },
                sse: parts.iter().map(|p| p.sse).sum::<f64>() / n,
                r_square: parts.iter().map(|p| p.r_square).sum::<f64>() / n,
                n_supporting: parts.iter().map(|p| p.n_s).sum(),
                n_non_supporting: parts.iter().map(|p| p.n_ns).sum(),
            }
        })
        .collect();

    let text = write_report_classes(&rows, score_s, score_ns);
    write_atomic(&args.output, text.as_bytes())?;

    let mut inputs: Vec<&Path> = vec![args.input.as_path()];
    inputs.extend(args.models.iter().map(PathBuf::as_path));
    let mut params = BTreeMap::new();
    params.insert(
        "classes".into(),
        match args.classes {
            ClassesArg::S => "s",
            ClassesArg::Ns => "ns",
            ClassesArg::Both => "both",
        }
        .to_string(),
    );
    write_manifest("eval", &inputs, params, &[&args.output])
}

// ---- project ----

fn cmd_project(args: ProjectArgs) -> Result<()> {
    let models = load_models(&args.models)?;
    let surfaces: Vec<(&str, &crate::fitting::Surface)> = models
        .iter()
        .map(|m| (m.encoder_id.as_str(), &m.surface))
        .collect();
    let plane: Plane = args.plane.into();
    let cells = args.grid;

    let explicit = |min: Option<f64>, max: Option<f64>, n: usize| -> Result<Option<AxisSpec>> {
        match (min, max) {
            (Some(lo), Some(hi)) => Ok(Some(AxisSpec::new(lo, hi, n)?)),
            _ => Ok(None),
        }
    };

    let grid = match plane {
        Plane::Re => {
            let (x_axis, y_axis) = match (
                explicit(args.x_min, args.x_max, cells.0)?,
                explicit(args.y_min, args.y_max, cells.1)?,
            ) {
                (Some(x), Some(y)) => (x, y),
                (x, y) => {
                    let (dx, dy) = default_re_axes(&surfaces, cells)?;
                    (x.unwrap_or(dx), y.unwrap_or(dy))
                }
            };
            let tie_tol = args.tie_tol.unwrap_or(defaults::TIE_TOL_RE);
            sample_re_grid(&surfaces, &x_axis, &y_axis, tie_tol)?
        }
        Plane::Ed => {
            let explicit_bracket = match (args.r_min, args.r_max) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                _ => None,
            };
            let (x_axis, y_axis, bracket) = match (
                explicit(args.x_min, args.x_max, cells.0)?,
                explicit(args.y_min, args.y_max, cells.1)?,
                explicit_bracket,
            ) {
                (Some(x), Some(y), Some(b)) => (x, y, b),
                (x, y, b) => {
                    let (dx, dy, db) = default_ed_axes(&surfaces, cells)?;
                    (x.unwrap_or(dx), y.unwrap_or(dy), b.unwrap_or(db))
                }
            };
            let tie_tol = args.tie_tol.unwrap_or(defaults::TIE_TOL_ED);
            sample_ed_grid(&surfaces, &x_axis, &y_axis, bracket, tie_tol)?
        }
    };

    let text = write_grid(&grid);
    write_atomic(&args.output, text.as_bytes())?;
    let svg_path = args.output.with_extension("svg");
    let mut outputs: Vec<&Path> = vec![args.output.as_path()];
    if args.svg {
        write_atomic(&svg_path, render_heatmap(&grid).as_bytes())?;
        outputs.push(svg_path.as_path());
    }

    let inputs: Vec<&Path> = args.models.iter().map(PathBuf::as_path).collect();
    let mut params = BTreeMap::new();
    params.insert("plane".into(), plane.name().to_string());
    params.insert("grid".into(), format!("{}x{}", cells.0, cells.1));
    params.insert("svg".into(), args.svg.to_string());
    params.insert(
        "x_axis".into(),
        format!("[{}, {}]", grid.x_axis.min(), grid.x_axis.max()),
    );
    params.insert(
        "y_axis".into(),
        format!("[{}, {}]", grid.y_axis.min(), grid.y_axis.max()),
    );
    params.insert(
        "tie_tol".into(),
        args.tie_tol
            .unwrap_or(match plane {
                Plane::Re => defaults::TIE_TOL_RE,
                Plane::Ed => defaults::TIE_TOL_ED,
            })
            .to_string(),
    );
    write_manifest("project", &inputs, params, &outputs)
}

// ---- recommend ----

fn cmd_recommend(args: RecommendArgs) -> Result<()> {
    let sets = load_pointsets(&args.input)?;
    let models = load_models(&args.models)?;
    let mut distinct: Vec<&str> = Vec::new();
    for m in &models {
        if !distinct.contains(&m.encoder_id.as_str()) {
            distinct.push(&m.encoder_id);
        }
    }
    if distinct.len() < 2 {
        return Err(RedError::TooFewEncoders(distinct.len()));
    }
    let pairs = models
        .iter()
        .map(|m| Ok((matching_pointset(&sets, m)?, &m.surface)))
        .collect::<Result<Vec<_>>>()?;
    let plane: Plane = args.plane.into();
    let report = occluded_configs(&pairs, plane, args.margin)?;
    let text = write_occlusion_report(&report);
    write_atomic(&args.output, text.as_bytes())?;

    let mut inputs: Vec<&Path> = vec![args.input.as_path()];
    inputs.extend(args.models.iter().map(PathBuf::as_path));
    let mut params = BTreeMap::new();
    params.insert("plane".into(), plane.name().to_string());
    params.insert("margin".into(), args.margin.to_string());
    write_manifest("recommend", &inputs, params, &[&args.output])
}
