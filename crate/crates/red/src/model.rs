//! Reading and writing fitted surfaces as JSON model files.
//!
//! Floats are written with 17 significant digits so a written model reloads
//! to bit-identical values, and the field layout is fixed, so identical
//! surfaces serialize to identical bytes.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{RedError, Result};
use crate::fitting::{Basis, FitDomain, LinearSurface, PolySurface, Surface};

/// Version tag written into every model file.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted surface together with the identity of the data it models.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub encoder_id: String,
    pub sequence_name: String,
    pub surface: Surface,
}

/// On-disk layout. Linear models carry vertices/triangles/distortions;
/// polynomial models carry coefficients in the frozen basis order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    kind: String,
    encoder_id: String,
    sequence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangles: Option<Vec<[usize; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex_distortions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
    fit_domain: FitDomain,
}

/// serde_json formatter that writes every float with 17 significant digits.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a model to its canonical JSON text.
pub fn write_model(model: &SurfaceModel) -> Result<String> {
    let file = match &model.surface {
        Surface::Linear(s) => ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: "linear".into(),
            encoder_id: model.encoder_id.clone(),
            sequence: model.sequence_name.clone(),
            vertices: Some(s.triangulation().vertices().to_vec()),
            triangles: Some(s.triangulation().triangles().to_vec()),
            vertex_distortions: Some(s.vertex_distortions().to_vec()),
            coefficients: None,
            fit_domain: model.surface.fit_domain(),
        },
        Surface::Poly(p) => ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: model.surface.kind().into(),
            encoder_id: model.encoder_id.clone(),
            sequence: model.sequence_name.clone(),
            vertices: None,
            triangles: None,
            vertex_distortions: None,
            coefficients: Some(p.coefficients().to_vec()),
            fit_domain: model.surface.fit_domain(),
        },
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter);
    file.serialize(&mut ser)
        .expect("in-memory JSON serialization of finite values");
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
}

fn bad(source: &str, detail: impl Into<String>) -> RedError {
    RedError::ModelFormat {
        path: source.to_string(),
        detail: detail.into(),
    }
}

/// Parses a model from JSON text. `source` labels the origin (usually the
/// file path) in errors.
///
/// Linear models are checked for internal consistency: the stored triangles
/// must equal the triangulation this library derives from the stored
/// vertices, so a model that evaluates differently than it did when written
/// is rejected instead of silently drifting.
pub fn read_model(text: &str, source: &str) -> Result<SurfaceModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|err| bad(source, err.to_string()))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(bad(
            source,
            format!(
                "format_version {} (this build reads {MODEL_FORMAT_VERSION})",
                file.format_version
            ),
        ));
    }
    let dom = file.fit_domain;
    let finite =
        [dom.r_min, dom.r_max, dom.e_min, dom.e_max].iter().all(|v| v.is_finite());
    if !finite || dom.r_min > dom.r_max || dom.e_min > dom.e_max {
        return Err(bad(source, "fit_domain is not a finite, ordered box"));
    }

    let surface = match file.kind.as_str() {
        "linear" => {
            if file.coefficients.is_some() {
                return Err(bad(source, "linear model carries coefficients"));
            }
            let vertices = file
                .vertices
                .ok_or_else(|| bad(source, "linear model lacks vertices"))?;
            let triangles = file
                .triangles
                .ok_or_else(|| bad(source, "linear model lacks triangles"))?;
            let distortions = file
                .vertex_distortions
                .ok_or_else(|| bad(source, "linear model lacks vertex_distortions"))?;
            let rebuilt = LinearSurface::from_vertex_data(vertices, distortions)
                .map_err(|err| bad(source, err.to_string()))?;
            if rebuilt.triangulation().triangles() != triangles.as_slice() {
                return Err(bad(
                    source,
                    "stored triangles disagree with the triangulation of the stored vertices",
                ));
            }
            Surface::Linear(rebuilt)
        }
        kind @ ("poly_custom" | "poly_mixed") => {
            if file.vertices.is_some()
                || file.triangles.is_some()
                || file.vertex_distortions.is_some()
            {
                return Err(bad(source, "polynomial model carries triangulation fields"));
            }
            let basis = if kind == "poly_custom" {
                Basis::Custom6
            } else {
                Basis::Mixed9
            };
            let coefficients = file
                .coefficients
                .ok_or_else(|| bad(source, "polynomial model lacks coefficients"))?;
            if coefficients.len() != basis.coefficient_count() {
                return Err(bad(
                    source,
                    format!(
                        "{} coefficients for kind {kind} (expected {})",
                        coefficients.len(),
                        basis.coefficient_count()
                    ),
                ));
            }
            let poly = PolySurface::from_parts(basis, coefficients, dom)
                .map_err(|err| bad(source, err.to_string()))?;
            Surface::Poly(poly)
        }
        other => return Err(bad(source, format!("unknown kind `{other}`"))),
    };

    Ok(SurfaceModel {
        encoder_id: file.encoder_id,
        sequence_name: file.sequence,
        surface,
    })
}

/// Reads a model from a file on disk.
pub fn read_model_file(path: &Path) -> Result<SurfaceModel> {
    let text = std::fs::read_to_string(path)?;
    read_model(&text, &path.display().to_string())
}
