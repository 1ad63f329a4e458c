//! Surface models over log-rate / log-energy: triangulated piecewise-linear
//! interpolation and the two polynomial families, with a common evaluation
//! interface.

use crate::error::{RedError, Result};
use crate::ingest::PointSet;
use crate::numerics::delaunay::{triangulate, Triangulation};
use crate::numerics::lstsq::{solve_least_squares, DesignMatrix};

/// Fitting method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Linear,
    PolyCustom,
    PolyMixed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Linear, Method::PolyCustom, Method::PolyMixed];

    /// Stable identifier used in reports and model files.
    pub fn name(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::PolyCustom => "poly_custom",
            Method::PolyMixed => "poly_mixed",
        }
    }

    pub fn parse(name: &str) -> Option<Method> {
        match name {
            "linear" => Some(Method::Linear),
            "poly_custom" | "poly-custom" => Some(Method::PolyCustom),
            "poly_mixed" | "poly-mixed" => Some(Method::PolyMixed),
            _ => None,
        }
    }
}

/// Polynomial basis family. Term order is frozen so serialized coefficient
/// lists are comparable across implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// d = p0 + p1·r³ + p2·r² + p3·r + p4·e² + p5·e
    Custom6,
    /// d = p0 + p1·r + p2·e + p3·r² + p4·r·e + p5·e² + p6·r³ + p7·r²·e + p8·r·e²
    Mixed9,
}

impl Basis {
    pub fn coefficient_count(self) -> usize {
        match self {
            Basis::Custom6 => 6,
            Basis::Mixed9 => 9,
        }
    }

    /// The design-matrix row for a query, in the frozen term order.
    pub fn row(self, r: f64, e: f64) -> Vec<f64> {
        match self {
            Basis::Custom6 => vec![1.0, r * r * r, r * r, r, e * e, e],
            Basis::Mixed9 => vec![
                1.0,
                r,
                e,
                r * r,
                r * e,
                e * e,
                r * r * r,
                r * r * e,
                r * e * e,
            ],
        }
    }
}

/// What to do with linear-surface queries outside the convex hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtrapolationMode {
    /// Fail with [`RedError::OutOfHull`].
    #[default]
    Reject,
    /// Extend the plane of the nearest triangle; results are flagged.
    NearestSimplex,
}

/// Axis-aligned bounding box of the (r, e) training data.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitDomain {
    pub r_min: f64,
    pub r_max: f64,
    pub e_min: f64,
    pub e_max: f64,
}

impl FitDomain {
    fn from_coords(coords: &[[f64; 2]]) -> FitDomain {
        let mut d = FitDomain {
            r_min: f64::INFINITY,
            r_max: f64::NEG_INFINITY,
            e_min: f64::INFINITY,
            e_max: f64::NEG_INFINITY,
        };
        for c in coords {
            d.r_min = d.r_min.min(c[0]);
            d.r_max = d.r_max.max(c[0]);
            d.e_min = d.e_min.min(c[1]);
            d.e_max = d.e_max.max(c[1]);
        }
        d
    }

    pub fn contains(&self, r: f64, e: f64) -> bool {
        r >= self.r_min && r <= self.r_max && e >= self.e_min && e <= self.e_max
    }
}

/// One evaluated distortion prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Predicted distortion, dB.
    pub value: f64,
    /// True when the query left the model's trusted region: outside the hull
    /// for a nearest-simplex linear surface, outside the training bounding
    /// box for a polynomial.
    pub extrapolated: bool,
}

/// Triangulated piecewise-linear interpolant over the supporting points.
#[derive(Debug, Clone)]
pub struct LinearSurface {
    triangulation: Triangulation,
    vertex_distortions: Vec<f64>,
    extrapolation_mode: ExtrapolationMode,
    fit_domain: FitDomain,
}

impl LinearSurface {
    /// Rebuilds a surface from stored vertices and their distortions,
    /// re-deriving the triangulation. Loaded surfaces start in
    /// [`ExtrapolationMode::Reject`].
    pub fn from_vertex_data(
        vertices: Vec<[f64; 2]>,
        vertex_distortions: Vec<f64>,
    ) -> Result<LinearSurface> {
        if vertex_distortions.len() != vertices.len() {
            return Err(RedError::DimensionMismatch {
                detail: format!(
                    "{} vertex distortions for {} vertices",
                    vertex_distortions.len(),
                    vertices.len()
                ),
            });
        }
        if let Some(i) = vertex_distortions.iter().position(|d| !d.is_finite()) {
            return Err(RedError::NonFiniteCoordinate { index: i });
        }
        let triangulation = triangulate(&vertices)?;
        let fit_domain = FitDomain::from_coords(&vertices);
        Ok(LinearSurface {
            triangulation,
            vertex_distortions,
            extrapolation_mode: ExtrapolationMode::Reject,
            fit_domain,
        })
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn vertex_distortions(&self) -> &[f64] {
        &self.vertex_distortions
    }

    pub fn extrapolation_mode(&self) -> ExtrapolationMode {
        self.extrapolation_mode
    }

    pub fn with_extrapolation(mut self, mode: ExtrapolationMode) -> LinearSurface {
        self.extrapolation_mode = mode;
        self
    }

    fn eval(&self, r: f64, e: f64, hint: &mut usize) -> Result<Evaluation> {
        match self.triangulation.interpolate(&self.vertex_distortions, [r, e], *hint) {
            Ok((value, tri)) => {
                *hint = tri;
                Ok(Evaluation {
                    value,
                    extrapolated: false,
                })
            }
            Err(RedError::OutOfHull { .. }) if self.extrapolation_mode == ExtrapolationMode::NearestSimplex => {
                Ok(Evaluation {
                    value: self.nearest_plane_value(r, e),
                    extrapolated: true,
                })
            }
            Err(err) => Err(err),
        }
    }

    /// Value of the plane of the triangle closest to (r, e); ties broken by
    /// lowest triangle index.
    fn nearest_plane_value(&self, r: f64, e: f64) -> f64 {
        let verts = self.triangulation.vertices();
        let mut best = (f64::INFINITY, 0usize);
        for (idx, tri) in self.triangulation.triangles().iter().enumerate() {
            let d2 = point_triangle_dist2(
                [r, e],
                verts[tri[0]],
                verts[tri[1]],
                verts[tri[2]],
            );
            if d2 < best.0 {
                best = (d2, idx);
            }
        }
        let tri = self.triangulation.triangles()[best.1];
        plane_value(
            [r, e],
            verts[tri[0]],
            verts[tri[1]],
            verts[tri[2]],
            self.vertex_distortions[tri[0]],
            self.vertex_distortions[tri[1]],
            self.vertex_distortions[tri[2]],
        )
    }
}

/// Polynomial surface with explicit coefficients in the basis term order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySurface {
    basis: Basis,
    coefficients: Vec<f64>,
    fit_domain: FitDomain,
}

impl PolySurface {
    /// Assembles a polynomial surface from stored parts (model files,
    /// fixtures). The coefficient count must match the basis.
    pub fn from_parts(basis: Basis, coefficients: Vec<f64>, fit_domain: FitDomain) -> Result<PolySurface> {
        if coefficients.len() != basis.coefficient_count() {
            return Err(RedError::DimensionMismatch {
                detail: format!(
                    "{} coefficients for a {}-term basis",
                    coefficients.len(),
                    basis.coefficient_count()
                ),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(RedError::NonFiniteCoordinate { index: 0 });
        }
        Ok(PolySurface {
            basis,
            coefficients,
            fit_domain,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn eval(&self, r: f64, e: f64) -> Evaluation {
        let value = self
            .basis
            .row(r, e)
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum();
        Evaluation {
            value,
            extrapolated: !self.fit_domain.contains(r, e),
        }
    }
}

/// A fitted distortion model D(r, e) of either family.
#[derive(Debug, Clone)]
pub enum Surface {
    Linear(LinearSurface),
    Poly(PolySurface),
}

impl Surface {
    pub fn kind(&self) -> &'static str {
        match self {
            Surface::Linear(_) => "linear",
            Surface::Poly(p) => match p.basis {
                Basis::Custom6 => "poly_custom",
                Basis::Mixed9 => "poly_mixed",
            },
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Surface::Linear(_) => Method::Linear,
            Surface::Poly(p) => match p.basis {
                Basis::Custom6 => Method::PolyCustom,
                Basis::Mixed9 => Method::PolyMixed,
            },
        }
    }

    /// Predicted distortion at (r, e).
    ///
    /// Stateless form of [`Surface::eval_with_hint`]; prefer the hinted form
    /// inside scan loops over many nearby queries.
    pub fn eval(&self, r: f64, e: f64) -> Result<Evaluation> {
        let mut hint = 0;
        self.eval_with_hint(r, e, &mut hint)
    }

    /// Predicted distortion at (r, e), reusing `hint` as the point-location
    /// starting triangle and updating it on success. The hint is caller
    /// state, so a shared surface stays safe for concurrent evaluation.
    pub fn eval_with_hint(&self, r: f64, e: f64, hint: &mut usize) -> Result<Evaluation> {
        if !(r.is_finite() && e.is_finite()) {
            return Err(RedError::NonFiniteQuery { r, e });
        }
        match self {
            Surface::Linear(s) => s.eval(r, e, hint),
            Surface::Poly(p) => Ok(p.eval(r, e)),
        }
    }

    /// Bounding box of the training data.
    pub fn fit_domain(&self) -> FitDomain {
        match self {
            Surface::Linear(s) => s.fit_domain,
            Surface::Poly(p) => p.fit_domain,
        }
    }

    /// The distortion range the model is known to cover: exact vertex range
    /// for linear surfaces (a piecewise-linear function attains its extrema
    /// at vertices), a dense fit-domain sample for polynomials.
    pub fn distortion_range(&self) -> (f64, f64) {
        match self {
            Surface::Linear(s) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &d in &s.vertex_distortions {
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                (lo, hi)
            }
            Surface::Poly(p) => {
                let dom = p.fit_domain;
                let n = 32;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..=n {
                    for j in 0..=n {
                        let r = dom.r_min + (dom.r_max - dom.r_min) * i as f64 / n as f64;
                        let e = dom.e_min + (dom.e_max - dom.e_min) * j as f64 / n as f64;
                        let v = p.eval(r, e).value;
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                (lo, hi)
            }
        }
    }
}

fn supporting_coords(ps: &PointSet) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for p in ps.supporting() {
        coords.push([p.r, p.e]);
        values.push(p.d);
    }
    (coords, values)
}

/// Fits the piecewise-linear interpolant to the supporting points.
///
/// By construction the surface reproduces every supporting d exactly, which
/// is what pins the linear method's supporting-point error to zero.
pub fn fit_linear(ps: &PointSet) -> Result<LinearSurface> {
    let (coords, values) = supporting_coords(ps);
    let triangulation = triangulate(&coords)?;
    let fit_domain = FitDomain::from_coords(&coords);
    Ok(LinearSurface {
        triangulation,
        vertex_distortions: values,
        extrapolation_mode: ExtrapolationMode::Reject,
        fit_domain,
    })
}

/// Fits the six-term polynomial d = p0 + p1·r³ + p2·r² + p3·r + p4·e² + p5·e.
pub fn fit_poly_custom(ps: &PointSet) -> Result<PolySurface> {
    fit_poly(ps, Basis::Custom6, "poly_custom")
}

/// Fits the nine-term mixed polynomial
/// d = p0 + p1·r + p2·e + p3·r² + p4·r·e + p5·e² + p6·r³ + p7·r²·e + p8·r·e².
pub fn fit_poly_mixed(ps: &PointSet) -> Result<PolySurface> {
    fit_poly(ps, Basis::Mixed9, "poly_mixed")
}

fn fit_poly(ps: &PointSet, basis: Basis, method: &'static str) -> Result<PolySurface> {
    let (coords, values) = supporting_coords(ps);
    let needed = basis.coefficient_count();
    if coords.len() < needed {
        return Err(RedError::InsufficientData {
            method,
            needed,
            got: coords.len(),
        });
    }
    let mut entries = Vec::with_capacity(coords.len() * needed);
    for c in &coords {
        entries.extend(basis.row(c[0], c[1]));
    }
    let design = DesignMatrix::new(coords.len(), needed, entries)?;
    let solution = solve_least_squares(&design, &values)?;
    Ok(PolySurface {
        basis,
        coefficients: solution.coefficients,
        fit_domain: FitDomain::from_coords(&coords),
    })
}

/// Fits `ps` with the chosen method.
pub fn fit_surface(ps: &PointSet, method: Method) -> Result<Surface> {
    Ok(match method {
        Method::Linear => Surface::Linear(fit_linear(ps)?),
        Method::PolyCustom => Surface::Poly(fit_poly_custom(ps)?),
        Method::PolyMixed => Surface::Poly(fit_poly_mixed(ps)?),
    })
}

fn plane_value(
    q: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    fa: f64,
    fb: f64,
    fc: f64,
) -> f64 {
    let denom = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let wb = ((q[0] - a[0]) * (c[1] - a[1]) - (q[1] - a[1]) * (c[0] - a[0])) / denom;
    let wc = ((b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])) / denom;
    fa + wb * (fb - fa) + wc * (fc - fa)
}

fn point_segment_dist2(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = q[0] - (a[0] + t * ab[0]);
    let dy = q[1] - (a[1] + t * ab[1]);
    dx * dx + dy * dy
}

fn point_triangle_dist2(q: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let inside = [(a, b), (b, c), (c, a)].iter().all(|&(u, v)| {
        (v[0] - u[0]) * (q[1] - u[1]) - (v[1] - u[1]) * (q[0] - u[0]) >= 0.0
    });
    if inside {
        return 0.0;
    }
    point_segment_dist2(q, a, b)
        .min(point_segment_dist2(q, b, c))
        .min(point_segment_dist2(q, c, a))
}
