//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N: PASS/FAIL` verdict line with its runtime bound enforced.
//!
//! Every expected value here is computed by an independent route (closed
//! forms, naive re-accumulation, brute-force search) rather than by the
//! code under test.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use red::defaults;
use red::fitting::{
    fit_linear, fit_poly_custom, fit_poly_mixed, Basis, FitDomain, PolySurface, Surface,
};
use red::ingest::{
    parse_measurements, to_red_points, validate_stability, ColumnSchema, Origin, OriginRule,
    PointSet, RedPoint,
};
use red::metrics::mape;
use red::projection::{invert_rate, occluded_configs, sample_re_grid, AxisSpec, CellOutcome, Plane};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_red.csv");
const BIN: &str = env!("CARGO_BIN_EXE_red");

/// Runs one criterion body, enforces its runtime bound, and prints the
/// verdict straight to stdout (bypassing test-harness capture so the line
/// appears for passing tests too).
fn criterion(n: usize, what: &str, limit: Duration, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let mut verdict = body();
    let elapsed = start.elapsed();
    if verdict.is_ok() && elapsed > limit {
        verdict = Err(format!("runtime {elapsed:?} exceeds the {limit:?} bound"));
    }
    let line = match &verdict {
        Ok(()) => format!("criterion {n}: PASS — {what}\n"),
        Err(why) => format!("criterion {n}: FAIL — {what} ({why})\n"),
    };
    std::io::stdout()
        .write_all(line.as_bytes())
        .expect("stdout is writable");
    if let Err(why) = verdict {
        panic!("criterion {n} failed: {why}");
    }
}

fn check(ok: bool, why: impl Fn() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

// ---- shared synthetic-data helpers ----

/// Twenty well-spread (r, e) sites: a 5 x 4 grid with deterministic jitter,
/// r in about [1, 3] and e in about [2, 6].
fn spread_coords() -> Vec<[f64; 2]> {
    let mut coords = Vec::with_capacity(20);
    for i in 0..5 {
        for j in 0..4 {
            let r = 1.0 + 0.5 * i as f64 + 0.03 * ((i + 2 * j) % 5) as f64;
            let e = 2.0 + (4.0 / 3.0) * j as f64 + 0.05 * ((3 * i + j) % 7) as f64;
            coords.push([r, e]);
        }
    }
    coords
}

fn point_set(coords: &[[f64; 2]], d: impl Fn(f64, f64) -> f64) -> PointSet {
    PointSet {
        encoder_id: "synthetic".into(),
        sequence_name: "Seq".into(),
        points: coords
            .iter()
            .enumerate()
            .map(|(i, &[r, e])| RedPoint {
                r,
                e,
                d: d(r, e),
                origin: Origin::Supporting,
                config: (format!("p{i}"), i as i64),
            })
            .collect(),
    }
}

/// Random jittered-grid coordinates: well spread and full rank for both
/// polynomial bases, never collinear.
fn random_coords(rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let r0 = rng.gen_range(0.5..4.0);
    let e0 = rng.gen_range(0.5..4.0);
    let dr = rng.gen_range(0.3..0.8);
    let de = rng.gen_range(0.5..1.2);
    let mut coords = Vec::with_capacity(20);
    for i in 0..5 {
        for j in 0..4 {
            coords.push([
                r0 + dr * i as f64 + rng.gen_range(-0.08..0.08) * dr,
                e0 + de * j as f64 + rng.gen_range(-0.08..0.08) * de,
            ]);
        }
    }
    coords
}

fn poly6(coefficients: [f64; 6], dom: FitDomain) -> Surface {
    Surface::Poly(PolySurface::from_parts(Basis::Custom6, coefficients.to_vec(), dom).unwrap())
}

fn poly9(coefficients: [f64; 9], dom: FitDomain) -> Surface {
    Surface::Poly(PolySurface::from_parts(Basis::Mixed9, coefficients.to_vec(), dom).unwrap())
}

fn dom(r_min: f64, r_max: f64, e_min: f64, e_max: f64) -> FitDomain {
    FitDomain {
        r_min,
        r_max,
        e_min,
        e_max,
    }
}

// ---- criteria ----

#[test]
fn criterion_01_linear_supporting_exactness() {
    criterion(
        1,
        "piecewise-linear fits reproduce every supporting point (MAPE <= 1e-7 %)",
        Duration::from_secs(1),
        || {
            // Bundled campaign: both encoders.
            let records = parse_measurements(
                fs::File::open(SAMPLE).map_err(|e| e.to_string())?,
                &ColumnSchema::default(),
            )
            .map_err(|e| e.to_string())?;
            let sets = to_red_points(&records, &OriginRule::Column).map_err(|e| e.to_string())?;
            check(sets.len() == 2, || format!("expected 2 encoders, got {}", sets.len()))?;
            for ps in &sets {
                let surface = Surface::Linear(fit_linear(ps).map_err(|e| e.to_string())?);
                let supporting: Vec<RedPoint> = ps.supporting().cloned().collect();
                check(supporting.len() == 20, || {
                    format!("{}: {} supporting points", ps.encoder_id, supporting.len())
                })?;
                let err = mape(&surface, &supporting).map_err(|e| e.to_string())?;
                check(err <= 1e-7, || format!("{}: MAPE {err} %", ps.encoder_id))?;
            }

            // One hundred random synthetic 20-point sets.
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for case in 0..100 {
                let coords = random_coords(&mut rng);
                let points: Vec<RedPoint> = coords
                    .iter()
                    .enumerate()
                    .map(|(i, &[r, e])| RedPoint {
                        r,
                        e,
                        d: rng.gen_range(30.0..45.0),
                        origin: Origin::Supporting,
                        config: (format!("p{i}"), i as i64),
                    })
                    .collect();
                let ps = PointSet {
                    encoder_id: "synthetic".into(),
                    sequence_name: "Seq".into(),
                    points,
                };
                let surface = Surface::Linear(fit_linear(&ps).map_err(|e| e.to_string())?);
                let err = mape(&surface, &ps.points).map_err(|e| e.to_string())?;
                check(err <= 1e-7, || format!("case {case}: MAPE {err} %"))?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_02_model_nesting() {
    criterion(
        2,
        "the 9-term basis never fits worse than the 6-term basis it contains",
        Duration::from_secs(5),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            for case in 0..100 {
                let coords = random_coords(&mut rng);
                let (a, b, c, f) = (
                    rng.gen_range(25.0..40.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-0.5..0.5),
                );
                let noise: Vec<f64> = (0..20).map(|_| rng.gen_range(-0.4..0.4)).collect();
                let points: Vec<RedPoint> = coords
                    .iter()
                    .enumerate()
                    .map(|(i, &[r, e])| RedPoint {
                        r,
                        e,
                        d: a + b * r + c * e + f * r * e + noise[i],
                        origin: Origin::Supporting,
                        config: (format!("p{i}"), i as i64),
                    })
                    .collect();
                let ps = PointSet {
                    encoder_id: "synthetic".into(),
                    sequence_name: "Seq".into(),
                    points,
                };
                let custom = Surface::Poly(fit_poly_custom(&ps).map_err(|e| e.to_string())?);
                let mixed = Surface::Poly(fit_poly_mixed(&ps).map_err(|e| e.to_string())?);
                let sse = |s: &Surface| -> f64 {
                    ps.points
                        .iter()
                        .map(|p| {
                            let d_hat = s.eval(p.r, p.e).unwrap().value;
                            (d_hat - p.d) * (d_hat - p.d)
                        })
                        .sum()
                };
                let (sse_custom, sse_mixed) = (sse(&custom), sse(&mixed));
                check(sse_mixed <= sse_custom * (1.0 + 1e-9), || {
                    format!("case {case}: SSE(mixed9) {sse_mixed} > SSE(custom6) {sse_custom}")
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_03_coefficient_recovery() {
    criterion(
        3,
        "known polynomial coefficients are recovered to 1e-6 relative",
        Duration::from_secs(1),
        || {
            let coords = spread_coords();
            let q6 = [38.0, 0.08, -0.6, 2.0, -0.05, 0.4];
            let q9 = [36.0, 1.2, 0.9, -0.35, 0.12, -0.08, 0.04, -0.02, 0.01];

            let d6 = |r: f64, e: f64| {
                q6[0] + q6[1] * r * r * r + q6[2] * r * r + q6[3] * r + q6[4] * e * e + q6[5] * e
            };
            let fitted = fit_poly_custom(&point_set(&coords, d6)).map_err(|e| e.to_string())?;
            for (i, (got, want)) in fitted.coefficients().iter().zip(&q6).enumerate() {
                check((got - want).abs() <= 1e-6 * want.abs(), || {
                    format!("custom6 coefficient {i}: got {got}, want {want}")
                })?;
            }
            let ps = point_set(&coords, d6);
            let err = mape(&Surface::Poly(fitted), &ps.points).map_err(|e| e.to_string())?;
            check(err <= 1e-6, || format!("custom6 MAPE {err} %"))?;

            let d9 = |r: f64, e: f64| {
                q9[0] + q9[1] * r
                    + q9[2] * e
                    + q9[3] * r * r
                    + q9[4] * r * e
                    + q9[5] * e * e
                    + q9[6] * r * r * r
                    + q9[7] * r * r * e
                    + q9[8] * r * e * e
            };
            let fitted = fit_poly_mixed(&point_set(&coords, d9)).map_err(|e| e.to_string())?;
            for (i, (got, want)) in fitted.coefficients().iter().zip(&q9).enumerate() {
                check((got - want).abs() <= 1e-6 * want.abs(), || {
                    format!("mixed9 coefficient {i}: got {got}, want {want}")
                })?;
            }
            let ps = point_set(&coords, d9);
            let err = mape(&Surface::Poly(fitted), &ps.points).map_err(|e| e.to_string())?;
            check(err <= 1e-6, || format!("mixed9 MAPE {err} %"))?;
            Ok(())
        },
    );
}

#[test]
fn criterion_04_mape_oracle_equivalence() {
    criterion(
        4,
        "MAPE matches an independent naive accumulation to 1e-12 relative",
        Duration::from_secs(5),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(47);
            for case in 0..1000 {
                let surface = poly6(
                    [
                        rng.gen_range(30.0..45.0),
                        rng.gen_range(-0.05..0.05),
                        rng.gen_range(-0.3..0.3),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-0.1..0.1),
                        rng.gen_range(-0.8..0.8),
                    ],
                    dom(0.0, 5.0, 0.0, 5.0),
                );
                let n = rng.gen_range(5..30);
                let points: Vec<RedPoint> = (0..n)
                    .map(|i| {
                        let r = rng.gen_range(0.0..5.0);
                        let e = rng.gen_range(0.0..5.0);
                        let d = surface.eval(r, e).unwrap().value + rng.gen_range(-2.0..2.0);
                        RedPoint {
                            r,
                            e,
                            d,
                            origin: Origin::Supporting,
                            config: (format!("p{i}"), i as i64),
                        }
                    })
                    .collect();

                let got = mape(&surface, &points).map_err(|e| e.to_string())?;
                let mut accumulated = 0.0;
                for p in &points {
                    let d_hat = surface.eval(p.r, p.e).unwrap().value;
                    accumulated += (d_hat - p.d).abs() / p.d.abs();
                }
                let want = 100.0 * accumulated / points.len() as f64;
                check((got - want).abs() <= 1e-12 * want.abs().max(1e-300), || {
                    format!("case {case}: got {got}, naive {want}")
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_05_affine_exactness() {
    criterion(
        5,
        "linear interpolation reproduces affine data at 1000 in-hull queries",
        Duration::from_secs(1),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(59);
            let (a, b, c) = (1.7, -0.9, 36.0);
            let plane = |r: f64, e: f64| a * r + b * e + c;
            let coords = random_coords(&mut rng);
            let ps = point_set(&coords, plane);
            let fitted = fit_linear(&ps).map_err(|e| e.to_string())?;
            let triangles = fitted.triangulation().triangles().to_vec();
            let vertices = fitted.triangulation().vertices().to_vec();
            let surface = Surface::Linear(fitted);

            for case in 0..1000 {
                // A random point of a random triangle, in barycentric form:
                // in-hull by construction.
                let [i, j, k] = triangles[rng.gen_range(0..triangles.len())];
                let (mut u, mut v, mut w) = (
                    rng.gen_range(0.0..1.0_f64),
                    rng.gen_range(0.0..1.0_f64),
                    rng.gen_range(0.0..1.0_f64),
                );
                let total = u + v + w;
                if total == 0.0 {
                    continue;
                }
                u /= total;
                v /= total;
                w /= total;
                let r = u * vertices[i][0] + v * vertices[j][0] + w * vertices[k][0];
                let e = u * vertices[i][1] + v * vertices[j][1] + w * vertices[k][1];
                let want = plane(r, e);
                let got = surface.eval(r, e).map_err(|err| err.to_string())?.value;
                check((got - want).abs() <= 1e-9 * want.abs().max(1.0), || {
                    format!("case {case} at ({r}, {e}): got {got}, want {want}")
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_06_inversion_soundness() {
    criterion(
        6,
        "bisection lands within 1e-8 dB of the target; cube root gives r = 2",
        Duration::from_secs(1),
        || {
            // Monotone-in-r surfaces with varied energy dependence.
            let surfaces = [
                poly6([30.0, 0.0, 0.0, 1.0, 0.0, 0.0], dom(0.0, 5.0, 0.0, 5.0)),
                poly6([28.0, 0.01, 0.1, 2.0, -0.02, 0.5], dom(0.0, 4.0, 0.0, 4.0)),
                poly9(
                    [32.0, 1.5, 0.3, 0.2, 0.05, -0.02, 0.01, 0.0, 0.0],
                    dom(0.0, 4.0, 0.0, 4.0),
                ),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(61);
            for (s, surface) in surfaces.iter().enumerate() {
                let d = surface.fit_domain();
                for case in 0..50 {
                    let e = rng.gen_range(d.e_min..d.e_max);
                    let lo = surface.eval(d.r_min, e).unwrap().value;
                    let hi = surface.eval(d.r_max, e).unwrap().value;
                    let target = lo + (hi - lo) * rng.gen_range(0.05..0.95);
                    let r_star = invert_rate(
                        surface,
                        e,
                        target,
                        (d.r_min, d.r_max),
                        defaults::INVERSION_TOL,
                    )
                    .map_err(|err| format!("surface {s} case {case}: {err}"))?;
                    let reached = surface.eval(r_star, e).unwrap().value;
                    check((reached - target).abs() <= 1e-8, || {
                        format!("surface {s} case {case}: |{reached} - {target}| > 1e-8")
                    })?;
                }
            }

            // Analytic check: d = r^3 hits d = 8 exactly at r = 2.
            let cube = poly9(
                [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                dom(0.0, 3.0, 0.0, 1.0),
            );
            let r_star = invert_rate(&cube, 0.5, 8.0, (0.0, 3.0), defaults::INVERSION_TOL)
                .map_err(|e| e.to_string())?;
            check((r_star - 2.0).abs() <= 1e-8, || {
                format!("cube root: got {r_star}, want 2")
            })?;
            Ok(())
        },
    );
}

#[test]
fn criterion_07_dominance_grid_correctness() {
    criterion(
        7,
        "the d = r vs d = e winner boundary tracks r = e within one cell",
        Duration::from_secs(5),
        || {
            let square = dom(0.0, 4.0, 0.0, 4.0);
            let rate_favored = poly6([0.0, 0.0, 0.0, 1.0, 0.0, 0.0], square); // d = r
            let energy_favored = poly6([0.0, 0.0, 0.0, 0.0, 0.0, 1.0], square); // d = e
            let surfaces = [("rate", &rate_favored), ("energy", &energy_favored)];
            let x_axis = AxisSpec::new(0.0, 4.0, 200).map_err(|e| e.to_string())?;
            let y_axis = AxisSpec::new(0.0, 4.0, 200).map_err(|e| e.to_string())?;
            let tie_tol = 1e-6;
            let grid =
                sample_re_grid(&surfaces, &x_axis, &y_axis, tie_tol).map_err(|e| e.to_string())?;

            let cell = 4.0 / 200.0;
            for yi in 0..200 {
                for xi in 0..200 {
                    let (r, e) = (x_axis.center(xi), y_axis.center(yi));
                    let outcome = grid.outcome(xi, yi);
                    // Analytic winner, conclusive beyond one cell width of
                    // the diagonal.
                    if r - e > cell {
                        check(outcome == CellOutcome::Winner(0), || {
                            format!("cell ({xi}, {yi}) at r - e = {}: {outcome:?}", r - e)
                        })?;
                    } else if e - r > cell {
                        check(outcome == CellOutcome::Winner(1), || {
                            format!("cell ({xi}, {yi}) at e - r = {}: {outcome:?}", e - r)
                        })?;
                    }
                    // Re-evaluate every winner directly: d = r vs d = e.
                    if let CellOutcome::Winner(k) = outcome {
                        let (winner, loser) = if k == 0 { (r, e) } else { (e, r) };
                        check(winner - loser > tie_tol, || {
                            format!(
                                "cell ({xi}, {yi}): winner {k} margin {} not above the tie tolerance",
                                winner - loser
                            )
                        })?;
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_08_occlusion_report_fidelity() {
    criterion(
        8,
        "the three-encoder fixture yields exactly the constructed occlusions",
        Duration::from_secs(1),
        || {
            // `legacy` (a rising surface probed at four presets) is covered
            // at its slow presets by `modern`, a 50 dB surface trusted only
            // at high energies. `niche` lives in an untouched rate band.
            let legacy_surface = poly6([30.0, 0.0, 0.0, 1.0, 0.0, 0.0], dom(0.0, 4.0, 0.0, 10.0));
            let modern_surface = poly6([50.0, 0.0, 0.0, 0.0, 0.0, 0.0], dom(0.0, 4.0, 6.0, 10.0));
            let niche_surface = poly6([25.0, 0.0, 0.0, 0.0, 0.0, 0.0], dom(6.0, 8.0, 0.0, 3.0));

            let config_set = |encoder: &str, configs: &[(&str, i64, f64, f64, f64)]| PointSet {
                encoder_id: encoder.into(),
                sequence_name: "Seq".into(),
                points: configs
                    .iter()
                    .map(|&(preset, quality, r, e, d)| RedPoint {
                        r,
                        e,
                        d,
                        origin: Origin::Supporting,
                        config: (preset.to_string(), quality),
                    })
                    .collect(),
            };
            let legacy = config_set(
                "legacy",
                &[
                    ("ultrafast", 30, 0.5, 1.0, 30.5),
                    ("fast", 30, 1.5, 2.0, 31.5),
                    ("slow", 30, 1.0, 7.0, 31.0),
                    ("veryslow", 30, 2.0, 9.0, 32.0),
                ],
            );
            let modern = config_set("modern", &[("medium", 32, 2.0, 8.0, 50.0)]);
            let niche = config_set("niche", &[("medium", 35, 7.0, 1.5, 25.0)]);

            let encoders: Vec<(&PointSet, &Surface)> = vec![
                (&legacy, &legacy_surface),
                (&modern, &modern_surface),
                (&niche, &niche_surface),
            ];
            let report =
                occluded_configs(&encoders, Plane::Re, 0.0).map_err(|e| e.to_string())?;

            // Brute force over every (config, other-encoder) pair.
            let mut expected: Vec<(String, String, i64, String, f64)> = Vec::new();
            for (i, (ps, _)) in encoders.iter().enumerate() {
                for p in ps.supporting() {
                    let mut strongest: Option<(String, f64)> = None;
                    for (j, (other_ps, other_surface)) in encoders.iter().enumerate() {
                        if i == j || !other_surface.fit_domain().contains(p.r, p.e) {
                            continue;
                        }
                        let margin = other_surface.eval(p.r, p.e).unwrap().value - p.d;
                        let better = match &strongest {
                            Some((_, best)) => margin > *best,
                            None => margin > 0.0,
                        };
                        if better {
                            strongest = Some((other_ps.encoder_id.clone(), margin));
                        }
                    }
                    if let Some((occluder, margin)) = strongest {
                        expected.push((
                            ps.encoder_id.clone(),
                            p.config.0.clone(),
                            p.config.1,
                            occluder,
                            margin,
                        ));
                    }
                }
            }
            expected.sort_by(|a, b| b.4.total_cmp(&a.4));

            // The constructed answer: exactly the two slow presets of the
            // legacy encoder, occluded by the modern one.
            let constructed = [
                ("legacy", "slow", 30, "modern", 19.0),
                ("legacy", "veryslow", 30, "modern", 18.0),
            ];
            check(expected.len() == constructed.len(), || {
                format!("brute force found {} entries: {expected:?}", expected.len())
            })?;
            for (brute, want) in expected.iter().zip(&constructed) {
                check(
                    brute.0 == want.0
                        && brute.1 == want.1
                        && brute.2 == want.2
                        && brute.3 == want.3
                        && (brute.4 - want.4).abs() <= 1e-12,
                    || format!("brute force {brute:?} vs constructed {want:?}"),
                )?;
            }

            check(report.entries.len() == expected.len(), || {
                format!("report has {} entries, want {}", report.entries.len(), expected.len())
            })?;
            for (entry, want) in report.entries.iter().zip(&expected) {
                check(
                    entry.encoder_id == want.0
                        && entry.preset == want.1
                        && entry.quality == want.2
                        && entry.occluding_encoder_id == want.3
                        && (entry.margin - want.4).abs() <= 1e-12,
                    || format!("entry {entry:?} vs brute force {want:?}"),
                )?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_09_end_to_end_cli() {
    criterion(
        9,
        "the full pipeline exits 0 with schema-valid, byte-reproducible outputs",
        Duration::from_secs(10),
        || {
            let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
            let run = |dir: &Path| -> Result<(), String> {
                let path = |name: &str| dir.join(name).to_str().unwrap().to_string();
                let steps: Vec<Vec<String>> = vec![
                    vec![
                        "energy".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--output".into(),
                        path("energy.csv"),
                        "--strict".into(),
                    ],
                    vec![
                        "fit".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--encoder".into(),
                        "x264".into(),
                        "--method".into(),
                        "linear".into(),
                        "--output".into(),
                        path("x264_linear.json"),
                    ],
                    vec![
                        "fit".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--encoder".into(),
                        "x264".into(),
                        "--method".into(),
                        "poly-mixed".into(),
                        "--output".into(),
                        path("x264_mixed.json"),
                    ],
                    vec![
                        "fit".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--encoder".into(),
                        "x265".into(),
                        "--method".into(),
                        "poly-mixed".into(),
                        "--output".into(),
                        path("x265_mixed.json"),
                    ],
                    vec![
                        "eval".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--models".into(),
                        format!(
                            "{},{},{}",
                            path("x264_linear.json"),
                            path("x264_mixed.json"),
                            path("x265_mixed.json")
                        ),
                        "--classes".into(),
                        "both".into(),
                        "--output".into(),
                        path("report.csv"),
                    ],
                    vec![
                        "project".into(),
                        "--models".into(),
                        format!("{},{}", path("x264_mixed.json"), path("x265_mixed.json")),
                        "--plane".into(),
                        "re".into(),
                        "--svg".into(),
                        "--output".into(),
                        path("grid.csv"),
                    ],
                    vec![
                        "recommend".into(),
                        "--input".into(),
                        SAMPLE.into(),
                        "--models".into(),
                        format!("{},{}", path("x264_mixed.json"), path("x265_mixed.json")),
                        "--plane".into(),
                        "re".into(),
                        "--output".into(),
                        path("occlusions.csv"),
                    ],
                ];
                for step in steps {
                    let output = Command::new(BIN)
                        .args(&step)
                        .output()
                        .map_err(|e| e.to_string())?;
                    check(output.status.code() == Some(0), || {
                        format!(
                            "`red {}` exited {:?}: {}",
                            step.join(" "),
                            output.status.code(),
                            String::from_utf8_lossy(&output.stderr)
                        )
                    })?;
                }
                Ok(())
            };

            run(dir.path())?;

            // Schema checks on every output.
            let read = |name: &str| -> Result<String, String> {
                fs::read_to_string(dir.path().join(name)).map_err(|e| format!("{name}: {e}"))
            };
            let energy = read("energy.csv")?;
            check(
                energy.lines().next()
                    == Some("sequence,encoder,preset,quality,n_repeats,energy_enc_j,ci_half_width_j,relative_half_width,stable"),
                || "energy.csv header".into(),
            )?;
            check(energy.lines().count() == 1 + 88, || {
                format!("energy.csv rows: {}", energy.lines().count() - 1)
            })?;
            check(energy.lines().skip(1).all(|l| l.ends_with(",true")), || {
                "all configurations stable".into()
            })?;

            let linear: serde_json::Value =
                serde_json::from_str(&read("x264_linear.json")?).map_err(|e| e.to_string())?;
            check(linear["format_version"] == 1 && linear["kind"] == "linear", || {
                "linear model schema".into()
            })?;
            check(linear["vertices"].as_array().map(Vec::len) == Some(20), || {
                "linear model vertex count".into()
            })?;
            let mixed: serde_json::Value =
                serde_json::from_str(&read("x265_mixed.json")?).map_err(|e| e.to_string())?;
            check(
                mixed["coefficients"].as_array().map(Vec::len) == Some(9),
                || "mixed model coefficient count".into(),
            )?;

            let report = read("report.csv")?;
            check(
                report.lines().next()
                    == Some("encoder,method,mape_supporting_pct,mape_non_supporting_pct,sse,r_square,n_s,n_ns"),
                || "report.csv header".into(),
            )?;
            check(report.lines().count() == 1 + 3, || {
                format!("report.csv rows: {}", report.lines().count() - 1)
            })?;
            check(
                report.lines().nth(1).is_some_and(|l| l.starts_with("x264,linear,0,")),
                || "linear supporting MAPE row".into(),
            )?;

            let grid = read("grid.csv")?;
            check(
                grid.lines().next() == Some("x_center,y_center,outcome,winning_value"),
                || "grid.csv header".into(),
            )?;
            let body: Vec<&str> = grid.lines().skip(1).collect();
            check(body.len() == 200 * 200, || format!("grid rows: {}", body.len()))?;
            for line in &body {
                let cells: Vec<&str> = line.split(',').collect();
                let well_formed = cells.len() == 4
                    && cells[0].parse::<f64>().is_ok()
                    && cells[1].parse::<f64>().is_ok()
                    && matches!(cells[2], "x264" | "x265" | "tie" | "out_of_domain")
                    && (cells[3] == "-" || cells[3].parse::<f64>().is_ok());
                check(well_formed, || format!("grid row `{line}`"))?;
            }
            let svg = read("grid.svg")?;
            check(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), || {
                "grid.svg structure".into()
            })?;

            let occlusions = read("occlusions.csv")?;
            check(
                occlusions.lines().next() == Some("plane,encoder,preset,quality,occluded_by,margin"),
                || "occlusions.csv header".into(),
            )?;
            let margins: Vec<f64> = occlusions
                .lines()
                .skip(1)
                .map(|l| l.rsplit(',').next().unwrap().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            check(margins.windows(2).all(|w| w[0] >= w[1]), || {
                "occlusion margins sorted descending".into()
            })?;

            // Byte-identical on a rerun into the same paths (manifests
            // included: they carry no timestamps).
            let all_files = || -> Result<Vec<(String, Vec<u8>)>, String> {
                let mut files: Vec<(String, Vec<u8>)> = Vec::new();
                for entry in fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
                    let entry = entry.map_err(|e| e.to_string())?;
                    files.push((
                        entry.file_name().to_string_lossy().into_owned(),
                        fs::read(entry.path()).map_err(|e| e.to_string())?,
                    ));
                }
                files.sort();
                Ok(files)
            };
            let first = all_files()?;
            check(first.len() == 15, || {
                format!("expected 8 outputs + 7 manifests, found {}", first.len())
            })?;
            run(dir.path())?;
            let second = all_files()?;
            for ((name, a), (_, b)) in first.iter().zip(&second) {
                check(a == b, || format!("{name} changed between identical runs"))?;
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_10_stability_verdict() {
    criterion(
        10,
        "identical repeats pass; the verdict is scale-invariant to 1e-12",
        Duration::from_secs(1),
        || {
            let identical = validate_stability(
                &[60.0, 60.0, 60.0],
                defaults::STABILITY_ALPHA,
                defaults::STABILITY_BETA,
            )
            .map_err(|e| e.to_string())?;
            check(identical.passed && identical.relative_half_width == 0.0, || {
                format!("identical repeats: {identical:?}")
            })?;

            let mut rng = ChaCha8Rng::seed_from_u64(83);
            for case in 0..100 {
                let n = rng.gen_range(2..=8);
                let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..100.0)).collect();
                let scale = 10.0_f64.powf(rng.gen_range(-6.0..6.0));
                let scaled: Vec<f64> = samples.iter().map(|s| s * scale).collect();

                let base = validate_stability(
                    &samples,
                    defaults::STABILITY_ALPHA,
                    defaults::STABILITY_BETA,
                )
                .map_err(|e| e.to_string())?;
                let moved = validate_stability(
                    &scaled,
                    defaults::STABILITY_ALPHA,
                    defaults::STABILITY_BETA,
                )
                .map_err(|e| e.to_string())?;

                let drift = (base.relative_half_width - moved.relative_half_width).abs();
                let bound = 1e-12 * base.relative_half_width.abs().max(1e-300);
                check(drift <= bound, || {
                    format!(
                        "case {case} (scale {scale:.3e}): relative width {} vs {}",
                        base.relative_half_width, moved.relative_half_width
                    )
                })?;
                check(base.passed == moved.passed, || {
                    format!("case {case}: verdict changed under scaling")
                })?;
                let mean_drift = (moved.mean_energy - scale * base.mean_energy).abs();
                check(mean_drift <= 1e-12 * (scale * base.mean_energy).abs(), || {
                    format!("case {case}: mean did not scale linearly")
                })?;
            }
            Ok(())
        },
    );
}
