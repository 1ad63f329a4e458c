//! Incremental Delaunay triangulation with exact predicates, plus
//! piecewise-linear interpolation over the result.
//!
//! Points are inserted in lexicographic (x, then y) order, so every new point
//! lies outside the hull built so far and connects to the strictly visible
//! hull edges. Local Delaunay violations are repaired by Lawson edge flips.
//! All orientation and incircle decisions go through the robust predicates in
//! [`super::predicates`], which makes the construction deterministic for any
//! input: exactly cocircular quads are resolved by flipping toward the
//! diagonal whose lower endpoint has the smaller vertex index.

use crate::error::{RedError, Result};
use crate::numerics::predicates::{incircle, orient2d};

/// A Delaunay triangulation of a planar point set.
///
/// Triangle vertex triples are counterclockwise. `neighbors[t][i]` is the
/// triangle sharing the edge opposite vertex `i` of triangle `t`, or `None`
/// on the hull boundary. `hull` lists the boundary vertices counterclockwise
/// starting from the smallest vertex index; points that fall on a boundary
/// segment between corners are kept in the cycle.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    hull: Vec<usize>,
}

impl Triangulation {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    pub fn hull(&self) -> &[usize] {
        &self.hull
    }

    /// Finds the triangle whose closed region contains `point`, walking from
    /// triangle `hint`. Returns `None` when the point lies strictly outside
    /// the convex hull.
    pub fn locate(&self, point: [f64; 2], hint: usize) -> Option<usize> {
        if self.triangles.is_empty() {
            return None;
        }
        let mut t = hint.min(self.triangles.len() - 1);
        let cap = 2 * self.triangles.len() + 32;
        'walk: for _ in 0..cap {
            for i in 0..3 {
                let a = self.triangles[t][(i + 1) % 3];
                let b = self.triangles[t][(i + 2) % 3];
                if orient2d(self.vertices[a], self.vertices[b], point).is_negative() {
                    // Strictly beyond a hull edge (no neighbor): outside.
                    t = self.neighbors[t][i]?;
                    continue 'walk;
                }
            }
            return Some(t);
        }
        // The deterministic walk can revisit triangles on adversarial
        // inputs; fall back to an exhaustive scan.
        (0..self.triangles.len()).find(|&c| self.contains(c, point))
    }

    fn contains(&self, t: usize, point: [f64; 2]) -> bool {
        (0..3).all(|i| {
            let a = self.triangles[t][(i + 1) % 3];
            let b = self.triangles[t][(i + 2) % 3];
            !orient2d(self.vertices[a], self.vertices[b], point).is_negative()
        })
    }

    /// Piecewise-linear interpolation of per-vertex `values` at `point`.
    ///
    /// Returns the value together with the containing triangle, which makes a
    /// good `hint` for the next query. Queries outside the hull fail with
    /// [`RedError::OutOfHull`]; queries that hit a vertex exactly return the
    /// stored value unchanged.
    pub fn interpolate(
        &self,
        values: &[f64],
        point: [f64; 2],
        hint: usize,
    ) -> Result<(f64, usize)> {
        if values.len() != self.vertices.len() {
            return Err(RedError::DimensionMismatch {
                detail: format!(
                    "{} vertex values for {} vertices",
                    values.len(),
                    self.vertices.len()
                ),
            });
        }
        let t = self.locate(point, hint).ok_or(RedError::OutOfHull {
            x: point[0],
            y: point[1],
        })?;
        let [i0, i1, i2] = self.triangles[t];
        for vi in [i0, i1, i2] {
            if self.vertices[vi] == point {
                return Ok((values[vi], t));
            }
        }
        let p0 = self.vertices[i0];
        let p1 = self.vertices[i1];
        let p2 = self.vertices[i2];
        let denom = cross(sub(p1, p0), sub(p2, p0));
        let w0 = cross(sub(p1, point), sub(p2, point));
        let w1 = cross(sub(p2, point), sub(p0, point));
        let w2 = cross(sub(p0, point), sub(p1, point));
        let value = (w0 * values[i0] + w1 * values[i1] + w2 * values[i2]) / denom;
        Ok((value, t))
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Builds the Delaunay triangulation of `points`.
///
/// Fails on fewer than three points, non-finite coordinates, exact duplicate
/// points, or an entirely collinear input. Vertex indices in the result refer
/// to positions in `points`.
pub fn triangulate(points: &[[f64; 2]]) -> Result<Triangulation> {
    if points.len() < 3 {
        return Err(RedError::TooFewPoints(points.len()));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(RedError::NonFiniteCoordinate { index: i });
        }
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].partial_cmp(&points[j]).expect("finite coords"));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(RedError::DuplicatePoint {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }

    let s0 = order[0];
    let s1 = order[1];
    let apex_pos = order
        .iter()
        .enumerate()
        .skip(2)
        .find(|&(_, &sk)| !orient2d(points[s0], points[s1], points[sk]).is_zero())
        .map(|(k, _)| k)
        .ok_or(RedError::CollinearPoints)?;
    let sj = order[apex_pos];

    let mut builder = Builder::new(points);
    builder.seed(s0, s1, sj);
    // Points before the apex in sorted order are collinear with the first
    // two; each still lies strictly outside the hull grown so far, so the
    // ordinary insertion step applies to them as well.
    for &p in &order[2..apex_pos] {
        builder.insert(p);
    }
    for &p in &order[apex_pos + 1..] {
        builder.insert(p);
    }
    Ok(builder.finish())
}

struct Builder<'a> {
    points: &'a [[f64; 2]],
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    /// Hull vertices, counterclockwise.
    hull: Vec<usize>,
    /// `hull_tris[k]` owns the directed hull edge `(hull[k], hull[k+1])`.
    hull_tris: Vec<usize>,
    /// Edges pending a Delaunay check, as (triangle, opposite-vertex index).
    stack: Vec<(usize, usize)>,
}

impl<'a> Builder<'a> {
    fn new(points: &'a [[f64; 2]]) -> Self {
        Builder {
            points,
            triangles: Vec::new(),
            neighbors: Vec::new(),
            hull: Vec::new(),
            hull_tris: Vec::new(),
            stack: Vec::new(),
        }
    }

    fn seed(&mut self, s0: usize, s1: usize, apex: usize) {
        let tri = if orient2d(self.points[s0], self.points[s1], self.points[apex]).is_positive() {
            [s0, s1, apex]
        } else {
            [s1, s0, apex]
        };
        self.triangles.push(tri);
        self.neighbors.push([None; 3]);
        self.hull = tri.to_vec();
        self.hull_tris = vec![0, 0, 0];
    }

    /// Connects `pi`, which must lie strictly outside the current hull, to
    /// every strictly visible hull edge, then restores the Delaunay property.
    fn insert(&mut self, pi: usize) {
        let h = self.hull.len();
        let p = self.points[pi];
        let visible: Vec<bool> = (0..h)
            .map(|k| {
                let a = self.points[self.hull[k]];
                let b = self.points[self.hull[(k + 1) % h]];
                orient2d(a, b, p).is_negative()
            })
            .collect();
        let m = visible.iter().filter(|&&v| v).count();
        assert!(m > 0 && m < h, "inserted point must be outside the hull");
        let k0 = (0..h)
            .find(|&k| visible[k] && !visible[(k + h - 1) % h])
            .expect("a visible arc exists");
        debug_assert!(
            (0..m).all(|off| visible[(k0 + off) % h]),
            "visible hull edges must form one contiguous arc"
        );

        let first_new = self.triangles.len();
        for off in 0..m {
            let k = (k0 + off) % h;
            let a = self.hull[k];
            let b = self.hull[(k + 1) % h];
            let base = self.hull_tris[k];
            let idx = self.triangles.len();
            self.triangles.push([b, a, pi]);
            // Edge (a, p) joins the previous fan triangle, (p, b) the next,
            // and the base edge (b, a) faces the old hull triangle.
            self.neighbors.push([
                if off > 0 { Some(idx - 1) } else { None },
                if off + 1 < m { Some(idx + 1) } else { None },
                Some(base),
            ]);
            let slot = edge_slot(&self.triangles, base, a, b);
            debug_assert!(self.neighbors[base][slot].is_none());
            self.neighbors[base][slot] = Some(idx);
            self.stack.push((idx, 2));
        }
        let last_new = self.triangles.len() - 1;

        let mut new_hull = Vec::with_capacity(h - m + 2);
        let mut new_hull_tris = Vec::with_capacity(h - m + 2);
        for i in 0..h - m {
            let k = (k0 + m + i) % h;
            new_hull.push(self.hull[k]);
            new_hull_tris.push(self.hull_tris[k]);
        }
        new_hull.push(self.hull[k0]);
        new_hull_tris.push(first_new);
        new_hull.push(pi);
        new_hull_tris.push(last_new);
        self.hull = new_hull;
        self.hull_tris = new_hull_tris;

        self.legalize();
    }

    fn legalize(&mut self) {
        while let Some((t, i)) = self.stack.pop() {
            let Some(n) = self.neighbors[t][i] else {
                continue;
            };
            let c = self.triangles[t][i];
            let u = self.triangles[t][(i + 1) % 3];
            let v = self.triangles[t][(i + 2) % 3];
            // Flips may have retargeted this stack entry; the check below is
            // only meaningful while (t, i) still faces n over edge (u, v).
            let Some(j) = (0..3).find(|&j| {
                self.triangles[n][(j + 1) % 3] == v && self.triangles[n][(j + 2) % 3] == u
            }) else {
                continue;
            };
            let d = self.triangles[n][j];

            let [t0, t1, t2] = self.triangles[t];
            let s = incircle(
                self.points[t0],
                self.points[t1],
                self.points[t2],
                self.points[d],
            );
            let flip = if s.is_positive() {
                true
            } else if s.is_zero() {
                // Cocircular tie: prefer the diagonal whose lower endpoint
                // has the smaller vertex index.
                c.min(d) < u.min(v)
            } else {
                false
            };
            if flip {
                self.flip(t, i, n, j);
            }
        }
    }

    /// Replaces the shared edge (u, v) of triangles `t` and `n` by the cross
    /// diagonal (c, d), reusing both slots, and queues the four outer edges
    /// of the quad for rechecking.
    fn flip(&mut self, t: usize, i: usize, n: usize, j: usize) {
        let c = self.triangles[t][i];
        let u = self.triangles[t][(i + 1) % 3];
        let v = self.triangles[t][(i + 2) % 3];
        let d = self.triangles[n][j];

        let nb_a = self.neighbors[t][(i + 1) % 3]; // across (v, c)
        let nb_b = self.neighbors[t][(i + 2) % 3]; // across (c, u)
        let nb_c = self.neighbors[n][(j + 1) % 3]; // across (u, d)
        let nb_d = self.neighbors[n][(j + 2) % 3]; // across (d, v)

        self.triangles[t] = [c, u, d];
        self.neighbors[t] = [nb_c, Some(n), nb_b];
        self.triangles[n] = [c, d, v];
        self.neighbors[n] = [nb_d, nb_a, Some(t)];

        match nb_c {
            Some(x) => replace_neighbor(&mut self.neighbors, x, n, t),
            // Edge (u, d) was a hull edge of n and now belongs to t.
            None => self.fix_hull_owner(u, d, t),
        }
        match nb_a {
            Some(x) => replace_neighbor(&mut self.neighbors, x, t, n),
            None => self.fix_hull_owner(v, c, n),
        }

        self.stack.push((t, 0));
        self.stack.push((t, 2));
        self.stack.push((n, 0));
        self.stack.push((n, 1));
    }

    fn fix_hull_owner(&mut self, a: usize, b: usize, owner: usize) {
        let h = self.hull.len();
        let k = (0..h)
            .find(|&k| self.hull[k] == a && self.hull[(k + 1) % h] == b)
            .expect("hull edge present");
        self.hull_tris[k] = owner;
    }

    fn finish(mut self) -> Triangulation {
        let min_pos = self
            .hull
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| v)
            .map(|(k, _)| k)
            .expect("hull is nonempty");
        self.hull.rotate_left(min_pos);
        Triangulation {
            vertices: self.points.to_vec(),
            triangles: self.triangles,
            neighbors: self.neighbors,
            hull: self.hull,
        }
    }
}

/// Index `i` in `t` such that the directed edge opposite vertex `i` is (a, b).
fn edge_slot(triangles: &[[usize; 3]], t: usize, a: usize, b: usize) -> usize {
    (0..3)
        .find(|&i| triangles[t][(i + 1) % 3] == a && triangles[t][(i + 2) % 3] == b)
        .expect("triangle contains the directed edge")
}

fn replace_neighbor(neighbors: &mut [[Option<usize>; 3]], t: usize, from: usize, to: usize) {
    let slot = neighbors[t]
        .iter()
        .position(|&nb| nb == Some(from))
        .expect("neighbor back-reference present");
    neighbors[t][slot] = Some(to);
}
