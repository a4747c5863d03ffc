//! Bowyer–Watson Delaunay triangulation and the graph Laplacian of its edge graph.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SvdAmgError};
use crate::sparskit::SparseMat;

/// An in-circle determinant this small relative to its magnitude bound counts as co-circular.
const INCIRCLE_DEGENERATE: f64 = 1e-12;
/// Largest coordinate perturbation applied when retrying a degenerate configuration.
const JITTER: f64 = 1e-9;
const MAX_RETRIES: usize = 20;
/// Super-triangle size relative to the bounding box.
const SUPER_SCALE: f64 = 100.0;

type Point = (f64, f64);

/// n points uniform in the unit square.
pub fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Positive when d lies inside the circumcircle of the counter-clockwise triangle (a, b, c);
/// `None` when the configuration is numerically co-circular.
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> Option<bool> {
    let (adx, ady) = (a.0 - d.0, a.1 - d.1);
    let (bdx, bdy) = (b.0 - d.0, b.1 - d.1);
    let (cdx, cdy) = (c.0 - d.0, c.1 - d.1);
    let (al, bl, cl) = (adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy);
    let det = al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady);
    let bound = al * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + bl * ((cdx * ady).abs() + (adx * cdy).abs())
        + cl * ((adx * bdy).abs() + (bdx * ady).abs());
    if det.abs() <= INCIRCLE_DEGENERATE * bound {
        None
    } else {
        Some(det > 0.0)
    }
}

/// Triangles over points followed by three super-triangle vertices, or `None` on a degenerate
/// in-circle test.
fn bowyer_watson(pts: &[Point]) -> Option<Vec<[usize; 3]>> {
    let n = pts.len();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in pts {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(f64::MIN_POSITIVE);
    let (cx, cy) = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let s = SUPER_SCALE * span;
    let mut all = pts.to_vec();
    all.push((cx - s, cy - s));
    all.push((cx + s, cy - s));
    all.push((cx, cy + s));
    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for (i, &p) in pts.iter().enumerate() {
        let mut bad = Vec::new();
        for (t, tri) in tris.iter().enumerate() {
            if in_circle(all[tri[0]], all[tri[1]], all[tri[2]], p)? {
                bad.push(t);
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for &t in &bad {
            let tri = tris[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut boundary = Vec::new();
        for &t in &bad {
            let tri = tris[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if edge_count[&(a.min(b), a.max(b))] == 1 {
                    boundary.push((a, b));
                }
            }
        }
        for &t in bad.iter().rev() {
            tris.swap_remove(t);
        }
        for (a, b) in boundary {
            // the cavity is star-shaped around p, so (a, b, p) keeps the orientation of its parent
            if orient(all[a], all[b], p) <= 0.0 {
                return None;
            }
            tris.push([a, b, i]);
        }
    }
    Some(tris)
}

/// Undirected Delaunay edges (i < j) of a point set. Co-circular configurations are retried with
/// seeded jitter of at most 1e-9 per coordinate.
pub fn delaunay_edges(points: &[Point], seed: u64) -> Result<Vec<(usize, usize)>> {
    let n = points.len();
    if n < 3 {
        return Err(SvdAmgError::DegeneratePoints(format!("need at least 3 points, got {n}")));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(SvdAmgError::NonFinite("delaunay point coordinates"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_de1a_0000_0001);
    let mut pts = points.to_vec();
    for _ in 0..=MAX_RETRIES {
        if let Some(tris) = bowyer_watson(&pts) {
            let mut edges = BTreeSet::new();
            for tri in tris.iter().filter(|t| t.iter().all(|&v| v < n)) {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            if edges.is_empty() {
                return Err(SvdAmgError::DegeneratePoints("all points are collinear".into()));
            }
            return Ok(edges.into_iter().collect());
        }
        pts = points
            .iter()
            .map(|p| (p.0 + rng.random_range(-JITTER..JITTER), p.1 + rng.random_range(-JITTER..JITTER)))
            .collect();
    }
    Err(SvdAmgError::DegeneratePoints(format!("still degenerate after {MAX_RETRIES} perturbations")))
}

/// Graph Laplacian (degree on the diagonal, −1 per edge) of the Delaunay triangulation of n
/// seeded random points in the unit square, plus shift·I.
pub fn delaunay_graph_laplacian(n: usize, seed: u64, shift: f64) -> Result<SparseMat> {
    let pts = random_points(n, seed);
    let edges = delaunay_edges(&pts, seed)?;
    let mut t = Vec::with_capacity(n + 2 * edges.len());
    let mut deg = vec![0.0; n];
    for &(i, j) in &edges {
        t.push((i, j, -1.0));
        t.push((j, i, -1.0));
        deg[i] += 1.0;
        deg[j] += 1.0;
    }
    for (i, d) in deg.into_iter().enumerate() {
        t.push((i, i, d + shift));
    }
    SparseMat::from_triplets(n, n, &t)
}
