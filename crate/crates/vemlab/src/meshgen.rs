//! Generators for the experiment mesh families on the unit square: uniform
//! squares, clipped hexagon tilings, random Voronoi tessellations with Lloyd
//! relaxation, two-grid glued meshes with hanging (collinear) interface
//! vertices, and controlled small-edge splits.

use std::collections::HashMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Point2, PolyMesh};
use crate::{Error, Result};

/// Mesh family selector with its resolution parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Square { n: usize },
    Hexagon { nx: usize, ny: usize },
    /// `lloyd_iters = 0` is the raw random tessellation.
    Voronoi { n: usize, lloyd_iters: usize },
    Glued { left_ny: usize, right_ny: usize },
    /// Uniform `n x n` grid with one interior edge split at fraction `eps`.
    EdgeSplit { n: usize, eps: f64 },
}

/// A reproducible mesh request: same spec (including seed) yields a
/// bit-identical mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub seed: u64,
}

/// Generates the mesh described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<PolyMesh> {
    match spec.family {
        Family::Square { n } => gen_square(n),
        Family::Hexagon { nx, ny } => gen_hexagon(nx, ny),
        Family::Voronoi { n, lloyd_iters } => gen_voronoi(n, spec.seed, lloyd_iters),
        Family::Glued { left_ny, right_ny } => gen_glued(left_ny, right_ny),
        Family::EdgeSplit { n, eps } => {
            let mesh = gen_square(n)?;
            let (cell, edge) = split_target(n);
            split_edge(&mesh, cell, edge, eps)
        }
    }
}

/// Cell/edge picked by the `EdgeSplit` family: the bottom edge of a cell near
/// the mesh centre (interior for `n >= 3`).
pub fn split_target(n: usize) -> (usize, usize) {
    ((n / 2) * n + n / 2, 0)
}

/// Uniform `n x n` decomposition of the unit square.
pub fn gen_square(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::Invalid("gen_square needs n >= 1".into()));
    }
    let nf = n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 / nf, j as f64 / nf));
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![
                vid(i, j),
                vid(i + 1, j),
                vid(i + 1, j + 1),
                vid(i, j + 1),
            ]);
        }
    }
    PolyMesh::new(vertices, cells)
}

/// Welds nearby points so that independently generated cells share vertices.
struct VertexPool {
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool {
            tol,
            buckets: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn insert(&mut self, p: Point2) -> usize {
        let qx = (p.x / self.tol).round() as i64;
        let qy = (p.y / self.tol).round() as i64;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if let Some(ids) = self.buckets.get(&(qx + dx, qy + dy)) {
                    for &id in ids {
                        if self.points[id].dist(p) <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.buckets.entry((qx, qy)).or_default().push(id);
        id
    }
}

/// Assembles welded polygons into a mesh, dropping repeated consecutive
/// vertices produced by the weld.
fn mesh_from_polygons(polys: &[Vec<Point2>], tol: f64) -> Result<PolyMesh> {
    let mut pool = VertexPool::new(tol);
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut cycle: Vec<usize> = poly.iter().map(|&p| pool.insert(p)).collect();
        cycle.dedup();
        while cycle.len() > 1 && cycle.first() == cycle.last() {
            cycle.pop();
        }
        if cycle.len() < 3 {
            return Err(Error::InvalidMesh(
                "generated cell degenerated to fewer than 3 vertices".into(),
            ));
        }
        cells.push(cycle);
    }
    PolyMesh::new(pool.points, cells)
}

/// Keeps the part of `poly` with `normal . x <= offset` (Sutherland-Hodgman).
fn clip_halfplane(poly: &[Point2], normal: Point2, offset: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let dc = normal.dot(cur) - offset;
        let dn = normal.dot(nxt) - offset;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

fn clip_to_unit_square(poly: &[Point2]) -> Vec<Point2> {
    let mut p = poly.to_vec();
    for (normal, offset) in [
        (Point2::new(-1.0, 0.0), 0.0),
        (Point2::new(1.0, 0.0), 1.0),
        (Point2::new(0.0, -1.0), 0.0),
        (Point2::new(0.0, 1.0), 1.0),
    ] {
        if p.is_empty() {
            break;
        }
        p = clip_halfplane(&p, normal, offset);
    }
    p
}

fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Tiling of the unit square by `nx x ny` flat-top hexagons (nominal count;
/// boundary cells are clipped to quads/pentagons and odd columns contribute
/// one extra partial row, so the actual cell count is slightly larger).
pub fn gen_hexagon(nx: usize, ny: usize) -> Result<PolyMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Invalid("gen_hexagon needs nx, ny >= 2".into()));
    }
    let nxf = nx as f64;
    let nyf = ny as f64;
    let wx = 2.0 / (3.0 * nxf); // horizontal "radius": column pitch 1.5*wx = 1/nx
    let hy = 1.0 / nyf;
    let mut polys = Vec::new();
    for i in 0..nx {
        let xc = (i as f64 + 0.5) / nxf;
        let odd = i % 2 == 1;
        let jlo: isize = if odd { -1 } else { 0 };
        for j in jlo..ny as isize {
            let yc = (j as f64 + 0.5) * hy + if odd { 0.5 * hy } else { 0.0 };
            let hex = [
                Point2::new(xc + wx, yc),
                Point2::new(xc + 0.5 * wx, yc + 0.5 * hy),
                Point2::new(xc - 0.5 * wx, yc + 0.5 * hy),
                Point2::new(xc - wx, yc),
                Point2::new(xc - 0.5 * wx, yc - 0.5 * hy),
                Point2::new(xc + 0.5 * wx, yc - 0.5 * hy),
            ];
            let clipped = clip_to_unit_square(&hex);
            if clipped.len() >= 3 && polygon_area(&clipped) > 1e-14 {
                polys.push(clipped);
            }
        }
    }
    mesh_from_polygons(&polys, 1e-9)
}

fn rng_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn voronoi_cells(sites: &[Point2]) -> Vec<Vec<Point2>> {
    let square = [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    sites
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut cell = square.to_vec();
            for (j, &t) in sites.iter().enumerate() {
                if i == j || cell.is_empty() {
                    continue;
                }
                // keep the side of the bisector containing s
                let normal = t - s;
                let mid = (s + t) * 0.5;
                cell = clip_halfplane(&cell, normal, normal.dot(mid));
            }
            cell
        })
        .collect()
}

fn polygon_centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p.cross(q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Sites after `iters` Lloyd steps from the seeded random start; exposed for
/// energy-decrease diagnostics.
pub fn lloyd_sites(n: usize, seed: u64, iters: usize) -> Result<Vec<Point2>> {
    if n < 2 {
        return Err(Error::Invalid("voronoi needs n >= 2 sites".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<Point2> = (0..n)
        .map(|_| {
            let x = rng_unit(&mut rng);
            let y = rng_unit(&mut rng);
            Point2::new(x, y)
        })
        .collect();
    for _ in 0..iters {
        let cells = voronoi_cells(&sites);
        for (s, cell) in sites.iter_mut().zip(&cells) {
            if cell.len() >= 3 {
                let c = polygon_centroid(cell);
                s.x = c.x.clamp(0.0, 1.0);
                s.y = c.y.clamp(0.0, 1.0);
            }
        }
    }
    Ok(sites)
}

/// Voronoi tessellation of `n` uniformly sampled sites clipped to the unit
/// square, optionally relaxed by Lloyd iterations. Site degeneracies that
/// break the welded topology are resolved by a deterministic seed-dependent
/// jitter of the initial sites and a retry.
pub fn gen_voronoi(n: usize, seed: u64, lloyd_iters: usize) -> Result<PolyMesh> {
    if n < 2 {
        return Err(Error::Invalid("voronoi needs n >= 2 sites".into()));
    }
    let mut last_err = None;
    for attempt in 0..5u64 {
        let attempt_seed = if attempt == 0 {
            seed
        } else {
            // deterministic jitter channel: reseed from (seed, attempt)
            seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(attempt))
        };
        let sites = match build_sites(n, seed, attempt, attempt_seed) {
            Ok(s) => s,
            Err(e) => return Err(e),
        };
        let sites = lloyd_from(sites, lloyd_iters);
        let cells = voronoi_cells(&sites);
        if cells.iter().any(|c| c.len() < 3) {
            last_err = Some(Error::InvalidMesh("empty voronoi cell".into()));
            continue;
        }
        match mesh_from_polygons(&cells, 1e-9) {
            Ok(mesh) => return Ok(mesh),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvalidMesh("voronoi generation failed".into())))
}

fn build_sites(n: usize, seed: u64, attempt: u64, attempt_seed: u64) -> Result<Vec<Point2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<Point2> = (0..n)
        .map(|_| Point2::new(rng_unit(&mut rng), rng_unit(&mut rng)))
        .collect();
    if attempt > 0 {
        let mut jrng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let mag = 1e-7 * attempt as f64;
        for s in &mut sites {
            s.x = (s.x + mag * (rng_unit(&mut jrng) - 0.5)).clamp(0.0, 1.0);
            s.y = (s.y + mag * (rng_unit(&mut jrng) - 0.5)).clamp(0.0, 1.0);
        }
    }
    Ok(sites)
}

fn lloyd_from(mut sites: Vec<Point2>, iters: usize) -> Vec<Point2> {
    for _ in 0..iters {
        let cells = voronoi_cells(&sites);
        for (s, cell) in sites.iter_mut().zip(&cells) {
            if cell.len() >= 3 {
                let c = polygon_centroid(cell);
                s.x = c.x.clamp(0.0, 1.0);
                s.y = c.y.clamp(0.0, 1.0);
            }
        }
    }
    sites
}

/// Two uniform grids on `[0,1/2] x [0,1]` and `[1/2,1] x [0,1]` with
/// incommensurate row counts, glued along `x = 1/2`. Cells touching the
/// interface receive the other side's trace vertices as collinear vertices,
/// which produces arbitrarily small edges while keeping the mesh conforming.
pub fn gen_glued(left_ny: usize, right_ny: usize) -> Result<PolyMesh> {
    if left_ny == right_ny {
        return Err(Error::Invalid(
            "gen_glued needs distinct row counts (equal traces would be conforming)".into(),
        ));
    }
    if left_ny < 1 || right_ny < 1 {
        return Err(Error::Invalid("gen_glued needs at least one row per side".into()));
    }

    // interface trace: union of both grids' y levels (IEEE division is
    // correctly rounded, so equal rationals give identical bits)
    let mut trace: Vec<f64> = (0..=left_ny)
        .map(|j| j as f64 / left_ny as f64)
        .chain((0..=right_ny).map(|j| j as f64 / right_ny as f64))
        .collect();
    trace.sort_by(|a, b| a.partial_cmp(b).unwrap());
    trace.dedup();

    let mut polys: Vec<Vec<Point2>> = Vec::new();
    for (side, ny) in [(0usize, left_ny), (1usize, right_ny)] {
        let nx = ny.div_ceil(2);
        let x_at = |i: usize| 0.5 * (side as f64) + 0.5 * (i as f64 / nx as f64);
        let y_at = |j: usize| j as f64 / ny as f64;
        for j in 0..ny {
            for i in 0..nx {
                let (x0, x1) = (x_at(i), x_at(i + 1));
                let (y0, y1) = (y_at(j), y_at(j + 1));
                let mut poly = Vec::with_capacity(8);
                poly.push(Point2::new(x0, y0));
                poly.push(Point2::new(x1, y0));
                if side == 0 && i == nx - 1 {
                    // hanging vertices on the right (interface) edge, upward
                    for &y in trace.iter().filter(|&&y| y > y0 && y < y1) {
                        poly.push(Point2::new(0.5, y));
                    }
                }
                poly.push(Point2::new(x1, y1));
                poly.push(Point2::new(x0, y1));
                if side == 1 && i == 0 {
                    // hanging vertices on the left (interface) edge, downward
                    for &y in trace.iter().rev().filter(|&&y| y > y0 && y < y1) {
                        poly.push(Point2::new(0.5, y));
                    }
                }
                polys.push(poly);
            }
        }
    }
    mesh_from_polygons(&polys, 0.0_f64.max(1e-13))
}

/// Inserts a vertex at relative position `eps` along edge `edge` of cell
/// `cell` (measured from the edge's start in that cell's cycle), updating the
/// neighbouring cell as well so the mesh stays conforming.
pub fn split_edge(mesh: &PolyMesh, cell: usize, edge: usize, eps: f64) -> Result<PolyMesh> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Invalid(format!(
            "split fraction must lie in (0, 1/2], got {eps}"
        )));
    }
    if cell >= mesh.n_cells() {
        return Err(Error::Invalid(format!("cell index {cell} out of range")));
    }
    let cycle = mesh.cell(cell);
    if edge >= cycle.len() {
        return Err(Error::Invalid(format!(
            "edge index {edge} out of range for cell {cell}"
        )));
    }
    let va = cycle[edge];
    let vb = cycle[(edge + 1) % cycle.len()];
    let a = mesh.vertex(va);
    let b = mesh.vertex(vb);
    let p = a + (b - a) * eps;

    let mut vertices = mesh.vertices().to_vec();
    let new_id = vertices.len();
    vertices.push(p);

    let mut cells: Vec<Vec<usize>> = mesh.cells().to_vec();
    // insert after `va` in this cell
    cells[cell].insert(edge + 1, new_id);
    // the neighbour traverses (vb, va); insert after `vb`
    let eid = mesh.cell_edge_ids(cell)[edge];
    let e = mesh.edges()[eid];
    let other = match e.cells {
        (c0, Some(c1)) if c0 == cell => Some(c1),
        (c0, Some(c1)) if c1 == cell => Some(c0),
        _ => None,
    };
    if let Some(oc) = other {
        let ocycle = &mut cells[oc];
        let pos = (0..ocycle.len())
            .find(|&i| ocycle[i] == vb && ocycle[(i + 1) % ocycle.len()] == va)
            .expect("edge table inconsistent with cell cycles");
        ocycle.insert(pos + 1, new_id);
    }
    PolyMesh::new(vertices, cells)
}
