//! Graded conforming triangulation of the reference domain with tagged
//! boundary edges, plus the displacement DOF map.
//!
//! The generator is deterministic: boundary curves are subdivided by
//! integrating a sizing density, interior points come from a greedy disk
//! sampling over a fixed hexagonal candidate lattice, and the Delaunay
//! kernel (`delaunator`) is deterministic for a given point order. Reruns
//! produce identical meshes. The domain is convex (the cap arc joins the
//! rectangle sides tangentially), so the Delaunay triangulation of the
//! boundary and interior points tiles exactly the boundary polygon.

use crate::geometry::DomainSpec;
use crate::scalar::{lit, Real};
use delaunator::{triangulate as delaunay, Point};

const SIZING_GROWTH: f64 = 0.7;
const DISK_RADIUS_FACTOR: f64 = 0.72;
const MAX_REFINE_ROUNDS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Gamma1,
    Gamma2,
    Gamma3,
}

impl BoundaryTag {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryTag::Gamma1 => "gamma1",
            BoundaryTag::Gamma2 => "gamma2",
            BoundaryTag::Gamma3 => "gamma3",
        }
    }
}

/// Boundary edge oriented so the adjacent triangle lies on its left; the
/// stored normal therefore points out of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge<T> {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
    pub normal: [T; 2],
    pub on_load_arc: bool,
    pub tri: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub nodes: Vec<[T; 2]>,
    /// Node index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshError {
    InvalidSizes,
    MeshFailure(String),
}

impl std::fmt::Display for MeshError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshError::InvalidSizes => {
                write!(f, "mesh sizes must satisfy 0 < h_contact <= h_interior")
            }
            MeshError::MeshFailure(msg) => write!(f, "mesh generation failed: {msg}"),
        }
    }
}

impl std::error::Error for MeshError {}

impl<T: Real> Mesh<T> {
    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])) / lit(2.0)
    }

    pub fn triangle_longest_edge(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let d = |p: [T; 2], q: [T; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        d(pa, pb).max(d(pb, pc)).max(d(pc, pa))
    }

    /// Element size measure: circumradius (a b c / 4 area).
    pub fn triangle_size(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let d = |p: [T; 2], q: [T; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let (ea, eb, ec) = (d(pa, pb), d(pb, pc), d(pc, pa));
        ea * eb * ec / (lit::<T>(4.0) * self.triangle_area(t))
    }

    pub fn edge_length(&self, nodes: [usize; 2]) -> T {
        let (p, q) = (self.nodes[nodes[0]], self.nodes[nodes[1]]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Area of the region enclosed by the boundary edges (shoelace).
    pub fn boundary_polygon_area(&self) -> T {
        let mut acc = T::zero();
        for e in &self.boundary_edges {
            let (p, q) = (self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]);
            acc += p[0] * q[1] - q[0] * p[1];
        }
        acc / lit(2.0)
    }

    pub fn gamma_edges(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge<T>> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Nodes incident to an edge with the given tag, ascending.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .gamma_edges(tag)
            .flat_map(|e| e.nodes.iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Structural invariants: positive areas, conforming edges, one triangle
    /// per boundary edge, exact contact normals, area conservation.
    pub fn validate(&self) -> Result<(), MeshError> {
        use std::collections::HashMap;
        let fail = |msg: String| Err(MeshError::MeshFailure(msg));
        // 1e-9 in f64; scales with the precision of narrower scalar types
        let rel_tol = lit::<T>(1e-9).max(T::epsilon() * lit::<T>(64.0));
        for t in 0..self.triangles.len() {
            if !(self.triangle_area(t) > T::zero()) {
                return fail(format!("triangle {t} has non-positive area"));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return fail("non-conforming edge shared by more than two triangles".into());
        }
        let n_boundary = edge_count.values().filter(|&&c| c == 1).count();
        if n_boundary != self.boundary_edges.len() {
            return fail(format!(
                "boundary edge list has {} entries, mesh has {} single-triangle edges",
                self.boundary_edges.len(),
                n_boundary
            ));
        }
        for e in &self.boundary_edges {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            if edge_count.get(&key) != Some(&1) {
                return fail(format!("edge {:?} is not a boundary edge", e.nodes));
            }
            if e.tag == BoundaryTag::Gamma3 {
                let down = e.normal[0] == T::zero() && e.normal[1] == -T::one();
                if !down {
                    return fail(format!("gamma3 edge {:?} normal is not (0,-1)", e.nodes));
                }
            }
            // normal orthogonal to the edge, unit length, pointing out of the triangle
            let (p, q) = (self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]);
            let d = [q[0] - p[0], q[1] - p[1]];
            let dotprod = d[0] * e.normal[0] + d[1] * e.normal[1];
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if dotprod.abs() > rel_tol * len {
                return fail(format!("edge {:?} normal not orthogonal", e.nodes));
            }
            let nn = (e.normal[0] * e.normal[0] + e.normal[1] * e.normal[1]).sqrt();
            if (nn - T::one()).abs() > rel_tol {
                return fail(format!("edge {:?} normal not unit", e.nodes));
            }
            let [a, b, c] = self.triangles[e.tri];
            let centroid = [
                (self.nodes[a][0] + self.nodes[b][0] + self.nodes[c][0]) / lit(3.0),
                (self.nodes[a][1] + self.nodes[b][1] + self.nodes[c][1]) / lit(3.0),
            ];
            let mid = [(p[0] + q[0]) / lit(2.0), (p[1] + q[1]) / lit(2.0)];
            let outward =
                (centroid[0] - mid[0]) * e.normal[0] + (centroid[1] - mid[1]) * e.normal[1];
            if outward >= T::zero() {
                return fail(format!("edge {:?} normal points into the triangle", e.nodes));
            }
        }
        let (sum, poly) = (self.total_area(), self.boundary_polygon_area());
        if (sum - poly).abs() > rel_tol * poly.abs() {
            return fail(format!("area mismatch: triangles {sum} vs polygon {poly}"));
        }
        Ok(())
    }

    /// Convert the mesh to another scalar precision (rounding coordinates
    /// and normals; connectivity and tags are unchanged).
    pub fn cast<U: Real>(&self) -> Mesh<U> {
        let c = |x: T| U::from_f64(num_traits::cast::<T, f64>(x).unwrap()).unwrap();
        Mesh {
            nodes: self.nodes.iter().map(|p| [c(p[0]), c(p[1])]).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self
                .boundary_edges
                .iter()
                .map(|e| BoundaryEdge {
                    nodes: e.nodes,
                    tag: e.tag,
                    normal: [c(e.normal[0]), c(e.normal[1])],
                    on_load_arc: e.on_load_arc,
                    tri: e.tri,
                })
                .collect(),
        }
    }

    /// Plain-text snapshot: header then node, triangle and edge lines, with
    /// 17 significant digits.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "nodes {} triangles {} edges {}\n",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        ));
        for (i, p) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{i} {:.16e} {:.16e}\n", p[0], p[1]));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            out.push_str(&format!("{i} {} {} {}\n", t[0], t[1], t[2]));
        }
        for (i, e) in self.boundary_edges.iter().enumerate() {
            out.push_str(&format!(
                "{i} {} {} {}\n",
                e.nodes[0],
                e.nodes[1],
                e.tag.name()
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// DOF map
// ---------------------------------------------------------------------------

/// Two scalar DOFs per node not on the clamped boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub node_dofs: Vec<Option<[usize; 2]>>,
    pub n_dofs: usize,
}

impl DofMap {
    pub fn dof(&self, node: usize, comp: usize) -> Option<usize> {
        self.node_dofs[node].map(|d| d[comp])
    }
}

/// Nodes incident to any gamma1 edge carry no DOFs.
pub fn free_dof_map<T: Real>(mesh: &Mesh<T>) -> DofMap {
    let clamped = mesh.tagged_nodes(BoundaryTag::Gamma1);
    let mut is_clamped = vec![false; mesh.nodes.len()];
    for n in clamped {
        is_clamped[n] = true;
    }
    let mut node_dofs = vec![None; mesh.nodes.len()];
    let mut next = 0usize;
    for (n, slot) in node_dofs.iter_mut().enumerate() {
        if !is_clamped[n] {
            *slot = Some([next, next + 1]);
            next += 2;
        }
    }
    DofMap {
        node_dofs,
        n_dofs: next,
    }
}

// ---------------------------------------------------------------------------
// generator
// ---------------------------------------------------------------------------

struct Sizing {
    h_interior: f64,
    h_contact: f64,
    segments: Vec<(f64, f64, f64)>, // (x0, x1, y) fine segments
}

impl Sizing {
    fn at(&self, p: [f64; 2]) -> f64 {
        let mut d = f64::INFINITY;
        for &(x0, x1, y) in &self.segments {
            let dx = (x0 - p[0]).max(p[0] - x1).max(0.0);
            let dy = p[1] - y;
            d = d.min((dx * dx + dy * dy).sqrt());
        }
        if d.is_finite() {
            self.h_interior.min(self.h_contact + SIZING_GROWTH * d)
        } else {
            self.h_interior
        }
    }
}

/// Subdivide a parametric curve so each sub-arc has approximately unit
/// integral of 1/min(cap, sizing); end points are exact.
fn graded_curve_points(
    eval: &dyn Fn(f64) -> [f64; 2],
    approx_len: f64,
    sizing: &Sizing,
    cap: f64,
) -> Vec<[f64; 2]> {
    let m = (8.0 * approx_len / sizing.h_contact).ceil().max(64.0) as usize;
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let mut prev = eval(0.0);
    let mut total = 0.0;
    for k in 1..=m {
        let t = k as f64 / m as f64;
        let p = eval(t);
        let mid = [(p[0] + prev[0]) / 2.0, (p[1] + prev[1]) / 2.0];
        let seg = ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
        total += seg / sizing.at(mid).min(cap);
        cum.push(total);
        prev = p;
    }
    let n = ((total - 1e-9).ceil()).max(1.0) as usize;
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(eval(0.0));
    let mut k = 0usize;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while k + 1 < cum.len() && cum[k + 1] < target {
            k += 1;
        }
        let frac = if cum[k + 1] > cum[k] {
            (target - cum[k]) / (cum[k + 1] - cum[k])
        } else {
            0.0
        };
        let t = (k as f64 + frac) / m as f64;
        pts.push(eval(t));
    }
    pts.push(eval(1.0));
    pts
}

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (dx, dy) = (apx - t * abx, apy - t * aby);
    (dx * dx + dy * dy).sqrt()
}

struct PolyInterior {
    pts: Vec<[f64; 2]>,
}

impl PolyInterior {
    /// Strictly inside the closed polyline with clearance at least `margin`.
    fn contains_with_margin(&self, p: [f64; 2], margin: f64) -> bool {
        let n = self.pts.len();
        let mut crossings = 0;
        for i in 0..n {
            let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
            if dist_point_segment(p, a, b) < margin {
                return false;
            }
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x_int = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if x_int > p[0] {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }
}

/// Uniform hash grid for nearest-point rejection.
struct PointGrid {
    cell: f64,
    origin: [f64; 2],
    n_cols: usize,
    n_rows: usize,
    cells: Vec<Vec<usize>>,
}

impl PointGrid {
    fn new(lo: [f64; 2], hi: [f64; 2], cell: f64) -> Self {
        let n_cols = ((hi[0] - lo[0]) / cell).ceil() as usize + 2;
        let n_rows = ((hi[1] - lo[1]) / cell).ceil() as usize + 2;
        PointGrid {
            cell,
            origin: lo,
            n_cols,
            n_rows,
            cells: vec![Vec::new(); n_cols * n_rows],
        }
    }

    fn index(&self, p: [f64; 2]) -> (usize, usize) {
        let c = (((p[0] - self.origin[0]) / self.cell).floor().max(0.0) as usize)
            .min(self.n_cols - 1);
        let r = (((p[1] - self.origin[1]) / self.cell).floor().max(0.0) as usize)
            .min(self.n_rows - 1);
        (c, r)
    }

    fn insert(&mut self, idx: usize, p: [f64; 2]) {
        let (c, r) = self.index(p);
        self.cells[r * self.n_cols + c].push(idx);
    }

    fn min_dist(&self, p: [f64; 2], radius: f64, pts: &[[f64; 2]]) -> f64 {
        let (c0, r0) = self.index(p);
        let reach = (radius / self.cell).ceil() as isize + 1;
        let mut best = f64::INFINITY;
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                let (c, r) = (c0 as isize + dc, r0 as isize + dr);
                if c < 0 || r < 0 || c as usize >= self.n_cols || r as usize >= self.n_rows {
                    continue;
                }
                for &i in &self.cells[r as usize * self.n_cols + c as usize] {
                    let q = pts[i];
                    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Graded conforming triangulation of the domain; `h_contact` bounds edge
/// lengths on gamma1 and gamma3, `h_interior` bounds element diameters.
pub fn triangulate<T: Real>(
    domain: &DomainSpec<T>,
    h_interior: T,
    h_contact: T,
) -> Result<Mesh<T>, MeshError> {
    if !(h_contact > T::zero()) || h_contact > h_interior {
        return Err(MeshError::InvalidSizes);
    }
    let f = |x: T| num_traits::cast::<T, f64>(x).unwrap();

    let (x_min, x_max, y_min, y_max) = (
        f(domain.x_min),
        f(domain.x_max),
        f(domain.y_min),
        f(domain.y_max),
    );
    let g1 = (f(domain.gamma1.x0), f(domain.gamma1.x1));
    let g3 = domain.gamma3.as_ref().map(|g| (f(g.x0), f(g.x1)));
    let cap = domain
        .cap
        .as_ref()
        .map(|c| ([f(c.center[0]), f(c.center[1])], f(c.radius)));
    let (h_int, h_c) = (f(h_interior), f(h_contact));

    let mut fine = vec![(g1.0, g1.1, y_min)];
    if let Some(g) = g3 {
        fine.push((g.0, g.1, y_min));
    }
    let sizing = Sizing {
        h_interior: h_int,
        h_contact: h_c,
        segments: fine,
    };

    // --- boundary polyline, counterclockwise from (x_min, y_min)
    let mut breaks = vec![x_min, g1.0, g1.1, x_max];
    if let Some(g) = g3 {
        breaks.push(g.0);
        breaks.push(g.1);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let in_interval = |x0: f64, x1: f64, iv: (f64, f64)| x0 >= iv.0 - 1e-12 && x1 <= iv.1 + 1e-12;
    let mut boundary: Vec<[f64; 2]> = Vec::new();
    let push_piece = |boundary: &mut Vec<[f64; 2]>, pts: Vec<[f64; 2]>| {
        let start = if boundary.is_empty() { 0 } else { 1 };
        boundary.extend_from_slice(&pts[start..]);
    };
    for w in breaks.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 < 1e-12 {
            continue;
        }
        let piece_cap = if in_interval(x0, x1, g1) || g3.map(|g| in_interval(x0, x1, g)) == Some(true)
        {
            h_c
        } else {
            h_int
        };
        let eval = move |t: f64| [x0 + t * (x1 - x0), y_min];
        push_piece(
            &mut boundary,
            graded_curve_points(&eval, x1 - x0, &sizing, piece_cap),
        );
    }
    {
        let eval = move |t: f64| [x_max, y_min + t * (y_max - y_min)];
        push_piece(
            &mut boundary,
            graded_curve_points(&eval, y_max - y_min, &sizing, h_int),
        );
    }
    match cap {
        Some((center, radius)) => {
            let eval = move |t: f64| {
                let theta = t * std::f64::consts::PI;
                [
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                ]
            };
            push_piece(
                &mut boundary,
                graded_curve_points(&eval, std::f64::consts::PI * radius, &sizing, h_int),
            );
        }
        None => {
            let eval = move |t: f64| [x_max - t * (x_max - x_min), y_max];
            push_piece(
                &mut boundary,
                graded_curve_points(&eval, x_max - x_min, &sizing, h_int),
            );
        }
    }
    {
        let eval = move |t: f64| [x_min, y_max - t * (y_max - y_min)];
        push_piece(
            &mut boundary,
            graded_curve_points(&eval, y_max - y_min, &sizing, h_int),
        );
    }
    // the loop closes on the starting corner
    let last = boundary.pop().ok_or(MeshError::InvalidSizes)?;
    if (last[0] - boundary[0][0]).abs() > 1e-9 || (last[1] - boundary[0][1]).abs() > 1e-9 {
        return Err(MeshError::MeshFailure("boundary loop did not close".into()));
    }

    let poly = PolyInterior {
        pts: boundary.clone(),
    };

    // --- interior points: greedy disk sampling on a hex candidate lattice
    let y_top = cap.map(|(c, r)| c[1] + r).unwrap_or(y_max);
    let lo = [x_min, y_min];
    let hi = [x_max, y_top];
    let mut pts: Vec<[f64; 2]> = boundary.clone();
    let grid_cell = DISK_RADIUS_FACTOR * h_int;
    let mut grid = PointGrid::new(lo, hi, grid_cell);
    for (i, p) in pts.iter().enumerate() {
        grid.insert(i, *p);
    }
    let pitch = 0.5 * h_c;
    let row_h = pitch * 3.0f64.sqrt() / 2.0;
    let n_rows = ((y_top - y_min) / row_h).floor() as usize;
    let n_cols = ((x_max - x_min) / pitch).floor() as usize;
    for r in 1..=n_rows {
        let y = y_min + r as f64 * row_h;
        let off = if r % 2 == 1 { 0.5 * pitch } else { 0.0 };
        for cidx in 0..=n_cols {
            let x = x_min + off + cidx as f64 * pitch;
            if x > x_max {
                continue;
            }
            let p = [x, y];
            let s = sizing.at(p);
            let radius = DISK_RADIUS_FACTOR * s;
            if !poly.contains_with_margin(p, 0.5 * radius) {
                continue;
            }
            // average-radius rejection keeps the grading smooth
            let d = grid.min_dist(p, radius, &pts);
            if d < radius {
                continue;
            }
            grid.insert(pts.len(), p);
            pts.push(p);
        }
    }

    // --- Delaunay + size-driven refinement
    let n_boundary = boundary.len();
    let mut triangles = run_delaunay(&pts, n_boundary)?;
    for round in 0..=MAX_REFINE_ROUNDS {
        let mut inserts: Vec<[f64; 2]> = Vec::new();
        for tri in &triangles {
            let (pa, pb, pc) = (pts[tri[0]], pts[tri[1]], pts[tri[2]]);
            let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let area = 0.5
                * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])).abs();
            let size = d(pa, pb) * d(pb, pc) * d(pc, pa) / (4.0 * area);
            if size <= h_int * (1.0 + 1e-9) {
                continue;
            }
            let cc = circumcenter(pa, pb, pc);
            let centroid = [
                (pa[0] + pb[0] + pc[0]) / 3.0,
                (pa[1] + pb[1] + pc[1]) / 3.0,
            ];
            let s = sizing.at(centroid);
            let cand = match cc {
                Some(cc) if poly.contains_with_margin(cc, 0.3 * DISK_RADIUS_FACTOR * s) => cc,
                _ => centroid,
            };
            if grid.min_dist(cand, s, &pts) > 1e-9 {
                inserts.push(cand);
            }
        }
        if inserts.is_empty() {
            break;
        }
        if round == MAX_REFINE_ROUNDS {
            return Err(MeshError::MeshFailure(
                "size refinement did not converge".into(),
            ));
        }
        for p in inserts {
            if grid.min_dist(p, 1.0, &pts) > 1e-9 {
                grid.insert(pts.len(), p);
                pts.push(p);
            }
        }
        triangles = run_delaunay(&pts, n_boundary)?;
    }

    // --- boundary edges, tags, normals
    use std::collections::HashMap;
    let mut edge_owner: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edge_owner.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut boundary_edges = Vec::new();
    let mut keys: Vec<(usize, usize)> = edge_owner
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    keys.sort_unstable();
    for key in keys {
        let t = edge_owner[&key][0];
        let tri = triangles[t];
        let mut directed = None;
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if (a.min(b), a.max(b)) == key {
                directed = Some([a, b]);
                break;
            }
        }
        let nodes = directed.ok_or_else(|| {
            MeshError::MeshFailure("boundary edge not found in owner triangle".into())
        })?;
        let (p, q) = (pts[nodes[0]], pts[nodes[1]]);
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = (dx * dx + dy * dy).sqrt();
        let normal = [dy / len, -dx / len];
        let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        let tag = if (mid[1] - y_min).abs() < 1e-9 {
            if mid[0] >= g1.0 - 1e-9 && mid[0] <= g1.1 + 1e-9 {
                BoundaryTag::Gamma1
            } else if g3.map(|g| mid[0] >= g.0 - 1e-9 && mid[0] <= g.1 + 1e-9) == Some(true) {
                BoundaryTag::Gamma3
            } else {
                BoundaryTag::Gamma2
            }
        } else {
            BoundaryTag::Gamma2
        };
        let on_load_arc = match cap {
            Some((center, radius)) => {
                let on = |pt: [f64; 2]| {
                    let d = ((pt[0] - center[0]).powi(2) + (pt[1] - center[1]).powi(2)).sqrt();
                    (d - radius).abs() < 1e-7 && pt[1] >= center[1] - 1e-7
                };
                tag == BoundaryTag::Gamma2 && on(p) && on(q)
            }
            None => false,
        };
        let normal = if tag != BoundaryTag::Gamma2 {
            // bottom edges: exact downward normal
            [0.0, -1.0]
        } else {
            normal
        };
        boundary_edges.push(BoundaryEdge {
            nodes,
            tag,
            normal: [lit::<T>(normal[0]), lit::<T>(normal[1])],
            on_load_arc,
            tri: t,
        });
    }

    let mesh = Mesh {
        nodes: pts
            .iter()
            .map(|p| [lit::<T>(p[0]), lit::<T>(p[1])])
            .collect(),
        triangles,
        boundary_edges,
    };
    mesh.validate()?;
    // size bounds are part of the triangulate contract; the slack scales
    // with the precision of the scalar type
    let size_slack = T::one() + lit::<T>(1e-6).max(T::epsilon() * lit::<T>(16.0));
    for t in 0..mesh.triangles.len() {
        if mesh.triangle_size(t) > h_interior * size_slack {
            return Err(MeshError::MeshFailure(format!(
                "triangle {t} exceeds interior size bound"
            )));
        }
    }
    for e in &mesh.boundary_edges {
        let cap = if e.tag == BoundaryTag::Gamma2 {
            h_interior
        } else {
            h_contact
        };
        if mesh.edge_length(e.nodes) > cap * size_slack {
            return Err(MeshError::MeshFailure(format!(
                "boundary edge {:?} exceeds its size bound",
                e.nodes
            )));
        }
    }
    Ok(mesh)
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<[f64; 2]> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-14 {
        return None;
    }
    let a2 = a[0] * a[0] + a[1] * a[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let c2 = c[0] * c[0] + c[1] * c[1];
    Some([
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ])
}

fn run_delaunay(pts: &[[f64; 2]], n_boundary: usize) -> Result<Vec<[usize; 3]>, MeshError> {
    let points: Vec<Point> = pts.iter().map(|p| Point { x: p[0], y: p[1] }).collect();
    let tri = delaunay(&points);
    if tri.triangles.is_empty() {
        return Err(MeshError::MeshFailure("triangulation is empty".into()));
    }
    let mut used = vec![false; pts.len()];
    let mut triangles = Vec::with_capacity(tri.triangles.len() / 3);
    for chunk in tri.triangles.chunks_exact(3) {
        let mut t = [chunk[0], chunk[1], chunk[2]];
        let (pa, pb, pc) = (pts[t[0]], pts[t[1]], pts[t[2]]);
        let signed =
            (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        if signed < 0.0 {
            t.swap(1, 2);
        } else if signed == 0.0 {
            return Err(MeshError::MeshFailure("degenerate triangle".into()));
        }
        for &v in &t {
            used[v] = true;
        }
        triangles.push(t);
    }
    if used.iter().any(|u| !u) {
        return Err(MeshError::MeshFailure(
            "triangulation dropped input points".into(),
        ));
    }
    let _ = n_boundary;
    Ok(triangles)
}
