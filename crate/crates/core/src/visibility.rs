//! Visibility decompositions, ray shooting and point location.
//!
//! Both decompositions are stored as slab indexes: the distinct vertex
//! coordinates along the sweep axis cut the plane into slabs, and each slab
//! keeps the obstacle edges spanning it in their (total) order across the
//! slab. The horizontal index works on transposed coordinates, so all the
//! search code is written once for "vertical" rays in local `(u, v)`
//! coordinates.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{cross, Point, Polygon, RPoint};
use crate::rational::Rational;
use crate::scene::{BBox, Mode, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
    Up,
    Down,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Left, Dir::Right, Dir::Up, Dir::Down];

    pub fn vector(self) -> (i64, i64) {
        match self {
            Dir::Left => (-1, 0),
            Dir::Right => (1, 0),
            Dir::Up => (0, 1),
            Dir::Down => (0, -1),
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::Left | Dir::Right)
    }
}

/// Sweep axis of a decomposition. `Vertical` has vertical extension walls
/// and answers upward/downward rays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub obstacle: u32,
    pub edge: u32,
}

/// The boundary feature a ray stopped at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Vertex { obstacle: u32, vertex: u32 },
    Edge(EdgeId),
    BBox,
}

impl Feature {
    pub fn obstacle(&self) -> Option<usize> {
        match *self {
            Feature::Vertex { obstacle, .. } => Some(obstacle as usize),
            Feature::Edge(e) => Some(e.obstacle as usize),
            Feature::BBox => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hit {
    pub point: RPoint,
    pub feature: Feature,
}

impl Hit {
    pub fn is_bbox(&self) -> bool {
        self.feature == Feature::BBox
    }
}

/// The four boundary projections `p^l, p^r, p^u, p^d` of a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionQuad {
    pub left: Hit,
    pub right: Hit,
    pub up: Hit,
    pub down: Hit,
}

impl ProjectionQuad {
    pub fn get(&self, d: Dir) -> &Hit {
        match d {
            Dir::Left => &self.left,
            Dir::Right => &self.right,
            Dir::Up => &self.up,
            Dir::Down => &self.down,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Located {
    Free(usize),
    Boundary(usize),
    Interior(usize),
}

/// A free trapezoid: the columns `[u_lo, u_hi]` between a bottom and a top
/// edge (`None` is the bounding box).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub u_lo: i64,
    pub u_hi: i64,
    pub below: Option<EdgeId>,
    pub above: Option<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct VisibilityDecomposition {
    pub axis: Axis,
    pub cells: Vec<Cell>,
    /// Extension walls `(vertex, far end)` in original coordinates.
    pub walls: Vec<(Point, RPoint)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Contact {
    Vertex(u32, u32),
    Edge(EdgeId),
}

#[derive(Clone, Debug)]
struct LEdge {
    a: (i64, i64),
    b: (i64, i64),
    id: EdgeId,
    /// The obstacle interior lies on the `+v` side.
    interior_above: bool,
}

impl LEdge {
    fn v_at(&self, u: i64) -> Rational {
        let du = (self.b.0 - self.a.0) as i128;
        let num = self.a.1 as i128 * du + (u - self.a.0) as i128 * (self.b.1 - self.a.1) as i128;
        Rational::new(num, du)
    }

    /// Compares `v_at(u)` with `v` without building the reduced fraction
    /// when the values fit.
    fn cmp_at(&self, u: i64, v: &Rational) -> Ordering {
        if let Some(iv) = v.to_i128() {
            let du = (self.b.0 - self.a.0) as i128;
            let num = self.a.1 as i128 * du + (u - self.a.0) as i128 * (self.b.1 - self.a.1) as i128;
            if let Some(rhs) = iv.checked_mul(du) {
                return num.cmp(&rhs);
            }
        }
        self.v_at(u).cmp(v)
    }
}

#[derive(Clone, Debug)]
struct SlabIndex {
    us: Vec<i64>,
    edges: Vec<LEdge>,
    slabs: Vec<Vec<u32>>,
    verts: Vec<Vec<(i64, u32, u32)>>,
    vert_edges: Vec<Vec<(i64, i64, EdgeId)>>,
    cols: Vec<Vec<Option<u32>>>,
    cells: Vec<Cell>,
}

impl SlabIndex {
    fn new(obstacles: &[Polygon], transpose: bool, bbox: BBox) -> Self {
        let local = |p: Point| if transpose { (p.y, p.x) } else { (p.x, p.y) };
        let mut us: Vec<i64> = obstacles.iter().flat_map(|p| p.vertices.iter().map(|&v| local(v).0)).collect();
        us.sort_unstable();
        us.dedup();
        let mut edges = Vec::new();
        let mut verts = vec![Vec::new(); us.len()];
        let mut vert_edges = vec![Vec::new(); us.len()];
        let slot = |u: i64| us.binary_search(&u).unwrap();
        for (oi, poly) in obstacles.iter().enumerate() {
            for (vi, &v) in poly.vertices.iter().enumerate() {
                let (u, w) = local(v);
                verts[slot(u)].push((w, oi as u32, vi as u32));
            }
            for ei in 0..poly.len() {
                let s = poly.edge(ei);
                let (pa, pb) = (local(s.a), local(s.b));
                let id = EdgeId { obstacle: oi as u32, edge: ei as u32 };
                if pa.0 == pb.0 {
                    vert_edges[slot(pa.0)].push((pa.1.min(pb.1), pa.1.max(pb.1), id));
                    continue;
                }
                // Interior is left of the directed edge in original coordinates.
                let (dx, dy) = (s.b.x - s.a.x, s.b.y - s.a.y);
                let interior_above = if transpose { dy < 0 } else { dx > 0 };
                let (a, b) = if pa.0 < pb.0 { (pa, pb) } else { (pb, pa) };
                edges.push(LEdge { a, b, id, interior_above });
            }
        }
        for l in &mut verts {
            l.sort_unstable();
        }
        for l in &mut vert_edges {
            l.sort_unstable();
        }
        let nslabs = us.len().saturating_sub(1);
        let mut slabs: Vec<Vec<u32>> = vec![Vec::new(); nslabs];
        for (i, e) in edges.iter().enumerate() {
            let k0 = slot(e.a.0);
            let k1 = slot(e.b.0);
            for s in &mut slabs[k0..k1] {
                s.push(i as u32);
            }
        }
        for (k, s) in slabs.iter_mut().enumerate() {
            // Compare at the slab midpoint, scaled by 2 to stay integral.
            let mid2 = us[k] as i128 + us[k + 1] as i128;
            s.sort_by(|&i, &j| {
                let (ei, ej) = (&edges[i as usize], &edges[j as usize]);
                let vi = mid_value(ei, mid2);
                let vj = mid_value(ej, mid2);
                vi.cmp(&vj)
            });
        }
        let mut idx = SlabIndex { us, edges, slabs, verts, vert_edges, cols: Vec::new(), cells: Vec::new() };
        idx.build_cells(bbox, transpose);
        idx
    }

    fn build_cells(&mut self, bbox: BBox, transpose: bool) {
        let (lo, hi) = if transpose { (bbox.y0, bbox.y1) } else { (bbox.x0, bbox.x1) };
        let ncols = self.us.len() + 1;
        let mut prev: HashMap<(Option<EdgeId>, Option<EdgeId>), u32> = HashMap::new();
        for c in 0..ncols {
            let list: &[u32] = if c >= 1 && c < self.us.len() { &self.slabs[c - 1] } else { &[] };
            let u_lo = if c == 0 { lo } else { self.us[c - 1] };
            let u_hi = if c == self.us.len() { hi } else { self.us[c] };
            let mut ids = Vec::with_capacity(list.len() + 1);
            let mut cur = HashMap::new();
            for i in 0..=list.len() {
                let below = (i > 0).then(|| &self.edges[list[i - 1] as usize]);
                if below.is_some_and(|e| e.interior_above) {
                    ids.push(None);
                    continue;
                }
                let key = (below.map(|e| e.id), list.get(i).map(|&j| self.edges[j as usize].id));
                let id = match prev.get(&key) {
                    Some(&id) => {
                        self.cells[id as usize].u_hi = u_hi;
                        id
                    }
                    None => {
                        self.cells.push(Cell { u_lo, u_hi, below: key.0, above: key.1 });
                        (self.cells.len() - 1) as u32
                    }
                };
                cur.insert(key, id);
                ids.push(Some(id));
            }
            self.cols.push(ids);
            prev = cur;
        }
    }

    /// Nearest boundary contact on the line `u` from `v` towards `+v`
    /// (`up`) or `-v`. With `inclusive`, a contact at `v` itself counts.
    fn contact(&self, u: i64, v: &Rational, up: bool, inclusive: bool) -> Option<(Rational, Contact)> {
        let k = self.us.partition_point(|&x| x < u);
        let on_line = k < self.us.len() && self.us[k] == u;
        let mut best: Option<(Rational, Contact)> = None;
        let better = |cand: &Rational, cur: &Rational| if up { cand < cur } else { cand > cur };
        let offer = |val: Rational, c: Contact, best: &mut Option<(Rational, Contact)>| {
            let take = match best {
                None => true,
                Some((bv, bc)) => {
                    better(&val, bv)
                        || (val == *bv && matches!(c, Contact::Vertex(..)) && !matches!(bc, Contact::Vertex(..)))
                }
            };
            if take {
                *best = Some((val, c));
            }
        };
        let search_slab = |s: usize, best: &mut Option<(Rational, Contact)>| {
            let list = &self.slabs[s];
            let pos = list.partition_point(|&i| {
                let o = self.edges[i as usize].cmp_at(u, v);
                match (up, inclusive) {
                    (true, true) | (false, false) => o == Ordering::Less,
                    (true, false) | (false, true) => o != Ordering::Greater,
                }
            });
            let pick = if up { list.get(pos) } else { pos.checked_sub(1).map(|p| &list[p]) };
            if let Some(&i) = pick {
                let e = &self.edges[i as usize];
                offer(e.v_at(u), Contact::Edge(e.id), best);
            }
        };
        if on_line {
            if inclusive {
                for &(lo, hi, id) in &self.vert_edges[k] {
                    if Rational::from_int(lo) < *v && *v < Rational::from_int(hi) {
                        return Some((v.clone(), Contact::Edge(id)));
                    }
                }
            }
            if k > 0 {
                search_slab(k - 1, &mut best);
            }
            if k < self.slabs.len() {
                search_slab(k, &mut best);
            }
            let vl = &self.verts[k];
            let pos = vl.partition_point(|&(w, _, _)| {
                let o = Rational::from_int(w).cmp(v);
                match (up, inclusive) {
                    (true, true) | (false, false) => o == Ordering::Less,
                    (true, false) | (false, true) => o != Ordering::Greater,
                }
            });
            let pick = if up { vl.get(pos) } else { pos.checked_sub(1).map(|p| &vl[p]) };
            if let Some(&(w, o, i)) = pick {
                offer(Rational::from_int(w), Contact::Vertex(o, i), &mut best);
            }
        } else if k > 0 && k < self.us.len() {
            search_slab(k - 1, &mut best);
        }
        best
    }

    /// Column index and interval index of a free point.
    fn cell_of(&self, u: i64, v: &Rational) -> Option<u32> {
        let c = self.us.partition_point(|&x| x <= u);
        if c >= 1 && c < self.us.len() {
            let list = &self.slabs[c - 1];
            let i = list.partition_point(|&j| self.edges[j as usize].cmp_at(u, v) == Ordering::Less);
            self.cols[c][i]
        } else {
            self.cols[c][0]
        }
    }
}

fn mid_value(e: &LEdge, mid2: i128) -> Rational {
    // v at u = mid2 / 2.
    let du = (e.b.0 - e.a.0) as i128;
    let num = 2 * e.a.1 as i128 * du + (mid2 - 2 * e.a.0 as i128) * (e.b.1 - e.a.1) as i128;
    Rational::new(num, 2 * du)
}

/// Ray shooting and point location over a scene's free space.
#[derive(Clone, Debug)]
pub struct Visibility {
    bbox: BBox,
    obstacles: Vec<Polygon>,
    vertical: SlabIndex,
    horizontal: SlabIndex,
}

impl Visibility {
    pub fn new(scene: &Scene) -> Self {
        Visibility {
            bbox: scene.bbox,
            obstacles: scene.obstacles.clone(),
            vertical: SlabIndex::new(&scene.obstacles, false, scene.bbox),
            horizontal: SlabIndex::new(&scene.obstacles, true, scene.bbox),
        }
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    fn index(&self, d: Dir) -> &SlabIndex {
        if d.is_horizontal() {
            &self.horizontal
        } else {
            &self.vertical
        }
    }

    /// Splits `p` into the fixed coordinate and the travel coordinate for a
    /// ray in direction `d`.
    fn split(p: &RPoint, d: Dir) -> (i64, Rational) {
        let (fixed, along) = if d.is_horizontal() { (&p.y, &p.x) } else { (&p.x, &p.y) };
        let u = fixed.to_i64().expect("ray must start on an integer grid line");
        (u, along.clone())
    }

    fn join(u: i64, v: Rational, d: Dir) -> RPoint {
        if d.is_horizontal() {
            RPoint::new(v, Rational::from_int(u))
        } else {
            RPoint::new(Rational::from_int(u), v)
        }
    }

    fn to_feature(c: Contact) -> Feature {
        match c {
            Contact::Vertex(o, v) => Feature::Vertex { obstacle: o, vertex: v },
            Contact::Edge(e) => Feature::Edge(e),
        }
    }

    fn bbox_hit(&self, u: i64, d: Dir) -> Hit {
        let v = match d {
            Dir::Left => self.bbox.x0,
            Dir::Right => self.bbox.x1,
            Dir::Up => self.bbox.y1,
            Dir::Down => self.bbox.y0,
        };
        Hit { point: Self::join(u, Rational::from_int(v), d), feature: Feature::BBox }
    }

    fn next_contact(&self, p: &RPoint, d: Dir, inclusive: bool) -> Option<Hit> {
        let (u, v) = Self::split(p, d);
        let up = matches!(d, Dir::Up | Dir::Right);
        self.index(d)
            .contact(u, &v, up, inclusive)
            .map(|(w, c)| Hit { point: Self::join(u, w, d), feature: Self::to_feature(c) })
    }

    /// The boundary feature containing `p`, if any. Vertices win over edges.
    pub fn feature_at(&self, p: &RPoint) -> Option<Feature> {
        let probe = |d: Dir| self.next_contact(p, d, true).filter(|h| h.point == *p).map(|h| h.feature);
        if p.x.is_integer() {
            probe(Dir::Up)
        } else if p.y.is_integer() {
            probe(Dir::Right)
        } else {
            None
        }
    }

    /// Whether moving from boundary point `p` (on `f`) in direction `d`
    /// immediately enters the interior of `f`'s obstacle.
    pub fn enters(&self, f: Feature, d: Dir) -> bool {
        let dv = d.vector();
        match f {
            Feature::BBox => false,
            Feature::Edge(e) => {
                let s = self.obstacles[e.obstacle as usize].edge(e.edge as usize);
                let ex = (s.b.x - s.a.x) as i128;
                let ey = (s.b.y - s.a.y) as i128;
                ex * dv.1 as i128 - ey * dv.0 as i128 > 0
            }
            Feature::Vertex { obstacle, vertex } => {
                let poly = &self.obstacles[obstacle as usize];
                let n = poly.len();
                let v = poly.vertices[vertex as usize];
                let next = poly.vertices[(vertex as usize + 1) % n];
                let prev = poly.vertices[(vertex as usize + n - 1) % n];
                wedge_contains(v, next, prev, dv)
            }
        }
    }

    fn check_start(&self, p: Point) -> Result<()> {
        match self.locate(p)? {
            Located::Interior(o) => Err(Error::PointInsideObstacle(p, o)),
            _ => Ok(()),
        }
    }

    /// First boundary point hit by the ray from `p` in direction `d`.
    pub fn ray_shoot(&self, p: Point, d: Dir) -> Result<Hit> {
        self.check_start(p)?;
        Ok(self.first_contact(&p.into(), d))
    }

    /// First-contact projection of a point known to be in free space. A
    /// ray that immediately enters an obstacle stops at its start; an
    /// initial collinear run along an edge ends at the run's far endpoint.
    pub fn first_contact(&self, p: &RPoint, d: Dir) -> Hit {
        if let Some(f) = self.feature_at(p) {
            if self.enters(f, d) {
                return Hit { point: p.clone(), feature: f };
            }
        }
        match self.next_contact(p, d, false) {
            Some(h) => h,
            None => self.bbox_hit(Self::split(p, d).0, d),
        }
    }

    /// Farthest point `q` such that the segment from `p` to `q` avoids all
    /// obstacle interiors.
    pub fn free_extent(&self, p: &RPoint, d: Dir) -> Hit {
        if let Some(f) = self.feature_at(p) {
            if self.enters(f, d) {
                return Hit { point: p.clone(), feature: f };
            }
        }
        let mut cur = p.clone();
        loop {
            match self.next_contact(&cur, d, false) {
                None => return self.bbox_hit(Self::split(p, d).0, d),
                Some(h) => {
                    if self.enters(h.feature, d) {
                        return h;
                    }
                    cur = h.point;
                }
            }
        }
    }

    pub fn projections(&self, p: Point) -> Result<ProjectionQuad> {
        self.check_start(p)?;
        Ok(self.projections_r(&p.into()))
    }

    pub(crate) fn projections_r(&self, p: &RPoint) -> ProjectionQuad {
        ProjectionQuad {
            left: self.first_contact(p, Dir::Left),
            right: self.first_contact(p, Dir::Right),
            up: self.first_contact(p, Dir::Up),
            down: self.first_contact(p, Dir::Down),
        }
    }

    pub fn locate(&self, p: Point) -> Result<Located> {
        if !self.bbox.contains(p) {
            return Err(Error::OutOfBbox(p));
        }
        let rp: RPoint = p.into();
        match self.next_contact(&rp, Dir::Up, true) {
            None => Ok(Located::Free(self.cell_id(p))),
            Some(h) if h.point == rp => Ok(Located::Boundary(h.feature.obstacle().unwrap())),
            Some(h) => {
                if self.enters(h.feature, Dir::Down) {
                    Ok(Located::Interior(h.feature.obstacle().unwrap()))
                } else {
                    Ok(Located::Free(self.cell_id(p)))
                }
            }
        }
    }

    fn cell_id(&self, p: Point) -> usize {
        self.vertical.cell_of(p.x, &Rational::from_int(p.y)).expect("free point in a free cell") as usize
    }

    pub fn decomposition(&self, axis: Axis) -> VisibilityDecomposition {
        let (idx, dirs) = match axis {
            Axis::Vertical => (&self.vertical, [Dir::Up, Dir::Down]),
            Axis::Horizontal => (&self.horizontal, [Dir::Left, Dir::Right]),
        };
        let mut walls = Vec::new();
        for poly in &self.obstacles {
            for &v in &poly.vertices {
                for d in dirs {
                    let h = self.first_contact(&v.into(), d);
                    if h.point != RPoint::from(v) {
                        walls.push((v, h.point));
                    }
                }
            }
        }
        VisibilityDecomposition { axis, cells: idx.cells.clone(), walls }
    }

    /// Points strictly inside an obstacle reached by extending the edges at
    /// each reflex vertex, with the source `(obstacle, vertex)`.
    pub fn internal_projections(&self) -> Vec<(Point, (usize, usize))> {
        let mut out = Vec::new();
        for (oi, poly) in self.obstacles.iter().enumerate() {
            let n = poly.len();
            for vi in 0..n {
                let prev = poly.vertices[(vi + n - 1) % n];
                let v = poly.vertices[vi];
                let next = poly.vertices[(vi + 1) % n];
                if cross(prev, v, next) >= 0 {
                    continue;
                }
                let f = Feature::Vertex { obstacle: oi as u32, vertex: vi as u32 };
                for from in [prev, next] {
                    let Some(d) = axis_dir(from, v) else { continue };
                    if !self.enters(f, d) {
                        continue;
                    }
                    if let Some(h) = self.next_contact(&v.into(), d, false) {
                        if let Some(pt) = h.point.to_point() {
                            out.push((pt, (oi, vi)));
                        }
                    }
                }
            }
        }
        out
    }
}

/// The axis direction from `a` towards `b`, if they are axis-aligned.
fn axis_dir(a: Point, b: Point) -> Option<Dir> {
    match (b.x.cmp(&a.x), b.y.cmp(&a.y)) {
        (Ordering::Greater, Ordering::Equal) => Some(Dir::Right),
        (Ordering::Less, Ordering::Equal) => Some(Dir::Left),
        (Ordering::Equal, Ordering::Greater) => Some(Dir::Up),
        (Ordering::Equal, Ordering::Less) => Some(Dir::Down),
        _ => None,
    }
}

/// Whether direction `d` points strictly into the interior wedge at vertex
/// `v` of a counterclockwise polygon with neighbours `next` and `prev`.
fn wedge_contains(v: Point, next: Point, prev: Point, d: (i64, i64)) -> bool {
    let e1 = ((next.x - v.x) as i128, (next.y - v.y) as i128);
    let e2 = ((prev.x - v.x) as i128, (prev.y - v.y) as i128);
    let d = (d.0 as i128, d.1 as i128);
    let cr = |a: (i128, i128), b: (i128, i128)| (a.0 * b.1 - a.1 * b.0).signum();
    if cr(e1, e2) > 0 {
        cr(e1, d) > 0 && cr(d, e2) > 0
    } else {
        !(cr(e2, d) >= 0 && cr(d, e1) >= 0)
    }
}

/// Builds the horizontal and vertical decompositions of a scene.
pub fn build_decompositions(scene: &Scene) -> (VisibilityDecomposition, VisibilityDecomposition) {
    let vis = Visibility::new(scene);
    (vis.decomposition(Axis::Horizontal), vis.decomposition(Axis::Vertical))
}

/// Internal projections of every reflex vertex of a weighted scene.
pub fn internal_projections(scene: &Scene) -> Result<Vec<(Point, (usize, usize))>> {
    if scene.mode != Mode::RectilinearWeighted {
        return Err(Error::WrongMode { expected: "rectilinear-weighted" });
    }
    Ok(Visibility::new(scene).internal_projections())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{point_in_polygon, segment_avoids_interior, Location};
    use crate::rational::q;
    use crate::scene::fixtures::*;
    use crate::scene::{generate_scene, Mode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rp(x: Rational, y: i64) -> RPoint {
        RPoint::new(x, Rational::from_int(y))
    }

    #[test]
    fn scene_a_rays() {
        let vis = Visibility::new(&scene_a());
        let h = vis.ray_shoot(Point::new(0, 3), Dir::Right).unwrap();
        assert_eq!(h.point, rp(q(3, 2), 3));
        let h = vis.ray_shoot(Point::new(0, 3), Dir::Left).unwrap();
        assert_eq!(h.point, rp(Rational::from_int(-1), 3));
        assert!(h.is_bbox());
        assert_eq!(vis.ray_shoot(Point::new(3, 3), Dir::Up), Err(Error::PointInsideObstacle(Point::new(3, 3), 0)));
        let h = vis.ray_shoot(Point::new(6, 3), Dir::Left).unwrap();
        assert_eq!(h.point, rp(q(19, 4), 3));
    }

    #[test]
    fn scene_a_locate() {
        let vis = Visibility::new(&scene_a());
        assert!(matches!(vis.locate(Point::new(0, 0)), Ok(Located::Free(_))));
        assert_eq!(vis.locate(Point::new(3, 3)), Ok(Located::Interior(0)));
        assert_eq!(vis.locate(Point::new(2, 1)), Ok(Located::Boundary(0)));
        assert_eq!(vis.locate(Point::new(10, 10)), Err(Error::OutOfBbox(Point::new(10, 10))));
    }

    #[test]
    fn scene_a_walls() {
        // Brute force: a vertex has a wall in a direction iff a point just
        // beyond it in that direction lies outside the obstacle.
        let s = scene_a();
        let vis = Visibility::new(&s);
        let dec = vis.decomposition(Axis::Vertical);
        let poly = &s.obstacles[0];
        let mut expected = 0;
        for &v in &poly.vertices {
            for dy in [1i64, -1] {
                let probe = RPoint::new(Rational::from_int(v.x), Rational::from_int(v.y) + q(dy as i128, 1000));
                if crate::geom::point_in_polygon_r(&probe, poly) == Location::Exterior {
                    expected += 1;
                }
            }
        }
        assert_eq!(dec.walls.len(), expected);
        let anchors: std::collections::BTreeSet<_> = dec.walls.iter().map(|w| w.0).collect();
        assert_eq!(anchors.len(), 4);
    }

    #[test]
    fn empty_scene_single_cell() {
        let s = Scene::polygonal(vec![]);
        let (h, v) = build_decompositions(&s);
        assert_eq!(h.cells.len(), 1);
        assert_eq!(v.cells.len(), 1);
    }

    /// Counts free trapezoids by probing every column with brute-force
    /// edge intersections and merging columns with equal bounding edges.
    fn brute_cell_count(s: &Scene) -> usize {
        let mut xs: Vec<i64> = s.vertices().map(|p| p.x).collect();
        xs.sort();
        xs.dedup();
        let mut bounds = vec![s.bbox.x0];
        bounds.extend(xs.iter().copied());
        bounds.push(s.bbox.x1);
        let mut count = 0;
        type Span = (Option<(usize, usize)>, Option<(usize, usize)>);
        let mut prev: Vec<Span> = Vec::new();
        for w in bounds.windows(2) {
            let mid = q(w[0] as i128 + w[1] as i128, 2);
            let mut hits: Vec<(Rational, (usize, usize))> = Vec::new();
            for (oi, p) in s.obstacles.iter().enumerate() {
                for (ei, e) in p.edges().enumerate() {
                    let (a, b) = if e.a.x < e.b.x { (e.a, e.b) } else { (e.b, e.a) };
                    let (ax, bx) = (Rational::from_int(a.x), Rational::from_int(b.x));
                    if a.x == b.x || mid <= ax || mid >= bx {
                        continue;
                    }
                    let t = &(&mid - &ax) / &(&bx - &ax);
                    let y = &Rational::from_int(a.y) + &(&t * &Rational::from_int(b.y - a.y));
                    hits.push((y, (oi, ei)));
                }
            }
            hits.sort();
            let mut cur = Vec::new();
            for i in 0..=hits.len() {
                let lo = if i == 0 { Rational::from_int(s.bbox.y0) } else { hits[i - 1].0.clone() };
                let hi = if i == hits.len() { Rational::from_int(s.bbox.y1) } else { hits[i].0.clone() };
                let probe = RPoint::new(mid.clone(), Rational::midpoint(&lo, &hi));
                let free = s.obstacles.iter().all(|p| crate::geom::point_in_polygon_r(&probe, p) == Location::Exterior);
                if free {
                    let key = ((i > 0).then(|| hits[i - 1].1), hits.get(i).map(|h| h.1));
                    if !prev.contains(&key) {
                        count += 1;
                    }
                    cur.push(key);
                }
            }
            prev = cur;
        }
        count
    }

    #[test]
    fn two_obstacles_cell_count() {
        let s = generate_scene(8, 2, Mode::Polygonal, 11).unwrap();
        let (_, v) = build_decompositions(&s);
        let c = v.cells.len();
        assert!((9..=17).contains(&c), "{c}");
        assert_eq!(c, brute_cell_count(&s));
    }

    #[test]
    fn cell_counts_match_brute_force_and_bound() {
        for seed in 0..40 {
            let h = 1 + (seed as usize % 6);
            let s = generate_scene(3 * h + seed as usize % 17, h, Mode::Polygonal, seed).unwrap();
            let vis = Visibility::new(&s);
            let n = s.vertex_count();
            for axis in [Axis::Vertical, Axis::Horizontal] {
                assert!(vis.decomposition(axis).cells.len() <= 3 * n + 5);
            }
            assert_eq!(vis.decomposition(Axis::Vertical).cells.len(), brute_cell_count(&s), "seed {seed}");
        }
    }

    #[test]
    fn internal_projection_examples() {
        assert!(internal_projections(&scene_w()).unwrap().is_empty());
        let mut got: Vec<Point> = internal_projections(&l_shape()).unwrap().into_iter().map(|x| x.0).collect();
        got.sort();
        assert_eq!(got, vec![Point::new(0, 2), Point::new(2, 0)]);
        let inf = scene_w_with(crate::rational::Cost::Infinite);
        assert!(internal_projections(&inf).unwrap().is_empty());
        assert_eq!(internal_projections(&scene_a()), Err(Error::WrongMode { expected: "rectilinear-weighted" }));
    }

    fn brute_locate(s: &Scene, p: Point) -> Located {
        for (i, poly) in s.obstacles.iter().enumerate() {
            match point_in_polygon(p, poly) {
                Location::Interior => return Located::Interior(i),
                Location::Boundary => return Located::Boundary(i),
                Location::Exterior => {}
            }
        }
        Located::Free(0)
    }

    fn same_class(a: Located, b: Located) -> bool {
        match (a, b) {
            (Located::Free(_), Located::Free(_)) => true,
            _ => a == b,
        }
    }

    #[test]
    fn locate_matches_point_in_polygon() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut total = 0;
        for seed in 0..20u64 {
            let mode = if seed % 2 == 0 { Mode::Polygonal } else { Mode::RectilinearWeighted };
            let s = generate_scene(40, 4, mode, seed).unwrap();
            let vis = Visibility::new(&s);
            let verts: Vec<Point> = s.vertices().collect();
            for i in 0..5000 {
                let p = if i % 5 == 0 {
                    // Snap to vertex coordinates to hit degenerate cases.
                    let a = verts[rng.gen_range(0..verts.len())];
                    let b = verts[rng.gen_range(0..verts.len())];
                    Point::new(a.x, if i % 10 == 0 { a.y } else { b.y })
                } else {
                    Point::new(rng.gen_range(s.bbox.x0..=s.bbox.x1), rng.gen_range(s.bbox.y0..=s.bbox.y1))
                };
                let got = vis.locate(p).unwrap();
                assert!(same_class(got, brute_locate(&s, p)), "seed {seed} p {p:?} got {got:?}");
                total += 1;
            }
        }
        assert_eq!(total, 100_000);
    }

    /// Brute-force first contact: scan all edges for the nearest boundary
    /// point strictly ahead on the ray.
    fn brute_right(s: &Scene, p: Point) -> Rational {
        let mut best = Rational::from_int(s.bbox.x1);
        let y = Rational::from_int(p.y);
        let px = Rational::from_int(p.x);
        for poly in &s.obstacles {
            for e in poly.edges() {
                let (lo, hi) = (e.a.y.min(e.b.y), e.a.y.max(e.b.y));
                if p.y < lo || p.y > hi {
                    continue;
                }
                let xs: Vec<Rational> = if e.a.y == e.b.y {
                    vec![Rational::from_int(e.a.x), Rational::from_int(e.b.x)]
                } else {
                    let t = &(&y - &Rational::from_int(e.a.y)) / &Rational::from_int(e.b.y - e.a.y);
                    vec![&Rational::from_int(e.a.x) + &(&t * &Rational::from_int(e.b.x - e.a.x))]
                };
                for x in xs {
                    if x > px && x < best {
                        best = x;
                    }
                }
            }
        }
        best
    }

    #[test]
    fn rightward_rays_match_brute_force_and_stay_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        for seed in 0..10u64 {
            let s = generate_scene(60, 5, Mode::Polygonal, seed).unwrap();
            let vis = Visibility::new(&s);
            while checked < (seed as usize + 1) * 1000 {
                let p = Point::new(rng.gen_range(s.bbox.x0..s.bbox.x1), rng.gen_range(s.bbox.y0..=s.bbox.y1));
                if !matches!(vis.locate(p).unwrap(), Located::Free(_)) {
                    continue;
                }
                let h = vis.ray_shoot(p, Dir::Right).unwrap();
                assert!(h.point.x >= Rational::from_int(p.x));
                assert_eq!(h.point.x, brute_right(&s, p), "seed {seed} p {p:?}");
                let ext = vis.free_extent(&p.into(), Dir::Right);
                assert!(ext.point.x >= h.point.x);
                for poly in &s.obstacles {
                    assert!(segment_avoids_interior(&p.into(), &ext.point, poly));
                }
                checked += 1;
            }
        }
        assert_eq!(checked, 10_000);
    }

    #[test]
    fn reflex_vertex_on_vertical_edge() {
        let vis = Visibility::new(&l_shape());
        let v: RPoint = Point::new(2, 2).into();
        assert_eq!(vis.feature_at(&v), Some(Feature::Vertex { obstacle: 0, vertex: 3 }));
        assert_eq!(vis.first_contact(&v, Dir::Down).point, v);
        assert_eq!(vis.first_contact(&v, Dir::Left).point, v);
        assert_eq!(vis.first_contact(&v, Dir::Up).point, Point::new(2, 4).into());
        assert_eq!(vis.first_contact(&v, Dir::Right).point, Point::new(4, 2).into());
    }
}
