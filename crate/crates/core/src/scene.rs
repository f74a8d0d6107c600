//! Obstacle scenes: model, validation, random generation and the JSON file
//! format.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cross, point_in_polygon, segments_intersect, Intersection, Location, Point, Polygon, COORD_LIMIT};
use crate::rational::{Cost, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Arbitrary simple polygons in general position.
    Polygonal,
    /// Axis-parallel polygons carrying traversal weights.
    RectilinearWeighted,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Polygonal => "polygonal",
            Mode::RectilinearWeighted => "rectilinear-weighted",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "polygonal" => Ok(Mode::Polygonal),
            "rectilinear-weighted" => Ok(Mode::RectilinearWeighted),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Axis-parallel bounding rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BBox {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    pub fn strictly_contains(&self, p: Point) -> bool {
        self.x0 < p.x && p.x < self.x1 && self.y0 < p.y && p.y < self.y1
    }

    /// The obstacle bounds inflated by 10% per axis, with a margin of at
    /// least one unit.
    pub fn around(obstacles: &[Polygon]) -> Self {
        let pts = obstacles.iter().flat_map(|p| p.vertices.iter());
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in pts {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if x0 > x1 {
            return BBox::new(-1, -1, 1, 1);
        }
        let mx = ((x1 - x0) as i128 + 9) / 10;
        let my = ((y1 - y0) as i128 + 9) / 10;
        let mx = mx.max(1) as i64;
        let my = my.max(1) as i64;
        BBox::new(x0 - mx, y0 - my, x1 + mx, y1 + my)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scene {
    pub mode: Mode,
    pub bbox: BBox,
    pub obstacles: Vec<Polygon>,
    /// One weight per obstacle in weighted mode; `None` otherwise.
    pub weights: Option<Vec<Cost>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SceneStats {
    /// Total obstacle vertex count.
    pub n: usize,
    /// Obstacle count.
    pub h: usize,
    /// `ceil(log2(max(n, 2)))`.
    pub levels: usize,
    /// `ceil(sqrt(levels))`.
    pub super_levels: usize,
}

impl SceneStats {
    pub fn from_counts(n: usize, h: usize) -> Self {
        let levels = ceil_log2(n.max(2));
        SceneStats { n, h, levels, super_levels: ceil_sqrt(levels) }
    }
}

pub fn ceil_log2(v: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < v {
        l += 1;
    }
    l
}

pub fn ceil_sqrt(v: usize) -> usize {
    let mut r = 0;
    while r * r < v {
        r += 1;
    }
    r
}

impl Scene {
    pub fn polygonal(obstacles: Vec<Polygon>) -> Self {
        Scene { mode: Mode::Polygonal, bbox: BBox::around(&obstacles), obstacles, weights: None }
    }

    pub fn weighted(obstacles: Vec<Polygon>, weights: Vec<Cost>) -> Self {
        Scene { mode: Mode::RectilinearWeighted, bbox: BBox::around(&obstacles), obstacles, weights: Some(weights) }
    }

    pub fn with_bbox(mut self, bbox: BBox) -> Self {
        self.bbox = bbox;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.obstacles.iter().map(Polygon::len).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.obstacles.iter().flat_map(|p| p.vertices.iter().copied())
    }

    pub fn weight(&self, obstacle: usize) -> Cost {
        match &self.weights {
            Some(w) => w[obstacle].clone(),
            None => Cost::Infinite,
        }
    }

    /// The same geometry with every obstacle impassable, in polygonal mode.
    /// The result is not in general position when the source is rectilinear.
    pub fn as_unweighted(&self) -> Scene {
        Scene { mode: Mode::Polygonal, bbox: self.bbox, obstacles: self.obstacles.clone(), weights: None }
    }

    /// A copy with every weight replaced.
    pub fn with_uniform_weight(&self, w: Cost) -> Scene {
        let mut s = self.clone();
        s.mode = Mode::RectilinearWeighted;
        s.weights = Some(vec![w; self.obstacles.len()]);
        s
    }
}

/// Checks that a polygon is simple, counterclockwise, has no repeated or
/// collinear consecutive vertices, and fits the coordinate limit.
pub fn check_polygon(poly: &Polygon) -> std::result::Result<(), String> {
    let n = poly.len();
    if n < 3 {
        return Err(format!("needs at least 3 vertices, has {n}"));
    }
    for (i, v) in poly.vertices.iter().enumerate() {
        if v.x.abs() >= COORD_LIMIT || v.y.abs() >= COORD_LIMIT {
            return Err(format!("vertex {i} exceeds the coordinate limit"));
        }
    }
    for i in 0..n {
        let a = poly.vertices[(i + n - 1) % n];
        let b = poly.vertices[i];
        let c = poly.vertices[(i + 1) % n];
        if b == c {
            return Err(format!("repeated vertex {i}"));
        }
        if cross(a, b, c) == 0 {
            return Err(format!("vertex {i} is collinear with its neighbours"));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let hit = segments_intersect(poly.edge(i), poly.edge(j));
            let bad = if adjacent {
                // Adjacent edges may only share their common vertex.
                !matches!(hit, Intersection::Touch(_))
            } else {
                hit != Intersection::Disjoint
            };
            if bad {
                return Err(format!("edges {i} and {j} intersect (not simple)"));
            }
        }
    }
    if poly.doubled_area() <= 0 {
        return Err("vertices are not in counterclockwise order".into());
    }
    Ok(())
}

/// Validates all scene invariants and returns the summary counts.
pub fn validate_scene(s: &Scene) -> Result<SceneStats> {
    validate_inner(s, true)
}

/// Like [`validate_scene`] but skips the general-position requirement of
/// polygonal mode.
pub fn validate_scene_relaxed(s: &Scene) -> Result<SceneStats> {
    validate_inner(s, false)
}

fn validate_inner(s: &Scene, general_position: bool) -> Result<SceneStats> {
    for (i, poly) in s.obstacles.iter().enumerate() {
        for (j, v) in poly.vertices.iter().enumerate() {
            if v.x.abs() >= COORD_LIMIT || v.y.abs() >= COORD_LIMIT {
                return Err(Error::CoordinateOutOfRange { obstacle: i, vertex: j });
            }
        }
        check_polygon(poly).map_err(|reason| Error::MalformedPolygon { obstacle: i, reason })?;
        for (j, v) in poly.vertices.iter().enumerate() {
            if !s.bbox.strictly_contains(*v) {
                return Err(Error::MalformedPolygon {
                    obstacle: i,
                    reason: format!("vertex {j} is not strictly inside the bounding box"),
                });
            }
        }
    }
    if s.bbox.x0 >= s.bbox.x1 || s.bbox.y0 >= s.bbox.y1 {
        return Err(Error::MalformedPolygon { obstacle: 0, reason: "empty bounding box".into() });
    }
    match s.mode {
        Mode::RectilinearWeighted => {
            let weights = s
                .weights
                .as_ref()
                .ok_or(Error::MalformedPolygon { obstacle: 0, reason: "weighted scene without weights".into() })?;
            if weights.len() != s.obstacles.len() {
                return Err(Error::MalformedPolygon {
                    obstacle: weights.len().min(s.obstacles.len()),
                    reason: "weight count differs from obstacle count".into(),
                });
            }
            for (i, w) in weights.iter().enumerate() {
                if let Cost::Finite(r) = w {
                    if r.signum() < 0 {
                        return Err(Error::NegativeWeight { obstacle: i });
                    }
                }
            }
            for (i, poly) in s.obstacles.iter().enumerate() {
                for (j, e) in poly.edges().enumerate() {
                    if !e.is_axis_parallel() {
                        return Err(Error::NonRectilinearEdge { obstacle: i, edge: j });
                    }
                }
            }
        }
        Mode::Polygonal => {
            if s.weights.is_some() {
                return Err(Error::MalformedPolygon { obstacle: 0, reason: "polygonal scene carries weights".into() });
            }
        }
    }
    check_disjoint(&s.obstacles)?;
    if general_position && s.mode == Mode::Polygonal {
        check_general_position(&s.obstacles)?;
    }
    Ok(SceneStats::from_counts(s.vertex_count(), s.obstacles.len()))
}

fn check_disjoint(obstacles: &[Polygon]) -> Result<()> {
    let bounds: Vec<_> = obstacles.iter().map(Polygon::bounds).collect();
    let mut order: Vec<usize> = (0..obstacles.len()).collect();
    order.sort_by_key(|&i| bounds[i].0.x);
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if bounds[j].0.x > bounds[i].1.x {
                break;
            }
            let (lo_i, hi_i) = bounds[i];
            let (lo_j, hi_j) = bounds[j];
            if lo_j.y > hi_i.y || lo_i.y > hi_j.y {
                continue;
            }
            let (a, b) = (i.min(j), i.max(j));
            let pa = &obstacles[a];
            let pb = &obstacles[b];
            for ea in pa.edges() {
                for eb in pb.edges() {
                    if segments_intersect(ea, eb) != Intersection::Disjoint {
                        return Err(Error::DisjointnessViolation { a, b });
                    }
                }
            }
            if point_in_polygon(pa.vertices[0], pb) != Location::Exterior
                || point_in_polygon(pb.vertices[0], pa) != Location::Exterior
            {
                return Err(Error::DisjointnessViolation { a, b });
            }
        }
    }
    Ok(())
}

fn check_general_position(obstacles: &[Polygon]) -> Result<()> {
    for axis in ['x', 'y'] {
        let mut seen: HashMap<i64, (usize, usize)> = HashMap::new();
        let mut all: Vec<(i64, usize, usize)> = Vec::new();
        for (i, poly) in obstacles.iter().enumerate() {
            for (j, v) in poly.vertices.iter().enumerate() {
                all.push((if axis == 'x' { v.x } else { v.y }, i, j));
            }
        }
        all.sort();
        for (value, i, j) in all {
            if let Some(&first) = seen.get(&value) {
                return Err(Error::GeneralPositionViolation { first, second: (i, j), axis, value });
            }
            seen.insert(value, (i, j));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Generation

/// Default weight palette for generated weighted scenes.
pub fn default_palette() -> Vec<Cost> {
    ["0", "1/2", "1", "2", "inf"].iter().map(|s| s.parse().unwrap()).collect()
}

#[derive(Clone, Debug)]
pub struct GenerateParams {
    pub n: usize,
    pub h: usize,
    pub mode: Mode,
    pub seed: u64,
    pub palette: Vec<Cost>,
}

impl GenerateParams {
    pub fn new(n: usize, h: usize, mode: Mode, seed: u64) -> Self {
        GenerateParams { n, h, mode, seed, palette: default_palette() }
    }
}

/// Generates a valid random scene, deterministically per seed.
pub fn generate_scene(n: usize, h: usize, mode: Mode, seed: u64) -> Result<Scene> {
    generate_scene_with(&GenerateParams::new(n, h, mode, seed))
}

pub fn generate_scene_with(params: &GenerateParams) -> Result<Scene> {
    let &GenerateParams { n, h, mode, seed, .. } = params;
    if h == 0 {
        return Err(Error::InfeasibleParameters("need at least one obstacle".into()));
    }
    let min_per = if mode == Mode::Polygonal { 3 } else { 4 };
    if n < min_per * h {
        return Err(Error::InfeasibleParameters(format!(
            "{n} vertices cannot form {h} obstacles of at least {min_per} vertices"
        )));
    }
    if mode == Mode::RectilinearWeighted && params.palette.is_empty() {
        return Err(Error::InfeasibleParameters("empty weight palette".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = split_counts(n, h, mode, &mut rng);
    let max_k = *counts.iter().max().unwrap();
    let cols = ceil_sqrt(h).max(1);
    let cell = match mode {
        Mode::Polygonal => 16 * (max_k as i64 + 8) + 4 * n as i64,
        Mode::RectilinearWeighted => 48 * (max_k as i64 + 8),
    };
    let mut used_x = std::collections::HashSet::new();
    let mut used_y = std::collections::HashSet::new();
    let mut obstacles = Vec::with_capacity(h);
    for (idx, &k) in counts.iter().enumerate() {
        let ox = (idx % cols) as i64 * cell;
        let oy = (idx / cols) as i64 * cell;
        let mut made = None;
        for _attempt in 0..64 {
            let cand = match mode {
                Mode::Polygonal => star_polygon(k, ox, oy, cell, &mut rng, &used_x, &used_y),
                Mode::RectilinearWeighted => notched_rectangle(k, ox, oy, cell, &mut rng),
            };
            if let Some(poly) = cand {
                if check_polygon(&poly).is_ok() {
                    made = Some(poly);
                    break;
                }
            }
        }
        let poly = made
            .ok_or_else(|| Error::InfeasibleParameters(format!("could not place obstacle {idx} with {k} vertices")))?;
        for v in &poly.vertices {
            used_x.insert(v.x);
            used_y.insert(v.y);
        }
        obstacles.push(poly);
    }
    let scene = match mode {
        Mode::Polygonal => Scene::polygonal(obstacles),
        Mode::RectilinearWeighted => {
            let weights = (0..h).map(|_| params.palette.choose(&mut rng).unwrap().clone()).collect();
            Scene::weighted(obstacles, weights)
        }
    };
    validate_scene(&scene).map_err(|e| Error::InfeasibleParameters(format!("generated scene invalid: {e}")))?;
    Ok(scene)
}

fn split_counts(n: usize, h: usize, mode: Mode, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match mode {
        Mode::Polygonal => {
            let mut counts = vec![3; h];
            for _ in 0..(n - 3 * h) {
                let i = rng.gen_range(0..h);
                counts[i] += 1;
            }
            counts
        }
        Mode::RectilinearWeighted => {
            let mut counts = vec![4; h];
            for _ in 0..((n - 4 * h) / 2) {
                let i = rng.gen_range(0..h);
                counts[i] += 2;
            }
            counts
        }
    }
}

/// A star-shaped polygon with `k` vertices in the cell at `(ox, oy)`, using
/// coordinates not already taken by other obstacles.
fn star_polygon(
    k: usize,
    ox: i64,
    oy: i64,
    cell: i64,
    rng: &mut ChaCha8Rng,
    used_x: &std::collections::HashSet<i64>,
    used_y: &std::collections::HashSet<i64>,
) -> Option<Polygon> {
    let cx = ox + cell / 2 + rng.gen_range(-(cell / 20)..=cell / 20);
    let cy = oy + cell / 2 + rng.gen_range(-(cell / 20)..=cell / 20);
    let r_max = cell as f64 * 0.44;
    let sx = rng.gen_range(0.45..1.0);
    let sy = rng.gen_range(0.45..1.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut xs = std::collections::HashSet::new();
    let mut ys = std::collections::HashSet::new();
    let mut verts = Vec::with_capacity(k);
    for i in 0..k {
        let sector = std::f64::consts::TAU / k as f64;
        let mut placed = None;
        for _ in 0..50 {
            let a = phase + sector * (i as f64 + rng.gen_range(0.2..0.8));
            let r = r_max * rng.gen_range(0.35..1.0);
            let x = cx + (r * sx * a.cos()).round() as i64;
            let y = cy + (r * sy * a.sin()).round() as i64;
            if used_x.contains(&x) || used_y.contains(&y) || xs.contains(&x) || ys.contains(&y) {
                continue;
            }
            placed = Some(Point::new(x, y));
            break;
        }
        let v = placed?;
        xs.insert(v.x);
        ys.insert(v.y);
        verts.push(v);
    }
    Some(Polygon::new(verts))
}

/// A rectangle with corner notches and edge bites giving exactly `k`
/// (even, >= 4) vertices.
fn notched_rectangle(k: usize, ox: i64, oy: i64, cell: i64, rng: &mut ChaCha8Rng) -> Option<Polygon> {
    let r = (k - 4) / 2;
    let (corners, bites) = if r <= 4 {
        (r, 0)
    } else if r.is_multiple_of(2) {
        (4, (r - 4) / 2)
    } else {
        (3, (r - 3) / 2)
    };
    let w = rng.gen_range(cell * 5 / 10..=cell * 8 / 10);
    let hgt = rng.gen_range(cell * 5 / 10..=cell * 8 / 10);
    let x0 = ox + rng.gen_range(cell / 20..=(cell - w - cell / 20).max(cell / 20));
    let y0 = oy + rng.gen_range(cell / 20..=(cell - hgt - cell / 20).max(cell / 20));

    let mut corner_on = [false; 4];
    let mut idx: Vec<usize> = (0..4).collect();
    idx.shuffle(rng);
    for &c in idx.iter().take(corners) {
        corner_on[c] = true;
    }
    let mut per_side = [0usize; 4];
    for _ in 0..bites {
        per_side[rng.gen_range(0..4)] += 1;
    }
    let notch = |rng: &mut ChaCha8Rng, len: i64| rng.gen_range(2.max(len / 16)..=(len / 5).max(3));
    let corner_sizes: Vec<(i64, i64)> = (0..4).map(|_| (notch(rng, w), notch(rng, hgt))).collect();

    // Bite intervals along a side of length `len`, inside its middle half.
    let bite_spans = |rng: &mut ChaCha8Rng, len: i64, count: usize| -> Option<Vec<(i64, i64)>> {
        if count == 0 {
            return Some(Vec::new());
        }
        let lo = len / 4;
        let slot = (len / 2) / count as i64;
        if slot < 6 {
            return None;
        }
        Some(
            (0..count)
                .map(|i| {
                    let s = lo + slot * i as i64;
                    let a = s + rng.gen_range(1..=slot / 3);
                    let b = s + slot - rng.gen_range(1..=slot / 3);
                    (a, b)
                })
                .collect(),
        )
    };
    let depth = |rng: &mut ChaCha8Rng, len: i64| rng.gen_range(2.max(len / 16)..=(len / 5).max(3));

    let bottom = bite_spans(rng, w, per_side[0])?;
    let right = bite_spans(rng, hgt, per_side[1])?;
    let top = bite_spans(rng, w, per_side[2])?;
    let left = bite_spans(rng, hgt, per_side[3])?;

    let mut v: Vec<(i64, i64)> = Vec::with_capacity(k);
    // bottom-left corner
    if corner_on[0] {
        let (a, b) = corner_sizes[0];
        v.extend([(0, b), (a, b), (a, 0)]);
    } else {
        v.push((0, 0));
    }
    for &(a, b) in &bottom {
        let d = depth(rng, hgt);
        v.extend([(a, 0), (a, d), (b, d), (b, 0)]);
    }
    if corner_on[1] {
        let (a, b) = corner_sizes[1];
        v.extend([(w - a, 0), (w - a, b), (w, b)]);
    } else {
        v.push((w, 0));
    }
    for &(a, b) in &right {
        let d = depth(rng, w);
        v.extend([(w, a), (w - d, a), (w - d, b), (w, b)]);
    }
    if corner_on[2] {
        let (a, b) = corner_sizes[2];
        v.extend([(w, hgt - b), (w - a, hgt - b), (w - a, hgt)]);
    } else {
        v.push((w, hgt));
    }
    for &(a, b) in top.iter().rev() {
        let d = depth(rng, hgt);
        v.extend([(b, hgt), (b, hgt - d), (a, hgt - d), (a, hgt)]);
    }
    if corner_on[3] {
        let (a, b) = corner_sizes[3];
        v.extend([(a, hgt), (a, hgt - b), (0, hgt - b)]);
    } else {
        v.push((0, hgt));
    }
    for &(a, b) in left.iter().rev() {
        let d = depth(rng, w);
        v.extend([(0, b), (d, b), (d, a), (0, a)]);
    }
    if v.len() != k {
        return None;
    }
    Some(Polygon::new(v.into_iter().map(|(x, y)| Point::new(x0 + x, y0 + y)).collect()))
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    mode: String,
    bbox: [i64; 4],
    obstacles: Vec<ObstacleDoc>,
}

#[derive(Serialize, Deserialize)]
struct ObstacleDoc {
    vertices: Vec<[i64; 2]>,
    weight: Option<String>,
}

fn weight_string(w: &Cost) -> String {
    match w {
        Cost::Finite(r) => r.to_fraction_string(),
        Cost::Infinite => "inf".into(),
    }
}

/// Random points of the closed free space of `scene`. Roughly half are
/// uniform over the bounding box; the rest reuse vertex coordinates so that
/// ties with vertices, edges and cut-lines get exercised.
pub fn sample_free_points(scene: &Scene, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<Point> = scene.vertices().collect();
    let b = scene.bbox;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut p = Point::new(rng.gen_range(b.x0..=b.x1), rng.gen_range(b.y0..=b.y1));
        if !verts.is_empty() {
            match rng.gen_range(0..8) {
                0 => p = *verts.choose(&mut rng).unwrap(),
                1 => p.x = verts.choose(&mut rng).unwrap().x,
                2 => p.y = verts.choose(&mut rng).unwrap().y,
                3 => p = Point::new(verts.choose(&mut rng).unwrap().x, verts.choose(&mut rng).unwrap().y),
                _ => {}
            }
        }
        if scene.obstacles.iter().all(|poly| point_in_polygon(p, poly) != Location::Interior) {
            out.push(p);
        }
    }
    out
}

/// Serializes a scene to its canonical JSON document.
pub fn save_scene(s: &Scene) -> Vec<u8> {
    let doc = SceneDoc {
        mode: s.mode.as_str().into(),
        bbox: [s.bbox.x0, s.bbox.y0, s.bbox.x1, s.bbox.y1],
        obstacles: s
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, p)| ObstacleDoc {
                vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
                weight: s.weights.as_ref().map(|w| weight_string(&w[i])),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec(&doc).expect("scene serialization");
    out.push(b'\n');
    out
}

/// Parses and validates a scene document.
pub fn load_scene(bytes: &[u8]) -> Result<Scene> {
    let scene = parse_scene(bytes)?;
    validate_scene(&scene)?;
    Ok(scene)
}

/// Parses a scene document without validating it.
pub fn parse_scene(bytes: &[u8]) -> Result<Scene> {
    let doc: SceneDoc = serde_json::from_slice(bytes).map_err(|e| Error::parse(&e))?;
    let bad = |message: String| Error::Parse { line: 1, column: 1, message };
    let mode: Mode = doc.mode.parse().map_err(bad)?;
    let [x0, y0, x1, y1] = doc.bbox;
    let mut obstacles = Vec::with_capacity(doc.obstacles.len());
    let mut weights = Vec::new();
    for (i, o) in doc.obstacles.into_iter().enumerate() {
        obstacles.push(Polygon::new(o.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect()));
        match (mode, o.weight) {
            (Mode::RectilinearWeighted, Some(w)) => {
                let c: Cost = w.parse().map_err(|e| bad(format!("obstacle {i}: {e}")))?;
                weights.push(c);
            }
            (Mode::RectilinearWeighted, None) => {
                return Err(bad(format!("obstacle {i} needs a weight in weighted mode")));
            }
            (Mode::Polygonal, Some(_)) => {
                return Err(bad(format!("obstacle {i} has a weight in polygonal mode")));
            }
            (Mode::Polygonal, None) => {}
        }
    }
    Ok(Scene {
        mode,
        bbox: BBox::new(x0, y0, x1, y1),
        obstacles,
        weights: (mode == Mode::RectilinearWeighted).then_some(weights),
    })
}

/// Fixture scenes shared by tests, docs and the CLI.
pub mod fixtures {
    use super::*;

    /// One quadrilateral `(2,1),(5,2),(4,6),(1,5)` in `[-1,7]^2`.
    pub fn scene_a() -> Scene {
        let poly = Polygon::new(vec![Point::new(2, 1), Point::new(5, 2), Point::new(4, 6), Point::new(1, 5)]);
        Scene::polygonal(vec![poly]).with_bbox(BBox::new(-1, -1, 7, 7))
    }

    /// The square `[1,3]^2` with weight `w`, in `[-1,5]^2`.
    pub fn scene_w_with(w: Cost) -> Scene {
        let poly = Polygon::new(vec![Point::new(1, 1), Point::new(3, 1), Point::new(3, 3), Point::new(1, 3)]);
        Scene::weighted(vec![poly], vec![w]).with_bbox(BBox::new(-1, -1, 5, 5))
    }

    /// SCENE-W with weight 1/2.
    pub fn scene_w() -> Scene {
        scene_w_with(Cost::Finite(Rational::new(1, 2)))
    }

    /// The L-shape `[0,4]x[0,2] ∪ [0,2]x[2,4]` with weight 1.
    pub fn l_shape() -> Scene {
        let poly =
            Polygon::new([(0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)].into_iter().map(Point::from).collect());
        Scene::weighted(vec![poly], vec![Cost::Finite(Rational::ONE)]).with_bbox(BBox::new(-2, -2, 6, 6))
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scene_a_stats() {
        let st = validate_scene(&scene_a()).unwrap();
        assert_eq!(st, SceneStats { n: 4, h: 1, levels: 2, super_levels: 2 });
    }

    #[test]
    fn extra_vertex_breaks_general_position() {
        let mut s = scene_a();
        // (2,1) -> (3,1) -> (5,2): the new vertex shares y = 1 with (2,1).
        s.obstacles[0].vertices.insert(1, Point::new(3, 1));
        // Collinear-free variant sharing x = 2 instead.
        let mut t = scene_a();
        t.obstacles[0].vertices.insert(3, Point::new(2, 6));
        for bad in [s, t] {
            match validate_scene(&bad) {
                Err(Error::GeneralPositionViolation { .. }) => {}
                other => panic!("expected general position violation, got {other:?}"),
            }
        }
    }

    #[test]
    fn rectangle_fails_general_position_in_polygonal_mode() {
        let s = scene_w().as_unweighted();
        assert!(matches!(validate_scene(&s), Err(Error::GeneralPositionViolation { .. })));
        assert!(validate_scene(&scene_w()).is_ok());
        assert!(validate_scene_relaxed(&s).is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut s = scene_w();
        s.obstacles[0].vertices[1] = Point::new(3, 0);
        s.obstacles[0].vertices[0] = Point::new(1, 1);
        assert!(matches!(validate_scene(&s), Err(Error::NonRectilinearEdge { obstacle: 0, .. })));

        let s = scene_w_with(Cost::Finite(Rational::from_int(-1)));
        assert_eq!(validate_scene(&s), Err(Error::NegativeWeight { obstacle: 0 }));

        let mut s = scene_a();
        s.obstacles[0].vertices.reverse();
        assert!(matches!(validate_scene(&s), Err(Error::MalformedPolygon { obstacle: 0, .. })));

        let a = Polygon::new(vec![Point::new(0, 0), Point::new(4, 1), Point::new(1, 5)]);
        let b = Polygon::new(vec![Point::new(2, 2), Point::new(7, 3), Point::new(3, 6)]);
        let s = Scene::polygonal(vec![a.clone(), b]);
        assert_eq!(validate_scene(&s), Err(Error::DisjointnessViolation { a: 0, b: 1 }));
        // Nested obstacle.
        let inner = Polygon::new(vec![Point::new(1, 2), Point::new(2, 1), Point::new(2, 3)]);
        let outer = Polygon::new(vec![Point::new(-3, -4), Point::new(9, -2), Point::new(-1, 8)]);
        let s = Scene::polygonal(vec![outer, inner]);
        assert_eq!(validate_scene(&s), Err(Error::DisjointnessViolation { a: 0, b: 1 }));
        let _ = a;
    }

    #[test]
    fn default_bbox() {
        let s = Scene::polygonal(scene_a().obstacles);
        assert_eq!(s.bbox, BBox::new(0, 0, 6, 7));
        assert_eq!(BBox::around(&[]), BBox::new(-1, -1, 1, 1));
    }

    #[test]
    fn generate_examples() {
        let s = generate_scene(12, 3, Mode::Polygonal, 7).unwrap();
        assert_eq!(s.vertex_count(), 12);
        assert_eq!(s.obstacles.len(), 3);
        validate_scene(&s).unwrap();
        let again = generate_scene(12, 3, Mode::Polygonal, 7).unwrap();
        assert_eq!(save_scene(&s), save_scene(&again));
        assert!(matches!(generate_scene(2, 1, Mode::Polygonal, 1), Err(Error::InfeasibleParameters(_))));
        let w = generate_scene(40, 4, Mode::RectilinearWeighted, 3).unwrap();
        assert_eq!(w.vertex_count(), 40);
        validate_scene(&w).unwrap();
    }

    #[test]
    fn json_round_trip_and_errors() {
        let a = scene_a();
        let bytes = save_scene(&a);
        assert_eq!(load_scene(&bytes).unwrap(), a);
        let w = scene_w();
        let text = String::from_utf8(save_scene(&w)).unwrap();
        assert!(text.contains("\"weight\":\"1/2\""), "{text}");
        assert_eq!(load_scene(text.as_bytes()).unwrap(), w);

        let truncated = &bytes[..bytes.len() / 2];
        assert!(matches!(load_scene(truncated), Err(Error::Parse { .. })));

        let cw = r#"{"mode":"polygonal","bbox":[-1,-1,7,7],"obstacles":[{"vertices":[[1,5],[4,6],[5,2],[2,1]],"weight":null}]}"#;
        assert!(matches!(load_scene(cw.as_bytes()), Err(Error::MalformedPolygon { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn generated_scenes_validate(seed in any::<u64>(), h in 1usize..8, extra in 0usize..60, weighted in any::<bool>()) {
            let mode = if weighted { Mode::RectilinearWeighted } else { Mode::Polygonal };
            let n = 4 * h + extra;
            let s = generate_scene(n, h, mode, seed).unwrap();
            prop_assert!(validate_scene(&s).is_ok());
            let once = save_scene(&s);
            let twice = save_scene(&load_scene(&once).unwrap());
            prop_assert_eq!(once, twice);
        }
    }
}
