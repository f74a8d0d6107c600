//! Weighted rectilinear scenes.
//!
//! Obstacles can be crossed at rate `1 + w`. The engine builds Steiner
//! points over the node set of obstacle vertices, their internal
//! projections and their boundary projections, on both a vertical and a
//! horizontal cut-line tree. All coordinates are integers in this mode.

use std::borrow::Cow;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::cascade::{successors_binary, FractionalCascade, SearchMode};
use crate::cutline::{build_cutline_tree, CutAxis, CutLineTree};
use crate::error::{Error, Result};
use crate::gateway::{Gateway, GatewaySet};
use crate::geom::{l1_length, point_in_polygon_r, Location, Point, RPoint};
use crate::graph::{dedupe_and_index, kind, PathGraph, Variant};
use crate::query::{full_apsp, route, Apsp, ApspPolicy, PathKind, PreprocessOptions, QueryResult};
use crate::rational::{Cost, Rational};
use crate::scene::{validate_scene, Mode, Scene};
use crate::visibility::{Dir, EdgeId, Feature, Located, Visibility};

/// What an open piece of an axis-parallel line runs through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Free,
    /// Along an edge of the obstacle.
    Boundary(u32),
    Interior(u32),
}

/// Weighted length accumulated from some origin: the finite part plus the
/// total length covered at infinite rate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dw {
    pub finite: Rational,
    pub infinite: i128,
}

impl Dw {
    fn advance(&self, rate: &Cost, len: i64) -> Dw {
        if len == 0 {
            return self.clone();
        }
        match rate {
            Cost::Finite(r) => Dw { finite: &self.finite + &(r * &Rational::from_int(len)), infinite: self.infinite },
            Cost::Infinite => Dw { finite: self.finite.clone(), infinite: self.infinite + len as i128 },
        }
    }

    /// Cost of the stretch between `self` and a larger accumulation.
    pub fn until(&self, later: &Dw) -> Cost {
        if later.infinite != self.infinite {
            Cost::Infinite
        } else {
            Cost::Finite(&later.finite - &self.finite)
        }
    }
}

/// Pieces of one axis-parallel line across the bounding box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineProfile {
    /// `Vertical` for the line `x = c`, `Horizontal` for `y = c`.
    pub axis: CutAxis,
    pub c: i64,
    /// Increasing positions along the line, from one side of the bounding
    /// box to the other.
    pub breaks: Vec<i64>,
    /// `pieces[i]` covers the open stretch `breaks[i]..breaks[i + 1]`.
    pub pieces: Vec<Piece>,
    pub rates: Vec<Cost>,
    prefix: Vec<Dw>,
}

impl LineProfile {
    pub fn new(scene: &Scene, axis: CutAxis, c: i64) -> Self {
        let b = scene.bbox;
        let (lo, hi) = match axis {
            CutAxis::Vertical => (b.y0, b.y1),
            CutAxis::Horizontal => (b.x0, b.x1),
        };
        let mut marked: Vec<(i64, i64, Piece)> = Vec::new();
        let rc = Rational::from_int(c);
        for (i, poly) in scene.obstacles.iter().enumerate() {
            let (mn, mx) = poly.bounds();
            if c < axis.key(mn) || c > axis.key(mx) {
                continue;
            }
            let mut bs = Vec::new();
            for e in poly.edges() {
                let (ka, kb) = (axis.key(e.a), axis.key(e.b));
                if ka == kb {
                    if ka == c {
                        bs.extend([axis.along(e.a), axis.along(e.b)]);
                    }
                } else if ka.min(kb) <= c && c <= ka.max(kb) {
                    debug_assert_eq!(axis.along(e.a), axis.along(e.b), "rectilinear edges only");
                    bs.push(axis.along(e.a));
                }
            }
            bs.sort_unstable();
            bs.dedup();
            for w in bs.windows(2) {
                let mid = Rational::midpoint(&Rational::from_int(w[0]), &Rational::from_int(w[1]));
                let piece = match point_in_polygon_r(&axis.point(rc.clone(), mid), poly) {
                    Location::Interior => Piece::Interior(i as u32),
                    Location::Boundary => Piece::Boundary(i as u32),
                    Location::Exterior => continue,
                };
                marked.push((w[0], w[1], piece));
            }
        }
        marked.sort_by_key(|m| (m.0, m.1));
        let mut breaks = vec![lo, hi];
        breaks.extend(marked.iter().flat_map(|m| [m.0, m.1]));
        breaks.sort_unstable();
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len());
        for w in breaks.windows(2) {
            let k = marked.partition_point(|m| m.0 <= w[0]);
            let piece = match k.checked_sub(1).map(|k| marked[k]) {
                Some((_, end, p)) if end >= w[1] => p,
                _ => Piece::Free,
            };
            pieces.push(piece);
        }
        let rates: Vec<Cost> = pieces
            .iter()
            .map(|p| match p {
                Piece::Interior(i) => scene.weight(*i as usize).rate(),
                _ => Cost::Finite(Rational::ONE),
            })
            .collect();
        let mut prefix = vec![Dw::default()];
        for (i, w) in breaks.windows(2).enumerate() {
            let next = prefix[i].advance(&rates[i], w[1] - w[0]);
            prefix.push(next);
        }
        LineProfile { axis, c, breaks, pieces, rates, prefix }
    }

    /// Weighted length from the start of the line to position `t`.
    pub fn dw_at(&self, t: i64) -> Dw {
        let k = self.breaks.partition_point(|&b| b <= t);
        if k == 0 {
            Dw::default()
        } else if k == self.breaks.len() {
            self.prefix[k - 1].clone()
        } else {
            self.prefix[k - 1].advance(&self.rates[k - 1], t - self.breaks[k - 1])
        }
    }

    /// Weighted length of the stretch between positions `a` and `b`.
    pub fn cost(&self, a: i64, b: i64) -> Cost {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.dw_at(a).until(&self.dw_at(b))
    }

    /// The piece just below and just above position `t`.
    fn around(&self, t: i64) -> (Option<usize>, Option<usize>) {
        let below = self.breaks.partition_point(|&b| b < t);
        let above = self.breaks.partition_point(|&b| b <= t);
        let below = (below >= 1 && below < self.breaks.len()).then(|| below - 1);
        let above = (above >= 1 && above < self.breaks.len()).then(|| above - 1);
        (below, above)
    }

    /// Range of positions `r` such that the stretch from `t` to `r` lies in
    /// the closed free space or inside one closed obstacle.
    pub fn reach(&self, t: i64) -> (i64, i64) {
        let free = |p: Piece| !matches!(p, Piece::Interior(_));
        let inside = |i: u32| move |p: Piece| matches!(p, Piece::Interior(j) | Piece::Boundary(j) if j == i);
        let (below, above) = self.around(t);
        let lo = match below {
            None => t,
            Some(k) => match self.pieces[k] {
                Piece::Free => self.run_start(k, &free),
                Piece::Interior(i) => self.run_start(k, &inside(i)),
                Piece::Boundary(i) => self.run_start(k, &free).min(self.run_start(k, &inside(i))),
            },
        };
        let hi = match above {
            None => t,
            Some(k) => match self.pieces[k] {
                Piece::Free => self.run_end(k, &free),
                Piece::Interior(i) => self.run_end(k, &inside(i)),
                Piece::Boundary(i) => self.run_end(k, &free).max(self.run_end(k, &inside(i))),
            },
        };
        (lo, hi)
    }

    fn run_start(&self, k: usize, accept: &dyn Fn(Piece) -> bool) -> i64 {
        let mut j = k;
        while j > 0 && accept(self.pieces[j - 1]) {
            j -= 1;
        }
        self.breaks[j]
    }

    fn run_end(&self, k: usize, accept: &dyn Fn(Piece) -> bool) -> i64 {
        let mut j = k;
        while j + 1 < self.pieces.len() && accept(self.pieces[j + 1]) {
            j += 1;
        }
        self.breaks[j + 1]
    }
}

fn other(axis: CutAxis) -> CutAxis {
    match axis {
        CutAxis::Vertical => CutAxis::Horizontal,
        CutAxis::Horizontal => CutAxis::Vertical,
    }
}

/// The line carrying the axis-parallel segment `a-b`, with the positions of
/// its endpoints along it.
fn carrier(a: Point, b: Point) -> (CutAxis, i64, i64, i64) {
    if a.x == b.x {
        (CutAxis::Vertical, a.x, a.y, b.y)
    } else {
        debug_assert_eq!(a.y, b.y, "axis-parallel segments only");
        (CutAxis::Horizontal, a.y, a.x, b.x)
    }
}

/// Weighted length of an axis-parallel segment. Pieces along an obstacle
/// boundary cost the free rate.
pub fn segment_weighted_length(a: Point, b: Point, scene: &Scene) -> Cost {
    if a == b {
        return Cost::ZERO;
    }
    let (axis, c, p, q) = carrier(a, b);
    LineProfile::new(scene, axis, c).cost(p, q)
}

/// Weighted length of a rectilinear polyline with integer corners.
pub fn polyline_weighted_length(path: &[RPoint], scene: &Scene) -> Cost {
    path.windows(2).fold(Cost::ZERO, |acc, w| {
        let a = w[0].to_point().expect("integer corner");
        let b = w[1].to_point().expect("integer corner");
        &acc + &segment_weighted_length(a, b, scene)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VPoint {
    pub point: Point,
    /// Union of [`kind`] flags.
    pub kinds: u8,
    /// Global id of the lowest-numbered vertex this point comes from.
    pub source: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedNodeSet {
    /// Sorted by location, without duplicates.
    pub points: Vec<VPoint>,
    /// Index pairs `(vertex, point)` joined by a projection segment.
    pub links: Vec<(u32, u32)>,
}

/// Obstacle vertices, their internal projections and their boundary (or
/// bounding-box) projections.
pub fn collect_v_set(scene: &Scene) -> Result<WeightedNodeSet> {
    if scene.mode != Mode::RectilinearWeighted {
        return Err(Error::WrongMode { expected: "rectilinear-weighted" });
    }
    Ok(collect_with(scene, &Visibility::new(scene)))
}

fn collect_with(scene: &Scene, vis: &Visibility) -> WeightedNodeSet {
    let verts: Vec<Point> = scene.vertices().collect();
    let mut offsets = Vec::new();
    let mut acc = 0u32;
    for poly in &scene.obstacles {
        offsets.push(acc);
        acc += poly.len() as u32;
    }
    // (point, kinds, source vertex)
    let mut raw: Vec<(Point, u8, u32)> = Vec::new();
    for (i, &v) in verts.iter().enumerate() {
        raw.push((v, kind::VERTEX, i as u32));
        for d in Dir::ALL {
            let h = vis.first_contact(&v.into(), d);
            let p = h.point.to_point().expect("rectilinear projections are integral");
            if p != v {
                let k = if h.is_bbox() { kind::TYPE1 | kind::BBOX } else { kind::TYPE1 };
                raw.push((p, k, i as u32));
            }
        }
    }
    for (p, (o, v)) in vis.internal_projections() {
        raw.push((p, kind::INTERNAL, offsets[o] + v as u32));
    }
    let mut sorted = raw.clone();
    sorted.sort_by_key(|r| (r.0, r.2));
    let mut points: Vec<VPoint> = Vec::new();
    for (p, k, src) in sorted {
        match points.last_mut() {
            Some(last) if last.point == p => last.kinds |= k,
            _ => points.push(VPoint { point: p, kinds: k, source: Some(src) }),
        }
    }
    let index_of = |p: Point| points.binary_search_by(|q| q.point.cmp(&p)).unwrap() as u32;
    let mut links: Vec<(u32, u32)> = raw
        .iter()
        .filter(|r| r.1 & kind::VERTEX == 0)
        .map(|r| (index_of(verts[r.2 as usize]), index_of(r.0)))
        .collect();
    links.sort_unstable();
    links.dedup();
    WeightedNodeSet { points, links }
}

/// Lazily filled line profiles of one scene.
#[derive(Clone, Debug, Default)]
struct Profiles {
    map: HashMap<(CutAxis, i64), LineProfile>,
}

impl Profiles {
    fn get<'a>(&'a self, scene: &Scene, axis: CutAxis, c: i64) -> Cow<'a, LineProfile> {
        match self.map.get(&(axis, c)) {
            Some(p) => Cow::Borrowed(p),
            None => Cow::Owned(LineProfile::new(scene, axis, c)),
        }
    }

    fn fill(&mut self, scene: &Scene, lines: impl IntoIterator<Item = (CutAxis, i64)>) {
        let mut want: Vec<(CutAxis, i64)> = lines.into_iter().filter(|k| !self.map.contains_key(k)).collect();
        want.sort_by_key(|&(a, c)| (a == CutAxis::Horizontal, c));
        want.dedup();
        let built: Vec<LineProfile> = want.par_iter().map(|&(a, c)| LineProfile::new(scene, a, c)).collect();
        for p in built {
            self.map.insert((p.axis, p.c), p);
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    pub graph: PathGraph,
    /// Cut-line trees over the node set, keyed by x and by y.
    pub vtree: Option<CutLineTree>,
    pub htree: Option<CutLineTree>,
}

/// Builds `G_E(V)` for a weighted scene.
pub fn build_weighted_graph(scene: &Scene, vset: &WeightedNodeSet) -> Result<WeightedGraph> {
    if scene.mode != Mode::RectilinearWeighted {
        return Err(Error::WrongMode { expected: "rectilinear-weighted" });
    }
    let vis = Visibility::new(scene);
    let mut profiles = Profiles::default();
    Ok(build_graph(scene, &vis, vset, &mut profiles))
}

fn register(g: &mut PathGraph, vis: &Visibility, id: u32) {
    let p = g.nodes[id as usize].location.clone();
    match vis.feature_at(&p) {
        Some(Feature::Edge(e)) => g.edge_lists.entry(e).or_default().push(id),
        Some(Feature::Vertex { obstacle, vertex }) => {
            let n = vis.obstacles()[obstacle as usize].len() as u32;
            for edge in [vertex, (vertex + n - 1) % n] {
                g.edge_lists.entry(EdgeId { obstacle, edge }).or_default().push(id);
            }
        }
        _ => {}
    }
}

fn build_graph(scene: &Scene, vis: &Visibility, vset: &WeightedNodeSet, profiles: &mut Profiles) -> WeightedGraph {
    let pts: Vec<Point> = vset.points.iter().map(|v| v.point).collect();
    if pts.is_empty() {
        return WeightedGraph { graph: PathGraph::empty(Variant::Weighted, 0, 0), vtree: None, htree: None };
    }
    let vtree = build_cutline_tree(&pts, CutAxis::Vertical).expect("non-empty");
    let htree = build_cutline_tree(&pts, CutAxis::Horizontal).expect("non-empty");
    profiles.fill(scene, pts.iter().flat_map(|p| [(CutAxis::Vertical, p.x), (CutAxis::Horizontal, p.y)]));
    let mut g = PathGraph::empty(Variant::Weighted, vtree.nodes.len(), htree.nodes.len());
    for v in &vset.points {
        let id = g.add_node(v.point.into(), v.kinds, None, v.source);
        register(&mut g, vis, id);
    }
    let price = |profiles: &Profiles, a: Point, b: Point| {
        let (axis, c, p, q) = carrier(a, b);
        profiles.get(scene, axis, c).cost(p, q)
    };
    for &(a, b) in &vset.links {
        if let Cost::Finite(len) = price(profiles, pts[a as usize], pts[b as usize]) {
            g.add_edge(a, b, len);
        }
    }
    for tree in [&vtree, &htree] {
        let axis = tree.axis;
        let mut owner: Vec<Vec<u32>> = vec![Vec::new(); pts.len()];
        for (u, node) in tree.nodes.iter().enumerate() {
            for &m in &node.members {
                owner[m as usize].push(u as u32);
            }
        }
        for u in 0..tree.nodes.len() as u32 {
            if !tree.is_super_top(u) {
                continue;
            }
            let order = tree.super_subtree_inorder(u);
            for &m in &tree.node(u).members {
                let p = pts[m as usize];
                let (key, along) = (axis.key(p), axis.along(p));
                let line = profiles.get(scene, other(axis), along);
                let (lo, hi) = line.reach(key);
                let mut chain: Vec<(i64, u32)> = Vec::new();
                let mut placed = false;
                for &v in &order {
                    let cut = tree.node(v).cut;
                    if !placed && cut > key {
                        chain.push((key, m));
                        placed = true;
                    }
                    if cut < lo || cut > hi {
                        continue;
                    }
                    let k = if owner[m as usize].contains(&v) { kind::TYPE2 | kind::TYPE3 } else { kind::TYPE3 };
                    let loc = axis.point(Rational::from_int(cut), Rational::from_int(along));
                    let id = g.add_node(loc, k, None, vset.points[m as usize].source);
                    register(&mut g, vis, id);
                    match axis {
                        CutAxis::Vertical => g.vcut[v as usize].push(id),
                        CutAxis::Horizontal => g.hcut[v as usize].push(id),
                    }
                    chain.push((cut, id));
                }
                if !placed {
                    chain.push((key, m));
                }
                for w in chain.windows(2) {
                    if let Cost::Finite(len) = line.cost(w[0].0, w[1].0) {
                        g.add_edge(w[0].1, w[1].1, len);
                    }
                }
            }
        }
    }
    let mut g = dedupe_and_index(g);
    let lists: Vec<Vec<u32>> = g.edge_lists.values().cloned().collect();
    for l in &lists {
        for w in l.windows(2) {
            g.add_segment(w[0], w[1]);
        }
    }
    for (tree, lists) in [(&vtree, g.vcut.clone()), (&htree, g.hcut.clone())] {
        for (u, list) in lists.iter().enumerate() {
            let line = profiles.get(scene, tree.axis, tree.nodes[u].cut);
            for w in list.windows(2) {
                let a = g.nodes[w[0] as usize].location.to_point().unwrap();
                let b = g.nodes[w[1] as usize].location.to_point().unwrap();
                if let Cost::Finite(len) = line.cost(tree.axis.along(a), tree.axis.along(b)) {
                    g.add_edge(w[0], w[1], len);
                }
            }
        }
    }
    WeightedGraph { graph: dedupe_and_index(g), vtree: Some(vtree), htree: Some(htree) }
}

/// Sorted positions on one cut-line: its obstacle-edge crossings, the
/// ends of the bounding box and its Steiner points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightLine {
    pub keys: Vec<i64>,
    /// Weighted length from each entry up to the last (highest) entry.
    pub dw: Vec<Dw>,
    /// Rate of the stretch just below each entry (`1` for the first).
    pub rate_below: Vec<Cost>,
    pub steiner: Vec<Option<u32>>,
    /// First Steiner entry at or after each entry.
    up: Vec<Option<usize>>,
    /// Last Steiner entry at or before each entry.
    down: Vec<Option<usize>>,
}

impl WeightLine {
    fn new(profile: &LineProfile, steiner: &[(i64, u32)]) -> Self {
        let mut entries: Vec<(i64, Option<u32>)> = profile.breaks.iter().map(|&b| (b, None)).collect();
        entries.extend(steiner.iter().map(|&(k, id)| (k, Some(id))));
        entries.sort_by_key(|e| (e.0, e.1.is_none()));
        entries.dedup_by_key(|e| e.0);
        let keys: Vec<i64> = entries.iter().map(|e| e.0).collect();
        let top = profile.dw_at(*keys.last().unwrap());
        let dw = keys
            .iter()
            .map(|&k| {
                let here = profile.dw_at(k);
                Dw { finite: &top.finite - &here.finite, infinite: top.infinite - here.infinite }
            })
            .collect();
        let rate_below = keys
            .iter()
            .map(|&k| match profile.around(k).0 {
                Some(i) => profile.rates[i].clone(),
                None => Cost::Finite(Rational::ONE),
            })
            .collect();
        let steiner: Vec<Option<u32>> = entries.iter().map(|e| e.1).collect();
        let mut up = vec![None; keys.len()];
        let mut next = None;
        for i in (0..keys.len()).rev() {
            if steiner[i].is_some() {
                next = Some(i);
            }
            up[i] = next;
        }
        let mut down = vec![None; keys.len()];
        let mut prev = None;
        for i in 0..keys.len() {
            if steiner[i].is_some() {
                prev = Some(i);
            }
            down[i] = prev;
        }
        WeightLine { keys, dw, rate_below, steiner, up, down }
    }

    /// Weighted length from position `t` (with successor entry `k`) up to
    /// the highest entry.
    fn dw_from(&self, t: i64, k: usize) -> Dw {
        let e = &self.dw[k];
        match &self.rate_below[k] {
            _ if self.keys[k] == t => e.clone(),
            Cost::Finite(r) => {
                Dw { finite: &e.finite + &(r * &Rational::from_int(self.keys[k] - t)), infinite: e.infinite }
            }
            Cost::Infinite => Dw { finite: e.finite.clone(), infinite: e.infinite + (self.keys[k] - t) as i128 },
        }
    }

    /// The Steiner points just above and just below position `t`, with the
    /// weighted length along the line to each. `k` is the first entry at
    /// or above `t`.
    fn neighbours(&self, t: i64, k: usize) -> Vec<(u32, Cost)> {
        let dq = self.dw_from(t, k);
        let mut out = Vec::new();
        if let Some(j) = self.up[k] {
            out.push((self.steiner[j].unwrap(), self.dw[j].until(&dq)));
            if self.keys[j] == t {
                return out;
            }
        }
        let below = if self.keys[k] == t { Some(k) } else { k.checked_sub(1) };
        if let Some(j) = below.and_then(|b| self.down[b]) {
            out.push((self.steiner[j].unwrap(), dq.until(&self.dw[j])));
        }
        out
    }
}

/// Prefix weights for every cut-line of both trees, with cascades over
/// their sorted positions.
#[derive(Clone, Debug, Default)]
pub struct CutLineWeightIndex {
    pub vertical: Vec<WeightLine>,
    pub horizontal: Vec<WeightLine>,
    vcascade: FractionalCascade,
    hcascade: FractionalCascade,
}

impl CutLineWeightIndex {
    fn lines(&self, axis: CutAxis) -> &[WeightLine] {
        match axis {
            CutAxis::Vertical => &self.vertical,
            CutAxis::Horizontal => &self.horizontal,
        }
    }

    fn cascade(&self, axis: CutAxis) -> &FractionalCascade {
        match axis {
            CutAxis::Vertical => &self.vcascade,
            CutAxis::Horizontal => &self.hcascade,
        }
    }
}

pub fn build_weight_prefix_index(scene: &Scene, wg: &WeightedGraph) -> CutLineWeightIndex {
    build_prefix(scene, wg, &Profiles::default())
}

fn build_prefix(scene: &Scene, wg: &WeightedGraph, profiles: &Profiles) -> CutLineWeightIndex {
    let (Some(vtree), Some(htree)) = (&wg.vtree, &wg.htree) else { return CutLineWeightIndex::default() };
    let g = &wg.graph;
    let per_tree = |tree: &CutLineTree, lists: &[Vec<u32>]| -> Vec<WeightLine> {
        tree.nodes
            .par_iter()
            .zip(lists.par_iter())
            .map(|(node, list)| {
                let profile = profiles.get(scene, tree.axis, node.cut);
                let steiner: Vec<(i64, u32)> = list
                    .iter()
                    .map(|&id| (tree.axis.along(g.nodes[id as usize].location.to_point().unwrap()), id))
                    .collect();
                WeightLine::new(&profile, &steiner)
            })
            .collect()
    };
    let vertical = per_tree(vtree, &g.vcut);
    let horizontal = per_tree(htree, &g.hcut);
    let keys = |ls: &[WeightLine]| ls.iter().map(|l| l.keys.clone()).collect::<Vec<_>>();
    let vcascade = FractionalCascade::build(vtree, &keys(&vertical));
    let hcascade = FractionalCascade::build(htree, &keys(&horizontal));
    CutLineWeightIndex { vertical, horizontal, vcascade, hcascade }
}

#[derive(Clone, Debug)]
pub struct WeightedIndex {
    pub scene: Scene,
    pub vis: Visibility,
    pub vset: WeightedNodeSet,
    pub wg: WeightedGraph,
    pub weights: CutLineWeightIndex,
    pub policy: ApspPolicy,
    pub search: SearchMode,
    profiles: Profiles,
    apsp: Option<Apsp>,
}

pub fn preprocess_weighted(scene: &Scene, policy: ApspPolicy) -> Result<WeightedIndex> {
    preprocess_weighted_with(scene, policy, &PreprocessOptions::default())
}

pub fn preprocess_weighted_with(scene: &Scene, policy: ApspPolicy, opts: &PreprocessOptions) -> Result<WeightedIndex> {
    if scene.mode != Mode::RectilinearWeighted {
        return Err(Error::WrongMode { expected: "rectilinear-weighted" });
    }
    validate_scene(scene)?;
    let vis = Visibility::new(scene);
    let vset = collect_with(scene, &vis);
    let mut profiles = Profiles::default();
    let wg = build_graph(scene, &vis, &vset, &mut profiles);
    let weights = build_prefix(scene, &wg, &profiles);
    let apsp = match policy {
        ApspPolicy::OnDemand => None,
        ApspPolicy::Full => {
            let needed = crate::query::full_table_bytes(wg.graph.node_count());
            if needed > opts.memory_budget {
                return Err(Error::IndexTooLarge { needed, budget: opts.memory_budget });
            }
            Some(full_apsp(&wg.graph))
        }
    };
    Ok(WeightedIndex { scene: scene.clone(), vis, vset, wg, weights, policy, search: opts.search, profiles, apsp })
}

/// `Y(q)`: the point and its four boundary projections, each with the
/// free connecting segment's length.
fn fan(vis: &Visibility, q: Point) -> Vec<(Point, Rational)> {
    let mut out = vec![(q, Rational::ZERO)];
    for d in Dir::ALL {
        let p = vis.first_contact(&q.into(), d).point.to_point().expect("integral projection");
        if out.iter().all(|(o, _)| *o != p) {
            out.push((p, Rational::from_int(l1_length(q, p) as i128)));
        }
    }
    out
}

impl WeightedIndex {
    fn profile(&self, axis: CutAxis, c: i64) -> Cow<'_, LineProfile> {
        self.profiles.get(&self.scene, axis, c)
    }

    fn segment(&self, a: Point, b: Point) -> Cost {
        if a == b {
            return Cost::ZERO;
        }
        let (axis, c, p, q) = carrier(a, b);
        self.profile(axis, c).cost(p, q)
    }

    fn admit(&self, p: Point) -> Result<()> {
        match self.vis.locate(p)? {
            Located::Interior(o) => Err(Error::PointInsideObstacle(p, o)),
            _ => Ok(()),
        }
    }

    /// Gateways of a point on both trees' relevant cut-lines.
    pub fn gateways(&self, q: Point) -> Result<GatewaySet> {
        self.admit(q)?;
        Ok(self.gateways_with(q, self.search))
    }

    pub fn gateways_with(&self, q: Point, search: SearchMode) -> GatewaySet {
        let mut v2: Vec<Gateway> = Vec::new();
        for tree in [&self.wg.vtree, &self.wg.htree].into_iter().flatten() {
            let axis = tree.axis;
            let (key, along) = (axis.key(q), axis.along(q));
            let own = self.profile(other(axis), along);
            let (lo, hi) = own.reach(key);
            let lines =
                tree.relevant_lines(&tree.projection_lines(key, &Rational::from_int(lo), &Rational::from_int(hi)));
            if lines.is_empty() {
                continue;
            }
            let path = tree.descent(key);
            let wl = self.weights.lines(axis);
            let succ = match search {
                SearchMode::Cascade => self.weights.cascade(axis).successors(&path, along),
                SearchMode::Binary => {
                    let keys: Vec<Vec<i64>> = path.iter().map(|&u| wl[u as usize].keys.clone()).collect();
                    let local: Vec<u32> = (0..path.len() as u32).collect();
                    successors_binary(&keys, &local, along)
                }
            };
            for line in lines {
                let k = path.iter().position(|&u| u == line.node).expect("projection line on the search path");
                let cut = tree.node(line.node).cut;
                let Cost::Finite(lead) = own.cost(key, cut) else { continue };
                let qh = axis.point(Rational::from_int(cut), Rational::from_int(along));
                for (id, along_cost) in wl[line.node as usize].neighbours(along, succ[k]) {
                    let Cost::Finite(rest) = along_cost else { continue };
                    let mut polyline =
                        vec![RPoint::from(q), qh.clone(), self.wg.graph.nodes[id as usize].location.clone()];
                    polyline.dedup();
                    let g = Gateway { node: id, length: &lead + &rest, polyline };
                    match v2.iter_mut().find(|o| o.node == g.node) {
                        Some(o) if g.length < o.length => *o = g,
                        Some(_) => {}
                        None => v2.push(g),
                    }
                }
            }
        }
        GatewaySet { source: q, v1: Vec::new(), v2 }
    }

    pub fn query(&self, s: Point, t: Point, want_path: bool) -> Result<QueryResult> {
        self.admit(s)?;
        self.admit(t)?;
        let ys = fan(&self.vis, s);
        let yt = fan(&self.vis, t);
        // Vertex-free candidates: L-shaped paths between fan members.
        let mut best: Option<(Rational, Vec<Point>)> = None;
        for (p, cp) in &ys {
            for (q, cq) in &yt {
                for corner in [Point::new(q.x, p.y), Point::new(p.x, q.y)] {
                    let Cost::Finite(mid) = &self.segment(*p, corner) + &self.segment(corner, *q) else { continue };
                    let total = &(cp + &mid) + cq;
                    if best.as_ref().is_none_or(|(b, _)| total < *b) {
                        best = Some((total, vec![s, *p, corner, *q, t]));
                    }
                }
            }
        }
        // Gateway routes: entry and exit costs per node, with the fan
        // member and gateway that realize them.
        let mut enter: HashMap<u32, (Rational, Vec<RPoint>)> = HashMap::new();
        let mut leave: HashMap<u32, (Rational, Vec<RPoint>)> = HashMap::new();
        for (fanned, map) in [(&ys, &mut enter), (&yt, &mut leave)] {
            let origin = fanned[0].0;
            for (p, cp) in fanned.iter() {
                for g in self.gateways_with(*p, self.search).v2 {
                    let total = cp + &g.length;
                    let mut poly = vec![RPoint::from(origin)];
                    poly.extend(g.polyline);
                    match map.get(&g.node) {
                        Some((l, _)) if *l <= total => {}
                        _ => {
                            map.insert(g.node, (total, poly));
                        }
                    }
                }
            }
        }
        let bound = best.as_ref().map(|(l, _)| l.clone());
        let costs = |m: &HashMap<u32, (Rational, Vec<RPoint>)>| m.iter().map(|(&k, v)| (k, v.0.clone())).collect();
        let via = route(&self.wg.graph, self.apsp.as_ref(), &costs(&enter), &costs(&leave), bound.as_ref(), want_path);
        let (length, mut path, kind) = match (via, best) {
            (Some((len, nodes, a, b)), _) => {
                let mut path = Vec::new();
                if want_path {
                    path = enter[&a].1.clone();
                    path.extend(nodes.iter().map(|&v| self.wg.graph.nodes[v as usize].location.clone()));
                    path.extend(leave[&b].1.iter().rev().cloned());
                }
                (len, path, PathKind::ViaGateways)
            }
            (None, Some((len, pts))) => (len, pts.into_iter().map(RPoint::from).collect(), PathKind::Trivial),
            (None, None) => return Err(Error::NoPath(s, t)),
        };
        path.dedup();
        if !want_path {
            path.clear();
        }
        Ok(QueryResult { length, path, kind })
    }

    pub fn batch_query(&self, pairs: &[(Point, Point)], want_path: bool) -> Vec<Result<QueryResult>> {
        pairs.par_iter().map(|&(s, t)| self.query(s, t, want_path)).collect()
    }
}

pub fn weighted_gateways(q: Point, index: &WeightedIndex) -> Result<GatewaySet> {
    index.gateways(q)
}

pub fn weighted_query(index: &WeightedIndex, s: Point, t: Point) -> Result<QueryResult> {
    index.query(s, t, true)
}
