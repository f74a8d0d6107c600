//! Preprocessing and two-point shortest path queries on polygonal scenes.

use std::cell::RefCell;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{FractionalCascade, SearchMode};
use crate::cutline::{build_cutline_tree, CutAxis, CutLineTree};
use crate::error::{Error, Result};
use crate::gateway::{compute_gateways, detect_trivial_path, Gateway, GatewaySet, GraphMode};
use crate::geom::{cross_r, l1_length_r, Point, RPoint};
use crate::graph::{build_g_e, build_g_old, PathGraph};
use crate::rational::Rational;
use crate::scene::{validate_scene, validate_scene_relaxed, Mode, Scene};
use crate::visibility::{Dir, Located, Visibility};

/// When all-pairs shortest paths are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ApspPolicy {
    /// Every node's shortest path tree at preprocessing time.
    Full,
    /// A multi-source search from the source's gateways per query.
    #[default]
    OnDemand,
}

impl ApspPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ApspPolicy::Full => "FULL",
            ApspPolicy::OnDemand => "ON_DEMAND",
        }
    }
}

impl std::str::FromStr for ApspPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "FULL" => Ok(ApspPolicy::Full),
            "ON_DEMAND" => Ok(ApspPolicy::OnDemand),
            _ => Err(format!("unknown APSP policy {s:?}")),
        }
    }
}

pub const DEFAULT_MEMORY_BUDGET: u128 = 2 << 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessOptions {
    /// Upper bound in bytes on the FULL distance and predecessor tables.
    pub memory_budget: u128,
    pub search: SearchMode,
    /// Skips the general-position check, for rectilinear scenes.
    pub relaxed: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { memory_budget: DEFAULT_MEMORY_BUDGET, search: SearchMode::Cascade, relaxed: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PathKind {
    Trivial,
    ViaGateways,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub length: Rational,
    pub path: Vec<RPoint>,
    pub kind: PathKind,
}

/// Distances and predecessors from every node, row-major.
#[derive(Clone, Debug)]
pub(crate) struct Apsp {
    n: usize,
    dist: Vec<Option<Rational>>,
    pred: Vec<u32>,
}

impl Apsp {
    pub(crate) fn dist(&self, a: u32, b: u32) -> Option<&Rational> {
        self.dist[a as usize * self.n + b as usize].as_ref()
    }

    pub(crate) fn path(&self, a: u32, b: u32) -> Option<Vec<u32>> {
        self.dist(a, b)?;
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = self.pred[a as usize * self.n + cur as usize];
            out.push(cur);
        }
        out.reverse();
        Some(out)
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessedIndex {
    pub scene: Scene,
    pub mode: GraphMode,
    pub policy: ApspPolicy,
    pub search: SearchMode,
    pub vis: Visibility,
    /// Vertical cut-line tree; absent for a scene without obstacles.
    pub tree: Option<CutLineTree>,
    pub graph: PathGraph,
    pub cascade: FractionalCascade,
    /// Steiner point y-coordinates per cut-line, bottom to top.
    pub catalogs: Vec<Vec<i64>>,
    apsp: Option<Apsp>,
}

/// Bytes needed by the FULL tables for `nodes` graph nodes.
pub fn full_table_bytes(nodes: usize) -> u128 {
    let per = std::mem::size_of::<Option<Rational>>() + std::mem::size_of::<u32>();
    (nodes as u128) * (nodes as u128) * per as u128
}

/// Sorted y-keys of the Steiner points on each vertical cut-line.
pub fn cut_catalogs(graph: &PathGraph) -> Vec<Vec<i64>> {
    graph
        .vcut
        .iter()
        .map(|l| {
            l.iter()
                .map(|&id| graph.nodes[id as usize].location.y.to_i64().expect("Steiner points sit at vertex heights"))
                .collect()
        })
        .collect()
}

pub fn build_cascade(tree: &CutLineTree, graph: &PathGraph) -> FractionalCascade {
    FractionalCascade::build(tree, &cut_catalogs(graph))
}

pub fn preprocess(scene: &Scene, mode: GraphMode, policy: ApspPolicy) -> Result<PreprocessedIndex> {
    preprocess_with(scene, mode, policy, &PreprocessOptions::default())
}

pub fn preprocess_with(
    scene: &Scene,
    mode: GraphMode,
    policy: ApspPolicy,
    opts: &PreprocessOptions,
) -> Result<PreprocessedIndex> {
    let scene = if opts.relaxed {
        let s = scene.as_unweighted();
        validate_scene_relaxed(&s)?;
        s
    } else {
        if scene.mode != Mode::Polygonal {
            return Err(Error::WrongMode { expected: "polygonal" });
        }
        validate_scene(scene)?;
        scene.clone()
    };
    let vis = Visibility::new(&scene);
    let points: Vec<Point> = scene.vertices().collect();
    let (tree, graph) = if points.is_empty() {
        (None, empty_graph())
    } else {
        let tree = build_cutline_tree(&points, CutAxis::Vertical)?;
        let graph = match mode {
            GraphMode::GOld => build_g_old(&scene, &tree, &vis),
            GraphMode::GEnhanced => build_g_e(&scene, &tree, &vis),
        };
        (Some(tree), graph)
    };
    let catalogs = cut_catalogs(&graph);
    let cascade = tree.as_ref().map(|t| FractionalCascade::build(t, &catalogs)).unwrap_or_default();
    let apsp = match policy {
        ApspPolicy::OnDemand => None,
        ApspPolicy::Full => {
            let needed = full_table_bytes(graph.node_count());
            if needed > opts.memory_budget {
                return Err(Error::IndexTooLarge { needed, budget: opts.memory_budget });
            }
            Some(full_apsp(&graph))
        }
    };
    Ok(PreprocessedIndex { scene, mode, policy, search: opts.search, vis, tree, graph, cascade, catalogs, apsp })
}

fn empty_graph() -> PathGraph {
    PathGraph {
        variant: crate::graph::Variant::GOld,
        nodes: Vec::new(),
        adj: Vec::new(),
        edge_lists: Default::default(),
        vcut: Vec::new(),
        hcut: Vec::new(),
        reach: Vec::new(),
    }
}

pub(crate) fn full_apsp(graph: &PathGraph) -> Apsp {
    let n = graph.node_count();
    let rows: Vec<(Vec<Option<Rational>>, Vec<u32>)> = (0..n as u32)
        .into_par_iter()
        .map(|s| {
            let sp = graph.dijkstra(&[(s, Rational::ZERO)], None);
            (sp.dist, sp.pred)
        })
        .collect();
    let mut dist = Vec::with_capacity(n * n);
    let mut pred = Vec::with_capacity(n * n);
    for (d, p) in rows {
        dist.extend(d);
        pred.extend(p);
    }
    Apsp { n, dist, pred }
}

/// Cheapest route through `graph` entering at a node of `enter` and
/// leaving at a node of `leave`, each with its extra cost. Gives the total,
/// the node sequence when `want_path`, and the entry and exit nodes. Routes
/// not shorter than `bound` are not reported.
pub(crate) fn route(
    graph: &PathGraph,
    apsp: Option<&Apsp>,
    enter: &HashMap<u32, Rational>,
    leave: &HashMap<u32, Rational>,
    bound: Option<&Rational>,
    want_path: bool,
) -> Option<(Rational, Vec<u32>, u32, u32)> {
    let mut sources: Vec<(u32, Rational)> = enter.iter().map(|(&n, l)| (n, l.clone())).collect();
    sources.sort();
    let found = match apsp {
        Some(table) => {
            let mut targets: Vec<(u32, Rational)> = leave.iter().map(|(&n, l)| (n, l.clone())).collect();
            targets.sort();
            let mut best: Option<(Rational, u32, u32)> = None;
            for (a, la) in &sources {
                for (b, lb) in &targets {
                    let Some(d) = table.dist(*a, *b) else { continue };
                    let total = &(la + d) + lb;
                    if best.as_ref().is_none_or(|(bl, _, _)| total < *bl) {
                        best = Some((total, *a, *b));
                    }
                }
            }
            let (len, a, b) = best?;
            let nodes = if want_path { table.path(a, b)? } else { Vec::new() };
            (len, nodes, a, b)
        }
        None => {
            let best: RefCell<Option<(Rational, u32)>> = RefCell::new(None);
            let stop = |u: u32, d: &Rational| {
                let mut b = best.borrow_mut();
                if let Some(l) = leave.get(&u) {
                    let total = d + l;
                    if b.as_ref().is_none_or(|(bl, _)| total < *bl) {
                        *b = Some((total, u));
                    }
                }
                let limit = b.as_ref().map(|(l, _)| l).into_iter().chain(bound).min();
                limit.is_some_and(|l| d >= l)
            };
            let sp = graph.dijkstra(&sources, Some(&stop));
            let (len, b) = best.into_inner()?;
            let nodes = sp.path_to(b);
            let a = nodes[0];
            (len, if want_path { nodes } else { Vec::new() }, a, b)
        }
    };
    match bound {
        Some(l) if found.0 >= *l => None,
        _ => Some(found),
    }
}

/// Best gateway per node.
fn by_node(set: &GatewaySet) -> HashMap<u32, &Gateway> {
    let mut m: HashMap<u32, &Gateway> = HashMap::new();
    for g in set.entries() {
        m.entry(g.node)
            .and_modify(|cur| {
                if g.length < cur.length {
                    *cur = g
                }
            })
            .or_insert(g);
    }
    m
}

impl PreprocessedIndex {
    /// Full-table distance between two graph nodes, when materialized.
    pub fn table_distance(&self, a: u32, b: u32) -> Option<Option<&Rational>> {
        self.apsp.as_ref().map(|t| t.dist(a, b))
    }

    /// Graph nodes from `a` to `b` along the stored shortest path tree.
    pub fn table_path(&self, a: u32, b: u32) -> Option<Vec<u32>> {
        self.apsp.as_ref()?.path(a, b)
    }

    pub fn gateways(&self, q: Point) -> Result<GatewaySet> {
        self.admit(q)?;
        Ok(compute_gateways(q, self, self.search))
    }

    fn admit(&self, p: Point) -> Result<()> {
        match self.vis.locate(p)? {
            Located::Interior(o) => Err(Error::PointInsideObstacle(p, o)),
            _ => Ok(()),
        }
    }

    pub fn query(&self, s: Point, t: Point, want_path: bool) -> Result<QueryResult> {
        self.admit(s)?;
        self.admit(t)?;
        let trivial = detect_trivial_path(s, t, &self.vis);
        let bound = trivial.as_ref().map(|(l, _)| l.clone());
        let via = if s == t { None } else { self.via_gateways(s, t, bound.as_ref(), want_path) };
        let (length, path, kind) = match (trivial, via) {
            (Some((tl, _)), Some((gl, gp))) if gl < tl => (gl, gp, PathKind::ViaGateways),
            (Some((tl, tp)), _) => (tl, tp, PathKind::Trivial),
            (None, Some((gl, gp))) => (gl, gp, PathKind::ViaGateways),
            (None, None) => return Err(Error::NoPath(s, t)),
        };
        let path = if want_path { fewer_bends(&path, &self.vis) } else { Vec::new() };
        Ok(QueryResult { length, path, kind })
    }

    /// Shortest route through the gateway graph, if shorter than `bound`.
    fn via_gateways(
        &self,
        s: Point,
        t: Point,
        bound: Option<&Rational>,
        want_path: bool,
    ) -> Option<(Rational, Vec<RPoint>)> {
        let gs = compute_gateways(s, self, self.search);
        let gt = compute_gateways(t, self, self.search);
        let (ms, mt) = (by_node(&gs), by_node(&gt));
        if ms.is_empty() || mt.is_empty() {
            return None;
        }
        let enter: HashMap<u32, Rational> = ms.iter().map(|(&n, g)| (n, g.length.clone())).collect();
        let leave: HashMap<u32, Rational> = mt.iter().map(|(&n, g)| (n, g.length.clone())).collect();
        let (length, nodes, a, b) = route(&self.graph, self.apsp.as_ref(), &enter, &leave, bound, want_path)?;
        if !want_path {
            return Some((length, Vec::new()));
        }
        let mut path: Vec<RPoint> = ms[&a].polyline.clone();
        path.extend(nodes.iter().map(|&v| self.graph.nodes[v as usize].location.clone()));
        path.extend(mt[&b].polyline.iter().rev().cloned());
        path.dedup();
        debug_assert_eq!(polyline_length(&path), length);
        Some((length, path))
    }

    /// Queries every pair, possibly in parallel; results keep input order.
    pub fn batch_query(&self, pairs: &[(Point, Point)], want_path: bool) -> Vec<Result<QueryResult>> {
        pairs.par_iter().map(|&(s, t)| self.query(s, t, want_path)).collect()
    }
}

/// Longest stretch of path points considered for one shortcut.
const SHORTCUT_WINDOW: usize = 64;

type Heading = (i8, i8);

fn heading(a: &RPoint, b: &RPoint) -> Heading {
    let sign = |p: &Rational, q: &Rational| q.cmp(p) as i8;
    (sign(&a.x, &b.x), sign(&a.y, &b.y))
}

fn axis_dir(h: Heading) -> Option<Dir> {
    match h {
        (1, 0) => Some(Dir::Right),
        (-1, 0) => Some(Dir::Left),
        (0, 1) => Some(Dir::Up),
        (0, -1) => Some(Dir::Down),
        _ => None,
    }
}

fn leg_is_free(a: &RPoint, b: &RPoint, vis: &Visibility) -> bool {
    if a == b {
        return true;
    }
    let Some(d) = axis_dir(heading(a, b)) else { return false };
    let fixed = if d.is_horizontal() { &a.y } else { &a.x };
    if !fixed.is_integer() {
        return false;
    }
    let reach = vis.free_extent(a, d).point;
    l1_length_r(a, &reach) >= l1_length_r(a, b)
}

/// Rewrites a free polyline into one of the same length with as few bends
/// as possible, replacing xy-monotone stretches by free L-shaped or straight
/// pieces.
pub fn fewer_bends(path: &[RPoint], vis: &Visibility) -> Vec<RPoint> {
    if path.len() < 3 {
        return path.to_vec();
    }
    let mut prefix = vec![Rational::ZERO];
    for w in path.windows(2) {
        let next = prefix.last().unwrap().clone() + l1_length_r(&w[0], &w[1]);
        prefix.push(next);
    }
    // best[j][heading] = (bends, points, previous index, previous heading, inserted points)
    type State = (u32, u32, usize, Option<Heading>, Vec<RPoint>);
    let mut best: Vec<HashMap<Option<Heading>, State>> = vec![HashMap::new(); path.len()];
    best[0].insert(None, (0, 1, 0, None, Vec::new()));
    for i in 0..path.len() - 1 {
        let mut states: Vec<(Option<Heading>, u32, u32)> = best[i].iter().map(|(&h, s)| (h, s.0, s.1)).collect();
        states.sort();
        let mut moves: Vec<(usize, Vec<RPoint>)> = vec![(i + 1, vec![path[i + 1].clone()])];
        for j in i + 1..path.len().min(i + 1 + SHORTCUT_WINDOW) {
            if l1_length_r(&path[i], &path[j]) != prefix[j].clone() - prefix[i].clone() {
                break;
            }
            let (a, b) = (&path[i], &path[j]);
            let corners = [RPoint::new(b.x.clone(), a.y.clone()), RPoint::new(a.x.clone(), b.y.clone())];
            for (k, c) in corners.iter().enumerate() {
                if (k == 1 && corners[0] == corners[1]) || !leg_is_free(a, c, vis) || !leg_is_free(c, b, vis) {
                    continue;
                }
                let legs = if c == a || c == b { vec![b.clone()] } else { vec![c.clone(), b.clone()] };
                moves.push((j, legs));
            }
        }
        for (prev_heading, bends, points) in states {
            for (j, legs) in &moves {
                let mut h = prev_heading;
                let mut b = bends;
                let mut from = &path[i];
                for p in legs {
                    let next = heading(from, p);
                    b += h.is_some_and(|h| h != next) as u32;
                    h = Some(next);
                    from = p;
                }
                let cand = (b, points + legs.len() as u32);
                let slot = best[*j].get(&h);
                if slot.is_none_or(|s| cand < (s.0, s.1)) {
                    best[*j].insert(h, (cand.0, cand.1, i, prev_heading, legs.clone()));
                }
            }
        }
    }
    let last = path.len() - 1;
    let mut key = best[last].iter().min_by_key(|(h, s)| (s.0, s.1, **h)).map(|(h, _)| *h).unwrap();
    let mut at = last;
    let mut pieces = Vec::new();
    while at > 0 {
        let (_, _, prev, prev_heading, legs) = &best[at][&key];
        pieces.push(legs.clone());
        (at, key) = (*prev, *prev_heading);
    }
    let mut out = vec![path[0].clone()];
    for p in pieces.into_iter().rev().flatten() {
        if let [.., a, b] = out.as_slice() {
            if heading(a, b) == heading(b, &p) && cross_r(a, b, &p).is_zero() {
                out.pop();
            }
        }
        out.push(p);
    }
    debug_assert_eq!(polyline_length(&out), polyline_length(path));
    out
}

pub fn polyline_length(p: &[RPoint]) -> Rational {
    p.windows(2).fold(Rational::ZERO, |acc, w| acc + l1_length_r(&w[0], &w[1]))
}

pub fn query(index: &PreprocessedIndex, s: Point, t: Point, want_path: bool) -> Result<QueryResult> {
    index.query(s, t, want_path)
}

pub fn batch_query(index: &PreprocessedIndex, pairs: &[(Point, Point)]) -> Vec<Result<QueryResult>> {
    index.batch_query(pairs, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures::scene_a;

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    fn bend_count(path: &[RPoint]) -> usize {
        path.windows(3).filter(|w| !cross_r(&w[0], &w[1], &w[2]).is_zero()).count()
    }

    #[test]
    fn fewer_bends_keeps_length_and_freedom() {
        use crate::geom::segment_avoids_interior;
        use crate::scene::{generate_scene, sample_free_points, Mode};

        let vis = Visibility::new(&scene_a());
        let detour: Vec<RPoint> =
            [(0, 3), (1, 3), (1, 1), (2, 1), (5, 2), (5, 3), (6, 3)].map(|(x, y)| p(x, y).into()).to_vec();
        let clean = fewer_bends(&detour, &vis);
        assert!(bend_count(&clean) < bend_count(&detour));
        assert_eq!(clean, [(0, 3), (0, 1), (6, 1), (6, 3)].map(|(x, y)| RPoint::from(p(x, y))).to_vec());

        for seed in 0..6 {
            let scene = generate_scene(40, 4, Mode::Polygonal, seed).unwrap();
            let idx = preprocess(&scene, GraphMode::GOld, ApspPolicy::OnDemand).unwrap();
            for c in sample_free_points(&scene, 30, seed).chunks(2) {
                let r = idx.query(c[0], c[1], true).unwrap();
                assert_eq!(fewer_bends(&r.path, &idx.vis), r.path);
                assert_eq!(polyline_length(&r.path), r.length);
                assert!(r
                    .path
                    .windows(2)
                    .all(|w| scene.obstacles.iter().all(|o| segment_avoids_interior(&w[0], &w[1], o))));
            }
        }
    }

    #[test]
    fn scene_a_queries() {
        for mode in [GraphMode::GOld, GraphMode::GEnhanced] {
            for policy in [ApspPolicy::Full, ApspPolicy::OnDemand] {
                let idx = preprocess(&scene_a(), mode, policy).unwrap();
                let r = idx.query(p(0, 3), p(6, 3), true).unwrap();
                assert_eq!(r.length, Rational::from_int(10));
                assert_eq!(r.kind, PathKind::ViaGateways);
                assert_eq!(polyline_length(&r.path), r.length);
                assert_eq!(r.path.first(), Some(&p(0, 3).into()));
                assert_eq!(r.path.last(), Some(&p(6, 3).into()));
                let r = idx.query(p(0, 0), p(6, 6), true).unwrap();
                assert_eq!((r.length, r.kind), (Rational::from_int(12), PathKind::Trivial));
                let r = idx.query(p(0, 0), p(0, 0), true).unwrap();
                assert_eq!((r.length, r.path.len()), (Rational::ZERO, 1));
                assert_eq!(idx.query(p(3, 3), p(0, 0), false), Err(Error::PointInsideObstacle(p(3, 3), 0)));
                assert!(matches!(idx.query(p(100, 0), p(0, 0), false), Err(Error::OutOfBbox(_))));
            }
        }
    }

    #[test]
    fn full_table_on_scene_a() {
        let idx = preprocess(&scene_a(), GraphMode::GEnhanced, ApspPolicy::Full).unwrap();
        let a = idx.graph.find(&p(2, 1).into()).unwrap();
        let b = idx.graph.find(&p(5, 2).into()).unwrap();
        assert_eq!(idx.table_distance(a, b), Some(Some(&Rational::from_int(4))));
        for v in 0..idx.graph.node_count() as u32 {
            assert_eq!(idx.table_distance(v, v), Some(Some(&Rational::ZERO)));
        }
        let path = idx.table_path(a, b).unwrap();
        let len = path.windows(2).fold(Rational::ZERO, |acc, w| {
            acc + l1_length_r(&idx.graph.nodes[w[0] as usize].location, &idx.graph.nodes[w[1] as usize].location)
        });
        assert_eq!(len, Rational::from_int(4));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = PreprocessOptions { memory_budget: 1000, ..Default::default() };
        let r = preprocess_with(&scene_a(), GraphMode::GEnhanced, ApspPolicy::Full, &opts);
        assert!(matches!(r, Err(Error::IndexTooLarge { .. })));
        // 5000 vertices give at least 25000 nodes.
        assert!(full_table_bytes(25_000) > DEFAULT_MEMORY_BUDGET);
    }

    #[test]
    fn batch_isolates_errors() {
        let idx = preprocess(&scene_a(), GraphMode::GEnhanced, ApspPolicy::OnDemand).unwrap();
        assert!(idx.batch_query(&[], true).is_empty());
        let out = idx.batch_query(&[(p(0, 3), p(6, 3)), (p(6, 3), p(0, 3)), (p(3, 3), p(0, 0))], true);
        assert_eq!(out[0].as_ref().unwrap().length, out[1].as_ref().unwrap().length);
        assert!(out[2].is_err());
    }
}
