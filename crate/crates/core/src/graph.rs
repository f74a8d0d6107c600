//! Steiner-point graphs over the free space of a polygonal scene.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::cutline::CutLineTree;
use crate::geom::{l1_length_r, Point, RPoint};
use crate::rational::Rational;
use crate::scene::Scene;
use crate::visibility::{Dir, EdgeId, Feature, Hit, Visibility};

/// Node provenance flags; a merged node carries the union.
pub mod kind {
    pub const VERTEX: u8 = 1;
    pub const TYPE1: u8 = 2;
    pub const TYPE2: u8 = 4;
    pub const TYPE3: u8 = 8;
    pub const INTERNAL: u8 = 16;
    pub const BBOX: u8 = 32;
}

/// Early-exit test for [`PathGraph::dijkstra`].
pub type StopAt<'a> = &'a dyn Fn(u32, &Rational) -> bool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    GOld,
    GEnhanced,
    Weighted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub location: RPoint,
    pub kinds: u8,
    /// `(obstacle, vertex)` when the node is an obstacle vertex.
    pub vertex: Option<(u32, u32)>,
    /// Global index of the vertex that defined this Steiner point.
    pub defining_vertex: Option<u32>,
}

impl GraphNode {
    pub fn is(&self, k: u8) -> bool {
        self.kinds & k != 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathGraph {
    pub variant: Variant,
    pub nodes: Vec<GraphNode>,
    pub adj: Vec<Vec<(u32, Rational)>>,
    /// Nodes on each obstacle edge, in lexicographic (x, y) order.
    pub edge_lists: BTreeMap<EdgeId, Vec<u32>>,
    /// Steiner points on each cut-line of the vertical tree, bottom to top.
    pub vcut: Vec<Vec<u32>>,
    /// Steiner points on each cut-line of the horizontal tree, left to right.
    pub hcut: Vec<Vec<u32>>,
    /// Free vertical reach `(down, up)` of nodes on vertical cut-lines.
    pub reach: Vec<Option<(Rational, Rational)>>,
}

impl PathGraph {
    pub(crate) fn empty(variant: Variant, vlines: usize, hlines: usize) -> Self {
        PathGraph {
            variant,
            nodes: Vec::new(),
            adj: Vec::new(),
            edge_lists: BTreeMap::new(),
            vcut: vec![Vec::new(); vlines],
            hcut: vec![Vec::new(); hlines],
            reach: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn add_node(&mut self, location: RPoint, kinds: u8, vertex: Option<(u32, u32)>, defining: Option<u32>) -> u32 {
        self.nodes.push(GraphNode { location, kinds, vertex, defining_vertex: defining });
        self.adj.push(Vec::new());
        self.reach.push(None);
        (self.nodes.len() - 1) as u32
    }

    /// Adds an undirected edge priced at the L1 length of its endpoints.
    pub fn add_segment(&mut self, a: u32, b: u32) {
        let len = l1_length_r(&self.nodes[a as usize].location, &self.nodes[b as usize].location);
        self.add_edge(a, b, len);
    }

    pub fn add_edge(&mut self, a: u32, b: u32, len: Rational) {
        if a == b {
            return;
        }
        self.adj[a as usize].push((b, len.clone()));
        self.adj[b as usize].push((a, len));
    }

    /// Id of the node at `p`, if any (requires an indexed graph).
    pub fn find(&self, p: &RPoint) -> Option<u32> {
        self.nodes.binary_search_by(|n| n.location.cmp(p)).ok().map(|i| i as u32)
    }

    /// Single- or multi-source Dijkstra. Ties are broken by node id so
    /// predecessor arrays are deterministic. Stops right after settling a
    /// node for which `stop(node, dist)` holds.
    pub fn dijkstra(&self, sources: &[(u32, Rational)], stop: Option<StopAt>) -> ShortestPaths {
        let n = self.nodes.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut pred: Vec<u32> = vec![u32::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for (s, d) in sources {
            let better = match &dist[*s as usize] {
                None => true,
                Some(cur) => d < cur,
            };
            if better {
                dist[*s as usize] = Some(d.clone());
                heap.push(Reverse((d.clone(), *s)));
            }
        }
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u as usize] || dist[u as usize].as_ref() != Some(&d) {
                continue;
            }
            done[u as usize] = true;
            if stop.is_some_and(|f| f(u, &d)) {
                break;
            }
            for (v, w) in &self.adj[u as usize] {
                if done[*v as usize] {
                    continue;
                }
                let nd = &d + w;
                let take = match &dist[*v as usize] {
                    None => true,
                    Some(cur) => nd < *cur || (nd == *cur && u < pred[*v as usize]),
                };
                if take {
                    dist[*v as usize] = Some(nd.clone());
                    pred[*v as usize] = u;
                    heap.push(Reverse((nd, *v)));
                }
            }
        }
        ShortestPaths { dist, pred, settled: done }
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub dist: Vec<Option<Rational>>,
    pub pred: Vec<u32>,
    pub settled: Vec<bool>,
}

impl ShortestPaths {
    /// Node sequence from the tree root to `v`.
    pub fn path_to(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut cur = v;
        while self.pred[cur as usize] != u32::MAX {
            cur = self.pred[cur as usize];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// Merges nodes at the same location, renumbers them in (x, y) order,
/// drops self-loops and parallel edges (keeping the shorter), and sorts all
/// per-edge and per-cut-line lists.
pub fn dedupe_and_index(g: PathGraph) -> PathGraph {
    let mut order: Vec<u32> = (0..g.nodes.len() as u32).collect();
    order.sort_by(|&a, &b| g.nodes[a as usize].location.cmp(&g.nodes[b as usize].location).then(a.cmp(&b)));
    let mut remap = vec![0u32; g.nodes.len()];
    let mut nodes: Vec<GraphNode> = Vec::new();
    let mut reach: Vec<Option<(Rational, Rational)>> = Vec::new();
    for &i in &order {
        let n = &g.nodes[i as usize];
        let merge = nodes.last().is_some_and(|last| last.location == n.location);
        if merge {
            let last = nodes.last_mut().unwrap();
            last.kinds |= n.kinds;
            last.vertex = last.vertex.or(n.vertex);
            last.defining_vertex = match (last.defining_vertex, n.defining_vertex) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let r = reach.last_mut().unwrap();
            if r.is_none() {
                *r = g.reach[i as usize].clone();
            }
        } else {
            nodes.push(n.clone());
            reach.push(g.reach[i as usize].clone());
        }
        remap[i as usize] = (nodes.len() - 1) as u32;
    }
    let mut adj: Vec<Vec<(u32, Rational)>> = vec![Vec::new(); nodes.len()];
    for (u, list) in g.adj.iter().enumerate() {
        let nu = remap[u];
        for (v, w) in list {
            let nv = remap[*v as usize];
            if nu != nv {
                adj[nu as usize].push((nv, w.clone()));
            }
        }
    }
    for list in &mut adj {
        list.sort();
        list.dedup_by(|later, earlier| later.0 == earlier.0);
    }
    let fix = |l: &Vec<u32>| {
        let mut v: Vec<u32> = l.iter().map(|&i| remap[i as usize]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    PathGraph {
        variant: g.variant,
        nodes,
        adj,
        edge_lists: g.edge_lists.iter().map(|(k, l)| (*k, fix(l))).collect(),
        vcut: g.vcut.iter().map(fix).collect(),
        hcut: g.hcut.iter().map(fix).collect(),
        reach,
    }
}

/// Horizontal free reach of every scene vertex: `(left, right)` x-limits.
fn horizontal_reach(vis: &Visibility, verts: &[Point]) -> Vec<(Hit, Hit)> {
    verts
        .iter()
        .map(|&v| {
            let p: RPoint = v.into();
            (vis.free_extent(&p, Dir::Left), vis.free_extent(&p, Dir::Right))
        })
        .collect()
}

fn sees_line(reach: &(Hit, Hit), c: i64) -> bool {
    let c = Rational::from_int(c);
    reach.0.point.x <= c && c <= reach.1.point.x
}

struct Common {
    vids: Vec<u32>,
    verts: Vec<Point>,
    reach: Vec<(Hit, Hit)>,
}

/// Obstacle vertices, their four projections and the vertex-projection
/// edges. Boundary hits are registered on their host edges.
fn add_vertices_and_projections(g: &mut PathGraph, scene: &Scene, vis: &Visibility) -> Common {
    let mut verts = Vec::new();
    let mut vids = Vec::new();
    for (oi, poly) in scene.obstacles.iter().enumerate() {
        for (vi, &v) in poly.vertices.iter().enumerate() {
            let gid = verts.len() as u32;
            verts.push(v);
            vids.push(g.add_node(v.into(), kind::VERTEX, Some((oi as u32, vi as u32)), Some(gid)));
            let n = poly.len();
            for ei in [vi, (vi + n - 1) % n] {
                g.edge_lists
                    .entry(EdgeId { obstacle: oi as u32, edge: ei as u32 })
                    .or_default()
                    .push(*vids.last().unwrap());
            }
        }
    }
    for (i, &v) in verts.iter().enumerate() {
        let p: RPoint = v.into();
        for d in Dir::ALL {
            let h = vis.first_contact(&p, d);
            if h.point == p {
                continue;
            }
            let k = if h.is_bbox() { kind::TYPE1 | kind::BBOX } else { kind::TYPE1 };
            let id = g.add_node(h.point.clone(), k, None, Some(i as u32));
            register(g, &h, id);
            g.add_segment(vids[i], id);
        }
    }
    let reach = horizontal_reach(vis, &verts);
    Common { vids, verts, reach }
}

fn register(g: &mut PathGraph, h: &Hit, id: u32) {
    if let Feature::Edge(e) = h.feature {
        g.edge_lists.entry(e).or_default().push(id);
    }
}

/// Adds the Steiner point of vertex `i` on the vertical line `x = c` of
/// tree node `u`, plus its host-edge registration.
fn add_line_point(g: &mut PathGraph, c: &Common, i: usize, u: u32, cut: i64, kinds: u8) -> u32 {
    let v = c.verts[i];
    let loc = RPoint::new(Rational::from_int(cut), Rational::from_int(v.y));
    let id = g.add_node(loc.clone(), kinds, None, Some(i as u32));
    for h in [&c.reach[i].0, &c.reach[i].1] {
        if h.point == loc {
            register(g, h, id);
        }
    }
    g.vcut[u as usize].push(id);
    id
}

/// Connects consecutive nodes on each obstacle edge and consecutive
/// mutually visible Steiner points on each vertical cut-line.
fn finish(g: PathGraph, vis: &Visibility) -> PathGraph {
    let mut g = dedupe_and_index(g);
    let lists: Vec<Vec<u32>> = g.edge_lists.values().cloned().collect();
    for l in &lists {
        for w in l.windows(2) {
            g.add_segment(w[0], w[1]);
        }
    }
    let vcut = g.vcut.clone();
    for line in &vcut {
        for &id in line {
            if g.reach[id as usize].is_none() {
                let p = g.nodes[id as usize].location.clone();
                let down = vis.free_extent(&p, Dir::Down).point.y;
                let up = vis.free_extent(&p, Dir::Up).point.y;
                g.reach[id as usize] = Some((down, up));
            }
        }
        for w in line.windows(2) {
            let (a, b) = (w[0] as usize, w[1] as usize);
            let up = &g.reach[a].as_ref().unwrap().1;
            if *up >= g.nodes[b].location.y {
                g.add_segment(w[0], w[1]);
            }
        }
    }
    dedupe_and_index(g)
}

/// The graph `G_old`: vertices, type-1 and type-2 Steiner points.
pub fn build_g_old(scene: &Scene, tree: &CutLineTree, vis: &Visibility) -> PathGraph {
    let mut g = PathGraph::empty(Variant::GOld, tree.nodes.len(), 0);
    let c = add_vertices_and_projections(&mut g, scene, vis);
    for (u, node) in tree.nodes.iter().enumerate() {
        for &m in &node.members {
            let i = m as usize;
            if sees_line(&c.reach[i], node.cut) {
                let id = add_line_point(&mut g, &c, i, u as u32, node.cut, kind::TYPE2);
                g.add_segment(c.vids[i], id);
            }
        }
    }
    finish(g, vis)
}

/// The enhanced graph `G_E`: `G_old`'s nodes plus type-3 Steiner points,
/// chained left to right per defining vertex and super-level.
pub fn build_g_e(scene: &Scene, tree: &CutLineTree, vis: &Visibility) -> PathGraph {
    let mut g = PathGraph::empty(Variant::GEnhanced, tree.nodes.len(), 0);
    let c = add_vertices_and_projections(&mut g, scene, vis);
    // Tree nodes owning each vertex, to tag type-2 points.
    let mut owner: Vec<Vec<u32>> = vec![Vec::new(); c.verts.len()];
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
            let i = m as usize;
            let px = c.verts[i].x;
            let mut chain: Vec<u32> = Vec::new();
            let mut placed = false;
            for &v in &order {
                let cut = tree.node(v).cut;
                if !placed && cut > px {
                    chain.push(c.vids[i]);
                    placed = true;
                }
                if !sees_line(&c.reach[i], cut) {
                    continue;
                }
                let k = if owner[i].contains(&v) { kind::TYPE2 | kind::TYPE3 } else { kind::TYPE3 };
                let id = add_line_point(&mut g, &c, i, v, cut, k);
                chain.push(id);
            }
            if !placed {
                chain.push(c.vids[i]);
            }
            for w in chain.windows(2) {
                g.add_segment(w[0], w[1]);
            }
        }
    }
    finish(g, vis)
}
