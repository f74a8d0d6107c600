//! Gateway sets of query points and trivial-path detection.

use crate::cascade::{successors_binary, SearchMode};
use crate::cutline::ProjectionLine;
use crate::geom::{l1_length_r, Point, RPoint};
use crate::query::PreprocessedIndex;
use crate::rational::Rational;
use crate::visibility::{Dir, EdgeId, Feature, Hit, Visibility};

/// Which Steiner graph an index was built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphMode {
    GOld,
    GEnhanced,
}

impl GraphMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphMode::GOld => "G_OLD",
            GraphMode::GEnhanced => "G_ENHANCED",
        }
    }
}

impl std::str::FromStr for GraphMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "G_OLD" | "OLD" => Ok(GraphMode::GOld),
            "G_ENHANCED" | "G_E" | "ENHANCED" => Ok(GraphMode::GEnhanced),
            _ => Err(format!("unknown graph mode {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gateway {
    pub node: u32,
    pub length: Rational,
    /// From the query point to the node, at most three segments.
    pub polyline: Vec<RPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GatewaySet {
    pub source: Point,
    /// Nodes next to the four boundary projections of the source.
    pub v1: Vec<Gateway>,
    /// Steiner points above and below the source's horizontal projections
    /// onto its (relevant) projection cut-lines.
    pub v2: Vec<Gateway>,
}

impl GatewaySet {
    pub fn entries(&self) -> impl Iterator<Item = &Gateway> {
        self.v1.iter().chain(self.v2.iter())
    }

    pub fn len(&self) -> usize {
        self.v1.len() + self.v2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn gateway(path: Vec<RPoint>, node: u32) -> Gateway {
    let mut polyline = path;
    polyline.dedup();
    let length = polyline.windows(2).fold(Rational::ZERO, |acc, w| acc + l1_length_r(&w[0], &w[1]));
    Gateway { node, length, polyline }
}

fn push_unique(out: &mut Vec<Gateway>, g: Gateway) {
    match out.iter_mut().find(|o| o.node == g.node) {
        Some(o) if g.length < o.length => *o = g,
        Some(_) => {}
        None => out.push(g),
    }
}

/// Gateways of `q` in `index`'s graph; `q` must be in free space.
pub fn compute_gateways(q: Point, index: &PreprocessedIndex, search: SearchMode) -> GatewaySet {
    let rq: RPoint = q.into();
    GatewaySet { source: q, v1: v1_gateways(&rq, index), v2: v2_gateways(q, index, search) }
}

fn v1_gateways(q: &RPoint, index: &PreprocessedIndex) -> Vec<Gateway> {
    let g = &index.graph;
    let mut out = Vec::new();
    for d in Dir::ALL {
        let h = index.vis.first_contact(q, d);
        if h.is_bbox() {
            continue;
        }
        if let Some(id) = g.find(&h.point) {
            push_unique(&mut out, gateway(vec![q.clone(), h.point.clone(), h.point], id));
            continue;
        }
        let Feature::Edge(e) = h.feature else { continue };
        let Some(list) = g.edge_lists.get(&e) else { continue };
        let pos = list.partition_point(|&id| g.nodes[id as usize].location < h.point);
        let around = [pos.checked_sub(1), (pos < list.len()).then_some(pos)];
        for id in around.into_iter().flatten().map(|i| list[i]) {
            let at = g.nodes[id as usize].location.clone();
            push_unique(&mut out, gateway(vec![q.clone(), h.point.clone(), at], id));
        }
    }
    out
}

/// Projection cut-lines of `q` used for V² in the index's graph mode.
pub fn gateway_lines(q: Point, index: &PreprocessedIndex) -> Vec<ProjectionLine> {
    let Some(tree) = &index.tree else { return Vec::new() };
    match index.mode {
        GraphMode::GOld => tree.projection_cutlines(q, &index.vis),
        GraphMode::GEnhanced => tree.relevant_projection_cutlines(q, &index.vis),
    }
}

fn v2_gateways(q: Point, index: &PreprocessedIndex, search: SearchMode) -> Vec<Gateway> {
    let Some(tree) = &index.tree else { return Vec::new() };
    let lines = gateway_lines(q, index);
    if lines.is_empty() {
        return Vec::new();
    }
    let path = tree.descent(q.x);
    let succ = match search {
        SearchMode::Cascade => index.cascade.successors(&path, q.y),
        SearchMode::Binary => successors_binary(&index.catalogs, &path, q.y),
    };
    let g = &index.graph;
    let rq: RPoint = q.into();
    let qy = Rational::from_int(q.y);
    let mut out = Vec::new();
    for line in lines {
        let k = path.iter().position(|&u| u == line.node).expect("projection line on the search path");
        let (ids, keys) = (&g.vcut[line.node as usize], &index.catalogs[line.node as usize]);
        let s = succ[k];
        let qh = RPoint::new(Rational::from_int(tree.node(line.node).cut), qy.clone());
        let mut take = |id: u32| {
            let at = g.nodes[id as usize].location.clone();
            push_unique(&mut out, gateway(vec![rq.clone(), qh.clone(), at], id));
        };
        if s < keys.len() && keys[s] == q.y {
            take(ids[s]);
            continue;
        }
        if s < keys.len() {
            let (down, _) = g.reach[ids[s] as usize].as_ref().expect("cut-line points carry reach");
            if *down <= qy {
                take(ids[s]);
            }
        }
        if s > 0 {
            let (_, up) = g.reach[ids[s - 1] as usize].as_ref().expect("cut-line points carry reach");
            if *up >= qy {
                take(ids[s - 1]);
            }
        }
    }
    out
}

/// Obstacle edges containing the hit point.
fn host_edges(vis: &Visibility, h: &Hit) -> Vec<EdgeId> {
    match h.feature {
        Feature::Edge(e) => vec![e],
        Feature::Vertex { obstacle, vertex } => {
            let n = vis.obstacles()[obstacle as usize].len() as u32;
            vec![EdgeId { obstacle, edge: vertex }, EdgeId { obstacle, edge: (vertex + n - 1) % n }]
        }
        Feature::BBox => Vec::new(),
    }
}

/// A point shared by two axis-parallel segments `a0-a1` and `b0-b1`, when
/// one exists. Collinear overlaps yield an endpoint inside the other
/// segment.
fn axis_meet(a0: &RPoint, a1: &RPoint, b0: &RPoint, b1: &RPoint) -> Option<RPoint> {
    let within = |v: &Rational, lo: &Rational, hi: &Rational| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= v && v <= hi
    };
    let on = |p: &RPoint, s0: &RPoint, s1: &RPoint| within(&p.x, &s0.x, &s1.x) && within(&p.y, &s0.y, &s1.y);
    let a_h = a0.y == a1.y;
    let b_h = b0.y == b1.y;
    if a_h != b_h {
        let c = if a_h { RPoint::new(b0.x.clone(), a0.y.clone()) } else { RPoint::new(a0.x.clone(), b0.y.clone()) };
        return (on(&c, a0, a1) && on(&c, b0, b1)).then_some(c);
    }
    [(b0, a0, a1), (a0, b0, b1), (b1, a0, a1), (a1, b0, b1)]
        .into_iter()
        .find(|(p, s0, s1)| on(p, s0, s1))
        .map(|(p, _, _)| p.clone())
}

/// Shortest path found by combining one boundary projection of `s` with
/// one of `t`: either the two projection segments cross, or both
/// projections land on the same obstacle edge.
pub fn detect_trivial_path(s: Point, t: Point, vis: &Visibility) -> Option<(Rational, Vec<RPoint>)> {
    let (rs, rt): (RPoint, RPoint) = (s.into(), t.into());
    if s == t {
        return Some((Rational::ZERO, vec![rs]));
    }
    let ps = vis.projections_r(&rs);
    let pt = vis.projections_r(&rt);
    let mut best: Option<(Rational, Vec<RPoint>)> = None;
    let mut offer = |mut path: Vec<RPoint>| {
        path.dedup();
        let len = path.windows(2).fold(Rational::ZERO, |acc, w| acc + l1_length_r(&w[0], &w[1]));
        if best.as_ref().is_none_or(|(b, _)| len < *b) {
            best = Some((len, path));
        }
    };
    for ds in Dir::ALL {
        let hs = ps.get(ds);
        for dt in Dir::ALL {
            let ht = pt.get(dt);
            if let Some(c) = axis_meet(&rs, &hs.point, &rt, &ht.point) {
                offer(vec![rs.clone(), c, rt.clone()]);
            }
            let es = host_edges(vis, hs);
            if host_edges(vis, ht).iter().any(|e| es.contains(e)) {
                offer(vec![rs.clone(), hs.point.clone(), ht.point.clone(), rt.clone()]);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::l1_length;
    use crate::scene::fixtures::scene_a;

    #[test]
    fn trivial_scene_a() {
        let vis = Visibility::new(&scene_a());
        let (len, path) = detect_trivial_path(Point::new(0, 0), Point::new(6, 6), &vis).unwrap();
        assert_eq!(len, Rational::from_int(12));
        assert_eq!(len, Rational::from_int(l1_length(Point::new(0, 0), Point::new(6, 6)) as i128));
        assert_eq!(path.first(), Some(&RPoint::from(Point::new(0, 0))));
        assert_eq!(path.last(), Some(&RPoint::from(Point::new(6, 6))));
        assert_eq!(detect_trivial_path(Point::new(0, 3), Point::new(6, 3), &vis), None);
        let (len, path) = detect_trivial_path(Point::new(1, 1), Point::new(1, 1), &vis).unwrap();
        assert_eq!((len, path.len()), (Rational::ZERO, 1));
    }

    #[test]
    fn axis_meet_cases() {
        let p = |x: i64, y: i64| RPoint::from(Point::new(x, y));
        assert_eq!(axis_meet(&p(0, 0), &p(4, 0), &p(2, -1), &p(2, 1)), Some(p(2, 0)));
        assert_eq!(axis_meet(&p(0, 0), &p(1, 0), &p(2, 0), &p(3, 0)), None);
        assert_eq!(axis_meet(&p(0, 0), &p(3, 0), &p(5, 0), &p(2, 0)), Some(p(2, 0)));
        assert_eq!(axis_meet(&p(1, 1), &p(1, 4), &p(1, 2), &p(1, 0)), Some(p(1, 2)));
    }
}
