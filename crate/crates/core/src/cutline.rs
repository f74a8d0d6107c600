//! The cut-line tree: recursive median splits of a point set, with level
//! numbers and the super-level grouping.

use crate::error::{Error, Result};
use crate::geom::{Point, RPoint};
use crate::rational::Rational;
use crate::scene::ceil_sqrt;
use crate::visibility::{Dir, Visibility};

/// Orientation of the cut-lines. A `Vertical` tree splits by x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutAxis {
    Vertical,
    Horizontal,
}

impl CutAxis {
    /// Coordinate compared against the cut-lines.
    pub fn key(self, p: Point) -> i64 {
        match self {
            CutAxis::Vertical => p.x,
            CutAxis::Horizontal => p.y,
        }
    }

    /// Coordinate along the cut-lines.
    pub fn along(self, p: Point) -> i64 {
        match self {
            CutAxis::Vertical => p.y,
            CutAxis::Horizontal => p.x,
        }
    }

    /// Directions towards lower and higher keys.
    pub fn dirs(self) -> (Dir, Dir) {
        match self {
            CutAxis::Vertical => (Dir::Left, Dir::Right),
            CutAxis::Horizontal => (Dir::Down, Dir::Up),
        }
    }

    /// Directions along the cut-lines, towards lower and higher values.
    pub fn along_dirs(self) -> (Dir, Dir) {
        match self {
            CutAxis::Vertical => (Dir::Down, Dir::Up),
            CutAxis::Horizontal => (Dir::Left, Dir::Right),
        }
    }

    /// The point with the given key and along-coordinate.
    pub fn point(self, key: Rational, along: Rational) -> RPoint {
        match self {
            CutAxis::Vertical => RPoint::new(key, along),
            CutAxis::Horizontal => RPoint::new(along, key),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutNode {
    /// Coordinate of the cut-line.
    pub cut: i64,
    /// Ids (into the tree's point list) of `V(u)`.
    pub members: Vec<u32>,
    /// Level number; the root has level 1.
    pub level: u32,
    pub super_level: u32,
    pub left: Option<u32>,
    pub right: Option<u32>,
    pub parent: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutLineTree {
    pub axis: CutAxis,
    pub points: Vec<Point>,
    pub nodes: Vec<CutNode>,
    pub root: u32,
    /// Realized depth.
    pub levels: u32,
    pub super_level_size: u32,
}

/// Where a projection cut-line lies relative to the query point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// The cut-line has a smaller key than the point.
    Low,
    /// The point lies on the cut-line.
    On,
    /// The cut-line has a larger key than the point.
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionLine {
    pub node: u32,
    pub side: Side,
}

/// Builds the cut-line tree of `points` (lower-median splits; points on a
/// cut-line go to neither child).
pub fn build_cutline_tree(points: &[Point], axis: CutAxis) -> Result<CutLineTree> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut order: Vec<u32> = (0..points.len() as u32).collect();
    order.sort_by_key(|&i| (axis.key(points[i as usize]), axis.along(points[i as usize]), i));
    let mut nodes: Vec<CutNode> = Vec::new();
    // (slice range in `order`, parent, is_right, level)
    let mut stack = vec![(0usize, order.len(), None::<u32>, false, 1u32)];
    let mut levels = 0;
    while let Some((lo, hi, parent, is_right, level)) = stack.pop() {
        let slice = &order[lo..hi];
        let m = (slice.len() - 1) / 2;
        let cut = axis.key(points[slice[m] as usize]);
        let l_end = lo + slice.partition_point(|&i| axis.key(points[i as usize]) < cut);
        let r_start = lo + slice.partition_point(|&i| axis.key(points[i as usize]) <= cut);
        let id = nodes.len() as u32;
        nodes.push(CutNode { cut, members: slice.to_vec(), level, super_level: 0, left: None, right: None, parent });
        if let Some(p) = parent {
            if is_right {
                nodes[p as usize].right = Some(id);
            } else {
                nodes[p as usize].left = Some(id);
            }
        }
        levels = levels.max(level);
        if r_start < hi {
            stack.push((r_start, hi, Some(id), true, level + 1));
        }
        if lo < l_end {
            stack.push((lo, l_end, Some(id), false, level + 1));
        }
    }
    let sls = ceil_sqrt(levels as usize).max(1) as u32;
    for n in &mut nodes {
        n.super_level = n.level.div_ceil(sls);
    }
    Ok(CutLineTree { axis, points: points.to_vec(), nodes, root: 0, levels, super_level_size: sls })
}

impl CutLineTree {
    pub fn node(&self, id: u32) -> &CutNode {
        &self.nodes[id as usize]
    }

    pub fn super_levels(&self) -> u32 {
        self.levels.div_ceil(self.super_level_size)
    }

    /// Whether `u` is a highest node of its super-level.
    pub fn is_super_top(&self, u: u32) -> bool {
        (self.node(u).level - 1).is_multiple_of(self.super_level_size)
    }

    /// In-order (increasing cut coordinate) list of the nodes of `T_u`, the
    /// part of the subtree of `u` inside `u`'s super-level.
    pub fn super_subtree_inorder(&self, u: u32) -> Vec<u32> {
        let sl = self.node(u).super_level;
        let mut out = Vec::new();
        let mut stack: Vec<(u32, bool)> = vec![(u, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                out.push(v);
                continue;
            }
            let n = self.node(v);
            if let Some(r) = n.right.filter(|&r| self.node(r).super_level == sl) {
                stack.push((r, false));
            }
            stack.push((v, true));
            if let Some(l) = n.left.filter(|&l| self.node(l).super_level == sl) {
                stack.push((l, false));
            }
        }
        out
    }

    /// Tree nodes visited when searching for `key`, root first. The walk
    /// stops at a node whose cut equals `key`.
    pub fn descent(&self, key: i64) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = Some(self.root);
        while let Some(u) = cur {
            out.push(u);
            let n = self.node(u);
            cur = match key.cmp(&n.cut) {
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Less => n.left,
                std::cmp::Ordering::Greater => n.right,
            };
        }
        out
    }

    /// Projection cut-lines of a point with key `key`, given the keys
    /// `low_reach` and `high_reach` up to which it sees along its key axis.
    pub fn projection_lines(&self, key: i64, low_reach: &Rational, high_reach: &Rational) -> Vec<ProjectionLine> {
        let mut out = Vec::new();
        let mut cur = Some(self.root);
        while let Some(u) = cur {
            let n = self.node(u);
            let c = Rational::from_int(n.cut);
            if key == n.cut {
                out.push(ProjectionLine { node: u, side: Side::On });
                break;
            } else if key < n.cut {
                if *high_reach >= c {
                    out.push(ProjectionLine { node: u, side: Side::High });
                }
                cur = n.left;
            } else {
                if *low_reach <= c {
                    out.push(ProjectionLine { node: u, side: Side::Low });
                }
                cur = n.right;
            }
        }
        out
    }

    /// Keeps, per super-level and side, only the deepest projection line.
    /// A line through the point counts as lying on the high side.
    pub fn relevant_lines(&self, lines: &[ProjectionLine]) -> Vec<ProjectionLine> {
        let mut out: Vec<ProjectionLine> = Vec::new();
        for &pl in lines {
            let side = |s: Side| if s == Side::Low { 0 } else { 1 };
            let sl = self.node(pl.node).super_level;
            match out.iter_mut().find(|o| side(o.side) == side(pl.side) && self.node(o.node).super_level == sl) {
                Some(o) => {
                    if self.node(pl.node).level > self.node(o.node).level {
                        *o = pl;
                    }
                }
                None => out.push(pl),
            }
        }
        out
    }

    /// Projection cut-lines of a free point `q`.
    pub fn projection_cutlines(&self, q: Point, vis: &Visibility) -> Vec<ProjectionLine> {
        let (lo, hi) = self.axis.dirs();
        let rq: RPoint = q.into();
        let key_of = |p: &RPoint| match self.axis {
            CutAxis::Vertical => p.x.clone(),
            CutAxis::Horizontal => p.y.clone(),
        };
        let low = key_of(&vis.free_extent(&rq, lo).point);
        let high = key_of(&vis.free_extent(&rq, hi).point);
        self.projection_lines(self.axis.key(q), &low, &high)
    }

    pub fn relevant_projection_cutlines(&self, q: Point, vis: &Visibility) -> Vec<ProjectionLine> {
        self.relevant_lines(&self.projection_cutlines(q, vis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures::scene_a;
    use crate::scene::{generate_scene, Mode, Scene};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_points(k: i64) -> Vec<Point> {
        (0..k).map(|i| Point::new(i * 3 + 1, (i * 7) % 11)).collect()
    }

    #[test]
    fn scene_a_tree() {
        let s = scene_a();
        let pts: Vec<Point> = s.vertices().collect();
        let t = build_cutline_tree(&pts, CutAxis::Vertical).unwrap();
        let root = t.node(t.root);
        assert_eq!(root.cut, 2);
        let l = t.node(root.left.unwrap());
        let r = t.node(root.right.unwrap());
        let xs = |n: &CutNode| -> Vec<i64> {
            let mut v: Vec<i64> = n.members.iter().map(|&i| pts[i as usize].x).collect();
            v.sort();
            v
        };
        assert_eq!(xs(l), vec![1]);
        assert_eq!(xs(r), vec![4, 5]);
        assert_eq!(t.levels, 3);
    }

    #[test]
    fn singleton_and_empty() {
        let t = build_cutline_tree(&[Point::new(3, 4)], CutAxis::Vertical).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.levels, 1);
        assert_eq!(build_cutline_tree(&[], CutAxis::Vertical), Err(Error::EmptyPointSet));
    }

    #[test]
    fn depth_and_super_levels() {
        // 15 points: a perfect tree of depth 4.
        let t = build_cutline_tree(&line_points(15), CutAxis::Vertical).unwrap();
        assert_eq!((t.levels, t.super_level_size, t.super_levels()), (4, 2, 2));
        // 16 points: excluding medians forces a fifth level.
        let t = build_cutline_tree(&line_points(16), CutAxis::Vertical).unwrap();
        assert_eq!((t.levels, t.super_level_size, t.super_levels()), (5, 3, 2));
        for k in 1..300 {
            let t = build_cutline_tree(&line_points(k), CutAxis::Vertical).unwrap();
            let bound = crate::scene::ceil_log2(k as usize) as u32 + 1;
            assert!(t.levels <= bound, "k={k}");
            assert!(t.super_level_size * t.super_levels() >= t.levels);
        }
    }

    #[test]
    fn children_are_strict() {
        let pts = line_points(100);
        let t = build_cutline_tree(&pts, CutAxis::Vertical).unwrap();
        for n in &t.nodes {
            if let Some(l) = n.left {
                assert!(t.node(l).members.iter().all(|&i| pts[i as usize].x < n.cut));
            }
            if let Some(r) = n.right {
                assert!(t.node(r).members.iter().all(|&i| pts[i as usize].x > n.cut));
            }
            let mut xs: Vec<i64> = n.members.iter().map(|&i| pts[i as usize].x).collect();
            xs.sort();
            assert_eq!(n.cut, xs[(xs.len() - 1) / 2]);
        }
    }

    #[test]
    fn scene_a_projection_lines() {
        let s = scene_a();
        let vis = Visibility::new(&s);
        let pts: Vec<Point> = s.vertices().collect();
        let t = build_cutline_tree(&pts, CutAxis::Vertical).unwrap();
        // q = (0,3): rightward visibility stops at x = 3/2, so the root
        // line x=2 is skipped and the walk descends to x=1.
        let lines = t.projection_cutlines(Point::new(0, 3), &vis);
        let cuts: Vec<i64> = lines.iter().map(|l| t.node(l.node).cut).collect();
        assert_eq!(cuts, vec![1]);
        // q = (6,3): leftward visibility stops at x = 19/4, which blocks
        // x=2 and x=4; only x=5 is seen.
        let lines = t.projection_cutlines(Point::new(6, 3), &vis);
        let cuts: Vec<i64> = lines.iter().map(|l| t.node(l.node).cut).collect();
        assert_eq!(cuts, vec![5]);
        let rel = t.relevant_projection_cutlines(Point::new(6, 3), &vis);
        assert_eq!(rel, lines);
    }

    #[test]
    fn relevant_keeps_deepest_per_super_level() {
        let t = build_cutline_tree(&line_points(15), CutAxis::Vertical).unwrap();
        let all = t.projection_lines(0, &Rational::from_int(-100), &Rational::from_int(100));
        assert_eq!(all.len(), 4);
        let rel = t.relevant_lines(&all);
        // All lines are on the high side: one per super-level.
        assert_eq!(rel.len(), 2);
        let levels: Vec<u32> = rel.iter().map(|l| t.node(l.node).level).collect();
        assert_eq!(levels, vec![2, 4]);
        assert_eq!(t.relevant_lines(&all[..1]), all[..1].to_vec());

        // A point in the middle sees lines on both sides.
        let all = t.projection_lines(20, &Rational::from_int(-100), &Rational::from_int(100));
        let rel = t.relevant_lines(&all);
        for sl in 1..=t.super_levels() {
            for side in [Side::Low, Side::High] {
                let k = rel.iter().filter(|l| l.side == side && t.node(l.node).super_level == sl).count();
                let any = all.iter().any(|l| l.side == side && t.node(l.node).super_level == sl);
                assert_eq!(k, any as usize);
            }
        }
    }

    #[test]
    fn empty_scene_sees_every_line() {
        let s = Scene::polygonal(vec![]);
        let vis = Visibility::new(&s);
        let t = build_cutline_tree(&line_points(31), CutAxis::Vertical).unwrap();
        let lines = t.projection_lines(
            0,
            &vis.free_extent(&Point::new(0, 0).into(), Dir::Left).point.x,
            &Rational::from_int(1000),
        );
        assert_eq!(lines.len() as u32, t.levels);
    }

    #[test]
    fn fuzz_level_order_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..30 {
            let s = generate_scene(20 + seed as usize * 3, 1 + seed as usize % 5, Mode::Polygonal, seed).unwrap();
            let vis = Visibility::new(&s);
            let pts: Vec<Point> = s.vertices().collect();
            let t = build_cutline_tree(&pts, CutAxis::Vertical).unwrap();
            for _ in 0..200 {
                let p = Point::new(rng.gen_range(s.bbox.x0..=s.bbox.x1), rng.gen_range(s.bbox.y0..=s.bbox.y1));
                if !matches!(vis.locate(p).unwrap(), crate::visibility::Located::Free(_)) {
                    continue;
                }
                let lines = t.projection_cutlines(p, &vis);
                for side in [Side::Low, Side::High] {
                    let mut on_side: Vec<(i64, u32)> = lines
                        .iter()
                        .filter(|l| l.side == side)
                        .map(|l| ((t.node(l.node).cut - p.x).abs(), t.node(l.node).level))
                        .collect();
                    on_side.sort();
                    assert!(on_side.windows(2).all(|w| w[0].1 > w[1].1));
                }
                let rel = t.relevant_lines(&lines);
                assert!(rel.len() as u32 <= 2 * t.super_levels());
                assert!(rel.iter().all(|r| lines.contains(r)));
            }
        }
    }
}
