//! Brute-force reference shortest paths.
//!
//! Nothing here uses the engine's visibility index or graph builders: the
//! unweighted oracle is a visibility graph over obstacle vertices, and the
//! weighted one a Hanan grid priced segment by segment.

use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::geom::{l1_length, point_in_polygon, point_in_polygon_r, segment_avoids_interior, Location, Point, RPoint};
use crate::rational::{Cost, Rational};
use crate::scene::{Mode, Scene};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OraclePath {
    pub length: Rational,
    pub polyline: Vec<RPoint>,
}

/// Checks that `p` lies in the closed free space of `scene`.
pub(crate) fn admit(scene: &Scene, p: Point) -> Result<()> {
    if !scene.bbox.contains(p) {
        return Err(Error::OutOfBbox(p));
    }
    for (i, poly) in scene.obstacles.iter().enumerate() {
        if point_in_polygon(p, poly) == Location::Interior {
            return Err(Error::PointInsideObstacle(p, i));
        }
    }
    Ok(())
}

/// Visibility-graph oracle with the vertex-to-vertex part precomputed.
#[derive(Clone, Debug)]
pub struct UnweightedOracle {
    scene: Scene,
    verts: Vec<Point>,
    dist: Vec<Vec<Option<u128>>>,
    next: Vec<Vec<u32>>,
}

impl UnweightedOracle {
    pub fn new(scene: &Scene) -> Self {
        let verts: Vec<Point> = scene.vertices().collect();
        let n = verts.len();
        let mut dist = vec![vec![None; n]; n];
        let mut next = vec![vec![u32::MAX; n]; n];
        for i in 0..n {
            dist[i][i] = Some(0);
            next[i][i] = i as u32;
            for j in (i + 1)..n {
                if visible(scene, verts[i], verts[j]) {
                    let d = l1_length(verts[i], verts[j]);
                    dist[i][j] = Some(d);
                    dist[j][i] = Some(d);
                    next[i][j] = j as u32;
                    next[j][i] = i as u32;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(dik) = dist[i][k] else { continue };
                for j in 0..n {
                    let Some(dkj) = dist[k][j] else { continue };
                    if dist[i][j].is_none_or(|d| dik + dkj < d) {
                        dist[i][j] = Some(dik + dkj);
                        next[i][j] = next[i][k];
                    }
                }
            }
        }
        UnweightedOracle { scene: scene.clone(), verts, dist, next }
    }

    /// Shortest distance between obstacle vertices `i` and `j` (global
    /// vertex order).
    pub fn vertex_distance(&self, i: usize, j: usize) -> Rational {
        Rational::from_int(self.dist[i][j].expect("free space is connected") as i128)
    }

    pub fn query(&self, s: Point, t: Point) -> Result<OraclePath> {
        admit(&self.scene, s)?;
        admit(&self.scene, t)?;
        let from_s: Vec<Option<u128>> =
            self.verts.iter().map(|&v| visible(&self.scene, s, v).then(|| l1_length(s, v))).collect();
        let to_t: Vec<Option<u128>> =
            self.verts.iter().map(|&v| visible(&self.scene, v, t).then(|| l1_length(v, t))).collect();
        let mut best: Option<(u128, Option<(usize, usize)>)> =
            visible(&self.scene, s, t).then(|| (l1_length(s, t), None));
        for (i, a) in from_s.iter().enumerate() {
            let Some(a) = a else { continue };
            for (j, c) in to_t.iter().enumerate() {
                let (Some(b), Some(c)) = (self.dist[i][j], c) else { continue };
                let d = a + b + c;
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, Some((i, j))));
                }
            }
        }
        let (d, via) = best.expect("free space is connected");
        let mut polyline = vec![RPoint::from(s)];
        if let Some((mut i, j)) = via {
            polyline.push(self.verts[i].into());
            while i != j {
                i = self.next[i][j] as usize;
                polyline.push(self.verts[i].into());
            }
        }
        polyline.push(t.into());
        polyline.dedup();
        Ok(OraclePath { length: Rational::from_int(d as i128), polyline })
    }
}

fn visible(scene: &Scene, a: Point, b: Point) -> bool {
    let (ra, rb) = (RPoint::from(a), RPoint::from(b));
    scene.obstacles.iter().all(|p| segment_avoids_interior(&ra, &rb, p))
}

/// Exact L1 obstacle-avoiding distance by visibility graph and Dijkstra-
/// equivalent all-pairs relaxation.
pub fn oracle_unweighted(scene: &Scene, s: Point, t: Point) -> Result<OraclePath> {
    UnweightedOracle::new(scene).query(s, t)
}

/// Hanan-grid oracle for weighted rectilinear scenes.
///
/// Grid lines run through every obstacle vertex coordinate and through the
/// query points. Internal projections of reflex vertices share both
/// coordinates with obstacle vertices, so they are grid nodes too. Each
/// grid step crosses no obstacle edge, so its midpoint decides its rate.
#[derive(Clone, Debug)]
pub struct WeightedOracle {
    scene: Scene,
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    rates: Vec<Cost>,
    boxes: Vec<(Point, Point)>,
}

impl WeightedOracle {
    pub fn new(scene: &Scene) -> Result<Self> {
        if scene.mode != Mode::RectilinearWeighted {
            return Err(Error::WrongMode { expected: "rectilinear-weighted" });
        }
        let mut xs: Vec<i64> = scene.vertices().map(|v| v.x).collect();
        let mut ys: Vec<i64> = scene.vertices().map(|v| v.y).collect();
        xs.extend([scene.bbox.x0, scene.bbox.x1]);
        ys.extend([scene.bbox.y0, scene.bbox.y1]);
        let rates = (0..scene.obstacles.len()).map(|i| scene.weight(i).rate()).collect();
        let boxes = scene.obstacles.iter().map(|p| p.bounds()).collect();
        Ok(WeightedOracle {
            scene: scene.clone(),
            xs: xs.into_iter().map(Rational::from_int).collect(),
            ys: ys.into_iter().map(Rational::from_int).collect(),
            rates,
            boxes,
        })
    }

    pub fn query(&self, s: Point, t: Point) -> Result<OraclePath> {
        self.solve(s, t, false)
    }

    /// Same search on the grid with a midpoint line between every pair of
    /// consecutive grid lines.
    pub fn query_refined(&self, s: Point, t: Point) -> Result<OraclePath> {
        self.solve(s, t, true)
    }

    fn rate_at(&self, p: &RPoint) -> Cost {
        for (i, poly) in self.scene.obstacles.iter().enumerate() {
            let (lo, hi) = self.boxes[i];
            let inside_box = Rational::from_int(lo.x) < p.x
                && p.x < Rational::from_int(hi.x)
                && Rational::from_int(lo.y) < p.y
                && p.y < Rational::from_int(hi.y);
            if inside_box && point_in_polygon_r(p, poly) == Location::Interior {
                return self.rates[i].clone();
            }
        }
        Cost::Finite(Rational::ONE)
    }

    fn solve(&self, s: Point, t: Point, refine: bool) -> Result<OraclePath> {
        admit(&self.scene, s)?;
        admit(&self.scene, t)?;
        let axis = |base: &[Rational], a: i64, b: i64| {
            let mut v = base.to_vec();
            v.extend([Rational::from_int(a), Rational::from_int(b)]);
            v.sort();
            v.dedup();
            if refine {
                let mids: Vec<Rational> = v.windows(2).map(|w| Rational::midpoint(&w[0], &w[1])).collect();
                v.extend(mids);
                v.sort();
            }
            v
        };
        let xs = axis(&self.xs, s.x, t.x);
        let ys = axis(&self.ys, s.y, t.y);
        let (nx, ny) = (xs.len(), ys.len());
        let id = |i: usize, j: usize| i * ny + j;
        let find = |v: &[Rational], c: i64| v.binary_search(&Rational::from_int(c)).unwrap();
        let src = id(find(&xs, s.x), find(&ys, s.y));
        let dst = id(find(&xs, t.x), find(&ys, t.y));
        let mut dist: Vec<Option<Rational>> = vec![None; nx * ny];
        let mut pred = vec![usize::MAX; nx * ny];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(Rational::ZERO);
        heap.push(Reverse((Rational::ZERO, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u].as_ref() != Some(&d) {
                continue;
            }
            if u == dst {
                break;
            }
            let (i, j) = (u / ny, u % ny);
            let mut steps = Vec::with_capacity(4);
            if i > 0 {
                steps.push((i - 1, j));
            }
            if i + 1 < nx {
                steps.push((i + 1, j));
            }
            if j > 0 {
                steps.push((i, j - 1));
            }
            if j + 1 < ny {
                steps.push((i, j + 1));
            }
            for (a, b) in steps {
                let mid = RPoint::new(Rational::midpoint(&xs[i], &xs[a]), Rational::midpoint(&ys[j], &ys[b]));
                let len = &(&xs[i] - &xs[a]).abs() + &(&ys[j] - &ys[b]).abs();
                let Cost::Finite(rate) = self.rate_at(&mid) else { continue };
                let nd = &d + &(&rate * &len);
                let v = id(a, b);
                if dist[v].as_ref().is_none_or(|cur| nd < *cur) {
                    dist[v] = Some(nd.clone());
                    pred[v] = u;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        let length = dist[dst].clone().ok_or(Error::NoPath(s, t))?;
        let mut cells = vec![dst];
        while *cells.last().unwrap() != src {
            cells.push(pred[*cells.last().unwrap()]);
        }
        cells.reverse();
        let pts: Vec<RPoint> = cells.iter().map(|&c| RPoint::new(xs[c / ny].clone(), ys[c % ny].clone())).collect();
        let mut polyline: Vec<RPoint> = Vec::new();
        for p in pts {
            let n = polyline.len();
            if n >= 2 {
                let (a, b) = (&polyline[n - 2], &polyline[n - 1]);
                if (a.x == b.x && b.x == p.x) || (a.y == b.y && b.y == p.y) {
                    polyline.pop();
                }
            }
            polyline.push(p);
        }
        Ok(OraclePath { length, polyline })
    }
}

/// Weighted shortest path on the Hanan grid.
pub fn oracle_weighted(scene: &Scene, s: Point, t: Point) -> Result<OraclePath> {
    WeightedOracle::new(scene)?.query(s, t)
}

/// Whether the refined grid finds the same length as the base grid.
pub fn refinement_agrees(scene: &Scene, s: Point, t: Point) -> Result<bool> {
    let o = WeightedOracle::new(scene)?;
    Ok(o.query(s, t)?.length == o.query_refined(s, t)?.length)
}
