//! Seeded fuzz corpus comparing the engines with the reference oracles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cascade::SearchMode;
use crate::error::Result;
use crate::gateway::{compute_gateways, GraphMode};
use crate::geom::{Point, RPoint};
use crate::oracle::{UnweightedOracle, WeightedOracle};
use crate::query::{preprocess_with, ApspPolicy, PreprocessOptions};
use crate::scene::{generate_scene, parse_scene, sample_free_points, save_scene, Mode, Scene};
use crate::weighted::{collect_v_set, preprocess_weighted};

/// Largest polygonal scene also checked with the FULL table.
pub const FULL_TABLE_MAX_N: usize = 48;
/// Largest weighted scene in the corpus.
pub const WEIGHTED_N_MAX: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub scenes: usize,
    pub n_max: usize,
    pub queries: usize,
    pub weighted_scenes: usize,
    pub weighted_queries: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { scenes: 300, n_max: 120, queries: 50, weighted_scenes: 200, weighted_queries: 30, seed: 42 }
    }
}

/// Size and seed of the `i`-th scene: `n` in `[8, n_max]`, `h` in `[1, 8]`.
pub fn scene_params(cfg: &CheckConfig, i: usize, weighted: bool) -> (usize, usize, u64) {
    let n_max = if weighted { cfg.n_max.min(WEIGHTED_N_MAX) } else { cfg.n_max }.max(8);
    let span = n_max - 8 + 1;
    let mix = cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    let n = 8 + (mix >> 7) as usize % span;
    let per = if weighted { 4 } else { 3 };
    let h = (1 + (mix >> 40) as usize % 8).min(n / per).max(1);
    let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(i as u64) ^ if weighted { 0x5757 } else { 0 };
    (n, h, seed)
}

/// Generates scene `i` of the corpus, retrying other seeds when packing
/// fails.
pub fn corpus_scene(cfg: &CheckConfig, i: usize, weighted: bool) -> Scene {
    let (n, h, seed) = scene_params(cfg, i, weighted);
    let mode = if weighted { Mode::RectilinearWeighted } else { Mode::Polygonal };
    (0..64u64)
        .find_map(|k| generate_scene(n, h, mode, seed.wrapping_add(k << 32)).ok())
        .expect("generator succeeds for corpus sizes")
}

/// Query pairs for a scene: consecutive samples of free points.
pub fn corpus_pairs(scene: &Scene, count: usize, seed: u64) -> Vec<(Point, Point)> {
    sample_free_points(scene, 2 * count, seed).chunks(2).map(|c| (c[0], c[1])).collect()
}

/// Whether some point of `points` lies on the polyline.
pub fn path_touches(path: &[RPoint], points: &[Point]) -> bool {
    let on = |p: &RPoint, a: &RPoint, b: &RPoint| {
        let (x0, x1) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
        let (y0, y1) = if a.y <= b.y { (&a.y, &b.y) } else { (&b.y, &a.y) };
        *x0 <= p.x && p.x <= *x1 && *y0 <= p.y && p.y <= *y1
    };
    points.iter().any(|&p| {
        let p = RPoint::from(p);
        match path {
            [only] => *only == p,
            _ => path.windows(2).any(|w| on(&p, &w[0], &w[1])),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub check: String,
    pub s: [i64; 2],
    pub t: [i64; 2],
    pub expected: String,
    pub got: String,
    pub scene: Value,
}

impl Mismatch {
    fn new(check: &str, scene: &Scene, s: Point, t: Point, expected: impl ToString, got: impl ToString) -> Self {
        Mismatch {
            check: check.into(),
            s: [s.x, s.y],
            t: [t.x, t.y],
            expected: expected.to_string(),
            got: got.to_string(),
            scene: serde_json::from_slice(&save_scene(scene)).expect("canonical scene is JSON"),
        }
    }

    pub fn scene(&self) -> Result<Scene> {
        parse_scene(&serde_json::to_vec(&self.scene).expect("re-encoding a JSON value"))
    }

    fn size(&self) -> usize {
        self.scene().map_or(usize::MAX, |s| s.vertex_count())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub queries: usize,
    pub weighted_queries: usize,
    pub mismatches: Vec<Mismatch>,
    /// Weighted pairs where the engine differs from the oracle, counted
    /// whether or not the oracle path meets the node set.
    pub weighted_differences: usize,
    /// Weighted pairs whose oracle path contains a point of the node set.
    pub weighted_conditional: usize,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// The failing case on the smallest scene.
    pub fn minimal(&self) -> Option<&Mismatch> {
        self.mismatches.iter().min_by_key(|m| m.size())
    }
}

fn check_polygonal(scene: &Scene, pairs: &[(Point, Point)], out: &mut Vec<Mismatch>) -> Result<()> {
    let oracle = UnweightedOracle::new(scene);
    let opts = PreprocessOptions::default();
    let ge = preprocess_with(scene, GraphMode::GEnhanced, ApspPolicy::OnDemand, &opts)?;
    let go = preprocess_with(scene, GraphMode::GOld, ApspPolicy::OnDemand, &opts)?;
    let binary = PreprocessOptions { search: SearchMode::Binary, ..opts.clone() };
    let ge_binary = preprocess_with(scene, GraphMode::GEnhanced, ApspPolicy::OnDemand, &binary)?;
    let full = (scene.vertex_count() <= FULL_TABLE_MAX_N)
        .then(|| preprocess_with(scene, GraphMode::GEnhanced, ApspPolicy::Full, &opts))
        .transpose()?;
    for &(s, t) in pairs {
        let want = oracle.query(s, t)?.length;
        let got = ge.query(s, t, true)?;
        if got.length != want {
            out.push(Mismatch::new("G_ENHANCED vs oracle", scene, s, t, &want, &got.length));
        }
        let old = go.query(s, t, false)?.length;
        if old != want {
            out.push(Mismatch::new("G_OLD vs oracle", scene, s, t, &want, &old));
        }
        if let Some(full) = &full {
            let f = full.query(s, t, false)?;
            if (f.length.clone(), f.kind) != (got.length.clone(), got.kind) {
                out.push(Mismatch::new("FULL vs ON_DEMAND", scene, s, t, &got.length, &f.length));
            }
        }
        for q in [s, t] {
            let a = compute_gateways(q, &ge, SearchMode::Cascade);
            let b = compute_gateways(q, &ge_binary, SearchMode::Binary);
            if a != b {
                out.push(Mismatch::new("cascade vs binary gateways", scene, q, q, b.len(), a.len()));
            }
        }
    }
    Ok(())
}

#[derive(Default)]
struct WeightedTally {
    differences: usize,
    conditional: usize,
}

fn check_weighted(scene: &Scene, pairs: &[(Point, Point)], out: &mut Vec<Mismatch>) -> Result<WeightedTally> {
    let oracle = WeightedOracle::new(scene)?;
    let idx = preprocess_weighted(scene, ApspPolicy::OnDemand)?;
    let nodes: Vec<Point> = collect_v_set(scene)?.points.iter().map(|v| v.point).collect();
    let mut tally = WeightedTally::default();
    for &(s, t) in pairs {
        let o = oracle.query(s, t)?;
        let refined = oracle.query_refined(s, t)?.length;
        if refined != o.length {
            out.push(Mismatch::new("grid refinement stability", scene, s, t, &o.length, &refined));
        }
        let got = idx.query(s, t, false)?.length;
        let touches = path_touches(&o.polyline, &nodes);
        tally.conditional += touches as usize;
        if got != o.length {
            tally.differences += 1;
            if got < o.length {
                out.push(Mismatch::new("weighted soundness", scene, s, t, &o.length, &got));
            } else if touches {
                out.push(Mismatch::new("weighted completeness", scene, s, t, &o.length, &got));
            }
        }
    }
    Ok(tally)
}

/// Runs one reproducer case again; returns the mismatches it still shows.
pub fn replay(m: &Mismatch) -> Result<Vec<Mismatch>> {
    let scene = m.scene()?;
    let pair = [(Point::new(m.s[0], m.s[1]), Point::new(m.t[0], m.t[1]))];
    let mut out = Vec::new();
    match scene.mode {
        Mode::Polygonal => check_polygonal(&scene, &pair, &mut out)?,
        Mode::RectilinearWeighted => {
            check_weighted(&scene, &pair, &mut out)?;
        }
    }
    Ok(out)
}

/// Runs the whole corpus. Scenes are processed on the current rayon pool;
/// the report does not depend on the pool size.
pub fn run_check(cfg: &CheckConfig) -> Result<CheckReport> {
    let poly: Vec<Result<Vec<Mismatch>>> = (0..cfg.scenes)
        .into_par_iter()
        .map(|i| {
            let scene = corpus_scene(cfg, i, false);
            let pairs = corpus_pairs(&scene, cfg.queries, cfg.seed ^ i as u64);
            let mut out = Vec::new();
            check_polygonal(&scene, &pairs, &mut out)?;
            Ok(out)
        })
        .collect();
    let weighted: Vec<Result<(Vec<Mismatch>, WeightedTally)>> = (0..cfg.weighted_scenes)
        .into_par_iter()
        .map(|i| {
            let scene = corpus_scene(cfg, i, true);
            let pairs = corpus_pairs(&scene, cfg.weighted_queries, cfg.seed ^ (i as u64) << 1);
            let mut out = Vec::new();
            let tally = check_weighted(&scene, &pairs, &mut out)?;
            Ok((out, tally))
        })
        .collect();
    let mut report = CheckReport {
        queries: cfg.scenes * cfg.queries,
        weighted_queries: cfg.weighted_scenes * cfg.weighted_queries,
        ..Default::default()
    };
    for r in poly {
        report.mismatches.extend(r?);
    }
    for r in weighted {
        let (m, tally) = r?;
        report.mismatches.extend(m);
        report.weighted_differences += tally.differences;
        report.weighted_conditional += tally.conditional;
    }
    Ok(report)
}
