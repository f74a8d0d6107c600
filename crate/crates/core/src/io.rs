//! JSON documents: query batches, query results and index files.
//!
//! An index file stores the scene together with the build settings, a
//! format version and the scene's SHA-256. Loading rebuilds the index and
//! checks the hash and the graph size against the header.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::GraphMode;
use crate::geom::{Point, RPoint};
use crate::query::{preprocess_with, ApspPolicy, PreprocessOptions, PreprocessedIndex, QueryResult};
use crate::scene::{load_scene, save_scene, Mode, Scene};
use crate::weighted::{preprocess_weighted_with, WeightedIndex};

pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PairDoc {
    s: [i64; 2],
    t: [i64; 2],
}

/// Parses a JSON array of `{"s": [x, y], "t": [x, y]}` objects.
pub fn parse_query_batch(bytes: &[u8]) -> Result<Vec<(Point, Point)>> {
    let docs: Vec<PairDoc> = serde_json::from_slice(bytes).map_err(|e| Error::parse(&e))?;
    Ok(docs.into_iter().map(|d| (Point::new(d.s[0], d.s[1]), Point::new(d.t[0], d.t[1]))).collect())
}

pub fn save_query_batch(pairs: &[(Point, Point)]) -> Vec<u8> {
    let docs: Vec<PairDoc> = pairs.iter().map(|(s, t)| PairDoc { s: [s.x, s.y], t: [t.x, t.y] }).collect();
    serde_json::to_vec(&docs).expect("batch serialization")
}

fn point_json(p: &RPoint) -> Value {
    json!([p.x.to_string(), p.y.to_string()])
}

pub fn result_json(r: &QueryResult) -> Value {
    json!({
        "length": r.length.to_string(),
        "kind": r.kind,
        "path": r.path.iter().map(point_json).collect::<Vec<_>>(),
    })
}

pub fn error_json(e: &Error) -> Value {
    json!({ "error": e.code(), "message": e.to_string() })
}

/// Lower-case hex SHA-256 of the scene's canonical document.
pub fn scene_hash(scene: &Scene) -> String {
    Sha256::digest(save_scene(scene)).iter().map(|b| format!("{b:02x}")).collect()
}

/// Either kind of built index.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum AnyIndex {
    Polygonal(PreprocessedIndex),
    Weighted(WeightedIndex),
}

impl AnyIndex {
    /// Builds the index matching the scene's mode. `graph` is ignored for
    /// weighted scenes.
    pub fn build(scene: &Scene, graph: GraphMode, policy: ApspPolicy, opts: &PreprocessOptions) -> Result<Self> {
        match scene.mode {
            Mode::Polygonal => preprocess_with(scene, graph, policy, opts).map(AnyIndex::Polygonal),
            Mode::RectilinearWeighted => preprocess_weighted_with(scene, policy, opts).map(AnyIndex::Weighted),
        }
    }

    pub fn scene(&self) -> &Scene {
        match self {
            AnyIndex::Polygonal(i) => &i.scene,
            AnyIndex::Weighted(i) => &i.scene,
        }
    }

    /// `G_OLD`, `G_ENHANCED` or `WEIGHTED`.
    pub fn engine(&self) -> &'static str {
        match self {
            AnyIndex::Polygonal(i) => i.mode.as_str(),
            AnyIndex::Weighted(_) => "WEIGHTED",
        }
    }

    pub fn policy(&self) -> ApspPolicy {
        match self {
            AnyIndex::Polygonal(i) => i.policy,
            AnyIndex::Weighted(i) => i.policy,
        }
    }

    pub fn graph(&self) -> &crate::graph::PathGraph {
        match self {
            AnyIndex::Polygonal(i) => &i.graph,
            AnyIndex::Weighted(i) => &i.wg.graph,
        }
    }

    pub fn query(&self, s: Point, t: Point, want_path: bool) -> Result<QueryResult> {
        match self {
            AnyIndex::Polygonal(i) => i.query(s, t, want_path),
            AnyIndex::Weighted(i) => i.query(s, t, want_path),
        }
    }

    pub fn batch_query(&self, pairs: &[(Point, Point)], want_path: bool) -> Vec<Result<QueryResult>> {
        match self {
            AnyIndex::Polygonal(i) => i.batch_query(pairs, want_path),
            AnyIndex::Weighted(i) => i.batch_query(pairs, want_path),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct IndexDoc {
    format_version: u32,
    engine: String,
    apsp_policy: String,
    scene_sha256: String,
    nodes: usize,
    edges: usize,
    scene: Value,
}

pub fn save_index(index: &AnyIndex) -> Vec<u8> {
    let scene = index.scene();
    let doc = IndexDoc {
        format_version: INDEX_FORMAT_VERSION,
        engine: index.engine().into(),
        apsp_policy: index.policy().as_str().into(),
        scene_sha256: scene_hash(scene),
        nodes: index.graph().node_count(),
        edges: index.graph().edge_count(),
        scene: serde_json::from_slice(&save_scene(scene)).expect("canonical scene is JSON"),
    };
    let mut out = serde_json::to_vec(&doc).expect("index serialization");
    out.push(b'\n');
    out
}

pub fn load_index(bytes: &[u8]) -> Result<AnyIndex> {
    load_index_with(bytes, &PreprocessOptions::default())
}

pub fn load_index_with(bytes: &[u8], opts: &PreprocessOptions) -> Result<AnyIndex> {
    let doc: IndexDoc = serde_json::from_slice(bytes).map_err(|e| Error::parse(&e))?;
    if doc.format_version != INDEX_FORMAT_VERSION {
        return Err(Error::IndexMismatch(format!(
            "format version {} (expected {INDEX_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let scene = load_scene(&serde_json::to_vec(&doc.scene).expect("re-encoding a JSON value"))?;
    let hash = scene_hash(&scene);
    if hash != doc.scene_sha256 {
        return Err(Error::IndexMismatch(format!("scene hash {hash} differs from header {}", doc.scene_sha256)));
    }
    let policy: ApspPolicy = doc.apsp_policy.parse().map_err(Error::IndexMismatch)?;
    let graph = match (scene.mode, doc.engine.as_str()) {
        (Mode::RectilinearWeighted, "WEIGHTED") => GraphMode::GEnhanced,
        (Mode::Polygonal, e) => e.parse().map_err(Error::IndexMismatch)?,
        (_, e) => return Err(Error::IndexMismatch(format!("engine {e} does not fit a {} scene", scene.mode.as_str()))),
    };
    let index = AnyIndex::build(&scene, graph, policy, opts)?;
    let (nodes, edges) = (index.graph().node_count(), index.graph().edge_count());
    if (nodes, edges) != (doc.nodes, doc.edges) {
        return Err(Error::IndexMismatch(format!(
            "rebuilt graph has {nodes} nodes and {edges} edges, header says {} and {}",
            doc.nodes, doc.edges
        )));
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::scene::fixtures::{scene_a, scene_w};

    #[test]
    fn result_document() {
        let idx = AnyIndex::build(&scene_a(), GraphMode::GEnhanced, ApspPolicy::OnDemand, &Default::default()).unwrap();
        let r = idx.query(Point::new(0, 3), Point::new(6, 3), true).unwrap();
        let v = result_json(&r);
        assert_eq!(v["length"], "10");
        assert_eq!(v["kind"], "VIA_GATEWAYS");
        assert_eq!(v["path"][0], json!(["0", "3"]));
        let e = idx.query(Point::new(3, 3), Point::new(0, 0), false).unwrap_err();
        assert_eq!(error_json(&e)["error"], "POINT_INSIDE_OBSTACLE");
    }

    #[test]
    fn batch_round_trip() {
        let pairs = vec![(Point::new(0, 3), Point::new(6, 3)), (Point::new(-1, 2), Point::new(4, 7))];
        assert_eq!(parse_query_batch(&save_query_batch(&pairs)).unwrap(), pairs);
        assert!(matches!(parse_query_batch(b"[{\"s\": [1, 2]"), Err(Error::Parse { .. })));
        assert!(parse_query_batch(b"[]").unwrap().is_empty());
    }

    #[test]
    fn index_round_trip() {
        for scene in [scene_a(), scene_w()] {
            let idx = AnyIndex::build(&scene, GraphMode::GOld, ApspPolicy::Full, &Default::default()).unwrap();
            let bytes = save_index(&idx);
            let back = load_index(&bytes).unwrap();
            assert_eq!(back.engine(), idx.engine());
            assert_eq!(back.policy(), ApspPolicy::Full);
            assert_eq!(back.graph(), idx.graph());
            let q = back.query(Point::new(-1, -1), Point::new(5, 5), false).unwrap();
            assert_eq!(q.length, Rational::from_int(12));
        }
    }

    #[test]
    fn index_mismatches_fail() {
        let idx = AnyIndex::build(&scene_a(), GraphMode::GEnhanced, ApspPolicy::OnDemand, &Default::default()).unwrap();
        let mut doc: Value = serde_json::from_slice(&save_index(&idx)).unwrap();
        doc["format_version"] = json!(99);
        assert!(matches!(load_index(&serde_json::to_vec(&doc).unwrap()), Err(Error::IndexMismatch(_))));
        let mut doc: Value = serde_json::from_slice(&save_index(&idx)).unwrap();
        doc["scene"]["obstacles"][0]["vertices"][0] = json!([2, 0]);
        assert!(matches!(load_index(&serde_json::to_vec(&doc).unwrap()), Err(Error::IndexMismatch(_))));
        let mut doc: Value = serde_json::from_slice(&save_index(&idx)).unwrap();
        doc["nodes"] = json!(1);
        assert!(matches!(load_index(&serde_json::to_vec(&doc).unwrap()), Err(Error::IndexMismatch(_))));
    }
}
