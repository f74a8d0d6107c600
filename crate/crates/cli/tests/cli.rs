use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SCENE_A: &str =
    r#"{"mode":"polygonal","bbox":[-1,-1,7,7],"obstacles":[{"vertices":[[2,1],[5,2],[4,6],[1,5]],"weight":null}]}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1gate")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scene-a.json"), SCENE_A).unwrap();
    let o = run(dir.path(), &["build", "scene-a.json", "-o", "idx.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn query_scene_a() {
    let dir = setup();
    let o = run(dir.path(), &["query", "idx.json", "--s", "0,3", "--t", "6,3", "--path"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["length"], "10");
    assert_eq!(v["path"][0], serde_json::json!(["0", "3"]));
    let o = run(dir.path(), &["query", "idx.json", "--s", "0,0", "--t", "6,6"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["length"].as_str(), v["kind"].as_str()), (Some("12"), Some("TRIVIAL")));
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(run(dir.path(), &["query", "idx.json", "--s", "3,3", "--t", "0,0"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["query", "idx.json", "--s", "3"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    fs::write(dir.path().join("bad.json"), &SCENE_A[..40]).unwrap();
    assert_eq!(run(dir.path(), &["build", "bad.json"]).status.code(), Some(2));
    let cw = SCENE_A.replace("[[2,1],[5,2],[4,6],[1,5]]", "[[1,5],[4,6],[5,2],[2,1]]");
    fs::write(dir.path().join("cw.json"), cw).unwrap();
    let o = run(dir.path(), &["build", "cw.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MALFORMED_POLYGON"));
}

#[test]
fn batch_isolates_errors() {
    let dir = setup();
    fs::write(dir.path().join("q.json"), r#"[{"s":[0,3],"t":[6,3]},{"s":[3,3],"t":[0,0]},{"s":[6,3],"t":[0,3]}]"#)
        .unwrap();
    let o = run(dir.path(), &["batch", "idx.json", "q.json", "--threads", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["length"], "10");
    assert_eq!(v[1]["error"], "POINT_INSIDE_OBSTACLE");
    assert_eq!(v[2]["length"], "10");
}

#[test]
fn render_counts_shapes() {
    let dir = setup();
    let o = run(dir.path(), &["render", "scene-a.json", "--layers", "obstacles,path", "--s", "0,3", "--t", "6,3"]);
    assert!(o.status.success());
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") && svg.contains("viewBox=\"0 0 1000 1000\""));
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert_eq!(svg.matches("<polyline").count(), 1);
    let again = run(dir.path(), &["render", "scene-a.json", "--layers", "obstacles,path", "--s", "0,3", "--t", "6,3"]);
    assert_eq!(stdout(&again), svg);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(dir.path(), &["generate", "--n", "12", "--h", "3", "--seed", "7"]);
    let b = run(dir.path(), &["generate", "--n", "12", "--h", "3", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(dir.path(), &["generate", "--n", "2", "--h", "1"]).status.code(), Some(2));
}

#[test]
fn check_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "check",
        "--scenes",
        "3",
        "--n-max",
        "24",
        "--queries",
        "5",
        "--weighted-scenes",
        "2",
        "--weighted-queries",
        "5",
        "--seed",
        "9",
    ];
    let a = run(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert!(stdout(&a).contains("all checks passed"));
    assert!(!dir.path().join("check-reproducer.json").exists());
}

#[test]
fn replay_passing_reproducer() {
    let dir = tempfile::tempdir().unwrap();
    let repro = format!(
        r#"{{"check":"G_ENHANCED vs oracle","s":[0,3],"t":[6,3],"expected":"10","got":"11","scene":{SCENE_A}}}"#
    );
    fs::write(dir.path().join("r.json"), repro).unwrap();
    let o = run(dir.path(), &["check", "--replay", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("reproducer passes"));
}

#[test]
fn bench_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bench", "--sizes", "24,48", "--queries", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,h,mode,nodes,edges,build_ms,median_query_us,p99_query_us,gateway_count_mean"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn weighted_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let w = r#"{"mode":"rectilinear-weighted","bbox":[-1,-1,5,5],"obstacles":[{"vertices":[[1,1],[3,1],[3,3],[1,3]],"weight":"2"}]}"#;
    fs::write(dir.path().join("w.json"), w).unwrap();
    assert!(run(dir.path(), &["build", "w.json", "--apsp", "full", "-o", "w-idx.json"]).status.success());
    let o = run(dir.path(), &["query", "w-idx.json", "--s", "0,2", "--t", "4,2", "--path"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["length"], "6");
}
