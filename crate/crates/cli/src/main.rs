use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use l1gate::cascade::SearchMode;
use l1gate::check::{replay, run_check, CheckConfig, Mismatch};
use l1gate::gateway::compute_gateways;
use l1gate::io::{error_json, load_index, parse_query_batch, result_json, save_index, AnyIndex};
use l1gate::query::{PreprocessOptions, DEFAULT_MEMORY_BUDGET};
use l1gate::render::{parse_layers, render_svg, Layer, Overlay};
use l1gate::scene::{default_palette, generate_scene_with, load_scene, sample_free_points, save_scene, GenerateParams};
use l1gate::{ApspPolicy, Cost, Error, GraphMode, Mode, Point};

#[derive(Parser)]
#[command(name = "l1gate", version, about = "Two-point L1 shortest paths among polygonal obstacles")]
struct Cli {
    /// Worker threads for batch, check and bench.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scene.
    Generate(GenerateArgs),
    /// Preprocess a scene into an index file.
    Build(BuildArgs),
    /// Answer one query.
    Query(QueryArgs),
    /// Answer a JSON file of queries.
    Batch(BatchArgs),
    /// Compare the engines with the oracles on a seeded corpus.
    Check(CheckArgs),
    /// Measure build and query costs as the scene grows.
    Bench(BenchArgs),
    /// Draw a scene as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    h: usize,
    #[arg(long, default_value = "polygonal")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated weights for weighted scenes, e.g. `0,1/2,inf`.
    #[arg(long)]
    palette: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    scene: PathBuf,
    #[arg(long, default_value = "G_ENHANCED")]
    graph: GraphMode,
    #[arg(long, default_value = "ON_DEMAND")]
    apsp: ApspPolicy,
    /// Byte budget for FULL tables.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    memory_budget: u128,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    index: PathBuf,
    #[arg(long, value_parser = parse_point)]
    s: Point,
    #[arg(long, value_parser = parse_point)]
    t: Point,
    /// Include the path in the output.
    #[arg(long)]
    path: bool,
}

#[derive(Args)]
struct BatchArgs {
    index: PathBuf,
    queries: PathBuf,
    #[arg(long)]
    path: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 300)]
    scenes: usize,
    #[arg(long, default_value_t = 120)]
    n_max: usize,
    #[arg(long, default_value_t = 50)]
    queries: usize,
    #[arg(long, default_value_t = 200)]
    weighted_scenes: usize,
    #[arg(long, default_value_t = 30)]
    weighted_queries: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Where the smallest failing case is written.
    #[arg(long, default_value = "check-reproducer.json")]
    reproducer: PathBuf,
    /// Re-run a reproducer file instead of the corpus.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated vertex counts.
    #[arg(long, default_value = "256,512,1024,2048,4096,8192")]
    sizes: String,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Graph modes to measure.
    #[arg(long, default_value = "G_OLD,G_ENHANCED")]
    graphs: String,
    #[arg(long, default_value = "ON_DEMAND")]
    apsp: ApspPolicy,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    scene: PathBuf,
    /// Index file for cut-lines, Steiner points, gateways and paths; built
    /// on the fly when absent.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value = "obstacles")]
    layers: String,
    #[arg(long, value_parser = parse_point)]
    s: Option<Point>,
    #[arg(long, value_parser = parse_point)]
    t: Option<Point>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let n = |v: &str| v.trim().parse::<i64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Point::new(n(x)?, n(y)?))
}

/// Process exit status by failure class.
enum Fail {
    Usage(String),
    Input(Error),
    Query(Error),
    Mismatch(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Input(e)
    }
}

type CmdResult = Result<(), Fail>;

fn read(path: &Path) -> Result<Vec<u8>, Fail> {
    fs::read(path).map_err(|e| Fail::Input(Error::Io(format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CmdResult {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Fail::Input(Error::Io(format!("{}: {e}", p.display())))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Fail::Input(e.into())),
    }
}

fn json_line(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    s.push(b'\n');
    s
}

fn generate(a: GenerateArgs) -> CmdResult {
    let mut params = GenerateParams::new(a.n, a.h, a.mode, a.seed);
    if let Some(p) = a.palette {
        params.palette = p
            .split(',')
            .map(|w| w.trim().parse::<Cost>().map_err(|e| Fail::Usage(format!("palette entry {w:?}: {}", e.0))))
            .collect::<Result<_, _>>()?;
    } else {
        params.palette = default_palette();
    }
    let scene = generate_scene_with(&params)?;
    emit(a.out.as_deref(), &save_scene(&scene))
}

fn build(a: BuildArgs) -> CmdResult {
    let scene = load_scene(&read(&a.scene)?)?;
    let opts = PreprocessOptions { memory_budget: a.memory_budget, ..Default::default() };
    let index = AnyIndex::build(&scene, a.graph, a.apsp, &opts)?;
    eprintln!("{} index: {} nodes, {} edges", index.engine(), index.graph().node_count(), index.graph().edge_count());
    emit(a.out.as_deref(), &save_index(&index))
}

fn query(a: QueryArgs) -> CmdResult {
    let index = load_index(&read(&a.index)?)?;
    match index.query(a.s, a.t, a.path) {
        Ok(r) => emit(None, &json_line(&result_json(&r))),
        Err(e) => {
            let _ = emit(None, &json_line(&error_json(&e)));
            Err(Fail::Query(e))
        }
    }
}

fn batch(a: BatchArgs) -> CmdResult {
    let index = load_index(&read(&a.index)?)?;
    let pairs = parse_query_batch(&read(&a.queries)?)?;
    let results = index.batch_query(&pairs, a.path);
    let failed = results.iter().filter(|r| r.is_err()).count();
    let docs: Vec<Value> = results
        .iter()
        .map(|r| match r {
            Ok(r) => result_json(r),
            Err(e) => error_json(e),
        })
        .collect();
    emit(a.out.as_deref(), &json_line(&Value::Array(docs)))?;
    if failed > 0 {
        eprintln!("{failed} of {} queries failed", pairs.len());
    }
    Ok(())
}

fn write_reproducer(path: &Path, m: &Mismatch) -> CmdResult {
    let v = serde_json::to_value(m).expect("mismatch serializes");
    emit(Some(path), &json_line(&v))
}

fn check(a: CheckArgs) -> CmdResult {
    if let Some(file) = a.replay {
        let m: Mismatch = serde_json::from_slice(&read(&file)?).map_err(|e| Fail::Input(Error::Io(e.to_string())))?;
        let again = replay(&m)?;
        for r in &again {
            println!("{}: s={:?} t={:?} expected {} got {}", r.check, r.s, r.t, r.expected, r.got);
        }
        return match again.len() {
            0 => {
                println!("reproducer passes");
                Ok(())
            }
            k => Err(Fail::Mismatch(format!("{k} mismatches reproduced"))),
        };
    }
    let cfg = CheckConfig {
        scenes: a.scenes,
        n_max: a.n_max,
        queries: a.queries,
        weighted_scenes: a.weighted_scenes,
        weighted_queries: a.weighted_queries,
        seed: a.seed,
    };
    let start = Instant::now();
    let report = run_check(&cfg)?;
    println!(
        "polygonal: {} queries over {} scenes; weighted: {} queries over {} scenes",
        report.queries, cfg.scenes, report.weighted_queries, cfg.weighted_scenes
    );
    println!(
        "weighted engine differs from the grid oracle on {} of {} pairs ({} oracle paths meet the node set)",
        report.weighted_differences, report.weighted_queries, report.weighted_conditional
    );
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    match report.minimal() {
        None => {
            println!("all checks passed");
            Ok(())
        }
        Some(m) => {
            for r in report.mismatches.iter().take(20) {
                println!("MISMATCH {}: s={:?} t={:?} expected {} got {}", r.check, r.s, r.t, r.expected, r.got);
            }
            write_reproducer(&a.reproducer, m)?;
            Err(Fail::Mismatch(format!(
                "{} mismatches; smallest case written to {}",
                report.mismatches.len(),
                a.reproducer.display()
            )))
        }
    }
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let k = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[k]
}

fn bench(a: BenchArgs) -> CmdResult {
    let sizes: Vec<usize> = a
        .sizes
        .split(',')
        .map(|s| s.trim().parse().map_err(|e| Fail::Usage(format!("size {s:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let graphs: Vec<GraphMode> =
        a.graphs.split(',').map(|g| g.parse().map_err(Fail::Usage)).collect::<Result<_, _>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let header =
        ["n", "h", "mode", "nodes", "edges", "build_ms", "median_query_us", "p99_query_us", "gateway_count_mean"];
    w.write_record(header).map_err(|e| Fail::Input(Error::Io(e.to_string())))?;
    for &n in &sizes {
        let h = (n / 32).clamp(1, 64);
        let scene = generate_scene_with(&GenerateParams::new(n, h, Mode::Polygonal, a.seed ^ n as u64))?;
        let pts = sample_free_points(&scene, 2 * a.queries, a.seed);
        for &g in &graphs {
            let start = Instant::now();
            let index = AnyIndex::build(&scene, g, a.apsp, &PreprocessOptions::default())?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;
            let AnyIndex::Polygonal(inner) = &index else { unreachable!("polygonal scene") };
            let mut times = Vec::with_capacity(a.queries);
            let mut gateways = 0usize;
            for c in pts.chunks(2) {
                let t0 = Instant::now();
                index.query(c[0], c[1], true).map_err(Fail::Query)?;
                times.push(t0.elapsed().as_secs_f64() * 1e6);
                gateways += c.iter().map(|&q| compute_gateways(q, inner, SearchMode::Cascade).len()).sum::<usize>();
            }
            times.sort_by(f64::total_cmp);
            let row = [
                n.to_string(),
                h.to_string(),
                g.as_str().to_string(),
                index.graph().node_count().to_string(),
                index.graph().edge_count().to_string(),
                format!("{build_ms:.1}"),
                format!("{:.1}", percentile(&times, 0.5)),
                format!("{:.1}", percentile(&times, 0.99)),
                format!("{:.2}", gateways as f64 / pts.len().max(1) as f64),
            ];
            w.write_record(&row).map_err(|e| Fail::Input(Error::Io(e.to_string())))?;
            eprintln!("n={n} {}: build {build_ms:.0} ms", g.as_str());
        }
    }
    let bytes = w.into_inner().map_err(|e| Fail::Input(Error::Io(e.to_string())))?;
    emit(a.out.as_deref(), &bytes)
}

fn render(a: RenderArgs) -> CmdResult {
    let layers: Vec<Layer> = parse_layers(&a.layers).map_err(Fail::Usage)?;
    let scene = load_scene(&read(&a.scene)?)?;
    let needs_index =
        layers.iter().any(|l| matches!(l, Layer::Cutlines | Layer::SteinerPoints | Layer::Gateways | Layer::Path));
    let mut overlay = Overlay::default();
    if needs_index {
        let index = match &a.index {
            Some(p) => load_index(&read(p)?)?,
            None => AnyIndex::build(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand, &PreprocessOptions::default())?,
        };
        overlay = Overlay::from_index(&index);
        let ends: Vec<Point> = a.s.into_iter().chain(a.t).collect();
        if layers.contains(&Layer::Gateways) {
            for &q in &ends {
                let set = match &index {
                    AnyIndex::Polygonal(i) => i.gateways(q),
                    AnyIndex::Weighted(i) => i.gateways(q),
                };
                overlay.gateways.push(set.map_err(Fail::Query)?);
            }
        }
        if layers.contains(&Layer::Path) {
            let (Some(s), Some(t)) = (a.s, a.t) else {
                return Err(Fail::Usage("the path layer needs --s and --t".into()));
            };
            overlay.path = Some(index.query(s, t, true).map_err(Fail::Query)?.path);
        }
    }
    emit(a.out.as_deref(), render_svg(&scene, &overlay, &layers).as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        eprintln!("thread pool: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Batch(a) => batch(a),
        Command::Check(a) => check(a),
        Command::Bench(a) => bench(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Input(e)) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(2)
        }
        Err(Fail::Query(e)) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(3)
        }
        Err(Fail::Mismatch(m)) => {
            eprintln!("{m}");
            ExitCode::from(4)
        }
    }
}
