use l1gate::cascade::SearchMode;
use l1gate::gateway::compute_gateways;
use l1gate::geom::{l1_length, segment_avoids_interior};
use l1gate::oracle::UnweightedOracle;
use l1gate::query::{polyline_length, preprocess_with, PreprocessOptions};
use l1gate::scene::{generate_scene, sample_free_points, Mode};
use l1gate::{preprocess, ApspPolicy, GraphMode, Rational};

#[test]
fn lengths_match_oracle_on_fuzz_scenes() {
    for seed in 0..24u64 {
        let n = 8 + (seed as usize * 7) % 50;
        let h = 1 + (seed as usize) % 5;
        let scene = generate_scene(n, h.min(n / 3), Mode::Polygonal, seed).unwrap();
        let oracle = UnweightedOracle::new(&scene);
        let ge = preprocess(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand).unwrap();
        let go = preprocess(&scene, GraphMode::GOld, ApspPolicy::OnDemand).unwrap();
        let pts = sample_free_points(&scene, 60, seed);
        for pair in pts.chunks(2) {
            let (s, t) = (pair[0], pair[1]);
            let want = oracle.query(s, t).unwrap().length;
            let r = ge.query(s, t, true).unwrap();
            assert_eq!(r.length, want, "G_E seed {seed} {s:?} -> {t:?}");
            assert_eq!(go.query(s, t, false).unwrap().length, want, "G_old seed {seed} {s:?} -> {t:?}");
            assert_eq!(polyline_length(&r.path), r.length);
            assert!(r.length >= Rational::from_int(l1_length(s, t) as i128));
            for w in r.path.windows(2) {
                assert!(scene.obstacles.iter().all(|p| segment_avoids_interior(&w[0], &w[1], p)));
            }
        }
    }
}

#[test]
fn full_and_on_demand_agree() {
    for seed in 0..6u64 {
        let scene = generate_scene(24, 3, Mode::Polygonal, 100 + seed).unwrap();
        let full = preprocess(&scene, GraphMode::GEnhanced, ApspPolicy::Full).unwrap();
        let lazy = preprocess(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand).unwrap();
        let pts = sample_free_points(&scene, 40, seed);
        for pair in pts.chunks(2) {
            let a = full.query(pair[0], pair[1], true).unwrap();
            let b = lazy.query(pair[0], pair[1], true).unwrap();
            assert_eq!(a.length, b.length);
            assert_eq!(a.kind, b.kind);
        }
    }
}

#[test]
fn cascade_and_binary_gateways_agree() {
    for seed in 0..6u64 {
        let scene = generate_scene(60, 4, Mode::Polygonal, 200 + seed).unwrap();
        let idx = preprocess(&scene, GraphMode::GEnhanced, ApspPolicy::OnDemand).unwrap();
        let naive = preprocess_with(
            &scene,
            GraphMode::GEnhanced,
            ApspPolicy::OnDemand,
            &PreprocessOptions { search: SearchMode::Binary, ..Default::default() },
        )
        .unwrap();
        for q in sample_free_points(&scene, 200, seed) {
            let a = compute_gateways(q, &idx, SearchMode::Cascade);
            let b = compute_gateways(q, &naive, SearchMode::Binary);
            assert_eq!(a, b);
            let levels = idx.tree.as_ref().unwrap().super_levels() as usize;
            assert!(a.v1.len() <= 8);
            assert!(a.v2.len() <= 4 * levels);
            for g in a.entries() {
                assert_eq!(polyline_length(&g.polyline), g.length);
                for w in g.polyline.windows(2) {
                    assert!(scene.obstacles.iter().all(|p| segment_avoids_interior(&w[0], &w[1], p)));
                }
            }
        }
    }
}
