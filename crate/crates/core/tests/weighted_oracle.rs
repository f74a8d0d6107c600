use l1gate::cascade::SearchMode;
use l1gate::oracle::WeightedOracle;
use l1gate::query::{preprocess_with, PreprocessOptions};
use l1gate::scene::{generate_scene, generate_scene_with, sample_free_points, GenerateParams, Mode};
use l1gate::weighted::{polyline_weighted_length, preprocess_weighted, preprocess_weighted_with};
use l1gate::{ApspPolicy, Cost, GraphMode, Rational};

#[test]
fn lengths_match_grid_oracle() {
    for seed in 0..16u64 {
        let n = 8 + (seed as usize * 11) % 40;
        let h = (1 + seed as usize % 4).min(n / 4);
        let scene = generate_scene(n, h, Mode::RectilinearWeighted, seed).unwrap();
        let oracle = WeightedOracle::new(&scene).unwrap();
        let idx = preprocess_weighted(&scene, ApspPolicy::OnDemand).unwrap();
        let pts = sample_free_points(&scene, 30, seed);
        for pair in pts.chunks(2) {
            let (s, t) = (pair[0], pair[1]);
            let want = oracle.query(s, t).unwrap().length;
            let r = idx.query(s, t, true).unwrap();
            assert_eq!(r.length, want, "seed {seed} {s:?} -> {t:?}");
            assert_eq!(polyline_weighted_length(&r.path, &scene), Cost::Finite(r.length.clone()));
            assert_eq!(r.path.first().unwrap(), &s.into());
            assert_eq!(r.path.last().unwrap(), &t.into());
        }
    }
}

#[test]
fn full_on_demand_and_binary_agree() {
    for seed in 0..4u64 {
        let scene = generate_scene(32, 3, Mode::RectilinearWeighted, 50 + seed).unwrap();
        let full = preprocess_weighted(&scene, ApspPolicy::Full).unwrap();
        let lazy = preprocess_weighted_with(
            &scene,
            ApspPolicy::OnDemand,
            &PreprocessOptions { search: SearchMode::Binary, ..Default::default() },
        )
        .unwrap();
        for q in sample_free_points(&scene, 60, seed) {
            assert_eq!(full.gateways_with(q, SearchMode::Cascade), lazy.gateways_with(q, SearchMode::Binary));
        }
        for pair in sample_free_points(&scene, 30, seed + 9).chunks(2) {
            let a = full.query(pair[0], pair[1], false).unwrap();
            let b = lazy.query(pair[0], pair[1], false).unwrap();
            assert_eq!((a.length, a.kind), (b.length, b.kind));
        }
    }
}

#[test]
fn zero_weights_give_plain_l1() {
    let mut params = GenerateParams::new(24, 3, Mode::RectilinearWeighted, 7);
    params.palette = vec![Cost::Finite(Rational::ZERO)];
    let scene = generate_scene_with(&params).unwrap();
    let idx = preprocess_weighted(&scene, ApspPolicy::OnDemand).unwrap();
    for pair in sample_free_points(&scene, 40, 3).chunks(2) {
        let l1 = (pair[0].x - pair[1].x).abs() + (pair[0].y - pair[1].y).abs();
        assert_eq!(idx.query(pair[0], pair[1], false).unwrap().length, Rational::from_int(l1));
    }
}

#[test]
fn infinite_weights_match_unweighted_engine() {
    for seed in 0..6u64 {
        let base = generate_scene(28, 3, Mode::RectilinearWeighted, 300 + seed).unwrap();
        let scene = base.with_uniform_weight(Cost::Infinite);
        let weighted = preprocess_weighted(&scene, ApspPolicy::OnDemand).unwrap();
        let plain = preprocess_with(
            &scene,
            GraphMode::GEnhanced,
            ApspPolicy::OnDemand,
            &PreprocessOptions { relaxed: true, ..Default::default() },
        )
        .unwrap();
        for pair in sample_free_points(&scene, 40, seed).chunks(2) {
            let a = weighted.query(pair[0], pair[1], false).unwrap().length;
            let b = plain.query(pair[0], pair[1], false).unwrap().length;
            assert_eq!(a, b, "seed {seed} {:?} -> {:?}", pair[0], pair[1]);
        }
    }
}

#[test]
fn raising_one_weight_never_shortens_a_path() {
    let ladder: Vec<Cost> = ["0", "1/3", "1", "5/2", "inf"].iter().map(|w| w.parse().unwrap()).collect();
    for seed in 0..8u64 {
        let base = generate_scene(20 + 4 * seed as usize, 3, Mode::RectilinearWeighted, 700 + seed).unwrap();
        let obstacle = seed as usize % base.obstacles.len();
        let pairs: Vec<_> = sample_free_points(&base, 24, seed).chunks(2).map(|c| (c[0], c[1])).collect();
        let mut previous: Option<Vec<Rational>> = None;
        for w in &ladder {
            let mut scene = base.clone();
            scene.weights.as_mut().unwrap()[obstacle] = w.clone();
            let idx = preprocess_weighted(&scene, ApspPolicy::OnDemand).unwrap();
            let answers: Vec<Rational> = pairs.iter().map(|&(s, t)| idx.query(s, t, false).unwrap().length).collect();
            if let Some(prev) = &previous {
                for (k, (a, b)) in prev.iter().zip(&answers).enumerate() {
                    assert!(a <= b, "seed {seed} obstacle {obstacle} weight {w}: {:?} went from {a} to {b}", pairs[k]);
                }
            }
            previous = Some(answers);
        }
    }
}
