use geochrome::coloring::{
    max_colorable_anchor, max_colorable_exact, max_colorable_greedy, max_colorable_sweep_1d,
    validate_coloring, GreedyOrder, Method, DEFAULT_COMPONENT_CAP,
};
use geochrome::geo_graph::{build_graph, GeoGraph};
use geochrome::point_process::{sample_binomial, sample_poisson, PointSet, SeedSpec};
use geochrome::theory;
use geochrome::Error;
use proptest::prelude::*;

/// Largest properly colorable subset by enumerating all `(k+1)^n` assignments.
fn brute_force(g: &GeoGraph, k: u32) -> usize {
    let n = g.n();
    let base = k as usize + 1;
    let mut assignment = vec![0usize; n];
    let mut best = 0;
    loop {
        let proper = g
            .edges()
            .iter()
            .all(|&(u, v)| assignment[u] == 0 || assignment[u] != assignment[v]);
        if proper {
            best = best.max(assignment.iter().filter(|&&c| c != 0).count());
        }
        let mut i = 0;
        while i < n {
            assignment[i] += 1;
            if assignment[i] < base {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

fn exact(g: &GeoGraph, k: u32) -> usize {
    max_colorable_exact(g, k, DEFAULT_COMPONENT_CAP).unwrap().colored_count
}

/// Small random instance with a chosen mean degree.
fn instance(dim: usize, n: usize, degree: f64, seed: u64) -> PointSet {
    let side = (n as f64 * theory::v_d(dim, 1.0) / degree).powf(1.0 / dim as f64);
    let unit = sample_binomial(dim, n, SeedSpec::new(seed, 0)).unwrap();
    let pts: Vec<Vec<f64>> = unit.iter().map(|p| p.iter().map(|x| x * side).collect()).collect();
    PointSet::from_points(dim, side, pts).unwrap()
}

#[test]
fn exact_matches_brute_force() {
    for seed in 0..300u64 {
        let dim = 1 + (seed % 3) as usize;
        let n = 1 + (seed % 8) as usize;
        let k = 1 + (seed % 3) as u32;
        let ps = instance(dim, n, 1.0 + (seed % 5) as f64, seed);
        let g = build_graph(&ps, 1.0).unwrap();
        let c = max_colorable_exact(&g, k, DEFAULT_COMPONENT_CAP).unwrap();
        assert!(validate_coloring(&g, &c).unwrap());
        assert!(c.is_optimal);
        assert_eq!(c.colored_count, brute_force(&g, k), "seed {seed}");
    }
}

#[test]
fn exact_handles_dense_pieces() {
    // Cliques, cycles and wheels where the k-core does not vanish.
    let k5: Vec<(usize, usize)> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
    let g = GeoGraph::from_edges(5, 1.0, &k5).unwrap();
    for k in 0..=6 {
        assert_eq!(exact(&g, k), brute_force(&g, k).min(5));
    }
    let c7: Vec<(usize, usize)> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
    let g = GeoGraph::from_edges(7, 1.0, &c7).unwrap();
    assert_eq!(exact(&g, 2), 6);
    assert_eq!(exact(&g, 3), 7);
    let mut wheel = c7.clone();
    wheel.extend((0..7).map(|i| (i, 7)));
    let g = GeoGraph::from_edges(8, 1.0, &wheel).unwrap();
    for k in 1..=4 {
        assert_eq!(exact(&g, k), brute_force(&g, k), "wheel k={k}");
    }
}

#[test]
fn exact_reports_oversized_pieces() {
    let edges: Vec<(usize, usize)> = (0..30).flat_map(|u| (u + 1..30).map(move |v| (u, v))).collect();
    let g = GeoGraph::from_edges(30, 1.0, &edges).unwrap();
    assert!(matches!(
        max_colorable_exact(&g, 3, 28),
        Err(Error::ComponentTooLarge { size: 30, cap: 28 })
    ));
    // A clique is all core, but with k >= its size nothing needs solving.
    assert_eq!(exact(&g, 30), 30);
}

#[test]
fn exact_scales_to_sparse_plane_samples() {
    for seed in 0..20 {
        let ps = sample_poisson(2, 0.6, 30.0, SeedSpec::new(seed, 0)).unwrap();
        let g = build_graph(&ps, 1.0).unwrap();
        let c = max_colorable_exact(&g, 4, DEFAULT_COMPONENT_CAP).unwrap();
        assert!(validate_coloring(&g, &c).unwrap());
        let greedy = max_colorable_greedy(&g, 4, GreedyOrder::DegreeAsc);
        assert!(greedy.colored_count <= c.colored_count);
    }
}

#[test]
fn greedy_never_beats_exact_on_the_line() {
    for seed in 0..500u64 {
        let ps = sample_poisson(1, 1.0, 15.0, SeedSpec::new(seed, 1)).unwrap();
        let g = build_graph(&ps, 1.0).unwrap();
        let k = 1 + (seed % 3) as u32;
        let best = max_colorable_exact(&g, k, 64).unwrap().colored_count;
        for order in [GreedyOrder::Index, GreedyOrder::DegreeAsc, GreedyOrder::Random(seed)] {
            let c = max_colorable_greedy(&g, k, order);
            assert!(validate_coloring(&g, &c).unwrap());
            assert!(c.colored_count <= best);
        }
        assert_eq!(max_colorable_sweep_1d(&ps, 1.0, k).unwrap().colored_count, best);
    }
}

#[test]
fn anchor_colorings_are_proper_in_the_plane() {
    for seed in 0..200u64 {
        let lambda = [0.5, 1.0, 3.0][(seed % 3) as usize];
        let k = [1, 4, 9, 16, 40][(seed % 5) as usize];
        let s = [0.2, 0.5, 1.0, 2.5][(seed % 4) as usize];
        let ps = sample_poisson(2, lambda, 8.0, SeedSpec::new(seed, 2)).unwrap();
        let g = build_graph(&ps, 1.0).unwrap();
        let c = max_colorable_anchor(&ps, 1.0, k, s).unwrap();
        assert_eq!(c.method, Method::Anchor);
        assert!(validate_coloring(&g, &c).unwrap(), "seed {seed}");
        if let Ok(best) = max_colorable_exact(&g, k, DEFAULT_COMPONENT_CAP) {
            assert!(c.colored_count <= best.colored_count);
        }
    }
}

#[test]
fn anchor_is_proper_at_other_radii() {
    for seed in 0..50u64 {
        let r = 0.3 + 0.1 * (seed % 7) as f64;
        let ps = sample_poisson(2, 2.0, 5.0, SeedSpec::new(seed, 3)).unwrap();
        let g = build_graph(&ps, r).unwrap();
        let c = max_colorable_anchor(&ps, r, 8, 0.7).unwrap();
        assert!(validate_coloring(&g, &c).unwrap());
    }
}

#[test]
fn anchor_mean_on_the_line_matches_truncated_poisson() {
    // Anchor cells on the line are intervals of length 2s, exactly the ball
    // volume, so away from the cube edge each anchor colors min(Po(2 lambda s), K).
    let (lambda, k, s, t) = (1.5, 4, 0.75, 300.0);
    let trials = 200;
    let ratios: Vec<f64> = (0..trials)
        .map(|i| {
            let ps = sample_poisson(1, lambda, t, SeedSpec::new(77, i)).unwrap();
            max_colorable_anchor(&ps, 1.0, k, s).unwrap().colored_count as f64 / (lambda * t)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / trials as f64;
    let sd = (ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    let target = theory::anchor_ratio(1, lambda, k, s).unwrap();
    assert!((mean - target).abs() < 4.0 * sd / (trials as f64).sqrt() + 0.005, "{mean} vs {target}");
}

#[test]
fn anchor_with_too_few_colors_warns() {
    let ps = PointSet::from_points(2, 4.0, [[1.0, 1.0], [3.0, 3.0]]).unwrap();
    let c = max_colorable_anchor(&ps, 1.0, 3, 1.0).unwrap();
    assert_eq!(c.colored_count, 0);
    assert!(c.warning.is_some());
}

fn strategy_instance(dim: usize) -> impl Strategy<Value = PointSet> {
    (1usize..12, 0.5f64..3.0, any::<u64>()).prop_map(move |(n, degree, seed)| instance(dim, n, degree, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn subset_removal_never_increases_count(ps in strategy_instance(2), k in 1u32..4, mask: u16) {
        let g = build_graph(&ps, 1.0).unwrap();
        let keep: Vec<usize> = (0..ps.len()).filter(|i| mask >> i & 1 == 1).collect();
        let sub = build_graph(&ps.select(&keep), 1.0).unwrap();
        prop_assert!(exact(&sub, k) <= exact(&g, k));
    }

    #[test]
    fn splitting_is_subadditive(ps in strategy_instance(2), k in 1u32..4, mask: u16) {
        let g = build_graph(&ps, 1.0).unwrap();
        let a: Vec<usize> = (0..ps.len()).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..ps.len()).filter(|i| mask >> i & 1 == 0).collect();
        let na = exact(&build_graph(&ps.select(&a), 1.0).unwrap(), k);
        let nb = exact(&build_graph(&ps.select(&b), 1.0).unwrap(), k);
        prop_assert!(exact(&g, k) <= na + nb);
    }

    #[test]
    fn larger_radius_never_helps(ps in strategy_instance(1), k in 1u32..4, grow in 1.0f64..2.0) {
        let small = exact(&build_graph(&ps, 1.0).unwrap(), k);
        let large = exact(&build_graph(&ps, grow).unwrap(), k);
        prop_assert!(large <= small);
    }

    #[test]
    fn one_point_moves_change_count_by_at_most_one(ps in strategy_instance(2), k in 1u32..4, idx: usize, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let i = idx % ps.len();
        let side = ps.side();
        let moved = ps.replace_point(i, &[u * side, v * side]).unwrap();
        let a = exact(&build_graph(&ps, 1.0).unwrap(), k) as i64;
        let b = exact(&build_graph(&moved, 1.0).unwrap(), k) as i64;
        prop_assert!((a - b).abs() <= 1);
    }

    #[test]
    fn more_colors_never_hurt(ps in strategy_instance(2), k in 0u32..4) {
        let g = build_graph(&ps, 1.0).unwrap();
        let lo = exact(&g, k);
        let hi = exact(&g, k + 1);
        prop_assert!(lo <= hi && hi <= lo + g.n());
        prop_assert!(hi <= ps.len());
    }

    #[test]
    fn sweep_is_optimal(ps in strategy_instance(1), k in 1u32..4) {
        let g = build_graph(&ps, 1.0).unwrap();
        let sweep = max_colorable_sweep_1d(&ps, 1.0, k).unwrap();
        prop_assert!(validate_coloring(&g, &sweep).unwrap());
        prop_assert_eq!(sweep.colored_count, exact(&g, k));
    }
}
