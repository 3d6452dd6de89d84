mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use dceg::graph_transform::algebra::agraph_root;
use dceg::graph_transform::{
    ceg_at, compute_positions, direct_ceg_at, isomorphic, refines, tree_graph, ColouredGraph, NodeKind, Ntdceg,
    PositionMode,
};
use dceg::markov::{classify, predict, project, stationary, start_states, vec_mat};
use dceg::query::*;
use dceg::staging::check_time_homogeneous;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn model(seed: u64) -> Ntdceg {
    let mut rng = StdRng::seed_from_u64(seed);
    random_model(seed, RandomConfig::draw(&mut rng))
}

fn kind_a_model(seed: u64) -> Ntdceg {
    let mut rng = StdRng::seed_from_u64(seed);
    let cfg = RandomConfig { kind_b: false, invariant: false, ..RandomConfig::draw(&mut rng) };
    random_model(seed, cfg)
}

#[test]
fn positions_match_language_oracle() {
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..200 {
        let st = random_staged_tree(&mut rng, 60);
        let mut g = tree_graph(&st);
        assert_eq!(compute_positions(&g, PositionMode::Position), oracle_positions(&g, PositionMode::Position));
        for n in &mut g.nodes {
            n.slice = rng.random_range(0..3);
        }
        for mode in [PositionMode::TPosition(1), PositionMode::Infinity] {
            let got = compute_positions(&g, mode);
            assert_eq!(got, oracle_positions(&g, mode), "{mode:?}");
            assert!(refines(&got, &compute_positions(&g, PositionMode::Position)));
        }
    }
}

#[test]
fn projection_matches_walk_oracle() {
    for seed in 0..100 {
        let m = model(seed);
        let p = project(&m).unwrap();
        let (names, mu, mat) = oracle_projection(&m).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(names, p.names, "seed {seed}");
        for (a, b) in mu.iter().zip(&p.mu) {
            assert!((a - b).abs() <= 1e-12, "seed {seed}");
        }
        for (ra, rb) in mat.iter().zip(&p.m) {
            assert!((rb.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "seed {seed}");
            for (a, b) in ra.iter().zip(rb) {
                assert!((a - b).abs() <= 1e-12, "seed {seed}");
            }
        }
    }
}

#[test]
fn finite_horizon_graphs_match_direct_contraction() {
    for seed in 100..150 {
        let m = model(seed);
        for t in 0..=4 {
            let a = ceg_at(&m, t).unwrap().to_coloured();
            let b = direct_ceg_at(&m, t).unwrap();
            isomorphic(&a, agraph_root(&a), &b, 0).unwrap_or_else(|e| panic!("seed {seed}, t={t}: {e}"));
        }
    }
}

#[test]
fn legend_holds_on_random_models() {
    for seed in 200..250 {
        let m = model(seed);
        let lo = 2 * m.n as i32 - m.eta;
        for t in lo..=lo + 2 {
            let r = legend_map(&m, t).unwrap();
            assert!(r.holds(), "seed {seed}, T={t}: {:?}", r.failures.first());
        }
    }
}

#[test]
fn builds_are_finite_and_homogeneous() {
    for seed in 300..400 {
        let m = model(seed);
        let ext = &m.ext.st;
        assert!(check_time_homogeneous(ext, m.n - 1, m.n as i32 - 1).unwrap().holds, "seed {seed}");
        assert!(m.position_count() <= situation_count(ext), "seed {seed}");
        assert!(m.graph.validate().is_ok());
        for (v, &w) in m.position_of.iter().enumerate() {
            if !m.st.tree.is_leaf(v) {
                assert_eq!(m.graph.nodes[w].colour, m.st.stage(v));
            }
        }
    }
}

#[test]
fn positive_kind_a_chains_are_ergodic() {
    for seed in 400..450 {
        let m = kind_a_model(seed);
        let p = project(&m).unwrap();
        assert!(!p.has_inf());
        let c = classify(&p.m);
        assert!(c.ergodic && c.irreducible, "seed {seed}: {c:?}");
        let pi = stationary(&p, None).unwrap();
        let back = vec_mat(&pi, &p.m);
        assert!(pi.iter().zip(&back).all(|(a, b)| (a - b).abs() <= 1e-10));
        assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

fn random_context(rng: &mut StdRng, m: &Ntdceg, vars: &Variables) -> Context {
    let at = rng.random_range(1..=m.n as i32 + 1);
    let names: Vec<&String> = vars.keys().collect();
    let lo = if m.eta == 0 { -1 } else { 0 };
    let constraints = (0..rng.random_range(0..=3))
        .map(|_| {
            let var = names[rng.random_range(0..names.len())].clone();
            let allowed = rng.random_bool(0.7).then(|| {
                let set: BTreeSet<String> = vars[&var].iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
                set
            });
            Constraint { occ: Occurrence { var, slice: SliceExpr::Abs(rng.random_range(lo..at)) }, allowed }
        })
        .collect();
    Context { at, constraints }
}

#[test]
fn events_match_path_filter() {
    let mut rng = StdRng::seed_from_u64(5);
    for seed in 500..560 {
        let m = model(seed);
        let vars = label_set_variables(&m);
        for _ in 0..5 {
            let ctx = random_context(&mut rng, &m, &vars);
            let got = events_to_positions(&m, &vars, &ctx).unwrap();
            let want = oracle_events(&m, &vars, &ctx);
            assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>(), "seed {seed}: {ctx:?}");
            for (a, b) in got.values().zip(want.values()) {
                assert!((a - b).abs() <= 1e-9, "seed {seed}");
            }
        }
    }
}

fn walks(g: &ColouredGraph, from: usize, len: usize) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::from([vec![]]);
    let mut front = vec![(from, Vec::<String>::new())];
    for _ in 0..len {
        let mut next = Vec::new();
        for (v, w) in front {
            for e in g.out_edges(v) {
                let mut w2 = w.clone();
                w2.push(format!("{}:{}", e.label, g.nodes[e.to].name));
                out.insert(w2.clone());
                next.push((e.to, w2));
            }
        }
        front = next;
    }
    out
}

#[test]
fn pruning_keeps_the_future() {
    for seed in 600..640 {
        let m = model(seed);
        for &h in &m.heads {
            let pr = prune(&m, &BTreeSet::from([h]));
            let local = pr.local(h).unwrap();
            assert_eq!(walks(&pr.graph, local, 6), walks(&m.graph, h, 6), "seed {seed}");
            let again = prune_graph(&pr.graph, &BTreeSet::from([local]));
            assert_eq!(again.graph, pr.graph);
        }
        assert_eq!(prune(&m, &BTreeSet::from([m.root])).graph, m.graph);
    }
}

#[test]
fn root_history_is_empty() {
    for seed in 700..720 {
        let m = model(seed);
        for k in 0..3 {
            assert_eq!(xi_c_model(&m, m.root, k).unwrap(), BTreeSet::from([vec![]]));
        }
        // every head history is nonempty and only mentions the template's labels
        for &h in &m.heads {
            let xi = xi_c_model(&m, h, m.n - 1).unwrap();
            assert!(!xi.is_empty() && xi.iter().all(|s| !s.is_empty()));
        }
    }
}

fn near(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_rows_are_distributions(seed in any::<u64>()) {
        let p = project(&model(seed)).unwrap();
        prop_assert!((p.mu.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for row in &p.m {
            prop_assert!(row.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn predictions_compose(seed in any::<u64>(), t in 0i32..4, s1 in 0usize..3, s2 in 0usize..3) {
        let m = model(seed);
        let t = t.min(m.n as i32);
        let p = project(&m).unwrap();
        let k = start_states(&m, t).unwrap().len();
        let mut rng = StdRng::seed_from_u64(seed ^ 1);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        let x: Vec<f64> = w.iter().map(|a| a / total).collect();
        let direct = predict(&m, &p, &x, t, s1 + s2).unwrap();
        let first = predict(&m, &p, &x, t, s1).unwrap();
        let two = predict(&m, &p, &first.p, t + s1 as i32, s2).unwrap();
        prop_assert_eq!(&direct.names, &two.names);
        prop_assert!(near(&direct.p, &two.p));
        prop_assert!((direct.p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn entry_distribution_matches_mu(seed in any::<u64>()) {
        let m = model(seed);
        prop_assume!(m.eta == 1);
        let p = project(&m).unwrap();
        let start = start_states(&m, 0).unwrap();
        let mut x = vec![0.0; start.len()];
        x[start.iter().position(|s| *s == dceg::markov::State::Vertex(m.root)).unwrap()] = 1.0;
        let got = predict(&m, &p, &x, 0, m.n - 1).unwrap();
        prop_assert!(near(&got.p, &p.mu));
    }

    #[test]
    fn position_partitions_are_nested(seed in any::<u64>()) {
        let m = model(seed);
        let g = tree_graph(&m.ext.st);
        let inf = compute_positions(&g, PositionMode::Infinity);
        let tpos = compute_positions(&g, PositionMode::TPosition(m.n as i32 - 1));
        let pos = compute_positions(&g, PositionMode::Position);
        prop_assert!(refines(&inf, &tpos));
        prop_assert!(refines(&tpos, &pos));
        let sinks = g.nodes.iter().filter(|n| n.kind == NodeKind::Sink).map(|_| ()).count();
        prop_assert!(sinks > 0);
    }
}

#[test]
fn stationary_of_absorbing_chain_is_the_sink() {
    let mut found = 0;
    for seed in 800..840 {
        let m = model(seed);
        let p = project(&m).unwrap();
        if !p.has_inf() {
            continue;
        }
        found += 1;
        let pi = stationary(&p, None).unwrap();
        assert!((pi[0] - 1.0).abs() < 1e-9, "seed {seed}: {pi:?}");
        assert_eq!(classify(&p.m).absorbing, [0]);
    }
    assert!(found > 5);
}

#[test]
fn stage_blocks_cover_the_positions() {
    for seed in 900..930 {
        let m = model(seed);
        let blocks = m.stage_blocks();
        let covered: usize = blocks.values().map(Vec::len).sum();
        assert_eq!(covered, m.position_count());
        let labels: BTreeMap<usize, BTreeSet<String>> = blocks
            .iter()
            .map(|(&k, ws)| (k, m.graph.out_edges(ws[0]).map(|e| e.key.clone()).collect()))
            .collect();
        for (k, ws) in &blocks {
            for &w in ws {
                let l: BTreeSet<String> = m.graph.out_edges(w).map(|e| e.key.clone()).collect();
                assert_eq!(&l, &labels[k]);
            }
        }
    }
}
