//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Criterion 4 checks the printed radicalisation chain, whose w12 row sums to
//! 0.802. That check cannot pass and is listed in EXPECTED_FAILURES; the
//! runner exits non-zero on any other failure.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use dceg::graph_transform::algebra::agraph_root;
use dceg::graph_transform::{
    ceg_at, compute_positions, direct_ceg, direct_ceg_at, isomorphic, NodeKind, Ntdceg, PositionMode,
};
use dceg::markov::{classify, predict_with, project};
use dceg::query::{legend_map, verify_ci, CiStatement};
use dceg::staging::check_time_homogeneous;
use rand::rngs::StdRng;
use rand::SeedableRng;

const EXPECTED_FAILURES: &[usize] = &[4];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random(seed: u64) -> Ntdceg {
    let mut rng = StdRng::seed_from_u64(seed);
    random_model(seed, RandomConfig::draw(&mut rng))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let g = direct_ceg(&static_prison());
    let positions = g.nodes.iter().filter(|n| n.kind == NodeKind::Position).count();
    ensure(positions == 6 && sinks(&g) == 1, || format!("{positions} positions, {} sinks", sinks(&g)))?;
    // w0 -> three network positions -> {non-radical, radical} -> sink
    let mut want = dceg::graph_transform::ColouredGraph::new();
    let node = |g: &mut dceg::graph_transform::ColouredGraph, c: Option<usize>| {
        g.add_node(dceg::graph_transform::Node {
            name: String::new(),
            colour: c,
            slice: 0,
            kind: if c.is_some() { NodeKind::Position } else { NodeKind::Sink },
        })
    };
    let w: Vec<usize> = (0..6).map(|i| node(&mut want, Some(i))).collect();
    let sink = node(&mut want, None);
    let mut edge = |from, to, l: &str| {
        want.add_edge(dceg::graph_transform::Edge {
            from,
            to,
            label: l.into(),
            key: l.into(),
            marker: dceg::graph_transform::Marker::Plain,
            prob: None,
        });
    };
    for (i, n) in ["s", "f", "i"].into_iter().enumerate() {
        edge(w[0], w[i + 1], n);
        edge(w[i + 1], w[4], "r");
        edge(w[i + 1], w[4], "v");
        edge(w[i + 1], w[5], "a");
    }
    for l in ["n", "t"] {
        edge(w[4], sink, l);
        edge(w[5], sink, l);
    }
    isomorphic(&g, 0, &want, 0)?;
    let dt = start.elapsed();
    ensure(dt.as_secs_f64() < 1.0, || format!("took {dt:?}"))?;
    Ok(format!("6 positions + w_inf, {} edges, isomorphic, {dt:?}", g.edges.len()))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let m = radicalisation().ntdceg;
    let dt = start.elapsed();
    let names: Vec<String> = (0..28).map(|i| format!("w{i}")).collect();
    let got: Vec<&str> = m.graph.nodes.iter().filter(|n| n.kind == NodeKind::Position).map(|n| n.name.as_str()).collect();
    ensure(got == names.iter().map(String::as_str).collect::<Vec<_>>(), || format!("positions {got:?}"))?;
    ensure(m.sink.is_some(), || "no w_inf".into())?;
    let mut sizes: Vec<usize> = m.stage_blocks().values().map(Vec::len).collect();
    sizes.sort();
    let want = [1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 3, 3];
    ensure(sizes == want, || format!("block sizes {sizes:?}"))?;
    ensure(dt.as_secs_f64() < 5.0, || format!("took {dt:?}"))?;
    Ok(format!("w0..w27 + w_inf, 15 stages sized {sizes:?}, {dt:?}"))
}

fn c3() -> Outcome {
    let p = project(&radicalisation().ntdceg).map_err(|e| e.to_string())?;
    let want = ["w_inf", "w10", "w11", "w12", "w13", "w14", "w15"];
    ensure(p.names == want, || format!("states {:?}", p.names))?;
    Ok(format!("states {}", p.names.join(" ")))
}

const PRINTED_MU: [f64; 7] = [0.012, 0.784, 0.141, 0.042, 0.007, 0.007, 0.007];
const PRINTED_M: [[f64; 7]; 7] = [
    [1.000, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000],
    [0.057, 0.657, 0.181, 0.067, 0.006, 0.008, 0.024],
    [0.063, 0.283, 0.451, 0.133, 0.002, 0.020, 0.048],
    [0.068, 0.187, 0.451, 0.002, 0.002, 0.020, 0.072],
    [0.154, 0.200, 0.057, 0.029, 0.392, 0.112, 0.056],
    [0.154, 0.086, 0.143, 0.057, 0.168, 0.280, 0.112],
    [0.154, 0.057, 0.143, 0.086, 0.112, 0.280, 0.168],
];
const PRINTED_NEXT: [f64; 7] = [0.15, 0.06, 0.14, 0.09, 0.11, 0.28, 0.17];

fn c4() -> Outcome {
    let start = Instant::now();
    let m: Vec<Vec<f64>> = PRINTED_M.iter().map(|r| r.to_vec()).collect();
    let mut e15 = vec![0.0; 7];
    e15[6] = 1.0;
    let next = predict_with(&m, &e15, 1).map_err(|e| e.to_string())?;
    let dev = next.iter().zip(PRINTED_NEXT).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut problems = Vec::new();
    if dev > 0.005 {
        problems.push(format!("prediction off by {dev:.4}"));
    }
    let labels = ["w_inf", "w10", "w11", "w12", "w13", "w14", "w15"];
    for (r, l) in PRINTED_M.iter().zip(labels) {
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > 0.001 {
            problems.push(format!("row {l} sums to {s:.3}"));
        }
    }
    let mu: f64 = PRINTED_MU.iter().sum();
    if (mu - 1.0).abs() > 0.001 {
        problems.push(format!("mu sums to {mu:.3}"));
    }
    // the same chain computed from the model, in the printed state order
    let p = project(&radicalisation().ntdceg).map_err(|e| e.to_string())?;
    let idx: Vec<usize> = REFERENCE_STATE_ORDER.iter().map(|n| p.index_of(n).unwrap()).collect();
    let mut model_dev: f64 = 0.0;
    for (i, &a) in idx.iter().enumerate() {
        if i == 3 {
            continue;
        }
        for (j, &b) in idx.iter().enumerate() {
            model_dev = model_dev.max((p.m[a][b] - PRINTED_M[i][j]).abs());
        }
    }
    let dt = start.elapsed();
    let summary = format!(
        "prediction from w15 within {dev:.4}, mu sums to {mu:.3}, model M within {model_dev:.4} of the printed rows except w12, {dt:?}"
    );
    if problems.is_empty() && dt.as_secs_f64() < 1.0 {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join(", ")))
    }
}

fn c5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows: f64 = 0.0;
    for seed in 0..100 {
        let m = random(seed);
        let p = project(&m).map_err(|e| e.to_string())?;
        let (names, mu, mat) = oracle_projection(&m).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(names == p.names, || format!("seed {seed}: states differ"))?;
        for (a, b) in mu.iter().zip(&p.mu) {
            worst = worst.max((a - b).abs());
        }
        for (ra, rb) in mat.iter().zip(&p.m) {
            rows = rows.max((rb.iter().sum::<f64>() - 1.0).abs());
            for (a, b) in ra.iter().zip(rb) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-12 && rows <= 1e-9, || format!("max deviation {worst:e}, row error {rows:e}"))?;
    Ok(format!("100 models, max |oracle - project| = {worst:e}, max row error {rows:e}"))
}

fn ceg_check(m: &Ntdceg, label: &str) -> Result<(), String> {
    for t in 0..=4 {
        let a = ceg_at(m, t)?.to_coloured();
        let b = direct_ceg_at(m, t).map_err(|e| e.to_string())?;
        isomorphic(&a, agraph_root(&a), &b, 0).map_err(|e| format!("{label}, t={t}: {e}"))?;
    }
    Ok(())
}

fn c6() -> Outcome {
    let start = Instant::now();
    ceg_check(&radicalisation().ntdceg, "radicalisation")?;
    for seed in 100..150 {
        ceg_check(&random(seed), &format!("seed {seed}"))?;
    }
    let dt = start.elapsed();
    ensure(dt.as_secs_f64() < 30.0, || format!("took {dt:?}"))?;
    Ok(format!("radicalisation + 50 models, t = 0..4, {dt:?}"))
}

fn c7() -> Outcome {
    let r = legend_map(&radicalisation().ntdceg, 4).map_err(|e| e.to_string())?;
    ensure(r.holds(), || format!("radicalisation: {:?}", r.failures.first()))?;
    let mut checked = r.checked;
    for seed in 200..250 {
        let m = random(seed);
        let lo = 2 * m.n as i32 - m.eta;
        for t in lo..=lo + 2 {
            let r = legend_map(&m, t).map_err(|e| e.to_string())?;
            ensure(r.holds(), || format!("seed {seed}, T={t}: {:?}", r.failures.first()))?;
            checked += r.checked;
        }
    }
    Ok(format!("radicalisation T=4 + 50 models, {checked} equalities"))
}

fn c8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut largest = 0;
    for i in 0..200 {
        let st = random_staged_tree(&mut rng, 60);
        largest = largest.max(situation_count(&st));
        let g = dceg::graph_transform::tree_graph(&st);
        for mode in [PositionMode::Position, PositionMode::Infinity] {
            ensure(compute_positions(&g, mode) == oracle_positions(&g, mode), || format!("tree {i}, {mode:?}"))?;
        }
    }
    Ok(format!("200 trees, up to {largest} situations"))
}

fn c9() -> Outcome {
    let model = radicalisation();
    let vars = model.variables();
    for s in RADICALISATION_CI {
        let st = CiStatement::parse(s, &vars).map_err(|e| e.to_string())?;
        let r = verify_ci(&model.ntdceg, &vars, &st).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("`{s}` does not hold"))?;
    }
    let st = CiStatement::parse("R(t+1) ⊥ N(t+1) | (R(t)=a, T(t)=n)", &vars).unwrap();
    let r = verify_ci(&model.ntdceg, &vars, &st).map_err(|e| e.to_string())?;
    let g = &model.ntdceg.graph;
    let members: BTreeSet<&str> = r
        .witness
        .iter()
        .filter(|w| w.t == Some(0))
        .flat_map(|w| w.members.iter().map(|&v| g.nodes[v].name.as_str()))
        .collect();
    ensure(members == BTreeSet::from(["w19", "w20", "w21"]), || format!("witness {members:?}"))?;
    let split = radicalisation_split();
    let r = verify_ci(&split.ntdceg, &vars, &st).map_err(|e| e.to_string())?;
    let c = r.counterexample.filter(|c| !r.holds && c.a.0 != c.b.0).ok_or("split staging still independent")?;
    let names = |s: &BTreeSet<usize>| s.iter().map(|&v| split.ntdceg.graph.nodes[v].name.clone()).collect::<Vec<_>>().join(" ");
    Ok(format!(
        "{} statements hold (witness w19 w20 w21); split staging: {} vs {}",
        RADICALISATION_CI.len(),
        names(&c.a.1),
        names(&c.b.1)
    ))
}

fn c10() -> Outcome {
    let mut tested = 0;
    let mut ratio: f64 = 0.0;
    for seed in 300..400 {
        let m = random(seed);
        let ext = &m.ext.st;
        if !check_time_homogeneous(ext, m.n - 1, m.n as i32 - 1).map_err(|e| e.to_string())?.holds {
            continue;
        }
        tested += 1;
        // sinks stand for leaves, so only positions are compared with situations
        let count = m.position_count();
        ensure(count <= situation_count(ext), || format!("seed {seed}: {count} positions"))?;
        ratio = ratio.max(count as f64 / situation_count(ext) as f64);
    }
    ensure(tested >= 50, || format!("only {tested} homogeneous inputs"))?;
    Ok(format!("{tested} models, positions at most {:.0}% of the situations of ST_(2N-eta-1)", ratio * 100.0))
}

fn c11() -> Outcome {
    for seed in 400..450 {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = RandomConfig { kind_b: false, invariant: false, ..RandomConfig::draw(&mut rng) };
        let m = random_model(seed, cfg);
        let c = classify(&project(&m).map_err(|e| e.to_string())?.m);
        ensure(c.ergodic && c.irreducible, || format!("seed {seed}: {c:?}"))?;
    }
    Ok("50 kind-A models ergodic and irreducible".into())
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 11] = [
        ("static CEG structure", c1),
        ("radicalisation NT-DCEG structure", c2),
        ("Markov projection states", c3),
        ("printed chain prediction", c4),
        ("projection vs walk oracle", c5),
        ("finite-horizon CEG assembly", c6),
        ("legend theorem", c7),
        ("position oracle", c8),
        ("independence readings", c9),
        ("finite construction", c10),
        ("ergodic kind-A chains", c11),
    ];
    let mut unexpected = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let k = i + 1;
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("criterion {k:>2} PASS  {name}: {msg}"),
            Err(msg) if EXPECTED_FAILURES.contains(&k) => println!("criterion {k:>2} FAIL  {name}: {msg} (expected)"),
            Err(msg) => {
                unexpected += 1;
                println!("criterion {k:>2} FAIL  {name}: {msg}");
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
    println!("no unexpected failures");
}
