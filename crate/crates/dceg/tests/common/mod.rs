//! Fixtures, random model generators and brute-force oracles shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use dceg::graph_transform::{build_ntdceg, ColouredGraph, Marker, NodeKind, Ntdceg, PositionMode};
use dceg::interface::model::Model;
use dceg::interface::spec::{parse_spec, ModelSpec};
use dceg::query::{Context, SliceExpr, Variables};
use dceg::staging::{assign_stages, Probabilities, StagedTree, StagingError};
use dceg::tree_core::{EventTree, Origin, TogKind, VertexId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const RADICALISATION: &str = include_str!("../../../../data/radicalisation.dceg");

pub fn radicalisation() -> Model {
    Model::from_spec_text(RADICALISATION).expect("the shipped example compiles")
}

pub fn radicalisation_spec() -> ModelSpec {
    parse_spec(RADICALISATION).expect("the shipped example parses")
}

/// The radicalisation model with the stage of radical prisoners' next radicalisation split
/// by their current network.
pub fn radicalisation_split() -> Model {
    let text = RADICALISATION
        .replace("  u12 = */a/n/*\n", "  u12 = */a/n/s\n  u12f = */a/n/f\n  u12i = */a/n/i\n")
        .replace("  u12 : r=0.1 v=0.2 a=0.7\n", "  u12 : r=0.1 v=0.2 a=0.7\n  u12f : r=0.2 v=0.2 a=0.6\n  u12i : r=0.05 v=0.15 a=0.8\n");
    Model::from_spec_text(&text).expect("the mutated example compiles")
}

/// Reference numbering of the radicalisation chain states, as names in this
/// implementation's numbering: the network-only heads come first.
pub const REFERENCE_STATE_ORDER: [&str; 7] = ["w_inf", "w10", "w12", "w14", "w11", "w13", "w15"];

/// The context-specific independences read off the radicalisation model.
pub const RADICALISATION_CI: [&str; 9] = [
    "T(0) ⊥ N(0) | R(0)",
    "T(0) ⊥ (N(0), R(0)) | R(0) != a",
    "N(t+1) ⊥ R(t) | (N(t), T(t)=n)",
    "R(t+1) ⊥ N(t) | (R(t), T(t)=n, N(t+1))",
    "R(t+1) ⊥ N(t) | (R(t)=a, T(t)=n)",
    "R(t+1) ⊥ N(t+1) | (R(t)=a, T(t)=n)",
    "R(t+1) ⊥ (N(t), R(t)) | (R(t) != a, T(t)=n, N(t+1))",
    "T(t+1) ⊥ (N(t), R(t), N(t+1)) | (T(t)=n, R(t+1))",
    "T(t+1) ⊥ (N(t), R(t), N(t+1), R(t+1)) | (R(t+1) != a, T(t)=n)",
];

pub fn var(pairs: &[(&str, &[&str])]) -> Variables {
    pairs.iter().map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect())).collect()
}

/// Staged tree of the static example: network, radicalisation, transfer,
/// with the transfer stage shared by all non-radical prisoners.
pub fn static_prison() -> StagedTree {
    let mut t = EventTree::with_root(0, Origin::Free);
    for n in ["s", "f", "i"] {
        let a = t.add_child(0, n, Origin::Free).unwrap();
        for r in ["r", "v", "a"] {
            let b = t.add_child(a, r, Origin::Free).unwrap();
            for x in ["n", "t"] {
                t.add_child(b, x, Origin::Free).unwrap();
            }
        }
    }
    let (t, _) = t.renumber_bfs();
    let find = |p: &[&str]| t.find_path(p).unwrap();
    let mut blocks = vec![vec![0], vec![find(&["s"])], vec![find(&["f"])], vec![find(&["i"])]];
    let mut nonradical = Vec::new();
    let mut radical = Vec::new();
    for n in ["s", "f", "i"] {
        nonradical.push(find(&[n, "r"]));
        nonradical.push(find(&[n, "v"]));
        radical.push(find(&[n, "a"]));
    }
    blocks.push(nonradical);
    blocks.push(radical);
    let st = assign_stages(t, &blocks, None, BTreeMap::new()).unwrap();
    let dist = |xs: &[(&str, f64)]| xs.iter().map(|(l, p)| (l.to_string(), *p)).collect::<BTreeMap<_, _>>();
    let probs = Probabilities {
        dist: BTreeMap::from([
            (0, dist(&[("s", 0.8), ("f", 0.15), ("i", 0.05)])),
            (1, dist(&[("r", 0.6), ("v", 0.39), ("a", 0.01)])),
            (2, dist(&[("r", 0.5), ("v", 0.45), ("a", 0.05)])),
            (3, dist(&[("r", 0.35), ("v", 0.5), ("a", 0.15)])),
            (4, dist(&[("n", 0.99), ("t", 0.01)])),
            (5, dist(&[("n", 0.9), ("t", 0.1)])),
        ]),
    };
    st.with_probabilities(probs).unwrap()
}

const LABELS: [&str; 3] = ["a", "b", "c"];

/// Random tree with at most `max_leaves` leaves and `max_depth` levels of
/// florets.
pub fn random_template(rng: &mut StdRng, max_leaves: usize, max_depth: usize) -> EventTree {
    loop {
        let mut t = EventTree::with_root(0, Origin::Free);
        let mut frontier = vec![(0usize, 1usize)];
        while let Some((v, d)) = frontier.pop() {
            let k = rng.random_range(2..=3);
            for l in &LABELS[..k] {
                let c = t.add_child(v, l, Origin::Free).unwrap();
                if d < max_depth && rng.random_bool(0.35) {
                    frontier.push((c, d + 1));
                }
            }
        }
        if t.leaves().count() <= max_leaves {
            return t.renumber_bfs().0;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RandomConfig {
    pub n: usize,
    pub kind_b: bool,
    pub invariant: bool,
    /// Upper bound on stage classes per label set; 1 gives the coarsest staging.
    pub classes: u64,
}

impl RandomConfig {
    pub fn draw(rng: &mut StdRng) -> RandomConfig {
        RandomConfig {
            n: rng.random_range(2..=3),
            kind_b: rng.random_bool(0.5),
            invariant: rng.random_bool(0.3),
            classes: rng.random_range(1..=3),
        }
    }
}

fn salted(salt: u64, x: &impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    salt.hash(&mut h);
    x.hash(&mut h);
    h.finish()
}

/// Random time-homogeneous colouring: a situation's stage is a function of its
/// label set and a hash of its full history, except from slice N-1 on where
/// only the recent history ξ(·, N-1) may matter.
pub fn random_colouring(tree: &EventTree, n: usize, salt: u64, classes: u64) -> Result<StagedTree, StagingError> {
    let last = n as i32 - 1;
    let mut keys: BTreeMap<(Vec<String>, u64), Vec<VertexId>> = BTreeMap::new();
    for v in tree.situations() {
        let labels: Vec<String> = tree.children(v).iter().map(|&c| tree.label(c).unwrap().to_string()).collect();
        let class = if tree.slice(v) >= last {
            salted(salt, &dceg::tree_core::xi(tree, v, n - 1))
        } else {
            salted(salt ^ 0x9e37, &(tree.path_labels(v), tree.slice(v)))
        } % classes;
        keys.entry((labels, class)).or_default().push(v);
    }
    let blocks: Vec<Vec<VertexId>> = keys.into_values().collect();
    let st = assign_stages(tree.clone(), &blocks, None, BTreeMap::new())?;
    let mut rng = StdRng::seed_from_u64(salt);
    let mut dist = BTreeMap::new();
    for (k, block) in blocks.iter().enumerate() {
        let v = block[0];
        let w: Vec<f64> = tree.children(v).iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let d: BTreeMap<String, f64> =
            tree.children(v).iter().zip(&w).map(|(&c, x)| (tree.label(c).unwrap().to_string(), x / total)).collect();
        dist.insert(k, d);
    }
    st.with_probabilities(Probabilities { dist })
}

pub fn random_model(seed: u64, cfg: RandomConfig) -> Ntdceg {
    let mut rng = StdRng::seed_from_u64(seed);
    let inv = cfg.invariant.then(|| random_template(&mut rng, 2, 1));
    let (template, kind) = loop {
        let t = random_template(&mut rng, if cfg.kind_b { 5 } else { 3 }, 3);
        if !cfg.kind_b {
            break (t, TogKind::A);
        }
        let leaves: Vec<VertexId> = t.leaves().collect();
        let term: BTreeSet<VertexId> = leaves.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
        if !term.is_empty() && term.len() < leaves.len() && leaves.len() - term.len() <= 3 {
            break (t, TogKind::B { terminating: term });
        }
    };
    let salt = rng.random();
    build_ntdceg(inv.as_ref(), &template, &kind, cfg.n, &|tree| random_colouring(tree, cfg.n, salt, cfg.classes))
        .expect("random homogeneous models build")
}

/// Staged tree with at most `max_situations` situations; stages group
/// situations with equal label sets.
pub fn random_staged_tree(rng: &mut StdRng, max_situations: usize) -> StagedTree {
    let mut t = EventTree::with_root(0, Origin::Free);
    let mut frontier = vec![(0usize, 0usize)];
    let mut situations = 1;
    while let Some((v, d)) = frontier.pop() {
        let k = rng.random_range(1..=3);
        let start = rng.random_range(0..3);
        for i in 0..k {
            let c = t.add_child(v, LABELS[(start + i) % 3], Origin::Free).unwrap();
            if d < 6 && situations < max_situations && rng.random_bool(0.55) {
                situations += 1;
                frontier.push((c, d + 1));
            }
        }
    }
    let (t, _) = t.renumber_bfs();
    let colours = rng.random_range(1..=3);
    let mut groups: BTreeMap<(BTreeSet<String>, u32), Vec<VertexId>> = BTreeMap::new();
    for v in t.situations() {
        let labels = t.children(v).iter().map(|&c| t.label(c).unwrap().to_string()).collect();
        groups.entry((labels, rng.random_range(0..colours))).or_default().push(v);
    }
    let blocks: Vec<Vec<VertexId>> = groups.into_values().collect();
    assign_stages(t, &blocks, None, BTreeMap::new()).unwrap()
}

fn slice_class(mode: PositionMode, s: i32) -> i32 {
    match mode {
        PositionMode::Position => 0,
        PositionMode::TPosition(t) => s.min(t),
        PositionMode::Infinity => s,
    }
}

/// Positions of a tree-shaped graph from its coloured path languages: two
/// vertices share a position iff they both enter a slice or both do not, and
/// the sets of (colour, label, ..., sink) sequences unfolding from them coincide.
pub fn oracle_positions(g: &ColouredGraph, mode: PositionMode) -> Vec<usize> {
    let order = g.topological_order().expect("a tree");
    let entered = |v: usize| {
        let mut ins = g.edges.iter().filter(|e| e.to == v).peekable();
        ins.peek().is_none() || ins.any(|e| e.marker != Marker::Plain)
    };
    let mut lang: Vec<BTreeSet<Vec<String>>> = vec![BTreeSet::new(); g.nodes.len()];
    for &v in order.iter().rev() {
        let n = &g.nodes[v];
        let token = format!("{:?}/{}/{:?}/{}", n.kind, entered(v), n.colour, slice_class(mode, n.slice));
        let mut set = BTreeSet::new();
        let mut any = false;
        for e in g.out_edges(v) {
            any = true;
            for s in &lang[e.to] {
                let mut seq = vec![token.clone(), e.key.clone()];
                seq.extend(s.iter().cloned());
                set.insert(seq);
            }
        }
        if !any {
            set.insert(vec![token]);
        }
        lang[v] = set;
    }
    let mut ids: BTreeMap<&BTreeSet<Vec<String>>, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(g.nodes.len());
    for l in &lang {
        let next = ids.len();
        out.push(*ids.entry(l).or_insert(next));
    }
    out
}

fn tree_probabilities(st: &StagedTree) -> Vec<f64> {
    let tree = &st.tree;
    let probs = st.probs.as_ref().unwrap();
    let mut p = vec![0.0; tree.len()];
    p[0] = 1.0;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for &c in tree.children(v) {
            let stage = st.stage(v).unwrap();
            let label = st.stages.canonical(v, tree.label(c).unwrap());
            p[c] = p[v] * probs.dist[&stage][label];
            stack.push(c);
        }
    }
    p
}

fn is_entry(tree: &EventTree, v: VertexId, t: i32) -> bool {
    !tree.is_leaf(v) && tree.slice(v) == t && tree.parent(v).is_some_and(|p| tree.slice(p) < t)
}

/// μ and M by enumerating the walks of ST_{2N-eta-1}: every slice-(N-1)
/// entry situation of a state is expanded, and all of them must agree.
pub fn oracle_projection(m: &Ntdceg) -> Result<(Vec<String>, Vec<f64>, Vec<Vec<f64>>), String> {
    let st = &m.ext.st;
    let tree = &st.tree;
    let last = m.n as i32 - 1;
    let p = tree_probabilities(st);
    let terminating = |v: VertexId| v != 0 && tree.is_leaf(v) && m.kind.is_terminating(tree.origin(v));
    let has_inf = (0..tree.len()).any(terminating);
    let heads: BTreeSet<usize> = (0..tree.len()).filter(|&v| is_entry(tree, v, last)).map(|v| m.ext_position(v)).collect();
    let mut states: Vec<Option<usize>> = Vec::new();
    if has_inf {
        states.push(None);
    }
    states.extend(heads.iter().map(|&h| Some(h)));
    let col = |s: Option<usize>| states.iter().position(|x| *x == s).unwrap();
    let mut mu = vec![0.0; states.len()];
    for v in 0..tree.len() {
        if is_entry(tree, v, last) {
            mu[col(Some(m.ext_position(v)))] += p[v];
        } else if terminating(v) && tree.slice(v) < last {
            mu[col(None)] += p[v];
        }
    }
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in (0..tree.len()).filter(|&v| is_entry(tree, v, last)) {
        let mut row = vec![0.0; states.len()];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &c in tree.children(v) {
                let q = p[c] / p[s];
                if terminating(c) {
                    row[col(None)] += q;
                } else if is_entry(tree, c, last + 1) {
                    row[col(Some(m.ext_position(c)))] += q;
                } else if tree.is_leaf(c) {
                    return Err(format!("walk from {s} ends at {c} before the next slice"));
                } else {
                    stack.push(c);
                }
            }
        }
        let h = m.ext_position(s);
        if let Some(prev) = rows.get(&h) {
            if prev.iter().zip(&row).any(|(a, b)| (a - b).abs() > 1e-12) {
                return Err(format!("situations of {} disagree", m.graph.nodes[h].name));
            }
        } else {
            rows.insert(h, row);
        }
    }
    let mut mat = Vec::new();
    for s in &states {
        match s {
            None => mat.push((0..states.len()).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect()),
            Some(h) => mat.push(rows[h].clone()),
        }
    }
    let names = states
        .iter()
        .map(|s| s.map_or("w_inf".to_string(), |h| m.graph.nodes[h].name.clone()))
        .collect();
    Ok((names, mu, mat))
}

/// Variables named after the label sets of the template florets.
pub fn label_set_variables(m: &Ntdceg) -> Variables {
    let tree = &m.st.tree;
    let sets: BTreeSet<BTreeSet<String>> = tree
        .situations()
        .map(|v| tree.children(v).iter().map(|&c| tree.label(c).unwrap().to_string()).collect())
        .collect();
    sets.into_iter().enumerate().map(|(i, s)| (format!("V{i}"), s)).collect()
}

/// Entry positions of slice `ctx.at` by filtering the root paths of the
/// truncation, with conditional probabilities.
pub fn oracle_events(m: &Ntdceg, vars: &Variables, ctx: &Context) -> BTreeMap<usize, f64> {
    let tr = m.truncation(ctx.at).unwrap();
    let st = &tr.st;
    let tree = &st.tree;
    let p = tree_probabilities(st);
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for v in 0..tree.len() {
        let entry = !tree.is_leaf(v) && tree.slice(v) == ctx.at && tree.parent(v).is_none_or(|q| tree.slice(q) < ctx.at);
        if !entry {
            continue;
        }
        let path = tree.path_to(v);
        let ok = ctx.constraints.iter().all(|c| {
            let SliceExpr::Abs(s) = c.occ.slice else { panic!("relative slice") };
            let set = &vars[&c.occ.var];
            let steps: Vec<&str> = path
                .windows(2)
                .filter(|w| {
                    let labels: BTreeSet<String> =
                        tree.children(w[0]).iter().map(|&x| tree.label(x).unwrap().to_string()).collect();
                    tree.slice(w[0]) == s && &labels == set
                })
                .map(|w| tree.label(w[1]).unwrap())
                .collect();
            !steps.is_empty() && steps.iter().all(|l| c.allowed.as_ref().is_none_or(|a| a.contains(*l)))
        });
        if ok {
            *out.entry(m.position_of[tr.image[v]]).or_default() += p[v];
        }
    }
    let total: f64 = out.values().sum();
    if total > 0.0 {
        for x in out.values_mut() {
            *x /= total;
        }
    }
    out
}

pub fn situation_count(st: &StagedTree) -> usize {
    st.tree.situations().count()
}

pub fn sinks(g: &ColouredGraph) -> usize {
    g.nodes.iter().filter(|n| n.kind == NodeKind::Sink).count()
}
