//! Subgraph algebra of an NT-DCEG and reconstruction of finite-horizon CEGs.

use std::collections::{BTreeMap, BTreeSet};

use super::graph::{ColouredGraph, Edge, Marker, Node, NodeKind};
use super::ntdceg::{BuildError, Ntdceg};
use super::positions::{compute_positions, PositionMode};
use crate::staging::{StageId, StagedTree};

/// Vertex names of the algebra: a model position carrying a slice
/// superscript (0 for none), a per-slice sink, or the terminal sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VKey {
    Pos { w: usize, sup: i32 },
    SliceSink(i32),
    Sink,
}

impl VKey {
    pub fn name(&self) -> String {
        match *self {
            VKey::Pos { w, sup: 0 } => format!("w{w}"),
            VKey::Pos { w, sup } => format!("w{w}_{sup}"),
            VKey::SliceSink(t) => format!("w_inf_{t}"),
            VKey::Sink => "w_inf".into(),
        }
    }

    /// The relabelling f_t: positions get superscript t, sinks are fixed.
    pub fn at(self, t: i32) -> VKey {
        match self {
            VKey::Pos { w, .. } => VKey::Pos { w, sup: t },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ANode {
    pub colour: Option<StageId>,
    pub slice: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AEdge {
    pub from: VKey,
    pub label: String,
    pub to: VKey,
    pub key: String,
    pub marker: Marker,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AGraph {
    pub nodes: BTreeMap<VKey, ANode>,
    pub edges: BTreeSet<AEdge>,
}

const SINK_SLICE: i32 = i32::MAX;

impl AGraph {
    /// Union graph.
    pub fn oplus(&self, other: &AGraph) -> AGraph {
        let mut out = self.clone();
        for (k, n) in &other.nodes {
            out.nodes.entry(*k).or_insert_with(|| n.clone());
        }
        out.edges.extend(other.edges.iter().cloned());
        out
    }

    fn relabel(&self, f: impl Fn(VKey) -> VKey, slice: impl Fn(VKey, &ANode) -> i32) -> AGraph {
        let mut out = AGraph::default();
        for (k, n) in &self.nodes {
            out.nodes.insert(f(*k), ANode { colour: n.colour, slice: slice(*k, n) });
        }
        for e in &self.edges {
            out.edges.insert(AEdge { from: f(e.from), to: f(e.to), ..e.clone() });
        }
        out
    }

    /// f_t applied to every vertex; positions move to slice t.
    pub fn at(&self, t: i32) -> AGraph {
        self.relabel(|k| k.at(t), |k, n| if matches!(k, VKey::Pos { .. }) { t } else { n.slice })
    }

    /// Merges the vertices in `set` into `into` (a sink).
    pub fn merge_into_sink(&self, set: &BTreeSet<VKey>, into: VKey) -> AGraph {
        let f = |k: VKey| if set.contains(&k) { into } else { k };
        let mut out = AGraph::default();
        for (k, n) in &self.nodes {
            if set.contains(k) {
                continue;
            }
            out.nodes.insert(*k, n.clone());
        }
        out.nodes.insert(into, ANode { colour: None, slice: SINK_SLICE });
        for e in &self.edges {
            let to = f(e.to);
            let marker = if to == into { Marker::Plain } else { e.marker };
            out.edges.insert(AEdge { from: f(e.from), to, marker, ..e.clone() });
        }
        out
    }

    fn out_map(&self) -> BTreeMap<VKey, Vec<&AEdge>> {
        let mut out: BTreeMap<VKey, Vec<&AEdge>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(e.from).or_default().push(e);
        }
        out
    }

    pub fn to_coloured(&self) -> ColouredGraph {
        let index: BTreeMap<VKey, usize> = self.nodes.keys().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut g = ColouredGraph::new();
        let out = self.out_map();
        for (k, n) in &self.nodes {
            let sink = !matches!(k, VKey::Pos { .. }) || (n.colour.is_none() && !out.contains_key(k));
            g.add_node(Node {
                name: k.name(),
                colour: n.colour,
                slice: n.slice,
                kind: if sink { NodeKind::Sink } else { NodeKind::Position },
            });
        }
        for e in &self.edges {
            g.add_edge(Edge {
                from: index[&e.from],
                to: index[&e.to],
                label: e.label.clone(),
                key: e.key.clone(),
                marker: e.marker,
                prob: None,
            });
        }
        g
    }
}

/// Φ: iteratively merges same-colour, same-slice vertices whose labelled,
/// coloured unfoldings coincide; the merged vertex keeps the smallest name.
pub fn contract_phi(g: &AGraph) -> Result<AGraph, String> {
    contract_phi_except(g, &BTreeSet::new())
}

/// Φ leaving the vertices of `keep` unmerged, for graphs that only hold part
/// of those vertices' out-edges.
pub fn contract_phi_except(g: &AGraph, keep: &BTreeSet<VKey>) -> Result<AGraph, String> {
    let out = g.out_map();
    // reverse topological order by DFS
    let mut state: BTreeMap<VKey, u8> = BTreeMap::new();
    let mut order = Vec::new();
    for &start in g.nodes.keys() {
        if state.contains_key(&start) {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state.insert(start, 1);
        while let Some((v, i)) = stack.pop() {
            let succ = out.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            if i < succ.len() {
                stack.push((v, i + 1));
                let t = succ[i].to;
                match state.get(&t) {
                    Some(1) => return Err(format!("cycle through {}", t.name())),
                    Some(_) => {}
                    None => {
                        state.insert(t, 1);
                        stack.push((t, 0));
                    }
                }
            } else {
                state.insert(v, 2);
                order.push(v);
            }
        }
    }
    // as for positions, slice entries only merge with slice entries
    let mut entry: BTreeSet<VKey> = g.nodes.keys().copied().collect();
    for e in &g.edges {
        entry.remove(&e.to);
    }
    entry.extend(g.edges.iter().filter(|e| e.marker != Marker::Plain).map(|e| e.to));
    type Sig = (bool, bool, Option<VKey>, Option<StageId>, i32, Vec<(String, String, usize)>);
    let mut class: BTreeMap<VKey, usize> = BTreeMap::new();
    let mut by_sig: BTreeMap<Sig, usize> = BTreeMap::new();
    let mut name: Vec<VKey> = Vec::new();
    for v in order {
        let n = &g.nodes[&v];
        let mut succ: Vec<(String, String, usize)> = out
            .get(&v)
            .map(|es| es.iter().map(|e| (e.label.clone(), e.key.clone(), class[&e.to])).collect())
            .unwrap_or_default();
        succ.sort();
        let sig = (matches!(v, VKey::Pos { .. }), entry.contains(&v), keep.contains(&v).then_some(v), n.colour, n.slice, succ);
        let next = by_sig.len();
        let c = *by_sig.entry(sig).or_insert(next);
        if c == name.len() {
            name.push(v);
        } else if v < name[c] {
            name[c] = v;
        }
        class.insert(v, c);
    }
    let class: BTreeMap<VKey, VKey> = class.into_iter().map(|(k, c)| (k, name[c])).collect();
    let mut res = AGraph::default();
    for (k, n) in &g.nodes {
        if class[k] == *k {
            res.nodes.insert(*k, n.clone());
        }
    }
    for e in &g.edges {
        let marker = if matches!(e.to, VKey::Pos { .. }) { e.marker } else { Marker::Plain };
        res.edges.insert(AEdge { from: class[&e.from], to: class[&e.to], marker, ..e.clone() });
    }
    Ok(res)
}

/// The subgraphs of the decomposition together with the marked vertex sets.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub d_i: AGraph,
    pub g_0: AGraph,
    pub g_1: AGraph,
    pub d_h: AGraph,
    pub d_r: AGraph,
    pub g_2: AGraph,
    /// Tails and heads of temporal edges of slice t, t = 0..=N-2.
    pub w_i: Vec<BTreeSet<VKey>>,
    pub w_j: Vec<BTreeSet<VKey>>,
    /// Per-slice sinks of slices up to t, t = 0..=N-2.
    pub w_inf: Vec<BTreeSet<VKey>>,
    pub heads: BTreeSet<VKey>,
    pub tails: BTreeSet<VKey>,
    pub n: usize,
    pub eta: i32,
}

pub fn vkey(m: &Ntdceg, v: usize) -> VKey {
    let node = &m.graph.nodes[v];
    match node.kind {
        NodeKind::Position => VKey::Pos { w: v, sup: 0 },
        NodeKind::Sink if Some(v) == m.sink => VKey::Sink,
        NodeKind::Sink => VKey::SliceSink(node.slice),
    }
}

/// The model graph in algebra form.
pub fn as_agraph(m: &Ntdceg) -> AGraph {
    let mut g = AGraph::default();
    for (v, n) in m.graph.nodes.iter().enumerate() {
        let k = vkey(m, v);
        let slice = if n.kind == NodeKind::Sink { SINK_SLICE } else { n.slice };
        g.nodes.insert(k, ANode { colour: n.colour, slice });
    }
    for e in &m.graph.edges {
        g.edges.insert(aedge(m, e));
    }
    g
}

fn aedge(m: &Ntdceg, e: &Edge) -> AEdge {
    AEdge { from: vkey(m, e.from), label: e.label.clone(), to: vkey(m, e.to), key: e.key.clone(), marker: e.marker }
}

fn ancestors(m: &Ntdceg, targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); m.graph.nodes.len()];
    for e in &m.graph.edges {
        if e.marker != Marker::Cyclical {
            rev[e.to].push(e.from);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = targets.iter().copied().collect();
    while let Some(v) = stack.pop() {
        for &p in &rev[v] {
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen
}

fn subgraph(m: &Ntdceg, vertices: &BTreeSet<usize>, edges: impl Iterator<Item = usize>) -> AGraph {
    let full = as_agraph(m);
    let mut g = AGraph::default();
    for &v in vertices {
        let k = vkey(m, v);
        g.nodes.insert(k, full.nodes[&k].clone());
    }
    for i in edges {
        g.edges.insert(aedge(m, &m.graph.edges[i]));
    }
    g
}

pub fn decompose(m: &Ntdceg) -> Decomposition {
    let n = m.n;
    let last = n as i32 - 1;
    let g = &m.graph;
    let mut w_i = vec![BTreeSet::new(); n - 1];
    let mut w_j = vec![BTreeSet::new(); n - 1];
    for e in &g.edges {
        let t = g.nodes[e.from].slice;
        if e.marker == Marker::Temporal && (0..last).contains(&t) {
            w_i[t as usize].insert(e.from);
            w_j[t as usize].insert(e.to);
        }
    }
    let w_inf: Vec<BTreeSet<usize>> =
        (0..last).map(|t| m.slice_sinks.iter().filter(|(&s, _)| s <= t).map(|(_, &v)| v).collect()).collect();
    let top = (last - 1) as usize;
    let w_i_inf: BTreeSet<usize> = w_i[top].union(&w_inf[top]).copied().collect();
    let mut v_i = ancestors(m, &w_i_inf);
    v_i.extend(w_i_inf.iter().copied());
    let e_i: BTreeSet<usize> = (0..g.edges.len())
        .filter(|&i| {
            let e = &g.edges[i];
            e.marker != Marker::Cyclical && v_i.contains(&e.from) && v_i.contains(&e.to)
        })
        .collect();
    let e_0: BTreeSet<usize> = (0..g.edges.len())
        .filter(|&i| {
            let e = &g.edges[i];
            e.marker != Marker::Cyclical && w_i[top].contains(&e.from) && m.heads.contains(&e.to)
        })
        .collect();
    let d_i = subgraph(m, &v_i, e_i.iter().copied());
    let v_0: BTreeSet<usize> = w_i[top].union(&m.heads).copied().collect();
    let g_0 = subgraph(m, &v_0, e_0.iter().copied());
    let heads_k: BTreeSet<VKey> = m.heads.iter().map(|&h| vkey(m, h)).collect();
    let g_1 = g_0.relabel(
        |k| if heads_k.contains(&k) { k.at(last) } else { k },
        |k, nd| if heads_k.contains(&k) { last } else { nd.slice },
    );
    let v_h: BTreeSet<usize> = (0..g.nodes.len()).filter(|v| !v_i.contains(v)).collect();
    let e_h: Vec<usize> = (0..g.edges.len()).filter(|i| !e_i.contains(i) && !e_0.contains(i)).collect();
    let d_h = subgraph(m, &v_h, e_h.iter().copied());
    let d_r = subgraph(m, &v_h, e_h.iter().copied().filter(|i| !m.dagger.contains(i)));
    let v_2: BTreeSet<usize> = m.tails.union(&m.heads).copied().collect();
    let g_2 = subgraph(m, &v_2, m.dagger.iter().copied());
    let keys = |s: &Vec<BTreeSet<usize>>| -> Vec<BTreeSet<VKey>> {
        s.iter().map(|b| b.iter().map(|&v| vkey(m, v)).collect()).collect()
    };
    Decomposition {
        w_i: keys(&w_i),
        w_j: keys(&w_j),
        w_inf: keys(&w_inf),
        heads: heads_k,
        tails: m.tails.iter().map(|&v| vkey(m, v)).collect(),
        d_i,
        g_0,
        g_1,
        d_h,
        d_r,
        g_2,
        n,
        eta: m.eta,
    }
}

impl Decomposition {
    fn last(&self) -> i32 {
        self.n as i32 - 1
    }

    /// D_R relabelled by f_t.
    pub fn d_r_at(&self, t: i32) -> AGraph {
        self.d_r.at(t)
    }

    /// G_2 between slices t and t+1.
    pub fn g_2_at(&self, t: i32) -> AGraph {
        let mut g = AGraph::default();
        for k in &self.tails {
            g.nodes.insert(k.at(t), ANode { colour: self.g_2.nodes[k].colour, slice: t });
        }
        for k in &self.heads {
            g.nodes.insert(k.at(t + 1), ANode { colour: self.g_2.nodes[k].colour, slice: t + 1 });
        }
        for e in &self.g_2.edges {
            g.edges.insert(AEdge { from: e.from.at(t), to: e.to.at(t + 1), ..e.clone() });
        }
        g
    }

    /// D_R^{ta,tb}; empty when tb < ta.
    pub fn connected_repeating(&self, ta: i32, tb: i32) -> AGraph {
        let mut g = AGraph::default();
        if tb < ta {
            return g;
        }
        for t in ta..=tb {
            g = g.oplus(&self.d_r_at(t));
            if t < tb {
                g = g.oplus(&self.g_2_at(t));
            }
        }
        g
    }

    fn close(&self, g: AGraph, t: i32) -> AGraph {
        let heads: BTreeSet<VKey> = self.heads.iter().map(|k| k.at(t + 1)).collect();
        let present: BTreeSet<VKey> = heads.into_iter().filter(|k| g.nodes.contains_key(k)).collect();
        g.merge_into_sink(&present, VKey::Sink)
    }

    /// D_L(a)^t, t = N-1..=2N-eta-2.
    pub fn closure_a(&self, t: i32) -> AGraph {
        let g = self.connected_repeating(self.last(), t).oplus(&self.g_2_at(t));
        self.close(g, t)
    }

    /// D_L(b)^t, t >= 2N-eta-1.
    pub fn closure_b(&self, t: i32) -> AGraph {
        let g = self.connected_repeating(t - self.n as i32 + 1 + self.eta, t).oplus(&self.g_2_at(t));
        self.close(g, t)
    }

    /// D_I(inf)^t, t = 0..=N-2: the part of the model up to the end of slice
    /// t with the next entry positions and per-slice sinks merged into w_inf.
    pub fn initial_closed(&self, m: &Ntdceg, t: i32) -> AGraph {
        let ti = t as usize;
        let wi_inf: BTreeSet<usize> = self.w_i[ti]
            .iter()
            .chain(self.w_inf[ti].iter())
            .map(|k| key_index(m, *k))
            .collect();
        let anc = ancestors(m, &wi_inf);
        let inner: BTreeSet<usize> =
            anc.iter().copied().chain(self.w_i[ti].iter().map(|k| key_index(m, *k))).collect();
        let ends: BTreeSet<usize> =
            self.w_inf[ti].iter().chain(self.w_j[ti].iter()).map(|k| key_index(m, *k)).collect();
        let mut g = AGraph::default();
        let full = as_agraph(m);
        for &v in &inner {
            let k = vkey(m, v);
            g.nodes.insert(k, full.nodes[&k].clone());
        }
        g.nodes.insert(VKey::Sink, ANode { colour: None, slice: SINK_SLICE });
        for e in &m.graph.edges {
            if e.marker == Marker::Cyclical || !inner.contains(&e.from) {
                continue;
            }
            if inner.contains(&e.to) {
                g.edges.insert(aedge(m, e));
            } else if ends.contains(&e.to) {
                g.edges.insert(AEdge { to: VKey::Sink, ..aedge(m, e) });
            }
        }
        g
    }
}

fn key_index(m: &Ntdceg, k: VKey) -> usize {
    match k {
        VKey::Pos { w, .. } => w,
        VKey::SliceSink(t) => m.slice_sinks[&t],
        VKey::Sink => m.sink.expect("terminal sink present"),
    }
}

/// The CEG spanned by ST_t, assembled from the decomposition.
pub fn ceg_at(m: &Ntdceg, t: i32) -> Result<AGraph, String> {
    if t < 0 {
        return Err(format!("negative horizon {t}"));
    }
    let d = decompose(m);
    let n = m.n as i32;
    let eta = m.eta;
    let g = if t <= n - 2 {
        contract_phi(&d.initial_closed(m, t))?
    } else if t <= 2 * n - eta - 2 {
        contract_phi(&d.d_i.oplus(&d.g_1).oplus(&d.closure_a(t)))?
    } else {
        let s = t - n + eta;
        let tails: BTreeSet<VKey> = d.tails.iter().map(|k| k.at(s)).collect();
        let d_l = contract_phi_except(&d.g_2_at(s).oplus(&d.closure_b(t)), &tails)?;
        d.d_i.oplus(&d.g_1).oplus(&d.connected_repeating(n - 1, s)).oplus(&d_l)
    };
    let slice_sinks: BTreeSet<VKey> = g.nodes.keys().filter(|k| matches!(k, VKey::SliceSink(_))).copied().collect();
    Ok(if slice_sinks.is_empty() && g.nodes.contains_key(&VKey::Sink) {
        g
    } else {
        g.merge_into_sink(&slice_sinks, VKey::Sink)
    })
}

/// Contraction of a finite staged tree by its ∞-positions, every leaf sent to
/// one sink. Node `k` is the k-th class by minimum tree vertex.
pub fn direct_ceg(st: &StagedTree) -> ColouredGraph {
    let tree = &st.tree;
    let mut g = ColouredGraph::new();
    let mut node = vec![0usize; tree.len()];
    let mut sink = None;
    for v in 0..tree.len() {
        if tree.is_leaf(v) && v != 0 {
            node[v] = *sink.get_or_insert_with(|| {
                g.add_node(Node { name: "w_inf".into(), colour: None, slice: SINK_SLICE, kind: NodeKind::Sink })
            });
        } else {
            node[v] = g.add_node(Node {
                name: format!("s{v}"),
                colour: st.stage(v),
                slice: tree.slice(v),
                kind: NodeKind::Position,
            });
        }
    }
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root vertex");
        let mut e = super::graph::tree_edge(st, p, v, node[v]);
        e.from = node[p];
        g.add_edge(e);
    }
    let classes = compute_positions(&g, PositionMode::Infinity);
    let count = classes.iter().max().map_or(0, |m| m + 1);
    let mut nodes: Vec<Option<Node>> = vec![None; count];
    for (v, &c) in classes.iter().enumerate() {
        if nodes[c].is_none() {
            let mut nd = g.nodes[v].clone();
            if nd.kind == NodeKind::Position {
                nd.name = format!("w{c}");
            }
            nodes[c] = Some(nd);
        }
    }
    g.quotient(&classes, nodes.into_iter().map(|n| n.expect("every class has a member")).collect())
}

/// ST_t of the model contracted by ∞-positions.
pub fn direct_ceg_at(m: &Ntdceg, t: i32) -> Result<ColouredGraph, BuildError> {
    Ok(direct_ceg(&m.truncation(t)?.st))
}

/// Checks that two rooted deterministic graphs are isomorphic as coloured,
/// labelled graphs by walking both from their roots. Sinks match sinks.
pub fn isomorphic(a: &ColouredGraph, ra: usize, b: &ColouredGraph, rb: usize) -> Result<(), String> {
    let mut fwd: BTreeMap<usize, usize> = BTreeMap::new();
    let mut bwd: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stack = vec![(ra, rb)];
    let mut edges = 0usize;
    while let Some((x, y)) = stack.pop() {
        match (fwd.get(&x), bwd.get(&y)) {
            (Some(&y2), _) if y2 != y => return Err(format!("{} maps to both {} and {}", a.nodes[x].name, b.nodes[y2].name, b.nodes[y].name)),
            (_, Some(&x2)) if x2 != x => return Err(format!("{} is the image of {} and {}", b.nodes[y].name, a.nodes[x2].name, a.nodes[x].name)),
            (Some(_), _) => continue,
            _ => {}
        }
        fwd.insert(x, y);
        bwd.insert(y, x);
        let (nx, ny) = (&a.nodes[x], &b.nodes[y]);
        if nx.kind != ny.kind {
            return Err(format!("{} and {} differ in kind", nx.name, ny.name));
        }
        if nx.kind == NodeKind::Position && (nx.colour != ny.colour || nx.slice != ny.slice) {
            return Err(format!("{} and {} differ in colour or slice", nx.name, ny.name));
        }
        let ex: BTreeMap<&str, &Edge> = a.out_edges(x).map(|e| (e.label.as_str(), e)).collect();
        let ey: BTreeMap<&str, &Edge> = b.out_edges(y).map(|e| (e.label.as_str(), e)).collect();
        if ex.keys().ne(ey.keys()) {
            return Err(format!("{} and {} have different out-labels", nx.name, ny.name));
        }
        for (l, e) in ex {
            edges += 1;
            stack.push((e.to, ey[l].to));
        }
    }
    if fwd.len() != a.nodes.len() || bwd.len() != b.nodes.len() {
        return Err(format!(
            "matched {} vertices, graphs have {} and {}",
            fwd.len(),
            a.nodes.len(),
            b.nodes.len()
        ));
    }
    if edges != a.edges.len() || edges != b.edges.len() {
        return Err(format!("matched {edges} edges, graphs have {} and {}", a.edges.len(), b.edges.len()));
    }
    Ok(())
}

/// Root vertex of a CEG assembled by `ceg_at`.
pub fn agraph_root(g: &ColouredGraph) -> usize {
    g.node_by_name("w0").unwrap_or(0)
}
