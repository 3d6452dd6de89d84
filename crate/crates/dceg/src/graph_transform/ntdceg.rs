use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::graph::{tree_edge, ColouredGraph, Marker, Node, NodeKind};
use super::positions::{compute_positions, PositionMode};
use crate::staging::{check_time_homogeneous, StagePartition, StagedTree, StagingError};
use crate::tree_core::{build_tog, graft, is_continuing, xi, EventTree, Graft, TogKind, TreeError, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Staging(#[from] StagingError),
    #[error("N must be at least 2, got {0}")]
    NTooSmall(usize),
    #[error("the staged tree does not match the generated tree object")]
    TreeMismatch,
    #[error("leaf {0} has no entry situation with the same recent history")]
    NoMatch(VertexId),
    #[error("situations {0} and {1} share their recent history but not their stage")]
    NotHomogeneous(VertexId, VertexId),
    #[error("different templates under different time-invariant leaves are not supported")]
    HeterogeneousTemplates,
}

/// A finite staged truncation ST_t together with the map sending each vertex
/// to the ST_{N-1} vertex it replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub st: StagedTree,
    pub image: Vec<VertexId>,
}

/// An N time-slice dynamic chain event graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Ntdceg {
    pub n: usize,
    pub eta: i32,
    pub kind: TogKind,
    pub graph: ColouredGraph,
    pub root: usize,
    /// w_inf^t for slices t <= N-2 that have terminating leaves.
    pub slice_sinks: BTreeMap<i32, usize>,
    /// Terminal sink, absent when nothing terminates from slice N-1 on.
    pub sink: Option<usize>,
    /// Graph vertex of every ST_{N-1} vertex; continuing frontier leaves map
    /// to the position of the entry situation they are folded onto.
    pub position_of: Vec<usize>,
    pub heads: BTreeSet<usize>,
    pub tails: BTreeSet<usize>,
    /// Indices of cyclical temporal edges.
    pub dagger: BTreeSet<usize>,
    /// The coloured TOG(T_-1, T, N-1).
    pub st: StagedTree,
    /// ST_{2N-eta-1}.
    pub ext: Truncation,
}

/// Builds TOG(T_-1, T, N-1), colours it with `colour`, and runs the NT-DCEG
/// construction.
pub fn build_ntdceg(
    t_minus1: Option<&EventTree>,
    template: &EventTree,
    kind: &TogKind,
    n: usize,
    colour: &dyn Fn(&EventTree) -> Result<StagedTree, StagingError>,
) -> Result<Ntdceg, BuildError> {
    if n < 2 {
        return Err(BuildError::NTooSmall(n));
    }
    let tog = build_tog(t_minus1, template, kind, n as i32 - 1)?;
    let st = colour(&tog.tree)?;
    if st.tree != tog.tree {
        return Err(BuildError::TreeMismatch);
    }
    let eta = if t_minus1.is_some_and(|t| !t.is_empty()) { 0 } else { 1 };
    from_staged(st, kind.clone(), n, eta)
}

fn entry_roots(st: &StagedTree, n: usize) -> BTreeMap<Vec<String>, VertexId> {
    let last = n as i32 - 1;
    let tree = &st.tree;
    let mut out = BTreeMap::new();
    for s in tree.situations() {
        let is_root = tree.slice(s) == last && tree.parent(s).is_some_and(|p| tree.slice(p) < last);
        if is_root {
            out.entry(xi(tree, s, n - 1)).or_insert(s);
        }
    }
    out
}

fn frontier(tree: &EventTree, kind: &TogKind, t: i32) -> Vec<VertexId> {
    tree.leaves().filter(|&l| l != 0 && tree.slice(l) == t && is_continuing(tree, kind, l)).collect()
}

/// Extends (or cuts) the coloured ST_{N-1} to ST_horizon.
pub fn truncation(st: &StagedTree, kind: &TogKind, n: usize, horizon: i32) -> Result<Truncation, BuildError> {
    let last = n as i32 - 1;
    if horizon < last {
        return Ok(cut(st, horizon));
    }
    let roots = entry_roots(st, n);
    let mut tree = st.tree.clone();
    let mut image: Vec<VertexId> = (0..tree.len()).collect();
    for t in last..horizon {
        let mut grafts = Vec::new();
        for l in frontier(&tree, kind, t) {
            let &root = roots.get(&xi(&tree, l, n - 1)).ok_or(BuildError::NoMatch(image[l]))?;
            grafts.push(Graft { leaf: l, source: &st.tree, root });
        }
        let g = graft(&tree, &grafts)?;
        image = (0..g.tree.len())
            .map(|v| match g.from_graft[v] {
                Some((_, src)) => src,
                None => image[g.from_base[v].expect("vertex comes from the base or a graft")],
            })
            .collect();
        tree = g.tree;
    }
    let mut stages = StagePartition { names: st.stages.names.clone(), ..Default::default() };
    for s in tree.situations() {
        let u = image[s];
        if let Some(k) = st.stage(u) {
            stages.stage_of.insert(s, k);
        }
        if let Some(b) = st.stages.bijections.get(&u) {
            stages.bijections.insert(s, b.clone());
        }
    }
    Ok(Truncation { st: StagedTree { tree, stages, probs: st.probs.clone() }, image })
}

/// ST_t for t < N-1: everything after slice t is dropped and entry
/// situations of slice t+1 become leaves.
fn cut(st: &StagedTree, t: i32) -> Truncation {
    let src = &st.tree;
    let mut tree = EventTree::with_root(src.slice(0).min(t), src.origin(0));
    let mut image = vec![0];
    let mut stack = vec![(0usize, 0usize)];
    while let Some((u, v)) = stack.pop() {
        if src.slice(u) > t {
            continue;
        }
        for &c in src.children(u) {
            let id = tree.add_child(v, src.label(c).unwrap_or_default(), src.origin(c)).expect("labels are distinct");
            image.push(c);
            stack.push((c, id));
        }
    }
    let (tree, map) = tree.renumber_bfs();
    let mut img = vec![0; tree.len()];
    for (old, &new) in map.iter().enumerate() {
        img[new] = image[old];
    }
    let mut stages = StagePartition { names: st.stages.names.clone(), ..Default::default() };
    for s in tree.situations() {
        let u = img[s];
        if let Some(k) = st.stage(u) {
            stages.stage_of.insert(s, k);
        }
        if let Some(b) = st.stages.bijections.get(&u) {
            stages.bijections.insert(s, b.clone());
        }
    }
    // add_child copies the parent slice; restore the source slices
    let mut tree = tree;
    for (v, &u) in img.iter().enumerate() {
        let slice = if tree.is_leaf(v) { src.slice(u).min(t) } else { src.slice(u) };
        tree.set_slice(v, slice);
    }
    Truncation { st: StagedTree { tree, stages, probs: st.probs.clone() }, image: img }
}

/// Runs the construction on an already coloured ST_{N-1}.
pub fn from_staged(st: StagedTree, kind: TogKind, n: usize, eta: i32) -> Result<Ntdceg, BuildError> {
    if n < 2 {
        return Err(BuildError::NTooSmall(n));
    }
    let last = n as i32 - 1;
    let tree = &st.tree;
    let roots = entry_roots(&st, n);
    let front: BTreeSet<VertexId> = frontier(tree, &kind, last).into_iter().collect();
    let mut target = BTreeMap::new();
    for &l in &front {
        let &r = roots.get(&xi(tree, l, n - 1)).ok_or(BuildError::NoMatch(l))?;
        target.insert(l, r);
    }

    // C*: ST_{N-1} with its continuing frontier leaves folded onto entry situations
    let mut cstar = ColouredGraph::new();
    let mut cnode = vec![usize::MAX; tree.len()];
    for v in 0..tree.len() {
        if front.contains(&v) {
            continue;
        }
        let leaf = tree.is_leaf(v) && v != 0;
        cnode[v] = cstar.add_node(Node {
            name: format!("s{v}"),
            colour: if leaf { None } else { st.stage(v) },
            slice: tree.slice(v),
            kind: if leaf { NodeKind::Sink } else { NodeKind::Position },
        });
    }
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root vertex");
        let mut e = match target.get(&v) {
            Some(&r) => {
                let mut e = tree_edge(&st, p, v, cnode[r]);
                e.marker = Marker::Cyclical;
                e
            }
            None => tree_edge(&st, p, v, cnode[v]),
        };
        e.from = cnode[p];
        cstar.add_edge(e);
    }

    let w = compute_positions(&cstar, PositionMode::TPosition(last));
    let nclass = w.iter().max().map_or(0, |m| m + 1);
    let mut rep = vec![usize::MAX; nclass];
    for (c, &k) in w.iter().enumerate().rev() {
        rep[k] = c;
    }
    let mut positions: Vec<usize> = (0..nclass).filter(|&k| cstar.nodes[rep[k]].kind == NodeKind::Position).collect();
    positions.sort_by_key(|&k| rep[k]);
    let mut sinks: Vec<usize> = (0..nclass).filter(|&k| cstar.nodes[rep[k]].kind == NodeKind::Sink).collect();
    sinks.sort_by_key(|&k| cstar.nodes[rep[k]].slice.min(last));
    let mut order = vec![usize::MAX; nclass];
    let mut nodes = Vec::with_capacity(nclass);
    let mut slice_sinks = BTreeMap::new();
    let mut sink = None;
    for (i, &k) in positions.iter().enumerate() {
        order[k] = i;
        let r = &cstar.nodes[rep[k]];
        nodes.push(Node { name: format!("w{i}"), colour: r.colour, slice: r.slice, kind: NodeKind::Position });
    }
    for &k in &sinks {
        let id = nodes.len();
        order[k] = id;
        let slice = cstar.nodes[rep[k]].slice.min(last);
        if slice < last {
            slice_sinks.insert(slice, id);
            nodes.push(Node { name: format!("w_inf_{slice}"), colour: None, slice, kind: NodeKind::Sink });
        } else {
            sink = Some(id);
            nodes.push(Node { name: "w_inf".into(), colour: None, slice: last, kind: NodeKind::Sink });
        }
    }
    let classes: Vec<usize> = w.iter().map(|&k| order[k]).collect();
    let graph = cstar.quotient(&classes, nodes);

    let position_of: Vec<usize> = (0..tree.len())
        .map(|v| match target.get(&v) {
            Some(&r) => classes[cnode[r]],
            None => classes[cnode[v]],
        })
        .collect();
    let mut heads = BTreeSet::new();
    let mut tails = BTreeSet::new();
    let mut dagger = BTreeSet::new();
    for (i, e) in graph.edges.iter().enumerate() {
        if e.marker == Marker::Cyclical {
            dagger.insert(i);
            heads.insert(e.to);
            tails.insert(e.from);
        }
    }

    let ext = truncation(&st, &kind, n, 2 * n as i32 - eta - 1)?;
    let h = check_time_homogeneous(&ext.st, n - 1, last)?;
    if let Some((a, b)) = h.pair {
        return Err(BuildError::NotHomogeneous(a, b));
    }
    Ok(Ntdceg {
        n,
        eta,
        kind,
        graph,
        root: classes[cnode[0]],
        slice_sinks,
        sink,
        position_of,
        heads,
        tails,
        dagger,
        st,
        ext,
    })
}

impl Ntdceg {
    /// ST_t as a staged truncation of the model's tree.
    pub fn truncation(&self, t: i32) -> Result<Truncation, BuildError> {
        if t == 2 * self.n as i32 - self.eta - 1 {
            return Ok(self.ext.clone());
        }
        truncation(&self.st, &self.kind, self.n, t)
    }

    pub fn position_count(&self) -> usize {
        self.graph.nodes.iter().filter(|n| n.kind == NodeKind::Position).count()
    }

    /// Stage blocks over positions, by stage id.
    pub fn stage_blocks(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, node) in self.graph.nodes.iter().enumerate() {
            if let Some(c) = node.colour {
                out.entry(c).or_default().push(i);
            }
        }
        out
    }

    /// Graph vertex of a vertex of ST_{2N-eta-1}. Continuing frontier leaves
    /// map to the entry position of the next slice.
    pub fn ext_position(&self, v: VertexId) -> usize {
        self.position_of[self.ext.image[v]]
    }

    /// Positions entered at the beginning of slice `t` (t <= N-1).
    pub fn entry_positions(&self, t: i32) -> BTreeSet<usize> {
        let tree = &self.st.tree;
        tree.situations()
            .filter(|&s| tree.slice(s) == t && tree.parent(s).is_none_or(|p| tree.slice(p) < t))
            .map(|s| self.position_of[s])
            .collect()
    }
}
