//! Finite event trees, tree objects, the merging (grafting) operation and
//! tree objects generated by a time-invariant tree plus a per-slice template.
//!
//! Slice convention: a situation carries the slice of the floret it roots, a
//! leaf carries the slice of its incoming edge. The slice of an edge is the
//! slice of its parent. Every leaf of a TOG truncation closes its slice, so the
//! "current time" of a leaf is its slice plus one.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is a leaf, not a situation")]
    NotSituation(VertexId),
    #[error("vertex {0} is not a leaf")]
    NotLeaf(VertexId),
    #[error("duplicate sibling label `{label}` under vertex {vertex}")]
    LabelClash { vertex: VertexId, label: String },
    #[error("output block {0} is not covered by the merge map")]
    UncoveredBlock(usize),
    #[error("merging into an empty tree needs exactly one object, got {0}")]
    EmptyBaseNeedsSingleton(usize),
    #[error("negative horizon {0}")]
    NegativeHorizon(i32),
    #[error("invalid kind B classifier: {0}")]
    InvalidClassifier(String),
    #[error("invalid output partition: {0}")]
    InvalidPartition(String),
    #[error("template tree is empty")]
    EmptyTemplate,
}

/// Where a vertex was copied from: a vertex of the time-invariant tree, a
/// vertex of the slice template, or neither (hand-built trees).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Invariant(VertexId),
    Template(VertexId),
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub parent: Option<VertexId>,
    /// Label of the incoming edge.
    pub label: Option<String>,
    pub slice: i32,
    pub children: Vec<VertexId>,
    pub origin: Origin,
}

impl Vertex {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Situation,
    Leaf,
}

/// Rooted, edge-labelled tree. The root, when present, is vertex 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTree {
    vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Floret {
    pub root: VertexId,
    pub children: Vec<(String, VertexId)>,
}

impl EventTree {
    pub fn empty() -> Self {
        EventTree { vertices: Vec::new() }
    }

    pub fn with_root(slice: i32, origin: Origin) -> Self {
        EventTree {
            vertices: vec![Vertex { parent: None, label: None, slice, children: Vec::new(), origin }],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn root(&self) -> Option<VertexId> {
        if self.vertices.is_empty() {
            None
        } else {
            Some(0)
        }
    }

    pub fn vertex(&self, v: VertexId) -> Result<&Vertex, TreeError> {
        self.vertices.get(v).ok_or(TreeError::UnknownVertex(v))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        if self.vertices[v].is_leaf() {
            VertexKind::Leaf
        } else {
            VertexKind::Situation
        }
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.vertices[v].is_leaf()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.vertices[v].parent
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.vertices[v].label.as_deref()
    }

    pub fn slice(&self, v: VertexId) -> i32 {
        self.vertices[v].slice
    }

    pub fn origin(&self, v: VertexId) -> Origin {
        self.vertices[v].origin
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.vertices[v].children
    }

    /// Child of `v` reached through `label`.
    pub fn child(&self, v: VertexId, label: &str) -> Option<VertexId> {
        self.vertices[v]
            .children
            .iter()
            .copied()
            .find(|&c| self.vertices[c].label.as_deref() == Some(label))
    }

    /// The slice in which the next event after `v` would happen.
    pub fn now(&self, v: VertexId) -> i32 {
        let x = &self.vertices[v];
        if x.is_leaf() && x.parent.is_some() {
            x.slice + 1
        } else {
            x.slice
        }
    }

    pub fn max_slice(&self) -> i32 {
        self.vertices.iter().map(|v| v.slice).max().unwrap_or(-1)
    }

    pub fn situations(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.vertices[v].is_leaf())
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].is_leaf())
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Adds a child under `parent` with the parent's slice for situations
    /// built by hand. Leaves keep the slice of their incoming edge.
    pub fn add_child(&mut self, parent: VertexId, label: &str, origin: Origin) -> Result<VertexId, TreeError> {
        self.vertex(parent)?;
        if self.child(parent, label).is_some() {
            return Err(TreeError::LabelClash { vertex: parent, label: label.to_string() });
        }
        let id = self.vertices.len();
        let slice = self.vertices[parent].slice;
        self.vertices.push(Vertex {
            parent: Some(parent),
            label: Some(label.to_string()),
            slice,
            children: Vec::new(),
            origin,
        });
        self.vertices[parent].children.push(id);
        Ok(id)
    }

    pub(crate) fn set_slice(&mut self, v: VertexId, slice: i32) {
        self.vertices[v].slice = slice;
    }

    /// Vertices on the root-to-`v` path, root first, `v` last.
    pub fn path_to(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.vertices[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Edge labels along the root-to-`v` path.
    pub fn path_labels(&self, v: VertexId) -> Vec<String> {
        self.path_to(v).iter().skip(1).map(|&u| self.vertices[u].label.clone().unwrap_or_default()).collect()
    }

    /// Edge label and slice of each event on the root-to-`v` path.
    pub fn timed_path(&self, v: VertexId) -> Vec<(String, i32)> {
        let path = self.path_to(v);
        path.windows(2)
            .map(|w| (self.vertices[w[1]].label.clone().unwrap_or_default(), self.vertices[w[0]].slice))
            .collect()
    }

    /// Vertex reached from the root along `labels`.
    pub fn find_path<S: AsRef<str>>(&self, labels: &[S]) -> Option<VertexId> {
        let mut cur = self.root()?;
        for l in labels {
            cur = self.child(cur, l.as_ref())?;
        }
        Some(cur)
    }

    /// First vertex of slice >= 0 on the path to `v`: the copy of the template
    /// root hanging under a time-invariant leaf. `None` for slice -1 vertices.
    pub fn invariant_anchor(&self, v: VertexId) -> Option<VertexId> {
        let path = self.path_to(v);
        path.into_iter().find(|&u| self.vertices[u].slice >= 0).filter(|_| self.now(v) >= 0)
    }

    /// Partial-slice depth of `v`: number of edges since the root of its slice.
    pub fn depth_in_slice(&self, v: VertexId) -> usize {
        let s = self.vertices[v].slice;
        let mut d = 0;
        let mut cur = v;
        while let Some(p) = self.vertices[cur].parent {
            if self.vertices[p].slice != s {
                break;
            }
            d += 1;
            cur = p;
        }
        d
    }

    /// Renumbers vertices breadth first, children in stored order.
    /// Returns the new tree and the map old id -> new id.
    pub fn renumber_bfs(&self) -> (EventTree, Vec<VertexId>) {
        let n = self.vertices.len();
        let mut map = vec![usize::MAX; n];
        if n == 0 {
            return (EventTree::empty(), map);
        }
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            map[v] = order.len();
            order.push(v);
            queue.extend(self.vertices[v].children.iter().copied());
        }
        let vertices = order
            .iter()
            .map(|&old| {
                let x = &self.vertices[old];
                Vertex {
                    parent: x.parent.map(|p| map[p]),
                    label: x.label.clone(),
                    slice: x.slice,
                    children: x.children.iter().map(|&c| map[c]).collect(),
                    origin: x.origin,
                }
            })
            .collect();
        (EventTree { vertices }, map)
    }

    /// Copy of the subtree rooted at `v`, renumbered from 0.
    pub fn subtree(&self, v: VertexId) -> EventTree {
        let mut out = EventTree::with_root(self.vertices[v].slice, self.vertices[v].origin);
        let mut stack = vec![(v, 0usize)];
        while let Some((src, dst)) = stack.pop() {
            for &c in self.vertices[src].children.iter() {
                let id = out.vertices.len();
                let x = &self.vertices[c];
                out.vertices.push(Vertex {
                    parent: Some(dst),
                    label: x.label.clone(),
                    slice: x.slice,
                    children: Vec::new(),
                    origin: x.origin,
                });
                out.vertices[dst].children.push(id);
                stack.push((c, id));
            }
        }
        out.renumber_bfs().0
    }

    /// Checks the structural invariants: single root, consistent parent links,
    /// distinct sibling labels, non-decreasing slices with slice -1 first.
    pub fn validate(&self) -> Result<(), TreeError> {
        for (id, v) in self.vertices.iter().enumerate() {
            if id == 0 && v.parent.is_some() {
                return Err(TreeError::UnknownVertex(id));
            }
            if id != 0 && v.parent.is_none() {
                return Err(TreeError::UnknownVertex(id));
            }
            let mut seen = BTreeSet::new();
            for &c in &v.children {
                let cv = self.vertex(c)?;
                if cv.parent != Some(id) {
                    return Err(TreeError::UnknownVertex(c));
                }
                if cv.slice < v.slice {
                    return Err(TreeError::InvalidPartition(format!("slice decreases at vertex {c}")));
                }
                if !seen.insert(cv.label.clone()) {
                    return Err(TreeError::LabelClash { vertex: id, label: cv.label.clone().unwrap_or_default() });
                }
            }
        }
        Ok(())
    }
}

/// Out-neighbourhood of situation `s`, in stored child order.
pub fn floret(tree: &EventTree, s: VertexId) -> Result<Floret, TreeError> {
    let v = tree.vertex(s)?;
    if v.is_leaf() {
        return Err(TreeError::NotSituation(s));
    }
    Ok(Floret {
        root: s,
        children: v.children.iter().map(|&c| (tree.vertices[c].label.clone().unwrap_or_default(), c)).collect(),
    })
}

/// Labels preceding `s` in the time-invariant tree and in the last `k` slices
/// (the current partial slice included).
pub fn xi(tree: &EventTree, s: VertexId, k: usize) -> Vec<String> {
    let start = tree.now(s) - k as i32;
    tree.timed_path(s)
        .into_iter()
        .filter(|(_, tau)| *tau == -1 || *tau >= start)
        .map(|(l, _)| l)
        .collect()
}

/// An event tree with an input root and a partition of its leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeObject {
    pub tree: EventTree,
    pub partition: Vec<Vec<VertexId>>,
}

impl TreeObject {
    pub fn empty() -> Self {
        TreeObject { tree: EventTree::empty(), partition: Vec::new() }
    }

    /// Wraps `tree` with a single output block holding all leaves.
    pub fn single_block(tree: EventTree) -> Self {
        let leaves: Vec<_> = if tree.is_empty() { Vec::new() } else { tree.leaves().collect() };
        let partition = if leaves.is_empty() { Vec::new() } else { vec![leaves] };
        TreeObject { tree, partition }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let leaves: BTreeSet<_> = if self.tree.is_empty() { BTreeSet::new() } else { self.tree.leaves().collect() };
        let mut seen = BTreeSet::new();
        for (k, block) in self.partition.iter().enumerate() {
            if block.is_empty() {
                return Err(TreeError::InvalidPartition(format!("block {k} is empty")));
            }
            for &l in block {
                if !leaves.contains(&l) {
                    return Err(TreeError::InvalidPartition(format!("vertex {l} in block {k} is not a leaf")));
                }
                if !seen.insert(l) {
                    return Err(TreeError::InvalidPartition(format!("leaf {l} appears twice")));
                }
            }
        }
        if seen.len() != leaves.len() {
            return Err(TreeError::InvalidPartition("blocks do not cover the leaf set".into()));
        }
        Ok(())
    }
}

/// How the output partition of a merge result is formed.
pub enum Repartition<'a> {
    /// All leaves in one block.
    Single,
    /// Leaves grouped by equal `xi(·, k)` signature, blocks in order of first leaf.
    Xi(usize),
    /// Leaves grouped by a caller key, blocks in order of first leaf.
    By(&'a dyn Fn(&EventTree, VertexId) -> String),
}

/// Result of grafting copies of subtrees onto leaves of a base tree.
#[derive(Debug, Clone)]
pub struct Grafted {
    pub tree: EventTree,
    /// For every vertex of the result, the base vertex it comes from.
    pub from_base: Vec<Option<VertexId>>,
    /// For every vertex of the result, (graft index, source vertex).
    pub from_graft: Vec<Option<(usize, VertexId)>>,
}

/// One grafting instruction: hang a copy of `source`'s subtree at `root`
/// onto `leaf` of the base tree.
pub struct Graft<'a> {
    pub leaf: VertexId,
    pub source: &'a EventTree,
    pub root: VertexId,
}

/// Grafts copies onto leaves of `base`; the grafted root is identified with the
/// leaf and the copy is shifted so its root slice equals the leaf's `now`.
/// Result ids are breadth first.
pub fn graft(base: &EventTree, grafts: &[Graft<'_>]) -> Result<Grafted, TreeError> {
    let mut tree = base.clone();
    let mut from_base: Vec<Option<VertexId>> = (0..base.len()).map(Some).collect();
    let mut from_graft: Vec<Option<(usize, VertexId)>> = vec![None; base.len()];
    let mut used = BTreeSet::new();
    for (gi, g) in grafts.iter().enumerate() {
        let leaf = base.vertex(g.leaf)?;
        if !leaf.is_leaf() {
            return Err(TreeError::NotLeaf(g.leaf));
        }
        if !used.insert(g.leaf) {
            return Err(TreeError::InvalidPartition(format!("leaf {} grafted twice", g.leaf)));
        }
        g.source.vertex(g.root)?;
        let shift = base.now(g.leaf) - g.source.slice(g.root);
        tree.vertices[g.leaf].slice = g.source.slice(g.root) + shift;
        tree.vertices[g.leaf].origin = g.source.origin(g.root);
        from_graft[g.leaf] = Some((gi, g.root));
        let mut stack = vec![(g.root, g.leaf)];
        while let Some((src, dst)) = stack.pop() {
            for &c in g.source.children(src) {
                let x = &g.source.vertices[c];
                if tree.child(dst, x.label.as_deref().unwrap_or_default()).is_some() {
                    return Err(TreeError::LabelClash { vertex: dst, label: x.label.clone().unwrap_or_default() });
                }
                let id = tree.vertices.len();
                tree.vertices.push(Vertex {
                    parent: Some(dst),
                    label: x.label.clone(),
                    slice: x.slice + shift,
                    children: Vec::new(),
                    origin: x.origin,
                });
                tree.vertices[dst].children.push(id);
                from_base.push(None);
                from_graft.push(Some((gi, c)));
                stack.push((c, id));
            }
        }
    }
    let (tree, map) = tree.renumber_bfs();
    let mut fb = vec![None; tree.len()];
    let mut fg = vec![None; tree.len()];
    for (old, &new) in map.iter().enumerate() {
        fb[new] = from_base[old];
        fg[new] = from_graft[old];
    }
    Ok(Grafted { tree, from_base: fb, from_graft: fg })
}

fn group_leaves(tree: &EventTree, key: impl Fn(VertexId) -> String) -> Vec<Vec<VertexId>> {
    let mut keys: Vec<String> = Vec::new();
    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    for l in tree.leaves() {
        let k = key(l);
        match keys.iter().position(|x| *x == k) {
            Some(i) => blocks[i].push(l),
            None => {
                keys.push(k);
                blocks.push(vec![l]);
            }
        }
    }
    blocks
}

pub fn repartition(tree: &EventTree, rule: &Repartition<'_>) -> Vec<Vec<VertexId>> {
    if tree.is_empty() {
        return Vec::new();
    }
    match rule {
        Repartition::Single => {
            let all: Vec<_> = tree.leaves().collect();
            if all.is_empty() {
                Vec::new()
            } else {
                vec![all]
            }
        }
        Repartition::Xi(k) => group_leaves(tree, |l| xi(tree, l, *k).join("\u{1f}")),
        Repartition::By(f) => group_leaves(tree, |l| f(tree, l)),
    }
}

/// Merging operation: every leaf in block `k` of `base` receives a copy of
/// `h[k]` (`None` leaves it a leaf). Merging into the empty object requires a
/// single target object, which is returned as is.
pub fn merge(base: &TreeObject, h: &[Option<&TreeObject>], rule: &Repartition<'_>) -> Result<TreeObject, TreeError> {
    if base.tree.is_empty() {
        if h.len() != 1 {
            return Err(TreeError::EmptyBaseNeedsSingleton(h.len()));
        }
        return Ok(match h[0] {
            Some(obj) => {
                let tree = obj.tree.clone();
                let partition = repartition(&tree, rule);
                TreeObject { tree, partition }
            }
            None => TreeObject::empty(),
        });
    }
    base.validate()?;
    if h.len() < base.partition.len() {
        return Err(TreeError::UncoveredBlock(h.len()));
    }
    let mut grafts = Vec::new();
    for (k, block) in base.partition.iter().enumerate() {
        if let Some(obj) = h[k] {
            if obj.tree.is_empty() {
                continue;
            }
            for &l in block {
                grafts.push(Graft { leaf: l, source: &obj.tree, root: 0 });
            }
        }
    }
    let g = graft(&base.tree, &grafts)?;
    let partition = repartition(&g.tree, rule);
    Ok(TreeObject { tree: g.tree, partition })
}

/// Periodic slice structure of a generated tree object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TogKind {
    /// The template is grafted onto every leaf.
    A,
    /// Leaves whose template origin is in `terminating` stop the process.
    B { terminating: BTreeSet<VertexId> },
}

impl TogKind {
    pub fn is_terminating(&self, origin: Origin) -> bool {
        match (self, origin) {
            (TogKind::B { terminating }, Origin::Template(t)) => terminating.contains(&t),
            _ => false,
        }
    }
}

/// A leaf of a generated truncation continues the process unless it is a
/// terminating template leaf.
pub fn is_continuing(tree: &EventTree, kind: &TogKind, l: VertexId) -> bool {
    tree.is_leaf(l) && !kind.is_terminating(tree.origin(l))
}

/// TOG(t_minus1, template, horizon): the time-invariant tree followed by
/// `horizon + 1` slices of template copies. Output partition: kind A, one block;
/// kind B, [continuing frontier leaves, all other leaves].
pub fn build_tog(
    t_minus1: Option<&EventTree>,
    template: &EventTree,
    kind: &TogKind,
    horizon: i32,
) -> Result<TreeObject, TreeError> {
    if horizon < 0 {
        return Err(TreeError::NegativeHorizon(horizon));
    }
    if template.is_empty() {
        return Err(TreeError::EmptyTemplate);
    }
    if let TogKind::B { terminating } = kind {
        let leaves: BTreeSet<_> = template.leaves().collect();
        if terminating.is_empty() {
            return Err(TreeError::InvalidClassifier("no terminating leaves".into()));
        }
        if terminating.len() >= leaves.len() {
            return Err(TreeError::InvalidClassifier("no continuing leaves".into()));
        }
        if let Some(bad) = terminating.iter().find(|t| !leaves.contains(t)) {
            return Err(TreeError::InvalidClassifier(format!("vertex {bad} is not a template leaf")));
        }
    }
    let template = stamp(template, 0, Origin::Template);
    let mut tree = match t_minus1 {
        Some(inv) if !inv.is_empty() => {
            let inv = stamp(inv, -1, Origin::Invariant);
            let grafts: Vec<_> = inv.leaves().map(|l| Graft { leaf: l, source: &template, root: 0 }).collect();
            graft(&inv, &grafts)?.tree
        }
        _ => template.clone(),
    };
    for t in 0..horizon {
        let grafts: Vec<_> = tree
            .leaves()
            .filter(|&l| tree.slice(l) == t && is_continuing(&tree, kind, l))
            .map(|l| Graft { leaf: l, source: &template, root: 0 })
            .collect();
        tree = graft(&tree, &grafts)?.tree;
    }
    let partition = tog_partition(&tree, kind, horizon);
    Ok(TreeObject { tree, partition })
}

fn tog_partition(tree: &EventTree, kind: &TogKind, horizon: i32) -> Vec<Vec<VertexId>> {
    match kind {
        TogKind::A => repartition(tree, &Repartition::Single),
        TogKind::B { .. } => {
            let (cont, term): (Vec<_>, Vec<_>) =
                tree.leaves().partition(|&l| tree.slice(l) == horizon && is_continuing(tree, kind, l));
            [cont, term].into_iter().filter(|b| !b.is_empty()).collect()
        }
    }
}

/// Copy of `tree` with every vertex at `slice` and origins pointing at itself.
fn stamp(tree: &EventTree, slice: i32, origin: fn(VertexId) -> Origin) -> EventTree {
    let mut t = tree.clone();
    for (i, v) in t.vertices.iter_mut().enumerate() {
        v.slice = slice;
        v.origin = origin(i);
    }
    t
}

/// Outcome of a periodicity check on a finite truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Periodicity {
    pub holds: bool,
    /// First situation after slice T without an earlier counterpart.
    pub witness: Option<VertexId>,
}

/// Checks the global, local and time-invariant conditions for every situation
/// after slice `t` against situations in slices `0..=t`. Leaves in the deepest
/// slice are the truncation frontier and match anything.
pub fn check_periodic(obj: &TreeObject, t: i32) -> Periodicity {
    let tree = &obj.tree;
    if tree.is_empty() {
        return Periodicity { holds: true, witness: None };
    }
    let frontier = tree.max_slice();
    let early: Vec<VertexId> = tree.situations().filter(|&s| (0..=t).contains(&tree.slice(s))).collect();
    for a in tree.situations().filter(|&s| tree.slice(s) > t) {
        let anchor = tree.invariant_anchor(a);
        let found = early.iter().any(|&b| {
            tree.invariant_anchor(b) == anchor
                && same_unfolding(tree, a, b, tree.slice(a) - tree.slice(b), frontier)
        });
        if !found {
            return Periodicity { holds: false, witness: Some(a) };
        }
    }
    Periodicity { holds: true, witness: None }
}

fn same_unfolding(tree: &EventTree, a: VertexId, b: VertexId, shift: i32, frontier: i32) -> bool {
    let (va, vb) = (&tree.vertices[a], &tree.vertices[b]);
    if va.is_leaf() && va.slice == frontier {
        return true;
    }
    if va.slice != vb.slice + shift || va.is_leaf() != vb.is_leaf() || va.children.len() != vb.children.len() {
        return false;
    }
    va.children.iter().all(|&ca| {
        let l = tree.vertices[ca].label.as_deref().unwrap_or_default();
        match tree.child(b, l) {
            Some(cb) => same_unfolding(tree, ca, cb, shift, frontier),
            None => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> EventTree {
        let mut t = EventTree::with_root(0, Origin::Free);
        t.add_child(0, "a", Origin::Free).unwrap();
        t.add_child(0, "b", Origin::Free).unwrap();
        t
    }

    #[test]
    fn floret_of_single_floret_tree() {
        let t = binary();
        let f = floret(&t, 0).unwrap();
        assert_eq!(f.children, vec![("a".to_string(), 1), ("b".to_string(), 2)]);
        assert_eq!(floret(&t, 1), Err(TreeError::NotSituation(1)));
        assert_eq!(floret(&t, 9), Err(TreeError::UnknownVertex(9)));
    }

    #[test]
    fn duplicate_sibling_rejected() {
        let mut t = binary();
        assert!(matches!(t.add_child(0, "a", Origin::Free), Err(TreeError::LabelClash { .. })));
    }

    #[test]
    fn tog_zero_is_template() {
        let t = binary();
        let tog = build_tog(None, &t, &TogKind::A, 0).unwrap();
        assert_eq!(tog.tree.len(), 3);
        assert_eq!(tog.partition, vec![vec![1, 2]]);
        assert!(build_tog(None, &t, &TogKind::A, -1).is_err());
    }

    #[test]
    fn kind_b_classifier_checked() {
        let t = binary();
        let all = TogKind::B { terminating: [1, 2].into() };
        assert!(matches!(build_tog(None, &t, &all, 1), Err(TreeError::InvalidClassifier(_))));
        let none = TogKind::B { terminating: BTreeSet::new() };
        assert!(matches!(build_tog(None, &t, &none, 1), Err(TreeError::InvalidClassifier(_))));
    }

    #[test]
    fn merge_into_empty_needs_singleton() {
        let obj = TreeObject::single_block(binary());
        let out = merge(&TreeObject::empty(), &[Some(&obj)], &Repartition::Single).unwrap();
        assert_eq!(out.tree, obj.tree);
        assert_eq!(
            merge(&TreeObject::empty(), &[Some(&obj), None], &Repartition::Single),
            Err(TreeError::EmptyBaseNeedsSingleton(2))
        );
    }

    #[test]
    fn xi_of_root_is_empty() {
        let t = binary();
        assert!(xi(&t, 0, 3).is_empty());
    }
}
