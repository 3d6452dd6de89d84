use std::collections::BTreeMap;

use crate::staging::{StageId, StagedTree};
use crate::tree_core::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Position,
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Plain,
    Temporal,
    Cyclical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub colour: Option<StageId>,
    pub slice: i32,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: String,
    /// Canonical label under the stage bijection; refinement matches on this.
    pub key: String,
    pub marker: Marker,
    pub prob: Option<f64>,
}

/// Vertex-coloured, edge-labelled directed multigraph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColouredGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
}

impl ColouredGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.out.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, edge: Edge) -> usize {
        let id = self.edges.len();
        self.out[edge.from].push(id);
        self.edges.push(edge);
        id
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[v].iter().map(move |&e| &self.edges[e])
    }

    pub fn out_edge_ids(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn successor(&self, v: usize, label: &str) -> Option<usize> {
        self.out_edges(v).find(|e| e.label == label).map(|e| e.to)
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Checks distinct out-labels, sink out-degree zero.
    pub fn validate(&self) -> Result<(), String> {
        for (v, n) in self.nodes.iter().enumerate() {
            let mut labels: Vec<&str> = self.out_edges(v).map(|e| e.label.as_str()).collect();
            if n.kind == NodeKind::Sink && !labels.is_empty() {
                return Err(format!("sink {} has out-edges", n.name));
            }
            labels.sort_unstable();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("vertex {} has repeated out-labels", n.name));
            }
        }
        Ok(())
    }

    /// Whether the graph has a directed cycle.
    pub fn is_cyclic(&self) -> bool {
        self.topological_order().is_none()
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = stack.pop() {
            order.push(v);
            for &e in &self.out[v] {
                let t = self.edges[e].to;
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    stack.push(t);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Vertices reachable from `start` along edges accepted by `keep`.
    pub fn reachable(&self, start: &[usize], keep: impl Fn(&Edge) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = start.to_vec();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            for e in self.out_edges(v) {
                if keep(e) && !seen[e.to] {
                    stack.push(e.to);
                }
            }
        }
        seen
    }

    /// Quotient by a class map; class representatives provide the out-edges.
    /// `classes[v]` must be a dense numbering and `nodes[k]` describes class `k`.
    pub fn quotient(&self, classes: &[usize], nodes: Vec<Node>) -> ColouredGraph {
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for (v, &c) in classes.iter().enumerate() {
            rep.entry(c).or_insert(v);
        }
        let mut g = ColouredGraph::new();
        for n in nodes {
            g.add_node(n);
        }
        for (&c, &v) in &rep {
            for e in self.out_edges(v) {
                g.add_edge(Edge { from: c, to: classes[e.to], ..e.clone() });
            }
        }
        g
    }
}

/// The staged tree as a coloured graph: situations are positions, leaves are
/// sinks. Node `i` is tree vertex `i`.
pub fn tree_graph(st: &StagedTree) -> ColouredGraph {
    let tree = &st.tree;
    let mut g = ColouredGraph::new();
    for v in 0..tree.len() {
        let leaf = tree.is_leaf(v) && v != 0;
        g.add_node(Node {
            name: format!("s{v}"),
            colour: if leaf { None } else { st.stage(v) },
            slice: tree.slice(v),
            kind: if leaf { NodeKind::Sink } else { NodeKind::Position },
        });
    }
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root vertex");
        g.add_edge(tree_edge(st, p, v, v));
    }
    g
}

/// Edge `p -> child` of the tree drawn to graph vertex `to`.
pub(crate) fn tree_edge(st: &StagedTree, p: VertexId, child: VertexId, to: usize) -> Edge {
    let tree = &st.tree;
    let label = tree.label(child).unwrap_or_default().to_string();
    let key = st.stages.canonical(p, &label).to_string();
    let temporal = !tree.is_leaf(child) && tree.slice(child) > tree.slice(p);
    Edge {
        from: p,
        to,
        label,
        key,
        marker: if temporal { Marker::Temporal } else { Marker::Plain },
        prob: st.probs.as_ref().and_then(|_| st.edge_probability(child).ok()),
    }
}
