//! Queries on an NT-DCEG: positions consistent with observed events, pruning
//! to the reachable future, recent-history signatures, the legend check and
//! context-specific conditional independence.
//!
//! A variable is a named label set; a floret belongs to a variable when its
//! out-labels are exactly that set. Occurrences are written `R(2)`, `R(t)` or
//! `R(t+1)`; constraints are `R(0)=a`, `R(0)!=a`, `R(0) in {r, v}` or a bare
//! occurrence, meaning "conditioned on, whatever the value".

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph_transform::{ceg_at, BuildError, ColouredGraph, Marker, Ntdceg, VKey};
use crate::staging::{StageId, StagedTree};
use crate::tree_core::VertexId;

pub type Variables = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable {0} is not identifiable: {1}")]
    NotIdentifiable(String, String),
    #[error("{0}")]
    BadContext(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{0}")]
    Graph(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SliceExpr {
    Abs(i32),
    /// t + k
    Rel(i32),
}

impl SliceExpr {
    fn eval(self, t: i32) -> i32 {
        match self {
            SliceExpr::Abs(s) => s,
            SliceExpr::Rel(k) => t + k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub var: String,
    pub slice: SliceExpr,
}

impl Occurrence {
    fn show(&self, t: i32) -> String {
        format!("{}({})", self.var, self.slice.eval(t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub occ: Occurrence,
    /// Admissible labels; `None` for a bare conditioning variable.
    pub allowed: Option<BTreeSet<String>>,
}

/// Observed events, addressing the positions entered at the beginning of
/// slice `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub at: i32,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiStatement {
    pub target: Occurrence,
    pub independent_of: Vec<Occurrence>,
    pub given: Vec<Constraint>,
}

struct Lexer<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax { pos: self.s[..self.pos].chars().count() + 1, msg: msg.into() })
    }

    fn ws(&mut self) {
        while let Some(c) = self.rest().chars().next().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<String, QueryError> {
        self.ws();
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '+' | '-' | '*'))
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return self.err("expected a name");
        }
        let w = self.rest()[..len].to_string();
        self.pos += len;
        Ok(w)
    }

    fn done(&mut self) -> bool {
        self.ws();
        self.rest().is_empty()
    }

    fn int(&mut self) -> Result<i32, QueryError> {
        self.ws();
        let neg = self.eat("-");
        self.ws();
        let len: usize = self.rest().chars().take_while(char::is_ascii_digit).count();
        if len == 0 {
            return self.err("expected an integer");
        }
        let v: i32 = match self.rest()[..len].parse() {
            Ok(v) => v,
            Err(_) => return self.err("integer out of range"),
        };
        self.pos += len;
        Ok(if neg { -v } else { v })
    }

    fn occurrence(&mut self) -> Result<Occurrence, QueryError> {
        self.ws();
        let len: usize = self.rest().chars().take_while(|c| c.is_alphanumeric() || *c == '_').map(char::len_utf8).sum();
        if len == 0 {
            return self.err("expected a variable");
        }
        let var = self.rest()[..len].to_string();
        self.pos += len;
        if !self.eat("(") {
            return self.err("expected `(` after the variable");
        }
        let slice = if self.eat("t") {
            if self.eat("+") {
                SliceExpr::Rel(self.int()?)
            } else if self.eat("-") {
                SliceExpr::Rel(-self.int()?)
            } else {
                SliceExpr::Rel(0)
            }
        } else {
            SliceExpr::Abs(self.int()?)
        };
        if !self.eat(")") {
            return self.err("expected `)`");
        }
        Ok(Occurrence { var, slice })
    }

    fn constraint(&mut self, vars: &Variables) -> Result<Constraint, QueryError> {
        let occ = self.occurrence()?;
        let labels = vars.get(&occ.var).ok_or_else(|| QueryError::UnknownVariable(occ.var.clone()))?;
        let check = |lx: &Lexer, l: &str| {
            if labels.contains(l) {
                Ok(())
            } else {
                lx.err(format!("`{l}` is not a value of {}", occ.var))
            }
        };
        let allowed = if self.eat("!=") || self.eat("≠") {
            let l = self.word()?;
            check(self, &l)?;
            Some(labels.iter().filter(|x| **x != l).cloned().collect())
        } else if self.eat("=") {
            let l = self.word()?;
            check(self, &l)?;
            Some(BTreeSet::from([l]))
        } else if self.eat("in") {
            if !self.eat("{") {
                return self.err("expected `{`");
            }
            let mut set = BTreeSet::new();
            loop {
                let l = self.word()?;
                check(self, &l)?;
                set.insert(l);
                if self.eat("}") {
                    break;
                }
                if !self.eat(",") {
                    return self.err("expected `,` or `}`");
                }
            }
            Some(set)
        } else {
            None
        };
        Ok(Constraint { occ, allowed })
    }

    fn constraints(&mut self, vars: &Variables) -> Result<Vec<Constraint>, QueryError> {
        let paren = self.eat("(");
        let mut out = Vec::new();
        if !(paren && self.eat(")")) && !self.done() {
            loop {
                out.push(self.constraint(vars)?);
                if !self.eat(",") {
                    break;
                }
            }
            if paren && !self.eat(")") {
                return self.err("expected `)`");
            }
        }
        Ok(out)
    }
}

fn known(vars: &Variables, occ: &Occurrence) -> Result<(), QueryError> {
    if vars.contains_key(&occ.var) {
        Ok(())
    } else {
        Err(QueryError::UnknownVariable(occ.var.clone()))
    }
}

impl Context {
    /// Parses a comma-separated constraint list. Slices must be explicit;
    /// `at` defaults to the slice after the last one mentioned.
    pub fn parse(text: &str, vars: &Variables, at: Option<i32>) -> Result<Context, QueryError> {
        let mut lx = Lexer { s: text, pos: 0 };
        let constraints = lx.constraints(vars)?;
        if !lx.done() {
            return lx.err("unexpected input");
        }
        let mut last = None;
        for c in &constraints {
            match c.occ.slice {
                SliceExpr::Abs(s) => last = last.max(Some(s)),
                SliceExpr::Rel(_) => return Err(QueryError::BadContext("contexts need explicit slices".into())),
            }
        }
        Ok(Context { at: at.unwrap_or_else(|| last.map_or(0, |s| s + 1)), constraints })
    }
}

impl CiStatement {
    pub fn parse(text: &str, vars: &Variables) -> Result<CiStatement, QueryError> {
        let mut lx = Lexer { s: text, pos: 0 };
        let target = lx.occurrence()?;
        known(vars, &target)?;
        if !(lx.eat("⊥") || lx.eat("_||_") || lx.eat("⫫") || lx.eat("indep")) {
            return lx.err("expected `⊥`, `_||_` or `indep`");
        }
        let mut independent_of = Vec::new();
        let paren = lx.eat("(");
        loop {
            let o = lx.occurrence()?;
            known(vars, &o)?;
            independent_of.push(o);
            if !paren || !lx.eat(",") {
                break;
            }
        }
        if paren && !lx.eat(")") {
            return lx.err("expected `)`");
        }
        let given = if lx.eat("|") { lx.constraints(vars)? } else { Vec::new() };
        if !lx.done() {
            return lx.err("unexpected input");
        }
        Ok(CiStatement { target, independent_of, given })
    }

    fn relative(&self) -> bool {
        std::iter::once(&self.target)
            .chain(&self.independent_of)
            .chain(self.given.iter().map(|c| &c.occ))
            .any(|o| matches!(o.slice, SliceExpr::Rel(_)))
    }
}

fn out_labels(g: &ColouredGraph, v: usize) -> BTreeSet<&str> {
    g.out_edges(v).map(|e| e.label.as_str()).collect()
}

fn is_floret_of(labels: &BTreeSet<&str>, set: &BTreeSet<String>) -> bool {
    labels.len() == set.len() && set.iter().all(|l| labels.contains(l.as_str()))
}

fn moves_slice(m: Marker) -> bool {
    matches!(m, Marker::Temporal | Marker::Cyclical)
}

/// Positions a unit can be in at the beginning of `ctx.at` given the
/// observed events, with the conditional probability of each when the model
/// has probabilities. An empty map means the context is contradictory.
pub fn events_to_positions(m: &Ntdceg, vars: &Variables, ctx: &Context) -> Result<BTreeMap<usize, f64>, QueryError> {
    let g = &m.graph;
    let root_slice = g.nodes[m.root].slice;
    let mut sets = Vec::new();
    for c in &ctx.constraints {
        let SliceExpr::Abs(s) = c.occ.slice else {
            return Err(QueryError::BadContext("contexts need explicit slices".into()));
        };
        if s >= ctx.at {
            return Err(QueryError::BadContext(format!("{} is not before slice {}", c.occ.show(0), ctx.at)));
        }
        if s < -1 {
            return Err(QueryError::BadContext(format!("slice {s} precedes the process")));
        }
        let set = vars.get(&c.occ.var).ok_or_else(|| QueryError::UnknownVariable(c.occ.var.clone()))?;
        sets.push((s, set, c.allowed.as_ref()));
    }
    if ctx.at < root_slice {
        return Err(QueryError::BadContext(format!("slice {} precedes the process", ctx.at)));
    }
    if ctx.at == root_slice {
        return Ok(BTreeMap::from([(m.root, 1.0)]));
    }
    if sets.len() > 64 {
        return Err(QueryError::BadContext("too many constraints".into()));
    }
    let full: u64 = if sets.is_empty() { 0 } else { u64::MAX >> (64 - sets.len()) };
    // within a slice the graph is acyclic, so states can be processed by
    // (slice, topological rank)
    let mut plain = ColouredGraph::new();
    for n in &g.nodes {
        plain.add_node(n.clone());
    }
    for e in &g.edges {
        if !moves_slice(e.marker) {
            plain.add_edge(e.clone());
        }
    }
    let order = plain.topological_order().ok_or_else(|| QueryError::Graph("cycle within a slice".into()))?;
    let mut rank = vec![0usize; g.nodes.len()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut queue: BTreeMap<(i32, usize, usize, u64), f64> = BTreeMap::new();
    queue.insert((root_slice, rank[m.root], m.root, 0), 1.0);
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    while let Some(((slice, _, v, mask), mass)) = queue.pop_first() {
        let labels = out_labels(g, v);
        for e in g.out_edges(v) {
            let mut next = mask;
            let mut ok = true;
            for (i, (s, set, allowed)) in sets.iter().enumerate() {
                if *s == slice && is_floret_of(&labels, set) {
                    if allowed.is_some_and(|a| !a.contains(&e.label)) {
                        ok = false;
                    }
                    next |= 1 << i;
                }
            }
            if !ok || g.nodes[e.to].kind == crate::graph_transform::NodeKind::Sink {
                continue;
            }
            let q = mass * e.prob.unwrap_or(1.0);
            let ns = if moves_slice(e.marker) { slice + 1 } else { slice };
            if ns == ctx.at {
                if next == full {
                    *out.entry(e.to).or_default() += q;
                }
            } else {
                *queue.entry((ns, rank[e.to], e.to, next)).or_default() += q;
            }
        }
    }
    let total: f64 = out.values().sum();
    if total > 0.0 && g.edges.iter().all(|e| e.prob.is_some()) {
        for x in out.values_mut() {
            *x /= total;
        }
    }
    Ok(out)
}

/// A vertex-induced subgraph; `vertices[i]` is the original id of vertex `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    pub graph: ColouredGraph,
    pub vertices: Vec<usize>,
}

impl Pruned {
    pub fn local(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }
}

/// The part of `g` that unfolds from `start`.
pub fn prune_graph(g: &ColouredGraph, start: &BTreeSet<usize>) -> Pruned {
    let start: Vec<usize> = start.iter().copied().collect();
    let seen = g.reachable(&start, |_| true);
    let vertices: Vec<usize> = (0..g.nodes.len()).filter(|&v| seen[v]).collect();
    let mut index = vec![usize::MAX; g.nodes.len()];
    let mut out = ColouredGraph::new();
    for &v in &vertices {
        index[v] = out.add_node(g.nodes[v].clone());
    }
    for e in &g.edges {
        if seen[e.from] {
            out.add_edge(crate::graph_transform::Edge { from: index[e.from], to: index[e.to], ..e.clone() });
        }
    }
    Pruned { graph: out, vertices }
}

pub fn prune(m: &Ntdceg, we: &BTreeSet<usize>) -> Pruned {
    prune_graph(&m.graph, we)
}

/// Ξ_c(w, k): the label sequences of root-to-`w` walks keeping only events of
/// the last `k` slices before `w` and time-invariant events. In a cyclic
/// graph the cyclical edges are ignored.
pub fn xi_c(g: &ColouredGraph, root: usize, w: usize, k: usize) -> Result<BTreeSet<Vec<String>>, QueryError> {
    let lo = g.nodes[w].slice.saturating_sub(k as i32);
    let plain = if g.is_cyclic() {
        let mut p = ColouredGraph::new();
        for n in &g.nodes {
            p.add_node(n.clone());
        }
        for e in g.edges.iter().filter(|e| e.marker != Marker::Cyclical) {
            p.add_edge(e.clone());
        }
        p
    } else {
        g.clone()
    };
    let order = plain.topological_order().ok_or_else(|| QueryError::Graph("graph has a cycle".into()))?;
    let back = plain.reachable(&[root], |_| true);
    let mut into = vec![Vec::new(); g.nodes.len()];
    for e in &plain.edges {
        into[e.to].push(e);
    }
    let mut hist: Vec<Option<BTreeSet<Vec<String>>>> = vec![None; g.nodes.len()];
    hist[root] = Some(BTreeSet::from([Vec::new()]));
    for &v in &order {
        if v == root || !back[v] {
            continue;
        }
        let mut set = BTreeSet::new();
        for e in &into[v] {
            let Some(h) = &hist[e.from] else { continue };
            let tau = g.nodes[e.from].slice;
            for s in h {
                let mut s = s.clone();
                if tau == -1 || tau >= lo {
                    s.push(e.label.clone());
                }
                set.insert(s);
            }
        }
        hist[v] = Some(set);
        if v == w {
            break;
        }
    }
    Ok(hist[w].take().unwrap_or_default())
}

/// Ξ_c on the model graph.
pub fn xi_c_model(m: &Ntdceg, w: usize, k: usize) -> Result<BTreeSet<Vec<String>>, QueryError> {
    xi_c(&m.graph, m.root, w, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendFailure {
    pub t: i32,
    pub a: String,
    pub b: String,
    pub only_a: Vec<Vec<String>>,
    pub only_b: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendReport {
    pub horizon: i32,
    pub checked: usize,
    pub failures: Vec<LegendFailure>,
}

impl LegendReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Builds C_T and compares the recent histories of every f_t(head) with
/// those of f_{N-1} of the same head, t = N..=T-N+eta.
pub fn legend_map(m: &Ntdceg, horizon: i32) -> Result<LegendReport, QueryError> {
    let n = m.n as i32;
    if horizon < 2 * n - m.eta {
        return Err(QueryError::BadContext(format!("the horizon must be at least {}", 2 * n - m.eta)));
    }
    let g = ceg_at(m, horizon).map_err(QueryError::Graph)?.to_coloured();
    let root = g.node_by_name(&VKey::Pos { w: m.root, sup: 0 }.name()).ok_or_else(|| QueryError::Graph("no root".into()))?;
    let mut report = LegendReport { horizon, checked: 0, failures: Vec::new() };
    for t in n..=horizon - n + m.eta {
        for &h in &m.heads {
            let ka = VKey::Pos { w: h, sup: t }.name();
            let kb = VKey::Pos { w: h, sup: n - 1 }.name();
            report.checked += 1;
            let (Some(a), Some(b)) = (g.node_by_name(&ka), g.node_by_name(&kb)) else {
                report.failures.push(LegendFailure { t, a: ka, b: kb, only_a: Vec::new(), only_b: Vec::new() });
                continue;
            };
            let xa = xi_c(&g, root, a, m.n - 1)?;
            let xb = xi_c(&g, root, b, m.n - 1)?;
            if xa != xb {
                report.failures.push(LegendFailure {
                    t,
                    a: ka,
                    b: kb,
                    only_a: xa.difference(&xb).cloned().collect(),
                    only_b: xb.difference(&xa).cloned().collect(),
                });
            }
        }
    }
    Ok(report)
}

/// One completion of the conditioning context and the stage shared by every
/// target floret under it.
#[derive(Debug, Clone, PartialEq)]
pub struct CiGroup {
    pub t: Option<i32>,
    pub key: Vec<(String, String)>,
    pub stage: StageId,
    /// Positions (or tree vertices) of the target florets.
    pub members: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiCounterexample {
    pub t: Option<i32>,
    pub key: Vec<(String, String)>,
    pub a: (StageId, BTreeSet<usize>),
    pub b: (StageId, BTreeSet<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiResult {
    pub holds: bool,
    pub witness: Vec<CiGroup>,
    pub counterexample: Option<CiCounterexample>,
}

/// Instances of the slice symbol `t` tried for relative statements.
pub fn ci_instances(m: &Ntdceg) -> std::ops::RangeInclusive<i32> {
    0..=m.n as i32
}

/// Certifies a statement on a staged tree by stage equality: for every
/// completion of the bare conditioning variables, all target florets whose
/// histories satisfy the constraints must be in one stage. `locate` names
/// the florets in the witness.
pub fn verify_ci_staged(
    st: &StagedTree,
    vars: &Variables,
    s: &CiStatement,
    instances: &[Option<i32>],
    locate: &dyn Fn(VertexId) -> usize,
) -> Result<CiResult, QueryError> {
    let tree = &st.tree;
    let set_of = |name: &str| vars.get(name).ok_or_else(|| QueryError::UnknownVariable(name.to_string()));
    set_of(&s.target.var)?;
    for o in s.independent_of.iter().chain(s.given.iter().map(|c| &c.occ)) {
        set_of(&o.var)?;
    }
    let floret_vars = |v: VertexId| -> Vec<&str> {
        let labels: BTreeSet<&str> = tree.children(v).iter().filter_map(|&c| tree.label(c)).collect();
        vars.iter().filter(|(_, set)| is_floret_of(&labels, set)).map(|(n, _)| n.as_str()).collect()
    };
    let mut result = CiResult { holds: true, witness: Vec::new(), counterexample: None };
    let mut found = false;
    for &inst in instances {
        let t = inst.unwrap_or(0);
        let ts = s.target.slice.eval(t);
        let mut groups: BTreeMap<Vec<(String, String)>, BTreeMap<StageId, BTreeSet<usize>>> = BTreeMap::new();
        for v in tree.situations() {
            if tree.slice(v) != ts || !floret_vars(v).contains(&s.target.var.as_str()) {
                continue;
            }
            found = true;
            let path = tree.path_to(v);
            let mut hist: BTreeMap<(String, i32), String> = BTreeMap::new();
            for w in path.windows(2) {
                let label = tree.label(w[1]).unwrap_or_default().to_string();
                for name in floret_vars(w[0]) {
                    if hist.insert((name.to_string(), tree.slice(w[0])), label.clone()).is_some() {
                        return Err(QueryError::NotIdentifiable(
                            format!("{name}({})", tree.slice(w[0])),
                            "it occurs twice in one slice".into(),
                        ));
                    }
                }
            }
            let value = |o: &Occurrence| -> Result<&String, QueryError> {
                hist.get(&(o.var.clone(), o.slice.eval(t))).ok_or_else(|| {
                    QueryError::NotIdentifiable(o.show(t), format!("it is not observed before {}", s.target.show(t)))
                })
            };
            for o in &s.independent_of {
                value(o)?;
            }
            let mut key = Vec::new();
            let mut keep = true;
            for c in &s.given {
                let x = value(&c.occ)?;
                match &c.allowed {
                    Some(a) => keep &= a.contains(x),
                    None => key.push((c.occ.show(t), x.clone())),
                }
            }
            if !keep {
                continue;
            }
            let stage = st.stage(v).ok_or_else(|| QueryError::Graph(format!("situation {v} has no stage")))?;
            groups.entry(key).or_default().entry(stage).or_default().insert(locate(v));
        }
        for (key, stages) in groups {
            let mut it = stages.into_iter();
            let (stage, members) = it.next().expect("groups are non-empty");
            if let Some(other) = it.next() {
                result.holds = false;
                result.counterexample.get_or_insert(CiCounterexample { t: inst, key: key.clone(), a: (stage, members.clone()), b: other });
            }
            result.witness.push(CiGroup { t: inst, key, stage, members });
        }
    }
    if !found {
        return Err(QueryError::NotIdentifiable(s.target.show(0), "no floret carries its labels".into()));
    }
    if !result.holds {
        result.witness.clear();
    }
    Ok(result)
}

/// Verifies a statement against the model; relative statements are checked
/// for every t in `ci_instances`, which covers the initial slices and one
/// homogeneous repetition.
pub fn verify_ci(m: &Ntdceg, vars: &Variables, s: &CiStatement) -> Result<CiResult, QueryError> {
    for o in std::iter::once(&s.target).chain(&s.independent_of).chain(s.given.iter().map(|c| &c.occ)) {
        let set = vars.get(&o.var).ok_or_else(|| QueryError::UnknownVariable(o.var.clone()))?;
        if !(0..m.graph.nodes.len()).any(|v| is_floret_of(&out_labels(&m.graph, v), set)) {
            return Err(QueryError::NotIdentifiable(o.var.clone(), "no floret of the graph carries its labels".into()));
        }
    }
    let instances: Vec<Option<i32>> = if s.relative() {
        ci_instances(m).map(Some).collect()
    } else {
        vec![None]
    };
    let horizon = instances.iter().map(|t| s.target.slice.eval(t.unwrap_or(0))).max().unwrap_or(0).max(0);
    let tr = m.truncation(horizon)?;
    let locate = |v: VertexId| m.position_of[tr.image[v]];
    verify_ci_staged(&tr.st, vars, s, &instances, &locate)
}

/// Re-checks a witness against the model's colouring.
pub fn check_witness(m: &Ntdceg, r: &CiResult) -> bool {
    r.witness.iter().all(|g| g.members.iter().all(|&w| m.graph.nodes[w].colour == Some(g.stage)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Variables {
        [("N", &["s", "f", "i"][..]), ("R", &["r", "v", "a"]), ("T", &["n", "t"])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    #[test]
    fn parses_ci() {
        let s = CiStatement::parse("R(t+1) ⊥ N(t+1) | (R(t)=a, T(t)=n)", &vars()).unwrap();
        assert_eq!(s.target.slice, SliceExpr::Rel(1));
        assert_eq!(s.given.len(), 2);
        let s = CiStatement::parse("T(0) _||_ (N(0), R(0)) | R(0) != a", &vars()).unwrap();
        assert_eq!(s.independent_of.len(), 2);
        assert_eq!(s.given[0].allowed.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn parses_context() {
        let c = Context::parse("N(0)=i, R(0) in {a, v}", &vars(), None).unwrap();
        assert_eq!(c.at, 1);
        assert!(Context::parse("N(0)=x", &vars(), None).is_err());
        assert_eq!(Context::parse("", &vars(), None).unwrap().at, 0);
    }
}
