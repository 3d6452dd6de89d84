//! The `.dceg` model specification format.
//!
//! ```text
//! dceg 1
//! N = 2
//! kind = B
//! terminate on: t
//! variable T = n t
//!
//! time_invariant { / : x y }
//! template {
//!   / : s f i
//!   * : r v a
//!   */* : n t
//! }
//! stages {
//!   u0 = /
//!   u4 = */r, */v
//!   map s/v : n=n t=t
//! }
//! probabilities {
//!   u0 : s=0.8 f=0.15 i=0.05
//! }
//! ```
//!
//! Floret lines inside `time_invariant` and `template` are `path : labels`
//! with paths relative to the block's root (`/` is the root, `*` matches any
//! label). A template block may name the time-invariant leaf it is attached to
//! (`template x { .. }`). Stage members are paths from the root of the whole
//! generated tree; an `inv:` prefix restricts a pattern to time-invariant
//! situations. Situations not listed in any stage get a singleton stage named
//! by their path. Statements end at a newline or `;`, `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph_transform::{from_staged, Ntdceg};
use crate::staging::{assign_stages, Probabilities, StagedTree, StagingError, SUM_TOLERANCE};
use crate::tree_core::{build_tog, EventTree, Origin, TogKind, VertexId};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Source position. Ignored by equality so that a dumped and re-parsed spec
/// compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Loc {
    fn diag(self, message: impl Into<String>) -> Diagnostic {
        Diagnostic { line: self.line, col: self.col, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub labels: BTreeSet<String>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDecl {
    /// Time-invariant leaf the template hangs from, when stated.
    pub anchor: Option<String>,
    pub tree: EventTree,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageDecl {
    pub name: String,
    pub members: Vec<String>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapDecl {
    pub pattern: String,
    /// member label -> canonical label
    pub pairs: BTreeMap<String, String>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbDecl {
    pub stage: String,
    pub dist: BTreeMap<String, f64>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub n: usize,
    pub kind: SpecKind,
    pub terminate: BTreeSet<String>,
    /// Digits used when printing numbers.
    pub digits: Option<usize>,
    pub variables: Vec<VariableDecl>,
    pub time_invariant: Option<EventTree>,
    pub templates: Vec<TemplateDecl>,
    pub stages: Vec<StageDecl>,
    pub maps: Vec<MapDecl>,
    pub probabilities: Option<Vec<ProbDecl>>,
    pub stages_loc: Loc,
}

#[derive(Debug, Clone)]
struct Item {
    loc: Loc,
    text: String,
}

fn lex(text: &str) -> Vec<Item> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default();
        let mut start = 0;
        let push = |from: usize, to: usize, out: &mut Vec<Item>| {
            let s = &line[from..to];
            let trimmed = s.trim_start();
            if trimmed.trim().is_empty() {
                return;
            }
            let col = line[..from + (s.len() - trimmed.len())].chars().count() + 1;
            out.push(Item { loc: Loc { line: ln + 1, col }, text: trimmed.trim_end().to_string() });
        };
        for (i, ch) in line.char_indices() {
            if matches!(ch, ';' | '{' | '}') {
                push(start, i, &mut out);
                if ch != ';' {
                    let col = line[..i].chars().count() + 1;
                    out.push(Item { loc: Loc { line: ln + 1, col }, text: ch.to_string() });
                }
                start = i + ch.len_utf8();
            }
        }
        push(start, line.len(), &mut out);
    }
    out
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '+' | '-'))
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty())
}

fn parse_labels(s: &str, loc: Loc, errs: &mut Vec<Diagnostic>) -> Vec<String> {
    let mut out = Vec::new();
    for w in split_list(s) {
        if is_label(w) {
            out.push(w.to_string());
        } else {
            errs.push(loc.diag(format!("`{w}` is not a valid label")));
        }
    }
    out
}

/// Pattern segments; `None` for a malformed pattern.
fn segments(p: &str) -> Option<Vec<&str>> {
    let p = p.trim();
    if p == "/" {
        return Some(Vec::new());
    }
    let segs: Vec<&str> = p.split('/').collect();
    segs.iter().all(|s| *s == "*" || is_label(s)).then_some(segs)
}

/// Vertices whose root path matches `pattern`, in id order.
pub fn match_pattern(tree: &EventTree, pattern: &str) -> Option<Vec<VertexId>> {
    let (inv, p) = match pattern.trim().strip_prefix("inv:") {
        Some(rest) => (true, rest),
        None => (false, pattern),
    };
    let segs = segments(p)?;
    let Some(root) = tree.root() else { return Some(Vec::new()) };
    let mut cur = vec![root];
    for seg in segs {
        cur = cur
            .iter()
            .flat_map(|&v| tree.children(v).iter().copied())
            .filter(|&c| seg == "*" || tree.label(c) == Some(seg))
            .collect();
    }
    if inv {
        cur.retain(|&v| tree.slice(v) < 0);
    }
    cur.sort_unstable();
    Some(cur)
}

/// Path of `v` as written in a spec.
pub fn path_string(tree: &EventTree, v: VertexId) -> String {
    let labels = tree.path_labels(v);
    if labels.is_empty() {
        "/".into()
    } else {
        labels.join("/")
    }
}

struct Parser {
    items: Vec<Item>,
    pos: usize,
    errs: Vec<Diagnostic>,
}

impl Parser {
    fn next(&mut self) -> Option<Item> {
        let it = self.items.get(self.pos).cloned();
        self.pos += 1;
        it
    }

    fn peek_is(&self, s: &str) -> bool {
        self.items.get(self.pos).is_some_and(|i| i.text == s)
    }

    /// Statements of a block up to the matching `}`.
    fn block(&mut self, open: Loc) -> Vec<Item> {
        let mut out = Vec::new();
        loop {
            match self.next() {
                None => {
                    self.errs.push(open.diag("unclosed block"));
                    return out;
                }
                Some(it) if it.text == "}" => return out,
                Some(it) if it.text == "{" => self.errs.push(it.loc.diag("unexpected `{`")),
                Some(it) => out.push(it),
            }
        }
    }

    fn tree(&mut self, body: &[Item], what: &str) -> EventTree {
        let mut tree = EventTree::with_root(0, Origin::Free);
        for it in body {
            let Some((path, labels)) = it.text.split_once(':') else {
                self.errs.push(it.loc.diag(format!("expected `path : labels` in {what}")));
                continue;
            };
            let Some(targets) = match_pattern(&tree, path) else {
                self.errs.push(it.loc.diag(format!("malformed path `{}`", path.trim())));
                continue;
            };
            if targets.is_empty() || path.trim().starts_with("inv:") {
                self.errs.push(it.loc.diag(format!("path `{}` does not name a vertex of the {what}", path.trim())));
                continue;
            }
            let labels = parse_labels(labels, it.loc, &mut self.errs);
            if labels.is_empty() {
                self.errs.push(it.loc.diag("a floret needs at least one label"));
            }
            for v in targets {
                for l in &labels {
                    if tree.add_child(v, l, Origin::Free).is_err() {
                        self.errs.push(it.loc.diag(format!(
                            "duplicate label `{l}` below `{}`",
                            path_string(&tree, v)
                        )));
                    }
                }
            }
        }
        tree.renumber_bfs().0
    }
}

fn parse_number<T: std::str::FromStr>(v: &str, loc: Loc, errs: &mut Vec<Diagnostic>, what: &str) -> Option<T> {
    match v.trim().parse() {
        Ok(x) => Some(x),
        Err(_) => {
            errs.push(loc.diag(format!("{what} must be a number, got `{}`", v.trim())));
            None
        }
    }
}

fn syntax(text: &str) -> Result<ModelSpec, Vec<Diagnostic>> {
    let mut p = Parser { items: lex(text), pos: 0, errs: Vec::new() };
    let mut n = None;
    let mut kind = None;
    let mut terminate = BTreeSet::new();
    let mut terminate_loc = None;
    let mut digits = None;
    let mut variables: Vec<VariableDecl> = Vec::new();
    let mut time_invariant = None;
    let mut templates = Vec::new();
    let mut stages: Vec<StageDecl> = Vec::new();
    let mut maps = Vec::new();
    let mut probabilities: Option<Vec<ProbDecl>> = None;
    let mut stages_loc = None;

    while let Some(it) = p.next() {
        let loc = it.loc;
        if p.peek_is("{") {
            let open = p.next().map_or(loc, |i| i.loc);
            let body = p.block(open);
            let mut words = it.text.split_whitespace();
            let head = words.next().unwrap_or_default();
            let arg: Vec<&str> = words.collect();
            match head {
                "time_invariant" | "template" if arg.len() > usize::from(head == "template") => {
                    p.errs.push(loc.diag(format!("unexpected argument to `{head}`")));
                }
                "time_invariant" => {
                    if time_invariant.is_some() {
                        p.errs.push(loc.diag("duplicate time_invariant block"));
                    }
                    let t = p.tree(&body, "time-invariant tree");
                    time_invariant = Some(t);
                }
                "template" => {
                    let tree = p.tree(&body, "template");
                    templates.push(TemplateDecl { anchor: arg.first().map(|s| s.to_string()), tree, loc });
                }
                "stages" if arg.is_empty() => {
                    if stages_loc.is_some() {
                        p.errs.push(loc.diag("duplicate stages block"));
                    }
                    stages_loc = Some(loc);
                    for st in body {
                        stage_statement(&st, &mut stages, &mut maps, &mut p.errs);
                    }
                }
                "probabilities" if arg.is_empty() => {
                    if probabilities.is_some() {
                        p.errs.push(loc.diag("duplicate probabilities block"));
                    }
                    let mut out: Vec<ProbDecl> = Vec::new();
                    for st in body {
                        if let Some(d) = prob_statement(&st, &mut p.errs) {
                            if out.iter().any(|o| o.stage == d.stage) {
                                p.errs.push(st.loc.diag(format!("stage `{}` has two distributions", d.stage)));
                            }
                            out.push(d);
                        }
                    }
                    probabilities = Some(out);
                }
                _ => p.errs.push(loc.diag(format!("unknown block `{}`", it.text))),
            }
            continue;
        }
        let t = it.text.as_str();
        if t == "}" {
            p.errs.push(loc.diag("unmatched `}`"));
        } else if let Some(v) = t.strip_prefix("dceg ") {
            if let Some(ver) = parse_number::<u32>(v, loc, &mut p.errs, "version") {
                if ver != FORMAT_VERSION {
                    p.errs.push(loc.diag(format!("unsupported format version {ver}")));
                }
            }
        } else if let Some(rest) = t.strip_prefix("terminate on") {
            match rest.trim_start().strip_prefix(':') {
                Some(ls) => {
                    terminate.extend(parse_labels(ls, loc, &mut p.errs));
                    terminate_loc = Some(loc);
                }
                None => p.errs.push(loc.diag("expected `terminate on: labels`")),
            }
        } else if let Some(rest) = t.strip_prefix("variable ") {
            match rest.split_once('=') {
                Some((name, ls)) if is_label(name.trim()) => {
                    let name = name.trim().to_string();
                    if variables.iter().any(|v| v.name == name) {
                        p.errs.push(loc.diag(format!("variable `{name}` declared twice")));
                    }
                    let labels: BTreeSet<String> = parse_labels(ls, loc, &mut p.errs).into_iter().collect();
                    if labels.is_empty() {
                        p.errs.push(loc.diag("a variable needs at least one label"));
                    }
                    variables.push(VariableDecl { name, labels, loc });
                }
                _ => p.errs.push(loc.diag("expected `variable NAME = labels`")),
            }
        } else if let Some((k, v)) = t.split_once('=') {
            match k.trim() {
                "N" => {
                    if let Some(x) = parse_number::<usize>(v, loc, &mut p.errs, "N") {
                        if x < 2 {
                            p.errs.push(loc.diag(format!("N must be at least 2, got {x}")));
                        }
                        n = Some(x);
                    }
                }
                "kind" => match v.trim() {
                    "A" => kind = Some(SpecKind::A),
                    "B" => kind = Some(SpecKind::B),
                    other => p.errs.push(loc.diag(format!("kind must be A or B, got `{other}`"))),
                },
                "digits" => digits = parse_number::<usize>(v, loc, &mut p.errs, "digits"),
                other => p.errs.push(loc.diag(format!("unknown setting `{other}`"))),
            }
        } else {
            p.errs.push(loc.diag(format!("unrecognised statement `{t}`")));
        }
    }

    let start = Loc { line: 1, col: 1 };
    if n.is_none() {
        p.errs.push(start.diag("missing `N = ...`"));
    }
    let kind = kind.unwrap_or_else(|| {
        p.errs.push(start.diag("missing `kind = A|B`"));
        SpecKind::A
    });
    match (kind, terminate_loc) {
        (SpecKind::B, None) => p.errs.push(start.diag("kind B needs `terminate on: labels`")),
        (SpecKind::A, Some(l)) => p.errs.push(l.diag("`terminate on` only applies to kind B")),
        _ => {}
    }
    if templates.is_empty() {
        p.errs.push(start.diag("missing template block"));
    }
    if !p.errs.is_empty() {
        return Err(p.errs);
    }
    Ok(ModelSpec {
        n: n.unwrap_or(2),
        kind,
        terminate,
        digits,
        variables,
        time_invariant,
        templates,
        stages,
        maps,
        probabilities,
        stages_loc: stages_loc.unwrap_or(start),
    })
}

fn stage_statement(it: &Item, stages: &mut Vec<StageDecl>, maps: &mut Vec<MapDecl>, errs: &mut Vec<Diagnostic>) {
    let loc = it.loc;
    if let Some(rest) = it.text.strip_prefix("map ") {
        let rest = rest.trim_start();
        let (inv, body) = match rest.strip_prefix("inv:") {
            Some(b) => ("inv:", b),
            None => ("", rest),
        };
        let Some((pat, pairs)) = body.split_once(':') else {
            errs.push(loc.diag("expected `map path : label=canonical ...`"));
            return;
        };
        if segments(pat).is_none() {
            errs.push(loc.diag(format!("malformed path `{}`", pat.trim())));
            return;
        }
        let mut out = BTreeMap::new();
        for w in split_list(pairs) {
            match w.split_once('=') {
                Some((a, b)) if is_label(a) && is_label(b) => {
                    if out.insert(a.to_string(), b.to_string()).is_some() {
                        errs.push(loc.diag(format!("label `{a}` mapped twice")));
                    }
                }
                _ => errs.push(loc.diag(format!("expected `label=canonical`, got `{w}`"))),
            }
        }
        maps.push(MapDecl { pattern: format!("{inv}{}", pat.trim()), pairs: out, loc });
        return;
    }
    let Some((name, members)) = it.text.split_once('=') else {
        errs.push(loc.diag("expected `NAME = path, path, ...`"));
        return;
    };
    let name = name.trim();
    if !is_label(name) {
        errs.push(loc.diag(format!("`{name}` is not a valid stage name")));
        return;
    }
    if stages.iter().any(|s| s.name == name) {
        errs.push(loc.diag(format!("stage `{name}` declared twice")));
    }
    let mut pats = Vec::new();
    for m in members.split(',').map(str::trim) {
        let body = m.strip_prefix("inv:").unwrap_or(m);
        if segments(body).is_none() {
            errs.push(loc.diag(format!("malformed path `{m}`")));
        } else {
            pats.push(m.to_string());
        }
    }
    stages.push(StageDecl { name: name.to_string(), members: pats, loc });
}

fn prob_statement(it: &Item, errs: &mut Vec<Diagnostic>) -> Option<ProbDecl> {
    let loc = it.loc;
    let Some((stage, rest)) = it.text.rsplit_once(':').filter(|(_, r)| !r.contains('/')) else {
        errs.push(loc.diag("expected `STAGE : label=value ...`"));
        return None;
    };
    let mut dist = BTreeMap::new();
    for w in split_list(rest) {
        match w.split_once('=') {
            Some((l, v)) if is_label(l) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() && (0.0..=1.0).contains(&x) => {
                    if dist.insert(l.to_string(), x).is_some() {
                        errs.push(loc.diag(format!("label `{l}` given twice")));
                    }
                }
                _ => errs.push(loc.diag(format!("`{v}` is not a probability"))),
            },
            _ => errs.push(loc.diag(format!("expected `label=value`, got `{w}`"))),
        }
    }
    let sum: f64 = dist.values().sum();
    if dist.is_empty() {
        errs.push(loc.diag("empty distribution"));
    } else if (sum - 1.0).abs() > SUM_TOLERANCE {
        errs.push(loc.diag(format!("probabilities of `{}` sum to {sum}, not 1", stage.trim())));
    }
    Some(ProbDecl { stage: stage.trim().to_string(), dist, loc })
}

/// Everything needed to run the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub st: StagedTree,
    pub kind: TogKind,
    pub eta: i32,
    pub time_invariant: Option<EventTree>,
    pub template: EventTree,
}

fn staging_diag(spec: &ModelSpec, st: &EventTree, e: &StagingError) -> Diagnostic {
    let at = |stage: &str| {
        spec.probabilities
            .iter()
            .flatten()
            .find(|p| p.stage == stage)
            .map(|p| p.loc)
            .or_else(|| spec.stages.iter().find(|s| s.name == stage).map(|s| s.loc))
            .unwrap_or(spec.stages_loc)
    };
    match e {
        StagingError::DegreeMismatch { stage, a, b } | StagingError::LabelMismatch { stage, a, b } => {
            let loc = spec.stages.iter().find(|s| &s.name == stage).map_or(spec.stages_loc, |s| s.loc);
            loc.diag(format!(
                "stage `{stage}`: florets of `{}` and `{}` do not correspond",
                path_string(st, *a),
                path_string(st, *b)
            ))
        }
        StagingError::MissingDistribution(stage) => {
            let loc = spec.stages.iter().find(|s| &s.name == stage).map_or(spec.stages_loc, |s| s.loc);
            loc.diag(e.to_string())
        }
        StagingError::BadSum { stage, .. }
        | StagingError::OutOfRange { stage, .. }
        | StagingError::SupportMismatch { stage } => at(stage).diag(e.to_string()),
        _ => spec.stages_loc.diag(e.to_string()),
    }
}

/// Builds and colours TOG(T_-1, T, N-1) for a parsed spec.
pub fn resolve(spec: &ModelSpec) -> Result<Resolved, Vec<Diagnostic>> {
    let mut errs = Vec::new();
    let inv = spec.time_invariant.clone().filter(|t| !t.is_empty());
    for t in &spec.templates {
        if let Some(a) = &t.anchor {
            let ok = inv.as_ref().and_then(|tr| match_pattern(tr, a)).is_some_and(|vs| {
                vs.len() == 1 && inv.as_ref().is_some_and(|tr| tr.is_leaf(vs[0]) && vs[0] != 0)
            });
            if !ok {
                errs.push(t.loc.diag(format!("`{a}` is not a leaf of the time-invariant tree")));
            }
        }
    }
    let template = spec.templates[0].tree.clone();
    if let Some(t) = spec.templates.iter().find(|t| t.tree != template) {
        errs.push(t.loc.diag("different templates under different time-invariant leaves are not supported"));
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let first = spec.templates[0].loc;
    let kind = match spec.kind {
        SpecKind::A => TogKind::A,
        SpecKind::B => {
            let terminating: BTreeSet<VertexId> = template
                .leaves()
                .filter(|&l| l != 0 && template.label(l).is_some_and(|x| spec.terminate.contains(x)))
                .collect();
            if let Some(l) = spec.terminate.iter().find(|l| !template.leaves().any(|v| template.label(v) == Some(l))) {
                errs.push(first.diag(format!("terminating label `{l}` labels no template leaf")));
            }
            TogKind::B { terminating }
        }
    };
    let known: BTreeSet<&str> = template
        .vertices()
        .iter()
        .chain(inv.iter().flat_map(|t| t.vertices()))
        .filter_map(|v| v.label.as_deref())
        .collect();
    for v in &spec.variables {
        if let Some(l) = v.labels.iter().find(|l| !known.contains(l.as_str())) {
            errs.push(v.loc.diag(format!("variable `{}`: label `{l}` does not occur in the model", v.name)));
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let tog = build_tog(inv.as_ref(), &template, &kind, spec.n as i32 - 1).map_err(|e| vec![first.diag(e.to_string())])?;
    let tree = tog.tree;

    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    let mut names = Vec::new();
    for (k, s) in spec.stages.iter().enumerate() {
        let mut block = Vec::new();
        for pat in &s.members {
            let vs = match_pattern(&tree, pat).unwrap_or_default();
            if vs.is_empty() {
                errs.push(s.loc.diag(format!("path `{pat}` names no situation")));
            }
            for v in vs {
                if tree.is_leaf(v) {
                    errs.push(s.loc.diag(format!("`{}` is a leaf and cannot be staged", path_string(&tree, v))));
                } else if let Some(&o) = owner.get(&v) {
                    if o != k || block.contains(&v) {
                        errs.push(s.loc.diag(format!(
                            "`{}` is already in stage `{}`",
                            path_string(&tree, v),
                            spec.stages[o].name
                        )));
                    }
                } else {
                    owner.insert(v, k);
                    block.push(v);
                }
            }
        }
        blocks.push(block);
        names.push(s.name.clone());
    }
    for v in tree.situations() {
        if !owner.contains_key(&v) {
            let name = path_string(&tree, v);
            if names.contains(&name) {
                errs.push(spec.stages_loc.diag(format!("stage name `{name}` clashes with an unstaged situation path")));
            }
            blocks.push(vec![v]);
            names.push(name);
        }
    }
    let mut bijections: BTreeMap<VertexId, BTreeMap<String, String>> = BTreeMap::new();
    for m in &spec.maps {
        let vs = match_pattern(&tree, &m.pattern).unwrap_or_default();
        if vs.is_empty() {
            errs.push(m.loc.diag(format!("path `{}` names no situation", m.pattern)));
        }
        for v in vs {
            let labels: BTreeSet<&str> = tree.children(v).iter().filter_map(|&c| tree.label(c)).collect();
            if let Some(l) = m.pairs.keys().find(|l| !labels.contains(l.as_str())) {
                errs.push(m.loc.diag(format!("`{}` has no label `{l}`", path_string(&tree, v))));
            }
            if bijections.insert(v, m.pairs.clone()).is_some() {
                errs.push(m.loc.diag(format!("`{}` has two label maps", path_string(&tree, v))));
            }
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let mut st = assign_stages(tree.clone(), &blocks, Some(names.clone()), bijections)
        .map_err(|e| vec![staging_diag(spec, &tree, &e)])?;
    if let Some(probs) = &spec.probabilities {
        let mut dist = BTreeMap::new();
        for p in probs {
            match names.iter().position(|n| *n == p.stage) {
                Some(k) => {
                    dist.insert(k, p.dist.clone());
                }
                None => errs.push(p.loc.diag(format!("unknown stage `{}`", p.stage))),
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        st = st.with_probabilities(Probabilities { dist }).map_err(|e| vec![staging_diag(spec, &tree, &e)])?;
    }
    let eta = if inv.is_some() { 0 } else { 1 };
    Ok(Resolved { st, kind, eta, time_invariant: inv, template })
}

/// Parses and validates a spec; every situation path must resolve.
pub fn parse_spec(text: &str) -> Result<ModelSpec, Vec<Diagnostic>> {
    let spec = syntax(text)?;
    resolve(&spec)?;
    Ok(spec)
}

/// Runs the NT-DCEG construction on a parsed spec.
pub fn compile(spec: &ModelSpec) -> Result<Ntdceg, Vec<Diagnostic>> {
    let r = resolve(spec)?;
    let tree = r.st.tree.clone();
    from_staged(r.st, r.kind, spec.n, r.eta).map_err(|e| {
        let msg = match &e {
            crate::graph_transform::BuildError::NoMatch(v) => {
                format!("leaf `{}` has no entry situation with the same recent history", path_string(&tree, *v))
            }
            other => other.to_string(),
        };
        vec![spec.stages_loc.diag(msg)]
    })
}

fn dump_tree(out: &mut String, tree: &EventTree) {
    for s in tree.situations() {
        let labels: Vec<&str> = tree.children(s).iter().filter_map(|&c| tree.label(c)).collect();
        out.push_str(&format!("  {} : {}\n", path_string(tree, s), labels.join(" ")));
    }
}

/// Canonical text form; `parse_spec(&dump_spec(s)) == Ok(s)`.
pub fn dump_spec(spec: &ModelSpec) -> String {
    let mut out = format!("dceg {FORMAT_VERSION}\nN = {}\n", spec.n);
    match spec.kind {
        SpecKind::A => out.push_str("kind = A\n"),
        SpecKind::B => {
            out.push_str("kind = B\n");
            let ls: Vec<&str> = spec.terminate.iter().map(String::as_str).collect();
            out.push_str(&format!("terminate on: {}\n", ls.join(" ")));
        }
    }
    if let Some(d) = spec.digits {
        out.push_str(&format!("digits = {d}\n"));
    }
    for v in &spec.variables {
        let ls: Vec<&str> = v.labels.iter().map(String::as_str).collect();
        out.push_str(&format!("variable {} = {}\n", v.name, ls.join(" ")));
    }
    if let Some(t) = &spec.time_invariant {
        out.push_str("\ntime_invariant {\n");
        dump_tree(&mut out, t);
        out.push_str("}\n");
    }
    for t in &spec.templates {
        match &t.anchor {
            Some(a) => out.push_str(&format!("\ntemplate {a} {{\n")),
            None => out.push_str("\ntemplate {\n"),
        }
        dump_tree(&mut out, &t.tree);
        out.push_str("}\n");
    }
    out.push_str("\nstages {\n");
    for s in &spec.stages {
        out.push_str(&format!("  {} = {}\n", s.name, s.members.join(", ")));
    }
    for m in &spec.maps {
        let pairs: Vec<String> = m.pairs.iter().map(|(a, b)| format!("{a}={b}")).collect();
        out.push_str(&format!("  map {} : {}\n", m.pattern, pairs.join(" ")));
    }
    out.push_str("}\n");
    if let Some(ps) = &spec.probabilities {
        out.push_str("\nprobabilities {\n");
        for p in ps {
            let d: Vec<String> = p.dist.iter().map(|(l, x)| format!("{l}={x}")).collect();
            out.push_str(&format!("  {} : {}\n", p.stage, d.join(" ")));
        }
        out.push_str("}\n");
    }
    out
}
