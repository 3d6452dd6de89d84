//! Markov chain projection of an NT-DCEG: states, initial distribution,
//! transition matrix, classification, stationary vectors and prediction.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::graph_transform::Ntdceg;
use crate::staging::StagingError;
use crate::tree_core::VertexId;

pub type Matrix = Vec<Vec<f64>>;

pub const ROW_TOLERANCE: f64 = 1e-9;
pub const STATIONARY_RESIDUAL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error("the model has no probabilities")]
    MissingProbabilities,
    #[error(transparent)]
    Staging(#[from] StagingError),
    #[error("occupancy has {got} entries, the state list has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("power iteration stopped with residual {residual:e}")]
    NonConvergence { residual: f64 },
    #[error("slice {0} is outside the model")]
    BadSlice(i32),
}

/// A state of the projection: either the terminal sink or a graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum State {
    Inf,
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovProjection {
    pub states: Vec<State>,
    pub names: Vec<String>,
    pub mu: Vec<f64>,
    pub m: Matrix,
}

impl MarkovProjection {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn has_inf(&self) -> bool {
        self.states.first() == Some(&State::Inf)
    }
}

fn name_of(m: &Ntdceg, s: State) -> String {
    match s {
        State::Inf => "w_inf".into(),
        State::Vertex(v) => m.graph.nodes[v].name.clone(),
    }
}

fn has_inf(m: &Ntdceg) -> bool {
    m.sink.is_some() || !m.slice_sinks.is_empty()
}

/// State list at the beginning of slice `t`: w_inf first when the model
/// terminates, then entry positions in ascending order. From slice N-1 on
/// these are the chain states.
pub fn start_states(m: &Ntdceg, t: i32) -> Result<Vec<State>, MarkovError> {
    let last = m.n as i32 - 1;
    let lowest = m.st.tree.slice(0).max(0);
    if t < lowest {
        return Err(MarkovError::BadSlice(t));
    }
    let mut out = Vec::new();
    if has_inf(m) {
        out.push(State::Inf);
    }
    if t >= last {
        out.extend(m.heads.iter().map(|&h| State::Vertex(h)));
    } else {
        out.extend(m.entry_positions(t).into_iter().map(State::Vertex));
    }
    Ok(out)
}

fn is_entry(m: &Ntdceg, v: VertexId, u: i32) -> bool {
    let tree = &m.st.tree;
    !tree.is_leaf(v) && tree.slice(v) == u && tree.parent(v).is_none_or(|p| tree.slice(p) < u)
}

/// Probability mass reaching each state from situation `s`, walking forward
/// until an entry situation of slice `u`, a terminating leaf or a frontier leaf.
fn walk(m: &Ntdceg, s: VertexId, u: i32) -> Result<BTreeMap<State, f64>, MarkovError> {
    let st = &m.st;
    let tree = &st.tree;
    let mut out: BTreeMap<State, f64> = BTreeMap::new();
    let mut stack = vec![(s, 1.0f64)];
    while let Some((v, p)) = stack.pop() {
        for &c in tree.children(v) {
            let q = p * st.edge_probability(c)?;
            if tree.is_leaf(c) {
                let st = if m.kind.is_terminating(tree.origin(c)) {
                    State::Inf
                } else {
                    State::Vertex(m.position_of[c])
                };
                *out.entry(st).or_default() += q;
            } else if is_entry(m, c, u) {
                *out.entry(State::Vertex(m.position_of[c])).or_default() += q;
            } else {
                stack.push((c, q));
            }
        }
    }
    Ok(out)
}

/// Representative (smallest id) situation of a position entered at slice `t`.
fn representative(m: &Ntdceg, w: usize, t: i32) -> Option<VertexId> {
    m.st.tree.situations().find(|&s| is_entry(m, s, t) && m.position_of[s] == w)
}

fn transition(m: &Ntdceg, from: &[State], to: &[State], t: i32, u: i32) -> Result<Matrix, MarkovError> {
    let col: BTreeMap<State, usize> = to.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let last = m.n as i32 - 1;
    let mut out = vec![vec![0.0; to.len()]; from.len()];
    for (i, s) in from.iter().enumerate() {
        match s {
            State::Inf => out[i][col[&State::Inf]] = 1.0,
            State::Vertex(w) => {
                let rep = representative(m, *w, t.min(last)).ok_or(MarkovError::BadSlice(t))?;
                for (st, p) in walk(m, rep, u)? {
                    let j = *col.get(&st).ok_or(MarkovError::BadSlice(u))?;
                    out[i][j] += p;
                }
            }
        }
    }
    Ok(out)
}

pub fn project(m: &Ntdceg) -> Result<MarkovProjection, MarkovError> {
    let st = &m.st;
    if st.probs.is_none() {
        return Err(MarkovError::MissingProbabilities);
    }
    let last = m.n as i32 - 1;
    let states = start_states(m, last)?;
    let col: BTreeMap<State, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let probs = st.all_path_probabilities()?;
    let tree = &st.tree;
    let mut mu = vec![0.0; states.len()];
    for v in 0..tree.len() {
        if is_entry(m, v, last) {
            mu[col[&State::Vertex(m.position_of[v])]] += probs[v];
        } else if tree.is_leaf(v) && v != 0 && tree.slice(v) < last && m.kind.is_terminating(tree.origin(v)) {
            mu[col[&State::Inf]] += probs[v];
        }
    }
    let mat = transition(m, &states, &states, last, last + 1)?;
    Ok(MarkovProjection { names: states.iter().map(|&s| name_of(m, s)).collect(), states, mu, m: mat })
}

/// Transition matrix from the states at the beginning of slice `t` to those
/// at the beginning of slice `u`, for `t <= u <= N-1`.
pub fn initial_transition(m: &Ntdceg, t: i32, u: i32) -> Result<(Vec<State>, Vec<State>, Matrix), MarkovError> {
    let last = m.n as i32 - 1;
    if u > last || t > u {
        return Err(MarkovError::BadSlice(u));
    }
    let from = start_states(m, t)?;
    let to = start_states(m, u)?;
    if t == u {
        let id = (0..from.len()).map(|i| (0..from.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        return Ok((from, to, id));
    }
    let mat = transition(m, &from, &to, t, u)?;
    Ok((from, to, mat))
}

pub fn vec_mat(p: &[f64], m: &Matrix) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (i, row) in m.iter().enumerate() {
        if p[i] == 0.0 {
            continue;
        }
        for (j, x) in row.iter().enumerate() {
            out[j] += p[i] * x;
        }
    }
    out
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().map(|row| vec_mat(row, b)).collect()
}

/// p · M^s.
pub fn predict_with(m: &Matrix, p: &[f64], s: usize) -> Result<Vec<f64>, MarkovError> {
    if p.len() != m.len() {
        return Err(MarkovError::Dimension { expected: m.len(), got: p.len() });
    }
    let mut x = p.to_vec();
    for _ in 0..s {
        x = vec_mat(&x, m);
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub names: Vec<String>,
    pub p: Vec<f64>,
}

/// Occupancy `s` slices after the beginning of slice `t`, given the
/// occupancy `p` over `start_states(m, t)`.
pub fn predict(m: &Ntdceg, proj: &MarkovProjection, p: &[f64], t: i32, s: usize) -> Result<Prediction, MarkovError> {
    let last = m.n as i32 - 1;
    if t >= last {
        let x = predict_with(&proj.m, p, s)?;
        return Ok(Prediction { names: proj.names.clone(), p: x });
    }
    let from = start_states(m, t)?;
    if p.len() != from.len() {
        return Err(MarkovError::Dimension { expected: from.len(), got: p.len() });
    }
    let u = t + s as i32;
    if u <= last {
        let (_, to, mat) = initial_transition(m, t, u)?;
        return Ok(Prediction { names: to.iter().map(|&x| name_of(m, x)).collect(), p: vec_mat(p, &mat) });
    }
    let (_, _, mat) = initial_transition(m, t, last)?;
    let x = predict_with(&proj.m, &vec_mat(p, &mat), (u - last) as usize)?;
    Ok(Prediction { names: proj.names.clone(), p: x })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub ergodic: bool,
    pub absorbing: Vec<usize>,
    pub period: Option<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classification on the support of M.
pub fn classify(mat: &Matrix) -> Classification {
    let n = mat.len();
    let adj: Vec<Vec<usize>> = mat.iter().map(|r| (0..n).filter(|&j| r[j] > 0.0).collect()).collect();
    let absorbing = (0..n).filter(|&i| (mat[i][i] - 1.0).abs() <= 1e-12).collect();
    if n == 0 {
        return Classification { irreducible: false, aperiodic: false, ergodic: false, absorbing, period: None };
    }
    let bfs = |adj: &Vec<Vec<usize>>| {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        level
    };
    let level = bfs(&adj);
    let mut rev = vec![Vec::new(); n];
    for (i, row) in adj.iter().enumerate() {
        for &j in row {
            rev[j].push(i);
        }
    }
    let back = bfs(&rev);
    let irreducible = level.iter().all(|&l| l != usize::MAX) && back.iter().all(|&l| l != usize::MAX);
    let period = irreducible.then(|| {
        let mut g = 0;
        for (i, row) in adj.iter().enumerate() {
            for &j in row {
                g = gcd(g, (level[i] + 1).abs_diff(level[j]));
            }
        }
        g
    });
    let aperiodic = period == Some(1);
    Classification { irreducible, aperiodic, ergodic: irreducible && aperiodic, absorbing, period }
}

fn residual(x: &[f64], mat: &Matrix) -> f64 {
    vec_mat(x, mat).iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Stationary vector by lazy power iteration from `start` (default μ).
pub fn stationary(proj: &MarkovProjection, start: Option<&[f64]>) -> Result<Vec<f64>, MarkovError> {
    let mat = &proj.m;
    let mut x = start.unwrap_or(&proj.mu).to_vec();
    if x.len() != mat.len() {
        return Err(MarkovError::Dimension { expected: mat.len(), got: x.len() });
    }
    let mut r = residual(&x, mat);
    let mut it = 0;
    while r > STATIONARY_RESIDUAL {
        if it == MAX_ITERATIONS {
            return Err(MarkovError::NonConvergence { residual: r });
        }
        let y = vec_mat(&x, mat);
        x = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        r = residual(&x, mat);
        it += 1;
    }
    Ok(x)
}
