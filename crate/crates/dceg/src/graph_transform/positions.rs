//! Coarsest stable partition of a coloured graph (bisimulation on colours and
//! canonical edge labels), with optional time-slice separation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::graph::{ColouredGraph, Marker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionMode {
    /// No time constraint.
    Position,
    /// Vertices before slice T are only identified within their slice.
    TPosition(i32),
    /// Vertices are only identified within their slice.
    Infinity,
}

impl PositionMode {
    fn slice_class(self, slice: i32) -> i32 {
        match self {
            PositionMode::Position => 0,
            PositionMode::TPosition(t) => slice.min(t),
            PositionMode::Infinity => slice,
        }
    }
}

/// Returns `class[v]` for every vertex; classes are numbered by their minimum
/// member. Splitting uses the smaller half of each split block as the next
/// splitter, as in Hopcroft's minimisation.
pub fn compute_positions(g: &ColouredGraph, mode: PositionMode) -> Vec<usize> {
    let n = g.nodes.len();
    if n == 0 {
        return Vec::new();
    }
    let mut key_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &g.edges {
        let k = key_ids.len();
        key_ids.entry(e.key.as_str()).or_insert(k);
    }
    let nkeys = key_ids.len();
    // preds[key][target] = sources
    let mut preds: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; nkeys];
    for e in &g.edges {
        preds[key_ids[e.key.as_str()]][e.to].push(e.from);
    }

    // vertices entering a slice (the root, targets of temporal edges) are
    // kept apart from mid-slice ones so that walks still count slices
    let mut entry = vec![true; n];
    for e in &g.edges {
        entry[e.to] = false;
    }
    for e in &g.edges {
        if matches!(e.marker, Marker::Temporal | Marker::Cyclical) {
            entry[e.to] = true;
        }
    }
    let mut initial: BTreeMap<(u8, bool, Option<usize>, i32, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for (v, node) in g.nodes.iter().enumerate() {
        let mut keys: Vec<usize> = g.out_edges(v).map(|e| key_ids[e.key.as_str()]).collect();
        keys.sort_unstable();
        let kind = node.kind as u8;
        initial.entry((kind, entry[v], node.colour, mode.slice_class(node.slice), keys)).or_default().push(v);
    }
    let mut blocks: Vec<Vec<usize>> = initial.into_values().collect();
    let mut block_of = vec![0usize; n];
    for (b, members) in blocks.iter().enumerate() {
        for &v in members {
            block_of[v] = b;
        }
    }

    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for b in 0..blocks.len() {
        for k in 0..nkeys {
            work.push_back((b, k));
            pending.insert((b, k));
        }
    }
    let mut mark = vec![false; n];
    while let Some((b, k)) = work.pop_front() {
        pending.remove(&(b, k));
        let mut hit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in &blocks[b] {
            for &u in &preds[k][v] {
                hit.entry(block_of[u]).or_default().push(u);
            }
        }
        for (y, xs) in hit {
            if xs.len() == blocks[y].len() {
                continue;
            }
            for &u in &xs {
                mark[u] = true;
            }
            let rest: Vec<usize> = blocks[y].iter().copied().filter(|&u| !mark[u]).collect();
            for &u in &xs {
                mark[u] = false;
            }
            let z = blocks.len();
            for &u in &xs {
                block_of[u] = z;
            }
            let small_is_new = xs.len() <= rest.len();
            blocks[y] = rest;
            blocks.push(xs);
            for k2 in 0..nkeys {
                if pending.contains(&(y, k2)) {
                    work.push_back((z, k2));
                    pending.insert((z, k2));
                } else {
                    let s = if small_is_new { z } else { y };
                    work.push_back((s, k2));
                    pending.insert((s, k2));
                }
            }
        }
    }
    renumber(&block_of)
}

/// Dense renumbering of a class map by minimum member.
pub fn renumber(classes: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    classes
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Whether every block of `fine` lies inside a block of `coarse`.
pub fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    fine.iter().zip(coarse).all(|(&f, &c)| *seen.entry(f).or_insert(c) == c)
}
