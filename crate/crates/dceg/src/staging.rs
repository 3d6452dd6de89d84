//! Stage partitions, primitive probabilities and staged trees.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::tree_core::{xi, EventTree, TreeError, VertexId};

pub type StageId = usize;

pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StagingError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("situation {0} has no stage")]
    Uncovered(VertexId),
    #[error("vertex {0} is a leaf and cannot be staged")]
    LeafStaged(VertexId),
    #[error("situation {0} is assigned to more than one stage")]
    DoubleAssigned(VertexId),
    #[error("stage `{stage}`: situations {a} and {b} have different out-degrees")]
    DegreeMismatch { stage: String, a: VertexId, b: VertexId },
    #[error("stage `{stage}`: labels of {b} do not correspond to those of {a} under the declared bijection")]
    LabelMismatch { stage: String, a: VertexId, b: VertexId },
    #[error("stage `{0}` has no distribution")]
    MissingDistribution(String),
    #[error("stage `{stage}`: probabilities sum to {sum}")]
    BadSum { stage: String, sum: f64 },
    #[error("stage `{stage}`: probability of `{label}` is {value}, outside [0,1]")]
    OutOfRange { stage: String, label: String, value: f64 },
    #[error("stage `{stage}`: distribution support differs from the stage labels")]
    SupportMismatch { stage: String },
    #[error("no situation at or after slice {0}; the truncation is too shallow")]
    TooShallow(i32),
}

/// Assignment of situations to stages, with per-situation label bijections
/// onto the stage's canonical labels (identity unless declared).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StagePartition {
    pub stage_of: BTreeMap<VertexId, StageId>,
    pub names: Vec<String>,
    /// member label -> canonical label, for members that need one
    pub bijections: BTreeMap<VertexId, BTreeMap<String, String>>,
}

impl StagePartition {
    pub fn stage_count(&self) -> usize {
        self.names.len()
    }

    pub fn members(&self, stage: StageId) -> Vec<VertexId> {
        self.stage_of.iter().filter(|&(_, &s)| s == stage).map(|(&v, _)| v).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.names.len()];
        for (&v, &s) in &self.stage_of {
            out[s].push(v);
        }
        out
    }

    pub fn canonical<'a>(&'a self, v: VertexId, label: &'a str) -> &'a str {
        self.bijections.get(&v).and_then(|m| m.get(label)).map(String::as_str).unwrap_or(label)
    }
}

/// Primitive probabilities, one distribution per stage over canonical labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Probabilities {
    pub dist: BTreeMap<StageId, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedTree {
    pub tree: EventTree,
    pub stages: StagePartition,
    pub probs: Option<Probabilities>,
}

fn canonical_labels(tree: &EventTree, stages: &StagePartition, v: VertexId) -> BTreeSet<String> {
    tree.children(v).iter().map(|&c| stages.canonical(v, tree.label(c).unwrap_or_default()).to_string()).collect()
}

/// Builds a validated staged tree. `blocks[k]` is stage `k`, named `names[k]`.
pub fn assign_stages(
    tree: EventTree,
    blocks: &[Vec<VertexId>],
    names: Option<Vec<String>>,
    bijections: BTreeMap<VertexId, BTreeMap<String, String>>,
) -> Result<StagedTree, StagingError> {
    let names = names.unwrap_or_else(|| (0..blocks.len()).map(|k| format!("u{k}")).collect());
    let mut stage_of = BTreeMap::new();
    for (k, block) in blocks.iter().enumerate() {
        for &v in block {
            tree.vertex(v)?;
            if tree.is_leaf(v) {
                return Err(StagingError::LeafStaged(v));
            }
            if stage_of.insert(v, k).is_some() {
                return Err(StagingError::DoubleAssigned(v));
            }
        }
    }
    let stages = StagePartition { stage_of, names, bijections };
    validate_partition(&tree, &stages)?;
    Ok(StagedTree { tree, stages, probs: None })
}

pub fn validate_partition(tree: &EventTree, stages: &StagePartition) -> Result<(), StagingError> {
    for s in tree.situations() {
        if !stages.stage_of.contains_key(&s) {
            return Err(StagingError::Uncovered(s));
        }
    }
    for (k, block) in stages.blocks().iter().enumerate() {
        let Some(&first) = block.first() else { continue };
        let labels = canonical_labels(tree, stages, first);
        for &v in &block[1..] {
            if tree.children(v).len() != tree.children(first).len() {
                return Err(StagingError::DegreeMismatch { stage: stages.names[k].clone(), a: first, b: v });
            }
            if canonical_labels(tree, stages, v) != labels {
                return Err(StagingError::LabelMismatch { stage: stages.names[k].clone(), a: first, b: v });
            }
        }
    }
    Ok(())
}

/// Every situation in its own stage.
pub fn finest(tree: EventTree) -> StagedTree {
    let blocks: Vec<Vec<VertexId>> = tree.situations().map(|s| vec![s]).collect();
    assign_stages(tree, &blocks, None, BTreeMap::new()).expect("singleton stages are always valid")
}

impl StagedTree {
    pub fn stage(&self, s: VertexId) -> Option<StageId> {
        self.stages.stage_of.get(&s).copied()
    }

    pub fn stage_labels(&self, stage: StageId) -> BTreeSet<String> {
        match self.stages.members(stage).first() {
            Some(&v) => canonical_labels(&self.tree, &self.stages, v),
            None => BTreeSet::new(),
        }
    }

    /// Attaches and validates primitive probabilities.
    pub fn with_probabilities(mut self, probs: Probabilities) -> Result<Self, StagingError> {
        for k in 0..self.stages.stage_count() {
            let name = self.stages.names[k].clone();
            let Some(d) = probs.dist.get(&k) else {
                if self.stages.members(k).is_empty() {
                    continue;
                }
                return Err(StagingError::MissingDistribution(name));
            };
            for (label, &value) in d {
                if !(0.0..=1.0).contains(&value) || value.is_nan() {
                    return Err(StagingError::OutOfRange { stage: name, label: label.clone(), value });
                }
            }
            let support: BTreeSet<String> = d.keys().cloned().collect();
            if support != self.stage_labels(k) {
                return Err(StagingError::SupportMismatch { stage: name });
            }
            let sum: f64 = d.values().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(StagingError::BadSum { stage: name, sum });
            }
        }
        self.probs = Some(probs);
        Ok(self)
    }

    /// π(child | parent) for the edge into `child`.
    pub fn edge_probability(&self, child: VertexId) -> Result<f64, StagingError> {
        let parent = self.tree.parent(child).ok_or(TreeError::UnknownVertex(child))?;
        let stage = self.stage(parent).ok_or(StagingError::Uncovered(parent))?;
        let name = || self.stages.names.get(stage).cloned().unwrap_or_default();
        let probs = self.probs.as_ref().ok_or_else(|| StagingError::MissingDistribution(name()))?;
        let d = probs.dist.get(&stage).ok_or_else(|| StagingError::MissingDistribution(name()))?;
        let label = self.stages.canonical(parent, self.tree.label(child).unwrap_or_default());
        d.get(label).copied().ok_or_else(|| StagingError::SupportMismatch { stage: name() })
    }

    /// Product of primitive probabilities along the root-to-`v` path.
    pub fn path_probability(&self, v: VertexId) -> Result<f64, StagingError> {
        self.tree.vertex(v)?;
        let mut p = 1.0;
        for u in self.tree.path_to(v).into_iter().skip(1) {
            p *= self.edge_probability(u)?;
        }
        Ok(p)
    }

    /// Path probabilities of every vertex, computed top down.
    pub fn all_path_probabilities(&self) -> Result<Vec<f64>, StagingError> {
        let mut out = vec![0.0; self.tree.len()];
        if self.tree.is_empty() {
            return Ok(out);
        }
        out[0] = 1.0;
        // BFS numbering: parents precede children
        for v in 1..self.tree.len() {
            let p = self.tree.parent(v).expect("non-root vertex has a parent");
            out[v] = out[p] * self.edge_probability(v)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homogeneity {
    pub holds: bool,
    pub pair: Option<(VertexId, VertexId)>,
}

/// Checks that situations at or after slice `t` with equal `xi(·, k)`
/// signatures share a stage. Returns the first violating pair.
pub fn check_time_homogeneous(st: &StagedTree, k: usize, t: i32) -> Result<Homogeneity, StagingError> {
    let late: Vec<VertexId> = st.tree.situations().filter(|&s| st.tree.slice(s) >= t).collect();
    if late.is_empty() {
        return Err(StagingError::TooShallow(t));
    }
    let mut seen: BTreeMap<Vec<String>, VertexId> = BTreeMap::new();
    for s in late {
        let sig = xi(&st.tree, s, k);
        match seen.get(&sig) {
            Some(&r) if st.stage(r) != st.stage(s) => return Ok(Homogeneity { holds: false, pair: Some((r, s)) }),
            Some(_) => {}
            None => {
                seen.insert(sig, s);
            }
        }
    }
    Ok(Homogeneity { holds: true, pair: None })
}
