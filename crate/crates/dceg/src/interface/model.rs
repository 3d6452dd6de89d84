//! Versioned JSON dump of a compiled model. The dump carries the canonical
//! spec text and the resulting graph; loading recompiles the spec and checks
//! that the graph is unchanged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::spec::{compile, dump_spec, parse_spec, Diagnostic, ModelSpec};
use crate::graph_transform::{Marker, NodeKind, Ntdceg};
use crate::query::Variables;

pub const MODEL_FORMAT: &str = "dceg-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read model: {0}")]
    Json(String),
    #[error("unsupported model format `{0}` version {1}")]
    Version(String, u32),
    #[error("embedded spec is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Spec(Vec<Diagnostic>),
    #[error("stored graph does not match its spec: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NodeRecord {
    pub name: String,
    pub kind: String,
    pub slice: i32,
    pub stage: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub label: String,
    pub marker: String,
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub eta: i32,
    pub spec: String,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub heads: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub ntdceg: Ntdceg,
}

fn marker_name(m: Marker) -> &'static str {
    match m {
        Marker::Plain => "plain",
        Marker::Temporal => "temporal",
        Marker::Cyclical => "cyclical",
    }
}

impl Model {
    pub fn from_spec(spec: ModelSpec) -> Result<Model, Vec<Diagnostic>> {
        let ntdceg = compile(&spec)?;
        Ok(Model { spec, ntdceg })
    }

    pub fn from_spec_text(text: &str) -> Result<Model, Vec<Diagnostic>> {
        Model::from_spec(parse_spec(text)?)
    }

    pub fn variables(&self) -> Variables {
        self.spec.variables.iter().map(|v| (v.name.clone(), v.labels.clone())).collect()
    }

    pub fn digits(&self) -> usize {
        self.spec.digits.unwrap_or(3)
    }

    pub fn stage_names(&self) -> &[String] {
        &self.ntdceg.st.stages.names
    }

    pub fn to_file(&self) -> ModelFile {
        let m = &self.ntdceg;
        let g = &m.graph;
        let names = self.stage_names();
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            n: m.n,
            eta: m.eta,
            spec: dump_spec(&self.spec),
            nodes: g
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    name: n.name.clone(),
                    kind: if n.kind == NodeKind::Sink { "sink" } else { "position" }.into(),
                    slice: n.slice,
                    stage: n.colour.map(|c| names[c].clone()),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    from: g.nodes[e.from].name.clone(),
                    to: g.nodes[e.to].name.clone(),
                    label: e.label.clone(),
                    marker: marker_name(e.marker).into(),
                    probability: e.prob,
                })
                .collect(),
            heads: m.heads.iter().map(|&h| g.nodes[h].name.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("model records serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ModelError::Version(file.format, file.version));
        }
        let model = Model::from_spec_text(&file.spec).map_err(ModelError::Spec)?;
        let fresh = model.to_file();
        if fresh.nodes != file.nodes || fresh.heads != file.heads || fresh.n != file.n || fresh.eta != file.eta {
            return Err(ModelError::Mismatch("vertices differ".into()));
        }
        let same_edges = fresh.edges.len() == file.edges.len()
            && fresh.edges.iter().zip(&file.edges).all(|(a, b)| {
                let p = match (a.probability, b.probability) {
                    (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                    (None, None) => true,
                    _ => false,
                };
                p && a.from == b.from && a.to == b.to && a.label == b.label && a.marker == b.marker
            });
        if !same_edges {
            return Err(ModelError::Mismatch("edges differ".into()));
        }
        Ok(model)
    }
}
