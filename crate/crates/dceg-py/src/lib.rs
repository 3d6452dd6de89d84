//! Python bindings: load a model from spec text or model JSON, read its graph
//! and chain, predict and query.

use std::collections::BTreeMap;

use dceg::interface::dot::export_dot;
use dceg::interface::model::Model as CoreModel;
use dceg::markov::{classify, predict, project, start_states, stationary, MarkovProjection};
use dceg::query::{events_to_positions, legend_map, verify_ci, xi_c_model, CiStatement, Context};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn diagnostics(ds: Vec<dceg::interface::spec::Diagnostic>) -> PyErr {
    err(ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))
}

/// Witness group: (t, stage name, member positions).
type Group = (Option<i32>, String, Vec<String>);

#[pyclass(module = "dceg_py", frozen)]
struct Model {
    inner: CoreModel,
}

impl Model {
    fn name(&self, v: usize) -> String {
        self.inner.ntdceg.graph.nodes[v].name.clone()
    }

    fn vertex(&self, name: &str) -> PyResult<usize> {
        self.inner.ntdceg.graph.node_by_name(name).ok_or_else(|| err(format!("no vertex named `{name}`")))
    }

    fn chain(&self) -> PyResult<MarkovProjection> {
        project(&self.inner.ntdceg).map_err(err)
    }

    fn stage_name(&self, stage: usize) -> String {
        self.inner.stage_names().get(stage).cloned().unwrap_or_else(|| format!("u{stage}"))
    }
}

#[pymethods]
impl Model {
    /// Compiles `.dceg` spec text.
    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Model> {
        CoreModel::from_spec_text(text).map(|inner| Model { inner }).map_err(diagnostics)
    }

    /// Loads a model file written by `to_json` or `dceg build`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Model> {
        CoreModel::from_json(text).map(|inner| Model { inner }).map_err(err)
    }

    /// Reads a `.dceg` spec or a model JSON file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Model> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        if path.ends_with(".dceg") {
            Model::from_spec(&text)
        } else {
            Model::from_json(&text)
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.ntdceg.n
    }

    #[getter]
    fn eta(&self) -> i32 {
        self.inner.ntdceg.eta
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn dot(&self) -> String {
        export_dot(&self.inner.ntdceg.graph, Some(self.inner.stage_names()))
    }

    /// Position names in vertex order (sinks excluded).
    fn positions(&self) -> Vec<String> {
        let g = &self.inner.ntdceg.graph;
        g.nodes.iter().filter(|n| n.colour.is_some()).map(|n| n.name.clone()).collect()
    }

    /// Stage name -> member positions.
    fn stages(&self) -> BTreeMap<String, Vec<String>> {
        self.inner
            .ntdceg
            .stage_blocks()
            .into_iter()
            .map(|(k, ws)| (self.stage_name(k), ws.into_iter().map(|w| self.name(w)).collect()))
            .collect()
    }

    fn heads(&self) -> Vec<String> {
        self.inner.ntdceg.heads.iter().map(|&h| self.name(h)).collect()
    }

    /// (from, label, to, marker, probability) per edge.
    fn edges(&self) -> Vec<(String, String, String, String, Option<f64>)> {
        let g = &self.inner.ntdceg.graph;
        g.edges
            .iter()
            .map(|e| (self.name(e.from), e.label.clone(), self.name(e.to), format!("{:?}", e.marker).to_lowercase(), e.prob))
            .collect()
    }

    /// (states, mu, M) of the Markov projection.
    fn project(&self) -> PyResult<(Vec<String>, Vec<f64>, Vec<Vec<f64>>)> {
        let p = self.chain()?;
        Ok((p.names, p.mu, p.m))
    }

    /// State names at the beginning of slice `t`.
    fn states_at(&self, t: i32) -> PyResult<Vec<String>> {
        let m = &self.inner.ntdceg;
        let states = start_states(m, t).map_err(err)?;
        Ok(states
            .into_iter()
            .map(|s| match s {
                dceg::markov::State::Inf => "w_inf".to_string(),
                dceg::markov::State::Vertex(v) => self.name(v),
            })
            .collect())
    }

    /// Occupancy `steps` slices after the beginning of slice `at`, from a
    /// state name or a probability vector over `states_at(at)`.
    #[pyo3(signature = (occupancy, at, steps = 1))]
    fn predict(&self, occupancy: &Bound<'_, PyAny>, at: i32, steps: usize) -> PyResult<(Vec<String>, Vec<f64>)> {
        let p = self.chain()?;
        let names = self.states_at(at)?;
        let start: Vec<f64> = if let Ok(name) = occupancy.extract::<String>() {
            let i = names.iter().position(|n| *n == name).ok_or_else(|| err(format!("`{name}` is not a state at slice {at}")))?;
            (0..names.len()).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
        } else {
            occupancy.extract()?
        };
        let r = predict(&self.inner.ntdceg, &p, &start, at, steps).map_err(err)?;
        Ok((r.names, r.p))
    }

    /// (irreducible, aperiodic, ergodic, absorbing state names).
    fn classify(&self) -> PyResult<(bool, bool, bool, Vec<String>)> {
        let p = self.chain()?;
        let c = classify(&p.m);
        Ok((c.irreducible, c.aperiodic, c.ergodic, c.absorbing.iter().map(|&i| p.names[i].clone()).collect()))
    }

    fn stationary(&self) -> PyResult<Vec<f64>> {
        stationary(&self.chain()?, None).map_err(err)
    }

    /// Positions (name -> conditional probability) at the beginning of slice
    /// `at` given observed events such as "N(0)=i, R(0)=a".
    #[pyo3(signature = (context, at = None))]
    fn events_to_positions(&self, context: &str, at: Option<i32>) -> PyResult<BTreeMap<String, f64>> {
        let vars = self.inner.variables();
        let ctx = Context::parse(context, &vars, at).map_err(err)?;
        let w = events_to_positions(&self.inner.ntdceg, &vars, &ctx).map_err(err)?;
        Ok(w.into_iter().map(|(v, p)| (self.name(v), p)).collect())
    }

    /// (holds, witness groups, counterexample) where the counterexample is
    /// ((stage, positions), (stage, positions)).
    fn verify_ci(&self, statement: &str) -> PyResult<(bool, Vec<Group>, Option<((String, Vec<String>), (String, Vec<String>))>)> {
        let vars = self.inner.variables();
        let s = CiStatement::parse(statement, &vars).map_err(err)?;
        let r = verify_ci(&self.inner.ntdceg, &vars, &s).map_err(err)?;
        let names = |ws: &std::collections::BTreeSet<usize>| ws.iter().map(|&w| self.name(w)).collect::<Vec<_>>();
        let witness = r.witness.iter().map(|g| (g.t, self.stage_name(g.stage), names(&g.members))).collect();
        let counter = r
            .counterexample
            .as_ref()
            .map(|c| ((self.stage_name(c.a.0), names(&c.a.1)), (self.stage_name(c.b.0), names(&c.b.1))));
        Ok((r.holds, witness, counter))
    }

    /// Label sequences of the last `k` slices on walks into `position`.
    fn xi_c(&self, position: &str, k: usize) -> PyResult<Vec<Vec<String>>> {
        let v = self.vertex(position)?;
        Ok(xi_c_model(&self.inner.ntdceg, v, k).map_err(err)?.into_iter().collect())
    }

    /// Whether every history equality of the legend check holds at horizon `t`.
    fn legend(&self, t: i32) -> PyResult<bool> {
        Ok(legend_map(&self.inner.ntdceg, t).map_err(err)?.holds())
    }

    fn __repr__(&self) -> String {
        let m = &self.inner.ntdceg;
        format!("Model(N={}, positions={}, heads={})", m.n, m.position_count(), m.heads.len())
    }
}

#[pymodule]
fn dceg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    Ok(())
}
