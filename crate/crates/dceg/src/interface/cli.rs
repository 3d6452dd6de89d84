//! The `dceg` command line. Exit codes: 0 success, 1 invalid input or model,
//! 2 usage error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use super::csv::{edges_csv, matrix_csv, parse_vector, vector_csv};
use super::dot::{chain_dot, export_dot};
use super::model::Model;
use super::spec::{parse_spec, Diagnostic};
use crate::graph_transform::ceg_at;
use crate::markov::{classify, predict, project, start_states, MarkovProjection, State};
use crate::query::{events_to_positions, prune, verify_ci, CiStatement, Context, QueryError};

#[derive(Parser, Debug)]
#[command(name = "dceg", version, about = "Build, project and query N time-slice dynamic chain event graphs")]
struct Cli {
    /// Machine-readable output and diagnostics
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a spec and run the staging and time-homogeneity checks
    Validate { spec: PathBuf },
    /// Compile a spec into a model file
    Build {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the model graph, a finite-horizon CEG or the Markov chain
    Export {
        model: PathBuf,
        /// ntdceg, ceg:<t> or chain
        #[arg(long)]
        what: String,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the Markov projection: states, initial distribution and M
    Project {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Occupancy s slices ahead
    Predict {
        model: PathBuf,
        #[arg(long)]
        at: i32,
        /// a state name or comma-separated probabilities
        #[arg(long)]
        occupancy: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Conditional independence check or event-set query
    Query {
        model: PathBuf,
        #[arg(long, conflicts_with = "context", required_unless_present = "context")]
        ci: Option<String>,
        #[arg(long)]
        context: Option<String>,
        /// slice whose entry positions the context addresses
        #[arg(long)]
        at: Option<i32>,
        #[arg(long)]
        steps: Option<usize>,
        /// print the pruned graph as DOT
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Serialize)]
struct Located {
    file: String,
    line: Option<usize>,
    col: Option<usize>,
    message: String,
}

enum Failure {
    Usage(String),
    Invalid(Vec<Located>),
}

fn invalid(file: &Path, message: impl Into<String>) -> Failure {
    Failure::Invalid(vec![Located { file: file.display().to_string(), line: None, col: None, message: message.into() }])
}

fn from_diags(file: &Path, ds: Vec<Diagnostic>) -> Failure {
    Failure::Invalid(
        ds.into_iter()
            .map(|d| Located { file: file.display().to_string(), line: Some(d.line), col: Some(d.col), message: d.message })
            .collect(),
    )
}

fn query_failure(what: &str, e: QueryError) -> Failure {
    let (col, message) = match &e {
        QueryError::Syntax { pos, msg } => (Some(*pos), msg.clone()),
        other => (None, other.to_string()),
    };
    Failure::Invalid(vec![Located { file: what.into(), line: col.map(|_| 1), col, message }])
}

type Out<'a> = &'a mut dyn Write;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "dceg") {
        Model::from_spec_text(&text).map_err(|d| from_diags(path, d))
    } else {
        Model::from_json(&text).map_err(|e| invalid(path, e.to_string()))
    }
}

fn fmt_vec(v: &[f64], digits: usize) -> String {
    v.iter().map(|x| format!("{x:.digits$}")).collect::<Vec<_>>().join(" ")
}

fn writeout(out: Out, s: &str) -> Result<(), Failure> {
    out.write_all(s.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(out: Out, json: bool, value: serde_json::Value, text: String) -> Result<(), Failure> {
    if json {
        writeout(out, &format!("{}\n", serde_json::to_string_pretty(&value).expect("json values serialize")))
    } else {
        writeout(out, &text)
    }
}

fn projection(model: &Model, path: &Path) -> Result<MarkovProjection, Failure> {
    project(&model.ntdceg).map_err(|e| invalid(path, e.to_string()))
}

fn state_name(model: &Model, s: State) -> String {
    match s {
        State::Inf => "w_inf".into(),
        State::Vertex(v) => model.ntdceg.graph.nodes[v].name.clone(),
    }
}

fn execute(cli: Cli, out: Out) -> Result<(), Failure> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Validate { spec } => {
            let text = read(&spec)?;
            let parsed = parse_spec(&text).map_err(|d| from_diags(&spec, d))?;
            let model = Model::from_spec(parsed).map_err(|d| from_diags(&spec, d))?;
            let m = &model.ntdceg;
            let text = format!(
                "ok: N={}, {} positions, {} stages, {} chain states\n",
                m.n,
                m.position_count(),
                m.st.stages.stage_count(),
                m.heads.len() + usize::from(m.sink.is_some() || !m.slice_sinks.is_empty())
            );
            let v = json!({"valid": true, "n": m.n, "positions": m.position_count(), "stages": m.st.stages.stage_count()});
            emit(out, json, v, text)
        }
        Cmd::Build { spec, output } => {
            let text = read(&spec)?;
            let model = Model::from_spec_text(&text).map_err(|d| from_diags(&spec, d))?;
            std::fs::write(&output, model.to_json()).map_err(|e| Failure::Usage(format!("{}: {e}", output.display())))?;
            let msg = format!("wrote {} ({} positions)\n", output.display(), model.ntdceg.position_count());
            emit(out, json, json!({"output": output.display().to_string(), "positions": model.ntdceg.position_count()}), msg)
        }
        Cmd::Export { model: path, what, format, output } => {
            let model = load(&path)?;
            let m = &model.ntdceg;
            let names = model.stage_names();
            let text = if what == "ntdceg" {
                match format {
                    Format::Dot => export_dot(&m.graph, Some(names)),
                    Format::Csv => edges_csv(&m.graph),
                    Format::Text => return Err(Failure::Usage("graphs export as dot or csv".into())),
                }
            } else if what == "chain" {
                let p = projection(&model, &path)?;
                match format {
                    Format::Dot => chain_dot(&p, model.digits()),
                    Format::Csv => matrix_csv(&p.names, &p.m),
                    Format::Text => return Err(Failure::Usage("the chain exports as dot or csv".into())),
                }
            } else if let Some(t) = what.strip_prefix("ceg:") {
                let t: i32 = t.parse().map_err(|_| Failure::Usage(format!("bad horizon in `{what}`")))?;
                let g = ceg_at(m, t).map_err(|e| invalid(&path, e))?.to_coloured();
                match format {
                    Format::Dot => export_dot(&g, Some(names)),
                    Format::Csv => edges_csv(&g),
                    Format::Text => return Err(Failure::Usage("graphs export as dot or csv".into())),
                }
            } else {
                return Err(Failure::Usage(format!("--what must be ntdceg, ceg:<t> or chain, got `{what}`")));
            };
            match output {
                Some(o) => std::fs::write(&o, text).map_err(|e| Failure::Usage(format!("{}: {e}", o.display()))),
                None => writeout(out, &text),
            }
        }
        Cmd::Project { model: path, format } => {
            let model = load(&path)?;
            let p = projection(&model, &path)?;
            let c = classify(&p.m);
            let d = model.digits();
            if let Format::Csv = format {
                return writeout(out, &format!("{}\n{}", vector_csv(&p.names, &p.mu), matrix_csv(&p.names, &p.m)));
            }
            let mut text = format!("states: {}\nmu: {}\nM:\n", p.names.join(" "), fmt_vec(&p.mu, d));
            for (n, row) in p.names.iter().zip(&p.m) {
                text.push_str(&format!("  {n:>8} {}\n", fmt_vec(row, d)));
            }
            let absorbing: Vec<&str> = c.absorbing.iter().map(|&i| p.names[i].as_str()).collect();
            text.push_str(&format!(
                "irreducible: {}\naperiodic: {}\nergodic: {}\nabsorbing: {}\n",
                c.irreducible,
                c.aperiodic,
                c.ergodic,
                absorbing.join(" ")
            ));
            let v = json!({
                "states": p.names, "mu": p.mu, "m": p.m,
                "irreducible": c.irreducible, "aperiodic": c.aperiodic, "ergodic": c.ergodic, "absorbing": absorbing,
            });
            emit(out, json, v, text)
        }
        Cmd::Predict { model: path, at, occupancy, steps } => {
            let model = load(&path)?;
            let m = &model.ntdceg;
            let p = projection(&model, &path)?;
            let states = start_states(m, at).map_err(|e| invalid(&path, e.to_string()))?;
            let names: Vec<String> = states.iter().map(|&s| state_name(&model, s)).collect();
            let start = match names.iter().position(|n| *n == occupancy) {
                Some(i) => (0..names.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect(),
                None => parse_vector(&occupancy).map_err(|e| {
                    Failure::Usage(format!("--occupancy must be one of {} or a probability vector: {e}", names.join(", ")))
                })?,
            };
            let r = predict(m, &p, &start, at, steps).map_err(|e| Failure::Usage(e.to_string()))?;
            let d = model.digits();
            let text: String = r.names.iter().zip(&r.p).map(|(n, x)| format!("{n} {x:.d$}\n")).collect();
            emit(out, json, json!({"at": at + steps as i32, "states": r.names, "p": r.p}), text)
        }
        Cmd::Query { model: path, ci, context, at, steps, dot } => {
            let model = load(&path)?;
            let m = &model.ntdceg;
            let vars = model.variables();
            if let Some(ci) = ci {
                let s = CiStatement::parse(&ci, &vars).map_err(|e| query_failure("--ci", e))?;
                let r = verify_ci(m, &vars, &s).map_err(|e| query_failure("--ci", e))?;
                let g = &m.graph;
                let stage = |k: usize| model.stage_names()[k].clone();
                let members = |set: &BTreeSet<usize>| set.iter().map(|&w| g.nodes[w].name.clone()).collect::<Vec<_>>();
                let mut text = format!("{}\n", r.holds);
                let mut groups = Vec::new();
                for w in &r.witness {
                    let key: Vec<String> = w.key.iter().map(|(a, b)| format!("{a}={b}")).collect();
                    let t = w.t.map(|t| format!("t={t} ")).unwrap_or_default();
                    text.push_str(&format!("  {t}[{}] {}: {}\n", key.join(", "), stage(w.stage), members(&w.members).join(" ")));
                    groups.push(json!({"t": w.t, "context": key, "stage": stage(w.stage), "positions": members(&w.members)}));
                }
                let counter = r.counterexample.as_ref().map(|c| {
                    let t = c.t.map(|t| format!("t={t} ")).unwrap_or_default();
                    text.push_str(&format!(
                        "  {t}counterexample: {} ({}) vs {} ({})\n",
                        stage(c.a.0),
                        members(&c.a.1).join(" "),
                        stage(c.b.0),
                        members(&c.b.1).join(" ")
                    ));
                    json!({"t": c.t, "stages": [stage(c.a.0), stage(c.b.0)], "positions": [members(&c.a.1), members(&c.b.1)]})
                });
                return emit(out, json, json!({"holds": r.holds, "witness": groups, "counterexample": counter}), text);
            }
            let text = context.unwrap_or_default();
            let ctx = Context::parse(&text, &vars, at).map_err(|e| query_failure("--context", e))?;
            let we = events_to_positions(m, &vars, &ctx).map_err(|e| query_failure("--context", e))?;
            let g = &m.graph;
            let d = model.digits();
            let mut text = String::new();
            if we.is_empty() {
                text.push_str("warning: the context is contradictory; no position is reachable\n");
            }
            let listed: Vec<String> = we.iter().map(|(&w, p)| format!("{} ({p:.d$})", g.nodes[w].name)).collect();
            text.push_str(&format!("positions at slice {}: {}\n", ctx.at, listed.join(" ")));
            let set: BTreeSet<usize> = we.keys().copied().collect();
            let pruned = prune(m, &set);
            text.push_str(&format!("reachable future: {} vertices, {} edges\n", pruned.graph.nodes.len(), pruned.graph.edges.len()));
            let mut prediction = serde_json::Value::Null;
            if let (Some(s), false) = (steps, we.is_empty()) {
                let p = projection(&model, &path)?;
                let states = start_states(m, ctx.at).map_err(|e| invalid(&path, e.to_string()))?;
                let start: Vec<f64> =
                    states.iter().map(|s| if let State::Vertex(v) = s { we.get(v).copied().unwrap_or(0.0) } else { 0.0 }).collect();
                let r = predict(m, &p, &start, ctx.at, s).map_err(|e| invalid(&path, e.to_string()))?;
                text.push_str(&format!("occupancy at slice {}:\n", ctx.at + s as i32));
                for (n, x) in r.names.iter().zip(&r.p) {
                    text.push_str(&format!("  {n} {x:.d$}\n"));
                }
                prediction = json!({"states": r.names, "p": r.p});
            }
            if dot {
                text = export_dot(&pruned.graph, Some(model.stage_names()));
            }
            let v = json!({
                "at": ctx.at,
                "positions": we.iter().map(|(&w, p)| json!({"name": g.nodes[w].name, "p": p})).collect::<Vec<_>>(),
                "reachable": pruned.vertices.iter().map(|&v| g.nodes[v].name.clone()).collect::<Vec<_>>(),
                "prediction": prediction,
            });
            emit(out, json, v, text)
        }
    }
}

/// Runs the CLI on `argv` (program name first), writing to the given streams.
pub fn run_with(argv: &[String], out: Out, err: Out) -> i32 {
    let json = argv.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            if code == 2 && json {
                let _ = writeln!(out, "{}", json!({"error": "usage", "message": msg}));
            } else if code == 2 {
                let _ = write!(err, "{msg}");
            } else {
                let _ = write!(out, "{msg}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            if json {
                let _ = writeln!(out, "{}", json!({"error": "usage", "message": msg}));
            } else {
                let _ = writeln!(err, "error: {msg}");
            }
            2
        }
        Err(Failure::Invalid(ds)) => {
            if json {
                let _ = writeln!(out, "{}", json!({"error": "invalid", "diagnostics": ds}));
            } else {
                for d in ds {
                    match (d.line, d.col) {
                        (Some(l), Some(c)) => {
                            let _ = writeln!(err, "{}:{l}:{c}: {}", d.file, d.message);
                        }
                        _ => {
                            let _ = writeln!(err, "{}: {}", d.file, d.message);
                        }
                    }
                }
            }
            1
        }
    }
}

pub fn run(argv: &[String]) -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_with(argv, &mut out, &mut err)
}
