//! Command-line front end. Exit status 0 means success, 1 an invariant
//! violation or rejected request (details on stdout), 2 an unreadable or
//! unparseable file or another IO failure (details on stderr).

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use scs_core::story::SegmentRef;
use scs_core::{canonical_form, derive_form_schema, enumerate_paths, match_step, parse_graph};
use serde::Serialize;

use crate::api::{self, ApiError, AppState};
use crate::fsio;
use crate::workspace::{self, OpenError, Workspace};

#[derive(Debug, Parser)]
#[command(name = "scs", version, about = "Conceptual-graph annotation and narrative publication workbench")]
pub struct Cli {
    /// Workspace directory.
    #[arg(long, short = 'w', env = "SCS_WORKSPACE", default_value = ".", global = true)]
    pub workspace: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and cross-validate the whole workspace.
    Check {
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print a notation file in canonical form.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long, conflicts_with = "check")]
        write: bool,
        /// Exit 1 if the file is not in canonical form.
        #[arg(long)]
        check: bool,
    },
    /// Print the form schema derived from a model.
    Form { model_id: String },
    /// List segments matching every given criterion.
    Query {
        #[arg(long)]
        concept: Option<String>,
        #[arg(long)]
        marker: Option<String>,
        #[arg(long)]
        relation: Option<String>,
        /// Stratum kind: thematic, rhetoric, visual or acoustic.
        #[arg(long)]
        stratum: Option<String>,
        #[arg(long)]
        from_ms: Option<u64>,
        #[arg(long)]
        to_ms: Option<u64>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Segments matching one step of a scenario, best first.
    Match { scenario_id: String, step_id: String },
    /// Enumerate the paths of a scenario.
    Paths {
        scenario_id: String,
        #[arg(long, default_value_t = api::DEFAULT_MAX_LEN)]
        max_len: usize,
    },
    /// Compile a scenario into publications/<scenario-id>.json.
    Publish {
        scenario_id: String,
        #[arg(long, default_value = "fixed")]
        mode: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

/// Runs a command and maps its outcome to an exit status.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[derive(Serialize)]
struct QueryRow {
    segment_id: String,
    media_id: String,
    stratum_id: String,
    model_id: String,
    start_ms: u64,
    end_ms: u64,
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let bytes = fsio::to_json_bytes(value)?;
    std::io::stdout().write_all(&bytes)?;
    Ok(())
}

fn reject(err: ApiError) -> anyhow::Result<ExitCode> {
    print_json(&err)?;
    Ok(ExitCode::from(1))
}

/// Opens the workspace or reports why it cannot be used.
fn open(root: &Path) -> anyhow::Result<Result<Workspace, ExitCode>> {
    match Workspace::open(root) {
        Ok(ws) => Ok(Ok(ws)),
        Err(OpenError::Load(e)) => Err(e.into()),
        Err(OpenError::Invalid(findings)) => {
            for f in &findings {
                println!("{f}");
            }
            Ok(Err(ExitCode::from(1)))
        }
    }
}

macro_rules! open_or_exit {
    ($root:expr) => {
        match open($root)? {
            Ok(ws) => ws,
            Err(code) => return Ok(code),
        }
    };
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    let root = cli.workspace.as_path();
    match &cli.command {
        Command::Check { json } => {
            let findings = workspace::check(root)?;
            if *json {
                print_json(&findings)?;
            } else {
                for f in &findings {
                    println!("{f}");
                }
            }
            if findings.is_empty() {
                if !*json {
                    println!("ok");
                }
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Fmt { file, write, check } => fmt(file, *write, *check),
        Command::Form { model_id } => {
            let ws = open_or_exit!(root);
            let Some(model) = ws.corpus.model(model_id) else {
                return reject(ApiError::not_found("UnknownModel", "model", model_id));
            };
            match derive_form_schema(&ws.ontology, model) {
                Ok(schema) => print_json(&schema).map(|_| ExitCode::SUCCESS),
                Err(e) => reject(e.into()),
            }
        }
        Command::Query { concept, marker, relation, stratum, from_ms, to_ms, model } => {
            let ws = open_or_exit!(root);
            let mut params = HashMap::new();
            let text = [
                ("concept", concept),
                ("marker", marker),
                ("relation", relation),
                ("stratum", stratum),
                ("model", model),
            ];
            for (k, v) in text {
                if let Some(v) = v {
                    params.insert(k.to_string(), v.clone());
                }
            }
            for (k, v) in [("from_ms", from_ms), ("to_ms", to_ms)] {
                if let Some(v) = v {
                    params.insert(k.to_string(), v.to_string());
                }
            }
            let filter = match api::filter_from_params(&params) {
                Ok(f) => f,
                Err(e) => return reject(e),
            };
            match ws.corpus.query_segments(&ws.ontology, &filter) {
                Ok(hits) => {
                    let rows: Vec<QueryRow> = hits
                        .into_iter()
                        .map(|s| QueryRow {
                            segment_id: s.id.clone(),
                            media_id: ws.corpus.media_of(s).map(|m| m.id.clone()).unwrap_or_default(),
                            stratum_id: s.stratum_id.clone(),
                            model_id: s.model_id.clone(),
                            start_ms: s.start_ms,
                            end_ms: s.end_ms,
                        })
                        .collect();
                    print_json(&rows).map(|_| ExitCode::SUCCESS)
                }
                Err(e) => reject(e.into()),
            }
        }
        Command::Match { scenario_id, step_id } => {
            let ws = open_or_exit!(root);
            let Some(scenario) = ws.scenarios.get(scenario_id) else {
                return reject(ApiError::not_found("UnknownScenario", "scenario", scenario_id));
            };
            let Some(step) = scenario.step(step_id) else {
                return reject(ApiError::not_found("UnknownStep", "step", step_id));
            };
            match match_step(&ws.ontology, step, &ws.corpus) {
                Ok(matches) => {
                    let rows: Vec<SegmentRef> = matches
                        .into_iter()
                        .map(|m| SegmentRef {
                            segment_id: m.segment.id.clone(),
                            media_id: ws.corpus.media_of(m.segment).map(|x| x.id.clone()).unwrap_or_default(),
                            start_ms: m.segment.start_ms,
                            end_ms: m.segment.end_ms,
                            match_score: m.score,
                        })
                        .collect();
                    print_json(&rows).map(|_| ExitCode::SUCCESS)
                }
                Err(e) => reject(e.into()),
            }
        }
        Command::Paths { scenario_id, max_len } => {
            let ws = open_or_exit!(root);
            let Some(scenario) = ws.scenarios.get(scenario_id) else {
                return reject(ApiError::not_found("UnknownScenario", "scenario", scenario_id));
            };
            match enumerate_paths(scenario, *max_len) {
                Ok(paths) => {
                    let mut out = std::io::stdout().lock();
                    for p in paths {
                        writeln!(out, "{}", p.join(" > "))?;
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => reject(e.into()),
            }
        }
        Command::Publish { scenario_id, mode } => {
            let mode = match api::parse_mode(mode) {
                Ok(m) => m,
                Err(e) => return reject(e),
            };
            let ws = open_or_exit!(root);
            let Some(scenario) = ws.scenarios.get(scenario_id) else {
                return reject(ApiError::not_found("UnknownScenario", "scenario", scenario_id));
            };
            let publication = match ws.compile(scenario, mode) {
                Ok(p) => p,
                Err(e) => return reject(e.into()),
            };
            for w in &publication.warnings {
                eprintln!("warning: {}", serde_json::to_string(w)?);
            }
            let path = ws.publication_path(scenario_id);
            fsio::write_json(&path, &publication.manifest).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { bind } => {
            let ws = open_or_exit!(root);
            serve(ws, bind)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn fmt(file: &Path, write: bool, check: bool) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let g = match parse_graph(&text) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{}:{}:{}: {}", file.display(), e.span.line, e.span.column, e.message);
            return Ok(ExitCode::from(2));
        }
    };
    let mut out = canonical_form(&g);
    if !out.is_empty() {
        out.push('\n');
    }
    if check {
        return Ok(if out == text { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    if write {
        fsio::atomic_write(file, out.as_bytes()).with_context(|| format!("writing {}", file.display()))?;
    } else {
        std::io::stdout().write_all(out.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(ws: Workspace, bind: &str) -> anyhow::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind).await.with_context(|| format!("binding {bind}"))?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        std::io::stdout().flush()?;
        let app = api::router(AppState::new(ws));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        anyhow::Ok(())
    })
}
