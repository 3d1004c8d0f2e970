//! `mai`: batch front end for the mai-core algorithms.
//!
//! Every subcommand writes one JSON document (or a JSONL/CSV stream for
//! `wakesleep`) to stdout. Documents carry a `version` field; the current
//! schema version is [`OUTPUT_VERSION`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use mai_core::complex::cell_counts;
use mai_core::homology::homology_basis;
use mai_core::memory::{consolidate, decompose_trace, extract_backbone, semanticize};
use mai_core::sheaf::{parse_sections, parse_sheaf};
use mai_core::{
    betti_numbers, dp_lookup, glue_sections, parity_profile, parse_complex, parse_graph, persistence_barcode,
    run_experiment, savitch_reach, sheaf_cohomology, CellId, Chain, ChainComplex, EngineState, ExperimentConfig,
    Filtration, Graph, GraphSpec,
};

const OUTPUT_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "mai", version, about = "Homology, sheaves and wake/sleep navigation over GF(2) complexes")]
struct Cli {
    /// Report wall-clock time on stderr.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Betti numbers and a homology basis per dimension.
    Homology { complex: PathBuf },
    /// Even/odd Betti split, Euler characteristic and phi_topo.
    Parity { complex: PathBuf },
    /// Persistence barcode of a filtered complex.
    Persistence {
        complex: PathBuf,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Split 1-cycles into backbone, contextual part and boundary noise.
    Decompose { complex: PathBuf, traces: PathBuf },
    /// Contract a nontrivial 1-cycle to a single vertex.
    Semanticize { complex: PathBuf, cycle: PathBuf },
    /// Sheaf cohomology, optionally gluing a family of local sections.
    Sheaf {
        sheaf: PathBuf,
        #[arg(long)]
        glue: Option<PathBuf>,
    },
    /// Route between two vertices by Savitch search or a saved scaffold.
    Navigate {
        graph: PathBuf,
        source: CellId,
        target: CellId,
        #[arg(long, value_enum, default_value_t = Mode::Savitch)]
        mode: Mode,
        /// Savitch length bound (defaults to the vertex count).
        #[arg(long)]
        k: Option<usize>,
        /// Engine state written by `wakesleep --state`.
        #[arg(long, required_if_eq("mode", "dp"))]
        state: Option<PathBuf>,
    },
    /// Run a seeded wake/sleep experiment.
    Wakesleep {
        #[arg(long)]
        config: PathBuf,
        /// Independent trials; trial i runs with seed + i.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the first trial's store and scaffold here.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Savitch,
    Dp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
enum CliError {
    Domain(mai_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => e.fmt(f),
            CliError::Io { path, source } => write!(f, "Io: {}: {source}", path.display()),
        }
    }
}

impl From<mai_core::Error> for CliError {
    fn from(e: mai_core::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn load_complex(path: &Path) -> CliResult<ChainComplex> {
    Ok(parse_complex(&read(path)?)?)
}

/// `[[ids], ...]`, one list of cell ids per chain.
fn load_chains(path: &Path, dim: usize) -> CliResult<Vec<Chain>> {
    let lists: Vec<Vec<CellId>> = serde_json::from_str(&read(path)?)?;
    Ok(lists.into_iter().map(|ids| Chain::from_cells(dim, ids)).collect())
}

fn document(body: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("version".into(), OUTPUT_VERSION.into());
    match body {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    serde_json::to_string(&Value::Object(doc)).unwrap() + "\n"
}

fn homology(path: &Path) -> CliResult<String> {
    let k = load_complex(path)?;
    let top = k.max_dim().unwrap_or(0);
    let bases = (0..=top)
        .map(|d| {
            let b = homology_basis(&k, d)?;
            Ok(json!({
                "dim": d,
                "betti": b.betti(),
                "cycles": b.z_basis.len(),
                "boundaries": b.b_basis.len(),
                "reps": b.reps.iter().map(|c| c.cells()).collect::<Vec<_>>(),
            }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(document(json!({
        "cells": cell_counts(&k).values().collect::<Vec<_>>(),
        "betti": betti_numbers(&k),
        "bases": bases,
    })))
}

fn parity(path: &Path) -> CliResult<String> {
    Ok(document(serde_json::to_value(parity_profile(&load_complex(path)?))?))
}

fn persistence(path: &Path, dim: usize) -> CliResult<String> {
    let k = load_complex(path)?;
    let max_dim = k.max_dim().unwrap_or(0);
    if dim > max_dim {
        return Err(mai_core::Error::DimensionOutOfRange { dim, max_dim }.into());
    }
    Ok(document(serde_json::to_value(persistence_barcode(&Filtration::new(k), dim))?))
}

fn decompose(complex: &Path, traces: &Path) -> CliResult<String> {
    let k = load_complex(complex)?;
    let basis = homology_basis(&k, 1)?;
    let bundle = extract_backbone(load_chains(traces, 1)?, &basis)?;
    let traces = bundle
        .traces
        .iter()
        .map(|c| {
            let t = decompose_trace(c, &bundle)?;
            let ltm = consolidate(&t, &basis);
            Ok(json!({
                "raw": c.cells(),
                "sigma": t.sigma_coeffs,
                "a": t.a_coeffs,
                "noise": t.noise.cells(),
                "ltm": ltm.ltm.cells(),
                "class": ltm.class,
            }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(document(json!({
        "reps": basis.reps.iter().map(|c| c.cells()).collect::<Vec<_>>(),
        "backbone": bundle.backbone,
        "traces": traces,
    })))
}

fn semanticize_cmd(complex: &Path, cycle: &Path) -> CliResult<String> {
    let k = load_complex(complex)?;
    let ids: Vec<CellId> = serde_json::from_str(&read(cycle)?)?;
    let quotient = semanticize(&k, &Chain::from_cells(1, ids))?;
    Ok(document(json!({
        "betti_before": betti_numbers(&k),
        "betti_after": betti_numbers(&quotient),
        "complex": quotient.to_document(),
    })))
}

fn sheaf(path: &Path, glue: Option<&Path>) -> CliResult<String> {
    let s = parse_sheaf(&read(path)?)?;
    let (h0, h1) = sheaf_cohomology(&s);
    let (c0, c1) = s.cochain_dims();
    let mut body = json!({ "h0": h0, "h1": h1, "cochain_dims": [c0, c1] });
    if let Some(glue) = glue {
        let r = glue_sections(&s, &parse_sections(&read(glue)?)?)?;
        body["gluing"] = json!({
            "gluable": r.gluable,
            "obstruction_dim": r.obstruction_dim,
            "kept": r.kept,
            "global_section": r.global_section,
        });
    }
    Ok(document(body))
}

fn navigate(
    path: &Path,
    s: CellId,
    t: CellId,
    mode: Mode,
    k: Option<usize>,
    state: Option<&Path>,
) -> CliResult<String> {
    let complex = parse_graph(&read(path)?)?;
    let g = Graph::from_complex(&complex);
    let (si, ti) = (g.index_of(s)?, g.index_of(t)?);
    let mut body = json!({ "mode": mode, "source": s, "target": t });
    let found = match mode {
        Mode::Savitch => {
            let k = k.unwrap_or(g.vertex_count()).max(1);
            body["k"] = k.into();
            let components = g.components();
            if components[si] != components[ti] {
                body["expansions"] = 0.into();
                None
            } else {
                let (traj, stats) = savitch_reach(&g, s, t, k)?;
                body["expansions"] = stats.expansions.into();
                body["max_depth"] = stats.max_depth.into();
                body["max_live_midpoints"] = stats.max_live_midpoints.into();
                traj
            }
        }
        Mode::Dp => {
            let state = EngineState::parse(&read(state.expect("clap requires --state with --mode dp"))?)?;
            let traj = dp_lookup(&state.scaffold, s, t);
            if let Some(traj) = &traj {
                traj.validate(&complex)?;
            }
            body["expansions"] = traj.as_ref().map_or(0, |t| t.expansions).into();
            traj
        }
    };
    body["found"] = found.is_some().into();
    if let Some(traj) = found {
        body["length"] = traj.len().into();
        body["vertices"] = json!(traj.vertices);
        body["edges"] = json!(traj.edges);
    }
    Ok(document(body))
}

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig::parse(&read(path)?)?;
    if let GraphSpec::File { path: graph } = &mut config.graph {
        let base = path.parent().unwrap_or(Path::new(""));
        if Path::new(graph).is_relative() {
            *graph = base.join(&*graph).to_string_lossy().into_owned();
        }
    }
    Ok(config)
}

fn wakesleep(config: &Path, trials: u64, format: Format, state: Option<&Path>) -> CliResult<String> {
    let config = load_config(config)?;
    let reports = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut c = config.clone();
            c.seed = config.seed.wrapping_add(i);
            run_experiment(&c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = state {
        write(path, &(serde_json::to_string(&reports[0].state())? + "\n"))?;
    }
    let tagged = trials > 1;
    let mut out = String::new();
    match format {
        Format::Json => {
            for (i, r) in reports.iter().enumerate() {
                for m in &r.epochs {
                    let mut v = serde_json::to_value(m)?;
                    if tagged {
                        let mut line = serde_json::Map::from_iter([("trial".to_string(), Value::from(i))]);
                        line.extend(v.as_object_mut().unwrap().clone());
                        v = Value::Object(line);
                    }
                    out += &(serde_json::to_string(&v)? + "\n");
                }
            }
        }
        Format::Csv => {
            for (i, r) in reports.iter().enumerate() {
                let csv = r.summary_csv();
                let mut lines = csv.lines();
                let header = lines.next().unwrap_or_default();
                if i == 0 {
                    out += &if tagged { format!("trial,{header}\n") } else { format!("{header}\n") };
                }
                for l in lines {
                    out += &if tagged { format!("{i},{l}\n") } else { format!("{l}\n") };
                }
            }
        }
    }
    Ok(out)
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Homology { complex } => homology(complex),
        Command::Parity { complex } => parity(complex),
        Command::Persistence { complex, dim } => persistence(complex, *dim),
        Command::Decompose { complex, traces } => decompose(complex, traces),
        Command::Semanticize { complex, cycle } => semanticize_cmd(complex, cycle),
        Command::Sheaf { sheaf: s, glue } => sheaf(s, glue.as_deref()),
        Command::Navigate { graph, source, target, mode, k, state } => {
            navigate(graph, *source, *target, *mode, *k, state.as_deref())
        }
        Command::Wakesleep { config, trials, format, state } => wakesleep(config, *trials, *format, state.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    if cli.timings {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_lead_with_version() {
        let doc = document(json!({"chi": 0}));
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["version"], OUTPUT_VERSION);
        assert_eq!(v["chi"], 0);
    }

    #[test]
    fn io_errors_name_themselves() {
        let e = read(Path::new("/nonexistent/complex.json")).unwrap_err();
        assert!(e.to_string().starts_with("Io: "));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
