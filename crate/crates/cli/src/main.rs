// SPDX-License-Identifier: Apache-2.0

//! `irviz`: merge a family of IR dumps, simplify it and write a metro map.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use irviz_core::diff_merge::diff_variant;
use irviz_core::ingest::{parse_dump, write_dump, DumpBundle, DumpError};
use irviz_core::pipeline::{run_pipeline, stage_table, PipelineOptions};
use irviz_core::synth::{generate_bundle, Injection, SynthSpec};
use irviz_core::{Exact, PipelineOutput};

/// Environment variable holding a comma-separated list of line color indices.
const COLORS_VAR: &str = "IRVIZ_COLORS";

#[derive(Parser)]
#[command(
    name = "irviz",
    version,
    about = "Visualize JIT compiler IR families as optimization-phase metro maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the map and the suspicion report
    Pipeline(PipelineArgs),
    /// Parse and validate a dump file
    Validate { path: PathBuf },
    /// Print the per-phase differences of every variant
    Diff {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the suspicion report
    Report {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        passes: Passes,
    },
    /// Generate a synthetic dump with injected bugs
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Passes {
    #[arg(long)]
    no_dead_removal: bool,
    #[arg(long)]
    no_node_merge: bool,
    #[arg(long)]
    no_hyperedge_merge: bool,
    #[arg(long)]
    no_station_merge: bool,
}

impl Passes {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            dead_removal: !self.no_dead_removal,
            node_merge: !self.no_node_merge,
            hyperedge_merge: !self.no_hyperedge_merge,
            station_merge: !self.no_station_merge,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    input: PathBuf,
    /// Map JSON output
    #[arg(long)]
    out: PathBuf,
    /// Suspicion report output
    #[arg(long)]
    report: PathBuf,
    /// Format of the report file
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    passes: Passes,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectionArg {
    Added,
    Removed,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 19)]
    variants: u32,
    #[arg(long, default_value_t = 300)]
    min_nodes: u32,
    #[arg(long, default_value_t = 500)]
    max_nodes: u32,
    #[arg(long, default_value_t = 30)]
    min_phases: u32,
    #[arg(long, default_value_t = 40)]
    max_phases: u32,
    #[arg(long, default_value = "EarlyOptimization")]
    buggy_phase: String,
    #[arg(long, default_value_t = 9)]
    buggy_variants: u32,
    #[arg(long, value_enum, default_value_t = InjectionArg::Added)]
    injection: InjectionArg,
    /// Dump output
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth JSON output
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn read_bundle(path: &Path) -> Result<DumpBundle> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_dump(&bytes).with_context(|| format!("{} is not a valid dump", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn palette() -> Result<Option<Vec<u32>>> {
    let Ok(raw) = std::env::var(COLORS_VAR) else {
        return Ok(None);
    };
    let colors = raw
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("{COLORS_VAR} must be a comma-separated list of integers"))?;
    if colors.is_empty() {
        bail!("{COLORS_VAR} is empty");
    }
    Ok(Some(colors))
}

fn run(bundle: &DumpBundle, passes: &Passes) -> Result<PipelineOutput> {
    let mut out = run_pipeline::<Exact>(bundle, &passes.options())?;
    if let Some(colors) = palette()? {
        out.map.recolor(&colors);
    }
    Ok(out)
}

fn render_report(out: &PipelineOutput, format: Format) -> Result<String> {
    Ok(match format {
        Format::Text => out.report.to_table(),
        Format::Json => serde_json::to_string_pretty(&out.report)? + "\n",
    })
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let bundle = read_bundle(&args.input)?;
    let out = run(&bundle, &args.passes)?;
    write(&args.out, out.map.to_json())?;
    write(&args.report, render_report(&out, args.format)?)?;
    print!("{}", stage_table(&out.stages));
    Ok(())
}

fn validate(path: &Path) -> Result<ExitCode> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    match parse_dump(&bytes) {
        Ok(bundle) => {
            let nodes: usize = bundle.graphs().map(|g| g.node_count()).sum();
            println!("ok: {} graphs, {nodes} nodes", bundle.variants.len() + 1);
            Ok(ExitCode::SUCCESS)
        }
        Err(DumpError::Validation(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            eprintln!("{}: {} violation(s)", path.display(), violations.len());
            Ok(ExitCode::FAILURE)
        }
        Err(e) => {
            println!("{e}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn diff(path: &Path, format: Format) -> Result<()> {
    let bundle = read_bundle(path)?;
    let diffs: Vec<_> = bundle
        .variants
        .iter()
        .flat_map(|v| diff_variant(&bundle.original, v))
        .collect();
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&diffs)?),
        Format::Text => {
            for d in &diffs {
                let added: Vec<String> = d.added_nodes.iter().map(|n| n.to_string()).collect();
                println!(
                    "variant {}  {}  added [{}]  missing {}",
                    d.variant_ir_id,
                    d.phase_name,
                    added.join(", "),
                    d.missing_signatures.len()
                );
            }
        }
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_variants: args.variants,
        min_nodes: args.min_nodes,
        max_nodes: args.max_nodes,
        min_phases: args.min_phases,
        max_phases: args.max_phases,
        buggy_phase: args.buggy_phase.clone(),
        n_buggy_variants: args.buggy_variants,
        injection: match args.injection {
            InjectionArg::Added => Injection::Added,
            InjectionArg::Removed => Injection::Removed,
        },
    };
    let (bundle, truth) = generate_bundle(args.seed, &spec)?;
    write(&args.out, write_dump(&bundle)?)?;
    if let Some(path) = &args.truth {
        write(path, serde_json::to_string_pretty(&truth)? + "\n")?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Pipeline(args) => pipeline(&args)?,
        Command::Validate { path } => return validate(&path),
        Command::Diff { path, format } => diff(&path, format)?,
        Command::Report {
            path,
            format,
            passes,
        } => {
            let out = run(&read_bundle(&path)?, &passes)?;
            print!("{}", render_report(&out, format)?);
        }
        Command::Synth(args) => synth(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
