//! `ctf`: generate adversarial datasets, run the instrumented
//! counterexample experiments, and check the searches against brute force.
//!
//! Exit code 0 means every expectation of the requested run held
//! (lower bounds, contradictions where promised, oracle equivalence);
//! 1 means the run completed but an expectation failed; 2 means the run
//! itself errored.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctf::{
    run_correctness_suite, run_dual_complexity, run_dual_self_neighbor,
    run_insert_counterexample, run_nn_counterexample, run_scaling_sweep, ExperimentResult,
};
use ctf_core::io::{write_closed_form, write_matrix};
use ctf_core::trace::{render_block_log, render_level_log};
use ctf_core::tree::tree_to_text;
use ctf_core::{generate_bichromatic, generate_tall_imbalanced, MetricSpace};

#[derive(Parser)]
#[command(name = "ctf", about = "metric-search counterexample harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputOpts {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-level (or per-block) run log to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its prescribed tree files.
    Gen {
        /// Family: `tall` or `bichromatic`.
        #[arg(long)]
        family: String,
        #[arg(long)]
        m: u32,
        /// Output path prefix; writes `<prefix>.dataset` plus tree files.
        #[arg(long)]
        out: PathBuf,
        /// Serialize the explicit distance matrix instead of the recipe.
        #[arg(long)]
        matrix: bool,
    },
    /// Insert the held-out query into the prescribed tree and report the
    /// recursion count against the depth bound.
    InsertCe {
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Nearest-neighbor descent for the held-out query.
    NnCe {
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Paired-tree runs: complexity measurement by default, the
    /// self-neighbor confirmation with `--self`.
    DualCe {
        #[arg(long)]
        m: u32,
        /// Run the identical-trees variant that reports trivial neighbors.
        #[arg(long = "self")]
        self_run: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// One CSV row per m for a family.
    Sweep {
        #[arg(long)]
        family: String,
        /// Comma-separated list, e.g. `11,15,21`.
        #[arg(long = "m-list", value_delimiter = ',')]
        m_list: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized oracle-equivalence suite.
    Verify {
        #[arg(long)]
        seed: u64,
        /// Comma-separated dataset sizes.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_result(
    result: &ExperimentResult,
    output: &OutputOpts,
    trace_text: Option<String>,
) -> std::io::Result<bool> {
    let json = serde_json::to_string_pretty(result).expect("serializable");
    emit(&output.out, &format!("{json}\n"))?;
    if let (Some(path), Some(text)) = (&output.trace, trace_text) {
        fs::write(path, text)?;
    }
    Ok(result.expectations_met())
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Gen { family, m, out, matrix } => {
            let prefix = out.to_string_lossy().into_owned();
            match family.as_str() {
                "tall" => {
                    let ds = generate_tall_imbalanced(m)?;
                    let dataset = if matrix {
                        write_matrix(&ds.space)
                    } else {
                        write_closed_form("tall-imbalanced", m, ds.space.len())
                    };
                    fs::write(format!("{prefix}.dataset"), dataset)?;
                    fs::write(format!("{prefix}.tree"), tree_to_text(&ds.tree))?;
                    eprintln!("wrote {prefix}.dataset and {prefix}.tree");
                }
                "bichromatic" => {
                    let ds = generate_bichromatic(m)?;
                    if m < 20 {
                        eprintln!(
                            "note: m = {m} is below the complexity crossover; \
                             the paired-tree bound will not be exceeded"
                        );
                    }
                    let dataset = if matrix {
                        write_matrix(&ds.space)
                    } else {
                        write_closed_form("bichromatic", m, ds.space.len())
                    };
                    fs::write(format!("{prefix}.dataset"), dataset)?;
                    fs::write(format!("{prefix}.qtree"), tree_to_text(&ds.query_tree))?;
                    fs::write(format!("{prefix}.rtree"), tree_to_text(&ds.reference_tree))?;
                    eprintln!("wrote {prefix}.dataset, {prefix}.qtree and {prefix}.rtree");
                }
                other => return Err(format!("unknown family {other:?}").into()),
            }
            Ok(true)
        }
        Command::InsertCe { m, output } => {
            let (result, trace) = run_insert_counterexample(m)?;
            let ok = emit_result(&result, &output, Some(render_level_log("insert", &trace)))?;
            Ok(ok)
        }
        Command::NnCe { m, output } => {
            let (result, trace) = run_nn_counterexample(m)?;
            let ok = emit_result(&result, &output, Some(render_level_log("nn", &trace)))?;
            Ok(ok)
        }
        Command::DualCe { m, self_run, output } => {
            let (result, events) = if self_run {
                run_dual_self_neighbor(m)?
            } else {
                run_dual_complexity(m)?
            };
            let ok = emit_result(&result, &output, Some(render_block_log(&events)))?;
            Ok(ok)
        }
        Command::Sweep { family, m_list, out } => {
            let csv = run_scaling_sweep(&family, &m_list)?;
            emit(&out, &csv)?;
            Ok(true)
        }
        Command::Verify { seed, sizes, out } => {
            let report = run_correctness_suite(seed, &sizes);
            let json = serde_json::to_string_pretty(&report).expect("serializable");
            emit(&out, &format!("{json}\n"))?;
            Ok(report.all_passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("expectations not met");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
