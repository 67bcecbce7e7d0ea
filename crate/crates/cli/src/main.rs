use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ominv::synthesis::Budget;
use ominv_cli::commands::{cmd_analyze, cmd_check, cmd_plot, AnalyzeOpts, Output, PlotOpts};

#[derive(Parser, Debug)]
#[command(name = "ominv", about = "Invariant synthesis and non-termination certificates for linear loops")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide whether an invariant avoiding the halting set exists.
    Analyze {
        problem: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_prefix: u64,
        #[arg(long, default_value_t = 12)]
        torus_order: u64,
        #[arg(long, default_value_t = 10)]
        subdiv_depth: u32,
        /// Working precision in bits.
        #[arg(long, default_value_t = 128)]
        precision: u32,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Re-check a certificate against its problem.
    Check {
        cert: PathBuf,
        problem: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Export orbit and cone samples as CSV.
    Plot {
        problem: PathBuf,
        #[arg(long, default_value_t = 60)]
        orbit: u64,
        #[arg(long, default_value_t = 16)]
        rays: usize,
        #[arg(long, default_value_t = 200)]
        t_samples: usize,
        /// Zero-based coordinates to export, e.g. `0,2,3` (default: the first three).
        #[arg(long, value_delimiter = ',')]
        coords: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out: Output = match cli.cmd {
        Cmd::Analyze { problem, max_prefix, torus_order, subdiv_depth, precision, cert, trace } => {
            let budget = Budget { max_prefix, torus_order_bound: torus_order, subdivision_depth: subdiv_depth, precision };
            cmd_analyze(&problem, &AnalyzeOpts { budget, cert, trace })
        }
        Cmd::Check { cert, problem, samples } => cmd_check(&cert, &problem, samples),
        Cmd::Plot { problem, orbit, rays, t_samples, coords, out } => cmd_plot(&problem, &PlotOpts { orbit, rays, t_samples, coords }, out.as_deref()),
    };
    print!("{}", out.stdout);
    ExitCode::from(out.code as u8)
}
