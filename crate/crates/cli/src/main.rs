//! Command-line front end for the CheckLang bounds-check elision pipeline:
//! profile programs under the full-check oracle, rank check hotspots,
//! build safe-region knowledge bases from traces, and run programs in
//! bypass mode against them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use checklang_cli::commands::*;
use checklang_core::region::RegionKind;

#[derive(Parser)]
#[command(
    name = "checklang",
    version,
    about = "Profile-guided bounds-check elision for CheckLang programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Union,
    Hull,
}

impl From<KindArg> for RegionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Union => RegionKind::Union,
            KindArg::Hull => RegionKind::Hull,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run inputs under the full-check oracle and collect traces
    Profile {
        program: PathBuf,
        inputs: Vec<PathBuf>,
        /// Trace records, one JSON line per region-scope entry
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Per-(input, function) accounting lines for `hotspots`
        #[arg(long)]
        ledger_out: Option<PathBuf>,
        /// Record wall-clock self time per function (non-deterministic)
        #[arg(long)]
        wall_clock: bool,
        /// Abort runaway executions after this many statements
        #[arg(long, default_value_t = u64::MAX)]
        step_limit: u64,
    },
    /// Rank functions by their share of bounds-check overhead
    Hotspots {
        /// Ledger file written by `profile --ledger-out`
        #[arg(long)]
        ledger: PathBuf,
        /// Selection threshold on the overhead share
        #[arg(long, default_value = "0.05")]
        threshold: String,
        /// Synthetic cost of one bounds check
        #[arg(long, default_value = "0.035")]
        per_check_cost: String,
        /// Synthetic cost of one executed statement
        #[arg(long, default_value = "0.0019")]
        per_stmt_cost: String,
        /// Also write the ranked table as JSON
        #[arg(long)]
        json: Option<PathBuf>,
        /// Rank by measured wall-clock self time instead of the model
        #[arg(long)]
        from_wall_clock: bool,
    },
    /// Build or grow a knowledge base from trace files
    Build {
        /// Trace files to fold in
        #[arg(long, required = true, num_args = 1..)]
        traces: Vec<PathBuf>,
        /// Region shape to build
        #[arg(long, value_enum, default_value = "hull")]
        kind: KindArg,
        /// Output knowledge-base file
        #[arg(long)]
        kb: PathBuf,
        /// Existing knowledge base to grow
        #[arg(long)]
        base: Option<PathBuf>,
        /// Negation-transform constant (at most 2^32 - 1)
        #[arg(long, default_value_t = u32::MAX as u64)]
        c_max: u64,
        /// Only fold in records of these functions (hotspot selection)
        #[arg(long, value_delimiter = ',')]
        functions: Vec<String>,
    },
    /// Execute inputs in bypass mode against a knowledge base
    Run {
        program: PathBuf,
        inputs: Vec<PathBuf>,
        /// Knowledge base to consult
        #[arg(long)]
        kb: PathBuf,
        /// Second knowledge base for a side-by-side comparison table
        #[arg(long)]
        compare_kb: Option<PathBuf>,
        /// Write the report as JSON
        #[arg(long)]
        report_out: Option<PathBuf>,
        /// Skip ledger re-verification of bypassed checks (timing runs)
        #[arg(long)]
        no_reverify: bool,
        /// Re-run each input under the oracle and compare results
        #[arg(long)]
        verify_oracle: bool,
        /// Abort runaway executions after this many statements
        #[arg(long, default_value_t = u64::MAX)]
        step_limit: u64,
    },
    /// Knowledge-base utilities
    Kb {
        #[command(subcommand)]
        cmd: KbCmd,
    },
    /// Print dependency graphs, affecting sets, and region plans
    DumpDg { program: PathBuf },
    /// Generate benchmark programs with warm-up and evaluation inputs
    Gen {
        /// Output directory (one subdirectory per program)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of randomized programs (ignored with --template)
        #[arg(long, default_value_t = 8)]
        programs: usize,
        #[arg(long, default_value_t = 4)]
        warmups: usize,
        #[arg(long, default_value_t = 30)]
        evals: usize,
        /// A fixed benchmark instead of the randomized suite:
        /// escape, urlescape, blockcmp, stencil, or mixed
        #[arg(long)]
        template: Option<String>,
    },
}

#[derive(Subcommand)]
enum KbCmd {
    /// Pretty-print entries and facet inequalities
    Inspect {
        #[arg(long)]
        kb: PathBuf,
    },
}

fn main() -> ExitCode {
    // Die quietly when a pipe reader (head, grep -m1, ...) closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Profile {
            program,
            inputs,
            trace_out,
            ledger_out,
            wall_clock,
            step_limit,
        } => cmd_profile(ProfileArgs {
            program,
            inputs,
            trace_out,
            ledger_out,
            wall_clock,
            step_limit,
        }),
        Cmd::Hotspots {
            ledger,
            threshold,
            per_check_cost,
            per_stmt_cost,
            json,
            from_wall_clock,
        } => cmd_hotspots(HotspotsArgs {
            ledger,
            threshold,
            per_check_cost,
            per_stmt_cost,
            json,
            from_wall_clock,
        }),
        Cmd::Build {
            traces,
            kind,
            kb,
            base,
            c_max,
            functions,
        } => cmd_build(BuildArgs {
            traces,
            kind: kind.into(),
            kb,
            base,
            c_max,
            functions,
        }),
        Cmd::Run {
            program,
            inputs,
            kb,
            compare_kb,
            report_out,
            no_reverify,
            verify_oracle,
            step_limit,
        } => cmd_run(RunArgs {
            program,
            inputs,
            kb,
            compare_kb,
            report_out,
            no_reverify,
            verify_oracle,
            step_limit,
        }),
        Cmd::Kb { cmd } => match cmd {
            KbCmd::Inspect { kb } => cmd_kb_inspect(&kb),
        },
        Cmd::DumpDg { program } => cmd_dump_dg(&program),
        Cmd::Gen {
            out,
            seed,
            programs,
            warmups,
            evals,
            template,
        } => cmd_gen(GenArgs {
            out,
            seed,
            programs,
            warmups,
            evals,
            template,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code() as u8)
        }
    }
}
