use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sinkhorn_limit_cli::{run_job, Command, GaugeArg, JobSpec, MethodChoice, OutputFormat};

/// Limits of the generalized Sinkhorn iteration.
#[derive(Parser)]
#[command(name = "sinklimit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the limit matrix.
    Scale { input: PathBuf },
    /// Compute the limit and the gauge-normalized scaling factors.
    Factors { input: PathBuf },
    /// Run the iterative and closed-form routes and report their gap.
    Compare { input: PathBuf },
    /// Degree of the limit over Q: for one input, or a seeded sweep over
    /// 1x3, 2x2, 2x3 and 2x4 instances.
    DegreeCheck { input: Option<PathBuf> },
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long = "tol", global = true, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long = "max-iters", global = true, default_value_t = 1000)]
    max_iterations: usize,
    /// `r,INDEX` or `c,INDEX` (1-based); defaults to the last column.
    #[arg(long, global = true)]
    gauge: Option<GaugeArg>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Instances per shape for the degree-check sweep.
    #[arg(long, global = true, default_value_t = 20)]
    count: usize,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long = "singularity-threshold", global = true, default_value_t = sinkhorn_limit::DEFAULT_SINGULARITY_THRESHOLD)]
    singularity_threshold: f64,
    /// Row targets for CSV input, comma separated.
    #[arg(long, global = true)]
    rows: Option<String>,
    /// Column targets for CSV input, comma separated.
    #[arg(long, global = true)]
    cols: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Iterative,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };

    let (command, input) = match cli.command {
        Cmd::Scale { input } => (Command::Scale, Some(input)),
        Cmd::Factors { input } => (Command::Factors, Some(input)),
        Cmd::Compare { input } => (Command::Compare, Some(input)),
        Cmd::DegreeCheck { input } => (Command::DegreeCheck, input),
    };
    let o = cli.opts;
    let spec = JobSpec {
        input,
        rows: o.rows,
        cols: o.cols,
        method: match o.method {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Iterative => MethodChoice::Iterative,
            MethodArg::ClosedForm => MethodChoice::ClosedForm,
        },
        tolerance: o.tolerance,
        max_iterations: o.max_iterations,
        gauge: o.gauge.map(|g| g.0),
        seed: o.seed,
        count: o.count,
        format: match o.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        },
        singularity_threshold: o.singularity_threshold,
        ..JobSpec::new(command)
    };

    let outcome = run_job(&spec).and_then(|out| Ok((out.report.render(spec.format)?, out.exit_code)));
    match outcome {
        Ok((text, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("sinklimit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
