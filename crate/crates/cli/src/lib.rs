//! Library half of the `sinklimit` command: input parsing, job execution and
//! report rendering, kept out of `main` so they can be tested directly.

pub mod error;
pub mod input;
pub mod job;
pub mod report;

pub use error::CliError;
pub use input::{parse_input, LiteralInstance};
pub use job::{run_job, Command, GaugeArg, JobOutcome, JobSpec, MethodChoice, OutputFormat};
pub use report::Report;
