//! `fgkls --job <path> [--out <path>] [--seed <n>]`
//!
//! Exit codes: 0 success, 2 schema error, 3 contract error, 4 numerical
//! failure, 1 I/O.

mod error;
mod job;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rand::rngs::StdRng;
use rand::SeedableRng;

use error::CliError;
use job::Source;
use run::Artifact;

#[derive(Debug, Parser)]
#[command(name = "fgkls", version, about = "Exact two-level Lindblad solver: batch jobs from JSON")]
struct Args {
    /// JSON job file.
    #[arg(long)]
    job: PathBuf,
    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for systems or initial states the job leaves out.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.job)?;
    let name = args.job.display().to_string();
    let src = Source { name: &name, text: &text };
    let job = job::parse(&src)?;
    let mut rng = StdRng::seed_from_u64(args.seed);
    let body = match run::run(&job, &src, &mut rng)? {
        Artifact::Json(v) => serde_json::to_string_pretty(&v).expect("documents serialize") + "\n",
        Artifact::Csv(s) => s,
    };
    match args.out.clone().or_else(|| job.output.path.as_ref().map(PathBuf::from)) {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fgkls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
