use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use zps_count::cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot start {threads} workers: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let outcome = run(cli);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    if !outcome.stderr.is_empty() && !outcome.stderr.ends_with('\n') {
        eprintln!();
    }
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}
