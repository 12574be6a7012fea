use std::process::ExitCode;

use clap::Parser;
use tuv_cli::{run, sweeper, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    let sweeper = sweeper(cli.cache_dir.as_deref());
    match run(&cli.command, jobs, &sweeper) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
