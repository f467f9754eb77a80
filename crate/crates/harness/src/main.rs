use std::process::ExitCode;

use sparse_pr_harness::{parse_config, run, ConfigError};

fn main() -> ExitCode {
    let grid = match parse_config(std::env::args_os()) {
        Ok(g) => g,
        Err(ConfigError::Cli(e)) => {
            // --help and --version land here too
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&grid) {
        Ok(summary) => {
            println!(
                "wrote {} rows to {} (metadata {})",
                summary.rows,
                summary.csv.display(),
                summary.metadata.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
