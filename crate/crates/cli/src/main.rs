use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use majorana_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.render(cli.format).as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("majorana: {} check failed", cli.command.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("majorana: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
