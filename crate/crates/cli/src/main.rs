use std::process::ExitCode;

use clap::Parser;
use lvspde_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command, &cli.flags) {
        Ok(outcome) => {
            for v in &outcome.report.verdicts {
                println!(
                    "{} {} statistic={} threshold={}",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.check,
                    v.statistic,
                    v.threshold
                );
            }
            println!("reports written to {}", outcome.dir.display());
            if outcome.report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
