mod args;
mod commands;
mod io;
mod reference;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;

fn run(cli: &Cli) -> io::CliResult<()> {
    match &cli.command {
        Command::PriorTab(a) => commands::prior_tab(a),
        Command::Fit(a) => commands::fit(a),
        Command::Coverage(a) => commands::coverage(a),
        Command::Binreg(a) => commands::binreg(a),
        Command::Stress(a) => commands::stress(a),
        Command::CheckPropriety(a) => commands::check_propriety(a),
        Command::Reproduce(a) => commands::reproduce(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
