use clap::Parser;

use ppfit_cli::commands;
use ppfit_cli::config::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenData(args) => commands::run_gen_data(args),
        Command::Baseline(args) => commands::run_baseline(args),
        Command::Fit(args) => commands::run_fit(args),
        Command::Sweep(args) => commands::run_sweep(args),
        Command::CompareOptimizers(args) => commands::run_compare(args),
        Command::Rerun(args) => commands::run_rerun(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(ppfit_cli::exit_code(&e));
    }
}
