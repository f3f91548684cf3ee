use clap::Parser;

use dicke_cli::args::Cli;
use dicke_cli::config::WORKERS_ENV;
use dicke_cli::error::exit;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let env_workers = std::env::var(WORKERS_ENV).ok();
    if let Err(e) = dicke_cli::run(&cli, env_workers.as_deref()) {
        eprintln!("dicke: {e}");
        std::process::exit(e.exit_code());
    }
}
