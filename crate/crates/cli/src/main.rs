use clap::Parser;
use settle_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("settle: {e}");
        std::process::exit(e.exit_code());
    }
}
