use std::io::Write;

use clap::Parser;
use hybridlab_cli::cli::Cli;

fn main() {
    let cli = Cli::parse();
    match hybridlab_cli::run(cli) {
        // a closed pipe (`| head`) is not an error worth reporting
        Ok(text) => {
            let _ = writeln!(std::io::stdout(), "{text}");
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
