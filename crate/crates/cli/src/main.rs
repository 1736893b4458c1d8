use std::io::Write;

use clap::Parser;

fn main() {
    let cli = cutforest_cli::Cli::parse();
    let out = cutforest_cli::run(&cli);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
