use std::io::ErrorKind;

use clap::Parser;
use cogmap::cli::{exit_code, run, Cli, EXIT_USAGE};
use cogmap::Error;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = run(cli, &mut std::io::stdout().lock()) {
        if matches!(&e, Error::Stream(io) if io.kind() == ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
