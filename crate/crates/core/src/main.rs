use std::io::{self, Write};
use std::process::ExitCode;

use gapdet::cli;

fn main() -> ExitCode {
    if let Err(msg) = cli::configure_threads(std::env::var("GAPDET_THREADS").ok().as_deref()) {
        eprintln!("gapdet: usage error: {msg}");
        return ExitCode::from(cli::EXIT_USAGE as u8);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = cli::run(std::env::args_os(), &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(code as u8)
}
