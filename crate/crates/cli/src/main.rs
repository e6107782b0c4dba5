use std::io::{self, Write};
use std::process::ExitCode;

use eventready_cli::{configure_threads, run, EXIT_USAGE};

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(std::env::args_os().collect(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code)
}
