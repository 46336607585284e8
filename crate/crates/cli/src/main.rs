use clap::Parser;
use embfuse_cli::Cli;

// Exit codes: 0 success, 1 validation error, 2 I/O error.
fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own convention reserves 2 for usage errors; remap so 2
            // stays I/O-only. Help and version requests are successes.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = embfuse_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(if e.is_io() { 2 } else { 1 });
    }
}
