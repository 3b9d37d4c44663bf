use std::process::ExitCode;

fn main() -> ExitCode {
    match scatter_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scatter: {e}");
            ExitCode::from(e.code)
        }
    }
}
