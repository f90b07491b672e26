use std::process::ExitCode;

fn main() -> ExitCode {
    proxflow::cli::run(std::env::args_os())
}
