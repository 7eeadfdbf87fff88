use std::process::ExitCode;

fn main() -> ExitCode {
    qetlab::cli::main_with_args(std::env::args_os())
}
