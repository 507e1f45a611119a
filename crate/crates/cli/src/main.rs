use std::process::ExitCode;

fn main() -> ExitCode {
    tbt_cli::run(std::env::args_os())
}
