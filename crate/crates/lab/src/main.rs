use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bregman_lab::cli::run_cli(std::env::args_os()))
}
