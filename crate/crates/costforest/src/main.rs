use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(costforest::cli::main_with_args(std::env::args_os()))
}
