use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(polyent_cli::run(std::env::args_os()) as u8)
}
