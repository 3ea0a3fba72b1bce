use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(discalg::cli::run())
}
