use std::process::ExitCode;

fn main() -> ExitCode {
    let code = taxsan::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code.clamp(0, 255) as u8)
}
