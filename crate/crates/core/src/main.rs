use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env_seed = std::env::var(svdamg::cli::SEED_ENV).ok();
    let code = svdamg::cli::main_with(std::env::args_os(), env_seed.as_deref(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code.clamp(0, 255) as u8)
}
