use std::process::ExitCode;

use blockcg_cli::args::SEED_ENV;

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let code = blockcg_cli::run_cli(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}
