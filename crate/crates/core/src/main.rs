use std::io;
use std::process::ExitCode;

use sumsetlab::cli;

fn main() -> ExitCode {
    let mem_env = std::env::var(cli::MEM_ENV).ok();
    let code = cli::run(
        std::env::args_os(),
        mem_env,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
