use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env = std::env::var_os(unical_cli::REGISTRY_ENV);
    let code = unical_cli::run(std::env::args_os(), env, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
