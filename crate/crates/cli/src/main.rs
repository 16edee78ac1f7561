use std::io;
use std::process::ExitCode;

use bellnet_cli::{dense_cap_from_env, run, EXIT_USAGE};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cap = match dense_cap_from_env() {
        Ok(cap) => cap,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let code = run(std::env::args_os(), cap, &mut io::stdout().lock());
    ExitCode::from(code as u8)
}
