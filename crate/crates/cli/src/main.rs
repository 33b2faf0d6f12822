use std::process::ExitCode;

use clap::Parser;

use msalab_cli::{execute, resolve_config, threads_from_env, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || {
        let threads = threads_from_env()?;
        let cfg = resolve_config(&cli)?;
        execute(cli.command, &cfg, threads)
    };
    match run() {
        Ok((manifest, code)) => {
            let dir = manifest.files.len();
            if code == 0 {
                eprintln!("{}: ok, {dir} files", manifest.command);
            } else {
                eprintln!("{}: targets missed, report written ({dir} files)", manifest.command);
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
