mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, RunManifest, TopLevel};
use commands::CliError;

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        TopLevel::Run(cmd) => Ok(cmd),
        TopLevel::Rerun { manifest, out } => std::fs::read_to_string(&manifest)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", manifest.display())))
            .and_then(|text| {
                serde_json::from_str::<RunManifest>(&text)
                    .map_err(|e| CliError::Usage(format!("invalid manifest {}: {e}", manifest.display())))
            })
            .map(|m| {
                let mut cmd = m.command;
                if let Some(out) = out {
                    cmd.common_mut().out = out;
                }
                cmd
            }),
    };
    match command.and_then(|cmd| commands::run(&cmd)) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = ErrorRecord { kind: e.kind(), message: e.to_string(), exit_code: e.exit_code() };
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
