use std::process::ExitCode;

use clap::Parser;

mod commands;
mod report;

use commands::Cli;
use report::{Format, RunReport};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let (report, format, code) = run(&argv);
    let out = match format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
        Format::Text => report.to_text(),
    };
    println!("{out}");
    ExitCode::from(code)
}

/// Parses `argv` and dispatches. Exit codes: 0 when a verdict was computed,
/// 1 for input errors, 2 for internal failures.
fn run(argv: &[String]) -> (RunReport, Format, u8) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let cmd = argv.get(1).cloned().unwrap_or_default();
            return (RunReport::failure(&cmd, e.to_string().trim().to_owned()), Format::Json, 1);
        }
    };
    let format = cli.format;
    let name = cli.command.name().to_owned();
    match std::panic::catch_unwind(|| commands::dispatch(&cli)) {
        Ok(Ok(report)) => (report, format, 0),
        Ok(Err(e)) => (RunReport::failure(&name, e.to_string()), format, 1),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "internal failure".into());
            (RunReport::failure(&name, format!("internal failure: {msg}")), format, 2)
        }
    }
}
