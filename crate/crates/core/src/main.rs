use std::process::ExitCode;

use clap::Parser;
use fakeideal::cli::{error_value, run, Cli, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    match run(&cli) {
        Ok(out) => {
            match format {
                Format::Text => print!("{}", out.text),
                Format::Structured => {
                    println!("{}", serde_json::to_string_pretty(&out.structured).expect("values serialize"))
                }
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            if format == Format::Structured {
                println!("{}", error_value(&e));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
