use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use gauss_deficit::{output, run, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let bundle = run(&cfg)?;
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    output::write_bundle(&bundle, cfg.format, &mut out)?;
    out.flush()?;
    let s = &bundle.summary;
    eprintln!(
        "{}: {} checks, {} passed, {} failed, {} not asserted, {} errors",
        cfg.command.name(),
        s.total,
        s.passed,
        s.failed,
        s.not_asserted,
        s.errors
    );
    Ok(bundle.exit_code() as u8)
}
