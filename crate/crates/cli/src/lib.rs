//! The `hfcast` command-line front end.
//!
//! Exit codes: 0 success, 1 some experiment runs failed, 2 unreadable or
//! invalid input data, 3 computation error, 64 usage error.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::Context;
use error::{CliError, EXIT_OK, EXIT_USAGE};

/// Runs a parsed command line, writing results to `out` and notices to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut ctx = Context::new(cli.seed, cli.config.as_deref(), cli.output_dir)?;
    let result = match &cli.command {
        Command::Ingest(a) => commands::cmd_ingest(&mut ctx, a, out),
        Command::Analyze(a) => commands::cmd_analyze(&mut ctx, a, out),
        Command::Denoise(a) => commands::cmd_denoise(&mut ctx, a, out),
        Command::Train(a) => commands::cmd_train(&mut ctx, a, out),
        Command::Evaluate(a) => commands::cmd_evaluate(&mut ctx, a, out),
        Command::Run(a) => commands::cmd_run(&mut ctx, a, out).and_then(|report| {
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Partial {
                    failed: report.failures.len(),
                    total: report.failures.len() + report.runs.len(),
                })
            }
        }),
        Command::Report(a) => commands::cmd_report(&mut ctx, a, out),
        Command::Fixtures(a) => commands::cmd_fixtures(&mut ctx, a, out),
    };
    for note in &ctx.notices {
        let _ = writeln!(err, "notice: {note}");
    }
    result
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = ClosedPipeOk(stdout.lock());
    match run(cli, &mut out, &mut stderr.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Treats a closed reader (`hfcast ... | head`) as consumed output.
struct ClosedPipeOk<W>(W);

impl<W: Write> Write for ClosedPipeOk<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(buf.len()),
            r => r,
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        }
    }
}
