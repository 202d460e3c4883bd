//! `bsdet`: runs the determinant verification suites and writes CSV or JSON tables.
//!
//! Exit status: 0 when every row passes, 1 on the first failing row, 2 on
//! usage errors.

mod config;
mod suites;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use config::{Args, Format, RunConfig};
use table::Table;

fn write(cfg: &RunConfig, t: &Table) -> io::Result<()> {
    let mut w: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let schema = cfg.command.to_string();
    match cfg.format {
        Format::Csv => t.write_csv(&mut w, &schema, &cfg.echo())?,
        Format::Json => t.write_json(&mut w, &schema, &cfg.echo())?,
    }
    w.flush()
}

fn main() -> ExitCode {
    let cfg = match config::resolve(Args::parse()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let table = match suites::run(&cfg) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write(&cfg, &table) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match table.first_failure() {
        Some((i, status)) => {
            eprintln!("row {i} failed: {status}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
