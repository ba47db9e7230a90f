use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

use circulab::{driver, selftest};

/// Numerical laboratory for sparse random matrix experiments.
#[derive(Parser)]
#[command(name = "circulab", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the experiment grid described by a TOML config file.
    ///
    /// Writes per-experiment CSVs plus manifest.json into the configured
    /// output directory.  Worker count comes from the config, else the
    /// CIRCULAB_THREADS environment variable, else the host.
    Run {
        /// Path to the config file.
        config: PathBuf,
    },
    /// Aggregate a finished run directory into a fixed-width table and a
    /// machine-readable summary.csv.
    Summarize {
        /// Directory containing manifest.json.
        dir: PathBuf,
    },
    /// Run every built-in definitional and example check.
    Selftest {
        /// Also write the results as CSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn selftest_main(out: Option<PathBuf>) -> circulab::Result<i32> {
    let rows = selftest::run_all();
    selftest::print_table(&rows);
    if let Some(path) = out {
        std::fs::write(&path, selftest::to_csv(&rows))?;
        println!("wrote {}", path.display());
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config } => driver::run(&config),
        Cmd::Summarize { dir } => driver::summarize(&dir),
        Cmd::Selftest { out } => selftest_main(out),
    };
    match result {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {}", e);
            exit(e.exit_code());
        }
    }
}
