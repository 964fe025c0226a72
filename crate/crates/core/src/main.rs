use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phonon_qft::circuits::conflict_report;
use phonon_qft::config::{parse_config, RunConfig};
use phonon_qft::cost::{reports_to_csv, reports_to_json};
use phonon_qft::{runner, Error};

/// Simulate and compile trapped-ion Trotter circuits for lattice field theories.
#[derive(Parser)]
#[command(name = "phonon-qft", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured model and write CSV artifacts to `output_dir`.
    Run { config: PathBuf },
    /// Print the gate-angle table.
    Angles {
        config: PathBuf,
        /// Also list the published angles that disagree with the defining formulas.
        #[arg(long)]
        conflicts: bool,
    },
    /// Print the trap and laser parameter sheet.
    Hardware { config: PathBuf },
    /// Print entangling-gate counts per Trotter step.
    Cost {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print one Trotter step as gate lines.
    DumpCircuit { config: PathBuf },
}

const CONFIG_ERROR: u8 = 1;
const SOLVER_ERROR: u8 = 2;

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("phonon-qft: {err}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    let path = match &cli.command {
        Command::Run { config }
        | Command::Angles { config, .. }
        | Command::Hardware { config }
        | Command::Cost { config, .. }
        | Command::DumpCircuit { config } => config,
    };
    let cfg = match load(path) {
        Ok(cfg) => cfg,
        Err(e) => return fail(CONFIG_ERROR, format!("{}: {e}", path.display())),
    };
    for w in cfg.params.warnings() {
        eprintln!("phonon-qft: warning: {w}");
    }
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
        {
            return fail(CONFIG_ERROR, e);
        }
    }

    let result = match cli.command {
        Command::Run { .. } => runner::run(&cfg).map(|a| {
            for f in a.files {
                println!("{}", f.display());
            }
        }),
        Command::Angles { conflicts, .. } => runner::angles_csv(&cfg).map(|csv| {
            print!("{csv}");
            if conflicts {
                eprint!("{}", conflict_report());
            }
        }),
        Command::Hardware { .. } => match runner::hardware_csv(&cfg) {
            Ok(Some(csv)) => {
                print!("{csv}");
                Ok(())
            }
            Ok(None) => return fail(CONFIG_ERROR, "no trap keys in config"),
            Err(e @ Error::ConfigMissing(_)) => return fail(CONFIG_ERROR, e),
            Err(e) => Err(e),
        },
        Command::Cost { json, .. } => runner::cost_reports(&cfg).map(|r| {
            if json {
                println!("{}", reports_to_json(&r));
            } else {
                print!("{}", reports_to_csv(&r));
            }
        }),
        Command::DumpCircuit { .. } => runner::circuit(&cfg).map(|c| print!("{}", c.dump())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(SOLVER_ERROR, e),
    }
}
