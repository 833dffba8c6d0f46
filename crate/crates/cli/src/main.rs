use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;
use renorm_cli::report::table_path;
use renorm_cli::{
    emit_report, parse_raw, preset_config, CliError, Command, Outcome, Preset, ProblemConfig, Resolution,
    EXIT_CONTRACT, EXIT_OK, EXIT_VALIDATION,
};

/// Renormalized Dirichlet energy of circle-valued maps with vortices.
///
/// Exit status: 0 on success, 1 on invalid input, 2 when a computed
/// quantity misses its tolerance.
#[derive(Debug, Parser)]
#[command(name = "renorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem config (TOML).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named problem used instead of a config file.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Report path (JSON); tables go next to it as `<stem>.<table>.csv`.
    /// Without it the report goes to stdout and no tables are written.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized searches; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid resolution `NrxNt`; overrides the config.
    #[arg(long, global = true, value_name = "NrxNt")]
    resolution: Option<Resolution>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) if outcome.violations.is_empty() => ExitCode::from(EXIT_OK),
        Ok(outcome) => {
            for v in &outcome.violations {
                eprintln!("contract violation: {v}");
            }
            ExitCode::from(EXIT_CONTRACT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<ProblemConfig, CliError> {
    let mut raw = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            parse_raw(&text)?
        }
        (None, Some(preset)) => preset_config(preset),
        (None, None) if cli.command == Command::Selftest => ProblemConfig::default(),
        (None, None) => return Err(CliError::Usage("pass --config <PATH> or --preset <NAME>".into())),
    };
    if let Some(seed) = cli.seed {
        raw.seed = seed;
    }
    if let Some(res) = cli.resolution {
        raw.resolution = res;
    }
    Ok(raw.resolve()?)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::io("starting thread pool", e))?;
    }
    let config = load_config(cli)?;
    let outcome = cli.command.run(&config)?;

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).ok();
    let report = emit_report(cli.command.name(), &config, &outcome, timestamp);
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::io("serializing report", e))? + "\n";
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
            for table in &outcome.tables {
                let tp = table_path(path, &table.name);
                std::fs::write(&tp, table.to_csv()?)
                    .map_err(|e| CliError::io(format!("writing {}", tp.display()), e))?;
            }
        }
        None => print!("{text}"),
    }
    Ok(outcome)
}
