//! Command-line driver: configuration, pipeline stages and report files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{Context, DumpFields};
use config::{load_config, SimConfig};
use error::{CliError, CliResult};
use perfolayer::inequalities::Inequality;

#[derive(Debug, Parser)]
#[command(name = "perfolayer", about = "Homogenized plate models of thin perforated elastic layers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed of the eigen iterations and random test fields.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// none, final or stride=K.
    #[arg(long, global = true, default_value = "none")]
    pub dump_fields: DumpFields,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the six cell problems.
    CellSolve,
    /// Effective membrane, coupling and bending tensors.
    Homogenize,
    /// Limit plate dynamics.
    PlateRun,
    /// Layer dynamics for every ε.
    MicroRun,
    /// Full layer-versus-plate study over all ε.
    Converge,
    /// Korn constants of the clamped layer.
    Korn,
    /// Operator norm of the hole extension.
    ExtensionNorm,
    /// Trace constants on the lateral hole surface.
    Trace,
    /// Randomized checks of the tensor-field splitting.
    HelmholtzCheck,
    /// Rebuild plot data and the summary from existing tables.
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CellSolve => "cell-solve",
            Command::Homogenize => "homogenize",
            Command::PlateRun => "plate-run",
            Command::MicroRun => "micro-run",
            Command::Converge => "converge",
            Command::Korn => "korn",
            Command::ExtensionNorm => "extension-norm",
            Command::Trace => "trace",
            Command::HelmholtzCheck => "helmholtz-check",
            Command::Report => "report",
        }
    }
}

fn execute(cli: &Cli, out: &std::path::Path, cfg: SimConfig) -> CliResult<()> {
    if cli.command == Command::Report {
        return commands::report(out);
    }
    std::fs::write(out.join(output::CONFIG_ECHO), cfg.echo())?;
    let ctx = Context { cfg, out: out.to_path_buf(), seed: cli.seed, dump: cli.dump_fields };
    match cli.command {
        Command::CellSolve => commands::cell_solve(&ctx),
        Command::Homogenize => commands::homogenize(&ctx),
        Command::PlateRun => commands::plate_run(&ctx),
        Command::MicroRun => commands::micro_run(&ctx),
        Command::Converge => commands::converge(&ctx),
        Command::Korn => commands::inequality(&ctx, Inequality::Korn),
        Command::ExtensionNorm => commands::inequality(&ctx, Inequality::Extension),
        Command::Trace => commands::inequality(&ctx, Inequality::Trace),
        Command::HelmholtzCheck => commands::helmholtz(&ctx),
        Command::Report => unreachable!(),
    }?;
    commands::report(out)
}

fn fail(command: &str, out: Option<&std::path::Path>, e: &CliError) -> i32 {
    let record = e.record(command);
    let text = serde_json::to_string_pretty(&record).unwrap_or_default();
    eprintln!("{text}");
    if let Some(dir) = out {
        if dir.is_dir() {
            let _ = std::fs::write(dir.join(output::ERROR), format!("{text}\n"));
        }
    }
    e.exit_code()
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return fail("", None, &CliError::Validation(e.to_string()));
        }
    };
    let name = cli.command.name();
    let cfg = match &cli.config {
        Some(p) => load_config(p),
        None => Ok(SimConfig::default()),
    };
    let out = cli.out.clone().or_else(|| cfg.as_ref().ok().map(|c| c.output.dir.clone())).unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => return fail(name, std::fs::create_dir_all(&out).ok().map(|_| out.as_path()), &e),
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        return fail(name, None, &CliError::Io(format!("{}: {e}", out.display())));
    }
    let _ = std::fs::remove_file(out.join(output::ERROR));
    let result = match cli.workers {
        Some(0) => Err(CliError::Validation("--workers: must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli, &out, cfg))),
        None => execute(&cli, &out, cfg),
    };
    match result {
        Ok(()) => 0,
        Err(e) => fail(name, Some(&out), &e),
    }
}
