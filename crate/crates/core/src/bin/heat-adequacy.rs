use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heat_adequacy::workbench::report::{build_report, summary_text, Bundle};
use heat_adequacy::workbench::study::{
    adequacy_files, Files, persist, render_covariates, render_fits, render_synthetic, run_study, write_files, ErrorReport,
};
use heat_adequacy::workbench::StudyConfig;
use heat_adequacy::{Error, Result};

/// Capacity adequacy studies with electrified heat demand.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic weather, demand and gas files plus a config that studies them.
    Synth(Common),
    /// Build the hourly covariate table.
    Covariates(Common),
    /// Fit the baseline and explicit hourly lasso models.
    Fit(Common),
    /// Run the adequacy grid (fits and hindcasts included).
    Adequacy(Common),
    /// Run every stage and write the full bundle with report tables.
    Study(Common),
    /// Render plot-ready tables from an existing study bundle.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Study config JSON; the built-in synthetic study when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Bundle directory written by `study`.
    #[arg(long)]
    bundle: PathBuf,
    /// Where to write the report tables; defaults to the bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common) -> Result<(StudyConfig, PathBuf)> {
    let mut config = match &common.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::synthetic_default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.resolved_output_dir())
        .ok_or_else(|| Error::validation("no output directory: pass --out or set output_dir"))?;
    Ok((config, out))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn run_files(common: &Common, render: fn(&StudyConfig) -> Result<Files>) -> Result<PathBuf> {
    let (config, out) = load(common)?;
    let files = with_threads(common.threads, || render(&config));
    persist(&out, files)?;
    Ok(out)
}

fn study(common: &Common, full: bool) -> Result<PathBuf> {
    let (config, out) = load(common)?;
    let files = with_threads(common.threads, || {
        let result = run_study(&config)?;
        if !full {
            return adequacy_files(&result);
        }
        let mut files = result.files;
        files.extend(build_report(&Bundle::new(files.clone()))?);
        Ok(files)
    });
    persist(&out, files)?;
    print!("{}", summary_text(&Bundle::load(&out)?)?);
    Ok(out)
}

fn report(args: &ReportArgs) -> Result<PathBuf> {
    let bundle = Bundle::load(&args.bundle)?;
    let out = args.out.clone().unwrap_or_else(|| args.bundle.clone());
    write_files(&out, &build_report(&bundle)?)?;
    print!("{}", summary_text(&bundle)?);
    Ok(out)
}

fn run(cli: &Cli) -> Result<PathBuf> {
    match &cli.command {
        Command::Synth(c) => run_files(c, render_synthetic),
        Command::Covariates(c) => run_files(c, render_covariates),
        Command::Fit(c) => run_files(c, render_fits),
        Command::Adequacy(c) => study(c, false),
        Command::Study(c) => study(c, true),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = ErrorReport::from_error(&e);
            eprintln!("{}", report.to_json());
            ExitCode::from(report.exit_code as u8)
        }
    }
}
