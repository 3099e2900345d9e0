use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lindspec_cli::artifacts::{resolve_output, run_experiment};
use lindspec_cli::plot::{render, PlotKind};
use lindspec_cli::presets::{self, load_plan, PRESETS};
use lindspec_cli::sweep::{sweep_to_dir, SweepSpec, SWEEP_CSV};
use lindspec_cli::CliError;
use lindspec_core::diagnostics::ReferenceKind;

#[derive(Parser)]
#[command(name = "lindspec", version, about = "Spectral statistics of dissipative spin chains")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "LINDSPEC_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file or a named preset.
    Run {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter grid and write sweep.csv / sweep.json.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render an SVG from a plot-data CSV file.
    EmitPlot {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
        /// Reference curves for spacing plots.
        #[arg(long = "reference", default_values = ["poisson2d", "ginibre"])]
        references: Vec<ReferenceKind>,
        #[arg(long, default_value_t = 4)]
        radial_bins: usize,
        #[arg(long, default_value_t = 8)]
        angular_bins: usize,
    },
    /// List the figure presets, or print one.
    Presets {
        #[arg(long)]
        preset: Option<String>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn run(spec: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let (mut plan, nested) = match (&spec, &preset) {
        (Some(path), _) => {
            let plan = load_plan(&read(path)?)?;
            let nested = plan.len() > 1;
            (plan, nested)
        }
        (None, Some(name)) => (load_plan(presets::find(name)?.text)?, true),
        (None, None) => unreachable!("clap requires one of --spec/--preset"),
    };
    for e in plan.iter_mut() {
        if let Some(s) = seed {
            e.seed = s;
        }
        e.validate()?;
    }
    for e in &plan {
        let base = resolve_output(out.as_deref(), e)?;
        let dir = if nested { base.join(&e.name) } else { base };
        let record = run_experiment(e, &dir)?;
        println!("{}: dimension {}, artifacts in {}", record.name, record.dimension, dir.display());
    }
    Ok(())
}

fn sweep(spec: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let mut s = SweepSpec::from_toml(&read(&spec)?)?;
    if let Some(seed) = seed {
        s.seeds = vec![seed];
    }
    s.validate()?;
    let dir = resolve_output(out.as_deref(), &s.experiment)?;
    let result = sweep_to_dir(&s, &dir);
    println!("sweep table: {}", dir.join(SWEEP_CSV).display());
    result.map(|records| println!("{} cells", records.len()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { spec, preset, out, seed } => run(spec, preset, out, seed),
        Command::Sweep { spec, out, seed } => sweep(spec, out, seed),
        Command::EmitPlot { data, kind, out, references, radial_bins, angular_bins } => {
            let svg = render(kind, &data, &references, (radial_bins, angular_bins))?;
            fs::write(&out, svg)?;
            Ok(())
        }
        Command::Presets { preset: None } => {
            for p in PRESETS {
                println!("{:<10} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Presets { preset: Some(name) } => {
            print!("{}", presets::find(&name)?.text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

