//! `cellfree`: dataset generation, one-off solves, training and evaluation.
//!
//! Exit codes: 0 success, 1 numerical or convergence failure, 2 usage or
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cellfree::datagen::{build_dataset, load_dataset, load_manifest, Split};
use cellfree::evaluation::{cdf_csv, mse_report, summary_csv, MSE_REPORT_EPOCHS};
use cellfree::neural::{epoch_log_csv, load_checkpoint, save_checkpoint};
use cellfree::pipeline::{evaluate_dataset, solve_instance, train_on_dataset, LayoutChoice, RunConfig};
use cellfree::{Error, Objective, Result, Scenario};

/// Default parent directory for outputs when neither `--out` nor `output_dir` is given.
const OUTPUT_ROOT_ENV: &str = "CELLFREE_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "cellfree", version, about = "Uplink power control for cell-free massive MIMO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset of (input, optimal power) samples.
    Gen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataOverrides,
        /// Dataset directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one seeded instance and print the solver report as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataOverrides,
        /// Sample index under the master seed (the same index as in a generated dataset).
        #[arg(long, default_value_t = 0)]
        instance_seed: u64,
    },
    /// Train the scenario-matched network on a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        /// Dataset directory written by `gen`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Force a layout (ann1, ann2, ann3) instead of the scenario-matched one.
        #[arg(long)]
        layout: Option<LayoutChoice>,
        #[arg(long)]
        init_seed: Option<u64>,
        #[arg(long)]
        train_seed: Option<u64>,
    },
    /// Compare solvers, learned models and uniform power on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Checkpoint written by `train`; repeat for the sum-rate and max-min models.
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DataOverrides {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scenario: Option<Scenario>,
    /// sum-rate or max-min.
    #[arg(long)]
    objective: Option<Objective>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_val: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
}

impl DataOverrides {
    fn apply(&self, cfg: &mut RunConfig) {
        let d = &mut cfg.data;
        if let Some(v) = self.seed {
            d.master_seed = v;
        }
        if let Some(v) = self.scenario {
            d.scenario = v;
        }
        if let Some(v) = self.objective {
            d.objective = v;
        }
        if let Some(v) = self.n_train {
            d.n_train = v;
        }
        if let Some(v) = self.n_val {
            d.n_val = v;
        }
        if let Some(v) = self.n_test {
            d.n_test = v;
        }
    }
}

/// `println!` that ignores a closed stdout (e.g. output piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn load_config(common: &Common) -> Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn output_dir(flag: &Option<PathBuf>, cfg: &RunConfig, stage: &str) -> PathBuf {
    if let Some(p) = flag.as_ref().or(cfg.output_dir.as_ref()) {
        return p.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| "runs".into());
    root.join(format!("{}-{}-{stage}", cfg.data.scenario.name(), cfg.data.objective.tag()))
}

/// Writes the effective configuration next to the outputs.
fn copy_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let cfg = RunConfig { output_dir: None, ..cfg.clone() };
    let path = dir.join("run_config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg)? + "\n").map_err(|e| Error::io(&path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { common, data, out } => {
            let mut cfg = load_config(&common)?;
            data.apply(&mut cfg);
            let dir = output_dir(&out, &cfg, "data");
            let step = (cfg.data.total() / 20).max(1);
            let manifest = build_dataset(&cfg.data, &dir, |done, total| {
                if done % step == 0 || done == total {
                    eprintln!("gen: {done}/{total}");
                }
            })?;
            copy_config(&dir, &cfg)?;
            out!("dataset: {}", dir.display());
            out!(
                "scenario {} objective {} input_dim {} target_dim {}",
                cfg.data.scenario.name(),
                cfg.data.objective.tag(),
                manifest.input_dim,
                manifest.target_dim
            );
            for split in Split::ALL {
                out!(
                    "{:?}: {} records sha256 {}",
                    split,
                    manifest.counts.get(&split).copied().unwrap_or(0),
                    manifest.sha256.get(&split).map(String::as_str).unwrap_or("")
                );
            }
            out!("dropped: {}", manifest.dropped.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { common, data, instance_seed } => {
            let mut cfg = load_config(&common)?;
            data.apply(&mut cfg);
            let report = solve_instance(&cfg.data, instance_seed)?;
            out!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Train { common, data, out, layout, init_seed, train_seed } => {
            let mut cfg = load_config(&common)?;
            let ds = load_dataset(&data)?;
            cfg.data = ds.manifest.config.clone();
            cfg.layout = layout.or(cfg.layout);
            cfg.init_seed = Some(init_seed.unwrap_or_else(|| cfg.init_seed()));
            cfg.train_seed = Some(train_seed.unwrap_or_else(|| cfg.train_seed()));
            let dir = output_dir(&out, &cfg, "model");
            let (ckpt, log) = train_on_dataset(
                &ds,
                cfg.layout,
                &cfg.training,
                cfg.init_seed(),
                cfg.train_seed(),
                |e| eprintln!("epoch {:>3}: train {:.6} val {:.6}", e.epoch, e.train_mse, e.val_mse),
            )?;
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            save_checkpoint(&dir.join("model.ckpt"), &ckpt)?;
            write(&dir.join("epoch_log.csv"), &epoch_log_csv(&log))?;
            if log.len() >= *MSE_REPORT_EPOCHS.last().unwrap_or(&0) {
                let column = format!("{}-{}", cfg.data.scenario.name(), cfg.data.objective.tag());
                write(&dir.join("mse_report.csv"), &mse_report(&[(column, &log)])?.to_csv())?;
            }
            copy_config(&dir, &cfg)?;
            let last = log.last().ok_or_else(|| Error::Empty("training schedule has no epochs".into()))?;
            out!(
                "model: {} ({} parameters, {} epochs, final train {:.6} val {:.6})",
                dir.join("model.ckpt").display(),
                ckpt.model.parameter_count(),
                log.len(),
                last.train_mse,
                last.val_mse
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { common, data, model, out } => {
            let mut cfg = load_config(&common)?;
            // Fail on a missing split before any solver work.
            let manifest = load_manifest(&data)?;
            for split in Split::ALL {
                let p = data.join(split.file_name());
                if !p.exists() {
                    return Err(Error::MissingFile(p));
                }
            }
            let models = model.iter().map(|p| load_checkpoint(p)).collect::<Result<Vec<_>>>()?;
            let ds = load_dataset(&data)?;
            cfg.data = manifest.config;
            let dir = output_dir(&out, &cfg, "eval");
            let evals = evaluate_dataset(&ds, &models)?;
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let name = cfg.data.scenario.name();
            write(&dir.join(format!("cdf_{name}.csv")), &cdf_csv(&evals)?)?;
            let summary = summary_csv(&evals);
            write(&dir.join(format!("summary_{name}.csv")), &summary)?;
            copy_config(&dir, &cfg)?;
            out!("{}", summary.trim_end());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 1 } else { 2 })
        }
    }
}
