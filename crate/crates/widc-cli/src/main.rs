//! Command-line interface: train a committee, predict with one, run
//! stratified cross validation, sweep XD6 noise levels, generate XD6 data,
//! and run the verification suites.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use widc::data::{
    dump_sample_csv, dump_schema, gen_xd6, load_csv, load_for_prediction, DatasetSchema,
};
use widc::pipeline::{
    cross_validate, noise_sweep, noise_sweep_kind, sweep_to_csv, train, NoiseKind, PruneMode,
    RunConfig,
};
use widc::verify::{run_all, VerifyOptions};
use widc::{DecisionCommittee, GrowLimits};

#[derive(Parser)]
#[command(name = "widc", version, about = "Induce small interpretable decision committees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TrainOpts {
    /// Pruning mode: o (optimistic), p (pessimistic) or none
    #[arg(long, default_value = "p")]
    mode: String,
    /// Confidence parameter of the optimistic pruning penalty
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Resample small samples up to this size before optimistic pruning
    #[arg(long, default_value_t = 5000)]
    resample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    max_rules: usize,
    #[arg(long, default_value_t = 32)]
    max_literals: usize,
}

impl TrainOpts {
    fn to_config(&self, folds: usize) -> Result<RunConfig, widc::Error> {
        Ok(RunConfig {
            mode: PruneMode::parse(&self.mode)?,
            delta: self.delta,
            resample_target: self.resample,
            seed: self.seed,
            folds,
            limits: GrowLimits {
                max_rules: self.max_rules,
                max_literals: self.max_literals,
            },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a committee on a CSV dataset and write the model JSON
    Train {
        data: PathBuf,
        /// Sidecar schema (default: data path with extension `.schema`)
        #[arg(long)]
        schema: Option<PathBuf>,
        #[command(flatten)]
        opts: TrainOpts,
        /// Where to write the model JSON (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the growth trace CSV (one row per accepted literal)
        #[arg(long)]
        grow_trace: Option<PathBuf>,
        /// Write the pessimistic pruning trace CSV
        #[arg(long)]
        prune_trace: Option<PathBuf>,
        /// Dump the booleanized sample as CSV (with a sidecar schema)
        #[arg(long)]
        dump_binarized: Option<PathBuf>,
    },
    /// Classify a CSV dataset with a trained model
    Predict {
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write predictions CSV (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified k-fold cross validation
    Cv {
        data: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Report prefix: writes `<out>.csv` and `<out>.json`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep XD6 noise levels 0..40% and cross-validate at each
    NoiseSweep {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// class, attribute or both
        #[arg(long, default_value = "both")]
        kind: String,
        /// Where to write the sweep CSV (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an XD6 sample as CSV (plus a sidecar schema file)
    GenXd6 {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        class_noise: f64,
        #[arg(long, default_value_t = 0.0)]
        attr_noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification suites against the exact oracles
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn schema_path(data: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| data.with_extension("schema"))
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), widc::Error> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(widc::Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn report_load(loaded: &widc::data::LoadedDataset) {
    if loaded.dropped_rows > 0 {
        eprintln!("dropped {} rows with missing values", loaded.dropped_rows);
    }
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<u8, widc::Error> {
    match cli.command {
        Command::Train {
            data,
            schema,
            opts,
            out,
            grow_trace,
            prune_trace,
            dump_binarized,
        } => {
            let schema = DatasetSchema::load(&schema_path(&data, &schema))?;
            let loaded = load_csv(&data, &schema)?;
            report_load(&loaded);
            let config = opts.to_config(10)?;
            let model = train(&loaded.sample, &config)?;
            let (r, l) = model.committee.size_metrics();
            let err = model
                .committee
                .error_rate(&loaded.sample, config.seed)?;
            eprintln!(
                "trained on {} examples ({} variables, {} classes): {} rules, {} literals, training error {:.4}",
                loaded.sample.len(),
                loaded.sample.n(),
                loaded.sample.c(),
                r,
                l,
                err
            );
            if let Some(p) = grow_trace {
                std::fs::write(p, model.grow_trace.to_csv())?;
            }
            if let (Some(p), Some(trace)) = (prune_trace.as_ref(), model.prune_trace.as_ref()) {
                std::fs::write(p, trace.to_csv())?;
            }
            if let Some(p) = dump_binarized {
                std::fs::write(&p, dump_sample_csv(&loaded.sample))?;
                std::fs::write(p.with_extension("schema"), dump_schema(&loaded.sample))?;
            }
            write_or_print(&out, &model.committee.to_json()?)?;
            Ok(0)
        }
        Command::Predict {
            model,
            data,
            schema,
            seed,
            out,
        } => {
            let dc = DecisionCommittee::from_json(&std::fs::read_to_string(&model)?)?;
            let schema = DatasetSchema::load(&schema_path(&data, &schema))?;
            let prediction = load_for_prediction(&data, &schema)?;
            let mut lines = String::from("row,prediction\n");
            let mut wrong = 0usize;
            let mut labeled = 0usize;
            for (i, obs) in prediction.observations.iter().enumerate() {
                let cls = dc.classify(obs, seed)?;
                lines.push_str(&format!("{},{}\n", i, dc.class_names()[cls]));
                if let Some(labels) = &prediction.labels {
                    labeled += 1;
                    if labels[i] != dc.class_names()[cls] {
                        wrong += 1;
                    }
                }
            }
            if labeled > 0 {
                eprintln!(
                    "error rate on {} labeled rows: {:.4}",
                    labeled,
                    wrong as f64 / labeled as f64
                );
            }
            write_or_print(&out, &lines)?;
            Ok(0)
        }
        Command::Cv {
            data,
            schema,
            opts,
            folds,
            out,
        } => {
            let schema = DatasetSchema::load(&schema_path(&data, &schema))?;
            let loaded = load_csv(&data, &schema)?;
            report_load(&loaded);
            let config = opts.to_config(folds)?;
            let report = cross_validate(&loaded.sample, &config)?;
            eprintln!(
                "{}-fold cv (mode {}): mean error {:.4}, mean r_DC {:.2}, mean l_DC {:.2} [{:.2?}]",
                report.folds_count,
                report.mode,
                report.mean_error,
                report.mean_r_dc,
                report.mean_l_dc,
                report.wall
            );
            match out {
                Some(prefix) => {
                    std::fs::write(prefix.with_extension("csv"), report.to_csv())?;
                    std::fs::write(prefix.with_extension("json"), report.to_json()?)?;
                }
                None => print!("{}", report.to_csv()),
            }
            Ok(0)
        }
        Command::NoiseSweep {
            seed,
            folds,
            kind,
            out,
        } => {
            let config = RunConfig {
                seed,
                folds,
                ..RunConfig::default()
            };
            let rows = match kind.as_str() {
                "class" => noise_sweep_kind(&config, NoiseKind::Class)?,
                "attribute" => noise_sweep_kind(&config, NoiseKind::Attribute)?,
                "both" => noise_sweep(&config)?,
                other => {
                    return Err(widc::Error::Precondition(format!(
                        "unknown noise kind '{other}'"
                    )))
                }
            };
            write_or_print(&out, &sweep_to_csv(&rows))?;
            Ok(0)
        }
        Command::GenXd6 {
            n,
            class_noise,
            attr_noise,
            seed,
            out,
        } => {
            let sample = gen_xd6(n, class_noise, attr_noise, seed)?;
            std::fs::write(&out, dump_sample_csv(&sample))?;
            std::fs::write(out.with_extension("schema"), dump_schema(&sample))?;
            eprintln!("wrote {} examples to {}", sample.len(), out.display());
            Ok(0)
        }
        Command::Verify { seed } => {
            let report = run_all(&VerifyOptions {
                seed,
                ..VerifyOptions::default()
            })?;
            print!("{}", report.render());
            Ok(if report.passed() { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
