//! Command-line front end.
//!
//! Every option can come from three places, later ones winning: built-in
//! defaults, a `key=value` file given with `--config`, and command-line flags.
//! Each run writes `manifest.txt` into its output directory; the manifest is
//! itself a valid `--config` file and reproduces the run's outputs exactly.
//! The output directory is not recorded, so a manifest can be replayed
//! anywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::baselines::{train_stagewise, Learner};
use crate::data::{load_csv, load_libsvm, split, train_test_split, write_csv, Dataset, LabelColumn, SplitSpec};
use crate::engine::{train, TrainConfig, DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS};
use crate::error::Error;
use crate::margins::{default_grid, write_cdf_csv, MarginReport};
use crate::model::ModelFile;
use crate::select::{select_e, select_rounds, wilcoxon_z, EGrid};
use crate::toy::{toy_dataset, ToyConfig};

/// Environment variable naming the base directory for run outputs.
pub const OUT_DIR_ENV: &str = "MCBOOST_OUT_DIR";
const DEFAULT_OUT_BASE: &str = "mcboost-runs";
const MANIFEST: &str = "manifest.txt";

/// Reference per-dataset test errors (percent) of six boosting methods on
/// thirteen benchmark datasets.
pub const BENCHMARK_TABLE: &str = include_str!("../data/benchmark_test_errors.csv");

#[derive(Debug, Parser)]
#[command(name = "mcboost", version, about = "Margin-distribution controlled boosting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a dataset, train one model, report errors and margins.
    Train(TrainArgs),
    /// Apply a saved model to a dataset.
    Predict(ModelDataArgs),
    /// Export the margin distribution of a saved model on a dataset.
    Margins(ModelDataArgs),
    /// Choose E (mcboost) or the round count (adaboost, l2boost) on a validation split.
    Cv(CvArgs),
    /// Wilcoxon signed-rank comparison of two columns of an error table.
    Compare(CompareArgs),
    /// Regenerate the toy-data E sweep.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $MCBOOST_OUT_DIR/<command>, else mcboost-runs/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// csv, libsvm or auto (by file extension).
    #[arg(long)]
    pub format: Option<String>,
    /// Label column of a CSV file: last, a 0-based index, or a header name.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub valid_fraction: Option<f64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// mcboost, adaboost or l2boost.
    #[arg(long)]
    pub algo: Option<String>,
    /// Desired margin (mcboost).
    #[arg(long = "e")]
    pub e: Option<f64>,
    /// Boosting rounds (adaboost, l2boost).
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Maximum column-generation iterations (mcboost).
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Write the per-iteration trace (mcboost).
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct ModelDataArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long)]
    pub algo: Option<String>,
    /// `default` (0.05, 0.10, ..., 0.95) or a comma-separated list (mcboost).
    #[arg(long)]
    pub grid: Option<String>,
    /// Upper bound on the selected round count (adaboost, l2boost).
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with a `dataset` column and one error column per method [default: the bundled benchmark table].
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Method expected to have the lower errors.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long)]
    pub label_noise: Option<f64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    /// 1 usage, 2 data or I/O, 3 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Lib(Error::InvalidParameter(_)) => 1,
            CliError::Lib(e) if e.is_solver_failure() => 3,
            CliError::Lib(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(dir) => {
            println!("outputs written to {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command; returns its output directory.
pub fn run(cli: Cli) -> CliResult<PathBuf> {
    match cli.command {
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a, false),
        Command::Margins(a) => run_predict(a, true),
        Command::Cv(a) => run_cv(a),
        Command::Compare(a) => run_compare(a),
        Command::Repro(a) => run_repro(a),
    }
}

/// Resolved options for one command.
struct Settings {
    command: &'static str,
    allowed: &'static [&'static str],
    values: BTreeMap<String, String>,
    /// Keys given by a flag or the config file rather than a default.
    explicit: BTreeSet<String>,
    out: Option<PathBuf>,
    manifest: Vec<(String, String)>,
}

impl Settings {
    fn new(command: &'static str, allowed: &'static [&'static str], common: &Common) -> CliResult<Self> {
        let mut s = Settings {
            command,
            allowed,
            values: BTreeMap::new(),
            explicit: BTreeSet::new(),
            out: common.out.clone(),
            manifest: Vec::new(),
        };
        if let Some(path) = &common.config {
            s.read_config(path)?;
        }
        Ok(s)
    }

    fn read_config(&mut self, path: &Path) -> CliResult<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!("{}:{}: expected key=value", path.display(), i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "command" if value != self.command => {
                    return Err(usage(format!(
                        "{} is a config for `{value}`, not `{}`",
                        path.display(),
                        self.command
                    )))
                }
                "command" => {}
                "out" => {
                    if self.out.is_none() {
                        self.out = Some(PathBuf::from(value));
                    }
                }
                _ if self.allowed.contains(&key) => {
                    self.values.insert(key.to_string(), value.to_string());
                    self.explicit.insert(key.to_string());
                }
                _ => {
                    return Err(usage(format!(
                        "{}:{}: `{key}` is not an option of `{}`",
                        path.display(),
                        i + 1,
                        self.command
                    )))
                }
            }
        }
        Ok(())
    }

    fn flag<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
            self.explicit.insert(key.to_string());
        }
    }

    fn flag_path(&mut self, key: &str, value: &Option<PathBuf>) {
        self.flag(key, value.as_ref().map(|p| p.display().to_string()));
    }

    fn is_set(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| usage(format!("invalid value {v:?} for `{key}`")))
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| usage(format!("`{}` needs --{}", self.command, flag_name(key))))
    }

    fn forbid(&self, keys: &[&str], reason: &str) -> CliResult<()> {
        match keys.iter().find(|k| self.is_set(k)) {
            Some(k) => Err(usage(format!("--{} cannot be used {reason}", flag_name(k)))),
            None => Ok(()),
        }
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.manifest.push((key.to_string(), value.to_string()));
    }

    /// Creates the output directory; nothing is written before this point.
    fn output_dir(&self) -> CliResult<PathBuf> {
        let dir = match &self.out {
            Some(d) => d.clone(),
            None => std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_BASE))
                .join(self.command),
        };
        fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        Ok(dir)
    }

    fn write_manifest(&self, dir: &Path) -> CliResult<()> {
        let mut text = format!("command={}\n", self.command);
        for (k, v) in &self.manifest {
            text.push_str(&format!("{k}={v}\n"));
        }
        write_file(&dir.join(MANIFEST), &text)
    }
}

/// Command-line spelling of a config key.
fn flag_name(key: &str) -> String {
    key.to_lowercase().replace('_', "-")
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| {
        CliError::Lib(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

fn apply_data_flags(s: &mut Settings, a: &DataArgs) {
    s.flag_path("data", &a.data);
    s.flag("format", a.format.as_ref());
    s.flag("label", a.label.as_ref());
}

fn apply_split_flags(s: &mut Settings, a: &SplitArgs) {
    s.flag("seed", a.seed);
    s.flag("train_fraction", a.train_fraction);
    s.flag("valid_fraction", a.valid_fraction);
    s.flag("test_fraction", a.test_fraction);
}

/// Resolves data options, records them, and returns a loader to run later.
fn resolve_data(s: &mut Settings) -> CliResult<(PathBuf, DataFormat, Option<String>)> {
    let path: PathBuf = s.require("data")?;
    let format = match s.get_or("format", "auto".to_string())?.as_str() {
        "csv" => DataFormat::Csv,
        "libsvm" => DataFormat::Libsvm,
        "auto" => {
            let csv = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if csv {
                DataFormat::Csv
            } else {
                DataFormat::Libsvm
            }
        }
        other => return Err(usage(format!("unknown format {other:?} (csv, libsvm, auto)"))),
    };
    let label = match format {
        DataFormat::Csv => {
            let label = s.get_or("label", "last".to_string())?;
            label.parse::<LabelColumn>().map_err(|e| usage(e.to_string()))?;
            Some(label)
        }
        DataFormat::Libsvm => {
            s.forbid(&["label"], "with libsvm data")?;
            None
        }
    };
    let path = absolute(&path);
    s.record("data", path.display());
    s.record(
        "format",
        match format {
            DataFormat::Csv => "csv",
            DataFormat::Libsvm => "libsvm",
        },
    );
    if let Some(l) = &label {
        s.record("label", l);
    }
    Ok((path, format, label))
}

#[derive(Debug, Clone, Copy)]
enum DataFormat {
    Csv,
    Libsvm,
}

fn load(path: &Path, format: DataFormat, label: &Option<String>) -> CliResult<Dataset> {
    Ok(match format {
        DataFormat::Csv => {
            let column = label
                .as_deref()
                .unwrap_or("last")
                .parse::<LabelColumn>()
                .map_err(|e| usage(e.to_string()))?;
            load_csv(path, &column)?
        }
        DataFormat::Libsvm => load_libsvm(path)?,
    })
}

fn resolve_split(s: &mut Settings) -> CliResult<SplitSpec> {
    let spec = SplitSpec::new(
        s.get_or("train_fraction", 0.6)?,
        s.get_or("valid_fraction", 0.2)?,
        s.get_or("test_fraction", 0.2)?,
        s.get_or("seed", 0)?,
    )?;
    s.record("seed", spec.seed);
    s.record("train_fraction", spec.train_fraction);
    s.record("valid_fraction", spec.valid_fraction);
    s.record("test_fraction", spec.test_fraction);
    Ok(spec)
}

fn resolve_learner(s: &Settings) -> CliResult<Learner> {
    s.get_or("algo", "mcboost".to_string())?
        .parse::<Learner>()
        .map_err(|_| usage("--algo must be mcboost, adaboost or l2boost"))
}

fn resolve_mcboost(s: &mut Settings, target: f64) -> CliResult<TrainConfig> {
    let config = TrainConfig {
        target,
        epsilon: s.get_or("epsilon", DEFAULT_EPSILON)?,
        max_iterations: s.get_or("nmax", DEFAULT_MAX_ITERATIONS)?,
        trace: false,
    };
    config.validate()?;
    s.record("epsilon", config.epsilon);
    s.record("nmax", config.max_iterations);
    Ok(config)
}

fn parse_grid(text: &str) -> CliResult<EGrid> {
    if text == "default" {
        return Ok(EGrid::default_grid());
    }
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid grid value {v:?}")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(EGrid::new(values)?)
}

fn grid_text(grid: &EGrid) -> String {
    let v: Vec<String> = grid.values().iter().map(f64::to_string).collect();
    v.join(",")
}

fn metrics_csv(rows: &[(&str, &Dataset, f64)]) -> String {
    let mut out = String::from("split,n_examples,error\n");
    for (name, d, err) in rows {
        out.push_str(&format!("{name},{},{err}\n", d.len()));
    }
    out
}

/// Trained model plus the pieces written next to it.
struct Fitted {
    model: ModelFile,
    trace_csv: Option<String>,
}

fn fit(
    learner: Learner,
    train_set: &Dataset,
    mcboost: Option<&TrainConfig>,
    rounds: usize,
) -> CliResult<Fitted> {
    if learner == Learner::McBoost {
        let config = mcboost.expect("mcboost config resolved");
        let result = train(train_set, config)?;
        let trace_csv = result.trace.as_ref().map(|records| {
            let mut out = String::from(
                "iteration,feature,threshold,polarity,edge,r,primal_objective,gap,active,train_error\n",
            );
            for t in records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    t.iteration,
                    t.stump.feature,
                    t.stump.threshold,
                    t.stump.polarity.sign(),
                    t.edge,
                    t.r,
                    t.primal_objective,
                    t.gap,
                    t.active,
                    t.train_error
                ));
            }
            out
        });
        Ok(Fitted {
            model: ModelFile {
                learner,
                target: Some(config.target),
                iterations: result.iterations,
                termination: result.termination.as_str().to_string(),
                n_features: train_set.n_features(),
                ensemble: result.model_ensemble()?,
            },
            trace_csv,
        })
    } else {
        let run = train_stagewise(learner, train_set, rounds)?;
        Ok(Fitted {
            model: ModelFile {
                learner,
                target: None,
                iterations: run.n_rounds(),
                termination: run.stop.as_str().to_string(),
                n_features: train_set.n_features(),
                ensemble: run.ensemble()?,
            },
            trace_csv: None,
        })
    }
}

/// Model file, metrics, training margins and (optionally) the trace.
fn write_fitted(
    dir: &Path,
    fitted: &Fitted,
    parts: [(&str, &Dataset); 3],
) -> CliResult<()> {
    let ensemble = &fitted.model.ensemble;
    fitted.model.save(dir.join("model.txt"))?;
    let mut rows = Vec::new();
    for (name, d) in parts {
        rows.push((name, d, ensemble.error_rate(d)?));
    }
    write_file(&dir.join("metrics.csv"), &metrics_csv(&rows))?;
    MarginReport::for_ensemble(ensemble, parts[0].1)?.write_all(dir, "train_", fitted.model.target)?;
    if let Some(trace) = &fitted.trace_csv {
        write_file(&dir.join("trace.csv"), trace)?;
    }
    Ok(())
}

fn run_train(a: TrainArgs) -> CliResult<PathBuf> {
    const KEYS: &[&str] = &[
        "data", "format", "label", "algo", "E", "rounds", "epsilon", "nmax", "trace", "seed",
        "train_fraction", "valid_fraction", "test_fraction",
    ];
    let mut s = Settings::new("train", KEYS, &a.common)?;
    apply_data_flags(&mut s, &a.data);
    apply_split_flags(&mut s, &a.split);
    s.flag("algo", a.algo.as_ref());
    s.flag("E", a.e);
    s.flag("rounds", a.rounds);
    s.flag("epsilon", a.epsilon);
    s.flag("nmax", a.nmax);
    s.flag("trace", a.trace.then_some(true));

    let learner = resolve_learner(&s)?;
    let (path, format, label) = resolve_data(&mut s)?;
    let spec = resolve_split(&mut s)?;
    s.record("algo", learner);
    let mut config = None;
    let mut rounds = 0;
    if learner == Learner::McBoost {
        s.forbid(&["rounds"], "with --algo mcboost (use --nmax)")?;
        let target: f64 = s.require("E")?;
        s.record("E", target);
        let mut c = resolve_mcboost(&mut s, target)?;
        c.trace = s.get_or("trace", false)?;
        s.record("trace", c.trace);
        config = Some(c);
    } else {
        s.forbid(&["E", "epsilon", "nmax", "trace"], &format!("with --algo {learner}"))?;
        rounds = s.require("rounds")?;
        if rounds == 0 {
            return Err(usage("--rounds must be at least 1"));
        }
        s.record("rounds", rounds);
    }

    let data = load(&path, format, &label)?;
    let (tr, va, te) = split(&data, &spec)?;
    let fitted = fit(learner, &tr, config.as_ref(), rounds)?;
    let dir = s.output_dir()?;
    write_fitted(&dir, &fitted, [("train", &tr), ("valid", &va), ("test", &te)])?;
    s.write_manifest(&dir)?;
    Ok(dir)
}

fn run_predict(a: ModelDataArgs, margins_only: bool) -> CliResult<PathBuf> {
    const KEYS: &[&str] = &["model", "data", "format", "label"];
    let command = if margins_only { "margins" } else { "predict" };
    let mut s = Settings::new(command, KEYS, &a.common)?;
    s.flag_path("model", &a.model);
    apply_data_flags(&mut s, &a.data);
    let model_path = absolute(&s.require::<PathBuf>("model")?);
    s.record("model", model_path.display());
    let (path, format, label) = resolve_data(&mut s)?;

    let model = ModelFile::load(&model_path)?;
    let data = load(&path, format, &label)?;
    if data.n_features() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: data.n_features(),
        }
        .into());
    }
    let dir = s.output_dir()?;
    if margins_only {
        MarginReport::for_ensemble(&model.ensemble, &data)?.write_all(&dir, "", model.target)?;
    } else {
        let values = model.ensemble.decision_values(&data)?;
        let mut out = String::from("index,decision_value,prediction,label\n");
        for (i, (f, y)) in values.iter().zip(data.labels()).enumerate() {
            let p = if *f >= 0.0 { 1 } else { -1 };
            out.push_str(&format!("{i},{f},{p},{y}\n"));
        }
        write_file(&dir.join("predictions.csv"), &out)?;
        let err = model.ensemble.error_rate(&data)?;
        write_file(&dir.join("metrics.csv"), &metrics_csv(&[("all", &data, err)]))?;
    }
    s.write_manifest(&dir)?;
    Ok(dir)
}

fn run_cv(a: CvArgs) -> CliResult<PathBuf> {
    const KEYS: &[&str] = &[
        "data", "format", "label", "algo", "grid", "max_rounds", "epsilon", "nmax", "seed",
        "train_fraction", "valid_fraction", "test_fraction",
    ];
    let mut s = Settings::new("cv", KEYS, &a.common)?;
    apply_data_flags(&mut s, &a.data);
    apply_split_flags(&mut s, &a.split);
    s.flag("algo", a.algo.as_ref());
    s.flag("grid", a.grid.as_ref());
    s.flag("max_rounds", a.max_rounds);
    s.flag("epsilon", a.epsilon);
    s.flag("nmax", a.nmax);

    let learner = resolve_learner(&s)?;
    let (path, format, label) = resolve_data(&mut s)?;
    let spec = resolve_split(&mut s)?;
    s.record("algo", learner);
    let mut grid = None;
    let mut template = None;
    let mut max_rounds = 0;
    if learner == Learner::McBoost {
        s.forbid(&["max_rounds"], "with --algo mcboost (use --grid)")?;
        let g = parse_grid(&s.get_or("grid", "default".to_string())?)?;
        s.record("grid", grid_text(&g));
        grid = Some(g);
        template = Some(resolve_mcboost(&mut s, 0.5)?);
    } else {
        s.forbid(&["grid", "epsilon", "nmax"], &format!("with --algo {learner}"))?;
        max_rounds = s.get_or("max_rounds", 1000)?;
        if max_rounds == 0 {
            return Err(usage("--max-rounds must be at least 1"));
        }
        s.record("max_rounds", max_rounds);
    }

    let data = load(&path, format, &label)?;
    let (tr, va, te) = split(&data, &spec)?;
    let (report, fitted) = if let (Some(grid), Some(template)) = (&grid, &template) {
        let cv = select_e(&tr, &va, grid, template)?;
        let fitted = fit(learner, &tr, Some(&template.with_target(cv.chosen)), 0)?;
        (cv.to_csv(), fitted)
    } else {
        let cv = select_rounds(&tr, &va, max_rounds, learner)?;
        let fitted = fit(learner, &tr, None, cv.chosen)?;
        (cv.to_csv(), fitted)
    };
    let dir = s.output_dir()?;
    write_file(&dir.join("cv_report.csv"), &report)?;
    write_fitted(&dir, &fitted, [("train", &tr), ("valid", &va), ("test", &te)])?;
    s.write_manifest(&dir)?;
    Ok(dir)
}

/// Reads the named error columns of a `dataset,...` table.
pub fn read_error_columns(text: &str, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidData(format!(
                "no column {name:?}; columns are {}",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (ia, ib) = (find(a)?, find(b)?);
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Malformed {
            line,
            message: e.to_string(),
        })?;
        for (idx, out) in [(ia, &mut xa), (ib, &mut xb)] {
            let field = record.get(idx).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| Error::Malformed {
                line,
                message: format!("non-numeric error {field:?}"),
            })?;
            out.push(v);
        }
    }
    Ok((xa, xb))
}

fn run_compare(a: CompareArgs) -> CliResult<PathBuf> {
    const KEYS: &[&str] = &["table", "a", "b"];
    let mut s = Settings::new("compare", KEYS, &a.common)?;
    s.flag_path("table", &a.table);
    s.flag("a", a.a.as_ref());
    s.flag("b", a.b.as_ref());
    let table = s.get_or("table", "builtin".to_string())?;
    let name_a: String = s.require("a")?;
    let name_b: String = s.require("b")?;
    let text = if table == "builtin" {
        s.record("table", "builtin");
        BENCHMARK_TABLE.to_string()
    } else {
        let path = absolute(Path::new(&table));
        s.record("table", path.display());
        fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?
    };
    s.record("a", &name_a);
    s.record("b", &name_b);

    let (xa, xb) = read_error_columns(&text, &name_a, &name_b)?;
    let res = wilcoxon_z(&xa, &xb)?;
    let dir = s.output_dir()?;
    let csv = format!("n_effective,W,z\n{},{},{}\n", res.n_effective, res.w, res.z);
    write_file(&dir.join("wilcoxon.csv"), &csv)?;
    s.write_manifest(&dir)?;
    println!("{name_a} vs {name_b}: n={} W={} z={:.4}", res.n_effective, res.w, res.z);
    Ok(dir)
}

fn run_repro(a: ReproArgs) -> CliResult<PathBuf> {
    const KEYS: &[&str] = &[
        "seed", "n_points", "spread", "label_noise", "train_fraction", "grid", "epsilon", "nmax",
    ];
    let mut s = Settings::new("repro", KEYS, &a.common)?;
    s.flag("seed", a.seed);
    s.flag("n_points", a.n_points);
    s.flag("spread", a.spread);
    s.flag("label_noise", a.label_noise);
    s.flag("train_fraction", a.train_fraction);
    s.flag("grid", a.grid.as_ref());
    s.flag("epsilon", a.epsilon);
    s.flag("nmax", a.nmax);

    let defaults = ToyConfig::standard(1);
    let toy = ToyConfig {
        n_points: s.get_or("n_points", defaults.n_points)?,
        spread: s.get_or("spread", defaults.spread)?,
        label_noise: s.get_or("label_noise", defaults.label_noise)?,
        seed: s.get_or("seed", defaults.seed)?,
    };
    let train_fraction: f64 = s.get_or("train_fraction", 0.6)?;
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(usage("--train-fraction must lie in (0, 1)"));
    }
    let grid = parse_grid(&s.get_or("grid", "default".to_string())?)?;
    s.record("seed", toy.seed);
    s.record("n_points", toy.n_points);
    s.record("spread", toy.spread);
    s.record("label_noise", toy.label_noise);
    s.record("train_fraction", train_fraction);
    s.record("grid", grid_text(&grid));
    let template = resolve_mcboost(&mut s, 0.5)?;

    let data = toy_dataset(&toy)?;
    let (tr, te) = train_test_split(&data, train_fraction, toy.seed)?;
    let rows = sweep(&tr, &te, &grid, &template)?;

    let dir = s.output_dir()?;
    write_csv(&data, dir.join("toy_data.csv"))?;
    let mut out =
        String::from("E,train_error,test_error,iterations,margin_mean,margin_variance\n");
    for row in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.target,
            row.train_error,
            row.test_error,
            row.iterations,
            row.report.stats.mean,
            row.report.stats.variance
        ));
        let name = format!("margin_cdf_E{}.csv", row.target);
        write_cdf_csv(&dir.join(name), &row.report.cdf)?;
    }
    write_file(&dir.join("sweep.csv"), &out)?;
    s.write_manifest(&dir)?;
    Ok(dir)
}

/// One point of an E sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub target: f64,
    pub train_error: f64,
    pub test_error: f64,
    pub iterations: usize,
    /// Training-set margins of the fitted model.
    pub report: MarginReport,
}

/// Trains one MCBoost model per grid value (in parallel) and collects the
/// per-E summaries in grid order.
pub fn sweep(
    train_set: &Dataset,
    test_set: &Dataset,
    grid: &EGrid,
    template: &TrainConfig,
) -> Result<Vec<SweepRow>, Error> {
    grid.values()
        .par_iter()
        .map(|&e| {
            let result = train(train_set, &template.with_target(e))?;
            Ok(SweepRow {
                target: e,
                train_error: result.ensemble.error_rate(train_set)?,
                test_error: result.ensemble.error_rate(test_set)?,
                iterations: result.iterations,
                report: MarginReport::new(
                    crate::margins::normalized_margins(&result.ensemble, train_set)?,
                    &default_grid(),
                )?,
            })
        })
        .collect()
}
