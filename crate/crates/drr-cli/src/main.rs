//! `drr`: synthesize datasets, train and query estimators, and run the
//! benchmark pipeline. Exit codes: 0 success, 2 usage error, 3 data error,
//! 4 numeric error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use drr::bench::{self, report_to_csv, run_bench};
use drr::config::{ConfigBuilder, ExperimentConfig};
use drr::dataset::{build_dataset, read_dataset, write_dataset, Split, SynthSpec};
use drr::error::{Error, Result};
use drr::model_file::{load_model, save_model};

#[derive(Parser)]
#[command(name = "drr", version, about = "Distribution-to-real regression benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/test dataset files from a config
    Synth(SynthArgs),
    /// Fit an estimator on a dataset file and save the model
    Train(TrainArgs),
    /// Predict responses for every sample set in an input file
    Predict(PredictArgs),
    /// Run the full synth/train/evaluate/time pipeline and emit a report
    Bench(BenchArgs),
}

#[derive(Args, Clone, Default)]
struct DatasetOverrides {
    /// Number of training sets (N)
    #[arg(long = "N")]
    train_size: Option<usize>,
    /// Points per sample set (n); "auto" applies the ceil(c N^(3/5)) rule
    #[arg(long = "n")]
    points_per_set: Option<String>,
    /// Number of test sets
    #[arg(long)]
    test_size: Option<usize>,
}

impl DatasetOverrides {
    fn apply(&self, builder: &mut ConfigBuilder) -> Result<()> {
        if let Some(n) = self.train_size {
            builder.set("train_size", &n.to_string())?;
        }
        if let Some(p) = &self.points_per_set {
            builder.set("points_per_set", p)?;
        }
        if let Some(t) = self.test_size {
            builder.set("test_size", &t.to_string())?;
        }
        Ok(())
    }
}

#[derive(Args, Clone, Default)]
struct ConfigOverrides {
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Truncation-level grid (comma separated), or "auto"
    #[arg(long = "grid-t")]
    grid_t: Option<String>,
    /// Truncation-rule constants used when grid-t is auto
    #[arg(long = "grid-c")]
    grid_c: Option<String>,
    /// Feature-count grid (comma separated), or "auto"
    #[arg(long = "grid-d")]
    grid_d: Option<String>,
    /// Feature-rule constants used when grid-d is auto
    #[arg(long = "grid-d-c")]
    grid_d_c: Option<String>,
    /// Feature bandwidth grid
    #[arg(long = "grid-sigma")]
    grid_sigma: Option<String>,
    /// Ridge penalty grid
    #[arg(long = "grid-lambda")]
    grid_lambda: Option<String>,
    /// Smoother bandwidth grid
    #[arg(long = "grid-sigma-kk")]
    grid_sigma_kk: Option<String>,
    /// Smoothing kernel for the kernel-kernel baseline
    #[arg(long, value_parser = ["rbf", "bounded"])]
    kernel: Option<String>,
    /// Report raw (untruncated) double-basis predictions
    #[arg(long = "no-truncate")]
    no_truncate: bool,
}

impl ConfigOverrides {
    fn apply(&self, builder: &mut ConfigBuilder) -> Result<()> {
        if let Some(seed) = self.seed {
            builder.set("seed", &seed.to_string())?;
        }
        for (key, value) in [
            ("grid_t", &self.grid_t),
            ("grid_c", &self.grid_c),
            ("grid_d", &self.grid_d),
            ("grid_d_c", &self.grid_d_c),
            ("grid_sigma", &self.grid_sigma),
            ("grid_lambda", &self.grid_lambda),
            ("grid_sigma_kk", &self.grid_sigma_kk),
        ] {
            if let Some(v) = value {
                builder.set(key, v)?;
            }
        }
        if let Some(k) = &self.kernel {
            builder.set("kk_kernel", k)?;
        }
        if self.no_truncate {
            builder.set("truncate_predictions", "false")?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's out_dir or ".")
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetOverrides,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct TrainArgs {
    /// Training dataset file
    #[arg(long)]
    data: PathBuf,
    /// Estimator to fit
    #[arg(long, value_parser = ["bb", "kk"])]
    method: String,
    /// Model output path
    #[arg(long, default_value = "model.drrm")]
    out: PathBuf,
    /// Per-coordinate basis smoothness (comma separated, broadcast from one)
    #[arg(long = "basis-gamma")]
    basis_gamma: Option<String>,
    /// Per-coordinate basis scale
    #[arg(long = "basis-nu")]
    basis_nu: Option<String>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `drr train`
    #[arg(long)]
    model: PathBuf,
    /// Input dataset file; responses, if present, are ignored
    #[arg(long)]
    input: PathBuf,
    /// Print raw (untruncated) scores
    #[arg(long = "no-truncate")]
    no_truncate: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV report and manifest
    #[arg(long)]
    out: Option<PathBuf>,
    /// Methods to run (comma separated or repeated)
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<String>,
    #[command(flatten)]
    dataset: DatasetOverrides,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn load_config(
    path: &Path,
    overrides: &ConfigOverrides,
    dataset: Option<&DatasetOverrides>,
    methods: &[String],
) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut builder = config_builder_from_text(&text, path)?;
    if let Some(d) = dataset {
        d.apply(&mut builder)?;
    }
    if !methods.is_empty() {
        builder.set("methods", &methods.join(","))?;
    }
    overrides.apply(&mut builder)?;
    builder.finish()
}

/// Same syntax rules as the library parser, but the builder stays open so
/// CLI overrides can land on top before validation.
fn config_builder_from_text(text: &str, path: &Path) -> Result<ConfigBuilder> {
    let mut builder = ConfigBuilder::new();
    let mut seen = std::collections::BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "{}: line {}: expected \"key = value\"",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse(format!(
                "{}: line {}: duplicate key {key:?}",
                path.display(),
                lineno + 1
            )));
        }
        builder
            .set(key, value)
            .map_err(|e| Error::Parse(format!("{}: line {}: {e}", path.display(), lineno + 1)))?;
    }
    Ok(builder)
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let path = dir.join("manifest.txt");
    let body = format!("# digest: {}\n{}", cfg.digest(), cfg.canonical());
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = load_config(&args.config, &args.overrides, Some(&args.dataset), &[])?;
    let dir = resolve_out_dir(args.out, &cfg);
    ensure_dir(&dir)?;
    let n_points = cfg.resolved_points(cfg.train_size);
    let make_spec = |num_sets: usize| SynthSpec {
        kind: cfg.experiment,
        seed: cfg.seed,
        num_sets,
        points_per_set: n_points,
        dirichlet_dim: cfg.dirichlet_dim,
        noise_std: cfg.noise_std,
    };
    let train = build_dataset(&make_spec(cfg.train_size), Split::Train)?;
    let test = build_dataset(&make_spec(cfg.test_size), Split::Test)?;
    let train_path = dir.join("train.jsonl");
    let test_path = dir.join("test.jsonl");
    write_dataset(&train_path, &train)?;
    write_dataset(&test_path, &test)?;
    let manifest = write_manifest(&dir, &cfg)?;
    println!("wrote {}", train_path.display());
    println!("wrote {}", test_path.display());
    println!("wrote {} (digest {})", manifest.display(), cfg.digest());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let dataset = read_dataset(&args.data)?;
    let mut builder = ConfigBuilder::new();
    builder.set("experiment", dataset.meta.kind.name())?;
    builder.set("train_size", &dataset.meta.num_sets.to_string())?;
    builder.set("points_per_set", &dataset.meta.points_per_set.to_string())?;
    if dataset.meta.kind == drr::dataset::ExperimentKind::Dirichlet {
        builder.set("dirichlet_dim", &dataset.meta.response_dim.to_string())?;
    }
    if let Some(g) = &args.basis_gamma {
        builder.set("basis_gamma", g)?;
    }
    if let Some(nu) = &args.basis_nu {
        builder.set("basis_nu", nu)?;
    }
    args.overrides.apply(&mut builder)?;
    let cfg = builder.finish()?;
    if cfg.input_dimension() != dataset.meta.dimension {
        return Err(Error::Data(format!(
            "dataset dimension {} does not match expected dimension {}",
            dataset.meta.dimension,
            cfg.input_dimension()
        )));
    }
    let basis = bench::basis_from_config(&cfg)?;
    let fitted = match args.method.as_str() {
        "bb" => bench::fit_bb(&cfg, &basis, &dataset)?,
        "kk" => bench::fit_kk(&cfg, &basis, &dataset)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "method {other:?} is not trainable (expected bb or kk)"
            )))
        }
    };
    save_model(&args.out, &fitted.model)?;
    println!(
        "trained {} on {} sets ({} points each) in {:.3}s",
        args.method, dataset.meta.num_sets, dataset.meta.points_per_set, fitted.train_seconds
    );
    println!("hyperparameters: {}", fitted.selection_note);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let input = read_dataset(&args.input)?;
    if input.meta.dimension != model.input_dimension() {
        return Err(Error::Data(format!(
            "input dimension {} does not match expected dimension {}",
            input.meta.dimension,
            model.input_dimension()
        )));
    }
    let mut out = String::new();
    for inst in &input.instances {
        let values = model.predict_all(&inst.samples, args.no_truncate)?;
        let line = values
            .iter()
            .map(|v| format!("{v:.12}"))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = load_config(&args.config, &args.overrides, Some(&args.dataset), &args.methods)?;
    let dir = resolve_out_dir(args.out, &cfg);
    ensure_dir(&dir)?;
    let report = run_bench(&cfg)?;
    let csv_path = dir.join("bench_report.csv");
    fs::write(&csv_path, report_to_csv(&report)).map_err(|e| Error::io(&csv_path, e))?;
    write_manifest(&dir, &cfg)?;
    print!("{}", bench::render_table(&report));
    println!("wrote {}", csv_path.display());
    Ok(())
}
