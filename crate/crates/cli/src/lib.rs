//! `oodr`: generate robustness-augmented OOD benchmarks, score features and
//! report AUROC and generalizability.
//!
//! Every stage reads and writes files, so stages can run on different
//! machines. [`run`] is the whole command line and returns the exit code:
//! 0 on success, 1 on data errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use oodr_core::benchgen::{build_manifest, export, BenchManifest, Setup, SourceManifest};
use oodr_core::features::{l2_adapt, read_store, score_manifest, write_store, ScoreTable};
use oodr_core::metrics::{
    evaluate, scatter_pairs, Aggregation, EvalOptions, ScatterPair, TableRow,
};

/// Relative `--out` paths are resolved against this directory when set.
pub const OUT_ROOT_ENV: &str = "OODR_OUT_ROOT";

#[derive(Debug, Parser)]
#[command(
    name = "oodr",
    version,
    about = "Robustness-augmented OOD benchmark pipeline"
)]
struct Cli {
    /// Worker threads for parallel stages [default: available cores]
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one benchmark manifest per inlier class
    Gen(GenArgs),
    /// Render every manifest entry as a PNG
    Export(ExportArgs),
    /// L2-normalize a feature store
    Adapt(AdaptArgs),
    /// kNN-score manifest entries against the inlier train features
    Score(ScoreArgs),
    /// AUROC, GS and report tables from score CSVs
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("classes").required(true).args(["class", "all"])))]
struct GenArgs {
    /// Source dataset manifest (JSON)
    #[arg(long)]
    source: PathBuf,
    /// Inlier class
    #[arg(long)]
    class: Option<String>,
    /// One manifest per class
    #[arg(long)]
    all: bool,
    /// U, A or C, optionally filtered: `C:fog,jpeg`
    #[arg(long)]
    setup: Setup,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest's source root
    #[arg(long)]
    source_root: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AdaptArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Manifest file or directory of `*.json` manifests; repeatable
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
    /// Neighbours averaged per query
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Scores of the original test set (setup U)
    #[arg(long)]
    scores_s: PathBuf,
    /// Scores of the transformed test set
    #[arg(long)]
    scores_yprime: PathBuf,
    /// Same as --scores-s, from adapted features
    #[arg(long, requires = "scores_yprime_adapted")]
    scores_s_adapted: Option<PathBuf>,
    /// Same as --scores-yprime, from adapted features
    #[arg(long, requires = "scores_s_adapted")]
    scores_yprime_adapted: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write per-transform AUROC (breakdown.csv)
    #[arg(long)]
    per_transform: bool,
    /// Also write original/transformed score pairs (scatter.csv)
    #[arg(long)]
    scatter: bool,
    #[arg(long, default_value = "model")]
    model: String,
    /// Average per-severity AUROCs instead of pooling severities
    #[arg(long)]
    severity_mean: bool,
}

/// Which inlier classes `gen` builds manifests for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSelector {
    One(String),
    All,
}

/// Resolved settings of one pipeline invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub setup: Setup,
    pub classes: ClassSelector,
    pub master_seed: u64,
    pub k: usize,
    pub train_store: Option<PathBuf>,
    pub test_store: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: None,
            setup: Setup::U,
            classes: ClassSelector::All,
            master_seed: 0,
            k: 1,
            train_store: None,
            test_store: None,
            out_dir: PathBuf::from("."),
            workers: 1,
        }
    }
}

impl RunConfig {
    /// Referenced input paths must exist, `k >= 1` and `workers >= 1`.
    pub fn validate(&self) -> Result<(), UsageError> {
        if self.workers == 0 {
            return Err(UsageError("--workers must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(UsageError("InvalidK: --k must be at least 1".into()));
        }
        for path in [&self.source, &self.train_store, &self.test_store]
            .into_iter()
            .flatten()
        {
            if !path.exists() {
                return Err(UsageError(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

/// Bad invocation, as opposed to bad data; exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let workers = match cli.workers {
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if workers == 0 {
        return Err(UsageError("--workers must be at least 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting worker pool")?;
    pool.install(|| match cli.command {
        Command::Gen(a) => gen(a, workers),
        Command::Export(a) => export_cmd(a),
        Command::Adapt(a) => adapt(a),
        Command::Score(a) => score(a, workers),
        Command::Evaluate(a) => evaluate_cmd(a),
    })
}

fn out_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if p.is_relative() => Path::new(&root).join(p),
        _ => p.to_path_buf(),
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn gen(a: GenArgs, workers: usize) -> anyhow::Result<()> {
    let cfg = RunConfig {
        source: Some(a.source),
        setup: a.setup,
        classes: match a.class {
            Some(c) => ClassSelector::One(c),
            None => ClassSelector::All,
        },
        master_seed: a.seed,
        out_dir: out_path(&a.out),
        workers,
        ..Default::default()
    };
    cfg.validate()?;
    let source = cfg.source.as_deref().expect("gen sets a source");
    let mut src = SourceManifest::load(source)?;
    // absolute, so manifests stay usable from any working directory
    src.root = fs::canonicalize(&src.root)
        .with_context(|| format!("resolving source root {}", src.root))?
        .to_string_lossy()
        .into_owned();
    let classes = match &cfg.classes {
        ClassSelector::One(c) => vec![c.clone()],
        ClassSelector::All => src.classes.clone(),
    };
    create_dir(&cfg.out_dir)?;
    for class in &classes {
        if class.is_empty() || class.starts_with('.') || class.contains(['/', '\\']) {
            bail!("class `{class}` cannot be used as a file name");
        }
        let m = build_manifest(&src, class, &cfg.setup, cfg.master_seed)?;
        let path = cfg.out_dir.join(format!("{class}.json"));
        m.save(&path)?;
        info!(
            "{}: {} originals, {} transformed",
            path.display(),
            m.originals().count(),
            m.transformed().count()
        );
    }
    Ok(())
}

fn export_cmd(a: ExportArgs) -> anyhow::Result<()> {
    let m = BenchManifest::load(&a.manifest)?;
    let root = a
        .source_root
        .unwrap_or_else(|| PathBuf::from(&m.source_root));
    let out = out_path(&a.out);
    let n = export(&m, &root, &out)?;
    info!("wrote {n} images under {}", out.display());
    Ok(())
}

fn adapt(a: AdaptArgs) -> anyhow::Result<()> {
    let store = read_store(&a.input)?;
    let adapted = l2_adapt(&store)?;
    let out = out_path(&a.out);
    ensure_parent(&out)?;
    write_store(&adapted, &out)?;
    info!(
        "adapted {} rows of dim {} -> {}",
        adapted.rows(),
        adapted.dim(),
        out.display()
    );
    Ok(())
}

/// Files named on the command line, plus `*.json` files of named
/// directories in name order.
fn manifest_files(args: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in args {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()
                .with_context(|| format!("listing {}", p.display()))?;
            found.retain(|f| f.extension().is_some_and(|x| x == "json"));
            found.sort();
            if found.is_empty() {
                bail!("no manifests in {}", p.display());
            }
            files.extend(found);
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(UsageError(format!("{} does not exist", p.display())).into());
        }
    }
    Ok(files)
}

fn score(a: ScoreArgs, workers: usize) -> anyhow::Result<()> {
    let cfg = RunConfig {
        k: a.k,
        train_store: Some(a.train),
        test_store: Some(a.test),
        out_dir: out_path(&a.out),
        workers,
        ..Default::default()
    };
    cfg.validate()?;
    let files = manifest_files(&a.manifest)?;
    let train = read_store(cfg.train_store.as_deref().expect("score sets train"))?;
    let test = read_store(cfg.test_store.as_deref().expect("score sets test"))?;
    let mut table = ScoreTable::default();
    for f in &files {
        let m = BenchManifest::load(f)?;
        let scores = score_manifest(&train, &test, &m, cfg.k)
            .with_context(|| format!("scoring {}", f.display()))?;
        table.extend(scores)?;
    }
    ensure_parent(&cfg.out_dir)?;
    table.write_csv(&cfg.out_dir)?;
    info!(
        "{} scores from {} manifests -> {}",
        table.rows.len(),
        files.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> anyhow::Result<()> {
    let opts = EvalOptions {
        model_tag: a.model,
        aggregation: if a.severity_mean {
            Aggregation::SeverityMean
        } else {
            Aggregation::Pooled
        },
    };
    let load = |p: &Path| ScoreTable::read_csv(p);
    let report = evaluate(&load(&a.scores_s)?, &load(&a.scores_yprime)?, &opts)?;
    let adapted = match (&a.scores_s_adapted, &a.scores_yprime_adapted) {
        (Some(s), Some(y)) => Some(evaluate(&load(s)?, &load(y)?, &opts)?),
        _ => None,
    };
    let out = out_path(&a.out);
    create_dir(&out)?;
    write(&out.join("report.json"), &report.to_json())?;
    if let Some(r) = &adapted {
        write(&out.join("report_adapted.json"), &r.to_json())?;
    }
    let rows = TableRow::pair(&report, adapted.as_ref());
    write(
        &out.join("table.csv"),
        &TableRow::to_csv(&report.classes, &rows),
    )?;
    let text = TableRow::to_text(&report.classes, &rows);
    write(&out.join("table.txt"), &text)?;
    print!("{text}");
    if a.per_transform {
        write(&out.join("breakdown.csv"), &report.breakdown_csv())?;
        if let Some(r) = &adapted {
            write(&out.join("breakdown_adapted.csv"), &r.breakdown_csv())?;
        }
    }
    if a.scatter {
        let y = load(&a.scores_yprime)?;
        write(
            &out.join("scatter.csv"),
            &ScatterPair::to_csv(&scatter_pairs(&y)),
        )?;
        if let Some(p) = &a.scores_yprime_adapted {
            write(
                &out.join("scatter_adapted.csv"),
                &ScatterPair::to_csv(&scatter_pairs(&load(p)?)),
            )?;
        }
    }
    info!("GS = {:.2} -> {}", report.gs * 100.0, out.display());
    Ok(())
}
