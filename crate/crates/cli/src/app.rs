//! Command definitions and their implementations.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cann::datagen::generate_fixture;
use cann::discovery::{prune, sweep, SweepOptions, SweepResult};
use cann::kinematics::StretchPair;
use cann::stress::{stress, stress_batch};
use cann::training::fit_with;
use cann::{Dataset, Execution, TrainConfig, TrainState};
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::dataset::{self, Layout};
use crate::error::{CliError, CliResult};
use crate::format::{file_stem, num};
use crate::model_file::ModelFile;

#[derive(Debug, Parser)]
#[command(name = "cann", version, about = "Discover sparse hyperelastic models from biaxial data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train once and write the pruned model, a report and per-curve CSVs.
    Fit(RunArgs),
    /// Train once per penalty and select a model.
    Sweep(RunArgs),
    /// Evaluate a saved model.
    Predict(PredictArgs),
    /// Write a synthetic dataset from the [generate] block of a config.
    Generate(GenerateArgs),
    /// Convert strain/second-Piola rows to stretch/first-Piola rows.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Penalty value(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// model.txt written by fit or sweep.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset whose stretches are evaluated.
    #[arg(long, conflicts_with = "stretch", required_unless_present = "stretch")]
    pub data: Option<PathBuf>,
    /// Stretch pair `lambda1,lambda2`; repeatable.
    #[arg(long, num_args = 1, value_parser = parse_stretch)]
    pub stretch: Vec<(f64, f64)>,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Convert stretch/first-Piola rows back to strain/second-Piola.
    #[arg(long)]
    pub inverse: bool,
    #[arg(long)]
    pub quiet: bool,
}

fn parse_stretch(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lambda1,lambda2")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("lambda1: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("lambda2: {e}"))?;
    Ok((a, b))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Convert(a) => cmd_convert(&a),
    }
}

/// Files produced by a command, written only once everything succeeded.
#[derive(Debug, Default)]
struct Artifacts(Vec<(PathBuf, Vec<u8>)>);

impl Artifacts {
    fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.0.push((path.into(), bytes.into()));
    }

    fn extend_under(&mut self, dir: &Path, other: Artifacts) {
        for (p, b) in other.0 {
            self.0.push((dir.join(p), b));
        }
    }

    fn write(&self, root: &Path) -> CliResult<()> {
        for (rel, bytes) in &self.0 {
            let path = root.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| CliError::write(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| CliError::write(&path, e))?;
        }
        Ok(())
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::write(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}"))),
    }
}

fn check_seed(seed: Option<u64>) -> CliResult<Option<u64>> {
    match seed {
        Some(s) if s > i64::MAX as u64 => Err(CliError::Input(format!("seed {s} exceeds {}", i64::MAX))),
        s => Ok(s),
    }
}

fn train_config(args: &RunArgs, config: &RunConfig) -> CliResult<TrainConfig> {
    let mut train = config.train.clone();
    if let Some(seed) = check_seed(args.seed)? {
        train.seed = seed;
    }
    Ok(train)
}

fn report_text(file: &ModelFile, state: &TrainState) -> String {
    let m = &file.model;
    let mut s = String::new();
    let _ = writeln!(s, "discovered model (alpha = {})", m.alpha);
    let _ = writeln!(s);
    let _ = writeln!(s, "{}", m.render());
    let _ = writeln!(s);
    let _ = writeln!(s, "active terms: {} of 16 {:?}", m.terms.len(), m.indices());
    if m.terms.is_empty() {
        let _ = writeln!(s, "warning: every term was pruned");
    }
    let _ = writeln!(
        s,
        "training: restart {} of {} kept ({} diverged), {} epochs, loss {:.6e}, data loss {:.6e}",
        state.restart, file.train.restarts, state.diverged_restarts, state.epoch, state.loss, state.data_loss
    );
    let _ = writeln!(s, "seed: {}", file.train.seed);
    let _ = writeln!(s, "prune threshold: {}", file.threshold);
    let _ = writeln!(s);
    let _ = writeln!(s, "goodness of fit (R2)");
    let r2 = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.6}"));
    let mut labels: Vec<&str> = Vec::new();
    for c in &m.fit.per_curve {
        if !labels.contains(&c.label.as_str()) {
            labels.push(&c.label);
        }
    }
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(8);
    let _ = writeln!(s, "  {:width$}  {:>10}  {:>10}", "protocol", "P1", "P2");
    for l in labels {
        let get = |c| m.fit.curve(l, c).and_then(|f| f.r2);
        let _ = writeln!(
            s,
            "  {l:width$}  {:>10}  {:>10}",
            r2(get(cann::discovery::Component::P1)),
            r2(get(cann::discovery::Component::P2))
        );
    }
    let _ = writeln!(s, "  overall: {}", r2(m.fit.overall));
    s
}

fn curve_artifacts(data: &Dataset, file: &ModelFile) -> CliResult<Artifacts> {
    let w = file.model.weights();
    let mut out = Artifacts::default();
    let mut used: Vec<String> = Vec::new();
    for curve in &data.curves {
        let mut stem = file_stem(&curve.label);
        if used.contains(&stem) {
            stem = format!("{stem}_{}", used.len() + 1);
        }
        used.push(stem.clone());
        let mut p1 = String::from("stretch,measured,predicted\n");
        let mut p2 = p1.clone();
        for p in &curve.points {
            let s = stress(p.stretch, &w)?;
            let _ = writeln!(p1, "{},{},{}", num(p.lambda1()), num(p.p1), num(s.p1));
            let _ = writeln!(p2, "{},{},{}", num(p.lambda2()), num(p.p2), num(s.p2));
        }
        out.add(format!("curves/{stem}_p1.csv"), p1);
        out.add(format!("curves/{stem}_p2.csv"), p2);
    }
    Ok(out)
}

fn fit_artifacts(data: &Dataset, file: &ModelFile, state: &TrainState) -> CliResult<Artifacts> {
    let mut out = Artifacts::default();
    out.add("model.txt", file.to_text());
    out.add("report.txt", report_text(file, state));
    out.extend_under(Path::new(""), curve_artifacts(data, file)?);
    Ok(out)
}

fn cmd_fit(args: &RunArgs) -> CliResult<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let mut train = train_config(args, &config)?;
    match args.alpha.as_slice() {
        [] => {}
        [a] => train.alpha = *a,
        _ => return Err(CliError::Input("fit takes a single --alpha; use sweep for several".into())),
    }
    train.validate()?;
    let data = dataset::load(&args.data)?;
    let state = fit_with(&data.points(), &train, Execution::default())?;
    let model = prune(&state.weights, &data, config.prune.threshold, train.alpha)?;
    let file = ModelFile {
        model,
        threshold: config.prune.threshold,
        train,
    };
    let artifacts = fit_artifacts(&data, &file, &state)?;
    artifacts.write(&args.out)?;
    if !args.quiet {
        print!("{}", report_text(&file, &state));
    }
    Ok(())
}

fn summary_csv(result: &SweepResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["alpha", "n_active_terms", "r2_overall", "final_loss", "status", "selected"]);
    for (i, run) in result.runs.iter().enumerate() {
        let selected = if result.selected == Some(i) { "true" } else { "false" };
        let row = match &run.outcome {
            Ok((state, m)) => [
                num(run.alpha),
                m.terms.len().to_string(),
                m.fit.overall.map(num).unwrap_or_default(),
                num(state.loss),
                "ok".to_string(),
                selected.to_string(),
            ],
            Err(e) => [
                num(run.alpha),
                String::new(),
                String::new(),
                String::new(),
                format!("failed: {e}"),
                selected.to_string(),
            ],
        };
        let _ = w.write_record(row);
    }
    w.into_inner().expect("writing to memory")
}

fn cmd_sweep(args: &RunArgs) -> CliResult<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let train = train_config(args, &config)?;
    let alphas = if args.alpha.is_empty() { config.sweep.alphas.clone() } else { args.alpha.clone() };
    let data = dataset::load(&args.data)?;
    let options = SweepOptions {
        threshold: config.prune.threshold,
        margin: config.sweep.margin,
        selected_alpha: config.sweep.select_alpha,
        exec: Execution::default(),
    };
    let result = sweep(&data, &train, &alphas, &options)?;

    if let Some(e) = result
        .runs
        .iter()
        .all(|r| r.outcome.is_err())
        .then(|| result.runs[0].outcome.as_ref().err())
        .flatten()
    {
        return Err(e.clone().into());
    }

    let mut artifacts = Artifacts::default();
    let mut files = Vec::new();
    for run in &result.runs {
        if let Ok((state, model)) = &run.outcome {
            let file = ModelFile {
                model: model.clone(),
                threshold: config.prune.threshold,
                train: TrainConfig { alpha: run.alpha, ..train.clone() },
            };
            let dir = PathBuf::from(format!("alpha_{}", run.alpha));
            artifacts.extend_under(&dir, fit_artifacts(&data, &file, state)?);
            files.push(Some((file, state)));
        } else {
            files.push(None);
        }
    }
    artifacts.add("sweep_summary.csv", summary_csv(&result));
    let selected = result.selected.and_then(|i| files[i].as_ref());
    if let Some((file, state)) = selected {
        artifacts.extend_under(Path::new(""), fit_artifacts(&data, file, state)?);
    }
    artifacts.write(&args.out)?;

    if !args.quiet {
        for run in &result.runs {
            match &run.outcome {
                Ok((_, m)) => println!(
                    "alpha {:<8} terms {:>2}  R2 {}",
                    run.alpha,
                    m.terms.len(),
                    m.fit.overall.map_or("undefined".into(), |r| format!("{r:.6}"))
                ),
                Err(e) => println!("alpha {:<8} failed: {e}", run.alpha),
            }
        }
        match selected {
            Some((file, state)) => print!("\nselected:\n{}", report_text(file, state)),
            None => println!("\nno run qualified for selection"),
        }
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.model).map_err(|e| CliError::read(&args.model, e))?;
    let file = ModelFile::parse(&text, &args.model.display().to_string())?;
    let w = file.model.weights();
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output(e.to_string());
    match &args.data {
        Some(path) => {
            let data = dataset::load(path)?;
            let rows: Vec<(&str, StretchPair)> = data.rows().map(|(l, p)| (l, p.stretch)).collect();
            let stretches: Vec<StretchPair> = rows.iter().map(|r| r.1).collect();
            let pred = stress_batch(&stretches, &w, Execution::default())?;
            out.write_record(dataset::STRETCH_HEADER).map_err(csv_err)?;
            for ((label, s), p) in rows.iter().zip(pred) {
                out.write_record([label.to_string(), num(s.lambda1()), num(s.lambda2()), num(p.p1), num(p.p2)])
                    .map_err(csv_err)?;
            }
        }
        None => {
            let stretches = args
                .stretch
                .iter()
                .map(|&(a, b)| StretchPair::new(a, b))
                .collect::<Result<Vec<_>, _>>()?;
            let pred = stress_batch(&stretches, &w, Execution::default())?;
            out.write_record(["lambda1", "lambda2", "p1_kpa", "p2_kpa"]).map_err(csv_err)?;
            for (s, p) in stretches.iter().zip(pred) {
                out.write_record([num(s.lambda1()), num(s.lambda2()), num(p.p1), num(p.p2)])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = out.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    emit(args.out.as_deref(), &bytes)
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let mut config = RunConfig::load(Some(&args.config))?;
    if let Some(seed) = check_seed(args.seed)? {
        config.generate.seed = seed;
    }
    let w = config.generate.weights()?;
    let protocols = config.generate.protocols()?;
    let data = generate_fixture(&w, &protocols, Execution::default())?;
    emit(args.out.as_deref(), &dataset::to_csv(&data))?;
    if !args.quiet {
        eprintln!("generated {} points over {} protocols", data.len(), data.curves.len());
    }
    Ok(())
}

fn cmd_convert(args: &ConvertArgs) -> CliResult<()> {
    let source = args.data.display().to_string();
    let file = std::fs::File::open(&args.data).map_err(|e| CliError::read(&args.data, e))?;
    let table = dataset::read_table(file, &source)?;
    let (want, have) = if args.inverse { (Layout::Stretch, "stretch") } else { (Layout::Strain, "strain") };
    if table.layout != want {
        return Err(CliError::Input(format!("{source}: line 1: convert expects the {have} header")));
    }
    let rows = dataset::to_points(&table, &source)?;
    let bytes = if args.inverse { dataset::to_strain_csv(&rows) } else { dataset::to_stretch_csv(&rows) };
    emit(args.out.as_deref(), &bytes)?;
    if !args.quiet {
        eprintln!("converted {} rows", rows.len());
    }
    Ok(())
}
