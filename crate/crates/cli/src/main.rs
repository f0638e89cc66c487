mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tabexec::correction::CorrectionPolicy;
use tabexec::forge::{
    build_balanced_ood, build_pantabfact, build_panwiki, derive_wikifact, panwiki_policy,
    read_jsonl, write_atomic, BuildOutput, DatasetEntry, Manifest, Mode, OodOptions,
};
use tabexec::gateway::{ChatModel, Gateway, HttpChatModel, Recorder, Replayer};
use tabexec::table::{
    load_table_with, render_for_prompt, CorpusProfile, RenderLimits, TableFormat,
};
use tabexec::verifier::{
    answer_question, evaluate, run_ablation, verify_claim, FailureScoring, Report,
};
use tabexec::{coerce_truth, execute_answer, Table};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "tabexec",
    version,
    about = "Verify table claims and answer table questions by executing generated queries"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record every model reply to this JSONL file.
    #[arg(long, global = true, conflicts_with = "transcript_replay")]
    transcript_record: Option<PathBuf>,
    /// Serve model replies from a recorded transcript instead of the network.
    #[arg(long, global = true)]
    transcript_replay: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Tsv,
    Json,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> TableFormat {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Tsv => TableFormat::WtqTsv,
            Format::Json => TableFormat::TabfactJson,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dataset {
    Pantabfact,
    Panwiki,
    Wikifact,
    BalancedOod,
}

impl Dataset {
    fn name(self) -> &'static str {
        match self {
            Dataset::Pantabfact => "pantabfact",
            Dataset::Panwiki => "panwiki",
            Dataset::Wikifact => "wikifact",
            Dataset::BalancedOod => "balanced-ood",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fact,
    Qa,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Fact => Mode::Fact,
            ModeArg::Qa => Mode::Qa,
        }
    }
}

#[derive(clap::Args)]
struct TableArgs {
    /// Table file (.csv, .tsv or .json).
    table: PathBuf,
    /// Overrides the format implied by the extension.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Field delimiter for CSV input.
    #[arg(long)]
    delimiter: Option<char>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one expression against a table.
    Exec {
        #[command(flatten)]
        table: TableArgs,
        expression: String,
        /// Coerce the result to True/False.
        #[arg(long)]
        verdict: bool,
    },
    /// Load a table and show its inferred schema and prompt rendering.
    Ingest {
        #[command(flatten)]
        table: TableArgs,
    },
    /// Build a dataset from the configured corpora.
    Build {
        #[arg(value_enum)]
        dataset: Dataset,
        /// WikiFact JSONL to sample from (balanced-ood); derived from the
        /// QA corpus when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of claim pairs (balanced-ood).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Verify one statement against a table.
    Verify {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        statement: String,
    },
    /// Answer one question about a table.
    Answer {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        question: String,
    },
    /// Score a dataset file and write a report.
    Evaluate {
        dataset: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, conflicts_with = "ablate")]
        no_corrections: bool,
        /// Run with and without corrections and report both.
        #[arg(long)]
        ablate: bool,
        /// Leave failed entries out of the accuracy instead of scoring them 0.
        #[arg(long)]
        exclude_failures: bool,
    },
}

/// An expression that failed to evaluate; exits with status 2.
#[derive(Debug)]
struct EvalFailure;

impl std::fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("evaluation failed")
    }
}

impl std::error::Error for EvalFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<EvalFailure>() => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Exec {
            table,
            expression,
            verdict,
        } => cmd_exec(table, expression, *verdict),
        Command::Ingest { table } => cmd_ingest(table),
        _ => {
            let config = settle_config(&cli)?;
            match &cli.command {
                Command::Build { dataset, input, n } => {
                    cmd_build(&cli, &config, *dataset, input.as_deref(), *n)
                }
                Command::Verify { table, statement } => cmd_verify(&cli, &config, table, statement),
                Command::Answer { table, question } => cmd_answer(&cli, &config, table, question),
                Command::Evaluate {
                    dataset,
                    mode,
                    no_corrections,
                    ablate,
                    exclude_failures,
                } => {
                    let scoring = if *exclude_failures {
                        FailureScoring::Excluded
                    } else {
                        FailureScoring::Incorrect
                    };
                    cmd_evaluate(
                        &cli,
                        &config,
                        dataset,
                        (*mode).into(),
                        *no_corrections,
                        *ablate,
                        scoring,
                    )
                }
                Command::Exec { .. } | Command::Ingest { .. } => unreachable!(),
            }
        }
    }
}

/// Loads the config file, applies flag overrides, and validates.
fn settle_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(dir) = cli.config.as_deref().and_then(Path::parent) {
        config.rebase(dir);
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if let Some(o) = &cli.out {
        config.out_dir = o.clone();
    }
    config.model = config.model.with_env();
    config.validate()?;
    Ok(config)
}

fn load_table_arg(args: &TableArgs) -> Result<Table> {
    let format = match args.format {
        Some(f) => f.into(),
        None => TableFormat::from_extension(&args.table).with_context(|| {
            format!(
                "cannot tell the format of {}; pass --format",
                args.table.display()
            )
        })?,
    };
    let bytes =
        std::fs::read(&args.table).with_context(|| format!("reading {}", args.table.display()))?;
    let profile = CorpusProfile {
        delimiter: args.delimiter,
        ..CorpusProfile::default()
    };
    let name = args
        .table
        .file_stem()
        .map_or_else(|| "table".to_string(), |s| s.to_string_lossy().into_owned());
    load_table_with(&bytes, format, &profile, &name)
        .with_context(|| format!("loading {}", args.table.display()))
}

fn cmd_exec(args: &TableArgs, expression: &str, verdict: bool) -> Result<()> {
    let table = load_table_arg(args)?;
    let result = execute_answer(expression, &table).and_then(|v| {
        if verdict {
            coerce_truth(&v).map(|b| {
                if b {
                    "True".to_string()
                } else {
                    "False".to_string()
                }
            })
        } else {
            Ok(v.render())
        }
    });
    match result {
        Ok(text) => {
            println!("{text}");
            Ok(())
        }
        Err(e) => {
            println!("{e}");
            Err(EvalFailure.into())
        }
    }
}

fn cmd_ingest(args: &TableArgs) -> Result<()> {
    let table = load_table_arg(args)?;
    println!("{} rows x {} columns", table.row_count(), table.col_count());
    for c in table.columns() {
        println!("  {}: {}", c.name, c.ctype);
    }
    println!();
    println!("{}", render_for_prompt(&table, RenderLimits::default()));
    Ok(())
}

fn gateway(cli: &Cli, config: &RunConfig) -> Result<Gateway> {
    let model: Box<dyn ChatModel> = match &cli.transcript_replay {
        Some(p) => Box::new(
            Replayer::open(p).with_context(|| format!("opening transcript {}", p.display()))?,
        ),
        None => {
            let http = HttpChatModel::new(&config.model)?;
            match &cli.transcript_record {
                Some(p) => Box::new(
                    Recorder::new(http, p)
                        .with_context(|| format!("opening transcript {}", p.display()))?,
                ),
                None => Box::new(http),
            }
        }
    };
    let mut gw = Gateway::new(model, config.model.clone())?;
    if let Some(p) = &config.audit_log {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        gw = gw
            .with_audit_log(p)
            .with_context(|| format!("opening audit log {}", p.display()))?;
    }
    Ok(gw)
}

/// A gateway when one is configured, `None` otherwise.
fn optional_gateway(cli: &Cli, config: &RunConfig) -> Result<Option<Gateway>> {
    if cli.transcript_replay.is_none() && config.model.base_url.is_empty() {
        return Ok(None);
    }
    gateway(cli, config).map(Some)
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Writes all files only after every one has been serialized.
fn write_all(dir: &Path, files: Vec<(String, Vec<u8>)>) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, bytes) in files {
        write_atomic(&dir.join(&name), &bytes)?;
    }
    Ok(())
}

fn manifest(
    dataset: Dataset,
    config: &RunConfig,
    policy: CorrectionPolicy,
    gw: Option<&Gateway>,
    out: &BuildOutput,
    source: usize,
) -> Manifest {
    Manifest {
        dataset: dataset.name().to_string(),
        seed: config.seed,
        policy,
        model_config_hash: gw.map(|g| g.config().fingerprint()),
        source_count: source,
        kept_count: out.kept.len(),
        dropped: out.drop_counts(),
        stats: out.stats.clone(),
    }
}

fn cmd_build(
    cli: &Cli,
    config: &RunConfig,
    dataset: Dataset,
    input: Option<&Path>,
    n: Option<usize>,
) -> Result<()> {
    let name = dataset.name();
    let (out, source, policy, gw) = match dataset {
        Dataset::Pantabfact => {
            let (records, catalog) = config.tabfact()?;
            let gw = gateway(cli, config)?;
            let out = build_pantabfact(&records, &catalog, &gw, &config.policy, config.workers);
            (out, records.len(), config.policy, Some(gw))
        }
        Dataset::Panwiki => {
            let (records, catalog) = config.wtq()?;
            let gw = gateway(cli, config)?;
            let policy = CorrectionPolicy {
                enabled: panwiki_policy().enabled,
                ..config.policy
            };
            let out = build_panwiki(
                &records,
                &catalog,
                &gw,
                &policy,
                config.workers,
                config.build.panwiki_target,
            );
            (out, records.len(), policy, Some(gw))
        }
        Dataset::Wikifact => {
            let (records, catalog) = config.wtq()?;
            let gw = optional_gateway(cli, config)?;
            let (kept, skipped) = derive_wikifact(&records, &catalog, gw.as_ref(), config.workers);
            let out = BuildOutput {
                kept,
                ..BuildOutput::default()
            };
            let mut m = manifest(
                dataset,
                config,
                CorrectionPolicy::disabled(),
                gw.as_ref(),
                &out,
                records.len(),
            );
            m.dropped.insert("skipped".into(), skipped.len());
            let files = vec![
                (format!("{name}.jsonl"), jsonl(&out.kept)?),
                (format!("{name}.skipped.jsonl"), jsonl(&skipped)?),
                (
                    format!("{name}.manifest.json"),
                    serde_json::to_vec_pretty(&m)?,
                ),
            ];
            write_all(&config.out_dir, files)?;
            println!(
                "{name}: kept {} of {} ({} skipped)",
                out.kept.len(),
                records.len(),
                skipped.len()
            );
            return Ok(());
        }
        Dataset::BalancedOod => {
            let (records, catalog) = config.wtq()?;
            let gw = gateway(cli, config)?;
            let wikifact: Vec<DatasetEntry> = match input {
                Some(p) => read_jsonl(p)?,
                None => derive_wikifact(&records, &catalog, Some(&gw), config.workers).0,
            };
            let options = OodOptions {
                n: n.unwrap_or(config.build.ood_n),
                seed: config.seed,
                max_resamples: config.build.ood_max_resamples,
            };
            let ood = build_balanced_ood(&wikifact, &catalog, &gw, &options)?;
            let out = BuildOutput {
                kept: ood.entries,
                ..BuildOutput::default()
            };
            let mut m = manifest(
                dataset,
                config,
                config.policy,
                Some(&gw),
                &out,
                wikifact.len(),
            );
            m.dropped.insert("skipped".into(), ood.skipped.len());
            let files = vec![
                (format!("{name}.jsonl"), jsonl(&out.kept)?),
                (format!("{name}.skipped.jsonl"), jsonl(&ood.skipped)?),
                (
                    format!("{name}.manifest.json"),
                    serde_json::to_vec_pretty(&m)?,
                ),
            ];
            write_all(&config.out_dir, files)?;
            println!(
                "{name}: {} claims from {} candidates",
                out.kept.len(),
                wikifact.len()
            );
            return Ok(());
        }
    };
    let m = manifest(dataset, config, policy, gw.as_ref(), &out, source);
    let files = vec![
        (format!("{name}.jsonl"), jsonl(&out.kept)?),
        (format!("{name}.dropped.jsonl"), jsonl(&out.dropped)?),
        (format!("{name}.traces.jsonl"), jsonl(&out.traces)?),
        (
            format!("{name}.manifest.json"),
            serde_json::to_vec_pretty(&m)?,
        ),
    ];
    write_all(&config.out_dir, files)?;
    println!("{name}: kept {} of {}", out.kept.len(), source);
    if let Some(stats) = &out.stats {
        for s in &stats.stages {
            println!(
                "  {:<8} {:>8}  {:>6.2}%",
                s.stage, s.valid_count, s.accuracy_pct
            );
        }
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, config: &RunConfig, args: &TableArgs, statement: &str) -> Result<()> {
    let table = load_table_arg(args)?;
    let gw = gateway(cli, config)?;
    let v = verify_claim(statement, &table, &gw, &config.policy);
    println!("{}", serde_json::to_string(&v)?);
    Ok(())
}

fn cmd_answer(cli: &Cli, config: &RunConfig, args: &TableArgs, question: &str) -> Result<()> {
    let table = load_table_arg(args)?;
    let gw = gateway(cli, config)?;
    let a = answer_question(question, &table, &gw, &config.policy);
    #[derive(Serialize)]
    struct Printed<'a> {
        answer: Option<String>,
        query: &'a str,
        failure: Option<String>,
        attempts: usize,
    }
    let printed = Printed {
        answer: a.value.as_ref().map(|v| v.render()),
        query: &a.query,
        failure: a.failure.as_ref().map(ToString::to_string),
        attempts: a.trace.len(),
    };
    println!("{}", serde_json::to_string(&printed)?);
    Ok(())
}

fn cmd_evaluate(
    cli: &Cli,
    config: &RunConfig,
    dataset: &Path,
    mode: Mode,
    no_corrections: bool,
    ablate: bool,
    scoring: FailureScoring,
) -> Result<()> {
    let entries: Vec<DatasetEntry> = read_jsonl(dataset)?;
    if let Some(e) = entries.iter().find(|e| e.mode != mode) {
        bail!(
            "entry '{}' is a {} entry but --mode is {}",
            e.id,
            e.mode,
            mode
        );
    }
    let catalog = config.all_tables()?;
    let gw = gateway(cli, config)?;
    let policy = if no_corrections {
        config.policy.without_corrections()
    } else {
        config.policy
    };
    let (report, results) = if ablate {
        let run =
            run_ablation(&entries, &catalog, &gw, &policy, mode, config.workers)?.rescored(scoring);
        (run.report, run.with_corr.results)
    } else {
        let ev =
            evaluate(&entries, &catalog, &gw, &policy, mode, config.workers)?.rescored(scoring);
        (ev.report, ev.results)
    };
    write_report(&config.out_dir, &report, &jsonl(&results)?)?;
    print!("{}", report.to_table());
    Ok(())
}

fn write_report(dir: &Path, report: &Report, results: &[u8]) -> Result<()> {
    write_all(
        dir,
        vec![
            ("report.json".into(), serde_json::to_vec_pretty(report)?),
            ("report.txt".into(), report.to_table().into_bytes()),
            ("results.jsonl".into(), results.to_vec()),
        ],
    )
}
