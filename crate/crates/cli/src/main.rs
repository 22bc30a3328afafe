mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use sumcot::corpus::{
    bundle_stats, load_adjudications, load_annotations, load_corpus, read_jsonl, summary_stats, BundleStats,
    CorpusPaths,
};
use sumcot::extraction::{lint_dates, lint_redundancy, parse_stage1, LintFinding};
use sumcot::gateway::{CounterRegistry, Gateway};
use sumcot::metrics::{aggregate_likert, LikertRow};
use sumcot::pipeline::{
    compare, emit_comparison, emit_report, evaluate_candidates, evaluate_references, evaluate_run, load_report_jsonl,
    run, Clock, EvalOptions, FixedClock, Format, Mode, RunContext, RunOptions, RunStore, SystemClock,
};
use sumcot::{Corpus, RefKind};

use crate::config::Config;

/// Exit status when a run finished but some documents failed.
const EXIT_PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(name = "sumcot", version, about = "Two-stage summarization runs and element-aware evaluation")]
struct Cli {
    /// Config file (TOML). Without one, built-in defaults apply.
    #[arg(long, short, global = true, env = "SUMCOT_CONFIG")]
    config: Option<PathBuf>,
    /// Corpus directory; overrides `data` from the config.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the corpus and optional annotation files, print counts.
    Ingest {
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        adjudications: Option<PathBuf>,
        #[arg(long)]
        likert: Option<PathBuf>,
    },
    /// Generate summaries with a configured backend.
    Run {
        #[arg(long, default_value = "sumcot")]
        mode: Mode,
        #[arg(long)]
        backend: String,
        /// Defaults to `<backend>-<mode>`.
        #[arg(long)]
        run_id: Option<String>,
        /// Stop after this many pending documents.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Score a run, a candidate system or a reference set.
    Eval(EvalArgs),
    /// Side-by-side table of several JSONL reports with deltas.
    Compare {
        #[arg(long)]
        baseline: String,
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-render a JSONL report in another format.
    Report {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Date and redundancy findings over a run's stage-1 answers.
    Lint {
        #[arg(long)]
        run: String,
    },
    /// Length and novel n-gram statistics of references and candidates.
    Stats,
    /// Mean Likert scores per system and dimension.
    Likert { input: PathBuf },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, group = "target")]
    run: Option<String>,
    /// Candidate system label from candidates.jsonl.
    #[arg(long, group = "target")]
    system: Option<String>,
    /// Score one reference kind against the other.
    #[arg(long, group = "target")]
    references: Option<RefKind>,
    /// Reference kind to score against.
    #[arg(long, default_value = "element_aware")]
    refs: RefKind,
    /// exact, containment[:T] or adjudicated; defaults to the config.
    #[arg(long)]
    matcher: Option<String>,
    #[arg(long)]
    adjudications: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Externally computed semantic-similarity score to record.
    #[arg(long)]
    semantic_similarity: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// md, csv or jsonl.
    #[arg(long, default_value = "md")]
    format: String,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> Result<Format> {
        Ok(self.format.parse::<Format>()?)
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    let data = cli.data.clone().unwrap_or_else(|| cfg.resolve(&cfg.data));
    let load = || -> Result<Corpus> {
        load_corpus(&CorpusPaths::in_dir(&data)).with_context(|| format!("loading corpus from {}", data.display()))
    };

    match cli.command {
        Command::Ingest { annotations, adjudications, likert } => {
            let corpus = load()?;
            ingest(&corpus, annotations.as_deref(), adjudications.as_deref(), likert.as_deref())?;
        }
        Command::Run { mode, backend, run_id, limit } => {
            let corpus = load()?;
            let backend = cfg.backend(&backend)?;
            let run_id = run_id.unwrap_or_else(|| format!("{}-{}", backend.name, mode.as_str()));
            // Mock runs use a fixed clock so their artifacts are reproducible.
            let clock: Box<dyn Clock> = if backend.is_mock() { Box::new(FixedClock(0)) } else { Box::new(SystemClock) };
            let gateway = Gateway::from_config(
                backend,
                cfg.base_dir(),
                Some(&cfg.resolve(&cfg.cache_dir)),
                &CounterRegistry::default(),
            )?;
            let prompts = cfg.prompt_set()?;
            let store = RunStore::new(&cfg.resolve(&cfg.runs_dir), &run_id);
            let ctx = RunContext {
                corpus: &corpus,
                gateway: &gateway,
                prompts: &prompts,
                mode,
                run_id: &run_id,
                clock: &*clock,
            };
            let summary = run(&ctx, &store, RunOptions { limit })?;
            println!(
                "run {}: processed {}, skipped {}, failed {}, pending {}",
                summary.run_id,
                summary.processed,
                summary.skipped,
                summary.failed.len(),
                summary.pending
            );
            info!("artifacts in {}", store.dir().display());
            if summary.partial_failure() {
                eprintln!("failed documents: {}", summary.failed.join(", "));
                return Ok(ExitCode::from(EXIT_PARTIAL));
            }
        }
        Command::Eval(args) => {
            let corpus = load()?;
            eval(&cfg, &corpus, &args)?;
        }
        Command::Compare { baseline, reports, out } => {
            let loaded = reports
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    load_report_jsonl(&text).with_context(|| format!("parsing {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = compare(&loaded, &baseline)?;
            out.write(&emit_comparison(&rows, out.format()?))?;
        }
        Command::Report { input, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let report = load_report_jsonl(&text)?;
            out.write(&emit_report(&report, out.format()?))?;
        }
        Command::Lint { run: run_id } => {
            let corpus = load()?;
            let store = RunStore::new(&cfg.resolve(&cfg.runs_dir), &run_id);
            let findings = lint_run(&corpus, &store)?;
            for f in &findings {
                println!("{}", serde_json::to_string(f)?);
            }
            eprintln!("{} finding(s)", findings.len());
        }
        Command::Stats => print!("{}", stats_table(&load()?)?),
        Command::Likert { input } => {
            let rows: Vec<LikertRow> = read_jsonl(&input)?.into_iter().map(|(_, r)| r).collect();
            print!("{}", aggregate_likert(&rows)?.to_markdown());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn ingest(
    corpus: &Corpus,
    annotations: Option<&Path>,
    adjudications: Option<&Path>,
    likert: Option<&Path>,
) -> Result<()> {
    let c = corpus.counts();
    println!("documents: {}", c.documents);
    println!("dataset references: {}", c.dataset_refs);
    println!("element-aware references: {}", c.element_aware_refs);
    println!("candidates: {} ({})", c.candidates, corpus.systems().join(", "));
    if let Some(path) = annotations {
        let ann = load_annotations(path, corpus)?;
        println!("annotation sets: {} over {} document(s)", ann.sets.len(), ann.doc_ids().len());
        if ann.duplicates_dropped > 0 {
            println!("duplicate elements dropped: {}", ann.duplicates_dropped);
        }
    }
    if let Some(path) = adjudications {
        println!("adjudications: {}", load_adjudications(path, corpus)?.len());
    }
    if let Some(path) = likert {
        let rows: Vec<LikertRow> = read_jsonl(path)?.into_iter().map(|(_, r)| r).collect();
        aggregate_likert(&rows)?;
        println!("likert scores: {}", rows.len());
    }
    Ok(())
}

fn eval(cfg: &Config, corpus: &Corpus, args: &EvalArgs) -> Result<()> {
    let annotations = args.annotations.as_deref().map(|p| load_annotations(p, corpus)).transpose()?;
    let opts = EvalOptions {
        refs: args.refs,
        matcher: cfg.matcher(args.matcher.as_deref(), args.adjudications.as_deref(), corpus)?,
        annotations: annotations.as_ref(),
        semantic_similarity: args.semantic_similarity,
        ..EvalOptions::default()
    };
    let report = match (&args.run, &args.system, args.references) {
        (Some(id), _, _) => evaluate_run(corpus, &RunStore::new(&cfg.resolve(&cfg.runs_dir), id), &opts)?,
        (_, Some(system), _) => evaluate_candidates(corpus, system, &opts)?,
        (_, _, Some(kind)) => {
            if kind == args.refs {
                bail!("--references and --refs name the same kind");
            }
            evaluate_references(corpus, kind, &opts)?
        }
        _ => bail!("eval needs one of --run, --system or --references"),
    };
    args.out.write(&emit_report(&report, args.out.format()?))
}

fn lint_run(corpus: &Corpus, store: &RunStore) -> Result<Vec<LintFinding>> {
    let manifest = store.manifest()?;
    if manifest.mode != Mode::Sumcot {
        bail!("run {:?} is a {} run; lint needs stage-1 answers", manifest.run_id, manifest.mode.as_str());
    }
    let mut findings = Vec::new();
    for rec in store.records()? {
        let (Some(raw), Some(doc)) = (&rec.stage1_completion, corpus.document(&rec.doc_id)) else { continue };
        let ans = parse_stage1(&rec.doc_id, raw);
        findings.extend(lint_dates(&ans, doc));
        findings.extend(lint_redundancy(&ans));
    }
    Ok(findings)
}

fn stats_table(corpus: &Corpus) -> Result<String> {
    let mut rows: Vec<BundleStats> = Vec::new();
    for kind in RefKind::ALL {
        if corpus.references_of(kind).next().is_some() {
            rows.push(bundle_stats(corpus, kind)?);
        }
    }
    for system in corpus.systems() {
        let pairs: Vec<(&str, &str)> = corpus
            .candidates_of(system)
            .filter_map(|c| corpus.document(&c.doc_id).map(|d| (c.text.as_str(), d.text.as_str())))
            .collect();
        rows.push(summary_stats(system, &pairs)?);
    }
    let pct = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
    let mut out =
        String::from("| Summaries | Count | Words | Sentences | Novel 1-gram % | Novel 2-gram % | Novel 3-gram % |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for s in &rows {
        let [n1, n2, n3] = s.novel_pct;
        writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {} | {} | {} |",
            s.kind,
            s.summaries,
            s.avg_words,
            s.avg_sentences,
            pct(n1),
            pct(n2),
            pct(n3)
        )?;
    }
    Ok(out)
}
