use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use apirec_core::engine::DEFAULT_M;
use apirec_core::evaluation::split_project;
use apirec_core::{run_evaluation, Configuration, Corpus, EvalConfig, FoldScheme, Params, Recommender};
use apirec_service::{handle_recommend, load_corpus, CorpusSummary, RecommendRequest, RecommendResponse};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "apirec", version, about = "Recommends next API invocations and code snippets from similar projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Corpus in FACTS format.
    #[arg(long)]
    facts: PathBuf,
    /// Code bodies in SNIPPETS format.
    #[arg(long)]
    snippets: Option<PathBuf>,
    /// Seed for fold shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus counts and the most frequent / most recommended invocations.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Recommends for the context in a request file.
    Recommend {
        #[command(flatten)]
        common: Common,
        /// JSON file shaped like a service request.
        #[arg(long)]
        active_file: PathBuf,
        #[arg(short = 'k')]
        k: Option<usize>,
        #[arg(short = 'M')]
        m: Option<usize>,
        #[arg(short = 'N')]
        n: Option<usize>,
        #[arg(long)]
        snippet_count: Option<usize>,
    },
    /// Cross-validated evaluation.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "c12")]
        config: Configuration,
        /// `10` or `loo`.
        #[arg(long, default_value = "10")]
        folds: FoldScheme,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        k_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10,15,20")]
        n_list: Vec<usize>,
        #[arg(short = 'M', default_value_t = DEFAULT_M)]
        m: usize,
        /// JSON report path; a CSV with the same stem is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, 0 for one per processor.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Include wall-clock statistics (makes reports differ between runs).
        #[arg(long)]
        timings: bool,
    },
    /// Serves the HTTP API.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
}

enum Failure {
    Input(anyhow::Error),
    AllSkipped(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn from_core(err: apirec_core::Error) -> Self {
        use apirec_core::Error as E;
        match err {
            E::AllSkipped(_) => Self::AllSkipped(err.into()),
            E::InvalidArgument(_) | E::NoContext | E::NotANeighbor(_) => Self::Other(err.into()),
            _ => Self::Input(err.into()),
        }
    }
}

fn load(common: &Common) -> Result<Corpus, Failure> {
    load_corpus(&common.facts, common.snippets.as_deref()).map_err(|e| {
        Failure::Input(anyhow::Error::new(e).context(format!("cannot load {}", common.facts.display())))
    })
}

#[derive(Serialize)]
struct Counted {
    invocation: String,
    count: usize,
}

#[derive(Serialize)]
struct Stats {
    corpus: CorpusSummary,
    categories: BTreeMap<String, usize>,
    /// Invocations used by exactly one project.
    single_project_invocations: usize,
    most_frequent: Vec<Counted>,
    most_recommended: Vec<Counted>,
}

fn top(counts: Vec<(String, usize)>, limit: usize) -> Vec<Counted> {
    let mut counts: Vec<_> = counts.into_iter().filter(|c| c.1 > 0).collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    counts
        .into_iter()
        .take(limit)
        .map(|(invocation, count)| Counted { invocation, count })
        .collect()
}

/// Every project queried in turn with its last declaration's first
/// invocation, the rest of the corpus as background.
fn recommendation_counts(engine: &Recommender) -> Vec<(String, usize)> {
    let corpus = engine.corpus();
    let mut counts = vec![0usize; corpus.vocabulary().len()];
    for (i, project) in corpus.projects().iter().enumerate() {
        let Ok(split) = split_project(project, Configuration::C21) else {
            continue;
        };
        if corpus.len() < 2 {
            break;
        }
        if let Ok(rec) = engine.recommend_apis(&split.to_query(project, Some(i)), &Params::default()) {
            for id in rec.list.ids() {
                counts[id.index()] += 1;
            }
        }
    }
    corpus.vocabulary().iter().map(|(id, s)| (s.to_owned(), counts[id.index()])).collect()
}

fn stats(common: &Common) -> Result<(), Failure> {
    let corpus = load(common)?;
    let mut categories = BTreeMap::new();
    for p in corpus.projects() {
        *categories
            .entry(p.category.clone().unwrap_or_else(|| "uncategorized".into()))
            .or_insert(0) += 1;
    }
    let frequent = corpus
        .vocabulary()
        .iter()
        .map(|(id, s)| (s.to_owned(), corpus.declaration_count(id) as usize))
        .collect();
    let engine = Recommender::new(Arc::new(corpus));
    let corpus = engine.corpus();
    let stats = Stats {
        corpus: CorpusSummary::of(corpus),
        categories,
        single_project_invocations: corpus.project_counts().iter().filter(|&&c| c == 1).count(),
        most_frequent: top(frequent, 20),
        most_recommended: top(recommendation_counts(&engine), 20),
    };
    if common.json {
        return print_json(&stats);
    }
    println!("projects      {}", stats.corpus.projects);
    println!("declarations  {}", stats.corpus.declarations);
    println!("invocations   {}", stats.corpus.vocabulary);
    println!("single-project invocations  {}", stats.single_project_invocations);
    println!("\ncategories");
    for (c, n) in &stats.categories {
        println!("  {n:>6}  {c}");
    }
    println!("\nmost frequent (declarations)");
    for c in &stats.most_frequent {
        println!("  {:>6}  {}", c.count, c.invocation);
    }
    println!("\nmost recommended (top-20 lists)");
    for c in &stats.most_recommended {
        println!("  {:>6}  {}", c.count, c.invocation);
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.into()))?;
    println!("{text}");
    Ok(())
}

fn recommend(
    common: &Common,
    active_file: &Path,
    k: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
    snippet_count: Option<usize>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(active_file)
        .with_context(|| format!("cannot read {}", active_file.display()))
        .map_err(Failure::Input)?;
    let mut request: RecommendRequest = serde_json::from_str(&text)
        .with_context(|| format!("malformed request in {}", active_file.display()))
        .map_err(Failure::Input)?;
    request.k = k.or(request.k);
    request.m = m.or(request.m);
    request.n = n.or(request.n);
    request.snippet_count = snippet_count.or(request.snippet_count);

    let engine = Recommender::new(Arc::new(load(common)?));
    let response: RecommendResponse =
        handle_recommend(&engine, &request).map_err(|e| Failure::Input(anyhow::anyhow!(e.to_string())))?;
    if common.json {
        return print_json(&response);
    }
    if response.fallback_used {
        println!("(no similar declarations; showing the most popular invocations)");
    }
    for a in &response.apis {
        println!("{:>3}  {:.6}  {}", a.rank, a.score, a.invocation);
    }
    for s in &response.snippets {
        println!("\n--- {} :: {}  (jaccard {:.3})", s.project, s.declaration, s.score);
        match &s.body {
            Some(body) => println!("{body}"),
            None => println!("{}", s.sequence.join("\n")),
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    common: &Common,
    configuration: Configuration,
    folds: FoldScheme,
    k_values: Vec<usize>,
    n_values: Vec<usize>,
    m: usize,
    out: Option<&Path>,
    jobs: usize,
    timings: bool,
) -> Result<(), Failure> {
    let engine = Recommender::new(Arc::new(load(common)?));
    let cfg = EvalConfig {
        configuration,
        k_values,
        m,
        n_values,
        folds,
        seed: common.seed,
        jobs,
        include_timings: timings,
        ..EvalConfig::default()
    };
    let report = run_evaluation(&engine, &cfg).map_err(Failure::from_core)?;

    if let Some(path) = out {
        let write = || -> anyhow::Result<()> {
            let mut json = BufWriter::new(File::create(path)?);
            report.write_json(&mut json)?;
            json.flush()?;
            let mut csv = BufWriter::new(File::create(path.with_extension("csv"))?);
            report.write_csv(&mut csv)?;
            csv.flush()?;
            Ok(())
        };
        write()
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Input)?;
    }
    if common.json {
        if out.is_none() {
            print!("{}", report.to_json().map_err(|e| Failure::Other(e.into()))?);
        }
        return Ok(());
    }
    println!(
        "{} over {} folds: {} projects evaluated, {} skipped",
        report.configuration,
        report.fold_count,
        report.evaluated_projects,
        report.skipped.total
    );
    for (reason, n) in &report.skipped.reasons {
        println!("  skipped {reason}: {n}");
    }
    println!("\n{:>4} {:>4} {:>9} {:>8} {:>8} {:>8}", "k", "N", "success%", "P@N", "R@N", "lev");
    for a in &report.aggregates {
        let lev = a.mean_levenshtein.map_or("-".to_owned(), |l| format!("{l:.2}"));
        println!(
            "{:>4} {:>4} {:>9.2} {:>8.4} {:>8.4} {:>8}",
            a.k, a.n, a.success_rate, a.mean_precision, a.mean_recall, lev
        );
    }
    if let Some(t) = &report.timings {
        println!("\nrecommendation time: median {:.3} ms, max {:.3} ms", t.median_ms, t.max_ms);
    }
    Ok(())
}

fn serve(common: &Common, listen: SocketAddr) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    if !common.facts.is_file() {
        return Err(Failure::Input(anyhow::anyhow!("cannot read {}", common.facts.display())));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Other(e.into()))?;
    runtime
        .block_on(apirec_service::serve(listen, common.facts.clone(), common.snippets.clone()))
        .map_err(|e| match e {
            apirec_service::ServeError::Load(inner) => Failure::from_core(inner),
            other => Failure::Other(other.into()),
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats { common } => stats(&common),
        Command::Recommend {
            common,
            active_file,
            k,
            m,
            n,
            snippet_count,
        } => recommend(&common, &active_file, k, m, n, snippet_count),
        Command::Evaluate {
            common,
            config,
            folds,
            k_list,
            n_list,
            m,
            out,
            jobs,
            timings,
        } => evaluate(&common, config, folds, k_list, n_list, m, out.as_deref(), jobs, timings),
        Command::Serve { common, listen } => serve(&common, listen),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, err) = match failure {
                Failure::Input(e) => (2, e),
                Failure::AllSkipped(e) => (3, e),
                Failure::Other(e) => (1, e),
            };
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
