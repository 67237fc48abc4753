//! `ckg` — command-line front end for the causal knowledge graph pipeline.
//!
//! Results go to stdout as JSON or CSV (or the rendered context for
//! `retrieve`); diagnostics go to stderr as single lines. Exit codes:
//! 0 success, 1 usage error, 2 data error, 3 I/O or transport error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ckg_core::analytics::graph_summary;
use ckg_core::eval::{self, AnswerModel, EvalConfig, FixedLetter, PerfectOracle, RemoteHttp, UniformRandom};
use ckg_core::features::{self, FeatureConfig};
use ckg_core::graph::{self, CausalGraph, INGEST_REPORT_FILE};
use ckg_core::retrieval::{self, Centrality, RetrievalConfig};
use ckg_core::stats::{correlation_matrix, FeatureTable};
use ckg_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ckg",
    version,
    about = "Causal knowledge graph tooling for audio-visual reasoning"
)]
struct Cli {
    /// Maximum parallel width (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest JSON-lines triplets and write the graph tables plus an ingestion report.
    BuildGraph {
        #[arg(long = "in", value_name = "TRIPLETS_JSONL")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Print the topological summary of a graph as JSON.
    Stats {
        #[command(flatten)]
        graph: GraphArg,
        /// Number of top initiators to list.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Retrieve ranked one-hop causal facts for a question.
    Retrieve {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        question: String,
        #[command(flatten)]
        retrieval: RetrievalArgs,
        /// Emit the ranked facts as JSON instead of the rendered context.
        #[arg(long)]
        json: bool,
    },
    /// Extract per-scene visual features from PPM frame directories.
    Features {
        /// JSON-lines manifest of {"scene_id", "frame_dir"} rows.
        #[arg(long, value_name = "MANIFEST_JSONL")]
        scenes: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = features::DEFAULT_STRIDE)]
        stride: usize,
        #[arg(long, default_value_t = features::DEFAULT_KERNEL_SIZE)]
        kernel_size: usize,
        #[arg(long, default_value_t = features::DEFAULT_SIGMA)]
        sigma: f64,
    },
    /// Spearman correlation matrix between visual and audio columns.
    Correlate {
        /// Feature table CSV keyed by scene_id; repeat to inner-join several tables.
        #[arg(long, required = true)]
        table: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        visual: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        audio: Vec<String>,
        /// Output CSV (pair counts go next to it); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a multiple-choice benchmark with an answer client.
    Eval(Box<EvalArgs>),
}

#[derive(Args)]
struct GraphArg {
    /// Graph directory, or the entity and relationship tables.
    #[arg(long, num_args = 1..=2, required = true, value_name = "PATH")]
    graph: Vec<PathBuf>,
}

#[derive(Args)]
struct RetrievalArgs {
    /// Facts kept per question.
    #[arg(long, default_value_t = retrieval::DEFAULT_VLM_K)]
    k: usize,
    /// Extra kinetic terms, one per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CentralityArg::Total)]
    centrality: CentralityArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum CentralityArg {
    Total,
    Out,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "MCQ_JSONL")]
    mcq: PathBuf,
    #[arg(long, value_name = "EVIDENCE_JSONL")]
    evidence: PathBuf,
    /// Ground prompts with facts from this graph.
    #[arg(long, num_args = 1..=2, value_name = "PATH")]
    graph: Vec<PathBuf>,
    #[command(flatten)]
    retrieval: RetrievalArgs,
    /// perfect | random | fixed:<A-D> | http
    #[arg(long)]
    client: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-item audit CSV.
    #[arg(long)]
    audit: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    template: String,
    /// Show scene-B audio values on prediction items.
    #[arg(long)]
    no_mask: bool,
    #[arg(long, default_value_t = eval::DEFAULT_MAX_RETRIES)]
    max_retries: usize,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long, default_value = eval::DEFAULT_TOKEN_ENV)]
    token_env: String,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(Error::InvalidConfig(_) | Error::BadKernel { .. } | Error::UnknownTemplate(_)) => 1,
            Failure::Core(Error::Io(_) | Error::ClientFailure(_)) => 3,
            Failure::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        let text = match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        };
        text.lines().collect::<Vec<_>>().join(" ")
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ckg: error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let jobs = cli.jobs.unwrap_or_else(rayon::current_num_threads);
    match cli.command {
        Command::BuildGraph { input, out_dir } => build_graph(&input, &out_dir),
        Command::Stats { graph, top } => {
            let g = load_graph(&graph.graph)?;
            print_json(&graph_summary(&g, top)?)
        }
        Command::Retrieve {
            graph,
            question,
            retrieval,
            json,
        } => {
            let g = load_graph(&graph.graph)?;
            let facts = retrieval::retrieve(&g, &question, &retrieval_config(&retrieval)?)?;
            if json {
                print_json(&facts)
            } else {
                let mut out = io::stdout().lock();
                writeln!(out, "{}", retrieval::render_context(&facts))?;
                Ok(())
            }
        }
        Command::Features {
            scenes,
            out,
            stride,
            kernel_size,
            sigma,
        } => {
            let config = FeatureConfig {
                stride,
                kernel_size,
                sigma,
            };
            features::gaussian_kernel(kernel_size, sigma)?;
            require_exists(&scenes)?;
            let entries = features::read_manifest(&scenes)?;
            let rows = features::extract_manifest(&entries, &config)?;
            match out {
                Some(path) => features::write_features_file(&rows, &path)?,
                None => features::write_features_csv(&rows, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Correlate {
            table,
            visual,
            audio,
            out,
        } => {
            table.iter().try_for_each(|p| require_exists(p))?;
            let mut joined = FeatureTable::from_csv_file(&table[0])?;
            for path in &table[1..] {
                joined = joined.join(&FeatureTable::from_csv_file(path)?)?;
            }
            let matrix = correlation_matrix(&joined, &visual, &audio)?;
            match out {
                Some(path) => {
                    matrix.write_files(&path)?;
                }
                None => matrix.write_values_csv(io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Eval(args) => run_eval(*args, jobs),
    }
}

fn build_graph(input: &Path, out_dir: &Path) -> CmdResult {
    require_exists(input)?;
    let (g, report) = graph::ingest_jsonl_file(input)?;
    for r in &report.rejections {
        eprintln!("ckg: warning: {} line {}: {}", input.display(), r.position, r.reason);
    }
    graph::serialize_graph(&g, out_dir)?;
    let report_path = out_dir.join(INGEST_REPORT_FILE);
    let mut w = BufWriter::new(File::create(&report_path)?);
    serde_json::to_writer_pretty(&mut w, &report).map_err(Error::from)?;
    writeln!(w)?;
    w.flush()?;
    print_json(&serde_json::json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "accepted": report.accepted,
        "merged_duplicates": report.merged_duplicates,
        "rejected": report.rejected,
        "out_dir": out_dir,
    }))
}

/// Missing inputs are reported with their path rather than a bare OS error.
fn require_exists(path: &Path) -> CmdResult {
    if path.exists() {
        Ok(())
    } else {
        Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{}: no such file or directory", path.display()),
        )
        .into())
    }
}

fn load_graph(paths: &[PathBuf]) -> Result<CausalGraph, Failure> {
    paths.iter().try_for_each(|p| require_exists(p))?;
    Ok(match paths {
        [dir] => graph::load_graph_dir(dir)?,
        [entities, relationships] => graph::load_graph(entities, relationships)?,
        _ => return Err(Failure::Usage("--graph takes a directory or two table paths".into())),
    })
}

fn retrieval_config(args: &RetrievalArgs) -> Result<RetrievalConfig, Failure> {
    let mut config = RetrievalConfig::vlm().with_k(args.k);
    config.centrality = match args.centrality {
        CentralityArg::Total => Centrality::Total,
        CentralityArg::Out => Centrality::OutDegree,
    };
    if let Some(path) = &args.lexicon {
        config.extend_lexicon_from_file(path)?;
    }
    config.validate()?;
    Ok(config)
}

fn make_client(args: &EvalArgs, items: &[eval::McqItem]) -> Result<Box<dyn AnswerModel>, Failure> {
    let choice = args.client.trim();
    Ok(match choice.to_ascii_lowercase().as_str() {
        "perfect" => Box::new(PerfectOracle::new(items)),
        "random" => Box::new(UniformRandom::new(args.seed)),
        "http" => {
            let (Some(base), Some(model)) = (&args.base_url, &args.model) else {
                return Err(Failure::Usage("--client http needs --base-url and --model".into()));
            };
            Box::new(RemoteHttp::from_env(
                base.clone(),
                model.clone(),
                &args.token_env,
                args.seed,
            )?)
        }
        other => match other
            .strip_prefix("fixed:")
            .map(|_| choice["fixed:".len()..].chars().collect::<Vec<_>>())
        {
            Some(letter) if letter.len() == 1 => Box::new(FixedLetter::new(letter[0])?),
            _ => {
                return Err(Failure::Usage(format!(
                    "unknown client `{choice}` (expected perfect, random, fixed:<A-D> or http)"
                )))
            }
        },
    })
}

fn run_eval(args: EvalArgs, jobs: usize) -> CmdResult {
    require_exists(&args.mcq)?;
    require_exists(&args.evidence)?;
    let load = eval::load_mcq(&args.mcq)?;
    for row in &load.rejected {
        eprintln!("ckg: warning: {} {row}", args.mcq.display());
    }
    let client = make_client(&args, &load.items)?;
    let evidence = eval::load_evidence(&args.evidence)?;
    let graph = if args.graph.is_empty() {
        None
    } else {
        Some(load_graph(&args.graph)?)
    };
    let config = EvalConfig {
        use_ckg: graph.is_some(),
        retrieval: retrieval_config(&args.retrieval)?,
        mask_scene_b_audio: !args.no_mask,
        prompt_template_id: args.template.clone(),
        seed: args.seed,
        max_retries: args.max_retries,
        jobs,
    };
    let evaluation = eval::evaluate(&load.items, &evidence, client.as_ref(), graph.as_ref(), &config)?;
    if let Some(path) = &args.audit {
        eval::write_audit_file(&evaluation.outcomes, path)?;
    }
    let json = evaluation.report.to_json_pretty()?;
    match &args.out {
        Some(path) => std::fs::write(path, format!("{json}\n"))?,
        None => writeln!(io::stdout().lock(), "{json}")?,
    }
    if evaluation.report.client_failures > 0 {
        eprintln!(
            "ckg: warning: {} items failed after retries and were scored incorrect",
            evaluation.report.client_failures
        );
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> CmdResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}
