use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use texelatt_core::corpus::{
    classify_task, ranking_table, read_jsonl, BinaryTask, CorpusStore, DescriptorRow, DescriptorSource, PipelineConfig,
    TaskResult,
};
use texelatt_core::descriptor::{attach_attributes, describe_image};
use texelatt_core::detect::{evaluate_detection, segment_texels_with, IOU_THRESHOLDS};
use texelatt_core::synth::{Coloring, GroundTruth, LineWidth, Regularity, TaskConstraints};
use texelatt_core::{load_png, ShapeClass, TexelRecord};
use texelatt_server::{AppState, ServerConfig};

#[derive(Debug, Parser)]
#[command(name = "texelatt", version, about = "Element-based texture attributes: generate, detect, describe, evaluate, search")]
struct Cli {
    /// Seed for generation, target selection and cross-validation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Corpus directory.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Worker threads for image processing (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON file overriding detector, ranking and search thresholds.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate annotated textures into the corpus directory.
    Generate(GenerateArgs),
    /// Detect texels in one image and print them as JSON.
    Detect {
        image: PathBuf,
        /// Include per-texel color, orientation and area.
        #[arg(long)]
        attributes: bool,
    },
    /// Score detections against a ground-truth annotation.
    Evaluate {
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Describe one image, or every image of the corpus when no image is given.
    Describe { image: Option<PathBuf> },
    /// Ranking accuracy of detected against ground-truth attributes.
    RankEval {
        /// Detected descriptor table (default: the corpus table).
        #[arg(long)]
        descriptors: Option<PathBuf>,
        /// Ground-truth descriptor table (default: the corpus table).
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Cross-validated linear classification of the binary texture tasks.
    ClassifyTasks {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 1024)]
        image_size: u32,
        /// Task to run (repeatable; default: all).
        #[arg(long = "task", value_parser = parse_json_str::<BinaryTask>)]
        tasks: Vec<BinaryTask>,
        #[arg(long)]
        json: bool,
    },
    /// Oracle search sessions over the described corpus.
    SimulateSearch {
        #[arg(long, default_value_t = 100)]
        sessions: usize,
        /// Descriptor table the sessions rank: detected or ground_truth.
        #[arg(long, default_value = "detected", value_parser = parse_json_str::<DescriptorSource>)]
        source: DescriptorSource,
        /// Write every session transcript here.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Serve the search API and the web UI.
    Serve {
        #[arg(long, env = texelatt_server::PORT_ENV, default_value_t = texelatt_server::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Built web UI to serve at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Session transcripts are persisted and recovered here.
        #[arg(long)]
        sessions_dir: Option<PathBuf>,
        /// Idle minutes before a session expires.
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
        #[arg(long, default_value = "detected", value_parser = parse_json_str::<DescriptorSource>)]
        source: DescriptorSource,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    count: usize,
    /// JSON file with task constraints; flags below override it.
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long)]
    image_size: Option<u32>,
    /// Allowed shape classes, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_json_str::<ShapeClass>)]
    shapes: Option<Vec<ShapeClass>>,
    #[arg(long, value_parser = parse_json_str::<Regularity>)]
    regularity: Option<Regularity>,
    #[arg(long, value_parser = parse_json_str::<Coloring>)]
    coloring: Option<Coloring>,
    #[arg(long, value_parser = parse_json_str::<LineWidth>)]
    line_width: Option<LineWidth>,
    #[arg(long)]
    max_jitter: Option<f64>,
    #[arg(long)]
    non_overlapping: bool,
}

/// Parses a bare word with the type's JSON string representation.
fn parse_json_str<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unrecognized value `{s}`"))
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<texelatt_core::Error> for Failure {
    fn from(e: texelatt_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).context("serializing output")?;
    println!("{text}");
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn corpus(cli: &Cli) -> Result<CorpusStore, Failure> {
    cli.corpus
        .as_ref()
        .map(CorpusStore::new)
        .ok_or_else(|| Failure::Usage("this command needs --corpus <DIR>".into()))
}

fn constraints(args: &GenerateArgs) -> anyhow::Result<TaskConstraints> {
    let mut c = match &args.constraints {
        Some(path) => read_json(path)?,
        None => TaskConstraints::default(),
    };
    if let Some(s) = args.image_size {
        c.image_size = s;
    }
    if args.shapes.is_some() {
        c.shapes = args.shapes.clone();
    }
    c.regularity = args.regularity.or(c.regularity);
    c.coloring = args.coloring.or(c.coloring);
    c.line_width = args.line_width.or(c.line_width);
    c.max_jitter = args.max_jitter.or(c.max_jitter);
    c.non_overlapping |= args.non_overlapping;
    Ok(c)
}

#[derive(Serialize)]
struct DetectedTexel {
    #[serde(flatten)]
    record: TexelRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    attributes: Option<texelatt_core::attributes::TexelAttributes>,
}

fn run(cli: &Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    match &cli.command {
        Command::Generate(args) => {
            let store = corpus(cli)?;
            let manifest = store.generate(args.count, cli.seed, &constraints(args)?)?;
            eprintln!("{} textures in {}", manifest.entries.len(), store.root().display());
            Ok(())
        }
        Command::Detect { image, attributes } => {
            let img = load_png(image)?;
            let records = segment_texels_with(&img, &config.detector);
            let out: Vec<DetectedTexel> = if *attributes {
                attach_attributes(records, &img)?
                    .into_iter()
                    .map(|(record, a)| DetectedTexel { record, attributes: Some(a) })
                    .collect()
            } else {
                records.into_iter().map(|record| DetectedTexel { record, attributes: None }).collect()
            };
            print_json(&out)
        }
        Command::Evaluate { prediction, truth } => {
            let pred: Vec<TexelRecord> = read_json(prediction)?;
            let truth: GroundTruth = read_json(truth)?;
            print_json(&evaluate_detection(&pred, &truth, &IOU_THRESHOLDS))
        }
        Command::Describe { image: Some(image) } => print_json(&describe_image(&load_png(image)?, &config.detector)?),
        Command::Describe { image: None } => {
            let store = corpus(cli)?;
            let out = store.describe(&config.detector)?;
            eprintln!("described {} images in {}", out.detected.len(), store.root().display());
            Ok(())
        }
        Command::RankEval { descriptors, truth, json } => {
            let table = match (descriptors, truth) {
                (Some(d), Some(t)) => {
                    let pred: Vec<DescriptorRow> = read_jsonl(d)?;
                    ranking_table(&pred, &read_jsonl(t)?, config.gamma_fraction)?
                }
                (None, None) => corpus(cli)?.rank_eval(config.gamma_fraction)?,
                _ => return Err(Failure::Usage("--descriptors and --truth go together".into())),
            };
            if *json {
                print_json(&table)
            } else {
                print!("{}", table.to_text());
                Ok(())
            }
        }
        Command::ClassifyTasks { count, image_size, tasks, json } => {
            if *count < 4 {
                return Err(Failure::Usage("--count must be at least 4".into()));
            }
            let tasks = if tasks.is_empty() { BinaryTask::ALL.to_vec() } else { tasks.clone() };
            let results = tasks
                .iter()
                .map(|&t| classify_task(t, *count, cli.seed, *image_size, &config.detector))
                .collect::<Result<Vec<TaskResult>, _>>()?;
            if *json {
                print_json(&results)
            } else {
                for r in &results {
                    println!("{:<20} {:>6} {:>8.4}", r.task.as_str(), r.images, r.accuracy);
                }
                Ok(())
            }
        }
        Command::SimulateSearch { sessions, source, transcripts } => {
            let store = corpus(cli)?;
            let (summary, runs) = store.simulate_search(*sessions, cli.seed, *source, &config)?;
            if let Some(dir) = transcripts {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (i, t) in runs.iter().enumerate() {
                    let path = dir.join(format!("session{i:04}.json"));
                    let text = serde_json::to_string_pretty(t).context("serializing transcript")?;
                    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
                }
            }
            print_json(&summary)
        }
        Command::Serve { port, host, static_dir, sessions_dir, idle_minutes, source } => {
            let root = cli.corpus.clone().ok_or_else(|| Failure::Usage("serve needs --corpus <DIR>".into()))?;
            let server_config = ServerConfig {
                static_dir: static_dir.clone(),
                sessions_dir: sessions_dir.clone(),
                idle_timeout: Duration::from_secs(idle_minutes.saturating_mul(60)),
                source: *source,
                pipeline: config,
                seed: cli.seed,
                ..ServerConfig::new(root)
            };
            let state = Arc::new(AppState::load(server_config)?);
            let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
            runtime
                .block_on(texelatt_server::serve(state, SocketAddr::new(*host, *port)))
                .context("serving")?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
