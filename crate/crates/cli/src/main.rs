mod error;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::{CliError, ExitKind};
use serde::Serialize;
use signlookup_core::annotation::{insert_all_data, lookup_segment, AnnotationDoc};
use signlookup_core::artifact::Artifact;
use signlookup_core::eval::{evaluate, load_queries, EvalReport};
use signlookup_core::features::FeatureSequence;
use signlookup_core::matcher::{DtwRecognizer, MatchConfig, NormalizationParams};
use signlookup_core::signbank::SearchQuery;
use signlookup_core::synthetic::{SyntheticGallery, SyntheticSpec, HARNESS_NOISE_SEED, HARNESS_NOISE_SIGMA, HARNESS_SEED};
use signlookup_core::{CandidateList, QueryMode};
use signlookup_service::api::{candidates_out, search_bank, CandidateOut};
use signlookup_service::{AppState, ServiceConfig, Snapshot};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

/// Version of every `--json` document this tool prints.
const OUTPUT_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "signlookup", version, about = "Look up signs by video example")]
struct Cli {
    /// Service configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Gallery artifact; overrides the artifact named in the configuration.
    #[arg(long, global = true)]
    artifact: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Import a bank manifest and write a gallery artifact.
    Ingest {
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        reference_keypoint: usize,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Rank candidate signs for a feature file.
    Recognize {
        features: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Citation)]
        mode: Mode,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Search the bank by gloss, English word or handshape.
    Search(SearchArgs),
    /// Top-1 / Top-5 accuracy over a labelled queries manifest.
    Eval {
        queries: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalMode::Both)]
        mode: EvalMode,
        /// Also write the report to this file.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Look up or insert signs in an annotation document.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Write a seeded synthetic gallery and query sets.
    Synth {
        dir: PathBuf,
        #[arg(long, default_value_t = 50)]
        entries: usize,
        #[arg(long, default_value_t = 3)]
        exemplars: usize,
        #[arg(long, default_value_t = HARNESS_SEED)]
        seed: u64,
        #[arg(long, default_value_t = HARNESS_NOISE_SIGMA)]
        noise_sigma: f64,
        #[arg(long, default_value_t = HARNESS_NOISE_SEED)]
        noise_seed: u64,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    gloss: Option<String>,
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    start_hs: Option<String>,
    #[arg(long)]
    end_hs: Option<String>,
}

#[derive(Args, Debug)]
struct Segment {
    doc: PathBuf,
    #[arg(long)]
    utterance: String,
    /// First frame of the segment.
    #[arg(long)]
    start: usize,
    /// One past the last frame.
    #[arg(long)]
    end: usize,
}

#[derive(Subcommand, Debug)]
enum AnnotateCommand {
    /// Segmented-mode lookup over a frame range.
    Lookup(Segment),
    /// Insert a token carrying a variant's properties.
    Insert {
        #[command(flatten)]
        segment: Segment,
        #[arg(long)]
        variant: String,
        /// Output document; defaults to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Citation,
    Segmented,
}

impl From<Mode> for QueryMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Citation => QueryMode::Citation,
            Mode::Segmented => QueryMode::Segmented,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EvalMode {
    Citation,
    Segmented,
    Both,
}

#[derive(Serialize)]
struct Versioned<T> {
    version: u32,
    #[serde(flatten)]
    body: T,
}

fn print_json<T: Serialize>(body: T) {
    let doc = Versioned { version: OUTPUT_VERSION, body };
    println!("{}", serde_json::to_string_pretty(&doc).expect("output serializes"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref().map(ServiceConfig::load).transpose()?;
    let ctx = Context { config, artifact: cli.artifact, json: cli.json };
    match cli.command {
        Command::Ingest { manifest, out, reference_keypoint } => ingest(&ctx, &manifest, &out, reference_keypoint),
        Command::Serve { bind, port } => serve(&ctx, bind, port),
        Command::Recognize { features, mode, k } => recognize(&ctx, &features, mode.into(), k),
        Command::Search(args) => search(&ctx, args),
        Command::Eval { queries, mode, out } => eval(&ctx, &queries, mode, out.as_deref()),
        Command::Annotate(AnnotateCommand::Lookup(seg)) => annotate_lookup(&ctx, &seg),
        Command::Annotate(AnnotateCommand::Insert { segment, variant, out }) => {
            annotate_insert(&ctx, &segment, &variant, out.as_deref())
        }
        Command::Synth { dir, entries, exemplars, seed, noise_sigma, noise_seed } => {
            let spec = SyntheticSpec { entries, exemplars_per_entry: exemplars, seed, ..Default::default() };
            synth(&ctx, &dir, spec, noise_sigma, noise_seed)
        }
    }
}

struct Context {
    config: Option<ServiceConfig>,
    artifact: Option<PathBuf>,
    json: bool,
}

impl Context {
    fn service_config(&self) -> ServiceConfig {
        let mut cfg = self.config.clone().unwrap_or_default();
        if let Some(a) = &self.artifact {
            cfg.artifact = Some(a.clone());
            cfg.bank_manifest = None;
        }
        cfg
    }

    fn match_config(&self) -> MatchConfig {
        self.config.as_ref().map(ServiceConfig::match_config).unwrap_or_default()
    }

    /// The artifact named by `--artifact`, or the bank the configuration points at.
    fn load_artifact(&self) -> Result<Artifact, CliError> {
        let cfg = self.service_config();
        let artifact = match (&cfg.artifact, &cfg.bank_manifest) {
            (Some(a), _) => Artifact::load(a)?,
            (None, Some(m)) => Artifact::ingest(m, cfg.normalization())?,
            (None, None) => {
                return Err(CliError::new(ExitKind::Usage, "no gallery: pass --artifact or a --config naming one"))
            }
        };
        if self.config.is_some() {
            artifact.require_params(cfg.normalization())?;
        }
        Ok(artifact)
    }
}

fn ingest(ctx: &Context, manifest: &Path, out: &Path, reference_keypoint: usize) -> Result<(), CliError> {
    let artifact = Artifact::ingest(manifest, NormalizationParams { reference_keypoint })?;
    artifact.save(out)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        artifact: &'a Path,
        entries: usize,
        variants: usize,
        exemplars: usize,
    }
    let s = Summary {
        artifact: out,
        entries: artifact.bank.entries().len(),
        variants: artifact.bank.variants().len(),
        exemplars: artifact.bank.exemplars().len(),
    };
    if ctx.json {
        print_json(s);
    } else {
        println!(
            "wrote {} ({} entries, {} variants, {} exemplars)",
            out.display(),
            s.entries,
            s.variants,
            s.exemplars
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct Recognition {
    sign_type: QueryMode,
    candidates: Vec<CandidateOut>,
}

fn print_candidates(ctx: &Context, artifact: &Artifact, list: &CandidateList) {
    let candidates = candidates_out(&artifact.bank, list);
    if ctx.json {
        print_json(Recognition { sign_type: list.mode, candidates });
        return;
    }
    println!("{:<5} {:<10} {:<24} variants", "rank", "score", "gloss");
    for c in &candidates {
        let variants: Vec<String> = c.variants.iter().map(|v| format!("{} {} ({:.4})", v.variant_id, v.label, v.score)).collect();
        println!("{:<5} {:<10.4} {:<24} {}", c.rank, c.score, c.base_gloss, variants.join(", "));
    }
}

fn recognizer(ctx: &Context, artifact: &Artifact, k: Option<usize>) -> Result<DtwRecognizer, CliError> {
    let mut cfg = ctx.match_config();
    if let Some(k) = k {
        if k == 0 {
            return Err(CliError::new(ExitKind::Usage, "--k must be at least 1"));
        }
        cfg.k = k;
    }
    Ok(DtwRecognizer::new(Arc::new(artifact.index.clone()), cfg))
}

fn recognize(ctx: &Context, features: &Path, mode: QueryMode, k: Option<usize>) -> Result<(), CliError> {
    let query = FeatureSequence::load(features)?;
    let artifact = ctx.load_artifact()?;
    let list = signlookup_core::Recognizer::recognize(&recognizer(ctx, &artifact, k)?, &query, mode)?;
    print_candidates(ctx, &artifact, &list);
    Ok(())
}

fn search(ctx: &Context, args: SearchArgs) -> Result<(), CliError> {
    let keep = |v: Option<String>| v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
    let query = SearchQuery {
        gloss_substring: keep(args.gloss),
        english_word: keep(args.word),
        start_handshape: keep(args.start_hs),
        end_handshape: keep(args.end_hs),
    };
    let artifact = ctx.load_artifact()?;
    let result = search_bank(&artifact.bank, query)?;
    if ctx.json {
        print_json(result);
        return Ok(());
    }
    println!("{:<12} {:<24} {:<24} {:<6} {:<6} words", "variant", "label", "gloss", "start", "end");
    for v in &result.variants {
        println!(
            "{:<12} {:<24} {:<24} {:<6} {:<6} {}",
            v.variant_id,
            v.label,
            v.base_gloss,
            v.start_handshape_dom,
            v.end_handshape_dom,
            v.related_english_words.join(", ")
        );
    }
    Ok(())
}

fn eval(ctx: &Context, queries: &Path, mode: EvalMode, out: Option<&Path>) -> Result<(), CliError> {
    if !queries.exists() {
        return Err(CliError::new(ExitKind::Io, format!("{}: no such file", queries.display())));
    }
    let artifact = ctx.load_artifact()?;
    let queries = load_queries(queries)?;
    let modes: &[QueryMode] = match mode {
        EvalMode::Citation => &[QueryMode::Citation],
        EvalMode::Segmented => &[QueryMode::Segmented],
        EvalMode::Both => &QueryMode::ALL,
    };
    let r = recognizer(ctx, &artifact, None)?;
    let report = evaluate(&r, &artifact.bank, &queries, modes)?;
    if let Some(out) = out {
        std::fs::write(out, report.to_json()).map_err(|e| CliError::io(out, e))?;
    }
    if ctx.json {
        println!("{}", report.to_json());
    } else {
        print_report(&report);
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!("{:<10} {:>8} {:>8} {:>8}", "mode", "queries", "top1", "top5");
    for (mode, m) in &report.modes {
        println!("{:<10} {:>8} {:>8.4} {:>8.4}", mode.as_str(), m.n_queries, m.top1_acc, m.top5_acc);
    }
}

fn load_doc(path: &Path) -> Result<AnnotationDoc, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(AnnotationDoc::parse(&text)?)
}

fn annotate_lookup(ctx: &Context, seg: &Segment) -> Result<(), CliError> {
    let doc = load_doc(&seg.doc)?;
    let artifact = ctx.load_artifact()?;
    let r = recognizer(ctx, &artifact, None)?;
    let list = lookup_segment(&doc, &seg.utterance, seg.start, seg.end, &r)?;
    print_candidates(ctx, &artifact, &list);
    Ok(())
}

fn annotate_insert(ctx: &Context, seg: &Segment, variant: &str, out: Option<&Path>) -> Result<(), CliError> {
    let doc = load_doc(&seg.doc)?;
    let artifact = ctx.load_artifact()?;
    let updated = insert_all_data(&doc, &seg.utterance, seg.start, seg.end, variant, &artifact.bank)?;
    let text = updated.to_json();
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn synth(ctx: &Context, dir: &Path, spec: SyntheticSpec, sigma: f64, noise_seed: u64) -> Result<(), CliError> {
    if spec.entries == 0 || spec.exemplars_per_entry == 0 {
        return Err(CliError::new(ExitKind::Usage, "--entries and --exemplars must be at least 1"));
    }
    let g = SyntheticGallery::generate(spec);
    let io = |e| CliError::io(dir, e);
    let manifest = g.write(&dir.join("bank")).map_err(io)?;
    let exact = SyntheticGallery::write_queries(&g.exact_queries(), &dir.join("exact")).map_err(io)?;
    let noisy = g
        .noisy_queries(sigma, noise_seed, NormalizationParams::default())
        .map_err(|e| CliError::new(ExitKind::Usage, e.to_string()))?;
    let noisy = SyntheticGallery::write_queries(&noisy, &dir.join("noisy")).map_err(io)?;
    #[derive(Serialize)]
    struct Written {
        manifest: PathBuf,
        exact_queries: PathBuf,
        noisy_queries: PathBuf,
    }
    let w = Written { manifest, exact_queries: exact, noisy_queries: noisy };
    if ctx.json {
        print_json(w);
    } else {
        println!("bank manifest   {}", w.manifest.display());
        println!("exact queries   {}", w.exact_queries.display());
        println!("noisy queries   {}", w.noisy_queries.display());
    }
    Ok(())
}

fn serve(ctx: &Context, bind: Option<String>, port: Option<u16>) -> Result<(), CliError> {
    let mut cfg = ctx.service_config();
    if let Some(b) = bind {
        cfg.bind = b;
    }
    if let Some(p) = port {
        cfg.port = p;
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let state = Arc::new(AppState::from_config(&cfg)?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new(ExitKind::Other, e.to_string()))?;
    rt.block_on(async move {
        let addr = format!("{}:{}", cfg.bind, cfg.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::new(ExitKind::Io, format!("bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| CliError::new(ExitKind::Io, e.to_string()))?;
        println!("listening on http://{local}");
        spawn_reload(state.clone(), cfg.clone());
        signlookup_service::serve(state, listener, shutdown_signal())
            .await
            .map_err(|e| CliError::new(ExitKind::Other, e.to_string()))
    })
}

/// Re-reads the gallery on SIGHUP and swaps it in; in-flight requests keep
/// the snapshot they started with.
#[cfg(unix)]
fn spawn_reload(state: Arc<AppState>, cfg: ServiceConfig) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hup) = signal(SignalKind::hangup()) else { return };
    tokio::spawn(async move {
        while hup.recv().await.is_some() {
            let cfg = cfg.clone();
            let loaded = tokio::task::spawn_blocking(move || {
                let artifact = match (&cfg.artifact, &cfg.bank_manifest) {
                    (Some(a), _) => Artifact::load(a)?,
                    (None, Some(m)) => Artifact::ingest(m, cfg.normalization())?,
                    (None, None) => unreachable!("checked at startup"),
                };
                artifact.require_params(cfg.normalization())?;
                Ok::<_, signlookup_core::artifact::ArtifactError>(Snapshot::from_artifact(artifact, cfg.match_config()))
            })
            .await;
            match loaded {
                Ok(Ok(snapshot)) => {
                    state.replace_snapshot(snapshot);
                    tracing::info!("gallery reloaded");
                }
                Ok(Err(e)) => tracing::error!("reload failed, keeping current gallery: {e}"),
                Err(e) => tracing::error!("reload task failed: {e}"),
            }
        }
    });
}

#[cfg(not(unix))]
fn spawn_reload(_: Arc<AppState>, _: ServiceConfig) {}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
