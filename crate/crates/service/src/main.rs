//! `pitchgate`: live server, offline pitch tracks, benchmarks and test signals.

use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pitchgate::bench::{
    default_corpus, emit_report, run_sine_sweep, run_timing, run_voice_bench, ReportFormat, SweepOptions,
    TimingOptions, DEFAULT_BUFFERS, MIN_TIMING_ITERATIONS, MIN_WARMUP,
};
use pitchgate::detectors::{AlgorithmId, Detector, DetectorConfig, DetectorResult};
use pitchgate::game::{builtin_presets, load_presets, SessionStore};
use pitchgate::pipeline::{Pipeline, PipelineConfig, DEFAULT_MEL_CEILING};
use pitchgate::signal::{load_wav, write_wav, SourceSpec};
use pitchgate_service::config::{EngineConfig, InputSpec, Pace};
use pitchgate_service::engine::spawn_engine;
use pitchgate_service::hub::{Hub, HubLimits};
use pitchgate_service::server::{router, AppState};
use pitchgate_service::ServiceError;
use tracing::{error, info, warn};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "pitchgate", version, about = "Pitch-controlled voice rehabilitation game and detector benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the live engine and serve `/stream` plus the session endpoints.
    Serve(ServeArgs),
    /// Write the pitch track of a WAV file.
    Analyze(AnalyzeArgs),
    /// Detector benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Render a synthetic source to a WAV file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Engine config JSON; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input override: device:NAME, wav:PATH, synth:SPEC, sine:SPEC or silence:SPEC.
    #[arg(long)]
    input: Option<String>,
    /// Listening port.
    #[arg(long, env = "PITCHGATE_PORT", default_value_t = 8080)]
    port: u16,
    /// Listening address.
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Session store directory.
    #[arg(long, env = "PITCHGATE_STORE", default_value = "sessions")]
    store: PathBuf,
    /// Level presets JSON; the built-in presets otherwise.
    #[arg(long)]
    presets: Option<PathBuf>,
    /// Directory of static UI files served at `/`.
    #[arg(long)]
    assets: Option<PathBuf>,
    /// Feed file and synthetic inputs in real time or as fast as possible.
    #[arg(long, value_enum)]
    pace: Option<PaceArg>,
    /// Start a session immediately.
    #[arg(long)]
    autostart: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PaceArg {
    Realtime,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Input WAV file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Detection algorithm.
    #[arg(long, default_value = "classic_autocorrelator", value_parser = parse_algorithm)]
    algorithm: AlgorithmId,
    /// Frame length in samples.
    #[arg(long, default_value_t = 4096)]
    buffer: usize,
    /// Frame advance in samples; defaults to the frame length.
    #[arg(long)]
    hop: Option<usize>,
    /// Demote pitches above 400 mel.
    #[arg(long, value_enum, default_value = "off")]
    mel_filter: Toggle,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// csv or jsonl.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct CommonBench {
    /// Comma-separated algorithms; all seven by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<AlgorithmId>,
    /// Comma-separated buffer sizes; 1024 through 16384 by default.
    #[arg(long, value_delimiter = ',')]
    buffers: Vec<usize>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// csv or jsonl.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
}

impl CommonBench {
    fn algorithms(&self) -> Vec<AlgorithmId> {
        if self.algorithms.is_empty() {
            AlgorithmId::ALL.to_vec()
        } else {
            self.algorithms.clone()
        }
    }

    fn buffers(&self) -> Vec<usize> {
        if self.buffers.is_empty() {
            DEFAULT_BUFFERS.to_vec()
        } else {
            self.buffers.clone()
        }
    }
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Accuracy over a sweep of pure tones.
    Sine {
        #[command(flatten)]
        common: CommonBench,
        /// Inclusive MIDI note range, e.g. 36..84.
        #[arg(long, default_value = "36..84", value_parser = parse_midi_range)]
        midi_range: MidiRange,
        /// Demote pitches above 400 mel.
        #[arg(long, value_enum, default_value = "off")]
        mel_filter: Toggle,
    },
    /// Mean detection time per buffer.
    Timing {
        #[command(flatten)]
        common: CommonBench,
        /// Measured calls per (algorithm, buffer).
        #[arg(long, default_value_t = MIN_TIMING_ITERATIONS)]
        iterations: usize,
        /// Unmeasured calls first.
        #[arg(long, default_value_t = MIN_WARMUP)]
        warmup: usize,
    },
    /// Detection rate on degraded-voice sources.
    Voice {
        #[command(flatten)]
        common: CommonBench,
        /// Source descriptors, repeatable; the built-in synthetic corpus by default.
        #[arg(long = "sources", value_delimiter = ';')]
        sources: Vec<String>,
        /// Demote pitches above 400 mel.
        #[arg(long, value_enum, default_value = "off")]
        mel_filter: Toggle,
    },
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Source descriptor, e.g. synth:midi=50,duration=4,noise=0.2.
    #[arg(long)]
    source: String,
    /// Output WAV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy)]
struct MidiRange(u8, u8);

fn parse_algorithm(s: &str) -> Result<AlgorithmId, String> {
    s.parse().map_err(|e: pitchgate::detectors::DetectError| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: pitchgate::bench::BenchError| e.to_string())
}

fn parse_midi_range(s: &str) -> Result<MidiRange, String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .ok_or_else(|| format!("expected LOW..HIGH, got `{s}`"))?;
    let lo: u8 = a.trim().parse().map_err(|e| format!("bad low note `{a}`: {e}"))?;
    let hi: u8 = b.trim().parse().map_err(|e| format!("bad high note `{b}`: {e}"))?;
    if lo > hi || hi > 127 {
        return Err(format!("range {lo}..{hi} must be ascending within 0..127"));
    }
    Ok(MidiRange(lo, hi))
}

fn ceiling(t: Toggle) -> Option<f64> {
    (t == Toggle::On).then_some(DEFAULT_MEL_CEILING)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve(args),
        Command::Analyze(args) => analyze(&args).map(|_| ExitCode::SUCCESS),
        Command::Bench(cmd) => bench(cmd),
        Command::Synth(args) => synth(&args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn serve(args: ServeArgs) -> Result<ExitCode, ServiceError> {
    let mut cfg = match &args.config {
        Some(path) => EngineConfig::load(path)?,
        None => EngineConfig::default(),
    };
    if let Some(input) = &args.input {
        cfg.input = input.parse::<InputSpec>()?;
    }
    if let Some(p) = args.pace {
        cfg.pace = match p {
            PaceArg::Realtime => Pace::Realtime,
            PaceArg::Flat => Pace::Flat,
        };
    }
    cfg.autostart |= args.autostart;
    let presets = match &args.presets {
        Some(path) => load_presets(path)?,
        None => builtin_presets(),
    };
    let store = SessionStore::open(&args.store)?;
    let hub = Hub::new(HubLimits::default());
    let engine = spawn_engine(cfg, presets, hub.clone(), store.clone())?;
    let state = AppState {
        hub,
        engine: engine.client(),
        store,
    };
    let addr = SocketAddr::new(args.bind, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| ServiceError::Io {
        path: PathBuf::from("tokio runtime"),
        source,
    })?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|source| ServiceError::Io {
                path: PathBuf::from(addr.to_string()),
                source,
            })?;
        info!(%addr, "listening");
        let app = router(state, args.assets);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
                info!("interrupted");
            })
            .await
            .map_err(|source| ServiceError::Io {
                path: PathBuf::from(addr.to_string()),
                source,
            })
    })?;
    engine.shutdown();
    let outcome = engine.join();
    info!(reason = %outcome.reason, sessions = outcome.persisted.len(), "stopped");
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: &AnalyzeArgs) -> Result<(), ServiceError> {
    let stream = load_wav(&args.input)?;
    let hop = args.hop.unwrap_or(args.buffer);
    let cfg = DetectorConfig::default().fitted_to(args.buffer, stream.sample_rate());
    let mut detector = Detector::new(args.algorithm, cfg);
    let mut pipeline = Pipeline::new(PipelineConfig {
        mel_ceiling: ceiling(args.mel_filter).unwrap_or(f64::MAX),
        ..Default::default()
    })?;
    let mut rows = Vec::new();
    for frame in stream.frames(args.buffer, hop)? {
        let result = match detector.detect(&frame) {
            Ok(r) => r,
            Err(e) => {
                warn!(start = frame.start_index(), error = %e, "frame left unpitched");
                DetectorResult::unpitched(0.0)
            }
        };
        rows.push(pipeline.process(&result, &frame).0);
    }
    emit_report(&rows, args.format, &args.out)?;
    info!(frames = rows.len(), out = %args.out.display(), "pitch track written");
    Ok(())
}

fn bench(cmd: BenchCommand) -> Result<ExitCode, ServiceError> {
    match cmd {
        BenchCommand::Sine {
            common,
            midi_range: MidiRange(lo, hi),
            mel_filter,
        } => {
            let midis: Vec<f64> = (lo..=hi).map(f64::from).collect();
            let opts = SweepOptions {
                mel_ceiling: ceiling(mel_filter),
                ..Default::default()
            };
            let report = run_sine_sweep(
                &common.algorithms(),
                &common.buffers(),
                &midis,
                &DetectorConfig::default(),
                &opts,
            )?;
            for w in &report.warnings {
                warn!(algorithm = %w.algorithm, buffer = w.buffer_size, midi = w.true_midi, reason = %w.reason, "note skipped");
            }
            emit_report(&report.records, common.format, &common.out)?;
            info!(records = report.records.len(), out = %common.out.display(), "sine sweep written");
            Ok(ExitCode::SUCCESS)
        }
        BenchCommand::Timing {
            common,
            iterations,
            warmup,
        } => {
            let opts = TimingOptions {
                iterations,
                warmup,
                ..Default::default()
            };
            let records = run_timing(&common.algorithms(), &common.buffers(), &DetectorConfig::default(), &opts)?;
            emit_report(&records, common.format, &common.out)?;
            info!(records = records.len(), out = %common.out.display(), "timing written");
            Ok(ExitCode::SUCCESS)
        }
        BenchCommand::Voice {
            common,
            sources,
            mel_filter,
        } => {
            let specs = if sources.is_empty() {
                default_corpus()
            } else {
                sources
                    .iter()
                    .map(|s| s.parse::<SourceSpec>())
                    .collect::<Result<Vec<_>, _>>()?
            };
            let mut records = Vec::new();
            let mut failures = Vec::new();
            for buffer in common.buffers() {
                let report = run_voice_bench(
                    &specs,
                    &common.algorithms(),
                    buffer,
                    &DetectorConfig::default(),
                    ceiling(mel_filter),
                )?;
                records.extend(report.records);
                failures.extend(report.failures.into_iter().map(|f| (buffer, f)));
            }
            emit_report(&records, common.format, &common.out)?;
            info!(records = records.len(), out = %common.out.display(), "voice report written");
            if failures.is_empty() {
                return Ok(ExitCode::SUCCESS);
            }
            for (buffer, f) in &failures {
                error!(buffer, source = %f.source, error = %f.error, "source failed");
                eprintln!("source failed: {} ({})", f.source, f.error);
            }
            Ok(ExitCode::from(2))
        }
    }
}

fn synth(args: &SynthArgs) -> Result<(), ServiceError> {
    let spec: SourceSpec = args.source.parse()?;
    let stream = spec.open()?;
    write_wav(&args.out, &stream)?;
    info!(samples = stream.len(), out = %args.out.display(), "wrote");
    Ok(())
}
