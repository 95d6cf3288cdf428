//! The engine consumer: one thread that owns the detector, the pipeline,
//! the game and the session recorder.
//!
//! Per frame it publishes one `sample`, then the snapshots in between
//! (previews of the coming physics at the snapshot rate), the frame's
//! events, and the stepped snapshot. Controls queue up on a channel and
//! are applied between frames; each one is echoed as a `control` message
//! followed by a `config` message, the latter carrying `rejected` when the
//! control was refused.
//!
//! Starting a session sets the pipeline's base critical pitch to the
//! level's. Selecting a level during a session only affects the next one.

use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use chrono::Utc;
use pitchgate::detectors::{AlgorithmId, Detector, DetectorResult};
use pitchgate::game::{spawn_level, GameEvent, GameState, LevelConfig, LevelPresets, SessionRecorder, SessionStore};
use pitchgate::pipeline::{effective_critical, Pipeline, PipelineConfig};
use pitchgate::signal::AudioFrame;
use tracing::{error, info, warn};

use crate::budget::{measure_budget, BudgetReport};
use crate::config::{unknown_level, EngineConfig};
use crate::hub::Hub;
use crate::input::{open_input, Producer};
use crate::queue::{FrameQueue, Pop};
use crate::wire::{ConfigEcho, Control, Payload};
use crate::ServiceError;

const POLL: Duration = Duration::from_millis(20);

#[derive(Debug)]
enum Command {
    Control(Control),
    Invalid(String),
    Shutdown,
}

/// A cheap handle for sending controls and reading the current settings.
#[derive(Debug, Clone)]
pub struct EngineClient {
    tx: Sender<Command>,
    current: Arc<Mutex<ConfigEcho>>,
}

impl EngineClient {
    pub fn send(&self, control: Control) {
        let _ = self.tx.send(Command::Control(control));
    }

    /// Parses a client text frame; unparsable text is echoed as a rejection.
    pub fn send_text(&self, text: &str) {
        let cmd = match Control::parse(text) {
            Ok(c) => Command::Control(c),
            Err(e) => Command::Invalid(e),
        };
        let _ = self.tx.send(cmd);
    }

    pub fn current_config(&self) -> ConfigEcho {
        self.current.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutcome {
    pub reason: String,
    pub frames: u64,
    pub dropped_frames: u64,
    /// Ids of the sessions written to the store, in order.
    pub persisted: Vec<String>,
}

#[derive(Debug)]
pub struct EngineHandle {
    client: EngineClient,
    thread: JoinHandle<EngineOutcome>,
}

impl EngineHandle {
    pub fn client(&self) -> EngineClient {
        self.client.clone()
    }

    /// Asks the engine to stop after the current frame.
    pub fn shutdown(&self) {
        let _ = self.client.tx.send(Command::Shutdown);
    }

    pub fn join(self) -> EngineOutcome {
        self.thread.join().expect("engine thread panicked")
    }

    pub fn is_finished(&self) -> bool {
        self.thread.is_finished()
    }
}

/// Validates the config, opens the input, measures the frame budget and
/// starts the producer and engine threads. The first `config` message is
/// published before this returns.
pub fn spawn_engine(
    cfg: EngineConfig,
    presets: LevelPresets,
    hub: Arc<Hub>,
    store: SessionStore,
) -> Result<EngineHandle, ServiceError> {
    cfg.validate()?;
    let (level_name, level) = cfg.resolve_level(&presets)?;
    level.validate()?;
    let stream = open_input(&cfg.input)?;
    let sample_rate = stream.sample_rate();
    let detector_cfg = cfg.detector.fitted_to(cfg.buffer_size, sample_rate);
    detector_cfg.validate(sample_rate)?;
    let budget = if cfg.budget_iterations > 0 {
        let report = measure_budget(
            cfg.buffer_size,
            sample_rate,
            &cfg.detector,
            &cfg.pipeline,
            &level,
            cfg.budget_iterations,
        )?;
        log_budget(&report);
        Some(report)
    } else {
        None
    };

    let producer = Producer::start(stream, cfg.buffer_size, cfg.pace, cfg.queue_capacity)?;
    let (tx, rx) = mpsc::channel();
    let mut engine = Engine {
        detector: Detector::new(cfg.algorithm, detector_cfg),
        pipeline: Pipeline::new(cfg.pipeline)?,
        sample_rate,
        queue: producer.queue.clone(),
        presets,
        level_name,
        level,
        session: None,
        hub,
        store,
        budget,
        current: Arc::new(Mutex::new(placeholder_echo())),
        persisted: Vec::new(),
        started: 0,
        frames: 0,
        cfg,
    };
    engine.echo(None);
    let client = EngineClient {
        tx,
        current: engine.current.clone(),
    };
    if engine.cfg.autostart {
        client.send(Control::Start { patient_alias: None });
    }
    let thread = thread::Builder::new()
        .name("engine".into())
        .spawn(move || engine.run(rx, producer))
        .map_err(|e| ServiceError::Config(format!("cannot start engine thread: {e}")))?;
    Ok(EngineHandle { client, thread })
}

fn log_budget(report: &BudgetReport) {
    for a in &report.per_algorithm {
        info!(
            algorithm = %a.algorithm,
            mean_ms = a.mean_ms,
            budget_ms = report.frame_duration_ms,
            within = a.within_budget,
            "frame budget"
        );
    }
    let over = report.over_budget();
    if !over.is_empty() {
        warn!(?over, buffer_size = report.buffer_size, "algorithms over the frame budget");
    }
}

fn placeholder_echo() -> ConfigEcho {
    ConfigEcho {
        algorithm: AlgorithmId::ClassicAutocorrelator,
        buffer_size: 0,
        sample_rate: 0,
        pipeline: PipelineConfig::default(),
        effective_critical_mel: 0.0,
        level_name: None,
        level: LevelConfig::default(),
        session_running: false,
        rejected: None,
        budget: None,
        dropped_frames: 0,
    }
}

struct Session {
    id: String,
    state: GameState,
    recorder: SessionRecorder,
}

struct Engine {
    cfg: EngineConfig,
    detector: Detector,
    pipeline: Pipeline,
    sample_rate: u32,
    queue: Arc<FrameQueue<AudioFrame>>,
    presets: LevelPresets,
    /// The level the next session will use.
    level_name: Option<String>,
    level: LevelConfig,
    session: Option<Session>,
    hub: Arc<Hub>,
    store: SessionStore,
    budget: Option<BudgetReport>,
    current: Arc<Mutex<ConfigEcho>>,
    persisted: Vec<String>,
    started: u64,
    frames: u64,
}

impl Engine {
    fn run(mut self, rx: Receiver<Command>, producer: Producer) -> EngineOutcome {
        let reason = 'outer: loop {
            loop {
                match rx.try_recv() {
                    Ok(Command::Shutdown) => break 'outer "engine stopped".to_string(),
                    Ok(Command::Control(c)) => self.apply(c),
                    Ok(Command::Invalid(reason)) => self.echo(Some(reason)),
                    Err(TryRecvError::Empty | TryRecvError::Disconnected) => break,
                }
            }
            match self.queue.pop_timeout(POLL) {
                Pop::Item(frame) => self.process(&frame),
                Pop::Empty => {}
                Pop::Closed => break "input ended".to_string(),
            }
        };
        if self.session.is_some() {
            self.abort_session(&reason);
        }
        self.publish(Payload::Shutdown { reason: reason.clone() });
        self.hub.close();
        let dropped_frames = self.queue.dropped();
        producer.stop();
        info!(%reason, frames = self.frames, dropped_frames, "engine stopped");
        EngineOutcome {
            reason,
            frames: self.frames,
            dropped_frames,
            persisted: self.persisted,
        }
    }

    fn session_id(&self) -> Option<&str> {
        self.session.as_ref().map(|s| s.id.as_str())
    }

    fn publish(&self, payload: Payload) {
        self.hub.publish(self.session_id(), payload);
    }

    fn echo(&mut self, rejected: Option<String>) {
        let config = ConfigEcho {
            algorithm: self.detector.algorithm(),
            buffer_size: self.cfg.buffer_size,
            sample_rate: self.sample_rate,
            pipeline: *self.pipeline.config(),
            effective_critical_mel: effective_critical(self.pipeline.config()),
            level_name: self.level_name.clone(),
            level: self.level.clone(),
            session_running: self.session.is_some(),
            rejected,
            budget: self.budget.clone(),
            dropped_frames: self.queue.dropped(),
        };
        *self.current.lock().unwrap_or_else(|e| e.into_inner()) = config.clone();
        self.publish(Payload::Config { config });
    }

    fn apply(&mut self, control: Control) {
        self.publish(Payload::Control {
            control: control.clone(),
        });
        let outcome = self.try_apply(control);
        if let Err(reason) = &outcome {
            warn!(%reason, "control rejected");
        }
        self.echo(outcome.err());
    }

    fn try_apply(&mut self, control: Control) -> Result<(), String> {
        match control {
            Control::SetCriticalMel { value } => self.set_pipeline(PipelineConfig {
                critical_mel: value,
                ..*self.pipeline.config()
            }),
            Control::SetDifficultyDivisor { value } => self.set_pipeline(PipelineConfig {
                difficulty_divisor: value,
                ..*self.pipeline.config()
            }),
            Control::SetAlgorithm { algorithm } => {
                let cfg = *self.detector.config();
                self.detector = Detector::new(algorithm, cfg);
                self.cfg.algorithm = algorithm;
                Ok(())
            }
            Control::SetLevel { name } => {
                let level = self
                    .presets
                    .get(&name)
                    .ok_or_else(|| unknown_level(&name, &self.presets).to_string())?;
                self.level = level.clone();
                self.level_name = Some(name);
                Ok(())
            }
            Control::Start { patient_alias } => self.start_session(patient_alias),
            Control::Stop => {
                if self.session.is_none() {
                    return Err("no session is running".into());
                }
                self.abort_session("stopped by the therapist");
                Ok(())
            }
        }
    }

    fn set_pipeline(&mut self, cfg: PipelineConfig) -> Result<(), String> {
        self.pipeline.set_config(cfg).map_err(|e| e.to_string())
    }

    fn start_session(&mut self, alias: Option<String>) -> Result<(), String> {
        if let Some(s) = &self.session {
            return Err(format!("session `{}` is already running", s.id));
        }
        let alias = alias.unwrap_or_else(|| self.cfg.patient_alias.clone());
        if alias.is_empty() || !alias.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(format!("invalid patient alias `{alias}`: use letters, digits, `-` and `_`"));
        }
        let state = spawn_level(&self.level).map_err(|e| e.to_string())?;
        self.set_pipeline(PipelineConfig {
            critical_mel: self.level.critical_mel,
            ..*self.pipeline.config()
        })?;
        self.started += 1;
        let now = Utc::now();
        let id = format!("{alias}-{}-{}", now.format("%Y%m%dT%H%M%S%3f"), self.started);
        info!(session = %id, level = ?self.level_name, "session started");
        let recorder = SessionRecorder::new(&id, &alias, now, self.level.clone());
        let snapshot = state.snapshot();
        self.session = Some(Session { id, state, recorder });
        self.publish(Payload::Snapshot { snapshot });
        Ok(())
    }

    fn process(&mut self, frame: &AudioFrame) {
        self.frames += 1;
        let result = self.detector.detect(frame).unwrap_or_else(|e| {
            warn!(error = %e, "detection failed; frame treated as unpitched");
            DetectorResult::unpitched(0.0)
        });
        let (sample, signal) = self.pipeline.process(&result, frame);
        self.publish(Payload::Sample {
            algorithm: self.detector.algorithm(),
            sample,
            above_critical: signal.above_critical,
            effective_critical_mel: signal.effective_critical_mel,
        });
        let Some(session) = self.session.as_mut() else {
            return;
        };
        let dt = frame.duration_ms() / 1000.0;
        let ticks = (dt * self.cfg.snapshot_hz - 1e-9).ceil().max(1.0) as usize;
        let previews: Vec<_> = (1..ticks)
            .map(|k| session.state.preview(&signal, k as f64 / self.cfg.snapshot_hz))
            .collect();
        let events = session.state.step(&signal, dt);
        session.recorder.record_frame(&signal);
        session.recorder.record_events(&events);
        let snapshot = session.state.snapshot();
        let finished = !session.state.is_running();
        for snapshot in previews {
            self.publish(Payload::Snapshot { snapshot });
        }
        self.publish_events(events);
        self.publish(Payload::Snapshot { snapshot });
        if finished {
            self.end_session();
        }
    }

    fn publish_events(&self, events: Vec<GameEvent>) {
        for event in events {
            self.publish(Payload::Event { event });
        }
    }

    fn abort_session(&mut self, reason: &str) {
        if let Some(session) = self.session.as_mut() {
            if let Some(event) = session.state.abort(reason) {
                session.recorder.record_events(std::slice::from_ref(&event));
                self.publish_events(vec![event]);
            }
        }
        self.end_session();
    }

    fn end_session(&mut self) {
        let Some(session) = self.session.take() else {
            return;
        };
        let log = session.recorder.finish();
        match self.store.persist(&log) {
            Ok(id) => {
                info!(session = %id, score = log.summary.score, collisions = log.summary.collisions, "session saved");
                self.persisted.push(id);
            }
            Err(e) => error!(session = %log.session_id, error = %e, "session could not be saved"),
        }
        self.echo(None);
    }
}
