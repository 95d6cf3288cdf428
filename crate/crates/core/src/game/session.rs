use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{spawn_level, GameError, GameEvent, GameEventKind, LevelConfig};
use crate::pipeline::{ControlSignal, PitchSample};

/// Totals derived from a log's raw lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SessionSummary {
    pub frames: usize,
    pub pitched_frames: usize,
    pub above_critical_frames: usize,
    pub max_mel: Option<f64>,
    pub score: u32,
    pub collisions: u32,
}

/// One treatment session: every monitor row with its control decision,
/// every game event, and the totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub patient_alias: String,
    pub started_at: DateTime<Utc>,
    pub level: LevelConfig,
    pub pitch_samples: Vec<PitchSample>,
    /// `above_critical[i]` is the control decision for `pitch_samples[i]`.
    pub above_critical: Vec<bool>,
    pub events: Vec<GameEvent>,
    pub summary: SessionSummary,
}

impl SessionLog {
    pub fn recompute_summary(&self) -> SessionSummary {
        let count = |kind| self.events.iter().filter(|e| e.kind == kind).count() as u32;
        SessionSummary {
            frames: self.pitch_samples.len(),
            pitched_frames: self.pitch_samples.iter().filter(|s| s.pitched).count(),
            above_critical_frames: self.above_critical.iter().filter(|&&a| a).count(),
            max_mel: self
                .pitch_samples
                .iter()
                .filter_map(|s| s.mel)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))),
            score: count(GameEventKind::ObstacleCleared),
            collisions: count(GameEventKind::Collision),
        }
    }

    /// Checks the stored summary and the structure of the raw lists.
    pub fn verify(&self) -> Result<(), GameError> {
        let fail = |detail: String| {
            Err(GameError::Integrity {
                session_id: self.session_id.clone(),
                detail,
            })
        };
        if self.above_critical.len() != self.pitch_samples.len() {
            return fail(format!(
                "{} control decisions for {} samples",
                self.above_critical.len(),
                self.pitch_samples.len()
            ));
        }
        if let Some(i) = self.pitch_samples.iter().position(|s| !s.is_consistent()) {
            return fail(format!("pitch sample {i} is internally inconsistent"));
        }
        if self.events.windows(2).any(|w| w[1].at_s < w[0].at_s) {
            return fail("events are not in time order".into());
        }
        let expected = self.recompute_summary();
        if expected != self.summary {
            return fail(format!("stored summary {:?} != recomputed {:?}", self.summary, expected));
        }
        Ok(())
    }
}

/// Accumulates a log as a session runs.
#[derive(Debug, Clone)]
pub struct SessionRecorder {
    log: SessionLog,
}

impl SessionRecorder {
    pub fn new(session_id: &str, patient_alias: &str, started_at: DateTime<Utc>, level: LevelConfig) -> Self {
        Self {
            log: SessionLog {
                session_id: session_id.to_string(),
                patient_alias: patient_alias.to_string(),
                started_at,
                level,
                pitch_samples: Vec::new(),
                above_critical: Vec::new(),
                events: Vec::new(),
                summary: SessionSummary::default(),
            },
        }
    }

    pub fn session_id(&self) -> &str {
        &self.log.session_id
    }

    pub fn record_frame(&mut self, signal: &ControlSignal) {
        self.log.pitch_samples.push(signal.source.clone());
        self.log.above_critical.push(signal.above_critical);
    }

    pub fn record_events(&mut self, events: &[GameEvent]) {
        self.log.events.extend_from_slice(events);
    }

    pub fn finish(mut self) -> SessionLog {
        self.log.summary = self.log.recompute_summary();
        self.log
    }
}

/// Headless replay: spawns the level and steps it once per signal, each
/// for its sample's duration. Signals left over after the level ends are
/// ignored; running out of signals first fails the level.
pub fn run_scripted(level: &LevelConfig, signals: &[ControlSignal]) -> Result<SessionLog, GameError> {
    let mut state = spawn_level(level)?;
    let mut recorder = SessionRecorder::new("scripted", "scripted", DateTime::UNIX_EPOCH, level.clone());
    for signal in signals {
        if !state.is_running() {
            break;
        }
        recorder.record_frame(signal);
        let events = state.step(signal, signal.source.duration_ms / 1000.0);
        recorder.record_events(&events);
    }
    if let Some(e) = state.abort(&format!(
        "signals ended at {:.3} s of a {} s level",
        state.elapsed_s, level.duration_s
    )) {
        recorder.record_events(&[e]);
    }
    Ok(recorder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level() -> LevelConfig {
        LevelConfig {
            obstacle_spacing: 25.0,
            obstacle_radius: 6.0,
            duration_s: 6.0,
            ..Default::default()
        }
    }

    fn alternating(n: usize) -> Vec<ControlSignal> {
        (0..n)
            .map(|i| ControlSignal::scripted((i / 8) % 2 == 0, 50.0, 4096.0 / 44.1))
            .collect()
    }

    #[test]
    fn test_empty_signals_fail_level() {
        let log = run_scripted(&level(), &[]).unwrap();
        assert_eq!(log.events.len(), 1);
        assert_eq!(log.events[0].kind, GameEventKind::LevelFailed);
        assert_eq!(log.summary.frames, 0);
        log.verify().unwrap();
    }

    #[test]
    fn test_full_run_completes() {
        let log = run_scripted(&level(), &alternating(200)).unwrap();
        assert_eq!(log.events.last().unwrap().kind, GameEventKind::LevelComplete);
        assert!(log.summary.frames < 200);
        assert!(log.summary.score + log.summary.collisions > 0);
        assert_eq!(log.summary.above_critical_frames, log.above_critical.iter().filter(|&&a| a).count());
        log.verify().unwrap();
    }

    #[test]
    fn test_replay_is_identical() {
        let a = run_scripted(&level(), &alternating(200)).unwrap();
        let b = run_scripted(&level(), &alternating(200)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn test_tampered_summary_detected() {
        let mut log = run_scripted(&level(), &alternating(200)).unwrap();
        log.summary.score += 1;
        assert!(matches!(log.verify(), Err(GameError::Integrity { .. })));
        let mut log = run_scripted(&level(), &alternating(200)).unwrap();
        log.above_critical.pop();
        assert!(log.verify().is_err());
    }
}
