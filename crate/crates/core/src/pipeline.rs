//! From detector verdicts to monitor records and the game's control signal.
//!
//! A frame's [`DetectorResult`] becomes a [`PitchSample`] (the monitor row),
//! passes the mel-band filter, and is compared against the effective
//! critical pitch. Loudness is carried along for display but never decides
//! anything.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors::DetectorResult;
use crate::signal::{mel_from_freq, midi_from_freq, note_name, rms_amplitude, AudioFrame};

pub const DEFAULT_MEL_CEILING: f64 = 400.0;
pub const MAX_SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
}

/// One monitor row. Unpitched rows keep amplitude, position and duration
/// and leave every pitch field empty (`null` on the wire).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchSample {
    pub frequency_hz: Option<f64>,
    pub mel: Option<f64>,
    pub note_name: Option<String>,
    pub midi_number: Option<f64>,
    pub amplitude_rms: f64,
    pub sample_index: u64,
    pub duration_ms: f64,
    pub pitched: bool,
}

impl PitchSample {
    pub fn unpitched(amplitude_rms: f64, sample_index: u64, duration_ms: f64) -> Self {
        Self {
            frequency_hz: None,
            mel: None,
            note_name: None,
            midi_number: None,
            amplitude_rms,
            sample_index,
            duration_ms,
            pitched: false,
        }
    }

    /// A pitched row with every derived field computed from `frequency_hz`.
    /// Falls back to unpitched for a non-positive or non-finite frequency.
    pub fn pitched(frequency_hz: f64, amplitude_rms: f64, sample_index: u64, duration_ms: f64) -> Self {
        match (mel_from_freq(frequency_hz), midi_from_freq(frequency_hz)) {
            (Ok(mel), Ok(midi)) if frequency_hz > 0.0 => Self {
                frequency_hz: Some(frequency_hz),
                mel: Some(mel),
                note_name: Some(note_name(midi)),
                midi_number: Some(midi),
                amplitude_rms,
                sample_index,
                duration_ms,
                pitched: true,
            },
            _ => Self::unpitched(amplitude_rms, sample_index, duration_ms),
        }
    }

    /// The same row with its pitch fields cleared.
    pub fn demoted(&self) -> Self {
        Self::unpitched(self.amplitude_rms, self.sample_index, self.duration_ms)
    }

    /// Checks the field-presence and derived-value invariants.
    pub fn is_consistent(&self) -> bool {
        if !(self.amplitude_rms >= 0.0 && self.duration_ms > 0.0) {
            return false;
        }
        match (self.pitched, self.frequency_hz) {
            (false, None) => {
                self.mel.is_none() && self.note_name.is_none() && self.midi_number.is_none()
            }
            (true, Some(f)) => {
                let expected = PitchSample::pitched(f, self.amplitude_rms, self.sample_index, self.duration_ms);
                expected.pitched
                    && expected.mel == self.mel
                    && expected.midi_number == self.midi_number
                    && expected.note_name == self.note_name
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mel_ceiling: f64,
    pub critical_mel: f64,
    pub difficulty_divisor: f64,
    pub smoothing_window: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mel_ceiling: DEFAULT_MEL_CEILING,
            critical_mel: DEFAULT_MEL_CEILING,
            difficulty_divisor: 1.0,
            smoothing_window: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::Config(m));
        if !(self.mel_ceiling.is_finite() && self.mel_ceiling > 0.0) {
            return err(format!("mel_ceiling must be positive, got {}", self.mel_ceiling));
        }
        if !(self.critical_mel.is_finite() && self.critical_mel > 0.0) {
            return err(format!("critical_mel must be positive, got {}", self.critical_mel));
        }
        if !(self.difficulty_divisor.is_finite() && self.difficulty_divisor >= 1.0) {
            return err(format!(
                "difficulty_divisor must be at least 1, got {}",
                self.difficulty_divisor
            ));
        }
        if !(1..=MAX_SMOOTHING_WINDOW).contains(&self.smoothing_window) {
            return err(format!(
                "smoothing_window must be in 1..={MAX_SMOOTHING_WINDOW}, got {}",
                self.smoothing_window
            ));
        }
        let effective = effective_critical(self);
        if effective > self.mel_ceiling {
            return err(format!(
                "effective critical {effective} mel is above the {} mel ceiling",
                self.mel_ceiling
            ));
        }
        Ok(())
    }
}

/// The mel value a pitched sample must reach for the avatar to rise.
pub fn effective_critical(cfg: &PipelineConfig) -> f64 {
    cfg.critical_mel / cfg.difficulty_divisor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub above_critical: bool,
    pub effective_critical_mel: f64,
    pub source: PitchSample,
}

impl ControlSignal {
    /// A signal with no audio behind it, for scripted replays. The source
    /// is an unpitched row that only carries the step duration.
    pub fn scripted(above_critical: bool, effective_critical_mel: f64, duration_ms: f64) -> Self {
        Self {
            above_critical,
            effective_critical_mel,
            source: PitchSample::unpitched(0.0, 0, duration_ms),
        }
    }
}

pub fn to_pitch_sample(result: &DetectorResult, frame: &AudioFrame) -> PitchSample {
    let amplitude = rms_amplitude(frame);
    let duration = frame.duration_ms();
    match result.frequency_hz() {
        Some(f) if result.is_pitched() => PitchSample::pitched(f, amplitude, frame.start_index(), duration),
        _ => PitchSample::unpitched(amplitude, frame.start_index(), duration),
    }
}

/// Demotes pitched samples above `ceiling` mel; everything else passes.
pub fn mel_band_filter(sample: &PitchSample, ceiling: f64) -> PitchSample {
    match sample.mel {
        Some(mel) if sample.pitched && mel > ceiling => sample.demoted(),
        _ => sample.clone(),
    }
}

/// Unsmoothed threshold decision.
pub fn control(sample: &PitchSample, cfg: &PipelineConfig) -> ControlSignal {
    let critical = effective_critical(cfg);
    ControlSignal {
        above_critical: threshold(sample, sample.mel, critical),
        effective_critical_mel: critical,
        source: sample.clone(),
    }
}

fn threshold(sample: &PitchSample, mel: Option<f64>, critical: f64) -> bool {
    sample.pitched && mel.is_some_and(|m| m >= critical)
}

/// The stateful per-session stage: sample construction, filtering, and a
/// median over the last `smoothing_window` pitched mel values.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    recent: VecDeque<f64>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self {
            config,
            recent: VecDeque::with_capacity(MAX_SMOOTHING_WINDOW),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Replaces the config; the smoothing history is kept unless the window
    /// shrinks below it.
    pub fn set_config(&mut self, config: PipelineConfig) -> Result<(), PipelineError> {
        config.validate()?;
        while self.recent.len() > config.smoothing_window {
            self.recent.pop_front();
        }
        self.config = config;
        Ok(())
    }

    pub fn process(&mut self, result: &DetectorResult, frame: &AudioFrame) -> (PitchSample, ControlSignal) {
        let sample = mel_band_filter(&to_pitch_sample(result, frame), self.config.mel_ceiling);
        let signal = self.control(&sample);
        (sample, signal)
    }

    pub fn control(&mut self, sample: &PitchSample) -> ControlSignal {
        let critical = effective_critical(&self.config);
        let mel = match sample.mel {
            Some(m) if sample.pitched => {
                if self.recent.len() == self.config.smoothing_window {
                    self.recent.pop_front();
                }
                self.recent.push_back(m);
                median(self.recent.make_contiguous())
            }
            _ => None,
        };
        ControlSignal {
            above_critical: threshold(sample, mel, critical),
            effective_critical_mel: critical,
            source: sample.clone(),
        }
    }
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}
