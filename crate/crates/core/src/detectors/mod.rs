//! Seven pitch estimators behind one frame-in, result-out contract.
//!
//! | id | method |
//! |----|--------|
//! | `classic_autocorrelator`  | raw autocorrelation, integer lag, always pitched |
//! | `advanced_autocorrelator` | normalized autocorrelation, sub-lag refinement, octave check |
//! | `dynamic_wavelet`         | level-wise Haar halving and max/min crossing distances |
//! | `yin`                     | cumulative-mean-normalized difference function |
//! | `fast_yin`                | `yin` with the difference function computed spectrally |
//! | `mpm`                     | McLeod normalized square difference, direct O(n²) |
//! | `fft_peak`                | rectangular-window magnitude spectrum argmax |
//!
//! Every detector searches the band `[min_freq_hz, max_freq_hz]` of its
//! [`DetectorConfig`] and never reports a frequency outside it.

mod autocorr;
mod fft_peak;
mod interp;
mod mpm;
mod wavelet;
mod yin;

pub use interp::parabolic_interpolate;
pub use mpm::nsdf;
pub use yin::{cmndf, difference_direct};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::AudioFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    ClassicAutocorrelator,
    AdvancedAutocorrelator,
    DynamicWavelet,
    Yin,
    FastYin,
    Mpm,
    FftPeak,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 7] = [
        AlgorithmId::ClassicAutocorrelator,
        AlgorithmId::AdvancedAutocorrelator,
        AlgorithmId::DynamicWavelet,
        AlgorithmId::Yin,
        AlgorithmId::FastYin,
        AlgorithmId::Mpm,
        AlgorithmId::FftPeak,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::ClassicAutocorrelator => "classic_autocorrelator",
            AlgorithmId::AdvancedAutocorrelator => "advanced_autocorrelator",
            AlgorithmId::DynamicWavelet => "dynamic_wavelet",
            AlgorithmId::Yin => "yin",
            AlgorithmId::FastYin => "fast_yin",
            AlgorithmId::Mpm => "mpm",
            AlgorithmId::FftPeak => "fft_peak",
        }
    }

    /// Algorithms that report a pitch only when a confidence test passes.
    pub fn is_gated(self) -> bool {
        matches!(self, AlgorithmId::Yin | AlgorithmId::FastYin | AlgorithmId::Mpm)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace('-', "_");
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == wanted)
            .ok_or_else(|| DetectError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("frame of {len} samples is too short: at least {min_len} are needed for {min_freq_hz} Hz at {sample_rate} Hz")]
    FrameTooShort {
        len: usize,
        min_len: usize,
        min_freq_hz: f64,
        sample_rate: u32,
    },
    #[error("invalid detector config: {0}")]
    Config(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
}

/// One detector's verdict on one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorResult {
    frequency_hz: Option<f64>,
    clarity: f64,
    pitched: bool,
}

impl DetectorResult {
    pub fn pitched(frequency_hz: f64, clarity: f64) -> Self {
        Self {
            frequency_hz: Some(frequency_hz),
            clarity: clarity.clamp(0.0, 1.0),
            pitched: true,
        }
    }

    pub fn unpitched(clarity: f64) -> Self {
        Self {
            frequency_hz: None,
            clarity: if clarity.is_finite() { clarity.clamp(0.0, 1.0) } else { 0.0 },
            pitched: false,
        }
    }

    pub fn frequency_hz(&self) -> Option<f64> {
        self.frequency_hz
    }

    pub fn clarity(&self) -> f64 {
        self.clarity
    }

    pub fn is_pitched(&self) -> bool {
        self.pitched
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub min_freq_hz: f64,
    pub max_freq_hz: f64,
    pub yin_threshold: f64,
    pub mpm_cutoff: f64,
    pub mpm_clarity_min: f64,
    pub acf_clarity_min: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            min_freq_hz: 40.0,
            max_freq_hz: 2000.0,
            yin_threshold: 0.15,
            mpm_cutoff: 0.93,
            mpm_clarity_min: 0.80,
            acf_clarity_min: 0.60,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<(), DetectError> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.min_freq_hz > 0.0
            && self.min_freq_hz < self.max_freq_hz
            && self.max_freq_hz < nyquist)
        {
            return Err(DetectError::Config(format!(
                "band must satisfy 0 < min ({}) < max ({}) < nyquist ({nyquist})",
                self.min_freq_hz, self.max_freq_hz
            )));
        }
        for (name, v) in [
            ("yin_threshold", self.yin_threshold),
            ("mpm_cutoff", self.mpm_cutoff),
            ("mpm_clarity_min", self.mpm_clarity_min),
            ("acf_clarity_min", self.acf_clarity_min),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(DetectError::Config(format!("{name} must be in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    /// Raises `min_freq_hz` just enough that two periods of the lowest
    /// searched pitch fit in `buffer_size` samples.
    pub fn fitted_to(&self, buffer_size: usize, sample_rate: u32) -> Self {
        let floor = 2.0 * sample_rate as f64 / buffer_size as f64;
        Self {
            min_freq_hz: self.min_freq_hz.max(floor),
            ..*self
        }
    }

    /// Shortest frame accepted at `sample_rate`.
    pub fn min_frame_len(&self, sample_rate: u32) -> usize {
        (2.0 * sample_rate as f64 / self.min_freq_hz - 1e-9).ceil() as usize
    }
}

/// Lag range in samples corresponding to the frequency band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Band {
    pub min_freq_hz: f64,
    pub max_freq_hz: f64,
    pub sample_rate: f64,
    /// Shortest lag, `ceil(sr / max_freq)`.
    pub lag_lo: usize,
    /// Longest lag, `floor(sr / min_freq)`.
    pub lag_hi: usize,
}

impl Band {
    fn new(cfg: &DetectorConfig, sample_rate: u32) -> Self {
        let sr = sample_rate as f64;
        let lag_lo = ((sr / cfg.max_freq_hz).ceil() as usize).max(2);
        let lag_hi = ((sr / cfg.min_freq_hz + 1e-9).floor() as usize).max(lag_lo);
        Self {
            min_freq_hz: cfg.min_freq_hz,
            max_freq_hz: cfg.max_freq_hz,
            sample_rate: sr,
            lag_lo,
            lag_hi,
        }
    }

    /// Converts a (fractional) lag to a frequency, clamping the lag into the band.
    pub fn freq_at_lag(&self, lag: f64) -> f64 {
        self.sample_rate / lag.clamp(self.lag_lo as f64, self.lag_hi as f64)
    }

    pub fn contains(&self, freq_hz: f64) -> bool {
        freq_hz >= self.min_freq_hz && freq_hz <= self.max_freq_hz
    }
}

/// Per-algorithm estimator with its own scratch space.
pub(crate) trait Estimator: Send {
    fn estimate(&mut self, samples: &[f64], band: &Band, cfg: &DetectorConfig) -> DetectorResult;
}

/// A reusable detector instance. Holds scratch buffers and FFT plans, so
/// one instance serves one thread; construct one per worker.
pub struct Detector {
    algorithm: AlgorithmId,
    config: DetectorConfig,
    estimator: Box<dyn Estimator>,
}

impl fmt::Debug for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Detector")
            .field("algorithm", &self.algorithm)
            .field("config", &self.config)
            .finish()
    }
}

impl Detector {
    pub fn new(algorithm: AlgorithmId, config: DetectorConfig) -> Self {
        let estimator: Box<dyn Estimator> = match algorithm {
            AlgorithmId::ClassicAutocorrelator => Box::new(autocorr::Classic),
            AlgorithmId::AdvancedAutocorrelator => Box::new(autocorr::Advanced::default()),
            AlgorithmId::DynamicWavelet => Box::new(wavelet::DynamicWavelet::default()),
            AlgorithmId::Yin => Box::new(yin::Yin),
            AlgorithmId::FastYin => Box::new(yin::FastYin::default()),
            AlgorithmId::Mpm => Box::new(mpm::Mpm),
            AlgorithmId::FftPeak => Box::new(fft_peak::FftPeak::default()),
        };
        Self {
            algorithm,
            config,
            estimator,
        }
    }

    pub fn algorithm(&self) -> AlgorithmId {
        self.algorithm
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn detect(&mut self, frame: &AudioFrame) -> Result<DetectorResult, DetectError> {
        let sr = frame.sample_rate();
        self.config.validate(sr)?;
        let min_len = self.config.min_frame_len(sr);
        if frame.len() < min_len {
            return Err(DetectError::FrameTooShort {
                len: frame.len(),
                min_len,
                min_freq_hz: self.config.min_freq_hz,
                sample_rate: sr,
            });
        }
        let band = Band::new(&self.config, sr);
        let result = self.estimator.estimate(frame.samples(), &band, &self.config);
        match result.frequency_hz {
            Some(f) if !band.contains(f) => Ok(DetectorResult::unpitched(result.clarity)),
            _ => Ok(result),
        }
    }
}

/// One-shot detection with a fresh detector instance.
pub fn detect(
    algorithm: AlgorithmId,
    frame: &AudioFrame,
    config: &DetectorConfig,
) -> Result<DetectorResult, DetectError> {
    Detector::new(algorithm, *config).detect(frame)
}
