//! Test-signal generators: clean sines for accuracy sweeps and a seeded
//! degraded-voice model standing in for patient recordings.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{freq_from_midi, AudioStream, SignalError};

/// Length of one voiced/silent cycle of the dysphonic model.
const BURST_PERIOD_S: f64 = 0.5;
/// Peak level of the voiced component before shimmer and noise.
const VOICE_GAIN: f64 = 0.5;
/// Rosenberg pulse opening and closing fractions of the glottal cycle.
const OPEN_FRACTION: f64 = 0.4;
const CLOSE_FRACTION: f64 = 0.16;

/// `amplitude * sin(2π f i / sample_rate)` for `round(duration_s * sample_rate)` samples.
pub fn synth_sine(
    midi: f64,
    duration_s: f64,
    sample_rate: u32,
    amplitude: f64,
) -> Result<AudioStream, SignalError> {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(SignalError::Parameter {
            name: "amplitude",
            reason: format!("must be in (0, 1], got {amplitude}"),
        });
    }
    let len = sample_count(duration_s, sample_rate)?;
    let freq = checked_freq(midi, sample_rate)?;
    let step = 2.0 * PI * freq / sample_rate as f64;
    let samples = (0..len).map(|i| amplitude * (step * i as f64).sin()).collect();
    AudioStream::new(samples, sample_rate)
}

/// Uniform white noise in `[-amplitude, amplitude]`.
pub fn white_noise(
    amplitude: f64,
    duration_s: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioStream, SignalError> {
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(SignalError::Parameter {
            name: "amplitude",
            reason: format!("must be in [0, 1], got {amplitude}"),
        });
    }
    let len = sample_count(duration_s, sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..len)
        .map(|_| amplitude * rng.random_range(-1.0..=1.0))
        .collect();
    AudioStream::new(samples, sample_rate)
}

/// Parameters of the degraded-voice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DysphonicParams {
    pub base_midi: f64,
    pub duration_s: f64,
    pub sample_rate: u32,
    /// Per-cycle period perturbation, percent of the nominal period.
    pub jitter_pct: f64,
    /// Per-cycle amplitude perturbation, percent of the nominal amplitude.
    pub shimmer_pct: f64,
    /// Standard deviation of the additive breath noise, full-scale units.
    pub breath_noise_level: f64,
    /// Fraction of the duration covered by voiced bursts.
    pub voiced_duty_cycle: f64,
    pub seed: u64,
}

impl Default for DysphonicParams {
    fn default() -> Self {
        Self {
            base_midi: 50.0,
            duration_s: 2.0,
            sample_rate: super::DEFAULT_SAMPLE_RATE,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            breath_noise_level: 0.0,
            voiced_duty_cycle: 1.0,
            seed: 0,
        }
    }
}

impl DysphonicParams {
    pub fn validate(&self) -> Result<(), SignalError> {
        for (name, pct) in [("jitter_pct", self.jitter_pct), ("shimmer_pct", self.shimmer_pct)] {
            if !(0.0..=50.0).contains(&pct) {
                return Err(SignalError::Parameter {
                    name,
                    reason: format!("must be in [0, 50], got {pct}"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.breath_noise_level) {
            return Err(SignalError::Parameter {
                name: "breath_noise_level",
                reason: format!("must be in [0, 1], got {}", self.breath_noise_level),
            });
        }
        if !(self.voiced_duty_cycle > 0.0 && self.voiced_duty_cycle <= 1.0) {
            return Err(SignalError::Parameter {
                name: "voiced_duty_cycle",
                reason: format!("must be in (0, 1], got {}", self.voiced_duty_cycle),
            });
        }
        sample_count(self.duration_s, self.sample_rate)?;
        checked_freq(self.base_midi, self.sample_rate)?;
        Ok(())
    }
}

/// Pulse-train-plus-noise voice: a Rosenberg glottal pulse per cycle with
/// jittered period and shimmered amplitude, Gaussian breath noise, and
/// silence outside voiced bursts. Deterministic for a fixed seed.
pub fn synth_dysphonic(params: &DysphonicParams) -> Result<AudioStream, SignalError> {
    params.validate()?;
    let len = sample_count(params.duration_s, params.sample_rate)?;
    let nominal_period = params.sample_rate as f64 / checked_freq(params.base_midi, params.sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let voiced = voiced_mask(len, params.sample_rate, params.voiced_duty_cycle, &mut rng);

    let jitter = params.jitter_pct / 100.0;
    let shimmer = params.shimmer_pct / 100.0;
    let noise = Normal::new(0.0, params.breath_noise_level).map_err(|e| SignalError::Parameter {
        name: "breath_noise_level",
        reason: e.to_string(),
    })?;

    let draw_cycle = |rng: &mut ChaCha8Rng| {
        let period = nominal_period * (1.0 + jitter * rng.random_range(-1.0..=1.0));
        let gain = VOICE_GAIN * (1.0 + shimmer * rng.random_range(-1.0..=1.0));
        (period, gain)
    };

    let mut cycle_start = 0.0;
    let (mut period, mut gain) = draw_cycle(&mut rng);
    let mut samples = Vec::with_capacity(len);
    for (i, &is_voiced) in voiced.iter().enumerate() {
        let t = i as f64;
        while t >= cycle_start + period {
            cycle_start += period;
            (period, gain) = draw_cycle(&mut rng);
        }
        let breath = noise.sample(&mut rng);
        let value = if is_voiced {
            (gain * glottal_pulse((t - cycle_start) / period) + breath).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        samples.push(value);
    }
    AudioStream::new(samples, params.sample_rate)
}

/// Zero-mean Rosenberg pulse over one cycle (`phase` in `[0, 1)`), peak magnitude 1.
fn glottal_pulse(phase: f64) -> f64 {
    let mean = 0.5 * OPEN_FRACTION + 2.0 * CLOSE_FRACTION / PI;
    let peak = 1.0 - mean;
    let flow = if phase < OPEN_FRACTION {
        0.5 * (1.0 - (PI * phase / OPEN_FRACTION).cos())
    } else if phase < OPEN_FRACTION + CLOSE_FRACTION {
        (PI * (phase - OPEN_FRACTION) / (2.0 * CLOSE_FRACTION)).cos()
    } else {
        0.0
    };
    (flow - mean) / peak
}

fn voiced_mask(len: usize, sample_rate: u32, duty: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let segment = ((BURST_PERIOD_S * sample_rate as f64).round() as usize).max(1);
    let mut mask = vec![false; len];
    let mut start = 0;
    while start < len {
        let seg_len = segment.min(len - start);
        let voiced_len = ((duty * seg_len as f64).round() as usize).min(seg_len);
        let slack = seg_len - voiced_len;
        let offset = if slack > 0 { rng.random_range(0..=slack) } else { 0 };
        mask[start + offset..start + offset + voiced_len].fill(true);
        start += seg_len;
    }
    mask
}

fn sample_count(duration_s: f64, sample_rate: u32) -> Result<usize, SignalError> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(SignalError::Parameter {
            name: "duration_s",
            reason: format!("must be positive, got {duration_s}"),
        });
    }
    if sample_rate == 0 {
        return Err(SignalError::Parameter {
            name: "sample_rate",
            reason: "must be positive".into(),
        });
    }
    Ok((duration_s * sample_rate as f64).round() as usize)
}

fn checked_freq(midi: f64, sample_rate: u32) -> Result<f64, SignalError> {
    let freq = freq_from_midi(midi)?;
    let nyquist = sample_rate as f64 / 2.0;
    if freq >= nyquist {
        return Err(SignalError::Nyquist {
            freq_hz: freq,
            nyquist_hz: nyquist,
        });
    }
    Ok(freq)
}
