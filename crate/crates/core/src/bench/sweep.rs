use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{median, BenchError};
use crate::detectors::{AlgorithmId, Detector, DetectorConfig, DetectorResult};
use crate::signal::{mel_from_freq, midi_from_freq, synth_sine, AudioStream, SignalError, DEFAULT_SAMPLE_RATE};

/// Accuracy of one algorithm at one buffer size on one synthesized note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub true_midi: f64,
    pub estimated_midi: Option<f64>,
    pub abs_error_midi: Option<f64>,
    pub pitched: bool,
}

impl BenchmarkRecord {
    fn new(algorithm: AlgorithmId, buffer_size: usize, true_midi: f64, estimated: Option<f64>) -> Self {
        Self {
            algorithm,
            buffer_size,
            true_midi,
            estimated_midi: estimated,
            abs_error_midi: estimated.map(|e| (e - true_midi).abs()),
            pitched: estimated.is_some(),
        }
    }
}

/// A requested triple that could not be run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepWarning {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub true_midi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub records: Vec<BenchmarkRecord>,
    pub warnings: Vec<SweepWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub amplitude: f64,
    /// When set, pitched frames above this many mel count as unpitched.
    pub mel_ceiling: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            duration_s: 1.0,
            amplitude: 0.8,
            mel_ceiling: None,
        }
    }
}

/// Integer notes 36 through 84.
pub fn default_midi_range() -> Vec<f64> {
    (36..=84).map(f64::from).collect()
}

/// Per-frame results of `detector` over non-overlapping `buffer_size`
/// frames of `stream`, with the optional mel ceiling applied.
pub fn note_results(
    detector: &mut Detector,
    stream: &AudioStream,
    buffer_size: usize,
    mel_ceiling: Option<f64>,
) -> Result<Vec<DetectorResult>, BenchError> {
    stream
        .frames(buffer_size, buffer_size)?
        .map(|frame| {
            let r = detector.detect(&frame)?;
            Ok(match (r.frequency_hz(), mel_ceiling) {
                (Some(f), Some(ceiling)) if mel_from_freq(f)? > ceiling => DetectorResult::unpitched(r.clarity()),
                _ => r,
            })
        })
        .collect()
}

/// Runs every (algorithm, buffer, note) triple. Each note is synthesized
/// once, cut into non-overlapping frames, and scored by the median MIDI
/// estimate over its pitched frames. Detector bands are fitted to each
/// buffer size. Output order is algorithm, then buffer, then note, as
/// requested.
pub fn run_sine_sweep(
    algorithms: &[AlgorithmId],
    buffer_sizes: &[usize],
    midis: &[f64],
    cfg: &DetectorConfig,
    opts: &SweepOptions,
) -> Result<SweepReport, BenchError> {
    if let Some(&b) = buffer_sizes.iter().find(|&&b| b == 0) {
        return Err(BenchError::Precondition(format!("buffer size {b} must be positive")));
    }
    cfg.validate(opts.sample_rate)?;

    let mut streams: Vec<Result<AudioStream, String>> = Vec::with_capacity(midis.len());
    for &m in midis {
        match synth_sine(m, opts.duration_s, opts.sample_rate, opts.amplitude) {
            Ok(s) => streams.push(Ok(s)),
            Err(e @ SignalError::Nyquist { .. }) => streams.push(Err(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }

    let jobs: Vec<(AlgorithmId, usize)> = algorithms
        .iter()
        .flat_map(|&a| buffer_sizes.iter().map(move |&b| (a, b)))
        .collect();

    let parts: Vec<Result<SweepReport, BenchError>> = jobs
        .par_iter()
        .map(|&(alg, buffer)| {
            let mut detector = Detector::new(alg, cfg.fitted_to(buffer, opts.sample_rate));
            let mut part = SweepReport::default();
            for (&midi, stream) in midis.iter().zip(&streams) {
                let stream = match stream {
                    Ok(s) => s,
                    Err(reason) => {
                        part.warnings.push(SweepWarning {
                            algorithm: alg,
                            buffer_size: buffer,
                            true_midi: midi,
                            reason: reason.clone(),
                        });
                        continue;
                    }
                };
                let estimates = note_results(&mut detector, stream, buffer, opts.mel_ceiling)?
                    .iter()
                    .filter_map(|r| r.frequency_hz())
                    .map(midi_from_freq)
                    .collect::<Result<Vec<_>, _>>()?;
                part.records
                    .push(BenchmarkRecord::new(alg, buffer, midi, median(&estimates)));
            }
            Ok(part)
        })
        .collect();

    let mut report = SweepReport::default();
    for part in parts {
        let part = part?;
        report.records.extend(part.records);
        report.warnings.extend(part.warnings);
    }
    Ok(report)
}
