use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::detectors::{AlgorithmId, Detector, DetectorConfig};
use crate::signal::{synth_sine, AudioFrame, DEFAULT_SAMPLE_RATE};

pub const MIN_TIMING_ITERATIONS: usize = 30;
pub const MIN_WARMUP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub mean_ns_per_buffer: f64,
    pub frames_measured: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingOptions {
    pub iterations: usize,
    pub warmup: usize,
    pub sample_rate: u32,
}

impl Default for TimingOptions {
    fn default() -> Self {
        Self {
            iterations: MIN_TIMING_ITERATIONS,
            warmup: MIN_WARMUP,
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

/// Mean wall-clock time per `detect` call on a 440 Hz sine, on the calling
/// thread. One detector band, fitted to the smallest buffer, is shared by
/// every buffer size so that only the frame length varies.
pub fn run_timing(
    algorithms: &[AlgorithmId],
    buffer_sizes: &[usize],
    cfg: &DetectorConfig,
    opts: &TimingOptions,
) -> Result<Vec<TimingRecord>, BenchError> {
    if opts.iterations < MIN_TIMING_ITERATIONS {
        return Err(BenchError::Precondition(format!(
            "at least {MIN_TIMING_ITERATIONS} measured iterations are required, got {}",
            opts.iterations
        )));
    }
    if opts.warmup < MIN_WARMUP {
        return Err(BenchError::Precondition(format!(
            "at least {MIN_WARMUP} warmup iterations are required, got {}",
            opts.warmup
        )));
    }
    let (Some(&smallest), Some(&largest)) = (buffer_sizes.iter().min(), buffer_sizes.iter().max()) else {
        return Ok(Vec::new());
    };
    if smallest == 0 {
        return Err(BenchError::Precondition("buffer sizes must be positive".into()));
    }
    let cfg = cfg.fitted_to(smallest, opts.sample_rate);
    cfg.validate(opts.sample_rate)?;

    let duration = largest as f64 / opts.sample_rate as f64;
    let tone = synth_sine(69.0, duration, opts.sample_rate, 0.8)?;

    let mut records = Vec::with_capacity(algorithms.len() * buffer_sizes.len());
    for &alg in algorithms {
        let mut detector = Detector::new(alg, cfg);
        for &buffer in buffer_sizes {
            let frame = AudioFrame::new(tone.samples()[..buffer].to_vec(), opts.sample_rate, 0)?;
            for _ in 0..opts.warmup {
                black_box(detector.detect(black_box(&frame))?);
            }
            let start = Instant::now();
            for _ in 0..opts.iterations {
                black_box(detector.detect(black_box(&frame))?);
            }
            let elapsed = start.elapsed().as_nanos() as f64;
            records.push(TimingRecord {
                algorithm: alg,
                buffer_size: buffer,
                mean_ns_per_buffer: elapsed / opts.iterations as f64,
                frames_measured: opts.iterations,
            });
        }
    }
    Ok(records)
}

/// `t(large) / t(small)` for one algorithm, if both were measured.
pub fn timing_ratio(records: &[TimingRecord], algorithm: AlgorithmId, small: usize, large: usize) -> Option<f64> {
    let find = |b| {
        records
            .iter()
            .find(|r| r.algorithm == algorithm && r.buffer_size == b)
            .map(|r| r.mean_ns_per_buffer)
    };
    Some(find(large)? / find(small)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_rejects_too_few_iterations() {
        for iterations in [0, 29] {
            let opts = TimingOptions {
                iterations,
                ..Default::default()
            };
            assert!(matches!(
                run_timing(&[AlgorithmId::Yin], &[1024], &DetectorConfig::default(), &opts),
                Err(BenchError::Precondition(_))
            ));
        }
        let opts = TimingOptions {
            warmup: 1,
            ..Default::default()
        };
        assert!(run_timing(&[AlgorithmId::Yin], &[1024], &DetectorConfig::default(), &opts).is_err());
    }

    #[test]
    fn test_one_record_per_pair() {
        let algs = [AlgorithmId::FftPeak, AlgorithmId::DynamicWavelet];
        let recs = run_timing(&algs, &[1024, 2048], &DetectorConfig::default(), &TimingOptions::default()).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.frames_measured >= 30 && r.mean_ns_per_buffer > 0.0));
        assert!(timing_ratio(&recs, AlgorithmId::FftPeak, 1024, 2048).is_some());
        assert!(timing_ratio(&recs, AlgorithmId::Yin, 1024, 2048).is_none());
    }

    #[test]
    fn test_mpm_grows_with_buffer() {
        let recs = run_timing(
            &[AlgorithmId::Mpm],
            &[1024, 2048, 4096],
            &DetectorConfig::default(),
            &TimingOptions::default(),
        )
        .unwrap();
        assert!(recs.windows(2).all(|w| w[1].mean_ns_per_buffer > w[0].mean_ns_per_buffer));
    }
}
