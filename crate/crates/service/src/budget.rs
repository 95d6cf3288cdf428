//! Startup measurement of the per-frame cost of detect, pipeline and game
//! step for every algorithm, compared with the frame duration.

use std::hint::black_box;
use std::time::Instant;

use pitchgate::detectors::{AlgorithmId, Detector, DetectorConfig};
use pitchgate::game::{spawn_level, LevelConfig};
use pitchgate::pipeline::{Pipeline, PipelineConfig};
use pitchgate::signal::{synth_sine, AudioFrame};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmBudget {
    pub algorithm: AlgorithmId,
    pub mean_ms: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub buffer_size: usize,
    pub sample_rate: u32,
    pub frame_duration_ms: f64,
    pub per_algorithm: Vec<AlgorithmBudget>,
}

impl BudgetReport {
    pub fn over_budget(&self) -> Vec<AlgorithmId> {
        self.per_algorithm
            .iter()
            .filter(|a| !a.within_budget)
            .map(|a| a.algorithm)
            .collect()
    }
}

/// Times `iterations` frames per algorithm after one warm-up frame. The
/// input is a 220 Hz tone at half scale.
pub fn measure_budget(
    buffer_size: usize,
    sample_rate: u32,
    detector: &DetectorConfig,
    pipeline: &PipelineConfig,
    level: &LevelConfig,
    iterations: usize,
) -> Result<BudgetReport, ServiceError> {
    if iterations == 0 {
        return Err(ServiceError::Config("budget iterations must be positive".into()));
    }
    let tone = synth_sine(57.0, buffer_size as f64 / sample_rate as f64 + 0.01, sample_rate, 0.5)?;
    let frame = AudioFrame::new(tone.samples()[..buffer_size].to_vec(), sample_rate, 0)?;
    let frame_duration_ms = frame.duration_ms();
    let dt = frame_duration_ms / 1000.0;
    let fitted = detector.fitted_to(buffer_size, sample_rate);

    let mut per_algorithm = Vec::with_capacity(AlgorithmId::ALL.len());
    for algorithm in AlgorithmId::ALL {
        let mut det = Detector::new(algorithm, fitted);
        let mut pipe = Pipeline::new(*pipeline)?;
        let mut game = spawn_level(level)?;
        let mut run = || -> Result<(), ServiceError> {
            let result = det.detect(black_box(&frame))?;
            let (_, signal) = pipe.process(&result, &frame);
            black_box(game.step(&signal, dt));
            Ok(())
        };
        run()?;
        let start = Instant::now();
        for _ in 0..iterations {
            run()?;
        }
        let mean_ms = start.elapsed().as_secs_f64() * 1000.0 / iterations as f64;
        per_algorithm.push(AlgorithmBudget {
            algorithm,
            mean_ms,
            within_budget: mean_ms <= frame_duration_ms,
        });
    }
    Ok(BudgetReport {
        buffer_size,
        sample_rate,
        frame_duration_ms,
        per_algorithm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_report_covers_every_algorithm() {
        let r = measure_budget(
            2048,
            44_100,
            &DetectorConfig::default(),
            &PipelineConfig::default(),
            &LevelConfig::default(),
            2,
        )
        .unwrap();
        assert_eq!(r.per_algorithm.len(), 7);
        assert!((r.frame_duration_ms - 2048.0 / 44.1).abs() < 1e-9);
        assert!(r.per_algorithm.iter().all(|a| a.mean_ms > 0.0));
        for a in &r.per_algorithm {
            assert_eq!(a.within_budget, a.mean_ms <= r.frame_duration_ms);
        }
    }

    #[test]
    fn test_zero_iterations_rejected() {
        let err = measure_budget(
            4096,
            44_100,
            &DetectorConfig::default(),
            &PipelineConfig::default(),
            &LevelConfig::default(),
            0,
        );
        assert!(matches!(err, Err(ServiceError::Config(_))));
    }
}
