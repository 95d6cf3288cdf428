use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{note_results, BenchError};
use crate::detectors::{AlgorithmId, Detector, DetectorConfig};
use crate::signal::{midi_from_freq, AudioStream, DysphonicParams, SourceSpec};

/// How often one algorithm produced a pitch on one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub source: String,
    /// Frames with any signal energy; all-zero frames are counted apart.
    pub frames_total: usize,
    pub frames_silent: usize,
    pub frames_pitched: usize,
    pub detection_rate: f64,
    pub pitched_midi_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFailure {
    pub source: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VoiceReport {
    pub records: Vec<SensitivityRecord>,
    pub failures: Vec<SourceFailure>,
}

/// The seeded degraded-voice corpus: mild to severe breathiness, roughness
/// and intermittency around the male speaking range.
pub fn default_corpus() -> Vec<SourceSpec> {
    let voice = |base_midi, jitter_pct, shimmer_pct, breath_noise_level, voiced_duty_cycle, seed| {
        SourceSpec::Dysphonic(DysphonicParams {
            base_midi,
            duration_s: 4.0,
            jitter_pct,
            shimmer_pct,
            breath_noise_level,
            voiced_duty_cycle,
            seed,
            ..Default::default()
        })
    };
    vec![
        voice(52.0, 1.0, 5.0, 0.02, 0.9, 1),
        voice(48.0, 4.0, 20.0, 0.1, 0.6, 2),
        voice(55.0, 2.0, 10.0, 0.3, 0.2, 3),
        voice(45.0, 6.0, 30.0, 0.5, 0.3, 4),
        voice(57.0, 3.0, 15.0, 0.15, 0.1, 5),
        voice(50.0, 8.0, 25.0, 0.25, 0.5, 6),
    ]
}

/// Runs every algorithm over every source. A source that cannot be opened
/// or analysed becomes a [`SourceFailure`] and the run continues. Records
/// are ordered by source, then algorithm.
pub fn run_voice_bench(
    sources: &[SourceSpec],
    algorithms: &[AlgorithmId],
    buffer_size: usize,
    cfg: &DetectorConfig,
    mel_ceiling: Option<f64>,
) -> Result<VoiceReport, BenchError> {
    if buffer_size == 0 {
        return Err(BenchError::Precondition("buffer size must be positive".into()));
    }
    let per_source: Vec<Result<Vec<SensitivityRecord>, SourceFailure>> = sources
        .par_iter()
        .map(|spec| {
            let fail = |e: &dyn std::fmt::Display| SourceFailure {
                source: spec.to_string(),
                error: e.to_string(),
            };
            let stream = spec.open().map_err(|e| fail(&e))?;
            algorithms
                .par_iter()
                .map(|&alg| analyse(&stream, &spec.to_string(), alg, buffer_size, cfg, mel_ceiling))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fail(&e))
        })
        .collect();

    let mut report = VoiceReport::default();
    for r in per_source {
        match r {
            Ok(records) => report.records.extend(records),
            Err(f) => report.failures.push(f),
        }
    }
    Ok(report)
}

fn analyse(
    stream: &AudioStream,
    source: &str,
    algorithm: AlgorithmId,
    buffer_size: usize,
    cfg: &DetectorConfig,
    mel_ceiling: Option<f64>,
) -> Result<SensitivityRecord, BenchError> {
    let mut detector = Detector::new(algorithm, cfg.fitted_to(buffer_size, stream.sample_rate()));
    let results = note_results(&mut detector, stream, buffer_size, mel_ceiling)?;
    let silent: Vec<bool> = stream
        .frames(buffer_size, buffer_size)?
        .map(|f| f.energy() == 0.0)
        .collect();

    let mut pitched_midi_values = Vec::new();
    for (r, &is_silent) in results.iter().zip(&silent) {
        if let (Some(f), false) = (r.frequency_hz(), is_silent) {
            pitched_midi_values.push(midi_from_freq(f)?);
        }
    }
    let frames_silent = silent.iter().filter(|&&s| s).count();
    let frames_total = silent.len() - frames_silent;
    let frames_pitched = pitched_midi_values.len();
    Ok(SensitivityRecord {
        algorithm,
        buffer_size,
        source: source.to_string(),
        frames_total,
        frames_silent,
        frames_pitched,
        detection_rate: if frames_total == 0 {
            0.0
        } else {
            frames_pitched as f64 / frames_total as f64
        },
        pitched_midi_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(report: &VoiceReport, alg: AlgorithmId) -> f64 {
        report.records.iter().find(|r| r.algorithm == alg).unwrap().detection_rate
    }

    #[test]
    fn test_breathy_source_ordering() {
        let src: SourceSpec = "synth:midi=50,duration=3,jitter=2,shimmer=10,noise=0.3,duty=0.2,seed=11"
            .parse()
            .unwrap();
        let algs = [AlgorithmId::ClassicAutocorrelator, AlgorithmId::FftPeak, AlgorithmId::Yin];
        let r = run_voice_bench(&[src], &algs, 4096, &DetectorConfig::default(), None).unwrap();
        assert_eq!(r.records.len(), 3);
        assert_eq!(rate(&r, AlgorithmId::ClassicAutocorrelator), 1.0);
        assert_eq!(rate(&r, AlgorithmId::FftPeak), 1.0);
        assert!(rate(&r, AlgorithmId::Yin) < 1.0);
        for rec in &r.records {
            assert!((0.0..=1.0).contains(&rec.detection_rate));
            assert_eq!(rec.pitched_midi_values.len(), rec.frames_pitched);
            assert!(rec.frames_silent > 0);
        }
    }

    #[test]
    fn test_silence_has_zero_rate() {
        let src: SourceSpec = "silence:duration=1".parse().unwrap();
        let r = run_voice_bench(&[src], &AlgorithmId::ALL, 4096, &DetectorConfig::default(), None).unwrap();
        assert_eq!(r.records.len(), 7);
        for rec in &r.records {
            assert_eq!(rec.detection_rate, 0.0);
            assert_eq!(rec.frames_total, 0);
            assert_eq!(rec.frames_silent, 10);
        }
    }

    #[test]
    fn test_bad_source_does_not_stop_run() {
        let sources = [
            SourceSpec::Wav("/no/such/file.wav".into()),
            "sine:midi=55,duration=0.5".parse().unwrap(),
        ];
        let r = run_voice_bench(&sources, &[AlgorithmId::Yin], 4096, &DetectorConfig::default(), None).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert!(r.failures[0].source.starts_with("wav:"));
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].detection_rate, 1.0);
    }

    #[test]
    fn test_reproducible() {
        let corpus = &default_corpus()[..2];
        let algs = [AlgorithmId::Mpm, AlgorithmId::DynamicWavelet];
        let a = run_voice_bench(corpus, &algs, 4096, &DetectorConfig::default(), None).unwrap();
        let b = run_voice_bench(corpus, &algs, 4096, &DetectorConfig::default(), None).unwrap();
        assert_eq!(a, b);
    }
}
