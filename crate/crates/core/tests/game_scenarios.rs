use std::path::PathBuf;

use pitchgate::detectors::{AlgorithmId, Detector, DetectorConfig};
use pitchgate::game::{builtin_presets, AVATAR_RADIUS, run_scripted, GameEventKind, SessionLog};
use pitchgate::pipeline::{ControlSignal, Pipeline, PipelineConfig};
use pitchgate::signal::{freq_from_mel, midi_from_freq, synth_sine, AudioStream};

const FRAME_MS: f64 = 4096.0 / 44.1;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/scripted_session.json")
}

/// Eight frames above critical, ten below, repeated.
fn alternating_signals(n: usize) -> Vec<ControlSignal> {
    (0..n)
        .map(|i| ControlSignal::scripted(i % 18 < 8, 50.0, FRAME_MS))
        .collect()
}

fn signals_from_stream(stream: &AudioStream, critical_mel: f64) -> Vec<ControlSignal> {
    let mut detector = Detector::new(AlgorithmId::ClassicAutocorrelator, DetectorConfig::default());
    let mut pipeline = Pipeline::new(PipelineConfig {
        critical_mel,
        ..Default::default()
    })
    .unwrap();
    stream
        .frames(4096, 4096)
        .unwrap()
        .map(|f| pipeline.process(&detector.detect(&f).unwrap(), &f).1)
        .collect()
}

#[test]
fn test_golden_scripted_session() {
    let level = builtin_presets().get("easiest").unwrap().clone();
    assert_eq!(level.rng_seed, 0);
    let log = run_scripted(&level, &alternating_signals(400)).unwrap();
    let text = serde_json::to_string_pretty(&log).unwrap() + "\n";

    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden log present; run with UPDATE_GOLDEN=1 to create");
    assert_eq!(text, golden, "scripted session drifted from the golden log");
    let parsed: SessionLog = serde_json::from_str(&golden).unwrap();
    assert_eq!(parsed, log);
    parsed.verify().unwrap();
    assert_eq!(parsed.events.last().unwrap().kind, GameEventKind::LevelComplete);
}

#[test]
fn test_clean_tone_flies_easiest_level() {
    let level = builtin_presets().get("easiest").unwrap().clone();
    let freq = freq_from_mel(200.0).unwrap();
    let midi = midi_from_freq(freq).unwrap();
    let stream = synth_sine(midi, level.duration_s + 1.0, 44100, 0.5).unwrap();
    let signals = signals_from_stream(&stream, level.critical_mel);
    assert!(signals.iter().all(|s| s.above_critical));

    let log = run_scripted(&level, &signals).unwrap();
    let last = log.events.last().unwrap();
    assert_eq!(last.kind, GameEventKind::LevelComplete);
    assert_eq!(log.summary.collisions, 0);
    let finish_x = level.scroll_speed * last.at_s;
    let passed = (1..=level.obstacle_count())
        .filter(|&k| k as f64 * level.obstacle_spacing + level.obstacle_radius + AVATAR_RADIUS < finish_x)
        .count();
    assert_eq!(log.summary.score as usize, passed);
    let max_mel = log.summary.max_mel.unwrap();
    assert!((max_mel - 200.0).abs() < 5.0, "{max_mel}");
}

#[test]
fn test_every_preset_has_a_free_lane() {
    // flying along the floor never meets an obstacle
    for named in builtin_presets().levels {
        let n = (named.level.duration_s * 1000.0 / FRAME_MS).ceil() as usize + 1;
        let signals: Vec<_> = (0..n)
            .map(|_| ControlSignal::scripted(false, named.level.critical_mel, FRAME_MS))
            .collect();
        let log = run_scripted(&named.level, &signals).unwrap();
        assert_eq!(log.summary.collisions, 0, "{}", named.name);
        assert_eq!(log.events.last().unwrap().kind, GameEventKind::LevelComplete);
    }
}

#[test]
fn test_short_input_fails_level() {
    let level = builtin_presets().get("easy").unwrap().clone();
    let log = run_scripted(&level, &alternating_signals(20)).unwrap();
    assert_eq!(log.events.last().unwrap().kind, GameEventKind::LevelFailed);
    assert_eq!(log.summary.frames, 20);
}
