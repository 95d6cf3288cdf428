mod common;

use common::*;
use pitchgate::detectors::AlgorithmId;
use pitchgate::game::GameEventKind;
use pitchgate::pipeline::PipelineConfig;
use pitchgate::signal::SourceSpec;
use pitchgate_service::config::{InputSpec, Pace};
use pitchgate_service::wire::{Control, Family, Payload, WireMessage};

fn events(msgs: &[WireMessage]) -> Vec<GameEventKind> {
    msgs.iter()
        .filter_map(|m| match &m.payload {
            Payload::Event { event } => Some(event.kind),
            _ => None,
        })
        .collect()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_wav_run_two_clients_identical() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), 200.0, 32.0);
    let cfg = pitchgate_service::config::EngineConfig {
        pace: Pace::Flat,
        autostart: true,
        ..quiet_config(wav_input(&wav))
    };
    let (rig, subs) = start(cfg, &dir.path().join("store"), 2);
    let (a, b) = tokio::join!(drain(&subs[0]), drain(&subs[1]));
    let outcome = rig.engine.join();

    assert_eq!(a, b);
    assert_gap_free(&a);
    assert!(a.iter().all(|m| m.seq > 0));

    let kinds = events(&a);
    assert_eq!(kinds.last(), Some(&GameEventKind::LevelComplete));
    assert!(!kinds.contains(&GameEventKind::Collision));
    assert!(matches!(a.last().unwrap().payload, Payload::Shutdown { .. }));

    // every sample of the session carries its id
    let session = outcome.persisted[0].clone();
    let in_session: Vec<_> = a
        .iter()
        .filter(|m| m.payload.family() == Family::Sample && m.session_id.is_some())
        .collect();
    assert!(in_session.iter().all(|m| m.session_id.as_deref() == Some(session.as_str())));

    let log = rig.store.get(&session).unwrap();
    assert_eq!(log.pitch_samples.len(), in_session.len());
    assert_eq!(log.summary.collisions, 0);
    assert_eq!(rig.store.list().unwrap(), [session]);
    assert_eq!(outcome.dropped_frames, 0);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_snapshot_rate_at_least_20_hz() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), 200.0, 5.0);
    let cfg = pitchgate_service::config::EngineConfig {
        pace: Pace::Flat,
        autostart: true,
        ..quiet_config(wav_input(&wav))
    };
    let (rig, subs) = start(cfg, &dir.path().join("store"), 1);
    let msgs = drain(&subs[0]).await;
    rig.engine.join();
    let samples = msgs.iter().filter(|m| m.payload.family() == Family::Sample).count();
    let snapshots = msgs.iter().filter(|m| m.payload.family() == Family::Snapshot).count();
    let seconds = samples as f64 * FRAME_S;
    assert!(snapshots as f64 / seconds >= 20.0, "{snapshots} snapshots over {seconds} s");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_input_end_fails_level_then_shuts_down() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), 200.0, 2.0);
    let cfg = pitchgate_service::config::EngineConfig {
        pace: Pace::Flat,
        autostart: true,
        ..quiet_config(wav_input(&wav))
    };
    let (rig, subs) = start(cfg, &dir.path().join("store"), 1);
    let msgs = drain(&subs[0]).await;
    let outcome = rig.engine.join();
    assert_eq!(events(&msgs).last(), Some(&GameEventKind::LevelFailed));
    let n = msgs.len();
    assert!(matches!(&msgs[n - 1].payload, Payload::Shutdown { reason } if reason == "input ended"));
    assert_eq!(outcome.reason, "input ended");
    // the partial session is still saved
    let log = rig.store.get(&outcome.persisted[0]).unwrap();
    assert_eq!(log.events.last().unwrap().kind, GameEventKind::LevelFailed);
}

fn live_config() -> pitchgate_service::config::EngineConfig {
    let input = InputSpec::Source(SourceSpec::Silence {
        duration_s: 60.0,
        sample_rate: 44_100,
    });
    pitchgate_service::config::EngineConfig {
        buffer_size: 1024,
        ..quiet_config(input)
    }
}

async fn echo_after(sub: &pitchgate_service::hub::Subscription) -> pitchgate_service::wire::ConfigEcho {
    match next_of(sub, Family::Config).await.payload {
        Payload::Config { config } => config,
        _ => unreachable!(),
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_controls_echo_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let (rig, subs) = start(live_config(), dir.path(), 2);
    let sub = &subs[0];
    let initial = echo_after(sub).await;
    assert_eq!(initial.algorithm, AlgorithmId::ClassicAutocorrelator);
    assert_eq!(initial.effective_critical_mel, 400.0);
    let client = rig.engine.client();

    client.send(Control::SetDifficultyDivisor { value: 8.0 });
    let echo = echo_after(sub).await;
    assert_eq!(echo.effective_critical_mel, 50.0);
    assert_eq!(echo.rejected, None);

    client.send(Control::SetDifficultyDivisor { value: 2.0 });
    assert_eq!(echo_after(sub).await.effective_critical_mel, 200.0);

    client.send(Control::SetCriticalMel { value: 50.0 });
    let echo = echo_after(sub).await;
    assert_eq!(echo.pipeline.critical_mel, 50.0);

    client.send(Control::SetCriticalMel { value: -5.0 });
    let echo = echo_after(sub).await;
    assert!(echo.rejected.as_deref().unwrap().contains("critical_mel"));
    assert_eq!(echo.pipeline.critical_mel, 50.0);
    assert_eq!(rig.engine.client().current_config(), echo);

    client.send_text("{\"action\":\"warp\"}");
    assert!(echo_after(sub).await.rejected.is_some());

    client.send(Control::SetLevel { name: "nightmare".into() });
    assert!(echo_after(sub).await.rejected.unwrap().contains("senior"));

    client.send(Control::Stop);
    assert!(echo_after(sub).await.rejected.is_some());

    // the second client saw the same echoes
    let mut rejections = 0;
    while rejections < 4 {
        if echo_after(&subs[1]).await.rejected.is_some() {
            rejections += 1;
        }
    }
    rig.engine.shutdown();
    rig.engine.join();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_divisor_mid_session() {
    let dir = tempfile::tempdir().unwrap();
    let (rig, subs) = start(live_config(), dir.path(), 1);
    let sub = &subs[0];
    let client = rig.engine.client();
    client.send(Control::SetLevel { name: "senior".into() });
    client.send(Control::Start { patient_alias: Some("p01".into()) });
    loop {
        let echo = echo_after(sub).await;
        if echo.session_running {
            assert_eq!(echo.pipeline.critical_mel, 400.0);
            break;
        }
    }
    client.send(Control::SetDifficultyDivisor { value: 8.0 });
    let echo = echo_after(sub).await;
    assert!(echo.session_running);
    assert_eq!(echo.effective_critical_mel, 50.0);

    client.send(Control::Start { patient_alias: None });
    assert!(echo_after(sub).await.rejected.unwrap().contains("already running"));

    client.send(Control::Stop);
    let echo = loop {
        let e = echo_after(sub).await;
        if !e.session_running {
            break e;
        }
    };
    assert_eq!(echo.rejected, None);
    rig.engine.shutdown();
    let outcome = rig.engine.join();
    let log = rig.store.get(&outcome.persisted[0]).unwrap();
    assert_eq!(log.patient_alias, "p01");
    assert_eq!(log.events.last().unwrap().kind, GameEventKind::LevelFailed);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn test_set_algorithm_tags_later_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (rig, subs) = start(live_config(), dir.path(), 1);
    let sub = &subs[0];
    rig.engine.client().send(Control::SetAlgorithm {
        algorithm: AlgorithmId::Mpm,
    });
    loop {
        let msg = next_of(sub, Family::Config).await;
        if let Payload::Config { config } = msg.payload {
            if config.algorithm == AlgorithmId::Mpm {
                break;
            }
        }
    }
    for _ in 0..3 {
        match next_of(sub, Family::Sample).await.payload {
            Payload::Sample { algorithm, .. } => assert_eq!(algorithm, AlgorithmId::Mpm),
            _ => unreachable!(),
        }
    }
    rig.engine.shutdown();
    assert_eq!(rig.engine.join().reason, "engine stopped");
}

#[test]
fn test_invalid_configs_fail_at_startup() {
    let dir = tempfile::tempdir().unwrap();
    let hub = pitchgate_service::hub::Hub::new(Default::default());
    let store = pitchgate::game::SessionStore::open(dir.path()).unwrap();
    let presets = pitchgate::game::builtin_presets();
    let device = pitchgate_service::config::EngineConfig {
        input: InputSpec::Device("Built-in Microphone".into()),
        ..live_config()
    };
    let err = pitchgate_service::engine::spawn_engine(device, presets.clone(), hub.clone(), store.clone()).unwrap_err();
    assert!(err.to_string().contains("available devices"));

    let bad = pitchgate_service::config::EngineConfig {
        pipeline: PipelineConfig {
            difficulty_divisor: 0.5,
            ..Default::default()
        },
        ..live_config()
    };
    assert!(pitchgate_service::engine::spawn_engine(bad, presets, hub, store).is_err());
}
