#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use pitchgate::game::{builtin_presets, SessionStore};
use pitchgate::signal::{freq_from_mel, midi_from_freq, synth_sine, write_wav, DEFAULT_SAMPLE_RATE};
use pitchgate_service::config::{EngineConfig, InputSpec};
use pitchgate_service::engine::{spawn_engine, EngineHandle};
use pitchgate_service::hub::{Hub, HubLimits, Subscription};
use pitchgate_service::wire::{Family, WireMessage};

pub const FRAME_S: f64 = 4096.0 / 44_100.0;

/// A pure tone at `mel`, written as a 16-bit WAV.
pub fn tone_wav(dir: &Path, mel: f64, seconds: f64) -> PathBuf {
    let midi = midi_from_freq(freq_from_mel(mel).unwrap()).unwrap();
    let stream = synth_sine(midi, seconds, DEFAULT_SAMPLE_RATE, 0.6).unwrap();
    let path = dir.join(format!("tone-{mel}.wav"));
    write_wav(&path, &stream).unwrap();
    path
}

pub fn wav_input(path: &Path) -> InputSpec {
    format!("wav:{}", path.display()).parse().unwrap()
}

pub struct Rig {
    pub hub: Arc<Hub>,
    pub store: SessionStore,
    pub engine: EngineHandle,
}

/// Subscribes `clients` before the engine starts so they see every message.
pub fn start(cfg: EngineConfig, store_dir: &Path, clients: usize) -> (Rig, Vec<Subscription>) {
    let hub = Hub::new(HubLimits {
        soft: 100_000,
        hard: 200_000,
    });
    let subs = (0..clients).map(|_| hub.subscribe()).collect();
    let store = SessionStore::open(store_dir).unwrap();
    let engine = spawn_engine(cfg, builtin_presets(), hub.clone(), store.clone()).unwrap();
    (Rig { hub, store, engine }, subs)
}

/// Every message until the stream ends.
pub async fn drain(sub: &Subscription) -> Vec<WireMessage> {
    let mut out = Vec::new();
    loop {
        match tokio::time::timeout(Duration::from_secs(120), sub.recv()).await {
            Ok(Some(text)) => out.push(serde_json::from_str(&text).unwrap()),
            Ok(None) => return out,
            Err(_) => panic!("stream stalled after {} messages", out.len()),
        }
    }
}

/// The next message of `family`, skipping others.
pub async fn next_of(sub: &Subscription, family: Family) -> WireMessage {
    loop {
        let text = tokio::time::timeout(Duration::from_secs(30), sub.recv())
            .await
            .expect("timed out waiting for a message")
            .expect("stream ended");
        let msg: WireMessage = serde_json::from_str(&text).unwrap();
        if msg.payload.family() == family {
            return msg;
        }
    }
}

/// Checks global and per-family sequence numbers are gap-free.
pub fn assert_gap_free(msgs: &[WireMessage]) {
    let mut family = [0u64; Family::ALL.len()];
    for (i, m) in msgs.iter().enumerate() {
        assert_eq!(m.seq, msgs[0].seq + i as u64, "global gap at {i}");
        let f = m.payload.family().index();
        if family[f] != 0 {
            assert_eq!(m.family_seq, family[f] + 1, "family gap at {i}");
        }
        family[f] = m.family_seq;
    }
}

pub fn quiet_config(input: InputSpec) -> EngineConfig {
    EngineConfig {
        input,
        budget_iterations: 0,
        ..Default::default()
    }
}
