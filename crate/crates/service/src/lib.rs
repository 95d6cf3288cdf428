//! Live capture-to-game engine and its network boundary.
//!
//! A producer thread fills a bounded frame queue from a device, WAV file or
//! synthetic source. A single engine thread runs detection, the pipeline
//! and the game, records the session and publishes [`wire::WireMessage`]s
//! through the [`hub::Hub`]. The HTTP server streams those messages over
//! `/stream` and serves session history.

pub mod budget;
pub mod config;
pub mod engine;
pub mod hub;
pub mod input;
pub mod queue;
pub mod server;
pub mod wire;

use std::path::PathBuf;

use thiserror::Error;

use pitchgate::bench::BenchError;
use pitchgate::detectors::DetectError;
use pitchgate::game::GameError;
use pitchgate::pipeline::PipelineError;
use pitchgate::signal::SignalError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("invalid engine config: {0}")]
    Config(String),
    #[error("audio device `{name}` is unavailable; available devices: {}", list_or_none(.available))]
    Device { name: String, available: Vec<String> },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".into()
    } else {
        items.join(", ")
    }
}
