//! Comparison harness: sine-sweep accuracy, per-buffer timing, and
//! voice-sensitivity runs, with CSV / JSON-lines report output.

mod report;
mod sweep;
mod timing;
mod voice;

pub use report::{emit_report, read_jsonl, ReportFormat, ReportRow};
pub use sweep::{
    default_midi_range, note_results, run_sine_sweep, BenchmarkRecord, SweepOptions, SweepReport,
    SweepWarning,
};
pub use timing::{
    run_timing, timing_ratio, TimingOptions, TimingRecord, MIN_TIMING_ITERATIONS, MIN_WARMUP,
};
pub use voice::{default_corpus, run_voice_bench, SensitivityRecord, SourceFailure, VoiceReport};

use std::path::PathBuf;

use thiserror::Error;

use crate::detectors::DetectError;
pub(crate) use crate::pipeline::median;
use crate::signal::SignalError;

/// The buffer sizes compared throughout.
pub const DEFAULT_BUFFERS: [usize; 5] = [1024, 2048, 4096, 8192, 16384];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report line {line} in {path}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },
}
