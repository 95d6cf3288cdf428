//! Real-time pitch estimation for voice rehabilitation.
//!
//! * [`signal`]: audio frames, WAV ingestion, test-signal synthesis, and
//!   frequency / MIDI / mel conversions.
//! * [`detectors`]: seven pitch estimators behind one frame-in, result-out
//!   contract.
//! * [`pipeline`]: monitor records, mel-band filtering, and the
//!   critical-pitch control signal.
//! * [`bench`]: sine-sweep accuracy, timing, and voice-sensitivity reports.
//! * [`game`]: the deterministic pitch-controlled avoidance game and its
//!   session log.

pub mod bench;
pub mod detectors;
pub mod game;
pub mod pipeline;
pub mod signal;
