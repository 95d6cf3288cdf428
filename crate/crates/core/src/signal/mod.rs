//! Audio representation, WAV ingestion, signal synthesis and pitch-unit
//! conversions.

mod notes;
mod source;
mod synth;
mod wav;

pub use notes::{
    freq_from_mel, freq_from_midi, mel_from_freq, midi_from_freq, note_name, NoteScale, A4_HZ,
};
pub use source::SourceSpec;
pub use synth::{synth_dysphonic, synth_sine, white_noise, DysphonicParams};
pub use wav::{load_wav, write_wav};

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

/// Sample rate used for every synthesized signal and benchmark.
pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("frequency {freq_hz:.3} Hz is at or above the Nyquist limit of {nyquist_hz} Hz")]
    Nyquist { freq_hz: f64, nyquist_hz: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
    #[error("WAV format error in {path}: {field}: {detail}")]
    WavFormat {
        path: PathBuf,
        field: &'static str,
        detail: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A fixed-length analysis window ("buffer") cut from a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioFrame {
    samples: Vec<f64>,
    sample_rate: u32,
    start_index: u64,
}

impl AudioFrame {
    pub fn new(samples: Vec<f64>, sample_rate: u32, start_index: u64) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::InvalidAudio("frame has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(SignalError::InvalidAudio("sample rate must be positive".into()));
        }
        check_samples(&samples)?;
        Ok(Self {
            samples,
            sample_rate,
            start_index,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64 * 1000.0
    }

    /// A copy of this frame with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self, SignalError> {
        Self::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
            self.start_index,
        )
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

/// An in-memory mono stream with a fixed sample rate.
///
/// Samples are shared, so cloning a stream and cutting frames from several
/// threads is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioStream {
    samples: Arc<[f64]>,
    sample_rate: u32,
}

impl AudioStream {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, SignalError> {
        if sample_rate == 0 {
            return Err(SignalError::InvalidAudio("sample rate must be positive".into()));
        }
        check_samples(&samples)?;
        Ok(Self {
            samples: samples.into(),
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Cuts the stream into windows of `buffer_size` samples advancing by
    /// `hop`. Frame `k` covers `[k * hop, k * hop + buffer_size)`; a trailing
    /// partial window is dropped.
    pub fn frames(&self, buffer_size: usize, hop: usize) -> Result<Frames<'_>, SignalError> {
        if buffer_size == 0 {
            return Err(SignalError::Parameter {
                name: "buffer_size",
                reason: "must be positive".into(),
            });
        }
        if hop == 0 || hop > buffer_size {
            return Err(SignalError::Parameter {
                name: "hop",
                reason: format!("must be in 1..={buffer_size}, got {hop}"),
            });
        }
        Ok(Frames {
            stream: self,
            buffer_size,
            hop,
            next: 0,
        })
    }
}

/// Number of full frames [`AudioStream::frames`] yields for a stream of `len` samples.
pub fn frame_count(len: usize, buffer_size: usize, hop: usize) -> usize {
    if len < buffer_size {
        0
    } else {
        (len - buffer_size) / hop + 1
    }
}

pub struct Frames<'a> {
    stream: &'a AudioStream,
    buffer_size: usize,
    hop: usize,
    next: usize,
}

impl Iterator for Frames<'_> {
    type Item = AudioFrame;

    fn next(&mut self) -> Option<AudioFrame> {
        let start = self.next;
        let end = start.checked_add(self.buffer_size)?;
        if end > self.stream.len() {
            return None;
        }
        self.next += self.hop;
        Some(AudioFrame {
            samples: self.stream.samples[start..end].to_vec(),
            sample_rate: self.stream.sample_rate,
            start_index: start as u64,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = frame_count(
            self.stream.len().saturating_sub(self.next),
            self.buffer_size,
            self.hop,
        );
        (remaining, Some(remaining))
    }
}

impl ExactSizeIterator for Frames<'_> {}

/// Root-mean-square level of a frame.
pub fn rms_amplitude(frame: &AudioFrame) -> f64 {
    rms(frame.samples())
}

pub(crate) fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

fn check_samples(samples: &[f64]) -> Result<(), SignalError> {
    if let Some((i, s)) = samples
        .iter()
        .enumerate()
        .find(|(_, s)| !s.is_finite() || s.abs() > 1.0)
    {
        return Err(SignalError::InvalidAudio(format!(
            "sample {i} is {s}, expected a finite value in [-1, 1]"
        )));
    }
    Ok(())
}
