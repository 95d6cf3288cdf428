use std::fs::File;
use std::io::{BufReader, Read, Seek};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioStream, SignalError};

/// Reads a PCM or IEEE-float WAV file into a mono stream normalized to
/// [-1, 1]. Stereo input is averaged down to one channel.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioStream, SignalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| wav_error(path, e))?;
    read_stream(path, reader)
}

fn read_stream<R: Read + Seek>(
    path: &Path,
    reader: WavReader<R>,
) -> Result<AudioStream, SignalError> {
    let spec = reader.spec();
    let format_err = |field: &'static str, detail: String| SignalError::WavFormat {
        path: path.to_path_buf(),
        field,
        detail,
    };
    if !(1..=2).contains(&spec.channels) {
        return Err(format_err(
            "channels",
            format!("{} channels; only mono and stereo are supported", spec.channels),
        ));
    }
    if spec.sample_rate == 0 {
        return Err(format_err("sample_rate", "sample rate is zero".into()));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (format, bits) => {
            return Err(format_err(
                "bits_per_sample",
                format!("{bits}-bit {format:?} samples are not supported"),
            ))
        }
    };

    if let Some(i) = interleaved.iter().position(|v| !v.is_finite()) {
        return Err(format_err("data", format!("sample {i} is not finite")));
    }

    let channels = spec.channels as usize;
    let mono = interleaved
        .chunks_exact(channels)
        .map(|c| (c.iter().sum::<f64>() / channels as f64).clamp(-1.0, 1.0))
        .collect();
    AudioStream::new(mono, spec.sample_rate)
}

/// Writes a stream as 16-bit mono PCM. Samples are scaled by 32768 and
/// rounded, so loading a 16-bit file and writing it back is lossless.
pub fn write_wav(path: impl AsRef<Path>, stream: &AudioStream) -> Result<(), SignalError> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: stream.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in stream.samples() {
        let v = (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        writer.write_sample(v).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, err: hound::Error) -> SignalError {
    let path = path.to_path_buf();
    match err {
        // the file itself opened, so a failed read means it ends early
        hound::Error::IoError(source) => SignalError::WavFormat {
            path,
            field: "header",
            detail: format!("file is truncated: {source}"),
        },
        hound::Error::FormatError(detail) => SignalError::WavFormat {
            path,
            field: "header",
            detail: detail.into(),
        },
        hound::Error::Unsupported => SignalError::WavFormat {
            path,
            field: "format_tag",
            detail: "unsupported codec or sample layout".into(),
        },
        hound::Error::InvalidSampleFormat => SignalError::WavFormat {
            path,
            field: "sample_format",
            detail: "sample type does not match the header".into(),
        },
        hound::Error::TooWide => SignalError::WavFormat {
            path,
            field: "bits_per_sample",
            detail: "sample width exceeds 32 bits".into(),
        },
        hound::Error::UnfinishedSample => SignalError::WavFormat {
            path,
            field: "data",
            detail: "data chunk ends mid-sample".into(),
        },
    }
}
