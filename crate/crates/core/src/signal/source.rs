//! Textual descriptors for audio sources, as used on the command line and
//! in reports.
//!
//! ```text
//! wav:recordings/a.wav
//! synth:midi=50,duration=2,jitter=3,shimmer=15,noise=0.2,duty=0.4,seed=7
//! sine:midi=57,duration=1,amplitude=0.8
//! silence:duration=1
//! ```
//!
//! Every key is optional; `rate` sets the sample rate of generated sources.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    load_wav, synth_dysphonic, synth_sine, AudioStream, DysphonicParams, SignalError,
    DEFAULT_SAMPLE_RATE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SourceSpec {
    Wav(PathBuf),
    Dysphonic(DysphonicParams),
    Sine {
        midi: f64,
        duration_s: f64,
        amplitude: f64,
        sample_rate: u32,
    },
    Silence {
        duration_s: f64,
        sample_rate: u32,
    },
}

impl SourceSpec {
    pub fn open(&self) -> Result<AudioStream, SignalError> {
        match self {
            SourceSpec::Wav(path) => load_wav(path),
            SourceSpec::Dysphonic(params) => synth_dysphonic(params),
            SourceSpec::Sine {
                midi,
                duration_s,
                amplitude,
                sample_rate,
            } => synth_sine(*midi, *duration_s, *sample_rate, *amplitude),
            SourceSpec::Silence {
                duration_s,
                sample_rate,
            } => {
                let len = (duration_s * *sample_rate as f64).round();
                if !(len >= 1.0 && len.is_finite()) {
                    return Err(SignalError::Parameter {
                        name: "duration",
                        reason: format!("must give at least one sample, got {duration_s} s"),
                    });
                }
                AudioStream::new(vec![0.0; len as usize], *sample_rate)
            }
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Wav(path) => write!(f, "wav:{}", path.display()),
            SourceSpec::Dysphonic(p) => write!(
                f,
                "synth:midi={},duration={},rate={},jitter={},shimmer={},noise={},duty={},seed={}",
                p.base_midi,
                p.duration_s,
                p.sample_rate,
                p.jitter_pct,
                p.shimmer_pct,
                p.breath_noise_level,
                p.voiced_duty_cycle,
                p.seed
            ),
            SourceSpec::Sine {
                midi,
                duration_s,
                amplitude,
                sample_rate,
            } => write!(
                f,
                "sine:midi={midi},duration={duration_s},amplitude={amplitude},rate={sample_rate}"
            ),
            SourceSpec::Silence {
                duration_s,
                sample_rate,
            } => write!(f, "silence:duration={duration_s},rate={sample_rate}"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad(s, "expected `kind:...`"))?;
        if kind == "wav" {
            if rest.is_empty() {
                return Err(bad(s, "missing path"));
            }
            return Ok(SourceSpec::Wav(PathBuf::from(rest)));
        }
        let pairs = parse_pairs(s, rest)?;
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| *v);
        let allowed: &[&str] = match kind {
            "synth" => &["midi", "duration", "rate", "jitter", "shimmer", "noise", "duty", "seed"],
            "sine" => &["midi", "duration", "amplitude", "rate"],
            "silence" => &["duration", "rate"],
            _ => return Err(bad(s, "kind must be wav, synth, sine or silence")),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(bad(s, &format!("unknown key `{k}` for {kind}")));
        }
        let sample_rate = match get("rate") {
            Some(v) => v as u32,
            None => DEFAULT_SAMPLE_RATE,
        };
        if get("rate").is_some_and(|v| v.fract() != 0.0 || v < 1.0) {
            return Err(bad(s, "rate must be a positive integer"));
        }
        Ok(match kind {
            "synth" => {
                let d = DysphonicParams::default();
                let params = DysphonicParams {
                    base_midi: get("midi").unwrap_or(d.base_midi),
                    duration_s: get("duration").unwrap_or(d.duration_s),
                    sample_rate,
                    jitter_pct: get("jitter").unwrap_or(d.jitter_pct),
                    shimmer_pct: get("shimmer").unwrap_or(d.shimmer_pct),
                    breath_noise_level: get("noise").unwrap_or(d.breath_noise_level),
                    voiced_duty_cycle: get("duty").unwrap_or(d.voiced_duty_cycle),
                    seed: match get("seed") {
                        Some(v) if v >= 0.0 && v.fract() == 0.0 => v as u64,
                        Some(_) => return Err(bad(s, "seed must be a non-negative integer")),
                        None => d.seed,
                    },
                };
                params.validate()?;
                SourceSpec::Dysphonic(params)
            }
            "sine" => SourceSpec::Sine {
                midi: get("midi").unwrap_or(69.0),
                duration_s: get("duration").unwrap_or(1.0),
                amplitude: get("amplitude").unwrap_or(0.8),
                sample_rate,
            },
            _ => SourceSpec::Silence {
                duration_s: get("duration").unwrap_or(1.0),
                sample_rate,
            },
        })
    }
}

impl TryFrom<String> for SourceSpec {
    type Error = SignalError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SourceSpec> for String {
    fn from(s: SourceSpec) -> Self {
        s.to_string()
    }
}

fn parse_pairs(whole: &str, rest: &str) -> Result<Vec<(String, f64)>, SignalError> {
    rest.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| bad(whole, "expected key=value"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(whole, &format!("`{}` is not a number", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn bad(spec: &str, why: &str) -> SignalError {
    SignalError::Parameter {
        name: "source",
        reason: format!("`{spec}`: {why}"),
    }
}
