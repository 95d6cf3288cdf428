//! Engine configuration, loaded from JSON. Every field is optional.
//!
//! ```json
//! {
//!   "algorithm": "classic_autocorrelator",
//!   "buffer_size": 4096,
//!   "input": "synth:midi=50,duration=60",
//!   "pipeline": { "critical_mel": 400, "difficulty_divisor": 1 },
//!   "level_name": "easiest",
//!   "patient_alias": "p01",
//!   "pace": "realtime"
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use pitchgate::bench::DEFAULT_BUFFERS;
use pitchgate::detectors::{AlgorithmId, DetectorConfig};
use pitchgate::game::{builtin_presets, LevelConfig, LevelPresets};
use pitchgate::pipeline::PipelineConfig;
use pitchgate::signal::SourceSpec;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// Where frames come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InputSpec {
    /// A capture device by name.
    Device(String),
    /// A file or generated signal.
    Source(SourceSpec),
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Device(name) => write!(f, "device:{name}"),
            InputSpec::Source(s) => s.fmt(f),
        }
    }
}

impl FromStr for InputSpec {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("device:") {
            Some(name) if !name.is_empty() => Ok(InputSpec::Device(name.to_string())),
            Some(_) => Err(ServiceError::Config("device input needs a name".into())),
            None => Ok(InputSpec::Source(s.parse()?)),
        }
    }
}

impl TryFrom<String> for InputSpec {
    type Error = ServiceError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<InputSpec> for String {
    fn from(i: InputSpec) -> String {
        i.to_string()
    }
}

/// How file and synthetic inputs are fed to the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pace {
    /// One frame per frame duration of wall time; a lagging engine loses
    /// the oldest frames.
    #[default]
    Realtime,
    /// As fast as the engine consumes; nothing is dropped.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub input: InputSpec,
    pub detector: DetectorConfig,
    pub pipeline: PipelineConfig,
    /// Preset used when `level` is absent.
    pub level_name: Option<String>,
    pub level: Option<LevelConfig>,
    pub patient_alias: String,
    pub pace: Pace,
    /// Start a session as soon as the engine runs.
    pub autostart: bool,
    pub snapshot_hz: f64,
    pub queue_capacity: usize,
    /// Frames timed per algorithm for the startup budget; 0 skips it.
    pub budget_iterations: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmId::ClassicAutocorrelator,
            buffer_size: 4096,
            input: InputSpec::Source(SourceSpec::Silence {
                duration_s: 3600.0,
                sample_rate: 44_100,
            }),
            detector: DetectorConfig::default(),
            pipeline: PipelineConfig::default(),
            level_name: Some("easiest".into()),
            level: None,
            patient_alias: "anonymous".into(),
            pace: Pace::Realtime,
            autostart: false,
            snapshot_hz: 20.0,
            queue_capacity: 8,
            budget_iterations: 5,
        }
    }
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: EngineConfig = serde_json::from_str(&text).map_err(|source| ServiceError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }

    /// The explicit level, else the named preset.
    pub fn resolve_level(&self, presets: &LevelPresets) -> Result<(Option<String>, LevelConfig), ServiceError> {
        match (&self.level, &self.level_name) {
            (Some(level), name) => Ok((name.clone(), level.clone())),
            (None, Some(name)) => presets
                .get(name)
                .map(|l| (Some(name.clone()), l.clone()))
                .ok_or_else(|| unknown_level(name, presets)),
            (None, None) => Ok((None, LevelConfig::default())),
        }
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if !DEFAULT_BUFFERS.contains(&self.buffer_size) {
            return Err(ServiceError::Config(format!(
                "buffer_size must be one of {DEFAULT_BUFFERS:?}, got {}",
                self.buffer_size
            )));
        }
        self.pipeline.validate()?;
        let (_, level) = self.resolve_level(&builtin_presets())?;
        level.validate()?;
        if !(self.snapshot_hz.is_finite() && self.snapshot_hz >= 20.0) {
            return Err(ServiceError::Config(format!(
                "snapshot_hz must be at least 20, got {}",
                self.snapshot_hz
            )));
        }
        if self.queue_capacity == 0 {
            return Err(ServiceError::Config("queue_capacity must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn unknown_level(name: &str, presets: &LevelPresets) -> ServiceError {
    ServiceError::Config(format!(
        "unknown level `{name}`; presets are {}",
        presets.names().join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_defaults() {
        let cfg: EngineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, EngineConfig::default());
        assert_eq!(cfg.algorithm, AlgorithmId::ClassicAutocorrelator);
        assert_eq!(cfg.buffer_size, 4096);
        cfg.validate().unwrap();
    }

    #[test]
    fn test_buffer_set_enforced() {
        for ok in DEFAULT_BUFFERS {
            let cfg = EngineConfig {
                buffer_size: ok,
                ..Default::default()
            };
            cfg.validate().unwrap();
        }
        let cfg = EngineConfig {
            buffer_size: 3000,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(ServiceError::Config(_))));
    }

    #[test]
    fn test_input_forms() {
        assert_eq!(
            "device:USB Mic".parse::<InputSpec>().unwrap(),
            InputSpec::Device("USB Mic".into())
        );
        let wav: InputSpec = "wav:/tmp/a.wav".parse().unwrap();
        assert_eq!(wav, InputSpec::Source(SourceSpec::Wav("/tmp/a.wav".into())));
        assert!(matches!("synth:midi=50".parse(), Ok(InputSpec::Source(SourceSpec::Dysphonic(_)))));
        assert!("device:".parse::<InputSpec>().is_err());
        assert!("mic".parse::<InputSpec>().is_err());
    }

    #[test]
    fn test_json_round_trip() {
        let text = r#"{"algorithm":"mpm","buffer_size":2048,"input":"sine:midi=57,duration=2",
            "pipeline":{"difficulty_divisor":8},"level_name":"senior","pace":"flat"}"#;
        let cfg: EngineConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.pipeline.difficulty_divisor, 8.0);
        assert_eq!(cfg.pace, Pace::Flat);
        let back: EngineConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let (name, level) = cfg.resolve_level(&builtin_presets()).unwrap();
        assert_eq!(name.as_deref(), Some("senior"));
        assert_eq!(level.critical_mel, 400.0);
    }

    #[test]
    fn test_unknown_level() {
        let cfg = EngineConfig {
            level_name: Some("nightmare".into()),
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("easiest"), "{err}");
    }

    #[test]
    fn test_slow_snapshots_rejected() {
        let cfg = EngineConfig {
            snapshot_hz: 10.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
