//! JSON messages exchanged over `/stream`, one WebSocket text frame each.
//!
//! Every server message carries `seq` (global, strictly increasing),
//! `family_seq` (strictly increasing within its `type`), and the
//! `session_id` of the active session (`null` between sessions). Clients
//! send bare [`Control`] objects, or a full `control` message.

use pitchgate::detectors::AlgorithmId;
use pitchgate::game::{GameEvent, LevelConfig, Snapshot};
use pitchgate::pipeline::{PipelineConfig, PitchSample};
use serde::{Deserialize, Serialize};

use crate::budget::BudgetReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub seq: u64,
    pub family_seq: u64,
    pub session_id: Option<String>,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Sample {
        algorithm: AlgorithmId,
        sample: PitchSample,
        above_critical: bool,
        effective_critical_mel: f64,
    },
    Snapshot {
        snapshot: Snapshot,
    },
    Event {
        event: GameEvent,
    },
    Config {
        config: ConfigEcho,
    },
    Control {
        control: Control,
    },
    Shutdown {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Sample,
    Snapshot,
    Event,
    Config,
    Control,
    Shutdown,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Sample,
        Family::Snapshot,
        Family::Event,
        Family::Config,
        Family::Control,
        Family::Shutdown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl Payload {
    pub fn family(&self) -> Family {
        match self {
            Payload::Sample { .. } => Family::Sample,
            Payload::Snapshot { .. } => Family::Snapshot,
            Payload::Event { .. } => Family::Event,
            Payload::Config { .. } => Family::Config,
            Payload::Control { .. } => Family::Control,
            Payload::Shutdown { .. } => Family::Shutdown,
        }
    }
}

/// Live settings a therapist can change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Control {
    SetCriticalMel { value: f64 },
    SetDifficultyDivisor { value: f64 },
    SetAlgorithm { algorithm: AlgorithmId },
    SetLevel { name: String },
    Start {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        patient_alias: Option<String>,
    },
    Stop,
}

impl Control {
    /// Accepts a bare control object or a full `control` wire message.
    pub fn parse(text: &str) -> Result<Control, String> {
        if let Ok(c) = serde_json::from_str::<Control>(text) {
            return Ok(c);
        }
        #[derive(Deserialize)]
        struct Wrapped {
            control: Control,
        }
        serde_json::from_str::<Wrapped>(text)
            .map(|w| w.control)
            .map_err(|e| format!("unrecognized control message: {e}"))
    }
}

/// The engine's current settings, echoed after every control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub algorithm: AlgorithmId,
    pub buffer_size: usize,
    pub sample_rate: u32,
    pub pipeline: PipelineConfig,
    pub effective_critical_mel: f64,
    pub level_name: Option<String>,
    pub level: LevelConfig,
    pub session_running: bool,
    /// Set when the control that produced this echo was refused; the
    /// settings shown are the unchanged ones.
    pub rejected: Option<String>,
    pub budget: Option<BudgetReport>,
    pub dropped_frames: u64,
}
