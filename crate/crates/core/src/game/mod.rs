//! The pitch-controlled avoidance game.
//!
//! The avatar flies at the scroll position and climbs while the control
//! signal is above critical, otherwise it sinks. Obstacles sit at every
//! multiple of the level's spacing, at heights drawn from the middle 60%
//! of the world. Each obstacle resolves exactly once: a circle overlap is a
//! collision, passing it untouched scores a point.
//!
//! Obstacle heights come from ChaCha8 keyed by the level seed, one stream
//! per obstacle position (`round(x * 1000)`), taking the top 53 bits of the
//! first `u64` as a uniform fraction. A field therefore depends only on the
//! seed and the positions, and a level with spacing `s / k` contains every
//! obstacle of the level with spacing `s`.

mod presets;
mod session;
mod store;

pub use presets::{builtin_presets, load_presets, LevelPresets, NamedLevel};
pub use session::{run_scripted, SessionLog, SessionRecorder, SessionSummary};
pub use store::{SessionInfo, SessionStore};

use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::ControlSignal;

pub const WORLD_HEIGHT: f64 = 100.0;
pub const RISE_RATE: f64 = 40.0;
pub const FALL_RATE: f64 = 30.0;
pub const AVATAR_RADIUS: f64 = 3.0;
pub const MIN_OBSTACLE_RADIUS: f64 = 1.0;
/// Obstacle centers lie in `[OBSTACLE_BAND.0, OBSTACLE_BAND.1] * WORLD_HEIGHT`.
pub const OBSTACLE_BAND: (f64, f64) = (0.2, 0.8);
/// Longest distance the avatar or the scroll may move between collision checks.
const MAX_SUBSTEP_TRAVEL: f64 = 0.5;
/// Snapshots include obstacles this far behind and ahead of the avatar.
const VIEW_BEHIND: f64 = 20.0;
const VIEW_AHEAD: f64 = 100.0;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid level config: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record at {path}:{line}: {detail}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("session `{session_id}` failed its integrity check: {detail}")]
    Integrity { session_id: String, detail: String },
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("session `{0}` already exists")]
    Duplicate(String),
    #[error("invalid patient alias `{0}`: use letters, digits, `-` and `_`")]
    Alias(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ControlMode {
    /// Constant climb above critical, constant sink otherwise.
    #[default]
    Binary,
    /// Vertical speed `gain * (mel - critical)`, clamped to the rise and
    /// fall rates; unpitched frames sink.
    Proportional { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub critical_mel: f64,
    pub obstacle_spacing: f64,
    pub obstacle_radius: f64,
    pub scroll_speed: f64,
    pub duration_s: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub control: ControlMode,
}

impl Default for LevelConfig {
    fn default() -> Self {
        Self {
            critical_mel: 50.0,
            obstacle_spacing: 60.0,
            obstacle_radius: 4.0,
            scroll_speed: 20.0,
            duration_s: 30.0,
            rng_seed: 0,
            control: ControlMode::Binary,
        }
    }
}

impl LevelConfig {
    pub fn validate(&self) -> Result<(), GameError> {
        let err = |m: String| Err(GameError::Config(m));
        let positive = [
            ("critical_mel", self.critical_mel),
            ("obstacle_spacing", self.obstacle_spacing),
            ("scroll_speed", self.scroll_speed),
            ("duration_s", self.duration_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.obstacle_radius.is_finite() && self.obstacle_radius >= MIN_OBSTACLE_RADIUS) {
            return err(format!(
                "obstacle_radius must be at least {MIN_OBSTACLE_RADIUS}, got {}",
                self.obstacle_radius
            ));
        }
        if self.obstacle_spacing <= 2.0 * self.obstacle_radius {
            return err(format!(
                "obstacle_spacing {} must exceed twice the radius {}",
                self.obstacle_spacing, self.obstacle_radius
            ));
        }
        let edge_gap = OBSTACLE_BAND.0 * WORLD_HEIGHT;
        if self.obstacle_radius + AVATAR_RADIUS >= edge_gap {
            return err(format!(
                "obstacle_radius {} leaves no free lane at the floor and ceiling",
                self.obstacle_radius
            ));
        }
        if let ControlMode::Proportional { gain } = self.control {
            if !(gain.is_finite() && gain > 0.0) {
                return err(format!("proportional gain must be positive, got {gain}"));
            }
        }
        Ok(())
    }

    /// Obstacles encountered over the full duration.
    pub fn obstacle_count(&self) -> usize {
        (self.scroll_speed * self.duration_s / self.obstacle_spacing + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Cleared,
    Collided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub resolved: Option<Resolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameEventKind {
    ObstacleCleared,
    Collision,
    LevelComplete,
    LevelFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub kind: GameEventKind,
    pub at_s: f64,
    pub context: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub avatar_y: f64,
    pub avatar_vy: f64,
    pub scroll_x: f64,
    pub obstacles: Vec<Obstacle>,
    pub score: u32,
    pub collisions: u32,
    pub elapsed_s: f64,
    pub level: LevelConfig,
    pub status: GameStatus,
}

/// What the UI draws: the avatar and the obstacles near it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub avatar_y: f64,
    pub scroll_x: f64,
    pub world_height: f64,
    pub avatar_radius: f64,
    pub obstacles: Vec<Obstacle>,
    pub score: u32,
    pub collisions: u32,
    pub elapsed_s: f64,
    pub status: GameStatus,
}

fn obstacle_height(seed: u64, key: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    let unit = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let (lo, hi) = OBSTACLE_BAND;
    WORLD_HEIGHT * (lo + (hi - lo) * unit)
}

/// A fresh level: avatar on the floor at x = 0, obstacles at
/// `k * spacing` for `k = 1..=obstacle_count`.
pub fn spawn_level(cfg: &LevelConfig) -> Result<GameState, GameError> {
    cfg.validate()?;
    let obstacles = (1..=cfg.obstacle_count())
        .map(|k| {
            let key = (k as f64 * cfg.obstacle_spacing * 1000.0).round();
            Obstacle {
                x: key / 1000.0,
                y: obstacle_height(cfg.rng_seed, key as u64),
                radius: cfg.obstacle_radius,
                resolved: None,
            }
        })
        .collect();
    Ok(GameState {
        avatar_y: 0.0,
        avatar_vy: 0.0,
        scroll_x: 0.0,
        obstacles,
        score: 0,
        collisions: 0,
        elapsed_s: 0.0,
        level: cfg.clone(),
        status: GameStatus::Running,
    })
}

impl GameState {
    pub fn is_running(&self) -> bool {
        self.status == GameStatus::Running
    }

    fn velocity(&self, signal: &ControlSignal) -> f64 {
        match self.level.control {
            ControlMode::Binary if signal.above_critical => RISE_RATE,
            ControlMode::Binary => -FALL_RATE,
            ControlMode::Proportional { gain } => match signal.source.mel {
                Some(mel) if signal.source.pitched => {
                    (gain * (mel - signal.effective_critical_mel)).clamp(-FALL_RATE, RISE_RATE)
                }
                _ => -FALL_RATE,
            },
        }
    }

    /// Advances by `dt` seconds under `signal`. A finished game does not
    /// move. Movement is split into sub-steps of at most half a world unit
    /// so that no overlap is skipped.
    pub fn step(&mut self, signal: &ControlSignal, dt: f64) -> Vec<GameEvent> {
        let mut events = Vec::new();
        if !self.is_running() || !(dt > 0.0 && dt.is_finite()) {
            return events;
        }
        self.avatar_vy = self.velocity(signal);
        let travel = self.avatar_vy.abs().max(self.level.scroll_speed) * dt;
        let substeps = ((travel / MAX_SUBSTEP_TRAVEL).ceil() as usize).max(1);
        let h = dt / substeps as f64;
        for _ in 0..substeps {
            self.avatar_y = (self.avatar_y + self.avatar_vy * h).clamp(0.0, WORLD_HEIGHT);
            self.scroll_x += self.level.scroll_speed * h;
            self.elapsed_s += h;
            self.resolve_obstacles(&mut events);
        }
        if self.elapsed_s >= self.level.duration_s - 1e-9 {
            self.status = GameStatus::Complete;
            events.push(GameEvent {
                kind: GameEventKind::LevelComplete,
                at_s: self.elapsed_s,
                context: format!("score {}, collisions {}", self.score, self.collisions),
            });
        }
        events
    }

    fn resolve_obstacles(&mut self, events: &mut Vec<GameEvent>) {
        let (ax, ay) = (self.scroll_x, self.avatar_y);
        for (i, o) in self.obstacles.iter_mut().enumerate() {
            if o.resolved.is_some() {
                continue;
            }
            let reach = o.radius + AVATAR_RADIUS;
            if o.x - reach > ax {
                break;
            }
            let (dx, dy) = (o.x - ax, o.y - ay);
            let (resolution, kind) = if dx * dx + dy * dy < reach * reach {
                self.collisions += 1;
                (Resolution::Collided, GameEventKind::Collision)
            } else if o.x + reach < ax {
                self.score += 1;
                (Resolution::Cleared, GameEventKind::ObstacleCleared)
            } else {
                continue;
            };
            o.resolved = Some(resolution);
            events.push(GameEvent {
                kind,
                at_s: self.elapsed_s,
                context: format!("obstacle {i} at x={:.3}, y={:.3}", o.x, o.y),
            });
        }
    }

    /// Ends a running game as failed.
    pub fn abort(&mut self, reason: &str) -> Option<GameEvent> {
        if !self.is_running() {
            return None;
        }
        self.status = GameStatus::Failed;
        Some(GameEvent {
            kind: GameEventKind::LevelFailed,
            at_s: self.elapsed_s,
            context: reason.to_string(),
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot_at(self.avatar_y, self.scroll_x, self.elapsed_s)
    }

    /// Where the avatar would be `ahead_s` seconds into the next step under
    /// `signal`, without resolving obstacles. Used to animate between
    /// frames; the state itself does not change.
    pub fn preview(&self, signal: &ControlSignal, ahead_s: f64) -> Snapshot {
        if !self.is_running() {
            return self.snapshot();
        }
        let vy = self.velocity(signal);
        let y = (self.avatar_y + vy * ahead_s).clamp(0.0, WORLD_HEIGHT);
        self.snapshot_at(
            y,
            self.scroll_x + self.level.scroll_speed * ahead_s,
            self.elapsed_s + ahead_s,
        )
    }

    fn snapshot_at(&self, avatar_y: f64, scroll_x: f64, elapsed_s: f64) -> Snapshot {
        Snapshot {
            avatar_y,
            scroll_x,
            world_height: WORLD_HEIGHT,
            avatar_radius: AVATAR_RADIUS,
            obstacles: self
                .obstacles
                .iter()
                .filter(|o| o.x >= scroll_x - VIEW_BEHIND && o.x <= scroll_x + VIEW_AHEAD)
                .cloned()
                .collect(),
            score: self.score,
            collisions: self.collisions,
            elapsed_s,
            status: self.status,
        }
    }
}
