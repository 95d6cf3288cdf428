use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GameError, LevelConfig};

const BUILTIN: &str = include_str!("../../presets/levels.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedLevel {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub level: LevelConfig,
}

/// Named levels, easiest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPresets {
    pub levels: Vec<NamedLevel>,
}

impl LevelPresets {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let presets: LevelPresets = serde_json::from_str(text)
            .map_err(|e| GameError::Config(format!("level presets: {e}")))?;
        if presets.levels.is_empty() {
            return Err(GameError::Config("level presets: no levels".into()));
        }
        for (i, l) in presets.levels.iter().enumerate() {
            if presets.levels[..i].iter().any(|p| p.name == l.name) {
                return Err(GameError::Config(format!("level presets: duplicate name `{}`", l.name)));
            }
            l.level
                .validate()
                .map_err(|e| GameError::Config(format!("level `{}`: {e}", l.name)))?;
        }
        Ok(presets)
    }

    pub fn get(&self, name: &str) -> Option<&LevelConfig> {
        self.levels.iter().find(|l| l.name == name).map(|l| &l.level)
    }

    pub fn names(&self) -> Vec<&str> {
        self.levels.iter().map(|l| l.name.as_str()).collect()
    }
}

/// The presets shipped with the crate.
pub fn builtin_presets() -> LevelPresets {
    LevelPresets::from_json(BUILTIN).expect("built-in presets are valid")
}

pub fn load_presets(path: &Path) -> Result<LevelPresets, GameError> {
    let text = std::fs::read_to_string(path).map_err(|source| GameError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    LevelPresets::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_builtin_levels() {
        let p = builtin_presets();
        assert_eq!(p.names(), ["easiest", "easy", "medium", "hard", "senior"]);
        assert_eq!(p.get("easiest").unwrap().critical_mel, 50.0);
        assert_eq!(p.get("senior").unwrap().critical_mel, 400.0);
        assert!(p.get("impossible").is_none());
    }

    #[test]
    fn test_difficulty_rises() {
        let p = builtin_presets();
        for w in p.levels.windows(2) {
            assert!(w[1].level.critical_mel > w[0].level.critical_mel);
            assert!(w[1].level.obstacle_spacing < w[0].level.obstacle_spacing);
        }
    }

    #[test]
    fn test_rejects_invalid() {
        assert!(LevelPresets::from_json("{\"levels\": []}").is_err());
        let bad = r#"{"levels":[{"name":"x","level":{"critical_mel":50,"obstacle_spacing":4,"obstacle_radius":4,"scroll_speed":20,"duration_s":30,"rng_seed":0}}]}"#;
        assert!(LevelPresets::from_json(bad).is_err());
        assert!(load_presets(Path::new("/no/such/presets.json")).is_err());
    }
}
