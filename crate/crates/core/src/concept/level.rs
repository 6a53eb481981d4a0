use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the seven SAPPhIRE constructs, indexed in data-frame column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstractionLevel {
    Part = 1,
    Organ = 2,
    Effect = 3,
    Phenomenon = 4,
    Input = 5,
    StateChange = 6,
    Action = 7,
}

impl AbstractionLevel {
    pub const ALL: [AbstractionLevel; 7] = [
        AbstractionLevel::Part,
        AbstractionLevel::Organ,
        AbstractionLevel::Effect,
        AbstractionLevel::Phenomenon,
        AbstractionLevel::Input,
        AbstractionLevel::StateChange,
        AbstractionLevel::Action,
    ];

    /// The 1-based index α.
    pub fn index(self) -> u8 {
        self as u8
    }

    /// Zero-based slot, handy for `[T; 7]` storage.
    pub fn slot(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(alpha: u8) -> Option<Self> {
        Self::ALL.get(usize::from(alpha).checked_sub(1)?).copied()
    }

    /// Column / key name used in CSV headers and JSON maps.
    pub fn key(self) -> &'static str {
        match self {
            AbstractionLevel::Part => "part",
            AbstractionLevel::Organ => "organ",
            AbstractionLevel::Effect => "effect",
            AbstractionLevel::Phenomenon => "phenomenon",
            AbstractionLevel::Input => "input",
            AbstractionLevel::StateChange => "state_change",
            AbstractionLevel::Action => "action",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AbstractionLevel::Part => "Parts",
            AbstractionLevel::Organ => "oRgans",
            AbstractionLevel::Effect => "Effects",
            AbstractionLevel::Phenomenon => "Phenomena",
            AbstractionLevel::Input => "Inputs",
            AbstractionLevel::StateChange => "State change",
            AbstractionLevel::Action => "Actions",
        }
    }
}

impl fmt::Display for AbstractionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown abstraction level {0:?}")]
pub struct UnknownLevelName(pub String);

impl FromStr for AbstractionLevel {
    type Err = UnknownLevelName;

    /// Accepts the key name, the display name (case-insensitive) or the index α.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(alpha) = t.parse::<u8>() {
            return Self::from_index(alpha).ok_or_else(|| UnknownLevelName(s.to_string()));
        }
        let lower = t.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|l| {
                l.key() == lower
                    || l.display_name().to_ascii_lowercase() == lower
                    || (lower == "states" && *l == AbstractionLevel::StateChange)
                    || (lower == "state" && *l == AbstractionLevel::StateChange)
            })
            .ok_or_else(|| UnknownLevelName(s.to_string()))
    }
}
