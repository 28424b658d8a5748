use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four Felder-Silverman learning-style dimensions, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Processing,
    Perception,
    Entrance,
    Understanding,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Processing,
        Dimension::Perception,
        Dimension::Entrance,
        Dimension::Understanding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Processing => "processing",
            Dimension::Perception => "perception",
            Dimension::Entrance => "entrance",
            Dimension::Understanding => "understanding",
        }
    }

    /// Position in [`Dimension::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dimension `{0}`")]
pub struct UnknownDimension(pub String);

impl FromStr for Dimension {
    type Err = UnknownDimension;

    /// Case-insensitive; `input` is accepted as an alias of `entrance`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "processing" | "process" => Ok(Dimension::Processing),
            "perception" => Ok(Dimension::Perception),
            "entrance" | "input" => Ok(Dimension::Entrance),
            "understanding" | "understand" => Ok(Dimension::Understanding),
            _ => Err(UnknownDimension(s.to_string())),
        }
    }
}
