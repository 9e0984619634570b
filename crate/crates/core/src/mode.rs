use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Transport modes tracked by a mobility profile.
///
/// The declaration order is the canonical mode ordering used everywhere a
/// deterministic iteration order matters (maps, tables, residue absorption).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    Car,
    Cs,
    Rail,
    Bus,
    Bicycle,
    Walking,
    Carpool,
    Other,
}

impl TransportMode {
    pub const ALL: [TransportMode; 8] = [
        TransportMode::Car,
        TransportMode::Cs,
        TransportMode::Rail,
        TransportMode::Bus,
        TransportMode::Bicycle,
        TransportMode::Walking,
        TransportMode::Carpool,
        TransportMode::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::Car => "car",
            TransportMode::Cs => "cs",
            TransportMode::Rail => "rail",
            TransportMode::Bus => "bus",
            TransportMode::Bicycle => "bicycle",
            TransportMode::Walking => "walking",
            TransportMode::Carpool => "carpool",
            TransportMode::Other => "other",
        }
    }

    /// Human-facing row label for rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            TransportMode::Car => "Car",
            TransportMode::Cs => "CS",
            TransportMode::Rail => "Train",
            TransportMode::Bus => "Bus",
            TransportMode::Bicycle => "Bicycle",
            TransportMode::Walking => "Walking",
            TransportMode::Carpool => "Carpooling",
            TransportMode::Other => "Other",
        }
    }

    /// Private or shared driving.
    pub fn is_driving(self) -> bool {
        matches!(self, TransportMode::Car | TransportMode::Cs)
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransportMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mode = match s.trim().to_ascii_lowercase().as_str() {
            "car" => TransportMode::Car,
            "cs" | "car_sharing" | "carsharing" => TransportMode::Cs,
            "rail" | "train" => TransportMode::Rail,
            "bus" => TransportMode::Bus,
            "bicycle" | "cycle" | "cycling" => TransportMode::Bicycle,
            "walking" | "walk" => TransportMode::Walking,
            "carpool" | "carpooling" => TransportMode::Carpool,
            "other" => TransportMode::Other,
            other => return Err(Error::invalid("mode", format!("unknown transport mode `{other}`"))),
        };
        Ok(mode)
    }
}
