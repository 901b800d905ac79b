use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    BaUpperR,
    BaLower,
    L1Out,
    Dv,
    Tuba,
    Nwj,
    InfoNce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::BaUpperR,
        EstimatorKind::BaLower,
        EstimatorKind::L1Out,
        EstimatorKind::Dv,
        EstimatorKind::Tuba,
        EstimatorKind::Nwj,
        EstimatorKind::InfoNce,
    ];

    pub fn direction(self) -> Direction {
        match self {
            EstimatorKind::BaUpperR | EstimatorKind::L1Out => Direction::Upper,
            _ => Direction::Lower,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            EstimatorKind::BaUpperR => "ba_upper",
            EstimatorKind::BaLower => "ba_lower",
            EstimatorKind::L1Out => "l1out",
            EstimatorKind::Dv => "dv",
            EstimatorKind::Tuba => "tuba",
            EstimatorKind::Nwj => "nwj",
            EstimatorKind::InfoNce => "infonce",
        }
    }

    /// Whether the estimator has parameters to train.
    pub fn is_trainable(self) -> bool {
        !matches!(self, EstimatorKind::BaUpperR | EstimatorKind::L1Out)
    }

    pub fn uses_critic(self) -> bool {
        matches!(
            self,
            EstimatorKind::Dv | EstimatorKind::Tuba | EstimatorKind::Nwj | EstimatorKind::InfoNce
        )
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match norm.as_str() {
            "ba_upper" | "ba_upper_r" | "ir" | "i_r" => EstimatorKind::BaUpperR,
            "ba_lower" | "ba" => EstimatorKind::BaLower,
            "l1out" => EstimatorKind::L1Out,
            "dv" => EstimatorKind::Dv,
            "tuba" => EstimatorKind::Tuba,
            "nwj" => EstimatorKind::Nwj,
            "infonce" | "nce" => EstimatorKind::InfoNce,
            _ => return Err(Error::InvalidArgument(format!("unknown estimator `{s}`"))),
        };
        Ok(kind)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        })
    }
}
