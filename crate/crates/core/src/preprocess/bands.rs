use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    LowerBeta,
    HigherBeta,
    Broadband,
}

impl BandName {
    pub const ALL: [BandName; 6] = [
        BandName::Delta,
        BandName::Theta,
        BandName::Alpha,
        BandName::LowerBeta,
        BandName::HigherBeta,
        BandName::Broadband,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BandName::Delta => "Delta",
            BandName::Theta => "Theta",
            BandName::Alpha => "Alpha",
            BandName::LowerBeta => "LowerBeta",
            BandName::HigherBeta => "HigherBeta",
            BandName::Broadband => "Broadband",
        }
    }

    /// Canonical edges in Hz.
    pub fn default_edges(self) -> (f64, f64) {
        match self {
            BandName::Delta => (0.5, 4.0),
            BandName::Theta => (4.0, 8.0),
            BandName::Alpha => (8.0, 13.0),
            BandName::LowerBeta => (13.0, 22.0),
            BandName::HigherBeta => (22.0, 30.0),
            BandName::Broadband => (0.5, 40.0),
        }
    }

    pub fn definition(self) -> BandDefinition {
        let (f_lo, f_hi) = self.default_edges();
        BandDefinition { name: self, f_lo, f_hi }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        BandName::ALL
            .into_iter()
            .find(|b| b.as_str().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown band {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: BandName,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl BandDefinition {
    pub fn contains(&self, freq: f64) -> bool {
        (self.f_lo..=self.f_hi).contains(&freq)
    }

    /// Geometric centre, where the band-pass response peaks.
    pub fn center(&self) -> f64 {
        (self.f_lo * self.f_hi).sqrt()
    }
}
