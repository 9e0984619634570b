//! Annual mobility profiles and the emissions they imply.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::FactorTable;
use crate::mode::TransportMode;

/// Annual distance per mode, km/year. Absent modes are zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MobilityProfile {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub distances: BTreeMap<TransportMode, f64>,
}

impl MobilityProfile {
    pub fn new(label: impl Into<String>) -> Self {
        MobilityProfile { label: label.into(), distances: BTreeMap::new() }
    }

    pub fn with(mut self, mode: TransportMode, km: f64) -> Self {
        self.distances.insert(mode, km);
        self
    }

    pub fn distance(&self, mode: TransportMode) -> f64 {
        self.distances.get(&mode).copied().unwrap_or(0.0)
    }

    pub fn total_km(&self) -> f64 {
        self.distances.values().sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (mode, km) in &self.distances {
            if !km.is_finite() || *km < 0.0 {
                return Err(Error::invalid(
                    format!("{}.distances.{mode}", field_label(&self.label)),
                    format!("distance must be a non-negative number, got {km}"),
                ));
            }
        }
        Ok(())
    }

    /// Mode-wise sum of two profiles.
    pub fn combined(&self, other: &MobilityProfile) -> MobilityProfile {
        let mut out = self.clone();
        for (mode, km) in &other.distances {
            *out.distances.entry(*mode).or_insert(0.0) += km;
        }
        out
    }
}

fn field_label(label: &str) -> &str {
    if label.is_empty() {
        "profile"
    } else {
        label
    }
}

/// Emissions per mode and in total, kg CO2-eq per year.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmissionsBreakdown {
    pub per_mode: BTreeMap<TransportMode, f64>,
    pub total: f64,
}

impl EmissionsBreakdown {
    pub fn from_per_mode(per_mode: BTreeMap<TransportMode, f64>) -> Self {
        let total = per_mode.values().sum();
        EmissionsBreakdown { per_mode, total }
    }

    pub fn get(&self, mode: TransportMode) -> f64 {
        self.per_mode.get(&mode).copied().unwrap_or(0.0)
    }

    pub fn negated(&self) -> Self {
        EmissionsBreakdown::from_per_mode(self.per_mode.iter().map(|(m, v)| (*m, -v)).collect())
    }

    /// Folds the complementary modes (walking, carpooling) into `other`,
    /// leaving the five base modes plus `other`.
    pub fn aggregated(&self) -> Self {
        let mut out: BTreeMap<TransportMode, f64> = BTreeMap::new();
        for (mode, kg) in &self.per_mode {
            let key = match mode {
                TransportMode::Walking | TransportMode::Carpool => TransportMode::Other,
                m => *m,
            };
            *out.entry(key).or_insert(0.0) += kg;
        }
        EmissionsBreakdown::from_per_mode(out)
    }
}

fn mode_emissions(mode: TransportMode, km: f64, factors: &FactorTable) -> Result<f64> {
    if km == 0.0 {
        return Ok(0.0);
    }
    Ok(km * factors.require(mode)? / 1000.0)
}

pub fn annual_emissions(profile: &MobilityProfile, factors: &FactorTable) -> Result<EmissionsBreakdown> {
    profile.validate()?;
    let per_mode = profile
        .distances
        .iter()
        .map(|(mode, km)| Ok((*mode, mode_emissions(*mode, *km, factors)?)))
        .collect::<Result<_>>()?;
    Ok(EmissionsBreakdown::from_per_mode(per_mode))
}

/// During minus before, mode-wise. Negative totals are reductions.
pub fn emissions_delta(
    before: &MobilityProfile,
    during: &MobilityProfile,
    factors: &FactorTable,
) -> Result<EmissionsBreakdown> {
    delta_over(before, during, factors, |_| true)
}

/// The delta restricted to private and shared driving; every other mode is zero.
pub fn delta_without_modal_shift(
    before: &MobilityProfile,
    during: &MobilityProfile,
    factors: &FactorTable,
) -> Result<EmissionsBreakdown> {
    delta_over(before, during, factors, TransportMode::is_driving)
}

fn delta_over(
    before: &MobilityProfile,
    during: &MobilityProfile,
    factors: &FactorTable,
    include: impl Fn(TransportMode) -> bool,
) -> Result<EmissionsBreakdown> {
    before.validate()?;
    during.validate()?;
    let mut modes: Vec<TransportMode> = before.distances.keys().chain(during.distances.keys()).copied().collect();
    modes.sort();
    modes.dedup();
    let mut per_mode = BTreeMap::new();
    for mode in modes {
        let kg = if include(mode) {
            mode_emissions(mode, during.distance(mode) - before.distance(mode), factors)?
        } else {
            0.0
        };
        per_mode.insert(mode, kg);
    }
    Ok(EmissionsBreakdown::from_per_mode(per_mode))
}

/// Reduction as a positive fraction of the before-period emissions.
pub fn reduction_rate(delta_total_kg: f64, before_total_kg: f64) -> f64 {
    if before_total_kg == 0.0 {
        0.0
    } else {
        -delta_total_kg / before_total_kg
    }
}
