use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Published mileages are rounded to this step.
const MILEAGE_STEP_KM: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetUsageEntry {
    pub city: String,
    pub total_vkt_annual: f64,
    pub fleet_size: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityMileage {
    pub city: String,
    pub annual_km: f64,
    pub rounded_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetMileage {
    pub per_city: Vec<CityMileage>,
    /// Unweighted mean of the rounded per-city values.
    pub average_km: f64,
    pub average_rounded_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeEntry {
    pub source: String,
    pub age_years: f64,
    pub annual_km: f64,
    pub ltm_km: f64,
}

/// Rounds half away from zero to the nearest multiple of `step`.
pub fn round_to(x: f64, step: f64) -> f64 {
    if step < 1.0 {
        // Dividing by the integral inverse keeps 0.1-style steps exact.
        let inv = (1.0 / step).round();
        (x * inv).round() / inv
    } else {
        (x / step).round() * step
    }
}

pub fn fleet_annual_mileage(entries: &[FleetUsageEntry]) -> Result<FleetMileage> {
    if entries.is_empty() {
        return Err(Error::invalid("usage", "at least one city is required"));
    }
    let mut per_city = Vec::with_capacity(entries.len());
    for e in entries {
        if e.fleet_size == 0 {
            return Err(Error::domain(format!("fleet size for {} is zero", e.city)));
        }
        if !(e.total_vkt_annual.is_finite() && e.total_vkt_annual >= 0.0) {
            return Err(Error::invalid(format!("usage.{}.total_vkt_annual", e.city), "must be non-negative"));
        }
        let annual_km = e.total_vkt_annual / f64::from(e.fleet_size);
        per_city.push(CityMileage {
            city: e.city.clone(),
            annual_km,
            rounded_km: round_to(annual_km, MILEAGE_STEP_KM),
        });
    }
    let average_km = per_city.iter().map(|c| c.rounded_km).sum::<f64>() / per_city.len() as f64;
    Ok(FleetMileage { per_city, average_km, average_rounded_km: round_to(average_km, MILEAGE_STEP_KM) })
}

/// Reads `city,total_vkt_annual,fleet_size` rows.
pub fn read_fleet_usage<R: Read>(reader: R) -> Result<Vec<FleetUsageEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Per-vehicle annual mileage from a fleet total over a reporting period.
pub fn annualized_mileage(total_km: f64, vehicles: f64, period_years: f64) -> Result<f64> {
    if !(vehicles > 0.0) {
        return Err(Error::domain("vehicle count must be positive"));
    }
    if !(period_years > 0.0) {
        return Err(Error::domain("reporting period must be positive"));
    }
    Ok(total_km / vehicles / period_years)
}

/// Component-wise means rounded to 0.1 year, 100 km and 1000 km.
pub fn average_private_ltm(entries: &[LifetimeEntry]) -> Result<LifetimeEntry> {
    if entries.is_empty() {
        return Err(Error::invalid("lifetimes", "at least one entry is required"));
    }
    let n = entries.len() as f64;
    let mean = |f: fn(&LifetimeEntry) -> f64| entries.iter().map(f).sum::<f64>() / n;
    Ok(LifetimeEntry {
        source: "average".into(),
        age_years: round_to(mean(|e| e.age_years), 0.1),
        annual_km: round_to(mean(|e| e.annual_km), 100.0),
        ltm_km: round_to(mean(|e| e.ltm_km), 1000.0),
    })
}
