//! Seeded synthetic inspection records with a known ELV set, standing in for
//! a national inspection database.
//!
//! Vehicle age and annual mileage are drawn from clipped normals and each
//! vehicle is retired in the reference year with probability
//! `σ(intercept + slope · age)`. Non-retired vehicles follow one of several
//! histories that exercise the extraction rule.

use std::collections::BTreeSet;
use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::elv::{InspectionRecord, TestResult, INSPECTION_HEADER};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFleetConfig {
    pub vehicles: usize,
    pub reference_year: i32,
    pub lookahead_years: i32,
    pub seed: u64,
    pub age_mean: f64,
    pub age_sd: f64,
    pub age_min: f64,
    pub age_max: f64,
    pub annual_km_mean: f64,
    pub annual_km_sd: f64,
    pub annual_km_min: f64,
    pub elv_intercept: f64,
    pub elv_age_slope: f64,
}

impl Default for SyntheticFleetConfig {
    fn default() -> Self {
        SyntheticFleetConfig {
            vehicles: 1000,
            reference_year: 2013,
            lookahead_years: 2,
            seed: 2013,
            age_mean: 12.4,
            age_sd: 4.5,
            age_min: 1.5,
            age_max: 30.0,
            annual_km_mean: 11_800.0,
            annual_km_sd: 3_500.0,
            annual_km_min: 2_000.0,
            elv_intercept: -4.9,
            elv_age_slope: 0.12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFleet {
    pub records: Vec<InspectionRecord>,
    /// Ids of the vehicles generated as ELVs.
    pub planted_elvs: BTreeSet<String>,
    pub vehicles: usize,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone, Copy)]
enum History {
    /// Passes, keeps testing.
    Regular,
    /// Passes, then is never seen again.
    PassThenGone,
    /// Fails, is repaired and retested within the year, then vanishes.
    RetestPassThenGone,
    /// Fails and comes back next year.
    FailThenReturn,
}

pub fn generate(config: &SyntheticFleetConfig) -> Result<SyntheticFleet> {
    if config.vehicles == 0 {
        return Err(Error::invalid("vehicles", "must be positive"));
    }
    if config.lookahead_years < 1 {
        return Err(Error::invalid("lookahead", "must be at least one year"));
    }
    if !(config.age_min > 0.0 && config.age_max > config.age_min) {
        return Err(Error::invalid("age_min", "need 0 < age_min < age_max"));
    }
    let age_dist = Normal::new(config.age_mean, config.age_sd).map_err(|e| Error::invalid("age_sd", e.to_string()))?;
    let km_dist = Normal::new(config.annual_km_mean, config.annual_km_sd)
        .map_err(|e| Error::invalid("annual_km_sd", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let year = config.reference_year;
    let year_start =
        NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(|| Error::invalid("reference_year", "out of range"))?;

    let mut records = Vec::with_capacity(config.vehicles * 4);
    let mut planted = BTreeSet::new();
    for i in 0..config.vehicles {
        let id = format!("V{i:07}");
        let age = age_dist.sample(&mut rng).clamp(config.age_min, config.age_max);
        let annual = km_dist.sample(&mut rng).max(config.annual_km_min);
        let is_elv = rng.random::<f64>() < sigmoid(config.elv_intercept + config.elv_age_slope * age);
        // Main test somewhere in Jan..Oct so a same-year retest still fits.
        let test = year_start + Duration::days(rng.random_range(0..300));
        let first_use = test - Duration::days((age * 365.25).round() as i64);
        let odo = |date: NaiveDate| ((date - first_use).num_days() as f64 / 365.25 * annual).round();
        let mut push = |date: NaiveDate, result: TestResult| {
            records.push(InspectionRecord {
                vehicle_id: id.clone(),
                test_date: date,
                result,
                odometer_km: odo(date),
                first_use_date: first_use,
            })
        };
        // Prior annual tests, when the car was already registered.
        for back in 1..=2 {
            let earlier = test - Duration::days(365 * back);
            if earlier > first_use + Duration::days(30) {
                push(earlier, TestResult::Pass);
            }
        }
        if is_elv {
            planted.insert(id.clone());
            if rng.random::<f64>() < 0.3 {
                push(test - Duration::days(20), TestResult::Fail);
            }
            push(test, TestResult::Fail);
            continue;
        }
        let history = match rng.random_range(0..20) {
            0..=13 => History::Regular,
            14..=15 => History::PassThenGone,
            16..=17 => History::FailThenReturn,
            _ => History::RetestPassThenGone,
        };
        match history {
            History::Regular => {
                push(test, TestResult::Pass);
                for k in 1..=config.lookahead_years {
                    push(test + Duration::days(365 * i64::from(k)), TestResult::Pass);
                }
            }
            History::PassThenGone => push(test, TestResult::Pass),
            History::FailThenReturn => {
                push(test, TestResult::Fail);
                let back = test + Duration::days(365 + rng.random_range(0..40));
                if back.year() <= year + config.lookahead_years {
                    push(back, TestResult::Pass);
                }
            }
            History::RetestPassThenGone => {
                push(test, TestResult::Fail);
                push(test + Duration::days(rng.random_range(1..60)), TestResult::Pass);
            }
        }
    }
    Ok(SyntheticFleet { records, planted_elvs: planted, vehicles: config.vehicles })
}

pub fn write_csv<W: Write>(records: &[InspectionRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(INSPECTION_HEADER)?;
    for r in records {
        w.write_record([
            r.vehicle_id.clone(),
            r.test_date.format("%Y-%m-%d").to_string(),
            r.result.to_string(),
            format!("{}", r.odometer_km),
            r.first_use_date.format("%Y-%m-%d").to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
