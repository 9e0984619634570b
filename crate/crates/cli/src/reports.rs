//! Fleet-analytics payloads. These have no case-study equivalent in the core
//! wire module, so the front ends share them from here.

use std::fmt::Write as _;
use std::io::Read;

use mobishift_core::api::to_payload;
use mobishift_core::fleet::{
    annualized_mileage, average_private_ltm, balance_dataset, fleet_annual_mileage, logit_fit, read_inspections,
    round_to, ElvAccumulator, ElvExtraction, FleetMileage, FleetUsageEntry, LifetimeEntry, Predictor, RegressionResult,
};
use mobishift_core::render::{fleet_table, lifetime_table, regression_table};
use mobishift_core::{Dataset, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 2013;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressOptions {
    pub reference_year: i32,
    pub lookahead_years: i32,
    pub seed: u64,
    pub predictors: Vec<Predictor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub reference_year: i32,
    pub lookahead_years: i32,
    pub seed: u64,
    pub records: usize,
    pub rejected: usize,
    pub vehicles: usize,
    pub elvs: usize,
    /// Size of the balanced sample every model is fitted on.
    pub balanced_observations: usize,
    pub results: Vec<RegressionResult>,
}

/// Balances once and fits each predictor on that shared sample.
pub fn regress(extraction: &ElvExtraction, opts: &RegressOptions) -> Result<RegressionReport> {
    let sample = balance_dataset(&extraction.observations, opts.seed)?;
    let y: Vec<bool> = sample.iter().map(|o| o.is_elv).collect();
    let mut results = Vec::with_capacity(opts.predictors.len());
    for p in &opts.predictors {
        let x: Vec<f64> = sample.iter().map(|o| p.value(o)).collect();
        results.push(logit_fit(p.name(), &x, &y)?);
    }
    Ok(RegressionReport {
        reference_year: extraction.reference_year,
        lookahead_years: extraction.lookahead_years,
        seed: opts.seed,
        records: extraction.records,
        rejected: extraction.rejected,
        vehicles: extraction.observations.len(),
        elvs: extraction.elv_count(),
        balanced_observations: sample.len(),
        results,
    })
}

pub fn regress_reader<R: Read>(reader: R, opts: &RegressOptions) -> Result<RegressionReport> {
    let mut acc = ElvAccumulator::new(opts.reference_year, opts.lookahead_years)?;
    read_inspections(reader, &mut acc)?;
    regress(&acc.finish(), opts)
}

pub fn regression_report_table(r: &RegressionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Reference year {} (+{}): {} records, {} rejected, {} vehicles, {} ELVs, balanced n = {}",
        r.reference_year, r.lookahead_years, r.records, r.rejected, r.vehicles, r.elvs, r.balanced_observations
    );
    out.push_str(&regression_table(&r.results));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressReleaseCheck {
    pub total_km: f64,
    pub vehicles: f64,
    pub period_years: f64,
    pub annual_km: f64,
    pub rounded_km: f64,
    pub published_annual_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetReport {
    pub mileage: FleetMileage,
    pub published_average_km: f64,
    pub press_release: PressReleaseCheck,
    pub lifetimes: Vec<LifetimeEntry>,
    pub lifetime_average: LifetimeEntry,
    pub published_lifetime_average: LifetimeEntry,
}

/// Fleet mileage from `usage` (bundled data when `None`) plus the bundled
/// press-release and lifetime checks.
pub fn fleet_report(dataset: &Dataset, usage: Option<&[FleetUsageEntry]>) -> Result<FleetReport> {
    let fleet = &dataset.fleet;
    let mileage = fleet_annual_mileage(usage.unwrap_or(&fleet.usage))?;
    let pr = &fleet.press_release;
    let annual_km = annualized_mileage(pr.total_km, pr.vehicles, pr.period_years)?;
    Ok(FleetReport {
        mileage,
        published_average_km: fleet.published_usage.average_km,
        press_release: PressReleaseCheck {
            total_km: pr.total_km,
            vehicles: pr.vehicles,
            period_years: pr.period_years,
            annual_km,
            rounded_km: round_to(annual_km, 100.0),
            published_annual_km: pr.published_annual_km,
        },
        lifetimes: fleet.lifetimes.clone(),
        lifetime_average: average_private_ltm(&fleet.lifetimes)?,
        published_lifetime_average: fleet.published_lifetime_average.clone(),
    })
}

pub fn fleet_payload(dataset: &Dataset, usage: Option<&[FleetUsageEntry]>) -> Result<String> {
    Ok(to_payload(&fleet_report(dataset, usage)?))
}

pub fn fleet_report_table(r: &FleetReport) -> String {
    let mut out = fleet_table(&r.mileage);
    let pr = &r.press_release;
    let _ = writeln!(
        out,
        "\nPress release: {:.0} km / {:.0} vehicles / {} years = {:.1} km/year (rounded {:.0}, published {:.0})\n",
        pr.total_km, pr.vehicles, pr.period_years, pr.annual_km, pr.rounded_km, pr.published_annual_km
    );
    out.push_str(&lifetime_table(&r.lifetimes, &r.lifetime_average));
    out
}
