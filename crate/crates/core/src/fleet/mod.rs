//! Vehicle-fleet analytics: end-of-life extraction from inspection records,
//! univariate logistic regression, fleet mileage and private-car lifetime
//! averages.

mod elv;
mod logit;
mod mileage;
pub mod synthetic;

pub use elv::{
    balance_dataset, extract_elvs, read_inspections, ElvAccumulator, ElvExtraction, ElvObservation, InspectionRecord,
    Predictor, TestResult, INSPECTION_HEADER,
};
pub use logit::{logit_fit, logit_fit_with, LogitOptions, RegressionResult};
pub use mileage::{
    annualized_mileage, average_private_ltm, fleet_annual_mileage, read_fleet_usage, round_to, CityMileage,
    FleetMileage, FleetUsageEntry, LifetimeEntry,
};
