//! Inputs shared by the benchmarks.

use mobishift_core::fleet::synthetic::{generate, SyntheticFleetConfig};
use mobishift_core::fleet::{balance_dataset, extract_elvs, Predictor};

/// A balanced (age, is_elv) sample drawn from a synthetic fleet.
pub fn balanced_age_sample(vehicles: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let cfg = SyntheticFleetConfig { vehicles, seed, ..SyntheticFleetConfig::default() };
    let fleet = generate(&cfg).expect("valid config");
    let out = extract_elvs(fleet.records, cfg.reference_year, cfg.lookahead_years).expect("valid window");
    let obs = balance_dataset(&out.observations, seed).expect("both classes present");
    (obs.iter().map(|o| Predictor::Age.value(o)).collect(), obs.iter().map(|o| o.is_elv).collect())
}
