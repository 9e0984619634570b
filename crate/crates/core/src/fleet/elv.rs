use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INSPECTION_HEADER: [&str; 5] = ["vehicle_id", "test_date", "result", "odometer_km", "first_use_date"];

const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestResult {
    Pass,
    Fail,
}

impl FromStr for TestResult {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pass" | "p" | "passed" => Ok(TestResult::Pass),
            "fail" | "f" | "failed" => Ok(TestResult::Fail),
            _ => Err(Error::invalid("result", format!("expected pass or fail, got `{s}`"))),
        }
    }
}

impl fmt::Display for TestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestResult::Pass => "pass",
            TestResult::Fail => "fail",
        })
    }
}

/// One periodic inspection of one vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionRecord {
    pub vehicle_id: String,
    pub test_date: NaiveDate,
    pub result: TestResult,
    pub odometer_km: f64,
    pub first_use_date: NaiveDate,
}

impl InspectionRecord {
    pub fn validate(&self) -> Result<()> {
        if self.vehicle_id.trim().is_empty() {
            return Err(Error::invalid("vehicle_id", "empty"));
        }
        if !(self.odometer_km.is_finite() && self.odometer_km >= 0.0) {
            return Err(Error::invalid("odometer_km", "must be non-negative"));
        }
        if self.test_date <= self.first_use_date {
            return Err(Error::invalid("test_date", "must be after first use"));
        }
        Ok(())
    }

    pub fn age_years(&self) -> f64 {
        (self.test_date - self.first_use_date).num_days() as f64 / DAYS_PER_YEAR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElvObservation {
    pub vehicle_id: String,
    pub is_elv: bool,
    pub age_years: f64,
    pub mileage_km: f64,
}

/// Which observation field a regression uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    Age,
    Mileage,
}

impl Predictor {
    pub fn name(self) -> &'static str {
        match self {
            Predictor::Age => "age",
            Predictor::Mileage => "mileage",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Predictor::Age => "years",
            Predictor::Mileage => "1000 km",
        }
    }

    /// Mileage is regressed per 1000 km.
    pub fn value(self, obs: &ElvObservation) -> f64 {
        match self {
            Predictor::Age => obs.age_years,
            Predictor::Mileage => obs.mileage_km / 1000.0,
        }
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "age" => Ok(Predictor::Age),
            "mileage" => Ok(Predictor::Mileage),
            _ => Err(Error::invalid("predictor", format!("expected age or mileage, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LastTest {
    date: NaiveDate,
    result: TestResult,
    odometer_km: f64,
    first_use_date: NaiveDate,
}

impl LastTest {
    // Later date wins; on the same date a pass wins, then the higher odometer.
    fn supersedes(&self, other: &LastTest) -> bool {
        (self.date, other.result, self.odometer_km) > (other.date, self.result, other.odometer_km)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct VehicleState {
    last: Option<LastTest>,
    seen_later: bool,
}

/// Streaming ELV extraction. Accumulators fed disjoint shards of the
/// records merge exactly, whatever the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ElvAccumulator {
    reference_year: i32,
    lookahead_years: i32,
    vehicles: BTreeMap<String, VehicleState>,
    records: usize,
    rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElvExtraction {
    pub reference_year: i32,
    pub lookahead_years: i32,
    /// Sorted by vehicle id.
    pub observations: Vec<ElvObservation>,
    pub records: usize,
    pub rejected: usize,
}

impl ElvExtraction {
    pub fn elv_count(&self) -> usize {
        self.observations.iter().filter(|o| o.is_elv).count()
    }
}

impl ElvAccumulator {
    pub fn new(reference_year: i32, lookahead_years: i32) -> Result<Self> {
        if lookahead_years < 1 {
            return Err(Error::invalid("lookahead", "must be at least one year"));
        }
        Ok(ElvAccumulator { reference_year, lookahead_years, vehicles: BTreeMap::new(), records: 0, rejected: 0 })
    }

    pub fn reject(&mut self) {
        self.records += 1;
        self.rejected += 1;
    }

    pub fn push(&mut self, rec: InspectionRecord) {
        self.records += 1;
        if rec.validate().is_err() {
            self.rejected += 1;
            return;
        }
        let year = rec.test_date.year();
        if year == self.reference_year {
            let test = LastTest {
                date: rec.test_date,
                result: rec.result,
                odometer_km: rec.odometer_km,
                first_use_date: rec.first_use_date,
            };
            let state = self.vehicles.entry(rec.vehicle_id).or_default();
            match &state.last {
                Some(cur) if !test.supersedes(cur) => {}
                _ => state.last = Some(test),
            }
        } else if year > self.reference_year && year <= self.reference_year + self.lookahead_years {
            self.vehicles.entry(rec.vehicle_id).or_default().seen_later = true;
        }
    }

    pub fn merge(&mut self, other: ElvAccumulator) -> Result<()> {
        if (other.reference_year, other.lookahead_years) != (self.reference_year, self.lookahead_years) {
            return Err(Error::domain("cannot merge accumulators with different reference windows"));
        }
        self.records += other.records;
        self.rejected += other.rejected;
        for (id, theirs) in other.vehicles {
            let mine = self.vehicles.entry(id).or_default();
            mine.seen_later |= theirs.seen_later;
            if let Some(t) = theirs.last {
                match &mine.last {
                    Some(cur) if !t.supersedes(cur) => {}
                    _ => mine.last = Some(t),
                }
            }
        }
        Ok(())
    }

    /// A vehicle is an ELV when its final reference-year test failed and it
    /// has no test in the lookahead window. Vehicles without a
    /// reference-year test are not observed.
    pub fn finish(self) -> ElvExtraction {
        let observations = self
            .vehicles
            .into_iter()
            .filter_map(|(vehicle_id, state)| {
                let last = state.last?;
                Some(ElvObservation {
                    vehicle_id,
                    is_elv: last.result == TestResult::Fail && !state.seen_later,
                    age_years: (last.date - last.first_use_date).num_days() as f64 / DAYS_PER_YEAR,
                    mileage_km: last.odometer_km,
                })
            })
            .collect();
        ElvExtraction {
            reference_year: self.reference_year,
            lookahead_years: self.lookahead_years,
            observations,
            records: self.records,
            rejected: self.rejected,
        }
    }
}

pub fn extract_elvs(
    records: impl IntoIterator<Item = InspectionRecord>,
    reference_year: i32,
    lookahead_years: i32,
) -> Result<ElvExtraction> {
    let mut acc = ElvAccumulator::new(reference_year, lookahead_years)?;
    for r in records {
        acc.push(r);
    }
    Ok(acc.finish())
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    vehicle_id: String,
    test_date: String,
    result: String,
    odometer_km: String,
    first_use_date: String,
}

impl RawRecord {
    fn parse(self) -> Option<InspectionRecord> {
        let date = |s: &str| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok();
        Some(InspectionRecord {
            vehicle_id: self.vehicle_id.trim().to_owned(),
            test_date: date(&self.test_date)?,
            result: self.result.parse().ok()?,
            odometer_km: self.odometer_km.trim().parse().ok()?,
            first_use_date: date(&self.first_use_date)?,
        })
    }
}

/// Streams inspection CSV rows into `acc`. Unparseable rows are counted as
/// rejected; a missing column is an error.
pub fn read_inspections<R: Read>(reader: R, acc: &mut ElvAccumulator) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in INSPECTION_HEADER {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::invalid("csv", format!("missing column `{col}`")));
        }
    }
    for row in rdr.deserialize::<RawRecord>() {
        match row.ok().and_then(RawRecord::parse) {
            Some(rec) => acc.push(rec),
            None => acc.reject(),
        }
    }
    Ok(())
}

/// Subsamples the majority class down to the minority count. Selected
/// observations keep their input order.
pub fn balance_dataset(observations: &[ElvObservation], seed: u64) -> Result<Vec<ElvObservation>> {
    let elv = observations.iter().filter(|o| o.is_elv).count();
    let other = observations.len() - elv;
    if elv == 0 || other == 0 {
        return Err(Error::domain("balancing needs both ELV and non-ELV observations"));
    }
    if elv == other {
        return Ok(observations.to_vec());
    }
    let majority_is_elv = elv > other;
    let (major, minor) = if majority_is_elv { (elv, other) } else { (other, elv) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; major];
    for i in index::sample(&mut rng, major, minor) {
        keep[i] = true;
    }
    let mut k = 0;
    Ok(observations
        .iter()
        .filter(|o| {
            if o.is_elv != majority_is_elv {
                return true;
            }
            let selected = keep[k];
            k += 1;
            selected
        })
        .cloned()
        .collect())
}
