//! Wire types and payload builders shared by the CLI and the HTTP service.
//!
//! Each builder returns the exact bytes sent to a client: pretty-printed
//! JSON followed by a newline. Both front ends emit these strings unchanged,
//! so equivalent queries produce identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cases::{
    case_factors, linspace, run_case_study, run_no_modal_shift, sweep_bus_occupancy, sweep_electricity_grid,
    FactorMode, Region, RunOptions, SweepOptions, SweepResult,
};
use crate::dataset::{Dataset, GridIntensity, GridSource};
use crate::error::{Error, Result};
use crate::factors::{per_pkt_factor, stage_breakdown, FactorTable, LifeCycleStage, LtmScenario, OccupancySpec};
use crate::mobility::{annual_emissions, delta_without_modal_shift, emissions_delta, reduction_rate};
use crate::mobility::{EmissionsBreakdown, MobilityProfile};
use crate::mode::TransportMode;

pub const DEFAULT_FACTOR_GRID: &str = "NL";

/// Error body returned with every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { code: code.into(), message: message.into(), field: None }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new("bad_request", message)
    }

    pub fn to_json(&self) -> String {
        to_payload(self)
    }
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        ApiError { code: e.code().to_owned(), message: e.to_string(), field: e.field() }
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{} ({}): {}", self.code, field, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

/// Serializes `value` the way every endpoint does.
pub fn to_payload<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("payload types serialize infallibly");
    s.push('\n');
    s
}

/// A region label or an explicit intensity in g CO2-eq per kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Intensity(f64),
    Label(String),
}

impl GridSpec {
    pub fn resolve(&self, dataset: &Dataset) -> Result<GridIntensity> {
        match self {
            GridSpec::Label(l) => dataset.grid(l),
            GridSpec::Intensity(g) => {
                if !(g.is_finite() && *g > 0.0) {
                    return Err(Error::invalid("grid", format!("must be positive, got {g}")));
                }
                Ok(GridIntensity {
                    region: "custom".into(),
                    name: "custom".into(),
                    g_per_kwh: *g,
                    source: GridSource::Override,
                })
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().parse::<f64>() {
            Ok(g) => GridSpec::Intensity(g),
            Err(_) => GridSpec::Label(s.trim().to_owned()),
        })
    }
}

fn computed() -> FactorMode {
    FactorMode::Computed
}

/// A personal what-if query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculationRequest {
    pub before: MobilityProfile,
    pub during: MobilityProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub occupancy: BTreeMap<TransportMode, f64>,
    #[serde(default = "computed")]
    pub factor_mode: FactorMode,
    /// Case preset supplying the grid, the "other" rule and canonical factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<Region>,
    #[serde(default)]
    pub no_modal_shift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalculationResponse {
    pub scenario: u8,
    pub factor_mode: FactorMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridIntensity>,
    pub factors: FactorTable,
    pub before: EmissionsBreakdown,
    pub during: EmissionsBreakdown,
    pub delta: EmissionsBreakdown,
    pub reduction_rate: f64,
}

fn merged_occupancy(base: &OccupancySpec, overrides: &BTreeMap<TransportMode, f64>) -> Result<OccupancySpec> {
    let mut occ = base.clone();
    for (mode, v) in overrides {
        if !(v.is_finite() && *v >= 1.0) {
            return Err(Error::invalid(format!("occupancy.{mode}"), format!("must be >= 1, got {v}")));
        }
        occ.0.insert(*mode, *v);
    }
    Ok(occ)
}

pub fn calculate(dataset: &Dataset, req: &CalculationRequest) -> Result<CalculationResponse> {
    req.before.validate()?;
    req.during.validate()?;
    let case = req.case.map(|r| dataset.case(r)).transpose()?;
    let scenario = req.scenario.or(case.map(|c| c.default_scenario)).unwrap_or(1);
    let grid = match (&req.grid, case) {
        (Some(spec), _) => Some(spec.resolve(dataset)?),
        (None, Some(c)) => Some(dataset.grid(&c.grid)?),
        (None, None) => None,
    };
    let occupancy = merged_occupancy(&dataset.occupancy, &req.occupancy)?;
    let factors = match req.factor_mode {
        FactorMode::Computed => {
            let mut table = dataset.computed_factors(&crate::dataset::FactorParams {
                grid_g_per_kwh: grid.as_ref().map(|g| g.g_per_kwh),
                scenario: dataset.scenario(scenario)?.clone(),
                occupancy,
            })?;
            if let Some(c) = case {
                let base = case_factors(dataset, c, scenario, FactorMode::Computed)?;
                if let Some(other) = base.get(TransportMode::Other) {
                    table.insert(*other);
                }
            }
            table
        }
        FactorMode::Canonical => {
            let c = case.ok_or_else(|| Error::invalid("case", "canonical factors need a case preset"))?;
            let mut table = case_factors(dataset, c, scenario, FactorMode::Canonical)?;
            // Explicit overrides replace the affected published factors.
            let ltm = dataset.private_ltm_km();
            if req.grid.is_some() {
                let g = grid.as_ref().map(|g| g.g_per_kwh);
                let rail = dataset.vehicle(TransportMode::Rail)?;
                table.insert(per_pkt_factor(rail, ltm, occupancy.require(TransportMode::Rail)?, g)?);
            }
            for mode in req.occupancy.keys() {
                let occ = occupancy.require(*mode)?;
                let (lci, mode_ltm) = match mode {
                    TransportMode::Cs => (dataset.vehicle(TransportMode::Car)?, dataset.scenario(scenario)?.ltm_km),
                    TransportMode::Carpool => (dataset.vehicle(TransportMode::Car)?, ltm),
                    m => (dataset.vehicle(*m)?, ltm),
                };
                let g = lci.draws_electricity().then(|| grid.as_ref().map(|g| g.g_per_kwh)).flatten();
                table.insert(per_pkt_factor(lci, mode_ltm, occ, g)?.for_mode(*mode));
            }
            table
        }
    };
    let before = annual_emissions(&req.before, &factors)?;
    let during = annual_emissions(&req.during, &factors)?;
    let delta = if req.no_modal_shift {
        delta_without_modal_shift(&req.before, &req.during, &factors)?
    } else {
        emissions_delta(&req.before, &req.during, &factors)?
    };
    Ok(CalculationResponse {
        scenario,
        factor_mode: req.factor_mode,
        grid,
        reduction_rate: reduction_rate(delta.total, before.total),
        factors,
        before,
        during,
        delta,
    })
}

pub fn calculate_payload(dataset: &Dataset, req: &CalculationRequest) -> Result<String> {
    Ok(to_payload(&calculate(dataset, req)?))
}

/// Parses a request body; malformed JSON maps to `bad_request`.
pub fn parse_calculation_request(body: &str) -> std::result::Result<CalculationRequest, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorsResponse {
    pub grid: GridIntensity,
    pub scenario: LtmScenario,
    pub private_ltm_km: f64,
    pub occupancy: OccupancySpec,
    pub factors: FactorTable,
    /// Per-stage contributions, g CO2-eq per passenger-km.
    pub stages: BTreeMap<TransportMode, BTreeMap<LifeCycleStage, f64>>,
    pub grids: Vec<GridIntensity>,
    pub scenarios: Vec<LtmScenario>,
}

pub fn factors_response(dataset: &Dataset, grid: Option<&GridSpec>, scenario: Option<u8>) -> Result<FactorsResponse> {
    let grid = match grid {
        Some(spec) => spec.resolve(dataset)?,
        None => dataset.grid(DEFAULT_FACTOR_GRID)?,
    };
    let scenario = dataset.scenario(scenario.unwrap_or(1))?.clone();
    let params = crate::dataset::FactorParams {
        grid_g_per_kwh: Some(grid.g_per_kwh),
        scenario: scenario.clone(),
        occupancy: dataset.occupancy.clone(),
    };
    let factors = dataset.computed_factors(&params)?;
    let ltm = dataset.private_ltm_km();
    let mut stages = BTreeMap::new();
    for lci in &dataset.lci.vehicles {
        let g = lci.draws_electricity().then_some(grid.g_per_kwh);
        stages.insert(lci.mode, stage_breakdown(lci, ltm, dataset.occupancy.require(lci.mode)?, g)?);
    }
    let car = dataset.vehicle(TransportMode::Car)?;
    stages.insert(
        TransportMode::Cs,
        stage_breakdown(car, scenario.ltm_km, dataset.occupancy.require(TransportMode::Cs)?, None)?,
    );
    stages.insert(
        TransportMode::Carpool,
        stage_breakdown(car, ltm, dataset.occupancy.require(TransportMode::Carpool)?, None)?,
    );
    Ok(FactorsResponse {
        grid,
        scenario,
        private_ltm_km: ltm,
        occupancy: dataset.occupancy.clone(),
        factors,
        stages,
        grids: dataset.grid_catalogue()?,
        scenarios: dataset.scenarios.scenarios.clone(),
    })
}

pub fn factors_payload(dataset: &Dataset, grid: Option<&GridSpec>, scenario: Option<u8>) -> Result<String> {
    Ok(to_payload(&factors_response(dataset, grid, scenario)?))
}

/// Parameters of one case-study query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CaseQuery {
    #[serde(default)]
    pub scenario: Option<u8>,
    #[serde(default)]
    pub no_modal_shift: bool,
    #[serde(default)]
    pub factor_mode: Option<FactorMode>,
    /// Accept scenarios the case does not list.
    #[serde(default)]
    pub lenient: bool,
}

impl CaseQuery {
    pub fn run_options(&self) -> RunOptions {
        RunOptions { factor_mode: self.factor_mode.unwrap_or_default(), strict: !self.lenient, ..RunOptions::default() }
    }
}

pub fn case_report(dataset: &Dataset, region: Region, q: &CaseQuery) -> Result<crate::cases::CaseStudyReport> {
    if q.no_modal_shift {
        run_no_modal_shift(dataset, region, q.scenario, q.run_options())
    } else {
        run_case_study(dataset, region, q.scenario, q.run_options())
    }
}

pub fn case_payload(dataset: &Dataset, region: Region, q: &CaseQuery) -> Result<String> {
    Ok(to_payload(&case_report(dataset, region, q)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub id: Region,
    pub name: String,
    pub grid: String,
    pub scenarios: Vec<u8>,
    pub default_scenario: u8,
    pub before: MobilityProfile,
    pub during: MobilityProfile,
}

pub fn cases_payload(dataset: &Dataset) -> Result<String> {
    let mut out = Vec::with_capacity(dataset.cases.len());
    for region in Region::ALL {
        let c = dataset.case(region)?;
        let rec = c.inputs.reconstruct(Default::default())?;
        out.push(CaseSummary {
            id: c.id,
            name: c.name.clone(),
            grid: c.grid.clone(),
            scenarios: c.scenarios.clone(),
            default_scenario: c.default_scenario,
            before: rec.before,
            during: rec.during,
        });
    }
    Ok(to_payload(&out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    BusOccupancy,
    Grid,
}

impl SweepKind {
    pub fn default_case(self) -> Region {
        match self {
            SweepKind::BusOccupancy => Region::Calgary,
            SweepKind::Grid => Region::SanFrancisco,
        }
    }

    fn default_points(self) -> Vec<String> {
        let v: &[&str] = match self {
            SweepKind::BusOccupancy => &["5", "10.5", "20", "30", "40"],
            SweepKind::Grid => &["VT", "WA", "CA", "MA", "DC"],
        };
        v.iter().map(|s| s.to_string()).collect()
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "bus-occupancy" | "bus" => Ok(SweepKind::BusOccupancy),
            "grid" => Ok(SweepKind::Grid),
            _ => Err(Error::invalid("parameter", format!("unknown sweep `{s}`, expected bus-occupancy or grid"))),
        }
    }
}

/// A sweep as either explicit points or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepQuery {
    #[serde(default)]
    pub case: Option<Region>,
    /// Values, or grid labels for the grid sweep.
    #[serde(default)]
    pub points: Vec<String>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub recompute_other: bool,
}

fn sweep_points(dataset: &Dataset, kind: SweepKind, q: &SweepQuery) -> Result<Vec<(Option<String>, f64)>> {
    let has_range = q.min.is_some() || q.max.is_some() || q.steps.is_some();
    if has_range && !q.points.is_empty() {
        return Err(Error::invalid("points", "give either points or min/max/steps, not both"));
    }
    if has_range {
        let min = q.min.ok_or_else(|| Error::invalid("min", "required with max/steps"))?;
        let max = q.max.ok_or_else(|| Error::invalid("max", "required with min/steps"))?;
        let steps = q.steps.unwrap_or(5);
        return Ok(linspace(min, max, steps)?.into_iter().map(|v| (None, v)).collect());
    }
    let tokens = if q.points.is_empty() { kind.default_points() } else { q.points.clone() };
    tokens
        .iter()
        .map(|t| match (kind, t.trim().parse::<f64>()) {
            (_, Ok(v)) => Ok((None, v)),
            (SweepKind::Grid, Err(_)) => {
                let g = dataset.grid(t)?;
                Ok((Some(g.region), g.g_per_kwh))
            }
            (SweepKind::BusOccupancy, Err(_)) => Err(Error::invalid("points", format!("`{t}` is not a number"))),
        })
        .collect()
}

pub fn sweep(dataset: &Dataset, kind: SweepKind, q: &SweepQuery) -> Result<SweepResult> {
    let region = q.case.unwrap_or(kind.default_case());
    let points = sweep_points(dataset, kind, q)?;
    let opts = SweepOptions { recompute_other: q.recompute_other, ..SweepOptions::default() };
    match kind {
        SweepKind::BusOccupancy => {
            let values: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
            sweep_bus_occupancy(dataset, region, &values, opts)
        }
        SweepKind::Grid => sweep_electricity_grid(dataset, region, &points, opts),
    }
}

pub fn sweep_payload(dataset: &Dataset, kind: SweepKind, q: &SweepQuery) -> Result<String> {
    Ok(to_payload(&sweep(dataset, kind, q)?))
}
