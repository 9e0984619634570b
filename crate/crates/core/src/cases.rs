//! Case-study reproduction: reconstruct a region's profiles, attach a factor
//! table, and report the before/during delta. Also the one-parameter
//! sensitivity sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::factors::{other_mode_factor, per_pkt_factor, EmissionFactor, FactorTable, OtherRule};
use crate::mobility::{
    annual_emissions, delta_without_modal_shift, emissions_delta, reduction_rate, EmissionsBreakdown, MobilityProfile,
};
use crate::mode::TransportMode;
use crate::redistribution::{CalgaryBefore, CaseInputs, ReconstructOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "nl", alias = "netherlands")]
    Netherlands,
    #[serde(rename = "sf", alias = "san_francisco")]
    SanFrancisco,
    #[serde(rename = "calgary")]
    Calgary,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Netherlands, Region::SanFrancisco, Region::Calgary];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Netherlands => "nl",
            Region::SanFrancisco => "sf",
            Region::Calgary => "calgary",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "nl" | "netherlands" => Ok(Region::Netherlands),
            "sf" | "san_francisco" => Ok(Region::SanFrancisco),
            "calgary" | "yyc" => Ok(Region::Calgary),
            _ => Err(Error::UnknownCase(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtherSpec {
    pub rule: OtherRule,
    pub modes: Vec<TransportMode>,
}

/// Published outputs a case is checked against, with their tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOutputs {
    pub before: BTreeMap<TransportMode, f64>,
    pub during: BTreeMap<TransportMode, f64>,
    pub before_total_km: f64,
    pub during_total_km: f64,
    pub distance_tolerance_km: f64,
    pub middle_delta_kg: f64,
    pub middle_tolerance_kg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_kg: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_tolerance_kg: Option<f64>,
    /// Inclusive whole-percent band.
    pub rate_percent: [f64; 2],
    pub no_modal_shift_kg: f64,
    pub no_modal_shift_tolerance_kg: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_mode_delta_kg: BTreeMap<TransportMode, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudy {
    pub id: Region,
    pub name: String,
    /// Grid label resolved through the dataset's catalogue.
    pub grid: String,
    /// Scenario ids applicable in strict mode.
    pub scenarios: Vec<u8>,
    pub default_scenario: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<OtherSpec>,
    pub inputs: CaseInputs,
    pub canonical_factors: BTreeMap<TransportMode, f64>,
    pub canonical_cs: BTreeMap<u8, f64>,
    pub expected: ExpectedOutputs,
}

impl CaseStudy {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("case_studies.{}.{f}", self.id);
        if !self.scenarios.contains(&self.default_scenario) {
            return Err(Error::invalid(field("default_scenario"), "not among the applicable scenarios"));
        }
        for (mode, g) in &self.canonical_factors {
            if !(*g >= 0.0 && g.is_finite()) {
                return Err(Error::invalid(field(&format!("canonical_factors.{mode}")), "must be non-negative"));
            }
        }
        for id in &self.scenarios {
            if !self.canonical_cs.contains_key(id) {
                return Err(Error::invalid(field("canonical_cs"), format!("no value for scenario {id}")));
            }
        }
        self.inputs.substitution().validate()?;
        let expected_mode = matches!(
            (&self.inputs, self.id),
            (CaseInputs::Netherlands { .. }, Region::Netherlands)
                | (CaseInputs::SanFrancisco { .. }, Region::SanFrancisco)
                | (CaseInputs::Calgary { .. }, Region::Calgary)
        );
        if !expected_mode {
            return Err(Error::invalid(field("inputs.procedure"), "procedure does not match the case id"));
        }
        Ok(())
    }

    pub fn applicable(&self, scenario: u8) -> bool {
        self.scenarios.contains(&scenario)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    /// The published factor set stored with the case.
    #[default]
    Canonical,
    /// Factors recomputed from the inventories.
    Computed,
}

impl FromStr for FactorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical" => Ok(FactorMode::Canonical),
            "computed" => Ok(FactorMode::Computed),
            _ => Err(Error::invalid("factor_mode", format!("expected canonical or computed, got `{s}`"))),
        }
    }
}

impl fmt::Display for FactorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorMode::Canonical => "canonical",
            FactorMode::Computed => "computed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub factor_mode: FactorMode,
    /// Reject scenarios a case does not list.
    pub strict: bool,
    pub calgary_before: CalgaryBefore,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { factor_mode: FactorMode::Canonical, strict: true, calgary_before: CalgaryBefore::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub region: Region,
    pub name: String,
    pub scenario: u8,
    pub factor_mode: FactorMode,
    pub modal_shift: bool,
    pub factors: FactorTable,
    pub before: MobilityProfile,
    pub during: MobilityProfile,
    pub emissions_before: EmissionsBreakdown,
    pub emissions_during: EmissionsBreakdown,
    pub delta: EmissionsBreakdown,
    pub total_delta_kg: f64,
    /// Fraction of before-period emissions saved; positive for a reduction.
    pub reduction_rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn resolve_scenario(case: &CaseStudy, scenario: Option<u8>, strict: bool) -> Result<u8> {
    let id = scenario.unwrap_or(case.default_scenario);
    if strict && !case.applicable(id) {
        return Err(Error::ScenarioNotApplicable { case: case.id.to_string(), scenario: id });
    }
    Ok(id)
}

fn other_factor(case: &CaseStudy, table: &FactorTable) -> Result<Option<EmissionFactor>> {
    let Some(spec) = &case.other else { return Ok(None) };
    let inputs = spec
        .modes
        .iter()
        .map(|m| table.get(*m).copied().ok_or(Error::MissingFactor(*m)))
        .collect::<Result<Vec<_>>>()?;
    other_mode_factor(&inputs, spec.rule).map(Some)
}

/// The factor table a case is evaluated with.
pub fn case_factors(dataset: &Dataset, case: &CaseStudy, scenario: u8, mode: FactorMode) -> Result<FactorTable> {
    dataset.scenario(scenario)?;
    match mode {
        FactorMode::Canonical => {
            let mut table: FactorTable =
                case.canonical_factors.iter().map(|(m, g)| EmissionFactor::canonical(*m, *g)).collect();
            let cs = case.canonical_cs.get(&scenario).ok_or_else(|| {
                Error::invalid(
                    format!("case_studies.{}.canonical_cs", case.id),
                    format!("no value for scenario {scenario}"),
                )
            })?;
            table.insert(EmissionFactor::canonical(TransportMode::Cs, *cs));
            Ok(table)
        }
        FactorMode::Computed => {
            // "other" is tied to the case's default scenario so that only the
            // CS factor moves across scenarios, as in the canonical tables.
            let baseline = dataset.computed_factors(&dataset.factor_params(&case.grid, case.default_scenario)?)?;
            let mut table = dataset.computed_factors(&dataset.factor_params(&case.grid, scenario)?)?;
            if let Some(other) = other_factor(case, &baseline)? {
                table.insert(other);
            }
            Ok(table)
        }
    }
}

fn build_report(
    case: &CaseStudy,
    scenario: u8,
    options: RunOptions,
    modal_shift: bool,
    factors: FactorTable,
) -> Result<CaseStudyReport> {
    let rec = case.inputs.reconstruct(ReconstructOptions { calgary_before: options.calgary_before })?;
    let emissions_before = annual_emissions(&rec.before, &factors)?;
    let emissions_during = annual_emissions(&rec.during, &factors)?;
    let delta = if modal_shift {
        emissions_delta(&rec.before, &rec.during, &factors)?
    } else {
        delta_without_modal_shift(&rec.before, &rec.during, &factors)?
    };
    Ok(CaseStudyReport {
        region: case.id,
        name: case.name.clone(),
        scenario,
        factor_mode: options.factor_mode,
        modal_shift,
        total_delta_kg: delta.total,
        reduction_rate: reduction_rate(delta.total, emissions_before.total),
        factors,
        before: rec.before,
        during: rec.during,
        emissions_before,
        emissions_during,
        delta,
        notes: rec.notes,
    })
}

pub fn run_case_study(
    dataset: &Dataset,
    region: Region,
    scenario: Option<u8>,
    options: RunOptions,
) -> Result<CaseStudyReport> {
    let case = dataset.case(region)?;
    let id = resolve_scenario(case, scenario, options.strict)?;
    let factors = case_factors(dataset, case, id, options.factor_mode)?;
    build_report(case, id, options, true, factors)
}

/// As [`run_case_study`] but counting only the change in driving.
pub fn run_no_modal_shift(
    dataset: &Dataset,
    region: Region,
    scenario: Option<u8>,
    options: RunOptions,
) -> Result<CaseStudyReport> {
    let case = dataset.case(region)?;
    let id = resolve_scenario(case, scenario, options.strict)?;
    let factors = case_factors(dataset, case, id, options.factor_mode)?;
    build_report(case, id, options, false, factors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Re-derive the "other" factor at each point instead of holding it at baseline.
    pub recompute_other: bool,
    pub run: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// The recomputed factor at this point, g CO2-eq per passenger-km.
    pub factor: f64,
    pub total_delta_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub unit: String,
    pub region: Region,
    pub scenario: u8,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn validate(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[1].value <= w[0].value) {
            return Err(Error::domain(format!("{} values must be strictly increasing", self.parameter)));
        }
        Ok(())
    }

    /// First pair of adjacent points whose totals change sign.
    pub fn zero_crossing(&self) -> Option<(f64, f64)> {
        self.points
            .windows(2)
            .find(|w| w[0].total_delta_kg.signum() != w[1].total_delta_kg.signum())
            .map(|w| (w[0].value, w[1].value))
    }
}

fn sorted_points<T: Clone>(items: &[(T, f64)], what: &str) -> Result<Vec<(T, f64)>> {
    if items.is_empty() {
        return Err(Error::invalid("points", "at least one sweep point is required"));
    }
    let mut v = items.to_vec();
    for (_, x) in &v {
        if !(x.is_finite() && *x > 0.0) {
            return Err(Error::domain(format!("{what} must be positive, got {x}")));
        }
    }
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    if v.windows(2).any(|w| w[0].1 == w[1].1) {
        return Err(Error::domain(format!("duplicate {what} value")));
    }
    Ok(v)
}

fn sweep<F>(
    dataset: &Dataset,
    region: Region,
    options: SweepOptions,
    points: Vec<(Option<String>, f64)>,
    parameter: &str,
    unit: &str,
    mut factor_at: F,
) -> Result<SweepResult>
where
    F: FnMut(f64) -> Result<EmissionFactor>,
{
    let case = dataset.case(region)?;
    let id = resolve_scenario(case, None, options.run.strict)?;
    let baseline = case_factors(dataset, case, id, options.run.factor_mode)?;
    let rec = case.inputs.reconstruct(ReconstructOptions { calgary_before: options.run.calgary_before })?;
    let mut out = Vec::with_capacity(points.len());
    for (label, value) in points {
        let factor = factor_at(value)?;
        let mut table = baseline.clone();
        table.insert(factor);
        if options.recompute_other {
            if let Some(other) = other_factor(case, &table)? {
                table.insert(other);
            }
        }
        let delta = emissions_delta(&rec.before, &rec.during, &table)?;
        out.push(SweepPoint { value, label, factor: factor.value, total_delta_kg: delta.total });
    }
    let result = SweepResult { parameter: parameter.into(), unit: unit.into(), region, scenario: id, points: out };
    result.validate()?;
    Ok(result)
}

/// Re-evaluates the case with the bus factor recomputed at each occupancy.
pub fn sweep_bus_occupancy(
    dataset: &Dataset,
    region: Region,
    occupancies: &[f64],
    options: SweepOptions,
) -> Result<SweepResult> {
    let pts: Vec<((), f64)> = occupancies.iter().map(|o| ((), *o)).collect();
    let pts = sorted_points(&pts, "bus occupancy")?;
    let bus = dataset.vehicle(TransportMode::Bus)?.clone();
    let ltm = dataset.private_ltm_km();
    sweep(
        dataset,
        region,
        options,
        pts.into_iter().map(|(_, v)| (None, v)).collect(),
        "bus_occupancy",
        "passengers",
        |occ| {
            if occ < 1.0 {
                return Err(Error::domain(format!("bus occupancy must be at least 1, got {occ}")));
            }
            per_pkt_factor(&bus, ltm, occ, None)
        },
    )
}

/// Re-evaluates the case with the rail factor recomputed at each grid intensity.
pub fn sweep_electricity_grid(
    dataset: &Dataset,
    region: Region,
    grids: &[(Option<String>, f64)],
    options: SweepOptions,
) -> Result<SweepResult> {
    let pts = sorted_points(grids, "grid intensity")?;
    let rail = dataset.vehicle(TransportMode::Rail)?.clone();
    let occ = dataset.occupancy.require(TransportMode::Rail)?;
    let ltm = dataset.private_ltm_km();
    sweep(dataset, region, options, pts, "grid_intensity", "g CO2-eq/kWh", |g| per_pkt_factor(&rail, ltm, occ, Some(g)))
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(Error::invalid("max", "must be finite and not below min"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if max == min {
        return Err(Error::invalid("steps", "a zero-width range takes a single step"));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { max } else { min + h * i as f64 }).collect())
}
