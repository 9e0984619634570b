//! Bundled datasets and the factor tables derived from them.
//!
//! Every file is embedded at compile time. A data directory may override any
//! subset of them; files missing from the directory fall back to the
//! embedded copy.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cases::CaseStudy;
use crate::error::{Error, Result};
use crate::factors::{
    carpool_factor, cs_factor, grid_electricity_factor, per_pkt_factor, EmissionFactor, EnergyProfile, FactorTable,
    LtmScenario, OccupancySpec, TechEmissionFactors, VehicleLci,
};
use crate::fleet::{FleetUsageEntry, LifetimeEntry};
use crate::mode::TransportMode;

const LCI_JSON: &str = include_str!("../data/lci.json");
const GRIDS_JSON: &str = include_str!("../data/grids.json");
const SCENARIOS_JSON: &str = include_str!("../data/scenarios.json");
const OCCUPANCY_JSON: &str = include_str!("../data/occupancy.json");
const FLEET_JSON: &str = include_str!("../data/fleet.json");
const CASE_JSON: [(&str, &str); 3] = [
    ("nl", include_str!("../data/case_studies/nl.json")),
    ("sf", include_str!("../data/case_studies/sf.json")),
    ("calgary", include_str!("../data/case_studies/calgary.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LciTable {
    pub vehicles: Vec<VehicleLci>,
    /// Literature factors without an inventory, g CO2-eq per passenger-km.
    #[serde(default)]
    pub constant_factors: BTreeMap<TransportMode, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedGrid {
    pub region: String,
    pub name: String,
    pub g_per_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridData {
    pub tech_factors: TechEmissionFactors,
    pub profiles: Vec<EnergyProfile>,
    #[serde(default)]
    pub fixed: Vec<FixedGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Mix,
    Fixed,
    Override,
}

/// A resolved grid intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridIntensity {
    pub region: String,
    pub name: String,
    pub g_per_kwh: f64,
    pub source: GridSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivateCar {
    pub age_years: f64,
    pub annual_km: f64,
}

impl PrivateCar {
    pub fn ltm_km(&self) -> f64 {
        self.age_years * self.annual_km
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub private_car: PrivateCar,
    pub scenarios: Vec<LtmScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedUsage {
    pub per_city_km: BTreeMap<String, f64>,
    pub average_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressRelease {
    pub total_km: f64,
    pub vehicles: f64,
    pub period_years: f64,
    pub published_annual_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetData {
    pub usage: Vec<FleetUsageEntry>,
    pub published_usage: PublishedUsage,
    pub press_release: PressRelease,
    pub lifetimes: Vec<LifetimeEntry>,
    pub published_lifetime_average: LifetimeEntry,
}

/// Everything the engine needs, loaded once and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub lci: LciTable,
    pub grids: GridData,
    pub scenarios: ScenarioSet,
    pub occupancy: OccupancySpec,
    pub fleet: FleetData,
    pub cases: Vec<CaseStudy>,
}

fn parse<T: DeserializeOwned>(name: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Dataset { name: name.to_owned(), source })
}

fn read_or(dir: Option<&Path>, rel: &str, embedded: &str) -> Result<String> {
    let Some(dir) = dir else { return Ok(embedded.to_owned()) };
    let path: PathBuf = dir.join(rel);
    if !path.exists() {
        return Ok(embedded.to_owned());
    }
    fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
}

/// Per-grid and per-scenario knobs for computing a factor table.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorParams {
    /// Without a grid, modes that draw electricity are left out of the table.
    pub grid_g_per_kwh: Option<f64>,
    pub scenario: LtmScenario,
    pub occupancy: OccupancySpec,
}

impl Dataset {
    /// The embedded datasets.
    pub fn bundled() -> Result<Self> {
        Self::load(None)
    }

    /// Loads from `dir` where a file exists there, embedded copies otherwise.
    pub fn load(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            if !d.is_dir() {
                return Err(Error::Io {
                    path: d.to_path_buf(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "data directory not found"),
                });
            }
        }
        let mut cases = Vec::with_capacity(CASE_JSON.len());
        for (id, embedded) in CASE_JSON {
            let rel = format!("case_studies/{id}.json");
            cases.push(parse::<CaseStudy>(&rel, &read_or(dir, &rel, embedded)?)?);
        }
        let data = Dataset {
            lci: parse("lci.json", &read_or(dir, "lci.json", LCI_JSON)?)?,
            grids: parse("grids.json", &read_or(dir, "grids.json", GRIDS_JSON)?)?,
            scenarios: parse("scenarios.json", &read_or(dir, "scenarios.json", SCENARIOS_JSON)?)?,
            occupancy: parse("occupancy.json", &read_or(dir, "occupancy.json", OCCUPANCY_JSON)?)?,
            fleet: parse("fleet.json", &read_or(dir, "fleet.json", FLEET_JSON)?)?,
            cases,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        for lci in &self.lci.vehicles {
            lci.validate()?;
        }
        for (mode, g) in &self.lci.constant_factors {
            if !(*g >= 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("lci.constant_factors.{mode}"), "must be non-negative"));
            }
        }
        if let Some(g) = self.lci.constant_factors.get(&TransportMode::Walking) {
            if *g != 0.0 {
                return Err(Error::invalid("lci.constant_factors.walking", "walking must be zero"));
            }
        }
        self.grids.tech_factors.validate()?;
        for p in &self.grids.profiles {
            p.validate()?;
        }
        for f in &self.grids.fixed {
            if !(f.g_per_kwh > 0.0 && f.g_per_kwh.is_finite()) {
                return Err(Error::invalid(format!("grids.fixed.{}", f.region), "must be positive"));
            }
        }
        self.occupancy.validate()?;
        for case in &self.cases {
            case.validate()?;
            self.grid(&case.grid)?;
            for id in &case.scenarios {
                self.scenario(*id)?;
            }
        }
        Ok(())
    }

    pub fn vehicle(&self, mode: TransportMode) -> Result<&VehicleLci> {
        self.lci
            .vehicles
            .iter()
            .find(|v| v.mode == mode)
            .ok_or_else(|| Error::invalid(format!("lci.{mode}"), "no inventory for this mode"))
    }

    pub fn scenario(&self, id: u8) -> Result<&LtmScenario> {
        self.scenarios.scenarios.iter().find(|s| s.id == id).ok_or(Error::UnknownScenario(id))
    }

    pub fn private_ltm_km(&self) -> f64 {
        self.scenarios.private_car.ltm_km()
    }

    /// Resolves a region label (case-insensitive) to an intensity. Mixes
    /// are computed from their technology shares.
    pub fn grid(&self, label: &str) -> Result<GridIntensity> {
        let want = label.trim();
        if let Some(p) = self.grids.profiles.iter().find(|p| p.region.eq_ignore_ascii_case(want)) {
            return Ok(GridIntensity {
                region: p.region.clone(),
                name: p.name.clone().unwrap_or_else(|| p.region.clone()),
                g_per_kwh: grid_electricity_factor(p, &self.grids.tech_factors)?,
                source: GridSource::Mix,
            });
        }
        if let Some(f) = self.grids.fixed.iter().find(|f| f.region.eq_ignore_ascii_case(want)) {
            return Ok(GridIntensity {
                region: f.region.clone(),
                name: f.name.clone(),
                g_per_kwh: f.g_per_kwh,
                source: GridSource::Fixed,
            });
        }
        Err(Error::UnknownGrid(label.to_owned()))
    }

    /// All known grids in file order, mixes first.
    pub fn grid_catalogue(&self) -> Result<Vec<GridIntensity>> {
        self.grids
            .profiles
            .iter()
            .map(|p| p.region.as_str())
            .chain(self.grids.fixed.iter().map(|f| f.region.as_str()))
            .map(|r| self.grid(r))
            .collect()
    }

    pub fn case(&self, id: crate::cases::Region) -> Result<&CaseStudy> {
        self.cases.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCase(id.as_str().to_owned()))
    }

    /// Parameters for the default grid label and scenario id.
    pub fn factor_params(&self, grid: &str, scenario: u8) -> Result<FactorParams> {
        Ok(FactorParams {
            grid_g_per_kwh: Some(self.grid(grid)?.g_per_kwh),
            scenario: self.scenario(scenario)?.clone(),
            occupancy: self.occupancy.clone(),
        })
    }

    /// Computed factors for every mode with an inventory or constant.
    /// `other` is case-specific and not included.
    pub fn computed_factors(&self, params: &FactorParams) -> Result<FactorTable> {
        use TransportMode::*;
        if let Some(g) = params.grid_g_per_kwh {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid("grid", format!("must be positive, got {g}")));
            }
        }
        params.occupancy.validate()?;
        let ltm = self.private_ltm_km();
        let mut table = FactorTable::new();
        for lci in &self.lci.vehicles {
            let grid = match (lci.draws_electricity(), params.grid_g_per_kwh) {
                (false, _) => None,
                (true, Some(g)) => Some(g),
                (true, None) => continue,
            };
            let occ = params.occupancy.require(lci.mode)?;
            table.insert(per_pkt_factor(lci, ltm, occ, grid)?);
        }
        let car = self.vehicle(Car)?;
        table.insert(cs_factor(car, &params.scenario, params.occupancy.require(Cs)?)?);
        let carpool = match params.occupancy.0.get(&Carpool) {
            Some(occ) => per_pkt_factor(car, ltm, *occ, None)?.for_mode(Carpool),
            None => carpool_factor(car, ltm)?,
        };
        table.insert(carpool);
        for (mode, g) in &self.lci.constant_factors {
            table.insert(EmissionFactor::computed(*mode, *g));
        }
        Ok(table)
    }
}
