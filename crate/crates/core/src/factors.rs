//! Per-passenger-km life-cycle emission factors.
//!
//! A factor spreads the lifetime-fixed masses of a vehicle over its lifetime
//! mileage, adds the per-vehicle-km masses and the electricity drawn per
//! vehicle-km at the regional grid intensity, and divides the vehicle-km
//! total by the average occupancy.
//!
//! Units: inventory masses are kg CO2-eq, energy is MJ, grid intensity is
//! g CO2-eq per kWh and the resulting factor is g CO2-eq per passenger-km.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::TransportMode;

/// MJ per kWh, exact.
pub const MJ_PER_KWH: f64 = 3.6;

/// Average passengers in a carpooling car.
pub const CARPOOL_OCCUPANCY: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeCycleStage {
    Infrastructure,
    Manufacturing,
    Fuels,
    Operation,
}

impl LifeCycleStage {
    pub const ALL: [LifeCycleStage; 4] = [
        LifeCycleStage::Infrastructure,
        LifeCycleStage::Manufacturing,
        LifeCycleStage::Fuels,
        LifeCycleStage::Operation,
    ];
}

/// Life-cycle inventory of one vehicle type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleLci {
    pub mode: TransportMode,
    /// kg CO2-eq per vehicle lifetime.
    #[serde(default)]
    pub fixed_lifetime_kg: BTreeMap<LifeCycleStage, f64>,
    /// kg CO2-eq per vehicle-km.
    #[serde(default)]
    pub per_vkt_kg: BTreeMap<LifeCycleStage, f64>,
    /// MJ of electricity per vehicle-km.
    #[serde(default)]
    pub per_vkt_mj: BTreeMap<LifeCycleStage, f64>,
}

impl VehicleLci {
    pub fn empty(mode: TransportMode) -> Self {
        VehicleLci {
            mode,
            fixed_lifetime_kg: BTreeMap::new(),
            per_vkt_kg: BTreeMap::new(),
            per_vkt_mj: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let maps = [
            ("fixed_lifetime_kg", &self.fixed_lifetime_kg),
            ("per_vkt_kg", &self.per_vkt_kg),
            ("per_vkt_mj", &self.per_vkt_mj),
        ];
        for (name, map) in maps {
            for (stage, value) in map {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::invalid(
                        format!("lci.{}.{name}", self.mode),
                        format!("{stage:?} entry must be a non-negative number, got {value}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn draws_electricity(&self) -> bool {
        self.per_vkt_mj.values().any(|mj| *mj > 0.0)
    }

    /// Stage-wise sum of two inventories.
    pub fn merged(&self, other: &VehicleLci) -> VehicleLci {
        fn add(a: &BTreeMap<LifeCycleStage, f64>, b: &BTreeMap<LifeCycleStage, f64>) -> BTreeMap<LifeCycleStage, f64> {
            let mut out = a.clone();
            for (stage, v) in b {
                *out.entry(*stage).or_insert(0.0) += v;
            }
            out
        }
        VehicleLci {
            mode: self.mode,
            fixed_lifetime_kg: add(&self.fixed_lifetime_kg, &other.fixed_lifetime_kg),
            per_vkt_kg: add(&self.per_vkt_kg, &other.per_vkt_kg),
            per_vkt_mj: add(&self.per_vkt_mj, &other.per_vkt_mj),
        }
    }
}

/// A lifetime-mileage hypothesis for shared vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct LtmScenario {
    pub id: u8,
    pub label: String,
    pub age_years: f64,
    pub annual_km: f64,
    pub ltm_km: f64,
}

#[derive(Deserialize)]
struct RawScenario {
    id: u8,
    label: String,
    age_years: f64,
    annual_km: f64,
}

impl TryFrom<RawScenario> for LtmScenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        LtmScenario::new(raw.id, raw.label, raw.age_years, raw.annual_km)
    }
}

impl LtmScenario {
    /// The lifetime mileage is always age times annual mileage.
    pub fn new(id: u8, label: impl Into<String>, age_years: f64, annual_km: f64) -> Result<Self> {
        if !(age_years > 0.0 && age_years.is_finite()) {
            return Err(Error::invalid("scenario.age_years", "must be positive"));
        }
        if !(annual_km > 0.0 && annual_km.is_finite()) {
            return Err(Error::invalid("scenario.annual_km", "must be positive"));
        }
        Ok(LtmScenario { id, label: label.into(), age_years, annual_km, ltm_km: age_years * annual_km })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    #[serde(alias = "uranium")]
    Nuclear,
    Coal,
    Hydro,
    NaturalGas,
    Wind,
    Solar,
    Biomass,
    Petroleum,
}

impl fmt::Display for EnergySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EnergySource::Nuclear => "nuclear",
            EnergySource::Coal => "coal",
            EnergySource::Hydro => "hydro",
            EnergySource::NaturalGas => "natural_gas",
            EnergySource::Wind => "wind",
            EnergySource::Solar => "solar",
            EnergySource::Biomass => "biomass",
            EnergySource::Petroleum => "petroleum",
        };
        f.write_str(s)
    }
}

/// Electricity generation mix of a region, as fractions of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub region: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub shares: BTreeMap<EnergySource, f64>,
}

/// Shares are published to the whole percent, so the sum may be off by this much.
pub const SHARE_SUM_TOLERANCE: f64 = 0.01;

impl EnergyProfile {
    pub fn validate(&self) -> Result<()> {
        let field = || format!("grids.{}.shares", self.region);
        for (source, share) in &self.shares {
            if !(0.0..=1.0).contains(share) {
                return Err(Error::invalid(field(), format!("{source} share {share} outside [0, 1]")));
            }
        }
        let sum: f64 = self.shares.values().sum();
        if (sum - 1.0).abs() > SHARE_SUM_TOLERANCE {
            return Err(Error::invalid(field(), format!("shares sum to {sum}, expected 1.0")));
        }
        Ok(())
    }
}

/// Full-fuel-cycle emission factor per generation technology, g CO2-eq per kWh.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TechEmissionFactors(pub BTreeMap<EnergySource, f64>);

impl TechEmissionFactors {
    pub fn get(&self, source: EnergySource) -> Option<f64> {
        self.0.get(&source).copied()
    }

    pub fn validate(&self) -> Result<()> {
        for (source, g) in &self.0 {
            if !(*g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("grids.tech_factors.{source}"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        TechEmissionFactors(self.0.iter().map(|(s, g)| (*s, g * k)).collect())
    }
}

/// Average passengers per vehicle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupancySpec(pub BTreeMap<TransportMode, f64>);

impl OccupancySpec {
    /// Shared cars inherit the private-car occupancy; active modes carry one
    /// passenger by convention.
    pub fn get(&self, mode: TransportMode) -> Option<f64> {
        match (self.0.get(&mode), mode) {
            (Some(v), _) => Some(*v),
            (None, TransportMode::Cs) => self.0.get(&TransportMode::Car).copied(),
            (None, TransportMode::Bicycle | TransportMode::Walking) => Some(1.0),
            (None, _) => None,
        }
    }

    pub fn require(&self, mode: TransportMode) -> Result<f64> {
        self.get(mode).ok_or_else(|| Error::invalid(format!("occupancy.{mode}"), "no occupancy configured"))
    }

    pub fn validate(&self) -> Result<()> {
        for (mode, occ) in &self.0 {
            if !(*occ >= 1.0 && occ.is_finite()) {
                return Err(Error::invalid(format!("occupancy.{mode}"), format!("must be >= 1, got {occ}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Computed,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactor {
    pub mode: TransportMode,
    /// g CO2-eq per passenger-km.
    pub value: f64,
    pub provenance: Provenance,
}

impl EmissionFactor {
    pub fn computed(mode: TransportMode, value: f64) -> Self {
        EmissionFactor { mode, value, provenance: Provenance::Computed }
    }

    pub fn canonical(mode: TransportMode, value: f64) -> Self {
        EmissionFactor { mode, value, provenance: Provenance::Canonical }
    }

    pub fn for_mode(self, mode: TransportMode) -> Self {
        EmissionFactor { mode, ..self }
    }
}

/// Emission factors keyed by mode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorTable(pub BTreeMap<TransportMode, EmissionFactor>);

impl FactorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, factor: EmissionFactor) {
        self.0.insert(factor.mode, factor);
    }

    pub fn get(&self, mode: TransportMode) -> Option<&EmissionFactor> {
        self.0.get(&mode)
    }

    pub fn value(&self, mode: TransportMode) -> Option<f64> {
        self.0.get(&mode).map(|f| f.value)
    }

    pub fn require(&self, mode: TransportMode) -> Result<f64> {
        self.value(mode).ok_or(Error::MissingFactor(mode))
    }

    pub fn iter(&self) -> impl Iterator<Item = &EmissionFactor> {
        self.0.values()
    }
}

impl FromIterator<EmissionFactor> for FactorTable {
    fn from_iter<I: IntoIterator<Item = EmissionFactor>>(iter: I) -> Self {
        let mut table = FactorTable::new();
        for f in iter {
            table.insert(f);
        }
        table
    }
}

/// Share-weighted mean of the technology factors, g CO2-eq per kWh.
pub fn grid_electricity_factor(profile: &EnergyProfile, tech: &TechEmissionFactors) -> Result<f64> {
    profile.validate()?;
    let mut total = 0.0;
    for (source, share) in &profile.shares {
        if *share == 0.0 {
            continue;
        }
        let g = tech.get(*source).ok_or(Error::MissingTechFactor(*source))?;
        total += share * g;
    }
    Ok(total)
}

/// Contribution of each life-cycle stage to the per-PKT factor, in g CO2-eq per PKT.
pub fn stage_breakdown(
    lci: &VehicleLci,
    ltm_km: f64,
    occupancy: f64,
    grid_g_per_kwh: Option<f64>,
) -> Result<BTreeMap<LifeCycleStage, f64>> {
    if !(ltm_km > 0.0) || !ltm_km.is_finite() {
        return Err(Error::domain(format!("lifetime mileage must be positive, got {ltm_km}")));
    }
    if !(occupancy >= 1.0) || !occupancy.is_finite() {
        return Err(Error::domain(format!("occupancy must be at least 1, got {occupancy}")));
    }
    let grid_kg_per_kwh = match grid_g_per_kwh {
        Some(g) if g.is_finite() && g >= 0.0 => g / 1000.0,
        Some(g) => return Err(Error::domain(format!("grid intensity must be non-negative, got {g}"))),
        None if lci.draws_electricity() => return Err(Error::MissingGrid(lci.mode)),
        None => 0.0,
    };

    let mut kg_per_vkt: BTreeMap<LifeCycleStage, f64> = BTreeMap::new();
    for (stage, kg) in &lci.fixed_lifetime_kg {
        *kg_per_vkt.entry(*stage).or_default() += kg / ltm_km;
    }
    for (stage, kg) in &lci.per_vkt_kg {
        *kg_per_vkt.entry(*stage).or_default() += kg;
    }
    for (stage, mj) in &lci.per_vkt_mj {
        *kg_per_vkt.entry(*stage).or_default() += mj / MJ_PER_KWH * grid_kg_per_kwh;
    }
    Ok(kg_per_vkt.into_iter().map(|(stage, kg)| (stage, kg * 1000.0 / occupancy)).collect())
}

pub fn per_pkt_factor(
    lci: &VehicleLci,
    ltm_km: f64,
    occupancy: f64,
    grid_g_per_kwh: Option<f64>,
) -> Result<EmissionFactor> {
    let stages = stage_breakdown(lci, ltm_km, occupancy, grid_g_per_kwh)?;
    Ok(EmissionFactor::computed(lci.mode, stages.values().sum()))
}

/// The private-car inventory evaluated at a shared-vehicle lifetime mileage.
pub fn cs_factor(car_lci: &VehicleLci, scenario: &LtmScenario, occupancy: f64) -> Result<EmissionFactor> {
    Ok(per_pkt_factor(car_lci, scenario.ltm_km, occupancy, None)?.for_mode(TransportMode::Cs))
}

pub fn carpool_factor(car_lci: &VehicleLci, ltm_km: f64) -> Result<EmissionFactor> {
    Ok(per_pkt_factor(car_lci, ltm_km, CARPOOL_OCCUPANCY, None)?.for_mode(TransportMode::Carpool))
}

/// How the aggregate "other" factor is derived from the other modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtherRule {
    /// Mean halved, standing in for zero-emission walking inside "other".
    NlHalvedMean,
    PlainMean,
}

pub fn other_mode_factor(factors: &[EmissionFactor], rule: OtherRule) -> Result<EmissionFactor> {
    if factors.is_empty() {
        return Err(Error::domain("cannot derive the `other` factor from an empty mode set"));
    }
    let mean = factors.iter().map(|f| f.value).sum::<f64>() / factors.len() as f64;
    let value = match rule {
        OtherRule::PlainMean => mean,
        OtherRule::NlHalvedMean => mean / 2.0,
    };
    let provenance = if factors.iter().all(|f| f.provenance == Provenance::Canonical) {
        Provenance::Canonical
    } else {
        Provenance::Computed
    };
    Ok(EmissionFactor { mode: TransportMode::Other, value, provenance })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use LifeCycleStage::*;

    pub fn car() -> VehicleLci {
        VehicleLci {
            mode: TransportMode::Car,
            fixed_lifetime_kg: [(Infrastructure, 14000.0), (Manufacturing, 8500.0)].into(),
            per_vkt_kg: [(Fuels, 0.038), (Operation, 0.230)].into(),
            per_vkt_mj: BTreeMap::new(),
        }
    }

    pub fn bus() -> VehicleLci {
        VehicleLci {
            mode: TransportMode::Bus,
            fixed_lifetime_kg: BTreeMap::new(),
            per_vkt_kg: [(Infrastructure, 0.042), (Manufacturing, 0.199), (Fuels, 0.236), (Operation, 1.491)].into(),
            per_vkt_mj: BTreeMap::new(),
        }
    }

    pub fn rail() -> VehicleLci {
        VehicleLci {
            mode: TransportMode::Rail,
            fixed_lifetime_kg: BTreeMap::new(),
            per_vkt_kg: [(Infrastructure, 1.081), (Manufacturing, 0.038)].into(),
            per_vkt_mj: [(Infrastructure, 8.9), (Operation, 30.0)].into(),
        }
    }

    pub fn tech() -> TechEmissionFactors {
        use EnergySource::*;
        TechEmissionFactors(
            [
                (Nuclear, 12.0),
                (Coal, 820.0),
                (Hydro, 24.0),
                (NaturalGas, 490.0),
                (Wind, 11.0),
                (Solar, 44.0),
                (Biomass, 230.0),
                (Petroleum, 230.0),
            ]
            .into(),
        )
    }

    pub fn profile(region: &str, shares: &[(EnergySource, f64)]) -> EnergyProfile {
        EnergyProfile { region: region.into(), name: None, shares: shares.iter().copied().collect() }
    }

    pub fn alberta() -> EnergyProfile {
        use EnergySource::*;
        profile("AB", &[(Coal, 0.47), (Hydro, 0.03), (NaturalGas, 0.40), (Wind, 0.07), (Biomass, 0.03)])
    }

    pub fn netherlands() -> EnergyProfile {
        use EnergySource::*;
        profile(
            "NL",
            &[
                (Nuclear, 0.01),
                (Coal, 0.14),
                (NaturalGas, 0.40),
                (Wind, 0.01),
                (Solar, 0.01),
                (Biomass, 0.04),
                (Petroleum, 0.39),
            ],
        )
    }
}
