//! Reconstruction of full before/during mobility profiles from the partial
//! quantities each survey publishes.
//!
//! All three procedures share one primitive, [`proportional_allocate`], which
//! splits a distance over modes in proportion to survey weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::MobilityProfile;
use crate::mode::TransportMode;

/// Weights plus not-travelled share must reach 100 within this many points.
pub const PROFILE_SUM_TOLERANCE: f64 = 0.5;

/// How car-sharing km would have been travelled without the service, in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionProfile {
    pub weights: BTreeMap<TransportMode, f64>,
    #[serde(default)]
    pub not_travelled: f64,
}

impl SubstitutionProfile {
    pub fn validate(&self) -> Result<()> {
        for (mode, w) in &self.weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::invalid(format!("substitution.weights.{mode}"), "must be non-negative"));
            }
        }
        if !self.not_travelled.is_finite() || self.not_travelled < 0.0 {
            return Err(Error::invalid("substitution.not_travelled", "must be non-negative"));
        }
        let sum = self.weights.values().sum::<f64>() + self.not_travelled;
        if (sum - 100.0).abs() > PROFILE_SUM_TOLERANCE {
            return Err(Error::invalid("substitution", format!("weights sum to {sum}, expected 100")));
        }
        Ok(())
    }

    /// Weights for every mode except private and shared driving.
    pub fn non_car_weights(&self) -> BTreeMap<TransportMode, f64> {
        self.weights_without(&[TransportMode::Car, TransportMode::Cs])
    }

    pub fn weights_without(&self, excluded: &[TransportMode]) -> BTreeMap<TransportMode, f64> {
        self.weights.iter().filter(|(m, _)| !excluded.contains(m)).map(|(m, w)| (*m, *w)).collect()
    }

    pub fn not_travelled_fraction(&self) -> f64 {
        self.not_travelled / 100.0
    }
}

/// Splits `total` over the weighted modes. The outputs sum to `total`
/// exactly: the last positively weighted mode in mode order absorbs the
/// floating residue.
pub fn proportional_allocate(
    total: f64,
    weights: &BTreeMap<TransportMode, f64>,
) -> Result<BTreeMap<TransportMode, f64>> {
    if !total.is_finite() || total < 0.0 {
        return Err(Error::domain(format!("cannot allocate a negative or non-finite distance ({total})")));
    }
    if weights.values().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::domain("allocation weights must be non-negative"));
    }
    let sum: f64 = weights.values().sum();
    if sum <= 0.0 {
        if total > 0.0 {
            return Err(Error::domain("cannot allocate a positive distance over all-zero weights"));
        }
        return Ok(weights.keys().map(|m| (*m, 0.0)).collect());
    }
    if total == 0.0 {
        return Ok(weights.keys().map(|m| (*m, 0.0)).collect());
    }
    // Snapping shares to multiples of ulp(total) keeps every partial sum exact,
    // so the absorbing mode's residue makes the map sum to `total` bit for bit.
    let quantum = ulp(total);
    let mut out: BTreeMap<TransportMode, f64> =
        weights.iter().map(|(m, w)| (*m, (total * w / sum / quantum).round() * quantum)).collect();
    if let Some(last) = weights.iter().rev().find(|(_, w)| **w > 0.0).map(|(m, _)| *m) {
        let others: f64 = out.iter().filter(|(m, _)| **m != last).map(|(_, v)| v).sum();
        out.insert(last, total - others);
    }
    Ok(out)
}

fn ulp(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1) - x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetherlandsAnchors {
    pub total_before: f64,
    pub car_before: f64,
    pub car_during: f64,
    pub cs_during: f64,
    /// Driving decrease as stated in the survey text, if different from the distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_driving_decrease: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanFranciscoAnchors {
    pub cs_during: f64,
    pub cs_share_of_total: f64,
    pub rail_during: f64,
    pub car_during: f64,
    pub driving_decrease: f64,
    /// Published rail share of total distance; only used for a consistency note.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rail_share_of_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalgaryAnchors {
    pub car_before: f64,
    pub car_decrease: f64,
    pub cs_during: f64,
    pub non_car_before: BTreeMap<TransportMode, f64>,
}

/// Published anchors and substitution profile for one case, tagged by procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "procedure", rename_all = "snake_case")]
pub enum CaseInputs {
    Netherlands { anchors: NetherlandsAnchors, substitution: SubstitutionProfile },
    SanFrancisco { anchors: SanFranciscoAnchors, substitution: SubstitutionProfile },
    Calgary { anchors: CalgaryAnchors, substitution: SubstitutionProfile },
}

/// Where Calgary's non-car "before" distances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalgaryBefore {
    /// The published distances.
    #[default]
    PublishedDistances,
    /// Car distance scaled by the rounded modal split.
    RoundedSplit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReconstructOptions {
    pub calgary_before: CalgaryBefore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub before: MobilityProfile,
    pub during: MobilityProfile,
    /// Data notes on published figures the procedure does not reproduce.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CaseInputs {
    pub fn substitution(&self) -> &SubstitutionProfile {
        match self {
            CaseInputs::Netherlands { substitution, .. }
            | CaseInputs::SanFrancisco { substitution, .. }
            | CaseInputs::Calgary { substitution, .. } => substitution,
        }
    }

    pub fn reconstruct(&self, options: ReconstructOptions) -> Result<Reconstruction> {
        match self {
            CaseInputs::Netherlands { anchors, substitution } => netherlands_profiles(anchors, substitution),
            CaseInputs::SanFrancisco { anchors, substitution } => san_francisco_profiles(anchors, substitution),
            CaseInputs::Calgary { anchors, substitution } => {
                calgary_profiles(anchors, substitution, options.calgary_before)
            }
        }
    }
}

fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("anchors.{field}"), format!("must be positive, got {value}")))
    }
}

fn require_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("anchors.{field}"), format!("must be non-negative, got {value}")))
    }
}

fn profile_from(label: &str, entries: impl IntoIterator<Item = (TransportMode, f64)>) -> MobilityProfile {
    MobilityProfile { label: label.to_owned(), distances: entries.into_iter().collect() }
}

/// Non-car "before" distances split by the substitution profile; the gap
/// opened by reduced driving is split the same way on top of them. Total
/// demand grows by the not-travelled share of the car-sharing km.
pub fn netherlands_profiles(anchors: &NetherlandsAnchors, profile: &SubstitutionProfile) -> Result<Reconstruction> {
    profile.validate()?;
    require_positive("total_before", anchors.total_before)?;
    require_positive("car_before", anchors.car_before)?;
    require_non_negative("car_during", anchors.car_during)?;
    require_non_negative("cs_during", anchors.cs_during)?;
    if anchors.car_before > anchors.total_before {
        return Err(Error::InconsistentAnchors(format!(
            "car distance before ({}) exceeds the total ({})",
            anchors.car_before, anchors.total_before
        )));
    }
    let weights = profile.non_car_weights();
    let before_alt = proportional_allocate(anchors.total_before - anchors.car_before, &weights)?;
    let before_alt_total: f64 = before_alt.values().sum();

    let during_total = anchors.total_before + profile.not_travelled_fraction() * anchors.cs_during;
    let pool = during_total - anchors.car_during - anchors.cs_during - before_alt_total;
    if pool < 0.0 {
        return Err(Error::InconsistentAnchors(format!(
            "driving during participation ({} km) leaves a negative alternative-mode pool ({pool:.1} km)",
            anchors.car_during + anchors.cs_during
        )));
    }
    let extra = proportional_allocate(pool, &weights)?;

    let before = profile_from(
        "before",
        [(TransportMode::Car, anchors.car_before), (TransportMode::Cs, 0.0)]
            .into_iter()
            .chain(before_alt.iter().map(|(m, v)| (*m, *v))),
    );
    let during = profile_from(
        "during",
        [(TransportMode::Car, anchors.car_during), (TransportMode::Cs, anchors.cs_during)]
            .into_iter()
            .chain(before_alt.iter().map(|(m, v)| (*m, v + extra[m]))),
    );

    let mut notes = Vec::new();
    if let Some(reported) = anchors.reported_driving_decrease {
        let implied = anchors.car_before - anchors.car_during - anchors.cs_during;
        if (implied - reported).abs() > 0.5 {
            notes.push(format!(
                "reported driving decrease is {reported} km/year but the anchor distances imply {implied} km/year; distances are used"
            ));
        }
    }
    Ok(Reconstruction { before, during, notes })
}

/// The during total follows from the car-sharing share; remaining during
/// modes take the profile split of what rail and driving leave. The before
/// car distance follows from the driving decrease and the before total
/// removes the not-travelled share of car-sharing km.
pub fn san_francisco_profiles(anchors: &SanFranciscoAnchors, profile: &SubstitutionProfile) -> Result<Reconstruction> {
    profile.validate()?;
    require_positive("cs_during", anchors.cs_during)?;
    require_non_negative("rail_during", anchors.rail_during)?;
    require_non_negative("car_during", anchors.car_during)?;
    if !(anchors.cs_share_of_total > 0.0 && anchors.cs_share_of_total < 1.0) {
        return Err(Error::domain(format!(
            "car-sharing share of total distance must lie in (0, 1), got {}",
            anchors.cs_share_of_total
        )));
    }
    if !(anchors.driving_decrease >= 0.0 && anchors.driving_decrease < 1.0) {
        return Err(Error::domain(format!("driving decrease must lie in [0, 1), got {}", anchors.driving_decrease)));
    }

    let during_total = anchors.cs_during / anchors.cs_share_of_total;
    let rest = during_total - anchors.car_during - anchors.cs_during - anchors.rail_during;
    if rest < 0.0 {
        return Err(Error::InconsistentAnchors(format!(
            "car, car-sharing and rail distances exceed the during total ({during_total:.1} km)"
        )));
    }
    let during_rest = proportional_allocate(
        rest,
        &profile.weights_without(&[TransportMode::Car, TransportMode::Cs, TransportMode::Rail]),
    )?;
    let during = profile_from(
        "during",
        [
            (TransportMode::Car, anchors.car_during),
            (TransportMode::Cs, anchors.cs_during),
            (TransportMode::Rail, anchors.rail_during),
        ]
        .into_iter()
        .chain(during_rest),
    );

    let car_before = (anchors.car_during + anchors.cs_during) / (1.0 - anchors.driving_decrease);
    let before_total = during_total - profile.not_travelled_fraction() * anchors.cs_during;
    let before_pool = before_total - car_before;
    if before_pool < 0.0 {
        return Err(Error::InconsistentAnchors(format!(
            "car distance before ({car_before:.1} km) exceeds the before total ({before_total:.1} km)"
        )));
    }
    let before_alt = proportional_allocate(before_pool, &profile.non_car_weights())?;
    let before = profile_from(
        "before",
        [(TransportMode::Car, car_before), (TransportMode::Cs, 0.0)].into_iter().chain(before_alt),
    );

    let mut notes = Vec::new();
    if let Some(share) = anchors.rail_share_of_total {
        let implied = share * during_total;
        if (implied - anchors.rail_during).abs() > 0.5 {
            notes.push(format!(
                "rail share {share} of the during total implies {implied:.0} km/year; the published {} km/year is used",
                anchors.rail_during
            ));
        }
    }
    Ok(Reconstruction { before, during, notes })
}

/// Total demand is conserved: the driving gap not covered by car sharing is
/// spread over the alternative modes in proportion to their before distances.
pub fn calgary_profiles(
    anchors: &CalgaryAnchors,
    profile: &SubstitutionProfile,
    before_source: CalgaryBefore,
) -> Result<Reconstruction> {
    profile.validate()?;
    require_positive("car_before", anchors.car_before)?;
    require_non_negative("car_decrease", anchors.car_decrease)?;
    require_non_negative("cs_during", anchors.cs_during)?;
    for (mode, km) in &anchors.non_car_before {
        require_non_negative(&format!("non_car_before.{mode}"), *km)?;
    }
    if anchors.car_decrease > anchors.car_before {
        return Err(Error::InconsistentAnchors("car decrease exceeds the car distance before".into()));
    }
    let gap = anchors.car_decrease - anchors.cs_during;
    if gap < 0.0 {
        return Err(Error::InconsistentAnchors(format!(
            "car-sharing distance ({}) exceeds the car decrease ({})",
            anchors.cs_during, anchors.car_decrease
        )));
    }

    let mut notes = Vec::new();
    let before_alt = match before_source {
        CalgaryBefore::PublishedDistances => anchors.non_car_before.clone(),
        CalgaryBefore::RoundedSplit => {
            let car_weight = profile.weights.get(&TransportMode::Car).copied().unwrap_or(0.0);
            if car_weight <= 0.0 {
                return Err(Error::invalid("substitution.weights.car", "rounded split needs a positive car weight"));
            }
            let derived: BTreeMap<_, _> =
                profile.non_car_weights().into_iter().map(|(m, w)| (m, anchors.car_before * w / car_weight)).collect();
            let published: f64 = anchors.non_car_before.values().sum();
            let total: f64 = derived.values().sum();
            let worst = derived
                .iter()
                .filter_map(|(m, km)| {
                    let p = anchors.non_car_before.get(m).copied().filter(|p| *p > 0.0)?;
                    Some((*m, km / p - 1.0))
                })
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
            if let Some((mode, rel)) = worst {
                notes.push(format!(
                    "rounded modal split gives {total:.0} km/year of non-car travel before against the published {published:.0}; \
                     largest per-mode gap is {mode} at {:+.1}%",
                    rel * 100.0
                ));
            }
            derived
        }
    };
    let extra = proportional_allocate(gap, &before_alt)?;

    let before = profile_from(
        "before",
        [(TransportMode::Car, anchors.car_before), (TransportMode::Cs, 0.0)]
            .into_iter()
            .chain(before_alt.iter().map(|(m, v)| (*m, *v))),
    );
    let during = profile_from(
        "during",
        [(TransportMode::Car, anchors.car_before - anchors.car_decrease), (TransportMode::Cs, anchors.cs_during)]
            .into_iter()
            .chain(before_alt.iter().map(|(m, v)| (*m, v + extra[m]))),
    );
    Ok(Reconstruction { before, during, notes })
}
