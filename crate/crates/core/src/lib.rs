//! Life-cycle greenhouse-gas model of car-sharing participation.
//!
//! Per-passenger-km emission factors are built from vehicle inventories and
//! regional electricity grids ([`factors`]); before/during mobility profiles
//! are reconstructed from survey anchors ([`redistribution`]) and compared
//! ([`mobility`], [`cases`]). [`fleet`] holds the vehicle-lifetime analytics
//! and [`api`] the wire format shared by the CLI and HTTP service.

// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod cases;
pub mod dataset;
pub mod error;
pub mod factors;
pub mod fleet;
pub mod mobility;
pub mod mode;
pub mod redistribution;
pub mod render;

pub use cases::{
    run_case_study, run_no_modal_shift, sweep_bus_occupancy, sweep_electricity_grid, CaseStudy, CaseStudyReport,
    FactorMode, Region, RunOptions, SweepOptions, SweepPoint, SweepResult,
};
pub use dataset::{Dataset, GridIntensity};
pub use error::{Error, Result};
pub use factors::{
    carpool_factor, cs_factor, grid_electricity_factor, other_mode_factor, per_pkt_factor, EmissionFactor,
    EnergyProfile, EnergySource, FactorTable, LifeCycleStage, LtmScenario, OccupancySpec, OtherRule, Provenance,
    TechEmissionFactors, VehicleLci,
};
pub use mobility::{annual_emissions, delta_without_modal_shift, emissions_delta, EmissionsBreakdown, MobilityProfile};
pub use mode::TransportMode;
pub use redistribution::{proportional_allocate, CaseInputs, Reconstruction, SubstitutionProfile};
