//! Aligned-text and CSV renderings. Only these apply display rounding; JSON
//! payloads carry full precision.

use std::fmt::Write;

use crate::api::FactorsResponse;
use crate::cases::{CaseStudyReport, SweepResult};
use crate::fleet::{FleetMileage, LifetimeEntry, RegressionResult};
use crate::mode::TransportMode;

fn modes_of(report: &CaseStudyReport) -> Vec<TransportMode> {
    let mut modes: Vec<TransportMode> =
        report.before.distances.keys().chain(report.during.distances.keys()).copied().collect();
    modes.sort();
    modes.dedup();
    // Shared driving first, as in the published tables.
    modes.sort_by_key(|m| (*m != TransportMode::Cs, *m));
    modes
}

pub fn case_table(r: &CaseStudyReport) -> String {
    let mut out = String::new();
    let shift = if r.modal_shift { "" } else { ", without modal shift" };
    let _ = writeln!(out, "{} (scenario {}, {} factors{shift})", r.name, r.scenario, r.factor_mode);
    let _ = writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>10} {:>12}",
        "Mode", "Before (km)", "During (km)", "g/PKT", "Delta (kg)"
    );
    for m in modes_of(r) {
        let factor = r.factors.value(m).map_or_else(|| "-".to_owned(), |g| format!("{g:.0}"));
        let _ = writeln!(
            out,
            "{:<12} {:>12.0} {:>12.0} {:>10} {:>12.0}",
            m.label(),
            r.before.distance(m),
            r.during.distance(m),
            factor,
            r.delta.get(m)
        );
    }
    let _ = writeln!(
        out,
        "{:<12} {:>12.0} {:>12.0} {:>10} {:>12.0}",
        "Total",
        r.before.total_km(),
        r.during.total_km(),
        "",
        r.total_delta_kg
    );
    let _ = writeln!(
        out,
        "Emissions before {:.0} kg, during {:.0} kg, reduction {:.1}%",
        r.emissions_before.total,
        r.emissions_during.total,
        r.reduction_rate * 100.0
    );
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

pub fn case_csv(r: &CaseStudyReport) -> String {
    let mut out = String::from("mode,before_km,during_km,factor_g_per_pkt,delta_kg\n");
    for m in modes_of(r) {
        let factor = r.factors.value(m).map_or_else(String::new, |g| g.to_string());
        let _ = writeln!(out, "{m},{},{},{factor},{}", r.before.distance(m), r.during.distance(m), r.delta.get(m));
    }
    let _ = writeln!(out, "total,{},{},,{}", r.before.total_km(), r.during.total_km(), r.total_delta_kg);
    out
}

pub fn sweep_table(s: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} sweep for {} (scenario {})", s.parameter, s.region, s.scenario);
    let _ = writeln!(out, "{:<8} {:>14} {:>10} {:>12}", "Label", s.unit, "g/PKT", "Delta (kg)");
    for p in &s.points {
        let _ = writeln!(
            out,
            "{:<8} {:>14.1} {:>10.1} {:>12.1}",
            p.label.as_deref().unwrap_or("-"),
            p.value,
            p.factor,
            p.total_delta_kg
        );
    }
    out
}

pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = format!("{},label,factor_g_per_pkt,total_delta_kg\n", s.parameter);
    for p in &s.points {
        let _ = writeln!(out, "{},{},{},{}", p.value, p.label.as_deref().unwrap_or(""), p.factor, p.total_delta_kg);
    }
    out
}

pub fn factors_table(f: &FactorsResponse) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Grid {} ({}): {:.1} g/kWh; CS scenario {} (LTM {:.0} km); private LTM {:.0} km",
        f.grid.region, f.grid.name, f.grid.g_per_kwh, f.scenario.id, f.scenario.ltm_km, f.private_ltm_km
    );
    let _ = writeln!(out, "{:<12} {:>10} {:>11}", "Mode", "g/PKT", "provenance");
    for ef in f.factors.iter() {
        let prov = match ef.provenance {
            crate::factors::Provenance::Computed => "computed",
            crate::factors::Provenance::Canonical => "canonical",
        };
        let _ = writeln!(out, "{:<12} {:>10.1} {:>11}", ef.mode.label(), ef.value, prov);
    }
    out
}

pub fn factors_csv(f: &FactorsResponse) -> String {
    let mut out = String::from("mode,g_per_pkt\n");
    for ef in f.factors.iter() {
        let _ = writeln!(out, "{},{}", ef.mode, ef.value);
    }
    out
}

pub fn regression_table(results: &[RegressionResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>12} {:>12} {:>9} {:>10} {:>11} {:>9}",
        "Variable", "Coef.", "Std. err.", "z", "P", "Pseudo R2", "N"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:<10} {:>12.6} {:>12.6} {:>9.2} {:>10.3e} {:>11.4} {:>9}",
            r.predictor, r.coefficient, r.std_error, r.z_value, r.p_value, r.pseudo_r2, r.n_observations
        );
        if let Some(w) = &r.warning {
            let _ = writeln!(out, "warning: {w}");
        }
    }
    out
}

pub fn fleet_table(m: &FleetMileage) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<18} {:>14} {:>10}", "City", "km/year", "rounded");
    for c in &m.per_city {
        let _ = writeln!(out, "{:<18} {:>14.1} {:>10.0}", c.city, c.annual_km, c.rounded_km);
    }
    let _ = writeln!(out, "{:<18} {:>14.1} {:>10.0}", "Average", m.average_km, m.average_rounded_km);
    out
}

pub fn lifetime_table(rows: &[LifetimeEntry], average: &LifetimeEntry) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<36} {:>8} {:>10} {:>10}", "Source", "Age", "km/year", "LTM km");
    for r in rows.iter().chain(std::iter::once(average)) {
        let _ = writeln!(out, "{:<36} {:>8.1} {:>10.0} {:>10.0}", r.source, r.age_years, r.annual_km, r.ltm_km);
    }
    out
}
