//! The bundled four-building example community.

use std::f64::consts::{PI, TAU};

use super::sampling::{assign_sessions, sample_sessions};
use super::EVRequestStats;
use crate::domain::{BatterySpec, BuildingAssets, CommunityScenario, NetLoadSeries, RunOptions, TariffBook, TimeGrid};
use crate::error::Result;

const MEAN_IMPORT_EUR_PER_KWH: f64 = 0.1228;
const IMPORT_SWING: f64 = 0.25;

struct Profile {
    name: &'static str,
    base_kw: f64,
    /// (first hour, last hour exclusive, extra kW)
    blocks: &'static [(usize, usize, f64)],
    pv_peak_kw: f64,
}

const PROFILES: [Profile; 4] = [
    Profile {
        name: "office",
        base_kw: 15.0,
        blocks: &[(8, 18, 45.0)],
        pv_peak_kw: 120.0,
    },
    Profile {
        name: "residential",
        base_kw: 20.0,
        blocks: &[(6, 8, 25.0), (18, 22, 40.0)],
        pv_peak_kw: 30.0,
    },
    Profile {
        name: "retail",
        base_kw: 10.0,
        blocks: &[(9, 20, 35.0)],
        pv_peak_kw: 90.0,
    },
    Profile {
        name: "apartments",
        base_kw: 25.0,
        blocks: &[(7, 9, 15.0), (17, 23, 20.0)],
        pv_peak_kw: 15.0,
    },
];

/// Half-sine PV output between 06:00 and 20:00, sampled at mid-hour.
fn pv_kw(peak: f64, hour: usize) -> f64 {
    let t = hour as f64 + 0.5;
    if (6.0..20.0).contains(&t) {
        peak * (PI * (t - 6.0) / 14.0).sin()
    } else {
        0.0
    }
}

fn demand_kw(p: &Profile, hour: usize) -> f64 {
    p.base_kw
        + p.blocks
            .iter()
            .filter(|(a, b, _)| (*a..*b).contains(&hour))
            .map(|(_, _, kw)| kw)
            .sum::<f64>()
}

/// Four buildings over one hourly day, each with a 90 kWh / 45 kW battery and
/// six EVs drawn from a pool of thirty sampled requests. The import tariff
/// follows a daily cosine around 122.8 €/MWh; EV charge and discharge tariffs
/// scale with it around 2 and −3 €/h.
pub fn synthetic_community(seed: u64) -> Result<CommunityScenario> {
    let time = TimeGrid::hourly_day();
    let steps = time.steps;
    let mut tariffs = TariffBook::flat_reference(steps);
    let shape: Vec<f64> = (0..steps)
        .map(|h| 1.0 + IMPORT_SWING * (TAU * (h as f64 - 19.0) / 24.0).cos())
        .collect();
    tariffs.grid_import_eur_per_kwh = shape.iter().map(|s| MEAN_IMPORT_EUR_PER_KWH * s).collect();
    tariffs.charge_eur_per_hour = shape.iter().map(|s| 2.0 * s).collect();
    tariffs.discharge_eur_per_hour = shape.iter().map(|s| -3.0 * s).collect();

    let battery = BatterySpec {
        capacity_kwh: 90.0,
        max_charge_kw: 45.0,
        max_discharge_kw: 45.0,
        one_way_efficiency: 0.95,
        soc_min: 0.2,
        soc_max: 0.9,
        soc_initial: 0.5,
    };
    let mut buildings: Vec<BuildingAssets> = PROFILES
        .iter()
        .map(|p| {
            let demand: Vec<f64> = (0..steps).map(|h| demand_kw(p, h)).collect();
            let pv: Vec<f64> = (0..steps).map(|h| pv_kw(p.pv_peak_kw, h)).collect();
            BuildingAssets {
                name: p.name.to_string(),
                net_load: NetLoadSeries::from_demand_and_pv(&demand, &pv),
                battery: battery.clone(),
                sessions: Vec::new(),
            }
        })
        .collect();
    let pool = sample_sessions(&EVRequestStats::default(), 30, seed, &time)?;
    assign_sessions(&pool, &mut buildings, 6, seed)?;
    Ok(CommunityScenario {
        time,
        tariffs,
        buildings,
        options: RunOptions::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_scenario;

    #[test]
    fn community_shape() {
        let s = synthetic_community(42).unwrap();
        assert!(validate_scenario(&s).is_empty());
        assert_eq!(s.buildings.len(), 4);
        assert_eq!(s.time.steps, 24);
        assert!(s.buildings.iter().all(|b| b.sessions.len() == 6));
        let mean = s.tariffs.grid_import_eur_per_kwh.iter().sum::<f64>() / 24.0;
        assert!((mean - MEAN_IMPORT_EUR_PER_KWH).abs() < 1e-12);
    }

    #[test]
    fn surplus_and_deficit_coexist() {
        let s = synthetic_community(42).unwrap();
        let overlap = (0..24).any(|h| {
            s.buildings.iter().any(|b| b.net_load.surplus_kw[h] > 0.0)
                && s.buildings.iter().any(|b| b.net_load.deficit_kw[h] > 0.0)
        });
        assert!(overlap);
    }
}
