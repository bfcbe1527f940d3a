//! Random scenario generators shared by the integration tests.

#![allow(dead_code)]

use temgrid_core::domain::{
    validate_scenario, BatterySpec, BuildingAssets, CommunityScenario, EVSession, NetLoadSeries, RunOptions,
    TariffBook, TimeGrid,
};
use temgrid_core::scenario_io::SeededRng;

pub fn between(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Valid grid tariffs with a strictly positive spread `C_IG + C_EG − C_G`.
pub fn random_tariffs(rng: &mut SeededRng, steps: usize) -> TariffBook {
    let mut t = TariffBook::flat_reference(steps);
    for h in 0..steps {
        let ig = between(rng, 0.06, 0.30);
        let eg = -between(rng, 0.0, 0.05);
        let g = between(rng, 0.0, 0.9) * (ig + eg);
        t.grid_import_eur_per_kwh[h] = ig;
        t.grid_export_eur_per_kwh[h] = eg;
        t.grid_use_eur_per_kwh[h] = g;
        t.charge_eur_per_hour[h] = between(rng, 0.0, 3.0);
        t.discharge_eur_per_hour[h] = -between(rng, 0.0, 3.0);
    }
    t.parking_eur_per_hour = between(rng, 0.0, 1.0);
    t.flexibility_eur_per_hour = -between(rng, 0.0, 1.0);
    t
}

pub fn random_battery(rng: &mut SeededRng) -> BatterySpec {
    let capacity = between(rng, 10.0, 90.0);
    let soc_min = between(rng, 0.05, 0.3);
    let soc_max = between(rng, 0.7, 0.95);
    BatterySpec {
        capacity_kwh: capacity,
        max_charge_kw: capacity * between(rng, 0.2, 0.6),
        max_discharge_kw: capacity * between(rng, 0.2, 0.6),
        one_way_efficiency: between(rng, 0.85, 1.0),
        soc_min,
        soc_max,
        soc_initial: between(rng, soc_min, soc_max),
    }
}

pub fn random_session(rng: &mut SeededRng, id: String, steps: usize, step_hours: f64) -> EVSession {
    let arrival = rng.below(steps as u64 - 1) as usize;
    let room = (steps - arrival) as f64 * step_hours;
    let parking = (between(rng, 1.0, room) * 4.0).floor() / 4.0;
    let parking = parking.max(0.25);
    let efficiency = between(rng, 0.85, 1.0);
    let charge = (between(rng, 0.0, 0.6 * parking) * 4.0).floor() / 4.0;
    let mut discharge = (between(rng, 0.0, 0.3 * parking) * 4.0).floor() / 4.0;
    if charge + discharge + discharge / efficiency > parking {
        discharge = 0.0;
    }
    EVSession {
        id,
        arrival_step: arrival,
        parking_hours: parking,
        requested_charge_hours: charge,
        max_discharge_hours: discharge,
        max_charge_kw: between(rng, 3.0, 11.0),
        max_discharge_kw: between(rng, 3.0, 11.0),
        charger_efficiency: efficiency,
    }
}

/// A small random community. Building 0 has surplus and building 1 has a
/// deficit at step 0 and the last step, so the two always overlap.
pub fn random_community(seed: u64, buildings: usize, steps: usize) -> CommunityScenario {
    let mut rng = SeededRng::new(seed);
    let time = TimeGrid::new(1.0, steps, 8.0);
    let tariffs = random_tariffs(&mut rng, steps);
    let mut list = Vec::with_capacity(buildings);
    for b in 0..buildings {
        let mut net: Vec<f64> = (0..steps).map(|_| between(&mut rng, -30.0, 30.0)).collect();
        for h in [0, steps - 1] {
            match b {
                0 => net[h] = -between(&mut rng, 5.0, 30.0),
                1 => net[h] = between(&mut rng, 5.0, 30.0),
                _ => {}
            }
        }
        let battery = if rng.uniform() < 0.6 {
            random_battery(&mut rng)
        } else {
            BatterySpec::none()
        };
        let sessions = (0..rng.below(3))
            .map(|n| random_session(&mut rng, format!("ev{b}{n}"), steps, time.step_hours))
            .collect();
        list.push(BuildingAssets {
            name: format!("b{b}"),
            net_load: NetLoadSeries::from_signed(&net),
            battery,
            sessions,
        });
    }
    let s = CommunityScenario {
        time,
        tariffs,
        buildings: list,
        options: RunOptions::default(),
    };
    let v = validate_scenario(&s);
    assert!(v.is_empty(), "generator produced an invalid scenario: {v:?}");
    s
}

/// Steps where one building has surplus while another has a deficit.
pub fn overlap_steps(s: &CommunityScenario) -> Vec<usize> {
    (0..s.time.steps)
        .filter(|&h| {
            s.buildings.iter().any(|b| b.net_load.surplus_kw[h] > 0.0)
                && s.buildings.iter().any(|b| b.net_load.deficit_kw[h] > 0.0)
        })
        .collect()
}
