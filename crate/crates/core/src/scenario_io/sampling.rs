//! EV request generation from parking statistics.

use serde::{Deserialize, Serialize};

use super::rng::SeededRng;
use crate::domain::{BuildingAssets, EVSession, TimeGrid};
use crate::error::{Error, Result};
use crate::ev_contract::{required_total_charge_hours, CompensationMode};

const MAX_ATTEMPTS: usize = 100;
const QUARTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl DurationStats {
    pub const fn new(mean: f64, std: f64, min: f64, max: f64) -> Self {
        Self { mean, std, min, max }
    }

    fn check(&self, what: &str) -> Result<()> {
        let finite = [self.mean, self.std, self.min, self.max].iter().all(|v| v.is_finite());
        if !finite || self.std < 0.0 || !(self.min <= self.mean && self.mean <= self.max) {
            return Err(Error::Domain(format!(
                "{what} statistics must satisfy min ≤ mean ≤ max and std ≥ 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Normal draw clamped to [min, max] and rounded to the nearest quarter hour.
    fn draw(&self, rng: &mut SeededRng) -> f64 {
        let raw = self.mean + self.std * rng.standard_normal();
        let q = (raw.clamp(self.min, self.max) / QUARTER).round() * QUARTER;
        q.clamp(self.min, self.max)
    }
}

/// Parking statistics in hours; `start` is an hour of the day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EVRequestStats {
    pub parking: DurationStats,
    pub charging: DurationStats,
    pub discharging: DurationStats,
    pub start: DurationStats,
}

impl Default for EVRequestStats {
    /// Workplace parking requests: 8:00 h parked, 2:00 h charging, 0:45 h
    /// discharging, arriving around 9:30.
    fn default() -> Self {
        Self {
            parking: DurationStats::new(8.0, 1.0, 6.25, 11.0),
            charging: DurationStats::new(2.0, 0.5, 1.25, 3.0),
            discharging: DurationStats::new(0.75, 0.25, 0.0, 1.25),
            start: DurationStats::new(9.5, 0.75, 8.0, 10.25),
        }
    }
}

impl EVRequestStats {
    pub fn validate(&self) -> Result<()> {
        self.parking.check("parking")?;
        self.charging.check("charging")?;
        self.discharging.check("discharging")?;
        self.start.check("start")
    }
}

/// Charger fitted to every sampled session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChargerSpec {
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub efficiency: f64,
    pub compensation: CompensationMode,
}

impl Default for ChargerSpec {
    fn default() -> Self {
        Self {
            max_charge_kw: 10.0,
            max_discharge_kw: 10.0,
            efficiency: 0.93,
            compensation: CompensationMode::PaperLiteral,
        }
    }
}

pub fn sample_sessions(stats: &EVRequestStats, count: usize, seed: u64, time: &TimeGrid) -> Result<Vec<EVSession>> {
    sample_sessions_with(stats, count, seed, time, &ChargerSpec::default())
}

pub fn sample_sessions_with(
    stats: &EVRequestStats,
    count: usize,
    seed: u64,
    time: &TimeGrid,
    charger: &ChargerSpec,
) -> Result<Vec<EVSession>> {
    stats.validate()?;
    if !(charger.efficiency > 0.0 && charger.efficiency <= 1.0) {
        return Err(Error::Domain(format!("charger efficiency {} not in (0, 1]", charger.efficiency)));
    }
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut last = None;
        let mut accepted = None;
        for _ in 0..MAX_ATTEMPTS {
            let draw = Draw {
                parking: stats.parking.draw(&mut rng),
                charging: stats.charging.draw(&mut rng),
                discharging: stats.discharging.draw(&mut rng),
                start: stats.start.draw(&mut rng),
            };
            if draw.fits(time, charger) {
                accepted = Some(draw);
                break;
            }
            last = Some(draw);
        }
        let draw = match accepted {
            Some(d) => d,
            None => last.expect("at least one attempt").clip(time, charger),
        };
        out.push(draw.session(format!("ev{:02}", i + 1), time, charger));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    parking: f64,
    charging: f64,
    discharging: f64,
    start: f64,
}

impl Draw {
    fn arrival_step(&self, time: &TimeGrid) -> Option<usize> {
        let offset = ((self.start - time.start_hour_of_day) / time.step_hours).round();
        (offset >= 0.0).then_some(offset as usize)
    }

    fn busy_hours(&self, charger: &ChargerSpec) -> f64 {
        required_total_charge_hours(self.charging, self.discharging, charger.efficiency, charger.compensation)
            .map(|total| total + self.discharging)
            .unwrap_or(f64::INFINITY)
    }

    fn fits(&self, time: &TimeGrid, charger: &ChargerSpec) -> bool {
        let Some(arrival) = self.arrival_step(time) else {
            return false;
        };
        self.busy_hours(charger) <= self.parking + 1e-9
            && arrival + time.steps_covering(self.parking) <= time.steps
    }

    /// Shrinks the draw until it satisfies the session invariants.
    fn clip(mut self, time: &TimeGrid, charger: &ChargerSpec) -> Self {
        let horizon = time.horizon_hours();
        self.start = self.start.max(time.start_hour_of_day);
        self.parking = self.parking.min(horizon);
        let latest = time.start_hour_of_day + horizon - self.parking;
        self.start = self.start.min(latest);
        let arrival = self.arrival_step(time).unwrap_or(0);
        let room = (time.steps - arrival) as f64 * time.step_hours;
        self.parking = self.parking.min(room);
        let factor = 1.0 + charger.compensation.discharge_factor(charger.efficiency);
        if self.busy_hours(charger) > self.parking {
            self.discharging = ((self.parking - self.charging).max(0.0) / factor).max(0.0);
        }
        self.charging = self.charging.min(self.parking);
        self
    }

    fn session(&self, id: String, time: &TimeGrid, charger: &ChargerSpec) -> EVSession {
        EVSession {
            id,
            arrival_step: self.arrival_step(time).unwrap_or(0),
            parking_hours: self.parking,
            requested_charge_hours: self.charging,
            max_discharge_hours: self.discharging,
            max_charge_kw: charger.max_charge_kw,
            max_discharge_kw: charger.max_discharge_kw,
            charger_efficiency: charger.efficiency,
        }
    }
}

/// Shuffles `sessions` with `seed` and deals `per_building` of them to each
/// building in turn, appending to the buildings' existing sessions.
pub fn assign_sessions(
    sessions: &[EVSession],
    buildings: &mut [BuildingAssets],
    per_building: usize,
    seed: u64,
) -> Result<()> {
    let needed = per_building * buildings.len();
    if needed > sessions.len() {
        return Err(Error::Domain(format!(
            "{needed} sessions needed for {} buildings × {per_building}, only {} available",
            buildings.len(),
            sessions.len()
        )));
    }
    let mut order: Vec<usize> = (0..sessions.len()).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let nb = buildings.len();
    for (k, &idx) in order.iter().take(needed).enumerate() {
        buildings[k % nb].sessions.push(sessions[idx].clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BatterySpec, NetLoadSeries};

    fn day() -> TimeGrid {
        TimeGrid::hourly_day()
    }

    fn empty_building(name: &str) -> BuildingAssets {
        BuildingAssets {
            name: name.into(),
            net_load: NetLoadSeries::from_signed(&[0.0; 24]),
            battery: BatterySpec::none(),
            sessions: Vec::new(),
        }
    }

    #[test]
    fn thirty_sessions_respect_parking_bounds() {
        let s = sample_sessions(&EVRequestStats::default(), 30, 42, &day()).unwrap();
        assert_eq!(s.len(), 30);
        for e in &s {
            assert!((6.25..=11.0).contains(&e.parking_hours), "{}", e.parking_hours);
            assert_eq!((e.parking_hours * 4.0).fract(), 0.0);
        }
    }

    #[test]
    fn zero_spread_reproduces_means() {
        let mut stats = EVRequestStats::default();
        stats.parking.std = 0.0;
        stats.charging.std = 0.0;
        stats.discharging.std = 0.0;
        stats.start.std = 0.0;
        let s = sample_sessions(&stats, 5, 9, &day()).unwrap();
        for e in &s {
            assert_eq!(e.parking_hours, 8.0);
            assert_eq!(e.requested_charge_hours, 2.0);
            assert_eq!(e.max_discharge_hours, 0.75);
            assert_eq!(e.arrival_step, 10);
        }
    }

    #[test]
    fn zero_count_is_empty() {
        assert!(sample_sessions(&EVRequestStats::default(), 0, 1, &day()).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_sessions() {
        let a = sample_sessions(&EVRequestStats::default(), 20, 5, &day()).unwrap();
        let b = sample_sessions(&EVRequestStats::default(), 20, 5, &day()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_stats_are_rejected() {
        let mut stats = EVRequestStats::default();
        stats.charging.min = 2.5;
        assert!(matches!(sample_sessions(&stats, 1, 1, &day()), Err(Error::Domain(_))));
        stats = EVRequestStats::default();
        stats.start.std = -1.0;
        assert!(sample_sessions(&stats, 1, 1, &day()).is_err());
    }

    #[test]
    fn short_horizon_forces_clipping() {
        let time = TimeGrid::new(1.0, 8, 8.0);
        let s = sample_sessions(&EVRequestStats::default(), 50, 3, &time).unwrap();
        for e in &s {
            assert!(e.arrival_step + time.steps_covering(e.parking_hours) <= time.steps);
            let busy = e.requested_charge_hours + e.max_discharge_hours * (1.0 + 1.0 / 0.93);
            assert!(busy <= e.parking_hours + 1e-9);
        }
    }

    #[test]
    fn deals_six_per_building() {
        let s = sample_sessions(&EVRequestStats::default(), 30, 42, &day()).unwrap();
        let mut b: Vec<_> = (0..4).map(|i| empty_building(&format!("b{i}"))).collect();
        assign_sessions(&s, &mut b, 6, 42).unwrap();
        assert!(b.iter().all(|x| x.sessions.len() == 6));
        let mut ids: Vec<_> = b.iter().flat_map(|x| x.sessions.iter().map(|e| e.id.clone())).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 24);

        let mut again: Vec<_> = (0..4).map(|i| empty_building(&format!("b{i}"))).collect();
        assign_sessions(&s, &mut again, 6, 42).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn too_few_sessions() {
        let s = sample_sessions(&EVRequestStats::default(), 30, 42, &day()).unwrap();
        let mut b: Vec<_> = (0..4).map(|i| empty_building(&format!("b{i}"))).collect();
        assert!(matches!(assign_sessions(&s, &mut b, 10, 1), Err(Error::Domain(_))));
    }
}
