//! Scenario files, EV request sampling and the bundled example community.

mod fixture;
mod rng;
mod sampling;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use fixture::synthetic_community;
pub use rng::SeededRng;
pub use sampling::{assign_sessions, sample_sessions, sample_sessions_with, ChargerSpec, DurationStats, EVRequestStats};

use crate::domain::{
    validate_scenario, BatterySpec, BuildingAssets, CommunityScenario, EVSession, NetLoadSeries, RunOptions,
    TariffBook, TimeGrid,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyPriceUnit {
    #[default]
    EurPerMwh,
    EurPerKwh,
}

impl EnergyPriceUnit {
    fn to_kwh(self) -> f64 {
        match self {
            EnergyPriceUnit::EurPerMwh => 1e-3,
            EnergyPriceUnit::EurPerKwh => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Series {
    Scalar(f64),
    Values(Vec<f64>),
}

impl Series {
    fn expand(&self, steps: usize, scale: f64) -> Vec<f64> {
        match self {
            Series::Scalar(v) => vec![v * scale; steps],
            Series::Values(vs) => vs.iter().map(|v| v * scale).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TariffDoc {
    #[serde(default)]
    unit: EnergyPriceUnit,
    #[serde(alias = "gridImport")]
    grid_import: Series,
    #[serde(alias = "gridExport")]
    grid_export: Series,
    #[serde(alias = "gridUse")]
    grid_use: Series,
    #[serde(alias = "parking")]
    parking_eur_per_hour: f64,
    #[serde(alias = "flexibility")]
    flexibility_eur_per_hour: f64,
    #[serde(alias = "charge")]
    charge_eur_per_hour: Series,
    #[serde(alias = "discharge")]
    discharge_eur_per_hour: Series,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NetLoadDoc {
    Signed(Vec<f64>),
    Split { demand_kw: Vec<f64>, pv_kw: Vec<f64> },
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingDoc {
    #[serde(default)]
    stats: EVRequestStats,
    count: usize,
    seed: u64,
    #[serde(default)]
    charger: ChargerSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolDoc {
    #[serde(default)]
    stats: EVRequestStats,
    count: usize,
    seed: u64,
    per_building: usize,
    #[serde(default)]
    charger: ChargerSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildingDoc {
    name: String,
    net_load_kw: NetLoadDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    battery: Option<BatterySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ev_sessions: Vec<EVSession>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ev_sampling: Option<SamplingDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    time: TimeGrid,
    tariffs: TariffDoc,
    buildings: Vec<BuildingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ev_pool: Option<PoolDoc>,
    #[serde(default)]
    options: RunOptions,
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Reads, converts and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<CommunityScenario> {
    load_scenario_seeded(path, None)
}

/// Like [`load_scenario`], but replaces every EV sampling seed in the file.
/// The pool uses `seed`; per-building sampling uses `seed + building index`.
pub fn load_scenario_seeded(path: impl AsRef<Path>, seed: Option<u64>) -> Result<CommunityScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let scenario = parse_scenario(&text, base, path, seed)?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Parses scenario JSON without validating it. Relative CSV paths resolve against `base_dir`.
pub fn parse_scenario_str(text: &str, base_dir: &Path) -> Result<CommunityScenario> {
    parse_scenario(text, base_dir, Path::new("<string>"), None)
}

fn parse_scenario(text: &str, base_dir: &Path, origin: &Path, seed: Option<u64>) -> Result<CommunityScenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        parse_error(origin, format!("{inner} (at field `{field}`)"))
    })?;
    let steps = doc.time.steps;
    let t = &doc.tariffs;
    let scale = t.unit.to_kwh();
    let tariffs = TariffBook {
        grid_import_eur_per_kwh: t.grid_import.expand(steps, scale),
        grid_export_eur_per_kwh: t.grid_export.expand(steps, scale),
        grid_use_eur_per_kwh: t.grid_use.expand(steps, scale),
        parking_eur_per_hour: t.parking_eur_per_hour,
        flexibility_eur_per_hour: t.flexibility_eur_per_hour,
        charge_eur_per_hour: t.charge_eur_per_hour.expand(steps, 1.0),
        discharge_eur_per_hour: t.discharge_eur_per_hour.expand(steps, 1.0),
    };

    let mut csv_cache: BTreeMap<PathBuf, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    let mut buildings = Vec::with_capacity(doc.buildings.len());
    for (index, b) in doc.buildings.iter().enumerate() {
        let net_load = match &b.net_load_kw {
            NetLoadDoc::Signed(v) => NetLoadSeries::from_signed(v),
            NetLoadDoc::Split { demand_kw, pv_kw } => {
                if demand_kw.len() != pv_kw.len() {
                    return Err(parse_error(
                        origin,
                        format!("building {}: demand_kw and pv_kw lengths differ", b.name),
                    ));
                }
                NetLoadSeries::from_demand_and_pv(demand_kw, pv_kw)
            }
            NetLoadDoc::Csv { csv } => {
                let full = base_dir.join(csv);
                if !csv_cache.contains_key(&full) {
                    let table = read_net_load_csv(&full)?;
                    csv_cache.insert(full.clone(), table);
                }
                let series = csv_cache[&full].get(&b.name).ok_or_else(|| {
                    parse_error(&full, format!("no rows for building {}", b.name))
                })?;
                NetLoadSeries::from_signed(series)
            }
        };
        let mut sessions = b.ev_sessions.clone();
        if let Some(s) = &b.ev_sampling {
            let seed = seed.map_or(s.seed, |v| v.wrapping_add(index as u64));
            sessions.extend(sample_sessions_with(&s.stats, s.count, seed, &doc.time, &s.charger)?);
        }
        buildings.push(BuildingAssets {
            name: b.name.clone(),
            net_load,
            battery: b.battery.clone().unwrap_or_else(BatterySpec::none),
            sessions,
        });
    }
    if let Some(pool) = &doc.ev_pool {
        let seed = seed.unwrap_or(pool.seed);
        let sessions = sample_sessions_with(&pool.stats, pool.count, seed, &doc.time, &pool.charger)?;
        assign_sessions(&sessions, &mut buildings, pool.per_building, seed)?;
    }
    Ok(CommunityScenario {
        time: doc.time,
        tariffs,
        buildings,
        options: doc.options,
    })
}

/// Reads `hour,building,net_kw` rows into one signed series per building.
/// `hour` is the step index; every building needs a contiguous run of steps from 0.
pub fn read_net_load_csv(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    #[derive(Deserialize)]
    struct Record {
        hour: usize,
        building: String,
        net_kw: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_error(path, e.to_string()))?;
    let mut cells: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for (i, row) in reader.deserialize::<Record>().enumerate() {
        let r = row.map_err(|e| parse_error(path, format!("row {}: {e}", i + 2)))?;
        if cells.entry(r.building.clone()).or_default().insert(r.hour, r.net_kw).is_some() {
            return Err(parse_error(path, format!("duplicate hour {} for {}", r.hour, r.building)));
        }
    }
    let mut out = BTreeMap::new();
    for (name, by_hour) in cells {
        let series: Vec<f64> = by_hour.values().copied().collect();
        if by_hour.keys().enumerate().any(|(i, &h)| i != h) {
            return Err(parse_error(path, format!("hours for {name} are not contiguous from 0")));
        }
        out.insert(name, series);
    }
    Ok(out)
}

/// Serializes a scenario so that `load_scenario` reproduces it exactly.
pub fn scenario_to_json(scenario: &CommunityScenario) -> Result<String> {
    let t = &scenario.tariffs;
    let doc = ScenarioDoc {
        time: scenario.time.clone(),
        tariffs: TariffDoc {
            unit: EnergyPriceUnit::EurPerKwh,
            grid_import: Series::Values(t.grid_import_eur_per_kwh.clone()),
            grid_export: Series::Values(t.grid_export_eur_per_kwh.clone()),
            grid_use: Series::Values(t.grid_use_eur_per_kwh.clone()),
            parking_eur_per_hour: t.parking_eur_per_hour,
            flexibility_eur_per_hour: t.flexibility_eur_per_hour,
            charge_eur_per_hour: Series::Values(t.charge_eur_per_hour.clone()),
            discharge_eur_per_hour: Series::Values(t.discharge_eur_per_hour.clone()),
        },
        buildings: scenario
            .buildings
            .iter()
            .map(|b| BuildingDoc {
                name: b.name.clone(),
                net_load_kw: NetLoadDoc::Signed(b.net_load.signed()),
                battery: Some(b.battery.clone()),
                ev_sessions: b.sessions.clone(),
                ev_sampling: None,
            })
            .collect(),
        ev_pool: None,
        options: scenario.options.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse {
        path: "<scenario>".into(),
        message: e.to_string(),
    })
}

pub fn write_scenario(scenario: &CommunityScenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = scenario_to_json(scenario)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests;
