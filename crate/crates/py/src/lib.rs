//! Python bindings for the community scheduler.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use temgrid_core::domain::{validate_scenario, CommunityScenario, TimeGrid};
use temgrid_core::ev_contract::CompensationMode;
use temgrid_core::model::{build, RunMode, TerminalSoc};
use temgrid_core::reporting::{summarize, write_dispatch_csv, CostBreakdown};
use temgrid_core::scenario_io::{
    load_scenario_seeded, parse_scenario_str, sample_sessions, scenario_to_json, synthetic_community, EVRequestStats,
};
use temgrid_core::solver::{solve as solve_model, verify, DispatchSolution};
use temgrid_core::tariff::{self, price_community, CommunityPrices};
use temgrid_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Validation(_)
        | Error::Parse { .. }
        | Error::Domain(_)
        | Error::Build(_)
        | Error::ContractViolation(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<RunMode> {
    mode.parse().map_err(|_| PyValueError::new_err(format!("unknown mode {mode:?}")))
}

/// A validated community scenario.
#[pyclass(name = "Scenario", module = "temgrid")]
struct PyScenario {
    inner: CommunityScenario,
}

#[pymethods]
impl PyScenario {
    /// Loads and validates a scenario file. `seed` overrides the EV pool seed.
    #[staticmethod]
    #[pyo3(signature = (path, seed=None))]
    fn load(path: PathBuf, seed: Option<u64>) -> PyResult<Self> {
        load_scenario_seeded(&path, seed).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Parses and validates scenario JSON. Relative CSV paths resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (text, base_dir=None))]
    fn from_json(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let base = base_dir.unwrap_or_else(|| PathBuf::from("."));
        let inner = parse_scenario_str(text, &base).map_err(to_py)?;
        let violations = validate_scenario(&inner);
        if !violations.is_empty() {
            return Err(to_py(Error::Validation(violations)));
        }
        Ok(Self { inner })
    }

    /// The generated four-building reference day.
    #[staticmethod]
    #[pyo3(signature = (seed=42))]
    fn synthetic(seed: u64) -> PyResult<Self> {
        synthetic_community(seed).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        scenario_to_json(&self.inner).map_err(to_py)
    }

    /// Violation keys such as `grid-import-negative@3`; empty when valid.
    fn validate(&self) -> Vec<String> {
        validate_scenario(&self.inner).iter().map(|v| v.key()).collect()
    }

    #[getter]
    fn building_names(&self) -> Vec<String> {
        self.inner.buildings.iter().map(|b| b.name.clone()).collect()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.time.steps
    }

    #[getter]
    fn step_hours(&self) -> f64 {
        self.inner.time.step_hours
    }

    #[getter]
    fn session_count(&self) -> usize {
        self.inner.buildings.iter().map(|b| b.sessions.len()).sum()
    }

    /// Signed net load of one building in kW, positive for a deficit.
    fn net_load(&self, building: &str) -> PyResult<Vec<f64>> {
        self.inner
            .buildings
            .iter()
            .find(|b| b.name == building)
            .map(|b| b.net_load.signed())
            .ok_or_else(|| PyValueError::new_err(format!("no building named {building:?}")))
    }

    /// Sets `paper-literal` or `round-trip` EV discharge compensation.
    fn set_compensation(&mut self, mode: &str) -> PyResult<()> {
        self.inner.options.model.compensation = match mode {
            "paper-literal" => CompensationMode::PaperLiteral,
            "round-trip" => CompensationMode::RoundTrip,
            _ => return Err(PyValueError::new_err(format!("unknown compensation {mode:?}"))),
        };
        Ok(())
    }

    /// Sets the battery end-of-day rule, `free` or `restore`.
    fn set_terminal_soc(&mut self, rule: &str) -> PyResult<()> {
        self.inner.options.model.terminal_soc = rule
            .parse::<TerminalSoc>()
            .map_err(|_| PyValueError::new_err(format!("unknown terminal rule {rule:?}")))?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({} buildings, {} steps of {} h, {} EV sessions)",
            self.inner.buildings.len(),
            self.inner.time.steps,
            self.inner.time.step_hours,
            self.session_count()
        )
    }
}

/// Community tariffs per step, in EUR/kWh.
#[pyclass(name = "Prices", module = "temgrid", frozen)]
struct PyPrices {
    inner: CommunityPrices,
}

#[pymethods]
impl PyPrices {
    #[getter]
    fn surplus_ratio(&self) -> Vec<f64> {
        self.inner.surplus_ratio.clone()
    }

    #[getter]
    fn export_eur_per_kwh(&self) -> Vec<f64> {
        self.inner.export_eur_per_kwh.clone()
    }

    #[getter]
    fn import_eur_per_kwh(&self) -> Vec<f64> {
        self.inner.import_eur_per_kwh.clone()
    }

    /// Export tariff averaged with the community surplus as weight.
    fn mean_export_by_surplus(&self, scenario: &PyScenario) -> f64 {
        self.inner.mean_export_by_surplus(&scenario.inner)
    }

    /// Import tariff averaged with the community deficit as weight.
    fn mean_import_by_deficit(&self, scenario: &PyScenario) -> f64 {
        self.inner.mean_import_by_deficit(&scenario.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.steps()
    }
}

/// Optimal dispatch of one run mode.
#[pyclass(name = "Solution", module = "temgrid", frozen)]
struct PySolution {
    inner: DispatchSolution,
    clean: bool,
    failures: Vec<String>,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    #[getter]
    fn objective_eur(&self) -> f64 {
        self.inner.objective_eur
    }

    #[getter]
    fn electricity_eur(&self) -> f64 {
        self.inner.total_electricity_eur()
    }

    #[getter]
    fn ev_revenue_eur(&self) -> f64 {
        self.inner.total_ev_revenue_eur()
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.nodes
    }

    #[getter]
    fn limit_reached(&self) -> bool {
        self.inner.limit_reached
    }

    /// True when every row, bound and complementarity check passed.
    #[getter]
    fn verified(&self) -> bool {
        self.clean
    }

    #[getter]
    fn verification_failures(&self) -> Vec<String> {
        self.failures.clone()
    }

    /// Per-building `(name, electricity_eur, ev_revenue_eur)`.
    fn building_costs(&self) -> Vec<(String, f64, f64)> {
        self.inner
            .buildings
            .iter()
            .zip(&self.inner.costs)
            .map(|(b, c)| (b.name.clone(), c.electricity_eur, c.ev_revenue_eur))
            .collect()
    }

    /// State of charge per step of one building's battery.
    fn soc(&self, building: &str) -> PyResult<Vec<f64>> {
        self.inner
            .buildings
            .iter()
            .find(|b| b.name == building)
            .map(|b| b.soc.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no building named {building:?}")))
    }

    fn dispatch_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_dispatch_csv(&self.inner, &mut buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(mode={}, objective_eur={:.6}, nodes={})",
            self.inner.mode, self.inner.objective_eur, self.inner.nodes
        )
    }
}

/// Cost breakdown across modes.
#[pyclass(name = "CostTable", module = "temgrid", frozen)]
struct PyCostTable {
    inner: CostBreakdown,
}

#[pymethods]
impl PyCostTable {
    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }
}

/// Prices the community of a scenario.
#[pyfunction]
fn price(scenario: &PyScenario) -> PyResult<PyPrices> {
    price_community(&scenario.inner).map(|inner| PyPrices { inner }).map_err(to_py)
}

/// Builds, solves and verifies one mode (`baseline`, `individual` or `community`).
#[pyfunction]
#[pyo3(signature = (scenario, mode, prices=None))]
fn solve(py: Python<'_>, scenario: &PyScenario, mode: &str, prices: Option<&PyPrices>) -> PyResult<PySolution> {
    let mode = parse_mode(mode)?;
    let s = &scenario.inner;
    let owned;
    let prices = match prices {
        Some(p) => &p.inner,
        None => {
            owned = price_community(s).map_err(to_py)?;
            &owned
        }
    };
    py.detach(|| {
        let model = build(s, prices, mode)?;
        let solution = solve_model(&model, &s.options.solver)?;
        let report = verify(&model, &solution, s.options.solver.comp_tol);
        let failures = report.failures(1e-6);
        Ok(PySolution {
            inner: solution,
            clean: failures.is_empty(),
            failures,
        })
    })
    .map_err(to_py)
}

/// Tabulates costs of solutions of distinct modes against the baseline.
#[pyfunction]
fn summarize_costs(scenario: &PyScenario, prices: &PyPrices, solutions: Vec<PyRef<'_, PySolution>>) -> PyResult<PyCostTable> {
    let refs: Vec<&DispatchSolution> = solutions.iter().map(|s| &s.inner).collect();
    summarize(&scenario.inner, &prices.inner, &refs)
        .map(|inner| PyCostTable { inner })
        .map_err(to_py)
}

/// Samples EV parking sessions and returns them as a JSON array.
#[pyfunction]
#[pyo3(signature = (count, seed=42, step_hours=1.0, steps=24, start_hour=0.0))]
fn sample_ev_sessions(count: usize, seed: u64, step_hours: f64, steps: usize, start_hour: f64) -> PyResult<String> {
    let time = TimeGrid::new(step_hours, steps, start_hour);
    let sessions = sample_sessions(&EVRequestStats::default(), count, seed, &time).map_err(to_py)?;
    serde_json::to_string(&sessions).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Share of the community deficit covered by its surplus.
#[pyfunction]
fn surplus_ratio(total_deficit_kw: f64, total_surplus_kw: f64) -> PyResult<f64> {
    tariff::surplus_ratio(total_deficit_kw, total_surplus_kw).map_err(to_py)
}

/// Community export tariff in EUR/kWh.
#[pyfunction]
fn export_tariff(ratio: f64, c_g: f64, c_ig: f64, c_eg: f64) -> PyResult<f64> {
    tariff::export_tariff(ratio, c_g, c_ig, c_eg).map_err(to_py)
}

/// Community import tariff in EUR/kWh.
#[pyfunction]
fn import_tariff(ratio: f64, c_g: f64, c_ig: f64, c_ec: f64) -> PyResult<f64> {
    tariff::import_tariff(ratio, c_g, c_ig, c_ec).map_err(to_py)
}

/// Validates a scenario file and returns its violation keys.
#[pyfunction]
fn validate_file(path: PathBuf) -> PyResult<Vec<String>> {
    let text = std::fs::read_to_string(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let s = parse_scenario_str(&text, base).map_err(to_py)?;
    Ok(validate_scenario(&s).iter().map(|v| v.key()).collect())
}

#[pymodule]
fn temgrid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyPrices>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyCostTable>()?;
    m.add_function(wrap_pyfunction!(price, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(summarize_costs, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ev_sessions, m)?)?;
    m.add_function(wrap_pyfunction!(surplus_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(export_tariff, m)?)?;
    m.add_function(wrap_pyfunction!(import_tariff, m)?)?;
    m.add_function(wrap_pyfunction!(validate_file, m)?)?;
    Ok(())
}
