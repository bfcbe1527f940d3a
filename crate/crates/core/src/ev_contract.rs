//! Period accounting for the EV parking contract.
//!
//! The building never sells electricity to the EV user directly. The user
//! pays for parking time and for the hours the car spends charging, and is
//! rewarded for idle (flexible) hours and for the hours the building draws
//! from the car. All quantities are expressed in hours at the charger's
//! rated power.

use serde::{Deserialize, Serialize};

use crate::domain::{EVSession, TariffBook, TimeGrid};
use crate::error::{Error, Result};

/// Slack used when checking ledger identities built from floating-point sums.
const LEDGER_TOL: f64 = 1e-7;

/// How discharged hours are paid back with extra charging hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompensationMode {
    /// One charger efficiency: `t⁺_R + t⁻_T / η`.
    #[default]
    PaperLiteral,
    /// Both conversion losses: `t⁺_R + t⁻_T / η²`.
    RoundTrip,
}

impl CompensationMode {
    /// Extra charging hours owed per discharged hour.
    pub fn discharge_factor(self, efficiency: f64) -> f64 {
        match self {
            CompensationMode::PaperLiteral => 1.0 / efficiency,
            CompensationMode::RoundTrip => 1.0 / (efficiency * efficiency),
        }
    }
}

impl std::str::FromStr for CompensationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "round-trip" => Ok(Self::RoundTrip),
            other => Err(Error::Domain(format!("unknown compensation mode {other:?}"))),
        }
    }
}

/// Hours of rated-power operation equivalent to running at `power_kw` for one step.
pub fn used_period(power_kw: f64, max_power_kw: f64, step_hours: f64) -> Result<f64> {
    if power_kw < 0.0 || !power_kw.is_finite() {
        return Err(Error::Domain(format!("power {power_kw} kW must be ≥ 0")));
    }
    if max_power_kw <= 0.0 {
        if power_kw > 0.0 {
            return Err(Error::Domain(format!(
                "power {power_kw} kW with a zero power limit"
            )));
        }
        return Ok(0.0);
    }
    if power_kw > max_power_kw * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "power {power_kw} kW exceeds the limit {max_power_kw} kW"
        )));
    }
    Ok(power_kw / max_power_kw * step_hours)
}

/// Total charging hours the building owes the user once `total_discharge_hours`
/// have been drawn from the car.
pub fn required_total_charge_hours(
    requested_hours: f64,
    total_discharge_hours: f64,
    efficiency: f64,
    mode: CompensationMode,
) -> Result<f64> {
    if requested_hours < 0.0 || total_discharge_hours < 0.0 {
        return Err(Error::Domain("periods must be ≥ 0".into()));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::Domain(format!("efficiency {efficiency} not in (0, 1]")));
    }
    Ok(requested_hours + total_discharge_hours * mode.discharge_factor(efficiency))
}

/// Per-step used periods of one EV visit together with their totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionLedger {
    pub used_charge_hours: Vec<f64>,
    pub used_discharge_hours: Vec<f64>,
    pub total_charge_hours: f64,
    pub total_discharge_hours: f64,
    pub idle_hours: f64,
    pub revenue_eur: f64,
}

impl SessionLedger {
    /// Builds a ledger from per-step used periods and checks the contract:
    /// discharge never runs ahead of charge, stays within the user's cap, and
    /// charge plus discharge fit inside the parking time. `revenue_eur` is left
    /// at zero; see [`session_revenue`].
    pub fn from_used_periods(
        session: &EVSession,
        used_charge_hours: Vec<f64>,
        used_discharge_hours: Vec<f64>,
    ) -> Result<Self> {
        if used_charge_hours.len() != used_discharge_hours.len() {
            return Err(Error::Domain("charge and discharge series differ in length".into()));
        }
        if used_charge_hours
            .iter()
            .chain(&used_discharge_hours)
            .any(|&t| t < -LEDGER_TOL)
        {
            return Err(Error::ContractViolation(format!(
                "{}: negative used period",
                session.id
            )));
        }
        let mut charged = 0.0;
        let mut discharged = 0.0;
        for (h, (c, d)) in used_charge_hours.iter().zip(&used_discharge_hours).enumerate() {
            charged += c;
            discharged += d;
            if discharged > charged + LEDGER_TOL {
                return Err(Error::ContractViolation(format!(
                    "{}: discharged {discharged:.6} h exceeds charged {charged:.6} h by step {h}",
                    session.id
                )));
            }
        }
        if discharged > session.max_discharge_hours + LEDGER_TOL {
            return Err(Error::ContractViolation(format!(
                "{}: discharged {discharged:.6} h exceeds the allowed {} h",
                session.id, session.max_discharge_hours
            )));
        }
        let idle = session.parking_hours - charged - discharged;
        if idle < -LEDGER_TOL {
            return Err(Error::ContractViolation(format!(
                "{}: charge and discharge ({:.6} h) exceed parking time {} h",
                session.id,
                charged + discharged,
                session.parking_hours
            )));
        }
        Ok(Self {
            used_charge_hours,
            used_discharge_hours,
            total_charge_hours: charged,
            total_discharge_hours: discharged,
            idle_hours: idle.max(0.0),
            revenue_eur: 0.0,
        })
    }

    /// Ledger from per-step charger powers (kW).
    pub fn from_powers(
        session: &EVSession,
        charge_kw: &[f64],
        discharge_kw: &[f64],
        time: &TimeGrid,
    ) -> Result<Self> {
        let charge = charge_kw
            .iter()
            .map(|&p| used_period(p.max(0.0), session.max_charge_kw, time.step_hours))
            .collect::<Result<Vec<_>>>()?;
        let discharge = discharge_kw
            .iter()
            .map(|&p| used_period(p.max(0.0), session.max_discharge_kw, time.step_hours))
            .collect::<Result<Vec<_>>>()?;
        Self::from_used_periods(session, charge, discharge)
    }

    /// Gap between the charge hours delivered and the hours owed.
    pub fn compensation_residual(&self, session: &EVSession, mode: CompensationMode) -> Result<f64> {
        let owed = required_total_charge_hours(
            session.requested_charge_hours,
            self.total_discharge_hours,
            session.charger_efficiency,
            mode,
        )?;
        Ok(self.total_charge_hours - owed)
    }

    pub fn with_revenue(mut self, session: &EVSession, tariffs: &TariffBook) -> Result<Self> {
        self.revenue_eur = session_revenue(session, &self, tariffs)?;
        Ok(self)
    }
}

/// Income the building earns from one EV visit (positive = income).
pub fn session_revenue(session: &EVSession, ledger: &SessionLedger, tariffs: &TariffBook) -> Result<f64> {
    let idle = session.parking_hours - ledger.total_charge_hours - ledger.total_discharge_hours;
    if idle < -LEDGER_TOL {
        return Err(Error::ContractViolation(format!(
            "{}: idle time {idle:.6} h is negative",
            session.id
        )));
    }
    let steps = ledger.used_charge_hours.len();
    if tariffs.charge_eur_per_hour.len() < steps || tariffs.discharge_eur_per_hour.len() < steps {
        return Err(Error::Domain("ledger is longer than the tariff series".into()));
    }
    let charge: f64 = ledger
        .used_charge_hours
        .iter()
        .zip(&tariffs.charge_eur_per_hour)
        .map(|(t, c)| t * c)
        .sum();
    let discharge: f64 = ledger
        .used_discharge_hours
        .iter()
        .zip(&tariffs.discharge_eur_per_hour)
        .map(|(t, c)| t * c)
        .sum();
    Ok(session.parking_hours * tariffs.parking_eur_per_hour
        + idle * tariffs.flexibility_eur_per_hour
        + charge
        + discharge)
}
