//! Community exchange tariffs.
//!
//! The export tariff slides linearly from `C_G − C_IG` (no surplus in the
//! community) to the grid export tariff `C_EG` (surplus covers the deficit);
//! the import tariff is tied to it so that buyer and seller both beat the
//! grid while the grid-use fee is still paid.

use serde::{Deserialize, Serialize};

use crate::domain::CommunityScenario;
use crate::error::{Error, Result};

/// How the surplus ratio is formed from the aggregate loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioForm {
    /// `ΣL⁻ / (ΣL⁺ − ΣL⁻)`, clamped to [0, 1].
    #[default]
    AsWritten,
    /// `ΣL⁻ / ΣL⁺`, clamped to [0, 1].
    PlainRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityPrices {
    pub surplus_ratio: Vec<f64>,
    pub export_eur_per_kwh: Vec<f64>,
    pub import_eur_per_kwh: Vec<f64>,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if (0.0..=1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(Error::Domain(format!("surplus ratio {ratio} is outside [0, 1]")))
    }
}

/// Share of the community deficit that the community surplus can cover.
/// Returns 1 when the denominator vanishes.
pub fn surplus_ratio(total_deficit_kw: f64, total_surplus_kw: f64) -> Result<f64> {
    surplus_ratio_with(total_deficit_kw, total_surplus_kw, RatioForm::AsWritten)
}

pub fn surplus_ratio_with(total_deficit_kw: f64, total_surplus_kw: f64, form: RatioForm) -> Result<f64> {
    if !(total_deficit_kw >= 0.0) || !(total_surplus_kw >= 0.0) {
        return Err(Error::Domain(format!(
            "aggregate loads must be ≥ 0 (deficit {total_deficit_kw}, surplus {total_surplus_kw})"
        )));
    }
    let denominator = match form {
        RatioForm::AsWritten => total_deficit_kw - total_surplus_kw,
        RatioForm::PlainRatio => total_deficit_kw,
    };
    if denominator <= 0.0 {
        return Ok(1.0);
    }
    Ok((total_surplus_kw / denominator).clamp(0.0, 1.0))
}

/// Tariff paid for energy exported to the community (negative = income).
pub fn export_tariff(ratio: f64, c_g: f64, c_ig: f64, c_eg: f64) -> Result<f64> {
    check_ratio(ratio)?;
    Ok((1.0 - ratio) * (c_g - c_ig) + ratio * c_eg)
}

/// Tariff paid for energy imported from the community, given the export
/// tariff of the same step.
pub fn import_tariff(ratio: f64, c_g: f64, c_ig: f64, c_ec: f64) -> Result<f64> {
    check_ratio(ratio)?;
    Ok(c_ig + ratio * (c_g - c_ec - c_ig))
}

/// Per-step community tariffs from the baseline aggregate loads.
pub fn price_community(scenario: &CommunityScenario) -> Result<CommunityPrices> {
    let steps = scenario.time.steps;
    let form = scenario.options.model.ratio_form;
    let t = &scenario.tariffs;
    let mut prices = CommunityPrices {
        surplus_ratio: Vec::with_capacity(steps),
        export_eur_per_kwh: Vec::with_capacity(steps),
        import_eur_per_kwh: Vec::with_capacity(steps),
    };
    for h in 0..steps {
        let mut deficit = 0.0;
        let mut surplus = 0.0;
        for b in &scenario.buildings {
            deficit += series_at(&b.net_load.deficit_kw, h, &b.name)?;
            surplus += series_at(&b.net_load.surplus_kw, h, &b.name)?;
        }
        let ratio = surplus_ratio_with(deficit, surplus, form)?;
        let c_g = series_at(&t.grid_use_eur_per_kwh, h, "grid use")?;
        let c_ig = series_at(&t.grid_import_eur_per_kwh, h, "grid import")?;
        let c_eg = series_at(&t.grid_export_eur_per_kwh, h, "grid export")?;
        let c_ec = export_tariff(ratio, c_g, c_ig, c_eg)?;
        let c_ic = import_tariff(ratio, c_g, c_ig, c_ec)?;
        prices.surplus_ratio.push(ratio);
        prices.export_eur_per_kwh.push(c_ec);
        prices.import_eur_per_kwh.push(c_ic);
    }
    Ok(prices)
}

fn series_at(series: &[f64], h: usize, what: &str) -> Result<f64> {
    series
        .get(h)
        .copied()
        .ok_or_else(|| Error::Domain(format!("{what} series has no value for step {h}")))
}

/// Weighted mean of `values`; falls back to the plain mean when all weights are zero.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if values.is_empty() {
        return 0.0;
    }
    if total <= 0.0 {
        return values.iter().sum::<f64>() / values.len() as f64;
    }
    values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total
}

impl CommunityPrices {
    pub fn steps(&self) -> usize {
        self.surplus_ratio.len()
    }

    /// Export tariff averaged over the day, weighted by the energy surplus
    /// the community has available at each step.
    pub fn mean_export_by_surplus(&self, scenario: &CommunityScenario) -> f64 {
        let weights: Vec<f64> = (0..self.steps())
            .map(|h| {
                scenario
                    .buildings
                    .iter()
                    .map(|b| b.net_load.surplus_kw[h])
                    .sum::<f64>()
            })
            .collect();
        weighted_mean(&self.export_eur_per_kwh, &weights)
    }

    /// Import tariff averaged over the day, weighted by the aggregate deficit.
    pub fn mean_import_by_deficit(&self, scenario: &CommunityScenario) -> f64 {
        let weights: Vec<f64> = (0..self.steps())
            .map(|h| {
                scenario
                    .buildings
                    .iter()
                    .map(|b| b.net_load.deficit_kw[h])
                    .sum::<f64>()
            })
            .collect();
        weighted_mean(&self.import_eur_per_kwh, &weights)
    }
}
