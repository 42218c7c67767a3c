//! CPI response evaluation and model-implied inflation series.
//!
//! The consumer price index responds to a perturbation of sectoral
//! productivity Ẑ, factor prices Ŵ, and import prices P̂_M through
//!
//! ```text
//! P̂ = −(λ̄ − x̄ᵀΨ)ᵀ Ẑ + (Λ̄ − x̄ᵀΨA)ᵀ Ŵ + (b̄_M + (b̄_DᵀΨΓ)ᵀ)ᵀ P̂_M
//! ```
//!
//! An [`ElasticitySet`] freezes those weight vectors for one of three model
//! variants (closed economy, open economy without a network, open economy
//! with the network). The rest of the module turns dated level data into
//! shock paths, evaluates P̂ along them, differences the result into
//! year-over-year inflation, and provides the factor-supply representation
//! (`cpi_factor_supply`) and a two-period decomposition of the price level into
//! named channels.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::iotable::{DerivedStats, IOTable};
use crate::netstats::{adjusted_shares, no_network_counterfactual, NoNetworkMode};

/// Which model's CPI elasticities to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Closed economy: GDP-based Domar weights on Ẑ, aggregate factor shares
    /// on Ŵ, nothing on import prices. The table stores expenditure-based
    /// shares, so the caller supplies the expenditure-to-GDP ratio used to
    /// convert them (1 under balanced trade).
    Closed { expenditure_to_gdp: f64 },
    /// Open economy with export and import exposure but no intermediate
    /// linkages transmitting them.
    SoeNoNetwork(NoNetworkMode),
    /// Open economy with the full production network.
    SoeNetwork,
}

impl Variant {
    /// Closed economy under balanced trade (E = nGDP).
    pub fn closed() -> Self {
        Variant::Closed {
            expenditure_to_gdp: 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Closed { .. } => "closed",
            Variant::SoeNoNetwork(_) => "soe-no-network",
            Variant::SoeNetwork => "soe-network",
        }
    }
}

/// CPI response weights on (Ẑ, Ŵ, P̂_M) for one model variant.
///
/// `weight_z` enters the CPI change negatively.
#[derive(Debug, Clone)]
pub struct ElasticitySet {
    pub variant: Variant,
    pub weight_z: DVector<f64>,
    pub weight_w: DVector<f64>,
    pub weight_pm: DVector<f64>,
}

/// Builds the elasticity set for a variant from a validated table.
pub fn elasticity_set(
    table: &IOTable,
    stats: &DerivedStats,
    variant: Variant,
) -> Result<ElasticitySet> {
    match variant {
        Variant::Closed { expenditure_to_gdp } => {
            if expenditure_to_gdp <= 0.0 || !expenditure_to_gdp.is_finite() {
                return Err(Error::InvalidInput {
                    what: "expenditure_to_gdp".into(),
                    detail: format!("must be a positive real, got {expenditure_to_gdp}"),
                });
            }
            Ok(ElasticitySet {
                variant,
                weight_z: &stats.domar_expenditure * expenditure_to_gdp,
                weight_w: &stats.factor_shares_agg * expenditure_to_gdp,
                weight_pm: DVector::zeros(table.n_imports()),
            })
        }
        Variant::SoeNoNetwork(mode) => {
            let adj = no_network_counterfactual(table, mode)?;
            Ok(ElasticitySet {
                variant,
                weight_z: adj.domar_network_adj,
                weight_w: adj.factor_network_adj,
                weight_pm: adj.import_network_adj,
            })
        }
        Variant::SoeNetwork => {
            let adj = adjusted_shares(table, stats);
            Ok(ElasticitySet {
                variant,
                weight_z: adj.domar_network_adj,
                weight_w: adj.factor_network_adj,
                weight_pm: adj.import_network_adj,
            })
        }
    }
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            what: what.to_string(),
            expected: format!("{expected}"),
            got: format!("{got}"),
        });
    }
    Ok(())
}

/// First-order CPI change for one draw of shocks.
pub fn cpi_change(
    es: &ElasticitySet,
    z_hat: &DVector<f64>,
    w_hat: &DVector<f64>,
    pm_hat: &DVector<f64>,
) -> Result<f64> {
    check_len("z_hat", es.weight_z.len(), z_hat.len())?;
    check_len("w_hat", es.weight_w.len(), w_hat.len())?;
    check_len("pm_hat", es.weight_pm.len(), pm_hat.len())?;
    Ok(-es.weight_z.dot(z_hat) + es.weight_w.dot(w_hat) + es.weight_pm.dot(pm_hat))
}

/// Perturbation in the factor-supply representation: factor prices are
/// endogenous and expressed through expenditure-based factor share changes,
/// money, transfers, and factor supplies.
#[derive(Debug, Clone)]
pub struct FactorSupplyInputs {
    /// Log changes of the expenditure-based factor shares, Λ̄̂.
    pub factor_share_hat: DVector<f64>,
    /// Log changes of factor supplies, L̄̂.
    pub factor_supply_hat: DVector<f64>,
    /// Net-transfer change over money, dT/𝓜.
    pub transfer_rate: f64,
    /// Money supply log change, 𝓜̂.
    pub money_hat: f64,
    pub z_hat: DVector<f64>,
    pub pm_hat: DVector<f64>,
}

/// CPI change under the factor-supply representation.
///
/// Implemented by substituting Ŵ = Λ̄̂ + 1_F 𝓜̂ − L̄̂ into the weights of
/// [`cpi_change`] and replacing the aggregate factor-income term
/// Λ̄ᵀΛ̄̂ + (Λ̄ᵀ1)𝓜̂ with dT/𝓜 + 𝓜̂, which is the consumer budget identity
/// in share form. The expanded representation
///
/// ```text
/// P̂ = −(λ̄ − λ̃)ᵀẐ − Λ̃ᵀΛ̄̂ − (Λ̄ − Λ̃)ᵀL̄̂ + dT/𝓜 + (1 − Λ̃ᵀ1)𝓜̂
///     + (b̄_M + b̃_M)ᵀP̂_M
/// ```
///
/// is algebraically the same object and is kept as a test oracle.
pub fn cpi_factor_supply(table: &IOTable, stats: &DerivedStats, inputs: &FactorSupplyInputs) -> Result<f64> {
    let f = table.n_factors();
    check_len("factor_share_hat", f, inputs.factor_share_hat.len())?;
    check_len("factor_supply_hat", f, inputs.factor_supply_hat.len())?;
    check_len("z_hat", table.n_sectors(), inputs.z_hat.len())?;
    check_len("pm_hat", table.n_imports(), inputs.pm_hat.len())?;
    for (name, v) in [
        ("transfer_rate", inputs.transfer_rate),
        ("money_hat", inputs.money_hat),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidInput {
                what: name.into(),
                detail: "must be finite".into(),
            });
        }
    }

    let adj = adjusted_shares(table, stats);
    let z_weight = &adj.domar_network_adj; // λ̄ − λ̃
    let factor_content = &adj.export_content_of_factors; // Λ̃
    let import_weight = &adj.import_network_adj; // b̄_M + b̃_M

    // Ŵ = Λ̄̂ + 1_F 𝓜̂ − L̄̂, applied to the factor-price weight (Λ̄ − Λ̃)ᵀŴ with the
    // Λ̄-part of the product rewritten through the budget identity.
    let w_hat = &inputs.factor_share_hat - &inputs.factor_supply_hat
        + DVector::from_element(f, inputs.money_hat);
    let factor_block = inputs.transfer_rate + inputs.money_hat
        - stats.factor_shares_agg.dot(&inputs.factor_supply_hat)
        - factor_content.dot(&w_hat);

    Ok(-z_weight.dot(&inputs.z_hat) + factor_block + import_weight.dot(&inputs.pm_hat))
}

/// Inputs to the two-period price-level decomposition.
///
/// `expenditure0_hat` can be set directly or derived from the future-period
/// objects through the consumption Euler equation via
/// [`TwoPeriodInputs::from_euler`]. All entries default to zero, so tests and
/// callers only set the channel they perturb.
#[derive(Debug, Clone)]
pub struct TwoPeriodInputs {
    /// Ê₀: nominal expenditure change at time 0.
    pub expenditure0_hat: f64,
    /// Ê₁: nominal expenditure change in the future period.
    pub expenditure1_hat: f64,
    /// 𝓔̂₀: nominal exchange rate change at time 0 (the nominal anchor).
    pub exchange0_hat: f64,
    /// 𝓔̂₁: future nominal exchange rate change.
    pub exchange1_hat: f64,
    /// Change in the foreign gross interest rate, d log(1 + i*).
    pub istar_hat: f64,
    /// Discount factor change, β̂.
    pub beta_hat: f64,
    pub z_hat: DVector<f64>,
    pub w_hat: DVector<f64>,
    /// Log changes of factor supplies; zero under the inelastic-supply
    /// normalization.
    pub l_bar_hat: DVector<f64>,
    /// Import prices in foreign currency, P̂*_M.
    pub pm_star_hat: DVector<f64>,
    /// Foreign-currency price change of the numeraire import good.
    pub pm0_star_hat: f64,
}

impl TwoPeriodInputs {
    /// All-zero perturbation for a table of this shape.
    pub fn zero(table: &IOTable) -> Self {
        TwoPeriodInputs {
            expenditure0_hat: 0.0,
            expenditure1_hat: 0.0,
            exchange0_hat: 0.0,
            exchange1_hat: 0.0,
            istar_hat: 0.0,
            beta_hat: 0.0,
            z_hat: DVector::zeros(table.n_sectors()),
            w_hat: DVector::zeros(table.n_factors()),
            l_bar_hat: DVector::zeros(table.n_factors()),
            pm_star_hat: DVector::zeros(table.n_imports()),
            pm0_star_hat: 0.0,
        }
    }

    /// Fills `expenditure0_hat` from the Euler equation in foreign currency:
    /// Ê₀ − 𝓔̂₀ = Ê₁ − 𝓔̂₁ − β̂ − d log(1+i*).
    pub fn from_euler(mut self) -> Self {
        self.expenditure0_hat = self.exchange0_hat + self.expenditure1_hat
            - self.exchange1_hat
            - self.beta_hat
            - self.istar_hat;
        self
    }
}

/// The two-period CPI change split into its named channels.
///
/// Components sum to `total` exactly.
#[derive(Debug, Clone, Copy)]
pub struct TwoPeriodDecomposition {
    pub total: f64,
    /// 𝓔̂₀: the exchange rate as nominal anchor.
    pub nominal_anchor: f64,
    /// Expenditure in foreign currency relative to the numeraire import.
    pub aggregate_demand: f64,
    /// −b̄_DᵀΨ Ẑ.
    pub technology: f64,
    /// b̄_DᵀΨA Λ̄̂.
    pub factor_reallocation: f64,
    /// −b̄_DᵀΨA L̄̂.
    pub factor_supplies: f64,
    /// (b̄_M + b̄_DᵀΨΓ)ᵀ (P̂*_M − 1 P̂*_{m₀}).
    pub import_prices: f64,
}

impl TwoPeriodDecomposition {
    /// Channel values in a stable order, for CSV emission.
    pub fn components(&self) -> [(&'static str, f64); 6] {
        [
            ("nominal_anchor", self.nominal_anchor),
            ("aggregate_demand", self.aggregate_demand),
            ("technology", self.technology),
            ("factor_reallocation", self.factor_reallocation),
            ("factor_supplies", self.factor_supplies),
            ("import_prices", self.import_prices),
        ]
    }
}

/// Two-period price-level decomposition.
///
/// Factor share changes are recovered from observed factor prices through
/// Λ̄̂ = Ŵ + L̄̂ − 1 Ê₀, so the reallocation and supply channels reported here
/// are consistent with the factor prices fed in.
pub fn two_period_cpi(
    inputs: &TwoPeriodInputs,
    table: &IOTable,
    stats: &DerivedStats,
) -> Result<TwoPeriodDecomposition> {
    check_len("z_hat", table.n_sectors(), inputs.z_hat.len())?;
    check_len("w_hat", table.n_factors(), inputs.w_hat.len())?;
    check_len("l_bar_hat", table.n_factors(), inputs.l_bar_hat.len())?;
    check_len("pm_star_hat", table.n_imports(), inputs.pm_star_hat.len())?;

    let adj = adjusted_shares(table, stats);
    let consumer_exposure = &adj.domar_network_adj; // b̄_DᵀΨ
    let factor_weight = &adj.factor_network_adj; // b̄_DᵀΨA
    let factor_weight_total = factor_weight.sum(); // b̄_DᵀΨA 1_F
    let import_weight = &adj.import_network_adj; // b̄_M + b̄_DᵀΨΓ

    let f = table.n_factors();
    let e0 = inputs.expenditure0_hat;
    let demand_shifter = e0 - inputs.exchange0_hat - inputs.pm0_star_hat;
    let factor_share_hat = &inputs.w_hat + &inputs.l_bar_hat - DVector::from_element(f, e0);

    let nominal_anchor = inputs.exchange0_hat;
    let aggregate_demand = factor_weight_total * demand_shifter;
    let technology = -consumer_exposure.dot(&inputs.z_hat);
    let factor_reallocation = factor_weight.dot(&factor_share_hat);
    let factor_supplies = -factor_weight.dot(&inputs.l_bar_hat);
    let relative_import =
        &inputs.pm_star_hat - DVector::from_element(table.n_imports(), inputs.pm0_star_hat);
    let import_prices = import_weight.dot(&relative_import);

    Ok(TwoPeriodDecomposition {
        total: nominal_anchor
            + aggregate_demand
            + technology
            + factor_reallocation
            + factor_supplies
            + import_prices,
        nominal_anchor,
        aggregate_demand,
        technology,
        factor_reallocation,
        factor_supplies,
        import_prices,
    })
}

/// Net transfer to the rest of the world implied by the two-period model:
/// T = β·P₀C₀·(1 − nGDP₁/(P₁C₁)).
pub fn net_transfer(beta: f64, p0c0: f64, ngdp1: f64, p1c1: f64) -> Result<f64> {
    if p1c1 <= 0.0 {
        return Err(Error::InvalidInput {
            what: "p1c1".into(),
            detail: format!("future expenditure must be positive, got {p1c1}"),
        });
    }
    Ok(beta * p0c0 * (1.0 - ngdp1 / p1c1))
}

/// Dated log-levels for the three shock families, keyed by series id.
#[derive(Debug, Clone, Default)]
pub struct LevelFrame {
    /// Sector id -> dated log productivity levels.
    pub z: BTreeMap<String, BTreeMap<String, f64>>,
    /// Factor id -> dated log factor price levels.
    pub w: BTreeMap<String, BTreeMap<String, f64>>,
    /// Import id -> dated log import price levels.
    pub pm: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Dated log-deviations of (Ẑ, Ŵ, P̂_M) from a base period.
#[derive(Debug, Clone)]
pub struct ShockPath {
    pub dates: Vec<String>,
    /// T×N.
    pub z_hat: DMatrix<f64>,
    /// T×F.
    pub w_hat: DMatrix<f64>,
    /// T×M.
    pub pm_hat: DMatrix<f64>,
    pub base_period: String,
}

impl ShockPath {
    pub fn base_index(&self) -> usize {
        self.dates
            .iter()
            .position(|d| *d == self.base_period)
            .expect("base period is always one of the dates")
    }
}

/// Builds a shock path from dated log-levels by subtracting the base-period
/// row of every series.
///
/// Dates are the union of all observed dates, ordered lexicographically
/// (ISO-style date labels sort correctly); every observed series must cover
/// all of them. Factor prices with no data at all default to a zero path;
/// productivity and import-price series must be present for every id.
pub fn shock_path_from_levels(
    table: &IOTable,
    frame: &LevelFrame,
    base_period: &str,
) -> Result<ShockPath> {
    let mut dates: Vec<String> = frame
        .z
        .values()
        .chain(frame.w.values())
        .chain(frame.pm.values())
        .flat_map(|series| series.keys().cloned())
        .collect();
    dates.sort();
    dates.dedup();
    if dates.is_empty() {
        return Err(Error::ShockSeries("no observations in any series".into()));
    }
    if !dates.iter().any(|d| d == base_period) {
        return Err(Error::ShockSeries(format!(
            "base period {base_period} not present in any series"
        )));
    }

    let grab = |kind: &str,
                ids: &[String],
                series: &BTreeMap<String, BTreeMap<String, f64>>,
                allow_missing: bool|
     -> Result<DMatrix<f64>> {
        let mut out = DMatrix::<f64>::zeros(dates.len(), ids.len());
        for (col, id) in ids.iter().enumerate() {
            match series.get(id) {
                None if allow_missing => {} // unobserved factor price: zero path
                None => {
                    return Err(Error::ShockSeries(format!(
                        "missing {kind} series for {id}"
                    )));
                }
                Some(obs) => {
                    let base = *obs.get(base_period).ok_or_else(|| {
                        Error::ShockSeries(format!(
                            "{kind} series {id} has no observation at base period {base_period}"
                        ))
                    })?;
                    for (row, date) in dates.iter().enumerate() {
                        let level = *obs.get(date).ok_or_else(|| {
                            Error::ShockSeries(format!(
                                "{kind} series {id} is missing date {date} (ragged panel)"
                            ))
                        })?;
                        out[(row, col)] = level - base;
                    }
                }
            }
        }
        Ok(out)
    };

    for (kind, series) in [("Z", &frame.z), ("W", &frame.w), ("PM", &frame.pm)] {
        let known: &[String] = match kind {
            "Z" => &table.sectors,
            "W" => &table.factors,
            _ => &table.imports,
        };
        for id in series.keys() {
            if !known.contains(id) {
                return Err(Error::ShockSeries(format!(
                    "{kind} series {id} does not match any table id"
                )));
            }
        }
    }

    let z_hat = grab("Z", &table.sectors, &frame.z, false)?;
    let w_hat = grab("W", &table.factors, &frame.w, true)?;
    let pm_hat = grab("PM", &table.imports, &frame.pm, false)?;

    Ok(ShockPath {
        dates,
        z_hat,
        w_hat,
        pm_hat,
        base_period: base_period.to_string(),
    })
}

/// A dated inflation (or price-level) series.
#[derive(Debug, Clone)]
pub struct InflationSeries {
    pub dates: Vec<String>,
    pub values: Vec<f64>,
    /// Set when the shock path was shorter than the differencing lag, so the
    /// series is empty by construction rather than by error.
    pub too_short: bool,
}

/// Dated price-level responses P̂_t along a shock path.
pub fn price_level_path(es: &ElasticitySet, path: &ShockPath) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.dates.len());
    for t in 0..path.dates.len() {
        let z = path.z_hat.row(t).transpose();
        let w = path.w_hat.row(t).transpose();
        let pm = path.pm_hat.row(t).transpose();
        out.push(cpi_change(es, &z, &w, &pm)?);
    }
    Ok(out)
}

/// Model-implied inflation: π_t = P̂_t − P̂_{t−lag}, defined where both
/// endpoints exist. `lag` defaults to 4 in the CLI for quarterly
/// year-over-year inflation.
pub fn model_inflation(
    es: &ElasticitySet,
    path: &ShockPath,
    lag: usize,
) -> Result<InflationSeries> {
    if lag == 0 {
        return Err(Error::InvalidInput {
            what: "lag".into(),
            detail: "differencing lag must be at least 1".into(),
        });
    }
    let p_hat = price_level_path(es, path)?;
    if p_hat.len() <= lag {
        return Ok(InflationSeries {
            dates: vec![],
            values: vec![],
            too_short: true,
        });
    }
    let dates = path.dates[lag..].to_vec();
    let values = (lag..p_hat.len())
        .map(|t| p_hat[t] - p_hat[t - lag])
        .collect();
    Ok(InflationSeries {
        dates,
        values,
        too_short: false,
    })
}

/// Arithmetic mean and sample standard deviation (n−1 divisor; 0 for a
/// single observation).
pub fn moments(series: &[f64]) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(Error::InvalidInput {
            what: "series".into(),
            detail: "moments of an empty series are undefined".into(),
        });
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let std = if series.len() < 2 {
        0.0
    } else {
        (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok((mean, std))
}
