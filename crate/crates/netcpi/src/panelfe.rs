//! Two-way fixed effects for country×sector panels.
//!
//! Fits y_sc = μ + α_s + α_c + ε under the normalizations Σ α_s = 0 and
//! Σ α_c = 0, so every fixed effect reads as a deviation from the average
//! sector or country. The solver works on the effects-coded (sum-to-zero
//! contrast) design via normal equations; a dense dummy-variable least
//! squares with explicit constraints lives in the tests as an oracle.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One observation of the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelObs {
    pub country: String,
    pub sector: String,
    pub y: f64,
}

/// Estimated two-way fixed effects.
#[derive(Debug, Clone)]
pub struct FEResult {
    pub intercept: f64,
    /// Sector effects, Σ = 0.
    pub alpha_sector: BTreeMap<String, f64>,
    /// Country effects, Σ = 0.
    pub alpha_country: BTreeMap<String, f64>,
    /// Residual per observation, in input order.
    pub residuals: Vec<f64>,
    pub r2: f64,
    pub n_obs: usize,
}

impl FEResult {
    /// Fitted value for a (country, sector) cell.
    pub fn fitted(&self, country: &str, sector: &str) -> Option<f64> {
        Some(self.intercept + self.alpha_sector.get(sector)? + self.alpha_country.get(country)?)
    }
}

/// Which block of effects to rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectKind {
    Country,
    Sector,
}

fn index_of(ids: &[String]) -> BTreeMap<&str, usize> {
    ids.iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect()
}

/// Checks that the bipartite graph of observed (country, sector) pairs is
/// connected, which is what identifies the two effect blocks jointly.
/// Returns the connected components (as sorted country lists) on failure.
fn check_connected(
    obs: &[PanelObs],
    countries: &[String],
    sectors: &[String],
) -> std::result::Result<(), Vec<Vec<String>>> {
    let c_index = index_of(countries);
    let s_index = index_of(sectors);
    let nc = countries.len();
    let ns = sectors.len();
    // Union-find over countries ∪ sectors (sectors offset by nc).
    let mut parent: Vec<usize> = (0..nc + ns).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for o in obs {
        let c = c_index[o.country.as_str()];
        let s = nc + s_index[o.sector.as_str()];
        let (rc, rs) = (find(&mut parent, c), find(&mut parent, s));
        if rc != rs {
            parent[rc] = rs;
        }
    }
    let mut components: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, country) in countries.iter().enumerate() {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(country.clone());
    }
    if components.len() <= 1 {
        Ok(())
    } else {
        Err(components.into_values().collect())
    }
}

/// Least-squares fit of the two-way fixed-effects model under sum-to-zero
/// normalizations.
///
/// Requires at least two countries, two sectors, and a connected design
/// (every pair of countries linked through shared sectors); otherwise the
/// effects are not jointly identified and an error lists the components.
pub fn fit_two_way_fe(obs: &[PanelObs]) -> Result<FEResult> {
    let mut countries: Vec<String> = obs.iter().map(|o| o.country.clone()).collect();
    countries.sort();
    countries.dedup();
    let mut sectors: Vec<String> = obs.iter().map(|o| o.sector.clone()).collect();
    sectors.sort();
    sectors.dedup();

    if countries.len() < 2 || sectors.len() < 2 {
        return Err(Error::Identification(format!(
            "need at least 2 countries and 2 sectors, got {} and {}",
            countries.len(),
            sectors.len()
        )));
    }
    if let Some(bad) = obs.iter().find(|o| !o.y.is_finite()) {
        return Err(Error::InvalidInput {
            what: format!("observation ({}, {})", bad.country, bad.sector),
            detail: format!("y must be finite, got {}", bad.y),
        });
    }
    if let Err(components) = check_connected(obs, &countries, &sectors) {
        return Err(Error::Identification(format!(
            "design graph is disconnected; country components: {components:?}"
        )));
    }

    // Effects coding: drop the last level of each block and let it carry
    // minus the sum of the others. Columns: intercept, S−1 sector contrasts,
    // C−1 country contrasts.
    let ns = sectors.len();
    let nc = countries.len();
    let p = 1 + (ns - 1) + (nc - 1);
    let n = obs.len();
    let s_index = index_of(&sectors);
    let c_index = index_of(&countries);

    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut y = DVector::<f64>::zeros(n);
    for (row, o) in obs.iter().enumerate() {
        x[(row, 0)] = 1.0;
        let s = s_index[o.sector.as_str()];
        if s < ns - 1 {
            x[(row, 1 + s)] = 1.0;
        } else {
            for col in 0..ns - 1 {
                x[(row, 1 + col)] = -1.0;
            }
        }
        let c = c_index[o.country.as_str()];
        if c < nc - 1 {
            x[(row, ns + c)] = 1.0;
        } else {
            for col in 0..nc - 1 {
                x[(row, ns + col)] = -1.0;
            }
        }
        y[row] = o.y;
    }

    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let beta = xtx.lu().solve(&xty).ok_or(Error::Identification(
        "normal equations are rank deficient".into(),
    ))?;

    let intercept = beta[0];
    let mut alpha_sector = BTreeMap::new();
    let mut tail = 0.0;
    for (i, sector) in sectors.iter().take(ns - 1).enumerate() {
        alpha_sector.insert(sector.clone(), beta[1 + i]);
        tail -= beta[1 + i];
    }
    alpha_sector.insert(sectors[ns - 1].clone(), tail);
    let mut alpha_country = BTreeMap::new();
    let mut tail = 0.0;
    for (i, country) in countries.iter().take(nc - 1).enumerate() {
        alpha_country.insert(country.clone(), beta[ns + i]);
        tail -= beta[ns + i];
    }
    alpha_country.insert(countries[nc - 1].clone(), tail);

    let fitted = &x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let mean_y = y.sum() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    Ok(FEResult {
        intercept,
        alpha_sector,
        alpha_country,
        residuals,
        r2,
        n_obs: n,
    })
}

/// Fixed effects in descending order, ties broken lexicographically by id.
pub fn rank_fixed_effects(
    result: &FEResult,
    which: EffectKind,
    top_k: usize,
) -> Vec<(String, f64)> {
    let block = match which {
        EffectKind::Country => &result.alpha_country,
        EffectKind::Sector => &result.alpha_sector,
    };
    let mut entries: Vec<(String, f64)> = block.iter().map(|(k, v)| (k.clone(), *v)).collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    entries.truncate(top_k);
    entries
}
