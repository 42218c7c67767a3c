//! Network-adjusted sufficient statistics.
//!
//! The consumer's exposure to sectoral technology, factor prices, and import
//! prices in an open economy is not the raw Domar weight, factor share, or
//! import consumption share. Exports drain part of domestic production (and
//! of the factors embodied in it) away from the domestic consumer, while
//! imported intermediates expose the consumer to import prices through
//! domestically produced goods. Both corrections work through the Leontief
//! inverse, so the adjusted shares computed here carry the full
//! direct-plus-indirect exposure.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::iotable::{DerivedStats, IOTable};

/// How to remove the production network for the no-network counterfactual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoNetworkMode {
    /// Replace Ψ by the identity in every adjustment formula, keeping the
    /// table's shares as they are. Intermediate spending simply stops
    /// transmitting anything.
    #[default]
    Raw,
    /// Reallocate each sector's domestic intermediate spending onto its
    /// factors and imports in proportion, so zero-profit rows still hold,
    /// then recompute the adjusted shares on that linkage-free table.
    Reallocated,
}

/// Direct, export-adjusted, and network-adjusted shares for one table.
#[derive(Debug, Clone)]
pub struct AdjustedShares {
    /// Expenditure-based Domar weights λ̄.
    pub domar: DVector<f64>,
    /// λ̄ − x̄: direct exports subtracted.
    pub domar_export_adj: DVector<f64>,
    /// λ̄ − x̄ᵀΨ: direct and indirect exports subtracted; equals the
    /// network-adjusted domestic consumption share b̄_DᵀΨ.
    pub domar_network_adj: DVector<f64>,
    /// Aggregate factor shares Λ̄.
    pub factor: DVector<f64>,
    /// Λ̄ − x̄ᵀA: direct factor content of exports subtracted.
    pub factor_export_adj: DVector<f64>,
    /// Λ̄ − x̄ᵀΨA: full factor content of exports subtracted.
    pub factor_network_adj: DVector<f64>,
    /// Direct import consumption shares b̄_M.
    pub import_direct: DVector<f64>,
    /// b̄_M + (b̄_DᵀΨΓ)ᵀ: adds the import content of domestic consumption.
    pub import_network_adj: DVector<f64>,
    /// x̄ᵀΨA: each factor's embodiment in exports, direct plus indirect.
    pub export_content_of_factors: DVector<f64>,
}

/// Computes the adjusted shares of a validated table.
pub fn adjusted_shares(table: &IOTable, stats: &DerivedStats) -> AdjustedShares {
    let psi_t_x = stats.psi.transpose() * &table.exports;
    let psi_t_b = stats.psi.transpose() * &table.cons_domestic;

    let domar = stats.domar_expenditure.clone();
    let domar_export_adj = &domar - &table.exports;
    let domar_network_adj = &domar - &psi_t_x;

    let factor = stats.factor_shares_agg.clone();
    let export_content_direct = table.factor_shares.transpose() * &table.exports;
    let export_content_of_factors = table.factor_shares.transpose() * &psi_t_x;
    let factor_export_adj = &factor - &export_content_direct;
    let factor_network_adj = &factor - &export_content_of_factors;

    let import_direct = table.cons_import.clone();
    let import_network_adj = &import_direct + table.import_shares.transpose() * &psi_t_b;

    AdjustedShares {
        domar,
        domar_export_adj,
        domar_network_adj,
        factor,
        factor_export_adj,
        factor_network_adj,
        import_direct,
        import_network_adj,
        export_content_of_factors,
    }
}

/// Adjusted shares of the same economy with the production network removed.
///
/// The quantitative "no network" benchmark is not fully pinned down by a
/// share table alone, so both admissible constructions are kept:
/// [`NoNetworkMode::Raw`] sets Ψ = I in the adjustment formulas while leaving
/// all shares untouched, and [`NoNetworkMode::Reallocated`] folds intermediate
/// spending into value added and imports before recomputing.
pub fn no_network_counterfactual(table: &IOTable, mode: NoNetworkMode) -> Result<AdjustedShares> {
    match mode {
        NoNetworkMode::Raw => {
            let stats = table.derive()?;
            let domar = stats.domar_expenditure.clone();
            let domar_export_adj = &domar - &table.exports;
            let factor = stats.factor_shares_agg.clone();
            let export_content = table.factor_shares.transpose() * &table.exports;
            let import_network_adj =
                &table.cons_import + table.import_shares.transpose() * &table.cons_domestic;
            Ok(AdjustedShares {
                domar_network_adj: domar_export_adj.clone(),
                domar_export_adj,
                domar,
                factor_export_adj: &factor - &export_content,
                factor_network_adj: &factor - &export_content,
                factor,
                import_direct: table.cons_import.clone(),
                import_network_adj,
                export_content_of_factors: export_content,
            })
        }
        NoNetworkMode::Reallocated => {
            let folded = fold_network(table)?;
            let stats = folded.derive()?;
            Ok(adjusted_shares(&folded, &stats))
        }
    }
}

/// Builds the linkage-free twin of a table: Ω = 0 with each sector's
/// intermediate spending reassigned to its factor and import shares in
/// proportion, preserving zero-profit rows.
pub fn fold_network(table: &IOTable) -> Result<IOTable> {
    let n = table.n_sectors();
    let mut factor_shares = table.factor_shares.clone();
    let mut import_shares = table.import_shares.clone();
    for i in 0..n {
        let omega_sum: f64 = table.omega.row(i).sum();
        let rest = 1.0 - omega_sum;
        if rest <= 0.0 {
            return Err(Error::InvalidInput {
                what: format!("sector {}", table.sectors[i]),
                detail: "no value added or imports to absorb intermediate spending".into(),
            });
        }
        let scale = 1.0 / rest;
        for v in factor_shares.row_mut(i).iter_mut() {
            *v *= scale;
        }
        for v in import_shares.row_mut(i).iter_mut() {
            *v *= scale;
        }
    }
    IOTable::new(
        table.sectors.clone(),
        table.factors.clone(),
        table.imports.clone(),
        nalgebra::DMatrix::zeros(n, n),
        factor_shares,
        import_shares,
        table.cons_domestic.clone(),
        table.cons_import.clone(),
        table.exports.clone(),
        table.meta.clone(),
    )
}
