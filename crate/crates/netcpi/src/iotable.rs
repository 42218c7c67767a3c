//! Production-network data model: one country-year's input-output accounts.
//!
//! An [`IOTable`] stores everything as shares of the relevant denominator:
//! intermediate and factor spending per unit of sector sales, consumption
//! per unit of total expenditure, exports per unit of total expenditure.
//! Validation enforces the accounting identities that make those shares a
//! coherent economy; [`derive`](IOTable::derive) turns a valid table into the
//! Leontief inverse and expenditure-based Domar weights used everywhere else.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{EPS_MARGIN, TOL_SOLVE};

/// Country code and year identifying a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub country: String,
    pub year: i32,
}

/// One country-year's production-network accounts, all in share form.
#[derive(Debug, Clone)]
pub struct IOTable {
    /// Sector identifiers (length N).
    pub sectors: Vec<String>,
    /// Factor identifiers (length F).
    pub factors: Vec<String>,
    /// Import-good identifiers (length M).
    pub imports: Vec<String>,
    /// N×N matrix; entry (i, j) is sector i's spending on domestic input j
    /// per unit of its own sales.
    pub omega: DMatrix<f64>,
    /// N×F matrix; entry (i, f) is sector i's spending on factor f per unit
    /// of sales.
    pub factor_shares: DMatrix<f64>,
    /// N×M matrix; entry (i, m) is sector i's spending on import m per unit
    /// of sales.
    pub import_shares: DMatrix<f64>,
    /// Share of total expenditure spent on each domestic good (length N).
    pub cons_domestic: DVector<f64>,
    /// Share of total expenditure spent on each import (length M).
    pub cons_import: DVector<f64>,
    /// Sector exports over total expenditure (length N).
    pub exports: DVector<f64>,
    pub meta: TableMeta,
}

/// Quantities derived from a validated table.
#[derive(Debug, Clone)]
pub struct DerivedStats {
    /// Leontief inverse (I − Ω)⁻¹.
    pub psi: DMatrix<f64>,
    /// Expenditure-based Domar weights λ̄, λ̄ᵀ = (b̄_D + x̄)ᵀΨ.
    pub domar_expenditure: DVector<f64>,
    /// Expenditure-based aggregate factor shares Λ̄ᵀ = λ̄ᵀA.
    pub factor_shares_agg: DVector<f64>,
}

/// A single failed identity, with enough context to locate it.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Which identity failed.
    pub check: String,
    /// Row or entry index the residual refers to, when applicable.
    pub index: Option<usize>,
    /// Magnitude of the violation.
    pub residual: f64,
}

/// Outcome of checking a table's accounting identities.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Spectral radius of Ω found by the power iteration.
    pub spectral_radius: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest violation magnitude, 0 when the report is clean.
    pub fn worst_residual(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.residual.abs())
            .fold(0.0, f64::max)
    }

    fn push(&mut self, check: &str, index: Option<usize>, residual: f64) {
        self.violations.push(Violation {
            check: check.to_string(),
            index,
            residual,
        });
    }
}

impl IOTable {
    /// Assembles a table, rejecting dimension mismatches up front.
    /// Identity checks are deferred to [`IOTable::validate`] so that a report
    /// of all violations can be produced in one pass.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sectors: Vec<String>,
        factors: Vec<String>,
        imports: Vec<String>,
        omega: DMatrix<f64>,
        factor_shares: DMatrix<f64>,
        import_shares: DMatrix<f64>,
        cons_domestic: DVector<f64>,
        cons_import: DVector<f64>,
        exports: DVector<f64>,
        meta: TableMeta,
    ) -> Result<Self> {
        let (n, f, m) = (sectors.len(), factors.len(), imports.len());
        let expect = |what: &str, rows: usize, cols: usize, mat: &DMatrix<f64>| -> Result<()> {
            if mat.nrows() != rows || mat.ncols() != cols {
                return Err(Error::Dimension {
                    what: what.to_string(),
                    expected: format!("{rows}x{cols}"),
                    got: format!("{}x{}", mat.nrows(), mat.ncols()),
                });
            }
            Ok(())
        };
        let expect_len = |what: &str, len: usize, v: &DVector<f64>| -> Result<()> {
            if v.len() != len {
                return Err(Error::Dimension {
                    what: what.to_string(),
                    expected: format!("{len}"),
                    got: format!("{}", v.len()),
                });
            }
            Ok(())
        };
        if n == 0 {
            return Err(Error::InvalidInput {
                what: "sectors".into(),
                detail: "table must have at least one sector".into(),
            });
        }
        expect("omega", n, n, &omega)?;
        expect("factor_shares", n, f, &factor_shares)?;
        expect("import_shares", n, m, &import_shares)?;
        expect_len("cons_domestic", n, &cons_domestic)?;
        expect_len("cons_import", m, &cons_import)?;
        expect_len("exports", n, &exports)?;
        Ok(IOTable {
            sectors,
            factors,
            imports,
            omega,
            factor_shares,
            import_shares,
            cons_domestic,
            cons_import,
            exports,
            meta,
        })
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn n_imports(&self) -> usize {
        self.imports.len()
    }

    /// Checks every accounting identity and returns the full list of
    /// violations. The table passes iff the report is empty:
    ///
    /// * every share lies in [0, 1];
    /// * zero-profit rows: Ω, A, and Γ row sums add to 1 per sector;
    /// * consumption shares sum to 1 across domestic goods and imports;
    /// * the spectral radius of Ω is strictly below 1.
    pub fn validate(&self, tol_identity: f64) -> ValidationReport {
        let mut report = ValidationReport::default();

        let mut check_range = |check: &str, idx: usize, v: f64| {
            // Distance outside [0, 1]; rounding noise up to tol_identity passes.
            let residual = if v < 0.0 { -v } else { (v - 1.0).max(0.0) };
            if !v.is_finite() {
                report.push(check, Some(idx), f64::NAN);
            } else if residual > tol_identity {
                report.push(check, Some(idx), residual);
            }
        };
        for (idx, &v) in self.omega.iter().enumerate() {
            check_range("omega_range", idx, v);
        }
        for (idx, &v) in self.factor_shares.iter().enumerate() {
            check_range("factor_share_range", idx, v);
        }
        for (idx, &v) in self.import_shares.iter().enumerate() {
            check_range("import_share_range", idx, v);
        }
        for (idx, &v) in self.cons_domestic.iter().enumerate() {
            check_range("cons_domestic_range", idx, v);
        }
        for (idx, &v) in self.cons_import.iter().enumerate() {
            check_range("cons_import_range", idx, v);
        }
        for (idx, &v) in self.exports.iter().enumerate() {
            check_range("export_range", idx, v);
        }

        for i in 0..self.n_sectors() {
            let row_sum = self.omega.row(i).sum()
                + self.factor_shares.row(i).sum()
                + self.import_shares.row(i).sum();
            let residual = (row_sum - 1.0).abs();
            if residual > tol_identity {
                report.push("zero_profit_row", Some(i), residual);
            }
        }

        let cons_total = self.cons_domestic.sum() + self.cons_import.sum();
        let residual = (cons_total - 1.0).abs();
        if residual > tol_identity {
            report.push("consumption_normalization", None, residual);
        }

        let rho = spectral_radius(&self.omega);
        report.spectral_radius = rho;
        if rho >= 1.0 - EPS_MARGIN || rho.is_nan() {
            report.push("spectral_radius", None, rho);
        }

        report
    }

    /// Validates and errors out on failure; convenience for pipelines.
    pub fn require_valid(&self, tol_identity: f64) -> Result<()> {
        let report = self.validate(tol_identity);
        if report.passed() {
            Ok(())
        } else {
            Err(Error::ValidationFailed {
                context: format!("{} {}", self.meta.country, self.meta.year),
                failures: report.violations.len(),
                worst: report.worst_residual(),
            })
        }
    }

    /// Leontief inverse and expenditure-based aggregates for this table.
    pub fn derive(&self) -> Result<DerivedStats> {
        let psi = leontief(&self.omega)?;
        // λ̄ᵀ = (b̄_D + x̄)ᵀ Ψ, column form λ̄ = Ψᵀ (b̄_D + x̄).
        let demand = &self.cons_domestic + &self.exports;
        let domar_expenditure = psi.transpose() * demand;
        let factor_shares_agg = self.factor_shares.transpose() * &domar_expenditure;
        Ok(DerivedStats {
            psi,
            domar_expenditure,
            factor_shares_agg,
        })
    }
}

/// Spectral radius of a nonnegative square matrix by power iteration.
///
/// Iterates on Ω + I so that periodic structures (which make the plain
/// iteration oscillate) still converge; the Perron root of a nonnegative
/// matrix shifts exactly by one under that change. Falls back to the Schur
/// eigenvalues if the iteration stalls, which only happens for defective
/// dominant eigenvalues.
pub fn spectral_radius(omega: &DMatrix<f64>) -> f64 {
    let n = omega.nrows();
    if n == 0 {
        return 0.0;
    }
    let shifted = omega + DMatrix::<f64>::identity(n, n);
    let mut x = DVector::from_element(n, 1.0);
    let mut estimate = f64::INFINITY;
    for _ in 0..10_000 {
        let y = &shifted * &x;
        let norm = y.amax();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / x.amax();
        x = y / norm;
        if (next - estimate).abs() < 1e-8 {
            return next - 1.0;
        }
        estimate = next;
    }
    // Defective dominant eigenvalue; let the dense eigensolver settle it.
    omega
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Leontief inverse Ψ = (I − Ω)⁻¹ by dense LU solve of (I − Ω)X = I.
///
/// Errors with [`Error::NonProductive`] when the spectral radius of Ω is not
/// strictly below one, instead of surfacing a numerical failure.
pub fn leontief(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = spectral_radius(omega);
    if rho >= 1.0 - EPS_MARGIN || rho.is_nan() {
        return Err(Error::NonProductive { rho });
    }
    let n = omega.nrows();
    let i_minus_omega = DMatrix::<f64>::identity(n, n) - omega;
    let lu = i_minus_omega.clone().lu();
    let psi = lu
        .solve(&DMatrix::<f64>::identity(n, n))
        .ok_or(Error::NonProductive { rho })?;
    debug_assert!((&i_minus_omega * &psi - DMatrix::<f64>::identity(n, n)).amax() < TOL_SOLVE);
    Ok(psi)
}

/// Truncated Neumann series Σ Ωˢ, kept as an independent check on
/// [`leontief`]. Sums until the increment's max-abs entry falls below `tol`.
pub fn neumann_oracle(omega: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    const MAX_TERMS: usize = 100_000;
    let n = omega.nrows();
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_TERMS {
        term *= omega;
        let increment = term.amax();
        sum += &term;
        if increment < tol {
            return Ok(sum);
        }
    }
    Err(Error::NonProductive {
        rho: spectral_radius(omega),
    })
}

/// Maps fine sectors onto a coarse classification.
///
/// `coarse` fixes which coarse sectors exist and their output order;
/// `assign` sends every fine sector id to one of them.
#[derive(Debug, Clone)]
pub struct SectorMapping {
    pub coarse: Vec<String>,
    pub assign: std::collections::BTreeMap<String, String>,
}

/// Collapses a table to a coarser sector classification.
///
/// Shares cannot be averaged directly; the aggregation works in nominal
/// flows. With total expenditure normalized to one, sector sales are the
/// expenditure-based Domar weights, so each fine share is scaled by its
/// sector's weight, flows are summed within coarse buckets, and coarse shares
/// are recovered by dividing by summed sales.
pub fn aggregate(
    table: &IOTable,
    mapping: &SectorMapping,
    sales_weights: &DVector<f64>,
) -> Result<IOTable> {
    let n = table.n_sectors();
    if sales_weights.len() != n {
        return Err(Error::Dimension {
            what: "sales_weights".into(),
            expected: format!("{n}"),
            got: format!("{}", sales_weights.len()),
        });
    }
    if let Some(idx) = sales_weights
        .iter()
        .position(|&w| w <= 0.0 || !w.is_finite())
    {
        return Err(Error::Aggregation(format!(
            "sales weight for sector {} must be positive, got {}",
            table.sectors[idx], sales_weights[idx]
        )));
    }

    let coarse_index: std::collections::BTreeMap<&str, usize> = mapping
        .coarse
        .iter()
        .enumerate()
        .map(|(k, name)| (name.as_str(), k))
        .collect();
    if coarse_index.len() != mapping.coarse.len() {
        return Err(Error::Aggregation("duplicate coarse sector label".into()));
    }

    // fine index -> coarse index, required total on the fine sectors
    let mut fine_to_coarse = Vec::with_capacity(n);
    for name in &table.sectors {
        let target = mapping.assign.get(name).ok_or_else(|| {
            Error::Aggregation(format!("fine sector {name} has no coarse assignment"))
        })?;
        let &k = coarse_index.get(target.as_str()).ok_or_else(|| {
            Error::Aggregation(format!(
                "fine sector {name} maps to unknown coarse sector {target}"
            ))
        })?;
        fine_to_coarse.push(k);
    }

    let nc = mapping.coarse.len();
    let mut coarse_sales = vec![0.0_f64; nc];
    for (i, &k) in fine_to_coarse.iter().enumerate() {
        coarse_sales[k] += sales_weights[i];
    }
    if let Some(k) = coarse_sales.iter().position(|&s| s == 0.0) {
        return Err(Error::Aggregation(format!(
            "coarse sector {} has no fine sectors mapped to it",
            mapping.coarse[k]
        )));
    }

    let f = table.n_factors();
    let m = table.n_imports();
    let mut omega = DMatrix::<f64>::zeros(nc, nc);
    let mut factor_shares = DMatrix::<f64>::zeros(nc, f);
    let mut import_shares = DMatrix::<f64>::zeros(nc, m);
    let mut cons_domestic = DVector::<f64>::zeros(nc);
    let mut exports = DVector::<f64>::zeros(nc);

    for i in 0..n {
        let ki = fine_to_coarse[i];
        let w = sales_weights[i];
        for j in 0..n {
            omega[(ki, fine_to_coarse[j])] += w * table.omega[(i, j)];
        }
        for ff in 0..f {
            factor_shares[(ki, ff)] += w * table.factor_shares[(i, ff)];
        }
        for mm in 0..m {
            import_shares[(ki, mm)] += w * table.import_shares[(i, mm)];
        }
        cons_domestic[ki] += table.cons_domestic[i];
        exports[ki] += table.exports[i];
    }
    for k in 0..nc {
        let s = coarse_sales[k];
        for j in 0..nc {
            omega[(k, j)] /= s;
        }
        for ff in 0..f {
            factor_shares[(k, ff)] /= s;
        }
        for mm in 0..m {
            import_shares[(k, mm)] /= s;
        }
    }

    IOTable::new(
        mapping.coarse.clone(),
        table.factors.clone(),
        table.imports.clone(),
        omega,
        factor_shares,
        import_shares,
        cons_domestic,
        table.cons_import.clone(),
        exports,
        table.meta.clone(),
    )
}


#[cfg(test)]
mod tests {
    use super::fixtures::{one_sector_closed, two_sector};
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fixture_validates() {
        let report = two_sector().validate(crate::TOL_IDENTITY);
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_abs_diff_eq!(report.spectral_radius, 0.3, epsilon = 1e-7);
    }

    #[test]
    fn zero_profit_violation_reported_with_residual() {
        let mut table = two_sector();
        // Push row 0's omega sum up by 0.05 with no offsetting change.
        table.omega[(0, 0)] += 0.05;
        let report = table.validate(crate::TOL_IDENTITY);
        assert!(!report.passed());
        let v = report
            .violations
            .iter()
            .find(|v| v.check == "zero_profit_row")
            .expect("zero-profit violation");
        assert_eq!(v.index, Some(0));
        assert_abs_diff_eq!(v.residual, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn consumption_normalization_violation() {
        let mut table = two_sector();
        table.cons_import[0] = 0.2; // totals 0.9
        let report = table.validate(crate::TOL_IDENTITY);
        let v = report
            .violations
            .iter()
            .find(|v| v.check == "consumption_normalization")
            .expect("consumption violation");
        assert_abs_diff_eq!(v.residual, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = IOTable::new(
            vec!["s1".into(), "s2".into()],
            vec!["labor".into()],
            vec![],
            DMatrix::zeros(1, 1), // wrong
            DMatrix::zeros(2, 1),
            DMatrix::zeros(2, 0),
            DVector::zeros(2),
            DVector::zeros(0),
            DVector::zeros(2),
            TableMeta {
                country: "X".into(),
                year: 2000,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn leontief_of_zero_is_identity() {
        let psi = leontief(&DMatrix::zeros(3, 3)).unwrap();
        assert!((psi - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn leontief_matches_fixture_values() {
        let psi = leontief(&two_sector().omega).unwrap();
        assert_abs_diff_eq!(psi[(0, 0)], 1.25, epsilon = 1e-7);
        assert_abs_diff_eq!(psi[(0, 1)], 0.1785714, epsilon = 1e-7);
        assert_abs_diff_eq!(psi[(1, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi[(1, 1)], 1.4285714, epsilon = 1e-7);
    }

    #[test]
    fn leontief_rejects_unit_own_use() {
        let err = leontief(&DMatrix::from_row_slice(1, 1, &[1.0])).unwrap_err();
        assert!(matches!(err, Error::NonProductive { .. }));
    }

    #[test]
    fn neumann_scalar_geometric_series() {
        let sum = neumann_oracle(&DMatrix::from_row_slice(1, 1, &[0.9]), 1e-12).unwrap();
        assert_abs_diff_eq!(sum[(0, 0)], 10.0, epsilon = 1e-10);
    }

    #[test]
    fn neumann_zero_matrix_is_identity() {
        let sum = neumann_oracle(&DMatrix::zeros(2, 2), 1e-12).unwrap();
        assert!((sum - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn neumann_agrees_with_leontief_on_fixture() {
        let omega = two_sector().omega;
        let psi = leontief(&omega).unwrap();
        let series = neumann_oracle(&omega, 1e-12).unwrap();
        assert!((psi - series).amax() < 1e-11);
    }

    #[test]
    fn neumann_diverges_on_nonproductive() {
        let err = neumann_oracle(&DMatrix::from_row_slice(1, 1, &[1.0]), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonProductive { .. }));
    }

    #[test]
    fn spectral_radius_handles_periodic_structure() {
        // Eigenvalues ±sqrt(0.8*0.2); the unshifted iteration would oscillate.
        let omega = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, 0.2, 0.0]);
        assert_abs_diff_eq!(
            spectral_radius(&omega),
            (0.8f64 * 0.2).sqrt(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn derive_matches_brute_force_iteration() {
        let table = two_sector();
        let stats = table.derive().unwrap();

        // Oracle: fixed-point iteration on λ̄ = b̄_D + x̄ + Ωᵀ λ̄.
        let demand = &table.cons_domestic + &table.exports;
        let mut lambda = demand.clone();
        for _ in 0..10_000 {
            let next = &demand + table.omega.transpose() * &lambda;
            if (&next - &lambda).amax() < 1e-14 {
                break;
            }
            lambda = next;
        }
        assert!((&stats.domar_expenditure - &lambda).amax() < 1e-12);
        assert_abs_diff_eq!(stats.domar_expenditure[0], 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(stats.domar_expenditure[1], 0.7142857, epsilon = 1e-7);
        assert_abs_diff_eq!(stats.factor_shares_agg[0], 0.5357143, epsilon = 1e-7);
    }

    #[test]
    fn derive_one_sector_closed() {
        let stats = one_sector_closed().derive().unwrap();
        assert_abs_diff_eq!(stats.domar_expenditure[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.factor_shares_agg[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_profit_propagates_through_psi() {
        // Ψ (A·1_F + Γ·1_M) = 1_N on any valid table.
        let table = two_sector();
        let stats = table.derive().unwrap();
        let va = table.factor_shares.column_sum() + table.import_shares.column_sum();
        let ones = &stats.psi * va;
        for i in 0..table.n_sectors() {
            assert_abs_diff_eq!(ones[i], 1.0, epsilon = 1e-10);
        }
    }

    fn identity_mapping(table: &IOTable) -> SectorMapping {
        SectorMapping {
            coarse: table.sectors.clone(),
            assign: table
                .sectors
                .iter()
                .map(|s| (s.clone(), s.clone()))
                .collect(),
        }
    }

    #[test]
    fn aggregate_identity_mapping_is_noop() {
        let table = two_sector();
        let stats = table.derive().unwrap();
        let coarse =
            aggregate(&table, &identity_mapping(&table), &stats.domar_expenditure).unwrap();
        assert!((&coarse.omega - &table.omega).amax() < 1e-12);
        assert!((&coarse.factor_shares - &table.factor_shares).amax() < 1e-12);
        assert!((&coarse.cons_domestic - &table.cons_domestic).amax() < 1e-12);
    }

    #[test]
    fn aggregate_two_to_one_matches_hand_sum() {
        let table = two_sector();
        let stats = table.derive().unwrap();
        let mapping = SectorMapping {
            coarse: vec!["all".into()],
            assign: [
                ("s1".to_string(), "all".to_string()),
                ("s2".to_string(), "all".to_string()),
            ]
            .into_iter()
            .collect(),
        };
        let coarse = aggregate(&table, &mapping, &stats.domar_expenditure).unwrap();
        // Hand-summed nominal flows with E = 1: sales (0.5, 0.7142857).
        let total_sales = 0.5 + 0.7142857142857143;
        assert_abs_diff_eq!(
            coarse.omega[(0, 0)],
            0.3642857142857143 / total_sales,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            coarse.factor_shares[(0, 0)],
            0.5357142857142857 / total_sales,
            epsilon = 1e-12
        );

        let row_sum =
            coarse.omega[(0, 0)] + coarse.factor_shares[(0, 0)] + coarse.import_shares[(0, 0)];
        assert_abs_diff_eq!(row_sum, 1.0, epsilon = 1e-12);
        assert!(coarse.validate(crate::TOL_IDENTITY).passed());

        // Aggregation preserves total sales over expenditure.
        let coarse_stats = coarse.derive().unwrap();
        assert_abs_diff_eq!(
            coarse_stats.domar_expenditure.sum(),
            stats.domar_expenditure.sum(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn aggregate_rejects_empty_bucket() {
        let table = two_sector();
        let stats = table.derive().unwrap();
        let mapping = SectorMapping {
            coarse: vec!["all".into(), "unused".into()],
            assign: [
                ("s1".to_string(), "all".to_string()),
                ("s2".to_string(), "all".to_string()),
            ]
            .into_iter()
            .collect(),
        };
        let err = aggregate(&table, &mapping, &stats.domar_expenditure).unwrap_err();
        assert!(matches!(err, Error::Aggregation(msg) if msg.contains("unused")));
    }

    #[test]
    fn aggregate_rejects_nonpositive_weights() {
        let table = two_sector();
        let err = aggregate(
            &table,
            &identity_mapping(&table),
            &DVector::from_row_slice(&[0.5, 0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Aggregation(_)));
    }
}
