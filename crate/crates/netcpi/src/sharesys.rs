//! Substitution matrices and the endogenous factor-share system.
//!
//! Expenditure shares only stay constant under Cobb-Douglas demands. Away
//! from that benchmark, price changes reallocate spending, and the
//! reallocation feeds back into factor prices through market clearing. This
//! module builds the share-elasticity ("substitution") matrices implied by
//! CES demand systems and stacks the five share/price blocks into one linear
//! system whose unknowns are factor prices, Domar-weight changes, factor
//! share changes, domestic prices, and export share changes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::iotable::{DerivedStats, IOTable};

/// Elasticities of substitution for the single-nest CES parameterization:
/// one elasticity for the consumer across all final goods, one per producer
/// across all of its inputs (domestic goods, imports, and factors alike).
/// Unit elasticities reproduce Cobb-Douglas, where all substitution matrices
/// vanish.
#[derive(Debug, Clone)]
pub struct ElasticityParams {
    pub theta_consumer: f64,
    /// One entry per sector.
    pub theta_producers: Vec<f64>,
}

impl ElasticityParams {
    /// All elasticities equal to one.
    pub fn cobb_douglas(n_sectors: usize) -> Self {
        ElasticityParams {
            theta_consumer: 1.0,
            theta_producers: vec![1.0; n_sectors],
        }
    }

    fn validate(&self, n_sectors: usize) -> Result<()> {
        if self.theta_producers.len() != n_sectors {
            return Err(Error::Dimension {
                what: "theta_producers".into(),
                expected: format!("{n_sectors}"),
                got: format!("{}", self.theta_producers.len()),
            });
        }
        let all = std::iter::once(self.theta_consumer).chain(self.theta_producers.iter().copied());
        for v in all {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidInput {
                    what: "elasticity of substitution".into(),
                    detail: format!("must be strictly positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Aggregated share-elasticity matrices.
///
/// Producer blocks weight each producer's share elasticities by its use of
/// the input and its Domar weight; the consumer matrix covers all final
/// goods (domestic then imported) in one block.
#[derive(Debug, Clone)]
pub struct SubstitutionMatrices {
    /// Full consumer matrix over [domestic | import] goods, (N+M)×(N+M).
    pub phi_consumer: DMatrix<f64>,
    /// Φ_D: N×N, intermediate-demand response to domestic prices.
    pub phi_d: DMatrix<f64>,
    /// Φ_M: N×M, intermediate-demand response to import prices.
    pub phi_m: DMatrix<f64>,
    /// Φ_F: N×F, intermediate-demand response to factor prices.
    pub phi_f: DMatrix<f64>,
    /// Φ^F_D: F×N, factor-share response to domestic prices.
    pub phi_f_d: DMatrix<f64>,
    /// Φ^F_F: F×F, factor-share response to factor prices.
    pub phi_f_f: DMatrix<f64>,
    /// Φ^F_M: F×M, factor-share response to import prices.
    pub phi_f_m: DMatrix<f64>,
}

impl SubstitutionMatrices {
    /// Consumer block on domestic prices, N×N.
    pub fn phi_c_d(&self, n: usize) -> DMatrix<f64> {
        self.phi_consumer.view((0, 0), (n, n)).into()
    }

    /// Consumer block on import prices, N×M.
    pub fn phi_c_m(&self, n: usize, m: usize) -> DMatrix<f64> {
        self.phi_consumer.view((0, n), (n, m)).into()
    }
}

/// Producer i's full share-elasticity matrix over the combined input index
/// [domestic | import | factor] under single-nest CES:
/// φⁱ = (1 − θᵢ)(I − 1 sᵢᵀ) with sᵢ the producer's full share row.
pub fn producer_phi_matrix(table: &IOTable, theta_i: f64, i: usize) -> DMatrix<f64> {
    let (n, m, f) = (table.n_sectors(), table.n_imports(), table.n_factors());
    let k = n + m + f;
    let mut shares = DVector::<f64>::zeros(k);
    for j in 0..n {
        shares[j] = table.omega[(i, j)];
    }
    for mm in 0..m {
        shares[n + mm] = table.import_shares[(i, mm)];
    }
    for ff in 0..f {
        shares[n + m + ff] = table.factor_shares[(i, ff)];
    }
    let mut phi = DMatrix::<f64>::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            let delta = if r == c { 1.0 } else { 0.0 };
            phi[(r, c)] = (1.0 - theta_i) * (delta - shares[c]);
        }
    }
    phi
}

/// Builds the aggregated substitution matrices for the single-nest CES
/// demand system.
pub fn substitution_matrices(
    table: &IOTable,
    stats: &DerivedStats,
    params: &ElasticityParams,
) -> Result<SubstitutionMatrices> {
    params.validate(table.n_sectors())?;
    let (n, m) = (table.n_sectors(), table.n_imports());

    // φ^C over [domestic | import]: (1 − θ_c)(δ_ik − b̄_k).
    let mut b_all = DVector::<f64>::zeros(n + m);
    for i in 0..n {
        b_all[i] = table.cons_domestic[i];
    }
    for mm in 0..m {
        b_all[n + mm] = table.cons_import[mm];
    }
    let mut phi_consumer = DMatrix::<f64>::zeros(n + m, n + m);
    for r in 0..n + m {
        for c in 0..n + m {
            let delta = if r == c { 1.0 } else { 0.0 };
            phi_consumer[(r, c)] = (1.0 - params.theta_consumer) * (delta - b_all[c]);
        }
    }

    let phi_producer: Vec<DMatrix<f64>> = (0..n)
        .map(|i| producer_phi_matrix(table, params.theta_producers[i], i))
        .collect();
    Ok(aggregate_blocks(table, stats, phi_consumer, &phi_producer))
}

/// Same aggregation for caller-supplied demand elasticities.
///
/// `eps_consumer` is (N+M)² with entry (i, k) = ∂log C_i/∂log P_k
/// (compensated); each producer tensor is (N+M+F)² over the combined input
/// index. Share elasticities are formed as φ = δ + ε − (spending share on
/// the price that moved) and then aggregated exactly as in the CES case.
pub fn substitution_matrices_from_elasticities(
    table: &IOTable,
    stats: &DerivedStats,
    eps_consumer: &DMatrix<f64>,
    eps_producers: &[DMatrix<f64>],
) -> Result<SubstitutionMatrices> {
    let (n, m, f) = (table.n_sectors(), table.n_imports(), table.n_factors());
    let k = n + m + f;
    if eps_consumer.nrows() != n + m || eps_consumer.ncols() != n + m {
        return Err(Error::Dimension {
            what: "eps_consumer".into(),
            expected: format!("{}x{}", n + m, n + m),
            got: format!("{}x{}", eps_consumer.nrows(), eps_consumer.ncols()),
        });
    }
    if eps_producers.len() != n {
        return Err(Error::Dimension {
            what: "eps_producers".into(),
            expected: format!("{n}"),
            got: format!("{}", eps_producers.len()),
        });
    }

    let mut b_all = DVector::<f64>::zeros(n + m);
    for i in 0..n {
        b_all[i] = table.cons_domestic[i];
    }
    for mm in 0..m {
        b_all[n + mm] = table.cons_import[mm];
    }
    let mut phi_consumer = DMatrix::<f64>::zeros(n + m, n + m);
    for r in 0..n + m {
        for c in 0..n + m {
            let delta = if r == c { 1.0 } else { 0.0 };
            phi_consumer[(r, c)] = delta + eps_consumer[(r, c)] - b_all[c];
        }
    }

    let mut phi_producer = Vec::with_capacity(n);
    for (i, eps) in eps_producers.iter().enumerate() {
        if eps.nrows() != k || eps.ncols() != k {
            return Err(Error::Dimension {
                what: format!("eps_producers[{i}]"),
                expected: format!("{k}x{k}"),
                got: format!("{}x{}", eps.nrows(), eps.ncols()),
            });
        }
        let mut shares = DVector::<f64>::zeros(k);
        for j in 0..n {
            shares[j] = table.omega[(i, j)];
        }
        for mm in 0..m {
            shares[n + mm] = table.import_shares[(i, mm)];
        }
        for ff in 0..f {
            shares[n + m + ff] = table.factor_shares[(i, ff)];
        }
        let mut phi = DMatrix::<f64>::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                let delta = if r == c { 1.0 } else { 0.0 };
                phi[(r, c)] = delta + eps[(r, c)] - shares[c];
            }
        }
        phi_producer.push(phi);
    }
    Ok(aggregate_blocks(table, stats, phi_consumer, &phi_producer))
}

fn aggregate_blocks(
    table: &IOTable,
    stats: &DerivedStats,
    phi_consumer: DMatrix<f64>,
    phi_producer: &[DMatrix<f64>],
) -> SubstitutionMatrices {
    let (n, m, f) = (table.n_sectors(), table.n_imports(), table.n_factors());
    let lambda = &stats.domar_expenditure;

    // Intermediate blocks: φ_{i·} = Σ_j Ω_ji λ̄_j φ^j_{i·}.
    let mut phi_d = DMatrix::<f64>::zeros(n, n);
    let mut phi_m = DMatrix::<f64>::zeros(n, m);
    let mut phi_f = DMatrix::<f64>::zeros(n, f);
    for i in 0..n {
        for j in 0..n {
            let weight = table.omega[(j, i)] * lambda[j];
            if weight == 0.0 {
                continue;
            }
            let phi_j = &phi_producer[j];
            for c in 0..n {
                phi_d[(i, c)] += weight * phi_j[(i, c)];
            }
            for c in 0..m {
                phi_m[(i, c)] += weight * phi_j[(i, n + c)];
            }
            for c in 0..f {
                phi_f[(i, c)] += weight * phi_j[(i, n + m + c)];
            }
        }
    }

    // Factor blocks: φ_{f·} = Σ_i a_if λ̄_i φ^i_{f·}.
    let mut phi_f_d = DMatrix::<f64>::zeros(f, n);
    let mut phi_f_f = DMatrix::<f64>::zeros(f, f);
    let mut phi_f_m = DMatrix::<f64>::zeros(f, m);
    for ff in 0..f {
        for i in 0..n {
            let weight = table.factor_shares[(i, ff)] * lambda[i];
            if weight == 0.0 {
                continue;
            }
            let phi_i = &phi_producer[i];
            let r = n + m + ff;
            for c in 0..n {
                phi_f_d[(ff, c)] += weight * phi_i[(r, c)];
            }
            for c in 0..f {
                phi_f_f[(ff, c)] += weight * phi_i[(r, n + m + c)];
            }
            for c in 0..m {
                phi_f_m[(ff, c)] += weight * phi_i[(r, n + c)];
            }
        }
    }

    SubstitutionMatrices {
        phi_consumer,
        phi_d,
        phi_m,
        phi_f,
        phi_f_d,
        phi_f_f,
        phi_f_m,
    }
}

/// Exogenous perturbation fed to the share system.
#[derive(Debug, Clone)]
pub struct ShareShocks {
    pub z_hat: DVector<f64>,
    pub pm_hat: DVector<f64>,
    /// Export demand changes X̂.
    pub x_hat: DVector<f64>,
    /// Factor supply changes L̄̂.
    pub l_bar_hat: DVector<f64>,
    /// Money supply change 𝓜̂.
    pub m_hat: f64,
}

impl ShareShocks {
    pub fn zero(table: &IOTable) -> Self {
        ShareShocks {
            z_hat: DVector::zeros(table.n_sectors()),
            pm_hat: DVector::zeros(table.n_imports()),
            x_hat: DVector::zeros(table.n_sectors()),
            l_bar_hat: DVector::zeros(table.n_factors()),
            m_hat: 0.0,
        }
    }
}

/// Solution of the stacked share system, together with the shocks that
/// produced it.
#[derive(Debug, Clone)]
pub struct ShareSystemSolution {
    pub w_hat: DVector<f64>,
    pub dlambda_bar: DVector<f64>,
    pub dfactor_bar: DVector<f64>,
    pub p_d_hat: DVector<f64>,
    pub dx_bar: DVector<f64>,
    pub shocks: ShareShocks,
    /// Reciprocal condition estimate of the assembled system.
    pub rcond: f64,
}

impl ShareSystemSolution {
    /// Net-transfer rate dT/𝓜 implied by the solved share changes through
    /// the budget identity Σ_f Λ̄_f = 1 + T/𝓜.
    pub fn implied_transfer_rate(&self, stats: &DerivedStats) -> f64 {
        self.dfactor_bar.sum() + (stats.factor_shares_agg.sum() - 1.0) * self.shocks.m_hat
    }

    /// Largest residual of the five equation blocks at this solution.
    pub fn residual_norm(
        &self,
        table: &IOTable,
        stats: &DerivedStats,
        subs: &SubstitutionMatrices,
    ) -> f64 {
        let (n, m, f) = (table.n_sectors(), table.n_imports(), table.n_factors());
        let shocks = &self.shocks;
        let psi_t = stats.psi.transpose();
        let diag_b = DMatrix::from_diagonal(&table.cons_domestic);

        let r1 = &self.dfactor_bar
            - (&subs.phi_f_d * &self.p_d_hat
                + &subs.phi_f_f * &self.w_hat
                + &subs.phi_f_m * &shocks.pm_hat
                + table.factor_shares.transpose() * &self.dlambda_bar);
        let inner = &diag_b * subs.phi_c_d(n) * &self.p_d_hat
            + &diag_b * subs.phi_c_m(n, m) * &shocks.pm_hat
            + &subs.phi_d * &self.p_d_hat
            + &subs.phi_m * &shocks.pm_hat
            + &subs.phi_f * &self.w_hat
            + &self.dx_bar;
        let r2 = &self.dlambda_bar - &psi_t * inner;
        let r3 = &self.p_d_hat
            - (-(&stats.psi * &shocks.z_hat)
                + &stats.psi * &table.factor_shares * &self.w_hat
                + &stats.psi * &table.import_shares * &shocks.pm_hat);
        let r4 = &self.dfactor_bar
            - stats.factor_shares_agg.component_mul(
                &(&self.w_hat + &shocks.l_bar_hat - DVector::from_element(f, shocks.m_hat)),
            );
        let r5 = &self.dx_bar
            - table.exports.component_mul(
                &(&self.p_d_hat + &shocks.x_hat - DVector::from_element(n, shocks.m_hat)),
            );
        [r1.amax(), r2.amax(), r3.amax(), r4.amax(), r5.amax()]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

const RCOND_FLOOR: f64 = 1e-12;

/// Solves the stacked linear system for (Ŵ, dλ̄, dΛ̄, P̂_D, dx̄).
///
/// The five blocks are, in order: the factor-share clearing equation, the
/// Domar-weight clearing equation, the domestic price system, the
/// factor-share definition, and the export-share definition. The assembled
/// (2F+3N)² matrix is checked for conditioning before the LU solve.
pub fn solve_share_system(
    table: &IOTable,
    stats: &DerivedStats,
    subs: &SubstitutionMatrices,
    shocks: &ShareShocks,
) -> Result<ShareSystemSolution> {
    let (n, m, f) = (table.n_sectors(), table.n_imports(), table.n_factors());
    for (what, got, expected) in [
        ("z_hat", shocks.z_hat.len(), n),
        ("pm_hat", shocks.pm_hat.len(), m),
        ("x_hat", shocks.x_hat.len(), n),
        ("l_bar_hat", shocks.l_bar_hat.len(), f),
    ] {
        if got != expected {
            return Err(Error::Dimension {
                what: what.into(),
                expected: format!("{expected}"),
                got: format!("{got}"),
            });
        }
    }

    let size = 2 * f + 3 * n;
    // Unknown layout: [Ŵ | dλ̄ | dΛ̄ | P̂_D | dx̄].
    let col_w = 0;
    let col_dlambda = f;
    let col_dfactor = f + n;
    let col_pd = 2 * f + n;
    let col_dx = 2 * f + 2 * n;

    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);

    let psi_t = stats.psi.transpose();
    let ones_f = DVector::from_element(f, 1.0);
    let ones_n = DVector::from_element(n, 1.0);

    // Block 1 (F rows): dΛ̄ = Φ^F_D P̂_D + Φ^F_F Ŵ + Φ^F_M p̂m + Aᵀ dλ̄.
    {
        let r0 = 0;
        for i in 0..f {
            a[(r0 + i, col_dfactor + i)] = 1.0;
        }
        set_block(&mut a, r0, col_pd, &(-&subs.phi_f_d));
        set_block(&mut a, r0, col_w, &(-&subs.phi_f_f));
        set_block(&mut a, r0, col_dlambda, &(-table.factor_shares.transpose()));
        let rhs_block = &subs.phi_f_m * &shocks.pm_hat;
        set_rhs(&mut rhs, r0, &rhs_block);
    }

    // Block 2 (N rows): dλ̄ = Ψᵀ[(diag(b̄)Φ^C_D + Φ_D)P̂_D
    //                       + (diag(b̄)Φ^C_M + Φ_M)p̂m + dx̄ + Φ_F Ŵ].
    {
        let r0 = f;
        let diag_b = DMatrix::from_diagonal(&table.cons_domestic);
        let pd_coeff = &psi_t * (&diag_b * subs.phi_c_d(n) + &subs.phi_d);
        let pm_coeff = &psi_t * (&diag_b * subs.phi_c_m(n, m) + &subs.phi_m);
        for i in 0..n {
            a[(r0 + i, col_dlambda + i)] = 1.0;
        }
        set_block(&mut a, r0, col_pd, &(-&pd_coeff));
        set_block(&mut a, r0, col_w, &(-(&psi_t * &subs.phi_f)));
        set_block(&mut a, r0, col_dx, &(-&psi_t));
        let rhs_block = pm_coeff * &shocks.pm_hat;
        set_rhs(&mut rhs, r0, &rhs_block);
    }

    // Block 3 (N rows): P̂_D = −ΨẐ + ΨAŴ + ΨΓp̂m.
    {
        let r0 = f + n;
        for i in 0..n {
            a[(r0 + i, col_pd + i)] = 1.0;
        }
        set_block(&mut a, r0, col_w, &(-(&stats.psi * &table.factor_shares)));
        let rhs_block =
            -(&stats.psi * &shocks.z_hat) + &stats.psi * &table.import_shares * &shocks.pm_hat;
        set_rhs(&mut rhs, r0, &rhs_block);
    }

    // Block 4 (F rows): dΛ̄ = diag(Λ̄)(Ŵ + L̄̂ − 1_F 𝓜̂).
    {
        let r0 = f + 2 * n;
        for i in 0..f {
            a[(r0 + i, col_dfactor + i)] = 1.0;
            a[(r0 + i, col_w + i)] = -stats.factor_shares_agg[i];
        }
        let rhs_block = stats
            .factor_shares_agg
            .component_mul(&(&shocks.l_bar_hat - &ones_f * shocks.m_hat));
        set_rhs(&mut rhs, r0, &rhs_block);
    }

    // Block 5 (N rows): dx̄ = diag(x̄)(P̂_D + X̂ − 1_N 𝓜̂).
    {
        let r0 = 2 * f + 2 * n;
        for i in 0..n {
            a[(r0 + i, col_dx + i)] = 1.0;
            a[(r0 + i, col_pd + i)] = -table.exports[i];
        }
        let rhs_block = table
            .exports
            .component_mul(&(&shocks.x_hat - &ones_n * shocks.m_hat));
        set_rhs(&mut rhs, r0, &rhs_block);
    }

    let svd = a.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let rcond = if sigma_max > 0.0 {
        sigma_min / sigma_max
    } else {
        0.0
    };
    if rcond < RCOND_FLOOR {
        return Err(Error::Singular {
            context: "share system".into(),
            rcond,
        });
    }

    let solution = a.lu().solve(&rhs).ok_or(Error::Singular {
        context: "share system".into(),
        rcond,
    })?;

    Ok(ShareSystemSolution {
        w_hat: solution.rows(col_w, f).into(),
        dlambda_bar: solution.rows(col_dlambda, n).into(),
        dfactor_bar: solution.rows(col_dfactor, f).into(),
        p_d_hat: solution.rows(col_pd, n).into(),
        dx_bar: solution.rows(col_dx, n).into(),
        shocks: shocks.clone(),
        rcond,
    })
}

fn set_block(a: &mut DMatrix<f64>, r0: usize, c0: usize, block: &DMatrix<f64>) {
    for r in 0..block.nrows() {
        for c in 0..block.ncols() {
            a[(r0 + r, c0 + c)] += block[(r, c)];
        }
    }
}

fn set_rhs(rhs: &mut DVector<f64>, r0: usize, block: &DVector<f64>) {
    for r in 0..block.len() {
        rhs[r0 + r] += block[r];
    }
}

/// Evaluates the factor-supply CPI formula at a solved share system.
///
/// Converts the level changes dΛ̄ into log changes and feeds them, together
/// with the shocks stored in the solution, through [`crate::cpi::cpi_factor_supply`].
/// With `transfer_rate` taken from
/// [`ShareSystemSolution::implied_transfer_rate`], the result equals the
/// factor-price CPI formula evaluated at the solved Ŵ.
pub fn cpi_from_share_solution(
    table: &IOTable,
    stats: &DerivedStats,
    solution: &ShareSystemSolution,
    transfer_rate: f64,
    m_hat: f64,
) -> Result<f64> {
    let f = table.n_factors();
    let mut factor_share_hat = DVector::<f64>::zeros(f);
    for i in 0..f {
        let level = stats.factor_shares_agg[i];
        if level == 0.0 {
            return Err(Error::InvalidInput {
                what: format!("factor share for {}", table.factors[i]),
                detail: "zero steady-state share has no defined log change".into(),
            });
        }
        factor_share_hat[i] = solution.dfactor_bar[i] / level;
    }
    let inputs = crate::cpi::FactorSupplyInputs {
        factor_share_hat,
        factor_supply_hat: solution.shocks.l_bar_hat.clone(),
        transfer_rate,
        money_hat: m_hat,
        z_hat: solution.shocks.z_hat.clone(),
        pm_hat: solution.shocks.pm_hat.clone(),
    };
    crate::cpi::cpi_factor_supply(table, stats, &inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpi::{cpi_change, elasticity_set, Variant};
    use crate::iotable::fixtures::two_sector;
    use crate::iotable::{IOTable, TableMeta};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn fixture() -> (IOTable, DerivedStats) {
        let table = two_sector();
        let stats = table.derive().unwrap();
        (table, stats)
    }

    #[test]
    fn cobb_douglas_blocks_vanish() {
        let (table, stats) = fixture();
        let subs =
            substitution_matrices(&table, &stats, &ElasticityParams::cobb_douglas(2)).unwrap();
        for block in [
            &subs.phi_consumer,
            &subs.phi_d,
            &subs.phi_m,
            &subs.phi_f,
            &subs.phi_f_d,
            &subs.phi_f_f,
            &subs.phi_f_m,
        ] {
            assert_eq!(block.amax(), 0.0);
        }
    }

    #[test]
    fn single_producer_two_inputs_hand_case() {
        // Shares (0.6, 0.4), θ = 2: φ = (1−2)(I − 1 sᵀ).
        let table = IOTable::new(
            vec!["s1".into()],
            vec!["labor".into()],
            vec![],
            DMatrix::from_row_slice(1, 1, &[0.6]),
            DMatrix::from_row_slice(1, 1, &[0.4]),
            DMatrix::zeros(1, 0),
            DVector::from_row_slice(&[1.0]),
            DVector::zeros(0),
            DVector::zeros(1),
            TableMeta {
                country: "H".into(),
                year: 2014,
            },
        )
        .unwrap();
        let phi = producer_phi_matrix(&table, 2.0, 0);
        let expected = DMatrix::from_row_slice(2, 2, &[-0.4, 0.4, 0.6, -0.6]);
        assert!((phi - expected).amax() < 1e-14);
    }

    #[test]
    fn consumer_adding_up_for_random_elasticities() {
        let (table, stats) = fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (n, m) = (table.n_sectors(), table.n_imports());
        let mut b_all = DVector::<f64>::zeros(n + m);
        for i in 0..n {
            b_all[i] = table.cons_domestic[i];
        }
        for mm in 0..m {
            b_all[n + mm] = table.cons_import[mm];
        }
        for _ in 0..20 {
            let theta_c = rng.gen_range(0.1..5.0);
            let params = ElasticityParams {
                theta_consumer: theta_c,
                theta_producers: vec![1.0; n],
            };
            let subs = substitution_matrices(&table, &stats, &params).unwrap();
            for k in 0..n + m {
                let coll: f64 = (0..n + m)
                    .map(|i| b_all[i] * subs.phi_consumer[(i, k)])
                    .sum();
                assert_abs_diff_eq!(coll, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn zero_shocks_give_zero_solution() {
        let (table, stats) = fixture();
        let params = ElasticityParams {
            theta_consumer: 1.7,
            theta_producers: vec![0.8, 2.3],
        };
        let subs = substitution_matrices(&table, &stats, &params).unwrap();
        let shocks = ShareShocks::zero(&table);
        let s = solve_share_system(&table, &stats, &subs, &shocks).unwrap();
        assert!(s.w_hat.amax() < 1e-13);
        assert!(s.dlambda_bar.amax() < 1e-13);
        assert!(s.dx_bar.amax() < 1e-13);
    }

    #[test]
    fn cobb_douglas_closed_money_shock_is_neutral_on_shares() {
        // Closed economy, unit elasticities: money moves all factor prices
        // one for one and leaves every share unchanged.
        let table = IOTable::new(
            vec!["a".into(), "b".into()],
            vec!["l1".into()],
            vec![],
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.05]),
            DMatrix::from_row_slice(2, 1, &[0.7, 0.65]),
            DMatrix::zeros(2, 0),
            DVector::from_row_slice(&[0.5, 0.5]),
            DVector::zeros(0),
            DVector::zeros(2),
            TableMeta {
                country: "CL".into(),
                year: 2014,
            },
        )
        .unwrap();
        let stats = table.derive().unwrap();
        let subs =
            substitution_matrices(&table, &stats, &ElasticityParams::cobb_douglas(2)).unwrap();
        let delta = 0.01;
        let shocks = ShareShocks {
            m_hat: delta,
            ..ShareShocks::zero(&table)
        };
        let s = solve_share_system(&table, &stats, &subs, &shocks).unwrap();
        assert_abs_diff_eq!(s.w_hat[0], delta, epsilon = 1e-12);
        assert!(s.dlambda_bar.amax() < 1e-13);
        assert!(s.dfactor_bar.amax() < 1e-13);
        assert!(s.residual_norm(&table, &stats, &subs) < 1e-12);

        // Money is neutral on the CPI one for one in the closed economy.
        let p = cpi_from_share_solution(&table, &stats, &s, s.implied_transfer_rate(&stats), delta)
            .unwrap();
        assert_abs_diff_eq!(p, delta, epsilon = 1e-12);
    }

    #[test]
    fn solution_satisfies_all_five_blocks() {
        let (table, stats) = fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let params = ElasticityParams {
                theta_consumer: rng.gen_range(0.2..4.0),
                theta_producers: vec![rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0)],
            };
            let subs = substitution_matrices(&table, &stats, &params).unwrap();
            let mut draw = || rng.gen_range(-0.03..0.03);
            let shocks = ShareShocks {
                z_hat: DVector::from_fn(2, |_, _| draw()),
                pm_hat: DVector::from_fn(1, |_, _| draw()),
                x_hat: DVector::from_fn(2, |_, _| draw()),
                l_bar_hat: DVector::from_fn(1, |_, _| draw()),
                m_hat: draw(),
            };
            let s = solve_share_system(&table, &stats, &subs, &shocks).unwrap();
            assert!(s.residual_norm(&table, &stats, &subs) < 1e-12);
        }
    }

    #[test]
    fn system_is_linear_in_shocks() {
        let (table, stats) = fixture();
        let params = ElasticityParams {
            theta_consumer: 2.5,
            theta_producers: vec![0.5, 1.5],
        };
        let subs = substitution_matrices(&table, &stats, &params).unwrap();
        let shocks = ShareShocks {
            z_hat: DVector::from_row_slice(&[0.01, -0.02]),
            pm_hat: DVector::from_row_slice(&[0.03]),
            x_hat: DVector::from_row_slice(&[0.005, 0.0]),
            l_bar_hat: DVector::from_row_slice(&[-0.01]),
            m_hat: 0.02,
        };
        let doubled = ShareShocks {
            z_hat: &shocks.z_hat * 2.0,
            pm_hat: &shocks.pm_hat * 2.0,
            x_hat: &shocks.x_hat * 2.0,
            l_bar_hat: &shocks.l_bar_hat * 2.0,
            m_hat: shocks.m_hat * 2.0,
        };
        let s1 = solve_share_system(&table, &stats, &subs, &shocks).unwrap();
        let s2 = solve_share_system(&table, &stats, &subs, &doubled).unwrap();
        assert!((s1.w_hat * 2.0 - s2.w_hat).amax() < 1e-12);
        assert!((s1.dlambda_bar * 2.0 - s2.dlambda_bar).amax() < 1e-12);
        assert!((s1.dx_bar * 2.0 - s2.dx_bar).amax() < 1e-12);
    }

    #[test]
    fn factor_share_route_matches_factor_price_route() {
        // The solved system fed through the factor-supply formula must agree
        // with the factor-price formula at the solved wages.
        let (table, stats) = fixture();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let es = elasticity_set(&table, &stats, Variant::SoeNetwork).unwrap();
        for _ in 0..20 {
            let params = ElasticityParams {
                theta_consumer: rng.gen_range(0.3..3.0),
                theta_producers: vec![rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)],
            };
            let subs = substitution_matrices(&table, &stats, &params).unwrap();
            let mut draw = || rng.gen_range(-0.02..0.02);
            let shocks = ShareShocks {
                z_hat: DVector::from_fn(2, |_, _| draw()),
                pm_hat: DVector::from_fn(1, |_, _| draw()),
                x_hat: DVector::from_fn(2, |_, _| draw()),
                l_bar_hat: DVector::from_fn(1, |_, _| draw()),
                m_hat: draw(),
            };
            let s = solve_share_system(&table, &stats, &subs, &shocks).unwrap();
            let via_shares = cpi_from_share_solution(
                &table,
                &stats,
                &s,
                s.implied_transfer_rate(&stats),
                shocks.m_hat,
            )
            .unwrap();
            let via_wages = cpi_change(&es, &shocks.z_hat, &s.w_hat, &shocks.pm_hat).unwrap();
            assert_abs_diff_eq!(via_shares, via_wages, epsilon = 1e-10);
        }
    }

    #[test]
    fn unused_factor_makes_system_singular() {
        // A factor no sector pays for leaves its wage undetermined under
        // Cobb-Douglas; the conditioning check must catch it.
        let table = IOTable::new(
            vec!["a".into()],
            vec!["l1".into(), "ghost".into()],
            vec![],
            DMatrix::from_row_slice(1, 1, &[0.3]),
            DMatrix::from_row_slice(1, 2, &[0.7, 0.0]),
            DMatrix::zeros(1, 0),
            DVector::from_row_slice(&[1.0]),
            DVector::zeros(0),
            DVector::zeros(1),
            TableMeta {
                country: "S".into(),
                year: 2014,
            },
        )
        .unwrap();
        let stats = table.derive().unwrap();
        let subs =
            substitution_matrices(&table, &stats, &ElasticityParams::cobb_douglas(1)).unwrap();
        let err =
            solve_share_system(&table, &stats, &subs, &ShareShocks::zero(&table)).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn custom_elasticities_reproduce_ces() {
        // Feeding the CES elasticities through the generic entry point must
        // give the same matrices as the closed-form path.
        let (table, stats) = fixture();
        let params = ElasticityParams {
            theta_consumer: 1.9,
            theta_producers: vec![0.7, 2.2],
        };
        let subs_ces = substitution_matrices(&table, &stats, &params).unwrap();

        let (n, m, f) = (2, 1, 1);
        let mut b_all = DVector::<f64>::zeros(n + m);
        b_all[0] = table.cons_domestic[0];
        b_all[1] = table.cons_domestic[1];
        b_all[2] = table.cons_import[0];
        let mut eps_c = DMatrix::<f64>::zeros(n + m, n + m);
        for r in 0..n + m {
            for c in 0..n + m {
                let delta = if r == c { 1.0 } else { 0.0 };
                // Compensated CES demand elasticity: θ(b̄_k − δ_ik).
                eps_c[(r, c)] = params.theta_consumer * (b_all[c] - delta);
            }
        }
        let eps_p: Vec<DMatrix<f64>> = (0..n)
            .map(|i| {
                let theta = params.theta_producers[i];
                let k = n + m + f;
                let mut shares = DVector::<f64>::zeros(k);
                shares[0] = table.omega[(i, 0)];
                shares[1] = table.omega[(i, 1)];
                shares[2] = table.import_shares[(i, 0)];
                shares[3] = table.factor_shares[(i, 0)];
                DMatrix::from_fn(k, k, |r, c| {
                    let delta = if r == c { 1.0 } else { 0.0 };
                    theta * (shares[c] - delta)
                })
            })
            .collect();
        let subs_custom =
            substitution_matrices_from_elasticities(&table, &stats, &eps_c, &eps_p).unwrap();
        assert!((subs_ces.phi_consumer - subs_custom.phi_consumer).amax() < 1e-13);
        assert!((subs_ces.phi_d - subs_custom.phi_d).amax() < 1e-13);
        assert!((subs_ces.phi_f_f - subs_custom.phi_f_f).amax() < 1e-13);
    }
}
