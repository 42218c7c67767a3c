//! Dynamic three-sector small-open-economy model (importable, exportable,
//! non-tradable) with an input-output structure between the two producing
//! sectors.
//!
//! Households consume the three goods through a CES aggregator and trade a
//! foreign bond whose rate rises as the country borrows; money supply is the
//! nominal anchor through a cash-in-advance constraint, and the law of one
//! price ties tradable prices to the exchange rate. The model is solved by
//! first-order perturbation around the symmetric steady state: residual
//! equations are differentiated numerically and the perfect-foresight path
//! is obtained from one stacked block-tridiagonal solve with the economy
//! back at rest at the terminal date.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::iotable::{IOTable, TableMeta};

/// Steady-state residual tolerance.
pub const TOL_SS: f64 = 1e-10;

/// Which input-output structure the two producing sectors have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Sectors buy intermediates only from themselves (the exportable sector
    /// also from imports): (ω_N, ω_X, ω_NX, ω_XX) = (1, 0, 0, 0.5).
    Island,
    /// Each sector buys intermediates from the other:
    /// (ω_N, ω_X, ω_NX, ω_XX) = (0, 1, 1, 0.5).
    Intersectoral,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Island => "island",
            Scenario::Intersectoral => "intersectoral",
        }
    }
}

/// Calibration of the dynamic model.
#[derive(Debug, Clone)]
pub struct MXNCalibration {
    /// Labor share in the non-tradable / exportable sector (a_N, a_X).
    pub labor_share_n: f64,
    pub labor_share_x: f64,
    /// Consumption shares (b_N, b_X, b_M), summing to one.
    pub cons_share_n: f64,
    pub cons_share_x: f64,
    pub cons_share_m: f64,
    /// Elasticity of substitution in consumption.
    pub chi: f64,
    /// Intertemporal elasticity parameter (CRRA curvature).
    pub sigma: f64,
    /// Elasticity between labor and the intermediate bundle, per sector.
    pub sigma_n: f64,
    pub sigma_x: f64,
    /// Elasticity between non-tradable and tradable intermediates.
    pub eps_n: f64,
    pub eps_x: f64,
    /// Elasticity between exportable and imported intermediates.
    pub eps_t_n: f64,
    pub eps_t_x: f64,
    /// Intermediate expenditure shares (ω_N, ω_X, ω_NX, ω_XX).
    pub omega_n: f64,
    pub omega_x: f64,
    pub omega_nx: f64,
    pub omega_xx: f64,
    /// AR(1) persistence of the two driving processes.
    pub rho_z_n: f64,
    pub rho_p_m: f64,
    /// Debt elasticity of the foreign interest rate.
    pub psi: f64,
    /// Steady-state foreign interest rate.
    pub istar_bar: f64,
    /// Discount factor; must satisfy β(1 + ī*) = 1 up to rounding.
    pub beta: f64,
    /// Steady-state net foreign assets.
    pub bstar_bar: f64,
}

impl MXNCalibration {
    /// The benchmark calibration: labor share 0.66, consumption shares
    /// (0.70, 0.03, 0.27), all demand elasticities one (Cobb-Douglas),
    /// curvature 2, shock persistence 0.53, rate sensitivity 0.000742,
    /// ī* = 4% with β = 1/(1+ī*).
    pub fn baseline(scenario: Scenario) -> Self {
        let (omega_n, omega_x, omega_nx, omega_xx) = match scenario {
            Scenario::Island => (1.0, 0.0, 0.0, 0.5),
            Scenario::Intersectoral => (0.0, 1.0, 1.0, 0.5),
        };
        let istar_bar = 0.04;
        MXNCalibration {
            labor_share_n: 0.66,
            labor_share_x: 0.66,
            cons_share_n: 0.70,
            cons_share_x: 0.03,
            cons_share_m: 0.27,
            chi: 1.0,
            sigma: 2.0,
            sigma_n: 1.0,
            sigma_x: 1.0,
            eps_n: 1.0,
            eps_x: 1.0,
            eps_t_n: 1.0,
            eps_t_x: 1.0,
            omega_n,
            omega_x,
            omega_nx,
            omega_xx,
            rho_z_n: 0.53,
            rho_p_m: 0.53,
            psi: 0.000742,
            istar_bar,
            beta: 1.0 / (1.0 + istar_bar),
            bstar_bar: 0.0,
        }
    }

    /// Checks share bounds, positivity of the elasticities, and that the
    /// discount factor is consistent with the steady-state rate up to the
    /// 1e−4 rounding allowance of published calibrations.
    pub fn validate(&self) -> Result<()> {
        let shares = [
            ("labor_share_n", self.labor_share_n),
            ("labor_share_x", self.labor_share_x),
            ("cons_share_n", self.cons_share_n),
            ("cons_share_x", self.cons_share_x),
            ("cons_share_m", self.cons_share_m),
            ("omega_n", self.omega_n),
            ("omega_x", self.omega_x),
            ("omega_nx", self.omega_nx),
            ("omega_xx", self.omega_xx),
        ];
        for (name, v) in shares {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput {
                    what: name.into(),
                    detail: format!("share must lie in [0, 1], got {v}"),
                });
            }
        }
        let cons_total = self.cons_share_n + self.cons_share_x + self.cons_share_m;
        if (cons_total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput {
                what: "consumption shares".into(),
                detail: format!("must sum to 1, got {cons_total}"),
            });
        }
        for (name, v) in [
            ("chi", self.chi),
            ("sigma", self.sigma),
            ("sigma_n", self.sigma_n),
            ("sigma_x", self.sigma_x),
            ("eps_n", self.eps_n),
            ("eps_x", self.eps_x),
            ("eps_t_n", self.eps_t_n),
            ("eps_t_x", self.eps_t_x),
            ("beta", self.beta),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidInput {
                    what: name.into(),
                    detail: format!("must be strictly positive, got {v}"),
                });
            }
        }
        for (name, v) in [("rho_z_n", self.rho_z_n), ("rho_p_m", self.rho_p_m)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidInput {
                    what: name.into(),
                    detail: format!("persistence must lie in [0, 1), got {v}"),
                });
            }
        }
        if self.psi < 0.0 {
            return Err(Error::InvalidInput {
                what: "psi".into(),
                detail: format!("rate sensitivity must be nonnegative, got {}", self.psi),
            });
        }
        if (self.beta * (1.0 + self.istar_bar) - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidInput {
                what: "beta".into(),
                detail: format!(
                    "beta*(1+istar_bar) = {} deviates from 1 by more than 1e-4",
                    self.beta * (1.0 + self.istar_bar)
                ),
            });
        }
        Ok(())
    }

    /// Foreign rate consistent with the discount factor; the symmetric
    /// steady state exists only at this rate, so a rounded ī* is snapped to
    /// it (validate() bounds the gap at 1e−4).
    pub fn effective_istar(&self) -> f64 {
        1.0 / self.beta - 1.0
    }
}

/// Names of the endogenous variables, in system order.
pub mod var {
    pub const MU: usize = 0;
    pub const C: usize = 1;
    pub const C_N: usize = 2;
    pub const C_M: usize = 3;
    pub const C_X: usize = 4;
    pub const P: usize = 5;
    pub const P_N: usize = 6;
    pub const P_X: usize = 7;
    pub const P_M: usize = 8;
    pub const EXCH: usize = 9;
    pub const W: usize = 10;
    pub const MC_N: usize = 11;
    pub const MC_X: usize = 12;
    pub const P_INT_N: usize = 13;
    pub const P_INT_X: usize = 14;
    pub const P_TRD_N: usize = 15;
    pub const P_TRD_X: usize = 16;
    pub const Q_N: usize = 17;
    pub const Q_X: usize = 18;
    pub const L_N: usize = 19;
    pub const L_X: usize = 20;
    pub const M_N: usize = 21;
    pub const M_X: usize = 22;
    pub const M_NN: usize = 23;
    pub const M_NT: usize = 24;
    pub const M_NX: usize = 25;
    pub const M_NM: usize = 26;
    pub const M_XN: usize = 27;
    pub const M_XT: usize = 28;
    pub const M_XX: usize = 29;
    pub const M_XM: usize = 30;
    pub const BSTAR: usize = 31;
    pub const ISTAR: usize = 32;
    pub const IDOM: usize = 33;
    pub const COUNT: usize = 34;
}

/// Names of the exogenous processes, in forcing order.
pub mod exo {
    pub const Z_N: usize = 0;
    pub const Z_X: usize = 1;
    pub const PSTAR_X: usize = 2;
    pub const PSTAR_M: usize = 3;
    pub const MONEY: usize = 4;
    pub const LBAR: usize = 5;
    pub const COUNT: usize = 6;
}

pub const VAR_NAMES: [&str; var::COUNT] = [
    "mu", "c", "c_n", "c_m", "c_x", "p", "p_n", "p_x", "p_m", "exch", "w", "mc_n", "mc_x",
    "p_int_n", "p_int_x", "p_trd_n", "p_trd_x", "q_n", "q_x", "l_n", "l_x", "m_n", "m_x", "m_nn",
    "m_nt", "m_nx", "m_nm", "m_xn", "m_xt", "m_xx", "m_xm", "bstar", "istar", "idom",
];

pub const EQUATION_NAMES: [&str; var::COUNT] = [
    "euler_domestic",
    "euler_foreign",
    "marginal_utility",
    "cash_in_advance",
    "demand_c_n",
    "demand_c_m",
    "demand_c_x",
    "price_index",
    "marginal_cost_n",
    "marginal_cost_x",
    "price_intermediate_n",
    "price_intermediate_x",
    "price_tradable_n",
    "price_tradable_x",
    "labor_demand_n",
    "labor_demand_x",
    "bundle_demand_n",
    "bundle_demand_x",
    "demand_m_nn",
    "demand_m_nt",
    "demand_m_xn",
    "demand_m_xt",
    "demand_m_nx",
    "demand_m_nm",
    "demand_m_xx",
    "demand_m_xm",
    "price_equals_mc_n",
    "price_equals_mc_x",
    "law_of_one_price_x",
    "law_of_one_price_m",
    "clearing_nontradable",
    "clearing_labor",
    "asset_accumulation",
    "debt_elastic_rate",
];

/// CES price index over (share, price) pairs; collapses to the geometric
/// mean at unit elasticity and skips zero-share components.
fn ces_price(terms: &[(f64, f64)], elasticity: f64) -> f64 {
    if (elasticity - 1.0).abs() < 1e-9 {
        let mut p = 1.0;
        for &(share, price) in terms {
            if share > 0.0 {
                p *= price.powf(share);
            }
        }
        p
    } else {
        let e = 1.0 - elasticity;
        let mut total = 0.0;
        for &(share, price) in terms {
            if share > 0.0 {
                total += share * price.powf(e);
            }
        }
        total.powf(1.0 / e)
    }
}

/// Whether a deviation is a log deviation around a positive level or a plain
/// level deviation around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DevKind {
    Log,
    Level,
}

/// The symmetric steady state: every price, the wage, the exchange rate, and
/// money equal one; labor endowment one; assets zero.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Level of every endogenous variable, in [`var`] order.
    pub levels: Vec<f64>,
    /// Exports valued at world prices over expenditure.
    pub export_share: f64,
    /// Largest residual of the full equation system at the steady state.
    pub residual: f64,
}

impl SteadyState {
    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }
}

/// Solves the symmetric steady state.
///
/// With all prices one, the non-tradable clearing condition and the trade
/// balance are linear in gross outputs; consumption equals the labor
/// endowment. Every equation residual is then verified against
/// [`TOL_SS`].
pub fn steady_state(cal: &MXNCalibration) -> Result<SteadyState> {
    cal.validate()?;
    let (a_n, a_x) = (cal.labor_share_n, cal.labor_share_x);
    let (b_n, b_x, b_m) = (cal.cons_share_n, cal.cons_share_x, cal.cons_share_m);
    let consumption = 1.0; // C = L̄ with W = P = 1 and balanced trade

    // Q_N = b_N C + ω_N(1−a_N)Q_N + ω_X(1−a_X)Q_X
    // Q_X = (b_X+b_M) C + (1−ω_N)(1−a_N)Q_N + (1−ω_X)(1−a_X)Q_X
    let a = DMatrix::from_row_slice(
        2,
        2,
        &[
            1.0 - cal.omega_n * (1.0 - a_n),
            -cal.omega_x * (1.0 - a_x),
            -(1.0 - cal.omega_n) * (1.0 - a_n),
            1.0 - (1.0 - cal.omega_x) * (1.0 - a_x),
        ],
    );
    let rhs = DVector::from_row_slice(&[b_n * consumption, (b_x + b_m) * consumption]);
    let q = a.lu().solve(&rhs).ok_or_else(|| Error::InvalidInput {
        what: "calibration".into(),
        detail: "steady-state output system is singular".into(),
    })?;
    let (q_n, q_x) = (q[0], q[1]);
    if q_n <= 0.0 || q_x <= 0.0 {
        return Err(Error::InvalidInput {
            what: "calibration".into(),
            detail: format!("implied steady-state outputs are not positive: ({q_n}, {q_x})"),
        });
    }

    let m_n = (1.0 - a_n) * q_n;
    let m_x = (1.0 - a_x) * q_x;
    let m_nn = cal.omega_n * m_n;
    let m_nt = (1.0 - cal.omega_n) * m_n;
    let m_nx = cal.omega_nx * m_nt;
    let m_nm = (1.0 - cal.omega_nx) * m_nt;
    let m_xn = cal.omega_x * m_x;
    let m_xt = (1.0 - cal.omega_x) * m_x;
    let m_xx = cal.omega_xx * m_xt;
    let m_xm = (1.0 - cal.omega_xx) * m_xt;
    let export_share = q_x - b_x * consumption - m_xx - m_nx;

    let istar = cal.effective_istar();
    let mut levels = vec![1.0; var::COUNT];
    levels[var::MU] = consumption.powf(-cal.sigma); // μ = C^{-σ}/P
    levels[var::C] = consumption;
    levels[var::C_N] = b_n * consumption;
    levels[var::C_M] = b_m * consumption;
    levels[var::C_X] = b_x * consumption;
    levels[var::Q_N] = q_n;
    levels[var::Q_X] = q_x;
    levels[var::L_N] = a_n * q_n;
    levels[var::L_X] = a_x * q_x;
    levels[var::M_N] = m_n;
    levels[var::M_X] = m_x;
    levels[var::M_NN] = m_nn;
    levels[var::M_NT] = m_nt;
    levels[var::M_NX] = m_nx;
    levels[var::M_NM] = m_nm;
    levels[var::M_XN] = m_xn;
    levels[var::M_XT] = m_xt;
    levels[var::M_XX] = m_xx;
    levels[var::M_XM] = m_xm;
    levels[var::BSTAR] = cal.bstar_bar;
    levels[var::ISTAR] = istar;
    levels[var::IDOM] = istar;

    let model = Model::new(cal.clone(), &levels);
    let zero_dev = vec![0.0; var::COUNT];
    let zero_exo = vec![0.0; exo::COUNT];
    let residuals = model.residuals(&zero_dev, &zero_dev, &zero_dev, &zero_exo);
    let worst = residuals.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()));
    if worst > TOL_SS {
        let (idx, _) = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        return Err(Error::DynamicModel {
            equation: EQUATION_NAMES[idx].into(),
            detail: format!("steady-state residual {worst:.3e} exceeds {TOL_SS:.0e}"),
        });
    }

    Ok(SteadyState {
        levels,
        export_share,
        residual: worst,
    })
}

/// The nonlinear residual system, parameterized by deviations from the
/// steady state (log deviations where the level is positive).
struct Model {
    cal: MXNCalibration,
    ss: Vec<f64>,
    kinds: Vec<DevKind>,
}

impl Model {
    fn new(cal: MXNCalibration, ss_levels: &[f64]) -> Self {
        let kinds = ss_levels
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                // Rates and assets stay in levels; quantities and prices with
                // positive steady states are logs.
                if matches!(i, var::BSTAR | var::ISTAR | var::IDOM) || v == 0.0 {
                    DevKind::Level
                } else {
                    DevKind::Log
                }
            })
            .collect();
        Model {
            cal,
            ss: ss_levels.to_vec(),
            kinds,
        }
    }

    fn level(&self, devs: &[f64], index: usize) -> f64 {
        match self.kinds[index] {
            DevKind::Log => self.ss[index] * devs[index].exp(),
            DevKind::Level => self.ss[index] + devs[index],
        }
    }

    /// Exogenous processes are all log deviations around level one.
    fn exo_level(u: &[f64], index: usize) -> f64 {
        u[index].exp()
    }

    fn residuals(&self, prev: &[f64], curr: &[f64], next: &[f64], u: &[f64]) -> Vec<f64> {
        let cal = &self.cal;
        let v = |i: usize| self.level(curr, i);
        let vp = |i: usize| self.level(prev, i);
        let vn = |i: usize| self.level(next, i);
        let x = |i: usize| Self::exo_level(u, i);

        let istar_bar = cal.effective_istar();
        let (z_n, z_x) = (x(exo::Z_N), x(exo::Z_X));
        let (pstar_x, pstar_m) = (x(exo::PSTAR_X), x(exo::PSTAR_M));
        let (money, lbar) = (x(exo::MONEY), x(exo::LBAR));

        let mut r = vec![0.0; var::COUNT];

        // Household intertemporal block.
        r[0] = v(var::MU) - cal.beta * (1.0 + v(var::IDOM)) * vn(var::MU);
        r[1] = v(var::MU)
            - cal.beta * (1.0 + v(var::ISTAR)) * vn(var::MU) * vn(var::EXCH) / v(var::EXCH);
        r[2] = v(var::C).powf(-cal.sigma) - v(var::MU) * v(var::P);
        r[3] = money - v(var::P) * v(var::C);

        // Intratemporal consumption demands and the price index.
        r[4] =
            v(var::C_N) - cal.cons_share_n * (v(var::P_N) / v(var::P)).powf(-cal.chi) * v(var::C);
        r[5] =
            v(var::C_M) - cal.cons_share_m * (v(var::P_M) / v(var::P)).powf(-cal.chi) * v(var::C);
        r[6] =
            v(var::C_X) - cal.cons_share_x * (v(var::P_X) / v(var::P)).powf(-cal.chi) * v(var::C);
        r[7] = v(var::P)
            - ces_price(
                &[
                    (cal.cons_share_n, v(var::P_N)),
                    (cal.cons_share_m, v(var::P_M)),
                    (cal.cons_share_x, v(var::P_X)),
                ],
                cal.chi,
            );

        // Marginal costs and input price indices.
        r[8] = v(var::MC_N)
            - ces_price(
                &[
                    (cal.labor_share_n, v(var::W)),
                    (1.0 - cal.labor_share_n, v(var::P_INT_N)),
                ],
                cal.sigma_n,
            ) / z_n;
        r[9] = v(var::MC_X)
            - ces_price(
                &[
                    (cal.labor_share_x, v(var::W)),
                    (1.0 - cal.labor_share_x, v(var::P_INT_X)),
                ],
                cal.sigma_x,
            ) / z_x;
        r[10] = v(var::P_INT_N)
            - ces_price(
                &[
                    (cal.omega_n, v(var::P_N)),
                    (1.0 - cal.omega_n, v(var::P_TRD_N)),
                ],
                cal.eps_n,
            );
        r[11] = v(var::P_INT_X)
            - ces_price(
                &[
                    (cal.omega_x, v(var::P_N)),
                    (1.0 - cal.omega_x, v(var::P_TRD_X)),
                ],
                cal.eps_x,
            );
        r[12] = v(var::P_TRD_N)
            - ces_price(
                &[
                    (cal.omega_nx, v(var::P_X)),
                    (1.0 - cal.omega_nx, v(var::P_M)),
                ],
                cal.eps_t_n,
            );
        r[13] = v(var::P_TRD_X)
            - ces_price(
                &[
                    (cal.omega_xx, v(var::P_X)),
                    (1.0 - cal.omega_xx, v(var::P_M)),
                ],
                cal.eps_t_x,
            );

        // Conditional factor and intermediate demands.
        r[14] = v(var::L_N)
            - cal.labor_share_n
                * (v(var::W) / v(var::MC_N)).powf(-cal.sigma_n)
                * z_n.powf(cal.sigma_n - 1.0)
                * v(var::Q_N);
        r[15] = v(var::L_X)
            - cal.labor_share_x
                * (v(var::W) / v(var::MC_X)).powf(-cal.sigma_x)
                * z_x.powf(cal.sigma_x - 1.0)
                * v(var::Q_X);
        r[16] = v(var::M_N)
            - (1.0 - cal.labor_share_n)
                * (v(var::P_INT_N) / v(var::MC_N)).powf(-cal.sigma_n)
                * z_n.powf(cal.sigma_n - 1.0)
                * v(var::Q_N);
        r[17] = v(var::M_X)
            - (1.0 - cal.labor_share_x)
                * (v(var::P_INT_X) / v(var::MC_X)).powf(-cal.sigma_x)
                * z_x.powf(cal.sigma_x - 1.0)
                * v(var::Q_X);
        r[18] = v(var::M_NN)
            - cal.omega_n * (v(var::P_N) / v(var::P_INT_N)).powf(-cal.eps_n) * v(var::M_N);
        r[19] = v(var::M_NT)
            - (1.0 - cal.omega_n)
                * (v(var::P_TRD_N) / v(var::P_INT_N)).powf(-cal.eps_n)
                * v(var::M_N);
        r[20] = v(var::M_XN)
            - cal.omega_x * (v(var::P_N) / v(var::P_INT_X)).powf(-cal.eps_x) * v(var::M_X);
        r[21] = v(var::M_XT)
            - (1.0 - cal.omega_x)
                * (v(var::P_TRD_X) / v(var::P_INT_X)).powf(-cal.eps_x)
                * v(var::M_X);
        r[22] = v(var::M_NX)
            - cal.omega_nx * (v(var::P_X) / v(var::P_TRD_N)).powf(-cal.eps_t_n) * v(var::M_NT);
        r[23] = v(var::M_NM)
            - (1.0 - cal.omega_nx)
                * (v(var::P_M) / v(var::P_TRD_N)).powf(-cal.eps_t_n)
                * v(var::M_NT);
        r[24] = v(var::M_XX)
            - cal.omega_xx * (v(var::P_X) / v(var::P_TRD_X)).powf(-cal.eps_t_x) * v(var::M_XT);
        r[25] = v(var::M_XM)
            - (1.0 - cal.omega_xx)
                * (v(var::P_M) / v(var::P_TRD_X)).powf(-cal.eps_t_x)
                * v(var::M_XT);

        // Pricing: competitive pricing at marginal cost and the law of one
        // price for both tradables.
        r[26] = v(var::P_N) - v(var::MC_N);
        r[27] = v(var::P_X) - v(var::MC_X);
        r[28] = v(var::P_X) - pstar_x * v(var::EXCH);
        r[29] = v(var::P_M) - pstar_m * v(var::EXCH);

        // Market clearing and the foreign asset position.
        r[30] = v(var::Q_N) - v(var::C_N) - v(var::M_NN) - v(var::M_XN);
        r[31] = lbar - v(var::L_N) - v(var::L_X);
        r[32] = v(var::BSTAR) - (1.0 + vp(var::ISTAR)) * vp(var::BSTAR)
            + (v(var::P_X) * (v(var::C_X) + v(var::M_XX) + v(var::M_NX) - v(var::Q_X))
                + v(var::P_M) * (v(var::C_M) + v(var::M_NM) + v(var::M_XM)))
                / v(var::EXCH);
        r[33] = v(var::ISTAR) - istar_bar - cal.psi * ((cal.bstar_bar - v(var::BSTAR)).exp() - 1.0);

        r
    }
}

/// First-order system A₋₁ŷ_{t−1} + A₀ŷ_t + A₊₁ŷ_{t+1} + Bû_t = 0.
#[derive(Debug, Clone)]
pub struct Linearized {
    pub a_prev: DMatrix<f64>,
    pub a_curr: DMatrix<f64>,
    pub a_next: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Differentiates the residual system at the steady state by central finite
/// differences (step 1e−6 on the deviation scale). Errors name the equation
/// whose derivative came out non-finite.
pub fn linearize(cal: &MXNCalibration, ss: &SteadyState) -> Result<Linearized> {
    let model = Model::new(cal.clone(), &ss.levels);
    let h = 1e-6;
    let zero = vec![0.0; var::COUNT];
    let zero_exo = vec![0.0; exo::COUNT];

    let diff = |slot: usize, is_exo: bool, col: usize| -> Result<DVector<f64>> {
        let mut dev_plus = zero.clone();
        let mut dev_minus = zero.clone();
        let mut exo_plus = zero_exo.clone();
        let mut exo_minus = zero_exo.clone();
        if is_exo {
            exo_plus[col] += h;
            exo_minus[col] -= h;
        } else {
            dev_plus[col] += h;
            dev_minus[col] -= h;
        }
        let pick = |dev: &Vec<f64>, which: usize| -> Vec<f64> {
            if which == slot {
                dev.clone()
            } else {
                zero.clone()
            }
        };
        let (r_plus, r_minus) = if is_exo {
            (
                model.residuals(&zero, &zero, &zero, &exo_plus),
                model.residuals(&zero, &zero, &zero, &exo_minus),
            )
        } else {
            (
                model.residuals(
                    &pick(&dev_plus, 0),
                    &pick(&dev_plus, 1),
                    &pick(&dev_plus, 2),
                    &zero_exo,
                ),
                model.residuals(
                    &pick(&dev_minus, 0),
                    &pick(&dev_minus, 1),
                    &pick(&dev_minus, 2),
                    &zero_exo,
                ),
            )
        };
        let grad = DVector::from_fn(var::COUNT, |i, _| (r_plus[i] - r_minus[i]) / (2.0 * h));
        if let Some(row) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::DynamicModel {
                equation: EQUATION_NAMES[row].into(),
                detail: "non-finite derivative during linearization".into(),
            });
        }
        Ok(grad)
    };

    let mut a_prev = DMatrix::<f64>::zeros(var::COUNT, var::COUNT);
    let mut a_curr = DMatrix::<f64>::zeros(var::COUNT, var::COUNT);
    let mut a_next = DMatrix::<f64>::zeros(var::COUNT, var::COUNT);
    let mut b = DMatrix::<f64>::zeros(var::COUNT, exo::COUNT);
    for colv in 0..var::COUNT {
        a_prev.set_column(colv, &diff(0, false, colv)?);
        a_curr.set_column(colv, &diff(1, false, colv)?);
        a_next.set_column(colv, &diff(2, false, colv)?);
    }
    for colu in 0..exo::COUNT {
        b.set_column(colu, &diff(0, true, colu)?);
    }

    Ok(Linearized {
        a_prev,
        a_curr,
        a_next,
        b,
    })
}

/// Which exogenous process an impulse hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockKind {
    /// Non-tradable productivity Z_N.
    ProductivityN,
    /// World import price P*_M.
    ImportPrice,
}

impl ShockKind {
    pub fn label(&self) -> &'static str {
        match self {
            ShockKind::ProductivityN => "zN",
            ShockKind::ImportPrice => "pM",
        }
    }
}

/// A one-time innovation of `size` (log points) at t = 0, decaying at the
/// calibrated AR(1) rate.
#[derive(Debug, Clone, Copy)]
pub struct ShockSpec {
    pub kind: ShockKind,
    pub size: f64,
}

/// Impulse responses of the model.
#[derive(Debug, Clone)]
pub struct Irf {
    pub scenario_label: String,
    pub shock: ShockSpec,
    pub horizon: usize,
    /// Deviations, horizon × variables, in [`var`] order (logs for
    /// quantities and prices, levels for assets and rates).
    pub deviations: DMatrix<f64>,
    /// π_t = P̂_t − P̂_{t−1} with the pre-shock price level as base.
    pub inflation: Vec<f64>,
    /// Max-abs change of the date-0 response at the last internal horizon
    /// doubling; the solver keeps doubling until this is below 1e−9.
    pub y0_shift_on_doubling: f64,
    /// max_{t ∈ [T−5, T]} ‖ŷ_t‖∞ relative to ‖ŷ_0‖∞ over the reported
    /// window.
    pub terminal_ratio: f64,
}

impl Irf {
    /// One variable's path by name.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        let idx = VAR_NAMES.iter().position(|n| *n == name)?;
        Some(
            (0..self.horizon)
                .map(|t| self.deviations[(t, idx)])
                .collect(),
        )
    }
}

fn shock_path(cal: &MXNCalibration, shock: ShockSpec, horizon: usize) -> DMatrix<f64> {
    let mut u = DMatrix::<f64>::zeros(horizon, exo::COUNT);
    let (col, rho) = match shock.kind {
        ShockKind::ProductivityN => (exo::Z_N, cal.rho_z_n),
        ShockKind::ImportPrice => (exo::PSTAR_M, cal.rho_p_m),
    };
    let mut level = shock.size;
    for t in 0..horizon {
        u[(t, col)] = level;
        level *= rho;
    }
    u
}

/// Solves the stacked perfect-foresight system over `horizon` periods with
/// ŷ_{−1} = 0 and ŷ_T = 0, by block-tridiagonal elimination.
fn solve_stacked(lin: &Linearized, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let horizon = u.nrows();
    let n = var::COUNT;
    let mut s_mats: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    let mut s_vecs: Vec<DVector<f64>> = Vec::with_capacity(horizon);

    let mut prev_s = DMatrix::<f64>::zeros(n, n);
    let mut prev_v = DVector::<f64>::zeros(n);
    for t in 0..horizon {
        let g = &lin.a_curr + &lin.a_prev * &prev_s;
        let lu = g.lu();
        let forcing = &lin.b * u.row(t).transpose() + &lin.a_prev * &prev_v;
        let s_t = lu
            .solve(&(-&lin.a_next))
            .ok_or_else(|| Error::DynamicModel {
                equation: "stacked system".into(),
                detail: format!("singular pivot block at period {t} (indeterminate path)"),
            })?;
        let v_t = lu.solve(&(-forcing)).ok_or_else(|| Error::DynamicModel {
            equation: "stacked system".into(),
            detail: format!("singular pivot block at period {t} (indeterminate path)"),
        })?;
        prev_s = s_t.clone();
        prev_v = v_t.clone();
        s_mats.push(s_t);
        s_vecs.push(v_t);
    }

    let mut y = DMatrix::<f64>::zeros(horizon, n);
    let mut next = DVector::<f64>::zeros(n); // y_T = 0
    for t in (0..horizon).rev() {
        let y_t = &s_mats[t] * &next + &s_vecs[t];
        y.row_mut(t).copy_from(&y_t.transpose());
        next = y_t;
    }
    Ok(y)
}

/// Computes impulse responses for one scenario and shock.
///
/// The stacked system is solved with the terminal condition placed well past
/// the reported window: the internal horizon is doubled until another
/// doubling moves the date-0 response by less than 1e−9, so the returned
/// path is the infinite-horizon impulse response to that accuracy, free of
/// the truncation artifact in which foreign debt drifts toward its terminal
/// write-off. The first `horizon` periods are reported.
pub fn irf(cal: &MXNCalibration, shock: ShockSpec, horizon: usize) -> Result<Irf> {
    if horizon < 40 {
        return Err(Error::InvalidInput {
            what: "horizon".into(),
            detail: format!("need at least 40 periods, got {horizon}"),
        });
    }
    let ss = steady_state(cal)?;
    let lin = linearize(cal, &ss)?;

    const SHIFT_TOL: f64 = 1e-9;
    const MAX_SOLVE_HORIZON: usize = 1 << 15;
    let mut solve_horizon = horizon.max(128);
    let mut y = solve_stacked(&lin, &shock_path(cal, shock, solve_horizon))?;
    let y0_shift_on_doubling = loop {
        let doubled = solve_stacked(&lin, &shock_path(cal, shock, solve_horizon * 2))?;
        let shift = (y.row(0) - doubled.row(0)).amax();
        y = doubled;
        solve_horizon *= 2;
        if shift < SHIFT_TOL {
            break shift;
        }
        if solve_horizon >= MAX_SOLVE_HORIZON {
            return Err(Error::DynamicModel {
                equation: "stacked system".into(),
                detail: format!(
                    "impulse response did not converge in the solve horizon: doubling to {} periods still moved the impact response by {shift:.3e}",
                    solve_horizon * 2
                ),
            });
        }
    };

    let y0_norm = y.row(0).amax();
    let tail_norm = (horizon.saturating_sub(5)..horizon)
        .map(|t| y.row(t).amax())
        .fold(0.0_f64, f64::max);
    let terminal_ratio = if y0_norm > 0.0 {
        tail_norm / y0_norm
    } else {
        0.0
    };
    let y = y.rows(0, horizon).into_owned();

    let mut inflation = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let prev = if t == 0 { 0.0 } else { y[(t - 1, var::P)] };
        inflation.push(y[(t, var::P)] - prev);
    }

    let omegas = (cal.omega_n, cal.omega_x, cal.omega_nx, cal.omega_xx);
    let scenario_label = if omegas == (1.0, 0.0, 0.0, 0.5) {
        "island"
    } else if omegas == (0.0, 1.0, 1.0, 0.5) {
        "intersectoral"
    } else {
        "custom"
    };
    Ok(Irf {
        scenario_label: scenario_label.to_string(),
        shock,
        horizon,
        deviations: y,
        inflation,
        y0_shift_on_doubling,
        terminal_ratio,
    })
}

/// The static input-output table implied by the model's steady state:
/// two sectors, one factor, one import good. Shares are exact because all
/// steady-state prices are one.
pub fn implied_iotable(cal: &MXNCalibration, ss: &SteadyState) -> Result<IOTable> {
    let (a_n, a_x) = (cal.labor_share_n, cal.labor_share_x);
    let omega = DMatrix::from_row_slice(
        2,
        2,
        &[
            cal.omega_n * (1.0 - a_n),
            cal.omega_nx * (1.0 - cal.omega_n) * (1.0 - a_n),
            cal.omega_x * (1.0 - a_x),
            cal.omega_xx * (1.0 - cal.omega_x) * (1.0 - a_x),
        ],
    );
    let factor_shares = DMatrix::from_row_slice(2, 1, &[a_n, a_x]);
    let import_shares = DMatrix::from_row_slice(
        2,
        1,
        &[
            (1.0 - cal.omega_nx) * (1.0 - cal.omega_n) * (1.0 - a_n),
            (1.0 - cal.omega_xx) * (1.0 - cal.omega_x) * (1.0 - a_x),
        ],
    );
    IOTable::new(
        vec!["nontradable".into(), "exportable".into()],
        vec!["labor".into()],
        vec!["importable".into()],
        omega,
        factor_shares,
        import_shares,
        DVector::from_row_slice(&[cal.cons_share_n, cal.cons_share_x]),
        DVector::from_row_slice(&[cal.cons_share_m]),
        DVector::from_row_slice(&[0.0, ss.export_share]),
        TableMeta {
            country: "MXN".into(),
            year: 0,
        },
    )
}
