//! Implementations of the CLI subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use netcpi::cpi::{
    self, elasticity_set, model_inflation, moments, price_level_path, shock_path_from_levels,
    ElasticitySet, LevelFrame, Variant,
};
use netcpi::ingest;
use netcpi::iotable::IOTable;
use netcpi::mxnsim::{self, MXNCalibration, Scenario, ShockKind, ShockSpec};
use netcpi::netstats::{adjusted_shares, NoNetworkMode};
use netcpi::panelfe::{fit_two_way_fe, PanelObs};
use netcpi::sharesys::{
    cpi_from_share_solution, solve_share_system, substitution_matrices, ElasticityParams, ShareShocks,
};
use netcpi::Error;

use crate::output::{fmt_g9, CsvOut, RunMeta};
use crate::{CliError, Common, VariantArg};

type CmdResult = Result<(), CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("i/o error on {}: {e}", path.display()))
}

fn lib_err(e: Error) -> CliError {
    if e.is_numeric_error() {
        CliError::Numeric(e.to_string())
    } else {
        CliError::Data(e.to_string())
    }
}

/// Extra progress chatter is the only thing an environment variable
/// controls.
fn verbose() -> bool {
    std::env::var_os("NETCPI_VERBOSE").is_some_and(|v| !v.is_empty() && v != "0")
}

fn progress(msg: impl AsRef<str>) {
    if verbose() {
        eprintln!("{}", msg.as_ref());
    }
}

/// Parses a table file and orders the tables by country code and year, so
/// multi-country outputs merge deterministically regardless of file order.
fn parse_tables_sorted(input: &Path, tol_identity: f64) -> Result<Vec<ingest::ParsedTable>, CliError> {
    let mut parsed = ingest::parse_io_csv(input, tol_identity).map_err(lib_err)?;
    parsed.sort_by(|a, b| {
        (&a.table.meta.country, a.table.meta.year).cmp(&(&b.table.meta.country, b.table.meta.year))
    });
    progress(format!("parsed {} table(s) from {}", parsed.len(), input.display()));
    Ok(parsed)
}

pub fn cmd_validate(common: &Common, input: &Path) -> CmdResult {
    // Reports identity residuals for every table; any failure exits with the
    // data-error code after the report is written.
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("validate", common.seed);
    meta.input("input", input.display());
    meta.tolerance("tol_identity", common.tol_identity);

    let mut parsed =
        ingest::parse_io_csv_lenient(input, common.tol_identity).map_err(lib_err)?;
    parsed.sort_by(|a, b| {
        (&a.table.meta.country, a.table.meta.year).cmp(&(&b.table.meta.country, b.table.meta.year))
    });
    let mut csv = CsvOut::new(
        out_dir,
        "validate.csv",
        "country,year,check,index,residual,passed",
    );
    for p in &parsed {
        let t = &p.table;
        if p.report.passed() {
            csv.row(&[
                t.meta.country.clone(),
                t.meta.year.to_string(),
                "all".into(),
                String::new(),
                "0".into(),
                "true".into(),
            ]);
        }
        for v in &p.report.violations {
            csv.row(&[
                t.meta.country.clone(),
                t.meta.year.to_string(),
                v.check.clone(),
                v.index.map(|i| i.to_string()).unwrap_or_default(),
                fmt_g9(v.residual),
                "false".into(),
            ]);
        }
        for w in &p.warnings {
            eprintln!("warning: {}: {w}", t.meta.country);
        }
        println!(
            "{} {}: {} (spectral radius {})",
            t.meta.country,
            t.meta.year,
            if p.report.passed() { "ok" } else { "FAILED" },
            fmt_g9(p.report.spectral_radius),
        );
    }
    meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    if let Some(failed) = parsed.iter().find(|p| !p.report.passed()) {
        return Err(CliError::Data(format!(
            "{} {}: {} identity violation(s), worst residual {:.3e}",
            failed.table.meta.country,
            failed.table.meta.year,
            failed.report.violations.len(),
            failed.report.worst_residual()
        )));
    }
    Ok(())
}

pub fn cmd_stats(common: &Common, input: &Path) -> CmdResult {
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("stats", common.seed);
    meta.input("input", input.display());
    meta.tolerance("tol_identity", common.tol_identity);

    let parsed = parse_tables_sorted(input, common.tol_identity)?;
    let mut domar = CsvOut::new(
        out_dir,
        "stats_domar.csv",
        "country,sector,domar,export_adj,network_adj",
    );
    let mut factor = CsvOut::new(
        out_dir,
        "stats_factor.csv",
        "country,factor,share,export_adj,network_adj,export_content",
    );
    let mut import = CsvOut::new(
        out_dir,
        "stats_import.csv",
        "country,import,direct,network_adj",
    );
    for p in &parsed {
        let t = &p.table;
        let stats = t.derive().map_err(lib_err)?;
        let adj = adjusted_shares(t, &stats);
        for (i, sector) in t.sectors.iter().enumerate() {
            domar.row(&[
                t.meta.country.clone(),
                sector.clone(),
                fmt_g9(adj.domar[i]),
                fmt_g9(adj.domar_export_adj[i]),
                fmt_g9(adj.domar_network_adj[i]),
            ]);
        }
        for (i, f) in t.factors.iter().enumerate() {
            factor.row(&[
                t.meta.country.clone(),
                f.clone(),
                fmt_g9(adj.factor[i]),
                fmt_g9(adj.factor_export_adj[i]),
                fmt_g9(adj.factor_network_adj[i]),
                fmt_g9(adj.export_content_of_factors[i]),
            ]);
        }
        for (i, m) in t.imports.iter().enumerate() {
            import.row(&[
                t.meta.country.clone(),
                m.clone(),
                fmt_g9(adj.import_direct[i]),
                fmt_g9(adj.import_network_adj[i]),
            ]);
        }
    }
    for csv in [domar, factor, import] {
        meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    }
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}

/// Reads `date,series,id,value` rows of log levels into a level frame.
fn read_shock_csv(path: &Path) -> Result<LevelFrame, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(e.to_string()))?
        .clone();
    let expected = ["date", "series", "id", "value"];
    if headers.iter().take(4).collect::<Vec<_>>() != expected {
        return Err(CliError::Data(format!(
            "{}: header must be date,series,id,value",
            path.display()
        )));
    }
    let mut frame = LevelFrame::default();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        let date = record.get(0).unwrap_or("").to_string();
        let series = record.get(1).unwrap_or("");
        let id = record.get(2).unwrap_or("").to_string();
        let value: f64 = record.get(3).unwrap_or("").parse().map_err(|_| {
            CliError::Data(format!(
                "{}: bad value on data row {}",
                path.display(),
                idx + 1
            ))
        })?;
        let bucket = match series {
            "Z" => &mut frame.z,
            "W" => &mut frame.w,
            "PM" => &mut frame.pm,
            other => {
                return Err(CliError::Data(format!(
                    "{}: unknown series kind {other:?} (expected Z, W, or PM)",
                    path.display()
                )));
            }
        };
        bucket.entry(id).or_default().insert(date, value);
    }
    Ok(frame)
}

fn variant_list(arg: VariantArg, e_over_ngdp: f64, mode: NoNetworkMode) -> Vec<Variant> {
    match arg {
        VariantArg::Closed => vec![Variant::Closed {
            expenditure_to_gdp: e_over_ngdp,
        }],
        VariantArg::SoeNoNetwork => vec![Variant::SoeNoNetwork(mode)],
        VariantArg::SoeNetwork => vec![Variant::SoeNetwork],
        VariantArg::All => vec![
            Variant::Closed {
                expenditure_to_gdp: e_over_ngdp,
            },
            Variant::SoeNoNetwork(mode),
            Variant::SoeNetwork,
        ],
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_decompose(
    common: &Common,
    input: &Path,
    shocks: &Path,
    base: &str,
    variant: VariantArg,
    lag: usize,
    e_over_ngdp: f64,
    raw_no_network: bool,
) -> CmdResult {
    let out_dir = &common.out_dir;
    let mode = if raw_no_network {
        NoNetworkMode::Raw
    } else {
        NoNetworkMode::Reallocated
    };
    let mut meta = RunMeta::new("decompose", common.seed);
    meta.input("input", input.display());
    meta.input("shocks", shocks.display());
    meta.input("base", base);
    meta.input("lag", lag);
    meta.input("variant", format!("{variant:?}"));
    meta.input("e_over_ngdp", e_over_ngdp);
    meta.input("no_network_mode", format!("{mode:?}"));
    meta.tolerance("tol_identity", common.tol_identity);

    let parsed = parse_tables_sorted(input, common.tol_identity)?;
    let frame = read_shock_csv(shocks)?;
    let mut csv = CsvOut::new(out_dir, "decompose.csv", "date,country,variant,term,value");
    for p in &parsed {
        let table = &p.table;
        let stats = table.derive().map_err(lib_err)?;
        let path = shock_path_from_levels(table, &frame, base).map_err(lib_err)?;
        for variant in variant_list(variant, e_over_ngdp, mode) {
            let es: ElasticitySet = elasticity_set(table, &stats, variant).map_err(lib_err)?;
            let p_hat = price_level_path(&es, &path).map_err(lib_err)?;
            for (t, date) in path.dates.iter().enumerate() {
                let z = path.z_hat.row(t).transpose();
                let w = path.w_hat.row(t).transpose();
                let pm = path.pm_hat.row(t).transpose();
                let tech = -es.weight_z.dot(&z);
                let fac = es.weight_w.dot(&w);
                let imp = es.weight_pm.dot(&pm);
                for (term, value) in [
                    ("technology", tech),
                    ("factor_prices", fac),
                    ("import_prices", imp),
                    ("p_hat", p_hat[t]),
                ] {
                    csv.row(&[
                        date.clone(),
                        table.meta.country.clone(),
                        es.variant.label().into(),
                        term.into(),
                        fmt_g9(value),
                    ]);
                }
            }
            let series = model_inflation(&es, &path, lag).map_err(lib_err)?;
            if series.too_short {
                eprintln!(
                    "warning: {}: shock path shorter than lag {lag}, inflation series empty",
                    table.meta.country
                );
            }
            for (date, value) in series.dates.iter().zip(&series.values) {
                csv.row(&[
                    date.clone(),
                    table.meta.country.clone(),
                    es.variant.label().into(),
                    "inflation".into(),
                    fmt_g9(*value),
                ]);
            }
            if !series.values.is_empty() {
                let (mean, std) = moments(&series.values).map_err(lib_err)?;
                for (term, value) in [("inflation_mean", mean), ("inflation_std", std)] {
                    csv.row(&[
                        "all".into(),
                        table.meta.country.clone(),
                        es.variant.label().into(),
                        term.into(),
                        fmt_g9(value),
                    ]);
                }
            }
        }
    }
    meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}

pub fn cmd_simulate(
    common: &Common,
    scenario: Scenario,
    shock: ShockKind,
    size: f64,
    horizon: usize,
) -> CmdResult {
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("simulate", common.seed);
    meta.input("scenario", scenario.label());
    meta.input("shock", shock.label());
    meta.input("size", size);
    meta.input("horizon", horizon);

    let cal = MXNCalibration::baseline(scenario);
    let irf = mxnsim::irf(&cal, ShockSpec { kind: shock, size }, horizon).map_err(lib_err)?;

    let columns = [
        "p", "p_n", "p_x", "p_m", "exch", "w", "c", "q_n", "q_x", "l_n", "l_x", "bstar", "istar",
    ];
    let header = format!("t,inflation,{}", columns.join(","));
    let mut csv = CsvOut::new(out_dir, "irf.csv", &header);
    let series: Vec<Vec<f64>> = columns
        .iter()
        .map(|name| irf.series(name).expect("known variable"))
        .collect();
    for t in 0..irf.horizon {
        let mut fields = vec![t.to_string(), fmt_g9(irf.inflation[t])];
        fields.extend(series.iter().map(|s| fmt_g9(s[t])));
        csv.row(&fields);
    }
    meta.input("y0_shift_on_doubling", fmt_g9(irf.y0_shift_on_doubling));
    meta.input("terminal_ratio", fmt_g9(irf.terminal_ratio));
    meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}

pub fn cmd_regress(common: &Common, input: &Path) -> CmdResult {
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("regress", common.seed);
    meta.input("input", input.display());

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", input.display())))?;
    let mut obs = Vec::new();
    for record in reader.deserialize() {
        let (country, sector, y): (String, String, f64) =
            record.map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
        obs.push(PanelObs { country, sector, y });
    }
    let fit = fit_two_way_fe(&obs).map_err(lib_err)?;

    let mut fe = CsvOut::new(out_dir, "fe.csv", "kind,id,value");
    fe.row(&["intercept".into(), String::new(), fmt_g9(fit.intercept)]);
    for (id, v) in &fit.alpha_country {
        fe.row(&["country".into(), id.clone(), fmt_g9(*v)]);
    }
    for (id, v) in &fit.alpha_sector {
        fe.row(&["sector".into(), id.clone(), fmt_g9(*v)]);
    }
    let mut resid = CsvOut::new(out_dir, "residuals.csv", "country,sector,y,fitted,residual");
    for (o, r) in obs.iter().zip(&fit.residuals) {
        let fitted = fit
            .fitted(&o.country, &o.sector)
            .expect("levels seen in fit");
        resid.row(&[
            o.country.clone(),
            o.sector.clone(),
            fmt_g9(o.y),
            fmt_g9(fitted),
            fmt_g9(*r),
        ]);
    }
    meta.input("r2", fmt_g9(fit.r2));
    meta.input("n_obs", fit.n_obs);
    meta.wrote(&fe.finish().map_err(|e| io_err(out_dir, e))?);
    meta.wrote(&resid.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}

#[derive(serde::Deserialize, Default)]
struct ShockFile {
    #[serde(default)]
    z_hat: Vec<f64>,
    #[serde(default)]
    pm_hat: Vec<f64>,
    #[serde(default)]
    x_hat: Vec<f64>,
    #[serde(default)]
    l_bar_hat: Vec<f64>,
    #[serde(default)]
    m_hat: f64,
}

#[derive(serde::Deserialize)]
struct ParamsFile {
    theta_consumer: f64,
    theta_producers: Vec<f64>,
}

pub fn cmd_solve_shares(common: &Common, input: &Path, params: &Path, shocks: &Path) -> CmdResult {
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("solve-shares", common.seed);
    meta.input("input", input.display());
    meta.input("params", params.display());
    meta.input("shocks", shocks.display());
    meta.tolerance("tol_identity", common.tol_identity);

    let parsed = parse_tables_sorted(input, common.tol_identity)?;
    if parsed.len() != 1 {
        return Err(CliError::Data(format!(
            "solve-shares expects exactly one table, found {}",
            parsed.len()
        )));
    }
    let table: &IOTable = &parsed[0].table;
    let stats = table.derive().map_err(lib_err)?;

    let params: ParamsFile = read_json(params)?;
    let shock_file: ShockFile = read_json(shocks)?;
    let fit = |mut v: Vec<f64>,
               len: usize,
               what: &str|
     -> Result<netcpi::nalgebra::DVector<f64>, CliError> {
        if v.is_empty() {
            v = vec![0.0; len];
        }
        if v.len() != len {
            return Err(CliError::Data(format!(
                "{what} must have length {len}, got {}",
                v.len()
            )));
        }
        Ok(netcpi::nalgebra::DVector::from_vec(v))
    };
    let share_shocks = ShareShocks {
        z_hat: fit(shock_file.z_hat, table.n_sectors(), "z_hat")?,
        pm_hat: fit(shock_file.pm_hat, table.n_imports(), "pm_hat")?,
        x_hat: fit(shock_file.x_hat, table.n_sectors(), "x_hat")?,
        l_bar_hat: fit(shock_file.l_bar_hat, table.n_factors(), "l_bar_hat")?,
        m_hat: shock_file.m_hat,
    };
    let elasticities = ElasticityParams {
        theta_consumer: params.theta_consumer,
        theta_producers: params.theta_producers,
    };
    let subs = substitution_matrices(table, &stats, &elasticities).map_err(lib_err)?;
    let solution = solve_share_system(table, &stats, &subs, &share_shocks).map_err(lib_err)?;
    let residual = solution.residual_norm(table, &stats, &subs);
    if residual > common.tol_solve {
        return Err(CliError::Numeric(format!(
            "share-system residual {residual:.3e} exceeds --tol-solve {:.3e}",
            common.tol_solve
        )));
    }
    meta.tolerance("tol_solve", common.tol_solve);

    let mut csv = CsvOut::new(out_dir, "solution.csv", "block,id,value");
    for (i, f) in table.factors.iter().enumerate() {
        csv.row(&["w_hat".into(), f.clone(), fmt_g9(solution.w_hat[i])]);
    }
    for (i, s) in table.sectors.iter().enumerate() {
        csv.row(&[
            "dlambda_bar".into(),
            s.clone(),
            fmt_g9(solution.dlambda_bar[i]),
        ]);
    }
    for (i, f) in table.factors.iter().enumerate() {
        csv.row(&[
            "dfactor_bar".into(),
            f.clone(),
            fmt_g9(solution.dfactor_bar[i]),
        ]);
    }
    for (i, s) in table.sectors.iter().enumerate() {
        csv.row(&["p_d_hat".into(), s.clone(), fmt_g9(solution.p_d_hat[i])]);
    }
    for (i, s) in table.sectors.iter().enumerate() {
        csv.row(&["dx_bar".into(), s.clone(), fmt_g9(solution.dx_bar[i])]);
    }
    let transfer = solution.implied_transfer_rate(&stats);
    let p_via_shares = cpi_from_share_solution(table, &stats, &solution, transfer, share_shocks.m_hat)
        .map_err(lib_err)?;
    let es = elasticity_set(table, &stats, Variant::SoeNetwork).map_err(lib_err)?;
    let p_via_wages = cpi::cpi_change(
        &es,
        &share_shocks.z_hat,
        &solution.w_hat,
        &share_shocks.pm_hat,
    )
    .map_err(lib_err)?;
    csv.row(&[
        "summary".into(),
        "implied_transfer_rate".into(),
        fmt_g9(transfer),
    ]);
    csv.row(&[
        "summary".into(),
        "p_hat_factor_shares".into(),
        fmt_g9(p_via_shares),
    ]);
    csv.row(&[
        "summary".into(),
        "p_hat_factor_prices".into(),
        fmt_g9(p_via_wages),
    ]);
    csv.row(&["summary".into(), "rcond".into(), fmt_g9(solution.rcond)]);

    meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&body)
        .map_err(|e| CliError::Data(format!("{}: bad JSON: {e}", path.display())))
}

pub fn cmd_classify(common: &Common, input: &Path) -> CmdResult {
    let out_dir = &common.out_dir;
    let mut meta = RunMeta::new("classify", common.seed);
    meta.input("input", input.display());

    let records = ingest::parse_macro_csv(input).map_err(lib_err)?;
    let world = ingest::build_world_gdp(&records).map_err(lib_err)?;
    let mut csv = CsvOut::new(
        out_dir,
        "classify.csv",
        "country,year,alpha_c,openness,is_small,is_open,is_soe",
    );
    let by_country: BTreeMap<&str, &ingest::CountryMacro> =
        records.iter().map(|r| (r.country.as_str(), r)).collect();
    for r in by_country.values() {
        let class = ingest::classify_soe(r, world).map_err(lib_err)?;
        csv.row(&[
            r.country.clone(),
            r.year.to_string(),
            fmt_g9(class.alpha_c),
            fmt_g9(class.openness),
            class.is_small.to_string(),
            class.is_open.to_string(),
            class.is_soe.to_string(),
        ]);
    }
    meta.input("world_gdp", fmt_g9(world));
    meta.wrote(&csv.finish().map_err(|e| io_err(out_dir, e))?);
    meta.write(out_dir).map_err(|e| io_err(out_dir, e))?;
    Ok(())
}
