//! File ingestion: input-output tables, country macro series, and the
//! small-open-economy classifier.
//!
//! # Canonical table format
//!
//! A table file is CSV. Each table starts with a `#table,<country>,<year>`
//! record followed by the id directives and then long-format cells:
//!
//! ```csv
//! #table,FIX,2014
//! #sectors,s1,s2
//! #factors,labor
//! #imports,m1
//! OMEGA,s1,s2,0.1
//! FACTOR,s1,labor,0.5
//! IMPORT,s1,m1,0.2
//! CONS_D,s1,,0.3
//! CONS_M,m1,,0.3
//! EXPORT,s1,,0.1
//! ```
//!
//! Row kinds: `OMEGA,row_sector,col_sector,v`; `FACTOR,sector,factor,v`;
//! `IMPORT,sector,import,v`; `CONS_D,sector,,v`; `CONS_M,import,,v`;
//! `EXPORT,sector,,v`. Cells not listed are zero; listing a cell twice is an
//! error. Values are shares.
//!
//! A second accepted variant carries nominal flows instead of shares: the
//! same cells plus one `GROSS_OUTPUT,sector,,v` per sector and one
//! `EXPENDITURE,,,v` scalar, from which shares are derived by dividing each
//! row by its sector's gross output (consumption and exports by total
//! expenditure). Mixing the two variants in one table is an error.
//!
//! Tiny negative values (at least −1e−9 times the row's denominator) are
//! clamped to zero with a warning; anything more negative is an error.
//!
//! # Country macro format
//!
//! `country,year,cgdpo,csh_x,csh_m` with a header row, one record per
//! country: output-side GDP and export/import GDP shares, the import share
//! carried as a negative number per the source convention.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::iotable::{IOTable, TableMeta, ValidationReport};

/// A parsed table with its validation report and any clamping warnings.
#[derive(Debug, Clone)]
pub struct ParsedTable {
    pub table: IOTable,
    pub report: ValidationReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum CellKind {
    Omega,
    Factor,
    Import,
    ConsD,
    ConsM,
    Export,
    GrossOutput,
    Expenditure,
}

impl CellKind {
    fn parse(s: &str) -> Option<CellKind> {
        Some(match s {
            "OMEGA" => CellKind::Omega,
            "FACTOR" => CellKind::Factor,
            "IMPORT" => CellKind::Import,
            "CONS_D" => CellKind::ConsD,
            "CONS_M" => CellKind::ConsM,
            "EXPORT" => CellKind::Export,
            "GROSS_OUTPUT" => CellKind::GrossOutput,
            "EXPENDITURE" => CellKind::Expenditure,
            _ => return None,
        })
    }
}

#[derive(Debug, Default)]
struct RawBlock {
    meta: Option<TableMeta>,
    sectors: Vec<String>,
    factors: Vec<String>,
    imports: Vec<String>,
    /// (kind, row id, col id) -> (value, line).
    cells: BTreeMap<(CellKind, String, String), (f64, usize)>,
    start_line: usize,
}

fn schema_err(path: &Path, line: usize, detail: impl Into<String>) -> Error {
    Error::Schema {
        path: path.display().to_string(),
        line,
        detail: detail.into(),
    }
}

/// Parses the canonical table format (share or nominal-flow variant) and
/// validates every table at `tol_identity`. A table that fails validation
/// aborts the parse with an error naming the worst residual.
pub fn parse_io_csv(path: &Path, tol_identity: f64) -> Result<Vec<ParsedTable>> {
    let parsed = parse_io_csv_lenient(path, tol_identity)?;
    for p in &parsed {
        if !p.report.passed() {
            return Err(Error::ValidationFailed {
                context: format!(
                    "{} {} (from {})",
                    p.table.meta.country,
                    p.table.meta.year,
                    path.display()
                ),
                failures: p.report.violations.len(),
                worst: p.report.worst_residual(),
            });
        }
    }
    Ok(parsed)
}

/// Like [`parse_io_csv`], but keeps tables whose accounting identities fail,
/// attaching the full violation report instead of erroring. Schema errors
/// still abort. This is what an identity-checking front end wants.
pub fn parse_io_csv_lenient(path: &Path, tol_identity: f64) -> Result<Vec<ParsedTable>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => schema_err(path, 0, e.to_string()),
        })?;

    let mut blocks: Vec<RawBlock> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| schema_err(path, 0, e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let head = record.get(0).unwrap_or("");
        if head == "#table" {
            let country = record
                .get(1)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| schema_err(path, line, "#table needs a country code"))?;
            let year: i32 = record
                .get(2)
                .unwrap_or("")
                .parse()
                .map_err(|_| schema_err(path, line, "#table needs a numeric year"))?;
            blocks.push(RawBlock {
                meta: Some(TableMeta {
                    country: country.to_string(),
                    year,
                }),
                start_line: line,
                ..RawBlock::default()
            });
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| schema_err(path, line, "expected #table before any other record"))?;
        match head {
            "#sectors" | "#factors" | "#imports" => {
                let ids: Vec<String> = record
                    .iter()
                    .skip(1)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                let target = match head {
                    "#sectors" => &mut block.sectors,
                    "#factors" => &mut block.factors,
                    _ => &mut block.imports,
                };
                if !target.is_empty() {
                    return Err(schema_err(path, line, format!("{head} given twice")));
                }
                let mut dedup = ids.clone();
                dedup.sort();
                dedup.dedup();
                if dedup.len() != ids.len() {
                    return Err(schema_err(
                        path,
                        line,
                        format!("{head} lists a duplicate id"),
                    ));
                }
                *target = ids;
            }
            _ => {
                let kind = CellKind::parse(head)
                    .ok_or_else(|| schema_err(path, line, format!("unknown record kind {head}")))?;
                let row = record.get(1).unwrap_or("").to_string();
                let col = record.get(2).unwrap_or("").to_string();
                let raw = record.get(3).unwrap_or("");
                let value: f64 = raw.parse().map_err(|_| {
                    schema_err(
                        path,
                        line,
                        format!("non-numeric value {raw:?} in {head} row {row:?} col {col:?}"),
                    )
                })?;
                if block
                    .cells
                    .insert((kind, row.clone(), col.clone()), (value, line))
                    .is_some()
                {
                    return Err(schema_err(
                        path,
                        line,
                        format!("duplicate cell {head},{row},{col}"),
                    ));
                }
            }
        }
    }

    if blocks.is_empty() {
        return Err(schema_err(path, 0, "file contains no #table block"));
    }
    blocks
        .into_iter()
        .map(|b| build_table(path, b, tol_identity))
        .collect()
}

fn build_table(path: &Path, block: RawBlock, tol_identity: f64) -> Result<ParsedTable> {
    let meta = block.meta.clone().expect("block always starts with #table");
    let line0 = block.start_line;
    if block.sectors.is_empty() {
        return Err(schema_err(path, line0, "missing #sectors directive"));
    }
    if block.factors.is_empty() {
        return Err(schema_err(path, line0, "missing #factors directive"));
    }
    let sectors = block.sectors;
    let factors = block.factors;
    let imports = block.imports;
    let index = |ids: &[String], id: &str| ids.iter().position(|s| s == id);

    let nominal = block
        .cells
        .keys()
        .any(|(k, _, _)| matches!(k, CellKind::GrossOutput | CellKind::Expenditure));

    let n = sectors.len();
    let f = factors.len();
    let m = imports.len();
    let mut omega = DMatrix::<f64>::zeros(n, n);
    let mut factor_shares = DMatrix::<f64>::zeros(n, f);
    let mut import_shares = DMatrix::<f64>::zeros(n, m);
    let mut cons_domestic = DVector::<f64>::zeros(n);
    let mut cons_import = DVector::<f64>::zeros(m);
    let mut exports = DVector::<f64>::zeros(n);
    let mut gross_output = vec![0.0_f64; n];
    let mut expenditure: Option<f64> = None;

    for ((kind, row, col), (value, line)) in &block.cells {
        let (kind, value, line) = (*kind, *value, *line);
        match kind {
            CellKind::Omega => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                let j = index(&sectors, col).ok_or_else(|| {
                    schema_err(path, line, format!("unknown sector column {col}"))
                })?;
                omega[(i, j)] = value;
            }
            CellKind::Factor => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                let j = index(&factors, col).ok_or_else(|| {
                    schema_err(path, line, format!("unknown factor column {col}"))
                })?;
                factor_shares[(i, j)] = value;
            }
            CellKind::Import => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                if col.is_empty() {
                    return Err(schema_err(
                        path,
                        line,
                        "IMPORT row is missing its import id column",
                    ));
                }
                let j = index(&imports, col).ok_or_else(|| {
                    schema_err(path, line, format!("unknown import column {col}"))
                })?;
                import_shares[(i, j)] = value;
            }
            CellKind::ConsD => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                cons_domestic[i] = value;
            }
            CellKind::ConsM => {
                let i = index(&imports, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown import {row}")))?;
                cons_import[i] = value;
            }
            CellKind::Export => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                exports[i] = value;
            }
            CellKind::GrossOutput => {
                let i = index(&sectors, row)
                    .ok_or_else(|| schema_err(path, line, format!("unknown sector {row}")))?;
                gross_output[i] = value;
            }
            CellKind::Expenditure => {
                if expenditure.replace(value).is_some() {
                    return Err(schema_err(path, line, "EXPENDITURE given twice"));
                }
            }
        }
    }

    let mut warnings = Vec::new();
    let mut clamp = |what: String, v: &mut f64, scale: f64| -> Result<()> {
        if *v < 0.0 {
            if *v >= -1e-9 * scale {
                warnings.push(format!("{what}: clamped {v:.3e} to 0"));
                *v = 0.0;
            } else {
                return Err(schema_err(
                    path,
                    line0,
                    format!("{what}: negative value {v} exceeds the rounding allowance"),
                ));
            }
        }
        Ok(())
    };

    if nominal {
        let expenditure = expenditure
            .ok_or_else(|| schema_err(path, line0, "nominal-flow table is missing EXPENDITURE"))?;
        if expenditure <= 0.0 {
            return Err(schema_err(path, line0, "EXPENDITURE must be positive"));
        }
        for (i, sector) in sectors.iter().enumerate() {
            if gross_output[i] == 0.0 {
                return Err(schema_err(
                    path,
                    line0,
                    format!("sector {sector} has zero gross output (degenerate sector)"),
                ));
            }
            if gross_output[i] < 0.0 {
                return Err(schema_err(
                    path,
                    line0,
                    format!("sector {sector} has negative gross output"),
                ));
            }
        }
        for i in 0..n {
            let go = gross_output[i];
            for j in 0..n {
                clamp(
                    format!("OMEGA {},{}", sectors[i], sectors[j]),
                    &mut omega[(i, j)],
                    go,
                )?;
                omega[(i, j)] /= go;
            }
            for j in 0..f {
                clamp(
                    format!("FACTOR {},{}", sectors[i], factors[j]),
                    &mut factor_shares[(i, j)],
                    go,
                )?;
                factor_shares[(i, j)] /= go;
            }
            for j in 0..m {
                clamp(
                    format!("IMPORT {},{}", sectors[i], imports[j]),
                    &mut import_shares[(i, j)],
                    go,
                )?;
                import_shares[(i, j)] /= go;
            }
            clamp(
                format!("CONS_D {}", sectors[i]),
                &mut cons_domestic[i],
                expenditure,
            )?;
            cons_domestic[i] /= expenditure;
            clamp(
                format!("EXPORT {}", sectors[i]),
                &mut exports[i],
                expenditure,
            )?;
            exports[i] /= expenditure;
        }
        for j in 0..m {
            clamp(
                format!("CONS_M {}", imports[j]),
                &mut cons_import[j],
                expenditure,
            )?;
            cons_import[j] /= expenditure;
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                clamp(
                    format!("OMEGA {},{}", sectors[i], sectors[j]),
                    &mut omega[(i, j)],
                    1.0,
                )?;
            }
            for j in 0..f {
                clamp(
                    format!("FACTOR {},{}", sectors[i], factors[j]),
                    &mut factor_shares[(i, j)],
                    1.0,
                )?;
            }
            for j in 0..m {
                clamp(
                    format!("IMPORT {},{}", sectors[i], imports[j]),
                    &mut import_shares[(i, j)],
                    1.0,
                )?;
            }
            clamp(format!("CONS_D {}", sectors[i]), &mut cons_domestic[i], 1.0)?;
            clamp(format!("EXPORT {}", sectors[i]), &mut exports[i], 1.0)?;
        }
        for j in 0..m {
            clamp(format!("CONS_M {}", imports[j]), &mut cons_import[j], 1.0)?;
        }
    }

    let table = IOTable::new(
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
    )?;
    let report = table.validate(tol_identity);
    Ok(ParsedTable {
        table,
        report,
        warnings,
    })
}

/// Writes tables in the canonical share format. Zero cells are omitted;
/// values are written with full round-trip precision.
pub fn write_io_csv(path: &Path, tables: &[IOTable]) -> Result<()> {
    use std::io::Write;
    let mut out = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut emit = |s: String| -> Result<()> {
        writeln!(out, "{s}").map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    for t in tables {
        emit(format!("#table,{},{}", t.meta.country, t.meta.year))?;
        emit(format!("#sectors,{}", t.sectors.join(",")))?;
        emit(format!("#factors,{}", t.factors.join(",")))?;
        if !t.imports.is_empty() {
            emit(format!("#imports,{}", t.imports.join(",")))?;
        }
        for i in 0..t.n_sectors() {
            for j in 0..t.n_sectors() {
                if t.omega[(i, j)] != 0.0 {
                    emit(format!(
                        "OMEGA,{},{},{:?}",
                        t.sectors[i],
                        t.sectors[j],
                        t.omega[(i, j)]
                    ))?;
                }
            }
        }
        for i in 0..t.n_sectors() {
            for j in 0..t.n_factors() {
                if t.factor_shares[(i, j)] != 0.0 {
                    emit(format!(
                        "FACTOR,{},{},{:?}",
                        t.sectors[i],
                        t.factors[j],
                        t.factor_shares[(i, j)]
                    ))?;
                }
            }
        }
        for i in 0..t.n_sectors() {
            for j in 0..t.n_imports() {
                if t.import_shares[(i, j)] != 0.0 {
                    emit(format!(
                        "IMPORT,{},{},{:?}",
                        t.sectors[i],
                        t.imports[j],
                        t.import_shares[(i, j)]
                    ))?;
                }
            }
        }
        for i in 0..t.n_sectors() {
            if t.cons_domestic[i] != 0.0 {
                emit(format!("CONS_D,{},,{:?}", t.sectors[i], t.cons_domestic[i]))?;
            }
        }
        for j in 0..t.n_imports() {
            if t.cons_import[j] != 0.0 {
                emit(format!("CONS_M,{},,{:?}", t.imports[j], t.cons_import[j]))?;
            }
        }
        for i in 0..t.n_sectors() {
            if t.exports[i] != 0.0 {
                emit(format!("EXPORT,{},,{:?}", t.sectors[i], t.exports[i]))?;
            }
        }
    }
    Ok(())
}

/// One country's macro record in the PWT layout.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct CountryMacro {
    pub country: String,
    pub year: i32,
    /// Output-side GDP level.
    pub cgdpo: f64,
    /// Exports over GDP.
    pub csh_x: f64,
    /// Imports over GDP, stored as a negative number per the source
    /// convention.
    pub csh_m: f64,
}

/// Small-open-economy classification of one country.
#[derive(Debug, Clone, PartialEq)]
pub struct SOEClass {
    /// Share of world GDP.
    pub alpha_c: f64,
    /// (Exports + imports) over GDP.
    pub openness: f64,
    pub is_small: bool,
    pub is_open: bool,
    pub is_soe: bool,
}

/// World GDP share threshold below which an economy counts as small.
pub const SMALL_THRESHOLD: f64 = 0.05;
/// Trade openness threshold above which an economy counts as open.
pub const OPEN_THRESHOLD: f64 = 0.3;

/// Classifies a country: small iff its world GDP share is at most 5%, open
/// iff exports plus imports reach 30% of GDP, and a small open economy iff
/// both hold (boundaries inclusive).
pub fn classify_soe(record: &CountryMacro, world_gdp: f64) -> Result<SOEClass> {
    if world_gdp <= 0.0 || world_gdp.is_nan() {
        return Err(Error::InvalidInput {
            what: "world_gdp".into(),
            detail: format!("must be positive, got {world_gdp}"),
        });
    }
    if record.cgdpo <= 0.0 || record.cgdpo.is_nan() {
        return Err(Error::InvalidInput {
            what: format!("cgdpo for {}", record.country),
            detail: format!("must be positive, got {}", record.cgdpo),
        });
    }
    let alpha_c = record.cgdpo / world_gdp;
    // csh_m is negative in the source, so subtracting adds the import share.
    let openness = record.csh_x - record.csh_m;
    let is_small = alpha_c <= SMALL_THRESHOLD;
    let is_open = openness >= OPEN_THRESHOLD;
    Ok(SOEClass {
        alpha_c,
        openness,
        is_small,
        is_open,
        is_soe: is_small && is_open,
    })
}

/// World GDP for one year: the sum of `cgdpo` across countries. Rejects
/// duplicate countries and mixed years.
pub fn build_world_gdp(records: &[CountryMacro]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidInput {
            what: "records".into(),
            detail: "cannot build world GDP from an empty list".into(),
        });
    }
    let year = records[0].year;
    let mut seen = std::collections::BTreeSet::new();
    let mut total = 0.0;
    for r in records {
        if r.year != year {
            return Err(Error::InvalidInput {
                what: format!("record for {}", r.country),
                detail: format!("mixed years {year} and {} in one world aggregate", r.year),
            });
        }
        if !seen.insert(r.country.as_str()) {
            return Err(Error::InvalidInput {
                what: format!("record for {}", r.country),
                detail: "duplicate country entry".into(),
            });
        }
        total += r.cgdpo;
    }
    Ok(total)
}

/// Reads `country,year,cgdpo,csh_x,csh_m` records.
pub fn parse_macro_csv(path: &Path) -> Result<Vec<CountryMacro>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let mut out = Vec::new();
    for record in reader.deserialize() {
        let record: CountryMacro =
            record.map_err(|e| schema_err(path, 0, format!("bad macro record: {e}")))?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(schema_err(path, 0, "macro file has no records"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iotable::fixtures::two_sector;
    use approx::assert_abs_diff_eq;

    fn tmp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("netcpi-test-{}-{name}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn round_trip_preserves_fixture() {
        let table = two_sector();
        let path = std::env::temp_dir().join(format!("netcpi-rt-{}.csv", std::process::id()));
        write_io_csv(&path, std::slice::from_ref(&table)).unwrap();
        let parsed = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap();
        assert_eq!(parsed.len(), 1);
        let got = &parsed[0].table;
        assert_eq!(got.sectors, table.sectors);
        assert_eq!(got.meta, table.meta);
        assert!((got.omega.clone() - &table.omega).amax() < 1e-12);
        assert!((got.cons_domestic.clone() - &table.cons_domestic).amax() < 1e-12);
        assert!((got.exports.clone() - &table.exports).amax() < 1e-12);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn import_row_without_id_names_the_column() {
        let contents = "\
#table,T,2014
#sectors,s1
#factors,labor
#imports,m1
OMEGA,s1,s1,0.2
FACTOR,s1,labor,0.6
IMPORT,s1,,0.2
CONS_D,s1,,0.7
CONS_M,m1,,0.3
";
        let path = tmp("missing-import-col.csv", contents);
        let err = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap_err();
        assert!(matches!(&err, Error::Schema { detail, .. } if detail.contains("import id")));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn non_numeric_cell_is_located() {
        let contents = "\
#table,T,2014
#sectors,s1
#factors,labor
OMEGA,s1,s1,abc
";
        let path = tmp("non-numeric.csv", contents);
        let err = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap_err();
        match err {
            Error::Schema { line, detail, .. } => {
                assert_eq!(line, 4);
                assert!(detail.contains("s1"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn nominal_flows_derive_shares() {
        // 3 sectors in currency units; hand-checkable shares.
        let contents = "\
#table,NOM,2014
#sectors,a,b,c
#factors,labor
#imports,m1
GROSS_OUTPUT,a,,100
GROSS_OUTPUT,b,,200
GROSS_OUTPUT,c,,50
EXPENDITURE,,,250
OMEGA,a,b,20
OMEGA,b,a,40
OMEGA,c,c,5
FACTOR,a,labor,60
FACTOR,b,labor,120
FACTOR,c,labor,40
IMPORT,a,m1,20
IMPORT,b,m1,40
IMPORT,c,m1,5
CONS_D,a,,50
CONS_D,b,,100
CONS_D,c,,30
CONS_M,m1,,70
EXPORT,a,,10
EXPORT,b,,55
EXPORT,c,,10
";
        let path = tmp("nominal.csv", contents);
        let parsed = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap();
        let t = &parsed[0].table;
        assert_abs_diff_eq!(t.omega[(0, 1)], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.omega[(1, 0)], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.factor_shares[(2, 0)], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t.cons_domestic[1], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(t.cons_import[0], 0.28, epsilon = 1e-12);
        assert_abs_diff_eq!(t.exports[1], 0.22, epsilon = 1e-12);
        assert!(parsed[0].report.passed());
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn zero_output_sector_is_degenerate() {
        let contents = "\
#table,NOM,2014
#sectors,a,b
#factors,labor
GROSS_OUTPUT,a,,100
EXPENDITURE,,,100
FACTOR,a,labor,100
CONS_D,a,,100
";
        let path = tmp("zero-output.csv", contents);
        let err = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap_err();
        assert!(matches!(&err, Error::Schema { detail, .. } if detail.contains("degenerate")));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn tiny_negative_clamps_with_warning_large_negative_errors() {
        let ok = "\
#table,T,2014
#sectors,s1
#factors,labor
OMEGA,s1,s1,-1e-12
FACTOR,s1,labor,1.000000000001
CONS_D,s1,,1.0
";
        let path = tmp("clamp.csv", ok);
        let parsed = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap();
        assert_eq!(parsed[0].table.omega[(0, 0)], 0.0);
        assert_eq!(parsed[0].warnings.len(), 1);
        std::fs::remove_file(path).ok();

        let bad = "\
#table,T,2014
#sectors,s1
#factors,labor
OMEGA,s1,s1,-0.05
FACTOR,s1,labor,1.05
CONS_D,s1,,1.0
";
        let path = tmp("neg.csv", bad);
        let err = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap_err();
        assert!(matches!(&err, Error::Schema { detail, .. } if detail.contains("negative")));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn validation_failure_aborts_parse() {
        let contents = "\
#table,BAD,2014
#sectors,s1
#factors,labor
OMEGA,s1,s1,0.5
FACTOR,s1,labor,0.6
CONS_D,s1,,1.0
";
        let path = tmp("invalid.csv", contents);
        let err = parse_io_csv(&path, crate::TOL_IDENTITY).unwrap_err();
        assert!(matches!(err, Error::ValidationFailed { .. }));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn classify_thresholds() {
        let rec = |cgdpo: f64, csh_x: f64, csh_m: f64| CountryMacro {
            country: "C".into(),
            year: 2014,
            cgdpo,
            csh_x,
            csh_m,
        };
        // α = 0.04, openness = 0.5.
        let c = classify_soe(&rec(4.0, 0.3, -0.2), 100.0).unwrap();
        assert!(c.is_soe);
        // Not small.
        let c = classify_soe(&rec(6.0, 0.3, -0.2), 100.0).unwrap();
        assert!(!c.is_small && c.is_open && !c.is_soe);
        // Boundary inclusive on both thresholds.
        let c = classify_soe(&rec(5.0, 0.2, -0.1), 100.0).unwrap();
        assert!(c.is_small && c.is_open && c.is_soe);
        assert_abs_diff_eq!(c.alpha_c, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(c.openness, 0.3, epsilon = 1e-15);

        assert!(classify_soe(&rec(1.0, 0.1, -0.1), 0.0).is_err());
    }

    #[test]
    fn openness_is_monotone() {
        let mut rec = CountryMacro {
            country: "C".into(),
            year: 2014,
            cgdpo: 1.0,
            csh_x: 0.0,
            csh_m: 0.0,
        };
        let mut last_open = false;
        for step in 0..20 {
            rec.csh_x = 0.03 * step as f64;
            let c = classify_soe(&rec, 100.0).unwrap();
            assert!(c.is_open || !last_open || c.openness >= OPEN_THRESHOLD);
            if last_open {
                assert!(c.is_open, "openness flipped back off as exports grew");
            }
            last_open = c.is_open;
        }
    }

    #[test]
    fn world_gdp_sums_and_rejects_duplicates() {
        let a = CountryMacro {
            country: "A".into(),
            year: 2014,
            cgdpo: 1.0,
            csh_x: 0.0,
            csh_m: 0.0,
        };
        let b = CountryMacro {
            country: "B".into(),
            cgdpo: 3.0,
            ..a.clone()
        };
        assert_abs_diff_eq!(build_world_gdp(std::slice::from_ref(&a)).unwrap(), 1.0);
        assert_abs_diff_eq!(build_world_gdp(&[a.clone(), b]).unwrap(), 4.0);
        assert!(build_world_gdp(&[a.clone(), a.clone()]).is_err());
        assert!(build_world_gdp(&[]).is_err());
        let mut other_year = a.clone();
        other_year.country = "B".into();
        other_year.year = 2015;
        assert!(build_world_gdp(&[a, other_year]).is_err());
    }

    #[test]
    fn macro_csv_parses() {
        let contents = "country,year,cgdpo,csh_x,csh_m\nAUT,2014,400.5,0.45,-0.41\nUSA,2014,17000.0,0.1,-0.12\n";
        let path = tmp("macro.csv", contents);
        let records = parse_macro_csv(&path).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].country, "AUT");
        assert_abs_diff_eq!(records[1].csh_m, -0.12, epsilon = 1e-15);
        std::fs::remove_file(path).ok();
    }
}
