//! Seeded generators of random valid tables.
//!
//! Row shares are drawn so that every zero-profit identity holds exactly and
//! the intermediate block keeps a comfortable margin below spectral radius
//! one (row sums are capped, which bounds the radius by the cap).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::iotable::{IOTable, TableMeta};

/// Shape and spread of the generated tables.
#[derive(Debug, Clone)]
pub struct TableShape {
    pub n_sectors: usize,
    pub n_factors: usize,
    pub n_imports: usize,
    /// Upper bound on each sector's domestic intermediate row sum.
    pub max_omega_row_sum: f64,
    /// Upper bound on the economy's total export share of expenditure, so
    /// aggregations of the table keep every share inside [0, 1].
    pub max_export_share: f64,
}

impl TableShape {
    pub fn new(n_sectors: usize, n_factors: usize, n_imports: usize) -> Self {
        TableShape {
            n_sectors,
            n_factors,
            n_imports,
            max_omega_row_sum: 0.85,
            max_export_share: 0.5,
        }
    }
}

/// Draws a random valid table: zero-profit rows exact, consumption shares
/// normalized, spectral radius bounded by `max_omega_row_sum`.
pub fn random_table<R: Rng>(rng: &mut R, shape: &TableShape) -> IOTable {
    let (n, f, m) = (shape.n_sectors, shape.n_factors, shape.n_imports);
    assert!(n >= 1 && f >= 1, "need at least one sector and one factor");

    let mut omega = DMatrix::<f64>::zeros(n, n);
    let mut factor_shares = DMatrix::<f64>::zeros(n, f);
    let mut import_shares = DMatrix::<f64>::zeros(n, m);
    for i in 0..n {
        let omega_total: f64 = rng.gen_range(0.0..shape.max_omega_row_sum);
        let mut raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let raw_sum: f64 = raw.iter().sum();
        for v in &mut raw {
            *v *= omega_total / raw_sum;
        }
        for (j, v) in raw.iter().enumerate() {
            omega[(i, j)] = *v;
        }

        // Split the remainder between factors and imports, keeping a floor on
        // the factor block so every sector has some value added.
        let rest = 1.0 - omega_total;
        let factor_total = if m == 0 {
            rest
        } else {
            rest * rng.gen_range(0.3..0.95)
        };
        let import_total = rest - factor_total;

        let mut raw_f: Vec<f64> = (0..f).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum_f: f64 = raw_f.iter().sum();
        for v in &mut raw_f {
            *v *= factor_total / sum_f;
        }
        for (j, v) in raw_f.iter().enumerate() {
            factor_shares[(i, j)] = *v;
        }
        if m > 0 {
            let mut raw_m: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum_m: f64 = raw_m.iter().sum();
            for v in &mut raw_m {
                *v *= import_total / sum_m;
            }
            for (j, v) in raw_m.iter().enumerate() {
                import_shares[(i, j)] = *v;
            }
        }
    }

    // Consumption shares over domestic goods and imports, normalized to one.
    let mut cons: Vec<f64> = (0..n + m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let cons_sum: f64 = cons.iter().sum();
    for v in &mut cons {
        *v /= cons_sum;
    }
    let cons_domestic = DVector::from_fn(n, |i, _| cons[i]);
    let cons_import = DVector::from_fn(m, |i, _| cons[n + i]);

    let exports = if shape.max_export_share > 0.0 {
        let total: f64 = rng.gen_range(0.0..shape.max_export_share);
        let mut raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let raw_sum: f64 = raw.iter().sum();
        for v in &mut raw {
            *v *= total / raw_sum;
        }
        DVector::from_vec(raw)
    } else {
        DVector::zeros(n)
    };

    IOTable::new(
        (0..n).map(|i| format!("s{}", i + 1)).collect(),
        (0..f).map(|i| format!("f{}", i + 1)).collect(),
        (0..m).map(|i| format!("m{}", i + 1)).collect(),
        omega,
        factor_shares,
        import_shares,
        cons_domestic,
        cons_import,
        exports,
        TableMeta {
            country: "RNG".into(),
            year: 2014,
        },
    )
    .expect("generated dimensions are consistent")
}

/// Closed-economy variant: no imports, no exports. Under it the open-economy
/// network statistics collapse onto the closed-economy ones.
pub fn random_closed_table<R: Rng>(rng: &mut R, n_sectors: usize, n_factors: usize) -> IOTable {
    let shape = TableShape {
        max_export_share: 0.0,
        ..TableShape::new(n_sectors, n_factors, 0)
    };
    let mut table = random_table(rng, &shape);
    table.exports.fill(0.0);
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_tables_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..50 {
            let n = rng.gen_range(1..=20);
            let f = rng.gen_range(1..=4);
            let m = rng.gen_range(0..=3);
            let table = random_table(&mut rng, &TableShape::new(n, f, m));
            let report = table.validate(crate::TOL_IDENTITY);
            assert!(report.passed(), "violations: {:?}", report.violations);
            assert!(report.spectral_radius <= 0.86);
        }
    }

    #[test]
    fn closed_tables_have_no_trade() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let table = random_closed_table(&mut rng, 5, 2);
        assert_eq!(table.n_imports(), 0);
        assert_eq!(table.exports.amax(), 0.0);
        assert!(table.validate(crate::TOL_IDENTITY).passed());
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let shape = TableShape::new(6, 2, 2);
        let a = random_table(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7), &shape);
        let b = random_table(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7), &shape);
        assert_eq!(a.omega, b.omega);
        assert_eq!(a.exports, b.exports);
    }
}
