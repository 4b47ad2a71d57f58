//! Exact evaluators for the discrete-alphabet achievability conditions and
//! rate bounds: point-to-point hybrid coding, the multiple access region and
//! its lossless and distributed-compression forms, the two-way relay region
//! and the diamond network bounds.

pub mod blahut;
pub mod diamond;
pub mod mac;
pub mod p2p;
pub mod report;
pub mod twrc;

pub use blahut::{capacity, rd_function, BaOutcome};
pub use report::{BoundReport, Constraint};

use crate::error::{Error, Result};
use crate::infotheory::ConditionalPmf;

/// Default strict-inequality margin in bits.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// 0/1 kernel for a two-argument symbol map `table[a][b]`, indexed `a * |B| + b`.
pub(crate) fn table_kernel(table: &[Vec<usize>], outputs: usize) -> Result<ConditionalPmf> {
    let flat: Vec<usize> = table.iter().flatten().copied().collect();
    ConditionalPmf::deterministic(&flat, outputs)
}

/// Checks that `table` is `rows x cols` with entries below `bound`.
pub(crate) fn check_table(table: &[Vec<usize>], rows: usize, cols: usize, bound: usize, what: &str) -> Result<()> {
    if table.len() != rows {
        return Err(Error::DimensionMismatch(format!("{what}: {} rows, expected {rows}", table.len())));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some(&bad) = row.iter().find(|&&v| v >= bound) {
            return Err(Error::DimensionMismatch(format!(
                "{what}: symbol {bad} outside alphabet of size {bound}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_kernel(k: &ConditionalPmf, inputs: usize, outputs: Option<usize>, what: &str) -> Result<()> {
    if k.inputs() != inputs || outputs.is_some_and(|o| k.outputs() != o) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: kernel is {}x{}, expected {inputs}x{}",
            k.inputs(),
            k.outputs(),
            outputs.map_or("*".to_string(), |o| o.to_string())
        )));
    }
    Ok(())
}
