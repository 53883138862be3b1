//! Fixtures shared by the criterion benches.

use jacobi_gap_core::orthopoly::{build_table, RecurrenceTable};
use jacobi_gap_core::weight::WeightParams;
use jacobi_gap_core::{Precision, Real};

pub const BENCH_BITS: [u32; 2] = [128, 256];

pub fn precision(bits: u32) -> Precision {
    Precision::new(bits).expect("valid precision")
}

/// Gapped weight with α = 1 and half-width 0.3.
pub fn weight(prec: Precision) -> WeightParams {
    WeightParams::from_f64(1.0, 0.3, prec).expect("valid weight")
}

pub fn table(n_max: usize, prec: Precision) -> RecurrenceTable {
    build_table(&weight(prec), n_max, prec).expect("table builds")
}

pub fn real(x: f64, prec: Precision) -> Real {
    Real::from_f64(x, prec)
}
