#![allow(dead_code)]

use cmc_orbit::{Family, Params};

/// Initial radii of the converged shots, computed with the fixed-step
/// oracle (`cargo run --release -p cmc-orbit --example freeze`).
pub const S2N_R0_STAR: [(u32, f64, f64); 3] = [
    (2, 1.0, 1.216_090_075_012_546_3),
    (3, 1.0, 1.291_786_811_185_478_5),
    (2, 5.0, 1.394_653_436_895_526),
];

pub const S3N_R0_STAR: [(u32, f64, f64); 2] = [
    (2, 1.0, 0.653_876_616_848_036_3),
    (2, 3.0, 0.734_771_578_020_920_1),
];

/// Allowed distance between the adaptive solver and the frozen values.
pub const R0_STAR_TOL: f64 = 1e-8;

pub fn s2n(n: u32, lambda: f64) -> Params {
    Params::new(Family::s2n(n).unwrap(), lambda).unwrap()
}

pub fn s3n(n: u32, lambda: f64) -> Params {
    Params::new(Family::s3n_minus_1(n).unwrap(), lambda).unwrap()
}
