//! Recompute the reference initial radii with the fixed-step oracle.

use cmc_orbit::shooting::{solve, SolverConfig};
use cmc_orbit::dynamics::EventKind;
use cmc_orbit::verify::oracle::{oracle_shoot, oracle_class_boundary, oracle_orthogonal_exit, OracleConfig};
use cmc_orbit::{Family, Params};

fn main() {
    let cfg = OracleConfig::default();
    let cases = [
        (Family::s2n(2), 1.0),
        (Family::s2n(3), 1.0),
        (Family::s2n(2), 5.0),
        (Family::s3n_minus_1(2), 1.0),
        (Family::s3n_minus_1(2), 3.0),
    ];
    for (family, lambda) in cases {
        let params = Params::new(family.unwrap(), lambda).unwrap();
        let upper = params.family.r0_upper();
        let (a, b) = (0.25 * upper, upper - 0.01);
        let class = |r0| oracle_shoot(&params, r0, &cfg).unwrap().exit.unwrap().kind;
        assert_eq!(class(a), EventKind::Alpha);
        assert_ne!(class(b), EventKind::Alpha);
        let (lo, hi) = oracle_class_boundary(&params, a, b, 1e-12, &cfg).unwrap();
        let adaptive = solve(&params, &SolverConfig::default()).unwrap();
        let r0 = if params.family.label() == "s2n" {
            0.5 * (lo + hi)
        } else {
            let (p, q) = oracle_orthogonal_exit(&params, hi, upper - 0.01, 1e-12, &cfg).unwrap();
            0.5 * (p + q)
        };
        println!(
            "{} n={} lambda={lambda}: oracle r0* = {r0:.17}  adaptive = {:.17}  diff = {:e}",
            params.family.label(),
            params.family.n,
            adaptive.r0_star,
            r0 - adaptive.r0_star
        );
    }
}
