mod common;

use cmc_orbit::assembly::{assemble, certify};
use cmc_orbit::shooting::{shoot, solve, ExitClass, SolverConfig};
use cmc_orbit::verify::{oracle_shoot, OracleConfig};
use cmc_orbit::{Family, FamilyKind, Params};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn frozen_r0_star_s2n() {
    for (n, lambda, frozen) in S2N_R0_STAR {
        let sol = solve(&s2n(n, lambda), &SolverConfig::default()).unwrap();
        assert!((sol.r0_star - frozen).abs() <= R0_STAR_TOL, "n={n} lambda={lambda}: {}", sol.r0_star);
    }
}

#[test]
fn frozen_r0_star_s3n() {
    for (n, lambda, frozen) in S3N_R0_STAR {
        let sol = solve(&s3n(n, lambda), &SolverConfig::default()).unwrap();
        assert!((sol.r0_star - frozen).abs() <= R0_STAR_TOL, "n={n} lambda={lambda}: {}", sol.r0_star);
    }
}

#[test]
fn adaptive_matches_oracle_on_random_shots() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let oracle = OracleConfig::with_step(1e-5);
    for _ in 0..10 {
        let kind = if rng.gen_bool(0.5) { FamilyKind::S2n } else { FamilyKind::S3nMinus1 };
        let family = Family::new(kind, rng.gen_range(2..=4)).unwrap();
        let params = Params::new(family, rng.gen_range(0.3..4.0)).unwrap();
        let r0 = rng.gen_range(0.05..family.r0_upper() - 0.01);

        let shot = shoot(&params, r0, &SolverConfig::default()).unwrap();
        let reference = oracle_shoot(&params, r0, &oracle).unwrap();
        let exit = reference.exit.unwrap();
        let s_common = shot.s_star.min(exit.s);
        let mut gap: f64 = 0.0;
        for (&s, st) in reference.s.iter().zip(&reference.states) {
            if s > s_common {
                break;
            }
            let a = shot.state_at(s).unwrap();
            gap = gap.max((a.r - st.r).abs()).max((a.theta - st.theta).abs()).max((a.alpha - st.alpha).abs());
        }
        assert!(gap <= 1e-8, "{params:?} r0={r0}: gap {gap:e}");
        assert!((shot.s_star - exit.s).abs() <= 1e-8);
    }
}

#[test]
fn s2n_lambda_five_length_bound() {
    let params = s2n(2, 5.0);
    let sol = solve(&params, &SolverConfig::default()).unwrap();
    let curve = assemble(&params, &sol.shot.trajectory).unwrap();
    assert!(curve.length <= 2.0 * std::f64::consts::PI / 5.0);
    assert!(certify(&curve).passes(1e-6));
}

#[test]
fn certificates_are_reproducible() {
    let params = s3n(2, 3.0);
    let run = || {
        let sol = solve(&params, &SolverConfig::default()).unwrap();
        serde_json::to_string(&certify(&assemble(&params, &sol.shot.trajectory).unwrap())).unwrap()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shots_stay_monotone_and_exit_cleanly(
        s3 in any::<bool>(),
        n in 2u32..=5,
        lambda in 0.2f64..6.0,
        frac in 0.01f64..0.99,
    ) {
        let family = if s3 { Family::s3n_minus_1(n) } else { Family::s2n(n) }.unwrap();
        let params = Params::new(family, lambda).unwrap();
        let r0 = frac * family.r0_upper();
        let shot = shoot(&params, r0, &SolverConfig::default()).unwrap();
        let wall = if s3 { ExitClass::GammaWall } else { ExitClass::RWall };
        prop_assert!(shot.exit == ExitClass::AlphaZero || shot.exit == wall);
        prop_assert!(shot.monitors.all_passed(), "{:?}", shot.monitors.failures().collect::<Vec<_>>());
        let exit = shot.state_exit;
        prop_assert!(params.domain().contains(&exit), "{:?}", exit);
    }
}
