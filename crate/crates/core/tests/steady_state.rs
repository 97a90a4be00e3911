use std::f64::consts::PI;

use proptest::prelude::*;

use fluorospec::bloch::{build_bloch, intensity_breakdown, solve_steady, steady_state, steady_state_analytic};
use fluorospec::{Error, SystemParams};

fn params_strategy() -> impl Strategy<Value = SystemParams> {
    (
        6.0f64..8.0,
        0.01f64..10.0,
        -PI..PI,
        -10.0f64..10.0,
        -10.0f64..10.0,
        -10.0f64..10.0,
    )
        .prop_map(|(lg, om, phase, det, split, b)| {
            let g = 10f64.powf(lg);
            SystemParams::new(g, 1.0, det * g)
                .with_omega_polar(om * g, phase)
                .with_splitting(split * g)
                .with_zeeman(b * g)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn numeric_matches_closed_form(p in params_strategy()) {
        let numeric = solve_steady(&p).unwrap().density;
        let exact = steady_state_analytic(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (numeric.get(i, j), exact.get(i, j));
                prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-12), "({i},{j}) {a} vs {b}");
            }
        }
    }

    #[test]
    fn state_is_physical(p in params_strategy()) {
        let rho = solve_steady(&p).unwrap().density;
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn zeeman_shift_leaves_state_unchanged(p in params_strategy(), b in -1e9f64..1e9) {
        let a = solve_steady(&p).unwrap().density;
        let c = solve_steady(&p.with_zeeman(b)).unwrap().density;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((a.get(i, j) - c.get(i, j)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn interference_terms_cancel(p in params_strategy()) {
        let b = intensity_breakdown(&p).unwrap();
        prop_assert!((b.i_coh_int + b.i_inc_int).abs() <= 1e-10 * b.i_coh_int.abs().max(1e-300));
        prop_assert!((b.sum() - b.i_total).abs() <= 1e-10 * b.i_total);
    }
}

#[test]
fn zero_drive_is_singular() {
    let p = SystemParams::new(1e7, 0.0, 1e6);
    let sys = build_bloch(&p).unwrap();
    assert!(matches!(steady_state(&sys), Err(Error::SingularGenerator)));
}

#[test]
fn resonant_two_level_limit() {
    // populations of each ground state follow the two-level formula with half the weight
    let g = 1e7;
    let om = 2e7;
    let rho = solve_steady(&SystemParams::new(g, om, 0.0)).unwrap().density;
    let d = g * g / 4.0 + 2.0 * om * om;
    assert!((rho.get(0, 0).re - 0.5 * om * om / d).abs() < 1e-14);
    assert!((rho.get(2, 2).re - 0.5 * (g * g / 4.0 + om * om) / d).abs() < 1e-14);
}
