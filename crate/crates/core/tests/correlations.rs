use nalgebra::SMatrix;
use num_complex::Complex64;

use fluorospec::analysis::integrate;
use fluorospec::bloch::{build_bloch, full_generator, solve_steady, transition, RAISING};
use fluorospec::presets::{all_parameter_sets, Figure};
use fluorospec::regression::{
    correlation_limit, fluctuation_vector, time_correlation, Propagator, Transition,
};
use fluorospec::spectra::{integration_grid, SpectrumEngine};

type Super = SMatrix<Complex64, 16, 16>;
type Vec16 = SMatrix<Complex64, 16, 1>;

/// `γ₁₂⟨S₁⁺(τ)S₂⁻⟩` from the full master equation: propagate `S₂⁻ρ` and
/// take the trace against `S₁⁺`.
fn brute_force_g12(p: &fluorospec::SystemParams, taus: &[f64]) -> Vec<Complex64> {
    let l: Super = full_generator(p).unwrap();
    let rho = solve_steady(p).unwrap().density.rho;
    let (u1, l1) = RAISING[0];
    let (u2, l2) = RAISING[1];
    let s1p = transition(u1, l1);
    let s2m = transition(l2, u2);
    let x0 = s2m * rho;
    let v0 = Vec16::from_fn(|k, _| x0[(k / 4, k % 4)]);
    let g12 = -(p.gamma * p.b_pi).sqrt() * (p.gamma * p.b_pi).sqrt();
    taus.iter()
        .map(|&t| {
            let v = (l * Complex64::from(t)).exp() * v0;
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    acc += s1p[(a, b)] * v[b * 4 + a];
                }
            }
            acc * g12
        })
        .collect()
}

#[test]
fn regression_matches_master_equation_propagation() {
    let p = Figure::Fig2.params();
    let sys = build_bloch(&p).unwrap();
    let rho = solve_steady(&p).unwrap().density;
    let taus: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5 / p.gamma).collect();
    let a = time_correlation(&sys, &rho, Transition::Pi1, Transition::Pi2, &taus).unwrap();
    let b = brute_force_g12(&p, &taus);
    let lim = correlation_limit(&sys, &rho, Transition::Pi1, Transition::Pi2);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-9 * lim.norm(), "{x} vs {y}");
    }
    // relaxation to the long-time limit: the slowest mode decays at about 0.32 gamma
    let dev = |t: f64| {
        let g = time_correlation(&sys, &rho, Transition::Pi1, Transition::Pi2, &[t]).unwrap()[0];
        (g / lim - 1.0).norm()
    };
    assert!(dev(20.0 / p.gamma) < 1e-2);
    assert!(dev(30.0 / p.gamma) < 1e-4);
}

#[test]
fn propagators_agree_on_figure_sets() {
    for (name, p) in all_parameter_sets() {
        // degenerate spectra fall back to RK4; both paths must agree
        let sys = build_bloch(&p).unwrap();
        let rho = solve_steady(&p).unwrap().density;
        let taus: Vec<f64> = (0..=10).map(|k| k as f64 / p.gamma).collect();
        let a = fluorospec::regression::time_correlation_with(
            &Propagator::new(&sys), &sys, &rho, Transition::Pi1, Transition::Pi1, &taus,
        )
        .unwrap();
        let b = fluorospec::regression::time_correlation_with(
            &Propagator::rk4(&sys), &sys, &rho, Transition::Pi1, Transition::Pi1, &taus,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-6 * a[0].norm(), "{name}");
        }
    }
}

#[test]
fn spectral_sum_rule() {
    // ∫S dω̃ equals the zero-delay fluctuation correlation
    for (name, p) in all_parameter_sets() {
        let engine = SpectrumEngine::new(&p).unwrap();
        let grid = integration_grid(&p);
        let rho = &engine.rho;
        let g = engine.system.rates.pi_matrix();
        let mut expect = 0.0;
        for i in [Transition::Pi1, Transition::Pi2] {
            let r = fluctuation_vector(rho, i.lowering_slot()).unwrap();
            for j in [Transition::Pi1, Transition::Pi2] {
                // ⟨δS_j⁺ δS_i⁻⟩
                expect += g[j.index()][i.index()] * r.values[j.raising_slot()].re;
            }
        }
        let got = integrate(&engine.incoherent_pi(&grid).unwrap());
        assert!(((got - expect) / expect).abs() < 1e-4, "{name}: {got} vs {expect}");

        let mut sigma = 0.0;
        for i in [Transition::Sigma3, Transition::Sigma4] {
            let r = fluctuation_vector(rho, i.lowering_slot()).unwrap();
            sigma += engine.system.rates.gamma_sigma * r.values[i.raising_slot()].re;
        }
        let got = integrate(&engine.sigma(&grid).unwrap());
        assert!(((got - sigma) / sigma).abs() < 1e-4, "{name} sigma: {got} vs {sigma}");
    }
}
