//! Generalised Bloch equations `∂ₜR = M·R + I` and their steady state.
//!
//! The Bloch vector holds the rotating-frame density-matrix elements in
//! row-major order with `ρ̃₄₄` removed:
//!
//! `R = (ρ̃₁₁, ρ̃₁₂, ρ̃₁₃, ρ̃₁₄, ρ̃₂₁, …, ρ̃₄₁, ρ̃₄₂, ρ̃₄₃)`.
//!
//! `ρ̃₄₄` is eliminated through `Tr ρ̃ = 1`, which produces the inhomogeneity `I`.
//! Levels are zero-based in code (`0..4` for `|1>..|4>`) and slots are
//! zero-based (`0..15`).

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, CMatrix, CVector, Factorized, DIM, I, ONE, ZERO};
use crate::model::{derive_rates, DecayRates, SystemParams};

pub type Operator = Matrix4<Complex64>;
/// Full generator on all sixteen density-matrix elements.
pub type FullGenerator = SMatrix<Complex64, 16, 16>;

/// Condition numbers above this attach a warning to the steady state.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Zero-based index of level pair `(i, j)` in the Bloch vector; `None` for `(3, 3)`.
pub fn slot(i: usize, j: usize) -> Option<usize> {
    assert!(i < 4 && j < 4, "level index out of range");
    let s = 4 * i + j;
    (s < DIM).then_some(s)
}

/// Level pair `(i, j)` of `ρ̃_ij` stored at zero-based `slot`.
pub fn element(slot: usize) -> (usize, usize) {
    assert!(slot < DIM, "slot out of range");
    (slot / 4, slot % 4)
}

/// Transition operator `A_ij = |i⟩⟨j|`, zero-based levels.
pub fn transition(i: usize, j: usize) -> Operator {
    let mut a = Operator::zeros();
    a[(i, j)] = ONE;
    a
}

/// Raising operators `S₁⁺ = A₁₃`, `S₂⁺ = A₂₄`, `S₃⁺ = A₂₃`, `S₄⁺ = A₁₄` as
/// zero-based `(upper, lower)` level pairs.
pub const RAISING: [(usize, usize); 4] = [(0, 2), (1, 3), (1, 2), (0, 3)];

/// Rotating-frame Hamiltonian (ħ = 1).
pub fn hamiltonian(params: &SystemParams) -> Operator {
    let mut h = Operator::zeros();
    let (d, split, b) = (params.detuning, params.splitting_delta, params.zeeman_b);
    h[(0, 0)] = Complex64::from(-d);
    h[(1, 1)] = Complex64::from(-(d - split) + b);
    h[(3, 3)] = Complex64::from(b);
    let omega = params.omega_rabi;
    h[(0, 2)] = omega;
    h[(2, 0)] = omega.conj();
    h[(1, 3)] = -omega;
    h[(3, 1)] = -omega.conj();
    h
}

/// Right-hand side of the master equation for an arbitrary operator `rho`.
pub fn master_equation_rhs(params: &SystemParams, rates: &DecayRates, rho: &Operator) -> Operator {
    let h = hamiltonian(params);
    let mut out = (h * rho - rho * h) * (-I);
    let raise = |k: usize| transition(RAISING[k].0, RAISING[k].1);
    let lower = |k: usize| transition(RAISING[k].1, RAISING[k].0);
    let gamma_pi = rates.pi_matrix();
    let mut channels: Vec<(usize, usize, f64)> = Vec::with_capacity(6);
    for (i, row) in gamma_pi.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            channels.push((i, j, g));
        }
    }
    channels.push((2, 2, rates.gamma_sigma));
    channels.push((3, 3, rates.gamma_sigma));
    for (i, j, g) in channels {
        if g == 0.0 {
            continue;
        }
        let sp = raise(i);
        let sm = lower(j);
        let spsm = sp * sm;
        out -= (spsm * rho + rho * spsm - sm * rho * sp * Complex64::from(2.0)) * Complex64::from(0.5 * g);
    }
    out
}

/// Superoperator of the master equation acting on row-major `vec(ρ̃)`.
pub fn full_generator(params: &SystemParams) -> Result<FullGenerator> {
    let rates = derive_rates(params)?;
    let mut l = FullGenerator::zeros();
    for col in 0..16 {
        let basis = transition(col / 4, col % 4);
        let image = master_equation_rhs(params, &rates, &basis);
        for row in 0..16 {
            l[(row, col)] = image[(row / 4, row % 4)];
        }
    }
    Ok(l)
}

#[derive(Debug, Clone)]
pub struct BlochSystem {
    pub params: SystemParams,
    pub rates: DecayRates,
    pub matrix: CMatrix,
    pub inhomogeneity: CVector,
}

impl BlochSystem {
    /// Slot of `ρ̃_ij`, see [`slot`].
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        slot(i, j)
    }
}

pub fn build_bloch(params: &SystemParams) -> Result<BlochSystem> {
    let rates = derive_rates(params)?;
    let full = full_generator(params)?;
    let populations = [slot(0, 0).unwrap(), slot(1, 1).unwrap(), slot(2, 2).unwrap()];
    let mut matrix = CMatrix::zeros();
    let mut inhomogeneity = CVector::zeros();
    for r in 0..DIM {
        // ρ̃₄₄ = 1 − ρ̃₁₁ − ρ̃₂₂ − ρ̃₃₃
        let from_44 = full[(r, 15)];
        inhomogeneity[r] = from_44;
        for c in 0..DIM {
            matrix[(r, c)] = full[(r, c)];
        }
        for &p in &populations {
            matrix[(r, p)] -= from_44;
        }
    }
    Ok(BlochSystem {
        params: *params,
        rates,
        matrix,
        inhomogeneity,
    })
}

pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rotating-frame density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: Operator,
}

impl DensityMatrix {
    pub fn from_bloch_vector(r: &CVector) -> Self {
        let mut rho = Operator::zeros();
        for s in 0..DIM {
            let (i, j) = element(s);
            rho[(i, j)] = r[s];
        }
        rho[(3, 3)] = ONE - r[slot(0, 0).unwrap()] - r[slot(1, 1).unwrap()] - r[slot(2, 2).unwrap()];
        Self { rho }
    }

    pub fn to_bloch_vector(&self) -> CVector {
        CVector::from_fn(|s, _| {
            let (i, j) = element(s);
            self.rho[(i, j)]
        })
    }

    /// `ρ̃_ij`, zero-based levels.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    /// `⟨A_kl⟩ = ρ̃_lk`.
    pub fn expect_transition(&self, k: usize, l: usize) -> Complex64 {
        self.rho[(l, k)]
    }

    /// `⟨A_kl A_mn⟩ = δ_lm ρ̃_nk`.
    pub fn expect_product(&self, (k, l): (usize, usize), (m, n): (usize, usize)) -> Complex64 {
        if l == m {
            self.rho[(n, k)]
        } else {
            ZERO
        }
    }

    /// `⟨S_i⁺⟩` for transition `i ∈ 0..4` (zero-based index into [`RAISING`]).
    pub fn raising_mean(&self, i: usize) -> Complex64 {
        let (u, l) = RAISING[i];
        self.expect_transition(u, l)
    }

    pub fn excited_population(&self) -> f64 {
        self.rho[(0, 0)].re + self.rho[(1, 1)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(self.rho - self.rho.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues().min()
    }

    /// Checks trace, hermiticity and positivity.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::Numerical(format!("trace {tr} differs from 1")));
        }
        if self.hermiticity_error() > 1e-12 {
            return Err(Error::Numerical("density matrix is not Hermitian".into()));
        }
        let ev = self.min_eigenvalue();
        if ev < -1e-10 {
            return Err(Error::Numerical(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub density: DensityMatrix,
    /// One-norm condition number of the generator.
    pub condition: f64,
}

impl SteadyState {
    pub fn warning(&self) -> Option<String> {
        (self.condition > ILL_CONDITIONED).then(|| {
            format!(
                "generator is ill-conditioned (condition estimate {:.3e})",
                self.condition
            )
        })
    }
}

pub fn steady_state(system: &BlochSystem) -> Result<SteadyState> {
    if system.params.omega_rabi.norm() == 0.0 {
        return Err(Error::SingularGenerator);
    }
    let condition = condition_estimate(&system.matrix)?;
    let r = Factorized::new(system.matrix)?.solve(&(-system.inhomogeneity))?;
    let density = DensityMatrix::from_bloch_vector(&r);
    density.validate()?;
    Ok(SteadyState { density, condition })
}

/// Convenience: build the generator and solve for the steady state.
pub fn solve_steady(params: &SystemParams) -> Result<SteadyState> {
    steady_state(&build_bloch(params)?)
}

/// Closed-form steady state.
pub fn steady_state_analytic(params: &SystemParams) -> Result<DensityMatrix> {
    params.validate()?;
    let omega = params.omega_rabi;
    let om2 = omega.norm_sqr();
    if om2 == 0.0 {
        return Err(Error::SingularGenerator);
    }
    let g = params.gamma;
    let d = params.detuning;
    let sp = params.splitting_delta;
    let denom = g * g / 4.0 + sp * sp / 4.0 + (d - sp / 2.0).powi(2) + 2.0 * om2;

    let rho11 = 0.5 * om2 / denom;
    let rho33 = 0.5 * (g * g / 4.0 + d * d + om2) / denom;
    let rho44 = 0.5 * (g * g / 4.0 + (d - sp).powi(2) + om2) / denom;
    let rho13 = Complex64::new(d, -g / 2.0) * omega * (0.5 / denom);
    let rho24 = Complex64::new(sp - d, g / 2.0) * omega * (0.5 / denom);

    let mut rho = Operator::zeros();
    rho[(0, 0)] = rho11.into();
    rho[(1, 1)] = rho11.into();
    rho[(2, 2)] = rho33.into();
    rho[(3, 3)] = rho44.into();
    rho[(0, 2)] = rho13;
    rho[(2, 0)] = rho13.conj();
    rho[(1, 3)] = rho24;
    rho[(3, 1)] = rho24.conj();
    Ok(DensityMatrix { rho })
}

/// Decomposition of the π-channel intensity into coherent/incoherent and
/// interference parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityBreakdown {
    pub i_coh0: f64,
    pub i_coh_int: f64,
    pub i_inc0: f64,
    pub i_inc_int: f64,
    pub i_total: f64,
}

impl IntensityBreakdown {
    pub fn from_state(params: &SystemParams, rates: &DecayRates, rho: &DensityMatrix) -> Self {
        let s1 = rho.raising_mean(0);
        let s2 = rho.raising_mean(1);
        let (u1, l1) = RAISING[0];
        let (u2, l2) = RAISING[1];
        let s1s1 = rho.expect_product((u1, l1), (l1, u1)).re;
        let s2s2 = rho.expect_product((u2, l2), (l2, u2)).re;
        // ⟨S₁⁺S₂⁻⟩ vanishes because the ground states are orthogonal.
        let s1s2 = rho.expect_product((u1, l1), (l2, u2));

        let i_coh0 = rates.gamma1 * s1.norm_sqr() + rates.gamma2 * s2.norm_sqr();
        let i_coh_int = 2.0 * rates.gamma12 * (s1 * s2.conj()).re;
        let i_inc0 = rates.gamma1 * (s1s1 - s1.norm_sqr()) + rates.gamma2 * (s2s2 - s2.norm_sqr());
        let i_inc_int = 2.0 * rates.gamma12 * (s1s2 - s1 * s2.conj()).re;
        let i_total = params.b_pi * params.gamma * rho.excited_population();
        Self {
            i_coh0,
            i_coh_int,
            i_inc0,
            i_inc_int,
            i_total,
        }
    }

    pub fn sum(&self) -> f64 {
        self.i_coh0 + self.i_coh_int + self.i_inc0 + self.i_inc_int
    }

    /// Weight of the Rayleigh line, `I_coh⁰ + I_coh^int`.
    pub fn rayleigh_weight(&self) -> f64 {
        self.i_coh0 + self.i_coh_int
    }
}

pub fn intensity_breakdown(params: &SystemParams) -> Result<IntensityBreakdown> {
    let system = build_bloch(params)?;
    let ss = steady_state(&system)?;
    Ok(IntensityBreakdown::from_state(params, &system.rates, &ss.density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig9() -> SystemParams {
        SystemParams::new(1e7, 7e6, 2e7)
    }

    #[test]
    fn slot_map_is_row_major_without_44() {
        assert_eq!(slot(0, 0), Some(0));
        assert_eq!(slot(1, 3), Some(7));
        assert_eq!(slot(3, 1), Some(13));
        assert_eq!(slot(3, 3), None);
        for s in 0..DIM {
            let (i, j) = element(s);
            assert_eq!(slot(i, j), Some(s));
        }
    }

    #[test]
    fn inhomogeneity_has_two_entries() {
        let p = fig9().with_omega_polar(7e6, 0.4).with_splitting(3e6).with_zeeman(1e6);
        let sys = build_bloch(&p).unwrap();
        for s in 0..DIM {
            let v = sys.inhomogeneity[s];
            match s {
                7 => assert_relative_eq!((v - I * p.omega_rabi).norm(), 0.0, epsilon = 1e-6),
                13 => assert_relative_eq!((v + I * p.omega_rabi.conj()).norm(), 0.0, epsilon = 1e-6),
                _ => assert_eq!(v, ZERO),
            }
        }
    }

    #[test]
    fn zero_drive_gives_zero_inhomogeneity_and_is_rejected() {
        let p = SystemParams::new(1e7, 0.0, 0.0);
        let sys = build_bloch(&p).unwrap();
        assert!(sys.inhomogeneity.iter().all(|z| *z == ZERO));
        assert_eq!(steady_state(&sys).unwrap_err(), Error::SingularGenerator);
        assert_eq!(steady_state_analytic(&p).unwrap_err(), Error::SingularGenerator);
    }

    #[test]
    fn full_generator_preserves_trace() {
        let p = fig9().with_splitting(-4e6).with_zeeman(2e6);
        let l = full_generator(&p).unwrap();
        // d/dt Tr ρ = Σ_k L[kk, ·] = 0 for every column.
        for c in 0..16 {
            let s: Complex64 = (0..4).map(|k| l[(5 * k, c)]).sum();
            assert!(s.norm() < 1e-6, "column {c}: {s}");
        }
    }

    #[test]
    fn resonant_population() {
        let p = SystemParams::new(1e7, 1e7, 0.0);
        let ss = solve_steady(&p).unwrap();
        let expected = 0.5 * 1e14 / (0.25e14 + 2e14);
        assert_relative_eq!(ss.density.get(0, 0).re, expected, max_relative = 1e-12);
        assert_relative_eq!(ss.density.trace().re, 1.0, max_relative = 1e-14);
        assert!(ss.warning().is_none());
    }

    #[test]
    fn fig9_photon_rate() {
        let ss = solve_steady(&fig9()).unwrap();
        let rate = 1e7 * ss.density.excited_population();
        assert!((rate / 9.4e5 - 1.0).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn analytic_degenerate_relations() {
        let p = SystemParams::new(1e7, 3e7, 5e6);
        let a = steady_state_analytic(&p).unwrap();
        assert_relative_eq!((a.get(0, 2) + a.get(1, 3)).norm(), 0.0, epsilon = 1e-15);
        let p = SystemParams::new(1e7, 3e7, 2e6).with_splitting(4e6);
        let a = steady_state_analytic(&p).unwrap();
        assert_relative_eq!(a.get(2, 2).re, a.get(3, 3).re, max_relative = 1e-14);
    }

    #[test]
    fn numeric_matches_closed_form_fig2() {
        let p = SystemParams::new(1e7, 3e7, 5e6).with_splitting(-4e6).with_zeeman(3e6);
        let n = solve_steady(&p).unwrap().density;
        let a = steady_state_analytic(&p).unwrap();
        let scale = max_abs(&a.rho);
        for i in 0..4 {
            for j in 0..4 {
                let diff = (n.get(i, j) - a.get(i, j)).norm();
                assert!(diff <= 1e-10 * scale.max(a.get(i, j).norm()), "({i},{j}) diff {diff:e}");
            }
        }
        assert!(n.get(0, 3).norm() < 1e-14 && n.get(1, 2).norm() < 1e-14);
    }

    #[test]
    fn breakdown_identities() {
        for split in [0.0, -4e6, 3e7] {
            let p = SystemParams::new(1e7, 7e6, 2e7).with_splitting(split);
            let b = intensity_breakdown(&p).unwrap();
            assert_relative_eq!(b.i_coh_int, -b.i_inc_int, max_relative = 1e-10);
            assert_relative_eq!(b.sum(), b.i_total, max_relative = 1e-10);
            if split == 0.0 {
                assert_relative_eq!(b.i_coh_int, b.i_coh0, max_relative = 1e-10);
            }
        }
    }
}
