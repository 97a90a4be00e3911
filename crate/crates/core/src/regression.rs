//! Two-time correlation functions from the quantum regression theorem.
//!
//! The operator vector `L` is ordered so that `⟨L⟩` equals the Bloch vector:
//! slot `s` holding `ρ̃_pq` corresponds to `L_s = A_qp`. Fluctuations
//! `g^j(τ) = ⟨δL(τ) δL_j(0)⟩` obey `∂_τ g^j = M g^j`, so their Laplace
//! transform at `z` is `(z − M)⁻¹ g^j(0)`.

use num_complex::Complex64;

use crate::bloch::{element, slot, BlochSystem, DensityMatrix, RAISING};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Eigen, Factorized, DIM, I};

/// Radiating transitions, in the order of the raising operators `S₁⁺..S₄⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// 1-3, π
    Pi1,
    /// 2-4, π
    Pi2,
    /// 2-3, σ
    Sigma3,
    /// 1-4, σ
    Sigma4,
}

impl Transition {
    pub const ALL: [Transition; 4] = [
        Transition::Pi1,
        Transition::Pi2,
        Transition::Sigma3,
        Transition::Sigma4,
    ];

    pub fn index(self) -> usize {
        match self {
            Transition::Pi1 => 0,
            Transition::Pi2 => 1,
            Transition::Sigma3 => 2,
            Transition::Sigma4 => 3,
        }
    }

    /// Zero-based `(upper, lower)` levels.
    pub fn levels(self) -> (usize, usize) {
        RAISING[self.index()]
    }

    /// Slot `s` with `L_s = S⁺ = A_ul`.
    pub fn raising_slot(self) -> usize {
        let (u, l) = self.levels();
        slot(l, u).expect("transitions never involve the eliminated element")
    }

    /// Slot `s` with `L_s = S⁻ = A_lu`.
    pub fn lowering_slot(self) -> usize {
        let (u, l) = self.levels();
        slot(u, l).expect("transitions never involve the eliminated element")
    }

    pub fn is_pi(self) -> bool {
        matches!(self, Transition::Pi1 | Transition::Pi2)
    }
}

/// The operator `L_s` as a `(k, l)` pair meaning `A_kl`.
pub fn operator_of_slot(s: usize) -> (usize, usize) {
    let (p, q) = element(s);
    (q, p)
}

/// `⟨δL δL_j⟩` in steady state for one fixed source slot `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationVector {
    pub source: usize,
    pub values: CVector,
}

pub fn fluctuation_vector(rho: &DensityMatrix, source: usize) -> Result<FluctuationVector> {
    if source >= DIM {
        return Err(Error::Range(format!("slot {source} outside 0..{DIM}")));
    }
    let lj = operator_of_slot(source);
    let mean_j = rho.expect_transition(lj.0, lj.1);
    let values = CVector::from_fn(|i, _| {
        let li = operator_of_slot(i);
        rho.expect_product(li, lj) - rho.expect_transition(li.0, li.1) * mean_j
    });
    Ok(FluctuationVector { source, values })
}

/// Laplace-domain kernel `K^j` at one frequency offset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernel {
    pub source: usize,
    pub omega_tilde: f64,
    pub lambda: f64,
    pub values: CVector,
}

/// `(iω̃ + λ)·1 − M`.
pub fn shifted_generator(system: &BlochSystem, omega_tilde: f64, lambda: f64) -> CMatrix {
    let z = I * omega_tilde + lambda;
    CMatrix::from_diagonal_element(z) - system.matrix
}

/// Factorised resolvent at one frequency; reused for several source vectors.
pub struct Resolvent {
    pub omega_tilde: f64,
    pub lambda: f64,
    lu: Factorized,
}

impl Resolvent {
    pub fn new(system: &BlochSystem, omega_tilde: f64, lambda: f64) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::Domain(format!("filter bandwidth must be >= 0, got {lambda}")));
        }
        let lu = Factorized::new(shifted_generator(system, omega_tilde, lambda)).map_err(|_| {
            Error::SingularSystem(format!(
                "shifted generator singular at omega_tilde = {omega_tilde:e}, lambda = {lambda:e}"
            ))
        })?;
        Ok(Self {
            omega_tilde,
            lambda,
            lu,
        })
    }

    pub fn kernel(&self, r: &FluctuationVector) -> Result<CorrelationKernel> {
        Ok(CorrelationKernel {
            source: r.source,
            omega_tilde: self.omega_tilde,
            lambda: self.lambda,
            values: self.lu.solve(&r.values)?,
        })
    }
}

pub fn correlation_kernel(
    system: &BlochSystem,
    r: &FluctuationVector,
    omega_tilde: f64,
    lambda: f64,
) -> Result<CorrelationKernel> {
    Resolvent::new(system, omega_tilde, lambda)?.kernel(r)
}

/// Source vectors `R^j` for the lowering operators of all four transitions.
#[derive(Debug, Clone)]
pub struct TransitionSources {
    vectors: [FluctuationVector; 4],
}

impl TransitionSources {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let v = |t: Transition| fluctuation_vector(rho, t.lowering_slot());
        Ok(Self {
            vectors: [
                v(Transition::Pi1)?,
                v(Transition::Pi2)?,
                v(Transition::Sigma3)?,
                v(Transition::Sigma4)?,
            ],
        })
    }

    /// Source for `δS_j⁻`.
    pub fn lowering(&self, j: Transition) -> &FluctuationVector {
        &self.vectors[j.index()]
    }
}

/// `∫₀^∞ e^{−(iω̃+λ)τ} ⟨δS_i⁺(τ) δS_j⁻⟩ dτ` for every ordered pair `(i, j)`.
pub fn fluctuation_spectra(
    resolvent: &Resolvent,
    sources: &TransitionSources,
    pairs: &[(Transition, Transition)],
) -> Result<Vec<Complex64>> {
    let mut cache: [Option<CVector>; 4] = [None, None, None, None];
    let mut out = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        let k = match &cache[j.index()] {
            Some(k) => *k,
            None => {
                let k = resolvent.kernel(sources.lowering(j))?.values;
                cache[j.index()] = Some(k);
                k
            }
        };
        out.push(k[i.raising_slot()]);
    }
    Ok(out)
}

/// Time evolution `g(τ) = e^{Mτ} g(0)`.
#[derive(Debug, Clone)]
pub enum Propagator {
    Eigen(Eigen),
    Rk4 { matrix: CMatrix, dt: f64 },
}

/// Eigenvector condition numbers above this switch propagation to RK4.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e8;

impl Propagator {
    pub fn new(system: &BlochSystem) -> Self {
        match Eigen::new(&system.matrix) {
            Ok(e) if e.condition < EIGEN_CONDITION_LIMIT => Propagator::Eigen(e),
            _ => Self::rk4(system),
        }
    }

    pub fn rk4(system: &BlochSystem) -> Self {
        let p = &system.params;
        let mut scale = p.gamma;
        if p.omega_abs() > 0.0 {
            scale = scale.max(p.omega_abs());
        }
        scale = scale.max(p.detuning.abs() + p.splitting_delta.abs() + p.zeeman_b.abs() + 1.0);
        Propagator::Rk4 {
            matrix: system.matrix,
            dt: 0.01 / scale,
        }
    }

    pub fn is_eigen(&self) -> bool {
        matches!(self, Propagator::Eigen(_))
    }

    /// `g(τ)` on an ascending grid of non-negative delays.
    pub fn evolve(&self, initial: &CVector, taus: &[f64]) -> Result<Vec<CVector>> {
        if taus.iter().any(|t| *t < 0.0 || !t.is_finite()) {
            return Err(Error::Domain("delays must be finite and non-negative".into()));
        }
        if taus.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("delays must be ascending".into()));
        }
        match self {
            Propagator::Eigen(e) => {
                let coeffs = e.inverse * initial;
                Ok(taus
                    .iter()
                    .map(|&t| {
                        let c = CVector::from_fn(|k, _| coeffs[k] * (e.values[k] * t).exp());
                        e.vectors * c
                    })
                    .collect())
            }
            Propagator::Rk4 { matrix, dt } => {
                let mut out = Vec::with_capacity(taus.len());
                let mut g = *initial;
                let mut t = 0.0;
                for &target in taus {
                    while t < target {
                        let h = (*dt).min(target - t);
                        g = rk4_step(matrix, &g, h);
                        t += h;
                        if target - t < 1e-12 * dt {
                            t = target;
                        }
                    }
                    out.push(g);
                }
                Ok(out)
            }
        }
    }
}

fn rk4_step(m: &CMatrix, g: &CVector, h: f64) -> CVector {
    let k1 = m * g;
    let k2 = m * (g + k1 * Complex64::from(h / 2.0));
    let k3 = m * (g + k2 * Complex64::from(h / 2.0));
    let k4 = m * (g + k3 * Complex64::from(h));
    g + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0)
}

/// `⟨δS_i⁺(τ) δS_j⁻(0)⟩` on a delay grid.
pub fn fluctuation_average(
    propagator: &Propagator,
    rho: &DensityMatrix,
    i: Transition,
    j: Transition,
    taus: &[f64],
) -> Result<Vec<Complex64>> {
    let r = fluctuation_vector(rho, j.lowering_slot())?;
    let slot_i = i.raising_slot();
    Ok(propagator
        .evolve(&r.values, taus)?
        .into_iter()
        .map(|g| g[slot_i])
        .collect())
}

/// Damping weight multiplying `⟨S_i⁺(τ) S_j⁻⟩` in the emitted field correlation.
pub fn pair_weight(system: &BlochSystem, i: Transition, j: Transition) -> f64 {
    let r = &system.rates;
    match (i.is_pi(), j.is_pi()) {
        (true, true) => r.pi_matrix()[i.index()][j.index()],
        (false, false) => r.gamma_sigma,
        _ => 0.0,
    }
}

/// `G_ij(τ) = γ_ij ⟨S_i⁺(τ) S_j⁻(0)⟩`; for `(Pi1, Pi2)` this is
/// `−√(γ₁γ₂)⟨S₁⁺(τ)S₂⁻⟩`.
pub fn time_correlation(
    system: &BlochSystem,
    rho: &DensityMatrix,
    i: Transition,
    j: Transition,
    taus: &[f64],
) -> Result<Vec<Complex64>> {
    let propagator = Propagator::new(system);
    time_correlation_with(&propagator, system, rho, i, j, taus)
}

pub fn time_correlation_with(
    propagator: &Propagator,
    system: &BlochSystem,
    rho: &DensityMatrix,
    i: Transition,
    j: Transition,
    taus: &[f64],
) -> Result<Vec<Complex64>> {
    let w = pair_weight(system, i, j);
    let means = rho.raising_mean(i.index()) * rho.raising_mean(j.index()).conj();
    Ok(fluctuation_average(propagator, rho, i, j, taus)?
        .into_iter()
        .map(|f| (f + means) * w)
        .collect())
}

/// `G_ij(∞) = γ_ij ⟨S_i⁺⟩⟨S_j⁻⟩`.
pub fn correlation_limit(system: &BlochSystem, rho: &DensityMatrix, i: Transition, j: Transition) -> Complex64 {
    rho.raising_mean(i.index()) * rho.raising_mean(j.index()).conj() * pair_weight(system, i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{build_bloch, steady_state, transition, Operator};
    use crate::model::SystemParams;

    fn fig2() -> SystemParams {
        SystemParams::new(1e7, 3e7, 5e6)
    }

    fn setup(p: &SystemParams) -> (BlochSystem, DensityMatrix) {
        let sys = build_bloch(p).unwrap();
        let rho = steady_state(&sys).unwrap().density;
        (sys, rho)
    }

    #[test]
    fn correspondence_slots() {
        // one-based: S1+ -> 9, S2+ -> 14, S3+ -> 10, S4+ -> 13; S1- -> 3, S2- -> 8, S3- -> 7, S4- -> 4
        let one = |s: usize| s + 1;
        assert_eq!(one(Transition::Pi1.raising_slot()), 9);
        assert_eq!(one(Transition::Pi2.raising_slot()), 14);
        assert_eq!(one(Transition::Sigma3.raising_slot()), 10);
        assert_eq!(one(Transition::Sigma4.raising_slot()), 13);
        assert_eq!(one(Transition::Pi1.lowering_slot()), 3);
        assert_eq!(one(Transition::Pi2.lowering_slot()), 8);
        assert_eq!(one(Transition::Sigma3.lowering_slot()), 7);
        assert_eq!(one(Transition::Sigma4.lowering_slot()), 4);
    }

    #[test]
    fn fluctuation_vector_brute_force() {
        let p = fig2().with_splitting(-4e6).with_zeeman(1e6);
        let (_, rho) = setup(&p);
        let op = |(k, l): (usize, usize)| -> Operator { transition(k, l) };
        let expect = |a: &Operator| -> Complex64 { (a * rho.rho).trace() };
        for j in 0..DIM {
            let r = fluctuation_vector(&rho, j).unwrap();
            let lj = op(operator_of_slot(j));
            for i in 0..DIM {
                let li = op(operator_of_slot(i));
                let brute = expect(&(li * lj)) - expect(&li) * expect(&lj);
                assert!((brute - r.values[i]).norm() < 1e-15, "i={i} j={j}");
            }
        }
        assert!(fluctuation_vector(&rho, DIM).is_err());
    }

    #[test]
    fn cross_pi_source_at_zero_delay() {
        let (_, rho) = setup(&fig2());
        let r = fluctuation_vector(&rho, Transition::Pi2.lowering_slot()).unwrap();
        let s1 = rho.raising_mean(0);
        let s2m = rho.raising_mean(1).conj();
        assert!((r.values[Transition::Pi1.raising_slot()] + s1 * s2m).norm() < 1e-15);
        let r = fluctuation_vector(&rho, Transition::Pi1.lowering_slot()).unwrap();
        let diag = r.values[Transition::Pi1.raising_slot()];
        assert!((diag.re - (rho.get(0, 0).re - s1.norm_sqr())).abs() < 1e-15);
    }

    #[test]
    fn kernel_solves_shifted_system() {
        let (sys, rho) = setup(&fig2());
        let r = fluctuation_vector(&rho, 7).unwrap();
        for (w, lam) in [(0.0, 0.0), (3e7, 0.0), (-1e8, 5e6)] {
            let k = correlation_kernel(&sys, &r, w, lam).unwrap();
            let resid = shifted_generator(&sys, w, lam) * k.values - r.values;
            assert!(resid.norm() < 1e-12 * r.values.norm());
        }
        assert!(correlation_kernel(&sys, &r, 0.0, -1.0).is_err());
    }

    #[test]
    fn kernel_vanishes_for_large_bandwidth() {
        let (sys, rho) = setup(&fig2());
        let r = fluctuation_vector(&rho, 2).unwrap();
        let k = correlation_kernel(&sys, &r, 0.0, 1e15).unwrap();
        assert!(k.values.norm() < 1e-14);
    }

    #[test]
    fn g12_vanishes_at_zero_and_saturates() {
        let (sys, rho) = setup(&fig2());
        let taus = [0.0, 10.0 / 1e7, 20.0 / 1e7, 40.0 / 1e7];
        let g = time_correlation(&sys, &rho, Transition::Pi1, Transition::Pi2, &taus).unwrap();
        let lim = correlation_limit(&sys, &rho, Transition::Pi1, Transition::Pi2);
        assert!(g[0].norm() < 1e-12 * lim.norm());
        let dev: Vec<f64> = g[1..].iter().map(|x| (x / lim - 1.0).norm()).collect();
        assert!(dev[0] > dev[1] && dev[1] > dev[2]);
        assert!(dev[2] < 1e-6);
    }

    #[test]
    fn eigen_and_rk4_agree() {
        let p = fig2().with_splitting(-4e6);
        let (sys, rho) = setup(&p);
        let eig = Propagator::new(&sys);
        let rk = Propagator::rk4(&sys);
        let taus: Vec<f64> = (0..20).map(|k| k as f64 * 1e-7).collect();
        let a = fluctuation_average(&eig, &rho, Transition::Pi1, Transition::Pi2, &taus).unwrap();
        let b = fluctuation_average(&rk, &rho, Transition::Pi1, Transition::Pi2, &taus).unwrap();
        let scale = a[0].norm();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-6 * scale);
        }
    }

    #[test]
    fn rejects_descending_delays() {
        let (sys, _) = setup(&fig2());
        let p = Propagator::rk4(&sys);
        assert!(p.evolve(&CVector::zeros(), &[1.0, 0.5]).is_err());
        assert!(p.evolve(&CVector::zeros(), &[-1.0]).is_err());
    }
}
