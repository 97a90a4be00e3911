//! Physical parameters of the driven J=1/2 to J=1/2 atom.
//!
//! Levels are labelled as in the usual convention for this scheme: `|1>`, `|2>`
//! are the excited Zeeman sublevels, `|3>`, `|4>` the ground sublevels. The π
//! transitions are 1-3 and 2-4, the σ transitions 1-4 and 2-3. All rates and
//! frequencies are angular frequencies in s⁻¹.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

const BRANCHING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Total decay rate of each excited state.
    pub gamma: f64,
    pub b_pi: f64,
    pub b_sigma: f64,
    /// Complex Rabi frequency; its argument is the drive phase.
    pub omega_rabi: Complex64,
    /// Laser detuning from the 1-3 resonance.
    pub detuning: f64,
    /// Difference of the two π resonance frequencies, ω₂ − ω₁.
    pub splitting_delta: f64,
    /// Zeeman shift of the ground doublet.
    pub zeeman_b: f64,
}

impl SystemParams {
    /// Degenerate system with Clebsch-Gordan branching (1/3, 2/3) and a real drive.
    pub fn new(gamma: f64, omega: f64, detuning: f64) -> Self {
        Self {
            gamma,
            b_pi: 1.0 / 3.0,
            b_sigma: 2.0 / 3.0,
            omega_rabi: Complex64::new(omega, 0.0),
            detuning,
            splitting_delta: 0.0,
            zeeman_b: 0.0,
        }
    }

    pub fn with_splitting(mut self, delta: f64) -> Self {
        self.splitting_delta = delta;
        self
    }

    pub fn with_zeeman(mut self, b: f64) -> Self {
        self.zeeman_b = b;
        self
    }

    pub fn with_branching(mut self, b_pi: f64, b_sigma: f64) -> Self {
        self.b_pi = b_pi;
        self.b_sigma = b_sigma;
        self
    }

    pub fn with_omega_polar(mut self, magnitude: f64, phase: f64) -> Self {
        self.omega_rabi = Complex64::from_polar(magnitude, phase);
        self
    }

    pub fn omega_abs(&self) -> f64 {
        self.omega_rabi.norm()
    }

    pub fn omega_phase(&self) -> f64 {
        self.omega_rabi.arg()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.b_pi,
            self.b_sigma,
            self.omega_rabi.re,
            self.omega_rabi.im,
            self.detuning,
            self.splitting_delta,
            self.zeeman_b,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.b_pi < 0.0 || self.b_sigma < 0.0 {
            return Err(Error::InvalidParams(
                "branching probabilities must be non-negative".into(),
            ));
        }
        if (self.b_pi + self.b_sigma - 1.0).abs() > BRANCHING_TOL {
            return Err(Error::InvalidParams(format!(
                "b_pi + b_sigma must equal 1, got {}",
                self.b_pi + self.b_sigma
            )));
        }
        Ok(())
    }
}

/// Spontaneous decay constants entering the damping term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_sigma: f64,
    /// Cross-damping between the anti-parallel π dipoles (negative).
    pub gamma12: f64,
}

impl DecayRates {
    /// The 2×2 π damping matrix `γ_ij`.
    pub fn pi_matrix(&self) -> [[f64; 2]; 2] {
        [[self.gamma1, self.gamma12], [self.gamma12, self.gamma2]]
    }
}

pub fn derive_rates(params: &SystemParams) -> Result<DecayRates> {
    params.validate()?;
    let gamma1 = params.b_pi * params.gamma;
    let gamma2 = params.b_pi * params.gamma;
    let gamma_sigma = params.b_sigma * params.gamma;
    // d1 and d2 are anti-parallel, see `dipole_alignment`.
    Ok(DecayRates {
        gamma1,
        gamma2,
        gamma_sigma,
        gamma12: -(gamma1 * gamma2).sqrt(),
    })
}

/// Normalised overlap `Re(d_i·d_j*) / (|d_i||d_j|)`.
pub fn dipole_alignment(a: &Vector3<Complex64>, b: &Vector3<Complex64>) -> f64 {
    herm_dot(a, b).re / (a.norm() * b.norm())
}

/// Transition dipole moments in units of the reduced matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSet {
    /// ⟨1|d|3⟩
    pub d1: Vector3<Complex64>,
    /// ⟨2|d|4⟩
    pub d2: Vector3<Complex64>,
    /// ⟨2|d|3⟩
    pub d3: Vector3<Complex64>,
    /// ⟨1|d|4⟩
    pub d4: Vector3<Complex64>,
}

pub fn dipole_moments(reduced_element: f64) -> DipoleSet {
    let zero = Complex64::new(0.0, 0.0);
    let d = reduced_element;
    let d1 = Vector3::new(zero, zero, Complex64::new(-d / 3f64.sqrt(), 0.0));
    let d2 = -d1;
    // sqrt(2/3) D (e_x - i e_y)/sqrt(2)
    let c = (2.0f64 / 3.0).sqrt() * d / 2f64.sqrt();
    let d3 = Vector3::new(Complex64::new(c, 0.0), Complex64::new(0.0, -c), zero);
    let d4 = d3.map(|z| z.conj());
    DipoleSet { d1, d2, d3, d4 }
}

pub(crate) fn herm_dot(a: &Vector3<Complex64>, b: &Vector3<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rates_from_branching() {
        let p = SystemParams::new(1e7, 1e7, 0.0);
        let r = derive_rates(&p).unwrap();
        assert_relative_eq!(r.gamma1, 1e7 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(r.gamma2, 1e7 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(r.gamma12, -1e7 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.gamma_sigma, 2e7 / 3.0, max_relative = 1e-15);
        assert_eq!(r.gamma1 + r.gamma_sigma, 1e7);
    }

    #[test]
    fn pure_pi_branching() {
        let p = SystemParams::new(1e7, 1e7, 0.0).with_branching(1.0, 0.0);
        let r = derive_rates(&p).unwrap();
        assert_relative_eq!(r.gamma12, -1e7, max_relative = 1e-12);
        assert_eq!(r.gamma_sigma, 0.0);
    }

    #[test]
    fn rejects_bad_branching() {
        let p = SystemParams::new(1e7, 1e7, 0.0).with_branching(0.5, 0.6);
        assert!(matches!(derive_rates(&p), Err(Error::InvalidParams(_))));
        let p = SystemParams::new(-1.0, 1e7, 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dipoles_follow_wigner_eckart() {
        let d = dipole_moments(1.0);
        assert_relative_eq!(d.d1[2].re, -1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_eq!(d.d2, -d.d1.clone());
        assert_relative_eq!(herm_dot(&d.d3, &d.d3).re, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(herm_dot(&d.d1, &d.d1).re, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(herm_dot(&d.d1, &d.d4).norm(), 0.0);
        assert_eq!(d.d4, d.d3.map(|z| z.conj()));
        assert_relative_eq!(dipole_alignment(&d.d1, &d.d2), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn anti_parallel_cross_damping() {
        for b_pi in [0.1, 1.0 / 3.0, 0.9] {
            let p = SystemParams::new(3e6, 1e6, 0.0).with_branching(b_pi, 1.0 - b_pi);
            let r = derive_rates(&p).unwrap();
            assert_eq!(r.gamma12 / (r.gamma1 * r.gamma2).sqrt(), -1.0);
            assert_eq!(r.gamma1 + r.gamma_sigma, r.gamma2 + r.gamma_sigma);
        }
    }
}
