//! Dressed-state mixing angles and manifold splittings.

use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedFrame {
    /// Mixing angle of the 1-3 pair, in (0, π/2).
    pub theta1: f64,
    /// Mixing angle of the 2-4 pair, in (0, π/2).
    pub theta2: f64,
    pub phi: f64,
    /// Splitting `√(4|Ω|² + Δ²)`.
    pub omega1: f64,
    /// Splitting `√(4|Ω|² + (Δ − δ)²)`.
    pub omega2: f64,
}

pub fn dressed_frame(params: &SystemParams) -> Result<DressedFrame> {
    let om = params.omega_abs();
    if om == 0.0 {
        return Err(Error::Domain("dressed states need a non-zero drive".into()));
    }
    let d1 = params.detuning;
    let d2 = params.detuning - params.splitting_delta;
    Ok(DressedFrame {
        theta1: 0.5 * (2.0 * om).atan2(d1),
        theta2: 0.5 * (2.0 * om).atan2(d2),
        phi: params.omega_phase(),
        omega1: (4.0 * om * om + d1 * d1).sqrt(),
        omega2: (4.0 * om * om + d2 * d2).sqrt(),
    })
}

/// Predicted π sidebands `{−Ω₂, −Ω₁, +Ω₁, +Ω₂}` relative to the laser, ascending.
pub fn sideband_positions(params: &SystemParams) -> Result<[f64; 4]> {
    let f = dressed_frame(params)?;
    let (lo, hi) = if f.omega1 <= f.omega2 {
        (f.omega1, f.omega2)
    } else {
        (f.omega2, f.omega1)
    };
    Ok([-hi, -lo, lo, hi])
}

/// Distinct sideband positions, merging coincident pairs.
pub fn distinct_sidebands(params: &SystemParams) -> Result<Vec<f64>> {
    let mut v = sideband_positions(params)?.to_vec();
    v.dedup();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn resonant_symmetric() {
        let f = dressed_frame(&SystemParams::new(1e7, 6e7, 0.0)).unwrap();
        assert!((f.theta1 - FRAC_PI_4).abs() < 1e-15);
        assert!((f.theta2 - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(f.omega1, 1.2e8);
        assert_eq!(f.omega1, f.omega2);
    }

    #[test]
    fn fig4d_splittings() {
        let p = SystemParams::new(1e7, 6e7, -5e6).with_splitting(-8e7);
        let f = dressed_frame(&p).unwrap();
        assert!((f.omega1 - (4.0 * 3.6e15f64 + 2.5e13).sqrt()).abs() < 1e-6);
        assert!((f.omega1 / 1.2010e8 - 1.0).abs() < 1e-4);
        assert!((f.omega2 / 1.4151e8 - 1.0).abs() < 1e-4);
        let s = sideband_positions(&p).unwrap();
        assert_eq!(s, [-f.omega2, -f.omega1, f.omega1, f.omega2]);
    }

    #[test]
    fn angles_in_open_quarter_turn() {
        for d in [-1e9, -3e7, -1.0, 0.0, 1.0, 5e6, 1e9] {
            for split in [-1e8, 0.0, 2e7] {
                let p = SystemParams::new(1e7, 2e6, d).with_splitting(split);
                let f = dressed_frame(&p).unwrap();
                for th in [f.theta1, f.theta2] {
                    assert!(th > 0.0 && th < std::f64::consts::FRAC_PI_2);
                }
                assert!(((2.0 * f.theta1).tan() - 2.0 * 2e6 / d).abs() < 1e-6 * (2.0 * 2e6 / d).abs().max(1.0) || d == 0.0);
            }
        }
    }

    #[test]
    fn degenerate_and_strong_limits() {
        let p = SystemParams::new(1e7, 3e7, 4e6);
        assert_eq!(distinct_sidebands(&p).unwrap().len(), 2);
        let p = SystemParams::new(1e7, 1e12, 4e6).with_splitting(1e7);
        let s = sideband_positions(&p).unwrap();
        assert!((s[3] / 2e12 - 1.0).abs() < 1e-9 && (s[0] / -2e12 - 1.0).abs() < 1e-9);
        assert!(dressed_frame(&SystemParams::new(1e7, 0.0, 0.0)).is_err());
    }

    #[test]
    fn drive_phase_carried() {
        let p = SystemParams::new(1e7, 1.0, 0.0).with_omega_polar(2e7, 0.7);
        assert!((dressed_frame(&p).unwrap().phi - 0.7).abs() < 1e-15);
    }
}
