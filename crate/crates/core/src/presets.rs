//! Named parameter sets for the reference figures.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::model::SystemParams;
use crate::spectra::{minimum_interference_splitting, zero_interference_splitting};

pub const GAMMA: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig6a,
    Fig6b,
    Fig7a,
    Fig7b,
    Fig9a,
    Fig9b,
    Fig9c,
    Fig9d,
}

/// What a figure plots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FigureKind {
    /// `G₁₂(τ)/G₁₂(∞)`.
    Correlation,
    /// `C(δ)` against the splitting, one curve per detuning.
    InterferenceSweep { detunings: [f64; 2] },
    /// π spectrum with and without interference terms.
    PiSpectrum,
    /// σ spectrum together with the two-level reference.
    SigmaSpectrum,
    /// Filtered π spectrum with and without interference terms.
    FilteredPi { lambda: f64 },
}

impl Figure {
    pub const ALL: [Figure; 14] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4a,
        Figure::Fig4b,
        Figure::Fig4c,
        Figure::Fig4d,
        Figure::Fig6a,
        Figure::Fig6b,
        Figure::Fig7a,
        Figure::Fig7b,
        Figure::Fig9a,
        Figure::Fig9b,
        Figure::Fig9c,
        Figure::Fig9d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
            Figure::Fig4c => "fig4c",
            Figure::Fig4d => "fig4d",
            Figure::Fig6a => "fig6a",
            Figure::Fig6b => "fig6b",
            Figure::Fig7a => "fig7a",
            Figure::Fig7b => "fig7b",
            Figure::Fig9a => "fig9a",
            Figure::Fig9b => "fig9b",
            Figure::Fig9c => "fig9c",
            Figure::Fig9d => "fig9d",
        }
    }

    pub fn kind(self) -> FigureKind {
        match self {
            Figure::Fig2 => FigureKind::Correlation,
            Figure::Fig3 => FigureKind::InterferenceSweep {
                detunings: [-4e7, -5e6],
            },
            Figure::Fig4a | Figure::Fig4b | Figure::Fig4c | Figure::Fig4d => FigureKind::PiSpectrum,
            Figure::Fig6a | Figure::Fig6b => FigureKind::PiSpectrum,
            Figure::Fig7a | Figure::Fig7b => FigureKind::SigmaSpectrum,
            Figure::Fig9a => FigureKind::FilteredPi { lambda: 1e2 },
            Figure::Fig9b => FigureKind::FilteredPi { lambda: 1e4 },
            Figure::Fig9c => FigureKind::FilteredPi { lambda: 1.9e6 },
            Figure::Fig9d => FigureKind::FilteredPi { lambda: 1e7 },
        }
    }

    /// Parameter set of the main curve. For `fig3` the first detuning is used.
    pub fn params(self) -> SystemParams {
        let g = GAMMA;
        match self {
            Figure::Fig2 => SystemParams::new(g, 3e7, 5e6),
            Figure::Fig3 => SystemParams::new(g, 6e6, -4e7),
            Figure::Fig4a => SystemParams::new(g, 6e6, -4e7).with_splitting(-4e6),
            Figure::Fig4b => {
                SystemParams::new(g, 6e6, -4e7).with_splitting(zero_interference_splitting(g, -4e7))
            }
            Figure::Fig4c => SystemParams::new(g, 6e6, -4e7)
                .with_splitting(minimum_interference_splitting(g, -4e7)),
            Figure::Fig4d => SystemParams::new(g, 6e7, -5e6).with_splitting(-8e7),
            Figure::Fig6a => SystemParams::new(g, 5e7, 0.0),
            Figure::Fig6b => SystemParams::new(g, 1e7, 2e7),
            Figure::Fig7a => SystemParams::new(g, 5e6, 6e6),
            Figure::Fig7b => SystemParams::new(g, 6e7, 0.0),
            Figure::Fig9a | Figure::Fig9b | Figure::Fig9c | Figure::Fig9d => {
                SystemParams::new(g, 7e6, 2e7)
            }
        }
    }

    /// Extra reference curves drawn in the same panel.
    pub fn companions(self) -> Vec<(&'static str, SystemParams)> {
        match self {
            Figure::Fig4a => vec![("degenerate", self.params().with_splitting(0.0))],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown figure '{s}'")))
    }
}

/// Every parameter set that appears in a figure, labelled.
pub fn all_parameter_sets() -> Vec<(String, SystemParams)> {
    let mut out = Vec::new();
    for f in Figure::ALL {
        if let FigureKind::InterferenceSweep { detunings } = f.kind() {
            for d in detunings {
                out.push((format!("{f} detuning={d:e}"), SystemParams::new(GAMMA, 6e6, d)));
            }
            continue;
        }
        if matches!(f, Figure::Fig9b | Figure::Fig9c | Figure::Fig9d) {
            continue;
        }
        out.push((f.name().to_string(), f.params()));
        for (label, p) in f.companions() {
            out.push((format!("{f} {label}"), p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!("fig5".parse::<Figure>().is_err());
    }

    #[test]
    fn computed_splittings() {
        assert_eq!(Figure::Fig4b.params().splitting_delta, -4.0625e7);
        assert_eq!(Figure::Fig4c.params().splitting_delta, -8.125e7);
    }

    #[test]
    fn every_set_is_valid() {
        for (_, p) in all_parameter_sets() {
            p.validate().unwrap();
        }
    }
}
