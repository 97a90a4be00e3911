//! Resonance-fluorescence spectra of the π and σ channels.
//!
//! All spectra are functions of the offset `ω̃ = ω − ω_L` from the laser
//! frequency. For an ideal detector (`λ = 0`) the elastic Rayleigh line is a
//! δ-function and is kept as a separate weight, never sampled onto the grid.
//! Widths are half-widths at half maximum throughout.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bloch::{build_bloch, steady_state, BlochSystem, DensityMatrix, IntensityBreakdown};
use crate::error::{Error, Result};
use crate::exec::{try_map, Execution};
use crate::linalg::I;
use crate::model::SystemParams;
use crate::regression::{Resolvent, Transition, TransitionSources};

/// Number of uniform points in the automatic grid.
pub const AUTO_GRID_POINTS: usize = 4001;
/// Points per decade of the logarithmic refinement around `ω̃ = 0`.
const REFINE_PER_DECADE: usize = 40;
/// Roundoff-level negative densities above this (relative to the trace scale) are clipped.
pub const NEGATIVE_CLIP: f64 = 1e-12;
/// Saturation below which the weak-drive asymptotic formulas are trusted.
pub const ASYMPTOTIC_S_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Pi,
    Sigma,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Pi => "pi",
            Channel::Sigma => "sigma",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Weight of the δ(ω̃) Rayleigh component, not included in `values`.
    pub coherent_weight: f64,
    pub channel: Channel,
    pub interference_included: bool,
    /// Filter bandwidth; 0 for an ideal detector.
    pub filter_lambda: f64,
}

impl SpectrumTrace {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation of the density at `omega`.
    pub fn value_at(&self, omega: f64) -> Option<f64> {
        let g = &self.grid;
        if g.is_empty() || omega < g[0] || omega > g[g.len() - 1] {
            return None;
        }
        let k = g.partition_point(|x| *x < omega);
        if k < g.len() && g[k] == omega {
            return Some(self.values[k]);
        }
        let (a, b) = (k - 1, k);
        let t = (omega - g[a]) / (g[b] - g[a]);
        Some(self.values[a] + t * (self.values[b] - self.values[a]))
    }

    /// Pointwise scaled copy, weights included.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.coherent_weight *= factor;
        out
    }

    /// `self − other` on a shared grid; the result keeps `self`'s metadata.
    /// Negative values are allowed here.
    pub fn difference(&self, other: &SpectrumTrace) -> Result<SpectrumTrace> {
        if self.grid != other.grid {
            return Err(Error::Structure("traces are sampled on different grids".into()));
        }
        let mut out = self.clone();
        for (v, o) in out.values.iter_mut().zip(&other.values) {
            *v -= o;
        }
        out.coherent_weight -= other.coherent_weight;
        Ok(out)
    }
}

/// Saturation parameter `s = 2|Ω|²/(Δ² + γ²/4)`.
pub fn saturation(params: &SystemParams) -> f64 {
    2.0 * params.omega_rabi.norm_sqr() / (params.detuning.powi(2) + params.gamma.powi(2) / 4.0)
}

/// Relative weight of the interference term in the Rayleigh line, closed form.
pub fn interference_weight(params: &SystemParams) -> f64 {
    let g2 = params.gamma * params.gamma / 4.0;
    let d = params.detuning;
    let s = params.splitting_delta;
    (g2 + d * (d - s)) / (g2 + s * s / 4.0 + (d - s / 2.0).powi(2))
}

/// Splitting at which the interference weight crosses zero.
pub fn zero_interference_splitting(gamma: f64, detuning: f64) -> f64 {
    detuning * (1.0 + gamma * gamma / (4.0 * detuning * detuning))
}

/// Splitting at which the interference weight is minimal.
pub fn minimum_interference_splitting(gamma: f64, detuning: f64) -> f64 {
    2.0 * zero_interference_splitting(gamma, detuning)
}

/// Minimum of the interference weight, `−1/(1 + γ²/(2Δ²))`.
pub fn minimum_interference_weight(gamma: f64, detuning: f64) -> f64 {
    -1.0 / (1.0 + gamma * gamma / (2.0 * detuning * detuning))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentWeight {
    /// `|√γ₁⟨S₁⁺⟩ − √γ₂⟨S₂⁺⟩|²`
    pub weight: f64,
    /// Closed-form interference weight `C(δ)`.
    pub c_value: f64,
    /// `I_coh^int / I_coh⁰` from the numerical steady state.
    pub c_numeric: f64,
    pub i_coh0: f64,
}

pub fn coherent_pi_weight(params: &SystemParams) -> Result<CoherentWeight> {
    let system = build_bloch(params)?;
    let rho = steady_state(&system)?.density;
    let r = &system.rates;
    let amp = rho.raising_mean(0) * r.gamma1.sqrt() - rho.raising_mean(1) * r.gamma2.sqrt();
    let b = IntensityBreakdown::from_state(params, r, &rho);
    Ok(CoherentWeight {
        weight: amp.norm_sqr(),
        c_value: interference_weight(params),
        c_numeric: b.i_coh_int / b.i_coh0,
        i_coh0: b.i_coh0,
    })
}

/// Asymptotic weight and width of a weak-drive narrow peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPeak {
    pub weight: f64,
    pub width: f64,
    pub saturation: f64,
    /// False when `s ≥ 0.2`, where the expansion is not trusted.
    pub valid: bool,
}

/// Narrow central peak of the π spectrum without interference terms
/// (branching `b_π = 1/3` only).
pub fn narrow_peak_asymptotics_pi(params: &SystemParams) -> Result<AsymptoticPeak> {
    params.validate()?;
    if (params.b_pi - 1.0 / 3.0).abs() > 1e-12 {
        return Err(Error::Domain(
            "the π narrow-peak asymptotics hold for b_pi = 1/3 only".into(),
        ));
    }
    let s = saturation(params);
    let g = params.gamma;
    Ok(AsymptoticPeak {
        weight: g / 12.0 * (1.0 - 2.0 * s) * s,
        width: 2.0 * g / 9.0 * (3.0 - 5.0 * s) * s,
        saturation: s,
        valid: s < ASYMPTOTIC_S_LIMIT,
    })
}

/// Narrow central peak of the σ spectrum.
pub fn sigma_peak_asymptotics(params: &SystemParams) -> Result<AsymptoticPeak> {
    params.validate()?;
    let s = saturation(params);
    let (g, b) = (params.gamma, params.b_sigma);
    Ok(AsymptoticPeak {
        weight: b * g / 2.0 * (1.0 - 2.0 * s) * s,
        width: b * g / 4.0 * (2.0 - (2.0 + b) * s) * s,
        saturation: s,
        valid: s < ASYMPTOTIC_S_LIMIT,
    })
}

/// Weight of the σ narrow peak from the steady state, `4 b_σ γ |ρ̃₁₃|²`.
pub fn sigma_peak_weight(params: &SystemParams) -> Result<f64> {
    let rho = steady_state(&build_bloch(params)?)?.density;
    Ok(4.0 * params.b_sigma * params.gamma * rho.get(0, 2).norm_sqr())
}

/// How the grid is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Auto,
    Uniform { min: f64, max: f64, points: usize },
}

impl GridSpec {
    pub fn resolve(&self, params: &SystemParams) -> Result<Vec<f64>> {
        match *self {
            GridSpec::Auto => Ok(default_grid(params)),
            GridSpec::Uniform { min, max, points } => uniform_grid(min, max, points),
        }
    }
}

pub fn uniform_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || max <= min {
        return Err(Error::Domain(format!("invalid grid range [{min}, {max}]")));
    }
    if points < 3 {
        return Err(Error::Domain("a grid needs at least 3 points".into()));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k == points - 1 { max } else { min + step * k as f64 })
        .collect())
}

/// Half-extent of the automatic grid, `max(3γ, 1.5·max(Ω₁, Ω₂))`.
pub fn default_half_width(params: &SystemParams) -> f64 {
    let om2 = 4.0 * params.omega_rabi.norm_sqr();
    let o1 = (om2 + params.detuning.powi(2)).sqrt();
    let o2 = (om2 + (params.detuning - params.splitting_delta).powi(2)).sqrt();
    (3.0 * params.gamma).max(1.5 * o1.max(o2))
}

/// Smallest feature width the automatic grid resolves.
pub fn default_finest_scale(params: &SystemParams) -> f64 {
    let s = saturation(params);
    let g = params.gamma;
    let gamma_pi = 2.0 * g / 9.0 * (3.0 - 5.0 * s) * s;
    let gamma_sigma = params.b_sigma * g / 4.0 * (2.0 - (2.0 + params.b_sigma) * s) * s;
    let narrowest = [gamma_pi, gamma_sigma, g * s * s]
        .into_iter()
        .filter(|w| *w > 0.0 && w.is_finite())
        .fold(f64::INFINITY, f64::min);
    let floor = 1e-9 * g;
    if narrowest.is_finite() {
        (narrowest / 10.0).max(floor)
    } else {
        floor
    }
}

/// Uniform grid over `±half` with `points` samples whose centre is replaced
/// by a logarithmic sub-grid reaching down to `finest`. The sub-grid spans
/// ten uniform steps on each side so that features of width comparable to the
/// step are still resolved.
pub fn refined_grid(half: f64, points: usize, finest: f64) -> Result<Vec<f64>> {
    if !(finest > 0.0 && finest.is_finite()) {
        return Err(Error::Domain(format!("finest grid scale must be > 0, got {finest}")));
    }
    let mut grid = uniform_grid(-half, half, points)?;
    let step = 2.0 * half / (points - 1) as f64;
    let top = (10.0 * step).min(half);
    if finest < top {
        grid.retain(|x| x.abs() >= top);
        let decades = (top / finest).log10();
        let n = (decades * REFINE_PER_DECADE as f64).ceil() as usize;
        let ratio = 10f64.powf(decades / n as f64);
        let mut w = finest;
        for _ in 0..n {
            grid.push(w);
            grid.push(-w);
            w *= ratio;
        }
    }
    grid.push(0.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-12 * half;
    grid.dedup_by(|a, b| (*a - *b).abs() <= tol);
    Ok(grid)
}

/// Automatic grid: `±default_half_width`, refined down to `default_finest_scale`.
pub fn default_grid(params: &SystemParams) -> Vec<f64> {
    refined_grid(
        default_half_width(params),
        AUTO_GRID_POINTS,
        default_finest_scale(params),
    )
    .expect("automatic grid parameters are positive")
}

/// Automatic grid for a filter of bandwidth `lambda`, refined down to `λ/10`.
pub fn filtered_grid(params: &SystemParams, lambda: f64) -> Result<Vec<f64>> {
    refined_grid(
        default_half_width(params),
        AUTO_GRID_POINTS,
        default_finest_scale(params).min(lambda / 10.0),
    )
}

/// Wide grid spanning `±20·max(γ, Ω₁, Ω₂)` for total-power integrals: the
/// automatic grid in the centre, coarser uniform wings outside it.
pub fn integration_grid(params: &SystemParams) -> Vec<f64> {
    let om2 = 4.0 * params.omega_rabi.norm_sqr();
    let o1 = (om2 + params.detuning.powi(2)).sqrt();
    let o2 = (om2 + (params.detuning - params.splitting_delta).powi(2)).sqrt();
    let half = 20.0 * params.gamma.max(o1).max(o2);
    let inner = default_half_width(params);
    let mut grid = default_grid(params);
    grid.extend(
        uniform_grid(-half, half, 4 * AUTO_GRID_POINTS)
            .expect("positive half width")
            .into_iter()
            .filter(|x| x.abs() > inner),
    );
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be strictly ascending".into()));
    }
    Ok(())
}

fn clip_negative(values: &mut [f64]) -> Result<()> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = NEGATIVE_CLIP * scale;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v > -tol {
                *v = 0.0;
            } else {
                return Err(Error::Numerical(format!(
                    "negative spectral density {v:e} beyond roundoff"
                )));
            }
        }
    }
    Ok(())
}

const PI_PAIRS: [(Transition, Transition); 4] = [
    (Transition::Pi1, Transition::Pi1),
    (Transition::Pi2, Transition::Pi1),
    (Transition::Pi1, Transition::Pi2),
    (Transition::Pi2, Transition::Pi2),
];

/// Steady state, rates and regression sources for one parameter set,
/// evaluated on arbitrary grids.
#[derive(Debug, Clone)]
pub struct SpectrumEngine {
    pub params: SystemParams,
    pub system: BlochSystem,
    pub rho: DensityMatrix,
    pub breakdown: IntensityBreakdown,
    sources: TransitionSources,
    execution: Execution,
}

impl SpectrumEngine {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let system = build_bloch(params)?;
        let rho = steady_state(&system)?.density;
        let breakdown = IntensityBreakdown::from_state(params, &system.rates, &rho);
        let sources = TransitionSources::new(&rho)?;
        Ok(Self {
            params: *params,
            system,
            rho,
            breakdown,
            sources,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// `(1/π) Σ w_ij Re ∫₀^∞ e^{−(iω̃+λ)τ} C_ij(τ) dτ`, where `C_ij` is the
    /// fluctuation correlation, plus the mean-value product when
    /// `with_means` is set.
    fn evaluate(
        &self,
        grid: &[f64],
        lambda: f64,
        terms: &[(Transition, Transition, f64)],
        with_means: bool,
    ) -> Result<Vec<f64>> {
        check_grid(grid)?;
        let pairs: Vec<(Transition, Transition)> = terms.iter().map(|t| (t.0, t.1)).collect();
        let means: Vec<Complex64> = terms
            .iter()
            .map(|&(i, j, _)| self.rho.raising_mean(i.index()) * self.rho.raising_mean(j.index()).conj())
            .collect();
        let mut values = try_map(grid, self.execution, |&w| {
            let resolvent = Resolvent::new(&self.system, w, lambda)?;
            let k = crate::regression::fluctuation_spectra(&resolvent, &self.sources, &pairs)?;
            let z = I * w + lambda;
            let mut acc = 0.0;
            for (n, &(_, _, weight)) in terms.iter().enumerate() {
                let mut c = k[n];
                if with_means {
                    c += means[n] / z;
                }
                acc += weight * c.re;
            }
            Ok(acc / PI)
        })?;
        clip_negative(&mut values)?;
        Ok(values)
    }

    fn pi_terms(&self, interference: bool) -> Vec<(Transition, Transition, f64)> {
        let g = self.system.rates.pi_matrix();
        PI_PAIRS
            .iter()
            .filter(|(i, j)| interference || i == j)
            .map(|&(i, j)| (i, j, g[i.index()][j.index()]))
            .collect()
    }

    /// Incoherent π spectrum including the cross-damping terms.
    pub fn incoherent_pi(&self, grid: &[f64]) -> Result<SpectrumTrace> {
        let values = self.evaluate(grid, 0.0, &self.pi_terms(true), false)?;
        Ok(SpectrumTrace {
            grid: grid.to_vec(),
            values,
            coherent_weight: self.breakdown.rayleigh_weight(),
            channel: Channel::Pi,
            interference_included: true,
            filter_lambda: 0.0,
        })
    }

    /// π spectrum with the cross-damping terms dropped.
    pub fn pi_no_interference(&self, grid: &[f64]) -> Result<SpectrumTrace> {
        let values = self.evaluate(grid, 0.0, &self.pi_terms(false), false)?;
        Ok(SpectrumTrace {
            grid: grid.to_vec(),
            values,
            coherent_weight: self.breakdown.i_coh0,
            channel: Channel::Pi,
            interference_included: false,
            filter_lambda: 0.0,
        })
    }

    pub fn sigma(&self, grid: &[f64]) -> Result<SpectrumTrace> {
        let g = self.system.rates.gamma_sigma;
        let terms = [
            (Transition::Sigma3, Transition::Sigma3, g),
            (Transition::Sigma4, Transition::Sigma4, g),
        ];
        let values = self.evaluate(grid, 0.0, &terms, false)?;
        Ok(SpectrumTrace {
            grid: grid.to_vec(),
            values,
            coherent_weight: 0.0,
            channel: Channel::Sigma,
            interference_included: true,
            filter_lambda: 0.0,
        })
    }

    /// Spectrum seen through a filter of bandwidth `lambda`; the Rayleigh line
    /// becomes a Lorentzian and everything lives on the grid.
    pub fn filtered_pi(&self, lambda: f64, grid: &[f64], include_interference: bool) -> Result<SpectrumTrace> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("filter bandwidth must be > 0, got {lambda}")));
        }
        let values = self.evaluate(grid, lambda, &self.pi_terms(include_interference), true)?;
        Ok(SpectrumTrace {
            grid: grid.to_vec(),
            values,
            coherent_weight: 0.0,
            channel: Channel::Pi,
            interference_included: include_interference,
            filter_lambda: lambda,
        })
    }

    /// The σ cross terms `∫ e^{−iω̃τ}⟨δS₃⁺(τ)δS₄⁻⟩` and `⟨δS₄⁺(τ)δS₃⁻⟩` at one frequency.
    pub fn sigma_cross_kernels(&self, omega_tilde: f64) -> Result<[Complex64; 2]> {
        let resolvent = Resolvent::new(&self.system, omega_tilde, 0.0)?;
        let k = crate::regression::fluctuation_spectra(
            &resolvent,
            &self.sources,
            &[
                (Transition::Sigma3, Transition::Sigma4),
                (Transition::Sigma4, Transition::Sigma3),
            ],
        )?;
        Ok([k[0], k[1]])
    }
}

pub fn incoherent_pi_spectrum(params: &SystemParams, grid: &[f64]) -> Result<SpectrumTrace> {
    SpectrumEngine::new(params)?.incoherent_pi(grid)
}

pub fn pi_spectrum_no_interference(params: &SystemParams, grid: &[f64]) -> Result<SpectrumTrace> {
    SpectrumEngine::new(params)?.pi_no_interference(grid)
}

pub fn sigma_spectrum(params: &SystemParams, grid: &[f64]) -> Result<SpectrumTrace> {
    SpectrumEngine::new(params)?.sigma(grid)
}

pub fn filtered_pi_spectrum(
    params: &SystemParams,
    lambda: f64,
    grid: &[f64],
    include_interference: bool,
) -> Result<SpectrumTrace> {
    SpectrumEngine::new(params)?.filtered_pi(lambda, grid, include_interference)
}

/// Closed-form incoherent π spectrum of the degenerate system, which is the
/// two-level Mollow spectrum scaled by `b_π`.
pub fn closed_form_degenerate_pi(params: &SystemParams, grid: &[f64]) -> Result<SpectrumTrace> {
    params.validate()?;
    if params.splitting_delta != 0.0 {
        return Err(Error::Domain(
            "the closed-form π spectrum requires a degenerate system (delta = 0)".into(),
        ));
    }
    check_grid(grid)?;
    let g = params.gamma;
    let d = params.detuning;
    let om2 = params.omega_rabi.norm_sqr();
    let poly = |z: Complex64| -> Complex64 {
        let two_z_g = z * 2.0 + g;
        (z + g) * 0.25 * (two_z_g * two_z_g + 4.0 * d * d) + two_z_g * (2.0 * om2)
    };
    let norm = g * g / 4.0 + d * d + 2.0 * om2;
    let values = grid
        .iter()
        .map(|&w| {
            let p = poly(Complex64::new(0.0, -w));
            params.b_pi * g / PI * (g * g + 2.0 * om2 + w * w) / norm * (2.0 * g * om2 * om2)
                / p.norm_sqr()
        })
        .collect();
    let b = IntensityBreakdown::from_state(
        params,
        &crate::model::derive_rates(params)?,
        &crate::bloch::steady_state_analytic(params)?,
    );
    Ok(SpectrumTrace {
        grid: grid.to_vec(),
        values,
        coherent_weight: b.rayleigh_weight(),
        channel: Channel::Pi,
        interference_included: true,
        filter_lambda: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecularTrace {
    pub trace: SpectrumTrace,
    /// Sideband width `¼√(γ₁γ₂) + γ/2`.
    pub sideband_width: f64,
    pub sideband_position: f64,
    /// True in the resonant strong-drive regime (`s > 10`, `|Δ| < 10⁻³γ`).
    pub valid: bool,
}

/// Three-Lorentzian secular approximation of the σ spectrum.
pub fn sigma_secular_closed_form(params: &SystemParams, grid: &[f64]) -> Result<SecularTrace> {
    let rates = crate::model::derive_rates(params)?;
    check_grid(grid)?;
    let g = params.gamma;
    let b = params.b_sigma;
    let omega1 = (4.0 * params.omega_rabi.norm_sqr() + params.detuning.powi(2)).sqrt();
    let width = 0.25 * (rates.gamma1 * rates.gamma2).sqrt() + g / 2.0;
    let lorentz = |w: f64, c: f64, x: f64| w / (w * w + (x - c).powi(2));
    let values = grid
        .iter()
        .map(|&x| {
            g * b / (8.0 * PI) * (lorentz(width, omega1, x) + lorentz(width, -omega1, x))
                + g * b / (4.0 * PI) * lorentz(g / 2.0, 0.0, x)
        })
        .collect();
    Ok(SecularTrace {
        trace: SpectrumTrace {
            grid: grid.to_vec(),
            values,
            coherent_weight: 0.0,
            channel: Channel::Sigma,
            interference_included: true,
            filter_lambda: 0.0,
        },
        sideband_width: width,
        sideband_position: omega1,
        valid: saturation(params) > 10.0 && params.detuning.abs() < 1e-3 * g,
    })
}
