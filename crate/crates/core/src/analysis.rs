//! Peaks, widths, weights and ratios of sampled spectra.
//!
//! "Width" always means half-width at half-maximum.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::spectra::SpectrumTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
}

/// `weight·(width/π)/((ω̃ − center)² + width²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    pub width: f64,
    pub weight: f64,
    /// RMS misfit relative to the largest sample in the window.
    pub residual: f64,
    pub iterations: usize,
}

impl LorentzianFit {
    pub fn eval(&self, omega: f64) -> f64 {
        lorentzian(self.weight, self.center, self.width, omega)
    }

    pub fn height(&self) -> f64 {
        self.weight / (std::f64::consts::PI * self.width)
    }
}

pub fn lorentzian(weight: f64, center: f64, width: f64, omega: f64) -> f64 {
    weight * width / std::f64::consts::PI / ((omega - center).powi(2) + width * width)
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a >= 0.0 || !a.is_finite() {
        return None;
    }
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * a);
    if !(x[0]..=x[2]).contains(&xv) {
        return None;
    }
    let yv = y[0] + d1 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv.max(y[1])))
}

fn prominence(v: &[f64], k: usize) -> f64 {
    let h = v[k];
    let mut left_min = h;
    for i in (0..k).rev() {
        if v[i] > h {
            break;
        }
        left_min = left_min.min(v[i]);
    }
    let mut right_min = h;
    for &x in &v[k + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

/// Local maxima whose prominence exceeds `min_prominence` times the global
/// maximum, refined by a parabola through the neighbouring samples.
pub fn find_peaks(trace: &SpectrumTrace, min_prominence: f64) -> Result<Vec<Peak>> {
    let v = &trace.values;
    let g = &trace.grid;
    if v.len() < 3 {
        return Err(Error::Domain("peak search needs at least 3 points".into()));
    }
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(Error::Domain(format!(
            "min_prominence must lie in (0, 1), got {min_prominence}"
        )));
    }
    let top = trace.max_value();
    if top <= 0.0 {
        return Ok(Vec::new());
    }
    let mut peaks = Vec::new();
    let mut k = 1;
    while k < v.len() - 1 {
        if v[k] > v[k - 1] {
            // walk across a flat top
            let mut end = k;
            while end + 1 < v.len() && v[end + 1] == v[k] {
                end += 1;
            }
            if end + 1 < v.len() && v[end + 1] < v[k] {
                let mid = (k + end) / 2;
                if prominence(v, mid) >= min_prominence * top {
                    let peak = if end == k {
                        parabola_vertex([g[k - 1], g[k], g[k + 1]], [v[k - 1], v[k], v[k + 1]])
                            .map(|(position, height)| Peak { position, height })
                    } else {
                        None
                    };
                    peaks.push(peak.unwrap_or(Peak {
                        position: 0.5 * (g[k] + g[end]),
                        height: v[k],
                    }));
                }
            }
            k = end + 1;
        } else {
            k += 1;
        }
    }
    peaks.sort_by(|a, b| {
        a.position
            .partial_cmp(&b.position)
            .unwrap()
            .then(b.height.partial_cmp(&a.height).unwrap())
            .then(a.position.abs().partial_cmp(&b.position.abs()).unwrap())
    });
    Ok(peaks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfWidth {
    /// Mean of the two sides.
    pub width: f64,
    pub left: f64,
    pub right: f64,
    /// Sides differ by more than 20%.
    pub asymmetric: bool,
}

fn nearest_index(grid: &[f64], x: f64) -> usize {
    let k = grid.partition_point(|g| *g < x);
    if k == 0 {
        0
    } else if k == grid.len() || (x - grid[k - 1]) <= (grid[k] - x) {
        k - 1
    } else {
        k
    }
}

/// HWHM of the peak at `peak_position` from linearly interpolated
/// half-maximum crossings.
pub fn half_width(trace: &SpectrumTrace, peak_position: f64) -> Result<HalfWidth> {
    let g = &trace.grid;
    let v = &trace.values;
    if g.len() < 3 || peak_position < g[0] || peak_position > g[g.len() - 1] {
        return Err(Error::Range(format!(
            "peak position {peak_position:e} outside the grid"
        )));
    }
    let mut k = nearest_index(g, peak_position);
    // climb to the sampled maximum
    while k + 1 < v.len() && v[k + 1] > v[k] {
        k += 1;
    }
    while k > 0 && v[k - 1] > v[k] {
        k -= 1;
    }
    let height = if k > 0 && k + 1 < v.len() {
        parabola_vertex([g[k - 1], g[k], g[k + 1]], [v[k - 1], v[k], v[k + 1]])
            .map_or(v[k], |p| p.1)
    } else {
        v[k]
    };
    let centre = if k > 0 && k + 1 < v.len() {
        parabola_vertex([g[k - 1], g[k], g[k + 1]], [v[k - 1], v[k], v[k + 1]])
            .map_or(g[k], |p| p.0)
    } else {
        g[k]
    };
    let half = height / 2.0;

    let mut i = k;
    while i > 0 && v[i] > half {
        i -= 1;
    }
    if v[i] > half {
        return Err(Error::Range("left half-maximum crossing outside the grid".into()));
    }
    let left_x = g[i] + (half - v[i]) * (g[i + 1] - g[i]) / (v[i + 1] - v[i]);

    let mut j = k;
    while j + 1 < v.len() && v[j] > half {
        j += 1;
    }
    if v[j] > half {
        return Err(Error::Range("right half-maximum crossing outside the grid".into()));
    }
    let right_x = g[j - 1] + (v[j - 1] - half) * (g[j] - g[j - 1]) / (v[j - 1] - v[j]);

    let left = centre - left_x;
    let right = right_x - centre;
    Ok(HalfWidth {
        width: 0.5 * (left + right),
        left,
        right,
        asymmetric: (left - right).abs() > 0.2 * left.max(right),
    })
}

const MAX_ITERATIONS: usize = 200;
const PARAM_TOLERANCE: f64 = 1e-8;

/// Window of `±5` widths around a peak, the default fitting interval.
pub fn fit_window(center: f64, width: f64) -> (f64, f64) {
    (center - 5.0 * width, center + 5.0 * width)
}

/// Levenberg–Marquardt fit of one Lorentzian to the samples inside `window`.
pub fn fit_lorentzian(trace: &SpectrumTrace, window: (f64, f64)) -> Result<LorentzianFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Domain("empty fit window".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .grid
        .iter()
        .zip(&trace.values)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(x, y)| (*x, *y))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::Structure("fewer than 4 samples in the fit window".into()));
    }
    let sub = SpectrumTrace {
        grid: xs.clone(),
        values: ys.clone(),
        ..trace.clone()
    };
    let peak = find_peaks(&sub, 0.5)?
        .into_iter()
        .max_by(|a, b| a.height.partial_cmp(&b.height).unwrap())
        .ok_or_else(|| Error::Structure("no peak inside the fit window".into()))?;
    let w0 = half_width(&sub, peak.position)
        .map(|h| h.width)
        .unwrap_or(0.25 * (hi - lo));
    let mut p = Vector3::new(std::f64::consts::PI * w0 * peak.height, peak.position, w0);
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(f64::MIN_POSITIVE);

    let cost = |p: &Vector3<f64>| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| (lorentzian(p[0], p[1], p[2], *x) - y).powi(2))
            .sum()
    };
    let mut mu = 1e-3;
    let mut current = cost(&p);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (x, y) in xs.iter().zip(&ys) {
            let (a, c, w) = (p[0], p[1], p[2]);
            let d = (x - c).powi(2) + w * w;
            let f = a * w / std::f64::consts::PI / d;
            let jac = Vector3::new(
                f / a,
                f * 2.0 * (x - c) / d,
                a / std::f64::consts::PI * ((x - c).powi(2) - w * w) / (d * d),
            );
            jtj += jac * jac.transpose();
            jtr += jac * (f - y);
        }
        let mut accepted = false;
        for _ in 0..50 {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] *= 1.0 + mu;
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial = p + step;
            if trial[0] > 0.0 && trial[2] > 0.0 {
                let c = cost(&trial);
                if c <= current {
                    let rel = (step[0] / p[0])
                        .abs()
                        .max((step[1] / p[2]).abs())
                        .max((step[2] / p[2]).abs());
                    p = trial;
                    current = c;
                    mu = (mu / 10.0).max(1e-12);
                    accepted = true;
                    if rel < PARAM_TOLERANCE {
                        converged = true;
                    }
                    break;
                }
            }
            mu *= 10.0;
        }
        if converged || !accepted {
            // no downhill step left means the minimum is reached to roundoff
            converged = true;
            break;
        }
    }
    let residual = (current / xs.len() as f64).sqrt() / scale;
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            residual,
            last: [p[0], p[1], p[2]],
        });
    }
    Ok(LorentzianFit {
        center: p[1],
        width: p[2],
        weight: p[0],
        residual,
        iterations,
    })
}

/// Central-to-sideband height ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRatio {
    pub central_to_sideband: f64,
    pub central: f64,
    pub sidebands: [Peak; 2],
}

/// Height at `ω̃ = 0` over the mean height of the strongest peak on each side.
pub fn peak_ratio(trace: &SpectrumTrace) -> Result<PeakRatio> {
    let peaks = find_peaks(trace, 1e-3)?;
    if peaks.len() < 3 {
        return Err(Error::Structure(format!(
            "peak ratio needs at least 3 peaks, found {}",
            peaks.len()
        )));
    }
    let central = trace
        .value_at(0.0)
        .ok_or_else(|| Error::Range("ω̃ = 0 is outside the grid".into()))?;
    let k = nearest_index(&trace.grid, 0.0);
    let step = trace.grid[(k + 1).min(trace.len() - 1)] - trace.grid[k.saturating_sub(1)];
    let strongest = |side: f64| {
        peaks
            .iter()
            .filter(|p| p.position * side > step)
            .max_by(|a, b| a.height.partial_cmp(&b.height).unwrap())
            .copied()
    };
    let (Some(l), Some(r)) = (strongest(-1.0), strongest(1.0)) else {
        return Err(Error::Structure("no sideband on one side of the centre".into()));
    };
    Ok(PeakRatio {
        central_to_sideband: central / (0.5 * (l.height + r.height)),
        central,
        sidebands: [l, r],
    })
}

/// Quadratic-interpolation (Simpson) integral over a non-uniform grid plus
/// the `1/ω̃²` tails beyond the grid ends.
pub fn integrate(trace: &SpectrumTrace) -> f64 {
    let g = &trace.grid;
    let v = &trace.values;
    let n = g.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (g[1] - g[0]) * (v[0] + v[1]) + tails(g, v);
    }
    let mut body = 0.0;
    let mut k = 0;
    while k + 2 < n {
        let (h0, h1) = (g[k + 1] - g[k], g[k + 2] - g[k + 1]);
        body += (h0 + h1) / 6.0
            * ((2.0 - h1 / h0) * v[k] + (h0 + h1).powi(2) / (h0 * h1) * v[k + 1] + (2.0 - h0 / h1) * v[k + 2]);
        k += 2;
    }
    if k + 1 < n {
        // odd interval count: the last interval from the parabola through the last three points
        let (h0, h1) = (g[k] - g[k - 1], g[k + 1] - g[k]);
        body += h1
            * (v[k + 1] * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) + v[k] * (h1 + 3.0 * h0) / (6.0 * h0)
                - v[k - 1] * h1 * h1 / (6.0 * h0 * (h0 + h1)));
    }
    body + tails(g, v)
}

fn tails(g: &[f64], v: &[f64]) -> f64 {
    let first = g[0];
    let last = g[g.len() - 1];
    let mut t = 0.0;
    if first < 0.0 {
        t += v[0] * first.abs();
    }
    if last > 0.0 {
        t += v[v.len() - 1] * last;
    }
    t
}

/// Grid integral plus the separate Rayleigh weight.
pub fn total_power(trace: &SpectrumTrace) -> f64 {
    integrate(trace) + trace.coherent_weight
}

/// Half-width `x` of the symmetric interval `[−x, x]` that holds half of the
/// power on the grid. For a Lorentzian centred at zero this equals the HWHM.
pub fn power_half_width(trace: &SpectrumTrace) -> Result<f64> {
    let g = &trace.grid;
    let v = &trace.values;
    if g.len() < 3 || g[0] >= 0.0 || g[g.len() - 1] <= 0.0 {
        return Err(Error::Range("grid must straddle ω̃ = 0".into()));
    }
    let total = integrate(trace);
    let target = 0.5 * total;
    let value = |x: f64| trace.value_at(x).unwrap_or(0.0);
    let inside = |x: f64| -> f64 {
        let mut pts: Vec<(f64, f64)> = g
            .iter()
            .zip(v)
            .filter(|(gx, _)| gx.abs() < x)
            .map(|(a, b)| (*a, *b))
            .collect();
        pts.insert(0, (-x, value(-x)));
        pts.push((x, value(x)));
        pts.windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    };
    let reach = g[0].abs().min(g[g.len() - 1]);
    if inside(reach) < target {
        return Err(Error::Range("half of the power lies outside the symmetric grid".into()));
    }
    let (mut a, mut b) = (0.0, reach);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if inside(m) < target {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-12 * b {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
