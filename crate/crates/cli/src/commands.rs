use std::fs;
use std::path::{Path, PathBuf};

use fluorospec::analysis::{self, fit_lorentzian, fit_window, half_width, peak_ratio};
use fluorospec::bloch::{build_bloch, steady_state, IntensityBreakdown};
use fluorospec::exec::{try_map, Execution};
use fluorospec::presets::{Figure, FigureKind};
use fluorospec::regression::{correlation_limit, time_correlation, Transition};
use fluorospec::spectra::{
    closed_form_degenerate_pi, coherent_pi_weight, filtered_grid, interference_weight,
    minimum_interference_splitting, minimum_interference_weight, narrow_peak_asymptotics_pi,
    saturation, sigma_peak_asymptotics, uniform_grid, zero_interference_splitting, GridSpec,
    AUTO_GRID_POINTS,
};
use fluorospec::{SpectrumEngine, SpectrumTrace, SystemParams};
use serde_json::{json, Value};

use crate::config::{scenario_of, Scenario};
use crate::output::{emit, pretty, Format, Table};
use crate::svg::{line_plot, Series};
use crate::{ChannelArg, CliError};

pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub svg: bool,
}

/// Columns drawn in the optional SVG: x column, then y columns.
struct Plot<'a> {
    title: &'a str,
    x: usize,
    ys: &'a [usize],
}

fn param_table(p: &SystemParams, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    for (k, v) in scenario_of(p).entries() {
        t = t.meta(k, v);
    }
    t
}

fn grid_label(spec: &GridSpec) -> String {
    match spec {
        GridSpec::Auto => "auto".into(),
        GridSpec::Uniform { min, max, points } => format!("uniform({min:e},{max:e},{points})"),
    }
}

fn svg_of(table: &Table, plot: &Plot) -> String {
    let series: Vec<Series> = plot
        .ys
        .iter()
        .map(|&k| Series {
            name: &table.columns[k],
            x: &table.data[plot.x],
            y: &table.data[k],
        })
        .collect();
    line_plot(plot.title, &table.columns[plot.x], &series)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_table(out: &Output, table: &Table, plot: Plot) -> Result<(), CliError> {
    let format = out.format.unwrap_or(Format::Csv);
    emit(out.path.as_deref(), &table.render(format))?;
    if out.svg {
        match out.path.as_deref() {
            Some(p) if p.as_os_str() != "-" => write_file(&p.with_extension("svg"), &svg_of(table, &plot))?,
            _ => return Err(CliError::Config("--svg needs an output file (-o)".into())),
        }
    }
    Ok(())
}

fn engine(p: &SystemParams) -> Result<SpectrumEngine, CliError> {
    Ok(SpectrumEngine::new(p)?.with_execution(Execution::Parallel))
}

fn required_lambda(s: &Scenario) -> Result<f64, CliError> {
    match s.lambda {
        Some(l) if l > 0.0 => Ok(l),
        Some(l) => Err(CliError::Config(format!("lambda must be positive, got {l}"))),
        None => Err(CliError::Config("missing required parameter 'lambda'".into())),
    }
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn steady(s: &Scenario, out: &Output) -> Result<(), CliError> {
    let p = s.params()?;
    let system = build_bloch(&p)?;
    let ss = steady_state(&system)?;
    let rho = &ss.density;
    let b = IntensityBreakdown::from_state(&p, &system.rates, rho);
    let photon_rate = p.gamma * rho.excited_population();
    let populations: Vec<f64> = (0..4).map(|k| rho.get(k, k).re).collect();

    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => {
            let params: serde_json::Map<String, Value> = scenario_of(&p)
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), json!(v.parse::<f64>().unwrap_or(f64::NAN))))
                .collect();
            let mut doc = json!({
                "tool": format!("fluorospec {}", crate::output::VERSION),
                "params": params,
                "photon_rate": photon_rate,
                "excited_population": rho.excited_population(),
                "saturation": saturation(&p),
                "interference_weight": interference_weight(&p),
                "populations": populations,
                "rho13": complex_json(rho.get(0, 2)),
                "rho24": complex_json(rho.get(1, 3)),
                "intensity": {
                    "coherent": b.i_coh0,
                    "coherent_interference": b.i_coh_int,
                    "incoherent": b.i_inc0,
                    "incoherent_interference": b.i_inc_int,
                    "total_pi": b.i_total,
                },
                "condition": ss.condition,
            });
            if let Some(w) = ss.warning() {
                doc["warning"] = json!(w);
            }
            pretty(&doc)
        }
        Format::Csv => {
            let cols = [
                "photon_rate",
                "saturation",
                "interference_weight",
                "rho11",
                "rho22",
                "rho33",
                "rho44",
                "rho13_re",
                "rho13_im",
                "rho24_re",
                "rho24_im",
                "i_coh",
                "i_coh_int",
                "i_inc",
                "i_inc_int",
            ];
            let values = [
                photon_rate,
                saturation(&p),
                interference_weight(&p),
                populations[0],
                populations[1],
                populations[2],
                populations[3],
                rho.get(0, 2).re,
                rho.get(0, 2).im,
                rho.get(1, 3).re,
                rho.get(1, 3).im,
                b.i_coh0,
                b.i_coh_int,
                b.i_inc0,
                b.i_inc_int,
            ];
            let mut t = param_table(&p, &cols).meta_num("condition", ss.condition);
            for (k, v) in values.iter().enumerate() {
                t.set_column(k, vec![*v]);
            }
            t.to_csv()
        }
    };
    if out.svg {
        return Err(CliError::Config("steady has nothing to plot".into()));
    }
    emit(out.path.as_deref(), &text)
}

fn pi_pair(e: &SpectrumEngine, grid: &[f64], lambda: Option<f64>) -> Result<[SpectrumTrace; 2], CliError> {
    Ok(match lambda {
        None => [e.incoherent_pi(grid)?, e.pi_no_interference(grid)?],
        Some(l) => [e.filtered_pi(l, grid, true)?, e.filtered_pi(l, grid, false)?],
    })
}

fn pi_table(p: &SystemParams, grid_spec: &str, pair: [SpectrumTrace; 2], lambda: Option<f64>) -> Table {
    let [with, without] = pair;
    let mut t = param_table(p, &["omega_tilde", "s_with_interference", "s_without_interference"])
        .meta("grid", grid_spec);
    if let Some(l) = lambda {
        t = t.meta_num("lambda", l);
    } else {
        t = t
            .meta_num("coherent_weight_with", with.coherent_weight)
            .meta_num("coherent_weight_without", without.coherent_weight);
    }
    t.set_column(0, with.grid);
    t.set_column(1, with.values);
    t.set_column(2, without.values);
    t
}

pub fn spectrum_pi(s: &Scenario, out: &Output) -> Result<(), CliError> {
    let p = s.params()?;
    let spec = s.grid()?;
    let grid = spec.resolve(&p)?;
    let t = pi_table(&p, &grid_label(&spec), pi_pair(&engine(&p)?, &grid, None)?, None);
    write_table(out, &t, Plot { title: "pi spectrum", x: 0, ys: &[1, 2] })
}

pub fn spectrum_sigma(s: &Scenario, out: &Output) -> Result<(), CliError> {
    let p = s.params()?;
    let spec = s.grid()?;
    let grid = spec.resolve(&p)?;
    let trace = engine(&p)?.sigma(&grid)?;
    let mut t = param_table(&p, &["omega_tilde", "s_sigma"])
        .meta("grid", grid_label(&spec))
        .meta_num("coherent_weight", trace.coherent_weight);
    t.set_column(0, trace.grid);
    t.set_column(1, trace.values);
    write_table(out, &t, Plot { title: "sigma spectrum", x: 0, ys: &[1] })
}

fn correlation_table(p: &SystemParams, tau_max: f64, points: usize) -> Result<Table, CliError> {
    if !(tau_max > 0.0 && tau_max.is_finite()) || points < 2 {
        return Err(CliError::Config("correlation needs tau_max > 0 and at least 2 points".into()));
    }
    let taus: Vec<f64> = (0..points)
        .map(|k| tau_max * k as f64 / (points - 1) as f64)
        .collect();
    let system = build_bloch(p)?;
    let rho = steady_state(&system)?.density;
    let g = time_correlation(&system, &rho, Transition::Pi1, Transition::Pi2, &taus)?;
    let limit = correlation_limit(&system, &rho, Transition::Pi1, Transition::Pi2);
    if limit.norm() == 0.0 {
        return Err(CliError::Physics("G12 vanishes at long delays; nothing to normalize by".into()));
    }
    let mut t = param_table(p, &["tau", "g12_re", "g12_im", "g12_normalized"])
        .meta_num("g12_limit_re", limit.re)
        .meta_num("g12_limit_im", limit.im);
    t.set_column(0, taus);
    t.set_column(1, g.iter().map(|z| z.re).collect());
    t.set_column(2, g.iter().map(|z| z.im).collect());
    t.set_column(3, g.iter().map(|z| (z / limit).re).collect());
    Ok(t)
}

pub fn correlation(s: &Scenario, out: &Output, tau_max: Option<f64>, points: usize) -> Result<(), CliError> {
    let p = s.params()?;
    let t = correlation_table(&p, tau_max.unwrap_or(20.0 / p.gamma), points)?;
    write_table(out, &t, Plot { title: "G12(tau)/G12(inf)", x: 0, ys: &[3] })
}

fn sweep_table(p: &SystemParams, deltas: Vec<f64>) -> Result<Table, CliError> {
    let c_closed: Vec<f64> = deltas
        .iter()
        .map(|&d| interference_weight(&p.with_splitting(d)))
        .collect();
    let c_numeric = try_map(&deltas, Execution::Parallel, |&d| {
        Ok(coherent_pi_weight(&p.with_splitting(d))?.c_numeric)
    })?;
    let mut t = param_table(p, &["delta_splitting", "c_value", "c_numeric"]);
    if p.detuning != 0.0 {
        t = t
            .meta_num("delta_zero", zero_interference_splitting(p.gamma, p.detuning))
            .meta_num("delta_min", minimum_interference_splitting(p.gamma, p.detuning))
            .meta_num("c_min", minimum_interference_weight(p.gamma, p.detuning));
    }
    t.set_column(0, deltas);
    t.set_column(1, c_closed);
    t.set_column(2, c_numeric);
    Ok(t)
}

fn sweep_range(p: &SystemParams) -> Result<Vec<f64>, CliError> {
    let half = 5.0 * p.detuning.abs().max(p.gamma);
    Ok(uniform_grid(-half, half, AUTO_GRID_POINTS)?)
}

pub fn c_sweep(s: &Scenario, out: &Output) -> Result<(), CliError> {
    let p = s.params()?;
    let deltas = match s.grid()? {
        GridSpec::Auto => sweep_range(&p)?,
        GridSpec::Uniform { min, max, points } => uniform_grid(min, max, points)?,
    };
    let t = sweep_table(&p, deltas)?;
    write_table(out, &t, Plot { title: "C(delta)", x: 0, ys: &[1] })
}

pub fn filter(s: &Scenario, out: &Output) -> Result<(), CliError> {
    let p = s.params()?;
    let lambda = required_lambda(s)?;
    let spec = s.grid()?;
    let grid = match spec {
        GridSpec::Auto => filtered_grid(&p, lambda)?,
        _ => spec.resolve(&p)?,
    };
    let t = pi_table(&p, &grid_label(&spec), pi_pair(&engine(&p)?, &grid, Some(lambda))?, Some(lambda));
    write_table(out, &t, Plot { title: "filtered pi spectrum", x: 0, ys: &[1, 2] })
}

pub fn fit(s: &Scenario, out: &Output, channel: ChannelArg, center: f64) -> Result<(), CliError> {
    let p = s.params()?;
    let spec = s.grid()?;
    let grid = spec.resolve(&p)?;
    let e = engine(&p)?;
    let (trace, predicted) = match channel {
        ChannelArg::Pi => (e.incoherent_pi(&grid)?, narrow_peak_asymptotics_pi(&p).ok()),
        ChannelArg::Sigma => (e.sigma(&grid)?, sigma_peak_asymptotics(&p).ok()),
    };
    let hw = half_width(&trace, center)?;
    let fit = fit_lorentzian(&trace, fit_window(center, hw.width))?;

    let mut t = param_table(
        &p,
        &["center", "width", "weight", "height", "residual", "iterations", "half_width"],
    )
    .meta("channel", match channel {
        ChannelArg::Pi => "pi",
        ChannelArg::Sigma => "sigma",
    })
    .meta("grid", grid_label(&spec));
    if let Some(a) = predicted.filter(|a| a.valid) {
        t = t
            .meta_num("predicted_width", a.width)
            .meta_num("predicted_weight", a.weight);
    }
    if let Ok(r) = peak_ratio(&trace) {
        t = t.meta_num("central_to_sideband", r.central_to_sideband);
    }
    t = t.meta_num("power_half_width", analysis::power_half_width(&trace)?);
    let row = [
        fit.center,
        fit.width,
        fit.weight,
        fit.height(),
        fit.residual,
        fit.iterations as f64,
        hw.width,
    ];
    for (k, v) in row.iter().enumerate() {
        t.set_column(k, vec![*v]);
    }
    if out.svg {
        return Err(CliError::Config("fit has nothing to plot".into()));
    }
    emit(out.path.as_deref(), &t.render(out.format.unwrap_or(Format::Csv)))
}

struct Curve {
    label: String,
    table: Table,
    plot_y: Vec<usize>,
}

fn figure_curves(fig: Figure) -> Result<Vec<Curve>, CliError> {
    let p = fig.params();
    let name = fig.name();
    let single = |label: &str, mut table: Table, y: usize| Curve {
        label: format!("{name}_{label}"),
        table: {
            table.meta.insert(0, ("figure".into(), name.into()));
            table
        },
        plot_y: vec![y],
    };
    let split_pair = |pair: [SpectrumTrace; 2], p: &SystemParams, lambda: Option<f64>| {
        let mut out = Vec::new();
        for (trace, label) in pair.into_iter().zip(["with_interference", "without_interference"]) {
            let mut t = param_table(p, &["omega_tilde", "s"]).meta("curve", label);
            t = match lambda {
                Some(l) => t.meta_num("lambda", l),
                None => t.meta_num("coherent_weight", trace.coherent_weight),
            };
            t.set_column(0, trace.grid);
            t.set_column(1, trace.values);
            out.push(single(label, t, 1));
        }
        out
    };

    let curves = match fig.kind() {
        FigureKind::Correlation => {
            let t = correlation_table(&p, 20.0 / p.gamma, 2001)?;
            vec![single("g12", t, 3)]
        }
        FigureKind::InterferenceSweep { detunings } => {
            let mut v = Vec::new();
            for d in detunings {
                let q = SystemParams { detuning: d, ..p };
                let half = 5.0 * detunings.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let t = sweep_table(&q, uniform_grid(-half, half, AUTO_GRID_POINTS)?)?;
                v.push(single(&format!("detuning_{d:e}"), t, 1));
            }
            v
        }
        FigureKind::PiSpectrum => {
            let grid = fluorospec::spectra::default_grid(&p);
            let mut v = split_pair(pi_pair(&engine(&p)?, &grid, None)?, &p, None);
            for (label, q) in fig.companions() {
                let trace = closed_form_degenerate_pi(&q, &grid)?;
                let mut t = param_table(&q, &["omega_tilde", "s"])
                    .meta("curve", label)
                    .meta_num("coherent_weight", trace.coherent_weight);
                t.set_column(0, trace.grid);
                t.set_column(1, trace.values);
                v.push(single(label, t, 1));
            }
            v
        }
        FigureKind::SigmaSpectrum => {
            let grid = fluorospec::spectra::default_grid(&p);
            let sigma = engine(&p)?.sigma(&grid)?;
            let reference = closed_form_degenerate_pi(&p, &grid)?.scaled(p.b_sigma / p.b_pi);
            let mut t = param_table(&p, &["omega_tilde", "s"]).meta("curve", "sigma");
            t.set_column(0, sigma.grid);
            t.set_column(1, sigma.values);
            let mut r = param_table(&p, &["omega_tilde", "s"]).meta("curve", "two_level_reference");
            r.set_column(0, reference.grid);
            r.set_column(1, reference.values);
            vec![single("sigma", t, 1), single("two_level_reference", r, 1)]
        }
        FigureKind::FilteredPi { lambda } => {
            let grid = filtered_grid(&p, lambda)?;
            split_pair(pi_pair(&engine(&p)?, &grid, Some(lambda))?, &p, Some(lambda))
        }
    };
    Ok(curves)
}

pub fn figure(fig: Figure, dir: &Path, out: &Output) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let format = out.format.unwrap_or(Format::Csv);
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let curves = figure_curves(fig)?;
    for c in &curves {
        write_file(&dir.join(format!("{}.{ext}", c.label)), &c.table.render(format))?;
    }
    if out.svg {
        let series: Vec<Series> = curves
            .iter()
            .flat_map(|c| {
                c.plot_y.iter().map(|&k| Series {
                    name: &c.label,
                    x: &c.table.data[0],
                    y: &c.table.data[k],
                })
            })
            .collect();
        let x_label = &curves[0].table.columns[0];
        write_file(&dir.join(format!("{}.svg", fig.name())), &line_plot(fig.name(), x_label, &series))?;
    }
    let mut listing = String::new();
    for c in &curves {
        listing.push_str(&format!("{}.{ext}\n", c.label));
    }
    emit(out.path.as_deref(), &listing)
}
