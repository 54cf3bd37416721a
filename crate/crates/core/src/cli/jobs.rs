//! Fully resolved run configurations and their execution.
//!
//! A [`RunConfig`] holds every default materialized, so executing the same value twice
//! yields byte-identical data files. Manifests store it verbatim for replay.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::output::{csv_header, digest, json, num, write_atomic};
use super::CliError;
use crate::angular::{relative_line_strength, HalfInt, Polarization, Sublevel, WIGNER_CONVENTION};
use crate::propagation::{
    best_operating_point, run_gaussian, sweep, MediumConfig, PulseMetrics, PulseRun, SweepRow, CESIUM_MASS_AMU,
};
use crate::scheme::{build_scheme, validate, ControlField, Excited, LevelConfig, Model, ModelSelection, SchemeInstance};
use crate::susceptibility::{
    eit_minimum, find_peaks, spectrum, DopplerConfig, Extremum, FrequencyGrid, Peak, PeakOptions,
    SusceptibilitySpectrum,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJob {
    pub level: LevelConfig,
    pub control: ControlField,
    pub model: ModelSelection,
    pub grid: FrequencyGrid,
    pub doppler: Option<DopplerConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseJob {
    pub level: LevelConfig,
    pub control: ControlField,
    pub model: Model,
    pub cooperativity: f64,
    /// Candidate carrier detunings; a single entry with a single width means no search.
    pub carriers: Vec<f64>,
    /// Candidate intensity FWHMs in units of 1/gamma.
    pub fwhms: Vec<f64>,
    pub min_transmission: f64,
    pub doppler: Option<DopplerConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingsJob {
    pub level: LevelConfig,
    pub control: ControlField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Spectrum(SpectrumJob),
    Pulse(PulseJob),
    Figure { id: u8 },
    Couplings(CouplingsJob),
}

fn physics(e: crate::Error) -> CliError {
    CliError::Failure(e.to_string())
}

fn scheme_for(level: &LevelConfig, control: &ControlField, model: Model) -> Result<SchemeInstance, CliError> {
    build_scheme(level, control, model).map_err(physics)
}

impl RunConfig {
    /// Execute and write data files into `dir`; returns the paths written.
    pub fn execute(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        match self {
            RunConfig::Spectrum(job) => {
                let path = dir.join("spectrum.csv");
                write_atomic(&path, job.render(self)?.as_bytes())?;
                Ok(vec![path])
            }
            RunConfig::Pulse(job) => job.execute(self, dir),
            RunConfig::Figure { id } => super::figures::execute(*id, self, dir),
            RunConfig::Couplings(job) => {
                let path = dir.join("couplings.json");
                write_atomic(&path, &json(&job.report()?)?)?;
                Ok(vec![path])
            }
        }
    }
}

/// Columns of a spectrum table, one `(label, spectrum)` per model.
pub type Columns = Vec<(String, SusceptibilitySpectrum)>;

impl SpectrumJob {
    pub fn columns(&self) -> Result<Columns, CliError> {
        let models: Vec<(&str, ControlField, Model)> = match self.model {
            ModelSelection::Full => vec![("full", self.control, Model::Full)],
            ModelSelection::Lambda => vec![("lambda", self.control, Model::Lambda)],
            ModelSelection::Both => {
                vec![("full", self.control, Model::Full), ("lambda", self.control, Model::Lambda)]
            }
            ModelSelection::Off => vec![("off", ControlField { rabi: 0.0, ..self.control }, Model::Full)],
        };
        models
            .into_iter()
            .map(|(label, control, model)| {
                let s = scheme_for(&self.level, &control, model)?;
                let spec = spectrum(&self.grid, &s, self.doppler.as_ref()).map_err(physics)?;
                let problems = spec.check_invariants();
                if !problems.is_empty() {
                    return Err(CliError::Failure(format!("{label} spectrum: {}", problems.join("; "))));
                }
                Ok((label.to_string(), spec))
            })
            .collect()
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let doppler = match &self.doppler {
            Some(d) if d.enabled => format!(
                "thermal_width_gamma={} order={} {}",
                d.thermal_width,
                d.quadrature_order,
                if d.copropagating { "copropagating" } else { "counterpropagating" }
            ),
            _ => "off".into(),
        };
        vec![
            ("model".into(), self.model.to_string()),
            ("control_detuning_gamma".into(), self.control.detuning.to_string()),
            ("rabi_gamma".into(), self.control.rabi.to_string()),
            ("hyperfine_splitting_gamma".into(), self.level.hyperfine_splitting.to_string()),
            ("ground_F".into(), self.level.ground_f.to_string()),
            ("excited_F".into(), format!("{},{}", self.level.excited_f_low, self.level.excited_f_high)),
            ("nuclear_spin".into(), self.level.manifold.nuclear_spin.to_string()),
            ("doppler".into(), doppler),
            ("chi_units".into(), "n0 (lambda/2pi)^3".into()),
        ]
    }

    pub fn render(&self, config: &RunConfig) -> Result<String, CliError> {
        render_spectrum(&self.columns()?, config, &self.metadata())
    }
}

pub fn render_spectrum(columns: &Columns, config: &RunConfig, meta: &[(String, String)]) -> Result<String, CliError> {
    let mut out = csv_header("chi-spectrum", config, meta);
    if columns.len() == 1 {
        out.push_str("delta_bar_gamma,chi_re,chi_im\n");
    } else {
        out.push_str("delta_bar_gamma");
        for (label, _) in columns {
            write!(out, ",chi_re_{label},chi_im_{label}").unwrap();
        }
        out.push('\n');
    }
    let x = &columns[0].1.detunings;
    for (k, &xk) in x.iter().enumerate() {
        out.push_str(&num(xk));
        for (_, spec) in columns {
            let c = spec.chi[k];
            write!(out, ",{},{}", num(c.re), num(c.im)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
struct PulseReport<'a> {
    carrier_detuning: f64,
    fwhm: f64,
    /// "given" when one carrier and one width were requested, otherwise "sweep".
    selection: &'static str,
    #[serde(flatten)]
    metrics: PulseMetrics,
    config_digest: String,
    config: &'a RunConfig,
}

/// `(carrier, fwhm, run, sweep rows)`
pub type Solved = (f64, f64, PulseRun, Option<Vec<SweepRow>>);

impl PulseJob {
    pub fn medium(&self) -> Result<MediumConfig, CliError> {
        let scheme = scheme_for(&self.level, &self.control, self.model)?;
        let m = MediumConfig { cooperativity: self.cooperativity, scheme, doppler: self.doppler, atom_mass: CESIUM_MASS_AMU };
        m.check().map_err(physics)?;
        Ok(m)
    }

    /// Run the requested propagation, searching carriers and widths when more than one
    /// candidate is given. Returns the final run and the sweep table, if any.
    pub fn solve(&self) -> Result<Solved, CliError> {
        if self.carriers.is_empty() || self.fwhms.is_empty() {
            return Err(CliError::Failure("pulse job needs at least one carrier and one width".into()));
        }
        let medium = self.medium()?;
        if self.carriers.len() == 1 && self.fwhms.len() == 1 {
            let (c, f) = (self.carriers[0], self.fwhms[0]);
            return Ok((c, f, run_gaussian(&medium, c, f).map_err(physics)?, None));
        }
        let rows = sweep(&medium, &self.carriers, &self.fwhms).map_err(physics)?;
        let best = best_operating_point(&rows, self.min_transmission).ok_or_else(|| {
            CliError::Failure(format!(
                "no swept (carrier, fwhm) pair transmits at least {}; lower --min-transmission or widen the sweep",
                self.min_transmission
            ))
        })?;
        let run = run_gaussian(&medium, best.carrier_detuning, best.fwhm).map_err(physics)?;
        Ok((best.carrier_detuning, best.fwhm, run, Some(rows)))
    }

    fn execute(&self, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let (carrier, fwhm, run, rows) = self.solve()?;
        let mut files = Vec::new();
        let meta = vec![
            ("carrier_detuning_gamma".into(), carrier.to_string()),
            ("fwhm_gamma".into(), fwhm.to_string()),
            ("cooperativity".into(), self.cooperativity.to_string()),
            ("model".into(), self.model.to_string()),
            ("control_detuning_gamma".into(), self.control.detuning.to_string()),
            ("rabi_gamma".into(), self.control.rabi.to_string()),
        ];
        let path = dir.join("pulse.csv");
        write_atomic(&path, render_trace(&run, config, &meta).as_bytes())?;
        files.push(path);

        let report = PulseReport {
            carrier_detuning: carrier,
            fwhm,
            selection: if rows.is_some() { "sweep" } else { "given" },
            metrics: run.metrics,
            config_digest: digest(config),
            config,
        };
        let path = dir.join("metrics.json");
        write_atomic(&path, &json(&report)?)?;
        files.push(path);

        if let Some(rows) = rows {
            let path = dir.join("sweep.csv");
            write_atomic(&path, render_sweep(&rows, config).as_bytes())?;
            files.push(path);
        }
        Ok(files)
    }
}

pub fn render_trace(run: &PulseRun, config: &RunConfig, meta: &[(String, String)]) -> String {
    let mut out = csv_header("pulse-trace", config, meta);
    out.push_str("t_gamma,abs_in,abs_out,re_out,im_out\n");
    for k in 0..run.input.t.len() {
        let (i, o) = (run.input.envelope[k], run.output.envelope[k]);
        writeln!(out, "{},{},{},{},{}", num(run.input.t[k]), num(i.norm()), num(o.norm()), num(o.re), num(o.im)).unwrap();
    }
    out
}

pub fn render_sweep(rows: &[SweepRow], config: &RunConfig) -> String {
    let mut out = csv_header("pulse-sweep", config, &[]);
    out.push_str("carrier_detuning_gamma,fwhm_gamma,transmission,centroid_delay_gamma,fractional_delay,proxy_efficiency\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.carrier_detuning),
            num(r.fwhm),
            num(r.transmission),
            num(r.centroid_delay),
            num(r.fractional_delay),
            num(r.proxy_efficiency)
        )
        .unwrap();
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineStrength {
    pub ground_f: HalfInt,
    pub excited_f: HalfInt,
    pub strength: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingReport {
    pub wigner_convention: String,
    pub level: LevelConfig,
    pub control: ControlField,
    pub populated: Sublevel,
    pub empty: Sublevel,
    pub excited: [Sublevel; 2],
    /// Probe amplitudes `c_n`, `c_n'` (sigma-).
    pub probe: [f64; 2],
    /// Control dipole amplitudes out of `|m'>` (sigma+).
    pub control_dipole: [f64; 2],
    /// Control couplings `V_n`, `V_n'` in units of gamma.
    pub coupling: [f64; 2],
    pub coupling_ratio: f64,
    pub line_strengths: Vec<LineStrength>,
    /// Largest deviation of any excited sublevel's summed line strength from one.
    pub completeness_deviation: f64,
}

impl CouplingsJob {
    pub fn report(&self) -> Result<CouplingReport, CliError> {
        let s = scheme_for(&self.level, &self.control, Model::Full)?;
        let violations = validate(&s);
        if let Some(v) = violations.first() {
            return Err(CliError::Failure(format!("{}: {}", v.code.as_str(), v.message)));
        }
        let manifold = self.level.manifold;
        let amp = |from: Sublevel, to: Sublevel, pol| {
            crate::angular::dipole_amplitude(&manifold, from, to, pol).map(|a| a.value()).map_err(physics)
        };
        let excited = [self.level.excited(Excited::N), self.level.excited(Excited::NPrime)];
        let control_dipole = [
            amp(self.level.empty(), excited[0], Polarization::SigmaPlus)?,
            amp(self.level.empty(), excited[1], Polarization::SigmaPlus)?,
        ];
        let mut line_strengths = Vec::new();
        let mut completeness_deviation: f64 = 0.0;
        for fe in manifold.excited_levels() {
            let mut total = 0.0;
            for fg in manifold.ground_levels() {
                let strength = relative_line_strength(&manifold, fg, fe).map_err(physics)?;
                total += strength;
                line_strengths.push(LineStrength { ground_f: fg, excited_f: fe, strength });
            }
            completeness_deviation = completeness_deviation.max((total - 1.0).abs());
        }
        let coupling = [s.coupling[0].re, s.coupling[1].re];
        Ok(CouplingReport {
            wigner_convention: WIGNER_CONVENTION.into(),
            level: self.level,
            control: self.control,
            populated: self.level.populated(),
            empty: self.level.empty(),
            excited,
            probe: [s.probe[0].re, s.probe[1].re],
            control_dipole,
            coupling,
            coupling_ratio: control_dipole[1] / control_dipole[0],
            line_strengths,
            completeness_deviation,
        })
    }
}

fn ket(s: &Sublevel) -> String {
    format!("|F={},M={}>", s.f, s.m)
}

pub fn render_couplings(r: &CouplingReport) -> String {
    let mut out = String::new();
    writeln!(out, "convention: {}", r.wigner_convention).unwrap();
    writeln!(out, "{:<10} {:<36} {:>24}", "quantity", "transition", "value").unwrap();
    let rows = [
        ("c_n", format!("{} -> {} (sigma-)", ket(&r.populated), ket(&r.excited[0])), r.probe[0]),
        ("c_n'", format!("{} -> {} (sigma-)", ket(&r.populated), ket(&r.excited[1])), r.probe[1]),
        ("d_n", format!("{} -> {} (sigma+)", ket(&r.empty), ket(&r.excited[0])), r.control_dipole[0]),
        ("d_n'", format!("{} -> {} (sigma+)", ket(&r.empty), ket(&r.excited[1])), r.control_dipole[1]),
        ("V_n", format!("Omega_c/2, Omega_c = {}", r.control.rabi), r.coupling[0]),
        ("V_n'", "V_n d_n'/d_n".to_string(), r.coupling[1]),
        ("V_n'/V_n", String::new(), r.coupling_ratio),
    ];
    for (name, what, value) in rows {
        writeln!(out, "{name:<10} {what:<36} {value:>24.17}").unwrap();
    }
    writeln!(out, "line strengths (fraction of decay of F' into F):").unwrap();
    for l in &r.line_strengths {
        writeln!(out, "  F'={} -> F={}  {:.17}", l.excited_f, l.ground_f, l.strength).unwrap();
    }
    writeln!(out, "completeness deviation: {:.3e}", r.completeness_deviation).unwrap();
    out
}

/// Summary statistics written next to figure spectra.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub model: String,
    pub peaks: Vec<Peak>,
    pub eit_minimum: Option<Extremum>,
}

pub fn summarize(label: &str, scheme: &SchemeInstance, spec: &SusceptibilitySpectrum, window: (f64, f64)) -> Result<SpectrumSummary, CliError> {
    let peaks = find_peaks(spec, &PeakOptions::default()).map_err(physics)?;
    let eit_minimum = eit_minimum(scheme, window).ok();
    Ok(SpectrumSummary { model: label.into(), peaks, eit_minimum })
}

/// `chi` columns for the given models on a grid, cold atoms.
pub fn model_columns(control: ControlField, grid: FrequencyGrid, labels: &[&str]) -> Result<Columns, CliError> {
    let job = SpectrumJob { level: LevelConfig::cesium_d1(), control, model: ModelSelection::Full, grid, doppler: None };
    let mut cols = Vec::new();
    for label in labels {
        let model = match *label {
            "lambda" => ModelSelection::Lambda,
            "off" => ModelSelection::Off,
            _ => ModelSelection::Full,
        };
        cols.extend(SpectrumJob { model, ..job.clone() }.columns()?);
    }
    Ok(cols)
}
