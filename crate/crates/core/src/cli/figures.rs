//! Data bundles for the four headline figures: spectra at control detunings 0, -50 and
//! +50 gamma with a 15 gamma Rabi frequency, and pulse delay at cooperativity 25.

use serde::Serialize;
use std::path::{Path, PathBuf};

use super::jobs::{model_columns, render_spectrum, render_sweep, render_trace, summarize, PulseJob, RunConfig};
use super::output::{digest, json, write_atomic};
use super::CliError;
use crate::propagation::{run_gaussian, DEFAULT_MIN_TRANSMISSION, DEFAULT_SWEEP_FWHMS};
use crate::scheme::{build_scheme, ControlField, LevelConfig, Model};
use crate::susceptibility::FrequencyGrid;

pub const FIGURE_IDS: [u8; 4] = [2, 3, 4, 5];
pub const RABI: f64 = 15.0;
pub const COOPERATIVITY: f64 = 25.0;

fn grid(min: f64, max: f64, count: usize) -> FrequencyGrid {
    FrequencyGrid::new(min, max, count).expect("static grid")
}

fn control(delta: f64) -> ControlField {
    ControlField { detuning: delta, rabi: RABI }
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    files.push(path);
    Ok(())
}

fn meta(delta: f64, models: &str) -> Vec<(String, String)> {
    vec![
        ("control_detuning_gamma".into(), delta.to_string()),
        ("rabi_gamma".into(), RABI.to_string()),
        ("models".into(), models.into()),
        ("chi_units".into(), "n0 (lambda/2pi)^3".into()),
    ]
}

#[derive(Serialize)]
struct Summary<T> {
    config_digest: String,
    summaries: Vec<T>,
}

pub fn execute(id: u8, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    match id {
        2 => spectra_bundle(config, dir, 0.0, true),
        3 => spectra_bundle(config, dir, -50.0, false),
        4 => spectra_bundle(config, dir, 50.0, false),
        5 => pulse_bundle(config, dir),
        other => Err(CliError::Usage(format!("unknown figure id {other} (expected 2, 3, 4 or 5)"))),
    }
}

fn spectra_bundle(config: &RunConfig, dir: &Path, delta: f64, resonant: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let c = control(delta);
    let (main_grid, labels, zoom_grid, fine_grid): (_, &[&str], _, _) = if resonant {
        (grid(-30.0, 30.0, 6001), &["full", "lambda", "off"], grid(-4.0, 2.0, 6001), grid(-30.0, 30.0, 60001))
    } else {
        (
            grid(-80.0, 320.0, 8001),
            &["full", "lambda"],
            grid(delta - 5.0, delta + 5.0, 20001),
            grid(-80.0, 320.0, 200_001),
        )
    };
    let cols = model_columns(c, main_grid, labels)?;
    write(dir, "spectra.csv", render_spectrum(&cols, config, &meta(delta, &labels.join(",")))?.as_bytes(), &mut files)?;
    let zoom = model_columns(c, zoom_grid, &["full", "lambda"])?;
    write(dir, "zoom.csv", render_spectrum(&zoom, config, &meta(delta, "full,lambda"))?.as_bytes(), &mut files)?;

    // peaks are located on a grid fine enough to resolve the narrow Raman line
    let fine = model_columns(c, fine_grid, &["full", "lambda"])?;
    let window = if resonant { (-5.0, 5.0) } else { (delta - 5.0, delta + 5.0) };
    let mut summaries = Vec::new();
    for (label, spec) in &fine {
        let model = if label == "lambda" { Model::Lambda } else { Model::Full };
        let s = build_scheme(&LevelConfig::cesium_d1(), &c, model).map_err(|e| CliError::Failure(e.to_string()))?;
        summaries.push(summarize(label, &s, spec, window)?);
    }
    write(dir, "summary.json", &json(&Summary { config_digest: digest(config), summaries })?, &mut files)?;

    let mut recipe = String::from(
        "# gnuplot, run from this directory\n\
         set datafile separator ','; set datafile commentschars '#'; set key autotitle columnhead;\n",
    );
    let mut plot = Vec::new();
    for (k, label) in labels.iter().enumerate() {
        plot.push(format!("'spectra.csv' using 1:{} with lines title 'Im chi {label}'", 3 + 2 * k));
    }
    recipe.push_str(&format!("plot {}\n", plot.join(", ")));
    recipe.push_str(
        "# zoom on the two-photon resonance\n\
         plot 'zoom.csv' using 1:3 with lines title 'full', '' using 1:5 with lines title 'lambda'\n",
    );
    write(dir, "RECIPE.txt", recipe.as_bytes(), &mut files)?;
    Ok(files)
}

fn pulse_bundle(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let job = PulseJob {
        level: LevelConfig::cesium_d1(),
        control: control(50.0),
        model: Model::Full,
        cooperativity: COOPERATIVITY,
        carriers: (0..=70).map(|k| 45.0 + 0.1 * k as f64).collect(),
        fwhms: DEFAULT_SWEEP_FWHMS.to_vec(),
        min_transmission: DEFAULT_MIN_TRANSMISSION,
        doppler: None,
    };
    let (carrier, fwhm, best, rows) = job.solve()?;
    let rows = rows.expect("figure 5 always sweeps");
    write(dir, "sweep.csv", render_sweep(&rows, config).as_bytes(), &mut files)?;

    #[derive(Serialize)]
    struct Best {
        carrier_detuning: f64,
        fwhm: f64,
        #[serde(flatten)]
        metrics: crate::propagation::PulseMetrics,
        config_digest: String,
    }
    let report = Best { carrier_detuning: carrier, fwhm, metrics: best.metrics, config_digest: digest(config) };
    write(dir, "metrics.json", &json(&report)?, &mut files)?;

    // the carrier dependence of the output shape, at the selected width
    let medium = job.medium()?;
    let carriers = [46.0, 47.0, 47.5, carrier, 48.5, 49.0];
    let mut recipe = String::from(
        "# gnuplot, run from this directory\n\
         set datafile separator ','; set datafile commentschars '#'; set key autotitle columnhead;\n\
         plot 'trace_0.csv' using 1:2 with lines title 'input'",
    );
    for (k, c) in carriers.iter().enumerate() {
        let run = run_gaussian(&medium, *c, fwhm).map_err(|e| CliError::Failure(e.to_string()))?;
        let m = vec![
            ("carrier_detuning_gamma".into(), c.to_string()),
            ("fwhm_gamma".into(), fwhm.to_string()),
            ("cooperativity".into(), COOPERATIVITY.to_string()),
            ("transmission".into(), run.metrics.transmission.to_string()),
            ("centroid_delay_gamma".into(), run.metrics.centroid_delay.to_string()),
        ];
        let name = format!("trace_{k}.csv");
        write(dir, &name, render_trace(&run, config, &m).as_bytes(), &mut files)?;
        recipe.push_str(&format!(", '{name}' using 1:3 with lines title 'carrier {c}'"));
    }
    recipe.push_str("\n# operating-point search\nplot 'sweep.csv' using 1:6 with points title 'proxy efficiency'\n");
    write(dir, "RECIPE.txt", recipe.as_bytes(), &mut files)?;
    Ok(files)
}
