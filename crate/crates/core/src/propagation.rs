//! Linear propagation of probe pulses through a homogeneous slab of the dressed medium.
//!
//! The slab response is the transfer function `H(W) = exp(2 pi i C chi(delta_0 + W))`
//! with `C = n0 (lambda / 2 pi)^2 L` the cooperativity. The vacuum transit phase is
//! dropped, so all delays are relative to vacuum.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Error, Result};
use crate::scheme::SchemeInstance;
use crate::susceptibility::{chi_at, chi_derivative, DopplerAverager, DopplerConfig};

/// Envelope magnitude allowed at the window edges of an input pulse, relative to its peak.
pub const INPUT_EDGE_LIMIT: f64 = 1e-6;
/// Same, for the propagated pulse; larger values mean the response wrapped around.
pub const OUTPUT_EDGE_LIMIT: f64 = 1e-4;
/// Smallest time grid used by [`run_gaussian`].
pub const MIN_SAMPLES: usize = 1 << 14;
const MAX_SAMPLES: usize = 1 << 22;

/// Caesium-133 mass in atomic mass units.
pub const CESIUM_MASS_AMU: f64 = 132.905_451_961;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumConfig {
    pub cooperativity: f64,
    pub scheme: SchemeInstance,
    pub doppler: Option<DopplerConfig>,
    /// Atomic mass in atomic mass units, used to turn a temperature into a thermal width.
    pub atom_mass: f64,
}

impl MediumConfig {
    pub fn cold(cooperativity: f64, scheme: SchemeInstance) -> Result<Self> {
        let m = MediumConfig { cooperativity, scheme, doppler: None, atom_mass: CESIUM_MASS_AMU };
        m.check()?;
        Ok(m)
    }

    /// A vanishing cooperativity is accepted and describes vacuum.
    pub fn check(&self) -> Result<()> {
        if !self.cooperativity.is_finite() || self.cooperativity < 0.0 {
            return invalid(format!("cooperativity {} must be finite and >= 0", self.cooperativity));
        }
        if !(self.atom_mass > 0.0) {
            return invalid(format!("atom mass {} must be positive", self.atom_mass));
        }
        Ok(())
    }

    /// Enable Doppler averaging for a gas at `temperature` kelvin, given the probe
    /// wavelength in metres and the natural linewidth in rad/s.
    pub fn with_temperature(mut self, temperature: f64, wavelength: f64, gamma: f64) -> Result<Self> {
        const KB: f64 = 1.380_649e-23;
        const AMU: f64 = 1.660_539_066_60e-27;
        if !(temperature >= 0.0 && wavelength > 0.0 && gamma > 0.0) {
            return invalid("temperature must be >= 0, wavelength and linewidth > 0");
        }
        let v_rms = (KB * temperature / (self.atom_mass * AMU)).sqrt();
        let width = 2.0 * PI / wavelength * v_rms / gamma;
        self.doppler = Some(DopplerConfig::thermal(width));
        Ok(self)
    }

    fn chi_fn(&self) -> Result<impl Fn(f64) -> Complex64 + Sync + '_> {
        let avg = match self.doppler.filter(|d| d.enabled) {
            Some(cfg) => Some(DopplerAverager::new(&cfg)?),
            None => None,
        };
        Ok(move |x: f64| match &avg {
            Some(a) => a.chi(x, &self.scheme),
            None => chi_at(x, &self.scheme),
        })
    }
}

/// Slab transfer function on the given envelope frequencies (units of gamma).
pub fn transfer_function(omega: &[f64], medium: &MediumConfig, carrier_detuning: f64) -> Result<Vec<Complex64>> {
    medium.check()?;
    if medium.cooperativity == 0.0 {
        return Ok(vec![Complex64::new(1.0, 0.0); omega.len()]);
    }
    let chi = medium.chi_fn()?;
    let scale = Complex64::new(0.0, 2.0 * PI * medium.cooperativity);
    Ok(omega.par_iter().map(|&w| (scale * chi(carrier_detuning + w)).exp()).collect())
}

/// Analytic group delay `2 pi C dRe chi / d delta_bar` of a cold medium (units of 1/gamma).
pub fn group_delay(medium: &MediumConfig, carrier_detuning: f64) -> f64 {
    2.0 * PI * medium.cooperativity * chi_derivative(carrier_detuning, &medium.scheme).re
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProfile {
    pub t: Vec<f64>,
    pub envelope: Vec<Complex64>,
    pub carrier_detuning: f64,
}

impl PulseProfile {
    /// Gaussian whose intensity `|e|^2` has full width `fwhm` and peaks at `center`.
    pub fn gaussian(fwhm: f64, carrier_detuning: f64, center: f64, dt: f64, samples: usize) -> Result<Self> {
        if !(fwhm > 0.0 && dt > 0.0) || samples < 2 {
            return invalid("Gaussian pulse needs fwhm > 0, dt > 0 and at least two samples");
        }
        let t: Vec<f64> = (0..samples).map(|k| k as f64 * dt).collect();
        let a = 2.0 * LN_2 / (fwhm * fwhm);
        let envelope = t.iter().map(|&x| Complex64::new((-a * (x - center).powi(2)).exp(), 0.0)).collect();
        let p = PulseProfile { t, envelope, carrier_detuning };
        p.check()?;
        Ok(p)
    }

    pub fn dt(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt()
    }

    pub fn peak(&self) -> f64 {
        self.envelope.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn edge(&self) -> f64 {
        self.envelope[0].norm().max(self.envelope[self.envelope.len() - 1].norm())
    }

    pub fn check(&self) -> Result<()> {
        if self.t.len() < 2 || self.t.len() != self.envelope.len() {
            return invalid("pulse needs at least two samples and matching arrays");
        }
        let dt = self.dt();
        if !(dt > 0.0) || self.t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs())) {
            return invalid("pulse time grid must be uniform and increasing");
        }
        let energy = self.energy();
        if !(energy > 0.0 && energy.is_finite()) {
            return invalid("pulse energy must be finite and positive");
        }
        if self.edge() > INPUT_EDGE_LIMIT * self.peak() {
            return invalid(format!(
                "pulse does not decay below {INPUT_EDGE_LIMIT:e} of its peak at the window edges"
            ));
        }
        Ok(())
    }

    /// Envelope frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.t.len();
        let dw = 2.0 * PI / (n as f64 * self.dt());
        (0..n).map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dw).collect()
    }
}

/// Propagate through the slab; the output shares the input time grid.
pub fn propagate_pulse(pulse: &PulseProfile, medium: &MediumConfig) -> Result<PulseProfile> {
    pulse.check()?;
    let n = pulse.t.len();
    let h = transfer_function(&pulse.frequencies(), medium, pulse.carrier_detuning)?;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = pulse.envelope.clone();
    // the e^{+iWt} kernel is the unnormalized backward DFT
    planner.plan_fft_inverse(n).process(&mut buf);
    for (z, hj) in buf.iter_mut().zip(&h) {
        *z *= hj;
    }
    planner.plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= norm;
    }
    let out = PulseProfile { t: pulse.t.clone(), envelope: buf, carrier_detuning: pulse.carrier_detuning };
    let peak = out.peak();
    if peak > 0.0 && out.edge() > OUTPUT_EDGE_LIMIT * peak {
        return Err(Error::WindowTooSmall { edge: out.edge() / peak, limit: OUTPUT_EDGE_LIMIT });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseMetrics {
    pub transmission: f64,
    pub centroid_delay: f64,
    pub fwhm_in: f64,
    pub fwhm_out: f64,
    pub fractional_delay: f64,
    /// `T * min(1, centroid_delay / fwhm_in)`, clamped below at zero.
    pub proxy_efficiency: f64,
}

fn centroid(p: &PulseProfile) -> f64 {
    let (num, den) = p
        .t
        .iter()
        .zip(&p.envelope)
        .fold((0.0, 0.0), |(n, d), (t, z)| (n + t * z.norm_sqr(), d + z.norm_sqr()));
    num / den
}

/// Full width at half maximum of `|e|^2`, from the outermost interpolated crossings.
fn intensity_fwhm(p: &PulseProfile) -> f64 {
    let y: Vec<f64> = p.envelope.iter().map(|z| z.norm_sqr()).collect();
    let top = y.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0.0;
    }
    let half = top / 2.0;
    let first = y.iter().position(|&v| v >= half).unwrap();
    let last = y.iter().rposition(|&v| v >= half).unwrap();
    let t = &p.t;
    let left = if first == 0 {
        t[0]
    } else {
        t[first - 1] + (half - y[first - 1]) / (y[first] - y[first - 1]) * (t[first] - t[first - 1])
    };
    let right = if last + 1 == y.len() {
        t[last]
    } else {
        t[last] + (y[last] - half) / (y[last] - y[last + 1]) * (t[last + 1] - t[last])
    };
    right - left
}

pub fn pulse_metrics(input: &PulseProfile, output: &PulseProfile) -> Result<PulseMetrics> {
    if input.t != output.t {
        return invalid("input and output pulses must share a time grid");
    }
    let e_in = input.energy();
    if !(e_in > 0.0) {
        return invalid("input pulse has zero energy");
    }
    let e_out = output.energy();
    let fwhm_in = intensity_fwhm(input);
    let (centroid_delay, fwhm_out) =
        if e_out > 0.0 { (centroid(output) - centroid(input), intensity_fwhm(output)) } else { (0.0, 0.0) };
    let transmission = e_out / e_in;
    let fractional_delay = centroid_delay / fwhm_in;
    Ok(PulseMetrics {
        transmission,
        centroid_delay,
        fwhm_in,
        fwhm_out,
        fractional_delay,
        proxy_efficiency: transmission * fractional_delay.clamp(0.0, 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseRun {
    pub input: PulseProfile,
    pub output: PulseProfile,
    pub metrics: PulseMetrics,
}

/// Time grid for a Gaussian of the given width: at least [`MIN_SAMPLES`] points, step at
/// most `fwhm / 10`, spanning `16 fwhm` plus the expected delay, with the pulse centred
/// `8 fwhm` from the start.
pub fn default_window(fwhm: f64, expected_delay: f64) -> (f64, usize) {
    // very long expected delays are left to the wraparound retry
    let span = 16.0 * fwhm + expected_delay.clamp(0.0, 64.0 * fwhm);
    let mut n = MIN_SAMPLES;
    while span / n as f64 > fwhm / 10.0 && n < MAX_SAMPLES {
        n *= 2;
    }
    (span / n as f64, n)
}

/// Propagate a Gaussian pulse, doubling the time window while the output wraps around.
pub fn run_gaussian(medium: &MediumConfig, carrier_detuning: f64, fwhm: f64) -> Result<PulseRun> {
    run_gaussian_with(medium, carrier_detuning, fwhm, 1)
}

/// As [`run_gaussian`], with the number of time samples multiplied by `refine` at fixed span.
pub fn run_gaussian_with(medium: &MediumConfig, carrier_detuning: f64, fwhm: f64, refine: usize) -> Result<PulseRun> {
    medium.check()?;
    if refine == 0 || !refine.is_power_of_two() {
        return invalid("refinement factor must be a power of two");
    }
    let expected = if medium.doppler.is_some_and(|d| d.enabled) { 0.0 } else { group_delay(medium, carrier_detuning) };
    let (dt, mut n) = default_window(fwhm, if expected.is_finite() { expected } else { 0.0 });
    let dt = dt / refine as f64;
    n *= refine;
    loop {
        let input = PulseProfile::gaussian(fwhm, carrier_detuning, 8.0 * fwhm, dt, n)?;
        match propagate_pulse(&input, medium) {
            Ok(output) => {
                let metrics = pulse_metrics(&input, &output)?;
                return Ok(PulseRun { input, output, metrics });
            }
            Err(Error::WindowTooSmall { .. }) if n < MAX_SAMPLES => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub carrier_detuning: f64,
    pub fwhm: f64,
    pub transmission: f64,
    pub centroid_delay: f64,
    pub fractional_delay: f64,
    pub proxy_efficiency: f64,
}

/// Propagate every `(carrier, fwhm)` pair; rows come back carrier-major.
pub fn sweep(medium: &MediumConfig, carriers: &[f64], fwhms: &[f64]) -> Result<Vec<SweepRow>> {
    let pairs: Vec<(f64, f64)> = carriers.iter().flat_map(|&c| fwhms.iter().map(move |&f| (c, f))).collect();
    pairs
        .par_iter()
        .map(|&(c, f)| {
            let m = run_gaussian(medium, c, f)?.metrics;
            Ok(SweepRow {
                carrier_detuning: c,
                fwhm: f,
                transmission: m.transmission,
                centroid_delay: m.centroid_delay,
                fractional_delay: m.fractional_delay,
                proxy_efficiency: m.proxy_efficiency,
            })
        })
        .collect()
}

/// Default pulse widths tried by the operating-point search (units of 1/gamma).
pub const DEFAULT_SWEEP_FWHMS: [f64; 5] = [2.5, 5.0, 10.0, 20.0, 40.0];
/// Smallest transmission accepted by the operating-point search.
pub const DEFAULT_MIN_TRANSMISSION: f64 = 0.85;

/// Row with the largest proxy efficiency among those transmitting at least
/// `min_transmission`; the first such row wins ties.
pub fn best_operating_point(rows: &[SweepRow], min_transmission: f64) -> Option<SweepRow> {
    rows.iter()
        .filter(|r| r.transmission >= min_transmission)
        .fold(None, |best: Option<SweepRow>, r| match best {
            Some(b) if b.proxy_efficiency >= r.proxy_efficiency => Some(b),
            _ => Some(*r),
        })
}
