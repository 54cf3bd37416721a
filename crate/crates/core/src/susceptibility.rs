//! Probe susceptibility `chi(delta_bar)` from the Green matrix, in units of
//! `n0 (lambda / 2 pi)^3`.
//!
//! `chi = -K sum_{n1,n2} c*_{n1} c_{n2} G_{n1 n2}(E = delta_bar)` with `K = 3/4`, so that a
//! closed two-level transition of unit strength has `Im chi = 3/2` on resonance.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::dressed::green_unchecked;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussHermite;
use crate::scheme::{Excited, SchemeInstance, GAMMA};

/// Overall prefactor relating the Green-matrix contraction to `chi`.
pub const CHI_SCALE: f64 = 0.75;

/// Contour displacement of the Doppler quadrature, in units of the thermal width.
const CONTOUR_SHIFT: f64 = 2.0;

fn probe_energy(delta_bar: f64, scheme: &SchemeInstance) -> f64 {
    delta_bar + scheme.energy_n
}

fn chi_shifted(energy: Complex64, scheme: &SchemeInstance, control_shift: Complex64) -> Complex64 {
    -CHI_SCALE * GAMMA * green_unchecked(energy, scheme, control_shift).contract(&scheme.probe)
}

/// Cold-atom susceptibility at probe detuning `delta_bar` (units of gamma).
pub fn chi_at(delta_bar: f64, scheme: &SchemeInstance) -> Complex64 {
    chi_shifted(
        Complex64::new(probe_energy(delta_bar, scheme), 0.0),
        scheme,
        Complex64::new(0.0, 0.0),
    )
}

/// `d chi / d delta_bar` from the squared resolvent of the three dressed states.
pub fn chi_derivative(delta_bar: f64, scheme: &SchemeInstance) -> Complex64 {
    let e = Complex64::new(probe_energy(delta_bar, scheme), 0.0);
    let half = Complex64::new(0.0, GAMMA / 2.0);
    let [vn, vp] = scheme.coupling;
    let zero = Complex64::new(0.0, 0.0);
    // E - H over (n, n', m')
    let m = [
        [e - scheme.energy_n + half, zero, -vn],
        [zero, e - scheme.energy_n_prime + half, -vp],
        [-vn.conj(), -vp.conj(), e - scheme.control_frequency],
    ];
    let r = invert3(&m);
    let c = [scheme.probe[0], scheme.probe[1], zero];
    // d/dE (E - H)^{-1} = -R^2, and chi = -K c^dag R c
    let mut acc = zero;
    for i in 0..3 {
        for j in 0..3 {
            let r2: Complex64 = (0..3).map(|k| r[i][k] * r[k][j]).sum();
            acc += c[i].conj() * r2 * c[j];
        }
    }
    CHI_SCALE * GAMMA * acc
}

fn invert3(m: &[[Complex64; 3]; 3]) -> [[Complex64; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    adj.map(|row| row.map(|x| x / det))
}

/// One-dimensional thermal motion along the common beam axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DopplerConfig {
    pub enabled: bool,
    /// rms of `k.v` in units of gamma.
    pub thermal_width: f64,
    pub quadrature_order: usize,
    /// Control and probe travel in the same direction.
    pub copropagating: bool,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        DopplerConfig { enabled: false, thermal_width: 0.0, quadrature_order: 64, copropagating: true }
    }
}

impl DopplerConfig {
    pub fn thermal(thermal_width: f64) -> Self {
        DopplerConfig { enabled: true, thermal_width, ..Default::default() }
    }

    fn check(&self) -> Result<()> {
        if self.quadrature_order < 1 {
            return invalid("quadrature_order must be >= 1");
        }
        if !self.thermal_width.is_finite() || self.thermal_width < 0.0 {
            return invalid(format!("thermal width {} must be finite and >= 0", self.thermal_width));
        }
        Ok(())
    }
}

/// Velocity average prepared once and reused across detunings.
///
/// The Gaussian average of the retarded response is analytic below the real velocity
/// axis, so the Gauss-Hermite rule is applied on the line `Im s = -2 sigma`, where the
/// integrand is far from its poles and the rule converges geometrically.
pub struct DopplerAverager {
    config: DopplerConfig,
    /// (complex velocity shift, complex weight)
    points: Vec<(Complex64, Complex64)>,
}

impl DopplerAverager {
    pub fn new(config: &DopplerConfig) -> Result<Self> {
        config.check()?;
        let sigma = config.thermal_width;
        if sigma == 0.0 {
            return Ok(DopplerAverager { config: *config, points: Vec::new() });
        }
        let rule = GaussHermite::new(config.quadrature_order)?;
        let eta = CONTOUR_SHIFT * sigma;
        let points = rule
            .iter()
            .map(|(u, w)| {
                let shift = Complex64::new(std::f64::consts::SQRT_2 * sigma * u, -eta);
                let phase = Complex64::new(
                    eta * eta / (2.0 * sigma * sigma),
                    std::f64::consts::SQRT_2 * u * eta / sigma,
                );
                (shift, w * phase.exp())
            })
            .collect();
        Ok(DopplerAverager { config: *config, points })
    }

    pub fn chi(&self, delta_bar: f64, scheme: &SchemeInstance) -> Complex64 {
        if self.points.is_empty() {
            return chi_at(delta_bar, scheme);
        }
        let e0 = probe_energy(delta_bar, scheme);
        let direction = if self.config.copropagating { 1.0 } else { -1.0 };
        self.points
            .iter()
            .map(|&(s, w)| w * chi_shifted(e0 - s, scheme, direction * s))
            .sum()
    }
}

/// Doppler-averaged susceptibility. Equals [`chi_at`] when the thermal width is zero.
pub fn chi_doppler(delta_bar: f64, scheme: &SchemeInstance, doppler: &DopplerConfig) -> Result<Complex64> {
    Ok(DopplerAverager::new(doppler)?.chi(delta_bar, scheme))
}

/// Uniform grid `min, ..., max` with `count` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return invalid("grid bounds must be finite");
        }
        if min >= max {
            return invalid(format!("grid min {min} must be below max {max}"));
        }
        if count < 2 {
            return invalid(format!("grid needs at least 2 points, got {count}"));
        }
        Ok(FrequencyGrid { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

impl FromStr for FrequencyGrid {
    type Err = Error;

    /// `min:max:count`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(':').map(str::trim).collect();
        let [min, max, count] = parts.as_slice() else {
            return invalid(format!("grid {s:?} is not of the form min:max:count"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number {v:?} in grid")));
        let count = count
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad point count {count:?} in grid")))?;
        FrequencyGrid::new(num(min)?, num(max)?, count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub scheme: SchemeInstance,
    pub doppler: Option<DopplerConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilitySpectrum {
    pub detunings: Vec<f64>,
    pub chi: Vec<Complex64>,
    pub meta: SpectrumMeta,
}

impl SusceptibilitySpectrum {
    /// Invariant violations (empty when the spectrum is well formed and passive).
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.detunings.len() != self.chi.len() {
            out.push(format!("length mismatch: {} detunings, {} values", self.detunings.len(), self.chi.len()));
        }
        if let Some(w) = self.detunings.windows(2).position(|w| !(w[1] > w[0])) {
            out.push(format!("detunings not strictly increasing at index {w}"));
        }
        if let Some((x, c)) = self.detunings.iter().zip(&self.chi).find(|(_, c)| !c.is_finite()) {
            out.push(format!("non-finite chi {c} at {x}"));
        }
        if let Some((x, c)) = self.detunings.iter().zip(&self.chi).find(|(_, c)| c.im < -1e-12) {
            out.push(format!("gain (Im chi = {}) at {x}", c.im));
        }
        out
    }

    pub fn imag(&self) -> Vec<f64> {
        self.chi.iter().map(|c| c.im).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.chi.iter().map(|c| c.re).collect()
    }
}

/// Evaluate the susceptibility on arbitrary detunings (sorted ascending by the caller).
pub fn spectrum_at(
    detunings: Vec<f64>,
    scheme: &SchemeInstance,
    doppler: Option<&DopplerConfig>,
) -> Result<SusceptibilitySpectrum> {
    let doppler = doppler.filter(|d| d.enabled).copied();
    let chi = match &doppler {
        Some(cfg) => {
            let avg = DopplerAverager::new(cfg)?;
            detunings.par_iter().map(|&x| avg.chi(x, scheme)).collect()
        }
        None => detunings.par_iter().map(|&x| chi_at(x, scheme)).collect(),
    };
    Ok(SusceptibilitySpectrum { detunings, chi, meta: SpectrumMeta { scheme: *scheme, doppler } })
}

/// Susceptibility on a uniform grid; Doppler averaging applies when `doppler` is enabled.
pub fn spectrum(
    grid: &FrequencyGrid,
    scheme: &SchemeInstance,
    doppler: Option<&DopplerConfig>,
) -> Result<SusceptibilitySpectrum> {
    let grid = FrequencyGrid::new(grid.min, grid.max, grid.count)?;
    spectrum_at(grid.points(), scheme, doppler)
}

/// Control-free reference: `sum_i |c_i|^2 K (-1) / (delta_bar - E_i + i/2)`.
pub fn bare_chi(delta_bar: f64, scheme: &SchemeInstance) -> Complex64 {
    Excited::BOTH
        .iter()
        .map(|&w| {
            let e = Complex64::new(delta_bar + scheme.energy_n - scheme.energy(w), GAMMA / 2.0);
            -CHI_SCALE * GAMMA * scheme.probe_strength(w) / e
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    pub fwhm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions {
    /// Minimum topographic prominence relative to the largest `Im chi` on the grid.
    pub relative_prominence: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions { relative_prominence: 1e-3 }
    }
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature >= 0.0 || !curvature.is_finite() {
        return (x[1], y[1]);
    }
    let slope_mid = d1 + curvature * (x[1] - x[0]);
    let xv = (x[1] - slope_mid / (2.0 * curvature)).clamp(x[0], x[2]);
    let lagrange = |t: f64| {
        y[0] * (t - x[1]) * (t - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]))
            + y[1] * (t - x[0]) * (t - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]))
            + y[2] * (t - x[0]) * (t - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]))
    };
    (xv, lagrange(xv))
}

fn crossing(x: &[f64], y: &[f64], from: usize, level: f64, step: isize) -> f64 {
    let mut j = from as isize;
    loop {
        let next = j + step;
        if next < 0 || next as usize >= y.len() {
            return x[j as usize];
        }
        let (a, b) = (j as usize, next as usize);
        if y[b] <= level {
            let t = (y[a] - level) / (y[a] - y[b]);
            return x[a] + t * (x[b] - x[a]);
        }
        j = next;
    }
}

/// Local maxima of `Im chi` above the prominence threshold, sorted by position.
///
/// Positions and heights are refined by a parabola through the three samples around each
/// maximum; widths are measured at half of the refined height with linear interpolation.
pub fn find_peaks(spec: &SusceptibilitySpectrum, options: &PeakOptions) -> Result<Vec<Peak>> {
    let x = &spec.detunings;
    let y = spec.imag();
    if x.len() < 3 || x.len() != y.len() {
        return invalid("peak search needs at least 3 samples");
    }
    if y.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("spectrum has non-finite values or unsorted detunings");
    }
    let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = options.relative_prominence * top.abs();
    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let mut left_min = y[i];
        for j in (0..i).rev() {
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        for &v in &y[i + 1..] {
            if v > y[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = y[i] - left_min.max(right_min);
        if prominence <= threshold || prominence <= 0.0 {
            continue;
        }
        let (position, height) = parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]);
        let half = height / 2.0;
        let lo = crossing(x, &y, i, half, -1);
        let hi = crossing(x, &y, i, half, 1);
        peaks.push(Peak { position, height, fwhm: hi - lo });
    }
    Ok(peaks)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub position: f64,
    pub value: f64,
}

const SCAN_POINTS: usize = 4001;

/// Minimum of `Im chi` inside `window`, from a grid scan refined by golden-section search.
pub fn eit_minimum(scheme: &SchemeInstance, window: (f64, f64)) -> Result<Extremum> {
    let (lo, hi) = window;
    let grid = FrequencyGrid::new(lo, hi, SCAN_POINTS)?;
    let xs = grid.points();
    let f = |x: f64| chi_at(x, scheme).im;
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let k = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if k == 0 || k == xs.len() - 1 {
        return Err(Error::NotFound { lo, hi });
    }
    let (mut a, mut b) = (xs[k - 1], xs[k + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(xs[k], ys[k]), (c, fc), (d, fd), ((a + b) / 2.0, f((a + b) / 2.0))];
    let (position, value) = candidates
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    Ok(Extremum { position, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_scheme, ControlField, LevelConfig, Model};

    fn scheme(delta: f64, rabi: f64, model: Model) -> SchemeInstance {
        build_scheme(&LevelConfig::cesium_d1(), &ControlField::new(delta, rabi).unwrap(), model).unwrap()
    }

    /// A closed two-level transition of unit strength.
    fn unit_two_level() -> SchemeInstance {
        let mut s = scheme(0.0, 0.0, Model::Lambda);
        s.probe = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        s
    }

    #[test]
    fn resonant_two_level_value() {
        let chi = chi_at(0.0, &unit_two_level());
        assert!((chi - Complex64::new(0.0, 1.5)).norm() < 1e-15, "{chi}");
    }

    #[test]
    fn lambda_dark_state_is_transparent() {
        for (delta, rabi) in [(0.0, 15.0), (-50.0, 15.0), (3.3, 0.7)] {
            let s = scheme(delta, rabi, Model::Lambda);
            assert_eq!(chi_at(delta, &s).im, 0.0);
        }
    }

    #[test]
    fn grid_parsing() {
        let g: FrequencyGrid = "-30:30:3001".parse().unwrap();
        assert_eq!(g.count, 3001);
        assert!((g.step() - 0.02).abs() < 1e-15);
        assert!("10:-10:100".parse::<FrequencyGrid>().is_err());
        assert!("0:1:1".parse::<FrequencyGrid>().is_err());
        assert!("0:1".parse::<FrequencyGrid>().is_err());
    }

    #[test]
    fn control_off_matches_two_lorentzians() {
        let s = scheme(0.0, 0.0, Model::Full);
        let spec = spectrum(&FrequencyGrid::new(-30.0, 30.0, 3001).unwrap(), &s, None).unwrap();
        for (x, c) in spec.detunings.iter().zip(&spec.chi) {
            assert!((c - bare_chi(*x, &s)).norm() < 1e-10);
        }
    }

    #[test]
    fn single_lorentzian_peak() {
        let spec = spectrum(&FrequencyGrid::new(-10.0, 10.0, 4001).unwrap(), &unit_two_level(), None).unwrap();
        let peaks = find_peaks(&spec, &PeakOptions::default()).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].position.abs() < 1e-9);
        assert!((peaks[0].height - 1.5).abs() < 1e-6);
        assert!((peaks[0].fwhm - 1.0).abs() < 5e-3, "{}", peaks[0].fwhm);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let mut spec = spectrum(&FrequencyGrid::new(-1.0, 1.0, 11).unwrap(), &unit_two_level(), None).unwrap();
        for c in spec.chi.iter_mut() {
            *c = Complex64::new(0.0, 0.25);
        }
        assert!(find_peaks(&spec, &PeakOptions::default()).unwrap().is_empty());
        spec.detunings.truncate(2);
        spec.chi.truncate(2);
        assert!(find_peaks(&spec, &PeakOptions::default()).is_err());
    }

    #[test]
    fn eit_minimum_lambda_sits_on_two_photon_resonance() {
        let s = scheme(0.0, 15.0, Model::Lambda);
        let m = eit_minimum(&s, (-3.0, 3.0)).unwrap();
        assert!(m.position.abs() < 1e-4);
        assert!(m.value.abs() < 1e-10);
    }

    #[test]
    fn eit_minimum_without_interior_minimum() {
        let s = scheme(0.0, 15.0, Model::Lambda);
        // Im chi rises monotonically towards the Autler-Townes peak at 7.5
        assert!(matches!(eit_minimum(&s, (2.0, 6.0)), Err(Error::NotFound { .. })));
    }

    #[test]
    fn doppler_rejects_zero_order() {
        let s = scheme(0.0, 15.0, Model::Full);
        let cfg = DopplerConfig { quadrature_order: 0, ..DopplerConfig::thermal(1.0) };
        assert!(chi_doppler(0.0, &s, &cfg).is_err());
    }

    #[test]
    fn doppler_zero_width_is_cold() {
        let s = scheme(-50.0, 15.0, Model::Full);
        let cfg = DopplerConfig::thermal(0.0);
        for x in [-52.3, 0.0, 12.0] {
            assert_eq!(chi_doppler(x, &s, &cfg).unwrap(), chi_at(x, &s));
        }
    }
}
