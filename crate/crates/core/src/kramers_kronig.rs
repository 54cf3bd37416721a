//! Numerical Hilbert transform used to check that `Re chi` follows from `Im chi`.
//!
//! For a retarded response that vanishes at large detuning,
//! `Re chi(x) = (1/pi) PV int Im chi(x') / (x' - x) dx'`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dressed::poles;
use crate::error::{invalid, Result};
use crate::scheme::SchemeInstance;
use crate::susceptibility::chi_at;

/// Principal-value Hilbert transform of the piecewise-linear interpolant of `(xs, f)`,
/// evaluated at each of `targets`. Contributions from outside `[xs[0], xs[last]]` are
/// ignored.
pub fn hilbert_transform(xs: &[f64], f: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    if xs.len() < 2 || xs.len() != f.len() {
        return invalid("Hilbert transform needs at least two samples of matching length");
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("Hilbert transform abscissae must be strictly increasing");
    }
    let slopes: Vec<f64> = xs.windows(2).zip(f.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    Ok(targets
        .par_iter()
        .map(|&x0| {
            let log = |x: f64| if x == x0 { 0.0 } else { (x - x0).abs().ln() };
            let mut acc = 0.0;
            let mut log_a = log(xs[0]);
            for k in 0..slopes.len() {
                let (a, b) = (xs[k], xs[k + 1]);
                let s = slopes[k];
                let log_b = log(b);
                // f(x') = f_lin(x0) + s (x' - x0) on this segment
                let at_x0 = f[k] + s * (x0 - a);
                acc += s * (b - a) + at_x0 * (log_b - log_a);
                log_a = log_b;
            }
            acc / std::f64::consts::PI
        })
        .collect())
}

/// Uniform grid on `[-half_width, half_width]` with step `base_step`, merged with
/// `per_pole` points `center + width tan(theta)` around every `(center, width)` resonance.
pub fn pole_adapted_grid(half_width: f64, base_step: f64, resonances: &[(f64, f64)], per_pole: usize) -> Result<Vec<f64>> {
    if !(half_width > 0.0 && base_step > 0.0) || !half_width.is_finite() {
        return invalid("grid half width and step must be positive");
    }
    let n = (2.0 * half_width / base_step).ceil() as usize;
    let step = 2.0 * half_width / n as f64;
    let mut xs: Vec<f64> = (0..=n).map(|i| -half_width + step * i as f64).collect();
    for &(center, width) in resonances {
        if !(width > 0.0) {
            continue;
        }
        for i in 0..per_pole {
            let theta = std::f64::consts::PI * ((i as f64 + 0.5) / per_pole as f64 - 0.5);
            let x = center + width * theta.tan();
            if x.abs() < half_width {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    Ok(xs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KramersKronigReport {
    pub half_width: f64,
    pub points: usize,
    /// Trapezoid-weighted relative L2 distance between the reconstructed and direct `Re chi`.
    pub relative_l2: f64,
}

/// Reconstruct `Re chi` from `Im chi` of the cold-atom response on `|delta_bar| <= half_width`.
pub fn kramers_kronig_check(scheme: &SchemeInstance, half_width: f64) -> Result<KramersKronigReport> {
    let resonances: Vec<(f64, f64)> = poles(scheme, 0.0)
        .iter()
        .map(|p| (p.re - scheme.energy_n, p.im.abs()))
        .collect();
    let xs = pole_adapted_grid(half_width, 0.5, &resonances, 400)?;
    let chi: Vec<_> = xs.par_iter().map(|&x| chi_at(x, scheme)).collect();
    let im: Vec<f64> = chi.iter().map(|c| c.im).collect();
    let rebuilt = hilbert_transform(&xs, &im, &xs)?;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..xs.len() {
        let left = if k > 0 { xs[k] - xs[k - 1] } else { 0.0 };
        let right = if k + 1 < xs.len() { xs[k + 1] - xs[k] } else { 0.0 };
        let w = 0.5 * (left + right);
        num += w * (rebuilt[k] - chi[k].re).powi(2);
        den += w * chi[k].re.powi(2);
    }
    Ok(KramersKronigReport { half_width, points: xs.len(), relative_l2: (num / den).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_pair() {
        // Im of -1/(x + i/2) is a Lorentzian whose Hilbert transform is -x/(x^2 + 1/4)
        let xs = pole_adapted_grid(4000.0, 0.5, &[(0.0, 0.5)], 400).unwrap();
        let im: Vec<f64> = xs.iter().map(|x| 0.5 / (x * x + 0.25)).collect();
        let targets = [-3.0, -0.4, 0.0, 0.2, 1.0, 10.0];
        let re = hilbert_transform(&xs, &im, &targets).unwrap();
        for (x, r) in targets.iter().zip(re) {
            let exact = -x / (x * x + 0.25);
            assert!((r - exact).abs() < 2e-3, "{x}: {r} vs {exact}");
        }
    }

    #[test]
    fn rejects_unsorted_abscissae() {
        assert!(hilbert_transform(&[0.0, 0.0], &[1.0, 1.0], &[0.0]).is_err());
        assert!(hilbert_transform(&[0.0], &[1.0], &[0.0]).is_err());
    }
}
