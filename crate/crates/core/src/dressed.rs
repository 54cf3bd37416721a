//! Quasi-energies and the dressed retarded Green matrix of the excited doublet.
//!
//! Each excited level `l` with partner `p` obeys
//!
//! ```text
//! G_ll = 1 / ( E - E_l + i/2 - |V_l|^2 (E - E_p + i/2) / ((E - E_p+)(E - E_p-)) )
//! G_pl = V_p V_l^* / ((E - E_p+)(E - E_p-)) * G_ll
//! ```
//!
//! where `E_p+-` are the quasi-energies of `p` dressed alone by the control field. The
//! control photon energy seen by a moving atom is `omega - shift`; probe shifts are
//! applied by the caller through `E`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::{Excited, SchemeInstance, GAMMA};

const HALF_GAMMA: Complex64 = Complex64::new(0.0, GAMMA / 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergyPair {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl QuasiEnergyPair {
    /// `(E - E_+)(E - E_-)`
    pub fn denominator(&self, e: Complex64) -> Complex64 {
        (e - self.plus) * (e - self.minus)
    }
}

/// Quasi-energies of `level` dressed by the control alone; `velocity_shift` is the
/// control Doppler shift `k.v` in units of gamma.
pub fn quasi_energies(level: Excited, scheme: &SchemeInstance, velocity_shift: f64) -> QuasiEnergyPair {
    quasi_energies_shifted(level, scheme, Complex64::new(velocity_shift, 0.0))
}

pub(crate) fn quasi_energies_shifted(
    level: Excited,
    scheme: &SchemeInstance,
    shift: Complex64,
) -> QuasiEnergyPair {
    let omega = scheme.control_frequency - shift;
    let e_level = Complex64::new(scheme.energy(level), 0.0);
    let v2 = scheme.coupling(level).norm_sqr();
    let mean = (omega + e_level - HALF_GAMMA) * 0.5;
    let detuning = e_level - omega - HALF_GAMMA;
    let root = (v2 + detuning * detuning * 0.25).sqrt();
    let (a, b) = (mean + root, mean - root);
    let a_first = a.re > b.re || (a.re == b.re && a.im >= b.im);
    if a_first {
        QuasiEnergyPair { plus: a, minus: b }
    } else {
        QuasiEnergyPair { plus: b, minus: a }
    }
}

/// Dressing correction to `level` from `|m'>` and the control-dressed partner level.
pub fn self_energy(
    level: Excited,
    e: Complex64,
    scheme: &SchemeInstance,
    velocity_shift: f64,
) -> Result<Complex64> {
    let shift = Complex64::new(velocity_shift, 0.0);
    let v2 = scheme.coupling(level).norm_sqr();
    if v2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let partner = level.partner();
    let denominator = quasi_energies_shifted(partner, scheme, shift).denominator(e);
    if denominator == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleEvaluation { re: e.re, im: e.im });
    }
    Ok(v2 * (e - scheme.energy(partner) + HALF_GAMMA) / denominator)
}

/// 2x2 Green matrix over `{n, n'}`, units `1/gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenMatrix {
    pub g: [[Complex64; 2]; 2],
}

impl GreenMatrix {
    pub fn get(&self, row: Excited, col: Excited) -> Complex64 {
        self.g[row.index()][col.index()]
    }

    /// `sum_{n1,n2} c*_{n1} c_{n2} g[n1][n2]`
    pub fn contract(&self, probe: &[Complex64; 2]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, row) in self.g.iter().enumerate() {
            for (c, g) in row.iter().enumerate() {
                acc += probe[r].conj() * probe[c] * g;
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.g.iter().flatten().all(|z| z.is_finite())
    }
}

/// Diagonal entry and the entry below/above it for `level`, evaluated through the
/// factored quasi-energy form. Removable singularities (dark-state cancellations)
/// are resolved to their limits.
fn column(level: Excited, e: Complex64, scheme: &SchemeInstance, shift: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let partner = level.partner();
    let a = e - scheme.energy(level) + HALF_GAMMA;
    let b = e - scheme.energy(partner) + HALF_GAMMA;
    let v = scheme.coupling(level);
    let vp = scheme.coupling(partner);
    let v2 = v.norm_sqr();
    let cross = vp * v.conj();
    // (E - E_p+)(E - E_p-), expanded so that exact cancellations stay exact
    let d = e - (scheme.control_frequency - shift);
    let p = b * d - vp.norm_sqr();

    if v2 == 0.0 {
        return (a.inv(), zero);
    }
    if p == zero {
        // self-energy diverges: G_ll -> 0 while G_pl stays finite
        return (zero, -cross / (v2 * b));
    }
    let diag = (a - v2 * b / p).inv();
    let off = if cross == zero { zero } else { cross / p * diag };
    (diag, off)
}

pub(crate) fn green_unchecked(e: Complex64, scheme: &SchemeInstance, shift: Complex64) -> GreenMatrix {
    let (g_nn, g_pn) = column(Excited::N, e, scheme, shift);
    let (g_pp, g_np) = column(Excited::NPrime, e, scheme, shift);
    GreenMatrix { g: [[g_nn, g_np], [g_pn, g_pp]] }
}

/// Green matrix at complex energy `e` for an atom whose control Doppler shift is
/// `velocity_shift`. The model enters through the scheme's couplings.
pub fn green_matrix(e: Complex64, scheme: &SchemeInstance, velocity_shift: f64) -> Result<GreenMatrix> {
    let shift = Complex64::new(velocity_shift, 0.0);
    let det = evaluate_cubic(&characteristic_cubic(scheme, velocity_shift), e);
    let g = green_unchecked(e, scheme, shift);
    if det == Complex64::new(0.0, 0.0) || !g.is_finite() {
        return Err(Error::PoleEvaluation { re: e.re, im: e.im });
    }
    Ok(g)
}

/// Monic coefficients `[c0, c1, c2, 1]` of the cubic whose roots are the poles of the
/// Green matrix: `(E-a)(E-b)(E-w) - |V_n'|^2 (E-a) - |V_n|^2 (E-b)` with
/// `a = E_n - i/2`, `b = E_n' - i/2`, `w` the control frequency.
pub fn characteristic_cubic(scheme: &SchemeInstance, velocity_shift: f64) -> [Complex64; 4] {
    let alpha = scheme.energy_n - HALF_GAMMA;
    let beta = scheme.energy_n_prime - HALF_GAMMA;
    let w = Complex64::new(scheme.control_frequency - velocity_shift, 0.0);
    let vn2 = scheme.coupling(Excited::N).norm_sqr();
    let vp2 = scheme.coupling(Excited::NPrime).norm_sqr();
    let c2 = -(alpha + beta + w);
    let c1 = alpha * beta + alpha * w + beta * w - vn2 - vp2;
    let c0 = -alpha * beta * w + vp2 * alpha + vn2 * beta;
    [c0, c1, c2, Complex64::new(1.0, 0.0)]
}

fn evaluate_cubic(c: &[Complex64; 4], x: Complex64) -> Complex64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

/// The three dressed resonances (poles of the Green matrix), sorted by real part.
pub fn poles(scheme: &SchemeInstance, velocity_shift: f64) -> [Complex64; 3] {
    let c = characteristic_cubic(scheme, velocity_shift);
    let mut roots = cubic_roots(c[2], c[1], c[0]);
    for r in roots.iter_mut() {
        // Newton polish
        for _ in 0..4 {
            let f = evaluate_cubic(&c, *r);
            let df = (c[3] * 3.0 * *r + c[2] * 2.0) * *r + c[1];
            if df == Complex64::new(0.0, 0.0) {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Roots of `x^3 + a x^2 + b x + c` by Cardano's formula.
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u1 = -q / 2.0 + disc;
    let u2 = -q / 2.0 - disc;
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let zero = Complex64::new(0.0, 0.0);
    if u == zero {
        return [-shift; 3];
    }
    let cbrt = u.powf(1.0 / 3.0);
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut out = [zero; 3];
    let mut k = Complex64::new(1.0, 0.0);
    for root in out.iter_mut() {
        let t = k * cbrt;
        *root = t - p / (3.0 * t) - shift;
        k *= omega;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_scheme, ControlField, LevelConfig, Model};

    fn scheme(delta: f64, rabi: f64, model: Model) -> SchemeInstance {
        build_scheme(&LevelConfig::cesium_d1(), &ControlField::new(delta, rabi).unwrap(), model).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn resonant_splitting_is_rabi_frequency_without_decay() {
        // gamma -> 0 is emulated by evaluating the discriminant directly
        let s = scheme(0.0, 15.0, Model::Lambda);
        let q = quasi_energies(Excited::N, &s, 0.0);
        let split = q.plus - q.minus;
        // with decay the splitting is 2 sqrt(|V|^2 - 1/16)
        let expected = 2.0 * (7.5f64.powi(2) - 1.0 / 16.0).sqrt();
        assert!((split.re - expected).abs() < 1e-12, "{split}");
        assert!(split.im.abs() < 1e-12);
        assert!((expected - 15.0).abs() < 0.01);
    }

    #[test]
    fn decoupled_branches() {
        let s = scheme(3.0, 0.0, Model::Full);
        let q = quasi_energies(Excited::N, &s, 0.0);
        assert!((q.plus - c(3.0, 0.0)).norm() < 1e-14);
        assert!((q.minus - c(0.0, -0.5)).norm() < 1e-14);
    }

    #[test]
    fn lambda_self_energy_reduces() {
        let s = scheme(-4.0, 6.0, Model::Lambda);
        let e = c(1.3, 0.2);
        let sigma = self_energy(Excited::N, e, &s, 0.0).unwrap();
        let expected = 9.0 / (e - (-4.0));
        assert!((sigma - expected).norm() < 1e-13 * expected.norm());
        let off = scheme(-4.0, 0.0, Model::Full);
        assert_eq!(self_energy(Excited::N, e, &off, 0.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn bare_propagators_without_coupling() {
        let s = scheme(0.0, 0.0, Model::Full);
        let e = c(10.0, 0.0);
        let g = green_matrix(e, &s, 0.0).unwrap();
        assert!((g.get(Excited::N, Excited::N) - (e + c(0.0, 0.5)).inv()).norm() < 1e-15);
        let b = (e - s.energy_n_prime + c(0.0, 0.5)).inv();
        assert!((g.get(Excited::NPrime, Excited::NPrime) - b).norm() < 1e-15);
        assert_eq!(g.get(Excited::N, Excited::NPrime), c(0.0, 0.0));
        assert_eq!(g.get(Excited::NPrime, Excited::N), c(0.0, 0.0));
    }

    #[test]
    fn dark_point_gives_zero_diagonal() {
        let s = scheme(2.0, 10.0, Model::Lambda);
        let g = green_matrix(c(2.0, 0.0), &s, 0.0).unwrap();
        assert_eq!(g.get(Excited::N, Excited::N), c(0.0, 0.0));
    }

    #[test]
    fn pole_evaluation_is_reported() {
        let s = scheme(0.0, 0.0, Model::Lambda);
        let err = green_matrix(c(0.0, -0.5), &s, 0.0).unwrap_err();
        assert!(matches!(err, Error::PoleEvaluation { .. }));
        let s = scheme(5.0, 4.0, Model::Lambda);
        let q = quasi_energies(Excited::NPrime, &s, 0.0);
        assert!(self_energy(Excited::N, q.plus, &s, 0.0).is_err());
    }

    #[test]
    fn green_poles_are_cubic_roots() {
        let s = scheme(-50.0, 15.0, Model::Full);
        let c = characteristic_cubic(&s, 0.0);
        for r in poles(&s, 0.0) {
            assert!(evaluate_cubic(&c, r).norm() < 1e-9, "{r}");
            assert!(r.im < 0.0);
        }
    }
}
