//! Hyperfine electric-dipole amplitudes.
//!
//! Convention: `<Fe Me| d_q |Fg Mg> = (-1)^(Fe-Me) (Fe 1 Fg; -Me q Mg) <Fe||d||Fg>` with
//! `<Fe||d||Fg> = (-1)^(Je+I+Fg+1) sqrt((2Fe+1)(2Fg+1)) {Je Fe I; Fg Jg 1} <Je||d||Jg>`,
//! the electron angular momentum coupled first, `|(J I) F M>`. The electronic reduced
//! element is set to `sqrt(2Je+1)` so that every excited sublevel has unit total
//! decay strength.

use serde::{Deserialize, Serialize};

use super::{wigner3j, wigner6j, HalfInt};
use crate::error::{invalid, Result};

/// Identifier of the phase and normalization convention used by [`dipole_amplitude`].
pub const WIGNER_CONVENTION: &str =
    "wigner-eckart(-1)^(Fe-Me)*3j(Fe,1,Fg;-Me,q,Mg); 6j-recoupling (J I)F; sum-rule-normalized";

/// Fine-structure line and nuclear spin of an alkali transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifold {
    pub nuclear_spin: HalfInt,
    pub j_ground: HalfInt,
    pub j_excited: HalfInt,
}

impl Manifold {
    /// 133Cs D1 line: I = 7/2, J = 1/2 -> J' = 1/2.
    pub const CESIUM_D1: Manifold = Manifold {
        nuclear_spin: HalfInt::halves(7),
        j_ground: HalfInt::HALF,
        j_excited: HalfInt::HALF,
    };

    pub fn ground_levels(&self) -> Vec<HalfInt> {
        hyperfine_levels(self.j_ground, self.nuclear_spin)
    }

    pub fn excited_levels(&self) -> Vec<HalfInt> {
        hyperfine_levels(self.j_excited, self.nuclear_spin)
    }
}

fn hyperfine_levels(j: HalfInt, i: HalfInt) -> Vec<HalfInt> {
    HalfInt::range_inclusive((j - i).abs(), j + i).collect()
}

/// A Zeeman sublevel `|F M>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sublevel {
    pub f: HalfInt,
    pub m: HalfInt,
}

impl Sublevel {
    pub fn new(f: HalfInt, m: HalfInt) -> Self {
        Sublevel { f, m }
    }

    fn check(&self) -> Result<()> {
        if self.f.twice() < 0 {
            return invalid(format!("negative F = {}", self.f));
        }
        if !self.f.same_parity(self.m) {
            return invalid(format!("F = {} and M = {} differ in parity", self.f, self.m));
        }
        if self.m.abs() > self.f {
            return invalid(format!("|M| = {} exceeds F = {}", self.m.abs(), self.f));
        }
        Ok(())
    }
}

/// Spherical component `q` of the dipole operator driving `M -> M + q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    SigmaMinus,
    Pi,
    SigmaPlus,
}

impl Polarization {
    pub const ALL: [Polarization; 3] =
        [Polarization::SigmaMinus, Polarization::Pi, Polarization::SigmaPlus];

    pub fn q(self) -> i32 {
        match self {
            Polarization::SigmaMinus => -1,
            Polarization::Pi => 0,
            Polarization::SigmaPlus => 1,
        }
    }
}

/// Dimensionless dipole amplitude; `|value| <= 1` by the sum-rule normalization.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DipoleAmplitude(pub f64);

impl DipoleAmplitude {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn phase(twice_exponent: i32) -> Result<f64> {
    if twice_exponent % 2 != 0 {
        return invalid("non-integer phase exponent; check J, I and F parities");
    }
    Ok(if (twice_exponent / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 })
}

/// Reduced hyperfine element `<Fe||d||Fg>` in the normalization of this module.
pub fn reduced_hyperfine(manifold: &Manifold, fg: HalfInt, fe: HalfInt) -> Result<f64> {
    let Manifold { nuclear_spin: i, j_ground: jg, j_excited: je } = *manifold;
    let six = wigner6j(je, fe, i, fg, jg, HalfInt::ONE)?;
    if six == 0.0 {
        return Ok(0.0);
    }
    let sign = phase(je.twice() + i.twice() + fg.twice() + 2)?;
    let electronic = f64::from(je.multiplicity()).sqrt();
    Ok(sign * (f64::from(fe.multiplicity()) * f64::from(fg.multiplicity())).sqrt() * six * electronic)
}

/// `<Fe Me| d_q |Fg Mg>` for the given manifold.
pub fn dipole_amplitude(
    manifold: &Manifold,
    ground: Sublevel,
    excited: Sublevel,
    polarization: Polarization,
) -> Result<DipoleAmplitude> {
    ground.check()?;
    excited.check()?;
    let q = HalfInt::integer(polarization.q());
    if excited.m != ground.m + q {
        return Ok(DipoleAmplitude(0.0));
    }
    let three = wigner3j(excited.f, HalfInt::ONE, ground.f, -excited.m, q, ground.m)?;
    if three == 0.0 {
        return Ok(DipoleAmplitude(0.0));
    }
    let sign = phase(excited.f.twice() - excited.m.twice())?;
    let reduced = reduced_hyperfine(manifold, ground.f, excited.f)?;
    Ok(DipoleAmplitude(sign * three * reduced))
}

/// Fraction of the decay of any `|Fe Me>` sublevel that ends in ground level `Fg`.
///
/// Independent of `Me`; sums to one over the ground levels of the manifold.
pub fn relative_line_strength(manifold: &Manifold, fg: HalfInt, fe: HalfInt) -> Result<f64> {
    if fe.twice() < 0 || fg.twice() < 0 {
        return invalid("negative F");
    }
    let excited = Sublevel::new(fe, fe);
    let mut total = 0.0;
    for mg in fg.projections() {
        for pol in Polarization::ALL {
            let a = dipole_amplitude(manifold, Sublevel::new(fg, mg), excited, pol)?.value();
            total += a * a;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: i32) -> HalfInt {
        HalfInt::halves(n)
    }

    const CS: Manifold = Manifold::CESIUM_D1;

    #[test]
    fn selection_rule_gives_zero() {
        let g = Sublevel::new(h(8), h(4));
        let e = Sublevel::new(h(6), h(4));
        let a = dipole_amplitude(&CS, g, e, Polarization::SigmaPlus).unwrap();
        assert_eq!(a.value(), 0.0);
    }

    #[test]
    fn completeness_for_every_excited_sublevel() {
        for fe in CS.excited_levels() {
            for me in fe.projections() {
                let mut total = 0.0;
                for fg in CS.ground_levels() {
                    for mg in fg.projections() {
                        for pol in Polarization::ALL {
                            let a = dipole_amplitude(
                                &CS,
                                Sublevel::new(fg, mg),
                                Sublevel::new(fe, me),
                                pol,
                            )
                            .unwrap()
                            .value();
                            assert!(a.abs() <= 1.0);
                            total += a * a;
                        }
                    }
                }
                assert!((total - 1.0).abs() < 1e-12, "Fe={fe} Me={me}: {total}");
            }
        }
    }

    #[test]
    fn cesium_line_strengths() {
        let s43 = relative_line_strength(&CS, h(8), h(6)).unwrap();
        let s33 = relative_line_strength(&CS, h(6), h(6)).unwrap();
        assert!((s43 - 0.75).abs() < 1e-14);
        assert!((s43 + s33 - 1.0).abs() < 1e-14);
        // F' = 5 is not part of the D1 manifold
        assert_eq!(relative_line_strength(&CS, h(8), h(10)).unwrap(), 0.0);
    }

    #[test]
    fn malformed_sublevel_is_rejected() {
        let g = Sublevel::new(h(8), h(3));
        let e = Sublevel::new(h(6), h(6));
        assert!(dipole_amplitude(&CS, g, e, Polarization::SigmaMinus).is_err());
    }
}
