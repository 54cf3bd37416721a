//! The four-state working scheme: populated `|m> = |F, M=F>`, empty `|m'> = |F, F-2>`,
//! and the excited pair `|n> = |F'_low, F-1>`, `|n'> = |F'_high, F-1>`.
//!
//! A sigma+ control couples `|m'>` to both excited states; a sigma- probe couples `|m>`
//! to both. Energies live in a rotating frame with `E_m = E_m' = 0` and, by default,
//! `E_n = 0`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{dipole_amplitude, HalfInt, Manifold, Polarization, Sublevel};
use crate::error::{Error, Result};

/// Natural linewidth of both excited hyperfine levels; the unit of energy.
pub const GAMMA: f64 = 1.0;

/// Cs 6P1/2 hyperfine splitting (1167.68 MHz) over the D1 natural linewidth (4.575 MHz).
pub const CS_D1_HYPERFINE_SPLITTING: f64 = 255.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Both excited hyperfine sublevels.
    Full,
    /// Only `|n>`; the three-level approximation.
    Lambda,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Full => "full",
            Model::Lambda => "lambda",
        })
    }
}

/// Model choice as it appears in configuration files and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSelection {
    Full,
    Lambda,
    /// Full and Lambda side by side.
    Both,
    /// Control field switched off.
    Off,
}

impl FromStr for ModelSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(ModelSelection::Full),
            "lambda" => Ok(ModelSelection::Lambda),
            "both" => Ok(ModelSelection::Both),
            "off" => Ok(ModelSelection::Off),
            other => Err(Error::InvalidArgument(format!(
                "unknown model {other:?} (expected full, lambda, both or off)"
            ))),
        }
    }
}

impl fmt::Display for ModelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelSelection::Full => "full",
            ModelSelection::Lambda => "lambda",
            ModelSelection::Both => "both",
            ModelSelection::Off => "off",
        })
    }
}

/// The two excited states of the scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Excited {
    /// `|n>`, the lower hyperfine component.
    N,
    /// `|n'>`, the upper hyperfine component.
    NPrime,
}

impl Excited {
    pub const BOTH: [Excited; 2] = [Excited::N, Excited::NPrime];

    pub fn partner(self) -> Excited {
        match self {
            Excited::N => Excited::NPrime,
            Excited::NPrime => Excited::N,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Excited::N => 0,
            Excited::NPrime => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub manifold: Manifold,
    pub ground_f: HalfInt,
    pub excited_f_low: HalfInt,
    pub excited_f_high: HalfInt,
    /// Excited hyperfine splitting in units of gamma.
    pub hyperfine_splitting: f64,
}

impl Default for LevelConfig {
    fn default() -> Self {
        LevelConfig::cesium_d1()
    }
}

impl LevelConfig {
    pub fn cesium_d1() -> Self {
        LevelConfig {
            manifold: Manifold::CESIUM_D1,
            ground_f: HalfInt::integer(4),
            excited_f_low: HalfInt::integer(3),
            excited_f_high: HalfInt::integer(4),
            hyperfine_splitting: CS_D1_HYPERFINE_SPLITTING,
        }
    }

    pub fn populated(&self) -> Sublevel {
        Sublevel::new(self.ground_f, self.ground_f)
    }

    pub fn empty(&self) -> Sublevel {
        Sublevel::new(self.ground_f, self.ground_f - HalfInt::integer(2))
    }

    pub fn excited(&self, which: Excited) -> Sublevel {
        let f = match which {
            Excited::N => self.excited_f_low,
            Excited::NPrime => self.excited_f_high,
        };
        Sublevel::new(f, self.ground_f - HalfInt::ONE)
    }

    /// Structural checks on the angular-momentum content.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScheme(msg));
        if !self.hyperfine_splitting.is_finite() || self.hyperfine_splitting < 0.0 {
            return bad(format!("hyperfine splitting {} must be finite and >= 0", self.hyperfine_splitting));
        }
        if self.excited_f_low >= self.excited_f_high {
            return bad(format!(
                "excited_F_low = {} must be below excited_F_high = {}",
                self.excited_f_low, self.excited_f_high
            ));
        }
        let excited = self.manifold.excited_levels();
        for f in [self.excited_f_low, self.excited_f_high] {
            if !excited.contains(&f) {
                return bad(format!("F' = {f} is not an excited hyperfine level of this manifold"));
            }
        }
        if !self.manifold.ground_levels().contains(&self.ground_f) {
            return bad(format!("F = {} is not a ground hyperfine level of this manifold", self.ground_f));
        }
        if self.ground_f < HalfInt::ONE {
            return bad(format!("F = {} has no M = F - 2 sublevel", self.ground_f));
        }
        for which in Excited::BOTH {
            let e = self.excited(which);
            if e.m.abs() > e.f {
                return bad(format!("excited level F' = {} has no M' = {} sublevel", e.f, e.m));
            }
        }
        Ok(())
    }
}

/// Control field: detuning from the `|m'> -> |n>` transition and Rabi frequency
/// `Omega_c = 2 |V_nm'|`, both in units of gamma. Polarization is sigma+.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub detuning: f64,
    pub rabi: f64,
}

impl ControlField {
    pub fn new(detuning: f64, rabi: f64) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::InvalidArgument(format!("control detuning {detuning} is not finite")));
        }
        if !rabi.is_finite() || rabi < 0.0 {
            return Err(Error::InvalidArgument(format!("Rabi frequency {rabi} must be finite and >= 0")));
        }
        Ok(ControlField { detuning, rabi })
    }

    pub fn off() -> Self {
        ControlField { detuning: 0.0, rabi: 0.0 }
    }
}

/// Fully resolved scheme. Immutable once built; fields are public so that tests and
/// diagnostics can construct deliberately inconsistent instances for [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeInstance {
    pub level: LevelConfig,
    pub control: ControlField,
    pub model: Model,
    pub energy_n: f64,
    pub energy_n_prime: f64,
    /// Control photon energy in the rotating frame, `E_n + detuning`.
    pub control_frequency: f64,
    /// Control couplings `V_nm'`, `V_n'm'`.
    pub coupling: [Complex64; 2],
    /// Probe amplitudes `c_n`, `c_n'` from `|m>`.
    pub probe: [Complex64; 2],
}

impl SchemeInstance {
    pub fn energy(&self, which: Excited) -> f64 {
        match which {
            Excited::N => self.energy_n,
            Excited::NPrime => self.energy_n_prime,
        }
    }

    pub fn coupling(&self, which: Excited) -> Complex64 {
        self.coupling[which.index()]
    }

    pub fn probe(&self, which: Excited) -> Complex64 {
        self.probe[which.index()]
    }

    /// `|c|^2` of the probe transition to `which`.
    pub fn probe_strength(&self, which: Excited) -> f64 {
        self.probe(which).norm_sqr()
    }

    /// Same physics in a frame where every optical frequency and excited energy is
    /// raised by `offset`.
    pub fn shifted_frame(&self, offset: f64) -> Self {
        SchemeInstance {
            energy_n: self.energy_n + offset,
            energy_n_prime: self.energy_n_prime + offset,
            control_frequency: self.control_frequency + offset,
            ..*self
        }
    }

    /// Basis change `|which> -> exp(i phi) |which>`; both amplitudes into that state
    /// pick up `exp(-i phi)`.
    pub fn rephased(&self, which: Excited, phi: f64) -> Self {
        let rot = Complex64::from_polar(1.0, -phi);
        let mut out = *self;
        out.coupling[which.index()] *= rot;
        out.probe[which.index()] *= rot;
        out
    }

    /// Swap the roles of `|n>` and `|n'>`.
    pub fn transposed(&self) -> Self {
        SchemeInstance {
            energy_n: self.energy_n_prime,
            energy_n_prime: self.energy_n,
            coupling: [self.coupling[1], self.coupling[0]],
            probe: [self.probe[1], self.probe[0]],
            ..*self
        }
    }
}

struct Amplitudes {
    probe: [f64; 2],
    control: [f64; 2],
}

fn amplitudes(level: &LevelConfig) -> Result<Amplitudes> {
    let m = level.populated();
    let m_prime = level.empty();
    let mut probe = [0.0; 2];
    let mut control = [0.0; 2];
    for which in Excited::BOTH {
        let e = level.excited(which);
        probe[which.index()] =
            dipole_amplitude(&level.manifold, m, e, Polarization::SigmaMinus)?.value();
        control[which.index()] =
            dipole_amplitude(&level.manifold, m_prime, e, Polarization::SigmaPlus)?.value();
    }
    Ok(Amplitudes { probe, control })
}

/// Build the scheme for `level` dressed by `control`.
///
/// `V_n = Omega_c / 2` is real and positive (this fixes the control-field phase);
/// `V_n'` follows from the ratio of the sigma+ dipole amplitudes out of `|m'>`.
pub fn build_scheme(level: &LevelConfig, control: &ControlField, model: Model) -> Result<SchemeInstance> {
    level.check()?;
    let control = ControlField::new(control.detuning, control.rabi)?;
    let amp = amplitudes(level)?;
    if amp.control[0] == 0.0 {
        return Err(Error::InvalidScheme(format!(
            "sigma+ control cannot reach F' = {} from |F = {}, M = {}>",
            level.excited_f_low,
            level.ground_f,
            level.empty().m
        )));
    }
    if amp.probe[0] == 0.0 || amp.probe[1] == 0.0 {
        return Err(Error::InvalidScheme(format!(
            "sigma- probe from |F = {0}, M = {0}> does not reach both excited levels",
            level.ground_f
        )));
    }
    let v_n = control.rabi / 2.0;
    let (v_np, c_np) = match model {
        Model::Full => (v_n * amp.control[1] / amp.control[0], amp.probe[1]),
        Model::Lambda => (0.0, 0.0),
    };
    Ok(SchemeInstance {
        level: *level,
        control,
        model,
        energy_n: 0.0,
        energy_n_prime: level.hyperfine_splitting,
        control_frequency: control.detuning,
        coupling: [Complex64::new(v_n, 0.0), Complex64::new(v_np, 0.0)],
        probe: [Complex64::new(amp.probe[0], 0.0), Complex64::new(c_np, 0.0)],
    })
}

/// Ratio `V_n' / V_n` fixed by the angular algebra.
pub fn control_coupling_ratio(level: &LevelConfig) -> Result<f64> {
    let amp = amplitudes(level)?;
    if amp.control[0] == 0.0 {
        return Err(Error::InvalidScheme("control does not couple |m'> to |n>".into()));
    }
    Ok(amp.control[1] / amp.control[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    InvalidLevelConfig,
    NonFiniteParameter,
    NegativeRabi,
    LambdaCouplingViolation,
    DegenerateExcitedManifold,
    ProbeStrengthOutOfRange,
    RabiCouplingMismatch,
    CouplingNotReproducible,
    ControlCouplesPopulatedState,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::InvalidLevelConfig => "invalid-level-config",
            ViolationCode::NonFiniteParameter => "non-finite-parameter",
            ViolationCode::NegativeRabi => "negative-rabi",
            ViolationCode::LambdaCouplingViolation => "lambda-coupling-violation",
            ViolationCode::DegenerateExcitedManifold => "degenerate-excited-manifold",
            ViolationCode::ProbeStrengthOutOfRange => "probe-strength-out-of-range",
            ViolationCode::RabiCouplingMismatch => "rabi-coupling-mismatch",
            ViolationCode::CouplingNotReproducible => "coupling-not-reproducible",
            ViolationCode::ControlCouplesPopulatedState => "control-couples-populated-state",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

/// Check every `SchemeInstance` invariant. Never fails; an empty list means valid.
pub fn validate(scheme: &SchemeInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, message: String| out.push(Violation { code, message });
    const TOL: f64 = 1e-12;

    let finite = [scheme.energy_n, scheme.energy_n_prime, scheme.control_frequency]
        .iter()
        .all(|x| x.is_finite())
        && scheme.coupling.iter().chain(&scheme.probe).all(|z| z.is_finite());
    if !finite {
        push(ViolationCode::NonFiniteParameter, "non-finite energy or amplitude".into());
    }
    if let Err(e) = scheme.level.check() {
        push(ViolationCode::InvalidLevelConfig, e.to_string());
    }
    if !(scheme.control.rabi >= 0.0) {
        push(ViolationCode::NegativeRabi, format!("Rabi frequency {} < 0", scheme.control.rabi));
    }
    if scheme.model == Model::Lambda
        && (scheme.coupling(Excited::NPrime) != Complex64::new(0.0, 0.0)
            || scheme.probe(Excited::NPrime) != Complex64::new(0.0, 0.0))
    {
        push(
            ViolationCode::LambdaCouplingViolation,
            "lambda model carries a nonzero coupling to |n'>".into(),
        );
    }
    if scheme.model == Model::Full
        && (scheme.level.hyperfine_splitting <= 0.0 || scheme.energy_n_prime == scheme.energy_n)
    {
        push(
            ViolationCode::DegenerateExcitedManifold,
            "full model requires a nonzero excited hyperfine splitting".into(),
        );
    }
    let mut strengths = vec![(Excited::N, scheme.probe_strength(Excited::N))];
    if scheme.model == Model::Full {
        strengths.push((Excited::NPrime, scheme.probe_strength(Excited::NPrime)));
    }
    for (which, s) in strengths {
        if !(s > 0.0 && s <= 1.0 + TOL) {
            push(
                ViolationCode::ProbeStrengthOutOfRange,
                format!("probe strength |c|^2 = {s} to {which:?} outside (0, 1]"),
            );
        }
    }
    let v_n = scheme.coupling(Excited::N).norm();
    if (v_n - scheme.control.rabi / 2.0).abs() > TOL * (1.0 + v_n) {
        push(
            ViolationCode::RabiCouplingMismatch,
            format!("|V_n| = {v_n} differs from Omega_c / 2 = {}", scheme.control.rabi / 2.0),
        );
    }
    if scheme.level.check().is_ok() {
        // projection M = F + 1 must not exist among the excited levels
        let reach = scheme.level.ground_f + HalfInt::ONE;
        if reach <= scheme.level.excited_f_high {
            push(
                ViolationCode::ControlCouplesPopulatedState,
                format!("sigma+ control can drive |m> to M' = {reach}"),
            );
        }
        if let Ok(rebuilt) = build_scheme(&scheme.level, &scheme.control, scheme.model) {
            let close = |a: f64, b: f64| (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()));
            let reproducible = Excited::BOTH.iter().all(|&w| {
                close(scheme.coupling(w).norm(), rebuilt.coupling(w).norm())
                    && close(scheme.probe(w).norm(), rebuilt.probe(w).norm())
            }) && close(
                scheme.energy_n_prime - scheme.energy_n,
                scheme.level.hyperfine_splitting,
            ) && close(
                scheme.control_frequency - scheme.energy_n,
                scheme.control.detuning,
            );
            // the interference sign of the two paths is rephasing invariant
            let invariant = |s: &SchemeInstance| {
                s.probe[0] * s.probe[1].conj() * s.coupling[0].conj() * s.coupling[1]
            };
            let reproducible =
                reproducible && (invariant(scheme) - invariant(&rebuilt)).norm() <= TOL * (1.0 + invariant(&rebuilt).norm());
            if !reproducible {
                push(
                    ViolationCode::CouplingNotReproducible,
                    "couplings do not follow from the level configuration and control field".into(),
                );
            }
        }
    }
    out
}

/// Overrides read from a `key = value` configuration block.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub nuclear_spin: Option<HalfInt>,
    pub ground_f: Option<HalfInt>,
    pub excited_f_low: Option<HalfInt>,
    pub excited_f_high: Option<HalfInt>,
    pub hyperfine_splitting_gamma: Option<f64>,
    pub control_detuning_gamma: Option<f64>,
    pub rabi_gamma: Option<f64>,
    pub model: Option<ModelSelection>,
}

impl SchemeConfig {
    /// Parse `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SchemeConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::InvalidArgument(format!("config line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("{key}: not a finite number: {v:?}")))
            };
            let half = |v: &str| v.parse::<HalfInt>().map_err(|e| err(e.to_string()));
            match key {
                "nuclear_spin" => cfg.nuclear_spin = Some(half(value)?),
                "ground_F" => cfg.ground_f = Some(half(value)?),
                "excited_F_low" => cfg.excited_f_low = Some(half(value)?),
                "excited_F_high" => cfg.excited_f_high = Some(half(value)?),
                "hyperfine_splitting_gamma" => cfg.hyperfine_splitting_gamma = Some(real(value)?),
                "control_detuning_gamma" => cfg.control_detuning_gamma = Some(real(value)?),
                "rabi_gamma" => cfg.rabi_gamma = Some(real(value)?),
                "model" => cfg.model = Some(value.parse().map_err(|e: Error| err(e.to_string()))?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    /// Level configuration with these overrides applied on top of `base`.
    pub fn level_config(&self, base: &LevelConfig) -> LevelConfig {
        let mut level = *base;
        if let Some(i) = self.nuclear_spin {
            level.manifold.nuclear_spin = i;
        }
        if let Some(f) = self.ground_f {
            level.ground_f = f;
        }
        if let Some(f) = self.excited_f_low {
            level.excited_f_low = f;
        }
        if let Some(f) = self.excited_f_high {
            level.excited_f_high = f;
        }
        if let Some(s) = self.hyperfine_splitting_gamma {
            level.hyperfine_splitting = s;
        }
        level
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(rabi: f64, model: Model) -> SchemeInstance {
        build_scheme(&LevelConfig::cesium_d1(), &ControlField::new(0.0, rabi).unwrap(), model).unwrap()
    }

    #[test]
    fn rabi_sets_lower_coupling() {
        let s = cs(15.0, Model::Full);
        assert_eq!(s.coupling(Excited::N), Complex64::new(7.5, 0.0));
        assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    }

    #[test]
    fn lambda_drops_upper_level() {
        let s = cs(15.0, Model::Lambda);
        assert_eq!(s.coupling(Excited::NPrime), Complex64::new(0.0, 0.0));
        assert_eq!(s.probe(Excited::NPrime), Complex64::new(0.0, 0.0));
        assert!(validate(&s).is_empty());
    }

    #[test]
    fn lambda_with_upper_coupling_is_flagged() {
        let mut s = cs(15.0, Model::Lambda);
        s.coupling[1] = Complex64::new(1.0, 0.0);
        let codes: Vec<_> = validate(&s).into_iter().map(|v| v.code).collect();
        assert!(codes.contains(&ViolationCode::LambdaCouplingViolation), "{codes:?}");
    }

    #[test]
    fn zero_splitting_full_model_is_degenerate() {
        let mut level = LevelConfig::cesium_d1();
        level.hyperfine_splitting = 0.0;
        let s = build_scheme(&level, &ControlField::new(0.0, 15.0).unwrap(), Model::Full).unwrap();
        let codes: Vec<_> = validate(&s).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::DegenerateExcitedManifold]);
    }

    #[test]
    fn rephased_scheme_stays_valid() {
        let s = cs(15.0, Model::Full).rephased(Excited::NPrime, 0.7).rephased(Excited::N, -2.1);
        assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    }

    #[test]
    fn flipped_interference_sign_is_flagged() {
        let mut s = cs(15.0, Model::Full);
        s.coupling[1] = -s.coupling[1];
        let codes: Vec<_> = validate(&s).into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::CouplingNotReproducible]);
    }

    #[test]
    fn unreachable_excited_level_is_an_error() {
        let mut level = LevelConfig::cesium_d1();
        level.ground_f = HalfInt::integer(3);
        level.excited_f_low = HalfInt::integer(3);
        level.excited_f_high = HalfInt::integer(4);
        // |3,3> -> M' = 2 exists for both F' = 3, 4, so this one builds
        assert!(build_scheme(&level, &ControlField::new(0.0, 1.0).unwrap(), Model::Full).is_ok());
        level.ground_f = HalfInt::integer(5);
        assert!(matches!(
            build_scheme(&level, &ControlField::new(0.0, 1.0).unwrap(), Model::Full),
            Err(Error::InvalidScheme(_))
        ));
    }

    #[test]
    fn config_block_parses() {
        let cfg = SchemeConfig::parse(
            "# cesium\nnuclear_spin = 7/2\nground_F = 4 # populated\n\
             hyperfine_splitting_gamma = 255.2\nrabi_gamma=15\nmodel = both\n",
        )
        .unwrap();
        assert_eq!(cfg.nuclear_spin, Some(HalfInt::halves(7)));
        assert_eq!(cfg.rabi_gamma, Some(15.0));
        assert_eq!(cfg.model, Some(ModelSelection::Both));
        assert!(SchemeConfig::parse("bogus = 1").is_err());
        assert!(SchemeConfig::parse("rabi_gamma = fast").is_err());
        assert!(SchemeConfig::parse("rabi_gamma 15").is_err());
    }
}
