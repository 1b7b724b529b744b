//! TOML run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boundary_regulation::exosystem::{
    reference_signal_spec, Profile, SignalSpec, SignalTarget, SignalTerm, TemporalFactor,
};
use boundary_regulation::preset::{REFERENCE_EPS, REFERENCE_ORDER};
use boundary_regulation::wave::WavePlantConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantSection,
    pub exosystem: ExosystemSection,
    pub controller: ControllerSection,
    pub simulation: SimulationSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub n_radial: usize,
    pub m_angular: usize,
    pub damping_q: f64,
    pub rho: f64,
    pub t_mod: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExosystemPreset {
    /// The annulus reference signals.
    Reference,
    /// The signals listed in `terms`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExosystemSection {
    pub preset: ExosystemPreset,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetConfig {
    Disturbance,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemporalConfig {
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant,
    Cos { order: usize },
    Sin { order: usize },
    CenteredQuadratic,
    HalfSine,
    Samples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub target: TargetConfig,
    pub amplitude: f64,
    pub temporal: TemporalConfig,
    pub omega: f64,
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKindConfig {
    Regulating,
    Approx,
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub kind: ControllerKindConfig,
    /// Highest tracked Fourier order; approximate controller only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub epsilon: f64,
}

/// `"zero"` or the path of a column vector in matrix text format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum InitialState {
    Zero,
    File(PathBuf),
}

impl From<String> for InitialState {
    fn from(s: String) -> Self {
        if s == "zero" {
            InitialState::Zero
        } else {
            InitialState::File(PathBuf::from(s))
        }
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> Self {
        match s {
            InitialState::Zero => "zero".into(),
            InitialState::File(p) => p.to_string_lossy().into_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    pub dt: f64,
    pub window: f64,
    pub x0: InitialState,
    pub z0: InitialState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub emit_svg: bool,
}

impl Default for RunConfig {
    /// The annulus reference problem with the approximate robust controller.
    fn default() -> Self {
        let plant = WavePlantConfig::default();
        Self {
            plant: PlantSection {
                n_radial: plant.n_radial,
                m_angular: plant.m_angular,
                damping_q: plant.q_fb,
                rho: plant.rho,
                t_mod: plant.t_mod,
            },
            exosystem: ExosystemSection {
                preset: ExosystemPreset::Reference,
                terms: Vec::new(),
            },
            controller: ControllerSection {
                kind: ControllerKindConfig::Approx,
                n: Some(REFERENCE_ORDER),
                epsilon: REFERENCE_EPS,
            },
            simulation: SimulationSection {
                t_end: 20.0,
                dt: 0.01,
                window: 1.0,
                x0: InitialState::Zero,
                z0: InitialState::Zero,
            },
            output: OutputSection {
                directory: PathBuf::from("out"),
                emit_svg: true,
            },
        }
    }
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("{name} must be positive and finite, got {value}");
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).context("parsing run configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plant;
        if p.n_radial == 0 || p.m_angular == 0 {
            bail!("plant.n_radial and plant.m_angular must be at least 1");
        }
        require_positive("plant.rho", p.rho)?;
        require_positive("plant.t_mod", p.t_mod)?;
        if !(p.damping_q >= 0.0 && p.damping_q.is_finite()) {
            bail!("plant.damping_q must be nonnegative, got {}", p.damping_q);
        }
        match self.exosystem.preset {
            ExosystemPreset::Reference if !self.exosystem.terms.is_empty() => {
                bail!("exosystem.terms is only read with preset = \"custom\"")
            }
            ExosystemPreset::Custom if self.exosystem.terms.is_empty() => {
                bail!("exosystem preset \"custom\" needs at least one term")
            }
            _ => {}
        }
        for (i, term) in self.exosystem.terms.iter().enumerate() {
            if !(term.omega >= 0.0 && term.omega.is_finite()) || !term.amplitude.is_finite() {
                bail!("exosystem term {i}: omega must be nonnegative and amplitude finite");
            }
        }
        let c = &self.controller;
        require_positive("controller.epsilon", c.epsilon)?;
        match (c.kind, c.n) {
            (ControllerKindConfig::Approx, None) => bail!("controller.n is required for kind = \"approx\""),
            (ControllerKindConfig::Approx, Some(0)) => bail!("controller.n must be at least 1"),
            (ControllerKindConfig::Approx, Some(n)) if n >= p.m_angular => {
                bail!("controller.n = {n} exceeds the highest Fourier order {}", p.m_angular - 1)
            }
            (ControllerKindConfig::Regulating | ControllerKindConfig::Robust, Some(_)) => {
                bail!("controller.n is only used with kind = \"approx\"")
            }
            _ => {}
        }
        let s = &self.simulation;
        require_positive("simulation.t_end", s.t_end)?;
        require_positive("simulation.dt", s.dt)?;
        require_positive("simulation.window", s.window)?;
        if s.window > s.t_end || s.dt > s.window {
            bail!("simulation needs dt <= window <= t_end");
        }
        let ratio = s.window / s.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            bail!("simulation.window must be a multiple of simulation.dt");
        }
        Ok(())
    }

    pub fn wave_config(&self) -> WavePlantConfig {
        WavePlantConfig {
            n_radial: self.plant.n_radial,
            m_angular: self.plant.m_angular,
            q_fb: self.plant.damping_q,
            rho: self.plant.rho,
            t_mod: self.plant.t_mod,
        }
    }

    pub fn signal_spec(&self) -> SignalSpec {
        match self.exosystem.preset {
            ExosystemPreset::Reference => reference_signal_spec(),
            ExosystemPreset::Custom => SignalSpec {
                terms: self.exosystem.terms.iter().map(TermConfig::to_term).collect(),
            },
        }
    }
}

impl TermConfig {
    fn to_term(&self) -> SignalTerm {
        SignalTerm {
            target: match self.target {
                TargetConfig::Disturbance => SignalTarget::Disturbance,
                TargetConfig::Reference => SignalTarget::Reference,
            },
            profile: match &self.profile {
                ProfileConfig::Constant => Profile::Constant,
                ProfileConfig::Cos { order } => Profile::Cos(*order),
                ProfileConfig::Sin { order } => Profile::Sin(*order),
                ProfileConfig::CenteredQuadratic => Profile::CenteredQuadratic,
                ProfileConfig::HalfSine => Profile::HalfSine,
                ProfileConfig::Samples { values } => Profile::Samples(values.clone()),
            },
            amplitude: self.amplitude,
            temporal: match self.temporal {
                TemporalConfig::Sin => TemporalFactor::Sin,
                TemporalConfig::Cos => TemporalFactor::Cos,
            },
            omega: self.omega,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn custom() -> RunConfig {
        let mut config = RunConfig::default();
        config.exosystem = ExosystemSection {
            preset: ExosystemPreset::Custom,
            terms: vec![
                TermConfig {
                    target: TargetConfig::Reference,
                    amplitude: 0.5,
                    temporal: TemporalConfig::Cos,
                    omega: 1.0,
                    profile: ProfileConfig::Samples { values: vec![0.0, 1.0, 0.5] },
                },
                TermConfig {
                    target: TargetConfig::Disturbance,
                    amplitude: -2.0,
                    temporal: TemporalConfig::Sin,
                    omega: 3.0,
                    profile: ProfileConfig::Cos { order: 2 },
                },
            ],
        };
        config.controller = ControllerSection {
            kind: ControllerKindConfig::Robust,
            n: None,
            epsilon: 0.2,
        };
        config.simulation.x0 = InitialState::File(PathBuf::from("x0.txt"));
        config
    }

    #[test]
    fn round_trip() {
        for config in [RunConfig::default(), custom()] {
            let text = config.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml(&text).unwrap(), config, "{text}");
        }
    }

    #[test]
    fn default_is_the_reference_problem() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.wave_config(), WavePlantConfig::default());
        assert_eq!(config.signal_spec(), reference_signal_spec());
        assert_eq!(config.controller.n, Some(5));
        assert_eq!(config.controller.epsilon, 0.15);
    }

    #[test]
    fn approx_needs_positive_order() {
        let mut config = RunConfig::default();
        config.controller.n = Some(0);
        assert!(config.validate().unwrap_err().to_string().contains("at least 1"));
        config.controller.n = None;
        assert!(config.validate().is_err());
        config.controller.n = Some(12);
        assert!(config.validate().is_err());
    }

    #[test]
    fn rejects_bad_numbers() {
        let cases: Vec<fn(&mut RunConfig)> = vec![
            |c| c.plant.rho = 0.0,
            |c| c.plant.t_mod = f64::NAN,
            |c| c.plant.damping_q = -1.0,
            |c| c.plant.n_radial = 0,
            |c| c.controller.epsilon = 0.0,
            |c| c.simulation.dt = -0.01,
            |c| c.simulation.window = 30.0,
            |c| c.simulation.window = 0.015,
            |c| c.exosystem.preset = ExosystemPreset::Custom,
            |c| c.controller.kind = ControllerKindConfig::Robust,
        ];
        for mutate in cases {
            let mut config = RunConfig::default();
            mutate(&mut config);
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn parses_handwritten_file() {
        let text = r#"
            [plant]
            n_radial = 3
            m_angular = 4
            damping_q = 3.0
            rho = 1.0
            t_mod = 1.0

            [exosystem]
            preset = "custom"

            [[exosystem.terms]]
            target = "reference"
            amplitude = 1.0
            temporal = "sin"
            omega = 3.141592653589793
            profile = { kind = "sin", order = 1 }

            [controller]
            kind = "regulating"
            epsilon = 0.1

            [simulation]
            t_end = 5.0
            dt = 0.01
            window = 1.0
            x0 = "zero"
            z0 = "zero"

            [output]
            directory = "run"
            emit_svg = false
        "#;
        let config = RunConfig::from_toml(text).unwrap();
        assert_eq!(config.signal_spec().terms[0].profile, Profile::Sin(1));
        assert!(RunConfig::from_toml(&text.replace("emit_svg", "emit_png")).is_err());
    }
}
