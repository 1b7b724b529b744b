//! The annulus reference problem wired end to end: eight radial and twelve
//! angular modes, boundary damping `Q = 3`, tones at `±π` and `±2π`, and the
//! approximate robust controller for Fourier orders `≤ 5` with `ε = 0.15`.

use crate::closed_loop::{assemble_direct, ClosedLoop};
use crate::error::Result;
use crate::exosystem::{build_exosystem, reference_signal_spec, Exosystem, SignalSpec};
use crate::plant::Plant;
use crate::regsynth::{synth_approx_robust, synth_regulating, synth_robust, Controller};
use crate::wave::{assemble_wave_plant, ModalWavePlant, WavePlantConfig};

/// Highest Fourier order tracked exactly by the reference controller.
pub const REFERENCE_ORDER: usize = 5;
/// Low-gain tuning parameter of the reference controller.
pub const REFERENCE_EPS: f64 = 0.15;
/// Target for the asymptotic windowed error relative to `‖v₀‖²`.
pub const DELTA_TARGET: f64 = 0.01;

/// Tuning parameters scanned by the stability sweep: `0.05, 0.10, …, 0.50`.
pub fn epsilon_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.05 * i as f64).collect()
}

/// Wave plant, signal description and exosystem of one configuration.
#[derive(Debug, Clone)]
pub struct ReferenceProblem {
    pub wave: ModalWavePlant,
    pub signals: SignalSpec,
    pub exo: Exosystem,
}

impl ReferenceProblem {
    /// The reference signals on a plant with the given discretization.
    pub fn new(config: WavePlantConfig) -> Result<Self> {
        Self::with_signals(config, reference_signal_spec())
    }

    pub fn with_signals(config: WavePlantConfig, signals: SignalSpec) -> Result<Self> {
        let wave = assemble_wave_plant(config)?;
        let exo = build_exosystem(&signals, config.m_angular - 1)?;
        Ok(Self { wave, signals, exo })
    }

    pub fn plant(&self) -> &Plant {
        &self.wave.system
    }

    pub fn approx_controller(&self, n: usize, eps: f64) -> Result<Controller> {
        synth_approx_robust(self.plant(), &self.exo, n, eps)
    }

    pub fn robust_controller(&self, eps: f64) -> Result<Controller> {
        synth_robust(self.plant(), &self.exo, eps)
    }

    pub fn regulating_controller(&self, eps: f64) -> Result<Controller> {
        synth_regulating(self.plant(), &self.exo, eps)
    }

    /// Closed loop with the energy norm of the wave plant attached.
    pub fn close_loop(&self, ctrl: &Controller) -> Result<ClosedLoop> {
        assemble_direct(self.plant(), ctrl, &self.exo)?.with_energy_weights(self.wave.energy_weights.clone())
    }

    pub fn v0_norm_sq(&self) -> f64 {
        self.exo.v0.norm_squared()
    }
}

/// The default configuration.
pub fn reference_problem() -> Result<ReferenceProblem> {
    ReferenceProblem::new(WavePlantConfig::default())
}
