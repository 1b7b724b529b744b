//! Spectral model of the wave equation on the annulus `1 < |ζ| < 2`.

pub mod bessel;
pub mod fourier;
pub mod modes;
pub mod plant;
pub mod quadrature;

pub use bessel::{bessel_jy, BesselJY};
pub use fourier::{angular_grid, project_fn, project_profile, FourierOutputBasis, Parity};
pub use modes::{cross_fn, find_radial_roots, radial_modes, RadialMode};
pub use plant::{
    assemble_wave_plant, eigenvalue_table, energy_sq, real_state, ModalWavePlant, PlantMode,
    WavePlantConfig,
};
