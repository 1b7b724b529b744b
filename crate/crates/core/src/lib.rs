//! Internal-model output regulation for a boundary-controlled wave equation
//! on an annulus.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`] — dense complex kernels (solves, Schur spectra, SVD,
//!   pseudoinverses, `expm`, Sylvester solvers);
//! * [`wave`] — Bessel functions, annulus eigenmodes, the Fourier output
//!   basis and the damped modal wave plant;
//! * [`exosystem`] — the diagonal signal generator for references and
//!   disturbances;
//! * [`regsynth`] — transfer functions, the regulating / approximate robust /
//!   robust controller constructions, G-conditions, regulator equations and
//!   the δ error bound;
//! * [`closed_loop`] — interconnection, exact simulation, windowed error,
//!   ε-sweeps and perturbation experiments;
//! * [`preset`] — the annulus reference problem wired end to end.

pub mod linalg;
pub mod error;
pub mod plant;
pub mod wave;
pub mod exosystem;
pub mod regsynth;
pub mod closed_loop;
pub mod preset;

pub use error::{Error, Result};
