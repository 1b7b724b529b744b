use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::fourier::{angular_grid, FourierOutputBasis, Parity};
use super::modes::{radial_modes, RadialMode, INNER_RADIUS, OUTER_RADIUS, RADIAL_QUADRATURE_NODES};
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::linalg::{complexify, identity, Complex64, ComplexMatrix, ComplexVector};
use crate::plant::Plant;

/// Angular quadrature resolution for Gram-matrix checks.
pub const ANGULAR_QUADRATURE_POINTS: usize = 512;

/// Discretization and material parameters of the annulus wave plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlantConfig {
    pub n_radial: usize,
    /// Number of angular orders `0..m_angular`.
    pub m_angular: usize,
    /// Constant boundary damping gain `Q(θ) = q_fb`.
    pub q_fb: f64,
    pub rho: f64,
    pub t_mod: f64,
}

impl Default for WavePlantConfig {
    fn default() -> Self {
        Self {
            n_radial: 8,
            m_angular: 12,
            q_fb: 3.0,
            rho: 1.0,
            t_mod: 1.0,
        }
    }
}

impl WavePlantConfig {
    fn validate(&self) -> Result<()> {
        if self.n_radial == 0 || self.m_angular == 0 {
            return Err(Error::InvalidParameter(
                "n_radial and m_angular must be at least 1".into(),
            ));
        }
        for (name, v) in [("rho", self.rho), ("t_mod", self.t_mod)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.q_fb >= 0.0 && self.q_fb.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "damping gain must be nonnegative, got {}",
                self.q_fb
            )));
        }
        Ok(())
    }
}

/// One scalar eigenmode `φ(r, θ) = R(r) Θ(θ)` of the annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantMode {
    pub radial: RadialMode,
    pub parity: Parity,
    /// Output-basis slot carrying this mode's angular factor.
    pub output_index: usize,
}

impl PlantMode {
    pub fn eval(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.radial.eval(r)? * FourierOutputBasis::eval(self.output_index, theta))
    }
}

/// Spectral Galerkin model of the boundary-damped wave equation on
/// `1 < |ζ| < 2`, Dirichlet on the inner circle, force input and velocity
/// output on the outer circle.
///
/// The state is `x = (q, q̇)` in modal coordinates, with
/// `A = [[0, I], [−diag(μ T/ρ), 0]]`, `B = [0; r₁Bₜ/ρ]`, `C = [0, Bₜᵀ]`, where
/// `Bₜ[j, l]` is the Fourier coefficient of mode `j`'s outer trace in slot
/// `l` and `r₁ = 2` is the outer radius. Inputs and outputs are coefficients
/// in the orthonormal basis of `L²([0, 2π], dθ)`; the boundary force enters
/// the modal equations through arc length `ds = r₁ dθ`, hence the factor
/// `r₁` in `B`.
#[derive(Debug, Clone)]
pub struct ModalWavePlant {
    pub config: WavePlantConfig,
    pub modes: Vec<PlantMode>,
    pub basis: FourierOutputBasis,
    /// `n_modes × dim Y` trace matrix.
    pub trace: DMatrix<f64>,
    /// `‖x‖²_E = Σ w_i |x_i|²` with `w = (T μ_j, ρ)`.
    pub energy_weights: Vec<f64>,
    pub system: Plant,
}

pub fn assemble_wave_plant(config: WavePlantConfig) -> Result<ModalWavePlant> {
    config.validate()?;
    let radial = radial_modes(config.m_angular, config.n_radial)?;
    let basis = FourierOutputBasis::new(config.m_angular - 1);
    let mut modes = Vec::with_capacity(config.n_radial * basis.dim());
    for l in 0..basis.dim() {
        let (m, parity) = FourierOutputBasis::label(l);
        for mode in &radial[m] {
            modes.push(PlantMode {
                radial: mode.clone(),
                parity,
                output_index: l,
            });
        }
    }
    let n = modes.len();
    let mut trace = DMatrix::<f64>::zeros(n, basis.dim());
    for (j, mode) in modes.iter().enumerate() {
        trace[(j, mode.output_index)] = mode.radial.outer_trace()?;
    }

    let (rho, t_mod) = (config.rho, config.t_mod);
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut b = DMatrix::<f64>::zeros(2 * n, basis.dim());
    let mut c = DMatrix::<f64>::zeros(basis.dim(), 2 * n);
    let mut energy_weights = vec![0.0; 2 * n];
    for (j, mode) in modes.iter().enumerate() {
        a[(j, n + j)] = 1.0;
        a[(n + j, j)] = -mode.radial.mu() * t_mod / rho;
        energy_weights[j] = t_mod * mode.radial.mu();
        energy_weights[n + j] = rho;
    }
    b.view_mut((n, 0), (n, basis.dim())).copy_from(&(&trace * (OUTER_RADIUS / rho)));
    c.view_mut((0, n), (basis.dim(), n)).copy_from(&trace.transpose());

    let dim_y = basis.dim();
    let system = Plant::new(
        complexify(&a),
        complexify(&b),
        complexify(&c),
        identity(dim_y) * Complex64::from(config.q_fb),
        identity(dim_y),
        identity(dim_y),
    )?;
    Ok(ModalWavePlant {
        config,
        modes,
        basis,
        trace,
        energy_weights,
        system,
    })
}

impl ModalWavePlant {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn state_dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn output_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.system.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.system.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.system.c
    }

    pub fn a_s(&self) -> &ComplexMatrix {
        &self.system.a_s
    }

    pub fn energy_sq(&self, x: &ComplexVector) -> f64 {
        energy_sq(&self.energy_weights, x)
    }

    /// Wave displacement `w(r, θ)` for modal positions `q` (first half of `x`).
    pub fn displacement(&self, x: &ComplexVector, r: f64, theta: f64) -> Result<f64> {
        let mut w = 0.0;
        for (j, mode) in self.modes.iter().enumerate() {
            w += x[j].re * mode.eval(r, theta)?;
        }
        Ok(w)
    }

    /// `L²(Ω)` Gram matrix of the modes by tensor quadrature (Gauss–Legendre
    /// radially, trapezoid angularly).
    pub fn mode_gram(&self) -> Result<DMatrix<f64>> {
        let quad = GaussLegendre::new(RADIAL_QUADRATURE_NODES, INNER_RADIUS, OUTER_RADIUS);
        let thetas = angular_grid(ANGULAR_QUADRATURE_POINTS);
        let h = 2.0 * PI / ANGULAR_QUADRATURE_POINTS as f64;
        let points = quad.nodes.len() * thetas.len();
        let mut weighted = DMatrix::<f64>::zeros(self.n_modes(), points);
        let mut plain = DMatrix::<f64>::zeros(self.n_modes(), points);
        for (j, mode) in self.modes.iter().enumerate() {
            let angular: Vec<f64> = thetas
                .iter()
                .map(|&t| FourierOutputBasis::eval(mode.output_index, t))
                .collect();
            for (i, (&r, &w)) in quad.nodes.iter().zip(&quad.weights).enumerate() {
                let radial = mode.radial.eval(r)?;
                for (t, &ang) in angular.iter().enumerate() {
                    let col = i * thetas.len() + t;
                    let value = radial * ang;
                    plain[(j, col)] = value;
                    weighted[(j, col)] = value * w * r * h;
                }
            }
        }
        Ok(&weighted * plain.transpose())
    }
}

pub fn energy_sq(weights: &[f64], x: &ComplexVector) -> f64 {
    weights.iter().zip(x.iter()).map(|(w, z)| w * z.norm_sqr()).sum()
}

/// `(m, n, k, μ, |cross_fn|)` for every radial eigenvalue used by the plant.
pub fn eigenvalue_table(config: WavePlantConfig) -> Result<Vec<(usize, usize, f64, f64, f64)>> {
    config.validate()?;
    let radial = radial_modes(config.m_angular, config.n_radial)?;
    let mut rows = Vec::new();
    for modes in radial {
        for mode in modes {
            rows.push((mode.m, mode.n, mode.k, mode.mu(), mode.residual()?));
        }
    }
    Ok(rows)
}

/// Lifts a real state into the complex state used throughout the crate.
pub fn real_state(values: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::from(v)))
}
