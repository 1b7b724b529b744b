//! Controller synthesis and verification: the regulating, approximate robust
//! and robust internal-model controllers, G-conditions, regulator equations
//! and the δ bound on the asymptotic regulation error.
//!
//! All controllers have the form
//! `ż = G₁z + G₂(y − y_ref)`, `u = Kz − Q(y − y_ref)` with `K = εK₀`,
//! where the static part `Q` is the plant's stabilizing feedback.

use rayon::prelude::*;

use crate::closed_loop::ClosedLoop;
use crate::error::{Error, Result};
use crate::exosystem::Exosystem;
use crate::linalg::{
    identity, imaginary_diag, norm_two, operator_norm, pinv, rank, svd, sylvester_diag, vec_norm,
    Complex64, ComplexMatrix, ComplexVector, DEFAULT_RANK_RTOL,
};
use crate::plant::Plant;
use crate::wave::FourierOutputBasis;

/// Relative least-squares residual above which `y_k ∉ range P_s(iω_k)`.
pub const RANGE_RTOL: f64 = 1e-8;
/// `σ_min / σ_max` below which `P_N P_s(iω_k)` counts as not surjective.
pub const SURJECTIVITY_RTOL: f64 = 1e-8;
/// Relative rank tolerance of the G-condition test.
pub const G_CONDITION_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    /// Minimal internal model, regulates the nominal plant only.
    Regulating,
    /// Internal model of the output subspace `Y_N` (Fourier orders `≤ N`).
    ApproximateRobust { n: usize },
    /// Internal model of the whole (discretized) output space.
    Robust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub kind: ControllerKind,
    pub omegas: Vec<f64>,
    /// Size of each internal-model block; `dim Z = q · block_dim`.
    pub block_dim: usize,
    /// `diag(iω_k I_block_dim)`.
    pub g1: ComplexMatrix,
    /// `Y → Z`.
    pub g2: ComplexMatrix,
    /// `Z → U`, unscaled.
    pub k0: ComplexMatrix,
    /// `K = ε K₀`.
    pub k: ComplexMatrix,
    /// Static output feedback `Y → U` the plant was stabilized with.
    pub q_fb: ComplexMatrix,
    pub eps: f64,
}

impl Controller {
    fn new(
        kind: ControllerKind,
        omegas: Vec<f64>,
        block_dim: usize,
        g2: ComplexMatrix,
        k0: ComplexMatrix,
        q_fb: ComplexMatrix,
        eps: f64,
    ) -> Result<Self> {
        let dim_z = omegas.len() * block_dim;
        if g2.nrows() != dim_z || k0.ncols() != dim_z {
            return Err(Error::InvalidParameter(format!(
                "controller blocks do not match dim Z = {dim_z}: G2 has {} rows, K0 {} columns",
                g2.nrows(),
                k0.ncols()
            )));
        }
        let diagonal: Vec<f64> = omegas
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, block_dim))
            .collect();
        let mut ctrl = Self {
            kind,
            g1: imaginary_diag(&diagonal),
            omegas,
            block_dim,
            g2,
            k: k0.clone(),
            k0,
            q_fb,
            eps: 0.0,
        };
        ctrl.set_eps(eps)?;
        Ok(ctrl)
    }

    pub fn dim_z(&self) -> usize {
        self.g1.nrows()
    }

    pub fn q(&self) -> usize {
        self.omegas.len()
    }

    /// Same controller with tuning parameter `eps` (`0` switches the
    /// injection off, which is useful for sweeps).
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut ctrl = self.clone();
        ctrl.set_eps(eps)?;
        Ok(ctrl)
    }

    /// Same controller with a replaced `K₀` (used for negative controls).
    pub fn with_k0(&self, k0: ComplexMatrix) -> Result<Self> {
        if k0.shape() != self.k0.shape() {
            return Err(Error::InvalidParameter("replacement K0 has the wrong shape".into()));
        }
        let mut ctrl = self.clone();
        ctrl.k0 = k0;
        ctrl.set_eps(self.eps)?;
        Ok(ctrl)
    }

    /// `K₀ + rel·‖K₀‖_F·Δ/‖Δ‖_F`: a relative perturbation of `K₀` along
    /// `direction`.
    pub fn with_perturbed_k0(&self, direction: &ComplexMatrix, rel: f64) -> Result<Self> {
        let size = direction.norm();
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::InvalidParameter("perturbation direction must be nonzero".into()));
        }
        let step = direction.scale(rel * self.k0.norm() / size);
        self.with_k0(&self.k0 + step)
    }

    fn set_eps(&mut self, eps: f64) -> Result<()> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tuning parameter must be finite and nonnegative, got {eps}"
            )));
        }
        self.eps = eps;
        self.k = self.k0.scale(eps);
        Ok(())
    }

    /// Rows/columns of internal-model block `k`.
    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        k * self.block_dim..(k + 1) * self.block_dim
    }
}

fn require_positive_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tuning parameter must be positive, got {eps}")))
    }
}

fn unit(q: usize, k: usize) -> ComplexVector {
    let mut e = ComplexVector::zeros(q);
    e[k] = Complex64::from(1.0);
    e
}

/// `i ω` as a complex number.
fn iw(omega: f64) -> Complex64 {
    Complex64::new(0.0, omega)
}

/// Per-frequency synthesis data of the regulating controller.
#[derive(Debug, Clone)]
struct RegulatingColumn {
    u: ComplexVector,
    g2_row: nalgebra::RowDVector<Complex64>,
}

/// Target `y_k = −P₀(iω_k)E_sφ_k − Fφ_k` together with its scale, used to
/// decide whether `y_k` vanishes.
fn regulation_target(
    plant: &Plant,
    exo: &Exosystem,
    e_s: &ComplexMatrix,
    k: usize,
) -> Result<(ComplexVector, f64)> {
    let p0 = plant_p0(plant, exo.omegas[k], k)?;
    let disturbance = &p0 * e_s.column(k);
    let reference = exo.f.column(k).into_owned();
    let scale = vec_norm(&disturbance) + vec_norm(&reference);
    Ok((-(disturbance + reference), scale))
}

fn plant_p0(plant: &Plant, omega: f64, index: usize) -> Result<ComplexMatrix> {
    let rhs = plant.resolvent(iw(omega), &plant.b, index)?;
    Ok(&plant.c * rhs)
}

fn plant_ps(plant: &Plant, omega: f64, index: usize) -> Result<ComplexMatrix> {
    Ok(plant_p0(plant, omega, index)? * &plant.r1)
}

/// Minimal-order controller with one internal-model copy per frequency.
///
/// `u_k` solves `P_s(iω_k)u_k = y_k` in the minimum-norm least-squares
/// sense; when `y_k = 0` the top right singular vector of `P_s(iω_k)` is used
/// so that `G₂` still carries every frequency.
pub fn synth_regulating(plant: &Plant, exo: &Exosystem, eps: f64) -> Result<Controller> {
    require_positive_eps(eps)?;
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let columns: Vec<RegulatingColumn> = (0..exo.q())
        .into_par_iter()
        .map(|k| {
            let ps = plant_ps(plant, exo.omegas[k], k)?;
            let decomposition = svd(&ps)?;
            if decomposition.sigma_max() <= f64::MIN_POSITIVE {
                return Err(Error::ZeroTransfer { index: k });
            }
            let (y, scale) = regulation_target(plant, exo, &e_s, k)?;
            let u = if vec_norm(&y) <= 1e-14 * scale {
                decomposition.v.column(0).into_owned()
            } else {
                let u = pinv(&ps, DEFAULT_RANK_RTOL)?.matrix * &y;
                let residual = vec_norm(&(&ps * &u - &y));
                if residual > RANGE_RTOL * vec_norm(&y) {
                    return Err(Error::RangeViolation { index: k, residual });
                }
                u
            };
            let g2_row = -(&ps * &u).adjoint();
            Ok(RegulatingColumn { u, g2_row })
        })
        .collect::<Result<_>>()?;
    let dim_u = plant.n_inputs();
    let dim_y = plant.n_outputs();
    let mut k0 = ComplexMatrix::zeros(dim_u, exo.q());
    let mut g2 = ComplexMatrix::zeros(exo.q(), dim_y);
    for (k, col) in columns.iter().enumerate() {
        k0.set_column(k, &col.u);
        g2.set_row(k, &col.g2_row);
    }
    Controller::new(
        ControllerKind::Regulating,
        exo.omegas.clone(),
        1,
        g2,
        k0,
        plant.q.clone(),
        eps,
    )
}

/// Internal model of the subspace selected by `selection` (`Y → Y_N`
/// coordinates, orthonormal rows): `G₂ = (−selection)_k`,
/// `K₀^k = (selection · P_s(iω_k))^†`.
pub fn synth_internal_model(
    plant: &Plant,
    exo: &Exosystem,
    selection: &ComplexMatrix,
    kind: ControllerKind,
    eps: f64,
) -> Result<Controller> {
    require_positive_eps(eps)?;
    if selection.ncols() != plant.n_outputs() {
        return Err(Error::InvalidParameter(format!(
            "output selection acts on {} coordinates but the plant has {} outputs",
            selection.ncols(),
            plant.n_outputs()
        )));
    }
    let block_dim = selection.nrows();
    let blocks: Vec<ComplexMatrix> = (0..exo.q())
        .into_par_iter()
        .map(|k| {
            let projected = selection * plant_ps(plant, exo.omegas[k], k)?;
            let inverse = pinv(&projected, 0.0)?;
            let s = &inverse.singular_values;
            let (smax, smin) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
            let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
            if s.len() < block_dim || !(ratio > SURJECTIVITY_RTOL) {
                return Err(Error::RankDeficient { index: k, ratio });
            }
            Ok(inverse.matrix)
        })
        .collect::<Result<_>>()?;
    let q = exo.q();
    let mut k0 = ComplexMatrix::zeros(plant.n_inputs(), q * block_dim);
    let mut g2 = ComplexMatrix::zeros(q * block_dim, plant.n_outputs());
    for (k, block) in blocks.iter().enumerate() {
        k0.view_mut((0, k * block_dim), block.shape()).copy_from(block);
        g2.view_mut((k * block_dim, 0), selection.shape()).copy_from(&(-selection));
    }
    Controller::new(kind, exo.omegas.clone(), block_dim, g2, k0, plant.q.clone(), eps)
}

/// Order of the Fourier output basis a plant with `dim_y` outputs uses.
fn fourier_order(dim_y: usize) -> Result<usize> {
    if dim_y % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "output space of dimension {dim_y} is not a truncated Fourier basis"
        )));
    }
    Ok(dim_y / 2)
}

/// Approximate robust controller for `Y_N = span{1, cos jθ, sin jθ : j ≤ N}`.
pub fn synth_approx_robust(plant: &Plant, exo: &Exosystem, n: usize, eps: f64) -> Result<Controller> {
    let basis = FourierOutputBasis::new(fourier_order(plant.n_outputs())?);
    if n > basis.max_order {
        return Err(Error::InvalidParameter(format!(
            "N = {n} exceeds the output basis order {}",
            basis.max_order
        )));
    }
    synth_internal_model(
        plant,
        exo,
        &basis.selection(n),
        ControllerKind::ApproximateRobust { n },
        eps,
    )
}

/// Robust controller: the internal model covers the whole output space.
pub fn synth_robust(plant: &Plant, exo: &Exosystem, eps: f64) -> Result<Controller> {
    synth_internal_model(plant, exo, &identity(plant.n_outputs()), ControllerKind::Robust, eps)
}

/// Orthogonal projection `P_N` (in output coordinates) matched to a
/// controller: identity for robust and regulating controllers.
pub fn output_projection(ctrl: &Controller, dim_y: usize) -> Result<ComplexMatrix> {
    match ctrl.kind {
        ControllerKind::ApproximateRobust { n } => {
            Ok(FourierOutputBasis::new(fourier_order(dim_y)?).projection(n))
        }
        _ => Ok(identity(dim_y)),
    }
}

/// Largest deviation of the eigenvalues of `G₂^k P_s(iω_k) K₀^k` from `−1`.
/// This is the spectrum condition the internal-model constructions satisfy
/// by design.
pub fn spectrum_condition_error(plant: &Plant, ctrl: &Controller) -> Result<f64> {
    let mut worst = 0.0f64;
    for (k, &omega) in ctrl.omegas.iter().enumerate() {
        let range = ctrl.block_range(k);
        let g2k = ctrl.g2.rows(range.start, ctrl.block_dim).into_owned();
        let k0k = ctrl.k0.columns(range.start, ctrl.block_dim).into_owned();
        let product = g2k * plant_ps(plant, omega, k)? * k0k;
        for lambda in crate::linalg::eig(&product)?.eigenvalues {
            worst = worst.max((lambda + Complex64::from(1.0)).norm());
        }
    }
    Ok(worst)
}

/// Residuals of the frequency-domain solvability conditions of the
/// regulating controller, evaluated at `z_k = ε⁻¹φ_k` (or `0` when the
/// target `y_k` vanishes):
/// `(‖P_s(iω_k)Kz_k + P₀(iω_k)E_sφ_k + Fφ_k‖, ‖(iω_k − G₁)z_k‖)` per `k`.
pub fn regulating_residuals(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<Vec<(f64, f64)>> {
    require_positive_eps(ctrl.eps)?;
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    (0..exo.q())
        .map(|k| {
            let (y, scale) = regulation_target(plant, exo, &e_s, k)?;
            let z = if vec_norm(&y) <= 1e-14 * scale {
                ComplexVector::zeros(ctrl.dim_z())
            } else {
                unit(ctrl.dim_z(), k).unscale(ctrl.eps)
            };
            let ps = plant_ps(plant, exo.omegas[k], k)?;
            let output = &ps * (&ctrl.k * &z) - y;
            let internal = (identity(ctrl.dim_z()) * iw(exo.omegas[k]) - &ctrl.g1) * &z;
            Ok((vec_norm(&output), vec_norm(&internal)))
        })
        .collect()
}

/// Outcome of the G-condition test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GReport {
    /// `dim N(G₂)`.
    pub kernel_dim_g2: usize,
    /// `dim(R(iω_k − G₁) ∩ R(G₂))` for each `k`.
    pub intersection_dims: Vec<usize>,
    pub max_intersection_dim: usize,
    pub pass: bool,
}

/// Checks `R(iω_k − G₁) ∩ R(G₂) = {0}` for all `k` and `N(G₂) = {0}` by
/// SVD ranks with relative tolerance `tol`.
pub fn check_g_conditions(ctrl: &Controller, tol: f64) -> Result<GReport> {
    let dim_z = ctrl.dim_z();
    let rank_g2 = rank(&ctrl.g2, tol)?;
    let kernel_dim_g2 = ctrl.g2.ncols() - rank_g2;
    let intersection_dims = ctrl
        .omegas
        .par_iter()
        .map(|&omega| {
            let shifted = identity(dim_z) * iw(omega) - &ctrl.g1;
            let rank_shifted = rank(&shifted, tol)?;
            let mut joint = ComplexMatrix::zeros(dim_z, dim_z + ctrl.g2.ncols());
            joint.columns_mut(0, dim_z).copy_from(&shifted);
            joint.columns_mut(dim_z, ctrl.g2.ncols()).copy_from(&ctrl.g2);
            let rank_joint = rank(&joint, tol)?;
            Ok((rank_shifted + rank_g2).saturating_sub(rank_joint))
        })
        .collect::<Result<Vec<usize>>>()?;
    let max_intersection_dim = intersection_dims.iter().copied().max().unwrap_or(0);
    Ok(GReport {
        kernel_dim_g2,
        pass: kernel_dim_g2 == 0 && max_intersection_dim == 0,
        intersection_dims,
        max_intersection_dim,
    })
}

/// Solution `Σ = (Π, Γ)` of `ΣS = A_eΣ + B_e` with the residuals of both
/// regulator equations.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorSolution {
    pub sigma: ComplexMatrix,
    pub plant_dim: usize,
    /// `‖ΣS − A_eΣ − B_e‖₂`.
    pub residual1: f64,
    /// `‖C_eΣ + D_e‖₂`.
    pub residual2: f64,
    /// `residual2 / (‖C_e‖‖Σ‖ + ‖D_e‖)`.
    pub residual2_scaled: f64,
}

impl RegulatorSolution {
    /// Plant block `Π`.
    pub fn pi(&self) -> ComplexMatrix {
        self.sigma.rows(0, self.plant_dim).into_owned()
    }

    /// Controller block `Γ`.
    pub fn gamma(&self) -> ComplexMatrix {
        let rows = self.sigma.nrows() - self.plant_dim;
        self.sigma.rows(self.plant_dim, rows).into_owned()
    }
}

/// Solves the Sylvester part of the regulator equations column by column and
/// evaluates both residuals.
pub fn solve_regulator(cl: &ClosedLoop, exo: &Exosystem) -> Result<RegulatorSolution> {
    let sigma = sylvester_diag(&cl.a, &cl.b, &exo.omegas).map_err(|e| match e {
        crate::linalg::LinalgError::Resonance { index, omega } => Error::Resonance { index, omega },
        other => other.into(),
    })?;
    let residual1 = norm_two(&(&sigma * exo.s() - &cl.a * &sigma - &cl.b));
    let output = output_map(cl, &sigma);
    let residual2 = norm_two(&output);
    let scale = norm_two(&cl.c) * norm_two(&sigma) + norm_two(&cl.d);
    Ok(RegulatorSolution {
        residual2_scaled: if scale > 0.0 { residual2 / scale } else { residual2 },
        sigma,
        plant_dim: cl.plant_dim,
        residual1,
        residual2,
    })
}

/// `C_eΣ + D_e`: maps the exosystem state to the steady-state error.
pub fn output_map(cl: &ClosedLoop, sigma: &ComplexMatrix) -> ComplexMatrix {
    &cl.c * sigma + &cl.d
}

/// Bound on the asymptotic windowed regulation error.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBound {
    /// `σ_max(C_eΣ + D_e)²`.
    pub delta: f64,
    /// Unit vector attaining `delta`.
    pub v_max: ComplexVector,
    /// `Σ_k ‖(I − P_N)(C_eΣ + D_e)φ_k‖²`.
    pub delta_coarse: f64,
}

/// `δ` and its coarse frequency-wise counterpart for the output projection
/// `p_n`.
pub fn error_bound_delta(
    reg: &RegulatorSolution,
    cl: &ClosedLoop,
    p_n: &ComplexMatrix,
) -> Result<ErrorBound> {
    let steady = output_map(cl, &reg.sigma);
    let (sigma_max, v_max) = operator_norm(&steady)?;
    let tail = (identity(steady.nrows()) - p_n) * &steady;
    let delta_coarse = tail.column_iter().map(|c| c.norm_squared()).sum();
    Ok(ErrorBound {
        delta: sigma_max * sigma_max,
        v_max,
        delta_coarse,
    })
}

/// `‖P_N(C_eΣ + D_e)‖₂`: the part of the steady-state error the internal
/// model removes exactly.
pub fn projected_residual(reg: &RegulatorSolution, cl: &ClosedLoop, p_n: &ComplexMatrix) -> f64 {
    norm_two(&(p_n * output_map(cl, &reg.sigma)))
}

/// Controller block of the regulator solution in closed form for an
/// internal-model controller:
/// `Γφ_k = −ε⁻¹(P_N P_s K₀^k)⁻¹ P_N(P₀E_s + F)φ_k` in block `k`, zero elsewhere.
pub fn gamma_closed_form(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<ComplexMatrix> {
    require_positive_eps(ctrl.eps)?;
    let selection = -ctrl.g2.rows(0, ctrl.block_dim).into_owned();
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let mut gamma = ComplexMatrix::zeros(ctrl.dim_z(), exo.q());
    for (k, &omega) in exo.omegas.iter().enumerate() {
        let range = ctrl.block_range(k);
        let k0k = ctrl.k0.columns(range.start, ctrl.block_dim).into_owned();
        let p0 = plant_p0(plant, omega, k)?;
        let gain = &selection * &p0 * &plant.r1 * k0k;
        let rhs = &selection * (&p0 * e_s.column(k) + exo.f.column(k));
        let solved = crate::linalg::solve_dense(&gain, &ComplexMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
        gamma
            .view_mut((range.start, k), (ctrl.block_dim, 1))
            .copy_from(&solved.unscale(-ctrl.eps));
    }
    Ok(gamma)
}

/// Columns `P_s(iω_k)Kz_k + P₀(iω_k)E_sφ_k + Fφ_k` with `z_k = Γφ_k`: the
/// steady-state error per frequency, computed from transfer functions.
pub fn steady_state_columns(
    plant: &Plant,
    ctrl: &Controller,
    exo: &Exosystem,
    gamma: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let mut out = ComplexMatrix::zeros(plant.n_outputs(), exo.q());
    for (k, &omega) in exo.omegas.iter().enumerate() {
        let p0 = plant_p0(plant, omega, k)?;
        let col = &p0 * &plant.r1 * (&ctrl.k * gamma.column(k)) + &p0 * e_s.column(k) + exo.f.column(k);
        out.set_column(k, &col);
    }
    Ok(out)
}
