//! Plant–controller–exosystem interconnection, exact simulation, windowed
//! regulation error, ε-sweeps and perturbation experiments.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exosystem::Exosystem;
use crate::linalg::{
    block2, eig, expm, identity, solve_dense, vec_norm, vstack, Complex64, ComplexMatrix,
    ComplexVector, Spectrum,
};
use crate::plant::Plant;
use crate::regsynth::{
    error_bound_delta, output_projection, solve_regulator, Controller, ErrorBound,
};
use crate::wave::{assemble_wave_plant, energy_sq, ModalWavePlant};

/// Simulations stop once `‖x(t)‖` exceeds this multiple of the initial data.
pub const STATE_GROWTH_CAP: f64 = 1e12;

/// `ẋ_e = A x_e + B v`, `e = C x_e + D v` with `x_e = (x, z)`.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
    pub plant_dim: usize,
    pub ctrl_dim: usize,
    /// Weights of the plant energy norm; Euclidean when absent.
    pub energy_weights: Option<Vec<f64>>,
    spectrum: OnceLock<Spectrum>,
}

impl ClosedLoop {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        plant_dim: usize,
    ) -> Result<Self> {
        let n = crate::linalg::ensure_square(&a)?;
        let mismatch = |what: &str| Err(Error::InvalidParameter(format!("closed loop: {what}")));
        if plant_dim > n {
            return mismatch("plant dimension exceeds the state dimension");
        }
        if b.nrows() != n || c.ncols() != n {
            return mismatch("B rows and C columns must match the state dimension");
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return mismatch("D must be outputs x exosystem states");
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            plant_dim,
            ctrl_dim: n - plant_dim,
            energy_weights: None,
            spectrum: OnceLock::new(),
        })
    }

    pub fn with_energy_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.plant_dim {
            return Err(Error::InvalidParameter(
                "energy weights must cover the plant state".into(),
            ));
        }
        self.energy_weights = Some(weights);
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Eigenvalues of `A`, computed once. A block-triangular `A` is split
    /// into its diagonal blocks and a diagonal block contributes its entries
    /// directly, so the internal model's `iω_k` are exact when `K = 0`.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let computed = block_spectrum(&self.a, self.plant_dim)?;
        Ok(self.spectrum.get_or_init(|| computed))
    }

    /// Spectral abscissa `max Re σ(A)`.
    pub fn abscissa(&self) -> Result<f64> {
        Ok(self.spectrum()?.abscissa)
    }

    /// `C(λ − A)⁻¹B + D`.
    pub fn transfer(&self, lambda: Complex64) -> Result<ComplexMatrix> {
        let shifted = identity(self.state_dim()) * lambda - &self.a;
        Ok(&self.c * solve_dense(&shifted, &self.b)? + &self.d)
    }

    /// Laplace transform at `λ` of the error produced from `x_e(0) = x0`
    /// with the exosystem running freely from `v₀`:
    /// `C(λ − A)⁻¹(x0 + B V) + D V`, `V = (λ − S)⁻¹v₀`.
    pub fn response_transform(&self, exo: &Exosystem, x0: &ComplexVector, lambda: Complex64) -> Result<ComplexVector> {
        let v = ComplexVector::from_fn(exo.q(), |k, _| exo.v0[k] / (lambda - Complex64::new(0.0, exo.omegas[k])));
        let shifted = identity(self.state_dim()) * lambda - &self.a;
        let rhs = x0 + &self.b * &v;
        let x = solve_dense(&shifted, &ComplexMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
        Ok(&self.c * x.column(0) + &self.d * v)
    }

    fn plant_energy(&self, x: &ComplexVector) -> f64 {
        let plant = x.rows(0, self.plant_dim);
        match &self.energy_weights {
            Some(w) => energy_sq(w, &plant.into_owned()),
            None => plant.norm_squared(),
        }
    }
}

fn is_diagonal(m: &ComplexMatrix) -> bool {
    m.iter().enumerate().all(|(idx, z)| {
        let (i, j) = (idx % m.nrows(), idx / m.nrows());
        i == j || *z == Complex64::from(0.0)
    })
}

fn dense_spectrum(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if is_diagonal(m) {
        return Ok(m.diagonal().iter().copied().collect());
    }
    Ok(eig(m)?.eigenvalues)
}

fn block_spectrum(a: &ComplexMatrix, split: usize) -> Result<Spectrum> {
    let n = a.nrows();
    let rest = n - split;
    let zero = |m: ComplexMatrix| m.iter().all(|z| *z == Complex64::from(0.0));
    let triangular = split > 0
        && rest > 0
        && (zero(a.view((0, split), (split, rest)).into_owned())
            || zero(a.view((split, 0), (rest, split)).into_owned()));
    let eigenvalues = if triangular {
        let mut values = dense_spectrum(&a.view((0, 0), (split, split)).into_owned())?;
        values.extend(dense_spectrum(&a.view((split, split), (rest, rest)).into_owned())?);
        values
    } else {
        dense_spectrum(a)?
    };
    Ok(Spectrum::from_eigenvalues(eigenvalues))
}

/// Direct interconnection of plant and controller:
/// `A = [[A_s, BR₁K], [G₂C, G₁]]`, `B = [[BE_s], [G₂F]]`, `C = [C, 0]`, `D = F`.
pub fn assemble_direct(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<ClosedLoop> {
    check_compatible(plant, ctrl, exo)?;
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let br1 = &plant.b * &plant.r1;
    let a = block2(&plant.a_s, &(&br1 * &ctrl.k), &(&ctrl.g2 * &plant.c), &ctrl.g1)?;
    let b = vstack(&[&(&plant.b * &e_s), &(&ctrl.g2 * &exo.f)])?;
    let mut c = ComplexMatrix::zeros(plant.n_outputs(), a.nrows());
    c.columns_mut(0, plant.n_states()).copy_from(&plant.c);
    ClosedLoop::new(a, b, c, exo.f.clone(), plant.n_states())
}

fn check_compatible(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<()> {
    let problems = [
        (ctrl.omegas != exo.omegas, "controller and exosystem frequencies differ"),
        (ctrl.g2.ncols() != plant.n_outputs(), "G2 does not act on the plant output"),
        (ctrl.k.nrows() != plant.r1.ncols(), "K does not map into the plant input"),
        (exo.e.nrows() != plant.r2.ncols(), "E does not map into the disturbance input"),
        (exo.f.nrows() != plant.n_outputs(), "F does not map into the output space"),
    ];
    match problems.iter().find(|(bad, _)| *bad) {
        Some((_, what)) => Err(Error::InvalidParameter(format!("closed loop: {what}"))),
        None => Ok(()),
    }
}

/// State change between the direct and the transformed closed loop:
/// `x_e = T(x, z) − N v` with `T = [[I, −B_sR₁K], [0, I]]`, `N = [[B_sE_s], [0]]`.
///
/// In modal coordinates the boundary lifting `B_s` is the input matrix `B`
/// itself, and the generator applied to it is `A_sB_s + B`, which turns the
/// transformed plant transfer function back into `C(λ − A_s)⁻¹B`.
#[derive(Debug, Clone)]
pub struct StateTransform {
    pub t: ComplexMatrix,
    pub n: ComplexMatrix,
}

impl StateTransform {
    pub fn apply(&self, x: &ComplexVector, v: &ComplexVector) -> ComplexVector {
        &self.t * x - &self.n * v
    }
}

pub fn transformed_state_map(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<StateTransform> {
    check_compatible(plant, ctrl, exo)?;
    let bs = &plant.b;
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let (n, m) = (plant.n_states(), ctrl.dim_z());
    let t = block2(
        &identity(n),
        &-(bs * &plant.r1 * &ctrl.k),
        &ComplexMatrix::zeros(m, n),
        &identity(m),
    )?;
    let nmat = vstack(&[&(bs * e_s), &ComplexMatrix::zeros(m, exo.q())])?;
    Ok(StateTransform { t, n: nmat })
}

/// Closed loop in the transformed coordinates `x_e = T(x, z) − N v`. Used to
/// cross-validate [`assemble_direct`].
pub fn assemble_transformed(plant: &Plant, ctrl: &Controller, exo: &Exosystem) -> Result<ClosedLoop> {
    check_compatible(plant, ctrl, exo)?;
    let bs = &plant.b;
    let a_bs = &plant.a_s * bs + &plant.b;
    let c = &plant.c;
    let e_s = plant.e_s(&exo.e, &exo.f)?;
    let s = exo.s();
    let r1k = &plant.r1 * &ctrl.k;
    let bs_r1k = bs * &r1k;
    let g2c = &ctrl.g2 * c;
    let g1_tilde = &ctrl.g1 + &ctrl.g2 * c * &bs_r1k;
    let d_e = c * bs * &e_s + &exo.f;

    let a11 = &plant.a_s - &bs_r1k * &g2c;
    let a12 = &a_bs * &r1k - &bs_r1k * &g1_tilde;
    let a = block2(&a11, &a12, &g2c, &g1_tilde)?;
    let b_top = &a_bs * &e_s - bs * &e_s * &s - &bs_r1k * &ctrl.g2 * &d_e;
    let b = vstack(&[&b_top, &(&ctrl.g2 * &d_e)])?;
    let c_e = {
        let mut m = ComplexMatrix::zeros(plant.n_outputs(), a.nrows());
        m.columns_mut(0, plant.n_states()).copy_from(c);
        m.columns_mut(plant.n_states(), ctrl.dim_z()).copy_from(&(c * &bs_r1k));
        m
    };
    ClosedLoop::new(a, b, c_e, d_e, plant.n_states())
}

/// Stability sweep over the tuning parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSweep {
    /// `(ε, abscissa)` in grid order.
    pub table: Vec<(f64, f64)>,
    /// ε with the smallest abscissa.
    pub eps_best: f64,
    /// Number of leading grid points with negative abscissa.
    pub stable_prefix: usize,
}

impl EpsilonSweep {
    pub fn is_stable(&self, eps: f64) -> Option<bool> {
        self.table
            .iter()
            .find(|(e, _)| (e - eps).abs() <= 1e-12 * eps.abs().max(1.0))
            .map(|(_, a)| *a < 0.0)
    }
}

/// Closed-loop abscissa for each ε in `grid` (evaluated concurrently,
/// reported in grid order).
pub fn find_epsilon_star<F>(plant: &Plant, family: F, exo: &Exosystem, grid: &[f64]) -> Result<EpsilonSweep>
where
    F: Fn(f64) -> Result<Controller> + Sync,
{
    if grid.is_empty() || grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(
            "the ε grid must be nonempty, finite and nonnegative".into(),
        ));
    }
    let table: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&eps| {
            let ctrl = family(eps)?;
            Ok((eps, assemble_direct(plant, &ctrl, exo)?.abscissa()?))
        })
        .collect::<Result<_>>()?;
    let eps_best = table
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|e| e.0)
        .unwrap_or(grid[0]);
    let stable_prefix = table.iter().take_while(|(_, a)| *a < 0.0).count();
    Ok(EpsilonSweep {
        table,
        eps_best,
        stable_prefix,
    })
}

/// Uniformly sampled closed-loop response.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Closed-loop states; empty when only outputs were recorded.
    pub states: Vec<ComplexVector>,
    /// Regulation error `e(t)` in output coordinates.
    pub errors: Vec<ComplexVector>,
    /// Plant energy `‖x(t)‖²_E`.
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times.first().copied().unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `‖e(t)‖²` per sample.
    pub fn error_sq(&self) -> Vec<f64> {
        self.errors.iter().map(|e| e.norm_squared()).collect()
    }

    /// `‖Pe(t)‖²` per sample for an output-space matrix `P`.
    pub fn projected_error_sq(&self, p: &ComplexMatrix) -> Vec<f64> {
        self.errors.iter().map(|e| (p * e).norm_squared()).collect()
    }
}

/// Exact sampled simulation, recording states.
pub fn simulate_exact(cl: &ClosedLoop, exo: &Exosystem, x0: &ComplexVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    simulate(cl, exo, x0, 0, t_end, dt, true)
}

/// Exact sampled simulation recording only errors and energy.
pub fn simulate_outputs(cl: &ClosedLoop, exo: &Exosystem, x0: &ComplexVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    simulate(cl, exo, x0, 0, t_end, dt, false)
}

/// Outputs on `[t_start, t_start + duration]` of the run started at `t = 0`
/// from `x0`. The state at `t_start` is reached exactly by binary powers of
/// the one-step matrix, so long horizons cost `O(log(t_start/dt))` matrix
/// products. Sample times are absolute.
pub fn simulate_window(
    cl: &ClosedLoop,
    exo: &Exosystem,
    x0: &ComplexVector,
    t_start: f64,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    let skip = if t_start > 0.0 { step_count(t_start, dt)? } else { 0 };
    simulate(cl, exo, x0, skip, duration, dt, false)
}

/// Number of steps of size `dt` in `[0, t_end]`, tolerating rounding.
fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite() && t_end >= dt && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "simulation needs 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    Ok((t_end / dt + 1e-9).floor() as usize)
}

fn matrix_power(m: &ComplexMatrix, mut n: usize) -> ComplexMatrix {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Steps the augmented system `(x_e, v)` with `exp([[A, B], [0, S]] dt)`.
/// The exosystem block of the step is diagonal, so `v` is advanced by its
/// exact phase factors and only the `x_e` rows are multiplied out.
fn simulate(
    cl: &ClosedLoop,
    exo: &Exosystem,
    x0: &ComplexVector,
    skip: usize,
    duration: f64,
    dt: f64,
    keep_states: bool,
) -> Result<Trajectory> {
    let steps = step_count(duration, dt)?;
    let n = cl.state_dim();
    let q = exo.q();
    if x0.len() != n || cl.b.ncols() != q {
        return Err(Error::InvalidParameter(format!(
            "initial state of length {} for a closed loop of dimension {n}",
            x0.len()
        )));
    }
    let augmented = block2(&cl.a, &cl.b, &ComplexMatrix::zeros(q, n), &exo.s())?;
    let step = expm(&augmented, dt)?;
    let phi = step.view((0, 0), (n, n)).into_owned();
    let psi = step.view((0, n), (n, q)).into_owned();

    let cap = STATE_GROWTH_CAP * (1.0 + vec_norm(x0) + vec_norm(&exo.v0));
    let mut x = x0.clone();
    if skip > 0 {
        let jump = matrix_power(&step, skip);
        x = jump.view((0, 0), (n, n)) * x0 + jump.view((0, n), (n, q)) * &exo.v0;
        let norm = vec_norm(&x);
        if !(norm <= cap) {
            return Err(Error::StateGrowth { norm, cap, t: skip as f64 * dt });
        }
    }
    let mut traj = Trajectory {
        dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(if keep_states { steps + 1 } else { 0 }),
        errors: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
    };
    for i in skip..=skip + steps {
        let t = i as f64 * dt;
        let v = exo.v_at(t);
        if i > skip {
            let v_prev = exo.v_at((i - 1) as f64 * dt);
            x = &phi * &x + &psi * &v_prev;
            let norm = vec_norm(&x);
            if !(norm <= cap) {
                return Err(Error::StateGrowth { norm, cap, t });
            }
        }
        traj.times.push(t);
        traj.errors.push(&cl.c * &x + &cl.d * &v);
        traj.energy.push(cl.plant_energy(&x));
        if keep_states {
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

/// Sliding-window integral `J(t) = ∫_t^{t+window} s(τ) dτ` of sampled data.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub dt: f64,
    pub window: f64,
    /// Window start times `0, dt, …, t_end − window`.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ErrorSeries {
    /// `J` at the grid point nearest to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let t0 = self.times.first().copied()?;
        if t < t0 - 0.5 * self.dt {
            return None;
        }
        self.values.get(((t - t0) / self.dt).round() as usize).copied()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Value at the last window start, `t_end − window`.
    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Least-squares slope of `ln J` over `[t0, t1]` (nonpositive samples are
    /// skipped). `None` with fewer than two usable samples.
    pub fn log_linear_slope(&self, t0: f64, t1: f64) -> Option<f64> {
        let points: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, v)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12 && **v > 0.0)
            .map(|(t, v)| (*t, v.ln()))
            .collect();
        log_linear_fit(&points)
    }
}

/// Slope of the least-squares line through `(t, y)` points.
pub fn log_linear_fit(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Trapezoid-rule sliding window over uniformly spaced samples starting at
/// `t = 0`.
pub fn windowed_integral(samples: &[f64], dt: f64, window: f64) -> Result<ErrorSeries> {
    windowed_integral_from(samples, 0.0, dt, window)
}

/// As [`windowed_integral`] for samples starting at `t0`.
pub fn windowed_integral_from(samples: &[f64], t0: f64, dt: f64, window: f64) -> Result<ErrorSeries> {
    let t_end = dt * samples.len().saturating_sub(1) as f64;
    let invalid = Error::InvalidWindow { window, t_end, dt };
    if !(window > 0.0 && dt > 0.0) {
        return Err(invalid);
    }
    let width = (window / dt).round() as usize;
    if width == 0
        || (width as f64 * dt - window).abs() > 1e-9 * window.max(dt)
        || width >= samples.len()
    {
        return Err(invalid);
    }
    let count = samples.len() - width;
    let values = (0..count)
        .map(|i| {
            let inner: f64 = samples[i + 1..i + width].iter().sum();
            dt * (inner + 0.5 * (samples[i] + samples[i + width]))
        })
        .collect();
    Ok(ErrorSeries {
        dt,
        window,
        times: (0..count).map(|i| t0 + i as f64 * dt).collect(),
        values,
    })
}

/// `J(t) = ∫_t^{t+window} ‖e(s)‖² ds` along a trajectory.
pub fn windowed_error(traj: &Trajectory, window: f64) -> Result<ErrorSeries> {
    windowed_integral_from(&traj.error_sq(), traj.t_start(), traj.dt, window)
}

/// `∫_t^{t+window} ‖Pe(s)‖² ds` along a trajectory.
pub fn windowed_projected_error(traj: &Trajectory, p: &ComplexMatrix, window: f64) -> Result<ErrorSeries> {
    windowed_integral_from(&traj.projected_error_sq(p), traj.t_start(), traj.dt, window)
}

/// `‖e(t) − (C_eΣ + D_e)v(t)‖` per sample: the transient part of the error.
pub fn transient_error(traj: &Trajectory, steady: &ComplexMatrix, exo: &Exosystem) -> Vec<f64> {
    traj.times
        .iter()
        .zip(&traj.errors)
        .map(|(&t, e)| vec_norm(&(e - steady * exo.v_at(t))))
        .collect()
}

/// Steady-state size of the windowed error of a stable loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticError {
    /// Start of the measurement interval.
    pub t_start: f64,
    /// Largest `J(t)` over one period of the slowest exosystem tone.
    pub j_max: f64,
    /// Largest windowed integral of `‖P e‖²` over the same interval.
    pub projected_j_max: f64,
}

/// Measures `J` after `time_constants` decay times `1/|abscissa|` have
/// elapsed. The start is rounded up to a whole number of periods of the
/// slowest nonzero tone so that the measured interval covers the same phase
/// of the steady state for every loop.
pub fn asymptotic_windowed_error(
    cl: &ClosedLoop,
    exo: &Exosystem,
    p: &ComplexMatrix,
    time_constants: f64,
    dt: f64,
    window: f64,
) -> Result<AsymptoticError> {
    let abscissa = cl.abscissa()?;
    if abscissa >= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "asymptotic error requires a stable loop, abscissa = {abscissa}"
        )));
    }
    let omega_min = exo
        .omegas
        .iter()
        .map(|w| w.abs())
        .filter(|w| *w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let period = if omega_min.is_finite() { 2.0 * std::f64::consts::PI / omega_min } else { window };
    let settle = time_constants / -abscissa;
    let t_start = ((settle / period).ceil() * period / dt).round() * dt;
    let x0 = ComplexVector::zeros(cl.state_dim());
    let traj = simulate_window(cl, exo, &x0, t_start, period + window, dt)?;
    Ok(AsymptoticError {
        t_start,
        j_max: windowed_error(&traj, window)?.max(),
        projected_j_max: windowed_projected_error(&traj, p, window)?.max(),
    })
}

/// Horizon, step and window of a verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub t_end: f64,
    pub dt: f64,
    pub window: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            dt: 0.01,
            window: 1.0,
        }
    }
}

/// Plant and exosystem changes applied while the controller is kept fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    /// Multiplies the stabilizing feedback `Q`.
    pub q_scale: f64,
    /// Multiplies the membrane tension.
    pub stiffness_scale: f64,
    pub e_delta: Option<ComplexMatrix>,
    pub f_delta: Option<ComplexMatrix>,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            q_scale: 1.0,
            stiffness_scale: 1.0,
            e_delta: None,
            f_delta: None,
        }
    }
}

/// Measurements of a stable closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub abscissa: f64,
    pub bound: ErrorBound,
    /// `‖C_eΣ + D_e‖` relative to the loop's scale.
    pub residual2_scaled: f64,
    /// `J(t_end − window)`.
    pub asymptotic_j: f64,
    /// Windowed integral of `‖P_N e‖²` at `t_end − window`.
    pub projected_j_final: f64,
    pub j: ErrorSeries,
    pub projected_j: ErrorSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerificationOutcome {
    /// `iω_k` lies in the spectrum of the stabilized plant, so the regulation
    /// problem is not posed for the perturbed system.
    Resonant { index: usize, omega: f64 },
    /// The closed loop is not exponentially stable.
    Unstable { abscissa: f64 },
    Stable(Box<VerificationReport>),
}

/// Closes the loop around `plant`, checks the standing assumptions, and
/// simulates from zero initial state with the exosystem started at `v₀`.
pub fn verify_loop(
    plant: &Plant,
    ctrl: &Controller,
    exo: &Exosystem,
    energy_weights: Option<&[f64]>,
    settings: &SimSettings,
) -> Result<VerificationOutcome> {
    for (k, &omega) in exo.omegas.iter().enumerate() {
        match plant.p0(Complex64::new(0.0, omega)) {
            Err(Error::Resonance { .. }) => return Ok(VerificationOutcome::Resonant { index: k, omega }),
            Err(e) => return Err(e),
            Ok(_) => {}
        }
    }
    let mut cl = assemble_direct(plant, ctrl, exo)?;
    if let Some(w) = energy_weights {
        cl = cl.with_energy_weights(w.to_vec())?;
    }
    let abscissa = cl.abscissa()?;
    if abscissa >= 0.0 {
        return Ok(VerificationOutcome::Unstable { abscissa });
    }
    let p_n = output_projection(ctrl, plant.n_outputs())?;
    let reg = solve_regulator(&cl, exo)?;
    let bound = error_bound_delta(&reg, &cl, &p_n)?;
    let x0 = ComplexVector::zeros(cl.state_dim());
    let traj = simulate_outputs(&cl, exo, &x0, settings.t_end, settings.dt)?;
    let j = windowed_error(&traj, settings.window)?;
    let projected_j = windowed_projected_error(&traj, &p_n, settings.window)?;
    Ok(VerificationOutcome::Stable(Box::new(VerificationReport {
        abscissa,
        bound,
        residual2_scaled: reg.residual2_scaled,
        asymptotic_j: j.last(),
        projected_j_final: projected_j.last(),
        j,
        projected_j,
    })))
}

/// Applies `pert` to the wave plant and exosystem and verifies the loop
/// with the unchanged controller.
pub fn perturb_and_verify(
    wave: &ModalWavePlant,
    ctrl: &Controller,
    exo: &Exosystem,
    pert: &Perturbation,
    settings: &SimSettings,
) -> Result<VerificationOutcome> {
    let perturbed_wave;
    let wave = if pert.stiffness_scale != 1.0 {
        let mut config = wave.config;
        config.t_mod *= pert.stiffness_scale;
        perturbed_wave = assemble_wave_plant(config)?;
        &perturbed_wave
    } else {
        wave
    };
    let plant = if pert.q_scale != 1.0 {
        wave.system.with_feedback(wave.system.q.scale(pert.q_scale))?
    } else {
        wave.system.clone()
    };
    let exo = perturb_exosystem(exo, pert)?;
    verify_loop(&plant, ctrl, &exo, Some(&wave.energy_weights), settings)
}

fn perturb_exosystem(exo: &Exosystem, pert: &Perturbation) -> Result<Exosystem> {
    let mut out = exo.clone();
    for (delta, target) in [(&pert.e_delta, &mut out.e), (&pert.f_delta, &mut out.f)] {
        if let Some(d) = delta {
            if d.shape() != target.shape() {
                return Err(Error::InvalidParameter("exosystem perturbation has the wrong shape".into()));
            }
            *target += d;
        }
    }
    Ok(out)
}
