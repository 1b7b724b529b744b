//! Invariant suites behind the `verify` command.

use std::f64::consts::PI;
use std::fmt;

use anyhow::Result;
use boundary_regulation::closed_loop::{
    assemble_direct, assemble_transformed, simulate_outputs, windowed_error, ClosedLoop,
};
use boundary_regulation::exosystem::Exosystem;
use boundary_regulation::linalg::{
    expm, identity, max_abs, pinv, sylvester_diag, sylvester_kron, Complex64, ComplexMatrix, ComplexVector,
    DEFAULT_RANK_RTOL,
};
use boundary_regulation::preset::{ReferenceProblem, DELTA_TARGET, REFERENCE_ORDER};
use boundary_regulation::regsynth::{
    check_g_conditions, error_bound_delta, output_projection, solve_regulator, G_CONDITION_RTOL,
};
use boundary_regulation::wave::{assemble_wave_plant, bessel_jy, eigenvalue_table, WavePlantConfig};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Linalg,
    Wave,
    Synth,
    Loop,
}

/// Relative size of the injected `K₀` perturbation in the negative control.
pub const NEGATIVE_CONTROL_SCALE: f64 = 0.1;
/// Residual above which the perturbed regulator counts as detected.
pub const NEGATIVE_CONTROL_THRESHOLD: f64 = 1e-3;

/// Outcome of one invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{status} [{}] {}: {}", self.suite, self.name, self.detail)
    }
}

fn check(suite: &'static str, name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check { suite, name: name.into(), pass, detail }
}

/// Runs the selected suites on the plant described by `config`.
pub fn cmd_verify(config: &RunConfig, suite: Suite, seed: u64) -> Result<Vec<Check>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    if wanted(Suite::Linalg) {
        checks.extend(linalg_suite(&mut rng)?);
    }
    let needs_problem = wanted(Suite::Wave) || wanted(Suite::Synth) || wanted(Suite::Loop);
    if needs_problem {
        let problem = ReferenceProblem::with_signals(config.wave_config(), config.signal_spec())?;
        if wanted(Suite::Wave) {
            checks.extend(wave_suite(config, &problem, &mut rng)?);
        }
        if wanted(Suite::Synth) {
            checks.extend(synth_suite(config, &problem, &mut rng)?);
        }
        if wanted(Suite::Loop) {
            checks.extend(loop_suite(config, &problem)?);
        }
    }
    Ok(checks)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn linalg_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    const S: &str = "linalg";
    let mut out = Vec::new();

    let ae = random_matrix(rng, 12, 12) - identity(12) * Complex64::from(3.0);
    let be = random_matrix(rng, 12, 3);
    let omegas = [-1.0, 0.5, 2.0];
    let diff = max_abs(&(sylvester_diag(&ae, &be, &omegas)? - sylvester_kron(&ae, &be, &omegas)?));
    out.push(check(S, "sylvester column solver vs Kronecker system", diff < 1e-10, format!("max diff {diff:.2e}")));

    let a = random_matrix(rng, 6, 4);
    let p = pinv(&a, DEFAULT_RANK_RTOL)?.matrix;
    let penrose = [
        max_abs(&(&a * &p * &a - &a)),
        max_abs(&(&p * &a * &p - &p)),
        max_abs(&((&a * &p).adjoint() - &a * &p)),
        max_abs(&((&p * &a).adjoint() - &p * &a)),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    out.push(check(S, "pseudoinverse Penrose identities", penrose < 1e-10, format!("max violation {penrose:.2e}")));

    let m = random_matrix(rng, 8, 8);
    let inverse_gap = max_abs(&(expm(&m, 0.7)? * expm(&m, -0.7)? - identity(8)));
    out.push(check(S, "expm(At) expm(-At) = I", inverse_gap < 1e-10, format!("max deviation {inverse_gap:.2e}")));
    Ok(out)
}

/// Open-loop plant `ẋ = A x`, `y = C x` as a closed loop without controller.
fn open_loop(a: &ComplexMatrix, c: &ComplexMatrix, weights: &[f64]) -> Result<(ClosedLoop, Exosystem)> {
    let n = a.nrows();
    let exo = Exosystem::zero(vec![0.0], 1, c.nrows())?;
    let cl = ClosedLoop::new(a.clone(), ComplexMatrix::zeros(n, 1), c.clone(), ComplexMatrix::zeros(c.nrows(), 1), n)?
        .with_energy_weights(weights.to_vec())?;
    Ok((cl, exo))
}

fn wave_suite(config: &RunConfig, problem: &ReferenceProblem, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    const S: &str = "wave";
    let mut out = Vec::new();

    let table = eigenvalue_table(config.wave_config())?;
    let worst = table.iter().map(|r| r.4).fold(0.0, f64::max);
    out.push(check(S, "radial eigenvalue residuals", worst < 1e-10, format!("{} roots, max |cross| {worst:.2e}", table.len())));

    let mut wronskian = 0.0f64;
    for m in 0..config.plant.m_angular {
        for x in [1.0, 5.0, 20.0] {
            let (a, b) = (bessel_jy(m, x)?, bessel_jy(m + 1, x)?);
            wronskian = wronskian.max((b.j * a.y - a.j * b.y - 2.0 / (PI * x)).abs());
        }
    }
    out.push(check(S, "Bessel Wronskian", wronskian < 1e-10, format!("max error {wronskian:.2e}")));

    let gram = problem.wave.mode_gram()?;
    let mut off = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            if i != j {
                off = off.max(gram[(i, j)].abs());
            }
        }
    }
    out.push(check(S, "eigenmode Gram matrix off-diagonals", off < 1e-6, format!("max {off:.2e}")));

    let undamped = assemble_wave_plant(WavePlantConfig { q_fb: 0.0, ..config.wave_config() })?;
    let (cl, exo) = open_loop(&undamped.system.a_s, &undamped.system.c, &undamped.energy_weights)?;
    let x0 = random_state(rng, cl.state_dim());
    let traj = simulate_outputs(&cl, &exo, &x0, 10.0, 0.01)?;
    let e0 = traj.energy[0];
    let drift = traj.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0;
    out.push(check(S, "undamped energy conservation on [0, 10]", drift < 1e-9, format!("relative drift {drift:.2e}")));

    let q_fb = config.plant.damping_q;
    if q_fb > 0.0 {
        let wave = &problem.wave;
        let (cl, exo) = open_loop(&wave.system.a_s, &wave.system.c, &wave.energy_weights)?;
        let mut worst_ratio = 0.0f64;
        for _ in 0..5 {
            let x0 = random_state(rng, cl.state_dim());
            let traj = simulate_outputs(&cl, &exo, &x0, 20.0, 0.01)?;
            let integral = trapezoid(&traj.error_sq(), traj.dt);
            worst_ratio = worst_ratio.max(integral * 2.0 * q_fb / traj.energy[0]);
        }
        out.push(check(
            S,
            "damped output bound ∫‖y‖² ≤ ‖x₀‖²_E / (2Q)",
            worst_ratio <= 1.0,
            format!("max ratio {worst_ratio:.3}"),
        ));
    }
    Ok(out)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| Complex64::from(rng.random_range(-1.0..1.0)))
}

fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    dt * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[samples.len() - 1]))
}

fn synth_suite(config: &RunConfig, problem: &ReferenceProblem, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    const S: &str = "synth";
    let mut out = Vec::new();
    let eps = config.controller.epsilon;
    let dim_y = problem.plant().n_outputs();

    let robust = problem.robust_controller(eps)?;
    let g = check_g_conditions(&robust, G_CONDITION_RTOL)?;
    out.push(check(
        S,
        "robust controller satisfies the G-conditions",
        g.pass,
        format!("ker G2 = {}, max intersection = {}", g.kernel_dim_g2, g.max_intersection_dim),
    ));

    let n = config.controller.n.unwrap_or(REFERENCE_ORDER).min(config.plant.m_angular - 1);
    let approx = problem.approx_controller(n, eps)?;
    let g = check_g_conditions(&approx, G_CONDITION_RTOL)?;
    let expected = dim_y - (2 * n + 1);
    out.push(check(
        S,
        format!("approximate controller (N = {n}) kernel dimension"),
        g.kernel_dim_g2 == expected,
        format!("ker G2 = {}, expected {expected}", g.kernel_dim_g2),
    ));

    let cl = problem.close_loop(&approx)?;
    let reg = solve_regulator(&cl, &problem.exo)?;
    let bound = error_bound_delta(&reg, &cl, &output_projection(&approx, dim_y)?)?;
    out.push(check(
        S,
        format!("error bound delta below {DELTA_TARGET}"),
        bound.delta < DELTA_TARGET,
        format!("delta = {:.3e}, coarse = {:.3e}", bound.delta, bound.delta_coarse),
    ));

    let regulating = problem.regulating_controller(eps)?;
    let cl = problem.close_loop(&regulating)?;
    let reg = solve_regulator(&cl, &problem.exo)?;
    out.push(check(
        S,
        "regulating controller solves the regulator equations",
        reg.residual2_scaled < 1e-8,
        format!("scaled residual {:.2e}", reg.residual2_scaled),
    ));

    let direction = random_matrix(rng, regulating.k0.nrows(), regulating.k0.ncols());
    let perturbed = regulating.with_perturbed_k0(&direction, NEGATIVE_CONTROL_SCALE)?;
    let cl = problem.close_loop(&perturbed)?;
    let reg = solve_regulator(&cl, &problem.exo)?;
    out.push(check(
        S,
        "negative control: 10% K0 perturbation breaks the regulator equations",
        reg.residual2 > NEGATIVE_CONTROL_THRESHOLD,
        format!("residual {:.3e} (must exceed {NEGATIVE_CONTROL_THRESHOLD:e})", reg.residual2),
    ));
    Ok(out)
}

fn loop_suite(config: &RunConfig, problem: &ReferenceProblem) -> Result<Vec<Check>> {
    const S: &str = "loop";
    let mut out = Vec::new();
    let n = config.controller.n.unwrap_or(REFERENCE_ORDER).min(config.plant.m_angular - 1);
    let ctrl = problem.approx_controller(n, config.controller.epsilon)?;
    let direct = assemble_direct(problem.plant(), &ctrl, &problem.exo)?;
    let transformed = assemble_transformed(problem.plant(), &ctrl, &problem.exo)?;
    let gap = direct.spectrum()?.distance(transformed.spectrum()?);
    out.push(check(S, "direct and transformed closed loops are similar", gap < 1e-8, format!("spectral distance {gap:.2e}")));

    let abscissa = direct.abscissa()?;
    out.push(check(S, "closed loop is exponentially stable", abscissa < 0.0, format!("abscissa {abscissa:.4}")));

    let sim = &config.simulation;
    let traj = simulate_outputs(&direct, &problem.exo, &ComplexVector::zeros(direct.state_dim()), sim.t_end, sim.dt)?;
    let j = windowed_error(&traj, sim.window)?;
    let t_last = *j.times.last().unwrap_or(&0.0);
    let decays = j.log_linear_slope(0.0, t_last).is_some_and(|s| s < 0.0);
    out.push(check(
        S,
        "windowed error decays",
        decays && j.last() < j.values[0],
        format!("J(0) = {:.3e}, J({t_last}) = {:.3e}", j.values[0], j.last()),
    ));
    Ok(out)
}
