//! The `eigs`, `synth`, `simulate` and `reproduce` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use boundary_regulation::closed_loop::{
    simulate_exact, simulate_outputs, windowed_error, windowed_projected_error, ClosedLoop, ErrorSeries,
    Trajectory,
};
use boundary_regulation::linalg::{ComplexMatrix, ComplexVector};
use boundary_regulation::preset::ReferenceProblem;
use boundary_regulation::regsynth::{
    check_g_conditions, error_bound_delta, output_projection, solve_regulator, synth_approx_robust, synth_regulating,
    synth_robust, Controller, GReport, G_CONDITION_RTOL,
};
use boundary_regulation::wave::modes::{INNER_RADIUS, OUTER_RADIUS};
use boundary_regulation::wave::{angular_grid, eigenvalue_table, FourierOutputBasis};
use serde::Serialize;

use crate::config::{ControllerKindConfig, InitialState, RunConfig};
use crate::export::{line_plot, write_csv, write_matrix, Series};

pub const EIGS_HEADER: [&str; 5] = ["m", "n", "k", "mu", "residual"];
pub const SIMULATE_HEADER: [&str; 5] = ["t", "J(t)", "‖e(t)‖²", "‖P_N e(t)‖²", "energy"];

/// Angular resolution of the profile grids written by `reproduce`.
const PROFILE_THETAS: usize = 64;

/// Plant, exosystem, controller and closed loop of one configuration.
pub struct Pipeline {
    pub config: RunConfig,
    pub problem: ReferenceProblem,
    pub controller: Controller,
    pub closed_loop: ClosedLoop,
    pub projection: ComplexMatrix,
}

impl Pipeline {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let problem = ReferenceProblem::with_signals(config.wave_config(), config.signal_spec())
            .context("assembling plant and exosystem")?;
        let controller = synthesize(config, &problem)?;
        let closed_loop = problem.close_loop(&controller)?;
        let projection = output_projection(&controller, problem.plant().n_outputs())?;
        Ok(Self {
            config: config.clone(),
            problem,
            controller,
            closed_loop,
            projection,
        })
    }

    /// `[x₀; z₀]` as configured.
    pub fn initial_state(&self) -> Result<ComplexVector> {
        let n_plant = self.closed_loop.plant_dim;
        let n_ctrl = self.closed_loop.ctrl_dim;
        let x0 = load_state(&self.config.simulation.x0, n_plant, "x0")?;
        let z0 = load_state(&self.config.simulation.z0, n_ctrl, "z0")?;
        Ok(ComplexVector::from_iterator(n_plant + n_ctrl, x0.iter().chain(z0.iter()).copied()))
    }

    /// Plant output coefficients `y = Cx` of a closed-loop state.
    pub fn output(&self, state: &ComplexVector) -> ComplexVector {
        self.problem.plant().c.clone() * state.rows(0, self.closed_loop.plant_dim)
    }
}

fn synthesize(config: &RunConfig, problem: &ReferenceProblem) -> Result<Controller> {
    let eps = config.controller.epsilon;
    let plant = problem.plant();
    let ctrl = match config.controller.kind {
        ControllerKindConfig::Regulating => synth_regulating(plant, &problem.exo, eps),
        ControllerKindConfig::Robust => synth_robust(plant, &problem.exo, eps),
        ControllerKindConfig::Approx => {
            let n = config.controller.n.context("controller.n is required for kind = \"approx\"")?;
            synth_approx_robust(plant, &problem.exo, n, eps)
        }
    };
    ctrl.context("controller synthesis")
}

fn load_state(source: &InitialState, dim: usize, name: &str) -> Result<ComplexVector> {
    match source {
        InitialState::Zero => Ok(ComplexVector::zeros(dim)),
        InitialState::File(path) => {
            let m = crate::export::read_matrix(path)?;
            ensure!(
                m.shape() == (dim, 1),
                "{name} in {} has shape {:?}, expected ({dim}, 1)",
                path.display(),
                m.shape()
            );
            Ok(m.column(0).into_owned())
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    elapsed_seconds: f64,
}

fn write_metadata(dir: &Path, config: &RunConfig, command: &str, started: Instant) -> Result<()> {
    fs::write(dir.join("config.toml"), config.to_toml()?)?;
    let meta = Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    fs::write(dir.join("metadata.toml"), toml::to_string(&meta)?)?;
    Ok(())
}

/// Writes `eigs.csv` and returns the number of rows.
pub fn cmd_eigs(config: &RunConfig, out: &Path) -> Result<usize> {
    config.validate()?;
    prepare_dir(out)?;
    let table = eigenvalue_table(config.wave_config())?;
    let rows: Vec<Vec<Option<f64>>> = table
        .iter()
        .map(|&(m, n, k, mu, residual)| vec![Some(m as f64), Some(n as f64), Some(k), Some(mu), Some(residual)])
        .collect();
    write_csv(&out.join("eigs.csv"), &EIGS_HEADER, &rows)?;
    Ok(rows.len())
}

/// G-conditions and error bound of a synthesized controller.
#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub kind: String,
    pub dim_z: usize,
    pub epsilon: f64,
    pub abscissa: f64,
    pub delta: f64,
    pub delta_coarse: f64,
    pub v0_norm_sq: f64,
    pub residual2_scaled: f64,
    pub g_kernel_dim: usize,
    pub g_max_intersection_dim: usize,
    pub g_pass: bool,
}

/// Writes the controller matrices and `synth_report.toml` (G-conditions,
/// error bound, closed-loop abscissa).
pub fn cmd_synth(config: &RunConfig, out: &Path) -> Result<SynthReport> {
    let started = Instant::now();
    let pipe = Pipeline::build(config)?;
    prepare_dir(out)?;
    let report = synth_report(&pipe)?;
    write_controller(out, &pipe.controller)?;
    fs::write(out.join("synth_report.toml"), toml::to_string(&report)?)?;
    write_metadata(out, config, "synth", started)?;
    Ok(report)
}

fn synth_report(pipe: &Pipeline) -> Result<SynthReport> {
    let g: GReport = check_g_conditions(&pipe.controller, G_CONDITION_RTOL)?;
    let reg = solve_regulator(&pipe.closed_loop, &pipe.problem.exo)?;
    let bound = error_bound_delta(&reg, &pipe.closed_loop, &pipe.projection)?;
    Ok(SynthReport {
        kind: format!("{:?}", pipe.controller.kind),
        dim_z: pipe.controller.dim_z(),
        epsilon: pipe.controller.eps,
        abscissa: pipe.closed_loop.abscissa()?,
        delta: bound.delta,
        delta_coarse: bound.delta_coarse,
        v0_norm_sq: pipe.problem.v0_norm_sq(),
        residual2_scaled: reg.residual2_scaled,
        g_kernel_dim: g.kernel_dim_g2,
        g_max_intersection_dim: g.max_intersection_dim,
        g_pass: g.pass,
    })
}

fn write_controller(dir: &Path, ctrl: &Controller) -> Result<()> {
    write_matrix(&dir.join("controller_g1.txt"), &ctrl.g1)?;
    write_matrix(&dir.join("controller_g2.txt"), &ctrl.g2)?;
    write_matrix(&dir.join("controller_k.txt"), &ctrl.k)?;
    Ok(())
}

/// Headline numbers of a simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub t_end: f64,
    /// Last time at which the windowed error is defined.
    pub t_last_window: f64,
    pub j_final: f64,
    pub projected_j_final: f64,
    /// Log-linear slope of `J` over its whole range.
    pub j_slope: Option<f64>,
    pub delta: f64,
    pub v0_norm_sq: f64,
    pub abscissa: f64,
}

/// Result of `simulate`: summary plus the series behind `simulate.csv`.
pub struct SimulationRun {
    pub summary: SimulationSummary,
    pub trajectory: Trajectory,
    pub j: ErrorSeries,
    pub projected_j: ErrorSeries,
}

/// Full pipeline run; writes `simulate.csv`, matrices, reports and (if
/// enabled) `j.svg`.
pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<SimulationRun> {
    let started = Instant::now();
    let pipe = Pipeline::build(config)?;
    prepare_dir(out)?;
    let sim = &config.simulation;
    let x0 = pipe.initial_state()?;
    let traj = simulate_outputs(&pipe.closed_loop, &pipe.problem.exo, &x0, sim.t_end, sim.dt)?;
    let j = windowed_error(&traj, sim.window)?;
    let projected_j = windowed_projected_error(&traj, &pipe.projection, sim.window)?;

    let err_sq = traj.error_sq();
    let proj_sq = traj.projected_error_sq(&pipe.projection);
    let rows: Vec<Vec<Option<f64>>> = (0..traj.len())
        .map(|i| {
            vec![
                Some(traj.times[i]),
                j.values.get(i).copied(),
                Some(err_sq[i]),
                Some(proj_sq[i]),
                Some(traj.energy[i]),
            ]
        })
        .collect();
    write_csv(&out.join("simulate.csv"), &SIMULATE_HEADER, &rows)?;

    let report = synth_report(&pipe)?;
    let t_last = *j.times.last().context("empty error series")?;
    let summary = SimulationSummary {
        t_end: traj.t_end(),
        t_last_window: t_last,
        j_final: j.last(),
        projected_j_final: projected_j.last(),
        j_slope: j.log_linear_slope(0.0, t_last),
        delta: report.delta,
        v0_norm_sq: report.v0_norm_sq,
        abscissa: report.abscissa,
    };
    write_controller(out, &pipe.controller)?;
    for (name, m) in [
        ("closed_loop_a.txt", &pipe.closed_loop.a),
        ("closed_loop_b.txt", &pipe.closed_loop.b),
        ("closed_loop_c.txt", &pipe.closed_loop.c),
        ("closed_loop_d.txt", &pipe.closed_loop.d),
    ] {
        write_matrix(&out.join(name), m)?;
    }
    fs::write(out.join("synth_report.toml"), toml::to_string(&report)?)?;
    fs::write(out.join("summary.toml"), toml::to_string(&summary)?)?;
    if config.output.emit_svg {
        let series = [
            Series { label: "J(t)", points: j.times.iter().copied().zip(j.values.iter().copied()).collect() },
            Series {
                label: "P_N part",
                points: projected_j.times.iter().copied().zip(projected_j.values.iter().copied()).collect(),
            },
            Series {
                label: "delta |v0|^2",
                points: vec![(0.0, summary.delta * summary.v0_norm_sq), (t_last, summary.delta * summary.v0_norm_sq)],
            },
        ];
        fs::write(out.join("j.svg"), line_plot("windowed regulation error", "t", &series, true))?;
    }
    write_metadata(out, config, "simulate", started)?;
    Ok(SimulationRun {
        summary,
        trajectory: traj,
        j,
        projected_j,
    })
}

/// Summary of a figure reproduction: the files written and headline numbers.
#[derive(Debug, Clone, Serialize)]
pub struct FigureReport {
    pub figure: u8,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Over- and undershoot of the output relative to the reference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackingExtremes {
    /// `max (y − y_ref)`.
    pub overshoot: f64,
    /// `max (y_ref − y)`.
    pub undershoot: f64,
}

/// Runs the reference configuration for figure 1–4 into `out`.
///
/// 1. output and reference profiles for `t ∈ [0, 10]`;
/// 2. the windowed regulation error for `t ∈ [0, 20]` (same as `simulate`
///    on the default configuration);
/// 3. the membrane displacement at `t = 9`;
/// 4. the disturbance for `t ∈ [0, 6]`.
pub fn reproduce(figure: u8, out: &Path) -> Result<FigureReport> {
    let mut config = RunConfig::default();
    config.output.directory = out.to_path_buf();
    prepare_dir(out)?;
    match figure {
        1 => figure_profiles(&config, out),
        2 => {
            let run = cmd_simulate(&config, out)?;
            let s = &run.summary;
            Ok(FigureReport {
                figure,
                files: vec![out.join("simulate.csv"), out.join("j.svg")],
                notes: vec![
                    format!("J({}) = {:e}", s.t_last_window, s.j_final),
                    format!("J(19) = {:e}", run.j.at(19.0).unwrap_or(f64::NAN)),
                    format!("delta |v0|^2 = {:e}", s.delta * s.v0_norm_sq),
                    format!("log-linear slope of J = {:?}", s.j_slope),
                ],
            })
        }
        3 => figure_displacement(&config, out),
        4 => figure_disturbance(&config, out),
        other => bail!("figure must be 1, 2, 3 or 4, got {other}"),
    }
}

fn time_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn figure_profiles(config: &RunConfig, out: &Path) -> Result<FigureReport> {
    const HORIZON: f64 = 10.0;
    const SAMPLE: f64 = 0.1;
    let pipe = Pipeline::build(config)?;
    let dt = config.simulation.dt;
    let traj = simulate_exact(&pipe.closed_loop, &pipe.problem.exo, &pipe.initial_state()?, HORIZON, dt)?;
    let basis = FourierOutputBasis::new(config.plant.m_angular - 1);
    let thetas = angular_grid(PROFILE_THETAS);
    let stride = (SAMPLE / dt).round() as usize;
    let mut rows = Vec::new();
    let mut extremes = TrackingExtremes { overshoot: f64::NEG_INFINITY, undershoot: f64::NEG_INFINITY };
    let mut last_profile = Vec::new();
    for i in (0..traj.len()).step_by(stride.max(1)) {
        let t = traj.times[i];
        let y = pipe.output(&traj.states[i]);
        last_profile.clear();
        for &theta in &thetas {
            let value = basis.synthesize(&y, theta);
            let reference = pipe.problem.signals.eval(theta, t).1;
            extremes.overshoot = extremes.overshoot.max(value - reference);
            extremes.undershoot = extremes.undershoot.max(reference - value);
            rows.push(vec![Some(t), Some(theta), Some(value), Some(reference)]);
            last_profile.push((theta, value, reference));
        }
    }
    let csv = out.join("figure1.csv");
    write_csv(&csv, &["t", "theta", "y", "y_ref"], &rows)?;
    let mut files = vec![csv];
    if config.output.emit_svg {
        let svg = out.join("figure1.svg");
        let series = [
            Series { label: "y(θ, 10)", points: last_profile.iter().map(|p| (p.0, p.1)).collect() },
            Series { label: "y_ref(θ, 10)", points: last_profile.iter().map(|p| (p.0, p.2)).collect() },
        ];
        fs::write(&svg, line_plot("output and reference at t = 10", "θ", &series, false))?;
        files.push(svg);
    }
    fs::write(out.join("tracking_extremes.toml"), toml::to_string(&extremes)?)?;
    Ok(FigureReport {
        figure: 1,
        files,
        notes: vec![
            format!("overshoot max(y - y_ref) = {:e}", extremes.overshoot),
            format!("undershoot max(y_ref - y) = {:e}", extremes.undershoot),
        ],
    })
}

fn figure_displacement(config: &RunConfig, out: &Path) -> Result<FigureReport> {
    const TIME: f64 = 9.0;
    const RADII: usize = 11;
    let pipe = Pipeline::build(config)?;
    let traj = simulate_exact(
        &pipe.closed_loop,
        &pipe.problem.exo,
        &pipe.initial_state()?,
        TIME,
        config.simulation.dt,
    )?;
    let state = traj.states.last().context("empty trajectory")?;
    let thetas = angular_grid(PROFILE_THETAS);
    let mut rows = Vec::new();
    let mut outer = Vec::new();
    for i in 0..RADII {
        let r = INNER_RADIUS + (OUTER_RADIUS - INNER_RADIUS) * i as f64 / (RADII - 1) as f64;
        for &theta in &thetas {
            let w = pipe.problem.wave.displacement(state, r, theta)?;
            rows.push(vec![Some(r), Some(theta), Some(w)]);
            if i == RADII - 1 {
                outer.push((theta, w));
            }
        }
    }
    let csv = out.join("figure3.csv");
    write_csv(&csv, &["r", "theta", "w"], &rows)?;
    let mut files = vec![csv];
    if config.output.emit_svg {
        let svg = out.join("figure3.svg");
        let series = [Series { label: "w(2, θ, 9)", points: outer }];
        fs::write(&svg, line_plot("displacement on the outer boundary at t = 9", "θ", &series, false))?;
        files.push(svg);
    }
    Ok(FigureReport { figure: 3, files, notes: vec![format!("state energy at t = 9: {:e}", traj.energy.last().unwrap())] })
}

fn figure_disturbance(config: &RunConfig, out: &Path) -> Result<FigureReport> {
    let signals = config.signal_spec();
    let thetas = angular_grid(PROFILE_THETAS);
    let mut rows = Vec::new();
    let mut at_quarter = Vec::new();
    for t in time_grid(6.0, 0.05) {
        for (j, &theta) in thetas.iter().enumerate() {
            let d = signals.eval(theta, t).0;
            rows.push(vec![Some(t), Some(theta), Some(d)]);
            if j == PROFILE_THETAS / 8 {
                at_quarter.push((t, d));
            }
        }
    }
    let csv = out.join("figure4.csv");
    write_csv(&csv, &["t", "theta", "d"], &rows)?;
    let mut files = vec![csv];
    if config.output.emit_svg {
        let svg = out.join("figure4.svg");
        let series = [Series { label: "d(π/4, t)", points: at_quarter }];
        fs::write(&svg, line_plot("disturbance", "t", &series, false))?;
        files.push(svg);
    }
    Ok(FigureReport { figure: 4, files, notes: Vec::new() })
}
