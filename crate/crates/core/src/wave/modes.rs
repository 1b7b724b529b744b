use rayon::prelude::*;

use super::bessel::bessel_jy;
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};

/// Inner radius (Dirichlet) and outer radius (Neumann, actuated) of the annulus.
pub const INNER_RADIUS: f64 = 1.0;
pub const OUTER_RADIUS: f64 = 2.0;

/// Radial quadrature order on `[1, 2]`.
pub const RADIAL_QUADRATURE_NODES: usize = 64;
/// Wavenumber scan: start, step, and upper limit.
pub const ROOT_SCAN_START: f64 = 0.1;
pub const ROOT_SCAN_STEP: f64 = 0.05;
pub const ROOT_SCAN_LIMIT: f64 = 500.0;
const BISECTION_WIDTH: f64 = 1e-12;

/// Boundary determinant whose zeros are admissible wavenumbers.
///
/// With `R(r) = J_m(kr) Y_m(k) - Y_m(kr) J_m(k)` the Dirichlet condition
/// `R(1) = 0` holds identically; the Neumann condition `R'(2) = 0` reduces to
/// `J'_m(2k) Y_m(k) - Y'_m(2k) J_m(k) = 0`.
pub fn cross_fn(m: usize, k: f64) -> Result<f64> {
    let inner = bessel_jy(m, k * INNER_RADIUS)?;
    let outer = bessel_jy(m, k * OUTER_RADIUS)?;
    Ok(outer.jp * inner.y - outer.yp * inner.j)
}

/// One radial eigenfunction of the annulus Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMode {
    /// Angular order.
    pub m: usize,
    /// Radial index, starting at 1.
    pub n: usize,
    /// Wavenumber; the Laplacian eigenvalue is `k^2`.
    pub k: f64,
    /// Factor making `∫_1^2 R(r)^2 r dr = 1`.
    pub normalization: f64,
    j_inner: f64,
    y_inner: f64,
}

impl RadialMode {
    fn new(m: usize, n: usize, k: f64, quad: &GaussLegendre) -> Result<Self> {
        let inner = bessel_jy(m, k * INNER_RADIUS)?;
        let mut mode = Self {
            m,
            n,
            k,
            normalization: 1.0,
            j_inner: inner.j,
            y_inner: inner.y,
        };
        let mut norm_sq = 0.0;
        for (&r, &w) in quad.nodes.iter().zip(&quad.weights) {
            let v = mode.eval_unnormalized(r)?;
            norm_sq += w * v * v * r;
        }
        mode.normalization = 1.0 / norm_sq.sqrt();
        Ok(mode)
    }

    pub fn mu(&self) -> f64 {
        self.k * self.k
    }

    fn eval_unnormalized(&self, r: f64) -> Result<f64> {
        let v = bessel_jy(self.m, self.k * r)?;
        Ok(v.j * self.y_inner - v.y * self.j_inner)
    }

    /// Normalized radial profile `R(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.normalization * self.eval_unnormalized(r)?)
    }

    /// `R(2)`: the trace on the actuated boundary.
    pub fn outer_trace(&self) -> Result<f64> {
        self.eval(OUTER_RADIUS)
    }

    pub fn residual(&self) -> Result<f64> {
        Ok(cross_fn(self.m, self.k)?.abs())
    }
}

/// The first `count` wavenumbers of angular order `m`, refined by bisection
/// and a bracketed secant polish, with quadrature normalization.
pub fn find_radial_roots(m: usize, count: usize) -> Result<Vec<RadialMode>> {
    if count == 0 {
        return Err(Error::InvalidParameter("radial root count must be at least 1".into()));
    }
    let quad = GaussLegendre::new(RADIAL_QUADRATURE_NODES, INNER_RADIUS, OUTER_RADIUS);
    let mut modes = Vec::with_capacity(count);
    let mut k0 = ROOT_SCAN_START;
    let mut f0 = cross_fn(m, k0)?;
    let mut step = 1usize;
    while modes.len() < count {
        let k1 = ROOT_SCAN_START + step as f64 * ROOT_SCAN_STEP;
        if k1 > ROOT_SCAN_LIMIT {
            return Err(Error::BracketFailure {
                m,
                found: modes.len(),
                wanted: count,
                k_max: ROOT_SCAN_LIMIT,
            });
        }
        let f1 = cross_fn(m, k1)?;
        if f0 == 0.0 || f0.signum() != f1.signum() {
            let k = refine_root(m, k0, f0, k1, f1)?;
            modes.push(RadialMode::new(m, modes.len() + 1, k, &quad)?);
        }
        k0 = k1;
        f0 = f1;
        step += 1;
    }
    Ok(modes)
}

fn refine_root(m: usize, mut lo: f64, mut f_lo: f64, mut hi: f64, f_hi: f64) -> Result<f64> {
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut f_hi = f_hi;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f_mid = cross_fn(m, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // Secant polish, kept inside a slightly widened bracket.
    let (a, b) = (lo, hi);
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let (mut x0, mut y0, mut x1, mut y1) = (lo, f_lo, hi, f_hi);
    for _ in 0..4 {
        if y1 == y0 {
            break;
        }
        let x2 = x1 - y1 * (x1 - x0) / (y1 - y0);
        if !(x2 >= a - BISECTION_WIDTH && x2 <= b + BISECTION_WIDTH) {
            break;
        }
        let y2 = cross_fn(m, x2)?;
        if y2.abs() < best.1.abs() {
            best = (x2, y2);
        }
        (x0, y0, x1, y1) = (x1, y1, x2, y2);
    }
    Ok(best.0)
}

/// Roots for every angular order `0..m_count`, computed concurrently and
/// returned in `(m, n)` order.
pub fn radial_modes(m_count: usize, n_radial: usize) -> Result<Vec<Vec<RadialMode>>> {
    (0..m_count)
        .into_par_iter()
        .map(|m| find_radial_roots(m, n_radial))
        .collect()
}
