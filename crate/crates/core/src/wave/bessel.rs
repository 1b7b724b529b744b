//! Integer-order Bessel functions of the first and second kind.
//!
//! The evaluation follows the classical continued-fraction scheme: the ratio
//! `J'_m / J_m` comes from the Lentz-evaluated continued fraction (CF1), `J`
//! is recurred downward to order `mu`, and the pair `(J_mu, Y_mu)` is fixed
//! either by Temme's series (`x < 2`) or by Steed's complex continued fraction
//! (CF2). `Y` is then recurred upward, which is stable for the second kind.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-30;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J_m(x)`, `Y_m(x)` and their derivatives with respect to `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

/// Evaluates `J_m`, `Y_m`, `J'_m`, `Y'_m` at `x > 0`.
pub fn bessel_jy(m: usize, x: f64) -> Result<BesselJY> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::BesselDomain(x));
    }
    let nu = m as f64;
    // Number of downward recurrence steps from nu to mu.
    let nl = if x < XMIN {
        m
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J'_nu / J_nu by modified Lentz.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Bessel continued fraction CF1"));
    }

    // Downward recurrence of unnormalized J from nu to mu.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1) = if x < XMIN {
        temme_series(x, xmu, f, w)?
    } else {
        steed_cf2(x, xmu, xmu2, xi, f, w, rjl)?
    };

    let scale = rjmu / rjl;
    let j = rjl1 * scale;
    let jp = rjp1 * scale;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    Ok(BesselJY {
        j,
        y: rymu,
        jp,
        yp: nu * xi * rymu - ry1,
    })
}

/// Temme's series for `Y_mu`, `Y_{mu+1}` at small `x`; integer orders only
/// reach it with `mu = 0`, where the gamma-function auxiliaries are exact.
fn temme_series(x: f64, xmu: f64, f: f64, w: f64) -> Result<(f64, f64, f64)> {
    debug_assert!(xmu == 0.0);
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let xmu2 = xmu * xmu;
    let x2 = 0.5 * x;
    let pimu = PI * xmu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let mut d = -x2.ln();
    let e = xmu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    // 1/Gamma(1 +- mu) auxiliaries at mu = 0.
    let (gam1, gam2, gampl, gammi) = (-EULER_GAMMA, 1.0, 1.0, 1.0);
    let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let e = e.exp();
    let mut p = e / (gampl * PI);
    let mut q = 1.0 / (e * PI * gammi);
    let pimu2 = 0.5 * pimu;
    let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
    let r = PI * pimu2 * fact3 * fact3;
    let mut c = 1.0;
    d = -x2 * x2;
    let mut sum = ff + r * q;
    let mut sum1 = p;
    let mut converged = false;
    for i in 1..MAXIT {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - xmu2);
        c *= d / fi;
        p /= fi - xmu;
        q /= fi + xmu;
        let del = c * (ff + r * q);
        sum += del;
        let del1 = c * p - fi * del;
        sum1 += del1;
        if del.abs() < (1.0 + sum.abs()) * EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Bessel Temme series"));
    }
    let rymu = -sum;
    let ry1 = -sum1 * xi2;
    let rymup = xmu * xi * rymu - ry1;
    let rjmu = w / (rymup - f * rymu);
    Ok((rjmu, rymu, ry1))
}

/// Steed's continued fraction CF2 for `p + iq = (J' + iY') / (J + iY)`.
fn steed_cf2(
    x: f64,
    xmu: f64,
    xmu2: f64,
    xi: f64,
    f: f64,
    w: f64,
    rjl: f64,
) -> Result<(f64, f64, f64)> {
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    let mut converged = false;
    for i in 2..MAXIT {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Bessel continued fraction CF2"));
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let rymu = rjmu * gam;
    let rymup = rymu * (p + q / gam);
    let ry1 = xmu * xi * rymu - rymup;
    Ok((rjmu, rymu, ry1))
}
