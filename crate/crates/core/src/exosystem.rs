//! Diagonal signal generator `v̇ = Sv`, `w = Ev`, `y_ref = −Fv`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{imaginary_diag, Complex64, ComplexMatrix, ComplexVector};
use crate::wave::{project_fn, FourierOutputBasis};

/// Angular samples used to project exosystem profiles. Profiles with a kink
/// in their periodic extension (such as `(π − θ)²`) alias at `O(n⁻²)`, so
/// the grid is finer than the plant's quadrature grid.
pub const EXOSYSTEM_GRID: usize = 8192;

/// Frequencies must differ by more than this to count as distinct.
const FREQUENCY_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Exosystem {
    pub omegas: Vec<f64>,
    /// `W → U` disturbance map.
    pub e: ComplexMatrix,
    /// `W → Y`; the reference is `y_ref = −Fv`.
    pub f: ComplexMatrix,
    pub v0: ComplexVector,
}

impl Exosystem {
    pub fn new(omegas: Vec<f64>, e: ComplexMatrix, f: ComplexMatrix, v0: ComplexVector) -> Result<Self> {
        let q = omegas.len();
        for (name, cols) in [("E", e.ncols()), ("F", f.ncols()), ("v0", v0.len())] {
            if cols != q {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {cols} columns but there are {q} frequencies"
                )));
            }
        }
        for i in 0..q {
            for j in 0..i {
                if (omegas[i] - omegas[j]).abs() <= FREQUENCY_SEPARATION {
                    return Err(Error::InvalidParameter(format!(
                        "exosystem frequencies {i} and {j} coincide ({})",
                        omegas[i]
                    )));
                }
            }
        }
        Ok(Self { omegas, e, f, v0 })
    }

    /// Exosystem with the given frequencies and `E = F = 0`.
    pub fn zero(omegas: Vec<f64>, dim_u: usize, dim_y: usize) -> Result<Self> {
        let q = omegas.len();
        Self::new(
            omegas,
            ComplexMatrix::zeros(dim_u, q),
            ComplexMatrix::zeros(dim_y, q),
            ComplexVector::from_element(q, Complex64::from(1.0)),
        )
    }

    pub fn q(&self) -> usize {
        self.omegas.len()
    }

    pub fn s(&self) -> ComplexMatrix {
        imaginary_diag(&self.omegas)
    }

    /// `v(t) = e^{St} v₀`, evaluated componentwise.
    pub fn v_at(&self, t: f64) -> ComplexVector {
        ComplexVector::from_fn(self.q(), |k, _| {
            Complex64::new(0.0, self.omegas[k] * t).exp() * self.v0[k]
        })
    }

    /// `(w(t), y_ref(t)) = (E v(t), −F v(t))`.
    pub fn signals_at(&self, t: f64) -> (ComplexVector, ComplexVector) {
        let v = self.v_at(t);
        (&self.e * &v, -(&self.f * &v))
    }

    pub fn with_v0(mut self, v0: ComplexVector) -> Result<Self> {
        if v0.len() != self.q() {
            return Err(Error::InvalidParameter("v0 length must equal q".into()));
        }
        self.v0 = v0;
        Ok(self)
    }
}

/// Time dependence of a signal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalFactor {
    Sin,
    Cos,
}

/// Whether a term contributes to the disturbance `d = Ev` or the reference
/// `y_ref = −Fv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalTarget {
    Disturbance,
    Reference,
}

/// Angular profile of a signal term on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant,
    Cos(usize),
    Sin(usize),
    /// `(π − θ)²`.
    CenteredQuadratic,
    /// `sin(θ/2)`.
    HalfSine,
    /// Values on the uniform grid `θ_j = 2πj/n`; evaluated by periodic
    /// piecewise-linear interpolation.
    Samples(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Cos(m) => (*m as f64 * theta).cos(),
            Profile::Sin(m) => (*m as f64 * theta).sin(),
            Profile::CenteredQuadratic => (PI - theta).powi(2),
            Profile::HalfSine => (0.5 * theta).sin(),
            Profile::Samples(values) => {
                let n = values.len();
                if n == 0 {
                    return 0.0;
                }
                let x = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                values[i] * (1.0 - frac) + values[(i + 1) % n] * frac
            }
        }
    }
}

/// One term `amplitude · profile(θ) · factor(ω t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTerm {
    pub target: SignalTarget,
    pub profile: Profile,
    pub amplitude: f64,
    pub temporal: TemporalFactor,
    /// Nonnegative angular frequency; `±ω` both enter the exosystem.
    pub omega: f64,
}

impl SignalTerm {
    pub fn eval(&self, theta: f64, t: f64) -> f64 {
        let time = match self.temporal {
            TemporalFactor::Sin => (self.omega * t).sin(),
            TemporalFactor::Cos => (self.omega * t).cos(),
        };
        self.amplitude * self.profile.eval(theta) * time
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalSpec {
    pub terms: Vec<SignalTerm>,
}

impl SignalSpec {
    /// `(d(θ, t), y_ref(θ, t))` evaluated directly from the terms.
    pub fn eval(&self, theta: f64, t: f64) -> (f64, f64) {
        let mut d = 0.0;
        let mut y = 0.0;
        for term in &self.terms {
            match term.target {
                SignalTarget::Disturbance => d += term.eval(theta, t),
                SignalTarget::Reference => y += term.eval(theta, t),
            }
        }
        (d, y)
    }

    /// Frequencies `{±ω}` of all terms, ascending (`0` once if present).
    pub fn frequencies(&self) -> Vec<f64> {
        let mut omegas: Vec<f64> = Vec::new();
        for term in &self.terms {
            for w in [-term.omega, term.omega] {
                if !omegas.iter().any(|&o| (o - w).abs() <= FREQUENCY_SEPARATION) {
                    omegas.push(w);
                }
            }
        }
        omegas.sort_by(f64::total_cmp);
        omegas
    }
}

/// Builds the exosystem whose `Ev(t)`, `−Fv(t)` reproduce the described signals
/// in the Fourier output basis of order `max_order`, with `v₀ = (1, …, 1)`.
///
/// Temporal factors are expanded as `sin ωt = (e^{iωt} − e^{−iωt})/(2i)` and
/// `cos ωt = (e^{iωt} + e^{−iωt})/2`, so conjugate frequency pairs carry
/// conjugate columns and the generated signals are real.
pub fn build_exosystem(spec: &SignalSpec, max_order: usize) -> Result<Exosystem> {
    for term in &spec.terms {
        if !(term.omega >= 0.0 && term.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "signal frequencies must be finite and nonnegative, got {}",
                term.omega
            )));
        }
    }
    let omegas = spec.frequencies();
    let dim = FourierOutputBasis::new(max_order).dim();
    let q = omegas.len();
    let mut e = ComplexMatrix::zeros(dim, q);
    let mut f = ComplexMatrix::zeros(dim, q);
    let column = |w: f64| {
        omegas
            .iter()
            .position(|&o| (o - w).abs() <= FREQUENCY_SEPARATION)
            .expect("frequency collected above")
    };
    for term in &spec.terms {
        let coeffs = project_fn(|t| term.amplitude * term.profile.eval(t), EXOSYSTEM_GRID, max_order);
        // Contribution to the physical signal; F carries the reference with a minus sign.
        let (target, sign) = match term.target {
            SignalTarget::Disturbance => (&mut e, 1.0),
            SignalTarget::Reference => (&mut f, -1.0),
        };
        let (plus, minus) = (column(term.omega), column(-term.omega));
        let half = Complex64::from(0.5 * sign);
        let (cp, cm) = match term.temporal {
            TemporalFactor::Cos => (half, half),
            TemporalFactor::Sin => (half / Complex64::i(), -half / Complex64::i()),
        };
        if plus == minus {
            // ω = 0: sin vanishes identically, cos is constant.
            if term.temporal == TemporalFactor::Cos {
                let mut col = target.column_mut(plus);
                col += &coeffs * Complex64::from(sign);
            }
            continue;
        }
        {
            let mut col = target.column_mut(plus);
            col += &coeffs * cp;
        }
        let mut col = target.column_mut(minus);
        col += &coeffs * cm;
    }
    Exosystem::new(omegas, e, f, ComplexVector::from_element(q, Complex64::from(1.0)))
}

/// The annulus reference problem:
/// `y_ref = −(π−θ)²/(2π²) sin(πt) − ½ sin(θ/2) cos(2πt)`,
/// `d = cos θ sin(2πt) + sin θ sin(πt)`.
pub fn reference_signal_spec() -> SignalSpec {
    let term = |target, profile, amplitude, temporal, omega| SignalTerm {
        target,
        profile,
        amplitude,
        temporal,
        omega,
    };
    SignalSpec {
        terms: vec![
            term(
                SignalTarget::Reference,
                Profile::CenteredQuadratic,
                -1.0 / (2.0 * PI * PI),
                TemporalFactor::Sin,
                PI,
            ),
            term(SignalTarget::Reference, Profile::HalfSine, -0.5, TemporalFactor::Cos, 2.0 * PI),
            term(SignalTarget::Disturbance, Profile::Cos(1), 1.0, TemporalFactor::Sin, 2.0 * PI),
            term(SignalTarget::Disturbance, Profile::Sin(1), 1.0, TemporalFactor::Sin, PI),
        ],
    }
}

/// Exosystem of the annulus reference problem, `S = diag(−2iπ, −iπ, iπ, 2iπ)`.
pub fn build_reference_exosystem(max_order: usize) -> Result<Exosystem> {
    if max_order < 5 {
        return Err(Error::InvalidParameter(format!(
            "the reference problem needs an output basis of order at least 5, got {max_order}"
        )));
    }
    build_exosystem(&reference_signal_spec(), max_order)
}
