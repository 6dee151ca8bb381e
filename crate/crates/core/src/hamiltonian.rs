//! The complex Hamiltonian `H = 𝔭²/2m + v(𝔷)`, its real and imaginary parts,
//! and the quantities of the equivalent real description in Darboux
//! coordinates.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::potential::{ComplexValue, EvalError, PotentialExpr};

/// Default mass, matching the conventions of the built-in potential table.
pub const DEFAULT_MASS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecError {
    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),
}

/// A potential together with a mass. The symbolic derivative is computed
/// once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    potential: PotentialExpr,
    force: PotentialExpr,
    mass: f64,
}

impl SystemSpec {
    pub fn new(potential: PotentialExpr, mass: f64) -> Result<Self, SpecError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(SpecError::InvalidMass(mass));
        }
        let force = potential.derivative();
        Ok(SystemSpec { potential, force, mass })
    }

    pub fn potential(&self) -> &PotentialExpr {
        &self.potential
    }

    /// The derivative `dv/dz`.
    pub fn potential_derivative(&self) -> &PotentialExpr {
        &self.force
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dv(&self, z: ComplexValue) -> Result<ComplexValue, EvalError> {
        self.force.eval(z)
    }

    /// `H = 𝔭²/(2m) + v(𝔷)`.
    pub fn hamiltonian(&self, pt: ComplexPhasePoint) -> Result<ComplexValue, EvalError> {
        Ok(pt.p * pt.p / (2.0 * self.mass) + self.potential.eval(pt.z)?)
    }

    /// `(H_r, H_i) = ((p² − q²)/2m + v_r, pq/m + v_i)`.
    pub fn hr_hi(&self, w: RealPhasePoint) -> Result<(f64, f64), EvalError> {
        let [x, p, y, q] = w.0;
        let v = self.potential.split_real_imag(x, y)?;
        let hr = (p * p - q * q) / (2.0 * self.mass) + v.vr;
        let hi = p * q / self.mass + v.vi;
        Ok((hr, hi))
    }

    /// The equivalent real Hamiltonian
    /// `h = (p₁² − x₂²)/2m + 2·v_r(x₁/√2, p₂/√2)`.
    pub fn h(&self, xi: DarbouxPoint) -> Result<f64, EvalError> {
        let [x1, p1, x2, p2] = xi.0;
        let v = self.potential.split_real_imag(x1 * FRAC_1_SQRT_2, p2 * FRAC_1_SQRT_2)?;
        Ok((p1 * p1 - x2 * x2) / (2.0 * self.mass) + 2.0 * v.vr)
    }

    /// `H_i = x₂p₁/2m + v_i(x₁/√2, p₂/√2)` in Darboux coordinates.
    pub fn hi_darboux(&self, xi: DarbouxPoint) -> Result<f64, EvalError> {
        let [x1, p1, x2, p2] = xi.0;
        let v = self.potential.split_real_imag(x1 * FRAC_1_SQRT_2, p2 * FRAC_1_SQRT_2)?;
        Ok(x2 * p1 / (2.0 * self.mass) + v.vi)
    }

    /// Exact gradient of the complex `H` with respect to `w = (x, p, y, q)`.
    ///
    /// Since `H` is holomorphic in `(𝔷, 𝔭)`, `∂_y = i∂_x` and `∂_q = i∂_p`.
    pub fn grad_hamiltonian(&self, w: RealPhasePoint) -> Result<[ComplexValue; 4], EvalError> {
        let pt = w.to_complex();
        let dv = self.dv(pt.z)?;
        let dp = pt.p / self.mass;
        let i = Complex64::i();
        Ok([dv, dp, i * dv, i * dp])
    }
}

/// `(𝔷, 𝔭) ∈ ℂ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexPhasePoint {
    pub z: ComplexValue,
    pub p: ComplexValue,
}

impl ComplexPhasePoint {
    pub fn new(z: ComplexValue, p: ComplexValue) -> Self {
        ComplexPhasePoint { z, p }
    }

    pub fn to_real(self) -> RealPhasePoint {
        RealPhasePoint([self.z.re, self.p.re, self.z.im, self.p.im])
    }

    /// Darboux coordinates of the `J₀` frame: `(x₁, p₁, x₂, p₂) = √2·(x, p, q, y)`.
    pub fn to_darboux(self) -> DarbouxPoint {
        self.to_real().to_darboux()
    }
}

/// `w = (x, p, y, q)` with `𝔷 = x + iy`, `𝔭 = p + iq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealPhasePoint(pub [f64; 4]);

impl RealPhasePoint {
    pub fn new(x: f64, p: f64, y: f64, q: f64) -> Self {
        RealPhasePoint([x, p, y, q])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn p(&self) -> f64 {
        self.0[1]
    }
    pub fn y(&self) -> f64 {
        self.0[2]
    }
    pub fn q(&self) -> f64 {
        self.0[3]
    }

    pub fn to_complex(self) -> ComplexPhasePoint {
        let [x, p, y, q] = self.0;
        ComplexPhasePoint { z: Complex64::new(x, y), p: Complex64::new(p, q) }
    }

    pub fn to_darboux(self) -> DarbouxPoint {
        let [x, p, y, q] = self.0;
        DarbouxPoint([SQRT_2 * x, SQRT_2 * p, SQRT_2 * q, SQRT_2 * y])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `(x₁, p₁, x₂, p₂)`, canonical coordinates of a Darboux frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarbouxPoint(pub [f64; 4]);

impl DarbouxPoint {
    pub fn new(x1: f64, p1: f64, x2: f64, p2: f64) -> Self {
        DarbouxPoint([x1, p1, x2, p2])
    }

    pub fn x1(&self) -> f64 {
        self.0[0]
    }
    pub fn p1(&self) -> f64 {
        self.0[1]
    }
    pub fn x2(&self) -> f64 {
        self.0[2]
    }
    pub fn p2(&self) -> f64 {
        self.0[3]
    }

    /// Inverse of the `J₀` coordinate map.
    pub fn to_real(self) -> RealPhasePoint {
        let [x1, p1, x2, p2] = self.0;
        RealPhasePoint([
            x1 * FRAC_1_SQRT_2,
            p1 * FRAC_1_SQRT_2,
            p2 * FRAC_1_SQRT_2,
            x2 * FRAC_1_SQRT_2,
        ])
    }

    pub fn to_complex(self) -> ComplexPhasePoint {
        self.to_real().to_complex()
    }
}
