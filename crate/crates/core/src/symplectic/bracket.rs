//! Brackets `{{A, B}} = Σ J_ij ∂_i A ∂_j B` over `w = (x, p, y, q)`.

use num_complex::Complex64;
use serde::Serialize;

use super::{RealSymplecticMatrix, SymplecticParams, CONDITIONING_WARN};
use crate::hamiltonian::{RealPhasePoint, SystemSpec};
use crate::potential::EvalError;

/// Bound on the compatibility residuals `|{{𝔷,H}} − 𝔭/m|` and
/// `|{{𝔭,H}} + v'(𝔷)|`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// A (possibly complex-valued) scalar function on phase space.
///
/// The default gradient uses central differences with step
/// `1e-6·max(1, ‖w‖)`; the fields defined here override it with exact
/// derivatives.
pub trait Field {
    fn value(&self, w: &RealPhasePoint) -> Complex64;

    fn gradient(&self, w: &RealPhasePoint) -> [Complex64; 4] {
        let h = 1e-6 * w.norm().max(1.0);
        std::array::from_fn(|k| {
            let mut plus = *w;
            let mut minus = *w;
            plus.0[k] += h;
            minus.0[k] -= h;
            (self.value(&plus) - self.value(&minus)) / (2.0 * h)
        })
    }
}

/// The coordinate `w_k` (0-based: x, p, y, q).
#[derive(Debug, Clone, Copy)]
pub struct Coordinate(pub usize);

impl Field for Coordinate {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        Complex64::new(w.0[self.0], 0.0)
    }

    fn gradient(&self, _w: &RealPhasePoint) -> [Complex64; 4] {
        let mut g = [Complex64::new(0.0, 0.0); 4];
        g[self.0] = Complex64::new(1.0, 0.0);
        g
    }
}

/// `𝔷 = x + iy`.
#[derive(Debug, Clone, Copy)]
pub struct PositionZ;

impl Field for PositionZ {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        Complex64::new(w.x(), w.y())
    }

    fn gradient(&self, _w: &RealPhasePoint) -> [Complex64; 4] {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        [l, o, Complex64::i(), o]
    }
}

/// `𝔭 = p + iq`.
#[derive(Debug, Clone, Copy)]
pub struct MomentumP;

impl Field for MomentumP {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        Complex64::new(w.p(), w.q())
    }

    fn gradient(&self, _w: &RealPhasePoint) -> [Complex64; 4] {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        [o, l, o, Complex64::i()]
    }
}

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// The complex Hamiltonian `H`. Overflow shows up as NaN.
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian<'a>(pub &'a SystemSpec);

impl Field for Hamiltonian<'_> {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        self.0.hamiltonian(w.to_complex()).unwrap_or(NAN)
    }

    fn gradient(&self, w: &RealPhasePoint) -> [Complex64; 4] {
        self.0.grad_hamiltonian(*w).unwrap_or([NAN; 4])
    }
}

/// `H_r = Re H`.
#[derive(Debug, Clone, Copy)]
pub struct RealPart<'a>(pub &'a SystemSpec);

impl Field for RealPart<'_> {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        Complex64::new(self.0.hr_hi(*w).map_or(f64::NAN, |v| v.0), 0.0)
    }

    fn gradient(&self, w: &RealPhasePoint) -> [Complex64; 4] {
        Hamiltonian(self.0).gradient(w).map(|g| Complex64::new(g.re, 0.0))
    }
}

/// `H_i = Im H`.
#[derive(Debug, Clone, Copy)]
pub struct ImagPart<'a>(pub &'a SystemSpec);

impl Field for ImagPart<'_> {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        Complex64::new(self.0.hr_hi(*w).map_or(f64::NAN, |v| v.1), 0.0)
    }

    fn gradient(&self, w: &RealPhasePoint) -> [Complex64; 4] {
        Hamiltonian(self.0).gradient(w).map(|g| Complex64::new(g.im, 0.0))
    }
}

/// An arbitrary closure; gradients by central differences.
pub struct FnField<F>(pub F);

impl<F: Fn(&RealPhasePoint) -> Complex64> Field for FnField<F> {
    fn value(&self, w: &RealPhasePoint) -> Complex64 {
        (self.0)(w)
    }
}

pub fn bracket(
    a: &dyn Field,
    b: &dyn Field,
    j: &RealSymplecticMatrix,
    w: &RealPhasePoint,
) -> Complex64 {
    let ga = a.gradient(w);
    let gb = b.gradient(w);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for k in 0..4 {
            let jik = j.0[(i, k)];
            if jik != 0.0 {
                acc += ga[i] * gb[k] * jik;
            }
        }
    }
    acc
}

/// The conventional Poisson bracket `{x, p} = {y, q} = 1`.
pub fn standard_bracket(a: &dyn Field, b: &dyn Field, w: &RealPhasePoint) -> Complex64 {
    bracket(a, b, &RealSymplecticMatrix::standard(), w)
}

/// `(|{{𝔷,H}} − 𝔭/m|, |{{𝔭,H}} + v'(𝔷)|)` for the structure `j`.
pub fn compatibility_residuals(
    j: &RealSymplecticMatrix,
    spec: &SystemSpec,
    w: &RealPhasePoint,
) -> Result<(f64, f64), EvalError> {
    let pt = w.to_complex();
    let dv = spec.dv(pt.z)?;
    let h = Hamiltonian(spec);
    let rz = (bracket(&PositionZ, &h, j, w) - pt.p / spec.mass()).norm();
    let rp = (bracket(&MomentumP, &h, j, w) + dv).norm();
    Ok((rz, rp))
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub params: SymplecticParams,
    pub residual_z: f64,
    pub residual_p: f64,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub passed: bool,
}

/// Check that the structure `params` reproduces `𝔷̇ = 𝔭/m`, `𝔭̇ = −v'(𝔷)`
/// at `w`. Failures are reported, not raised.
pub fn verify_compatibility(
    params: &SymplecticParams,
    spec: &SystemSpec,
    w: &RealPhasePoint,
) -> Result<CompatibilityReport, EvalError> {
    let j = RealSymplecticMatrix::from_params(params);
    let (residual_z, residual_p) = compatibility_residuals(&j, spec, w)?;
    let (_, r_minus) = super::r_pm(params);
    let degenerate = params.is_degenerate();
    let warning = (r_minus < CONDITIONING_WARN)
        .then(|| format!("near-degenerate structure: r_minus = {r_minus:e}"));
    Ok(CompatibilityReport {
        params: *params,
        residual_z,
        residual_p,
        degenerate,
        warning,
        passed: !degenerate && residual_z <= COMPATIBILITY_TOL && residual_p <= COMPATIBILITY_TOL,
    })
}
