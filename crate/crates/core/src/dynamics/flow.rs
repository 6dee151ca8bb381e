//! The symmetry generated by `H_i` and the `H_i = 0` constraint.
//!
//! In Darboux coordinates `H_i = x₂p₁/2m + v_i(x₁/√2, p₂/√2)`, and its
//! Hamiltonian vector field under the standard bracket is
//!
//! ```text
//! dx₁/dε =  x₂/2m                 dp₁/dε = −Im v'(𝔷)/√2
//! dx₂/dε =  Re v'(𝔷)/√2           dp₂/dε = −p₁/2m
//! ```

use std::f64::consts::SQRT_2;

use serde::Serialize;
use thiserror::Error;

use super::{ode, DynamicsError, Frame, Trajectory, DEFAULT_ESCAPE_RADIUS};
use crate::hamiltonian::{DarbouxPoint, SystemSpec};
use crate::potential::{ComplexValue, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    pub epsilon_end: f64,
    /// RK4 step in `ε`.
    pub d_epsilon: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { epsilon_end: 1.0, d_epsilon: 1e-3 }
    }
}

/// `{ξ, H_i}` at `ξ`.
pub fn hi_generator(spec: &SystemSpec, xi: DarbouxPoint) -> Result<[f64; 4], EvalError> {
    let [x1, p1, x2, p2] = xi.0;
    let dv = spec.dv(ComplexValue::new(x1 / SQRT_2, p2 / SQRT_2))?;
    let m2 = 2.0 * spec.mass();
    Ok([x2 / m2, -dv.im / SQRT_2, dv.re / SQRT_2, -p1 / m2])
}

/// Flow `ξ` along `dξ/dε = {ξ, H_i}` from `ε = 0` to `epsilon_end`
/// (either sign). Samples are indexed by `ε` in [`Sample::t`] and record
/// `h/2` and `H_i`, both of which the flow preserves.
///
/// [`Sample::t`]: super::Sample::t
pub fn hi_flow(
    spec: &SystemSpec,
    xi0: DarbouxPoint,
    flow: &FlowConfig,
) -> Result<Trajectory, DynamicsError> {
    if !flow.epsilon_end.is_finite() {
        return Err(DynamicsError::InvalidConfig("epsilon_end must be finite".into()));
    }
    if !(flow.d_epsilon > 0.0 && flow.d_epsilon.is_finite()) {
        return Err(DynamicsError::InvalidConfig("d_epsilon must be positive".into()));
    }
    if !xi0.0.iter().all(|v| v.is_finite()) {
        return Err(DynamicsError::NonFiniteInitial);
    }
    let rhs = |y: &[f64; 4]| hi_generator(spec, DarbouxPoint(*y));
    let raw = ode::run_fixed(
        |y, h| ode::rk4_step(&rhs, y, h),
        rhs,
        |y| super::escaped_darboux(y, DEFAULT_ESCAPE_RADIUS),
        xi0.0,
        flow.epsilon_end,
        flow.d_epsilon,
    )?;
    let invariants = |y: &[f64; 4]| {
        let xi = DarbouxPoint(*y);
        Ok((0.5 * spec.h(xi)?, spec.hi_darboux(xi)?))
    };
    Ok(Trajectory::from_raw(Frame::Darboux, raw, invariants)?)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("p1 = 0 while v_i = {0} at the point; H_i = 0 has no solution")]
    DivisionByZero(f64),
    #[error("p1 = 0 and v_i = 0; every x2 satisfies H_i = 0")]
    AnyValue,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The `x₂` that puts `(x₁, p₁, x₂, p₂)` on `H_i = 0`:
/// `x₂ = −2m·v_i(x₁/√2, p₂/√2)/p₁`.
pub fn solve_hi_zero(spec: &SystemSpec, x1: f64, p1: f64, p2: f64) -> Result<f64, ConstraintError> {
    let vi = spec.potential().split_real_imag(x1 / SQRT_2, p2 / SQRT_2)?.vi;
    if p1 == 0.0 {
        return Err(if vi == 0.0 { ConstraintError::AnyValue } else { ConstraintError::DivisionByZero(vi) });
    }
    Ok(-2.0 * spec.mass() * vi / p1)
}
