//! Strang splitting of `h = F(p₁, x₂) + G(x₁, p₂)` with
//! `F = (p₁² − x₂²)/2m` and `G = 2·v_r(x₁/√2, p₂/√2)`.
//!
//! The flow of `F` moves only `x₁, p₂` and the flow of `G` moves only
//! `p₁, x₂`, so both are exact shears and the composition is symplectic.

use std::f64::consts::SQRT_2;

use crate::hamiltonian::{DarbouxPoint, SystemSpec};
use crate::potential::{ComplexValue, EvalError};

fn drift(spec: &SystemSpec, [x1, p1, x2, p2]: [f64; 4], h: f64) -> [f64; 4] {
    let m = spec.mass();
    [x1 + h * p1 / m, p1, x2, p2 + h * x2 / m]
}

fn kick(spec: &SystemSpec, [x1, p1, x2, p2]: [f64; 4], h: f64) -> Result<[f64; 4], EvalError> {
    let dv = spec.dv(ComplexValue::new(x1 / SQRT_2, p2 / SQRT_2))?;
    Ok([x1, p1 - h * SQRT_2 * dv.re, x2 - h * SQRT_2 * dv.im, p2])
}

/// One second-order step: half drift, full kick, half drift.
pub fn split_step(spec: &SystemSpec, xi: DarbouxPoint, dt: f64) -> Result<DarbouxPoint, EvalError> {
    let y = drift(spec, xi.0, 0.5 * dt);
    let y = kick(spec, y, dt)?;
    Ok(DarbouxPoint(drift(spec, y, 0.5 * dt)))
}
