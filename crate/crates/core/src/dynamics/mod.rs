//! Time evolution in both descriptions.
//!
//! The complex description evolves `(𝔷, 𝔭)` under `𝔷̇ = 𝔭/m`,
//! `𝔭̇ = −v'(𝔷)`, stored as `w = (x, p, y, q)`. The real description evolves
//! the Darboux coordinates `ξ = (x₁, p₁, x₂, p₂) = √2·(x, p, q, y)` under the
//! standard Hamilton equations of
//! `h = (p₁² − x₂²)/2m + 2·v_r(x₁/√2, p₂/√2)`:
//!
//! ```text
//! ẋ₁ = p₁/m        ṗ₁ = −√2 · Re v'(𝔷)
//! ẋ₂ = −√2 · Im v'(𝔷)   ṗ₂ = x₂/m          𝔷 = (x₁ + i p₂)/√2
//! ```
//!
//! Both conserve `H_r` and `H_i`; in the real description `H_r = h/2`.

mod compare;
mod flow;
mod ode;
mod split;

use std::f64::consts::SQRT_2;

use nalgebra::Vector4;
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{ComplexPhasePoint, DarbouxPoint, RealPhasePoint, SystemSpec};
use crate::potential::{ComplexValue, EvalError};
use crate::symplectic::DarbouxFrame;

pub use compare::{equivalence_report, EquivalenceReport, EQUIVALENCE_TOL};
pub use flow::{hi_flow, hi_generator, solve_hi_zero, ConstraintError, FlowConfig};
pub use ode::MIN_STEP;
pub use split::split_step;

use ode::{Raw, State};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "fixed-rk4")]
    FixedRk4,
    #[serde(rename = "adaptive-rk45")]
    AdaptiveRk45,
    #[serde(rename = "split-step")]
    SplitStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step of the fixed-step methods.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Integration stops once `|𝔷|` or `|𝔭|` exceeds this.
    pub escape_radius: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::AdaptiveRk45,
            dt: DEFAULT_DT,
            rel_tol: DEFAULT_TOL,
            abs_tol: DEFAULT_TOL,
            t_end: 1.0,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(t_end: f64, tol: f64) -> Self {
        IntegratorConfig { t_end, rel_tol: tol, abs_tol: tol, ..Default::default() }
    }

    pub fn fixed(method: Method, t_end: f64, dt: f64) -> Self {
        IntegratorConfig { method, t_end, dt, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |what: &str| Err(DynamicsError::InvalidConfig(what.to_string()));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and non-negative");
        }
        if !(self.escape_radius > 0.0) {
            return bad("escape_radius must be positive");
        }
        match self.method {
            Method::AdaptiveRk45 => {
                for tol in [self.rel_tol, self.abs_tol] {
                    if !(tol > 0.0 && tol <= 1e-2) {
                        return bad("tolerances must lie in (0, 1e-2]");
                    }
                }
            }
            Method::FixedRk4 | Method::SplitStep => {
                if !(self.dt > 0.0 && self.dt.is_finite()) {
                    return bad("dt must be positive");
                }
                if self.t_end > 0.0 && self.dt > self.t_end {
                    return bad("dt must not exceed t_end");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data must be finite")]
    NonFiniteInitial,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("trajectories cover different time ranges: [{0}, {1}] vs [{2}, {3}]")]
    GridMismatch(f64, f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TEnd,
    Escape,
    StepFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::TEnd => "t_end",
            Termination::Escape => "escape",
            Termination::StepFailure => "step_failure",
        })
    }
}

/// Which coordinates a trajectory's states are stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `w = (x, p, y, q)`.
    Complex,
    /// `ξ = (x₁, p₁, x₂, p₂)` of the `J₀` frame.
    Darboux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: [f64; 4],
    pub hr: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub frame: Frame,
    pub samples: Vec<Sample>,
    /// Time derivative of the state at each sample, for dense output.
    #[serde(skip)]
    pub derivatives: Vec<[f64; 4]>,
    pub drift_hr: f64,
    pub drift_hi: f64,
    pub terminated_by: Termination,
    pub n_steps: usize,
}

impl Trajectory {
    fn from_raw(
        frame: Frame,
        raw: Raw,
        invariants: impl Fn(&State) -> Result<(f64, f64), EvalError>,
    ) -> Result<Self, EvalError> {
        let mut samples = Vec::with_capacity(raw.t.len());
        for (t, y) in raw.t.iter().zip(&raw.y) {
            let (hr, hi) = invariants(y)?;
            samples.push(Sample { t: *t, state: *y, hr, hi });
        }
        let (hr0, hi0) = (samples[0].hr, samples[0].hi);
        let drift_hr = samples.iter().map(|s| (s.hr - hr0).abs()).fold(0.0, f64::max);
        let drift_hi = samples.iter().map(|s| (s.hi - hi0).abs()).fold(0.0, f64::max);
        Ok(Trajectory {
            frame,
            samples,
            derivatives: raw.f,
            drift_hr,
            drift_hi,
            terminated_by: raw.terminated_by,
            n_steps: raw.n_steps,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least one sample")
    }

    /// Sample `i` in complex coordinates.
    pub fn complex_point(&self, i: usize) -> RealPhasePoint {
        to_complex_frame(self.frame, &self.samples[i].state)
    }

    /// Sample `i` in Darboux coordinates.
    pub fn darboux_point(&self, i: usize) -> DarbouxPoint {
        to_darboux_frame(self.frame, &self.samples[i].state)
    }

    /// Cubic Hermite dense output in the trajectory's own coordinates;
    /// `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<[f64; 4]> {
        let s = &self.samples;
        let dir = if s.len() > 1 && s[1].t < s[0].t { -1.0 } else { 1.0 };
        let key = t * dir;
        if key < s[0].t * dir || key > self.last().t * dir {
            return None;
        }
        let i = s.partition_point(|x| x.t * dir <= key);
        if i >= s.len() {
            return Some(self.last().state);
        }
        let (a, b) = (i - 1, i);
        let d = &self.derivatives;
        Some(ode::hermite(s[a].t, &s[a].state, &d[a], s[b].t, &s[b].state, &d[b], t))
    }

    /// Dense output in complex coordinates.
    pub fn interpolate_complex(&self, t: f64) -> Option<RealPhasePoint> {
        self.interpolate(t).map(|y| to_complex_frame(self.frame, &y))
    }

    /// Dense output in Darboux coordinates.
    pub fn interpolate_darboux(&self, t: f64) -> Option<DarbouxPoint> {
        self.interpolate(t).map(|y| to_darboux_frame(self.frame, &y))
    }
}

fn to_complex_frame(frame: Frame, y: &State) -> RealPhasePoint {
    match frame {
        Frame::Complex => RealPhasePoint(*y),
        Frame::Darboux => DarbouxPoint(*y).to_real(),
    }
}

fn to_darboux_frame(frame: Frame, y: &State) -> DarbouxPoint {
    match frame {
        Frame::Complex => RealPhasePoint(*y).to_darboux(),
        Frame::Darboux => DarbouxPoint(*y),
    }
}

/// `(𝔷, 𝔭) ↦ (x₁, p₁, x₂, p₂) = √2·(x, p, q, y)`.
pub fn map_frames(pt: ComplexPhasePoint) -> DarbouxPoint {
    pt.to_darboux()
}

/// Inverse of [`map_frames`].
pub fn unmap_frames(xi: DarbouxPoint) -> ComplexPhasePoint {
    xi.to_complex()
}

/// Express a trajectory in the Darboux coordinates of an arbitrary frame of
/// the compatible family, `ξ′ = D^{-1/2} Sᵀ w`.
pub fn map_trajectory(traj: &Trajectory, frame: &DarbouxFrame) -> Vec<(f64, DarbouxPoint)> {
    let m = frame.coordinate_map();
    (0..traj.len())
        .map(|i| {
            let v = m * Vector4::from(traj.complex_point(i).0);
            (traj.samples[i].t, DarbouxPoint([v[0], v[1], v[2], v[3]]))
        })
        .collect()
}

pub(crate) fn complex_rhs(spec: &SystemSpec, w: &State) -> Result<State, EvalError> {
    let [x, p, y, q] = *w;
    let dv = spec.dv(ComplexValue::new(x, y))?;
    let m = spec.mass();
    Ok([p / m, -dv.re, q / m, -dv.im])
}

pub(crate) fn darboux_rhs(spec: &SystemSpec, xi: &State) -> Result<State, EvalError> {
    let [x1, p1, x2, p2] = *xi;
    let dv = spec.dv(ComplexValue::new(x1 / SQRT_2, p2 / SQRT_2))?;
    let m = spec.mass();
    Ok([p1 / m, -SQRT_2 * dv.re, -SQRT_2 * dv.im, x2 / m])
}

fn escaped_complex(w: &State, radius: f64) -> bool {
    let [x, p, y, q] = *w;
    x.hypot(y) > radius || p.hypot(q) > radius || !w.iter().all(|v| v.is_finite())
}

fn escaped_darboux(xi: &State, radius: f64) -> bool {
    escaped_complex(&DarbouxPoint(*xi).to_real().0, radius)
}

fn check_initial(y: &State) -> Result<(), DynamicsError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DynamicsError::NonFiniteInitial)
    }
}

fn run_darboux_raw(spec: &SystemSpec, xi0: State, cfg: &IntegratorConfig) -> Result<Raw, EvalError> {
    let rhs = |y: &State| darboux_rhs(spec, y);
    let esc = |y: &State| escaped_darboux(y, cfg.escape_radius);
    match cfg.method {
        Method::AdaptiveRk45 => ode::run_dp45(rhs, esc, xi0, cfg.t_end, cfg.rel_tol, cfg.abs_tol),
        Method::FixedRk4 => {
            ode::run_fixed(|y, h| ode::rk4_step(&rhs, y, h), rhs, esc, xi0, cfg.t_end, cfg.dt)
        }
        Method::SplitStep => ode::run_fixed(
            |y, h| split_step(spec, DarbouxPoint(*y), h).map(|d| d.0),
            rhs,
            esc,
            xi0,
            cfg.t_end,
            cfg.dt,
        ),
    }
}

/// Integrate `𝔷̇ = 𝔭/m`, `𝔭̇ = −v'(𝔷)` over real time `[0, t_end]`.
///
/// Early termination (escape beyond the radius, controller underflow) is
/// recorded in [`Trajectory::terminated_by`], not raised. The split-step
/// method runs in the Darboux frame and maps back.
pub fn integrate_complex(
    spec: &SystemSpec,
    z0: ComplexValue,
    p0: ComplexValue,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let w0 = ComplexPhasePoint::new(z0, p0).to_real().0;
    check_initial(&w0)?;
    let invariants = |w: &State| spec.hr_hi(RealPhasePoint(*w));
    let raw = match cfg.method {
        Method::AdaptiveRk45 => ode::run_dp45(
            |y| complex_rhs(spec, y),
            |y| escaped_complex(y, cfg.escape_radius),
            w0,
            cfg.t_end,
            cfg.rel_tol,
            cfg.abs_tol,
        )?,
        Method::FixedRk4 => {
            let rhs = |y: &State| complex_rhs(spec, y);
            ode::run_fixed(
                |y, h| ode::rk4_step(&rhs, y, h),
                rhs,
                |y| escaped_complex(y, cfg.escape_radius),
                w0,
                cfg.t_end,
                cfg.dt,
            )?
        }
        Method::SplitStep => {
            let mut raw = run_darboux_raw(spec, RealPhasePoint(w0).to_darboux().0, cfg)?;
            for y in raw.y.iter_mut().chain(raw.f.iter_mut()) {
                *y = DarbouxPoint(*y).to_real().0;
            }
            raw.y[0] = w0;
            raw
        }
    };
    Ok(Trajectory::from_raw(Frame::Complex, raw, invariants)?)
}

/// Integrate the standard Hamilton equations of `h` in the `J₀` Darboux
/// frame. Samples record `H_r = h/2` and `H_i`.
pub fn integrate_darboux(
    spec: &SystemSpec,
    xi0: DarbouxPoint,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    check_initial(&xi0.0)?;
    let raw = run_darboux_raw(spec, xi0.0, cfg)?;
    let invariants = |y: &State| {
        let xi = DarbouxPoint(*y);
        Ok((0.5 * spec.h(xi)?, spec.hi_darboux(xi)?))
    };
    Ok(Trajectory::from_raw(Frame::Darboux, raw, invariants)?)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::potential::PotentialExpr;

    fn spec(src: &str) -> SystemSpec {
        SystemSpec::new(PotentialExpr::parse(src).unwrap(), 0.5).unwrap()
    }

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    #[test]
    fn harmonic_closed_form() {
        let s = spec("z^2");
        for method in [Method::AdaptiveRk45, Method::FixedRk4] {
            let cfg = IntegratorConfig { method, t_end: PI, ..Default::default() };
            let tr = integrate_complex(&s, c(1.0, 0.0), c(0.0, 0.0), &cfg).unwrap();
            assert_eq!(tr.terminated_by, Termination::TEnd);
            for (i, smp) in tr.samples.iter().enumerate() {
                let pt = tr.complex_point(i).to_complex();
                let t = smp.t;
                assert!((pt.z - c((2.0 * t).cos(), 0.0)).norm() < 1e-8, "{method:?} t={t}");
                assert!((pt.p - c(-(2.0 * t).sin(), 0.0)).norm() < 1e-8);
            }
            assert_eq!(tr.last().t, PI);
        }
    }

    #[test]
    fn constant_force_closed_form() {
        let s = spec("i*z");
        let (z0, p0) = (c(0.3, -0.2), c(0.5, 1.0));
        let cfg = IntegratorConfig::adaptive(2.0, 1e-10);
        let tr = integrate_complex(&s, z0, p0, &cfg).unwrap();
        for (i, smp) in tr.samples.iter().enumerate() {
            let t = smp.t;
            let pt = tr.complex_point(i).to_complex();
            let i_ = ComplexValue::i();
            assert!((pt.p - (p0 - i_ * t)).norm() < 1e-10);
            assert!((pt.z - (z0 + 2.0 * p0 * t - i_ * t * t)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_duration_gives_one_sample() {
        let s = spec("exp(i*z)");
        for method in [Method::AdaptiveRk45, Method::FixedRk4, Method::SplitStep] {
            let cfg = IntegratorConfig { method, t_end: 0.0, ..Default::default() };
            let tr = integrate_complex(&s, c(0.1, 0.2), c(0.3, 0.4), &cfg).unwrap();
            assert_eq!(tr.len(), 1);
            assert_eq!(tr.first().state, [0.1, 0.3, 0.2, 0.4]);
            assert_eq!(tr.drift_hr, 0.0);
        }
    }

    #[test]
    fn darboux_matches_complex_for_harmonic() {
        let s = spec("z^2");
        let cfg = IntegratorConfig::adaptive(3.0, 1e-10);
        let c_tr = integrate_complex(&s, c(1.0, 0.0), c(0.0, 0.0), &cfg).unwrap();
        let xi0 = map_frames(ComplexPhasePoint::new(c(1.0, 0.0), c(0.0, 0.0)));
        let d_tr = integrate_darboux(&s, xi0, &cfg).unwrap();
        for i in 0..c_tr.len() {
            let t = c_tr.samples[i].t;
            let w = d_tr.interpolate_complex(t).unwrap();
            let dev = (0..4).map(|k| (w.0[k] - c_tr.complex_point(i).0[k]).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-6, "t={t} dev={dev}");
        }
    }

    #[test]
    fn darboux_run_conserves_h_and_hi() {
        let s = spec("i*z^3");
        let xi0 = map_frames(ComplexPhasePoint::new(c(0.2, 0.1), c(0.8, -0.1)));
        let tr = integrate_darboux(&s, xi0, &IntegratorConfig::adaptive(2.0, 1e-10)).unwrap();
        assert_eq!(tr.terminated_by, Termination::TEnd);
        assert!(tr.drift_hr < 1e-8 && tr.drift_hi < 1e-8, "{} {}", tr.drift_hr, tr.drift_hi);
    }

    #[test]
    fn escape_is_a_normal_outcome() {
        let s = spec("-z^4");
        let cfg = IntegratorConfig { t_end: 50.0, escape_radius: 10.0, ..Default::default() };
        let tr = integrate_complex(&s, c(1.5, 0.0), c(1.0, 0.0), &cfg).unwrap();
        assert_eq!(tr.terminated_by, Termination::Escape);
        let last = tr.last();
        let pt = RealPhasePoint(last.state).to_complex();
        assert!(pt.z.norm() > 10.0 || pt.p.norm() > 10.0);
    }

    #[test]
    fn config_validation() {
        let ok = IntegratorConfig::default();
        assert!(ok.validate().is_ok());
        let bad = IntegratorConfig { rel_tol: 0.1, ..ok };
        assert!(matches!(bad.validate(), Err(DynamicsError::InvalidConfig(_))));
        let bad = IntegratorConfig::fixed(Method::FixedRk4, 0.5, 1.0);
        assert!(bad.validate().is_err());
        let s = spec("z");
        let err = integrate_complex(&s, c(f64::NAN, 0.0), c(0.0, 0.0), &ok).unwrap_err();
        assert_eq!(err, DynamicsError::NonFiniteInitial);
    }

    #[test]
    fn frame_maps_round_trip() {
        let pt = ComplexPhasePoint::new(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(map_frames(pt), DarbouxPoint::new(SQRT_2, 0.0, 0.0, 0.0));
        let pt = ComplexPhasePoint::new(c(0.0, 1.0), c(0.0, 0.0));
        assert_eq!(map_frames(pt), DarbouxPoint::new(0.0, 0.0, 0.0, SQRT_2));
        let pt = ComplexPhasePoint::new(c(-0.7, 2.1), c(0.4, -1.3));
        let back = unmap_frames(map_frames(pt));
        assert!((back.z - pt.z).norm() <= 2.0 * f64::EPSILON * 2.1);
        assert!((back.p - pt.p).norm() <= 2.0 * f64::EPSILON * 1.3);
    }

    #[test]
    fn general_frames_are_linear_images() {
        use crate::symplectic::{darboux_frame, SymplecticParams};
        let s = spec("z^2");
        let tr = integrate_complex(&s, c(1.0, 0.0), c(0.0, 0.5), &IntegratorConfig::adaptive(1.0, 1e-10))
            .unwrap();
        let zero = darboux_frame(&SymplecticParams::zero()).unwrap();
        for (i, (t, xi)) in map_trajectory(&tr, &zero).into_iter().enumerate() {
            assert_eq!(t, tr.samples[i].t);
            let want = tr.darboux_point(i);
            assert!((0..4).all(|k| (xi.0[k] - want.0[k]).abs() < 1e-14));
        }
    }

    #[test]
    fn interpolation_hits_samples_and_rejects_outside() {
        let s = spec("z^2");
        let tr = integrate_complex(&s, c(1.0, 0.0), c(0.0, 0.0), &IntegratorConfig::adaptive(1.0, 1e-10))
            .unwrap();
        let k = tr.len() / 2;
        assert_eq!(tr.interpolate(tr.samples[k].t).unwrap(), tr.samples[k].state);
        assert!(tr.interpolate(-0.1).is_none());
        assert!(tr.interpolate(1.1).is_none());
        let t = 0.5 * (tr.samples[k].t + tr.samples[k + 1].t);
        let z = tr.interpolate_complex(t).unwrap().x();
        assert!((z - (2.0 * t).cos()).abs() < 1e-7);
    }
}
