//! Autonomous ODE engines on `ℝ⁴`: fixed-step maps (RK4, splitting) and the
//! Dormand–Prince 5(4) pair with step-size control.

use crate::potential::EvalError;

use super::Termination;

pub(crate) type State = [f64; 4];

/// Smallest step the adaptive controller will attempt.
pub const MIN_STEP: f64 = 1e-14;

const MAX_STEPS: usize = 10_000_000;

pub(crate) struct Raw {
    pub t: Vec<f64>,
    pub y: Vec<State>,
    pub f: Vec<State>,
    pub terminated_by: Termination,
    pub n_steps: usize,
}

fn axpy(y: &State, h: f64, k: &[(f64, &State)]) -> State {
    std::array::from_fn(|i| y[i] + h * k.iter().map(|(c, v)| c * v[i]).sum::<f64>())
}

pub(crate) fn rk4_step(
    rhs: &impl Fn(&State) -> Result<State, EvalError>,
    y: &State,
    h: f64,
) -> Result<State, EvalError> {
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = rhs(&axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = rhs(&axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]))
}

fn finite(y: &State) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Apply `step` with a uniform step of about `dt` until `|t| = |span|`;
/// `span` may be negative. Samples after every step.
pub(crate) fn run_fixed(
    step: impl Fn(&State, f64) -> Result<State, EvalError>,
    rhs: impl Fn(&State) -> Result<State, EvalError>,
    escaped: impl Fn(&State) -> bool,
    y0: State,
    span: f64,
    dt: f64,
) -> Result<Raw, EvalError> {
    let mut raw = Raw {
        t: vec![0.0],
        y: vec![y0],
        f: vec![rhs(&y0)?],
        terminated_by: Termination::TEnd,
        n_steps: 0,
    };
    if span == 0.0 {
        return Ok(raw);
    }
    let n = ((span.abs() / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut y = y0;
    for k in 1..=n {
        let next = match step(&y, h) {
            Ok(v) if finite(&v) => v,
            _ => {
                raw.terminated_by = Termination::StepFailure;
                return Ok(raw);
            }
        };
        let Ok(f) = rhs(&next) else {
            raw.terminated_by = Termination::StepFailure;
            return Ok(raw);
        };
        y = next;
        raw.t.push(if k == n { span } else { k as f64 * h });
        raw.y.push(y);
        raw.f.push(f);
        raw.n_steps = k;
        if escaped(&y) {
            raw.terminated_by = Termination::Escape;
            return Ok(raw);
        }
    }
    Ok(raw)
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Trial {
    y: State,
    f: State,
    err: f64,
}

fn dp_trial(
    rhs: &impl Fn(&State) -> Result<State, EvalError>,
    y: &State,
    f0: &State,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Option<Trial> {
    let mut k = [[0.0; 4]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let ys: State = std::array::from_fn(|i| {
            y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
        });
        k[s] = rhs(&ys).ok()?;
        if !finite(&k[s]) {
            return None;
        }
    }
    // Row 6 of A holds the fifth-order weights, so stage 7 is evaluated at
    // the new point (first same as last).
    let y_new: State =
        std::array::from_fn(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
    let mut err = 0.0_f64;
    for i in 0..4 {
        let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / sc).abs());
    }
    finite(&y_new).then_some(Trial { y: y_new, f: k[6], err })
}

/// Adaptive Dormand–Prince integration over `[0, t_end]`, sampling at every
/// accepted step.
pub(crate) fn run_dp45(
    rhs: impl Fn(&State) -> Result<State, EvalError>,
    escaped: impl Fn(&State) -> bool,
    y0: State,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Raw, EvalError> {
    let f0 = rhs(&y0)?;
    let mut raw = Raw {
        t: vec![0.0],
        y: vec![y0],
        f: vec![f0],
        terminated_by: Termination::TEnd,
        n_steps: 0,
    };
    if t_end == 0.0 {
        return Ok(raw);
    }
    let (mut t, mut y, mut f) = (0.0, y0, f0);
    let mut h = initial_step(&y0, &f0, t_end, rel_tol, abs_tol);
    let mut attempts = 0usize;
    while t < t_end {
        attempts += 1;
        let last = t + h * (1.0 + 1e-9) >= t_end;
        let step = if last { t_end - t } else { h };
        if step < MIN_STEP || attempts > MAX_STEPS {
            raw.terminated_by = Termination::StepFailure;
            return Ok(raw);
        }
        match dp_trial(&rhs, &y, &f, step, rel_tol, abs_tol) {
            Some(trial) if trial.err <= 1.0 => {
                t = if last { t_end } else { t + step };
                y = trial.y;
                f = trial.f;
                raw.t.push(t);
                raw.y.push(y);
                raw.f.push(f);
                raw.n_steps += 1;
                if escaped(&y) {
                    raw.terminated_by = Termination::Escape;
                    return Ok(raw);
                }
                let grow = if trial.err == 0.0 { 5.0 } else { 0.9 * trial.err.powf(-0.2) };
                h = step * grow.clamp(0.2, 5.0);
            }
            Some(trial) => h = step * (0.9 * trial.err.powf(-0.2)).clamp(0.1, 1.0),
            None => h = step * 0.25,
        }
    }
    Ok(raw)
}

fn initial_step(y: &State, f: &State, t_end: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for i in 0..4 {
        let sc = abs_tol + rel_tol * y[i].abs();
        d0 = d0.max((y[i] / sc).abs());
        d1 = d1.max((f[i] / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_end).max(MIN_STEP)
}

/// Cubic Hermite interpolant between `(t0, y0, f0)` and `(t1, y1, f1)`.
pub(crate) fn hermite(t0: f64, y0: &State, f0: &State, t1: f64, y1: &State, f1: &State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(y: &State) -> Result<State, EvalError> {
        Ok([y[1], -y[0], y[3], -y[2]])
    }

    #[test]
    fn rk4_is_fourth_order() {
        let y0 = [1.0, 0.0, 0.0, 1.0];
        let err = |dt: f64| {
            let raw = run_fixed(|y, h| rk4_step(&oscillator, y, h), oscillator, |_| false, y0, 1.0, dt)
                .unwrap();
            (raw.y.last().unwrap()[0] - 1f64.cos()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn fixed_grid_ends_exactly_at_span() {
        let raw = run_fixed(|y, h| rk4_step(&oscillator, y, h), oscillator, |_| false, [1.0; 4], 0.95, 0.1)
            .unwrap();
        assert_eq!(raw.t.len(), 11);
        assert_eq!(*raw.t.last().unwrap(), 0.95);
        let raw = run_fixed(|y, h| rk4_step(&oscillator, y, h), oscillator, |_| false, [1.0; 4], -0.5, 0.1)
            .unwrap();
        assert_eq!(raw.t.len(), 6);
        assert!(raw.t.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn dp45_meets_tolerance() {
        let raw = run_dp45(oscillator, |_| false, [1.0, 0.0, 0.0, 1.0], 10.0, 1e-10, 1e-10).unwrap();
        let y = raw.y.last().unwrap();
        assert_eq!(*raw.t.last().unwrap(), 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[2] - 10f64.sin()).abs() < 1e-8);
        assert!(raw.t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dp45_detects_blow_up() {
        // y' = y², y(0) = 1 escapes at t = 1.
        let rhs = |y: &State| Ok([y[0] * y[0], 0.0, 0.0, 0.0]);
        let raw = run_dp45(rhs, |y| y[0].abs() > 1e3, [1.0, 0.0, 0.0, 0.0], 2.0, 1e-10, 1e-10).unwrap();
        assert_eq!(raw.terminated_by, Termination::Escape);
        assert!((*raw.t.last().unwrap() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let p = |t: f64| 2.0 * t * t * t - t + 0.5;
        let dp = |t: f64| 6.0 * t * t - 1.0;
        let (t0, t1) = (0.3, 1.1);
        let v = hermite(t0, &[p(t0); 4], &[dp(t0); 4], t1, &[p(t1); 4], &[dp(t1); 4], 0.77);
        assert!((v[0] - p(0.77)).abs() < 1e-14);
    }
}
