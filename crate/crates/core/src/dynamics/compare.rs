//! Pointwise comparison of two trajectories of the same system, possibly
//! computed in different frames.

use serde::Serialize;

use super::{DynamicsError, Trajectory};

/// Largest deviation tolerated between the two descriptions.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Largest `max(|Δ𝔷|, |Δ𝔭|)` over the merged sample grid.
    pub max_deviation: f64,
    pub worst_t: f64,
    pub n_compared: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare `a` and `b` in complex coordinates at the union of their sample
/// times, using each trajectory's dense output between its own samples.
pub fn equivalence_report(a: &Trajectory, b: &Trajectory) -> Result<EquivalenceReport, DynamicsError> {
    let (a0, a1, b0, b1) = (a.first().t, a.last().t, b.first().t, b.last().t);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    if !close(a0, b0) || !close(a1, b1) {
        return Err(DynamicsError::GridMismatch(a0, a1, b0, b1));
    }
    let clamp = |t: f64, tr: &Trajectory| {
        let (lo, hi) = (tr.first().t.min(tr.last().t), tr.first().t.max(tr.last().t));
        t.clamp(lo, hi)
    };
    let mut worst = (0.0_f64, a0);
    let mut n = 0;
    for t in a.samples.iter().chain(&b.samples).map(|s| s.t) {
        let (Some(pa), Some(pb)) = (a.interpolate_complex(clamp(t, a)), b.interpolate_complex(clamp(t, b)))
        else {
            continue;
        };
        let (ca, cb) = (pa.to_complex(), pb.to_complex());
        let dev = (ca.z - cb.z).norm().max((ca.p - cb.p).norm());
        n += 1;
        if dev > worst.0 || dev.is_nan() {
            worst = (dev, t);
        }
    }
    Ok(EquivalenceReport {
        max_deviation: worst.0,
        worst_t: worst.1,
        n_compared: n,
        tolerance: EQUIVALENCE_TOL,
        passed: worst.0 <= EQUIVALENCE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_complex, integrate_darboux, map_frames, IntegratorConfig};
    use crate::hamiltonian::{ComplexPhasePoint, SystemSpec};
    use crate::potential::{ComplexValue, PotentialExpr};

    fn spec(src: &str, m: f64) -> SystemSpec {
        SystemSpec::new(PotentialExpr::parse(src).unwrap(), m).unwrap()
    }

    fn pair(s_c: &SystemSpec, s_d: &SystemSpec, t_end: f64) -> (Trajectory, Trajectory) {
        let (z0, p0) = (ComplexValue::new(0.0, 0.0), ComplexValue::new(1.0, 0.0));
        let cfg = IntegratorConfig::adaptive(t_end, 1e-10);
        let c = integrate_complex(s_c, z0, p0, &cfg).unwrap();
        let d = integrate_darboux(s_d, map_frames(ComplexPhasePoint::new(z0, p0)), &cfg).unwrap();
        (c, d)
    }

    #[test]
    fn cubic_run_agrees_across_frames() {
        let s = spec("i*z^3", 0.5);
        let (c, d) = pair(&s, &s, 5.0);
        let r = equivalence_report(&c, &d).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.n_compared >= c.len() + d.len() - 2);
    }

    #[test]
    fn identical_trajectories_have_zero_deviation() {
        let s = spec("z^2", 0.5);
        let (c, _) = pair(&s, &s, 1.0);
        let r = equivalence_report(&c, &c).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn mismatched_mass_fails() {
        let (c, d) = pair(&spec("z^2", 0.5), &spec("z^2", 0.6), 2.0);
        let r = equivalence_report(&c, &d).unwrap();
        assert!(!r.passed && r.max_deviation > 1e-3, "{r:?}");
    }

    #[test]
    fn different_ranges_are_rejected() {
        let s = spec("z^2", 0.5);
        let (c, _) = pair(&s, &s, 1.0);
        let (_, d) = pair(&s, &s, 2.0);
        assert!(matches!(equivalence_report(&c, &d), Err(DynamicsError::GridMismatch(..))));
    }
}
