//! The `cxham` command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
//! 3 degenerate symplectic structure.

mod output;
mod values;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{
    equivalence_report, hi_flow, integrate_complex, integrate_darboux, map_frames, solve_hi_zero,
    unmap_frames, ConstraintError, EquivalenceReport, FlowConfig, IntegratorConfig, Method,
    Termination, Trajectory,
};
use crate::hamiltonian::{ComplexPhasePoint, DarbouxPoint, RealPhasePoint, SystemSpec};
use crate::potential::{builtin, builtin_potentials, PotentialExpr};
use crate::symplectic::{
    self, darboux_frame, format_matrix, sample_params, verify_compatibility, SymplecticParams,
    SymplecticReport, COMPATIBILITY_TOL,
};
use crate::table::{self, EntryStatus};

pub use output::{write_atomic, CSV_HEADER};
pub use values::{parse_complex, parse_quad};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "CXHAM_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "cxham", version, about = "Complex analytic potentials as real Hamiltonian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a trajectory and write CSV plus a JSON summary.
    Simulate(SimulateArgs),
    /// Check the closed-form table of h and H_i for the built-in potentials.
    #[command(name = "verify-table1")]
    VerifyTable1(TableArgs),
    /// Check structure, Darboux frame and compatibility for one or many (a, b, alpha).
    VerifySymplectic(SymplecticArgs),
    /// Print the Darboux frame of one structure.
    Darboux(DarbouxArgs),
    /// Flow a point along the symmetry generated by H_i.
    HiFlow(FlowArgs),
    /// Solve H_i = 0 for x2.
    Constrain(ConstrainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameChoice {
    Complex,
    Darboux,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Rk4,
    Rk45,
    Split,
}

impl From<MethodChoice> for Method {
    fn from(m: MethodChoice) -> Method {
        match m {
            MethodChoice::Rk4 => Method::FixedRk4,
            MethodChoice::Rk45 => Method::AdaptiveRk45,
            MethodChoice::Split => Method::SplitStep,
        }
    }
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Potential v(z), or a built-in name (iz, z2, iz3, mz4, expiz, isinz).
    #[arg(long)]
    pub potential: String,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub mass: f64,
}

#[derive(Debug, Args)]
pub struct InitialArgs {
    /// Initial position, `RE+IMi`.
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_complex)]
    pub z0: Complex64,
    /// Initial momentum, `RE+IMi`.
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_complex)]
    pub p0: Complex64,
    /// Initial Darboux point `x1,p1,x2,p2`; overrides --z0/--p0.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_quad)]
    pub xi0: Option<[f64; 4]>,
}

impl InitialArgs {
    fn point(&self) -> ComplexPhasePoint {
        match self.xi0 {
            Some(xi) => unmap_frames(DarbouxPoint(xi)),
            None => ComplexPhasePoint::new(self.z0, self.p0),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    #[arg(long, default_value_t = 1.0, value_parser = values::parse_finite)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Rk45)]
    pub method: MethodChoice,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_DT, value_parser = values::parse_finite)]
    pub dt: f64,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_TOL, value_parser = values::parse_finite)]
    pub rtol: f64,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_TOL, value_parser = values::parse_finite)]
    pub atol: f64,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_ESCAPE_RADIUS, value_parser = values::parse_finite)]
    pub escape_radius: f64,
    #[arg(long, value_enum, default_value_t = FrameChoice::Complex)]
    pub frame: FrameChoice,
    /// Trajectory CSV.
    #[arg(long, default_value = "traj.csv")]
    pub out: PathBuf,
    /// JSON summary; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Seed for the sample points (default: $CXHAM_SEED or 42).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub b: f64,
    /// Complex `RE+IMi`.
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_complex)]
    pub alpha: Complex64,
}

impl ParamArgs {
    fn params(&self) -> SymplecticParams {
        SymplecticParams::new(self.a, self.b, self.alpha)
    }
}

#[derive(Debug, Args)]
pub struct SymplecticArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Check this many seeded random structures instead of one.
    #[arg(long)]
    pub random: Option<usize>,
    /// Seed for random structures and phase-space points (default: $CXHAM_SEED or 42).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct DarbouxArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Map this point `x,p,y,q` to Darboux coordinates.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_quad)]
    pub w: Option<[f64; 4]>,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub epsilon_end: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = values::parse_finite)]
    pub d_epsilon: f64,
    #[arg(long, default_value = "traj.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConstrainArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub x1: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub p1: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = values::parse_finite)]
    pub p2: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Degenerate(String),
    /// Already reported; only the exit code remains.
    Quiet(i32),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Degenerate(_) => EXIT_DEGENERATE,
            Failure::Quiet(c) => *c,
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("cannot write {}: {e}", path.display()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn load_system(args: &SystemArgs) -> Result<SystemSpec, Failure> {
    let v = match builtin(&args.potential) {
        Ok(v) => v,
        Err(_) => PotentialExpr::parse(&args.potential).map_err(|e| Failure::Usage(e.to_string()))?,
    };
    SystemSpec::new(v, args.mass).map_err(|e| Failure::Usage(e.to_string()))
}

/// Parse `args` and execute; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::VerifyTable1(a) => verify_table(a, stdout),
        Command::VerifySymplectic(a) => verify_symplectic(a, stdout),
        Command::Darboux(a) => darboux(a, stdout),
        Command::HiFlow(a) => flow(a, stdout),
        Command::Constrain(a) => constrain(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Numeric(m) | Failure::Degenerate(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                }
                Failure::Quiet(_) => {}
            }
            f.code()
        }
    }
}

#[derive(Serialize)]
struct SpecSummary {
    potential: String,
    mass: f64,
}

#[derive(Serialize)]
struct RunSummary {
    #[serde(rename = "drift_Hr")]
    drift_hr: f64,
    #[serde(rename = "drift_Hi")]
    drift_hi: f64,
    terminated_by: Termination,
    n_steps: usize,
    n_samples: usize,
}

impl From<&Trajectory> for RunSummary {
    fn from(t: &Trajectory) -> Self {
        RunSummary {
            drift_hr: t.drift_hr,
            drift_hi: t.drift_hi,
            terminated_by: t.terminated_by,
            n_steps: t.n_steps,
            n_samples: t.len(),
        }
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    spec: SpecSummary,
    config: IntegratorConfig,
    frame: FrameChoice,
    z0: [f64; 2],
    p0: [f64; 2],
    #[serde(rename = "drift_Hr")]
    drift_hr: f64,
    #[serde(rename = "drift_Hi")]
    drift_hi: f64,
    terminated_by: Termination,
    n_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    darboux: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceReport>,
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Outcome {
    let spec = load_system(&a.system)?;
    let cfg = IntegratorConfig {
        method: a.method.into(),
        dt: a.dt,
        rel_tol: a.rtol,
        abs_tol: a.atol,
        t_end: a.t_end,
        escape_radius: a.escape_radius,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let start = a.initial.point();
    let numeric = |e: crate::dynamics::DynamicsError| Failure::Numeric(e.to_string());
    let complex = match a.frame {
        FrameChoice::Complex | FrameChoice::Both => {
            Some(integrate_complex(&spec, start.z, start.p, &cfg).map_err(numeric)?)
        }
        FrameChoice::Darboux => None,
    };
    let real = match a.frame {
        FrameChoice::Darboux | FrameChoice::Both => {
            let xi0 = a.initial.xi0.map(DarbouxPoint).unwrap_or_else(|| map_frames(start));
            Some(integrate_darboux(&spec, xi0, &cfg).map_err(numeric)?)
        }
        FrameChoice::Complex => None,
    };

    let csv = match (&complex, &real) {
        (Some(c), Some(d)) => {
            let mut buf = String::from(CSV_HEADER);
            buf.push('\n');
            for (i, s) in c.samples.iter().enumerate() {
                let xi = d.interpolate_darboux(s.t).unwrap_or_else(|| c.darboux_point(i));
                output::push_row(&mut buf, s.t, RealPhasePoint(s.state), xi, s.hr, s.hi);
            }
            buf
        }
        (Some(t), None) | (None, Some(t)) => output::trajectory_csv(t, "t"),
        (None, None) => unreachable!("at least one frame is integrated"),
    };
    let primary = complex.as_ref().or(real.as_ref()).expect("one frame ran");
    let equivalence = match (&complex, &real) {
        (Some(c), Some(d)) => equivalence_report(c, d).ok(),
        _ => None,
    };
    let summary = SimulateSummary {
        spec: SpecSummary { potential: spec.potential().to_string(), mass: spec.mass() },
        config: cfg,
        frame: a.frame,
        z0: [start.z.re, start.z.im],
        p0: [start.p.re, start.p.im],
        drift_hr: primary.drift_hr,
        drift_hi: primary.drift_hi,
        terminated_by: primary.terminated_by,
        n_steps: primary.n_steps,
        darboux: match a.frame {
            FrameChoice::Both => real.as_ref().map(RunSummary::from),
            _ => None,
        },
        equivalence,
    };
    let summary_path = a.summary.clone().unwrap_or_else(|| output::summary_path(&a.out));
    write_atomic(&a.out, csv.as_bytes()).map_err(io_failure(&a.out))?;
    write_atomic(&summary_path, to_json(&summary).as_bytes()).map_err(io_failure(&summary_path))?;

    let mut line = format!(
        "wrote {} ({} samples) and {}; terminated_by={} drift_Hr={:e} drift_Hi={:e}",
        a.out.display(),
        primary.len(),
        summary_path.display(),
        primary.terminated_by,
        primary.drift_hr,
        primary.drift_hi,
    );
    if let Some(eq) = &equivalence {
        let _ = write!(line, " frame_deviation={:e}", eq.max_deviation);
    }
    let _ = writeln!(stdout, "{line}");

    let failed = [&complex, &real]
        .into_iter()
        .flatten()
        .any(|t| t.terminated_by == Termination::StepFailure);
    if failed {
        return Err(Failure::Numeric("step size underflow; trajectory truncated".into()));
    }
    Ok(())
}

fn verify_table(a: &TableArgs, stdout: &mut dyn Write) -> Outcome {
    let seed = resolve_seed(a.seed)?;
    if a.points == 0 {
        return Err(Failure::Usage("--points must be positive".into()));
    }
    let report = table::verify(seed, a.points).map_err(|e| Failure::Numeric(e.to_string()))?;
    let text = if a.report.json {
        to_json(&report)
    } else {
        let mut s = format!(
            "seed {seed}, {} points, tolerance {:e}\n",
            report.n_points, report.tolerance
        );
        for e in &report.entries {
            let status = match e.status {
                EntryStatus::Pass => "PASS",
                EntryStatus::Discrepant => "DISCREPANT",
            };
            let _ = write!(s, "{:<10} {:<3} {:<10} max_dev={:.3e}", e.label, e.column, status, e.max_deviation);
            if e.status == EntryStatus::Discrepant {
                let [x1, p1, x2, p2] = e.worst_point;
                let _ = write!(
                    s,
                    " table={} computed={} at (x1,p1,x2,p2)=({x1:.6},{p1:.6},{x2:.6},{p2:.6})",
                    output::num(e.table_value),
                    output::num(e.computed_value),
                );
                match e.corrected_max_deviation {
                    Some(d) => {
                        let _ = write!(s, " corrected_form_max_dev={d:.3e}");
                    }
                    None => s.push_str(" no corrected form on file"),
                }
            }
            s.push('\n');
        }
        s
    };
    output::emit(a.report.out.as_deref(), &text, stdout).map_err(|e| Failure::Usage(e.to_string()))?;
    if report.all_explained() {
        Ok(())
    } else {
        Err(Failure::Numeric("unexplained table discrepancy".into()))
    }
}

/// Largest compatibility residual over the built-ins at seeded points.
fn worst_compatibility(params: &SymplecticParams, seed: u64) -> Result<f64, Failure> {
    let mut worst = 0.0_f64;
    for (_, v) in builtin_potentials() {
        let spec = SystemSpec::new(v, 0.5).expect("positive mass");
        for pt in table::sample_points(seed, 10) {
            let r = verify_compatibility(params, &spec, &RealPhasePoint(pt))
                .map_err(|e| Failure::Numeric(e.to_string()))?;
            worst = worst.max(r.residual_z).max(r.residual_p);
        }
    }
    Ok(worst)
}

#[derive(Serialize)]
struct CheckedStructure {
    #[serde(flatten)]
    report: SymplecticReport,
    compatibility_residual: f64,
    compatible: bool,
}

fn check_structure(params: &SymplecticParams, seed: u64) -> Result<CheckedStructure, Failure> {
    let report = symplectic::report(params);
    let compatibility_residual = if report.degenerate { f64::NAN } else { worst_compatibility(params, seed)? };
    let compatible = compatibility_residual <= COMPATIBILITY_TOL;
    Ok(CheckedStructure { report, compatibility_residual, compatible })
}

fn describe(p: &SymplecticParams) -> String {
    format!("a={} b={} alpha={}{:+}i", p.a, p.b, p.alpha.re, p.alpha.im)
}

fn structure_text(r: &SymplecticReport, compatibility: Option<f64>, frame_detail: bool) -> String {
    let mut s = format!("params: {}\n", describe(&r.params));
    let j = nalgebra::Matrix4::from_fn(|i, k| r.j[i][k]);
    let _ = write!(s, "J =\n{}", format_matrix(&j));
    let _ = writeln!(s, "r_plus = {}\nr_minus = {}", output::num(r.r_plus), output::num(r.r_minus));
    if let Some(w) = &r.warning {
        let _ = writeln!(s, "warning: {w}");
    }
    if let Some(sm) = &r.s {
        let m = nalgebra::Matrix4::from_fn(|i, k| sm[i][k]);
        let _ = write!(s, "S =\n{}", format_matrix(&m));
        if frame_detail {
            if let Ok(frame) = darboux_frame(&r.params) {
                let _ = write!(s, "M = D^(-1/2) S^T =\n{}", format_matrix(&frame.coordinate_map()));
            }
        }
    }
    if let Some(res) = &r.residuals {
        let _ = writeln!(
            s,
            "residuals: block_form={:.3e} orthogonality={:.3e} canonicity={:.3e}",
            res.block_form, res.orthogonality, res.canonicity
        );
    }
    if let Some(c) = compatibility.filter(|_| !r.degenerate) {
        let _ = writeln!(s, "compatibility residual (all built-ins): {c:.3e}");
    }
    s
}

fn degenerate_message(p: &SymplecticParams) -> String {
    format!(
        "degenerate structure ({}): |alpha|^2 - a*b = {} equals 1, so J is not invertible",
        describe(p),
        p.alpha.norm_sqr() - p.a * p.b
    )
}

#[derive(Serialize)]
struct Sweep {
    seed: u64,
    n: usize,
    passed: usize,
    structures: Vec<CheckedStructure>,
}

fn verify_symplectic(a: &SymplecticArgs, stdout: &mut dyn Write) -> Outcome {
    let seed = resolve_seed(a.seed)?;
    let emit = |text: &str, stdout: &mut dyn Write| {
        output::emit(a.report.out.as_deref(), text, stdout).map_err(|e| Failure::Usage(e.to_string()))
    };
    let ok = |c: &CheckedStructure| c.report.passed && c.compatible;
    match a.random {
        Some(n) => {
            let structures = sample_params(seed, n)
                .iter()
                .map(|p| check_structure(p, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let passed = structures.iter().filter(|c| ok(c)).count();
            let text = if a.report.json {
                to_json(&Sweep { seed, n, passed, structures })
            } else {
                let mut s = format!("seed {seed}\n");
                for (i, c) in structures.iter().enumerate() {
                    let res = c.report.residuals.expect("sampled structures are non-degenerate");
                    let _ = writeln!(
                        s,
                        "{i:>4} {} r+={:.6} r-={:.6} block={:.1e} orth={:.1e} canon={:.1e} compat={:.1e} {}",
                        describe(&c.report.params),
                        c.report.r_plus,
                        c.report.r_minus,
                        res.block_form,
                        res.orthogonality,
                        res.canonicity,
                        c.compatibility_residual,
                        if ok(c) { "PASS" } else { "FAIL" },
                    );
                }
                let _ = writeln!(s, "{passed}/{n} PASS");
                s
            };
            emit(&text, stdout)?;
            if passed == n {
                Ok(())
            } else {
                Err(Failure::Quiet(EXIT_NUMERIC))
            }
        }
        None => {
            let params = a.params.params();
            let c = check_structure(&params, seed)?;
            let text = if a.report.json {
                to_json(&c)
            } else {
                let mut s = format!("seed {seed}\n");
                s.push_str(&structure_text(&c.report, Some(c.compatibility_residual), false));
                s.push_str(if ok(&c) { "PASS\n" } else { "FAIL\n" });
                s
            };
            emit(&text, stdout)?;
            if c.report.degenerate {
                Err(Failure::Degenerate(degenerate_message(&params)))
            } else if ok(&c) {
                Ok(())
            } else {
                Err(Failure::Quiet(EXIT_NUMERIC))
            }
        }
    }
}

#[derive(Serialize)]
struct DarbouxOutput {
    #[serde(flatten)]
    report: SymplecticReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<[f64; 4]>,
}

fn darboux(a: &DarbouxArgs, stdout: &mut dyn Write) -> Outcome {
    let params = a.params.params();
    if params.is_degenerate() {
        return Err(Failure::Degenerate(degenerate_message(&params)));
    }
    let report = symplectic::report(&params);
    let frame = darboux_frame(&params).map_err(|e| Failure::Degenerate(e.to_string()))?;
    let xi = a.w.map(|w| frame.map(&RealPhasePoint(w)).0);
    let text = if a.report.json {
        to_json(&DarbouxOutput { report: report.clone(), w: a.w, xi })
    } else {
        let mut s = structure_text(&report, None, true);
        if let (Some(w), Some(xi)) = (a.w, xi) {
            let fmt = |v: [f64; 4]| v.map(output::num).join(", ");
            let _ = writeln!(s, "w  = ({})\nxi = ({})", fmt(w), fmt(xi));
        }
        s.push_str(if report.passed { "PASS\n" } else { "FAIL\n" });
        s
    };
    output::emit(a.report.out.as_deref(), &text, stdout).map_err(|e| Failure::Usage(e.to_string()))?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Quiet(EXIT_NUMERIC))
    }
}

fn flow(a: &FlowArgs, stdout: &mut dyn Write) -> Outcome {
    let spec = load_system(&a.system)?;
    let xi0 = a.initial.xi0.map(DarbouxPoint).unwrap_or_else(|| map_frames(a.initial.point()));
    let cfg = FlowConfig { epsilon_end: a.epsilon_end, d_epsilon: a.d_epsilon };
    let traj = hi_flow(&spec, xi0, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    write_atomic(&a.out, output::trajectory_csv(&traj, "eps").as_bytes()).map_err(io_failure(&a.out))?;
    let _ = writeln!(
        stdout,
        "wrote {} ({} samples); terminated_by={} drift_h={:e} drift_Hi={:e}",
        a.out.display(),
        traj.len(),
        traj.terminated_by,
        2.0 * traj.drift_hr,
        traj.drift_hi,
    );
    if traj.terminated_by == Termination::StepFailure {
        return Err(Failure::Numeric("flow left the domain of finite values".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstraintOutput {
    x1: f64,
    p1: f64,
    p2: f64,
    x2: Option<f64>,
    any_x2: bool,
    #[serde(rename = "Hi")]
    hi: Option<f64>,
}

fn constrain(a: &ConstrainArgs, stdout: &mut dyn Write) -> Outcome {
    let spec = load_system(&a.system)?;
    let (x2, any) = match solve_hi_zero(&spec, a.x1, a.p1, a.p2) {
        Ok(x2) => (Some(x2), false),
        Err(ConstraintError::AnyValue) => (None, true),
        Err(e) => return Err(Failure::Numeric(e.to_string())),
    };
    let hi = match x2 {
        Some(x2) => Some(
            spec.hi_darboux(DarbouxPoint::new(a.x1, a.p1, x2, a.p2))
                .map_err(|e| Failure::Numeric(e.to_string()))?,
        ),
        None => None,
    };
    let text = if a.json {
        to_json(&ConstraintOutput { x1: a.x1, p1: a.p1, p2: a.p2, x2, any_x2: any, hi })
    } else {
        match (x2, hi) {
            (Some(x2), Some(hi)) => format!("x2 = {}\nHi = {}\n", output::num(x2), output::num(hi)),
            _ => "x2 = any (p1 = 0 and v_i = 0 at this point)\n".to_string(),
        }
    };
    stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("cxham").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unsupported_potential_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        let (code, _, err) =
            run_str(&["simulate", "--potential", "sqrt(z)", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("unsupported"), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn bad_flags_exit_with_one() {
        assert_eq!(run_str(&["darboux", "--alpha", "1+xi"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["no-such-command"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn degenerate_structures_exit_with_three() {
        let (code, _, err) = run_str(&["darboux", "--a", "0", "--b", "0", "--alpha", "1"]);
        assert_eq!(code, EXIT_DEGENERATE);
        assert!(err.contains("degenerate"));
        assert_eq!(run_str(&["verify-symplectic", "--alpha", "-i"]).0, EXIT_DEGENERATE);
    }

    #[test]
    fn zero_structure_frame() {
        let (code, out, _) = run_str(&["darboux", "--w", "1,0,0,0"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("r_plus = 5.0000000000000000e-1"));
        assert!(out.contains("xi = (1.4142135623730951e0"), "{out}");
    }

    #[test]
    fn constraint_outputs() {
        let (code, out, _) = run_str(&["constrain", "--potential", "i*z", "--x1", "0", "--p1", "2", "--p2", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("x2 = 0"), "{out}");
        let (code, out, _) = run_str(&["constrain", "--potential", "z2", "--x1", "0", "--p1", "0", "--p2", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("any"));
        let (code, _, err) =
            run_str(&["constrain", "--potential", "iz", "--x1", "1.4142135623730951", "--p1", "0", "--p2", "0"]);
        assert_eq!(code, EXIT_NUMERIC);
        assert!(err.contains("no solution"));
    }
}
