//! Symplectic structures on `ℝ⁴ = ℂ²` compatible with the complex Hamilton
//! equations, and Darboux frames that bring each of them to standard form.
//!
//! The compatible structures form a family parameterised by two reals `a`,
//! `b` and a complex `α` ([`SymplecticParams`]). In the complex coordinates
//! `(𝔷, 𝔭, 𝔷*, 𝔭*)` the structure matrix is
//!
//! ```text
//!        ⎡  0     1    ia    α  ⎤
//!   𝒥 =  ⎢ -1     0   -α*   ib  ⎥
//!        ⎢ -ia    α*   0     1  ⎥
//!        ⎣ -α   -ib   -1     0  ⎦
//! ```
//!
//! and in the real coordinates `w = (x, p, y, q)` it becomes
//!
//! ```text
//!            ⎡   0      1+αr   -a    -αi  ⎤
//!   J = ½ ·  ⎢ -(1+αr)   0     -αi   -b   ⎥
//!            ⎢   a       αi     0   αr-1  ⎥
//!            ⎣   αi      b    1-αr    0   ⎦
//! ```
//!
//! `J` is invertible iff `|α|² − ab ≠ 1`. Its eigenvalues are `±i r₊` and
//! `±i r₋`; [`darboux_frame`] finds an orthogonal `S` with
//! `SᵀJS = diag(r₊·ε, r₋·ε)`, `ε = [[0, 1], [-1, 0]]`.

mod bracket;

pub use bracket::{
    bracket, compatibility_residuals, standard_bracket, verify_compatibility, Coordinate,
    CompatibilityReport, Field, FnField, Hamiltonian, ImagPart, MomentumP, PositionZ, RealPart,
    COMPATIBILITY_TOL,
};

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{DarbouxPoint, RealPhasePoint};

/// `||α|² − ab − 1|` at or below this is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Structures with `r₋` below this are flagged as poorly conditioned.
pub const CONDITIONING_WARN: f64 = 1e-6;
/// Acceptance bound for `‖SᵀJS − J′‖∞` and the canonicity residual.
pub const FRAME_TOL: f64 = 1e-10;
/// Acceptance bound for `‖SᵀS − I‖∞`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SymplecticError {
    #[error(
        "degenerate structure: |alpha|^2 - a*b = {value} is 1 (to within {DEGENERACY_TOL:e}), \
         so J is not invertible"
    )]
    DegenerateStructure { value: f64 },
}

/// `(a, b, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticParams {
    pub a: f64,
    pub b: f64,
    pub alpha: Complex64,
}

impl SymplecticParams {
    pub fn new(a: f64, b: f64, alpha: Complex64) -> Self {
        SymplecticParams { a, b, alpha }
    }

    /// `a = b = α = 0`.
    pub fn zero() -> Self {
        SymplecticParams::new(0.0, 0.0, Complex64::new(0.0, 0.0))
    }

    /// `|α|² − ab − 1`; `J` is singular exactly when this vanishes.
    pub fn degeneracy_gap(&self) -> f64 {
        self.alpha.norm_sqr() - self.a * self.b - 1.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy_gap().abs() <= DEGENERACY_TOL
    }

    fn check(&self) -> Result<(), SymplecticError> {
        if self.is_degenerate() {
            Err(SymplecticError::DegenerateStructure {
                value: self.alpha.norm_sqr() - self.a * self.b,
            })
        } else {
            Ok(())
        }
    }
}

impl Serialize for SymplecticParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SymplecticParams", 4)?;
        st.serialize_field("a", &self.a)?;
        st.serialize_field("b", &self.b)?;
        st.serialize_field("alpha_re", &self.alpha.re)?;
        st.serialize_field("alpha_im", &self.alpha.im)?;
        st.end()
    }
}

/// `𝒥` over `(𝔷, 𝔭, 𝔷*, 𝔭*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSymplecticMatrix(pub Matrix4<Complex64>);

/// `J` over `(x, p, y, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSymplecticMatrix(pub Matrix4<f64>);

impl RealSymplecticMatrix {
    /// The conventional structure `{x, p} = {y, q} = 1`.
    pub fn standard() -> Self {
        RealSymplecticMatrix(standard_matrix())
    }

    /// The family member with `a = b = α = 0`.
    pub fn zero() -> Self {
        Self::from_params(&SymplecticParams::zero())
    }

    /// Build `J` without the invertibility check.
    pub fn from_params(params: &SymplecticParams) -> Self {
        let (a, b) = (params.a, params.b);
        let (ar, ai) = (params.alpha.re, params.alpha.im);
        #[rustfmt::skip]
        let m = Matrix4::new(
            0.0,         1.0 + ar,  -a,        -ai,
            -(1.0 + ar), 0.0,       -ai,       -b,
            a,           ai,        0.0,       -1.0 + ar,
            ai,          b,         1.0 - ar,  0.0,
        );
        RealSymplecticMatrix(m * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

/// Standard structure matrix `diag(ε, ε)` with `ε = [[0, 1], [-1, 0]]`.
pub fn standard_matrix() -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    );
    m
}

pub fn build_complex_j(params: &SymplecticParams) -> ComplexSymplecticMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let ia = c(0.0, params.a);
    let ib = c(0.0, params.b);
    let al = params.alpha;
    let alc = al.conj();
    #[rustfmt::skip]
    let m = Matrix4::new(
        zero, one,  ia,   al,
        -one, zero, -alc, ib,
        -ia,  alc,  zero, one,
        -al,  -ib,  -one, zero,
    );
    ComplexSymplecticMatrix(m)
}

pub fn build_real_j(params: &SymplecticParams) -> Result<RealSymplecticMatrix, SymplecticError> {
    params.check()?;
    Ok(RealSymplecticMatrix::from_params(params))
}

/// Eigen-magnitudes `(r₊, r₋)` of `J`.
///
/// `r₊` is taken from the closed form
/// `r₊² = (A + √B)/8`, `A = a² + b² + 2(|α|² + 1)`,
/// `B = [(a+b)² + 4][(a−b)² + 4|α|²]`. The smaller root is obtained from the
/// Pfaffian, `r₊r₋ = ||α|² − ab − 1| / 4`, which equals the `A − √B` branch
/// without its cancellation near degeneracy.
pub fn r_pm(params: &SymplecticParams) -> (f64, f64) {
    let (a, b) = (params.a, params.b);
    let n = params.alpha.norm_sqr();
    let big_a = a * a + b * b + 2.0 * (n + 1.0);
    let big_b = ((a + b).powi(2) + 4.0) * ((a - b).powi(2) + 4.0 * n);
    let r_plus = ((big_a + big_b.sqrt()) / 8.0).sqrt();
    let r_minus = params.degeneracy_gap().abs() / (4.0 * r_plus);
    (r_plus, r_minus)
}

/// Orthogonal `S` and eigen-magnitudes defining Darboux coordinates for `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxFrame {
    pub s: Matrix4<f64>,
    pub r_plus: f64,
    pub r_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameResiduals {
    /// `‖SᵀJS − J′‖∞`.
    pub block_form: f64,
    /// `‖SᵀS − I‖∞`.
    pub orthogonality: f64,
    /// `‖M J Mᵀ − J_st‖∞` with `M = D^{-1/2} Sᵀ`.
    pub canonicity: f64,
}

impl FrameResiduals {
    pub fn passed(&self) -> bool {
        self.block_form <= FRAME_TOL
            && self.canonicity <= FRAME_TOL
            && self.orthogonality <= ORTHOGONALITY_TOL
    }
}

impl DarbouxFrame {
    /// `J′`: `r₊` in the (1,2) slot and `r₋` in the (3,4) slot.
    pub fn block_form(&self) -> Matrix4<f64> {
        let (rp, rm) = (self.r_plus, self.r_minus);
        #[rustfmt::skip]
        let m = Matrix4::new(
            0.0, rp,  0.0, 0.0,
            -rp, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, rm,
            0.0, 0.0, -rm, 0.0,
        );
        m
    }

    /// Linear map `M = D^{-1/2} Sᵀ`, so that `ξ = M w`.
    pub fn coordinate_map(&self) -> Matrix4<f64> {
        let d = Vector4::new(
            self.r_plus.recip().sqrt(),
            self.r_plus.recip().sqrt(),
            self.r_minus.recip().sqrt(),
            self.r_minus.recip().sqrt(),
        );
        Matrix4::from_diagonal(&d) * self.s.transpose()
    }

    /// `ξ_a = r^{-1/2} Σ_k S_{k,a} w_k`.
    pub fn map(&self, w: &RealPhasePoint) -> DarbouxPoint {
        let v = self.coordinate_map() * Vector4::from(w.0);
        DarbouxPoint([v[0], v[1], v[2], v[3]])
    }

    pub fn residuals(&self, j: &RealSymplecticMatrix) -> FrameResiduals {
        let s = &self.s;
        let block_form = (s.transpose() * j.0 * s - self.block_form()).amax();
        let orthogonality = (s.transpose() * s - Matrix4::identity()).amax();
        let m = self.coordinate_map();
        let canonicity = (m * j.0 * m.transpose() - standard_matrix()).amax();
        FrameResiduals { block_form, orthogonality, canonicity }
    }
}

/// Index of the first component with magnitude above `tol`.
fn leading(v: &Vector4<f64>, tol: f64) -> Option<usize> {
    v.iter().position(|c| c.abs() > tol)
}

fn orient(v: Vector4<f64>) -> Vector4<f64> {
    match leading(&v, 1e-10) {
        Some(k) if v[k] < 0.0 => -v,
        _ => v,
    }
}

/// Gram–Schmidt orthonormalised columns of `m`, skipping dependent ones.
fn column_basis(m: &Matrix4<f64>) -> Vec<Vector4<f64>> {
    let mut basis: Vec<Vector4<f64>> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut v: Vector4<f64> = m.column(k).into_owned();
        // Two passes; the columns can be nearly dependent.
        for _ in 0..2 {
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
    }
    basis
}

fn leads_positive(v: &Vector4<f64>) -> bool {
    leading(v, 1e-10).is_some_and(|k| v[k] > 0.0)
}

/// First plane: seed `u₁` from the eigenprojector, partner `u₂ = −J u₁ / ‖J u₁‖`.
///
/// Candidates are the orthonormalised projector columns, each oriented with a
/// positive leading component. The first candidate whose partner also leads
/// positive is taken; in a 2-dimensional invariant plane exactly one of the
/// two candidates qualifies.
fn first_plane(j: &Matrix4<f64>, projector: &Matrix4<f64>) -> (Vector4<f64>, Vector4<f64>) {
    let pair = |u: &Vector4<f64>| {
        let u = orient(*u);
        let ju = j * u;
        (u, -ju / ju.norm())
    };
    let basis = column_basis(projector);
    basis
        .iter()
        .map(pair)
        .find(|(_, u2)| leads_positive(u2))
        .unwrap_or_else(|| pair(&basis[0]))
}

/// Second plane: the orthogonal complement of the first, which is invariant
/// because `J` is normal. The partner is the other basis vector of the
/// complement, signed so that `u₁ᵀ J u₂ > 0`; the candidate rule matches
/// [`first_plane`].
fn second_plane(j: &Matrix4<f64>, complement: &Matrix4<f64>) -> (Vector4<f64>, Vector4<f64>) {
    let basis = column_basis(complement);
    debug_assert_eq!(basis.len(), 2);
    let pair = |u: &Vector4<f64>, other: &Vector4<f64>| {
        let u = orient(*u);
        let sign = if u.dot(&(j * other)) >= 0.0 { 1.0 } else { -1.0 };
        (u, other * sign)
    };
    let (b1, b2) = (basis[0], basis[1]);
    let first = pair(&b1, &b2);
    if leads_positive(&first.1) {
        return first;
    }
    let second = pair(&b2, &b1);
    if leads_positive(&second.1) {
        second
    } else {
        first
    }
}

/// Orthogonal frame bringing `J(params)` to block form.
///
/// The first invariant plane lies in the top eigenspace of the symmetric
/// matrix `−J²` (eigenvalue `r₊²`, twice); the second is its orthogonal
/// complement. When `r₊ = r₋` the eigenspace is the whole space and the same
/// deterministic rule picks the planes.
pub fn darboux_frame(params: &SymplecticParams) -> Result<DarbouxFrame, SymplecticError> {
    params.check()?;
    let (r_plus, r_minus) = r_pm(params);
    if r_minus <= DEGENERACY_TOL {
        return Err(SymplecticError::DegenerateStructure {
            value: params.alpha.norm_sqr() - params.a * params.b,
        });
    }
    let j = RealSymplecticMatrix::from_params(params).0;
    let neg_j2 = -(j * j);
    let eig = SymmetricEigen::new((neg_j2 + neg_j2.transpose()) * 0.5);
    let lam_max = eig.eigenvalues.max();
    let tol = 1e-13 * lam_max.max(1.0);
    let top: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] >= lam_max - tol).collect();
    let projector = if top.len() == 4 {
        Matrix4::identity()
    } else {
        top.iter().fold(Matrix4::zeros(), |acc, &k| {
            let q = eig.eigenvectors.column(k);
            acc + q * q.transpose()
        })
    };
    let (u1, u2) = first_plane(&j, &projector);
    let complement = Matrix4::identity() - u1 * u1.transpose() - u2 * u2.transpose();
    let (u3, u4) = second_plane(&j, &complement);
    let s = Matrix4::from_columns(&[u1, u2, u3, u4]);
    Ok(DarbouxFrame { s, r_plus, r_minus })
}

/// `ξ = D^{-1/2} Sᵀ w` for the given frame.
pub fn darboux_map(frame: &DarbouxFrame, w: &RealPhasePoint) -> DarbouxPoint {
    frame.map(w)
}

/// Report on one member of the family, as emitted by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SymplecticReport {
    pub params: SymplecticParams,
    pub r_plus: f64,
    pub r_minus: f64,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    /// `J`, row-major.
    #[serde(rename = "J")]
    pub j: [[f64; 4]; 4],
    /// `S`, row-major; absent for degenerate structures.
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<[[f64; 4]; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<FrameResiduals>,
    pub passed: bool,
}

pub fn rows_of(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

/// Row-major rendering with 17 significant digits.
pub fn format_matrix(m: &Matrix4<f64>) -> String {
    let mut out = String::new();
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:24.16e}", m[(r, c)] + 0.0)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn report(params: &SymplecticParams) -> SymplecticReport {
    let (r_plus, r_minus) = r_pm(params);
    let j = RealSymplecticMatrix::from_params(params);
    let warning = (r_minus < CONDITIONING_WARN).then(|| {
        format!("near-degenerate structure: r_minus = {r_minus:e} is below {CONDITIONING_WARN:e}")
    });
    match darboux_frame(params) {
        Ok(frame) => {
            let residuals = frame.residuals(&j);
            SymplecticReport {
                params: *params,
                r_plus,
                r_minus,
                degenerate: false,
                warning,
                j: rows_of(&j.0),
                s: Some(rows_of(&frame.s)),
                residuals: Some(residuals),
                passed: residuals.passed(),
            }
        }
        Err(_) => SymplecticReport {
            params: *params,
            r_plus,
            r_minus,
            degenerate: true,
            warning,
            j: rows_of(&j.0),
            s: None,
            residuals: None,
            passed: false,
        },
    }
}

/// Seeded non-degenerate parameters: `a`, `b`, `Re α`, `Im α` uniform in
/// `[-2, 2]`, redrawn while `||α|² − ab − 1| < 0.05`.
pub fn sample_params(seed: u64, n: usize) -> Vec<SymplecticParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = SymplecticParams::new(
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
            Complex64::new(rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)),
        );
        if p.degeneracy_gap().abs() >= 0.05 {
            out.push(p);
        }
    }
    out
}
