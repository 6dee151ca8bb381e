//! Classical trajectories of a particle in an entire complex potential.
//!
//! The system is `H = 𝔭²/2m + v(𝔷)` on complex phase space. The crate provides
//!
//! * [`potential`]: parsing, evaluation and symbolic differentiation of
//!   entire potentials,
//! * [`hamiltonian`]: `H`, its real and imaginary parts, and the real
//!   Hamiltonian `h` in Darboux coordinates,
//! * [`symplectic`]: the parametrised family of Poisson structures
//!   compatible with `H`, its brackets and Darboux frames,
//! * [`dynamics`]: integrators for both descriptions, the flow of `H_i` and
//!   the constraint `H_i = 0`,
//! * [`table`]: a numerical audit of closed-form `h` and `H_i` for the
//!   built-in potentials,
//! * [`cli`]: the `cxham` command line.
//!
//! # Potential grammar
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' exponent)?
//! base   := number | 'i' | 'z' | func '(' expr ')' | '(' expr ')'
//! func   := 'exp' | 'sin' | 'cos' | 'sinh' | 'cosh'
//! ```
//!
//! Exponents are non-negative integer literals and divisors must be
//! constant. Non-entire functions such as `sqrt` or `log` are rejected.
//!
//! # Example
//!
//! ```
//! use cxham::dynamics::{integrate_complex, IntegratorConfig};
//! use cxham::hamiltonian::SystemSpec;
//! use cxham::potential::PotentialExpr;
//! use num_complex::Complex64;
//!
//! let spec = SystemSpec::new(PotentialExpr::parse("i*z^3").unwrap(), 0.5).unwrap();
//! let cfg = IntegratorConfig::adaptive(5.0, 1e-10);
//! let traj = integrate_complex(&spec, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &cfg).unwrap();
//! assert!(traj.drift_hr < 1e-8 && traj.drift_hi < 1e-8);
//! ```

pub mod cli;
pub mod dynamics;
pub mod hamiltonian;
pub mod potential;
pub mod symplectic;
pub mod table;

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/hamiltonian.md")]
    mod hamiltonian {}
    #[doc = include_str!("../../../book/src/symplectic.md")]
    mod symplectic {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
