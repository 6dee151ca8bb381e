//! Entire analytic potentials `v(z)`.
//!
//! A [`PotentialExpr`] is a small expression tree over the complex variable
//! `z`. The grammar only admits entire functions (polynomials, `exp`, `sin`,
//! `cos`, `sinh`, `cosh` and their sums, products, constant quotients and
//! non-negative integer powers), so every potential is differentiable
//! everywhere in the complex plane and its real and imaginary parts obey the
//! Cauchy–Riemann conditions.

mod deriv;
mod parse;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use parse::ParseError;

/// Complex scalar used for positions, momenta and potential values.
pub type ComplexValue = Complex64;

/// Elementary entire functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply(self, w: Complex64) -> Complex64 {
        match self {
            Func::Exp => w.exp(),
            Func::Sin => w.sin(),
            Func::Cos => w.cos(),
            Func::Sinh => w.sinh(),
            Func::Cosh => w.cosh(),
        }
    }
}

/// Expression tree node.
///
/// Nodes are built through the folding constructors ([`Node::add`],
/// [`Node::mul`], ...), which collapse purely numeric subtrees into a single
/// [`Node::Const`]. No other simplification is performed, so two trees are
/// equal exactly when they were built from the same sequence of operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    Var,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    /// Quotient. The parser only produces constant denominators.
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Neg(Box<Node>),
    App(Func, Box<Node>),
}

impl Node {
    pub fn constant(c: Complex64) -> Node {
        Node::Const(c)
    }

    pub fn real(x: f64) -> Node {
        Node::Const(Complex64::new(x, 0.0))
    }

    pub fn imag_unit() -> Node {
        Node::Const(Complex64::i())
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn add(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x + y),
            _ => Node::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x - y),
            _ => Node::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x * y),
            _ => Node::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Node, b: Node) -> Node {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Node::Const(x / y),
            _ => Node::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Node, n: u32) -> Node {
        match a.as_const() {
            Some(x) => Node::Const(x.powu(n)),
            None => Node::Pow(Box::new(a), n),
        }
    }

    pub fn neg(a: Node) -> Node {
        match a.as_const() {
            Some(x) => Node::Const(-x),
            None => Node::Neg(Box::new(a)),
        }
    }

    pub fn app(f: Func, a: Node) -> Node {
        match a.as_const() {
            Some(x) => Node::Const(f.apply(x)),
            None => Node::App(f, Box::new(a)),
        }
    }

    /// Evaluate without overflow checks.
    pub fn eval_raw(&self, z: Complex64) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var => z,
            Node::Add(a, b) => a.eval_raw(z) + b.eval_raw(z),
            Node::Sub(a, b) => a.eval_raw(z) - b.eval_raw(z),
            Node::Mul(a, b) => a.eval_raw(z) * b.eval_raw(z),
            Node::Div(a, b) => a.eval_raw(z) / b.eval_raw(z),
            Node::Pow(a, n) => a.eval_raw(z).powu(*n),
            Node::Neg(a) => -a.eval_raw(z),
            Node::App(f, a) => f.apply(a.eval_raw(z)),
        }
    }

    fn depends_on_z(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on_z() || b.depends_on_z()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::App(_, a) => a.depends_on_z(),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    // `{}` on f64 prints the shortest decimal that round-trips.
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            write!(f, "(-{})", -c.re)
        } else {
            write!(f, "{}", c.re)
        }
    } else if c.re == 0.0 {
        if c.im.is_sign_negative() {
            write!(f, "(-{}*i)", -c.im)
        } else {
            write!(f, "({}*i)", c.im)
        }
    } else {
        let re_sign = if c.re.is_sign_negative() { "-" } else { "" };
        let (op, im) = if c.im.is_sign_negative() { ("-", -c.im) } else { ("+", c.im) };
        write!(f, "({}{}{}{}*i)", re_sign, c.re.abs(), op, im)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_const(f, *c),
            Node::Var => write!(f, "z"),
            Node::Add(a, b) => write!(f, "({} + {})", a, b),
            Node::Sub(a, b) => write!(f, "({} - {})", a, b),
            Node::Mul(a, b) => write!(f, "({} * {})", a, b),
            Node::Div(a, b) => write!(f, "({} / {})", a, b),
            Node::Pow(a, n) => write!(f, "({})^{}", a, n),
            Node::Neg(a) => write!(f, "(-{})", a),
            Node::App(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("potential evaluation overflowed at z = {re}{im:+}i")]
    Overflow { re: f64, im: f64 },
}

/// Real and imaginary parts `(v_r, v_i)` of a potential at `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealPair {
    pub vr: f64,
    pub vi: f64,
}

/// A parsed entire potential `v(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    root: Node,
}

impl PotentialExpr {
    /// Parse a potential from text. See the crate documentation for the
    /// grammar; any non-entire construct is rejected.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse(text).map(|root| PotentialExpr { root })
    }

    /// Wrap a tree built with the folding constructors.
    pub fn from_node(root: Node) -> Self {
        PotentialExpr { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// `true` when the potential does not depend on `z`.
    pub fn is_constant(&self) -> bool {
        !self.root.depends_on_z()
    }

    /// Evaluate `v(z)`; non-finite results are reported as overflow.
    pub fn eval(&self, z: ComplexValue) -> Result<ComplexValue, EvalError> {
        let v = self.root.eval_raw(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Overflow { re: z.re, im: z.im })
        }
    }

    /// Exact symbolic derivative `dv/dz`.
    pub fn derivative(&self) -> PotentialExpr {
        PotentialExpr { root: deriv::differentiate(&self.root) }
    }

    /// `(Re v(x+iy), Im v(x+iy))`.
    pub fn split_real_imag(&self, x: f64, y: f64) -> Result<RealPair, EvalError> {
        let v = self.eval(Complex64::new(x, y))?;
        Ok(RealPair { vr: v.re, vi: v.im })
    }

    /// Central-difference residuals of the Cauchy–Riemann equations,
    /// `(∂x v_r − ∂y v_i, ∂y v_r + ∂x v_i)`.
    pub fn cauchy_riemann_residual(
        &self,
        x: f64,
        y: f64,
        step: f64,
    ) -> Result<(f64, f64), EvalError> {
        assert!(step > 0.0, "finite-difference step must be positive");
        let xp = self.split_real_imag(x + step, y)?;
        let xm = self.split_real_imag(x - step, y)?;
        let yp = self.split_real_imag(x, y + step)?;
        let ym = self.split_real_imag(x, y - step)?;
        let h2 = 2.0 * step;
        let dx_vr = (xp.vr - xm.vr) / h2;
        let dx_vi = (xp.vi - xm.vi) / h2;
        let dy_vr = (yp.vr - ym.vr) / h2;
        let dy_vi = (yp.vi - ym.vi) / h2;
        Ok((dx_vr - dy_vi, dy_vr + dx_vi))
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for PotentialExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PotentialExpr::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown built-in potential `{0}` (known: iz, z2, iz3, mz4, expiz, isinz)")]
pub struct UnknownPotential(pub String);

/// Names and source text of the built-in PT-symmetric potentials.
pub const BUILTIN_SOURCES: [(&str, &str); 6] = [
    ("iz", "i*z"),
    ("z2", "z^2"),
    ("iz3", "i*z^3"),
    ("mz4", "-z^4"),
    ("expiz", "exp(i*z)"),
    ("isinz", "i*sin(z)"),
];

/// The six PT-symmetric potentials `iz`, `z²`, `iz³`, `−z⁴`, `exp(iz)` and
/// `i·sin z`, in that order.
pub fn builtin_potentials() -> Vec<(&'static str, PotentialExpr)> {
    BUILTIN_SOURCES
        .iter()
        .map(|(name, src)| (*name, PotentialExpr::parse(src).expect("built-in source parses")))
        .collect()
}

pub fn builtin(name: &str) -> Result<PotentialExpr, UnknownPotential> {
    BUILTIN_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| PotentialExpr::parse(src).expect("built-in source parses"))
        .ok_or_else(|| UnknownPotential(name.to_string()))
}
