use num_complex::Complex64;

use super::{Func, Node};

fn is_const(n: &Node, v: f64) -> bool {
    n.as_const() == Some(Complex64::new(v, 0.0))
}

// Product and sum builders that drop the zero and one factors produced by
// the differentiation rules themselves; otherwise they only fold constants.
fn mul(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        Node::real(0.0)
    } else if is_const(&a, 1.0) {
        b
    } else if is_const(&b, 1.0) {
        a
    } else {
        Node::mul(a, b)
    }
}

fn add(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        b
    } else if is_const(&b, 0.0) {
        a
    } else {
        Node::add(a, b)
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_const(&b, 0.0) {
        a
    } else if is_const(&a, 0.0) {
        Node::neg(b)
    } else {
        Node::sub(a, b)
    }
}

pub(super) fn differentiate(node: &Node) -> Node {
    match node {
        Node::Const(_) => Node::real(0.0),
        Node::Var => Node::real(1.0),
        Node::Add(a, b) => add(differentiate(a), differentiate(b)),
        Node::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Node::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        Node::Div(a, b) => {
            let db = differentiate(b);
            if is_const(&db, 0.0) {
                Node::div(differentiate(a), (**b).clone())
            } else {
                // Quotient rule; only reachable for trees built by hand.
                let num = sub(
                    mul(differentiate(a), (**b).clone()),
                    mul((**a).clone(), db),
                );
                Node::div(num, Node::pow((**b).clone(), 2))
            }
        }
        Node::Pow(a, n) => match n {
            0 => Node::real(0.0),
            1 => differentiate(a),
            _ => {
                let outer = mul(Node::real(*n as f64), Node::pow((**a).clone(), n - 1));
                mul(outer, differentiate(a))
            }
        },
        Node::Neg(a) => {
            let da = differentiate(a);
            if is_const(&da, 0.0) {
                da
            } else {
                Node::neg(da)
            }
        }
        Node::App(f, a) => {
            let arg = (**a).clone();
            let outer = match f {
                Func::Exp => Node::app(Func::Exp, arg),
                Func::Sin => Node::app(Func::Cos, arg),
                Func::Cos => Node::neg(Node::app(Func::Sin, arg)),
                Func::Sinh => Node::app(Func::Cosh, arg),
                Func::Cosh => Node::app(Func::Sinh, arg),
            };
            mul(outer, differentiate(a))
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::potential::PotentialExpr;

    #[test]
    fn derivative_shapes() {
        let d = PotentialExpr::parse("z^2").unwrap().derivative();
        assert_eq!(d.to_string(), "(2 * (z)^1)");
        let d = PotentialExpr::parse("7").unwrap().derivative();
        assert!(d.is_constant());
        let d = PotentialExpr::parse("z").unwrap().derivative();
        assert_eq!(d.to_string(), "1");
    }

    #[test]
    fn second_derivative_of_sine() {
        let v = PotentialExpr::parse("sin(2*z)").unwrap();
        let d2 = v.derivative().derivative();
        let z = num_complex::Complex64::new(0.3, -0.7);
        let expect = -4.0 * (2.0 * z).sin();
        assert!((d2.eval(z).unwrap() - expect).norm() < 1e-14);
    }
}
