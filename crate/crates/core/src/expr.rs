//! Analytic scalar expressions over position, restricted to a fixed set of
//! building blocks (polynomials, sin/cos, exp, radial distance).

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::Vec3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Z,
    /// Euclidean distance to `center`.
    Radius { center: [f64; 3] },
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Recip(Box<Expr>),
    Powi(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => p[0],
            Expr::Y => p[1],
            Expr::Z => p[2],
            Expr::Radius { center } => {
                let d = crate::tensor::sub(p, center);
                math::sqrt(crate::tensor::dot(&d, &d))
            }
            Expr::Add(terms) => terms.iter().map(|t| t.eval(p)).sum(),
            Expr::Mul(terms) => terms.iter().map(|t| t.eval(p)).product(),
            Expr::Neg(e) => -e.eval(p),
            Expr::Recip(e) => 1.0 / e.eval(p),
            Expr::Powi(e, n) => math::powi(e.eval(p), *n),
            Expr::Sin(e) => math::sin(e.eval(p)),
            Expr::Cos(e) => math::cos(e.eval(p)),
            Expr::Exp(e) => math::exp(e.eval(p)),
        }
    }

    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        Expr::Add(terms.into_iter().collect())
    }

    pub fn product(terms: impl IntoIterator<Item = Expr>) -> Self {
        Expr::Mul(terms.into_iter().collect())
    }

    pub fn powi(self, n: i32) -> Self {
        Expr::Powi(Box::new(self), n)
    }

    pub fn recip(self) -> Self {
        Expr::Recip(Box::new(self))
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn scaled(self, c: f64) -> Self {
        Expr::Mul(alloc::vec![Expr::Const(c), self])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_schwarzschild_factor() {
        let phi = Expr::sum([
            Expr::Const(1.0),
            Expr::Radius { center: [0.0; 3] }.recip().scaled(0.5),
        ]);
        assert!((phi.eval(&[3.0, 4.0, 0.0]) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let e = Expr::X.powi(-3);
        assert!((e.eval(&[2.0, 0.0, 0.0]) - 0.125).abs() < 1e-15);
        assert_eq!(Expr::X.powi(0).eval(&[5.0, 0.0, 0.0]), 1.0);
    }
}
