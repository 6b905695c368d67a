use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{BinOp, Expr, ExprError, Func, Var};
use crate::field::{GridSpec, ScalarField};

/// Forward-mode dual number carrying `∂/∂x` and `∂/∂y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Dual {
    fn constant(v: f64) -> Self {
        Dual { v, dx: 0.0, dy: 0.0 }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Dual { v, dx: dv * self.dx, dy: dv * self.dy }
    }

    fn is_constant(self) -> bool {
        self.dx == 0.0 && self.dy == 0.0
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, dx: self.dx + o.dx, dy: self.dy + o.dy }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, dx: self.dx - o.dx, dy: self.dy - o.dy }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, dx: self.dx * o.v + self.v * o.dx, dy: self.dy * o.v + self.v * o.dy }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        Dual { v, dx: (self.dx - v * o.dx) * inv, dy: (self.dy - v * o.dy) * inv }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, dx: -self.dx, dy: -self.dy }
    }
}

trait Number: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> {
    fn value(self) -> f64;
    fn finite(self) -> bool;
    fn lift(c: f64) -> Self;
    fn var(var: Var, x: f64, y: f64, s: f64) -> Self;
    fn apply(self, func: Func) -> Self;
    fn pow(self, e: Self) -> Result<Self, &'static str>;
}

impl Number for f64 {
    fn value(self) -> f64 {
        self
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn lift(c: f64) -> Self {
        c
    }
    fn var(var: Var, x: f64, y: f64, s: f64) -> Self {
        match var {
            Var::X => x,
            Var::Y => y,
            Var::S => s,
        }
    }
    fn apply(self, func: Func) -> Self {
        match func {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sqrt => self.sqrt(),
            Func::Abs => self.abs(),
        }
    }
    fn pow(self, e: Self) -> Result<Self, &'static str> {
        Ok(self.powf(e))
    }
}

impl Number for Dual {
    fn value(self) -> f64 {
        self.v
    }
    fn finite(self) -> bool {
        self.v.is_finite() && self.dx.is_finite() && self.dy.is_finite()
    }
    fn lift(c: f64) -> Self {
        Dual::constant(c)
    }
    fn var(var: Var, x: f64, y: f64, s: f64) -> Self {
        match var {
            Var::X => Dual { v: x, dx: 1.0, dy: 0.0 },
            Var::Y => Dual { v: y, dx: 0.0, dy: 1.0 },
            Var::S => Dual::constant(s),
        }
    }
    fn apply(self, func: Func) -> Self {
        let a = self.v;
        match func {
            Func::Sin => self.chain(a.sin(), a.cos()),
            Func::Cos => self.chain(a.cos(), -a.sin()),
            Func::Exp => {
                let e = a.exp();
                self.chain(e, e)
            }
            Func::Log => self.chain(a.ln(), 1.0 / a),
            Func::Sqrt => {
                let r = a.sqrt();
                self.chain(r, 0.5 / r)
            }
            Func::Abs => {
                let sign = if a > 0.0 {
                    1.0
                } else if a < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                self.chain(a.abs(), sign)
            }
        }
    }
    fn pow(self, e: Self) -> Result<Self, &'static str> {
        let (a, b) = (self.v, e.v);
        let v = a.powf(b);
        if e.is_constant() {
            // b a^(b-1) da; avoids ln a so negative bases with integer exponents work
            let dv = if b == 0.0 { 0.0 } else { b * a.powf(b - 1.0) };
            return Ok(self.chain(v, dv));
        }
        if a <= 0.0 {
            return Err("variable exponent requires a positive base");
        }
        let ln_a = a.ln();
        Ok(Dual { v, dx: v * (e.dx * ln_a + b * self.dx / a), dy: v * (e.dy * ln_a + b * self.dy / a) })
    }
}

fn domain(e: &Expr, message: &str) -> ExprError {
    ExprError::Domain { subexpr: e.to_string(), message: message.to_string() }
}

fn eval<N: Number>(e: &Expr, x: f64, y: f64, s: f64) -> Result<N, ExprError> {
    let out = match e {
        Expr::Const(c) => N::lift(*c),
        Expr::Var(v) => N::var(*v, x, y, s),
        Expr::Neg(inner) => -eval::<N>(inner, x, y, s)?,
        Expr::Binary(op, l, r) => {
            let a = eval::<N>(l, x, y, s)?;
            let b = eval::<N>(r, x, y, s)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    let (av, bv) = (a.value(), b.value());
                    if av == 0.0 && bv < 0.0 {
                        return Err(domain(e, "division by zero (zero base, negative exponent)"));
                    }
                    if av < 0.0 && bv.fract() != 0.0 {
                        return Err(domain(e, "negative base with non-integer exponent"));
                    }
                    a.pow(b).map_err(|m| domain(e, m))?
                }
            }
        }
        Expr::Call(func, args) => {
            let a = eval::<N>(&args[0], x, y, s)?;
            match func {
                Func::Log if a.value() <= 0.0 => return Err(domain(e, "logarithm of a non-positive value")),
                Func::Sqrt if a.value() < 0.0 => return Err(domain(e, "square root of a negative value")),
                _ => a.apply(*func),
            }
        }
    };
    if !out.finite() {
        return Err(ExprError::NonFinite { subexpr: e.to_string() });
    }
    Ok(out)
}

pub fn evaluate(e: &Expr, x: f64, y: f64, s: f64) -> Result<f64, ExprError> {
    eval::<f64>(e, x, y, s)
}

/// Value and exact spatial gradient `(G, ∂G/∂x, ∂G/∂y)` at a point, by
/// forward-mode differentiation.
pub fn evaluate_gradient(e: &Expr, x: f64, y: f64, s: f64) -> Result<(f64, f64, f64), ExprError> {
    let d = eval::<Dual>(e, x, y, s)?;
    Ok((d.v, d.dx, d.dy))
}

pub fn evaluate_on_grid(e: &Expr, grid: GridSpec, s: f64) -> Result<ScalarField, ExprError> {
    let mut values = Vec::with_capacity(grid.len());
    for (_, _, x, y) in grid.nodes() {
        let v = evaluate(e, x, y, s).map_err(|err| ExprError::AtNode { x, y, source: Box::new(err) })?;
        values.push(v);
    }
    Ok(ScalarField::from_values(grid, values).expect("one value per node"))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::expr::parse;

    fn ev(text: &str, x: f64, y: f64, s: f64) -> Result<f64, ExprError> {
        evaluate(&parse(text).unwrap(), x, y, s)
    }

    #[test]
    fn basic_values() {
        assert_eq!(ev("x+y", 1.0, 2.0, 0.0).unwrap(), 3.0);
        assert!((ev("s*sin(x)", FRAC_PI_2, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(ev("2^3^2", 0.0, 0.0, 0.0).unwrap(), 512.0);
        assert_eq!(ev("(2^3)^2", 0.0, 0.0, 0.0).unwrap(), 64.0);
        assert_eq!(ev("-2^2", 0.0, 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(ev("2^-1", 0.0, 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0, 0.0).unwrap(), 7.0);
        assert_eq!(ev("tau / pi", 0.0, 0.0, 0.0).unwrap(), 2.0);
        assert_eq!(ev("abs(-3) + sqrt(16) + log(exp(1))", 0.0, 0.0, 0.0).unwrap(), 8.0);
        assert!((ev("pi", 0.0, 0.0, 0.0).unwrap() - PI).abs() == 0.0);
    }

    #[test]
    fn domain_errors() {
        let err = ev("1/(x-1)", 1.0, 0.0, 0.0).unwrap_err();
        match err {
            ExprError::Domain { subexpr, message } => {
                assert_eq!(subexpr, "(1 / (x - 1))");
                assert!(message.contains("division by zero"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(ev("log(x)", 0.0, 0.0, 0.0), Err(ExprError::Domain { .. })));
        assert!(matches!(ev("sqrt(x)", -1.0, 0.0, 0.0), Err(ExprError::Domain { .. })));
        assert!(matches!(ev("x^0.5", -1.0, 0.0, 0.0), Err(ExprError::Domain { .. })));
        assert!(matches!(ev("exp(x)", 1000.0, 0.0, 0.0), Err(ExprError::NonFinite { .. })));
    }

    #[test]
    fn gradient_matches_closed_form() {
        let e = parse("0.1*cos(x)*cos(y) + x^2*y - exp(sin(x)*y)/3").unwrap();
        let (x, y) = (0.7, -1.2);
        let (v, gx, gy) = evaluate_gradient(&e, x, y, 0.0).unwrap();
        let ex = 0.1 * x.cos() * y.cos() + x * x * y - (x.sin() * y).exp() / 3.0;
        let egx = -0.1 * x.sin() * y.cos() + 2.0 * x * y - (x.sin() * y).exp() * x.cos() * y / 3.0;
        let egy = -0.1 * x.cos() * y.sin() + x * x - (x.sin() * y).exp() * x.sin() / 3.0;
        assert!((v - ex).abs() < 1e-14);
        assert!((gx - egx).abs() < 1e-14);
        assert!((gy - egy).abs() < 1e-14);
        // s is a parameter, not a differentiation direction
        let (_, gx, gy) = evaluate_gradient(&parse("s*y").unwrap(), 0.0, 0.0, 3.0).unwrap();
        assert_eq!((gx, gy), (0.0, 3.0));
        let (_, gx, _) = evaluate_gradient(&parse("x^x").unwrap(), 2.0, 0.0, 0.0).unwrap();
        assert!((gx - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-13);
        let (_, gx, _) = evaluate_gradient(&parse("x^3").unwrap(), -2.0, 0.0, 0.0).unwrap();
        assert!((gx - 12.0).abs() < 1e-13);
    }

    #[test]
    fn grid_evaluation() {
        let g = GridSpec::spectral(16).unwrap();
        assert_eq!(evaluate_on_grid(&parse("0").unwrap(), g, 0.0).unwrap().max_abs(), 0.0);
        let f = evaluate_on_grid(&parse("cos(x)").unwrap(), g, 0.0).unwrap();
        assert_eq!(f, ScalarField::from_fn(g, |x, _| x.cos()));
        let err = evaluate_on_grid(&parse("1/x").unwrap(), g, 0.0).unwrap_err();
        assert!(matches!(err, ExprError::AtNode { x, y, .. } if x == 0.0 && y == 0.0));
    }
}
