use std::fmt;

use crate::error::EvalError;
use crate::jet::{Jet2, Scalar};

/// Elementary functions available in component expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply<S: Scalar>(self, x: &S) -> Result<S, EvalError> {
        let v = x.value();
        Ok(match self {
            Func::Exp => {
                let e = v.exp();
                x.chain(e, e, e)
            }
            Func::Log => {
                if v <= 0.0 {
                    return Err(EvalError::new(format!("log of nonpositive argument {v}")));
                }
                x.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
            }
            Func::Sin => x.chain(v.sin(), v.cos(), -v.sin()),
            Func::Cos => x.chain(v.cos(), -v.sin(), -v.cos()),
            Func::Sqrt => {
                if v < 0.0 || (v == 0.0 && x.dim() > 0) {
                    return Err(EvalError::new(format!("sqrt not differentiable at {v}")));
                }
                let s = v.sqrt();
                x.chain(s, 0.5 / s, -0.25 / (s * v))
            }
        })
    }
}

/// Abstract syntax tree of a component expression. Variables are indexed
/// from zero; `Var(0)` prints as `u1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    // Constructors below fold constants and neutral elements so that
    // symbolic derivatives stay small.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), _) if x == 0.0 => Expr::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (a.as_num(), k) {
            (_, 0) => Expr::Num(1.0),
            (_, 1) => a,
            (Some(x), _) => Expr::Num(x.powi(k)),
            _ => Expr::Pow(Box::new(a), k),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Sum of expressions (0 for an empty iterator).
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::Num(0.0), Expr::add)
    }

    /// Evaluate over any [`Scalar`]; `vars[i]` is the value of `Var(i)`.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, EvalError> {
        let dim = vars.first().map_or(0, Scalar::dim);
        Ok(match self {
            Expr::Num(v) => S::cst(*v, dim),
            Expr::Var(i) => vars
                .get(*i)
                .cloned()
                .ok_or_else(|| EvalError::new(format!("variable index {} out of range", i + 1)))?,
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => {
                let den = b.eval(vars)?;
                if den.value() == 0.0 {
                    return Err(EvalError::new("division by zero".to_string()));
                }
                a.eval(vars)? / den
            }
            Expr::Pow(a, k) => {
                let base = a.eval(vars)?;
                if *k < 0 && base.value() == 0.0 {
                    return Err(EvalError::new("negative power of zero".to_string()));
                }
                base.powi(*k)
            }
            Expr::Call(f, a) => f.apply(&a.eval(vars)?)?,
        })
    }

    pub fn eval_f64(&self, p: &[f64]) -> Result<f64, EvalError> {
        self.eval(p)
    }

    /// Value, gradient and Hessian at `p` by forward differentiation.
    pub fn eval_jet2(&self, p: &[f64]) -> Result<Jet2, EvalError> {
        self.eval(&Jet2::seed(p))
    }

    /// Symbolic partial derivative with respect to `Var(k)`.
    pub fn diff(&self, k: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(i) => Expr::Num(if *i == k { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.diff(k)),
            Expr::Add(a, b) => Expr::add(a.diff(k), b.diff(k)),
            Expr::Sub(a, b) => Expr::sub(a.diff(k), b.diff(k)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(k), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(k)),
            ),
            Expr::Div(a, b) => {
                let da = a.diff(k);
                let db = b.diff(k);
                let first = Expr::div(da, (**b).clone());
                if db.is_zero() {
                    first
                } else {
                    Expr::sub(
                        first,
                        Expr::div(Expr::mul((**a).clone(), db), Expr::pow((**b).clone(), 2)),
                    )
                }
            }
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::Num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.diff(k),
            ),
            Expr::Call(f, a) => {
                let da = a.diff(k);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => Expr::call(Func::Exp, inner),
                    Func::Log => Expr::div(Expr::Num(1.0), inner),
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, inner)),
                    Func::Sqrt => {
                        Expr::div(Expr::Num(0.5), Expr::call(Func::Sqrt, inner))
                    }
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Replace every `Var(i)` by `repl[i]`.
    pub fn substitute(&self, repl: &[Expr]) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(i) => repl[*i].clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(repl)),
            Expr::Add(a, b) => Expr::add(a.substitute(repl), b.substitute(repl)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(repl), b.substitute(repl)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(repl), b.substitute(repl)),
            Expr::Div(a, b) => Expr::div(a.substitute(repl), b.substitute(repl)),
            Expr::Pow(a, k) => Expr::pow(a.substitute(repl), *k),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(repl)),
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Fully parenthesised rendering with variables named `{prefix}{i+1}`.
    /// Parsing the output gives back an equal tree.
    pub fn render(&self, prefix: &str) -> String {
        let mut s = String::new();
        self.write(&mut s, prefix);
        s
    }

    fn write(&self, out: &mut String, prefix: &str) {
        use std::fmt::Write;
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    let _ = write!(out, "(-{})", -v);
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            Expr::Var(i) => {
                let _ = write!(out, "{prefix}{}", i + 1);
            }
            Expr::Neg(a) => {
                out.push_str("(-");
                a.write(out, prefix);
                out.push(')');
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => " * ",
                    _ => " / ",
                };
                out.push('(');
                a.write(out, prefix);
                out.push_str(op);
                b.write(out, prefix);
                out.push(')');
            }
            Expr::Pow(a, k) => {
                out.push('(');
                a.write(out, prefix);
                let _ = write!(out, "^{k})");
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(out, prefix);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("u"))
    }
}

/// Monomial-sum builder: `Σ c · Π x_i^{e_i}`.
pub fn polynomial(terms: &[(f64, Vec<u32>)]) -> Expr {
    Expr::sum(terms.iter().map(|(c, exps)| {
        exps.iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .fold(Expr::Num(*c), |acc, (i, &e)| Expr::mul(acc, Expr::pow(Expr::Var(i), e as i32)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_derivative_matches_jet() {
        // f = exp(u1) * sin(u2) / (1 + u1^2)
        let f = Expr::div(
            Expr::mul(Expr::call(Func::Exp, Expr::var(0)), Expr::call(Func::Sin, Expr::var(1))),
            Expr::add(Expr::num(1.0), Expr::pow(Expr::var(0), 2)),
        );
        let p = [0.3, -0.7];
        let jet = f.eval_jet2(&p).unwrap();
        for k in 0..2 {
            let dk = f.diff(k);
            let dj = dk.eval_jet2(&p).unwrap();
            assert!((dj.value - jet.grad[k]).abs() < 1e-14);
            for l in 0..2 {
                assert!((dj.grad[l] - jet.h(k, l)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn substitution_composes() {
        let f = Expr::mul(Expr::var(0), Expr::var(1));
        let g = f.substitute(&[Expr::add(Expr::var(0), Expr::var(1)), Expr::sub(Expr::var(0), Expr::var(1))]);
        assert_eq!(g.eval_f64(&[3.0, 1.0]).unwrap(), 8.0);
    }

    #[test]
    fn evaluation_errors() {
        let f = Expr::call(Func::Log, Expr::var(0));
        assert!(f.eval_f64(&[-1.0]).is_err());
        let g = Expr::div(Expr::num(1.0), Expr::var(0));
        assert!(g.eval_f64(&[0.0]).is_err());
    }
}
