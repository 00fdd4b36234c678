//! Closed-form scalar expressions in chart coordinates `x0 .. x{n-1}`.
//!
//! Expressions are parsed from text, printed back in a form the parser
//! accepts, and evaluated either plainly or with forward-mode dual numbers
//! that carry the exact gradient.

mod dual;
mod parse;

use std::fmt;
use std::ops;

use thiserror::Error;

pub use dual::Dual;
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("coordinate x{index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("{reason} in `{subexpr}`")]
    DomainError {
        subexpr: String,
        reason: &'static str,
    },
}

pub type Result<T, E = ExprError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Literals are stored as f64 and converted on evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn pow(self, k: i32) -> Self {
        Expr::Pow(Box::new(self), k)
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        Expr::Func(f, Box::new(arg))
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// Coordinate indices referenced, ascending and without repeats.
    pub fn vars(&self) -> Vec<usize> {
        fn walk(e: &Expr, out: &mut Vec<usize>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(i) => out.push(*i),
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut v = Vec::new();
        walk(self, &mut v);
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Renames every coordinate `xi` to `x{f(i)}`.
    pub fn remap_vars(&self, f: &impl Fn(usize) -> usize) -> Expr {
        let b = |e: &Expr| Box::new(e.remap_vars(f));
        match self {
            Expr::Num(x) => Expr::Num(*x),
            Expr::Var(i) => Expr::Var(f(*i)),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(a, k) => Expr::Pow(b(a), *k),
            Expr::Func(g, a) => Expr::Func(*g, b(a)),
        }
    }

    /// Checks every coordinate index against `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.max_var() {
            Some(i) if i >= dim => Err(ExprError::IndexOutOfRange { index: i, dim }),
            _ => Ok(()),
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Var(_) | Expr::Func(..))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

struct Operand<'a>(&'a Expr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atom() && !matches!(self.0, Expr::Num(x) if *x < 0.0 || x.is_sign_negative()) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

/// Prints a form that parses back to an equal tree. Every compound operand
/// is parenthesised, so the output is unambiguous rather than minimal.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "-{}", Operand(a)),
            Expr::Add(a, b) => write!(f, "{} + {}", Operand(a), Operand(b)),
            Expr::Sub(a, b) => write!(f, "{} - {}", Operand(a), Operand(b)),
            Expr::Mul(a, b) => write!(f, "{}*{}", Operand(a), Operand(b)),
            Expr::Div(a, b) => write!(f, "{}/{}", Operand(a), Operand(b)),
            Expr::Pow(a, k) if *k < 0 => write!(f, "{}^({k})", Operand(a)),
            Expr::Pow(a, k) => write!(f, "{}^{k}", Operand(a)),
            Expr::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}
