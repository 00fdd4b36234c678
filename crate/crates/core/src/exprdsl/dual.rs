use super::{Expr, ExprError, Func, Result};
use crate::scalar::Real;

/// A value together with its gradient in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub grad: Vec<T>,
}

impl<T: Real> Dual<T> {
    pub fn constant(value: T, dim: usize) -> Self {
        Self {
            value,
            grad: vec![T::zero(); dim],
        }
    }

    pub fn coordinate(value: T, index: usize, dim: usize) -> Self {
        let mut grad = vec![T::zero(); dim];
        grad[index] = T::one();
        Self { value, grad }
    }

    /// `(value, d value)` pushed through a scalar function with derivative `slope`.
    fn chain(mut self, value: T, slope: T) -> Self {
        for g in &mut self.grad {
            *g *= slope;
        }
        self.value = value;
        self
    }

    fn zip(mut self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        for (a, &b) in self.grad.iter_mut().zip(&other.grad) {
            *a = f(*a, b);
        }
        self
    }
}

fn domain(e: &Expr, reason: &'static str) -> ExprError {
    ExprError::DomainError {
        subexpr: e.to_string(),
        reason,
    }
}

fn check_point<T>(e: &Expr, p: &[T]) -> Result<()> {
    match e.max_var() {
        Some(i) if i >= p.len() => Err(ExprError::PointDimension {
            got: p.len(),
            expected: i + 1,
        }),
        _ => Ok(()),
    }
}

impl Expr {
    /// Plain evaluation at `p`.
    pub fn eval<T: Real>(&self, p: &[T]) -> Result<T> {
        check_point(self, p)?;
        self.eval_unchecked(p)
    }

    fn eval_unchecked<T: Real>(&self, p: &[T]) -> Result<T> {
        Ok(match self {
            Expr::Num(x) => T::lit(*x),
            Expr::Var(i) => p[*i],
            Expr::Neg(a) => -a.eval_unchecked(p)?,
            Expr::Add(a, b) => a.eval_unchecked(p)? + b.eval_unchecked(p)?,
            Expr::Sub(a, b) => a.eval_unchecked(p)? - b.eval_unchecked(p)?,
            Expr::Mul(a, b) => a.eval_unchecked(p)? * b.eval_unchecked(p)?,
            Expr::Div(a, b) => {
                let d = b.eval_unchecked(p)?;
                if d == T::zero() {
                    return Err(domain(self, "division by zero"));
                }
                a.eval_unchecked(p)? / d
            }
            Expr::Pow(a, k) => {
                let v = a.eval_unchecked(p)?;
                if *k < 0 && v == T::zero() {
                    return Err(domain(self, "negative power of zero"));
                }
                v.powi(*k)
            }
            Expr::Func(f, a) => {
                let v = a.eval_unchecked(p)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Log if v <= T::zero() => {
                        return Err(domain(self, "logarithm of a non-positive value"))
                    }
                    Func::Log => v.ln(),
                    Func::Sqrt if v <= T::zero() => {
                        return Err(domain(self, "square root at a non-positive value"))
                    }
                    Func::Sqrt => v.sqrt(),
                }
            }
        })
    }

    /// Value and exact gradient at `p` by forward-mode propagation.
    ///
    /// `sqrt` is rejected at zero as well as below it, since its derivative
    /// is unbounded there.
    pub fn eval_dual<T: Real>(&self, p: &[T]) -> Result<Dual<T>> {
        check_point(self, p)?;
        self.dual_unchecked(p)
    }

    fn dual_unchecked<T: Real>(&self, p: &[T]) -> Result<Dual<T>> {
        let n = p.len();
        Ok(match self {
            Expr::Num(x) => Dual::constant(T::lit(*x), n),
            Expr::Var(i) => Dual::coordinate(p[*i], *i, n),
            Expr::Neg(a) => {
                let d = a.dual_unchecked(p)?;
                let v = -d.value;
                d.chain(v, -T::one())
            }
            Expr::Add(a, b) => {
                let (x, y) = (a.dual_unchecked(p)?, b.dual_unchecked(p)?);
                let v = x.value + y.value;
                Dual {
                    value: v,
                    ..x.zip(&y, |u, w| u + w)
                }
            }
            Expr::Sub(a, b) => {
                let (x, y) = (a.dual_unchecked(p)?, b.dual_unchecked(p)?);
                let v = x.value - y.value;
                Dual {
                    value: v,
                    ..x.zip(&y, |u, w| u - w)
                }
            }
            Expr::Mul(a, b) => {
                let (x, y) = (a.dual_unchecked(p)?, b.dual_unchecked(p)?);
                let (xv, yv) = (x.value, y.value);
                Dual {
                    value: xv * yv,
                    ..x.zip(&y, |u, w| u * yv + xv * w)
                }
            }
            Expr::Div(a, b) => {
                let (x, y) = (a.dual_unchecked(p)?, b.dual_unchecked(p)?);
                if y.value == T::zero() {
                    return Err(domain(self, "division by zero"));
                }
                let (xv, yv) = (x.value, y.value);
                let q = xv / yv;
                Dual {
                    value: q,
                    ..x.zip(&y, |u, w| (u - q * w) / yv)
                }
            }
            Expr::Pow(a, k) => {
                let d = a.dual_unchecked(p)?;
                let v = d.value;
                if *k == 0 {
                    return Ok(Dual::constant(T::one(), n));
                }
                if *k < 0 && v == T::zero() {
                    return Err(domain(self, "negative power of zero"));
                }
                let slope = T::from_i32(*k).expect("small integer") * v.powi(*k - 1);
                d.chain(v.powi(*k), slope)
            }
            Expr::Func(f, a) => {
                let d = a.dual_unchecked(p)?;
                let v = d.value;
                match f {
                    Func::Exp => {
                        let e = v.exp();
                        d.chain(e, e)
                    }
                    Func::Sin => d.chain(v.sin(), v.cos()),
                    Func::Cos => d.chain(v.cos(), -v.sin()),
                    Func::Log => {
                        if v <= T::zero() {
                            return Err(domain(self, "logarithm of a non-positive value"));
                        }
                        d.chain(v.ln(), v.recip())
                    }
                    Func::Sqrt => {
                        if v <= T::zero() {
                            return Err(domain(self, "square root at a non-positive value"));
                        }
                        let s = v.sqrt();
                        d.chain(s, T::lit(0.5) / s)
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn product_gradient() {
        let d = parse("x0*x1", 2).unwrap().eval_dual(&[3.0, 4.0]).unwrap();
        assert_eq!(d.value, 12.0);
        assert_eq!(d.grad, vec![4.0, 3.0]);
    }

    #[test]
    fn sine_at_origin() {
        let d = parse("sin(x0)", 3)
            .unwrap()
            .eval_dual(&[0.0, 0.5, 0.7])
            .unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.grad, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn pole_is_a_domain_error() {
        let e = parse("1/(x0-1)", 2).unwrap();
        match e.eval_dual(&[1.0, 0.0]) {
            Err(ExprError::DomainError { subexpr, .. }) => assert_eq!(subexpr, "1.0/(x0 - 1.0)"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            e.eval(&[1.0, 0.0]),
            Err(ExprError::DomainError { .. })
        ));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("2 + log(x0 - x1)", 2).unwrap();
        match e.eval_dual(&[1.0, 1.0]) {
            Err(ExprError::DomainError { subexpr, .. }) => assert_eq!(subexpr, "log(x0 - x1)"),
            other => panic!("{other:?}"),
        }
        assert!(parse("sqrt(x0)", 1).unwrap().eval_dual(&[0.0]).is_err());
        assert!(parse("x0^-1", 1).unwrap().eval_dual(&[0.0]).is_err());
    }

    #[test]
    fn point_dimension_checked() {
        let e = parse("x2", 3).unwrap();
        assert_eq!(
            e.eval_dual(&[1.0, 2.0]),
            Err(ExprError::PointDimension {
                got: 2,
                expected: 3
            })
        );
    }

    #[test]
    fn plain_and_dual_values_agree() {
        let e = parse("exp(x0)*cos(x1)/(2 + x0^2) - sqrt(3 + x1)", 2).unwrap();
        let p = [0.3, -1.2];
        assert_eq!(e.eval(&p).unwrap(), e.eval_dual(&p).unwrap().value);
    }

    #[test]
    fn works_in_single_precision() {
        let d = parse("x0^3", 1).unwrap().eval_dual(&[2.0f32]).unwrap();
        assert_eq!((d.value, d.grad[0]), (8.0, 12.0));
    }
}
