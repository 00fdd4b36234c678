use geq_core::exprdsl::{parse, Expr, ExprError, Func};
use proptest::prelude::*;

const DIM: usize = 3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0..5.0f64).prop_map(Expr::Num),
        (0..DIM).prop_map(Expr::Var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| -a),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), -3i32..=4).prop_map(|(a, k)| a.pow(k)),
            (inner, 0usize..5).prop_map(|(a, f)| Expr::apply(Func::ALL[f], a)),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, DIM)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn dual_gradient_matches_central_differences(e in expr(), p in point()) {
        let d = match e.eval_dual(&p) {
            Ok(d) => d,
            Err(ExprError::DomainError { .. }) => return Err(TestCaseError::reject("outside domain")),
            Err(other) => panic!("{other}"),
        };
        // stay clear of poles and branch points, where differences are meaningless
        prop_assume!(d.value.abs() < 1e4 && d.grad.iter().all(|g| g.abs() < 1e4));
        for k in 0..DIM {
            let h = 1e-6 * (1.0 + p[k].abs());
            let mut up = p.clone();
            let mut dn = p.clone();
            up[k] += h;
            dn[k] -= h;
            let (Ok(fu), Ok(fd)) = (e.eval(&up), e.eval(&dn)) else {
                return Err(TestCaseError::reject("stencil leaves domain"));
            };
            let fd_grad = (fu - fd) / (up[k] - dn[k]);
            // Richardson estimate of the stencil's own truncation error; skip
            // points where the difference oracle cannot resolve the tolerance
            let (Ok(fu2), Ok(fd2)) = ({ let mut q = p.clone(); q[k] += 2.0 * h; e.eval(&q) },
                                      { let mut q = p.clone(); q[k] -= 2.0 * h; e.eval(&q) }) else {
                return Err(TestCaseError::reject("stencil leaves domain"));
            };
            let wide = (fu2 - fd2) / (4.0 * h);
            prop_assume!((wide - fd_grad).abs() / 3.0 < 1e-7 * (1.0 + fd_grad.abs()));
            let err = (fd_grad - d.grad[k]).abs() / (1.0 + d.grad[k].abs());
            prop_assert!(err <= 1e-6, "{e} at {p:?}: dual {} fd {fd_grad}", d.grad[k]);
        }
    }

    #[test]
    fn parse_print_round_trip(e in expr()) {
        let text = e.to_string();
        let back = parse(&text, DIM).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }
}

#[test]
fn every_builtin_agrees_with_differences() {
    for src in [
        "exp(x0*x1)",
        "log(1 + x0^2)",
        "sin(x1 - x0)",
        "cos(x0*x2)",
        "sqrt(2 + x2)",
        "x0^-3",
        "x1/x2",
    ] {
        let e = parse(src, DIM).unwrap();
        let p: [f64; DIM] = [0.7, -0.4, 1.3];
        let d = e.eval_dual(&p).unwrap();
        for k in 0..DIM {
            let h = 1e-6 * (1.0 + p[k].abs());
            let mut up = p;
            let mut dn = p;
            up[k] += h;
            dn[k] -= h;
            let fd = (e.eval(&up).unwrap() - e.eval(&dn).unwrap()) / (2.0 * h);
            assert!(
                (fd - d.grad[k]).abs() <= 1e-6 * (1.0 + d.grad[k].abs()),
                "{src} d{k}"
            );
        }
    }
}
