use super::ast::{Expr, Func};

impl Expr {
    /// Symbolic partial derivative with respect to `Var(var)`. Generators
    /// are constants.
    pub fn differentiate(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Gen { .. } => Expr::int(0),
            Expr::Var(i) => Expr::int(i64::from(*i == var)),
            Expr::Neg(a) => Expr::neg(a.differentiate(var)),
            Expr::Add(a, b) => Expr::add(a.differentiate(var), b.differentiate(var)),
            Expr::Sub(a, b) => Expr::sub(a.differentiate(var), b.differentiate(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(var), (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate(var)),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                if db.is_zero() {
                    Expr::div(da, (**b).clone())
                } else {
                    Expr::div(
                        Expr::sub(
                            Expr::mul(da, (**b).clone()),
                            Expr::mul((**a).clone(), db),
                        ),
                        Expr::pow((**b).clone(), 2),
                    )
                }
            }
            Expr::Pow(a, k) => Expr::mul(
                Expr::mul(Expr::int(*k), Expr::pow((**a).clone(), k - 1)),
                a.differentiate(var),
            ),
            Expr::Func(f, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return da;
                }
                let u = (**a).clone();
                match f {
                    Func::Sin => Expr::mul(Expr::func(Func::Cos, u), da),
                    Func::Cos => Expr::neg(Expr::mul(Expr::func(Func::Sin, u), da)),
                    Func::Exp => Expr::mul(Expr::func(Func::Exp, u), da),
                    Func::Log => Expr::div(da, u),
                }
            }
        }
    }

    /// `k`-fold derivative with respect to `Var(var)`.
    pub fn nth_derivative(&self, var: usize, k: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..k {
            e = e.differentiate(var);
        }
        e
    }
}
