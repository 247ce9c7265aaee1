//! A small expression language for symbols continuous on the closed domain.
//!
//! Grammar (EBNF):
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ('^' integer)?
//! atom   := number | 'i' | 'pi' | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//! Identifiers: `z1`..`z9`, `re`, `im`, `abs`, `conj`, `exp`, `bump`, `i`,
//! `pi`. Powers are nonnegative integers only, which keeps every symbol
//! single-valued and continuous on the closed domain. `^` binds tighter
//! than unary minus.

mod parser;

pub use parser::parse;

use num_complex::Complex64 as Cx;

use crate::error::{Error, Result};

/// AST of a symbol. `Bump(center, radius)` is the standard smooth cutoff
/// exp(1 - 1/(1 - t^2)) of t = |z - center|/radius, extended by zero for
/// t >= 1; it is C-infinity and compactly supported in the ball.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolExpr {
    Const(Cx),
    /// Coordinate z_k, 1-based index.
    Var(usize),
    Conj(Box<SymbolExpr>),
    Re(Box<SymbolExpr>),
    Im(Box<SymbolExpr>),
    Abs(Box<SymbolExpr>),
    Exp(Box<SymbolExpr>),
    Neg(Box<SymbolExpr>),
    Add(Box<SymbolExpr>, Box<SymbolExpr>),
    Sub(Box<SymbolExpr>, Box<SymbolExpr>),
    Mul(Box<SymbolExpr>, Box<SymbolExpr>),
    Div(Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, u32),
    Bump { center: Vec<Cx>, radius: f64 },
}

/// The smooth cutoff profile on [0, infinity): exp(1 - 1/(1 - t^2)) for
/// t < 1, zero beyond.
pub fn bump_profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

impl SymbolExpr {
    /// Evaluate at a point of C^n. Errors only on division by a near-zero
    /// denominator.
    pub fn eval(&self, z: &[Cx]) -> Result<Cx> {
        Ok(match self {
            SymbolExpr::Const(c) => *c,
            SymbolExpr::Var(k) => {
                assert!(
                    *k >= 1 && *k <= z.len(),
                    "variable z{k} out of range for a point in C^{}",
                    z.len()
                );
                z[*k - 1]
            }
            SymbolExpr::Conj(e) => e.eval(z)?.conj(),
            SymbolExpr::Re(e) => Cx::new(e.eval(z)?.re, 0.0),
            SymbolExpr::Im(e) => Cx::new(e.eval(z)?.im, 0.0),
            SymbolExpr::Abs(e) => Cx::new(e.eval(z)?.norm(), 0.0),
            SymbolExpr::Exp(e) => e.eval(z)?.exp(),
            SymbolExpr::Neg(e) => -e.eval(z)?,
            SymbolExpr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            SymbolExpr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            SymbolExpr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            SymbolExpr::Div(a, b) => {
                let den = b.eval(z)?;
                if den.norm() < 1e-14 {
                    return Err(Error::DivisionByNearZero(den.norm()));
                }
                a.eval(z)? / den
            }
            SymbolExpr::Pow(e, m) => e.eval(z)?.powu(*m),
            SymbolExpr::Bump { center, radius } => {
                let mut d2 = 0.0;
                for (k, c) in center.iter().enumerate() {
                    let zk = z.get(k).copied().unwrap_or(Cx::new(0.0, 0.0));
                    d2 += (zk - c).norm_sqr();
                }
                Cx::new(bump_profile(d2.sqrt() / radius), 0.0)
            }
        })
    }

    /// Largest coordinate index referenced (0 for constants).
    pub fn max_var_index(&self) -> usize {
        match self {
            SymbolExpr::Const(_) => 0,
            SymbolExpr::Var(k) => *k,
            SymbolExpr::Conj(e)
            | SymbolExpr::Re(e)
            | SymbolExpr::Im(e)
            | SymbolExpr::Abs(e)
            | SymbolExpr::Exp(e)
            | SymbolExpr::Neg(e) => e.max_var_index(),
            SymbolExpr::Add(a, b)
            | SymbolExpr::Sub(a, b)
            | SymbolExpr::Mul(a, b)
            | SymbolExpr::Div(a, b) => a.max_var_index().max(b.max_var_index()),
            SymbolExpr::Pow(e, _) => e.max_var_index(),
            SymbolExpr::Bump { center, .. } => center.len(),
        }
    }

    /// Total degree in (z, conj z) if the expression is polynomial in the
    /// coordinates and their conjugates (abs counts as degree of its
    /// argument, since it only appears squared in moment integrands).
    /// None for exp/bump/div.
    pub fn poly_degree(&self) -> Option<usize> {
        match self {
            SymbolExpr::Const(_) => Some(0),
            SymbolExpr::Var(_) => Some(1),
            SymbolExpr::Conj(e) | SymbolExpr::Neg(e) | SymbolExpr::Re(e) | SymbolExpr::Im(e) => {
                e.poly_degree()
            }
            SymbolExpr::Abs(e) => e.poly_degree(),
            SymbolExpr::Exp(_) | SymbolExpr::Bump { .. } => None,
            SymbolExpr::Div(_, _) => None,
            SymbolExpr::Add(a, b) | SymbolExpr::Sub(a, b) => {
                Some(a.poly_degree()?.max(b.poly_degree()?))
            }
            SymbolExpr::Mul(a, b) => Some(a.poly_degree()? + b.poly_degree()?),
            SymbolExpr::Pow(e, m) => Some(e.poly_degree()? * *m as usize),
        }
    }

    /// True when the expression is a polynomial in the z-variables alone
    /// (no conj, abs, re, im anywhere).
    pub fn is_holomorphic_polynomial(&self) -> bool {
        match self {
            SymbolExpr::Const(_) | SymbolExpr::Var(_) => true,
            SymbolExpr::Neg(e) => e.is_holomorphic_polynomial(),
            SymbolExpr::Add(a, b) | SymbolExpr::Sub(a, b) | SymbolExpr::Mul(a, b) => {
                a.is_holomorphic_polynomial() && b.is_holomorphic_polynomial()
            }
            SymbolExpr::Pow(e, _) => e.is_holomorphic_polynomial(),
            _ => false,
        }
    }

    /// Heuristic reality check by deterministic sampling: returns true when
    /// the imaginary part vanishes at a spread of sample points.
    pub fn is_real_valued_on(&self, samples: &[Vec<Cx>]) -> bool {
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for z in samples {
            if let Ok(v) = self.eval(z) {
                scale = scale.max(v.norm());
                worst = worst.max(v.im.abs());
            }
        }
        worst <= 1e-12 * scale.max(1.0)
    }
}

/// Maximum of |phi| over the boundary grid of the domain.
pub fn boundary_sup(
    expr: &SymbolExpr,
    domain: &crate::domain::DomainSpec,
    m: usize,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for z in domain.boundary_grid(m) {
        sup = sup.max(expr.eval(&z)?.norm());
    }
    Ok(sup)
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

fn fmt_complex(c: Cx) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            "i".into()
        } else {
            format!("{} * i", c.im)
        }
    } else {
        format!("({} + {} * i)", c.re, c.im)
    }
}

impl SymbolExpr {
    fn precedence(&self) -> u8 {
        match self {
            SymbolExpr::Add(..) | SymbolExpr::Sub(..) => 1,
            SymbolExpr::Mul(..) | SymbolExpr::Div(..) => 2,
            SymbolExpr::Neg(..) => 3,
            SymbolExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, parent: u8, out: &mut String) {
        let mine = self.precedence();
        let need_parens = mine < parent;
        if need_parens {
            out.push('(');
        }
        match self {
            SymbolExpr::Const(c) => out.push_str(&fmt_complex(*c)),
            SymbolExpr::Var(k) => out.push_str(&format!("z{k}")),
            SymbolExpr::Conj(e) => {
                out.push_str("conj(");
                e.fmt_prec(0, out);
                out.push(')');
            }
            SymbolExpr::Re(e) => {
                out.push_str("re(");
                e.fmt_prec(0, out);
                out.push(')');
            }
            SymbolExpr::Im(e) => {
                out.push_str("im(");
                e.fmt_prec(0, out);
                out.push(')');
            }
            SymbolExpr::Abs(e) => {
                out.push_str("abs(");
                e.fmt_prec(0, out);
                out.push(')');
            }
            SymbolExpr::Exp(e) => {
                out.push_str("exp(");
                e.fmt_prec(0, out);
                out.push(')');
            }
            SymbolExpr::Neg(e) => {
                out.push('-');
                e.fmt_prec(3, out);
            }
            SymbolExpr::Add(a, b) => {
                a.fmt_prec(1, out);
                out.push_str(" + ");
                b.fmt_prec(2, out);
            }
            SymbolExpr::Sub(a, b) => {
                a.fmt_prec(1, out);
                out.push_str(" - ");
                b.fmt_prec(2, out);
            }
            SymbolExpr::Mul(a, b) => {
                a.fmt_prec(2, out);
                out.push_str(" * ");
                b.fmt_prec(3, out);
            }
            SymbolExpr::Div(a, b) => {
                a.fmt_prec(2, out);
                out.push_str(" / ");
                b.fmt_prec(3, out);
            }
            SymbolExpr::Pow(e, m) => {
                e.fmt_prec(5, out);
                out.push_str(&format!("^{m}"));
            }
            SymbolExpr::Bump { center, radius } => {
                out.push_str("bump(");
                for c in center {
                    out.push_str(&fmt_complex(*c));
                    out.push_str(", ");
                }
                out.push_str(&format!("{radius})"));
            }
        }
        if need_parens {
            out.push(')');
        }
    }
}

impl std::fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.fmt_prec(0, &mut s);
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use proptest::prelude::*;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn eval_trivial_cases() {
        let e = parse("1 - abs(z1)^2").unwrap();
        assert_eq!(e.eval(&[cx(0.0, 0.0)]).unwrap(), cx(1.0, 0.0));
        let v = e.eval(&[cx(0.6, 0.8)]).unwrap();
        assert!(v.norm() < 1e-15);
        let b = parse("bump(0, 0.5)").unwrap();
        assert_eq!(b.eval(&[cx(0.0, 0.0)]).unwrap(), cx(1.0, 0.0));
        assert_eq!(b.eval(&[cx(0.7, 0.0)]).unwrap(), cx(0.0, 0.0));
    }

    #[test]
    fn boundary_sup_examples() {
        let disc = DomainSpec::disc();
        let e = parse("1 - abs(z1)^2").unwrap();
        assert!(boundary_sup(&e, &disc, 64).unwrap() < 1e-14);
        let e = parse("abs(z1)^2").unwrap();
        assert!((boundary_sup(&e, &disc, 64).unwrap() - 1.0).abs() < 1e-14);
        let e = parse("bump(0, 0.5)").unwrap();
        assert_eq!(boundary_sup(&e, &disc, 64).unwrap(), 0.0);
        // On the punctured disc the puncture is part of the boundary, so a
        // bump centred there has boundary sup 1.
        let pd = DomainSpec::punctured_disc();
        assert!((boundary_sup(&e, &pd, 64).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bump_is_a_smooth_cutoff() {
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(1.5), 0.0);
        assert!(bump_profile(0.0) == 1.0);
        for k in 1..100 {
            let t = k as f64 / 100.0;
            assert!(bump_profile(t) > 0.0 && bump_profile(t) <= 1.0);
        }
        // value and finite-difference slope at t = 1 - 1e-4 are tiny
        let t = 1.0 - 1e-4;
        let v = bump_profile(t);
        let slope = (bump_profile(t + 1e-6) - bump_profile(t - 1e-6)) / 2e-6;
        assert!(v < 1e-3, "bump value {v} too large near the edge");
        assert!(slope.abs() < 1e-3, "bump slope {slope} too large near the edge");
    }

    #[test]
    fn division_by_near_zero_reports() {
        let e = parse("1 / z1").unwrap();
        assert!(matches!(
            e.eval(&[cx(0.0, 0.0)]),
            Err(crate::Error::DivisionByNearZero(_))
        ));
    }

    #[test]
    fn poly_degree_and_holomorphy() {
        let e = parse("z1^3 - 2*z1").unwrap();
        assert!(e.is_holomorphic_polynomial());
        assert_eq!(e.poly_degree(), Some(3));
        let e = parse("abs(z1)^2 * z2").unwrap();
        assert!(!e.is_holomorphic_polynomial());
        assert_eq!(e.poly_degree(), Some(3));
        assert_eq!(parse("bump(0,0.5)").unwrap().poly_degree(), None);
    }

    #[test]
    fn continuity_by_finite_differences() {
        // div-free expressions are continuous: compare nearby evaluations
        let exprs = ["1 - abs(z1)^2", "exp(z1)*conj(z1)", "re(z1) + im(z1)^2"];
        for text in exprs {
            let e = parse(text).unwrap();
            for j in 0..100u64 {
                let z = cx(
                    0.8 * ((j as f64 * 0.618).fract() * 2.0 - 1.0),
                    0.8 * ((j as f64 * 0.414).fract() * 2.0 - 1.0),
                );
                let h = 1e-7;
                let v0 = e.eval(&[z]).unwrap();
                let v1 = e.eval(&[z + cx(h, 0.0)]).unwrap();
                assert!((v1 - v0).norm() < 1e-5, "{text} jumps at {z}");
            }
        }
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in -0.9f64..0.9, im in -0.9f64..0.9) {
            let corpus = [
                "z1^2 - conj(z1)",
                "exp(z1) * z1",
                "(1 - abs(z1)^2) * re(z1)",
                "i * z1 + 2",
            ];
            let z = [cx(re, im)];
            for text in corpus {
                let e = parse(text).unwrap();
                let c = SymbolExpr::Conj(Box::new(e.clone()));
                let lhs = c.eval(&z).unwrap();
                let rhs = e.eval(&z).unwrap().conj();
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
