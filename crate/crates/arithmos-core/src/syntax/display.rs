//! Canonical printing. `parse(print(x))` is the identity on ASTs; printing
//! inserts the minimal parentheses the grammar needs and re-sugars the
//! canonical bounded-quantifier patterns back to `forall v < t. φ` /
//! `exists v < t. φ`.

use super::{Formula, Term, VarKind, Variable};
use std::fmt;

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Object => write!(f, "v{}", self.index),
            VarKind::Slot => write!(f, "e{}", self.index),
            VarKind::Marker => write!(f, "w"),
        }
    }
}

// Term precedence levels: addition 1, multiplication 2, everything
// self-delimiting 3.
fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add { .. } => 1,
        Term::Mul { .. } => 2,
        _ => 3,
    }
}

fn fmt_term(t: &Term, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = term_prec(t);
    let parens = prec < ctx;
    if parens {
        write!(f, "(")?;
    }
    match t {
        Term::Zero => write!(f, "0")?,
        Term::Num { value } => write!(f, "#{value}")?,
        Term::Var { var } => write!(f, "{var}")?,
        Term::Succ { arg } => {
            write!(f, "S(")?;
            fmt_term(arg, 0, f)?;
            write!(f, ")")?;
        }
        Term::Add { left, right } => {
            fmt_term(left, 1, f)?;
            write!(f, " + ")?;
            fmt_term(right, 2, f)?;
        }
        Term::Mul { left, right } => {
            fmt_term(left, 2, f)?;
            write!(f, " * ")?;
            fmt_term(right, 3, f)?;
        }
        Term::Proj { seq, idx } => {
            write!(f, "p(")?;
            fmt_term(seq, 0, f)?;
            write!(f, ", ")?;
            fmt_term(idx, 0, f)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, 0, f)
    }
}

// Formula precedence levels: quantifiers 0 (their body runs to the right),
// \/ 1, /\ 2, ~ 3, atoms 4.
fn formula_prec(phi: &Formula) -> u8 {
    match phi {
        Formula::Forall { .. } | Formula::Exists { .. } => 0,
        Formula::Or { .. } => 1,
        Formula::And { .. } => 2,
        Formula::Not { .. } => 3,
        Formula::Eq { .. } | Formula::Lt { .. } | Formula::Pred { .. } => 4,
    }
}

/// Recognize `forall v. (~(v < t) \/ body)` and `exists v. (v < t /\ body)`
/// where `v` is not free in `t` — the shapes the bounded sugar produces.
fn bounded_form(phi: &Formula) -> Option<(&'static str, Variable, &Term, &Formula)> {
    match phi {
        Formula::Forall { var, body } => {
            if let Formula::Or { left, right } = body.as_ref() {
                if let Formula::Not { arg } = left.as_ref() {
                    if let Formula::Lt { left: lv, right: bound } = arg.as_ref() {
                        if lv == &Term::var(*var) && !bound.variables().contains(var) {
                            return Some(("forall", *var, bound, right));
                        }
                    }
                }
            }
            None
        }
        Formula::Exists { var, body } => {
            if let Formula::And { left, right } = body.as_ref() {
                if let Formula::Lt { left: lv, right: bound } = left.as_ref() {
                    if lv == &Term::var(*var) && !bound.variables().contains(var) {
                        return Some(("exists", *var, bound, right));
                    }
                }
            }
            None
        }
        _ => None,
    }
}

fn fmt_formula(phi: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = formula_prec(phi);
    let parens = prec < ctx;
    if parens {
        write!(f, "(")?;
    }
    if let Some((kw, var, bound, body)) = bounded_form(phi) {
        write!(f, "{kw} {var} < ")?;
        fmt_term(bound, 0, f)?;
        write!(f, ". ")?;
        fmt_formula(body, 0, f)?;
    } else {
        match phi {
            Formula::Eq { left, right } => {
                fmt_term(left, 1, f)?;
                write!(f, " = ")?;
                fmt_term(right, 1, f)?;
            }
            Formula::Lt { left, right } => {
                fmt_term(left, 1, f)?;
                write!(f, " < ")?;
                fmt_term(right, 1, f)?;
            }
            Formula::Not { arg } => {
                write!(f, "~")?;
                fmt_formula(arg, 3, f)?;
            }
            Formula::And { left, right } => {
                fmt_formula(left, 2, f)?;
                write!(f, " /\\ ")?;
                fmt_formula(right, 3, f)?;
            }
            Formula::Or { left, right } => {
                fmt_formula(left, 1, f)?;
                write!(f, " \\/ ")?;
                fmt_formula(right, 2, f)?;
            }
            Formula::Forall { var, body } => {
                write!(f, "forall {var}. ")?;
                fmt_formula(body, 0, f)?;
            }
            Formula::Exists { var, body } => {
                write!(f, "exists {var}. ")?;
                fmt_formula(body, 0, f)?;
            }
            Formula::Pred { name, arg } => {
                write!(f, "{name}(")?;
                fmt_term(arg, 0, f)?;
                write!(f, ")")?;
            }
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, parse_term};

    fn roundtrip_formula(s: &str) {
        let ast = parse_formula(s).unwrap();
        let printed = ast.to_string();
        let back = parse_formula(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        assert_eq!(back, ast, "print/parse changed `{s}` (printed `{printed}`)");
    }

    #[test]
    fn print_terms() {
        assert_eq!(parse_term("v1 + v2 * v3").unwrap().to_string(), "v1 + v2 * v3");
        assert_eq!(
            parse_term("(v1 + v2) * v3").unwrap().to_string(),
            "(v1 + v2) * v3"
        );
        assert_eq!(
            parse_term("0 + (S(0) + S(S(0)))").unwrap().to_string(),
            "0 + (S(0) + S(S(0)))"
        );
        assert_eq!(parse_term("p(v1, #3)").unwrap().to_string(), "p(v1, #3)");
    }

    #[test]
    fn print_formulas() {
        assert_eq!(
            parse_formula("(0 = 0 \\/ 0 = 0) /\\ 0 = 0").unwrap().to_string(),
            "(0 = 0 \\/ 0 = 0) /\\ 0 = 0"
        );
        assert_eq!(
            parse_formula("~(0 = 0 /\\ 0 = 0)").unwrap().to_string(),
            "~(0 = 0 /\\ 0 = 0)"
        );
        assert_eq!(
            parse_formula("~~0 = 0").unwrap().to_string(),
            "~~0 = 0"
        );
    }

    #[test]
    fn resugars_bounded_quantifiers() {
        let phi = parse_formula("forall v1 < v2. v1 = v1").unwrap();
        assert_eq!(phi.to_string(), "forall v1 < v2. v1 = v1");
        let phi = parse_formula("exists v1 < S(S(0)). v1 = S(0)").unwrap();
        assert_eq!(phi.to_string(), "exists v1 < S(S(0)). v1 = S(0)");
        // Desugared input prints back in sugared form; the tree is the same.
        let phi = parse_formula("forall v1. ~(v1 < v2) \\/ v1 = v1").unwrap();
        assert_eq!(phi.to_string(), "forall v1 < v2. v1 = v1");
    }

    #[test]
    fn no_resugar_when_bound_mentions_binder() {
        let phi = parse_formula("exists v1. v1 < v1 + v2 /\\ v1 = 0").unwrap();
        assert_eq!(phi.to_string(), "exists v1. v1 < v1 + v2 /\\ v1 = 0");
    }

    #[test]
    fn roundtrips() {
        for s in [
            "0 = 0",
            "exists v1. S(S(v1)) + S(v2) = S(S(v3))",
            "forall v1. forall v2. v1 + v2 = v2 + v1",
            "~(e1 = e2) \\/ w = w",
            "P(v1 + v2) /\\ ~Q(0)",
            "forall v1 < v2. exists v3 < v1. v3 * v3 = v1",
            "p(p(v1, S(0)), S(S(0))) = #19",
            "(0 = 0 \\/ 0 < S(0)) /\\ ~(S(0) = 0 \\/ 0 = 0)",
            "exists v1. exists v2. (v1 < v2 \\/ v2 < v1) /\\ ~v1 = v2",
        ] {
            roundtrip_formula(s);
        }
    }
}
