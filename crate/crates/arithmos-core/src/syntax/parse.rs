//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula  := disjunction
//! disjunction := conjunction ("\/" conjunction)*        (left associative)
//! conjunction := negation ("/\" negation)*              (left associative)
//! negation := "~" negation | quantifier | atom
//! quantifier := ("forall" | "exists") v-list ("<" term)? "." formula
//! atom     := "(" formula ")" | P-R "(" term ")" | term ("=" | "<" | ">") term
//! term     := factor ("+" factor)*                      (left associative)
//! factor   := primary ("*" primary)*                    (left associative)
//! primary  := "0" | "#" digits | "S" "(" term ")" | "p" "(" term "," term ")"
//!           | "v" digits | "e" digits | "w" | "(" term ")"
//! ```
//!
//! `forall v1 < t. φ` is sugar for `forall v1. (~(v1 < t) \/ φ)` and
//! `exists v1 < t. φ` for `exists v1. (v1 < t /\ φ)`; a comma-separated
//! binder list nests quantifiers of the same shape. `s > t` is sugar for
//! `t < s`. `#n` is the compact numeral literal for the value `n`.

use super::{Formula, Term, Variable};
use num_bigint::BigUint;
use std::str::FromStr;
use thiserror::Error;

/// A syntax error with the byte offset where parsing failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Parse a formula; the whole input must be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parse a term; the whole input must be consumed.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text);
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            let after = self.src.get(self.pos + kw.len());
            if !matches!(after, Some(c) if c.is_ascii_alphanumeric()) {
                self.pos += kw.len();
                return true;
            }
        }
        false
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn digits(&mut self) -> Result<&'a str, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn index(&mut self) -> Result<u32, ParseError> {
        let pos = self.pos;
        let ds = self.digits()?;
        let n: u32 = ds
            .parse()
            .map_err(|_| ParseError { position: pos, message: "index too large".into() })?;
        if n == 0 {
            return Err(ParseError { position: pos, message: "indices start at 1".into() });
        }
        Ok(n)
    }

    // -- formulas ----------------------------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.disjunction()
    }

    fn quantifier(&mut self, universal: bool) -> Result<Formula, ParseError> {
        let mut binders = vec![self.binder()?];
        while self.eat(",") {
            binders.push(self.binder()?);
        }
        let bound = if self.eat("<") { Some(self.term()?) } else { None };
        self.expect(".")?;
        let mut body = self.formula()?;
        for v in binders.into_iter().rev() {
            body = match (&bound, universal) {
                (Some(b), true) => Formula::forall_below(v, b.clone(), body),
                (Some(b), false) => Formula::exists_below(v, b.clone(), body),
                (None, true) => Formula::forall(v, body),
                (None, false) => Formula::exists(v, body),
            };
        }
        Ok(body)
    }

    fn binder(&mut self) -> Result<Variable, ParseError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'v') {
            self.pos += 1;
            Ok(Variable::obj(self.index()?))
        } else {
            self.err("expected a variable binder `v<index>`")
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.eat("\\/") {
            let r = self.conjunction()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.negation()?;
        while self.eat("/\\") {
            let r = self.negation()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn negation(&mut self) -> Result<Formula, ParseError> {
        if self.eat("~") {
            return Ok(Formula::not(self.negation()?));
        }
        // A quantifier may start here; its body then extends as far right as
        // possible ("a /\ forall v1. b /\ c" reads the tail greedily).
        if self.eat_keyword("forall") {
            return self.quantifier(true);
        }
        if self.eat_keyword("exists") {
            return self.quantifier(false);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'P') | Some(b'Q') | Some(b'R') => {
                let name = (self.bump().unwrap() as char).to_string();
                self.expect("(")?;
                let arg = self.term()?;
                self.skip_ws();
                if self.src.get(self.pos) == Some(&b',') {
                    return self.err("predicate holes are unary");
                }
                self.expect(")")?;
                return Ok(Formula::Pred { name, arg });
            }
            Some(b'(') => {
                // Could be a parenthesized formula or a parenthesized term
                // starting a comparison; try the comparison first and fall
                // back on failure.
                let save = self.pos;
                if let Ok(f) = self.comparison() {
                    return Ok(f);
                }
                self.pos = save;
                self.expect("(")?;
                let f = self.formula()?;
                self.expect(")")?;
                return Ok(f);
            }
            _ => {}
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let left = self.term()?;
        self.skip_ws();
        if self.eat("=") {
            let right = self.term()?;
            Ok(Formula::eq(left, right))
        } else if self.eat("<") {
            let right = self.term()?;
            Ok(Formula::lt(left, right))
        } else if self.eat(">") {
            let right = self.term()?;
            Ok(Formula::lt(right, left))
        } else {
            self.err("expected `=`, `<` or `>`")
        }
    }

    // -- terms -------------------------------------------------------------

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.factor()?;
        loop {
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b'+') {
                self.pos += 1;
                let r = self.factor()?;
                t = Term::add(t, r);
            } else {
                return Ok(t);
            }
        }
    }

    fn factor(&mut self) -> Result<Term, ParseError> {
        let mut t = self.primary()?;
        loop {
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b'*') {
                self.pos += 1;
                let r = self.primary()?;
                t = Term::mul(t, r);
            } else {
                return Ok(t);
            }
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.src.get(self.pos).copied() {
            Some(b'0') => {
                self.pos += 1;
                Ok(Term::Zero)
            }
            Some(b'#') => {
                self.pos += 1;
                let pos = self.pos;
                let ds = self.digits()?;
                let value = BigUint::from_str(ds)
                    .map_err(|_| ParseError { position: pos, message: "bad literal".into() })?;
                Ok(Term::Num { value })
            }
            Some(b'S') => {
                self.pos += 1;
                self.expect("(")?;
                let t = self.term()?;
                self.expect(")")?;
                Ok(Term::succ(t))
            }
            Some(b'p') => {
                self.pos += 1;
                self.expect("(")?;
                let seq = self.term()?;
                self.expect(",")?;
                let idx = self.term()?;
                self.expect(")")?;
                Ok(Term::proj(seq, idx))
            }
            Some(b'v') => {
                self.pos += 1;
                Ok(Term::v(self.index()?))
            }
            Some(b'e') => {
                self.pos += 1;
                Ok(Term::e(self.index()?))
            }
            Some(b'w') => {
                // `w` is a keyword; `w1` would be a syntax error.
                if matches!(self.src.get(self.pos + 1), Some(c) if c.is_ascii_alphanumeric()) {
                    return self.err("`w` takes no index");
                }
                self.pos += 1;
                Ok(Term::w())
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            _ => self.err("expected a term"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms_and_terms() {
        assert_eq!(parse_formula("0 = 0").unwrap(), Formula::eq(Term::Zero, Term::Zero));
        assert_eq!(
            parse_term("p(v1, S(0))").unwrap(),
            Term::proj(Term::v(1), Term::succ(Term::Zero))
        );
        assert_eq!(parse_term("#12").unwrap(), Term::num(12u32));
    }

    #[test]
    fn precedence_and_associativity() {
        // * binds tighter than +, both associate left.
        assert_eq!(
            parse_term("v1 + v2 * v3 + v4").unwrap(),
            Term::add(
                Term::add(Term::v(1), Term::mul(Term::v(2), Term::v(3))),
                Term::v(4)
            )
        );
        // /\ binds tighter than \/.
        assert_eq!(
            parse_formula("0 = 0 \\/ 0 = 0 /\\ 0 < S(0)").unwrap(),
            Formula::or(
                Formula::eq(Term::Zero, Term::Zero),
                Formula::and(
                    Formula::eq(Term::Zero, Term::Zero),
                    Formula::lt(Term::Zero, Term::succ(Term::Zero))
                )
            )
        );
    }

    #[test]
    fn quantifier_sugar() {
        assert_eq!(
            parse_formula("forall v1 < v2. P(v1)").unwrap(),
            Formula::forall_below(Variable::obj(1), Term::v(2), Formula::pred("P", Term::v(1)))
        );
        assert_eq!(
            parse_formula("exists v1 < S(0). v1 = 0").unwrap(),
            Formula::exists_below(
                Variable::obj(1),
                Term::succ(Term::Zero),
                Formula::eq(Term::v(1), Term::Zero)
            )
        );
        assert_eq!(
            parse_formula("exists v1, v2. v1 = v2").unwrap(),
            Formula::exists(
                Variable::obj(1),
                Formula::exists(Variable::obj(2), Formula::eq(Term::v(1), Term::v(2)))
            )
        );
    }

    #[test]
    fn greater_than_swaps() {
        assert_eq!(
            parse_formula("v1 > v2").unwrap(),
            Formula::lt(Term::v(2), Term::v(1))
        );
    }

    #[test]
    fn parenthesized_term_comparison() {
        assert_eq!(
            parse_formula("(v1 + v2) = 0").unwrap(),
            Formula::eq(Term::add(Term::v(1), Term::v(2)), Term::Zero)
        );
        assert_eq!(
            parse_formula("(0 = 0)").unwrap(),
            Formula::eq(Term::Zero, Term::Zero)
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_formula("0 =").is_err());
        assert!(parse_formula("forall x1. 0 = 0").is_err());
        assert!(parse_formula("P(0, 0)").is_err());
        assert!(parse_term("v0").is_err());
        assert!(parse_term("w3").is_err());
        let err = parse_formula("0 ? 0").unwrap_err();
        assert!(err.position > 0);
    }
}
