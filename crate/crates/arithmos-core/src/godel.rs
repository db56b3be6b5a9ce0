//! Gödel numbering for terms, formulas and finite sequences.
//!
//! Every syntactic object is flattened into a stream of base-256 digits and
//! read off as a single natural number.  Digits are written in postorder
//! (operands before the symbol that combines them) with the least
//! significant digit first, so the outermost symbol always owns the most
//! significant digit.  Symbols that carry a number — variable indices,
//! binder indices, predicate letters, compact numerals, sequence elements —
//! prefix their marker digit with that number written in little-endian
//! base-64 chunks, each chunk stored as a digit in `192..=255`.
//!
//! Two consequences of this layout are relied on throughout the crate:
//!
//! * no digit is ever zero, so a code with `d` digits is at least
//!   `256^(d-1)`; any proper subtree has strictly fewer digits and hence a
//!   strictly smaller code, which makes structural recursion on codes
//!   well-founded along `<`;
//! * decoding is one forward scan with a stack, so validity of a candidate
//!   code is checkable in a single pass over its digits.
//!
//! Finite sequences of naturals get codes in the same digit alphabet: one
//! payload-carrying element marker per entry and a closing end marker.
//! Projection is 1-based and out-of-range projection is an error, never a
//! default value.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Formula, Term, VarKind, Variable};

/// Radix of the digit stream.
pub const BASE: u32 = 256;

const M_ZERO: u8 = 1;
const M_SUCC: u8 = 2;
const M_ADD: u8 = 3;
const M_MUL: u8 = 4;
const M_PROJ: u8 = 5;
const M_VAR: u8 = 6;
const M_EQ: u8 = 7;
const M_LT: u8 = 8;
const M_NOT: u8 = 9;
const M_AND: u8 = 10;
const M_OR: u8 = 11;
const M_FORALL: u8 = 12;
const M_EXISTS: u8 = 13;
const M_PRED: u8 = 14;
const M_SLOT: u8 = 15;
const M_W: u8 = 16;
const M_NUM: u8 = 17;
const M_SEQ_ELEM: u8 = 18;
const M_SEQ_END: u8 = 19;

/// First digit value used for payload chunks; chunks occupy `192..=255`.
const PAYLOAD_FLOOR: u8 = 192;

/// Marker digit of every symbol together with a printable name, in digit
/// order.  Exposed so tools can dump the digit alphabet next to a code.
pub fn marker_table() -> &'static [(u8, &'static str)] {
    &[
        (M_ZERO, "0"),
        (M_SUCC, "S"),
        (M_ADD, "+"),
        (M_MUL, "*"),
        (M_PROJ, "p"),
        (M_VAR, "var"),
        (M_EQ, "="),
        (M_LT, "<"),
        (M_NOT, "~"),
        (M_AND, "/\\"),
        (M_OR, "\\/"),
        (M_FORALL, "forall"),
        (M_EXISTS, "exists"),
        (M_PRED, "pred"),
        (M_SLOT, "slot"),
        (M_W, "w"),
        (M_NUM, "num"),
        (M_SEQ_ELEM, "seq-elem"),
        (M_SEQ_END, "seq-end"),
    ]
}

fn symbol_name(digit: u8) -> &'static str {
    marker_table()
        .iter()
        .find(|(d, _)| *d == digit)
        .map(|(_, name)| *name)
        .unwrap_or("?")
}

/// Things that can go wrong while decoding or operating on codes.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum CodeError {
    #[error("0 is not the code of anything")]
    Empty,
    #[error("digit {digit} at position {pos} is not in the code alphabet")]
    BadDigit { pos: usize, digit: u8 },
    #[error("payload at position {pos} is not attached to a payload-bearing symbol")]
    StrayPayload { pos: usize },
    #[error("payload ending at position {pos} has a trailing zero chunk")]
    NonCanonicalPayload { pos: usize },
    #[error("symbol `{symbol}` at position {pos} requires a nonzero payload")]
    MissingPayload { pos: usize, symbol: &'static str },
    #[error("payload {value} at position {pos} is out of range for `{symbol}`")]
    PayloadRange {
        pos: usize,
        value: BigUint,
        symbol: &'static str,
    },
    #[error("symbol `{symbol}` at position {pos} has too few operands")]
    MissingOperand { pos: usize, symbol: &'static str },
    #[error("symbol `{symbol}` at position {pos} expects a {expected} operand")]
    OperandKind {
        pos: usize,
        symbol: &'static str,
        expected: &'static str,
    },
    #[error("decoding finished with {count} disconnected pieces instead of one")]
    Unfinished { count: usize },
    #[error("expected the code of a {expected}, found a {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("{value} does not code a sequence")]
    NotASequence { value: BigUint },
    #[error("projection index {index} is out of range for a sequence of length {length}")]
    Projection { index: BigUint, length: usize },
    #[error("term contains {kind} and has no numeric value")]
    NonArithmetic { kind: &'static str },
    #[error("variable v{index} has no value in the environment")]
    UnboundVariable { index: u32 },
    #[error("substitution sequence has length {length} but the target mentions v{index}")]
    TooShort { length: usize, index: u32 },
    #[error("sequence element {index}: {source}")]
    BadElement {
        index: usize,
        #[source]
        source: Box<CodeError>,
    },
}

/// The code of a finite sequence of naturals, kept together with its length
/// so callers do not have to re-scan the digits to range-check projections.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SequenceCode {
    #[serde(with = "crate::syntax::biguint_decimal")]
    pub value: BigUint,
    pub length: usize,
}

impl SequenceCode {
    /// Re-reads a sequence code from its numeric value.
    pub fn from_value(value: BigUint) -> Result<Self, CodeError> {
        match decode_any(&value)? {
            Decoded::Sequence(items) => Ok(SequenceCode {
                value,
                length: items.len(),
            }),
            other => Err(CodeError::WrongKind {
                expected: "sequence",
                found: other.kind_name(),
            }),
        }
    }

    /// The entries of the sequence, in order.
    pub fn elements(&self) -> Result<Vec<BigUint>, CodeError> {
        match decode_any(&self.value)? {
            Decoded::Sequence(items) => Ok(items),
            other => Err(CodeError::WrongKind {
                expected: "sequence",
                found: other.kind_name(),
            }),
        }
    }
}

impl fmt::Display for SequenceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.elements() {
            Ok(items) => {
                write!(f, "<")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ">")
            }
            Err(_) => write!(f, "<invalid sequence {}>", self.value),
        }
    }
}

/// Result of decoding an arbitrary natural number.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Decoded {
    Term(Term),
    Formula(Formula),
    Sequence(Vec<BigUint>),
}

impl Decoded {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Decoded::Term(_) => "term",
            Decoded::Formula(_) => "formula",
            Decoded::Sequence(_) => "sequence",
        }
    }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

fn push_payload(digits: &mut Vec<u8>, value: &BigUint) {
    if value.is_zero() {
        return;
    }
    for chunk in value.to_radix_le(64) {
        digits.push(PAYLOAD_FLOOR + chunk);
    }
}

fn push_payload_u32(digits: &mut Vec<u8>, value: u32) {
    push_payload(digits, &BigUint::from(value));
}

fn pred_letter_code(name: &str) -> u32 {
    match name {
        "P" => 1,
        "Q" => 2,
        "R" => 3,
        other => panic!("predicate letter must be P, Q or R, not {other:?}"),
    }
}

fn pred_letter_name(code: u32) -> Option<&'static str> {
    match code {
        1 => Some("P"),
        2 => Some("Q"),
        3 => Some("R"),
        _ => None,
    }
}

fn push_term(digits: &mut Vec<u8>, t: &Term) {
    match t {
        Term::Zero => digits.push(M_ZERO),
        Term::Succ { arg } => {
            push_term(digits, arg);
            digits.push(M_SUCC);
        }
        Term::Add { left, right } => {
            push_term(digits, left);
            push_term(digits, right);
            digits.push(M_ADD);
        }
        Term::Mul { left, right } => {
            push_term(digits, left);
            push_term(digits, right);
            digits.push(M_MUL);
        }
        Term::Proj { seq, idx } => {
            push_term(digits, seq);
            push_term(digits, idx);
            digits.push(M_PROJ);
        }
        Term::Var { var } => match var.kind {
            VarKind::Object => {
                push_payload_u32(digits, var.index);
                digits.push(M_VAR);
            }
            VarKind::Slot => {
                push_payload_u32(digits, var.index);
                digits.push(M_SLOT);
            }
            VarKind::Marker => digits.push(M_W),
        },
        Term::Num { value } => {
            push_payload(digits, value);
            digits.push(M_NUM);
        }
    }
}

fn push_formula(digits: &mut Vec<u8>, f: &Formula) {
    match f {
        Formula::Eq { left, right } => {
            push_term(digits, left);
            push_term(digits, right);
            digits.push(M_EQ);
        }
        Formula::Lt { left, right } => {
            push_term(digits, left);
            push_term(digits, right);
            digits.push(M_LT);
        }
        Formula::Not { arg } => {
            push_formula(digits, arg);
            digits.push(M_NOT);
        }
        Formula::And { left, right } => {
            push_formula(digits, left);
            push_formula(digits, right);
            digits.push(M_AND);
        }
        Formula::Or { left, right } => {
            push_formula(digits, left);
            push_formula(digits, right);
            digits.push(M_OR);
        }
        Formula::Forall { var, body } => {
            push_formula(digits, body);
            push_payload_u32(digits, var.index);
            digits.push(M_FORALL);
        }
        Formula::Exists { var, body } => {
            push_formula(digits, body);
            push_payload_u32(digits, var.index);
            digits.push(M_EXISTS);
        }
        Formula::Pred { name, arg } => {
            push_term(digits, arg);
            push_payload_u32(digits, pred_letter_code(name));
            digits.push(M_PRED);
        }
    }
}

fn digits_to_value(digits: &[u8]) -> BigUint {
    BigUint::from_radix_le(digits, BASE).expect("digits fit in the radix")
}

/// Gödel code of a term.
pub fn encode_term(t: &Term) -> BigUint {
    let mut digits = Vec::new();
    push_term(&mut digits, t);
    digits_to_value(&digits)
}

/// Gödel code of a formula.
pub fn encode_formula(f: &Formula) -> BigUint {
    let mut digits = Vec::new();
    push_formula(&mut digits, f);
    digits_to_value(&digits)
}

/// Code of the finite sequence with the given entries.
pub fn encode_sequence(items: &[BigUint]) -> SequenceCode {
    let mut digits = Vec::new();
    for item in items {
        push_payload(&mut digits, item);
        digits.push(M_SEQ_ELEM);
    }
    digits.push(M_SEQ_END);
    SequenceCode {
        value: digits_to_value(&digits),
        length: items.len(),
    }
}

/// The code of the explicit numeral `S(S(...S(0)...))` with `n` steps.
///
/// The digit stream is one `0` leaf followed by `n` successor digits, so
/// the result has `n + 1` digits; keep `n` modest.
pub fn numeral_code(n: u64) -> BigUint {
    let mut digits = vec![M_ZERO];
    digits.extend(std::iter::repeat(M_SUCC).take(n as usize));
    digits_to_value(&digits)
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

enum Piece {
    T(Term),
    F(Formula),
}

/// Collects a finished payload, enforcing canonical form: the chunk list is
/// empty exactly when the value is zero, and never ends in a zero chunk.
fn take_payload(chunks: &mut Vec<u8>, pos: usize) -> Result<BigUint, CodeError> {
    if chunks.is_empty() {
        return Ok(BigUint::zero());
    }
    if *chunks.last().unwrap() == 0 {
        return Err(CodeError::NonCanonicalPayload { pos });
    }
    let value = BigUint::from_radix_le(chunks, 64).expect("chunks fit in the radix");
    chunks.clear();
    Ok(value)
}

fn payload_index(
    payload: BigUint,
    pos: usize,
    symbol: &'static str,
) -> Result<u32, CodeError> {
    if payload.is_zero() {
        return Err(CodeError::MissingPayload { pos, symbol });
    }
    payload.to_u32().ok_or(CodeError::PayloadRange {
        pos,
        value: payload,
        symbol,
    })
}

fn expect_no_payload(
    payload: &BigUint,
    pos: usize,
) -> Result<(), CodeError> {
    if payload.is_zero() {
        Ok(())
    } else {
        // The payload ended one digit before the marker we are looking at.
        Err(CodeError::StrayPayload { pos: pos - 1 })
    }
}

fn pop_term(
    stack: &mut Vec<Piece>,
    pos: usize,
    symbol: &'static str,
) -> Result<Term, CodeError> {
    match stack.pop() {
        Some(Piece::T(t)) => Ok(t),
        Some(Piece::F(_)) => Err(CodeError::OperandKind {
            pos,
            symbol,
            expected: "term",
        }),
        None => Err(CodeError::MissingOperand { pos, symbol }),
    }
}

fn pop_formula(
    stack: &mut Vec<Piece>,
    pos: usize,
    symbol: &'static str,
) -> Result<Formula, CodeError> {
    match stack.pop() {
        Some(Piece::F(f)) => Ok(f),
        Some(Piece::T(_)) => Err(CodeError::OperandKind {
            pos,
            symbol,
            expected: "formula",
        }),
        None => Err(CodeError::MissingOperand { pos, symbol }),
    }
}

fn decode_sequence_digits(digits: &[u8]) -> Result<Vec<BigUint>, CodeError> {
    let mut items = Vec::new();
    let mut chunks: Vec<u8> = Vec::new();
    for (pos, &digit) in digits.iter().enumerate() {
        if digit >= PAYLOAD_FLOOR {
            chunks.push(digit - PAYLOAD_FLOOR);
            continue;
        }
        match digit {
            M_SEQ_ELEM => items.push(take_payload(&mut chunks, pos)?),
            M_SEQ_END if pos == digits.len() - 1 => {
                let leftover = take_payload(&mut chunks, pos)?;
                expect_no_payload(&leftover, pos)?;
                return Ok(items);
            }
            _ => return Err(CodeError::BadDigit { pos, digit }),
        }
    }
    unreachable!("the caller checked that the last digit closes a sequence")
}

/// Decodes an arbitrary natural number as a term, formula or sequence.
pub fn decode_any(code: &BigUint) -> Result<Decoded, CodeError> {
    if code.is_zero() {
        return Err(CodeError::Empty);
    }
    let digits = code.to_radix_le(BASE);
    if *digits.last().unwrap() == M_SEQ_END {
        return decode_sequence_digits(&digits).map(Decoded::Sequence);
    }

    let mut stack: Vec<Piece> = Vec::new();
    let mut chunks: Vec<u8> = Vec::new();
    for (pos, &digit) in digits.iter().enumerate() {
        if digit >= PAYLOAD_FLOOR {
            chunks.push(digit - PAYLOAD_FLOOR);
            continue;
        }
        let payload = take_payload(&mut chunks, pos)?;
        let symbol = symbol_name(digit);
        match digit {
            M_ZERO => {
                expect_no_payload(&payload, pos)?;
                stack.push(Piece::T(Term::Zero));
            }
            M_SUCC => {
                expect_no_payload(&payload, pos)?;
                let arg = pop_term(&mut stack, pos, symbol)?;
                stack.push(Piece::T(Term::succ(arg)));
            }
            M_ADD | M_MUL => {
                expect_no_payload(&payload, pos)?;
                let right = pop_term(&mut stack, pos, symbol)?;
                let left = pop_term(&mut stack, pos, symbol)?;
                let t = if digit == M_ADD {
                    Term::add(left, right)
                } else {
                    Term::mul(left, right)
                };
                stack.push(Piece::T(t));
            }
            M_PROJ => {
                expect_no_payload(&payload, pos)?;
                let idx = pop_term(&mut stack, pos, symbol)?;
                let seq = pop_term(&mut stack, pos, symbol)?;
                stack.push(Piece::T(Term::proj(seq, idx)));
            }
            M_VAR => {
                let index = payload_index(payload, pos, symbol)?;
                stack.push(Piece::T(Term::v(index)));
            }
            M_SLOT => {
                let index = payload_index(payload, pos, symbol)?;
                stack.push(Piece::T(Term::e(index)));
            }
            M_W => {
                expect_no_payload(&payload, pos)?;
                stack.push(Piece::T(Term::w()));
            }
            M_NUM => {
                stack.push(Piece::T(Term::num(payload)));
            }
            M_EQ | M_LT => {
                expect_no_payload(&payload, pos)?;
                let right = pop_term(&mut stack, pos, symbol)?;
                let left = pop_term(&mut stack, pos, symbol)?;
                let f = if digit == M_EQ {
                    Formula::eq(left, right)
                } else {
                    Formula::lt(left, right)
                };
                stack.push(Piece::F(f));
            }
            M_NOT => {
                expect_no_payload(&payload, pos)?;
                let arg = pop_formula(&mut stack, pos, symbol)?;
                stack.push(Piece::F(Formula::not(arg)));
            }
            M_AND | M_OR => {
                expect_no_payload(&payload, pos)?;
                let right = pop_formula(&mut stack, pos, symbol)?;
                let left = pop_formula(&mut stack, pos, symbol)?;
                let f = if digit == M_AND {
                    Formula::and(left, right)
                } else {
                    Formula::or(left, right)
                };
                stack.push(Piece::F(f));
            }
            M_FORALL | M_EXISTS => {
                let index = payload_index(payload, pos, symbol)?;
                let body = pop_formula(&mut stack, pos, symbol)?;
                let var = Variable::obj(index);
                let f = if digit == M_FORALL {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                };
                stack.push(Piece::F(f));
            }
            M_PRED => {
                let letter = payload_index(payload, pos, symbol)?;
                let name = pred_letter_name(letter).ok_or(CodeError::PayloadRange {
                    pos,
                    value: BigUint::from(letter),
                    symbol,
                })?;
                let arg = pop_term(&mut stack, pos, symbol)?;
                stack.push(Piece::F(Formula::pred(name, arg)));
            }
            _ => return Err(CodeError::BadDigit { pos, digit }),
        }
    }
    if !chunks.is_empty() {
        return Err(CodeError::StrayPayload {
            pos: digits.len() - 1,
        });
    }
    if stack.len() != 1 {
        return Err(CodeError::Unfinished { count: stack.len() });
    }
    Ok(match stack.pop().unwrap() {
        Piece::T(t) => Decoded::Term(t),
        Piece::F(f) => Decoded::Formula(f),
    })
}

/// Decodes a code that must be a term.
pub fn decode_term(code: &BigUint) -> Result<Term, CodeError> {
    match decode_any(code)? {
        Decoded::Term(t) => Ok(t),
        other => Err(CodeError::WrongKind {
            expected: "term",
            found: other.kind_name(),
        }),
    }
}

/// Decodes a code that must be a formula.
pub fn decode_formula(code: &BigUint) -> Result<Formula, CodeError> {
    match decode_any(code)? {
        Decoded::Formula(f) => Ok(f),
        other => Err(CodeError::WrongKind {
            expected: "formula",
            found: other.kind_name(),
        }),
    }
}

/// Decodes a code that must be a sequence, returning its entries.
pub fn decode_sequence(code: &BigUint) -> Result<Vec<BigUint>, CodeError> {
    match decode_any(code)? {
        Decoded::Sequence(items) => Ok(items),
        other => Err(CodeError::WrongKind {
            expected: "sequence",
            found: other.kind_name(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Sequence operations
// ---------------------------------------------------------------------------

/// 1-based projection out of a sequence code.
pub fn project(seq: &SequenceCode, index: usize) -> Result<BigUint, CodeError> {
    let items = seq.elements()?;
    if index == 0 || index > items.len() {
        return Err(CodeError::Projection {
            index: BigUint::from(index),
            length: items.len(),
        });
    }
    Ok(items[index - 1].clone())
}

/// Entrywise value of a sequence of closed term codes.
pub fn value_of_term_sequence(seq: &SequenceCode) -> Result<SequenceCode, CodeError> {
    let env = BTreeMap::new();
    let mut values = Vec::new();
    for (i, item) in seq.elements()?.iter().enumerate() {
        let wrap = |source: CodeError| CodeError::BadElement {
            index: i + 1,
            source: Box::new(source),
        };
        let term = decode_term(item).map_err(wrap)?;
        values.push(term_value(&term, &env).map_err(wrap)?);
    }
    Ok(encode_sequence(&values))
}

/// The starred companion of a sequence: entry `i` is the code of the term
/// `p(#s, numeral(i))`, where `s` is the sequence's own code.  Each entry is
/// a closed term whose value is the corresponding entry of the original, so
/// `value_of_term_sequence(star_sequence(s)) == s`.
pub fn star_sequence(seq: &SequenceCode) -> SequenceCode {
    let base = Term::num(seq.value.clone());
    let items: Vec<BigUint> = (1..=seq.length)
        .map(|i| encode_term(&Term::proj(base.clone(), Term::numeral(i as u64))))
        .collect();
    encode_sequence(&items)
}

// ---------------------------------------------------------------------------
// Term values
// ---------------------------------------------------------------------------

/// Value of a term over the standard model, with free variables read from
/// `env`.  Projection insists that its first argument evaluates to a valid
/// sequence code and that the index is in range; anything else is an error,
/// not a convention.
pub fn term_value(t: &Term, env: &BTreeMap<u32, BigUint>) -> Result<BigUint, CodeError> {
    match t {
        Term::Zero => Ok(BigUint::zero()),
        Term::Succ { arg } => Ok(term_value(arg, env)? + BigUint::one()),
        Term::Add { left, right } => Ok(term_value(left, env)? + term_value(right, env)?),
        Term::Mul { left, right } => Ok(term_value(left, env)? * term_value(right, env)?),
        Term::Num { value } => Ok(value.clone()),
        Term::Var { var } => match var.kind {
            VarKind::Object => env
                .get(&var.index)
                .cloned()
                .ok_or(CodeError::UnboundVariable { index: var.index }),
            VarKind::Slot => Err(CodeError::NonArithmetic {
                kind: "a placeholder",
            }),
            VarKind::Marker => Err(CodeError::NonArithmetic {
                kind: "the reserved marker w",
            }),
        },
        Term::Proj { seq, idx } => {
            let seq_value = term_value(seq, env)?;
            let items = match decode_any(&seq_value) {
                Ok(Decoded::Sequence(items)) => items,
                _ => return Err(CodeError::NotASequence { value: seq_value }),
            };
            let index = term_value(idx, env)?;
            let in_range = index
                .to_usize()
                .filter(|i| *i >= 1 && *i <= items.len());
            match in_range {
                Some(i) => Ok(items[i - 1].clone()),
                None => Err(CodeError::Projection {
                    index,
                    length: items.len(),
                }),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution on codes
// ---------------------------------------------------------------------------

fn subst_term_seq(t: &Term, repl: &[Term], shadowed: &[u32]) -> Term {
    match t {
        Term::Var { var }
            if var.is_object()
                && !shadowed.contains(&var.index)
                && (var.index as usize) <= repl.len() =>
        {
            repl[var.index as usize - 1].clone()
        }
        Term::Zero | Term::Var { .. } | Term::Num { .. } => t.clone(),
        Term::Succ { arg } => Term::succ(subst_term_seq(arg, repl, shadowed)),
        Term::Add { left, right } => Term::add(
            subst_term_seq(left, repl, shadowed),
            subst_term_seq(right, repl, shadowed),
        ),
        Term::Mul { left, right } => Term::mul(
            subst_term_seq(left, repl, shadowed),
            subst_term_seq(right, repl, shadowed),
        ),
        Term::Proj { seq, idx } => Term::proj(
            subst_term_seq(seq, repl, shadowed),
            subst_term_seq(idx, repl, shadowed),
        ),
    }
}

fn subst_formula_seq(f: &Formula, repl: &[Term], shadowed: &mut Vec<u32>) -> Formula {
    match f {
        Formula::Eq { left, right } => Formula::eq(
            subst_term_seq(left, repl, shadowed),
            subst_term_seq(right, repl, shadowed),
        ),
        Formula::Lt { left, right } => Formula::lt(
            subst_term_seq(left, repl, shadowed),
            subst_term_seq(right, repl, shadowed),
        ),
        Formula::Not { arg } => Formula::not(subst_formula_seq(arg, repl, shadowed)),
        Formula::And { left, right } => Formula::and(
            subst_formula_seq(left, repl, shadowed),
            subst_formula_seq(right, repl, shadowed),
        ),
        Formula::Or { left, right } => Formula::or(
            subst_formula_seq(left, repl, shadowed),
            subst_formula_seq(right, repl, shadowed),
        ),
        Formula::Forall { var, body } | Formula::Exists { var, body } => {
            if var.is_object() {
                shadowed.push(var.index);
            }
            let new_body = subst_formula_seq(body, repl, shadowed);
            if var.is_object() {
                shadowed.pop();
            }
            match f {
                Formula::Forall { .. } => Formula::forall(var.clone(), new_body),
                _ => Formula::exists(var.clone(), new_body),
            }
        }
        Formula::Pred { name, arg } => {
            Formula::pred(name, subst_term_seq(arg, repl, shadowed))
        }
    }
}

/// Simultaneous substitution on codes: free occurrences of `v1..vk` in the
/// coded term or formula are replaced by the terms coded by the entries of
/// `seq`, which must be at least as long as the largest free variable index.
/// Occurrences under a binder of the same variable are left alone; binders
/// are never renamed, so substituting open terms can capture — callers that
/// care pass closed terms.
pub fn subst_sequence(code: &BigUint, seq: &SequenceCode) -> Result<BigUint, CodeError> {
    let mut repl = Vec::new();
    for (i, item) in seq.elements()?.iter().enumerate() {
        repl.push(decode_term(item).map_err(|source| CodeError::BadElement {
            index: i + 1,
            source: Box::new(source),
        })?);
    }
    let check_short = |vars: &std::collections::BTreeSet<Variable>| -> Result<(), CodeError> {
        for v in vars {
            if v.is_object() && v.index as usize > repl.len() {
                return Err(CodeError::TooShort {
                    length: repl.len(),
                    index: v.index,
                });
            }
        }
        Ok(())
    };
    match decode_any(code)? {
        Decoded::Term(t) => {
            check_short(&t.variables())?;
            Ok(encode_term(&subst_term_seq(&t, &repl, &[])))
        }
        Decoded::Formula(f) => {
            check_short(&f.free_variables())?;
            Ok(encode_formula(&subst_formula_seq(&f, &repl, &mut Vec::new())))
        }
        other => Err(CodeError::WrongKind {
            expected: "term or formula",
            found: other.kind_name(),
        }),
    }
}

/// Membership test for finite sets coded as bitmasks: is bit `bit` of `set`
/// equal to one?
pub fn bit_member(bit: u64, set: &BigUint) -> bool {
    set.bit(bit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term};
    use proptest::prelude::*;

    fn seq_of(items: &[u64]) -> SequenceCode {
        let items: Vec<BigUint> = items.iter().map(|&n| BigUint::from(n)).collect();
        encode_sequence(&items)
    }

    #[test]
    fn golden_codes() {
        assert_eq!(encode_term(&Term::Zero), BigUint::from(1u32));
        assert_eq!(encode_term(&Term::v(1)), BigUint::from(1729u32));
        assert_eq!(
            encode_formula(&parse_formula("0 = 0").unwrap()),
            BigUint::from(459_009u32)
        );
        assert_eq!(numeral_code(3), BigUint::from(33_686_017u64));
        let empty = encode_sequence(&[]);
        assert_eq!(empty.value, BigUint::from(19u32));
        assert_eq!(empty.length, 0);
    }

    #[test]
    fn numeral_code_matches_encoded_chain() {
        for n in 0..40 {
            assert_eq!(numeral_code(n), encode_term(&Term::numeral(n)), "n = {n}");
        }
    }

    #[test]
    fn roundtrip_worked_examples() {
        let formulas = [
            "0 = 0",
            "forall v1. exists v2. v1 < v2 /\\ ~(v2 = 0)",
            "exists v3. S(v3) + v1 * v2 = S(S(0)) \\/ P(v3)",
            "Q(p(v1, S(0))) /\\ R(#123456789)",
            "forall v2 < S(S(0)). e1 = w \\/ v2 = e2",
        ];
        for text in formulas {
            let f = parse_formula(text).unwrap();
            let code = encode_formula(&f);
            assert_eq!(decode_formula(&code).unwrap(), f, "{text}");
        }
        let terms = ["p(p(v1, v2), S(w))", "#0", "S(#63) * (0 + e7)"];
        for text in terms {
            let t = parse_term(text).unwrap();
            let code = encode_term(&t);
            assert_eq!(decode_term(&code).unwrap(), t, "{text}");
        }
    }

    #[test]
    fn decode_rejects_malformed_streams() {
        let err = |digits: &[u8]| decode_any(&digits_to_value(digits)).unwrap_err();
        assert_eq!(decode_any(&BigUint::zero()).unwrap_err(), CodeError::Empty);
        assert_eq!(err(&[20]), CodeError::BadDigit { pos: 0, digit: 20 });
        assert_eq!(err(&[1, 1]), CodeError::Unfinished { count: 2 });
        assert_eq!(
            err(&[2]),
            CodeError::MissingOperand { pos: 0, symbol: "S" }
        );
        assert_eq!(
            err(&[1, 7]),
            CodeError::MissingOperand { pos: 1, symbol: "=" }
        );
        assert_eq!(
            err(&[1, 9]),
            CodeError::OperandKind {
                pos: 1,
                symbol: "~",
                expected: "formula"
            }
        );
        assert_eq!(
            err(&[192, 6]),
            CodeError::NonCanonicalPayload { pos: 1 }
        );
        assert_eq!(err(&[193, 1]), CodeError::StrayPayload { pos: 0 });
        assert_eq!(
            err(&[6]),
            CodeError::MissingPayload {
                pos: 0,
                symbol: "var"
            }
        );
        assert_eq!(
            err(&[196, 14, 1]),
            CodeError::PayloadRange {
                pos: 1,
                value: BigUint::from(4u32),
                symbol: "pred"
            }
        );
        // A sequence end digit anywhere but on top is not a sequence.
        assert_eq!(err(&[19, 2]), CodeError::BadDigit { pos: 0, digit: 19 });
        // Digit 1 is not a sequence element.
        assert_eq!(err(&[1, 19]), CodeError::BadDigit { pos: 0, digit: 1 });
    }

    #[test]
    fn projection_is_one_based_and_range_checked() {
        let seq = seq_of(&[5, 7, 9]);
        assert_eq!(seq.length, 3);
        assert_eq!(project(&seq, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(project(&seq, 3).unwrap(), BigUint::from(9u32));
        assert!(matches!(
            project(&seq, 0),
            Err(CodeError::Projection { length: 3, .. })
        ));
        assert!(matches!(
            project(&seq, 4),
            Err(CodeError::Projection { length: 3, .. })
        ));
        let again = SequenceCode::from_value(seq.value.clone()).unwrap();
        assert_eq!(again, seq);
        assert!(matches!(
            project(&encode_sequence(&[]), 1),
            Err(CodeError::Projection { length: 0, .. })
        ));
    }

    #[test]
    fn term_values() {
        let env: BTreeMap<u32, BigUint> =
            [(1, BigUint::from(10u32)), (3, BigUint::from(2u32))].into();
        let val = |text: &str| term_value(&parse_term(text).unwrap(), &env);
        assert_eq!(val("S(S(0)) + S(0) * S(S(0))").unwrap(), BigUint::from(4u32));
        assert_eq!(val("v1 * v3").unwrap(), BigUint::from(20u32));
        assert_eq!(val("#100 + S(0)").unwrap(), BigUint::from(101u32));
        assert_eq!(
            val("v2").unwrap_err(),
            CodeError::UnboundVariable { index: 2 }
        );
        assert!(matches!(
            val("e1 + 0").unwrap_err(),
            CodeError::NonArithmetic { .. }
        ));

        let seq = seq_of(&[5, 7, 9]);
        let proj = Term::proj(Term::num(seq.value.clone()), Term::numeral(2));
        assert_eq!(term_value(&proj, &env).unwrap(), BigUint::from(7u32));
        let out = Term::proj(Term::num(seq.value.clone()), Term::numeral(4));
        assert!(matches!(
            term_value(&out, &env),
            Err(CodeError::Projection { length: 3, .. })
        ));
        let not_seq = Term::proj(Term::numeral(1), Term::numeral(1));
        assert!(matches!(
            term_value(&not_seq, &env),
            Err(CodeError::NotASequence { .. })
        ));
    }

    #[test]
    fn star_sequence_inverts_under_value() {
        for items in [vec![], vec![4u64], vec![4, 1729, 0], vec![0, 0, 65, 4096]] {
            let seq = seq_of(&items);
            let star = star_sequence(&seq);
            assert_eq!(star.length, seq.length);
            assert_eq!(value_of_term_sequence(&star).unwrap(), seq);
        }
    }

    #[test]
    fn subst_sequence_replaces_free_variables() {
        let code = |text: &str| encode_formula(&parse_formula(text).unwrap());
        let terms = |texts: &[&str]| {
            let items: Vec<BigUint> = texts
                .iter()
                .map(|t| encode_term(&parse_term(t).unwrap()))
                .collect();
            encode_sequence(&items)
        };

        let phi = code("exists v2. v1 + v2 = v3");
        let tau = terms(&["S(0)", "v7", "0"]);
        assert_eq!(
            subst_sequence(&phi, &tau).unwrap(),
            code("exists v2. S(0) + v2 = 0")
        );

        // A binder of a substituted variable shields its own occurrences.
        let shadow = code("v1 = 0 /\\ forall v1. v1 = 0");
        assert_eq!(
            subst_sequence(&shadow, &terms(&["S(0)"])).unwrap(),
            code("S(0) = 0 /\\ forall v1. v1 = 0")
        );

        let needs_three = code("v3 = v3");
        assert_eq!(
            subst_sequence(&needs_three, &terms(&["0", "0"])).unwrap_err(),
            CodeError::TooShort {
                length: 2,
                index: 3
            }
        );

        // Substituting inside a term code works too.
        let t = encode_term(&parse_term("v1 + v2").unwrap());
        assert_eq!(
            subst_sequence(&t, &terms(&["S(0)", "S(S(0))"])).unwrap(),
            encode_term(&parse_term("S(0) + S(S(0))").unwrap())
        );
    }

    #[test]
    fn bit_member_reads_bitmasks() {
        let set = BigUint::from(0b10110u32);
        assert!(!bit_member(0, &set));
        assert!(bit_member(1, &set));
        assert!(bit_member(2, &set));
        assert!(!bit_member(3, &set));
        assert!(bit_member(4, &set));
        assert!(!bit_member(64, &set));
    }

    const FIRST_CODES_FIXTURE: &str = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/first_fifty_codes.json"
    );

    fn describe(decoded: &Decoded) -> String {
        match decoded {
            Decoded::Term(t) => t.to_string(),
            Decoded::Formula(f) => f.to_string(),
            Decoded::Sequence(items) => {
                let inner: Vec<String> = items.iter().map(|n| n.to_string()).collect();
                format!("<{}>", inner.join(", "))
            }
        }
    }

    /// The decode table every other golden value sits on: the digit
    /// alphabet plus the fifty smallest naturals that decode at all.
    fn first_codes_snapshot() -> serde_json::Value {
        let symbols: Vec<serde_json::Value> = marker_table()
            .iter()
            .map(|(digit, name)| serde_json::json!({ "digit": digit, "symbol": name }))
            .collect();
        let mut codes = Vec::new();
        let mut n = BigUint::one();
        while codes.len() < 50 {
            if let Ok(decoded) = decode_any(&n) {
                codes.push(serde_json::json!({
                    "code": n.to_string(),
                    "kind": decoded.kind_name(),
                    "text": describe(&decoded),
                }));
            }
            n += BigUint::one();
        }
        serde_json::json!({ "symbols": symbols, "codes": codes })
    }

    #[test]
    fn first_fifty_codes_match_fixture() {
        let fixture: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(FIRST_CODES_FIXTURE).unwrap())
                .unwrap();
        assert_eq!(first_codes_snapshot(), fixture);
    }

    /// Rewrites the committed snapshot; run with
    /// `cargo test -p arithmos-core regenerate_first_codes -- --ignored`.
    #[test]
    #[ignore]
    fn regenerate_first_codes() {
        let text = serde_json::to_string_pretty(&first_codes_snapshot()).unwrap();
        std::fs::write(FIRST_CODES_FIXTURE, text + "\n").unwrap();
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::Zero),
            (1u32..40).prop_map(Term::v),
            (1u32..8).prop_map(Term::e),
            Just(Term::w()),
            (0u64..100_000u64).prop_map(|n| Term::num(BigUint::from(n))),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Term::succ),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Term::proj(a, b)),
            ]
        })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::eq(a, b)),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::lt(a, b)),
            ("[PQR]", arb_term()).prop_map(|(n, t)| Formula::pred(&n, t)),
        ];
        atom.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                ((1u32..6), inner.clone())
                    .prop_map(|(i, f)| Formula::forall(Variable::obj(i), f)),
                ((1u32..6), inner).prop_map(|(i, f)| Formula::exists(Variable::obj(i), f)),
            ]
        })
    }

    fn subterm_codes(t: &Term, out: &mut Vec<BigUint>) {
        out.push(encode_term(t));
        match t {
            Term::Zero | Term::Var { .. } | Term::Num { .. } => {}
            Term::Succ { arg } => subterm_codes(arg, out),
            Term::Add { left, right } | Term::Mul { left, right } => {
                subterm_codes(left, out);
                subterm_codes(right, out);
            }
            Term::Proj { seq, idx } => {
                subterm_codes(seq, out);
                subterm_codes(idx, out);
            }
        }
    }

    fn proper_part_codes(f: &Formula, out: &mut Vec<BigUint>) {
        match f {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                subterm_codes(left, out);
                subterm_codes(right, out);
            }
            Formula::Not { arg } => {
                out.push(encode_formula(arg));
                proper_part_codes(arg, out);
            }
            Formula::And { left, right } | Formula::Or { left, right } => {
                out.push(encode_formula(left));
                out.push(encode_formula(right));
                proper_part_codes(left, out);
                proper_part_codes(right, out);
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
                out.push(encode_formula(body));
                proper_part_codes(body, out);
            }
            Formula::Pred { arg, .. } => subterm_codes(arg, out),
        }
    }

    proptest! {
        #[test]
        fn prop_roundtrip_formula(f in arb_formula()) {
            let code = encode_formula(&f);
            prop_assert_eq!(decode_formula(&code).unwrap(), f);
        }

        #[test]
        fn prop_roundtrip_term(t in arb_term()) {
            let code = encode_term(&t);
            prop_assert_eq!(decode_term(&code).unwrap(), t);
        }

        #[test]
        fn prop_parts_have_smaller_codes(f in arb_formula()) {
            let whole = encode_formula(&f);
            let mut parts = Vec::new();
            proper_part_codes(&f, &mut parts);
            for part in parts {
                prop_assert!(part < whole);
            }
        }

        #[test]
        fn prop_code_dominates_complexity(f in arb_formula()) {
            let code = encode_formula(&f);
            prop_assert!(code >= BigUint::from(f.logical_complexity()));
            prop_assert!(code >= BigUint::from(f.size()));
        }

        #[test]
        fn prop_sequence_roundtrip(items in proptest::collection::vec(0u64..1_000_000u64, 0..12)) {
            let items: Vec<BigUint> = items.into_iter().map(BigUint::from).collect();
            let seq = encode_sequence(&items);
            prop_assert_eq!(seq.length, items.len());
            prop_assert_eq!(seq.elements().unwrap(), items);
        }
    }
}
