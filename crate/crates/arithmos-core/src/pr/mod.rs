//! Primitive recursive definitions over ℕ, an interpreter for them, and a
//! compiler from definitions to arithmetic graph formulas.
//!
//! A definition denotes a total function ℕ^arity → ℕ.  Besides the textbook
//! basis (zero, successor, projections, composition, recursion on the last
//! argument) the body language has a few conveniences that keep the library
//! readable — constants, truncated subtraction, division with remainder,
//! a lazy zero-test conditional — and one big workhorse: [`DigitScan`], a
//! fold over the base-`b` digits of the last argument that carries several
//! named tracks of state and may consult the full history of any track at
//! any earlier step.  Scans are how all the syntax functions on Gödel codes
//! (length, validity, valuation, substitution, …) are written as single
//! forward passes.
//!
//! Every body form compiles to a formula of first-order arithmetic defining
//! its graph; see the `compile` submodule.  The interpreter in this module
//! is the reference semantics the compiled formulas are tested against.

pub mod build;
pub mod compile;
pub mod library;
pub mod trace;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A named primitive recursive definition.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PrDefinition {
    pub name: String,
    pub arity: usize,
    pub body: PrBody,
}

/// Body language of definitions.  Argument positions are 1-based
/// throughout, matching projection.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrBody {
    /// Constant zero, any arity.
    Zero,
    /// Successor of the sole argument.
    Succ,
    /// The `i`-th argument, 1-based.
    Proj(usize),
    /// A constant function.
    Const(u64),
    /// Binary addition of the two arguments.
    Add,
    /// Binary multiplication.
    Mul,
    /// Truncated subtraction: `max(x1 - x2, 0)`.
    Monus,
    /// Euclidean quotient; division by zero yields zero.
    Div,
    /// Euclidean remainder; the remainder mod zero is the dividend.
    Mod,
    /// `f(g1(args), ..., gk(args))`.
    Compose { f: Box<PrBody>, args: Vec<PrBody> },
    /// Lazy zero-test: evaluates `then` when `cond` is zero, `els`
    /// otherwise.  Only the taken branch is evaluated, so history reads
    /// may sit safely behind a guard.
    If {
        cond: Box<PrBody>,
        then: Box<PrBody>,
        els: Box<PrBody>,
    },
    /// Recursion on the last argument: with arity `m`,
    /// `f(x⃗, 0) = base(x⃗)` and `f(x⃗, S(r)) = step(x⃗, r, f(x⃗, r))`,
    /// so `base` has arity `m - 1` and `step` has arity `m + 1`.
    PrimRec { base: Box<PrBody>, step: Box<PrBody> },
    /// Digit fold over the last argument; see [`DigitScan`].
    Scan(Box<DigitScan>),
    /// Inside a scan step: the value of `track` after `index` steps.
    /// `index` must evaluate to at most the current step number.
    TableRead { track: usize, index: Box<PrBody> },
    /// A reference to another definition in the same library, inlined on
    /// compilation.
    Ref(String),
}

/// A fold over the base-`base` digits of the last argument, least
/// significant digit first.
///
/// With outer arity `m` and `k = inits.len()` tracks, the scan starts from
/// track entries `inits_j(x1..xm)` and with the subject `x_m` as quotient.
/// While the quotient is nonzero, step `p` (counting from 0) splits the
/// quotient into `digit = q mod base` and the next quotient `q div base`,
/// and replaces every track value at once:
/// `entry_j(p + 1) = steps_j(x1..xm, p, digit, entry_1(p), ..., entry_k(p))`,
/// so each step body has arity `m + 2 + k`.  After the quotient hits zero
/// the result is `out(x1..xm, final entries)`, arity `m + k`.  A subject of
/// zero runs no steps.
///
/// Step bodies may read any track's past through [`PrBody::TableRead`];
/// entry 0 is the initial value and entry `p` is the newest one available
/// while computing entry `p + 1`.  Reads never look ahead: the validator
/// insists the index expression is visibly bounded by the step counter and
/// the interpreter checks every read at run time.  That discipline is what
/// later lets the compiled formula pin the whole history uniquely.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DigitScan {
    pub base: u32,
    pub inits: Vec<PrBody>,
    pub steps: Vec<PrBody>,
    pub out: PrBody,
}

impl DigitScan {
    pub fn tracks(&self) -> usize {
        self.inits.len()
    }
}

/// Errors from validating, interpreting or compiling definitions.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum PrError {
    #[error("definition `{0}` is not in the library")]
    UnknownDefinition(String),
    #[error("definition `{0}` refers to itself, directly or through other definitions")]
    RecursiveReference(String),
    #[error("in `{name}`: projection index {index} is out of range for arity {arity}")]
    BadProjection {
        name: String,
        index: usize,
        arity: usize,
    },
    #[error("in `{name}`: {what} expects arity {expected}, found {found}")]
    ArityMismatch {
        name: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("in `{name}`: scan base {base} must be at least 2")]
    BadBase { name: String, base: u32 },
    #[error("in `{name}`: scan declares {inits} tracks but {steps} step bodies")]
    TrackMismatch {
        name: String,
        inits: usize,
        steps: usize,
    },
    #[error("in `{name}`: history read outside a scan step")]
    ReadOutsideScan { name: String },
    #[error("in `{name}`: history read of track {track} but the scan has {tracks} tracks")]
    BadTrack {
        name: String,
        track: usize,
        tracks: usize,
    },
    #[error(
        "in `{name}`: history read index is not visibly bounded by the step counter"
    )]
    UnboundedRead { name: String },
    #[error("in `{name}`: history read at step {step} asked for entry {index}")]
    ReadAhead {
        name: String,
        step: usize,
        index: String,
    },
    #[error("evaluation exceeded the step budget")]
    OutOfGas,
    #[error("recursion argument {0} is too large to iterate")]
    HugeRecursion(BigUint),
    #[error("definition `{name}` is expected to be 0/1-valued but returned {value} on {args:?}")]
    NotAPredicate {
        name: String,
        value: BigUint,
        args: Vec<String>,
    },
}

/// A library of definitions, looked up by name.
#[derive(Clone, Default, Debug, Serialize, Deserialize)]
pub struct PrLibrary {
    pub definitions: Vec<PrDefinition>,
}

impl PrLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Result<&PrDefinition, PrError> {
        self.definitions
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| PrError::UnknownDefinition(name.to_string()))
    }

    pub fn insert(&mut self, def: PrDefinition) {
        if let Some(slot) = self.definitions.iter_mut().find(|d| d.name == def.name) {
            *slot = def;
        } else {
            self.definitions.push(def);
        }
    }

    /// Validates every definition in the library.
    pub fn validate(&self) -> Result<(), PrError> {
        for def in &self.definitions {
            validate_body(&def.body, def.arity, None, &def.name, self)?;
        }
        Ok(())
    }
}

struct ScanSig {
    outer_arity: usize,
    tracks: usize,
}

impl ScanSig {
    fn step_arity(&self) -> usize {
        self.outer_arity + 2 + self.tracks
    }

    fn position_arg(&self) -> usize {
        self.outer_arity + 1
    }
}

/// Does this index expression visibly evaluate to at most the current step
/// counter (argument `pos` of the enclosing step)?  A conservative
/// syntactic check; the interpreter re-checks each read dynamically.
fn index_bounded(body: &PrBody, pos: usize) -> bool {
    match body {
        PrBody::Zero | PrBody::Const(0) => true,
        PrBody::Proj(i) => *i == pos,
        PrBody::Compose { f, args } => match (f.as_ref(), args.as_slice()) {
            (PrBody::Monus, [a, _]) => index_bounded(a, pos),
            (PrBody::Div, [a, _]) => index_bounded(a, pos),
            // S(e) ≤ p whenever e is bounded by p and visibly loses at
            // least one: e = a ∸ c with a bounded and c a positive constant.
            (PrBody::Succ, [inner]) => match inner {
                PrBody::Compose { f, args } => matches!(
                    (f.as_ref(), args.as_slice()),
                    (PrBody::Monus, [a, PrBody::Const(c)])
                        if *c >= 1 && index_bounded(a, pos)
                ),
                _ => false,
            },
            _ => false,
        },
        PrBody::If { then, els, .. } => index_bounded(then, pos) && index_bounded(els, pos),
        _ => false,
    }
}

fn validate_body(
    body: &PrBody,
    arity: usize,
    scan: Option<&ScanSig>,
    name: &str,
    lib: &PrLibrary,
) -> Result<(), PrError> {
    let arity_is = |what: &'static str, expected: usize| -> Result<(), PrError> {
        if arity == expected {
            Ok(())
        } else {
            Err(PrError::ArityMismatch {
                name: name.to_string(),
                what,
                expected,
                found: arity,
            })
        }
    };
    match body {
        PrBody::Zero | PrBody::Const(_) => Ok(()),
        PrBody::Succ => arity_is("successor", 1),
        PrBody::Add => arity_is("addition", 2),
        PrBody::Mul => arity_is("multiplication", 2),
        PrBody::Monus => arity_is("truncated subtraction", 2),
        PrBody::Div => arity_is("division", 2),
        PrBody::Mod => arity_is("remainder", 2),
        PrBody::Proj(i) => {
            if *i >= 1 && *i <= arity {
                Ok(())
            } else {
                Err(PrError::BadProjection {
                    name: name.to_string(),
                    index: *i,
                    arity,
                })
            }
        }
        PrBody::Compose { f, args } => {
            for g in args {
                validate_body(g, arity, scan, name, lib)?;
            }
            validate_body(f, args.len(), None, name, lib)
        }
        PrBody::If { cond, then, els } => {
            validate_body(cond, arity, scan, name, lib)?;
            validate_body(then, arity, scan, name, lib)?;
            validate_body(els, arity, scan, name, lib)
        }
        PrBody::PrimRec { base, step } => {
            if arity == 0 {
                return Err(PrError::ArityMismatch {
                    name: name.to_string(),
                    what: "recursion",
                    expected: 1,
                    found: 0,
                });
            }
            validate_body(base, arity - 1, None, name, lib)?;
            validate_body(step, arity + 1, None, name, lib)
        }
        PrBody::Scan(scan_def) => {
            if scan_def.base < 2 {
                return Err(PrError::BadBase {
                    name: name.to_string(),
                    base: scan_def.base,
                });
            }
            if scan_def.inits.len() != scan_def.steps.len() {
                return Err(PrError::TrackMismatch {
                    name: name.to_string(),
                    inits: scan_def.inits.len(),
                    steps: scan_def.steps.len(),
                });
            }
            if arity == 0 {
                return Err(PrError::ArityMismatch {
                    name: name.to_string(),
                    what: "scan",
                    expected: 1,
                    found: 0,
                });
            }
            let sig = ScanSig {
                outer_arity: arity,
                tracks: scan_def.tracks(),
            };
            for init in &scan_def.inits {
                validate_body(init, arity, None, name, lib)?;
            }
            for step in &scan_def.steps {
                validate_body(step, sig.step_arity(), Some(&sig), name, lib)?;
            }
            validate_body(&scan_def.out, arity + sig.tracks, None, name, lib)
        }
        PrBody::TableRead { track, index } => {
            let sig = scan.ok_or_else(|| PrError::ReadOutsideScan {
                name: name.to_string(),
            })?;
            if *track < 1 || *track > sig.tracks {
                return Err(PrError::BadTrack {
                    name: name.to_string(),
                    track: *track,
                    tracks: sig.tracks,
                });
            }
            if !index_bounded(index, sig.position_arg()) {
                return Err(PrError::UnboundedRead {
                    name: name.to_string(),
                });
            }
            validate_body(index, arity, scan, name, lib)
        }
        PrBody::Ref(target) => {
            lib.get(target)?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Interpreter
// ---------------------------------------------------------------------------

struct ScanState<'a> {
    histories: &'a [Vec<BigUint>],
    step: usize,
}

struct Interp<'a> {
    lib: &'a PrLibrary,
    gas: u64,
}

/// Default interpreter budget, in elementary evaluation steps.
pub const DEFAULT_GAS: u64 = 200_000_000;

impl<'a> Interp<'a> {
    fn spend(&mut self) -> Result<(), PrError> {
        if self.gas == 0 {
            return Err(PrError::OutOfGas);
        }
        self.gas -= 1;
        Ok(())
    }

    fn eval(
        &mut self,
        body: &PrBody,
        args: &[BigUint],
        scan: Option<&ScanState<'_>>,
        name: &str,
    ) -> Result<BigUint, PrError> {
        self.spend()?;
        match body {
            PrBody::Zero => Ok(BigUint::zero()),
            PrBody::Const(n) => Ok(BigUint::from(*n)),
            PrBody::Succ => Ok(&args[0] + BigUint::one()),
            PrBody::Proj(i) => Ok(args[*i - 1].clone()),
            PrBody::Add => Ok(&args[0] + &args[1]),
            PrBody::Mul => Ok(&args[0] * &args[1]),
            PrBody::Monus => {
                if args[0] >= args[1] {
                    Ok(&args[0] - &args[1])
                } else {
                    Ok(BigUint::zero())
                }
            }
            PrBody::Div => {
                if args[1].is_zero() {
                    Ok(BigUint::zero())
                } else {
                    Ok(&args[0] / &args[1])
                }
            }
            PrBody::Mod => {
                if args[1].is_zero() {
                    Ok(args[0].clone())
                } else {
                    Ok(&args[0] % &args[1])
                }
            }
            PrBody::Compose { f, args: gs } => {
                let mut inner = Vec::with_capacity(gs.len());
                for g in gs {
                    inner.push(self.eval(g, args, scan, name)?);
                }
                self.eval(f, &inner, None, name)
            }
            PrBody::If { cond, then, els } => {
                let c = self.eval(cond, args, scan, name)?;
                if c.is_zero() {
                    self.eval(then, args, scan, name)
                } else {
                    self.eval(els, args, scan, name)
                }
            }
            PrBody::PrimRec { base, step } => {
                let (n, rest) = args.split_last().expect("recursion arity checked");
                let n = n
                    .to_u64()
                    .ok_or_else(|| PrError::HugeRecursion(n.clone()))?;
                let mut acc = self.eval(base, rest, None, name)?;
                let mut step_args: Vec<BigUint> = rest.to_vec();
                step_args.push(BigUint::zero());
                step_args.push(BigUint::zero());
                for r in 0..n {
                    let m = step_args.len();
                    step_args[m - 2] = BigUint::from(r);
                    step_args[m - 1] = acc;
                    acc = self.eval(step, &step_args, None, name)?;
                }
                Ok(acc)
            }
            PrBody::Scan(scan_def) => {
                let k = scan_def.tracks();
                let mut histories: Vec<Vec<BigUint>> = Vec::with_capacity(k);
                for init in &scan_def.inits {
                    histories.push(vec![self.eval(init, args, None, name)?]);
                }
                let base = BigUint::from(scan_def.base);
                let mut quotient = args.last().expect("scan arity checked").clone();
                let mut p = 0usize;
                while !quotient.is_zero() {
                    let (q, digit) = quotient.div_rem(&base);
                    let mut step_args: Vec<BigUint> =
                        Vec::with_capacity(args.len() + 2 + k);
                    step_args.extend_from_slice(args);
                    step_args.push(BigUint::from(p));
                    step_args.push(digit);
                    for hist in &histories {
                        step_args.push(hist[p].clone());
                    }
                    let mut next = Vec::with_capacity(k);
                    for step in &scan_def.steps {
                        let state = ScanState {
                            histories: &histories,
                            step: p,
                        };
                        next.push(self.eval(step, &step_args, Some(&state), name)?);
                    }
                    for (hist, v) in histories.iter_mut().zip(next) {
                        hist.push(v);
                    }
                    quotient = q;
                    p += 1;
                }
                let mut out_args: Vec<BigUint> = Vec::with_capacity(args.len() + k);
                out_args.extend_from_slice(args);
                for hist in &histories {
                    out_args.push(hist.last().unwrap().clone());
                }
                self.eval(&scan_def.out, &out_args, None, name)
            }
            PrBody::TableRead { track, index } => {
                let state = scan.expect("history read outside a scan is rejected upfront");
                let idx = self.eval(index, args, Some(state), name)?;
                let idx = idx.to_usize().filter(|i| *i <= state.step).ok_or_else(|| {
                    PrError::ReadAhead {
                        name: name.to_string(),
                        step: state.step,
                        index: idx.to_string(),
                    }
                })?;
                Ok(state.histories[*track - 1][idx].clone())
            }
            PrBody::Ref(target) => {
                let def = self.lib.get(target)?;
                debug_assert_eq!(def.arity, args.len(), "arity of `{target}`");
                self.eval(&def.body.clone(), args, None, target)
            }
        }
    }
}

/// Runs a definition from the library on the given arguments.
pub fn eval_pr(lib: &PrLibrary, name: &str, args: &[BigUint]) -> Result<BigUint, PrError> {
    eval_pr_with_gas(lib, name, args, DEFAULT_GAS)
}

/// Like [`eval_pr`] with an explicit step budget.
pub fn eval_pr_with_gas(
    lib: &PrLibrary,
    name: &str,
    args: &[BigUint],
    gas: u64,
) -> Result<BigUint, PrError> {
    let def = lib.get(name)?;
    assert_eq!(
        def.arity,
        args.len(),
        "`{name}` has arity {}, got {} arguments",
        def.arity,
        args.len()
    );
    let mut interp = Interp { lib, gas };
    interp.eval(&def.body, args, None, name)
}

/// Convenience for natural-number literals in tests and callers.
pub fn nat(n: u64) -> BigUint {
    BigUint::from(n)
}

/// Convenience: evaluate with `u64` arguments.
pub fn eval_pr_u64(lib: &PrLibrary, name: &str, args: &[u64]) -> Result<BigUint, PrError> {
    let args: Vec<BigUint> = args.iter().map(|&a| nat(a)).collect();
    eval_pr(lib, name, &args)
}

/// A map of evaluation environments used by callers that bind variables.
pub type Env = BTreeMap<u32, BigUint>;
