//! Three-valued bounded evaluation of arithmetic formulas over the naturals.
//!
//! Truth over ℕ is undecidable, so the evaluator answers `True`, `False` or
//! `Unknown` and is *sound*: a definite answer is always the classical truth
//! value, and `Unknown` is the only admission of defeat.  Definite answers
//! come from three sources:
//!
//! * exact evaluation of closed subformulas and of bounded quantifiers
//!   (`∃v (v < b ∧ …)` / `∀v (¬(v < b) ∨ …)` with a closed bound);
//! * a propagation solver for existential blocks that binds witnesses it can
//!   deduce (equations with one unknown, division/remainder pairs, β-style
//!   packed-sequence reads) and refutes blocks whose forced bindings
//!   contradict a conjunct;
//! * direct simulation of the digit-scan and counted-recursion formulas
//!   produced by [`crate::pr::compile`]: instead of searching for the packed
//!   history numbers the evaluator recomputes the history and checks the
//!   output clause, which decides these blocks outright.
//!
//! Unbounded quantifiers fall back to a finite witness/counterexample search
//! (`budget.search` candidates).  A true `∀` or an unwitnessed false `∃` over
//! all of ℕ therefore stays `Unknown` — e.g. `∀v (v + 0 = v)` — which is the
//! honest outcome for a bounded procedure.
//!
//! One special inference closes the loop for synthesized truth definitions:
//! when a stuck conjunct is recognized (up to renaming of bound variables) as
//! the compiled slot-substitution relation with a known pattern and a known
//! result but an unknown entry sequence, the evaluator inverts the
//! substitution structurally, verifies the candidate by running the shipped
//! recursive definition, and binds the sequence.  The inversion only refutes
//! a block when the block also demands that the entries be closed value
//! terms, which is what makes the inverted candidate the unique solution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::godel::{self, CodeError, SequenceCode};
use crate::pr::compile::{compiled_library, GraphFormula};
use crate::pr::library::library;
use crate::pr::trace::{match_trace, open_read, CountFold, DigitFold, TraceView};
use crate::pr::{self};
use crate::syntax::{Formula, Term, VarKind, Variable};

/// Verdict of the evaluator: classical truth value or an admission that the
/// budget did not suffice to decide.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriBool {
    True,
    False,
    Unknown,
}

impl TriBool {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriBool::True
        } else {
            TriBool::False
        }
    }

    pub fn negate(self) -> Self {
        match self {
            TriBool::True => TriBool::False,
            TriBool::False => TriBool::True,
            TriBool::Unknown => TriBool::Unknown,
        }
    }

    /// Strong Kleene conjunction.
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (TriBool::False, _) | (_, TriBool::False) => TriBool::False,
            (TriBool::True, TriBool::True) => TriBool::True,
            _ => TriBool::Unknown,
        }
    }

    /// Strong Kleene disjunction.
    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (TriBool::True, _) | (_, TriBool::True) => TriBool::True,
            (TriBool::False, TriBool::False) => TriBool::False,
            _ => TriBool::Unknown,
        }
    }

    pub fn is_definite(self) -> bool {
        self != TriBool::Unknown
    }
}

impl std::fmt::Display for TriBool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriBool::True => write!(f, "true"),
            TriBool::False => write!(f, "false"),
            TriBool::Unknown => write!(f, "unknown"),
        }
    }
}

/// Resource limits for one evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Budget {
    /// Candidates tried per unbounded quantifier (witnesses for `∃`,
    /// counterexamples for `∀`).
    pub search: u64,
    /// Largest bound a bounded quantifier may have and still be enumerated
    /// exactly.
    pub enumeration: u64,
    /// Global work allowance; one unit is roughly one conjunct visit.
    /// Exhaustion degrades the verdict to `Unknown`, never to a wrong answer.
    pub steps: u64,
    /// Recursion depth cap.
    pub depth: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            search: 64,
            enumeration: 1 << 16,
            steps: 400_000_000,
            depth: 4_000,
        }
    }
}

impl Budget {
    /// A budget whose quantifier search tries `search` candidates, other
    /// limits at their defaults.
    pub fn with_search(search: u64) -> Self {
        Budget {
            search,
            ..Budget::default()
        }
    }
}

/// Evaluation failures.  These mean the input was not a sentence of
/// arithmetic over ℕ, not that the truth value is merely out of reach.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum EvalError {
    #[error("the formula has free variables and no truth value on its own")]
    OpenFormula,
    #[error("schematic predicate `{0}` has no interpretation over the naturals")]
    SchematicPredicate(String),
    #[error("term contains `{0}`, which names no natural number")]
    NonNumeric(String),
    #[error(transparent)]
    Sequence(#[from] CodeError),
    #[error("a packed-history carrier was used as an ordinary number")]
    CarrierMisuse,
}

/// Outcome of [`eval_report`]: the verdict plus whatever witness data the
/// run produced for a top-level quantifier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub verdict: TriBool,
    /// A witness for a true top-level `∃`, when one at most `budget.search`
    /// was found.
    #[serde(
        skip_serializing_if = "Option::is_none",
        with = "crate::syntax::biguint_decimal::option",
        default
    )]
    pub witness: Option<BigUint>,
    /// A counterexample for a false top-level `∀`.
    #[serde(
        skip_serializing_if = "Option::is_none",
        with = "crate::syntax::biguint_decimal::option",
        default
    )]
    pub counterexample: Option<BigUint>,
    /// Work units actually spent.
    pub steps: u64,
}

/// A value a variable can be bound to during solving: an ordinary natural,
/// or the whole history of a simulated scan track.  Histories stand in for
/// the packed carrier numbers of emitted trace formulas; they may only be
/// consumed by packed-sequence reads, never by term arithmetic.
#[derive(Clone, Debug)]
enum Val {
    Num(BigUint),
    Table(Rc<std::cell::RefCell<Vec<BigUint>>>),
}

type Env = BTreeMap<Variable, Val>;

/// Evaluate a sentence.  Errors if `f` has free variables or mentions
/// non-arithmetic material (schematic predicates, template placeholders).
pub fn eval_sentence(f: &Formula, budget: &Budget) -> Result<TriBool, EvalError> {
    if !f.free_variables().is_empty() {
        return Err(EvalError::OpenFormula);
    }
    let mut ev = Evaluator::new(*budget);
    ev.solve(f, &mut Env::new(), &BTreeSet::new(), 0)
}

/// Evaluate a sentence and report witness data for a top-level quantifier.
pub fn eval_report(f: &Formula, budget: &Budget) -> Result<EvalReport, EvalError> {
    if !f.free_variables().is_empty() {
        return Err(EvalError::OpenFormula);
    }
    let mut ev = Evaluator::new(*budget);
    let verdict = ev.solve(f, &mut Env::new(), &BTreeSet::new(), 0)?;
    let mut witness = None;
    let mut counterexample = None;
    match (f, verdict) {
        (Formula::Exists { var, body }, TriBool::True) => {
            witness = ev.first_instance(*var, body, TriBool::True)?;
        }
        (Formula::Forall { var, body }, TriBool::False) => {
            counterexample = ev.first_instance(*var, body, TriBool::False)?;
        }
        _ => {}
    }
    Ok(EvalReport {
        verdict,
        witness,
        counterexample,
        steps: ev.steps,
    })
}

/// Numeric value of a term under an environment.  `Ok(None)` means some
/// variable is not bound yet (the caller is probing readiness); hard errors
/// mean the term can never denote a natural.
fn value_of(t: &Term, bind: &Env) -> Result<Option<BigUint>, EvalError> {
    match t {
        Term::Zero => Ok(Some(BigUint::zero())),
        Term::Num { value } => Ok(Some(value.clone())),
        Term::Succ { arg } => Ok(value_of(arg, bind)?.map(|v| v + 1u32)),
        Term::Add { left, right } => Ok(match (value_of(left, bind)?, value_of(right, bind)?) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        }),
        Term::Mul { left, right } => Ok(match (value_of(left, bind)?, value_of(right, bind)?) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        }),
        Term::Proj { seq, idx } => {
            let (s, i) = match (value_of(seq, bind)?, value_of(idx, bind)?) {
                (Some(s), Some(i)) => (s, i),
                _ => return Ok(None),
            };
            let code = SequenceCode::from_value(s)?;
            let index = i.to_usize().ok_or(CodeError::Projection {
                index: i.clone(),
                length: code.length,
            })?;
            Ok(Some(godel::project(&code, index)?))
        }
        Term::Var { var } => match var.kind {
            VarKind::Object => match bind.get(var) {
                Some(Val::Num(v)) => Ok(Some(v.clone())),
                Some(Val::Table(_)) => Err(EvalError::CarrierMisuse),
                None => Ok(None),
            },
            VarKind::Slot => Err(EvalError::NonNumeric(format!("e{}", var.index))),
            VarKind::Marker => Err(EvalError::NonNumeric("w".into())),
        },
    }
}

/// Result of attempting one conjunct during propagation.
enum Attempt {
    /// The conjunct is settled true (possibly after binding variables).
    Settled,
    /// The conjunct is settled but undecidable within budget.
    Undecided,
    /// The whole block is refuted.
    Refuted,
    /// Nothing could be done yet; retry when more bindings arrive.
    Stuck,
}

struct Evaluator {
    budget: Budget,
    steps: u64,
    /// Free-variable lists memoised by node address.  Sound because the
    /// formula under evaluation is borrowed for the whole run, so every
    /// conjunct reference points into one immutable tree; without the cache
    /// the witness search recomputes these lists on every candidate.
    free_cache: HashMap<*const Formula, Rc<[Variable]>>,
}

impl Evaluator {
    fn new(budget: Budget) -> Self {
        Evaluator { budget, steps: 0, free_cache: HashMap::new() }
    }

    fn free_vars(&mut self, f: &Formula) -> Rc<[Variable]> {
        let key = f as *const Formula;
        if let Some(hit) = self.free_cache.get(&key) {
            return Rc::clone(hit);
        }
        let vars: Rc<[Variable]> = f.free_variables().into_iter().collect();
        self.free_cache.insert(key, Rc::clone(&vars));
        vars
    }

    /// Charge `n` work units; `false` once the allowance is gone.
    fn spend(&mut self, n: u64) -> bool {
        self.steps = self.steps.saturating_add(n);
        self.steps <= self.budget.steps
    }

    fn exhausted(&self) -> bool {
        self.steps > self.budget.steps
    }

    /// Evaluate `f` under `bind`.  Variables in `bindable` may be assigned
    /// by the solver when a conjunct forces their value; such assignments
    /// stay in `bind` for the caller's sibling conjuncts.
    fn solve(
        &mut self,
        f: &Formula,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<TriBool, EvalError> {
        if !self.spend(1) || depth > self.budget.depth {
            return Ok(TriBool::Unknown);
        }
        match f {
            Formula::Exists { var, body } => {
                if let Some(view) = match_trace(f) {
                    if let Some(res) = self.simulate(&view, bind, bindable, depth)? {
                        return Ok(res);
                    }
                }
                if let Formula::And { left, right } = body.as_ref() {
                    if let Formula::Lt { left: lv, right: bound } = left.as_ref() {
                        if *lv == Term::var(*var) {
                            if let Some(b) = value_of(bound, bind)? {
                                return self.enumerate(*var, &b, right, bind, depth, true);
                            }
                        }
                    }
                }
                // General existential block: collect the prefix, flatten the
                // conjunction and propagate.
                let mut scope = Vec::new();
                let mut inner: &Formula = f;
                while let Formula::Exists { var, body } = inner {
                    scope.push(*var);
                    inner = body;
                }
                let mut items = Vec::new();
                flatten_and(inner, &mut items);
                let mut extended = bindable.clone();
                extended.extend(scope.iter().copied());
                self.solve_conjuncts(items, bind, &extended, &scope, depth)
            }
            Formula::Forall { var, body } => {
                if let Formula::Or { left, right } = body.as_ref() {
                    if let Formula::Not { arg } = left.as_ref() {
                        if let Formula::Lt { left: lv, right: bound } = arg.as_ref() {
                            if *lv == Term::var(*var) {
                                if let Some(b) = value_of(bound, bind)? {
                                    return self.enumerate(*var, &b, right, bind, depth, false);
                                }
                            }
                        }
                    }
                }
                // Unbounded universal: only a counterexample is conclusive.
                let mut saw_unknown = false;
                for w in 0..self.budget.search {
                    if !self.spend(1) {
                        return Ok(TriBool::Unknown);
                    }
                    let mut sub = bind.clone();
                    sub.insert(*var, Val::Num(BigUint::from(w)));
                    match self.solve(body, &mut sub, &BTreeSet::new(), depth + 1)? {
                        TriBool::False => return Ok(TriBool::False),
                        TriBool::Unknown => saw_unknown = true,
                        TriBool::True => {}
                    }
                }
                let _ = saw_unknown;
                Ok(TriBool::Unknown)
            }
            _ => {
                let mut items = Vec::new();
                flatten_and(f, &mut items);
                self.solve_conjuncts(items, bind, bindable, &[], depth)
            }
        }
    }

    /// Evaluate a non-quantifier formula whose shape needs no propagation
    /// (or whose propagation already happened).
    fn eval_leaf(
        &mut self,
        f: &Formula,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<TriBool, EvalError> {
        if !self.spend(1) || depth > self.budget.depth {
            return Ok(TriBool::Unknown);
        }
        match f {
            Formula::Eq { left, right } => {
                Ok(match (value_of(left, bind)?, value_of(right, bind)?) {
                    (Some(a), Some(b)) => TriBool::from_bool(a == b),
                    _ => TriBool::Unknown,
                })
            }
            Formula::Lt { left, right } => {
                Ok(match (value_of(left, bind)?, value_of(right, bind)?) {
                    (Some(a), Some(b)) => TriBool::from_bool(a < b),
                    _ => TriBool::Unknown,
                })
            }
            Formula::Pred { name, .. } => Err(EvalError::SchematicPredicate(name.clone())),
            Formula::Not { arg } => {
                // Nothing under a negation may bind: a refuted sub-block is
                // what makes the negation true.
                let mut sub = bind.clone();
                Ok(self.solve(arg, &mut sub, &BTreeSet::new(), depth + 1)?.negate())
            }
            Formula::Or { left, right } => {
                let mut l = bind.clone();
                let lv = self.solve(left, &mut l, &BTreeSet::new(), depth + 1)?;
                if lv == TriBool::True {
                    return Ok(TriBool::True);
                }
                let mut r = bind.clone();
                let rv = self.solve(right, &mut r, &BTreeSet::new(), depth + 1)?;
                Ok(lv.or(rv))
            }
            Formula::And { .. } | Formula::Exists { .. } | Formula::Forall { .. } => {
                self.solve(f, bind, bindable, depth + 1)
            }
        }
    }

    /// Exact enumeration of a bounded quantifier (`existential` selects the
    /// polarity).  Decides the quantifier completely unless the bound
    /// exceeds the enumeration allowance or the body stays unknown.
    fn enumerate(
        &mut self,
        var: Variable,
        bound: &BigUint,
        body: &Formula,
        bind: &Env,
        depth: u32,
        existential: bool,
    ) -> Result<TriBool, EvalError> {
        let b = match bound.to_u64() {
            Some(b) if b <= self.budget.enumeration => b,
            _ => return Ok(TriBool::Unknown),
        };
        let mut saw_unknown = false;
        for i in 0..b {
            if !self.spend(1) {
                return Ok(TriBool::Unknown);
            }
            let mut sub = bind.clone();
            sub.insert(var, Val::Num(BigUint::from(i)));
            let r = self.solve(body, &mut sub, &BTreeSet::new(), depth + 1)?;
            match (existential, r) {
                (true, TriBool::True) => return Ok(TriBool::True),
                (false, TriBool::False) => return Ok(TriBool::False),
                (_, TriBool::Unknown) => saw_unknown = true,
                _ => {}
            }
        }
        if saw_unknown {
            Ok(TriBool::Unknown)
        } else if existential {
            Ok(TriBool::False)
        } else {
            Ok(TriBool::True)
        }
    }

    /// Propagation over a conjunct list.  `bindable` are the variables the
    /// block may assign; `search_vars` are this block's own existentials, in
    /// prefix order, eligible for the fallback witness search.
    fn solve_conjuncts(
        &mut self,
        items: Vec<&Formula>,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        search_vars: &[Variable],
        depth: u32,
    ) -> Result<TriBool, EvalError> {
        #[derive(Clone, Copy, PartialEq)]
        enum State {
            Open,
            Settled,
            Undecided,
        }
        let free: Vec<Rc<[Variable]>> = items.iter().map(|f| self.free_vars(f)).collect();
        let mut state = vec![State::Open; items.len()];
        // Size of `bind` at the last attempt, so expensive rules rerun only
        // after new bindings arrive.
        let mut last_try = vec![usize::MAX; items.len()];
        let mut inverted = vec![false; items.len()];

        loop {
            let mut progress = false;
            for i in 0..items.len() {
                if state[i] != State::Open {
                    continue;
                }
                if !self.spend(1) || depth > self.budget.depth {
                    return Ok(TriBool::Unknown);
                }
                if last_try[i] == bind.len() {
                    continue;
                }
                last_try[i] = bind.len();
                let unbound: Vec<Variable> = free[i]
                    .iter()
                    .filter(|v| !bind.contains_key(v))
                    .copied()
                    .collect();
                let attempt = self.attempt(
                    items[i],
                    &items,
                    &state.iter().map(|s| *s == State::Open).collect::<Vec<_>>(),
                    &unbound,
                    bind,
                    bindable,
                    &mut inverted[i],
                    depth,
                )?;
                match attempt {
                    Attempt::Settled => {
                        state[i] = State::Settled;
                        progress = true;
                    }
                    Attempt::Undecided => {
                        state[i] = State::Undecided;
                        progress = true;
                    }
                    Attempt::Refuted => return Ok(TriBool::False),
                    Attempt::Stuck => {}
                }
                if self.exhausted() {
                    return Ok(TriBool::Unknown);
                }
                // A division/remainder pair settles its companion too.
                if state[i] == State::Settled {
                    for j in 0..items.len() {
                        if state[j] == State::Open && self.companion_settled(items[j], bind)? {
                            state[j] = State::Settled;
                        }
                    }
                }
            }
            if !progress {
                break;
            }
        }

        if state.iter().all(|s| *s == State::Settled) {
            return Ok(TriBool::True);
        }

        // Fallback: pick the first still-unbound block variable, try small
        // witnesses for it, and rerun full propagation underneath.
        let open: Vec<&Formula> = items
            .iter()
            .zip(&state)
            .filter(|(_, s)| **s != State::Settled)
            .map(|(f, _)| *f)
            .collect();
        let candidates: Vec<Variable> = search_vars
            .iter()
            .filter(|v| !bind.contains_key(v))
            .copied()
            .collect();
        // Guesses are only sound for this block's own existentials: if an
        // open conjunct mentions an unbound variable owned by an enclosing
        // block, a guess here could leak into it as if it were forced, and a
        // later refutation would be wrong.  Leave such blocks to the owner.
        let owns_all = free
            .iter()
            .zip(&state)
            .filter(|(_, s)| **s != State::Settled)
            .flat_map(|(fv, _)| fv.iter())
            .all(|v| bind.contains_key(v) || candidates.contains(v));
        if let Some(first) = candidates.first() {
            if owns_all && candidates.len() <= 3 {
                let rest: Vec<Variable> = candidates[1..].to_vec();
                for w in 0..self.budget.search {
                    if !self.spend(1) {
                        return Ok(TriBool::Unknown);
                    }
                    let mut sub = bind.clone();
                    sub.insert(*first, Val::Num(BigUint::from(w)));
                    let r = self.solve_conjuncts(
                        open.clone(),
                        &mut sub,
                        bindable,
                        &rest,
                        depth + 1,
                    )?;
                    if r == TriBool::True {
                        *bind = sub;
                        return Ok(TriBool::True);
                    }
                }
            }
        }
        Ok(TriBool::Unknown)
    }

    /// One attempt at one conjunct.  `open` flags which sibling conjuncts
    /// are still unresolved (for rules that consume a companion conjunct).
    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &mut self,
        item: &Formula,
        items: &[&Formula],
        open: &[bool],
        unbound: &[Variable],
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        inverted: &mut bool,
        depth: u32,
    ) -> Result<Attempt, EvalError> {
        // Packed-sequence read against a simulated history: must run before
        // the closed-evaluation path, because the carrier has no numeric
        // value.
        if let Some(read) = open_read(item) {
            if let Some(Val::Table(table)) = bind.get(&read.c).cloned() {
                let idx = match value_of(read.index, bind)? {
                    Some(i) => i,
                    None => return Ok(Attempt::Stuck),
                };
                let table = table.borrow();
                let entry = idx.to_usize().and_then(|i| table.get(i)).cloned();
                let entry = match entry {
                    Some(e) => e,
                    None => return Ok(Attempt::Undecided),
                };
                if let Term::Var { var } = read.value {
                    if !bind.contains_key(var) {
                        if bindable.contains(var) {
                            bind.insert(*var, Val::Num(entry));
                            return Ok(Attempt::Settled);
                        }
                        return Ok(Attempt::Stuck);
                    }
                }
                return Ok(match value_of(read.value, bind)? {
                    Some(v) if v == entry => Attempt::Settled,
                    Some(_) => Attempt::Refuted,
                    None => Attempt::Stuck,
                });
            }
        }

        if unbound.is_empty() {
            return Ok(match self.eval_leaf(item, bind, bindable, depth + 1)? {
                TriBool::True => Attempt::Settled,
                TriBool::False => Attempt::Refuted,
                TriBool::Unknown => Attempt::Undecided,
            });
        }

        if !unbound.iter().all(|v| bindable.contains(v)) {
            return Ok(Attempt::Stuck);
        }

        match item {
            Formula::Eq { left, right } => self.bind_equation(left, right, bind, bindable),
            Formula::Exists { .. } => {
                if !*inverted && unbound.len() == 1 {
                    *inverted = true;
                    if let Some(outcome) =
                        self.invert_substitution(item, items, open, unbound[0], bind)?
                    {
                        return Ok(outcome);
                    }
                }
                // Output-binding attempt: solve the block in place so its
                // forced bindings (our `unbound` targets included) land in
                // `bind`.
                match self.solve(item, bind, bindable, depth + 1)? {
                    TriBool::True => Ok(Attempt::Settled),
                    TriBool::False => Ok(Attempt::Refuted),
                    TriBool::Unknown => Ok(Attempt::Stuck),
                }
            }
            Formula::Or { left, right } => self.resolve_or(left, right, bind, bindable, depth),
            _ => Ok(Attempt::Stuck),
        }
    }

    /// Equation patterns that force a binding: `v = t`, `t = u + v`
    /// (difference), `t = q·m + v`-style products, successor peeling.
    fn bind_equation(
        &mut self,
        left: &Term,
        right: &Term,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
    ) -> Result<Attempt, EvalError> {
        for (a, b) in [(left, right), (right, left)] {
            // Peel `S(...S(x)...) = t`: x's value is t minus the peeled count.
            let mut core = a;
            let mut peeled = 0u64;
            while let Term::Succ { arg } = core {
                core = arg;
                peeled += 1;
            }
            if let Term::Var { var } = core {
                if !bind.contains_key(var) && bindable.contains(var) {
                    if let Some(t) = value_of(b, bind)? {
                        let off = BigUint::from(peeled);
                        if t < off {
                            return Ok(Attempt::Refuted);
                        }
                        bind.insert(*var, Val::Num(t - off));
                        return Ok(Attempt::Settled);
                    }
                }
            }
            // `t = u + v` with one addend unknown.
            if let Term::Add { left: u, right: v } = a {
                if let Some(t) = value_of(b, bind)? {
                    for (known, unknown) in [(u, v), (v, u)] {
                        if let Term::Var { var } = unknown.as_ref() {
                            if !bind.contains_key(var) && bindable.contains(var) {
                                if let Some(k) = value_of(known, bind)? {
                                    if t < k {
                                        return Ok(Attempt::Refuted);
                                    }
                                    bind.insert(*var, Val::Num(t - k));
                                    return Ok(Attempt::Settled);
                                }
                                // `t = q·m + known`: q must be the exact quotient.
                                if let Term::Mul { left: q, right: m } = known.as_ref() {
                                    if let (Term::Var { var: qv }, Some(mv)) =
                                        (q.as_ref(), value_of(m, bind)?)
                                    {
                                        if !bind.contains_key(qv)
                                            && bindable.contains(qv)
                                            && !mv.is_zero()
                                        {
                                            // Both addends unknown here, so
                                            // only the paired rule applies.
                                            continue;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    // `t = q·m + r` with q, r unknown is handled by the
                    // division pair rule below (needs the `r < m` witness).
                    if let (Term::Mul { left: q, right: m }, Term::Var { var: rv }) =
                        (u.as_ref(), v.as_ref())
                    {
                        if let Term::Var { var: qv } = q.as_ref() {
                            if !bind.contains_key(qv)
                                && !bind.contains_key(rv)
                                && bindable.contains(qv)
                                && bindable.contains(rv)
                            {
                                if let Some(mv) = value_of(m, bind)? {
                                    if !mv.is_zero() {
                                        bind.insert(*qv, Val::Num(&t / &mv));
                                        bind.insert(*rv, Val::Num(&t % &mv));
                                        return Ok(Attempt::Settled);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Attempt::Stuck)
    }

    /// After a division pair binds its quotient and remainder, the `r < m`
    /// companion conjunct is checked and settled here.
    fn companion_settled(&mut self, item: &Formula, bind: &Env) -> Result<bool, EvalError> {
        if let Formula::Lt { left, right } = item {
            if let (Some(a), Some(b)) = (value_of(left, bind)?, value_of(right, bind)?) {
                return Ok(a < b);
            }
        }
        Ok(false)
    }

    /// Disjunction inside a block.  A branch's bindings are adopted only
    /// when the other branch is refuted (the choice is then forced), or when
    /// the winning branch bound nothing, so refutations stay sound.
    fn resolve_or(
        &mut self,
        left: &Formula,
        right: &Formula,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<Attempt, EvalError> {
        let mut l = bind.clone();
        let lv = self.solve(left, &mut l, bindable, depth + 1)?;
        if lv == TriBool::False {
            let mut r = bind.clone();
            return Ok(match self.solve(right, &mut r, bindable, depth + 1)? {
                TriBool::True => {
                    *bind = r;
                    Attempt::Settled
                }
                TriBool::False => Attempt::Refuted,
                TriBool::Unknown => Attempt::Undecided,
            });
        }
        let mut r = bind.clone();
        let rv = self.solve(right, &mut r, bindable, depth + 1)?;
        match (lv, rv) {
            (TriBool::True, TriBool::False) => {
                *bind = l;
                Ok(Attempt::Settled)
            }
            (TriBool::True, _) if l.len() == bind.len() => Ok(Attempt::Settled),
            (_, TriBool::True) if r.len() == bind.len() => Ok(Attempt::Settled),
            (TriBool::Unknown, TriBool::False) => Ok(Attempt::Undecided),
            // True with fresh bindings on both sides, or unknowns: the pick
            // is not forced, so leave the conjunct for the fallback search.
            _ => Ok(Attempt::Stuck),
        }
    }

    /// Recognize and simulate an emitted history formula.  `Ok(None)` means
    /// the inputs are not bound yet.
    fn simulate(
        &mut self,
        view: &TraceView<'_>,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<Option<TriBool>, EvalError> {
        match view {
            TraceView::Digit(df) => self.simulate_digit(df, bind, bindable, depth),
            TraceView::Count(cf) => self.simulate_count(cf, bind, bindable, depth),
        }
    }

    fn simulate_digit(
        &mut self,
        df: &DigitFold<'_>,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<Option<TriBool>, EvalError> {
        let subject = match value_of(df.subject, bind)? {
            Some(s) => s,
            None => return Ok(None),
        };
        if df.base < 2 {
            return Ok(None);
        }
        let digits: Vec<u8> = if subject.is_zero() {
            Vec::new()
        } else {
            subject.to_radix_le(df.base as u32)
        };
        let k = df.tracks.len();

        // Entry 0 of every track comes from the init graphs.
        let mut sub = bind.clone();
        let mut init_bindable = BTreeSet::new();
        for (evar, _) in &df.inits {
            init_bindable.insert(*evar);
        }
        let init_graphs: Vec<&Formula> = df.inits.iter().map(|(_, g)| *g).collect();
        match self.solve_conjuncts(init_graphs, &mut sub, &init_bindable, &[], depth + 1)? {
            TriBool::True => {}
            other => return Ok(Some(other)),
        }
        let mut tables = Vec::with_capacity(k);
        for (evar, _) in &df.inits {
            match sub.get(evar) {
                Some(Val::Num(v)) => {
                    tables.push(Rc::new(std::cell::RefCell::new(vec![v.clone()])))
                }
                _ => return Ok(Some(TriBool::Unknown)),
            }
        }

        // Walk the digits, recomputing every track entry from the step
        // graphs; packed reads inside the graphs resolve against the
        // histories recorded so far.
        for (p, digit) in digits.iter().enumerate() {
            if !self.spend(2 + k as u64) {
                return Ok(Some(TriBool::Unknown));
            }
            let mut sub = bind.clone();
            sub.insert(df.step.pos, Val::Num(BigUint::from(p)));
            sub.insert(df.step.digit, Val::Num(BigUint::from(*digit)));
            for j in 0..k {
                sub.insert(df.step.cur[j], Val::Num(tables[j].borrow()[p].clone()));
                let (c, d) = df.tracks[j];
                sub.insert(c, Val::Table(tables[j].clone()));
                sub.insert(d, Val::Table(tables[j].clone()));
            }
            let next_bindable: BTreeSet<Variable> = df.step.next.iter().copied().collect();
            match self.solve_conjuncts(
                df.step.graphs.clone(),
                &mut sub,
                &next_bindable,
                &[],
                depth + 1,
            )? {
                TriBool::True => {}
                other => return Ok(Some(other)),
            }
            for j in 0..k {
                match sub.get(&df.step.next[j]) {
                    Some(Val::Num(v)) => tables[j].borrow_mut().push(v.clone()),
                    _ => return Ok(Some(TriBool::Unknown)),
                }
            }
        }

        // Final entries feed the output clause; its forced bindings (the
        // block's result wires) are adopted into the caller's environment.
        let mut sub = bind.clone();
        for j in 0..k {
            let last = tables[j].borrow().last().expect("init entry").clone();
            sub.insert(df.finals[j], Val::Num(last));
        }
        let r = self.solve_conjuncts(vec![df.out], &mut sub, bindable, &[], depth + 1)?;
        if r == TriBool::True {
            for v in bindable {
                if !bind.contains_key(v) {
                    if let Some(val) = sub.get(v) {
                        bind.insert(*v, val.clone());
                    }
                }
            }
        }
        Ok(Some(r))
    }

    fn simulate_count(
        &mut self,
        cf: &CountFold<'_>,
        bind: &mut Env,
        bindable: &BTreeSet<Variable>,
        depth: u32,
    ) -> Result<Option<TriBool>, EvalError> {
        let count = match value_of(cf.count, bind)? {
            Some(c) => c,
            None => return Ok(None),
        };
        let n = match count.to_u64() {
            Some(n) => n,
            None => return Ok(Some(TriBool::Unknown)),
        };
        let mut sub = bind.clone();
        let mut only = BTreeSet::new();
        only.insert(cf.init_var);
        match self.solve_conjuncts(vec![cf.init], &mut sub, &only, &[], depth + 1)? {
            TriBool::True => {}
            other => return Ok(Some(other)),
        }
        let mut acc = match sub.get(&cf.init_var) {
            Some(Val::Num(v)) => v.clone(),
            _ => return Ok(Some(TriBool::Unknown)),
        };
        for p in 0..n {
            if !self.spend(2) {
                return Ok(Some(TriBool::Unknown));
            }
            let mut sub = bind.clone();
            sub.insert(cf.pos, Val::Num(BigUint::from(p)));
            sub.insert(cf.cur, Val::Num(acc));
            let mut only = BTreeSet::new();
            only.insert(cf.next);
            match self.solve_conjuncts(vec![cf.step], &mut sub, &only, &[], depth + 1)? {
                TriBool::True => {}
                other => return Ok(Some(other)),
            }
            acc = match sub.get(&cf.next) {
                Some(Val::Num(v)) => v.clone(),
                _ => return Ok(Some(TriBool::Unknown)),
            };
        }
        match cf.result {
            Term::Var { var } if !bind.contains_key(var) => {
                if bindable.contains(var) {
                    bind.insert(*var, Val::Num(acc));
                    Ok(Some(TriBool::True))
                } else {
                    Ok(Some(TriBool::Unknown))
                }
            }
            t => Ok(Some(match value_of(t, bind)? {
                Some(v) => TriBool::from_bool(v == acc),
                None => TriBool::Unknown,
            })),
        }
    }

    /// The slot-substitution inversion.  If `item` is (a renaming of) the
    /// compiled `subst_slot` relation applied to a known pattern code and a
    /// known result code with the entry sequence `y` unknown, recover the
    /// unique candidate for `y` from the shapes of the two formulas, verify
    /// it by running the recursive definition, and bind it.  A structural
    /// mismatch refutes the block — but only when a sibling conjunct
    /// requires `y`'s entries to be closed value terms, which rules out the
    /// degenerate encodings that could otherwise still satisfy `item`.
    fn invert_substitution(
        &mut self,
        item: &Formula,
        items: &[&Formula],
        open: &[bool],
        y: Variable,
        bind: &mut Env,
    ) -> Result<Option<Attempt>, EvalError> {
        let graph = match compiled_library().get("subst_slot") {
            Some(g) => g,
            None => return Ok(None),
        };
        let assign = match alpha_instance(graph, item) {
            Some(a) => a,
            None => return Ok(None),
        };
        if assign[1] != Term::var(y) {
            return Ok(None);
        }
        let pattern = match value_of(&assign[0], bind)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let result = match value_of(&assign[2], bind)? {
            Some(v) => v,
            None => return Ok(None),
        };
        // The guard that makes refutation sound: some sibling demands that
        // y's entries are closed value terms.
        let guarded = items.iter().zip(open).any(|(f, is_open)| {
            let _ = is_open;
            value_sequence_guard(f) == Some(y)
        });
        if !guarded {
            return Ok(None);
        }
        let template = match godel::decode_formula(&pattern) {
            Ok(t) => t,
            Err(_) => return Ok(None),
        };
        let phi = match godel::decode_formula(&result) {
            Ok(p) => p,
            // A pattern with valid closed-term entries always produces a
            // well-formed code, so an undecodable result is unreachable.
            Err(_) => return Ok(Some(Attempt::Refuted)),
        };
        let mut captures = BTreeMap::new();
        if !capture_slots(&template, &phi, &mut captures) {
            return Ok(Some(Attempt::Refuted));
        }
        let max = captures.keys().max().copied().unwrap_or(0);
        let mut entries = Vec::new();
        for j in 1..=max {
            match captures.get(&j) {
                Some(t) => entries.push(godel::encode_term(t)),
                // A placeholder index with no occurrence leaves the entry
                // unconstrained; the candidate is not unique, so pass.
                None => return Ok(None),
            }
        }
        let y_val = godel::encode_sequence(&entries).value;
        match pr::eval_pr(library(), "subst_slot", &[pattern, y_val.clone()]) {
            Ok(v) if v == result => {
                bind.insert(y, Val::Num(y_val));
                Ok(Some(Attempt::Settled))
            }
            _ => Ok(None),
        }
    }

    /// Search 0..budget.search for the first `var` instance giving `body`
    /// the wanted verdict (witness extraction for reports).
    fn first_instance(
        &mut self,
        var: Variable,
        body: &Formula,
        wanted: TriBool,
    ) -> Result<Option<BigUint>, EvalError> {
        for w in 0..self.budget.search {
            let mut bind = Env::new();
            bind.insert(var, Val::Num(BigUint::from(w)));
            if self.solve(body, &mut bind, &BTreeSet::new(), 0)? == wanted {
                return Ok(Some(BigUint::from(w)));
            }
        }
        Ok(None)
    }
}

/// Flatten a conjunction spine into its conjuncts.
fn flatten_and<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And { left, right } => {
            flatten_and(left, out);
            flatten_and(right, out);
        }
        _ => out.push(f),
    }
}

/// Match `∃g (IsValueTermSeq(y, g) ∧ g = S(0))` and return `y`'s variable.
fn value_sequence_guard(f: &Formula) -> Option<Variable> {
    let graph = compiled_library().get("is_value_term_seq")?;
    let Formula::Exists { var: gv, body } = f else {
        return None;
    };
    let Formula::And { left, right } = body.as_ref() else {
        return None;
    };
    let one = Term::succ(Term::Zero);
    let gv_term = Term::var(*gv);
    let is_flag = |l: &Term, r: &Term| (*l == gv_term && *r == one) || (*l == one && *r == gv_term);
    match right.as_ref() {
        Formula::Eq { left: l, right: r } if is_flag(l, r) => {}
        _ => return None,
    }
    let assign = alpha_instance(graph, left)?;
    if assign[1] != gv_term {
        return None;
    }
    match &assign[0] {
        Term::Var { var } => Some(*var),
        _ => None,
    }
}

/// Match `f` against an instantiation of `graph`: identical up to renaming
/// of quantified variables, with the graph's argument and output variables
/// replaced by arbitrary terms.  Returns those terms in argument order
/// (output last).
fn alpha_instance(graph: &GraphFormula, f: &Formula) -> Option<Vec<Term>> {
    struct Ctx<'a> {
        arity: usize,
        g_bound: Vec<Variable>,
        c_bound: Vec<Variable>,
        assign: BTreeMap<u32, &'a Term>,
    }

    fn term<'a>(g: &Term, c: &'a Term, ctx: &mut Ctx<'a>) -> bool {
        if let Term::Var { var } = g {
            if var.kind == VarKind::Object {
                if let Some(pos) = ctx.g_bound.iter().rposition(|b| b == var) {
                    return matches!(c, Term::Var { var: cv }
                        if ctx.c_bound.iter().rposition(|b| b == cv) == Some(pos));
                }
                if (var.index as usize) <= ctx.arity + 1 {
                    // A free argument variable: `c` may be any term not
                    // capturing the candidate's bound variables.
                    if c.variables()
                        .iter()
                        .any(|v| ctx.c_bound.contains(v))
                    {
                        return false;
                    }
                    return match ctx.assign.get(&var.index) {
                        Some(prev) => *prev == c,
                        None => {
                            ctx.assign.insert(var.index, c);
                            true
                        }
                    };
                }
                return false;
            }
        }
        match (g, c) {
            (Term::Zero, Term::Zero) => true,
            (Term::Num { value: a }, Term::Num { value: b }) => a == b,
            (Term::Succ { arg: a }, Term::Succ { arg: b }) => term(a, b, ctx),
            (Term::Add { left: a, right: b }, Term::Add { left: x, right: y })
            | (Term::Mul { left: a, right: b }, Term::Mul { left: x, right: y }) => {
                term(a, x, ctx) && term(b, y, ctx)
            }
            (Term::Proj { seq: a, idx: b }, Term::Proj { seq: x, idx: y }) => {
                term(a, x, ctx) && term(b, y, ctx)
            }
            (Term::Var { var: a }, Term::Var { var: b }) => a == b,
            _ => false,
        }
    }

    fn formula<'a>(g: &Formula, c: &'a Formula, ctx: &mut Ctx<'a>) -> bool {
        match (g, c) {
            (Formula::Eq { left: a, right: b }, Formula::Eq { left: x, right: y })
            | (Formula::Lt { left: a, right: b }, Formula::Lt { left: x, right: y }) => {
                term(a, x, ctx) && term(b, y, ctx)
            }
            (Formula::Not { arg: a }, Formula::Not { arg: b }) => formula(a, b, ctx),
            (Formula::And { left: a, right: b }, Formula::And { left: x, right: y })
            | (Formula::Or { left: a, right: b }, Formula::Or { left: x, right: y }) => {
                formula(a, x, ctx) && formula(b, y, ctx)
            }
            (Formula::Forall { var: a, body: f }, Formula::Forall { var: b, body: g2 })
            | (Formula::Exists { var: a, body: f }, Formula::Exists { var: b, body: g2 }) => {
                ctx.g_bound.push(*a);
                ctx.c_bound.push(*b);
                let ok = formula(f, g2, ctx);
                ctx.g_bound.pop();
                ctx.c_bound.pop();
                ok
            }
            (Formula::Pred { name: a, arg: f }, Formula::Pred { name: b, arg: g2 }) => {
                a == b && term(f, g2, ctx)
            }
            _ => false,
        }
    }

    let mut ctx = Ctx {
        arity: graph.arity,
        g_bound: Vec::new(),
        c_bound: Vec::new(),
        assign: BTreeMap::new(),
    };
    if !formula(&graph.formula, f, &mut ctx) {
        return None;
    }
    let mut out = Vec::with_capacity(graph.arity + 1);
    for i in 1..=(graph.arity as u32 + 1) {
        let t: &&Term = ctx.assign.get(&i)?;
        out.push((*t).clone());
    }
    Some(out)
}

/// Match a result formula against a pattern with placeholders: identical
/// node for node, except that a placeholder in term position captures the
/// corresponding result subterm (consistently across repeats).
fn capture_slots(pattern: &Formula, phi: &Formula, caps: &mut BTreeMap<u32, Term>) -> bool {
    fn term(p: &Term, t: &Term, caps: &mut BTreeMap<u32, Term>) -> bool {
        if let Term::Var { var } = p {
            if var.kind == VarKind::Slot {
                return match caps.get(&var.index) {
                    Some(prev) => prev == t,
                    None => {
                        caps.insert(var.index, t.clone());
                        true
                    }
                };
            }
        }
        match (p, t) {
            (Term::Zero, Term::Zero) => true,
            (Term::Num { value: a }, Term::Num { value: b }) => a == b,
            (Term::Succ { arg: a }, Term::Succ { arg: b }) => term(a, b, caps),
            (Term::Add { left: a, right: b }, Term::Add { left: x, right: y })
            | (Term::Mul { left: a, right: b }, Term::Mul { left: x, right: y }) => {
                term(a, x, caps) && term(b, y, caps)
            }
            (Term::Proj { seq: a, idx: b }, Term::Proj { seq: x, idx: y }) => {
                term(a, x, caps) && term(b, y, caps)
            }
            (Term::Var { var: a }, Term::Var { var: b }) => a == b,
            _ => false,
        }
    }

    match (pattern, phi) {
        (Formula::Eq { left: a, right: b }, Formula::Eq { left: x, right: y })
        | (Formula::Lt { left: a, right: b }, Formula::Lt { left: x, right: y }) => {
            term(a, x, caps) && term(b, y, caps)
        }
        (Formula::Not { arg: a }, Formula::Not { arg: b }) => capture_slots(a, b, caps),
        (Formula::And { left: a, right: b }, Formula::And { left: x, right: y })
        | (Formula::Or { left: a, right: b }, Formula::Or { left: x, right: y }) => {
            capture_slots(a, x, caps) && capture_slots(b, y, caps)
        }
        (Formula::Forall { var: a, body: f }, Formula::Forall { var: b, body: g })
        | (Formula::Exists { var: a, body: f }, Formula::Exists { var: b, body: g }) => {
            a == b && capture_slots(f, g, caps)
        }
        (Formula::Pred { name: a, arg: f }, Formula::Pred { name: b, arg: g }) => {
            a == b && term(f, g, caps)
        }
        _ => false,
    }
}
