//! Terms and formulas of first-order arithmetic.
//!
//! The base language `L` has `0`, `S`, `+`, `*` and the relations `=` and
//! `<`. The extended language `L+` adds the binary projection term `p(t, s)`
//! (the `s`-th element of the sequence coded by `t`). Two further variable
//! kinds support the template machinery: numbered placeholders `e1, e2, ...`
//! and the anonymous marker `w`, both of which behave like extra free
//! variable symbols. A unary predicate hole `P(t)` is available so that
//! schematic formulas can be instantiated by formula substitution.
//!
//! Everything here is plain immutable data with structural equality; the
//! parser and printer live in the sibling modules and round-trip exactly.

mod display;
mod parse;

pub use parse::{parse_formula, parse_term, ParseError};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Which syntactic role a variable symbol plays.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// An ordinary object variable `v1, v2, ...` (the only kind quantifiers
    /// may bind).
    Object,
    /// A template placeholder `e1, e2, ...`; always free, 1-based.
    Slot,
    /// The anonymous marker `w` produced by the bar transform; always free.
    Marker,
}

/// A variable symbol. Object variables and slots are numbered from 1; the
/// marker `w` carries index 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Variable {
    pub index: u32,
    pub kind: VarKind,
}

impl Variable {
    /// The object variable `v{index}`. Indices start at 1.
    pub fn obj(index: u32) -> Self {
        debug_assert!(index >= 1);
        Variable { index, kind: VarKind::Object }
    }

    /// The placeholder `e{index}`. Indices start at 1.
    pub fn slot(index: u32) -> Self {
        debug_assert!(index >= 1);
        Variable { index, kind: VarKind::Slot }
    }

    /// The marker `w`.
    pub fn marker() -> Self {
        Variable { index: 0, kind: VarKind::Marker }
    }

    pub fn is_object(&self) -> bool {
        self.kind == VarKind::Object
    }
}

/// A first-order arithmetic term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Term {
    Zero,
    Succ { arg: Box<Term> },
    Add { left: Box<Term>, right: Box<Term> },
    Mul { left: Box<Term>, right: Box<Term> },
    Var { var: Variable },
    /// Projection `p(seq, idx)` of `L+`: the `idx`-th element (1-based) of
    /// the sequence coded by `seq`.
    Proj { seq: Box<Term>, idx: Box<Term> },
    /// A compact numeral literal `#n`, denoting the same object as the
    /// explicit chain `S(...S(0)...)` with `n` applications. Needed because
    /// numerals of Gödel codes are astronomically long when spelled out.
    Num {
        #[serde(with = "biguint_decimal")]
        value: BigUint,
    },
}

/// A first-order arithmetic formula.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Formula {
    Eq { left: Term, right: Term },
    Lt { left: Term, right: Term },
    Not { arg: Box<Formula> },
    And { left: Box<Formula>, right: Box<Formula> },
    Or { left: Box<Formula>, right: Box<Formula> },
    Forall { var: Variable, body: Box<Formula> },
    Exists { var: Variable, body: Box<Formula> },
    /// Application `P(t)` of a schematic unary predicate.
    Pred { name: String, arg: Term },
}

/// Decimal-string serialization for big naturals, so JSON stays readable.
pub(crate) mod biguint_decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    /// The same encoding for optional fields.
    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<BigUint>, D::Error> {
            let raw: Option<String> = Option::deserialize(d)?;
            raw.map(|s| BigUint::from_str(&s).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::from_str(&s).map_err(|e| D::Error::custom(format!("bad numeral literal: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Constructor helpers
// ---------------------------------------------------------------------------

impl Term {
    pub fn succ(t: Term) -> Term {
        Term::Succ { arg: Box::new(t) }
    }

    pub fn add(l: Term, r: Term) -> Term {
        Term::Add { left: Box::new(l), right: Box::new(r) }
    }

    pub fn mul(l: Term, r: Term) -> Term {
        Term::Mul { left: Box::new(l), right: Box::new(r) }
    }

    pub fn var(v: Variable) -> Term {
        Term::Var { var: v }
    }

    /// The object variable `v{i}` as a term.
    pub fn v(i: u32) -> Term {
        Term::Var { var: Variable::obj(i) }
    }

    /// The placeholder `e{i}` as a term.
    pub fn e(i: u32) -> Term {
        Term::Var { var: Variable::slot(i) }
    }

    /// The marker `w` as a term.
    pub fn w() -> Term {
        Term::Var { var: Variable::marker() }
    }

    pub fn proj(seq: Term, idx: Term) -> Term {
        Term::Proj { seq: Box::new(seq), idx: Box::new(idx) }
    }

    pub fn num<N: Into<BigUint>>(n: N) -> Term {
        Term::Num { value: n.into() }
    }

    /// `S(S(...S(0)...))` with `n` successors, spelled out.
    pub fn numeral(n: u64) -> Term {
        let mut t = Term::Zero;
        for _ in 0..n {
            t = Term::succ(t);
        }
        t
    }

    /// All variable symbols occurring in the term (terms bind nothing, so
    /// every occurrence is free).
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Term::Zero | Term::Num { .. } => {}
            Term::Succ { arg } => arg.collect_variables(out),
            Term::Add { left, right } | Term::Mul { left, right } => {
                left.collect_variables(out);
                right.collect_variables(out);
            }
            Term::Var { var } => {
                out.insert(*var);
            }
            Term::Proj { seq, idx } => {
                seq.collect_variables(out);
                idx.collect_variables(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.variables().is_empty()
    }

    /// True when the term is in the base language `L` (no projection, no
    /// placeholders, no marker). Numeral literals count as `L`: they
    /// abbreviate successor chains.
    pub fn is_pa(&self) -> bool {
        match self {
            Term::Zero | Term::Num { .. } => true,
            Term::Succ { arg } => arg.is_pa(),
            Term::Add { left, right } | Term::Mul { left, right } => left.is_pa() && right.is_pa(),
            Term::Var { var } => var.kind == VarKind::Object,
            Term::Proj { .. } => false,
        }
    }

    /// True when the term is in `L+`: projections allowed, placeholders and
    /// markers not.
    pub fn is_pa_plus(&self) -> bool {
        match self {
            Term::Zero | Term::Num { .. } => true,
            Term::Succ { arg } => arg.is_pa_plus(),
            Term::Add { left, right } | Term::Mul { left, right } => {
                left.is_pa_plus() && right.is_pa_plus()
            }
            Term::Var { var } => var.kind == VarKind::Object,
            Term::Proj { seq, idx } => seq.is_pa_plus() && idx.is_pa_plus(),
        }
    }

    /// Replace every occurrence of variable `v` by `t` (terms bind nothing).
    pub fn substitute(&self, v: Variable, t: &Term) -> Term {
        match self {
            Term::Zero | Term::Num { .. } => self.clone(),
            Term::Succ { arg } => Term::succ(arg.substitute(v, t)),
            Term::Add { left, right } => Term::add(left.substitute(v, t), right.substitute(v, t)),
            Term::Mul { left, right } => Term::mul(left.substitute(v, t), right.substitute(v, t)),
            Term::Var { var } => {
                if *var == v {
                    t.clone()
                } else {
                    self.clone()
                }
            }
            Term::Proj { seq, idx } => Term::proj(seq.substitute(v, t), idx.substitute(v, t)),
        }
    }

    /// Number of nodes in the term tree (a numeral literal counts as one).
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::Var { .. } | Term::Num { .. } => 1,
            Term::Succ { arg } => 1 + arg.size(),
            Term::Add { left, right } | Term::Mul { left, right } => 1 + left.size() + right.size(),
            Term::Proj { seq, idx } => 1 + seq.size() + idx.size(),
        }
    }

    /// Height of the term tree in vertices (a leaf has height 1).
    pub fn height(&self) -> usize {
        match self {
            Term::Zero | Term::Var { .. } | Term::Num { .. } => 1,
            Term::Succ { arg } => 1 + arg.height(),
            Term::Add { left, right } | Term::Mul { left, right } => {
                1 + left.height().max(right.height())
            }
            Term::Proj { seq, idx } => 1 + seq.height().max(idx.height()),
        }
    }
}

impl Formula {
    pub fn eq(l: Term, r: Term) -> Formula {
        Formula::Eq { left: l, right: r }
    }

    pub fn lt(l: Term, r: Term) -> Formula {
        Formula::Lt { left: l, right: r }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not { arg: Box::new(f) }
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And { left: Box::new(l), right: Box::new(r) }
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or { left: Box::new(l), right: Box::new(r) }
    }

    pub fn forall(v: Variable, body: Formula) -> Formula {
        debug_assert!(v.is_object(), "quantifiers bind object variables only");
        Formula::Forall { var: v, body: Box::new(body) }
    }

    pub fn exists(v: Variable, body: Formula) -> Formula {
        debug_assert!(v.is_object(), "quantifiers bind object variables only");
        Formula::Exists { var: v, body: Box::new(body) }
    }

    pub fn pred(name: &str, arg: Term) -> Formula {
        Formula::Pred { name: name.to_string(), arg }
    }

    /// `exists v. (v < bound /\ body)` — the canonical bounded existential.
    pub fn exists_below(v: Variable, bound: Term, body: Formula) -> Formula {
        Formula::exists(v, Formula::and(Formula::lt(Term::var(v), bound), body))
    }

    /// `forall v. (~(v < bound) \/ body)` — the canonical bounded universal
    /// (`forall v < bound. body` in the surface syntax).
    pub fn forall_below(v: Variable, bound: Term, body: Formula) -> Formula {
        Formula::forall(
            v,
            Formula::or(Formula::not(Formula::lt(Term::var(v), bound)), body),
        )
    }

    /// Variables with at least one free occurrence. Placeholders and markers
    /// are always free; object variables are free where no enclosing
    /// quantifier binds them.
    pub fn free_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Variable>, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                for v in left.variables().into_iter().chain(right.variables()) {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Not { arg } => arg.collect_free(bound, out),
            Formula::And { left, right } | Formula::Or { left, right } => {
                left.collect_free(bound, out);
                right.collect_free(bound, out);
            }
            Formula::Forall { var, body } | Formula::Exists { var, body } => {
                bound.push(*var);
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Pred { arg, .. } => {
                for v in arg.variables() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
        }
    }

    /// All variable symbols occurring anywhere, free or bound (binders
    /// included).
    pub fn all_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                out.extend(left.variables());
                out.extend(right.variables());
            }
            Formula::Not { arg } => arg.collect_all(out),
            Formula::And { left, right } | Formula::Or { left, right } => {
                left.collect_all(out);
                right.collect_all(out);
            }
            Formula::Forall { var, body } | Formula::Exists { var, body } => {
                out.insert(*var);
                body.collect_all(out);
            }
            Formula::Pred { arg, .. } => out.extend(arg.variables()),
        }
    }

    /// A sentence has no free variables of any kind.
    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Base-language check: no projection, placeholder, marker or predicate
    /// hole anywhere.
    pub fn is_pa(&self) -> bool {
        match self {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                left.is_pa() && right.is_pa()
            }
            Formula::Not { arg } => arg.is_pa(),
            Formula::And { left, right } | Formula::Or { left, right } => {
                left.is_pa() && right.is_pa()
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => body.is_pa(),
            Formula::Pred { .. } => false,
        }
    }

    /// `L+` check: projections allowed, placeholders/markers/holes not.
    pub fn is_pa_plus(&self) -> bool {
        match self {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                left.is_pa_plus() && right.is_pa_plus()
            }
            Formula::Not { arg } => arg.is_pa_plus(),
            Formula::And { left, right } | Formula::Or { left, right } => {
                left.is_pa_plus() && right.is_pa_plus()
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => body.is_pa_plus(),
            Formula::Pred { .. } => false,
        }
    }

    /// Nesting depth of connectives and quantifiers; atoms have depth 0 and
    /// every symbol counts one level.
    pub fn logical_complexity(&self) -> u32 {
        match self {
            Formula::Eq { .. } | Formula::Lt { .. } | Formula::Pred { .. } => 0,
            Formula::Not { arg } => 1 + arg.logical_complexity(),
            Formula::And { left, right } | Formula::Or { left, right } => {
                1 + left.logical_complexity().max(right.logical_complexity())
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
                1 + body.logical_complexity()
            }
        }
    }

    /// Number of nodes in the formula tree, terms included.
    pub fn size(&self) -> usize {
        match self {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                1 + left.size() + right.size()
            }
            Formula::Not { arg } => 1 + arg.size(),
            Formula::And { left, right } | Formula::Or { left, right } => {
                1 + left.size() + right.size()
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => 1 + body.size(),
            Formula::Pred { arg, .. } => 1 + arg.size(),
        }
    }

    /// Replace every free occurrence of `v` by the term `t`, renaming bound
    /// variables where they would capture a variable of `t`. Renaming picks
    /// the smallest object index not occurring in the affected subformula or
    /// in `t`, so results are deterministic.
    pub fn substitute_term(&self, v: Variable, t: &Term) -> Formula {
        match self {
            Formula::Eq { left, right } => {
                Formula::eq(left.substitute(v, t), right.substitute(v, t))
            }
            Formula::Lt { left, right } => {
                Formula::lt(left.substitute(v, t), right.substitute(v, t))
            }
            Formula::Not { arg } => Formula::not(arg.substitute_term(v, t)),
            Formula::And { left, right } => {
                Formula::and(left.substitute_term(v, t), right.substitute_term(v, t))
            }
            Formula::Or { left, right } => {
                Formula::or(left.substitute_term(v, t), right.substitute_term(v, t))
            }
            Formula::Forall { var, body } | Formula::Exists { var, body } => {
                let rebuild = |var: Variable, body: Formula| match self {
                    Formula::Forall { .. } => Formula::forall(var, body),
                    _ => Formula::exists(var, body),
                };
                if *var == v || !body.free_variables().contains(&v) {
                    // The binder shadows v, or v is not free below: nothing
                    // to substitute.
                    rebuild(*var, body.as_ref().clone())
                } else if t.variables().contains(var) {
                    // Capture: rename the binder first.
                    let fresh = fresh_object_index(&[body.all_variables(), t.variables()]);
                    let fv = Variable::obj(fresh);
                    let renamed = body.substitute_term(*var, &Term::var(fv));
                    rebuild(fv, renamed.substitute_term(v, t))
                } else {
                    rebuild(*var, body.substitute_term(v, t))
                }
            }
            Formula::Pred { name, arg } => Formula::Pred {
                name: name.clone(),
                arg: arg.substitute(v, t),
            },
        }
    }

    /// Instantiate the schematic predicate `name`: every `P(t)` becomes
    /// `psi[hole := t]`. Binders of `self` that clash with variables of
    /// `psi` (bound or free) are renamed first, so no variable of an
    /// inserted instance is ever captured.
    pub fn substitute_predicate(&self, name: &str, psi: &Formula, hole: Variable) -> Formula {
        let mut avoid: BTreeSet<Variable> = psi.all_variables();
        avoid.remove(&hole);
        self.substitute_predicate_inner(name, psi, hole, &avoid)
    }

    fn substitute_predicate_inner(
        &self,
        name: &str,
        psi: &Formula,
        hole: Variable,
        avoid: &BTreeSet<Variable>,
    ) -> Formula {
        match self {
            Formula::Eq { .. } | Formula::Lt { .. } => self.clone(),
            Formula::Not { arg } => {
                Formula::not(arg.substitute_predicate_inner(name, psi, hole, avoid))
            }
            Formula::And { left, right } => Formula::and(
                left.substitute_predicate_inner(name, psi, hole, avoid),
                right.substitute_predicate_inner(name, psi, hole, avoid),
            ),
            Formula::Or { left, right } => Formula::or(
                left.substitute_predicate_inner(name, psi, hole, avoid),
                right.substitute_predicate_inner(name, psi, hole, avoid),
            ),
            Formula::Forall { var, body } | Formula::Exists { var, body } => {
                let rebuild = |var: Variable, body: Formula| match self {
                    Formula::Forall { .. } => Formula::forall(var, body),
                    _ => Formula::exists(var, body),
                };
                if avoid.contains(var) && body.contains_pred(name) {
                    let fresh = fresh_object_index(&[
                        body.all_variables(),
                        avoid.iter().copied().collect(),
                    ]);
                    let fv = Variable::obj(fresh);
                    let renamed = body.substitute_term(*var, &Term::var(fv));
                    rebuild(fv, renamed.substitute_predicate_inner(name, psi, hole, avoid))
                } else {
                    rebuild(
                        *var,
                        body.substitute_predicate_inner(name, psi, hole, avoid),
                    )
                }
            }
            Formula::Pred { name: n, arg } => {
                if n == name {
                    psi.substitute_term(hole, arg)
                } else {
                    self.clone()
                }
            }
        }
    }

    pub fn contains_pred(&self, name: &str) -> bool {
        match self {
            Formula::Eq { .. } | Formula::Lt { .. } => false,
            Formula::Not { arg } => arg.contains_pred(name),
            Formula::And { left, right } | Formula::Or { left, right } => {
                left.contains_pred(name) || right.contains_pred(name)
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
                body.contains_pred(name)
            }
            Formula::Pred { name: n, .. } => n == name,
        }
    }
}

/// The smallest object-variable index ≥ 1 not used in any of the given sets.
fn fresh_object_index(used: &[BTreeSet<Variable>]) -> u32 {
    let mut taken = BTreeSet::new();
    for set in used {
        for v in set {
            if v.kind == VarKind::Object {
                taken.insert(v.index);
            }
        }
    }
    (1..).find(|i| !taken.contains(i)).unwrap()
}

// ---------------------------------------------------------------------------
// Term occurrence analysis
// ---------------------------------------------------------------------------

/// One term occurrence inside a formula, located by the path of child edges
/// from the root (formula children first, then positions within the atom's
/// terms).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermOccurrence {
    /// Edge indices from the formula root down to this occurrence.
    pub path: Vec<usize>,
    pub term: Term,
    /// True when the occurrence contains a variable that is bound at this
    /// position by an enclosing quantifier.
    pub bounded: bool,
    /// True when no enclosing term occurrence shares this occurrence's
    /// label — i.e. a maximal free or maximal bounded occurrence.
    pub maximal: bool,
}

/// Label every term occurrence of the formula (all subterms, not just the
/// atoms' top-level terms) as free or bounded. An occurrence is bounded when
/// it contains at least one variable occurrence bound at that position.
pub fn classify_term_occurrences(phi: &Formula) -> Vec<TermOccurrence> {
    let mut out = Vec::new();
    walk_formula(phi, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

fn walk_formula(
    phi: &Formula,
    bound: &mut Vec<Variable>,
    path: &mut Vec<usize>,
    out: &mut Vec<TermOccurrence>,
) {
    match phi {
        Formula::Eq { left, right } | Formula::Lt { left, right } => {
            path.push(0);
            walk_term(left, bound, path, true, out);
            path.pop();
            path.push(1);
            walk_term(right, bound, path, true, out);
            path.pop();
        }
        Formula::Not { arg } => {
            path.push(0);
            walk_formula(arg, bound, path, out);
            path.pop();
        }
        Formula::And { left, right } | Formula::Or { left, right } => {
            path.push(0);
            walk_formula(left, bound, path, out);
            path.pop();
            path.push(1);
            walk_formula(right, bound, path, out);
            path.pop();
        }
        Formula::Forall { var, body } | Formula::Exists { var, body } => {
            bound.push(*var);
            path.push(0);
            walk_formula(body, bound, path, out);
            path.pop();
            bound.pop();
        }
        Formula::Pred { arg, .. } => {
            path.push(0);
            walk_term(arg, bound, path, true, out);
            path.pop();
        }
    }
}

fn walk_term(
    t: &Term,
    bound: &[Variable],
    path: &mut Vec<usize>,
    parent_is_formula: bool,
    out: &mut Vec<TermOccurrence>,
) {
    let bounded = t.variables().iter().any(|v| bound.contains(v));
    // A maximal occurrence is one whose label differs from its parent's, or
    // which sits directly under the atom. A bounded parent can contain free
    // children (they are the interesting maximal free occurrences); a free
    // parent only contains free children.
    let parent_bounded = if parent_is_formula {
        None
    } else {
        Some(out.iter().rev().find(|o| path.starts_with(&o.path)).map(|o| o.bounded))
    };
    let maximal = match parent_bounded {
        None => true,
        Some(Some(pb)) => pb != bounded,
        Some(None) => true,
    };
    out.push(TermOccurrence { path: path.clone(), term: t.clone(), bounded, maximal });
    let children: Vec<&Term> = match t {
        Term::Zero | Term::Var { .. } | Term::Num { .. } => vec![],
        Term::Succ { arg } => vec![arg],
        Term::Add { left, right } | Term::Mul { left, right } => vec![left, right],
        Term::Proj { seq, idx } => vec![seq, idx],
    };
    for (i, c) in children.into_iter().enumerate() {
        path.push(i);
        walk_term(c, bound, path, false, out);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fml(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn free_variables_examples() {
        // ∃v1 SS(v1)+S(v2) = SS(v3): v2 and v3 free.
        let phi = fml("exists v1. S(S(v1)) + S(v2) = S(S(v3))");
        let fv = phi.free_variables();
        assert_eq!(
            fv.into_iter().collect::<Vec<_>>(),
            vec![Variable::obj(2), Variable::obj(3)]
        );

        assert!(fml("0 = 0").free_variables().is_empty());

        // Mixed occurrence: v1 bound on the left conjunct, free on the right.
        let phi = fml("(forall v1. v1 = v2) /\\ v1 = 0");
        let fv = phi.free_variables();
        assert_eq!(
            fv.into_iter().collect::<Vec<_>>(),
            vec![Variable::obj(1), Variable::obj(2)]
        );
    }

    #[test]
    fn logical_complexity_examples() {
        assert_eq!(fml("S(0) = 0").logical_complexity(), 0);
        let five = fml("forall v1. forall v2. forall v3. forall v4. forall v5. v1 = v1");
        assert_eq!(five.logical_complexity(), 5);
        assert_eq!(fml("0 = 0 /\\ S(0) = S(0)").logical_complexity(), 1);
    }

    #[test]
    fn complexity_recursion_shape() {
        let a = fml("0 = 0");
        let b = fml("exists v1. v1 = 0");
        assert_eq!(
            Formula::and(a.clone(), b.clone()).logical_complexity(),
            1 + a.logical_complexity().max(b.logical_complexity())
        );
        assert_eq!(Formula::not(b.clone()).logical_complexity(), b.logical_complexity() + 1);
        assert_eq!(
            Formula::forall(Variable::obj(7), b.clone()).logical_complexity(),
            b.logical_complexity() + 1
        );
    }

    #[test]
    fn occurrence_classification_example() {
        // ∃v1 SS(v1)+S(v2) = SS(v3): SS(v1) and SS(v1)+S(v2) bounded;
        // S(v2) and SS(v3) free.
        let phi = fml("exists v1. S(S(v1)) + S(v2) = S(S(v3))");
        let occ = classify_term_occurrences(&phi);
        let find = |s: &str| {
            let t = parse_term(s).unwrap();
            occ.iter().find(|o| o.term == t).unwrap_or_else(|| panic!("no occurrence of {s}"))
        };
        assert!(find("S(S(v1))").bounded);
        assert!(find("S(S(v1)) + S(v2)").bounded);
        assert!(!find("S(v2)").bounded);
        assert!(!find("S(S(v3))").bounded);
        // Maximality: the sum is the maximal bounded occurrence on the left,
        // S(v2) the maximal free occurrence inside it.
        assert!(find("S(S(v1)) + S(v2)").maximal);
        assert!(find("S(v2)").maximal);
        assert!(!find("S(S(v1))").maximal);
    }

    #[test]
    fn occurrence_classification_trivia() {
        let occ = classify_term_occurrences(&fml("0 = 0"));
        assert!(occ.iter().all(|o| !o.bounded));

        let occ = classify_term_occurrences(&fml("forall v2. S(v2) = S(v2)"));
        assert!(occ.iter().all(|o| o.bounded));
    }

    #[test]
    fn substitute_term_examples() {
        let s0 = parse_term("S(0)").unwrap();
        assert_eq!(
            fml("v1 = 0").substitute_term(Variable::obj(1), &s0),
            fml("S(0) = 0")
        );
        // Identity on sentences.
        assert_eq!(fml("0 = 0").substitute_term(Variable::obj(1), &s0), fml("0 = 0"));
        assert_eq!(
            fml("forall v1. v1 = v2").substitute_term(Variable::obj(2), &Term::Zero),
            fml("forall v1. v1 = 0")
        );
    }

    #[test]
    fn substitute_term_avoids_capture() {
        // (∃v1. v1 = v2)[v2 := S(v1)] must rename the binder, not capture.
        let phi = fml("exists v1. v1 = v2");
        let t = parse_term("S(v1)").unwrap();
        let got = phi.substitute_term(Variable::obj(2), &t);
        assert_eq!(got, fml("exists v3. v3 = S(v1)"));
        let fv = got.free_variables();
        assert!(fv.contains(&Variable::obj(1)));
        assert!(!fv.contains(&Variable::obj(2)));
    }

    #[test]
    fn substitute_predicate_worked_example() {
        // δ = ∃z,w (P(z+w) ∧ ∀z<w ¬P(z)) ∧ x=x ∧ P(x) with ψ = (u > u):
        // every P(t) becomes t > t. Variables: z=v1, w=v2, x=v3, u=v4.
        let delta = fml(
            "(exists v1, v2. (P(v1 + v2) /\\ forall v1 < v2. ~P(v1))) /\\ v3 = v3 /\\ P(v3)",
        );
        let psi = fml("v4 > v4");
        let got = delta.substitute_predicate("P", &psi, Variable::obj(4));
        let want = fml(
            "(exists v1, v2. (v1 + v2 > v1 + v2 /\\ forall v1 < v2. ~(v1 > v1))) \
             /\\ v3 = v3 /\\ v3 > v3",
        );
        assert_eq!(got, want);
    }

    #[test]
    fn substitute_predicate_trivial_and_clash() {
        assert_eq!(
            fml("P(0)").substitute_predicate("P", &fml("v1 = v1"), Variable::obj(1)),
            fml("0 = 0")
        );
        // δ = ∀u P(u), ψ = ∃u (u = u0): the binder of δ must be renamed so
        // the inserted instance keeps quantifying over a distinct variable.
        // u=v1, u0=v2, designated hole v2.
        let delta = fml("forall v1. P(v1)");
        let psi = fml("exists v1. v1 = v2");
        let got = delta.substitute_predicate("P", &psi, Variable::obj(2));
        assert_eq!(got, fml("forall v2. exists v1. v1 = v2"));
        // No capture: the inserted existential still binds a variable
        // distinct from the universally quantified one.
        assert!(got.is_sentence());
    }

    #[test]
    fn predicate_substitution_preserves_inserted_free_variables() {
        // ψ carries a free v5; the host's binders must not swallow it.
        let delta = fml("forall v5. P(v5)");
        let psi = fml("v1 + v5 = v5");
        let got = delta.substitute_predicate("P", &psi, Variable::obj(1));
        let fv = got.free_variables();
        assert!(fv.contains(&Variable::obj(5)));
        assert_eq!(got, fml("forall v1. v1 + v5 = v5"));
    }

    #[test]
    fn numeral_and_literals() {
        assert_eq!(Term::numeral(0), Term::Zero);
        assert_eq!(Term::numeral(3), parse_term("S(S(S(0)))").unwrap());
        assert!(Term::num(7u32).is_closed());
    }

    #[test]
    fn language_membership() {
        assert!(fml("forall v1. v1 + 0 = v1").is_pa());
        assert!(!parse_formula("p(v1, S(0)) = 0").unwrap().is_pa());
        assert!(parse_formula("p(v1, S(0)) = 0").unwrap().is_pa_plus());
        assert!(!parse_formula("e1 = e2").unwrap().is_pa_plus());
        assert!(!fml("P(0)").is_pa());
    }
}
