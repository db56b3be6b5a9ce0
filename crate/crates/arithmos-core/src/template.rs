//! Shape analysis of formulas: collapsing the terms that carry no bound
//! variable, cutting slot templates out of the collapsed form, and
//! enumerating the finite catalogue of sentence templates below a bound.
//!
//! The central transform substitutes the marker `w` for every maximal term
//! whose variables are all free at the position where it occurs; a closed
//! term qualifies vacuously, a bare free variable is itself such a term.
//! Two formulas are *similar* when they collapse to the same form.  Putting
//! numbered slots `e1, e2, ...` at the collapsed positions instead — in
//! left-to-right reading order, a fresh slot per occurrence — yields the
//! *template* of the formula together with the sequence of terms that was
//! abstracted away, and substituting that sequence back into the template
//! restores the formula exactly.
//!
//! Complexity is measured on the collapsed form: the number of vertices on
//! the longest root-to-leaf path of the syntactic tree, with terms
//! unravelled into their constructors and a compact numeral counting as its
//! successor chain.  The *index* of a formula is the larger of that measure
//! and the greatest object-variable subscript occurring in it, free or
//! bound.  Only finitely many templates of sentences exist below any index
//! bound; [`enumerate_templates`] lists them in a stable order.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::godel::encode_formula;
use crate::syntax::{Formula, Term, VarKind, Variable};

/// Failures of slot substitution and sequence comparison.
#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum TemplateError {
    /// A slot is used whose entry the sequence does not supply.
    #[error("substitution sequence has {len} entries but slot e{index} is used")]
    MissingEntry { index: u32, len: usize },
    /// The projection variable must be fresh for the formula.
    #[error("variable {var} already occurs in the formula")]
    VariableOccurs { var: Variable },
}

/// A formula whose free variables are numbered slots `e1..ek` only.
///
/// Templates produced by [`template`] are canonical: slot numbers follow
/// the left-to-right reading order of the collapsed positions and each slot
/// occurs exactly once, so formulas with equal collapsed forms get
/// structurally equal templates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Template {
    pub skeleton: Formula,
}

/// The terms a template abstracted away: entry `i` (1-based) fills `e_i`.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermSequence {
    pub entries: Vec<Term>,
}

impl TermSequence {
    pub fn new(entries: Vec<Term>) -> Self {
        TermSequence { entries }
    }

    /// The entry for slot `e_index` (1-based), if the sequence reaches it.
    pub fn get(&self, index: u32) -> Option<&Term> {
        self.entries.get(index as usize - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every entry is a closed term, the normal case for
    /// sequences cut from sentences.
    pub fn is_closed(&self) -> bool {
        self.entries.iter().all(Term::is_closed)
    }
}

// ---------------------------------------------------------------------------
// The collapse walk
// ---------------------------------------------------------------------------

/// Rebuild a term, handing every maximal subterm that contains no variable
/// bound at this position to `sink`.  The sink decides what stands at the
/// collapsed position (the marker for [`bar`], a numbered slot for
/// [`template`]).
fn collapse_term(t: &Term, bound: &[Variable], sink: &mut dyn FnMut(&Term) -> Term) -> Term {
    let captured = t.variables().iter().any(|v| bound.contains(v));
    if !captured {
        return sink(t);
    }
    match t {
        Term::Succ { arg } => Term::succ(collapse_term(arg, bound, sink)),
        Term::Add { left, right } => Term::add(
            collapse_term(left, bound, sink),
            collapse_term(right, bound, sink),
        ),
        Term::Mul { left, right } => Term::mul(
            collapse_term(left, bound, sink),
            collapse_term(right, bound, sink),
        ),
        Term::Proj { seq, idx } => Term::proj(
            collapse_term(seq, bound, sink),
            collapse_term(idx, bound, sink),
        ),
        // A leaf that reaches this arm is a bound variable occurrence.
        Term::Zero | Term::Var { .. } | Term::Num { .. } => t.clone(),
    }
}

fn collapse_formula(
    phi: &Formula,
    bound: &mut Vec<Variable>,
    sink: &mut dyn FnMut(&Term) -> Term,
) -> Formula {
    match phi {
        Formula::Eq { left, right } => Formula::eq(
            collapse_term(left, bound, sink),
            collapse_term(right, bound, sink),
        ),
        Formula::Lt { left, right } => Formula::lt(
            collapse_term(left, bound, sink),
            collapse_term(right, bound, sink),
        ),
        Formula::Not { arg } => Formula::not(collapse_formula(arg, bound, sink)),
        Formula::And { left, right } => Formula::and(
            collapse_formula(left, bound, sink),
            collapse_formula(right, bound, sink),
        ),
        Formula::Or { left, right } => Formula::or(
            collapse_formula(left, bound, sink),
            collapse_formula(right, bound, sink),
        ),
        Formula::Forall { var, body } => {
            bound.push(*var);
            let body = collapse_formula(body, bound, sink);
            bound.pop();
            Formula::forall(*var, body)
        }
        Formula::Exists { var, body } => {
            bound.push(*var);
            let body = collapse_formula(body, bound, sink);
            bound.pop();
            Formula::exists(*var, body)
        }
        Formula::Pred { name, arg } => Formula::pred(name, collapse_term(arg, bound, sink)),
    }
}

/// Collapse every maximal term whose variables are all free at its position
/// to the marker `w`.  Closed terms collapse too; bound variables and the
/// terms containing them survive.  Idempotent, since the marker itself is
/// never bound.
pub fn bar(phi: &Formula) -> Formula {
    collapse_formula(phi, &mut Vec::new(), &mut |_| Term::w())
}

/// Two formulas are similar when their collapsed forms coincide.
pub fn similar(a: &Formula, b: &Formula) -> bool {
    bar(a) == bar(b)
}

/// Cut the template out of a formula: collapsed positions become slots
/// `e1, e2, ...` in reading order, and the returned sequence records the
/// terms that stood there, so that
/// `subst_template(template(phi)) == phi`.
pub fn template(phi: &Formula) -> (Template, TermSequence) {
    let mut entries = Vec::new();
    let skeleton = collapse_formula(phi, &mut Vec::new(), &mut |t| {
        entries.push(t.clone());
        Term::e(entries.len() as u32)
    });
    (Template { skeleton }, TermSequence { entries })
}

/// The slot indices actually used by a template.
pub fn e_indices(t: &Template) -> BTreeSet<u32> {
    t.skeleton
        .all_variables()
        .into_iter()
        .filter(|v| v.kind == VarKind::Slot)
        .map(|v| v.index)
        .collect()
}

fn subst_term(t: &Term, tau: &TermSequence) -> Result<Term, TemplateError> {
    match t {
        Term::Var { var } if var.kind == VarKind::Slot => {
            tau.get(var.index)
                .cloned()
                .ok_or(TemplateError::MissingEntry {
                    index: var.index,
                    len: tau.len(),
                })
        }
        Term::Zero | Term::Var { .. } | Term::Num { .. } => Ok(t.clone()),
        Term::Succ { arg } => Ok(Term::succ(subst_term(arg, tau)?)),
        Term::Add { left, right } => Ok(Term::add(subst_term(left, tau)?, subst_term(right, tau)?)),
        Term::Mul { left, right } => Ok(Term::mul(subst_term(left, tau)?, subst_term(right, tau)?)),
        Term::Proj { seq, idx } => Ok(Term::proj(subst_term(seq, tau)?, subst_term(idx, tau)?)),
    }
}

fn subst_formula(phi: &Formula, tau: &TermSequence) -> Result<Formula, TemplateError> {
    Ok(match phi {
        Formula::Eq { left, right } => {
            Formula::eq(subst_term(left, tau)?, subst_term(right, tau)?)
        }
        Formula::Lt { left, right } => {
            Formula::lt(subst_term(left, tau)?, subst_term(right, tau)?)
        }
        Formula::Not { arg } => Formula::not(subst_formula(arg, tau)?),
        Formula::And { left, right } => {
            Formula::and(subst_formula(left, tau)?, subst_formula(right, tau)?)
        }
        Formula::Or { left, right } => {
            Formula::or(subst_formula(left, tau)?, subst_formula(right, tau)?)
        }
        Formula::Forall { var, body } => Formula::forall(*var, subst_formula(body, tau)?),
        Formula::Exists { var, body } => Formula::exists(*var, subst_formula(body, tau)?),
        Formula::Pred { name, arg } => Formula::pred(name, subst_term(arg, tau)?),
    })
}

/// Replace each slot `e_i` by the `i`-th entry of the sequence.  Entries
/// are inserted literally; the normal case is closed entries, where capture
/// cannot arise, and the sequences cut by [`template`] never contain a
/// variable that is bound above their slot.
pub fn subst_template(t: &Template, tau: &TermSequence) -> Result<Formula, TemplateError> {
    subst_formula(&t.skeleton, tau)
}

/// The projected form of a formula over a fresh variable `x`: its template
/// with slot `e_i` filled by the projection `p(x, i)` (1-based), so the one
/// free variable `x` carries the whole abstracted sequence.
pub fn projected_form(phi: &Formula, x: Variable) -> Result<Formula, TemplateError> {
    if phi.all_variables().contains(&x) {
        return Err(TemplateError::VariableOccurs { var: x });
    }
    let (t, tau) = template(phi);
    let projections = TermSequence::new(
        (1..=tau.len() as u64)
            .map(|i| Term::proj(Term::var(x), Term::num(i)))
            .collect(),
    );
    subst_template(&t, &projections)
}

fn term_height(t: &Term) -> u64 {
    match t {
        Term::Zero | Term::Var { .. } => 1,
        Term::Succ { arg } => 1 + term_height(arg),
        Term::Add { left, right } | Term::Mul { left, right } => {
            1 + term_height(left).max(term_height(right))
        }
        Term::Proj { seq, idx } => 1 + term_height(seq).max(term_height(idx)),
        // `#n` abbreviates a successor chain of n applications over zero.
        Term::Num { value } => value.to_u64().map_or(u64::MAX, |n| n.saturating_add(1)),
    }
}

fn formula_height(phi: &Formula) -> u64 {
    1 + match phi {
        Formula::Eq { left, right } | Formula::Lt { left, right } => {
            term_height(left).max(term_height(right))
        }
        Formula::Not { arg } => formula_height(arg),
        Formula::And { left, right } | Formula::Or { left, right } => {
            formula_height(left).max(formula_height(right))
        }
        Formula::Forall { body, .. } | Formula::Exists { body, .. } => formula_height(body),
        Formula::Pred { arg, .. } => term_height(arg),
    }
}

/// The number of vertices on the longest root-to-leaf path of the
/// syntactic tree of the collapsed form.  A quantifier is one vertex, an
/// atom's terms are unravelled into their constructors.
pub fn tree_complexity(phi: &Formula) -> u64 {
    formula_height(&bar(phi))
}

/// The larger of [`tree_complexity`] and the greatest object-variable
/// subscript occurring in the formula, free or bound.  Slot and marker
/// symbols carry no subscript weight.
pub fn index(phi: &Formula) -> u64 {
    let vars = phi
        .all_variables()
        .into_iter()
        .filter(|v| v.kind == VarKind::Object)
        .map(|v| u64::from(v.index))
        .max()
        .unwrap_or(0);
    tree_complexity(phi).max(vars)
}

/// Do two sequences agree on every slot the template uses?  Entries at
/// unused positions are ignored; a sequence that does not reach a used
/// slot is a coverage error.
pub fn seq_equivalent(
    tau: &TermSequence,
    sigma: &TermSequence,
    t: &Template,
) -> Result<bool, TemplateError> {
    for i in e_indices(t) {
        let a = tau.get(i).ok_or(TemplateError::MissingEntry {
            index: i,
            len: tau.len(),
        })?;
        let b = sigma.get(i).ok_or(TemplateError::MissingEntry {
            index: i,
            len: sigma.len(),
        })?;
        if a != b {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The catalogue of sentence templates
// ---------------------------------------------------------------------------

/// Every template of a sentence of index at most `c`, sorted by the code
/// of the skeleton so dumps are stable and diffable.
///
/// Skeletons are generated directly rather than by collapsing sample
/// sentences: formulas of height at most `c` over bound variables
/// `v1..vc`, where slots stand at the term leaves that carry no bound
/// variable and every composite term contains a bound variable somewhere —
/// a composite term without one would have collapsed into a single slot,
/// so it cannot appear in any template.  Each raw skeleton is then
/// renumbered left to right and deduplicated structurally.  The catalogue
/// grows super-exponentially with `c`; bounds up to 4 are comfortable.
pub fn enumerate_templates(c: u64) -> Vec<Template> {
    let vars = u32::try_from(c).unwrap_or(u32::MAX);
    let mut seen = BTreeSet::new();
    for raw in skeleton_formulas(c, vars, &mut Vec::new()) {
        seen.insert(renumber(&raw));
    }
    let mut out: Vec<Formula> = seen.into_iter().collect();
    out.sort_by_cached_key(encode_formula);
    out.into_iter()
        .map(|skeleton| Template { skeleton })
        .collect()
}

/// Raw skeleton terms of height at most `h` over the bound variables in
/// scope, tagged with whether they contain one.  A placeholder slot
/// (renumbered later) is the only variable-free term allowed.
fn skeleton_terms(h: u64, scope: &[u32]) -> Vec<(Term, bool)> {
    let mut out = Vec::new();
    if h == 0 {
        return out;
    }
    out.push((Term::e(1), false));
    for i in scope.iter().collect::<BTreeSet<_>>() {
        out.push((Term::v(*i), true));
    }
    if h >= 2 {
        let inner = skeleton_terms(h - 1, scope);
        for (t, has_var) in &inner {
            if *has_var {
                out.push((Term::succ(t.clone()), true));
            }
        }
        for (a, va) in &inner {
            for (b, vb) in &inner {
                if *va || *vb {
                    out.push((Term::add(a.clone(), b.clone()), true));
                    out.push((Term::mul(a.clone(), b.clone()), true));
                    out.push((Term::proj(a.clone(), b.clone()), true));
                }
            }
        }
    }
    out
}

fn skeleton_formulas(h: u64, vars: u32, scope: &mut Vec<u32>) -> Vec<Formula> {
    let mut out = Vec::new();
    if h < 2 {
        return out;
    }
    let terms = skeleton_terms(h - 1, scope);
    for (l, _) in &terms {
        for (r, _) in &terms {
            out.push(Formula::eq(l.clone(), r.clone()));
        }
    }
    if h >= 3 {
        let inner = skeleton_formulas(h - 1, vars, scope);
        for f in &inner {
            out.push(Formula::not(f.clone()));
        }
        for a in &inner {
            for b in &inner {
                out.push(Formula::and(a.clone(), b.clone()));
                out.push(Formula::or(a.clone(), b.clone()));
            }
        }
        for i in 1..=vars {
            scope.push(i);
            for body in skeleton_formulas(h - 1, vars, scope) {
                out.push(Formula::forall(Variable::obj(i), body.clone()));
                out.push(Formula::exists(Variable::obj(i), body));
            }
            scope.pop();
        }
    }
    out
}

fn renumber_term(t: &Term, next: &mut u32) -> Term {
    match t {
        Term::Var { var } if var.kind == VarKind::Slot => {
            *next += 1;
            Term::e(*next)
        }
        Term::Zero | Term::Var { .. } | Term::Num { .. } => t.clone(),
        Term::Succ { arg } => Term::succ(renumber_term(arg, next)),
        Term::Add { left, right } => {
            Term::add(renumber_term(left, next), renumber_term(right, next))
        }
        Term::Mul { left, right } => {
            Term::mul(renumber_term(left, next), renumber_term(right, next))
        }
        Term::Proj { seq, idx } => {
            Term::proj(renumber_term(seq, next), renumber_term(idx, next))
        }
    }
}

fn renumber_formula(phi: &Formula, next: &mut u32) -> Formula {
    match phi {
        Formula::Eq { left, right } => {
            Formula::eq(renumber_term(left, next), renumber_term(right, next))
        }
        Formula::Lt { left, right } => {
            Formula::lt(renumber_term(left, next), renumber_term(right, next))
        }
        Formula::Not { arg } => Formula::not(renumber_formula(arg, next)),
        Formula::And { left, right } => {
            Formula::and(renumber_formula(left, next), renumber_formula(right, next))
        }
        Formula::Or { left, right } => {
            Formula::or(renumber_formula(left, next), renumber_formula(right, next))
        }
        Formula::Forall { var, body } => Formula::forall(*var, renumber_formula(body, next)),
        Formula::Exists { var, body } => Formula::exists(*var, renumber_formula(body, next)),
        Formula::Pred { name, arg } => Formula::pred(name, renumber_term(arg, next)),
    }
}

/// Slot occurrences renumbered 1, 2, ... in reading order.
fn renumber(phi: &Formula) -> Formula {
    renumber_formula(phi, &mut 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn sux(n: usize, t: Term) -> Term {
        (0..n).fold(t, |acc, _| Term::succ(acc))
    }

    /// `exists v1. S(S(S(v1))) + v2 = S^8(v3)` — the running quantified
    /// example: v2 and the right-hand side are free, the left summand is
    /// pinned by the binder.
    fn quantified_example() -> Formula {
        Formula::exists(
            Variable::obj(1),
            Formula::eq(
                Term::add(sux(3, Term::v(1)), Term::v(2)),
                sux(8, Term::v(3)),
            ),
        )
    }

    #[test]
    fn collapse_keeps_terms_with_bound_variables() {
        let phi = quantified_example();
        let expected = Formula::exists(
            Variable::obj(1),
            Formula::eq(Term::add(sux(3, Term::v(1)), Term::w()), Term::w()),
        );
        assert_eq!(bar(&phi), expected);
        assert_eq!(bar(&bar(&phi)), bar(&phi));
    }

    #[test]
    fn collapse_swallows_a_fully_free_atom() {
        // Without the binder all variables are free, so each side collapses
        // whole.
        let psi = Formula::eq(Term::add(sux(3, Term::v(1)), Term::v(2)), sux(8, Term::v(3)));
        assert_eq!(bar(&psi), Formula::eq(Term::w(), Term::w()));
        let (t, tau) = template(&psi);
        assert_eq!(t.skeleton, Formula::eq(Term::e(1), Term::e(2)));
        assert_eq!(
            tau.entries,
            vec![Term::add(sux(3, Term::v(1)), Term::v(2)), sux(8, Term::v(3))]
        );
    }

    #[test]
    fn closed_terms_collapse_vacuously() {
        let phi = parse_formula("S(0) = S(S(0))").unwrap();
        assert_eq!(bar(&phi), Formula::eq(Term::w(), Term::w()));
        assert!(similar(&parse_formula("v1 = v2").unwrap(), &phi));
        assert!(!similar(
            &parse_formula("v1 = v2").unwrap(),
            &parse_formula("~(v1 = v2)").unwrap()
        ));

        let (t, tau) = template(&parse_formula("0 = 0").unwrap());
        assert_eq!(t.skeleton, Formula::eq(Term::e(1), Term::e(2)));
        assert_eq!(tau.entries, vec![Term::Zero, Term::Zero]);
        assert_eq!(e_indices(&t), [1, 2].into_iter().collect());
    }

    #[test]
    fn template_numbers_slots_in_reading_order() {
        let (t, tau) = template(&quantified_example());
        let expected = Formula::exists(
            Variable::obj(1),
            Formula::eq(Term::add(sux(3, Term::v(1)), Term::e(1)), Term::e(2)),
        );
        assert_eq!(t.skeleton, expected);
        assert_eq!(tau.entries, vec![Term::v(2), sux(8, Term::v(3))]);
        assert!(tau.get(3).is_none());
        assert_eq!(subst_template(&t, &tau).unwrap(), quantified_example());
    }

    #[test]
    fn template_entries_are_the_maximal_free_occurrences() {
        // exists v1. S(S(v1)) + S(v2) = S(S(v3)): the whole left side is
        // pinned by v1, yet S(v2) inside it is free, as is the right side.
        let phi = Formula::exists(
            Variable::obj(1),
            Formula::eq(
                Term::add(sux(2, Term::v(1)), Term::succ(Term::v(2))),
                sux(2, Term::v(3)),
            ),
        );
        let (t, tau) = template(&phi);
        assert_eq!(tau.entries, vec![Term::succ(Term::v(2)), sux(2, Term::v(3))]);
        assert_eq!(
            t.skeleton,
            Formula::exists(
                Variable::obj(1),
                Formula::eq(Term::add(sux(2, Term::v(1)), Term::e(1)), Term::e(2)),
            )
        );
        assert_eq!(tree_complexity(&phi), 6);
    }

    #[test]
    fn complexity_counts_vertices_on_the_longest_path() {
        assert_eq!(tree_complexity(&quantified_example()), 7);
        assert_eq!(tree_complexity(&parse_formula("v3 = v3").unwrap()), 2);
        assert_eq!(tree_complexity(&parse_formula("exists v1. v1 = v1").unwrap()), 3);
        assert_eq!(tree_complexity(&parse_formula("0 = 0").unwrap()), 2);
        // A compact numeral is closed, so it collapses before it can weigh
        // in as its successor chain.
        let phi = parse_formula("exists v1. v1 + #4 = v1").unwrap();
        assert_eq!(tree_complexity(&phi), 4);
    }

    #[test]
    fn the_index_combines_height_and_variable_subscripts() {
        assert_eq!(index(&parse_formula("v3 = v3").unwrap()), 3);
        assert_eq!(index(&parse_formula("exists v1. v1 = v1").unwrap()), 3);
        assert_eq!(index(&parse_formula("0 = 0").unwrap()), 2);
        assert_eq!(index(&quantified_example()), 7);
        // Slot subscripts carry no weight.
        assert_eq!(index(&Formula::eq(Term::e(5), Term::e(6))), 2);
    }

    #[test]
    fn projections_fill_slots_one_based() {
        let x = Variable::obj(9);
        let projected = projected_form(&quantified_example(), x).unwrap();
        let expected = Formula::exists(
            Variable::obj(1),
            Formula::eq(
                Term::add(sux(3, Term::v(1)), Term::proj(Term::var(x), Term::num(1u64))),
                Term::proj(Term::var(x), Term::num(2u64)),
            ),
        );
        assert_eq!(projected, expected);

        let closed = parse_formula("exists v1. v1 = v1").unwrap();
        assert_eq!(projected_form(&closed, x).unwrap(), closed);
        assert_eq!(
            projected_form(&quantified_example(), Variable::obj(2)),
            Err(TemplateError::VariableOccurs { var: Variable::obj(2) })
        );
    }

    #[test]
    fn substitution_reports_missing_entries() {
        let gapped = Template {
            skeleton: Formula::eq(Term::e(1), Term::e(3)),
        };
        let tau = TermSequence::new(vec![Term::Zero, Term::Zero]);
        assert_eq!(
            subst_template(&gapped, &tau),
            Err(TemplateError::MissingEntry { index: 3, len: 2 })
        );
    }

    #[test]
    fn sequence_equivalence_checks_exactly_the_used_slots() {
        // exists v1. S(v1) = 0 /\ v2 < v3 has three collapsed positions.
        let phi = Formula::exists(
            Variable::obj(1),
            Formula::and(
                Formula::eq(Term::succ(Term::v(1)), Term::Zero),
                Formula::lt(Term::v(2), Term::v(3)),
            ),
        );
        let (t, tau) = template(&phi);
        assert_eq!(tau.entries, vec![Term::Zero, Term::v(2), Term::v(3)]);
        assert_eq!(seq_equivalent(&tau, &tau, &t), Ok(true));

        let zeros = TermSequence::new(vec![Term::Zero, Term::Zero, Term::Zero]);
        let bumped = TermSequence::new(vec![Term::succ(Term::Zero), Term::Zero, Term::Zero]);
        assert_eq!(seq_equivalent(&bumped, &zeros, &t), Ok(false));
        assert_eq!(
            seq_equivalent(&TermSequence::new(vec![Term::Zero]), &zeros, &t),
            Err(TemplateError::MissingEntry { index: 2, len: 1 })
        );

        // Entries at positions the template never uses are ignored.
        let gapped = Template {
            skeleton: Formula::eq(Term::e(1), Term::e(3)),
        };
        let a = TermSequence::new(vec![Term::Zero, Term::Zero, Term::Zero]);
        let b = TermSequence::new(vec![Term::Zero, Term::succ(Term::Zero), Term::Zero]);
        assert_eq!(seq_equivalent(&a, &b, &gapped), Ok(true));
        assert_eq!(
            subst_template(&gapped, &a).unwrap(),
            subst_template(&gapped, &b).unwrap()
        );
    }

    /// The hand-written catalogue for bound 3: the two slot-only atoms with
    /// and without negation, their conjunction and disjunction, and the
    /// single-quantifier forms over each variable subscript up to 3.
    fn catalogue_three() -> BTreeSet<Formula> {
        let e = Term::e;
        let mut out = BTreeSet::new();
        out.insert(Formula::eq(e(1), e(2)));
        out.insert(Formula::not(Formula::eq(e(1), e(2))));
        out.insert(Formula::and(
            Formula::eq(e(1), e(2)),
            Formula::eq(e(3), e(4)),
        ));
        out.insert(Formula::or(
            Formula::eq(e(1), e(2)),
            Formula::eq(e(3), e(4)),
        ));
        for i in 1..=3 {
            let x = Variable::obj(i);
            let quantifiers: [fn(Variable, Formula) -> Formula; 2] =
                [Formula::forall, Formula::exists];
            for q in quantifiers {
                out.insert(q(x, Formula::eq(Term::var(x), e(1))));
                out.insert(q(x, Formula::eq(e(1), Term::var(x))));
                out.insert(q(x, Formula::eq(e(1), e(2))));
                out.insert(q(x, Formula::eq(Term::var(x), Term::var(x))));
            }
        }
        out
    }

    #[test]
    fn the_catalogue_at_three_matches_the_hand_list() {
        let got: BTreeSet<Formula> = enumerate_templates(3)
            .into_iter()
            .map(|t| t.skeleton)
            .collect();
        assert_eq!(got.len(), 28);
        assert_eq!(got, catalogue_three());
    }

    #[test]
    fn the_catalogue_is_sorted_and_monotone() {
        let three = enumerate_templates(3);
        let codes: Vec<_> = three.iter().map(|t| encode_formula(&t.skeleton)).collect();
        assert!(codes.windows(2).all(|p| p[0] < p[1]));

        let two: BTreeSet<_> = enumerate_templates(2).into_iter().collect();
        assert_eq!(
            two,
            [Template {
                skeleton: Formula::eq(Term::e(1), Term::e(2)),
            }]
            .into_iter()
            .collect()
        );
        let three: BTreeSet<_> = three.into_iter().collect();
        let four: BTreeSet<_> = enumerate_templates(4).into_iter().collect();
        assert!(two.is_subset(&three));
        assert!(three.is_subset(&four));
        assert!(enumerate_templates(1).is_empty());
    }

    #[test]
    fn every_catalogue_entry_is_a_fixed_point() {
        for t in enumerate_templates(4) {
            let width = e_indices(&t).last().copied().unwrap_or(0);
            let zeros = TermSequence::new(vec![Term::Zero; width as usize]);
            let sentence = subst_template(&t, &zeros).unwrap();
            assert!(sentence.is_sentence());
            assert!(index(&sentence) <= 4);
            let (back, recovered) = template(&sentence);
            assert_eq!(back, t);
            assert_eq!(recovered.entries, zeros.entries);
        }
    }

    /// An independent generator for the cross-check: all sentences of the
    /// given height over zero-leaf terms, with no slot reasoning at all.
    /// Substituting zero for a slot never changes any path length, so these
    /// sentences reach every template of the same bound.
    fn closed_terms(h: u64, scope: &[u32]) -> Vec<Term> {
        let mut out = Vec::new();
        if h == 0 {
            return out;
        }
        out.push(Term::Zero);
        for i in scope.iter().collect::<BTreeSet<_>>() {
            out.push(Term::v(*i));
        }
        if h >= 2 {
            let inner = closed_terms(h - 1, scope);
            for t in &inner {
                out.push(Term::succ(t.clone()));
            }
            for a in &inner {
                for b in &inner {
                    out.push(Term::add(a.clone(), b.clone()));
                    out.push(Term::mul(a.clone(), b.clone()));
                    out.push(Term::proj(a.clone(), b.clone()));
                }
            }
        }
        out
    }

    fn closed_sentences(h: u64, vars: u32, scope: &mut Vec<u32>) -> Vec<Formula> {
        let mut out = Vec::new();
        if h < 2 {
            return out;
        }
        let terms = closed_terms(h - 1, scope);
        for l in &terms {
            for r in &terms {
                out.push(Formula::eq(l.clone(), r.clone()));
            }
        }
        if h >= 3 {
            let inner = closed_sentences(h - 1, vars, scope);
            for f in &inner {
                out.push(Formula::not(f.clone()));
            }
            for a in &inner {
                for b in &inner {
                    out.push(Formula::and(a.clone(), b.clone()));
                    out.push(Formula::or(a.clone(), b.clone()));
                }
            }
            for i in 1..=vars {
                scope.push(i);
                for body in closed_sentences(h - 1, vars, scope) {
                    out.push(Formula::forall(Variable::obj(i), body.clone()));
                    out.push(Formula::exists(Variable::obj(i), body));
                }
                scope.pop();
            }
        }
        out
    }

    fn sweep_templates(c: u64) -> BTreeSet<Formula> {
        closed_sentences(c, c as u32, &mut Vec::new())
            .into_iter()
            .filter(|f| f.is_sentence() && index(f) <= c)
            .map(|f| template(&f).0.skeleton)
            .collect()
    }

    #[test]
    fn a_sentence_sweep_reproduces_the_catalogue() {
        for c in [2u64, 3] {
            let catalogue: BTreeSet<Formula> = enumerate_templates(c)
                .into_iter()
                .map(|t| t.skeleton)
                .collect();
            assert_eq!(sweep_templates(c), catalogue);
        }
    }

    #[test]
    fn the_sweep_agrees_at_bound_four() {
        let catalogue: BTreeSet<Formula> = enumerate_templates(4)
            .into_iter()
            .map(|t| t.skeleton)
            .collect();
        assert_eq!(sweep_templates(4), catalogue);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_term() -> impl Strategy<Value = Term> {
            let leaf = prop_oneof![
                Just(Term::Zero),
                (1u32..=4).prop_map(Term::v),
                (0u64..=3).prop_map(Term::num),
            ];
            leaf.prop_recursive(3, 24, 2, |inner| {
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
                (arb_term(), arb_term()).prop_map(|(l, r)| Formula::eq(l, r)),
                (arb_term(), arb_term()).prop_map(|(l, r)| Formula::lt(l, r)),
            ];
            atom.prop_recursive(3, 24, 2, |inner| {
                prop_oneof![
                    inner.clone().prop_map(Formula::not),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                    ((1u32..=4), inner.clone())
                        .prop_map(|(i, f)| Formula::forall(Variable::obj(i), f)),
                    ((1u32..=4), inner).prop_map(|(i, f)| Formula::exists(Variable::obj(i), f)),
                ]
            })
        }

        proptest! {
            #[test]
            fn substitution_round_trips(phi in arb_formula()) {
                let (t, tau) = template(&phi);
                prop_assert_eq!(subst_template(&t, &tau), Ok(phi.clone()));
                prop_assert_eq!(tau.len() as u32, e_indices(&t).last().copied().unwrap_or(0));
                prop_assert_eq!(seq_equivalent(&tau, &tau, &t), Ok(true));
            }

            #[test]
            fn the_collapse_is_idempotent(phi in arb_formula()) {
                let collapsed = bar(&phi);
                prop_assert_eq!(bar(&collapsed), collapsed.clone());
                prop_assert!(similar(&phi, &collapsed));
            }

            #[test]
            fn a_formula_is_similar_to_its_template(phi in arb_formula()) {
                let (t, _) = template(&phi);
                prop_assert!(similar(&phi, &t.skeleton));
                prop_assert_eq!(tree_complexity(&t.skeleton), tree_complexity(&phi));
            }

            #[test]
            fn similar_formulas_share_a_template(a in arb_formula(), b in arb_formula()) {
                // Similarity is reflexive and symmetric by construction;
                // sharing the canonical template pins the classes down.
                prop_assert!(similar(&a, &a));
                prop_assert_eq!(similar(&a, &b), similar(&b, &a));
                prop_assert_eq!(similar(&a, &b), template(&a).0 == template(&b).0);
            }
        }
    }
}
