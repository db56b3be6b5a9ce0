//! Two-sided sequent proofs over formula multisets, with premise initial
//! sequents and a truth-preservation audit over the standard model.
//!
//! The calculus is classical LK with a general identity axiom `φ → φ`,
//! explicit weakening and contraction, multiplicative cut, and the
//! one-sided Gentzen introductions for `∨` on the right and `∧` on the
//! left — so the familiar five-node derivation of `φ ∨ ¬φ` (axiom, `¬R`,
//! two `∨R` steps, contraction) checks verbatim.  Sequent sides are read
//! as multisets: exchange is implicit, nothing else is.  A `Prem` leaf
//! introduces `→ φ` for any sentence `φ` in the declared premise set,
//! which is how proofs *from* a theory are represented; no axioms of
//! arithmetic are built in.
//!
//! [`check_proof`] validates every node against its rule and reports the
//! first offence with the node's path from the root.  [`truth_audit`]
//! replays a checked proof over ℕ: for every node and every substitution
//! of pool terms for the sequent's free variables, it evaluates both
//! sides with the bounded evaluator and reports `violated` exactly when
//! all antecedent formulas are true and every succedent formula is false.
//! A correct proof from true premises can never be violated — soundness
//! run as a program — while a false premise is pinpointed at the leaf
//! that introduced it.  Because the evaluator is three-valued, nodes
//! whose verdict rests on an `Unknown` are reported `not-exercised`,
//! never silently passed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{eval_sentence, Budget, EvalError, TriBool};
use crate::syntax::{parse_formula, parse_term, Formula, Term, Variable};

/// One sequent `Γ → Δ`; both sides are multisets (order is immaterial,
/// multiplicity is not).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "SequentText", into = "SequentText")]
pub struct Sequent {
    pub antecedent: Vec<Formula>,
    pub succedent: Vec<Formula>,
}

impl Sequent {
    pub fn new(antecedent: Vec<Formula>, succedent: Vec<Formula>) -> Self {
        Sequent { antecedent, succedent }
    }

    /// Free variables of either side, sorted.
    pub fn free_variables(&self) -> Vec<Variable> {
        let mut vars: Vec<Variable> = self
            .antecedent
            .iter()
            .chain(&self.succedent)
            .flat_map(Formula::free_variables)
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |fs: &[Formula]| {
            fs.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
        };
        write!(f, "{} -> {}", side(&self.antecedent), side(&self.succedent))
    }
}

/// Wire form of a sequent: formulas in the text grammar.
#[derive(Serialize, Deserialize)]
struct SequentText {
    ant: Vec<String>,
    suc: Vec<String>,
}

impl From<Sequent> for SequentText {
    fn from(s: Sequent) -> Self {
        SequentText {
            ant: s.antecedent.iter().map(|f| f.to_string()).collect(),
            suc: s.succedent.iter().map(|f| f.to_string()).collect(),
        }
    }
}

impl TryFrom<SequentText> for Sequent {
    type Error = String;

    fn try_from(s: SequentText) -> Result<Self, String> {
        let side = |texts: &Vec<String>| -> Result<Vec<Formula>, String> {
            texts
                .iter()
                .map(|t| parse_formula(t).map_err(|e| format!("{t}: {e}")))
                .collect()
        };
        Ok(Sequent { antecedent: side(&s.ant)?, succedent: side(&s.suc)? })
    }
}

/// The inference rule at a proof node, together with the data that makes
/// checking deterministic: the principal formula as it appears in the
/// conclusion, the substituted term for `∀L`/`∃R`, and the eigenvariable
/// for `∀R`/`∃L`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rule {
    /// `φ → φ` for any formula `φ`.
    Ax,
    /// `→ φ` for a declared premise sentence `φ`.
    Prem,
    /// From `Γ → Δ, φ` and `φ, Σ → Π` conclude `Γ, Σ → Δ, Π`.
    Cut { formula: Formula },
    WeakenLeft { formula: Formula },
    WeakenRight { formula: Formula },
    ContractLeft { formula: Formula },
    ContractRight { formula: Formula },
    NotLeft { principal: Formula },
    NotRight { principal: Formula },
    /// One conjunct moves up: from `φᵢ, Γ → Δ` conclude `φ₁∧φ₂, Γ → Δ`.
    AndLeft { principal: Formula },
    /// Shared contexts: from `Γ → Δ, φ₁` and `Γ → Δ, φ₂`.
    AndRight { principal: Formula },
    /// Shared contexts: from `φ₁, Γ → Δ` and `φ₂, Γ → Δ`.
    OrLeft { principal: Formula },
    /// One disjunct moves up: from `Γ → Δ, φᵢ` conclude `Γ → Δ, φ₁∨φ₂`.
    OrRight { principal: Formula },
    AllLeft { principal: Formula, term: Term },
    AllRight { principal: Formula, eigenvariable: Variable },
    ExistsLeft { principal: Formula, eigenvariable: Variable },
    ExistsRight { principal: Formula, term: Term },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Ax => "Ax",
            Rule::Prem => "Prem",
            Rule::Cut { .. } => "Cut",
            Rule::WeakenLeft { .. } => "WL",
            Rule::WeakenRight { .. } => "WR",
            Rule::ContractLeft { .. } => "CL",
            Rule::ContractRight { .. } => "CR",
            Rule::NotLeft { .. } => "NotL",
            Rule::NotRight { .. } => "NotR",
            Rule::AndLeft { .. } => "AndL",
            Rule::AndRight { .. } => "AndR",
            Rule::OrLeft { .. } => "OrL",
            Rule::OrRight { .. } => "OrR",
            Rule::AllLeft { .. } => "AllL",
            Rule::AllRight { .. } => "AllR",
            Rule::ExistsLeft { .. } => "ExL",
            Rule::ExistsRight { .. } => "ExR",
        }
    }
}

/// A proof node: the concluded sequent, the rule that concluded it, and
/// the subproofs of the rule's premises.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProofText", into = "ProofText")]
pub struct ProofTree {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::node_count).sum::<usize>()
    }
}

/// Wire form of a proof node:
/// `{"rule": …, "conclusion": {"ant": […], "suc": […]}, "premises": […],
/// "data": {…}}` with formulas and terms in the text grammar.
#[derive(Serialize, Deserialize)]
struct ProofText {
    rule: String,
    conclusion: SequentText,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    premises: Vec<ProofText>,
    #[serde(default, skip_serializing_if = "RuleData::is_empty")]
    data: RuleData,
}

#[derive(Default, Serialize, Deserialize)]
struct RuleData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    principal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigenvariable: Option<String>,
}

impl RuleData {
    fn is_empty(&self) -> bool {
        self.principal.is_none() && self.term.is_none() && self.eigenvariable.is_none()
    }
}

impl From<ProofTree> for ProofText {
    fn from(p: ProofTree) -> Self {
        let mut data = RuleData::default();
        match &p.rule {
            Rule::Ax | Rule::Prem => {}
            Rule::Cut { formula }
            | Rule::WeakenLeft { formula }
            | Rule::WeakenRight { formula }
            | Rule::ContractLeft { formula }
            | Rule::ContractRight { formula } => {
                data.principal = Some(formula.to_string());
            }
            Rule::NotLeft { principal }
            | Rule::NotRight { principal }
            | Rule::AndLeft { principal }
            | Rule::AndRight { principal }
            | Rule::OrLeft { principal }
            | Rule::OrRight { principal } => {
                data.principal = Some(principal.to_string());
            }
            Rule::AllLeft { principal, term } | Rule::ExistsRight { principal, term } => {
                data.principal = Some(principal.to_string());
                data.term = Some(term.to_string());
            }
            Rule::AllRight { principal, eigenvariable }
            | Rule::ExistsLeft { principal, eigenvariable } => {
                data.principal = Some(principal.to_string());
                data.eigenvariable = Some(eigenvariable.to_string());
            }
        }
        ProofText {
            rule: p.rule.name().to_string(),
            conclusion: p.conclusion.into(),
            premises: p.premises.into_iter().map(ProofText::from).collect(),
            data,
        }
    }
}

impl TryFrom<ProofText> for ProofTree {
    type Error = String;

    fn try_from(p: ProofText) -> Result<Self, String> {
        let principal = || -> Result<Formula, String> {
            let text = p
                .data
                .principal
                .as_deref()
                .ok_or_else(|| format!("rule {} needs data.principal", p.rule))?;
            parse_formula(text).map_err(|e| format!("{text}: {e}"))
        };
        let term = || -> Result<Term, String> {
            let text = p
                .data
                .term
                .as_deref()
                .ok_or_else(|| format!("rule {} needs data.term", p.rule))?;
            parse_term(text).map_err(|e| format!("{text}: {e}"))
        };
        let eigen = || -> Result<Variable, String> {
            let text = p
                .data
                .eigenvariable
                .as_deref()
                .ok_or_else(|| format!("rule {} needs data.eigenvariable", p.rule))?;
            match parse_term(text) {
                Ok(Term::Var { var }) => Ok(var),
                _ => Err(format!("{text} is not a variable")),
            }
        };
        let rule = match p.rule.as_str() {
            "Ax" => Rule::Ax,
            "Prem" => Rule::Prem,
            "Cut" => Rule::Cut { formula: principal()? },
            "WL" => Rule::WeakenLeft { formula: principal()? },
            "WR" => Rule::WeakenRight { formula: principal()? },
            "CL" => Rule::ContractLeft { formula: principal()? },
            "CR" => Rule::ContractRight { formula: principal()? },
            "NotL" => Rule::NotLeft { principal: principal()? },
            "NotR" => Rule::NotRight { principal: principal()? },
            "AndL" => Rule::AndLeft { principal: principal()? },
            "AndR" => Rule::AndRight { principal: principal()? },
            "OrL" => Rule::OrLeft { principal: principal()? },
            "OrR" => Rule::OrRight { principal: principal()? },
            "AllL" => Rule::AllLeft { principal: principal()?, term: term()? },
            "AllR" => Rule::AllRight { principal: principal()?, eigenvariable: eigen()? },
            "ExL" => Rule::ExistsLeft { principal: principal()?, eigenvariable: eigen()? },
            "ExR" => Rule::ExistsRight { principal: principal()?, term: term()? },
            other => return Err(format!("unknown rule {other}")),
        };
        let premises: Vec<ProofTree> = p
            .premises
            .into_iter()
            .map(ProofTree::try_from)
            .collect::<Result<_, _>>()?;
        Ok(ProofTree { conclusion: Sequent::try_from(p.conclusion)?, rule, premises })
    }
}

/// On-disk bundle: the declared premise sentences and the proof.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ProofDocument {
    #[serde(with = "premise_text")]
    pub premises: Vec<Formula>,
    pub proof: ProofTree,
}

mod premise_text {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::syntax::{parse_formula, Formula};

    pub fn serialize<S: Serializer>(v: &[Formula], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|f| f.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Formula>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_formula(t).map_err(|e| D::Error::custom(format!("{t}: {e}"))))
            .collect()
    }
}

/// A rule violation, named and located by the offending node's path from
/// the root (`"root"`, `"1"`, `"1.0"`, …).
#[derive(Clone, PartialEq, Eq, Debug, Error)]
#[error("node {node}: {rule}: {reason}")]
pub struct CheckError {
    pub node: String,
    pub rule: String,
    pub reason: String,
}

fn path_label(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
    }
}

/// `b` minus one occurrence of `f`, or `None` when `f` is absent.
fn remove_one(pool: &[Formula], f: &Formula) -> Option<Vec<Formula>> {
    let at = pool.iter().position(|g| g == f)?;
    let mut rest = pool.to_vec();
    rest.remove(at);
    Some(rest)
}

fn same_multiset(a: &[Formula], b: &[Formula]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut rest = b.to_vec();
    for f in a {
        match rest.iter().position(|g| g == f) {
            Some(at) => {
                rest.remove(at);
            }
            None => return false,
        }
    }
    true
}

fn joined(a: &[Formula], b: &[Formula]) -> Vec<Formula> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out
}

/// Validates every node of `p` against its rule.  `premises` is the
/// declared set of sentences a `Prem` leaf may introduce.
pub fn check_proof(p: &ProofTree, premises: &[Formula]) -> Result<(), CheckError> {
    for f in premises {
        if !f.is_sentence() {
            return Err(CheckError {
                node: "premises".to_string(),
                rule: "Prem".to_string(),
                reason: format!("declared premise {f} has free variables"),
            });
        }
    }
    let mut path = Vec::new();
    check_node(p, premises, &mut path)
}

/// The root sequent of a proof that passes [`check_proof`].
pub fn conclusion_of<'a>(
    p: &'a ProofTree,
    premises: &[Formula],
) -> Result<&'a Sequent, CheckError> {
    check_proof(p, premises)?;
    Ok(&p.conclusion)
}

fn check_node(p: &ProofTree, premises: &[Formula], path: &mut Vec<usize>) -> Result<(), CheckError> {
    let err = |rule: &str, reason: String| {
        Err(CheckError { node: path_label(path), rule: rule.to_string(), reason })
    };
    let c = &p.conclusion;
    for f in c.antecedent.iter().chain(&c.succedent) {
        if !f.is_pa_plus() {
            return err("language", format!("{f} is outside the object language"));
        }
    }
    let need = match &p.rule {
        Rule::Ax | Rule::Prem => 0,
        Rule::Cut { .. } | Rule::AndRight { .. } | Rule::OrLeft { .. } => 2,
        _ => 1,
    };
    if p.premises.len() != need {
        return err(
            p.rule.name(),
            format!("{} subproofs where {need} expected", p.premises.len()),
        );
    }
    match &p.rule {
        Rule::Ax => {
            if c.antecedent.len() != 1
                || c.succedent.len() != 1
                || c.antecedent[0] != c.succedent[0]
            {
                return err("Ax", "conclusion is not of the shape φ -> φ".to_string());
            }
        }
        Rule::Prem => {
            if !c.antecedent.is_empty() || c.succedent.len() != 1 {
                return err("Prem", "conclusion is not of the shape -> φ".to_string());
            }
            if !premises.contains(&c.succedent[0]) {
                return err(
                    "Prem",
                    format!("{} is not among the declared premises", c.succedent[0]),
                );
            }
        }
        Rule::Cut { formula } => {
            let l = &p.premises[0].conclusion;
            let r = &p.premises[1].conclusion;
            let Some(lsuc) = remove_one(&l.succedent, formula) else {
                return err("Cut", format!("{formula} missing from the first succedent"));
            };
            let Some(rant) = remove_one(&r.antecedent, formula) else {
                return err("Cut", format!("{formula} missing from the second antecedent"));
            };
            if !same_multiset(&c.antecedent, &joined(&l.antecedent, &rant))
                || !same_multiset(&c.succedent, &joined(&lsuc, &r.succedent))
            {
                return err("Cut", "conclusion does not join the premise contexts".to_string());
            }
        }
        Rule::WeakenLeft { formula } => {
            let q = &p.premises[0].conclusion;
            let thinned = remove_one(&c.antecedent, formula);
            if !thinned.is_some_and(|rest| same_multiset(&rest, &q.antecedent))
                || !same_multiset(&c.succedent, &q.succedent)
            {
                return err("WL", format!("conclusion is not the premise plus {formula}"));
            }
        }
        Rule::WeakenRight { formula } => {
            let q = &p.premises[0].conclusion;
            let thinned = remove_one(&c.succedent, formula);
            if !thinned.is_some_and(|rest| same_multiset(&rest, &q.succedent))
                || !same_multiset(&c.antecedent, &q.antecedent)
            {
                return err("WR", format!("conclusion is not the premise plus {formula}"));
            }
        }
        Rule::ContractLeft { formula } => {
            let q = &p.premises[0].conclusion;
            if !c.antecedent.contains(formula)
                || !same_multiset(&joined(&c.antecedent, &[formula.clone()]), &q.antecedent)
                || !same_multiset(&c.succedent, &q.succedent)
            {
                return err("CL", format!("premise is not the conclusion plus one {formula}"));
            }
        }
        Rule::ContractRight { formula } => {
            let q = &p.premises[0].conclusion;
            if !c.succedent.contains(formula)
                || !same_multiset(&joined(&c.succedent, &[formula.clone()]), &q.succedent)
                || !same_multiset(&c.antecedent, &q.antecedent)
            {
                return err("CR", format!("premise is not the conclusion plus one {formula}"));
            }
        }
        Rule::NotLeft { principal } => {
            let q = &p.premises[0].conclusion;
            let Formula::Not { arg } = principal else {
                return err("NotL", format!("{principal} is not a negation"));
            };
            let Some(rest) = remove_one(&c.antecedent, principal) else {
                return err("NotL", format!("{principal} missing from the antecedent"));
            };
            let moved = remove_one(&q.succedent, arg);
            if !same_multiset(&q.antecedent, &rest)
                || !moved.is_some_and(|suc| same_multiset(&suc, &c.succedent))
            {
                return err("NotL", format!("premise does not move {arg} to the right"));
            }
        }
        Rule::NotRight { principal } => {
            let q = &p.premises[0].conclusion;
            let Formula::Not { arg } = principal else {
                return err("NotR", format!("{principal} is not a negation"));
            };
            let Some(rest) = remove_one(&c.succedent, principal) else {
                return err("NotR", format!("{principal} missing from the succedent"));
            };
            let moved = remove_one(&q.antecedent, arg);
            if !same_multiset(&q.succedent, &rest)
                || !moved.is_some_and(|ant| same_multiset(&ant, &c.antecedent))
            {
                return err("NotR", format!("premise does not move {arg} to the left"));
            }
        }
        Rule::AndLeft { principal } => {
            let q = &p.premises[0].conclusion;
            let Formula::And { left, right } = principal else {
                return err("AndL", format!("{principal} is not a conjunction"));
            };
            let Some(rest) = remove_one(&c.antecedent, principal) else {
                return err("AndL", format!("{principal} missing from the antecedent"));
            };
            let fits = |part: &Formula| {
                remove_one(&q.antecedent, part).is_some_and(|r| same_multiset(&r, &rest))
            };
            if !same_multiset(&q.succedent, &c.succedent) || !(fits(left) || fits(right)) {
                return err("AndL", format!("premise antecedent is not Γ plus a conjunct of {principal}"));
            }
        }
        Rule::AndRight { principal } => {
            let Formula::And { left, right } = principal else {
                return err("AndR", format!("{principal} is not a conjunction"));
            };
            let Some(rest) = remove_one(&c.succedent, principal) else {
                return err("AndR", format!("{principal} missing from the succedent"));
            };
            for (child, part) in [(0, left), (1, right)] {
                let q = &p.premises[child].conclusion;
                let placed = remove_one(&q.succedent, part);
                if !same_multiset(&q.antecedent, &c.antecedent)
                    || !placed.is_some_and(|suc| same_multiset(&suc, &rest))
                {
                    return err("AndR", format!("subproof {child} does not prove Γ -> Δ, {part}"));
                }
            }
        }
        Rule::OrLeft { principal } => {
            let Formula::Or { left, right } = principal else {
                return err("OrL", format!("{principal} is not a disjunction"));
            };
            let Some(rest) = remove_one(&c.antecedent, principal) else {
                return err("OrL", format!("{principal} missing from the antecedent"));
            };
            for (child, part) in [(0, left), (1, right)] {
                let q = &p.premises[child].conclusion;
                let placed = remove_one(&q.antecedent, part);
                if !same_multiset(&q.succedent, &c.succedent)
                    || !placed.is_some_and(|ant| same_multiset(&ant, &rest))
                {
                    return err("OrL", format!("subproof {child} does not prove {part}, Γ -> Δ"));
                }
            }
        }
        Rule::OrRight { principal } => {
            let q = &p.premises[0].conclusion;
            let Formula::Or { left, right } = principal else {
                return err("OrR", format!("{principal} is not a disjunction"));
            };
            let Some(rest) = remove_one(&c.succedent, principal) else {
                return err("OrR", format!("{principal} missing from the succedent"));
            };
            let fits = |part: &Formula| {
                remove_one(&q.succedent, part).is_some_and(|r| same_multiset(&r, &rest))
            };
            if !same_multiset(&q.antecedent, &c.antecedent) || !(fits(left) || fits(right)) {
                return err("OrR", format!("premise succedent is not Δ plus a disjunct of {principal}"));
            }
        }
        Rule::AllLeft { principal, term } => {
            let q = &p.premises[0].conclusion;
            let Formula::Forall { var, body } = principal else {
                return err("AllL", format!("{principal} is not universal"));
            };
            let Some(rest) = remove_one(&c.antecedent, principal) else {
                return err("AllL", format!("{principal} missing from the antecedent"));
            };
            let instance = body.substitute_term(*var, term);
            let placed = remove_one(&q.antecedent, &instance);
            if !same_multiset(&q.succedent, &c.succedent)
                || !placed.is_some_and(|ant| same_multiset(&ant, &rest))
            {
                return err("AllL", format!("premise antecedent is not Γ plus the instance {instance}"));
            }
        }
        Rule::AllRight { principal, eigenvariable } => {
            let q = &p.premises[0].conclusion;
            let Formula::Forall { var, body } = principal else {
                return err("AllR", format!("{principal} is not universal"));
            };
            let Some(rest) = remove_one(&c.succedent, principal) else {
                return err("AllR", format!("{principal} missing from the succedent"));
            };
            if c.antecedent
                .iter()
                .chain(&c.succedent)
                .any(|f| f.free_variables().contains(eigenvariable))
            {
                return err(
                    "AllR",
                    format!("eigenvariable {eigenvariable} occurs free in the conclusion"),
                );
            }
            let instance = body.substitute_term(*var, &Term::var(*eigenvariable));
            let placed = remove_one(&q.succedent, &instance);
            if !same_multiset(&q.antecedent, &c.antecedent)
                || !placed.is_some_and(|suc| same_multiset(&suc, &rest))
            {
                return err("AllR", format!("premise succedent is not Δ plus the instance {instance}"));
            }
        }
        Rule::ExistsLeft { principal, eigenvariable } => {
            let q = &p.premises[0].conclusion;
            let Formula::Exists { var, body } = principal else {
                return err("ExL", format!("{principal} is not existential"));
            };
            let Some(rest) = remove_one(&c.antecedent, principal) else {
                return err("ExL", format!("{principal} missing from the antecedent"));
            };
            if c.antecedent
                .iter()
                .chain(&c.succedent)
                .any(|f| f.free_variables().contains(eigenvariable))
            {
                return err(
                    "ExL",
                    format!("eigenvariable {eigenvariable} occurs free in the conclusion"),
                );
            }
            let instance = body.substitute_term(*var, &Term::var(*eigenvariable));
            let placed = remove_one(&q.antecedent, &instance);
            if !same_multiset(&q.succedent, &c.succedent)
                || !placed.is_some_and(|ant| same_multiset(&ant, &rest))
            {
                return err("ExL", format!("premise antecedent is not Γ plus the instance {instance}"));
            }
        }
        Rule::ExistsRight { principal, term } => {
            let q = &p.premises[0].conclusion;
            let Formula::Exists { var, body } = principal else {
                return err("ExR", format!("{principal} is not existential"));
            };
            let Some(rest) = remove_one(&c.succedent, principal) else {
                return err("ExR", format!("{principal} missing from the succedent"));
            };
            let instance = body.substitute_term(*var, term);
            let placed = remove_one(&q.succedent, &instance);
            if !same_multiset(&q.antecedent, &c.antecedent)
                || !placed.is_some_and(|suc| same_multiset(&suc, &rest))
            {
                return err("ExR", format!("premise succedent is not Δ plus the instance {instance}"));
            }
        }
    }
    for (i, child) in p.premises.iter().enumerate() {
        path.push(i);
        check_node(child, premises, path)?;
        path.pop();
    }
    Ok(())
}

/// Verdict for one node under one substitution.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditVerdict {
    Holds,
    Violated,
    NotExercised,
}

/// One audited (node, substitution) pair, with the evaluator's verdict
/// for every formula on both sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditEntry {
    pub node: String,
    pub sequent: String,
    pub substitution: Vec<(String, String)>,
    pub antecedent: Vec<TriBool>,
    pub succedent: Vec<TriBool>,
    pub verdict: AuditVerdict,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub holds: usize,
    pub violated: usize,
    pub not_exercised: usize,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn violations(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.verdict == AuditVerdict::Violated)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum AuditError {
    #[error("proof fails its check: {0}")]
    Unchecked(#[from] CheckError),
    #[error("the sequent at node {0} has free variables but the pool is empty")]
    EmptyPool(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Replays a checked proof over ℕ.  Every node's sequent is evaluated
/// under every substitution of `pool` terms for its free variables; an
/// entry is `violated` when all antecedent formulas are true and every
/// succedent formula is false, `not-exercised` when the deciding verdict
/// is `Unknown`, and `holds` otherwise.
pub fn truth_audit(
    p: &ProofTree,
    premises: &[Formula],
    budget: &Budget,
    pool: &[Term],
) -> Result<AuditReport, AuditError> {
    check_proof(p, premises)?;
    let mut entries = Vec::new();
    let mut path = Vec::new();
    audit_node(p, budget, pool, &mut path, &mut entries)?;
    let count =
        |v: AuditVerdict| entries.iter().filter(|e| e.verdict == v).count();
    Ok(AuditReport {
        holds: count(AuditVerdict::Holds),
        violated: count(AuditVerdict::Violated),
        not_exercised: count(AuditVerdict::NotExercised),
        entries,
    })
}

fn audit_node(
    p: &ProofTree,
    budget: &Budget,
    pool: &[Term],
    path: &mut Vec<usize>,
    entries: &mut Vec<AuditEntry>,
) -> Result<(), AuditError> {
    let vars = p.conclusion.free_variables();
    if vars.is_empty() {
        entries.push(audit_instance(&p.conclusion, &vars, &[], budget, path)?);
    } else {
        if pool.is_empty() {
            return Err(AuditError::EmptyPool(path_label(path)));
        }
        let mut choice = vec![0usize; vars.len()];
        'all: loop {
            let picked: Vec<&Term> = choice.iter().map(|i| &pool[*i]).collect();
            entries.push(audit_instance(&p.conclusion, &vars, &picked, budget, path)?);
            for place in 0..choice.len() {
                choice[place] += 1;
                if choice[place] < pool.len() {
                    continue 'all;
                }
                choice[place] = 0;
            }
            break;
        }
    }
    for (i, child) in p.premises.iter().enumerate() {
        path.push(i);
        audit_node(child, budget, pool, path, entries)?;
        path.pop();
    }
    Ok(())
}

fn audit_instance(
    sequent: &Sequent,
    vars: &[Variable],
    picked: &[&Term],
    budget: &Budget,
    path: &[usize],
) -> Result<AuditEntry, AuditError> {
    let close = |f: &Formula| -> Result<TriBool, EvalError> {
        let grounded = vars
            .iter()
            .zip(picked)
            .fold(f.clone(), |g, (v, t)| g.substitute_term(*v, t));
        eval_sentence(&grounded, budget)
    };
    let antecedent: Vec<TriBool> =
        sequent.antecedent.iter().map(&close).collect::<Result<_, _>>()?;
    let succedent: Vec<TriBool> =
        sequent.succedent.iter().map(&close).collect::<Result<_, _>>()?;
    let verdict = if succedent.contains(&TriBool::True) {
        AuditVerdict::Holds
    } else if antecedent.contains(&TriBool::False) {
        AuditVerdict::Holds
    } else if antecedent.contains(&TriBool::Unknown) || succedent.contains(&TriBool::Unknown) {
        AuditVerdict::NotExercised
    } else {
        AuditVerdict::Violated
    };
    Ok(AuditEntry {
        node: path_label(path),
        sequent: sequent.to_string(),
        substitution: vars
            .iter()
            .zip(picked)
            .map(|(v, t)| (v.to_string(), t.to_string()))
            .collect(),
        antecedent,
        succedent,
        verdict,
    })
}

/// The default audit pool: numerals `0..9` plus every closed term
/// occurring in the proof, in order of first appearance.
pub fn default_pool(p: &ProofTree) -> Vec<Term> {
    let mut pool: Vec<Term> = (0..10u64).map(Term::numeral).collect();
    fn walk_term(t: &Term, pool: &mut Vec<Term>) {
        if t.is_closed() && !pool.contains(t) {
            pool.push(t.clone());
        }
        match t {
            Term::Succ { arg } => walk_term(arg, pool),
            Term::Add { left, right } | Term::Mul { left, right } => {
                walk_term(left, pool);
                walk_term(right, pool);
            }
            Term::Proj { seq, idx } => {
                walk_term(seq, pool);
                walk_term(idx, pool);
            }
            Term::Zero | Term::Var { .. } | Term::Num { .. } => {}
        }
    }
    fn walk_formula(f: &Formula, pool: &mut Vec<Term>) {
        match f {
            Formula::Eq { left, right } | Formula::Lt { left, right } => {
                walk_term(left, pool);
                walk_term(right, pool);
            }
            Formula::Pred { arg, .. } => walk_term(arg, pool),
            Formula::Not { arg } => walk_formula(arg, pool),
            Formula::And { left, right } | Formula::Or { left, right } => {
                walk_formula(left, pool);
                walk_formula(right, pool);
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => {
                walk_formula(body, pool)
            }
        }
    }
    fn walk_proof(p: &ProofTree, pool: &mut Vec<Term>) {
        for f in p.conclusion.antecedent.iter().chain(&p.conclusion.succedent) {
            walk_formula(f, pool);
        }
        for child in &p.premises {
            walk_proof(child, pool);
        }
    }
    walk_proof(p, &mut pool);
    pool
}

// ---------------------------------------------------------------------
// Shipped proofs and axiom stock.

/// A named proof with its declared premises and the number of violations
/// its audit is expected to report.
pub struct ProofFixture {
    pub name: &'static str,
    pub premises: Vec<Formula>,
    pub proof: ProofTree,
    pub expected_violations: usize,
}

fn seq(ant: &[Formula], suc: &[Formula]) -> Sequent {
    Sequent::new(ant.to_vec(), suc.to_vec())
}

fn leaf(rule: Rule, conclusion: Sequent) -> ProofTree {
    ProofTree { conclusion, rule, premises: Vec::new() }
}

fn node1(rule: Rule, conclusion: Sequent, premise: ProofTree) -> ProofTree {
    ProofTree { conclusion, rule, premises: vec![premise] }
}

fn node2(rule: Rule, conclusion: Sequent, first: ProofTree, second: ProofTree) -> ProofTree {
    ProofTree { conclusion, rule, premises: vec![first, second] }
}

fn ax(f: &Formula) -> ProofTree {
    leaf(Rule::Ax, seq(&[f.clone()], &[f.clone()]))
}

fn prem(f: &Formula) -> ProofTree {
    leaf(Rule::Prem, seq(&[], &[f.clone()]))
}

/// The five-node excluded-middle derivation for `phi`: axiom, `¬R`, the
/// two one-sided `∨R` steps, and a closing contraction.
fn excluded_middle_proof(phi: &Formula) -> ProofTree {
    let neg = Formula::not(phi.clone());
    let both = Formula::or(phi.clone(), neg.clone());
    let n1 = ax(phi);
    let n2 = node1(
        Rule::NotRight { principal: neg.clone() },
        seq(&[], &[phi.clone(), neg.clone()]),
        n1,
    );
    let n3 = node1(
        Rule::OrRight { principal: both.clone() },
        seq(&[], &[phi.clone(), both.clone()]),
        n2,
    );
    let n4 = node1(
        Rule::OrRight { principal: both.clone() },
        seq(&[], &[both.clone(), both.clone()]),
        n3,
    );
    node1(Rule::ContractRight { formula: both.clone() }, seq(&[], &[both]), n4)
}

/// Extends a proof of `→ cur` into a proof of `→ next` using the premise
/// `¬cur ∨ next`: nine nodes of `∨L` bookkeeping and two cuts.
fn detach(so_far: ProofTree, cur: &Formula, next: &Formula) -> ProofTree {
    let neg = Formula::not(cur.clone());
    let step = Formula::or(neg.clone(), next.clone());
    let keep = node1(
        Rule::WeakenLeft { formula: cur.clone() },
        seq(&[next.clone(), cur.clone()], &[next.clone()]),
        ax(next),
    );
    let clash = node1(
        Rule::WeakenRight { formula: next.clone() },
        seq(&[neg.clone(), cur.clone()], &[next.clone()]),
        node1(
            Rule::NotLeft { principal: neg.clone() },
            seq(&[neg.clone(), cur.clone()], &[]),
            ax(cur),
        ),
    );
    let split = node2(
        Rule::OrLeft { principal: step.clone() },
        seq(&[step.clone(), cur.clone()], &[next.clone()]),
        clash,
        keep,
    );
    let modus = node2(
        Rule::Cut { formula: step.clone() },
        seq(&[cur.clone()], &[next.clone()]),
        prem(&step),
        split,
    );
    node2(Rule::Cut { formula: cur.clone() }, seq(&[], &[next.clone()]), so_far, modus)
}

/// The complexity-2 scheme driven through the shipped induction chain.
fn chain_formula(t: &Term) -> Formula {
    Formula::and(
        Formula::lt(Term::Zero, Term::succ(t.clone())),
        Formula::or(
            Formula::eq(t.clone(), t.clone()),
            Formula::lt(t.clone(), Term::succ(t.clone())),
        ),
    )
}

/// A 37-node derivation of `φ(4)` from the instances `φ(0)` and
/// `¬φ(k) ∨ φ(k+1)` for `k < 4` — induction run at standard scale, one
/// detachment per step.
pub fn induction_chain() -> ProofFixture {
    let phi = |k: u64| chain_formula(&Term::numeral(k));
    let mut premises = vec![phi(0)];
    let mut proof = prem(&phi(0));
    for k in 0..4 {
        premises.push(Formula::or(Formula::not(phi(k)), phi(k + 1)));
        proof = detach(proof, &phi(k), &phi(k + 1));
    }
    ProofFixture { name: "induction-chain", premises, proof, expected_violations: 0 }
}

/// The shipped proofs: twelve sound ones exercising every rule, plus the
/// deliberate false-premise leaf whose audit must report one violation.
pub fn fixture_suite() -> Vec<ProofFixture> {
    let zz = parse_formula("0 = 0").expect("fixture formula");
    let positive = parse_formula("0 < S(0)").expect("fixture formula");
    let one_self = parse_formula("S(0) = S(0)").expect("fixture formula");
    let false_eq = parse_formula("0 = S(0)").expect("fixture formula");
    let add_zero = parse_formula("forall v1. v1 + 0 = v1").expect("fixture formula");
    let mut suite = vec![
        ProofFixture {
            name: "premise-identity",
            premises: vec![zz.clone()],
            proof: prem(&zz),
            expected_violations: 0,
        },
        ProofFixture {
            name: "excluded-middle",
            premises: vec![],
            proof: excluded_middle_proof(&zz),
            expected_violations: 0,
        },
        ProofFixture {
            name: "false-premise",
            premises: vec![false_eq.clone()],
            proof: prem(&false_eq),
            expected_violations: 1,
        },
        induction_chain(),
    ];
    // → S(S(0)) + 0 = S(S(0)): instantiate the premise with ∀L, then cut.
    {
        let two = Term::numeral(2);
        let instance = Formula::eq(Term::add(two.clone(), Term::Zero), two.clone());
        let instantiated = node1(
            Rule::AllLeft { principal: add_zero.clone(), term: two },
            seq(&[add_zero.clone()], &[instance.clone()]),
            ax(&instance),
        );
        suite.push(ProofFixture {
            name: "universal-instance",
            premises: vec![add_zero.clone()],
            proof: node2(
                Rule::Cut { formula: add_zero.clone() },
                seq(&[], &[instance]),
                prem(&add_zero),
                instantiated,
            ),
            expected_violations: 0,
        });
    }
    // → ∀v1 (v1+0 = v1 ∨ ¬(v1+0 = v1)): excluded middle under ∀R.
    {
        let eigen = Variable::obj(3);
        let open = parse_formula("v3 + 0 = v3").expect("fixture formula");
        let closed = parse_formula("forall v1. (v1 + 0 = v1 \\/ ~(v1 + 0 = v1))")
            .expect("fixture formula");
        suite.push(ProofFixture {
            name: "universal-excluded-middle",
            premises: vec![],
            proof: node1(
                Rule::AllRight { principal: closed.clone(), eigenvariable: eigen },
                seq(&[], &[closed]),
                excluded_middle_proof(&open),
            ),
            expected_violations: 0,
        });
    }
    // → ∀v1 ∀v2 (v1 = v2 ∨ ¬ v1 = v2): a two-block universal closure of a
    // tautology shape, built by two ∀R steps over the five-node core.
    {
        let open = parse_formula("v3 = v4").expect("fixture formula");
        let inner = parse_formula("forall v2. (v3 = v2 \\/ ~(v3 = v2))")
            .expect("fixture formula");
        let full = parse_formula("forall v1. forall v2. (v1 = v2 \\/ ~(v1 = v2))")
            .expect("fixture formula");
        let once = node1(
            Rule::AllRight { principal: inner.clone(), eigenvariable: Variable::obj(4) },
            seq(&[], &[inner]),
            excluded_middle_proof(&open),
        );
        suite.push(ProofFixture {
            name: "universal-closure",
            premises: vec![],
            proof: node1(
                Rule::AllRight { principal: full.clone(), eigenvariable: Variable::obj(3) },
                seq(&[], &[full]),
                once,
            ),
            expected_violations: 0,
        });
    }
    // → 0 = 0 from a bounded existential premise, through ∃L.
    {
        let body = parse_formula("v1 < S(0) /\\ 0 = 0").expect("fixture formula");
        let witnessed = parse_formula("exists v1. (v1 < S(0) /\\ 0 = 0)")
            .expect("fixture formula");
        let unpacked = node1(
            Rule::AndLeft { principal: body.clone() },
            seq(&[body.clone()], &[zz.clone()]),
            ax(&zz),
        );
        let opened = node1(
            Rule::ExistsLeft { principal: witnessed.clone(), eigenvariable: Variable::obj(1) },
            seq(&[witnessed.clone()], &[zz.clone()]),
            unpacked,
        );
        suite.push(ProofFixture {
            name: "exists-left",
            premises: vec![witnessed.clone()],
            proof: node2(
                Rule::Cut { formula: witnessed.clone() },
                seq(&[], &[zz.clone()]),
                prem(&witnessed),
                opened,
            ),
            expected_violations: 0,
        });
    }
    // → ∃v1 (v1 = S(0)) with the witness S(0) supplied by ∃R.
    {
        let target = parse_formula("exists v1. v1 = S(0)").expect("fixture formula");
        suite.push(ProofFixture {
            name: "exists-witness",
            premises: vec![one_self.clone()],
            proof: node1(
                Rule::ExistsRight { principal: target.clone(), term: Term::numeral(1) },
                seq(&[], &[target]),
                prem(&one_self),
            ),
            expected_violations: 0,
        });
    }
    // → 0 < S(0) ∨ 0 = S(S(0)): the true disjunct carries the false one.
    {
        let or = Formula::or(positive.clone(), parse_formula("0 = S(S(0))").expect("fixture formula"));
        suite.push(ProofFixture {
            name: "disjunct-weaken",
            premises: vec![positive.clone()],
            proof: node1(
                Rule::OrRight { principal: or.clone() },
                seq(&[], &[or]),
                prem(&positive),
            ),
            expected_violations: 0,
        });
    }
    // 0 = 0 ∧ 0 < S(0) → 0 < S(0) ∧ 0 = 0: both projections, rejoined.
    {
        let and = Formula::and(zz.clone(), positive.clone());
        let swapped = Formula::and(positive.clone(), zz.clone());
        let right_part = node1(
            Rule::AndLeft { principal: and.clone() },
            seq(&[and.clone()], &[positive.clone()]),
            ax(&positive),
        );
        let left_part = node1(
            Rule::AndLeft { principal: and.clone() },
            seq(&[and.clone()], &[zz.clone()]),
            ax(&zz),
        );
        suite.push(ProofFixture {
            name: "conjunction-swap",
            premises: vec![],
            proof: node2(
                Rule::AndRight { principal: swapped.clone() },
                seq(&[and], &[swapped]),
                right_part,
                left_part,
            ),
            expected_violations: 0,
        });
    }
    // → ∀v2 (v2+0 = v2) from ∀v1 (v1+0 = v1): renaming via ∀L then ∀R.
    {
        let eigen = Variable::obj(3);
        let open = parse_formula("v3 + 0 = v3").expect("fixture formula");
        let renamed = parse_formula("forall v2. v2 + 0 = v2").expect("fixture formula");
        let instantiated = node1(
            Rule::AllLeft { principal: add_zero.clone(), term: Term::var(eigen) },
            seq(&[add_zero.clone()], &[open.clone()]),
            ax(&open),
        );
        let generalized = node1(
            Rule::AllRight { principal: renamed.clone(), eigenvariable: eigen },
            seq(&[add_zero.clone()], &[renamed.clone()]),
            instantiated,
        );
        suite.push(ProofFixture {
            name: "universal-renaming",
            premises: vec![add_zero.clone()],
            proof: node2(
                Rule::Cut { formula: add_zero.clone() },
                seq(&[], &[renamed]),
                prem(&add_zero),
                generalized,
            ),
            expected_violations: 0,
        });
    }
    // 0 = 0 → 0 = 0 the long way round: weaken in a copy, contract it out.
    {
        let doubled = node1(
            Rule::WeakenLeft { formula: zz.clone() },
            seq(&[zz.clone(), zz.clone()], &[zz.clone()]),
            ax(&zz),
        );
        suite.push(ProofFixture {
            name: "contract-left",
            premises: vec![],
            proof: node1(
                Rule::ContractLeft { formula: zz.clone() },
                seq(&[zz.clone()], &[zz.clone()]),
                doubled,
            ),
            expected_violations: 0,
        });
    }
    suite
}

/// The non-scheme axioms of arithmetic with order, as sentences: successor,
/// addition and multiplication clauses, the order base and step, and the
/// predecessor existence axiom.
pub fn pa_axioms() -> Vec<Formula> {
    [
        "forall v1. ~(S(v1) = 0)",
        "forall v1. forall v2. (~(S(v1) = S(v2)) \\/ v1 = v2)",
        "forall v1. v1 + 0 = v1",
        "forall v1. forall v2. v1 + S(v2) = S(v1 + v2)",
        "forall v1. v1 * 0 = 0",
        "forall v1. forall v2. v1 * S(v2) = v1 * v2 + v1",
        "forall v1. ~(v1 < 0)",
        "forall v1. forall v2. ((~(v1 < S(v2)) \\/ (v1 < v2 \\/ v1 = v2)) /\\ (~((v1 < v2 \\/ v1 = v2)) \\/ v1 < S(v2)))",
        "forall v1. (v1 = 0 \\/ exists v2. v1 = S(v2))",
    ]
    .iter()
    .map(|text| parse_formula(text).expect("axiom text"))
    .collect()
}

/// The induction sentence for `phi` in the variable `x`:
/// `¬(φ(0) ∧ ∀x (¬φ(x) ∨ φ(S x))) ∨ ∀x φ(x)`.
pub fn induction_axiom(x: Variable, phi: &Formula) -> Formula {
    let base = phi.substitute_term(x, &Term::Zero);
    let step = Formula::forall(
        x,
        Formula::or(
            Formula::not(phi.clone()),
            phi.substitute_term(x, &Term::succ(Term::var(x))),
        ),
    );
    Formula::or(Formula::not(Formula::and(base, step)), Formula::forall(x, phi.clone()))
}

/// Closed induction sentences for a stock of shapes of complexity `0..=3`
/// in `v1`; the parametric shape is instantiated with numerals.
pub fn induction_sentences() -> Vec<Formula> {
    let x = Variable::obj(1);
    let y = Variable::obj(2);
    let shapes = [
        "v1 + 0 = v1",
        "~(S(v1) = 0)",
        "0 < S(v1) /\\ (v1 = v1 \\/ v1 < S(v1))",
        "~(v1 < v1 \\/ ~(v1 + 0 = v1))",
        "v1 + v2 = v2 + v1",
    ];
    let mut out = Vec::new();
    for text in shapes {
        let shape = parse_formula(text).expect("induction shape");
        if shape.free_variables().contains(&y) {
            for n in [0u64, 2, 9] {
                let grounded = shape.substitute_term(y, &Term::numeral(n));
                out.push(induction_axiom(x, &grounded));
            }
        } else {
            out.push(induction_axiom(x, &shape));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn fml(text: &str) -> Formula {
        parse_formula(text).expect("test formula parses")
    }

    fn by_name(name: &str) -> ProofFixture {
        fixture_suite()
            .into_iter()
            .find(|f| f.name == name)
            .unwrap_or_else(|| panic!("fixture {name} exists"))
    }

    #[test]
    fn a_premise_leaf_checks_and_concludes() {
        let f = by_name("premise-identity");
        assert_eq!(check_proof(&f.proof, &f.premises), Ok(()));
        let c = conclusion_of(&f.proof, &f.premises).unwrap();
        assert_eq!(*c, seq(&[], &[fml("0 = 0")]));
        // Stable under re-checking.
        assert_eq!(conclusion_of(&f.proof, &f.premises).unwrap(), c);
        // The same leaf without its declaration is refused by name.
        let e = check_proof(&f.proof, &[]).unwrap_err();
        assert_eq!(e.rule, "Prem");
        assert_eq!(e.node, "root");
        assert!(e.reason.contains("0 = 0"), "{e}");
    }

    #[test]
    fn excluded_middle_takes_exactly_five_nodes() {
        let f = by_name("excluded-middle");
        assert_eq!(f.proof.node_count(), 5);
        assert_eq!(check_proof(&f.proof, &[]), Ok(()));
        assert_eq!(
            *conclusion_of(&f.proof, &[]).unwrap(),
            seq(&[], &[fml("0 = 0 \\/ ~(0 = 0)")])
        );
    }

    #[test]
    fn every_shipped_proof_checks_and_audits_as_expected() {
        let budget = Budget::default();
        for fixture in fixture_suite() {
            assert_eq!(
                check_proof(&fixture.proof, &fixture.premises),
                Ok(()),
                "{} checks",
                fixture.name
            );
            let pool = default_pool(&fixture.proof);
            let report =
                truth_audit(&fixture.proof, &fixture.premises, &budget, &pool).unwrap();
            assert_eq!(
                report.violated, fixture.expected_violations,
                "{}: {:?}",
                fixture.name,
                report.violations().collect::<Vec<_>>()
            );
            assert_eq!(
                report.holds + report.violated + report.not_exercised,
                report.entries.len(),
                "{} counts add up",
                fixture.name
            );
        }
    }

    #[test]
    fn the_false_premise_is_pinpointed_at_its_leaf() {
        let f = by_name("false-premise");
        let pool = default_pool(&f.proof);
        let report = truth_audit(&f.proof, &f.premises, &Budget::default(), &pool).unwrap();
        assert_eq!(report.violated, 1);
        assert_eq!(report.entries.len(), 1);
        let bad = &report.entries[0];
        assert_eq!(bad.node, "root");
        assert_eq!(bad.verdict, AuditVerdict::Violated);
        assert_eq!(bad.sequent, " -> 0 = S(0)");
        assert!(bad.substitution.is_empty());
        assert_eq!(bad.succedent, vec![TriBool::False]);
    }

    #[test]
    fn the_induction_chain_is_large_grounded_and_clean() {
        let f = induction_chain();
        assert!(f.proof.node_count() >= 30, "{} nodes", f.proof.node_count());
        let phi4 = chain_formula(&Term::numeral(4));
        assert_eq!(phi4.logical_complexity(), 2);
        assert_eq!(
            *conclusion_of(&f.proof, &f.premises).unwrap(),
            seq(&[], &[phi4])
        );
        let budget = Budget::default();
        for p in &f.premises {
            assert_eq!(eval_sentence(p, &budget), Ok(TriBool::True), "{p}");
        }
    }

    #[test]
    fn rule_violations_name_the_node_and_the_rule() {
        // Swapping the subproofs of ∧R breaks which side proves what.
        let mut bad = by_name("conjunction-swap");
        bad.proof.premises.swap(0, 1);
        let e = check_proof(&bad.proof, &bad.premises).unwrap_err();
        assert_eq!(e.rule, "AndR");
        assert_eq!(e.node, "root");
        // The same tamper one level down is located one level down.
        let wrapped = node1(
            Rule::WeakenLeft { formula: fml("0 = 0") },
            seq(
                &[fml("0 = 0"), fml("0 = 0 /\\ 0 < S(0)")],
                &[fml("0 < S(0) /\\ 0 = 0")],
            ),
            bad.proof,
        );
        let e = check_proof(&wrapped, &bad.premises).unwrap_err();
        assert_eq!(e.node, "0");
        assert_eq!(e.rule, "AndR");
    }

    #[test]
    fn eigenvariable_capture_is_refused() {
        // ∀R whose eigenvariable v2 stays free in the conclusion.
        let open = fml("v2 = v2");
        let closed = fml("forall v1. v1 = v1");
        let bad = node1(
            Rule::AllRight { principal: closed.clone(), eigenvariable: Variable::obj(2) },
            seq(&[open.clone()], &[closed]),
            ax(&open),
        );
        let e = check_proof(&bad, &[]).unwrap_err();
        assert_eq!(e.rule, "AllR");
        assert!(e.reason.contains("eigenvariable"), "{e}");
    }

    #[test]
    fn invalid_objects_are_rejected_before_any_audit() {
        let mut bad = by_name("conjunction-swap");
        bad.proof.premises.swap(0, 1);
        let pool = default_pool(&bad.proof);
        match truth_audit(&bad.proof, &bad.premises, &Budget::default(), &pool) {
            Err(AuditError::Unchecked(e)) => assert_eq!(e.rule, "AndR"),
            other => panic!("expected a check failure, got {other:?}"),
        }
    }

    #[test]
    fn multiset_sides_ignore_listing_order() {
        let a = fml("0 = 0");
        let b = fml("0 < S(0)");
        let doubled = node1(
            Rule::WeakenLeft { formula: b.clone() },
            seq(&[b.clone(), a.clone()], &[a.clone()]),
            ax(&a),
        );
        // The same conclusion listed the other way round.
        let flipped = node1(
            Rule::ContractLeft { formula: a.clone() },
            seq(&[a.clone(), b.clone()], &[a.clone()]),
            node1(
                Rule::WeakenLeft { formula: a.clone() },
                seq(&[a.clone(), b.clone(), a.clone()], &[a.clone()]),
                doubled,
            ),
        );
        assert_eq!(check_proof(&flipped, &[]), Ok(()));
    }

    #[test]
    fn audits_with_free_variables_need_a_pool() {
        let f = by_name("universal-excluded-middle");
        match truth_audit(&f.proof, &f.premises, &Budget::default(), &[]) {
            Err(AuditError::EmptyPool(node)) => assert_eq!(node, "0"),
            other => panic!("expected an empty-pool error, got {other:?}"),
        }
        // With the default pool the open nodes ground out and hold.
        let pool = default_pool(&f.proof);
        let report = truth_audit(&f.proof, &f.premises, &Budget::default(), &pool).unwrap();
        assert_eq!(report.violated, 0);
        assert!(report.holds > pool.len(), "open nodes fan out over the pool");
        // The root ∀ sentence itself is beyond the bounded evaluator.
        assert_eq!(report.entries[0].verdict, AuditVerdict::NotExercised);
    }

    #[test]
    fn the_axiom_stock_is_never_false() {
        let budget = Budget::default();
        for axiom in pa_axioms() {
            assert!(axiom.is_sentence() && axiom.is_pa(), "{axiom}");
            let v = eval_sentence(&axiom, &budget).unwrap();
            assert_ne!(v, TriBool::False, "{axiom}");
        }
        for instance in induction_sentences() {
            assert!(instance.is_sentence() && instance.is_pa(), "{instance}");
            let v = eval_sentence(&instance, &budget).unwrap();
            assert_ne!(v, TriBool::False, "{instance}");
        }
    }

    #[test]
    fn induction_shapes_cover_the_advertised_complexities() {
        let shapes = [
            "v1 + 0 = v1",
            "~(S(v1) = 0)",
            "0 < S(v1) /\\ (v1 = v1 \\/ v1 < S(v1))",
            "~(v1 < v1 \\/ ~(v1 + 0 = v1))",
        ];
        let got: Vec<u32> =
            shapes.iter().map(|t| fml(t).logical_complexity()).collect();
        assert_eq!(got, vec![0, 1, 2, 3]);
    }

    #[test]
    fn documents_round_trip_through_json() {
        for fixture in fixture_suite() {
            let doc = ProofDocument {
                premises: fixture.premises.clone(),
                proof: fixture.proof.clone(),
            };
            let text = serde_json::to_string(&doc).unwrap();
            let back: ProofDocument = serde_json::from_str(&text).unwrap();
            assert_eq!(back, doc, "{}", fixture.name);
        }
    }

    #[test]
    fn the_wire_format_is_the_documented_schema() {
        let f = by_name("excluded-middle");
        let v = serde_json::to_value(&f.proof).unwrap();
        assert_eq!(v["rule"], "CR");
        assert_eq!(v["conclusion"]["suc"][0], "0 = 0 \\/ ~0 = 0");
        assert_eq!(v["conclusion"]["ant"].as_array().unwrap().len(), 0);
        assert_eq!(v["data"]["principal"], "0 = 0 \\/ ~0 = 0");
        assert_eq!(v["premises"][0]["rule"], "OrR");
        // Leaves omit the empty fields.
        let leaf = &v["premises"][0]["premises"][0]["premises"][0]["premises"][0];
        assert_eq!(leaf["rule"], "Ax");
        assert!(leaf.get("data").is_none());
        assert!(leaf.get("premises").is_none());
    }

    const SHIPPED: [(&str, &str); 4] = [
        ("excluded-middle", "excluded_middle.json"),
        ("false-premise", "false_premise.json"),
        ("exists-witness", "exists_witness.json"),
        ("conjunction-swap", "conjunction_swap.json"),
    ];

    fn proof_fixture_path(file: &str) -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures/proofs")
            .join(file)
    }

    #[test]
    fn shipped_proof_files_match_the_builders() {
        for (name, file) in SHIPPED {
            let fixture = by_name(name);
            let text = std::fs::read_to_string(proof_fixture_path(file))
                .unwrap_or_else(|e| panic!("{file} unreadable ({e}); regenerate fixtures"));
            let doc: ProofDocument = serde_json::from_str(&text).unwrap();
            assert_eq!(doc.premises, fixture.premises, "{name}");
            assert_eq!(doc.proof, fixture.proof, "{name}");
        }
    }

    #[test]
    fn the_universal_closure_walkthrough_matches_its_writeup() {
        let f = by_name("universal-closure");
        assert_eq!(f.proof.node_count(), 7);
        assert_eq!(
            conclusion_of(&f.proof, &[]).unwrap().to_string(),
            " -> forall v1. forall v2. v1 = v2 \\/ ~v1 = v2"
        );
        let pool = default_pool(&f.proof);
        assert_eq!(pool.len(), 10);
        let report = truth_audit(&f.proof, &[], &Budget::default(), &pool).unwrap();
        assert_eq!(
            (report.holds, report.violated, report.not_exercised),
            (500, 0, 11)
        );
        let doc_copy = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../docs/universal_closure.json");
        let text = std::fs::read_to_string(doc_copy)
            .unwrap_or_else(|e| panic!("walkthrough file unreadable ({e}); regenerate fixtures"));
        let doc: ProofDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.proof, f.proof);
    }

    /// Rewrites the shipped proof files; run explicitly when the builders
    /// change on purpose.
    #[test]
    #[ignore]
    fn regenerate_proof_fixtures() {
        for (name, file) in SHIPPED {
            let fixture = by_name(name);
            let doc = ProofDocument { premises: fixture.premises, proof: fixture.proof };
            let mut text = serde_json::to_string_pretty(&doc).unwrap();
            text.push('\n');
            std::fs::write(proof_fixture_path(file), text).expect("fixture written");
        }
        let walkthrough = by_name("universal-closure");
        let doc = ProofDocument { premises: walkthrough.premises, proof: walkthrough.proof };
        let mut text = serde_json::to_string_pretty(&doc).unwrap();
        text.push('\n');
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../docs/universal_closure.json");
        std::fs::write(path, text).expect("walkthrough written");
    }
}
