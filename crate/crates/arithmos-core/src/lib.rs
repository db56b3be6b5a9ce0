//! A workbench for arithmetized metamathematics over Peano arithmetic.
//!
//! The crate provides, as ordinary Rust values and functions:
//!
//! * terms and formulas of first-order arithmetic with parsing, printing,
//!   substitution and occurrence analysis ([`syntax`]);
//! * an injective Gödel numbering of syntax with numerals, valuation,
//!   sequence coding and generalized substitution ([`godel`]);
//! * a compiler from primitive-recursive definitions to arithmetic graph
//!   formulas, plus the library of syntax functions the rest of the crate
//!   needs in compiled form ([`pr`]);
//! * the template machinery: bar transform, similarity, templates, witness
//!   sequences, projected forms and template enumeration ([`template`]);
//! * synthesized partial truth predicates — the leveled family and the
//!   template-indexed family — together with a native reference semantics
//!   ([`truth`]);
//! * a sound three-valued bounded evaluator over the standard model
//!   ([`eval`]);
//! * a sequent-calculus proof checker with a truth-preservation auditor
//!   ([`sequent`]).

pub mod eval;
pub mod godel;
pub mod pr;
pub mod sequent;
pub mod syntax;
pub mod template;
pub mod truth;

pub use eval::{Budget, TriBool};
pub use sequent::{AuditReport, ProofDocument, ProofTree, Rule, Sequent};
pub use syntax::{
    classify_term_occurrences, parse_formula, parse_term, Formula, ParseError, Term,
    TermOccurrence, VarKind, Variable,
};
