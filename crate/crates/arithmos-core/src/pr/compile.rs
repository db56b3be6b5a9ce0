//! Translation of primitive recursive definitions into arithmetic
//! formulas.
//!
//! A definition of arity `m` compiles to a *graph formula*: a formula
//! whose free variables are exactly `v1..vm` (the arguments) and
//! `v(m+1)` (the result), true precisely when the result is the value of
//! the function at the arguments.  Composite bodies thread intermediate
//! values through existentials; the recursion forms become the
//! computation-history blocks of [`super::trace`], whose existentials
//! are likewise unbounded — nothing in a compiled graph bounds a
//! quantifier by the answer it is looking for.
//!
//! Compilation is deterministic: the same definition always yields the
//! same formula, variable indices included, so emitted formulas can be
//! recognized again structurally.

use std::collections::{BTreeMap, HashMap, HashSet};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::library::library;
use super::trace::{emit_count_fold, emit_digit_fold, read_block, CountBody, FoldBody};
use super::{DigitScan, PrBody, PrError, PrLibrary};
use crate::syntax::{Formula, Term, Variable};

/// A compiled definition: `formula` holds with free variables
/// `v1..v{arity}` for the arguments and `v{arity+1}` for the result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFormula {
    pub arity: usize,
    pub formula: Formula,
}

impl GraphFormula {
    pub fn output_var(&self) -> Variable {
        Variable::obj(self.arity as u32 + 1)
    }
}

/// Instantiates a graph formula at the given argument terms, wiring the
/// result to `out`.  Bound variables are renamed from `fresh` upwards, so
/// the result can be spliced into any context without capture.
pub fn instantiate(graph: &GraphFormula, args: &[Term], out: Term, fresh: &mut u32) -> Formula {
    assert_eq!(args.len(), graph.arity, "argument count matches arity");
    let mut map: HashMap<Variable, Term> = HashMap::new();
    for (i, a) in args.iter().enumerate() {
        map.insert(Variable::obj(i as u32 + 1), a.clone());
    }
    map.insert(graph.output_var(), out);
    rename(&graph.formula, &mut map, fresh)
}

fn rename(f: &Formula, map: &mut HashMap<Variable, Term>, fresh: &mut u32) -> Formula {
    match f {
        Formula::Eq { left, right } => {
            Formula::eq(rename_term(left, map), rename_term(right, map))
        }
        Formula::Lt { left, right } => {
            Formula::lt(rename_term(left, map), rename_term(right, map))
        }
        Formula::Not { arg } => Formula::not(rename(arg, map, fresh)),
        Formula::And { left, right } => {
            Formula::and(rename(left, map, fresh), rename(right, map, fresh))
        }
        Formula::Or { left, right } => {
            Formula::or(rename(left, map, fresh), rename(right, map, fresh))
        }
        Formula::Forall { var, body } => {
            let (v, saved) = push_binder(*var, map, fresh);
            let body = rename(body, map, fresh);
            pop_binder(*var, saved, map);
            Formula::forall(v, body)
        }
        Formula::Exists { var, body } => {
            let (v, saved) = push_binder(*var, map, fresh);
            let body = rename(body, map, fresh);
            pop_binder(*var, saved, map);
            Formula::exists(v, body)
        }
        Formula::Pred { name, arg } => Formula::pred(name, rename_term(arg, map)),
    }
}

fn push_binder(
    var: Variable,
    map: &mut HashMap<Variable, Term>,
    fresh: &mut u32,
) -> (Variable, Option<Term>) {
    let v = Variable::obj(*fresh);
    *fresh += 1;
    (v, map.insert(var, Term::var(v)))
}

fn pop_binder(var: Variable, saved: Option<Term>, map: &mut HashMap<Variable, Term>) {
    match saved {
        Some(t) => {
            map.insert(var, t);
        }
        None => {
            map.remove(&var);
        }
    }
}

fn rename_term(t: &Term, map: &HashMap<Variable, Term>) -> Term {
    match t {
        Term::Zero | Term::Num { .. } => t.clone(),
        Term::Succ { arg } => Term::succ(rename_term(arg, map)),
        Term::Add { left, right } => {
            Term::add(rename_term(left, map), rename_term(right, map))
        }
        Term::Mul { left, right } => {
            Term::mul(rename_term(left, map), rename_term(right, map))
        }
        Term::Proj { seq, idx } => {
            Term::proj(rename_term(seq, map), rename_term(idx, map))
        }
        Term::Var { var } => map.get(var).cloned().unwrap_or_else(|| t.clone()),
    }
}

struct Compiler<'a> {
    lib: &'a PrLibrary,
    cache: BTreeMap<String, GraphFormula>,
    in_progress: HashSet<String>,
}

impl<'a> Compiler<'a> {
    fn graph(&mut self, name: &str) -> Result<GraphFormula, PrError> {
        if let Some(g) = self.cache.get(name) {
            return Ok(g.clone());
        }
        if !self.in_progress.insert(name.to_string()) {
            return Err(PrError::RecursiveReference(name.to_string()));
        }
        let lib = self.lib;
        let def = lib.get(name)?;
        let args: Vec<Term> = (1..=def.arity as u32).map(Term::v).collect();
        let out = Term::v(def.arity as u32 + 1);
        let mut fresh = def.arity as u32 + 2;
        let formula = self.body(&def.body, &args, out, &mut fresh, None)?;
        self.in_progress.remove(name);
        let graph = GraphFormula {
            arity: def.arity,
            formula,
        };
        self.cache.insert(name.to_string(), graph.clone());
        Ok(graph)
    }

    /// Compiles `body` applied to `args`, asserting the value is `out`.
    /// `hist` carries the history pairs of the enclosing fold's data
    /// tracks, for table reads.
    fn body(
        &mut self,
        body: &PrBody,
        args: &[Term],
        out: Term,
        fresh: &mut u32,
        hist: Option<&[(Variable, Variable)]>,
    ) -> Result<Formula, PrError> {
        Ok(match body {
            PrBody::Zero => Formula::eq(out, Term::Zero),
            PrBody::Const(n) => Formula::eq(out, Term::num(*n)),
            PrBody::Succ => Formula::eq(out, Term::succ(args[0].clone())),
            PrBody::Proj(i) => Formula::eq(out, args[*i - 1].clone()),
            PrBody::Add => Formula::eq(out, Term::add(args[0].clone(), args[1].clone())),
            PrBody::Mul => Formula::eq(out, Term::mul(args[0].clone(), args[1].clone())),
            PrBody::Monus => Formula::or(
                Formula::eq(Term::add(out.clone(), args[1].clone()), args[0].clone()),
                Formula::and(
                    Formula::lt(args[0].clone(), args[1].clone()),
                    Formula::eq(out, Term::Zero),
                ),
            ),
            PrBody::Div => {
                let r = fresh_var(fresh);
                Formula::or(
                    Formula::exists(
                        r,
                        Formula::and(
                            Formula::eq(
                                args[0].clone(),
                                Term::add(
                                    Term::mul(out.clone(), args[1].clone()),
                                    Term::var(r),
                                ),
                            ),
                            Formula::lt(Term::var(r), args[1].clone()),
                        ),
                    ),
                    Formula::and(
                        Formula::eq(args[1].clone(), Term::Zero),
                        Formula::eq(out, Term::Zero),
                    ),
                )
            }
            PrBody::Mod => {
                let q = fresh_var(fresh);
                Formula::or(
                    Formula::exists(
                        q,
                        Formula::and(
                            Formula::eq(
                                args[0].clone(),
                                Term::add(
                                    Term::mul(Term::var(q), args[1].clone()),
                                    out.clone(),
                                ),
                            ),
                            Formula::lt(out.clone(), args[1].clone()),
                        ),
                    ),
                    Formula::and(
                        Formula::eq(args[1].clone(), Term::Zero),
                        Formula::eq(out, args[0].clone()),
                    ),
                )
            }
            PrBody::Compose { f, args: inner } => {
                let wires: Vec<Variable> = (0..inner.len()).map(|_| fresh_var(fresh)).collect();
                let wire_terms: Vec<Term> = wires.iter().map(|&v| Term::var(v)).collect();
                let mut parts = Vec::with_capacity(inner.len() + 1);
                for (g, w) in inner.iter().zip(&wire_terms) {
                    parts.push(self.body(g, args, w.clone(), fresh, hist)?);
                }
                parts.push(self.body(f, &wire_terms, out, fresh, None)?);
                wires
                    .into_iter()
                    .rev()
                    .fold(and_chain(parts), |acc, v| Formula::exists(v, acc))
            }
            PrBody::If { cond, then, els } => {
                let cv = fresh_var(fresh);
                let g_cond = self.body(cond, args, Term::var(cv), fresh, hist)?;
                let g_then = self.body(then, args, out.clone(), fresh, hist)?;
                let g_els = self.body(els, args, out, fresh, hist)?;
                Formula::exists(
                    cv,
                    Formula::and(
                        g_cond,
                        Formula::or(
                            Formula::and(Formula::eq(Term::var(cv), Term::Zero), g_then),
                            Formula::and(
                                Formula::not(Formula::eq(Term::var(cv), Term::Zero)),
                                g_els,
                            ),
                        ),
                    ),
                )
            }
            PrBody::PrimRec { base, step } => {
                let m = args.len();
                let count = args[m - 1].clone();
                let mut helper = RecPieces {
                    comp: self,
                    base,
                    step,
                    args: &args[..m - 1],
                    err: None,
                };
                let formula = emit_count_fold(fresh, count, out, &mut helper);
                if let Some(e) = helper.err {
                    return Err(e);
                }
                formula
            }
            PrBody::Scan(scan) => {
                let subject = args[args.len() - 1].clone();
                let mut helper = ScanPieces {
                    comp: self,
                    scan,
                    args,
                    out,
                    err: None,
                };
                let formula = emit_digit_fold(
                    fresh,
                    u64::from(scan.base),
                    scan.tracks(),
                    subject,
                    &mut helper,
                );
                if let Some(e) = helper.err {
                    return Err(e);
                }
                formula
            }
            PrBody::TableRead { track, index } => {
                let pairs = hist.expect("validated reads sit inside a scan step");
                let (c, d) = pairs[*track - 1];
                let iv = fresh_var(fresh);
                let g_index = self.body(index, args, Term::var(iv), fresh, hist)?;
                Formula::exists(
                    iv,
                    Formula::and(g_index, read_block(c, d, Term::var(iv), out, fresh)),
                )
            }
            PrBody::Ref(name) => {
                let graph = self.graph(name)?;
                instantiate(&graph, args, out, fresh)
            }
        })
    }
}

/// Compiles the pieces of a counted fold, remembering the first error.
struct RecPieces<'c, 'a> {
    comp: &'c mut Compiler<'a>,
    base: &'c PrBody,
    step: &'c PrBody,
    args: &'c [Term],
    err: Option<PrError>,
}

impl RecPieces<'_, '_> {
    fn compile(
        &mut self,
        body: &PrBody,
        args: &[Term],
        out: Term,
        fresh: &mut u32,
    ) -> Formula {
        match self.comp.body(body, args, out, fresh, None) {
            Ok(f) => f,
            Err(e) => {
                self.err.get_or_insert(e);
                Formula::eq(Term::Zero, Term::Zero)
            }
        }
    }
}

impl CountBody for RecPieces<'_, '_> {
    fn init(&mut self, entry: Term, fresh: &mut u32) -> Formula {
        let base = self.base;
        let args = self.args.to_vec();
        self.compile(base, &args, entry, fresh)
    }

    fn step(&mut self, pos: Term, cur: Term, next: Term, fresh: &mut u32) -> Formula {
        let step = self.step;
        let mut step_args = self.args.to_vec();
        step_args.push(pos);
        step_args.push(cur);
        self.compile(step, &step_args, next, fresh)
    }
}

/// Compiles the pieces of a digit fold, remembering the first error.
struct ScanPieces<'c, 'a> {
    comp: &'c mut Compiler<'a>,
    scan: &'c DigitScan,
    args: &'c [Term],
    out: Term,
    err: Option<PrError>,
}

impl ScanPieces<'_, '_> {
    fn compile(
        &mut self,
        body: &PrBody,
        args: &[Term],
        out: Term,
        fresh: &mut u32,
        hist: Option<&[(Variable, Variable)]>,
    ) -> Formula {
        match self.comp.body(body, args, out, fresh, hist) {
            Ok(f) => f,
            Err(e) => {
                self.err.get_or_insert(e);
                Formula::eq(Term::Zero, Term::Zero)
            }
        }
    }
}

impl FoldBody for ScanPieces<'_, '_> {
    fn init(&mut self, track: usize, entry: Term, fresh: &mut u32) -> Formula {
        let body = &self.scan.inits[track];
        let args = self.args.to_vec();
        self.compile(body, &args, entry, fresh, None)
    }

    fn step(
        &mut self,
        pos: Term,
        digit: Term,
        cur: &[Term],
        next: &[Term],
        pairs: &[(Variable, Variable)],
        fresh: &mut u32,
    ) -> Vec<Formula> {
        let mut step_args = self.args.to_vec();
        step_args.push(pos);
        step_args.push(digit);
        step_args.extend(cur.iter().cloned());
        let steps = self.scan.steps.clone();
        steps
            .iter()
            .zip(next)
            .map(|(s, n)| self.compile(s, &step_args, n.clone(), fresh, Some(pairs)))
            .collect()
    }

    fn out(&mut self, finals: &[Term], fresh: &mut u32) -> Formula {
        let body = self.scan.out.clone();
        let mut out_args = self.args.to_vec();
        out_args.extend_from_slice(finals);
        let target = self.out.clone();
        self.compile(&body, &out_args, target, fresh, None)
    }
}

fn fresh_var(fresh: &mut u32) -> Variable {
    let v = Variable::obj(*fresh);
    *fresh += 1;
    v
}

fn and_chain(mut parts: Vec<Formula>) -> Formula {
    let last = parts.pop().expect("nonempty conjunction");
    parts
        .into_iter()
        .rev()
        .fold(last, |acc, f| Formula::and(f, acc))
}

/// Compiles one definition of a library to its graph formula.
pub fn compile_def(lib: &PrLibrary, name: &str) -> Result<GraphFormula, PrError> {
    let mut compiler = Compiler {
        lib,
        cache: BTreeMap::new(),
        in_progress: HashSet::new(),
    };
    compiler.graph(name)
}

/// Compiles a 0/1-valued definition to a formula in its arguments alone:
/// `∃y (graph(args, y) ∧ y = S(0))`.
pub fn compile_predicate(lib: &PrLibrary, name: &str) -> Result<Formula, PrError> {
    let graph = compile_def(lib, name)?;
    let args: Vec<Term> = (1..=graph.arity as u32).map(Term::v).collect();
    let mut fresh = graph.arity as u32 + 2;
    let y = fresh_var(&mut fresh);
    let body = instantiate(&graph, &args, Term::var(y), &mut fresh);
    Ok(Formula::exists(
        y,
        Formula::and(body, Formula::eq(Term::var(y), Term::numeral(1))),
    ))
}

/// Graph formulas of every definition in the shipped library, compiled
/// once.
pub fn compiled_library() -> &'static BTreeMap<String, GraphFormula> {
    static GRAPHS: Lazy<BTreeMap<String, GraphFormula>> = Lazy::new(|| {
        let lib = library();
        let mut compiler = Compiler {
            lib,
            cache: BTreeMap::new(),
            in_progress: HashSet::new(),
        };
        for def in &lib.definitions {
            compiler
                .graph(&def.name)
                .unwrap_or_else(|e| panic!("shipped library compiles: {e}"));
        }
        compiler.cache
    });
    &GRAPHS
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::super::trace::{match_trace, TraceView};
    use super::*;
    use super::super::PrDefinition;

    fn lib_with(defs: Vec<PrDefinition>) -> PrLibrary {
        let mut lib = PrLibrary::new();
        for d in defs {
            lib.insert(d);
        }
        lib.validate().unwrap();
        lib
    }

    #[test]
    fn direct_forms_compile_to_equations() {
        let lib = lib_with(vec![PrDefinition {
            name: "double".into(),
            arity: 1,
            body: add(x(1), x(1)),
        }]);
        let g = compile_def(&lib, "double").unwrap();
        assert_eq!(g.arity, 1);
        // ∃w (w = v1 ∧ (w' = v1 ∧ v2 = w + w')) — wires then the sum.
        let free = g.formula.free_variables();
        assert!(free.contains(&Variable::obj(1)));
        assert!(free.contains(&Variable::obj(2)));
        assert_eq!(free.len(), 2);
    }

    #[test]
    fn recursion_compiles_to_counted_fold() {
        let lib = lib_with(vec![PrDefinition {
            name: "add".into(),
            arity: 2,
            body: prim_rec(x(1), succ(x(3))),
        }]);
        let g = compile_def(&lib, "add").unwrap();
        let TraceView::Count(v) = match_trace(&g.formula).expect("fold shape") else {
            panic!("wrong fold shape");
        };
        assert_eq!(*v.count, Term::v(2));
        assert_eq!(*v.result, Term::v(3));
        assert_eq!(*v.init, Formula::eq(Term::var(v.init_var), Term::v(1)));
    }

    #[test]
    fn scans_compile_to_digit_folds() {
        let g = compile_def(library(), "len").unwrap();
        let TraceView::Digit(v) = match_trace(&g.formula).expect("fold shape") else {
            panic!("wrong fold shape");
        };
        assert_eq!(v.base, 256);
        assert_eq!(v.tracks.len(), 1);
        assert_eq!(*v.subject, Term::v(1));
    }

    #[test]
    fn compilation_is_deterministic() {
        let a = compile_def(library(), "subst_var_num").unwrap();
        let b = compile_def(library(), "subst_var_num").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn instantiation_avoids_capture() {
        let lib = lib_with(vec![PrDefinition {
            name: "shift".into(),
            arity: 1,
            body: compose(PrBody::Succ, vec![succ(x(1))]),
        }]);
        let g = compile_def(&lib, "shift").unwrap();
        // Instantiate with an argument that collides with the graph's
        // internal wire index (3).
        let mut fresh = 100;
        let f = instantiate(&g, &[Term::v(3)], Term::v(4), &mut fresh);
        let free = f.free_variables();
        assert!(free.contains(&Variable::obj(3)));
        assert!(free.contains(&Variable::obj(4)));
        assert_eq!(free.len(), 2);
        assert!(fresh > 100);
    }

    #[test]
    fn reference_cycles_are_rejected() {
        let mut lib = PrLibrary::new();
        lib.insert(PrDefinition {
            name: "a".into(),
            arity: 1,
            body: call("b", vec![x(1)]),
        });
        lib.insert(PrDefinition {
            name: "b".into(),
            arity: 1,
            body: call("a", vec![x(1)]),
        });
        lib.validate().unwrap();
        match compile_def(&lib, "a") {
            Err(PrError::RecursiveReference(_)) => {}
            other => panic!("expected a cycle error, got {other:?}"),
        }
    }

    #[test]
    fn whole_library_compiles() {
        let graphs = compiled_library();
        assert!(graphs.len() >= 25);
        for (name, g) in graphs {
            let free = g.formula.free_variables();
            for v in free {
                assert!(
                    v.is_object() && v.index <= g.arity as u32 + 1,
                    "{name}: stray free variable"
                );
            }
        }
    }
}
