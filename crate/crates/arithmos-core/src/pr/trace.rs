//! Canonical computation-history blocks: the first-order formulas that
//! pin down a fold over digits or a counted iteration, and the strict
//! structural matcher that recovers the pieces from such a formula.
//!
//! A history of entries `e_0, …, e_n` is carried by a pair `(c, d)`
//! through the classic pairing trick: entry `i` is the remainder of `c`
//! modulo `S(S(i)·d)`, written here as the `READ` block
//!
//! ```text
//! READ(c, d, i, v)  :=  ∃r( c = r·S(S(i)·d) + v  ∧  v < S(S(i)·d) )
//! ```
//!
//! For any finite list of entries some `(c, d)` realizes it, so wrapping
//! a computation's step equations in these blocks yields a formula that
//! is true exactly when the computed value comes out — with unbounded
//! existentials only, never a bound that smuggles in the answer.
//!
//! Two shapes are emitted.  A *digit fold* drives a scan by the base-`b`
//! digits of a subject value: track 0 holds successive quotients, data
//! tracks hold the scan state, a minimality clause forces the step count
//! to be exactly the digit length, and an output condition consumes the
//! final entries.  A *counted fold* is plain primitive recursion: one
//! track, iterated a number of times given by a term of the formula.
//!
//! The matcher is the emitter's mirror.  It succeeds only on formulas
//! with exactly the emitted spine, so an evaluator can replay the fold
//! directly instead of hunting for the history numbers.

use crate::syntax::{Formula, Term, Variable};

/// A `READ(c, d, i, v)` block destructured.
pub(crate) struct Read<'a> {
    pub c: Variable,
    pub d: Variable,
    pub index: &'a Term,
    pub value: &'a Term,
}

fn freshv(fresh: &mut u32) -> Variable {
    let v = Variable::obj(*fresh);
    *fresh += 1;
    v
}

fn zero() -> Term {
    Term::Zero
}

/// `∃r( c = r·S(S(i)·d) + v ∧ v < S(S(i)·d) )`.
pub(crate) fn read_block(c: Variable, d: Variable, index: Term, value: Term, fresh: &mut u32) -> Formula {
    let r = freshv(fresh);
    let modulus = Term::succ(Term::mul(Term::succ(index), Term::var(d)));
    Formula::exists(
        r,
        Formula::and(
            Formula::eq(
                Term::var(c),
                Term::add(Term::mul(Term::var(r), modulus.clone()), value.clone()),
            ),
            Formula::lt(value, modulus),
        ),
    )
}

/// Destructures a `READ` block.
pub(crate) fn open_read(f: &Formula) -> Option<Read<'_>> {
    let Formula::Exists { var: r, body } = f else {
        return None;
    };
    let Formula::And { left, right } = &**body else {
        return None;
    };
    let Formula::Eq { left: c_term, right: sum } = &**left else {
        return None;
    };
    let Term::Var { var: c } = c_term else {
        return None;
    };
    let Term::Add { left: prod, right: value } = sum else {
        return None;
    };
    let Term::Mul { left: r_term, right: modulus } = &**prod else {
        return None;
    };
    if **r_term != Term::var(*r) {
        return None;
    }
    let Term::Succ { arg } = &**modulus else {
        return None;
    };
    let Term::Mul { left: succ_index, right: d_term } = &**arg else {
        return None;
    };
    let Term::Succ { arg: index } = &**succ_index else {
        return None;
    };
    let Term::Var { var: d } = &**d_term else {
        return None;
    };
    let Formula::Lt { left: value2, right: modulus2 } = &**right else {
        return None;
    };
    if **value != *value2 || *modulus2 != **modulus {
        return None;
    }
    if !c.is_object() || !d.is_object() {
        return None;
    }
    Some(Read {
        c: *c,
        d: *d,
        index,
        value,
    })
}

fn and_chain(mut parts: Vec<Formula>) -> Formula {
    let last = parts.pop().expect("nonempty conjunction");
    parts
        .into_iter()
        .rev()
        .fold(last, |acc, f| Formula::and(f, acc))
}

/// Unrolls a right-leaning conjunction into exactly `count` pieces.
fn unroll_and(mut f: &Formula, count: usize) -> Option<Vec<&Formula>> {
    let mut out = Vec::with_capacity(count);
    while out.len() + 1 < count {
        let Formula::And { left, right } = f else {
            return None;
        };
        out.push(&**left);
        f = right;
    }
    out.push(f);
    Some(out)
}

fn exists_chain(vars: Vec<Variable>, body: Formula) -> Formula {
    vars.into_iter()
        .rev()
        .fold(body, |acc, v| Formula::exists(v, acc))
}

/// Peels `count` leading existentials.
fn unroll_exists(mut f: &Formula, count: usize) -> Option<(Vec<Variable>, &Formula)> {
    let mut vars = Vec::with_capacity(count);
    for _ in 0..count {
        let Formula::Exists { var, body } = f else {
            return None;
        };
        vars.push(*var);
        f = body;
    }
    Some((vars, f))
}

// ---------------------------------------------------------------------------
// Digit fold
// ---------------------------------------------------------------------------

/// Conditions a digit fold is built from.  Each method must produce a
/// formula (or, for `step`, one per track) asserting its piece of the
/// computation; the emitter provides the wired-up terms.
pub(crate) trait FoldBody {
    /// "`entry` is the starting state of data track `track`" (0-based).
    fn init(&mut self, track: usize, entry: Term, fresh: &mut u32) -> Formula;
    /// One formula per track: "`next[j]` is the state of track `j` after
    /// processing `digit` at position `pos` from states `cur`".  `pairs`
    /// are the history carriers of the data tracks, for step conditions
    /// that read an earlier entry directly.
    fn step(
        &mut self,
        pos: Term,
        digit: Term,
        cur: &[Term],
        next: &[Term],
        pairs: &[(Variable, Variable)],
        fresh: &mut u32,
    ) -> Vec<Formula>;
    /// Consumes the final states and says what the fold's result is.
    fn out(&mut self, finals: &[Term], fresh: &mut u32) -> Formula;
}

/// Emits the digit-fold history formula for the base-`base` digits of
/// `subject`, with `tracks` data tracks.
pub(crate) fn emit_digit_fold(
    fresh: &mut u32,
    base: u64,
    tracks: usize,
    subject: Term,
    body: &mut dyn FoldBody,
) -> Formula {
    let n = freshv(fresh);
    let mut pairs = Vec::with_capacity(tracks + 1);
    for _ in 0..=tracks {
        let c = freshv(fresh);
        let d = freshv(fresh);
        pairs.push((c, d));
    }
    let (c0, d0) = pairs[0];

    let mut conjuncts = Vec::new();

    // The quotient track starts at the subject itself.
    conjuncts.push(read_block(c0, d0, zero(), subject, fresh));

    // Each data track starts at its initial state.
    for (j, &(c, d)) in pairs.iter().skip(1).enumerate() {
        let e = freshv(fresh);
        let read = read_block(c, d, zero(), Term::var(e), fresh);
        let graph = body.init(j, Term::var(e), fresh);
        conjuncts.push(Formula::exists(e, Formula::and(read, graph)));
    }

    // Every position below the step count advances all tracks.
    {
        let p = freshv(fresh);
        let q = freshv(fresh);
        let g = freshv(fresh);
        let q2 = freshv(fresh);
        let pos = Term::var(p);
        let base_t = Term::num(base);
        let mut inner = vec![
            read_block(c0, d0, pos.clone(), Term::var(q), fresh),
            Formula::eq(
                Term::var(q),
                Term::add(Term::mul(Term::var(q2), base_t.clone()), Term::var(g)),
            ),
            Formula::lt(Term::var(g), base_t),
            read_block(c0, d0, Term::succ(pos.clone()), Term::var(q2), fresh),
        ];
        if tracks > 0 {
            let cur: Vec<Variable> = (0..tracks).map(|_| freshv(fresh)).collect();
            let next: Vec<Variable> = (0..tracks).map(|_| freshv(fresh)).collect();
            let mut parts = Vec::new();
            for (j, &(c, d)) in pairs.iter().skip(1).enumerate() {
                parts.push(read_block(c, d, pos.clone(), Term::var(cur[j]), fresh));
            }
            for (j, &(c, d)) in pairs.iter().skip(1).enumerate() {
                parts.push(read_block(c, d, Term::succ(pos.clone()), Term::var(next[j]), fresh));
            }
            let cur_t: Vec<Term> = cur.iter().map(|&v| Term::var(v)).collect();
            let next_t: Vec<Term> = next.iter().map(|&v| Term::var(v)).collect();
            let graphs = body.step(pos.clone(), Term::var(g), &cur_t, &next_t, &pairs[1..], fresh);
            assert_eq!(graphs.len(), tracks, "one step condition per track");
            parts.extend(graphs);
            let mut vars = cur;
            vars.extend(next);
            inner.push(exists_chain(vars, and_chain(parts)));
        }
        let step_conj = exists_chain(vec![q, g, q2], and_chain(inner));
        conjuncts.push(Formula::forall(
            p,
            Formula::or(
                Formula::not(Formula::lt(Term::var(p), Term::var(n))),
                step_conj,
            ),
        ));
    }

    // The fold stops exactly when the quotient is exhausted.
    {
        let z = freshv(fresh);
        conjuncts.push(Formula::exists(
            z,
            Formula::and(
                read_block(c0, d0, Term::var(n), Term::var(z), fresh),
                Formula::eq(Term::var(z), zero()),
            ),
        ));
    }
    {
        let p2 = freshv(fresh);
        let q3 = freshv(fresh);
        conjuncts.push(Formula::or(
            Formula::eq(Term::var(n), zero()),
            exists_chain(
                vec![p2, q3],
                and_chain(vec![
                    Formula::eq(Term::var(n), Term::succ(Term::var(p2))),
                    read_block(c0, d0, Term::var(p2), Term::var(q3), fresh),
                    Formula::not(Formula::eq(Term::var(q3), zero())),
                ]),
            ),
        ));
    }

    // Final states feed the output condition.
    {
        let finals: Vec<Variable> = (0..tracks).map(|_| freshv(fresh)).collect();
        let mut parts = Vec::new();
        for (j, &(c, d)) in pairs.iter().skip(1).enumerate() {
            parts.push(read_block(c, d, Term::var(n), Term::var(finals[j]), fresh));
        }
        let finals_t: Vec<Term> = finals.iter().map(|&v| Term::var(v)).collect();
        parts.push(body.out(&finals_t, fresh));
        conjuncts.push(exists_chain(finals, and_chain(parts)));
    }

    let mut prefix = vec![n];
    for (c, d) in pairs {
        prefix.push(c);
        prefix.push(d);
    }
    exists_chain(prefix, and_chain(conjuncts))
}

/// Conditions a counted fold is built from.
pub(crate) trait CountBody {
    /// "`entry` is the value at count 0."
    fn init(&mut self, entry: Term, fresh: &mut u32) -> Formula;
    /// "`next` is the value at count `S(pos)`, given `cur` at `pos`."
    fn step(&mut self, pos: Term, cur: Term, next: Term, fresh: &mut u32) -> Formula;
}

/// Emits the counted-fold history formula: one track, `count` steps,
/// result equal to the final entry.
pub(crate) fn emit_count_fold(
    fresh: &mut u32,
    count: Term,
    result: Term,
    body: &mut dyn CountBody,
) -> Formula {
    let c = freshv(fresh);
    let d = freshv(fresh);

    let mut conjuncts = Vec::new();
    {
        let e = freshv(fresh);
        let read = read_block(c, d, zero(), Term::var(e), fresh);
        let graph = body.init(Term::var(e), fresh);
        conjuncts.push(Formula::exists(e, Formula::and(read, graph)));
    }
    {
        let p = freshv(fresh);
        let t = freshv(fresh);
        let u = freshv(fresh);
        let pos = Term::var(p);
        let inner = exists_chain(
            vec![t, u],
            and_chain(vec![
                read_block(c, d, pos.clone(), Term::var(t), fresh),
                read_block(c, d, Term::succ(pos.clone()), Term::var(u), fresh),
                body.step(pos, Term::var(t), Term::var(u), fresh),
            ]),
        );
        conjuncts.push(Formula::forall(
            p,
            Formula::or(
                Formula::not(Formula::lt(Term::var(p), count.clone())),
                inner,
            ),
        ));
    }
    conjuncts.push(read_block(c, d, count, result, fresh));

    exists_chain(vec![c, d], and_chain(conjuncts))
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

pub(crate) struct DigitFold<'a> {
    pub tracks: Vec<(Variable, Variable)>,
    pub base: u64,
    pub subject: &'a Term,
    /// Per data track: the entry-0 variable and its defining condition.
    pub inits: Vec<(Variable, &'a Formula)>,
    pub step: DigitStep<'a>,
    /// Per data track: the final-entry variable; then the output condition.
    pub finals: Vec<Variable>,
    pub out: &'a Formula,
}

pub(crate) struct DigitStep<'a> {
    pub pos: Variable,
    pub digit: Variable,
    pub cur: Vec<Variable>,
    pub next: Vec<Variable>,
    pub graphs: Vec<&'a Formula>,
}

pub(crate) struct CountFold<'a> {
    pub count: &'a Term,
    pub init_var: Variable,
    pub init: &'a Formula,
    pub pos: Variable,
    pub cur: Variable,
    pub next: Variable,
    pub step: &'a Formula,
    pub result: &'a Term,
}

pub(crate) enum TraceView<'a> {
    Digit(DigitFold<'a>),
    Count(CountFold<'a>),
}

/// Number of leading existentials before the conjunction spine.
fn prefix_len(mut f: &Formula) -> usize {
    let mut count = 0;
    while let Formula::Exists { body, .. } = f {
        count += 1;
        f = body;
    }
    count
}

/// Recognizes an emitted history formula.  Returns `None` on anything
/// that is not structurally identical to the emitters' output.
pub(crate) fn match_trace(f: &Formula) -> Option<TraceView<'_>> {
    let len = prefix_len(f);
    if len >= 3 && len % 2 == 1 {
        if let Some(v) = match_digit_fold(f, (len - 3) / 2) {
            return Some(TraceView::Digit(v));
        }
    }
    if len == 2 {
        if let Some(v) = match_count_fold(f) {
            return Some(TraceView::Count(v));
        }
    }
    None
}

fn expect_read<'a>(
    f: &'a Formula,
    c: Variable,
    d: Variable,
    index: &Term,
) -> Option<&'a Term> {
    let read = open_read(f)?;
    if read.c != c || read.d != d || read.index != index {
        return None;
    }
    Some(read.value)
}

fn term_const(t: &Term) -> Option<u64> {
    use num_traits::ToPrimitive;
    match t {
        Term::Num { value } => value.to_u64(),
        Term::Zero => Some(0),
        _ => None,
    }
}

fn match_digit_fold(f: &Formula, tracks: usize) -> Option<DigitFold<'_>> {
    let (prefix, body) = unroll_exists(f, 3 + 2 * tracks)?;
    let n = prefix[0];
    let quotient = (prefix[1], prefix[2]);
    let track_pairs: Vec<(Variable, Variable)> = (0..tracks)
        .map(|j| (prefix[3 + 2 * j], prefix[4 + 2 * j]))
        .collect();
    let parts = unroll_and(body, 5 + tracks)?;

    let subject = expect_read(parts[0], quotient.0, quotient.1, &zero())?;

    let mut inits = Vec::with_capacity(tracks);
    for j in 0..tracks {
        let Formula::Exists { var: e, body } = parts[1 + j] else {
            return None;
        };
        let Formula::And { left, right } = &**body else {
            return None;
        };
        let read = expect_read(left, track_pairs[j].0, track_pairs[j].1, &zero())?;
        if *read != Term::var(*e) {
            return None;
        }
        inits.push((*e, &**right));
    }

    // The step clause.
    let (pos, digit, base, cur, next, graphs) = {
        let Formula::Forall { var: p, body } = parts[1 + tracks] else {
            return None;
        };
        let Formula::Or { left, right } = &**body else {
            return None;
        };
        let Formula::Not { arg } = &**left else {
            return None;
        };
        let Formula::Lt { left: pv, right: nv } = &**arg else {
            return None;
        };
        if *pv != Term::var(*p) || *nv != Term::var(n) {
            return None;
        }
        let (qgq, inner) = unroll_exists(right, 3)?;
        let (q, g, q2) = (qgq[0], qgq[1], qgq[2]);
        let want = if tracks > 0 { 5 } else { 4 };
        let pieces = unroll_and(inner, want)?;
        let pos_t = Term::var(*p);
        let read_q = expect_read(pieces[0], quotient.0, quotient.1, &pos_t)?;
        if *read_q != Term::var(q) {
            return None;
        }
        let Formula::Eq { left: qt, right: split } = pieces[1] else {
            return None;
        };
        if *qt != Term::var(q) {
            return None;
        }
        let Term::Add { left: prod, right: gt } = split else {
            return None;
        };
        let Term::Mul { left: q2t, right: base_t } = &**prod else {
            return None;
        };
        if **q2t != Term::var(q2) || **gt != Term::var(g) {
            return None;
        }
        let base = term_const(base_t)?;
        let Formula::Lt { left: gt2, right: base2 } = pieces[2] else {
            return None;
        };
        if *gt2 != Term::var(g) || *base2 != **base_t {
            return None;
        }
        let read_q2 = expect_read(pieces[3], quotient.0, quotient.1, &Term::succ(pos_t.clone()))?;
        if *read_q2 != Term::var(q2) {
            return None;
        }

        let (cur, next, graphs) = if tracks > 0 {
            let (vars, track_body) = unroll_exists(pieces[4], 2 * tracks)?;
            let cur = vars[..tracks].to_vec();
            let next = vars[tracks..].to_vec();
            let track_parts = unroll_and(track_body, 3 * tracks)?;
            for j in 0..tracks {
                let v = expect_read(track_parts[j], track_pairs[j].0, track_pairs[j].1, &pos_t)?;
                if *v != Term::var(cur[j]) {
                    return None;
                }
                let v = expect_read(
                    track_parts[tracks + j],
                    track_pairs[j].0,
                    track_pairs[j].1,
                    &Term::succ(pos_t.clone()),
                )?;
                if *v != Term::var(next[j]) {
                    return None;
                }
            }
            (cur, next, track_parts[2 * tracks..].to_vec())
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        (*p, g, base, cur, next, graphs)
    };

    // Termination: the quotient at n is zero.
    {
        let Formula::Exists { var: z, body } = parts[2 + tracks] else {
            return None;
        };
        let Formula::And { left, right } = &**body else {
            return None;
        };
        let v = expect_read(left, quotient.0, quotient.1, &Term::var(n))?;
        if *v != Term::var(*z) {
            return None;
        }
        let Formula::Eq { left: zt, right: zz } = &**right else {
            return None;
        };
        if *zt != Term::var(*z) || *zz != zero() {
            return None;
        }
    }

    // Minimality: n is 0 or the quotient just below n is nonzero.
    {
        let Formula::Or { left, right } = parts[3 + tracks] else {
            return None;
        };
        let Formula::Eq { left: nt, right: z } = &**left else {
            return None;
        };
        if *nt != Term::var(n) || *z != zero() {
            return None;
        }
        let (pq, min_body) = unroll_exists(right, 2)?;
        let pieces = unroll_and(min_body, 3)?;
        let Formula::Eq { left: nt, right: sp } = pieces[0] else {
            return None;
        };
        if *nt != Term::var(n) || *sp != Term::succ(Term::var(pq[0])) {
            return None;
        }
        let v = expect_read(pieces[1], quotient.0, quotient.1, &Term::var(pq[0]))?;
        if *v != Term::var(pq[1]) {
            return None;
        }
        let Formula::Not { arg } = pieces[2] else {
            return None;
        };
        if **arg != Formula::eq(Term::var(pq[1]), zero()) {
            return None;
        }
    }

    // Output block.
    let (finals, out) = {
        let (finals, fin_body) = unroll_exists(parts[4 + tracks], tracks)?;
        let fin_parts = unroll_and(fin_body, tracks + 1)?;
        for j in 0..tracks {
            let v = expect_read(fin_parts[j], track_pairs[j].0, track_pairs[j].1, &Term::var(n))?;
            if *v != Term::var(finals[j]) {
                return None;
            }
        }
        (finals, fin_parts[tracks])
    };

    Some(DigitFold {
        tracks: track_pairs,
        base,
        subject,
        inits,
        step: DigitStep {
            pos,
            digit,
            cur,
            next,
            graphs,
        },
        finals,
        out,
    })
}

fn match_count_fold(f: &Formula) -> Option<CountFold<'_>> {
    let (prefix, body) = unroll_exists(f, 2)?;
    let (c, d) = (prefix[0], prefix[1]);
    let parts = unroll_and(body, 3)?;

    let (init_var, init) = {
        let Formula::Exists { var: e, body } = parts[0] else {
            return None;
        };
        let Formula::And { left, right } = &**body else {
            return None;
        };
        let v = expect_read(left, c, d, &zero())?;
        if *v != Term::var(*e) {
            return None;
        }
        (*e, &**right)
    };

    let (count, pos, cur, next, step) = {
        let Formula::Forall { var: p, body } = parts[1] else {
            return None;
        };
        let Formula::Or { left, right } = &**body else {
            return None;
        };
        let Formula::Not { arg } = &**left else {
            return None;
        };
        let Formula::Lt { left: pv, right: count } = &**arg else {
            return None;
        };
        if *pv != Term::var(*p) {
            return None;
        }
        let (tu, inner) = unroll_exists(right, 2)?;
        let pieces = unroll_and(inner, 3)?;
        let pos_t = Term::var(*p);
        let v = expect_read(pieces[0], c, d, &pos_t)?;
        if *v != Term::var(tu[0]) {
            return None;
        }
        let v = expect_read(pieces[1], c, d, &Term::succ(pos_t))?;
        if *v != Term::var(tu[1]) {
            return None;
        }
        (count, *p, tu[0], tu[1], pieces[2])
    };

    let read = open_read(parts[2])?;
    if read.c != c || read.d != d || read.index != count {
        return None;
    }

    Some(CountFold {
        count,
        init_var,
        init,
        pos,
        cur,
        next,
        step,
        result: read.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn read_blocks_roundtrip() {
        let mut fresh = 10;
        let c = Variable::obj(1);
        let d = Variable::obj(2);
        let f = read_block(c, d, Term::v(3), Term::v(4), &mut fresh);
        let read = open_read(&f).expect("emitted read matches");
        assert_eq!(read.c, c);
        assert_eq!(read.d, d);
        assert_eq!(*read.index, Term::v(3));
        assert_eq!(*read.value, Term::v(4));
        assert_eq!(fresh, 11);

        assert!(open_read(&parse_formula("v1 = v2").unwrap()).is_none());
        assert!(open_read(&parse_formula("exists v9. v1 = v9 * S(S(v3) * v2) + v4 /\\ v4 < S(v3 * v2)").unwrap()).is_none());
    }

    struct SampleFold;

    impl FoldBody for SampleFold {
        fn init(&mut self, track: usize, entry: Term, _: &mut u32) -> Formula {
            Formula::eq(entry, Term::numeral(track as u64))
        }

        fn step(
            &mut self,
            _pos: Term,
            digit: Term,
            cur: &[Term],
            next: &[Term],
            _pairs: &[(Variable, Variable)],
            _: &mut u32,
        ) -> Vec<Formula> {
            vec![
                Formula::eq(next[0].clone(), Term::succ(cur[0].clone())),
                Formula::eq(next[1].clone(), Term::add(cur[1].clone(), digit)),
            ]
        }

        fn out(&mut self, finals: &[Term], _: &mut u32) -> Formula {
            Formula::eq(Term::v(2), Term::add(finals[0].clone(), finals[1].clone()))
        }
    }

    fn sample_digit_fold() -> Formula {
        let mut fresh = 3;
        emit_digit_fold(&mut fresh, 256, 2, Term::v(1), &mut SampleFold)
    }

    #[test]
    fn digit_fold_roundtrips() {
        let f = sample_digit_fold();
        assert_eq!(f, sample_digit_fold(), "emission is deterministic");
        let TraceView::Digit(v) = match_trace(&f).expect("fold matches") else {
            panic!("matched as the wrong shape");
        };
        assert_eq!(v.base, 256);
        assert_eq!(v.tracks.len(), 2);
        assert_eq!(*v.subject, Term::v(1));
        assert_eq!(*v.inits[0].1, Formula::eq(Term::var(v.inits[0].0), Term::numeral(0)));
        assert_eq!(*v.inits[1].1, Formula::eq(Term::var(v.inits[1].0), Term::numeral(1)));
        assert_eq!(
            *v.step.graphs[0],
            Formula::eq(Term::var(v.step.next[0]), Term::succ(Term::var(v.step.cur[0])))
        );
        assert_eq!(
            *v.out,
            Formula::eq(
                Term::v(2),
                Term::add(Term::var(v.finals[0]), Term::var(v.finals[1]))
            )
        );
    }

    struct SampleCount;

    impl CountBody for SampleCount {
        fn init(&mut self, entry: Term, _: &mut u32) -> Formula {
            Formula::eq(entry, Term::v(1))
        }

        fn step(&mut self, _pos: Term, cur: Term, next: Term, _: &mut u32) -> Formula {
            Formula::eq(next, Term::succ(cur))
        }
    }

    #[test]
    fn count_fold_roundtrips() {
        let mut fresh = 4;
        let f = emit_count_fold(&mut fresh, Term::v(2), Term::v(3), &mut SampleCount);
        let TraceView::Count(v) = match_trace(&f).expect("fold matches") else {
            panic!("matched as the wrong shape");
        };
        assert_eq!(*v.count, Term::v(2));
        assert_eq!(*v.result, Term::v(3));
        assert_eq!(*v.init, Formula::eq(Term::var(v.init_var), Term::v(1)));
        assert_eq!(*v.step, Formula::eq(Term::var(v.next), Term::succ(Term::var(v.cur))));
    }

    #[test]
    fn ordinary_formulas_do_not_match() {
        for text in [
            "exists v1. v1 = 0",
            "exists v1, v2. v1 = v2 /\\ v2 = 0",
            "exists v1, v2, v3. v1 = v2 /\\ (v2 = 0 /\\ v3 = 0)",
            "forall v1. v1 + 0 = v1",
        ] {
            assert!(
                match_trace(&parse_formula(text).unwrap()).is_none(),
                "{text}"
            );
        }
    }
}
