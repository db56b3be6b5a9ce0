//! The shipped library of primitive recursive definitions: arithmetic on
//! Gödel codes written as single forward scans.
//!
//! Every function here processes the base-256 digit stream of a code from
//! the least significant digit up, carrying per-position tables as scan
//! tracks.  Because codes are written in postorder, a token's operands
//! always end strictly below it, so a table entry for a position only ever
//! depends on entries at smaller positions — which is exactly the
//! discipline [`PrBody::TableRead`] enforces.  The recurring table is
//! `len`: the digit length of the complete subtree ending at each
//! position (zero when no locally valid subtree ends there).  Length plus
//! kind is enough to walk children: the right operand of a marker at `p`
//! ends at `p - 1`, the left one just below that.
//!
//! Conventions, shared with the codec: marker digits 1..=19, payload
//! chunks 192..=255 in little-endian base 64, no trailing zero chunk.
//! Functions are total; on meaningless input they return 0 and are always
//! guarded by the validity predicates at use sites.  `val_code` values
//! closed terms built from zero, successor, addition, multiplication and
//! compact numerals — projection terms are out of its domain and yield 0.

use once_cell::sync::Lazy;

use super::build::*;
use super::{PrBody, PrDefinition, PrLibrary};

// Track numbers of the shared parse tracks (see `parse_tracks`).
const RV: usize = 1; // value of the payload run in progress
const RP: usize = 2; // 64^(chunks so far) in the run in progress
const RL: usize = 3; // chunk count of the run in progress
const LCH: usize = 4; // most recent chunk, for canonicality
const CNT: usize = 5; // position counter: entry p+1 = p+1
const LEN: usize = 6; // table: length of the subtree ending at p
const KIND: usize = 7; // table: 0 invalid, 1 term, 2 formula

/// Argument positions inside a scan with `m` outer arguments.
#[derive(Clone, Copy)]
struct Lay {
    m: usize,
}

impl Lay {
    fn pos(&self) -> PrBody {
        x(self.m + 1)
    }
    fn dg(&self) -> PrBody {
        x(self.m + 2)
    }
    fn tr(&self, track: usize) -> PrBody {
        x(self.m + 2 + track)
    }
    fn rv(&self) -> PrBody {
        self.tr(RV)
    }
    fn rl(&self) -> PrBody {
        self.tr(RL)
    }
    /// Track value in the scan's `out` body.
    fn out_tr(&self, track: usize) -> PrBody {
        x(self.m + track)
    }
}

/// 1 when the current digit is a payload chunk.
fn is_chunk(l: &Lay) -> PrBody {
    le01(c(192), l.dg())
}

/// 1 when the run in progress is canonically written.
fn canonical_run(l: &Lay) -> PrBody {
    or01(is0(l.rl()), pos01(l.tr(LCH)))
}

/// Wraps a marker-only step body: chunks map to `on_chunk`.
fn marker_step(l: &Lay, on_chunk: PrBody, on_marker: PrBody) -> PrBody {
    if1(is_chunk(l), on_chunk, on_marker)
}

/// `if digit = k1 { v1 } else if ... else { default }`.
fn digit_switch(l: &Lay, cases: Vec<(u64, PrBody)>, default: PrBody) -> PrBody {
    cases
        .into_iter()
        .rev()
        .fold(default, |rest, (k, v)| if1(eq01(l.dg(), c(k)), v, rest))
}

#[derive(Clone, Copy)]
enum Shape {
    Leaf,
    Unary(u64),
    Binary(u64, u64),
}

#[derive(Clone, Copy)]
enum Pay {
    No,
    Req,
    Pred,
    Any,
}

/// Marker digit, operand shape (with required operand kinds), payload
/// discipline, and resulting kind (1 term, 2 formula).
const MARKERS: &[(u64, Shape, Pay, u64)] = &[
    (1, Shape::Leaf, Pay::No, 1),
    (2, Shape::Unary(1), Pay::No, 1),
    (3, Shape::Binary(1, 1), Pay::No, 1),
    (4, Shape::Binary(1, 1), Pay::No, 1),
    (5, Shape::Binary(1, 1), Pay::No, 1),
    (6, Shape::Leaf, Pay::Req, 1),
    (7, Shape::Binary(1, 1), Pay::No, 2),
    (8, Shape::Binary(1, 1), Pay::No, 2),
    (9, Shape::Unary(2), Pay::No, 2),
    (10, Shape::Binary(2, 2), Pay::No, 2),
    (11, Shape::Binary(2, 2), Pay::No, 2),
    (12, Shape::Unary(2), Pay::Req, 2),
    (13, Shape::Unary(2), Pay::Req, 2),
    (14, Shape::Unary(1), Pay::Pred, 2),
    (15, Shape::Leaf, Pay::Req, 1),
    (16, Shape::Leaf, Pay::No, 1),
    (17, Shape::Leaf, Pay::Any, 1),
];

fn payload_ok(l: &Lay, pay: Pay) -> PrBody {
    match pay {
        Pay::No => is0(l.rl()),
        Pay::Req => and01(pos01(l.rl()), canonical_run(l)),
        Pay::Pred => all01(vec![
            pos01(l.rl()),
            canonical_run(l),
            le01(c(1), l.rv()),
            le01(l.rv(), c(3)),
        ]),
        Pay::Any => canonical_run(l),
    }
}

/// Index (into the tables) of the operand ending just below this token's
/// payload: the table entry holding data for position `p - runlen - 1`.
fn below_run(l: &Lay) -> PrBody {
    sub(l.pos(), l.rl())
}

/// For `Binary`: reads of the right operand (ends at `p - 1`) and the left
/// operand (ends just below the right one).
fn binary_reads(l: &Lay) -> (PrBody, PrBody, PrBody, PrBody) {
    let lr = read(LEN, l.pos());
    let kr = read(KIND, l.pos());
    let idx_l = sub(l.pos(), read(LEN, l.pos()));
    let ll = read(LEN, idx_l.clone());
    let kl = read(KIND, idx_l);
    (lr, ll, kr, kl)
}

/// 1 when the token at this position is locally valid, with the right
/// payload and operands of the right kinds.
fn token_ok(l: &Lay, shape: Shape, pay: Pay) -> PrBody {
    let ok = payload_ok(l, pay);
    match shape {
        Shape::Leaf => ok,
        Shape::Unary(ck) => {
            let lb = read(LEN, below_run(l));
            let kb = read(KIND, below_run(l));
            all01(vec![ok, pos01(lb), eq01(kb, c(ck))])
        }
        Shape::Binary(ckl, ckr) => {
            let (lr, ll, kr, kl) = binary_reads(l);
            all01(vec![ok, pos01(lr), eq01(kr, c(ckr)), pos01(ll), eq01(kl, c(ckl))])
        }
    }
}

/// Subtree length for a locally valid token at this position.
fn token_len(l: &Lay, shape: Shape) -> PrBody {
    match shape {
        Shape::Leaf => succ(l.rl()),
        Shape::Unary(_) => succ(add(l.rl(), read(LEN, below_run(l)))),
        Shape::Binary(..) => {
            let (lr, ll, _, _) = binary_reads(l);
            succ(add(lr, ll))
        }
    }
}

/// The `len` table step: chunks store 0; markers store their subtree
/// length when locally valid, 0 otherwise.
fn len_step(l: &Lay) -> PrBody {
    let cases = MARKERS
        .iter()
        .map(|&(d, shape, pay, _)| (d, if1(token_ok(l, shape, pay), token_len(l, shape), c(0))))
        .collect();
    marker_step(l, c(0), digit_switch(l, cases, c(0)))
}

/// The `kind` table step.
fn kind_step(l: &Lay) -> PrBody {
    let cases = MARKERS
        .iter()
        .map(|&(d, shape, pay, kind)| {
            (d, if1(token_ok(l, shape, pay), c(kind), c(0)))
        })
        .collect();
    marker_step(l, c(0), digit_switch(l, cases, c(0)))
}

/// Inits and steps of the seven shared parse tracks for outer arity `m`.
fn parse_tracks(m: usize) -> (Vec<PrBody>, Vec<PrBody>) {
    let l = Lay { m };
    let inits = vec![
        PrBody::Zero,
        PrBody::Const(1),
        PrBody::Zero,
        PrBody::Zero,
        PrBody::Zero,
        PrBody::Zero,
        PrBody::Zero,
    ];
    let chunk_val = sub(l.dg(), c(192));
    let steps = vec![
        marker_step(&l, add(l.rv(), mul(chunk_val.clone(), l.tr(RP))), c(0)),
        marker_step(&l, mul(l.tr(RP), c(64)), c(1)),
        marker_step(&l, succ(l.rl()), c(0)),
        marker_step(&l, chunk_val, c(0)),
        succ(l.pos()),
        len_step(&l),
        kind_step(&l),
    ];
    (inits, steps)
}

/// A definition whose body scans its last argument with the parse tracks
/// plus `extra` tracks, finishing with `out`.
fn parse_scan_def(
    name: &str,
    arity: usize,
    extra: Vec<(PrBody, PrBody)>,
    out: PrBody,
) -> PrDefinition {
    let (mut inits, mut steps) = parse_tracks(arity);
    for (init, step) in extra {
        inits.push(init);
        steps.push(step);
    }
    PrDefinition {
        name: name.into(),
        arity,
        body: scan(256, inits, steps, out),
    }
}

/// 1 when the final parse state describes one complete tree of `kind`
/// covering the whole stream.  `extra` says how many tracks follow the
/// parse set.
fn whole_tree_ok(l: &Lay, kind: u64) -> PrBody {
    all01(vec![
        pos01(l.out_tr(CNT)),
        eq01(l.out_tr(LEN), l.out_tr(CNT)),
        eq01(l.out_tr(KIND), c(kind)),
    ])
}

fn def(name: &str, arity: usize, body: PrBody) -> PrDefinition {
    PrDefinition {
        name: name.into(),
        arity,
        body,
    }
}

// ---------------------------------------------------------------------------
// The definitions
// ---------------------------------------------------------------------------

fn d_add() -> PrDefinition {
    def("add", 2, prim_rec(x(1), succ(x(3))))
}

fn d_mul() -> PrDefinition {
    def("mul", 2, prim_rec(PrBody::Zero, call("add", vec![x(1), x(3)])))
}

fn d_pow2() -> PrDefinition {
    def("pow2", 1, prim_rec(c(1), mul(x(2), c(2))))
}

fn d_pow256() -> PrDefinition {
    def("pow256", 1, prim_rec(c(1), mul(x(2), c(256))))
}

/// Number of base-256 digits.
fn d_len() -> PrDefinition {
    let l = Lay { m: 1 };
    def(
        "len",
        1,
        scan(256, vec![PrBody::Zero], vec![succ(l.pos())], x(2)),
    )
}

/// Number of base-64 chunks in the canonical payload run of a value.
fn d_run_len() -> PrDefinition {
    let l = Lay { m: 1 };
    def(
        "run_len",
        1,
        scan(64, vec![PrBody::Zero], vec![succ(l.pos())], x(2)),
    )
}

/// Digit-stream value of a payload run: little-endian base-64 chunks of
/// the argument, each raised into 192..=255, read as base-256 digits.
fn d_run_code() -> PrDefinition {
    let l = Lay { m: 1 };
    // Tracks: acc, pow.
    let acc = l.tr(1);
    let pow = l.tr(2);
    def(
        "run_code",
        1,
        scan(
            64,
            vec![PrBody::Zero, PrBody::Const(1)],
            vec![
                add(acc, mul(add(l.dg(), c(192)), pow.clone())),
                mul(pow, c(256)),
            ],
            x(2),
        ),
    )
}

/// Code of the chain numeral with `n` successors: one zero leaf then `n`
/// successor digits, so `f(0) = 1` and `f(n+1) = 256·f(n) + 257`.
fn d_num_code() -> PrDefinition {
    def(
        "num_code",
        1,
        prim_rec(c(1), add(mul(x(2), c(256)), c(257))),
    )
}

/// Bitwise OR.
fn d_or_bits() -> PrDefinition {
    let l = Lay { m: 2 };
    // Tracks: acc, pow.  Scans the bits of the second argument; whatever
    // remains of the first above that length is added back at the end.
    let acc = l.tr(1);
    let pow = l.tr(2);
    let bit_a = rem(div(x(1), pow.clone()), c(2));
    let bit = pos01(add(bit_a, l.dg()));
    def(
        "or_bits",
        2,
        scan(
            2,
            vec![PrBody::Zero, PrBody::Const(1)],
            vec![add(acc, mul(bit, pow.clone())), mul(pow, c(2))],
            add(x(3), mul(div(x(1), x(4)), x(4))),
        ),
    )
}

/// Top digit of a code (its outermost symbol), 0 for the empty stream.
fn d_root_marker() -> PrDefinition {
    let l = Lay { m: 1 };
    def(
        "root_marker",
        1,
        scan(256, vec![PrBody::Zero], vec![l.dg()], x(2)),
    )
}

/// Payload value attached to the outermost symbol (binder index,
/// predicate letter, compact numeral value, …).
fn d_payload_of() -> PrDefinition {
    let l = Lay { m: 1 };
    // Run tracks plus a one-step-delayed copy of the run value, so the
    // final entry is the run value as it stood just before the root.
    let (mut inits, mut steps) = parse_tracks(1);
    inits.truncate(4);
    steps.truncate(4);
    inits.push(PrBody::Zero);
    steps.push(l.rv());
    def("payload_of", 1, scan(256, inits, steps, x(1 + 5)))
}

/// Operand of a unary root symbol: the code with the root marker and its
/// payload stripped.
fn d_body_of() -> PrDefinition {
    let l = Lay { m: 1 };
    let (mut inits, mut steps) = parse_tracks(1);
    inits.truncate(5);
    steps.truncate(5);
    // Delayed run length, as in `payload_of`.
    inits.push(PrBody::Zero);
    steps.push(l.rl());
    let cnt = x(1 + CNT);
    let rl_root = x(1 + 6);
    def(
        "body_of",
        1,
        scan(
            256,
            inits,
            steps,
            rem(x(1), call("pow256", vec![sub(cnt, succ(rl_root))])),
        ),
    )
}

/// Left operand of a binary root symbol.
fn d_split_left() -> PrDefinition {
    let l = Lay { m: 1 };
    let extra = vec![(PrBody::Zero, l.tr(LEN))]; // delayed len table entry
    let cnt = x(1 + CNT);
    let len_right = x(1 + 8);
    parse_scan_def(
        "split_left",
        1,
        extra,
        rem(
            x(1),
            call("pow256", vec![sub(sub(cnt, c(1)), len_right)]),
        ),
    )
}

/// Right operand of a binary root symbol.
fn d_split_right() -> PrDefinition {
    let l = Lay { m: 1 };
    let extra = vec![(PrBody::Zero, l.tr(LEN))];
    let cnt = x(1 + CNT);
    let len_right = x(1 + 8);
    parse_scan_def(
        "split_right",
        1,
        extra,
        rem(
            div(
                x(1),
                call("pow256", vec![sub(sub(cnt.clone(), c(1)), len_right.clone())]),
            ),
            call("pow256", vec![len_right]),
        ),
    )
}

fn d_is_term_code() -> PrDefinition {
    let l = Lay { m: 1 };
    parse_scan_def("is_term_code", 1, vec![], whole_tree_ok(&l, 1))
}

fn d_is_formula_code() -> PrDefinition {
    let l = Lay { m: 1 };
    parse_scan_def("is_formula_code", 1, vec![], whole_tree_ok(&l, 2))
}

/// 1 when the code is a closed term in the valued fragment: only zero,
/// successor, addition, multiplication and compact numerals.
fn d_is_value_term_code() -> PrDefinition {
    let l = Lay { m: 1 };
    let allowed = vec![1u64, 2, 3, 4, 17];
    let offending = allowed
        .into_iter()
        .fold(c(1), |acc, d| mul(acc, not01(eq01(l.dg(), c(d)))));
    // Track 8: 1 while every marker is in the valued signature.
    let pure = l.tr(8);
    let extra = vec![(
        PrBody::Const(1),
        marker_step(&l, pure.clone(), if1(offending, c(0), pure)),
    )];
    parse_scan_def(
        "is_value_term_code",
        1,
        extra,
        and01(whole_tree_ok(&l, 1), x(1 + 8)),
    )
}

/// Value of a closed term code in the valued fragment.
fn d_val_code() -> PrDefinition {
    let l = Lay { m: 1 };
    const VAL: usize = 8;
    let step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (1, c(0)),
                (2, succ(read(VAL, l.pos()))),
                (
                    3,
                    add(
                        read(VAL, l.pos()),
                        read(VAL, sub(l.pos(), read(LEN, l.pos()))),
                    ),
                ),
                (
                    4,
                    mul(
                        read(VAL, l.pos()),
                        read(VAL, sub(l.pos(), read(LEN, l.pos()))),
                    ),
                ),
                (17, l.rv()),
            ],
            c(0),
        ),
    );
    parse_scan_def("val_code", 1, vec![(PrBody::Zero, step)], x(1 + VAL))
}

/// Logical complexity of a formula code: the nesting depth of connectives
/// and quantifiers.  A binary connective is one deeper than its deeper
/// operand, not than the sum — `(φ ∧ ψ) ∨ χ` with atomic parts has
/// complexity 2.
fn d_lc_code() -> PrDefinition {
    let l = Lay { m: 1 };
    const LC: usize = 8;
    let unary_read = read(LC, below_run(&l));
    let left = read(LC, l.pos());
    let right = read(LC, sub(l.pos(), read(LEN, l.pos())));
    let deeper = if1(
        le01(left.clone(), right.clone()),
        right,
        left,
    );
    let step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (9, succ(unary_read.clone())),
                (10, succ(deeper.clone())),
                (11, succ(deeper)),
                (12, succ(unary_read.clone())),
                (13, succ(unary_read)),
            ],
            c(0),
        ),
    );
    parse_scan_def("lc_code", 1, vec![(PrBody::Zero, step)], x(1 + LC))
}

/// 1 when the code is a sentence: a valid formula of the arithmetic
/// signature (no predicate letters, placeholders or the marker constant)
/// with no free variables.
fn d_sent() -> PrDefinition {
    let l = Lay { m: 1 };
    const MASK: usize = 8;
    const PURE: usize = 9;
    let child_mask = read(MASK, below_run(&l));
    let both = call(
        "or_bits",
        vec![
            read(MASK, l.pos()),
            read(MASK, sub(l.pos(), read(LEN, l.pos()))),
        ],
    );
    let bit_pow = call("pow2", vec![l.rv()]);
    let bound_bit = mul(
        rem(div(child_mask.clone(), bit_pow.clone()), c(2)),
        bit_pow,
    );
    let mask_step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (2, child_mask.clone()),
                (3, both.clone()),
                (4, both.clone()),
                (5, both.clone()),
                (6, call("pow2", vec![l.rv()])),
                (7, both.clone()),
                (8, both.clone()),
                (9, child_mask.clone()),
                (10, both.clone()),
                (11, both),
                (12, sub(child_mask.clone(), bound_bit.clone())),
                (13, sub(child_mask.clone(), bound_bit)),
                (14, child_mask),
            ],
            c(0),
        ),
    );
    let offending = or01(
        eq01(l.dg(), c(14)),
        or01(eq01(l.dg(), c(15)), eq01(l.dg(), c(16))),
    );
    let pure_step = marker_step(&l, l.tr(PURE), if1(offending, c(0), l.tr(PURE)));
    parse_scan_def(
        "sent",
        1,
        vec![(PrBody::Zero, mask_step), (PrBody::Const(1), pure_step)],
        all01(vec![
            whole_tree_ok(&l, 2),
            is0(x(1 + MASK)),
            x(1 + PURE),
        ]),
    )
}

/// 1 when `x1` codes a sentence of logical complexity at most `x2`.
fn d_a_member() -> PrDefinition {
    def(
        "a_member",
        2,
        and01(
            call("sent", vec![x(1)]),
            le01(call("lc_code", vec![x(1)]), x(2)),
        ),
    )
}

// Sequence scans: tracks are the four run tracks plus, from 5, the flags
// and accumulators below.  A sequence is payload-run + element-marker
// groups with a single end marker on top.

const SQ_OK: usize = 5;
const SQ_DONE: usize = 6;
const SQ_CNT: usize = 7;

fn seq_tracks(m: usize) -> (Vec<PrBody>, Vec<PrBody>) {
    let l = Lay { m };
    let (mut inits, mut steps) = parse_tracks(m);
    inits.truncate(4);
    steps.truncate(4);
    let ok = l.tr(SQ_OK);
    let done = l.tr(SQ_DONE);
    let local = digit_switch(
        &l,
        vec![
            (18, canonical_run(&l)),
            (19, is0(l.rl())),
        ],
        c(0),
    );
    inits.push(PrBody::Const(1)); // ok so far
    steps.push(marker_step(
        &l,
        ok.clone(),
        all01(vec![ok, not01(done.clone()), local]),
    ));
    inits.push(PrBody::Zero); // end marker seen
    steps.push(marker_step(
        &l,
        done.clone(),
        if1(eq01(l.dg(), c(19)), c(1), done),
    ));
    inits.push(PrBody::Zero); // element count
    steps.push(marker_step(
        &l,
        l.tr(SQ_CNT),
        if1(eq01(l.dg(), c(18)), succ(l.tr(SQ_CNT)), l.tr(SQ_CNT)),
    ));
    (inits, steps)
}

fn seq_scan_def(
    name: &str,
    arity: usize,
    extra: Vec<(PrBody, PrBody)>,
    out: PrBody,
) -> PrDefinition {
    let (mut inits, mut steps) = seq_tracks(arity);
    for (init, step) in extra {
        inits.push(init);
        steps.push(step);
    }
    PrDefinition {
        name: name.into(),
        arity,
        body: scan(256, inits, steps, out),
    }
}

fn seq_valid_out(l: &Lay) -> PrBody {
    and01(l.out_tr(SQ_OK), l.out_tr(SQ_DONE))
}

fn d_is_seq_code() -> PrDefinition {
    let l = Lay { m: 1 };
    seq_scan_def("is_seq_code", 1, vec![], seq_valid_out(&l))
}

fn d_seq_len() -> PrDefinition {
    let l = Lay { m: 1 };
    seq_scan_def("seq_len", 1, vec![], l.out_tr(SQ_CNT))
}

/// Inner scan over `(index, sequence)`; the public `seq_proj` reorders.
fn d_seq_proj_scan() -> PrDefinition {
    let l = Lay { m: 2 };
    const FOUND: usize = 8;
    let hit = and01(eq01(l.dg(), c(18)), eq01(succ(l.tr(SQ_CNT)), x(1)));
    let extra = vec![(
        PrBody::Zero,
        marker_step(&l, l.tr(FOUND), if1(hit, l.rv(), l.tr(FOUND))),
    )];
    seq_scan_def("seq_proj_scan", 2, extra, l.out_tr(FOUND))
}

/// Entry `x2` (1-based) of the sequence `x1`; 0 out of range.
fn d_seq_proj() -> PrDefinition {
    def("seq_proj", 2, call("seq_proj_scan", vec![x(2), x(1)]))
}

/// 1 when every entry of a valid sequence codes a term.
fn d_is_term_seq() -> PrDefinition {
    let l = Lay { m: 1 };
    const ALL: usize = 8;
    let at_entry = and01(l.tr(ALL), call("is_term_code", vec![l.rv()]));
    let extra = vec![(
        PrBody::Const(1),
        marker_step(
            &l,
            l.tr(ALL),
            if1(eq01(l.dg(), c(18)), at_entry, l.tr(ALL)),
        ),
    )];
    seq_scan_def(
        "is_term_seq",
        1,
        extra,
        and01(seq_valid_out(&l), l.out_tr(ALL)),
    )
}

/// 1 when every entry of a valid sequence codes a closed term of the
/// valued fragment — the guard in front of `val_seq`.
fn d_is_value_term_seq() -> PrDefinition {
    let l = Lay { m: 1 };
    const ALL: usize = 8;
    let at_entry = and01(l.tr(ALL), call("is_value_term_code", vec![l.rv()]));
    let extra = vec![(
        PrBody::Const(1),
        marker_step(
            &l,
            l.tr(ALL),
            if1(eq01(l.dg(), c(18)), at_entry, l.tr(ALL)),
        ),
    )];
    seq_scan_def(
        "is_value_term_seq",
        1,
        extra,
        and01(seq_valid_out(&l), l.out_tr(ALL)),
    )
}

/// Entrywise valuation of a sequence of closed term codes: the code of
/// the sequence of their values.
fn d_val_seq() -> PrDefinition {
    let l = Lay { m: 1 };
    const ACC: usize = 8;
    const POW: usize = 9;
    let value = call("val_code", vec![l.rv()]);
    let rcode = call("run_code", vec![value.clone()]);
    let rlen = call("run_len", vec![value]);
    let acc = l.tr(ACC);
    let pow = l.tr(POW);
    let grown = add(
        acc.clone(),
        add(
            mul(rcode, pow.clone()),
            mul(c(18), mul(pow.clone(), call("pow256", vec![rlen.clone()]))),
        ),
    );
    let pow_grown = mul(pow.clone(), call("pow256", vec![succ(rlen)]));
    let at_entry = eq01(l.dg(), c(18));
    let extra = vec![
        (
            PrBody::Zero,
            marker_step(&l, acc.clone(), if1(at_entry.clone(), grown, acc)),
        ),
        (
            PrBody::Const(1),
            marker_step(&l, pow.clone(), if1(at_entry, pow_grown, pow)),
        ),
    ];
    seq_scan_def(
        "val_seq",
        1,
        extra,
        add(l.out_tr(ACC), mul(c(19), l.out_tr(POW))),
    )
}

/// Substitutes the chain numeral of `x3` for every free occurrence of the
/// object variable with index `x2` in the coded term or formula `x1`.
/// A binder of the same variable shields its operand, which is copied
/// verbatim from the input.
fn d_subst_var_num() -> PrDefinition {
    // Inner scan over (i, n, x); the public definition reorders.
    let l = Lay { m: 3 };
    const RES: usize = 8;
    const RLEN: usize = 9;
    let i = x(1);
    let n = x(2);

    // Generic leaf: rebuild the original token from its payload.
    let leaf_res = add(
        call("run_code", vec![l.rv()]),
        mul(l.dg(), call("pow256", vec![l.rl()])),
    );
    let leaf_len = succ(l.rl());

    // Variable leaf: substitute when the index matches.
    let var_res = if1(
        eq01(l.rv(), i.clone()),
        call("num_code", vec![n.clone()]),
        leaf_res.clone(),
    );
    let var_len = if1(eq01(l.rv(), i.clone()), succ(n), leaf_len.clone());

    // Unary token with payload (quantifiers, predicate): operand below
    // the run.  For a binder of the substituted variable the whole
    // original subtree is cut back out of the input.
    let below = below_run(&l);
    let ub_res = read(RES, below.clone());
    let ub_len = read(RLEN, below.clone());
    let rebuilt_payload_unary = add(
        ub_res.clone(),
        add(
            mul(call("run_code", vec![l.rv()]), call("pow256", vec![ub_len.clone()])),
            mul(l.dg(), call("pow256", vec![add(ub_len.clone(), l.rl())])),
        ),
    );
    let rebuilt_payload_len = succ(add(ub_len.clone(), l.rl()));
    let orig_len = succ(add(l.rl(), read(LEN, below.clone())));
    let orig_start = sub(l.pos(), add(l.rl(), read(LEN, below)));
    let original = rem(
        div(x(3), call("pow256", vec![orig_start])),
        call("pow256", vec![orig_len.clone()]),
    );
    let shields = eq01(l.rv(), i);
    let binder_res = if1(shields.clone(), original, rebuilt_payload_unary.clone());
    let binder_len = if1(shields, orig_len, rebuilt_payload_len.clone());

    // Plain unary (successor, negation): operand ends at p-1.
    let u_res = read(RES, l.pos());
    let u_len = read(RLEN, l.pos());
    let plain_unary = add(u_res, mul(l.dg(), call("pow256", vec![u_len.clone()])));
    let plain_unary_len = succ(u_len);

    // Binary: operands located through the original length table.
    let rr = read(RES, l.pos());
    let rlen_r = read(RLEN, l.pos());
    let idx_l = sub(l.pos(), read(LEN, l.pos()));
    let rl_res = read(RES, idx_l.clone());
    let rlen_l = read(RLEN, idx_l);
    let bin_res = add(
        rl_res,
        add(
            mul(rr, call("pow256", vec![rlen_l.clone()])),
            mul(
                l.dg(),
                call("pow256", vec![add(rlen_l.clone(), rlen_r.clone())]),
            ),
        ),
    );
    let bin_len = succ(add(rlen_l, rlen_r));

    let res_step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (1, leaf_res.clone()),
                (2, plain_unary.clone()),
                (3, bin_res.clone()),
                (4, bin_res.clone()),
                (5, bin_res.clone()),
                (6, var_res),
                (7, bin_res.clone()),
                (8, bin_res.clone()),
                (9, plain_unary),
                (10, bin_res.clone()),
                (11, bin_res),
                (12, binder_res.clone()),
                (13, binder_res),
                (14, rebuilt_payload_unary),
                (15, leaf_res.clone()),
                (16, leaf_res.clone()),
                (17, leaf_res),
            ],
            c(0),
        ),
    );
    let len_step_body = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (1, leaf_len.clone()),
                (2, plain_unary_len.clone()),
                (3, bin_len.clone()),
                (4, bin_len.clone()),
                (5, bin_len.clone()),
                (6, var_len),
                (7, bin_len.clone()),
                (8, bin_len.clone()),
                (9, plain_unary_len),
                (10, bin_len.clone()),
                (11, bin_len),
                (12, binder_len.clone()),
                (13, binder_len),
                (14, rebuilt_payload_len),
                (15, leaf_len.clone()),
                (16, leaf_len.clone()),
                (17, leaf_len),
            ],
            c(0),
        ),
    );

    let inner = parse_scan_def(
        "subst_var_num_scan",
        3,
        vec![(PrBody::Zero, res_step), (PrBody::Zero, len_step_body)],
        x(3 + RES),
    );
    let mut lib_entry = inner;
    lib_entry.name = "subst_var_num_scan".into();
    lib_entry
}

fn d_subst_var_num_public() -> PrDefinition {
    def(
        "subst_var_num",
        3,
        call("subst_var_num_scan", vec![x(2), x(3), x(1)]),
    )
}

/// Replaces each placeholder `e_j` in the coded formula `x1` by the term
/// coded by entry `j` of the sequence `x2`.
fn d_subst_slot() -> PrDefinition {
    // Inner scan over (y, x).
    let l = Lay { m: 2 };
    const RES: usize = 8;
    const RLEN: usize = 9;
    let y = x(1);

    let leaf_res = add(
        call("run_code", vec![l.rv()]),
        mul(l.dg(), call("pow256", vec![l.rl()])),
    );
    let leaf_len = succ(l.rl());

    let entry = call("seq_proj_scan", vec![l.rv(), y]);
    let slot_res = entry.clone();
    let slot_len = call("len", vec![entry]);

    let below = below_run(&l);
    let ub_res = read(RES, below.clone());
    let ub_len = read(RLEN, below);
    let payload_unary = add(
        ub_res,
        add(
            mul(call("run_code", vec![l.rv()]), call("pow256", vec![ub_len.clone()])),
            mul(l.dg(), call("pow256", vec![add(ub_len.clone(), l.rl())])),
        ),
    );
    let payload_unary_len = succ(add(ub_len, l.rl()));

    let u_res = read(RES, l.pos());
    let u_len = read(RLEN, l.pos());
    let plain_unary = add(u_res, mul(l.dg(), call("pow256", vec![u_len.clone()])));
    let plain_unary_len = succ(u_len);

    let rr = read(RES, l.pos());
    let rlen_r = read(RLEN, l.pos());
    let idx_l = sub(l.pos(), read(LEN, l.pos()));
    let rl_res = read(RES, idx_l.clone());
    let rlen_l = read(RLEN, idx_l);
    let bin_res = add(
        rl_res,
        add(
            mul(rr, call("pow256", vec![rlen_l.clone()])),
            mul(
                l.dg(),
                call("pow256", vec![add(rlen_l.clone(), rlen_r.clone())]),
            ),
        ),
    );
    let bin_len = succ(add(rlen_l, rlen_r));

    let res_step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (1, leaf_res.clone()),
                (2, plain_unary.clone()),
                (3, bin_res.clone()),
                (4, bin_res.clone()),
                (5, bin_res.clone()),
                (6, leaf_res.clone()),
                (7, bin_res.clone()),
                (8, bin_res.clone()),
                (9, plain_unary),
                (10, bin_res.clone()),
                (11, bin_res),
                (12, payload_unary.clone()),
                (13, payload_unary.clone()),
                (14, payload_unary),
                (15, slot_res),
                (16, leaf_res.clone()),
                (17, leaf_res),
            ],
            c(0),
        ),
    );
    let len_track_step = marker_step(
        &l,
        c(0),
        digit_switch(
            &l,
            vec![
                (1, leaf_len.clone()),
                (2, plain_unary_len.clone()),
                (3, bin_len.clone()),
                (4, bin_len.clone()),
                (5, bin_len.clone()),
                (6, leaf_len.clone()),
                (7, bin_len.clone()),
                (8, bin_len.clone()),
                (9, plain_unary_len),
                (10, bin_len.clone()),
                (11, bin_len),
                (12, payload_unary_len.clone()),
                (13, payload_unary_len.clone()),
                (14, payload_unary_len),
                (15, slot_len),
                (16, leaf_len.clone()),
                (17, leaf_len),
            ],
            c(0),
        ),
    );

    parse_scan_def(
        "subst_slot_scan",
        2,
        vec![(PrBody::Zero, res_step), (PrBody::Zero, len_track_step)],
        x(2 + RES),
    )
}

fn d_subst_slot_public() -> PrDefinition {
    def("subst_slot", 2, call("subst_slot_scan", vec![x(2), x(1)]))
}

/// Every shipped definition, validated.
pub fn library() -> &'static PrLibrary {
    static LIB: Lazy<PrLibrary> = Lazy::new(|| {
        let mut lib = PrLibrary::new();
        for d in [
            d_add(),
            d_mul(),
            d_pow2(),
            d_pow256(),
            d_len(),
            d_run_len(),
            d_run_code(),
            d_num_code(),
            d_or_bits(),
            d_root_marker(),
            d_payload_of(),
            d_body_of(),
            d_split_left(),
            d_split_right(),
            d_is_term_code(),
            d_is_formula_code(),
            d_is_value_term_code(),
            d_val_code(),
            d_lc_code(),
            d_sent(),
            d_a_member(),
            d_is_seq_code(),
            d_seq_len(),
            d_seq_proj_scan(),
            d_seq_proj(),
            d_is_term_seq(),
            d_is_value_term_seq(),
            d_val_seq(),
            d_subst_var_num(),
            d_subst_var_num_public(),
            d_subst_slot(),
            d_subst_slot_public(),
        ] {
            lib.insert(d);
        }
        lib.validate().expect("shipped library validates");
        lib
    });
    &LIB
}

/// Names a caller may treat as the public surface (scan internals have a
/// `_scan` suffix and stay out of golden listings).
pub fn public_names() -> Vec<&'static str> {
    vec![
        "add",
        "mul",
        "pow2",
        "pow256",
        "len",
        "run_len",
        "run_code",
        "num_code",
        "or_bits",
        "root_marker",
        "payload_of",
        "body_of",
        "split_left",
        "split_right",
        "is_term_code",
        "is_formula_code",
        "is_value_term_code",
        "val_code",
        "lc_code",
        "sent",
        "a_member",
        "is_seq_code",
        "seq_len",
        "seq_proj",
        "is_term_seq",
        "is_value_term_seq",
        "val_seq",
        "subst_var_num",
        "subst_slot",
    ]
}
