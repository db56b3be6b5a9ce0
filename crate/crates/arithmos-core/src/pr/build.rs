//! Small combinators for writing definition bodies without drowning in
//! `Box::new`.  Everything here is a straight constructor; the names are
//! short because the library module uses them hundreds of times.

use super::{DigitScan, PrBody};

/// Constant.
pub fn c(n: u64) -> PrBody {
    PrBody::Const(n)
}

/// The `i`-th argument (1-based).
pub fn x(i: usize) -> PrBody {
    PrBody::Proj(i)
}

pub fn compose(f: PrBody, args: Vec<PrBody>) -> PrBody {
    PrBody::Compose {
        f: Box::new(f),
        args,
    }
}

/// Call a named library definition.
pub fn call(name: &str, args: Vec<PrBody>) -> PrBody {
    compose(PrBody::Ref(name.to_string()), args)
}

pub fn succ(a: PrBody) -> PrBody {
    compose(PrBody::Succ, vec![a])
}

pub fn add(a: PrBody, b: PrBody) -> PrBody {
    compose(PrBody::Add, vec![a, b])
}

pub fn mul(a: PrBody, b: PrBody) -> PrBody {
    compose(PrBody::Mul, vec![a, b])
}

/// Truncated subtraction.
pub fn sub(a: PrBody, b: PrBody) -> PrBody {
    compose(PrBody::Monus, vec![a, b])
}

pub fn div(a: PrBody, b: PrBody) -> PrBody {
    compose(PrBody::Div, vec![a, b])
}

pub fn rem(a: PrBody, b: PrBody) -> PrBody {
    compose(PrBody::Mod, vec![a, b])
}

/// `then` if `cond` is zero, else `els`; lazy in both branches.
pub fn if0(cond: PrBody, then: PrBody, els: PrBody) -> PrBody {
    PrBody::If {
        cond: Box::new(cond),
        then: Box::new(then),
        els: Box::new(els),
    }
}

/// History read: value of `track` after `index` steps.
pub fn read(track: usize, index: PrBody) -> PrBody {
    PrBody::TableRead {
        track,
        index: Box::new(index),
    }
}

pub fn scan(base: u32, inits: Vec<PrBody>, steps: Vec<PrBody>, out: PrBody) -> PrBody {
    PrBody::Scan(Box::new(DigitScan {
        base,
        inits,
        steps,
        out,
    }))
}

pub fn prim_rec(base: PrBody, step: PrBody) -> PrBody {
    PrBody::PrimRec {
        base: Box::new(base),
        step: Box::new(step),
    }
}

// --- 0/1-valued helpers.  "True" is 1, "false" is 0. ---

/// 1 if `a == b`, else 0.
pub fn eq01(a: PrBody, b: PrBody) -> PrBody {
    if0(add(sub(a.clone(), b.clone()), sub(b, a)), c(1), c(0))
}

/// 1 if `a <= b`, else 0.
pub fn le01(a: PrBody, b: PrBody) -> PrBody {
    if0(sub(a, b), c(1), c(0))
}

/// 1 if `a < b`, else 0.
pub fn lt01(a: PrBody, b: PrBody) -> PrBody {
    if0(sub(succ(a), b), c(1), c(0))
}

/// 1 if `a` is nonzero, else 0.
pub fn pos01(a: PrBody) -> PrBody {
    if0(a, c(0), c(1))
}

/// 1 if `a` is zero, else 0.
pub fn is0(a: PrBody) -> PrBody {
    if0(a, c(1), c(0))
}

/// Logical AND of 0/1 values (multiplication).
pub fn and01(a: PrBody, b: PrBody) -> PrBody {
    mul(a, b)
}

/// Logical AND of several 0/1 values.
pub fn all01(parts: Vec<PrBody>) -> PrBody {
    parts
        .into_iter()
        .reduce(and01)
        .unwrap_or(PrBody::Const(1))
}

/// Logical OR of 0/1 values.
pub fn or01(a: PrBody, b: PrBody) -> PrBody {
    if0(a, b, c(1))
}

/// Logical NOT of a 0/1 value.
pub fn not01(a: PrBody) -> PrBody {
    is0(a)
}

/// Branch on a 0/1 value being 1 ("true").
pub fn if1(cond: PrBody, then: PrBody, els: PrBody) -> PrBody {
    if0(cond, els, then)
}

#[cfg(test)]
mod tests {
    use super::super::{eval_pr_u64, PrDefinition, PrLibrary};
    use super::*;

    fn run1(body: PrBody, arg: u64) -> u64 {
        let mut lib = PrLibrary::new();
        lib.insert(PrDefinition {
            name: "t".into(),
            arity: 2,
            body,
        });
        lib.validate().unwrap();
        // Probe with the first argument varying, second fixed.
        u64::try_from(&eval_pr_u64(&lib, "t", &[arg, 5]).unwrap()).unwrap()
    }

    #[test]
    fn comparators() {
        assert_eq!(run1(eq01(x(1), x(2)), 5), 1);
        assert_eq!(run1(eq01(x(1), x(2)), 4), 0);
        assert_eq!(run1(le01(x(1), x(2)), 5), 1);
        assert_eq!(run1(le01(x(1), x(2)), 6), 0);
        assert_eq!(run1(lt01(x(1), x(2)), 4), 1);
        assert_eq!(run1(lt01(x(1), x(2)), 5), 0);
        assert_eq!(run1(or01(is0(x(1)), eq01(x(1), c(3))), 3), 1);
        assert_eq!(run1(or01(is0(x(1)), eq01(x(1), c(3))), 2), 0);
        assert_eq!(run1(not01(pos01(x(1))), 0), 1);
        assert_eq!(run1(if1(lt01(x(1), x(2)), c(10), c(20)), 1), 10);
        assert_eq!(run1(if1(lt01(x(1), x(2)), c(10), c(20)), 9), 20);
        assert_eq!(
            run1(all01(vec![le01(x(1), x(2)), pos01(x(1)), c(1)]), 3),
            1
        );
        assert_eq!(run1(all01(vec![le01(x(1), x(2)), pos01(x(1))]), 0), 0);
    }
}
