//! NWTL: temporal logic over nested words.
//!
//! Besides the LTL-style boolean and linear operators, the logic has an
//! abstract next/previous pair that jumps across a matched call/return,
//! and summary until/since, whose intermediate positions range over the
//! summary path (which skips matched call bodies). The evaluator here is
//! the ground-truth oracle against which the automaton translation is
//! tested.

mod parse;

pub use parse::{parse, ParseError};

use crate::nested_word::{Alphabet, NestedWord, Sym};
use std::collections::BTreeSet;
use thiserror::Error;

/// NWTL abstract syntax. Atoms observe one component of a letter each.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    Call,
    Ret,
    /// `in:σ` — the position's input symbol is σ.
    InAtom(Sym),
    /// `out:o` — the position's output symbol is o.
    OutAtom(Sym),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Linear next; false at the last position.
    Next(Box<Formula>),
    /// Abstract next: true only at a matched call, evaluated at its return.
    NextMu(Box<Formula>),
    /// Linear previous; false at position 1.
    Prev(Box<Formula>),
    /// Abstract previous: true only at a matched return, evaluated at its call.
    PrevMu(Box<Formula>),
    /// Summary until.
    UntilSummary(Box<Formula>, Box<Formula>),
    /// Summary since.
    SinceSummary(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn next_mu(f: Formula) -> Formula {
        Formula::NextMu(Box::new(f))
    }

    pub fn prev(f: Formula) -> Formula {
        Formula::Prev(Box::new(f))
    }

    pub fn prev_mu(f: Formula) -> Formula {
        Formula::PrevMu(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::UntilSummary(Box::new(a), Box::new(b))
    }

    pub fn since(a: Formula, b: Formula) -> Formula {
        Formula::SinceSummary(Box::new(a), Box::new(b))
    }

    /// `Fs f` — eventually along the summary path.
    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    /// `Gs f` — globally along summary paths.
    pub fn globally(f: Formula) -> Formula {
        Formula::not(Formula::until(Formula::True, Formula::not(f)))
    }

    /// Negation with double negations collapsed.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::Not(inner) => (**inner).clone(),
            other => Formula::not(other.clone()),
        }
    }

    /// Direct subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True
            | Formula::Call
            | Formula::Ret
            | Formula::InAtom(_)
            | Formula::OutAtom(_) => vec![],
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::NextMu(a)
            | Formula::Prev(a)
            | Formula::PrevMu(a) => vec![a],
            Formula::Or(a, b)
            | Formula::And(a, b)
            | Formula::UntilSummary(a, b)
            | Formula::SinceSummary(a, b) => vec![a, b],
        }
    }

    /// All subformulas including self, deduplicated.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if out.insert(f.clone()) {
                stack.extend(f.children());
            }
        }
        out
    }

    /// Number of operators/atoms, a crude formula size.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Concrete syntax with symbol names resolved via `alphabet`. Output
    /// is fully parenthesized on binary operators so it re-parses to the
    /// same tree.
    pub fn pretty(&self, alphabet: &Alphabet) -> String {
        match self {
            Formula::True => "true".into(),
            Formula::Call => "call".into(),
            Formula::Ret => "ret".into(),
            Formula::InAtom(s) => format!("in:{}", alphabet.input_name(*s)),
            Formula::OutAtom(s) => format!("out:{}", alphabet.output_name(*s)),
            Formula::Not(a) => format!("!{}", a.pretty_unary(alphabet)),
            Formula::Next(a) => format!("X {}", a.pretty_unary(alphabet)),
            Formula::NextMu(a) => format!("Xmu {}", a.pretty_unary(alphabet)),
            Formula::Prev(a) => format!("Y {}", a.pretty_unary(alphabet)),
            Formula::PrevMu(a) => format!("Ymu {}", a.pretty_unary(alphabet)),
            Formula::Or(a, b) => format!("({} | {})", a.pretty(alphabet), b.pretty(alphabet)),
            Formula::And(a, b) => format!("({} & {})", a.pretty(alphabet), b.pretty(alphabet)),
            Formula::UntilSummary(a, b) => {
                format!("({} Us {})", a.pretty(alphabet), b.pretty(alphabet))
            }
            Formula::SinceSummary(a, b) => {
                format!("({} Ss {})", a.pretty(alphabet), b.pretty(alphabet))
            }
        }
    }

    fn pretty_unary(&self, alphabet: &Alphabet) -> String {
        match self {
            Formula::Or(..)
            | Formula::And(..)
            | Formula::UntilSummary(..)
            | Formula::SinceSummary(..) => self.pretty(alphabet),
            _ => match self {
                Formula::True
                | Formula::Call
                | Formula::Ret
                | Formula::InAtom(_)
                | Formula::OutAtom(_) => self.pretty(alphabet),
                _ => format!("({})", self.pretty(alphabet)),
            },
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("position {0} out of range 1..={1}")]
    PositionOutOfRange(usize, usize),
}

/// Evaluates `f` at position `i` of the finite nested word `w`.
///
/// Next/Prev are false when the target position does not exist. Until
/// requires the first clause at every summary-path position strictly
/// before the witness; since requires it at every position strictly after
/// the witness, including `i` itself.
pub fn eval(w: &NestedWord, i: usize, f: &Formula) -> Result<bool, EvalError> {
    if i < 1 || i > w.len() {
        return Err(EvalError::PositionOutOfRange(i, w.len()));
    }
    Ok(eval_in(w, i, f))
}

fn eval_in(w: &NestedWord, i: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::Call => w.is_call(i),
        Formula::Ret => w.is_ret(i),
        Formula::InAtom(s) => w.letter(i).input == *s,
        Formula::OutAtom(s) => w.letter(i).output == *s,
        Formula::Not(a) => !eval_in(w, i, a),
        Formula::Or(a, b) => eval_in(w, i, a) || eval_in(w, i, b),
        Formula::And(a, b) => eval_in(w, i, a) && eval_in(w, i, b),
        Formula::Next(a) => i < w.len() && eval_in(w, i + 1, a),
        Formula::Prev(a) => i > 1 && eval_in(w, i - 1, a),
        Formula::NextMu(a) => match w.matching_ret(i) {
            Some(j) => eval_in(w, j, a),
            None => false,
        },
        Formula::PrevMu(a) => match w.matching_call(i) {
            Some(j) => eval_in(w, j, a),
            None => false,
        },
        Formula::UntilSummary(a, b) => (i..=w.len()).any(|j| {
            eval_in(w, j, b) && {
                let path = w.summary_path(i, j).expect("positions in range");
                path[..path.len() - 1].iter().all(|&p| eval_in(w, p, a))
            }
        }),
        Formula::SinceSummary(a, b) => (1..i).any(|j| {
            eval_in(w, j, b) && {
                let path = w.summary_path(j, i).expect("positions in range");
                path[1..].iter().all(|&p| eval_in(w, p, a))
            }
        }),
    }
}

/// The closure of `f`: subformulas and their single negations, plus
/// `call` and `ret`. Double negations are collapsed, so the closure is
/// idempotent and has at most `2·|f| + 4` members.
pub fn closure(f: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    for sub in f.subformulas() {
        out.insert(sub.negate());
        out.insert(sub);
    }
    for extra in [Formula::Call, Formula::Ret] {
        out.insert(extra.negate());
        out.insert(extra);
    }
    // Collapse ¬¬ψ introduced by negating formulas already of the form ¬ψ.
    let collapsed: BTreeSet<Formula> = out
        .into_iter()
        .map(|g| match g {
            Formula::Not(inner) => match *inner {
                Formula::Not(core) => *core,
                other => Formula::not(other),
            },
            other => other,
        })
        .collect();
    collapsed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nested_word::{build_nested_word, Letter, Tag};

    fn ab() -> Alphabet {
        Alphabet::new(["a"], ["x", "y", "z"])
    }

    fn l(o: u16) -> Letter {
        Letter { input: Sym(0), output: Sym(o) }
    }

    #[test]
    fn true_holds_everywhere() {
        let w = build_nested_word(&[(l(0), Tag::Int), (l(1), Tag::Call)]);
        for i in 1..=2 {
            assert!(eval(&w, i, &Formula::True).unwrap());
        }
    }

    #[test]
    fn next_mu_sees_the_matching_return() {
        let w = build_nested_word(&[(l(0), Tag::Call), (l(0), Tag::Int), (l(0), Tag::Ret)]);
        let f = Formula::next_mu(Formula::Ret);
        assert!(eval(&w, 1, &f).unwrap());
        // Pending call: abstract next is false.
        let w2 = build_nested_word(&[(l(0), Tag::Call), (l(0), Tag::Int)]);
        assert!(!eval(&w2, 1, &f).unwrap());
    }

    #[test]
    fn until_follows_the_summary_path() {
        // length 4, mu = {(1,3)}; p = out:x at 1 and 3 only, q = out:y at 4.
        let w = build_nested_word(&[
            (l(0), Tag::Call),
            (l(2), Tag::Int),
            (l(0), Tag::Ret),
            (l(1), Tag::Int),
        ]);
        let p = Formula::OutAtom(Sym(0));
        let q = Formula::OutAtom(Sym(1));
        let f = Formula::until(p.clone(), q.clone());
        // Path [1,3,4] skips position 2 where p fails.
        assert!(eval(&w, 1, &f).unwrap());
        assert!(!eval(&w, 2, &f).unwrap());
    }

    #[test]
    fn until_witness_at_current_position_needs_no_first_clause() {
        let w = build_nested_word(&[(l(1), Tag::Int)]);
        let f = Formula::until(Formula::not(Formula::True), Formula::OutAtom(Sym(1)));
        assert!(eval(&w, 1, &f).unwrap());
    }

    #[test]
    fn since_excludes_witness_includes_current() {
        // mu = {(1,3)}: since at the matched return via the jump edge.
        let w = build_nested_word(&[
            (l(1), Tag::Call),
            (l(2), Tag::Int),
            (l(0), Tag::Ret),
            (l(0), Tag::Int),
        ]);
        let p = Formula::OutAtom(Sym(0));
        let q = Formula::OutAtom(Sym(1));
        let f = Formula::since(p.clone(), q.clone());
        // j=1 (q holds), path [1,3]: p required at 3 only. Position 2 skipped.
        assert!(eval(&w, 3, &f).unwrap());
        // At position 1 there is no j < 1.
        assert!(!eval(&w, 1, &f).unwrap());
        // Since never holds via a witness at the current position itself.
        let g = Formula::since(Formula::True, Formula::OutAtom(Sym(2)));
        assert!(!eval(&w, 2, &g).unwrap());
        assert!(eval(&w, 3, &g).unwrap());
    }

    #[test]
    fn eval_position_out_of_range() {
        let w = build_nested_word(&[(l(0), Tag::Int)]);
        assert!(eval(&w, 2, &Formula::True).is_err());
        assert!(eval(&w, 0, &Formula::True).is_err());
    }

    #[test]
    fn closure_of_true() {
        let c = closure(&Formula::True);
        let expected: BTreeSet<Formula> = [
            Formula::True,
            Formula::not(Formula::True),
            Formula::Call,
            Formula::not(Formula::Call),
            Formula::Ret,
            Formula::not(Formula::Ret),
        ]
        .into_iter()
        .collect();
        assert_eq!(c, expected);
    }

    #[test]
    fn closure_contains_until_operands_and_negations() {
        let p = Formula::OutAtom(Sym(0));
        let q = Formula::OutAtom(Sym(1));
        let u = Formula::until(p.clone(), q.clone());
        let c = closure(&u);
        for f in [&p, &q, &u] {
            assert!(c.contains(f));
            assert!(c.contains(&f.negate()));
        }
        assert!(c.len() <= 2 * u.size() + 4);
    }

    #[test]
    fn closure_collapses_double_negation_and_is_idempotent() {
        let p = Formula::OutAtom(Sym(0));
        let nn = Formula::not(Formula::not(p.clone()));
        let c = closure(&nn);
        assert!(c.contains(&p));
        assert!(c.contains(&Formula::not(p.clone())));
        assert!(!c.iter().any(|f| matches!(f, Formula::Not(inner) if matches!(**inner, Formula::Not(_)))));
        for member in &c {
            for g in closure(member) {
                assert!(
                    c.contains(&g) || closure(&nn).contains(&g),
                    "closure not idempotent at {:?}",
                    g
                );
            }
        }
    }

    #[test]
    fn pretty_parse_round_trip() {
        let alphabet = ab();
        let fs = [
            Formula::until(Formula::True, Formula::OutAtom(Sym(0))),
            Formula::and(Formula::Call, Formula::next_mu(Formula::Ret)),
            Formula::not(Formula::until(
                Formula::True,
                Formula::not(Formula::OutAtom(Sym(1))),
            )),
            Formula::or(
                Formula::since(Formula::InAtom(Sym(0)), Formula::Ret),
                Formula::prev(Formula::prev_mu(Formula::Call)),
            ),
            Formula::next(Formula::and(Formula::OutAtom(Sym(2)), Formula::prev(Formula::True))),
        ];
        for f in fs {
            let text = f.pretty(&alphabet);
            let back = parse(&text, &alphabet).unwrap();
            assert_eq!(back, f, "round trip failed for {}", text);
        }
    }

    // Reference evaluator written independently: no shared summary-path
    // helper, candidate witnesses and paths recomputed inline.
    fn eval_ref(w: &NestedWord, i: usize, f: &Formula) -> bool {
        fn path_between(w: &NestedWord, i: usize, j: usize) -> Vec<usize> {
            let mut p = i;
            let mut out = vec![i];
            while p < j {
                let next = match w.matching_ret(p) {
                    Some(r) if r <= j => r,
                    _ => p + 1,
                };
                out.push(next);
                p = next;
            }
            out
        }
        match f {
            Formula::UntilSummary(a, b) => {
                for j in i..=w.len() {
                    if eval_ref(w, j, b) {
                        let path = path_between(w, i, j);
                        if path[..path.len() - 1].iter().all(|&p| eval_ref(w, p, a)) {
                            return true;
                        }
                    }
                }
                false
            }
            Formula::SinceSummary(a, b) => {
                for j in 1..i {
                    if eval_ref(w, j, b) {
                        let path = path_between(w, j, i);
                        if path[1..].iter().all(|&p| eval_ref(w, p, a)) {
                            return true;
                        }
                    }
                }
                false
            }
            Formula::True => true,
            Formula::Call => w.is_call(i),
            Formula::Ret => w.is_ret(i),
            Formula::InAtom(s) => w.letter(i).input == *s,
            Formula::OutAtom(s) => w.letter(i).output == *s,
            Formula::Not(a) => !eval_ref(w, i, a),
            Formula::Or(a, b) => eval_ref(w, i, a) || eval_ref(w, i, b),
            Formula::And(a, b) => eval_ref(w, i, a) && eval_ref(w, i, b),
            Formula::Next(a) => i < w.len() && eval_ref(w, i + 1, a),
            Formula::Prev(a) => i > 1 && eval_ref(w, i - 1, a),
            Formula::NextMu(a) => w.matching_ret(i).map_or(false, |j| eval_ref(w, j, a)),
            Formula::PrevMu(a) => w.matching_call(i).map_or(false, |j| eval_ref(w, j, a)),
        }
    }

    #[test]
    fn eval_agrees_with_reference_on_random_words() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let p = Formula::OutAtom(Sym(0));
        let q = Formula::OutAtom(Sym(1));
        let formulas = [
            Formula::until(p.clone(), q.clone()),
            Formula::since(p.clone(), q.clone()),
            Formula::until(Formula::or(p.clone(), Formula::Call), Formula::and(q.clone(), Formula::Ret)),
            Formula::globally(Formula::or(p.clone(), q.clone())),
            Formula::eventually(Formula::and(Formula::Ret, Formula::prev_mu(p.clone()))),
            Formula::next(Formula::until(p.clone(), Formula::next_mu(q.clone()))),
        ];
        for _ in 0..300 {
            let n = rng.gen_range(1..9);
            let tagged: Vec<(Letter, Tag)> = (0..n)
                .map(|_| {
                    let tag = match rng.gen_range(0..3) {
                        0 => Tag::Call,
                        1 => Tag::Ret,
                        _ => Tag::Int,
                    };
                    (l(rng.gen_range(0..2)), tag)
                })
                .collect();
            let w = build_nested_word(&tagged);
            for f in &formulas {
                for i in 1..=w.len() {
                    assert_eq!(
                        eval(&w, i, f).unwrap(),
                        eval_ref(&w, i, f),
                        "disagreement at {} on {:?}",
                        i,
                        f
                    );
                }
            }
        }
    }

    #[test]
    fn until_true_whenever_second_clause_true() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let p = Formula::OutAtom(Sym(0));
        let q = Formula::OutAtom(Sym(1));
        let u = Formula::until(p, q.clone());
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let tagged: Vec<(Letter, Tag)> = (0..n)
                .map(|_| {
                    let tag = match rng.gen_range(0..3) {
                        0 => Tag::Call,
                        1 => Tag::Ret,
                        _ => Tag::Int,
                    };
                    (l(rng.gen_range(0..3)), tag)
                })
                .collect();
            let w = build_nested_word(&tagged);
            for i in 1..=w.len() {
                if eval(&w, i, &q).unwrap() {
                    assert!(eval(&w, i, &u).unwrap());
                }
            }
        }
    }
}
