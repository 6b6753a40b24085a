//! Nested words: letter sequences with a non-crossing matching between
//! call and return positions.
//!
//! Positions are 1-based throughout. A matching must satisfy three
//! conditions: matched pairs are ordered call-before-return, the relation
//! is injective in both coordinates, and no two pairs cross. Unmatched
//! (pending) calls and unmatched returns are legal; they arise naturally
//! when a computation never returns or when the root component pops its
//! final frame.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Index of a symbol in an [`Alphabet`] (input and output symbols share
/// the index type; the alphabet side is implied by context).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sym(pub u16);

/// Declared input and output alphabets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Alphabet {
    pub fn new<I, O, S>(inputs: I, outputs: O) -> Self
    where
        I: IntoIterator<Item = S>,
        O: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Alphabet {
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        }
    }

    pub fn input_id(&self, name: &str) -> Option<Sym> {
        self.inputs.iter().position(|s| s == name).map(|i| Sym(i as u16))
    }

    pub fn output_id(&self, name: &str) -> Option<Sym> {
        self.outputs.iter().position(|s| s == name).map(|i| Sym(i as u16))
    }

    pub fn input_name(&self, s: Sym) -> &str {
        &self.inputs[s.0 as usize]
    }

    pub fn output_name(&self, s: Sym) -> &str {
        &self.outputs[s.0 as usize]
    }

    /// All (input, output) letters, input-major order.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(self.inputs.len() * self.outputs.len());
        for i in 0..self.inputs.len() {
            for o in 0..self.outputs.len() {
                out.push(Letter { input: Sym(i as u16), output: Sym(o as u16) });
            }
        }
        out
    }
}

/// One position's combined input/output letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub input: Sym,
    pub output: Sym,
}

impl Letter {
    pub fn new(input: Sym, output: Sym) -> Self {
        Letter { input, output }
    }
}

/// Position tag used when constructing nested words from traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Call,
    Ret,
    Int,
}

/// Which matching condition a candidate relation violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingRule {
    /// Matched pairs must satisfy `call(i)`, `ret(j)`, `i < j`.
    Cond1,
    /// The relation must be injective in both coordinates.
    Cond2,
    /// Every call-before-return pair must enclose a matched endpoint
    /// (forbids crossing).
    Cond3,
}

/// Outcome of [`validate_matching`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingCheck {
    Valid,
    Violation { rule: MatchingRule, witness: (usize, usize) },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NestedWordError {
    #[error("position {0} out of range 1..={1}")]
    PositionOutOfRange(usize, usize),
    #[error("trace: {0}")]
    Trace(String),
}

/// Checks the three matching conditions over positions `1..=n`.
///
/// Returns the first violated condition (conditions checked in order,
/// witnesses scanned in ascending order) or a range error if any position
/// lies outside `1..=n`.
pub fn validate_matching(
    n: usize,
    calls: &BTreeSet<usize>,
    rets: &BTreeSet<usize>,
    mu: &BTreeSet<(usize, usize)>,
) -> Result<MatchingCheck, NestedWordError> {
    let in_range = |p: usize| p >= 1 && p <= n;
    for &p in calls.iter().chain(rets.iter()) {
        if !in_range(p) {
            return Err(NestedWordError::PositionOutOfRange(p, n));
        }
    }
    for &(i, j) in mu {
        if !in_range(i) {
            return Err(NestedWordError::PositionOutOfRange(i, n));
        }
        if !in_range(j) {
            return Err(NestedWordError::PositionOutOfRange(j, n));
        }
    }

    // Condition 1: mu(i, j) implies call(i), ret(j), i < j.
    for &(i, j) in mu {
        if !calls.contains(&i) || !rets.contains(&j) || i >= j {
            return Ok(MatchingCheck::Violation { rule: MatchingRule::Cond1, witness: (i, j) });
        }
    }

    // Condition 2: injective in both coordinates.
    let mut by_call: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_ret: BTreeMap<usize, usize> = BTreeMap::new();
    for &(i, j) in mu {
        if let Some(&j0) = by_call.get(&i) {
            if j0 != j {
                return Ok(MatchingCheck::Violation { rule: MatchingRule::Cond2, witness: (i, j) });
            }
        }
        if let Some(&i0) = by_ret.get(&j) {
            if i0 != i {
                return Ok(MatchingCheck::Violation { rule: MatchingRule::Cond2, witness: (i, j) });
            }
        }
        by_call.insert(i, j);
        by_ret.insert(j, i);
    }

    // Condition 3: for i <= j with call(i), ret(j), some matched endpoint
    // falls inside [i, j].
    for &i in calls {
        for &j in rets.iter().filter(|&&j| j >= i) {
            let ok = by_call.get(&i).map_or(false, |&k| k >= i && k <= j)
                || by_ret.get(&j).map_or(false, |&k| k >= i && k <= j);
            if !ok {
                return Ok(MatchingCheck::Violation { rule: MatchingRule::Cond3, witness: (i, j) });
            }
        }
    }

    Ok(MatchingCheck::Valid)
}

/// A finite nested word: letters plus a validated matching.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedWord {
    letters: Vec<Letter>,
    calls: BTreeSet<usize>,
    rets: BTreeSet<usize>,
    /// call position -> matched return position
    ret_of: BTreeMap<usize, usize>,
    /// return position -> matched call position
    call_of: BTreeMap<usize, usize>,
}

impl NestedWord {
    /// The empty nested word.
    pub fn empty() -> Self {
        NestedWord {
            letters: Vec::new(),
            calls: BTreeSet::new(),
            rets: BTreeSet::new(),
            ret_of: BTreeMap::new(),
            call_of: BTreeMap::new(),
        }
    }

    /// Builds a nested word from raw parts, validating the matching.
    pub fn new(
        letters: Vec<Letter>,
        calls: BTreeSet<usize>,
        rets: BTreeSet<usize>,
        mu: BTreeSet<(usize, usize)>,
    ) -> Result<Self, NestedWordError> {
        match validate_matching(letters.len(), &calls, &rets, &mu)? {
            MatchingCheck::Valid => {}
            MatchingCheck::Violation { rule, witness } => {
                return Err(NestedWordError::Trace(format!(
                    "matching violates {:?} at {:?}",
                    rule, witness
                )));
            }
        }
        let ret_of: BTreeMap<usize, usize> = mu.iter().copied().collect();
        let call_of: BTreeMap<usize, usize> = mu.iter().map(|&(i, j)| (j, i)).collect();
        Ok(NestedWord { letters, calls, rets, ret_of, call_of })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> Letter {
        self.letters[i - 1]
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_call(&self, i: usize) -> bool {
        self.calls.contains(&i)
    }

    pub fn is_ret(&self, i: usize) -> bool {
        self.rets.contains(&i)
    }

    pub fn is_internal(&self, i: usize) -> bool {
        !self.is_call(i) && !self.is_ret(i)
    }

    /// Matched return of call `i`, if any.
    pub fn matching_ret(&self, i: usize) -> Option<usize> {
        self.ret_of.get(&i).copied()
    }

    /// Matched call of return `j`, if any.
    pub fn matching_call(&self, j: usize) -> Option<usize> {
        self.call_of.get(&j).copied()
    }

    pub fn calls(&self) -> &BTreeSet<usize> {
        &self.calls
    }

    pub fn rets(&self) -> &BTreeSet<usize> {
        &self.rets
    }

    pub fn mu_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ret_of.iter().map(|(&i, &j)| (i, j))
    }

    /// Tag of position `i`.
    pub fn tag(&self, i: usize) -> Tag {
        if self.is_call(i) {
            Tag::Call
        } else if self.is_ret(i) {
            Tag::Ret
        } else {
            Tag::Int
        }
    }

    /// The summary path from `i` to `j`: jumps from a matched call to its
    /// return whenever the return is within reach, otherwise steps by one.
    pub fn summary_path(&self, i: usize, j: usize) -> Result<Vec<usize>, NestedWordError> {
        let n = self.len();
        for p in [i, j] {
            if p < 1 || p > n {
                return Err(NestedWordError::PositionOutOfRange(p, n));
            }
        }
        assert!(i <= j, "summary_path requires i <= j");
        let mut path = vec![i];
        let mut cur = i;
        while cur < j {
            let next = match self.matching_ret(cur) {
                Some(r) if r <= j => r,
                _ => cur + 1,
            };
            path.push(next);
            cur = next;
        }
        Ok(path)
    }

    /// The substructure induced by positions `i..=j`, re-indexed from 1.
    /// Pairs clipped by the window become pending calls / unmatched
    /// returns. `j < i` yields the empty nested word.
    pub fn substructure(&self, i: usize, j: usize) -> NestedWord {
        if j < i {
            return NestedWord::empty();
        }
        let n = self.len();
        assert!(i >= 1 && j <= n, "substructure positions out of range");
        let letters: Vec<Letter> = (i..=j).map(|p| self.letter(p)).collect();
        let shift = |p: usize| p - i + 1;
        let calls: BTreeSet<usize> =
            self.calls.iter().filter(|&&p| p >= i && p <= j).map(|&p| shift(p)).collect();
        let rets: BTreeSet<usize> =
            self.rets.iter().filter(|&&p| p >= i && p <= j).map(|&p| shift(p)).collect();
        let mut ret_of = BTreeMap::new();
        let mut call_of = BTreeMap::new();
        for (&c, &r) in &self.ret_of {
            if c >= i && r <= j {
                ret_of.insert(shift(c), shift(r));
                call_of.insert(shift(r), shift(c));
            }
        }
        NestedWord { letters, calls, rets, ret_of, call_of }
    }
}

/// Builds a nested word from tagged letters. Each return is matched to the
/// most recent pending call; returns seen with an empty pending stack stay
/// unmatched. The result always satisfies the matching conditions.
pub fn build_nested_word(tagged: &[(Letter, Tag)]) -> NestedWord {
    let mut calls = BTreeSet::new();
    let mut rets = BTreeSet::new();
    let mut ret_of = BTreeMap::new();
    let mut call_of = BTreeMap::new();
    let mut pending: Vec<usize> = Vec::new();
    for (idx, &(_, tag)) in tagged.iter().enumerate() {
        let pos = idx + 1;
        match tag {
            Tag::Call => {
                calls.insert(pos);
                pending.push(pos);
            }
            Tag::Ret => {
                rets.insert(pos);
                if let Some(c) = pending.pop() {
                    ret_of.insert(c, pos);
                    call_of.insert(pos, c);
                }
            }
            Tag::Int => {}
        }
    }
    let letters = tagged.iter().map(|&(l, _)| l).collect();
    NestedWord { letters, calls, rets, ret_of, call_of }
}

// ---------------------------------------------------------------------------
// Trace file format

/// One position of a trace file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePosition {
    #[serde(rename = "in")]
    pub input: String,
    #[serde(rename = "out")]
    pub output: String,
    pub tag: String,
    #[serde(rename = "match")]
    pub matched: Option<usize>,
}

/// Trace file: the JSON surface for nested words.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceFile {
    pub positions: Vec<TracePosition>,
}

impl TraceFile {
    /// Renders a nested word with symbol names resolved via `alphabet`.
    pub fn from_word(w: &NestedWord, alphabet: &Alphabet) -> TraceFile {
        let positions = (1..=w.len())
            .map(|p| {
                let l = w.letter(p);
                let (tag, matched) = match w.tag(p) {
                    Tag::Call => ("call", w.matching_ret(p)),
                    Tag::Ret => ("ret", w.matching_call(p)),
                    Tag::Int => ("int", None),
                };
                TracePosition {
                    input: alphabet.input_name(l.input).to_string(),
                    output: alphabet.output_name(l.output).to_string(),
                    tag: tag.to_string(),
                    matched,
                }
            })
            .collect();
        TraceFile { positions }
    }

    /// Reconstructs the nested word and checks the declared `match` fields
    /// against the matching implied by the tags.
    pub fn to_word(&self, alphabet: &Alphabet) -> Result<NestedWord, NestedWordError> {
        let mut tagged = Vec::with_capacity(self.positions.len());
        for (idx, p) in self.positions.iter().enumerate() {
            let input = alphabet
                .input_id(&p.input)
                .ok_or_else(|| NestedWordError::Trace(format!("unknown input symbol '{}'", p.input)))?;
            let output = alphabet.output_id(&p.output).ok_or_else(|| {
                NestedWordError::Trace(format!("unknown output symbol '{}'", p.output))
            })?;
            let tag = match p.tag.as_str() {
                "call" => Tag::Call,
                "ret" => Tag::Ret,
                "int" => Tag::Int,
                other => {
                    return Err(NestedWordError::Trace(format!(
                        "position {}: unknown tag '{}'",
                        idx + 1,
                        other
                    )))
                }
            };
            tagged.push((Letter { input, output }, tag));
        }
        let word = build_nested_word(&tagged);
        for (idx, p) in self.positions.iter().enumerate() {
            let pos = idx + 1;
            let expected = match word.tag(pos) {
                Tag::Call => word.matching_ret(pos),
                Tag::Ret => word.matching_call(pos),
                Tag::Int => None,
            };
            if p.matched != expected {
                return Err(NestedWordError::Trace(format!(
                    "position {}: declared match {:?} but matching gives {:?}",
                    pos, p.matched, expected
                )));
            }
        }
        Ok(word)
    }

    /// Collects the symbols used by this trace into an alphabet, in first
    /// occurrence order.
    pub fn infer_alphabet(&self) -> Alphabet {
        let mut inputs: Vec<String> = Vec::new();
        let mut outputs: Vec<String> = Vec::new();
        for p in &self.positions {
            if !inputs.contains(&p.input) {
                inputs.push(p.input.clone());
            }
            if !outputs.contains(&p.output) {
                outputs.push(p.output.clone());
            }
        }
        Alphabet { inputs, outputs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letter(i: u16, o: u16) -> Letter {
        Letter { input: Sym(i), output: Sym(o) }
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn pairs(xs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        xs.iter().copied().collect()
    }

    #[test]
    fn validate_single_matched_pair() {
        let r = validate_matching(3, &set(&[1]), &set(&[3]), &pairs(&[(1, 3)])).unwrap();
        assert_eq!(r, MatchingCheck::Valid);
    }

    #[test]
    fn validate_reversed_pair_breaks_cond1() {
        let r = validate_matching(2, &set(&[2]), &set(&[1]), &pairs(&[(2, 1)])).unwrap();
        assert_eq!(r, MatchingCheck::Violation { rule: MatchingRule::Cond1, witness: (2, 1) });
    }

    #[test]
    fn validate_crossing_pairs_break_cond3() {
        let r = validate_matching(4, &set(&[1, 2]), &set(&[3, 4]), &pairs(&[(1, 3), (2, 4)]))
            .unwrap();
        assert_eq!(r, MatchingCheck::Violation { rule: MatchingRule::Cond3, witness: (2, 3) });
    }

    #[test]
    fn validate_duplicate_call_breaks_cond2() {
        let r = validate_matching(3, &set(&[1]), &set(&[2, 3]), &pairs(&[(1, 2), (1, 3)]))
            .unwrap();
        assert_eq!(r, MatchingCheck::Violation { rule: MatchingRule::Cond2, witness: (1, 3) });
    }

    #[test]
    fn validate_out_of_range_is_an_error() {
        let err = validate_matching(2, &set(&[5]), &set(&[]), &pairs(&[])).unwrap_err();
        assert_eq!(err, NestedWordError::PositionOutOfRange(5, 2));
    }

    #[test]
    fn build_matches_call_ret() {
        let l = letter(0, 0);
        let w = build_nested_word(&[(l, Tag::Call), (l, Tag::Int), (l, Tag::Ret)]);
        assert_eq!(w.matching_ret(1), Some(3));
        assert!(w.is_internal(2));
    }

    #[test]
    fn build_nests_inner_pair() {
        let l = letter(0, 0);
        let w =
            build_nested_word(&[(l, Tag::Call), (l, Tag::Call), (l, Tag::Ret), (l, Tag::Ret)]);
        assert_eq!(w.matching_ret(2), Some(3));
        assert_eq!(w.matching_ret(1), Some(4));
    }

    #[test]
    fn build_leaves_bare_return_unmatched() {
        let l = letter(0, 0);
        let w = build_nested_word(&[(l, Tag::Ret)]);
        assert!(w.is_ret(1));
        assert_eq!(w.matching_call(1), None);
        assert_eq!(w.mu_pairs().count(), 0);
    }

    #[test]
    fn summary_path_jumps_over_call_body() {
        let l = letter(0, 0);
        let w = build_nested_word(&[
            (l, Tag::Call),
            (l, Tag::Int),
            (l, Tag::Ret),
            (l, Tag::Int),
        ]);
        assert_eq!(w.summary_path(1, 4).unwrap(), vec![1, 3, 4]);
        // Target inside the body: step linearly instead.
        assert_eq!(w.summary_path(1, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn summary_path_is_linear_without_calls() {
        let l = letter(0, 0);
        let w = build_nested_word(&[(l, Tag::Int), (l, Tag::Int), (l, Tag::Int)]);
        assert_eq!(w.summary_path(1, 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(w.summary_path(2, 2).unwrap(), vec![2]);
    }

    #[test]
    fn substructure_clips_pairs() {
        let l = letter(0, 0);
        let w = build_nested_word(&[
            (l, Tag::Call),
            (l, Tag::Int),
            (l, Tag::Int),
            (l, Tag::Ret),
        ]);
        let sub = w.substructure(2, 3);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.mu_pairs().count(), 0);

        let empty = w.substructure(3, 2);
        assert!(empty.is_empty());
    }

    #[test]
    fn substructure_keeps_inner_pairs_reindexed() {
        let l = letter(0, 0);
        let w = build_nested_word(&[
            (l, Tag::Int),
            (l, Tag::Call),
            (l, Tag::Ret),
            (l, Tag::Int),
        ]);
        let sub = w.substructure(2, 4);
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.matching_ret(1), Some(2));
        let mu: BTreeSet<(usize, usize)> = sub.mu_pairs().collect();
        let check =
            validate_matching(3, sub.calls(), sub.rets(), &mu).unwrap();
        assert_eq!(check, MatchingCheck::Valid);
    }

    #[test]
    fn substructure_full_range_is_identity() {
        let l = letter(0, 0);
        let w = build_nested_word(&[
            (l, Tag::Call),
            (l, Tag::Ret),
            (l, Tag::Ret),
            (l, Tag::Call),
        ]);
        assert_eq!(w.substructure(1, 4), w);
    }

    #[test]
    fn built_words_always_validate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(0..12);
            let tagged: Vec<(Letter, Tag)> = (0..n)
                .map(|_| {
                    let tag = match rng.gen_range(0..3) {
                        0 => Tag::Call,
                        1 => Tag::Ret,
                        _ => Tag::Int,
                    };
                    (letter(0, rng.gen_range(0..2)), tag)
                })
                .collect();
            let w = build_nested_word(&tagged);
            let mu: BTreeSet<(usize, usize)> = w.mu_pairs().collect();
            let r = validate_matching(w.len(), w.calls(), w.rets(), &mu).unwrap();
            assert_eq!(r, MatchingCheck::Valid);
        }
    }

    #[test]
    fn summary_path_skips_only_matched_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..10);
            let tagged: Vec<(Letter, Tag)> = (0..n)
                .map(|_| {
                    let tag = match rng.gen_range(0..3) {
                        0 => Tag::Call,
                        1 => Tag::Ret,
                        _ => Tag::Int,
                    };
                    (letter(0, 0), tag)
                })
                .collect();
            let w = build_nested_word(&tagged);
            let i = rng.gen_range(1..=w.len());
            let j = rng.gen_range(i..=w.len());
            let path = w.summary_path(i, j).unwrap();
            assert_eq!(path[0], i);
            assert_eq!(*path.last().unwrap(), j);
            for win in path.windows(2) {
                assert!(win[0] < win[1]);
                if win[1] != win[0] + 1 {
                    assert_eq!(w.matching_ret(win[0]), Some(win[1]));
                }
            }
        }
    }

    #[test]
    fn trace_round_trip() {
        let alphabet = Alphabet::new(["a"], ["x", "y"]);
        let l = |o: u16| Letter { input: Sym(0), output: Sym(o) };
        let w = build_nested_word(&[
            (l(0), Tag::Call),
            (l(1), Tag::Int),
            (l(0), Tag::Ret),
            (l(1), Tag::Ret),
        ]);
        let t = TraceFile::from_word(&w, &alphabet);
        assert_eq!(t.positions[0].matched, Some(3));
        assert_eq!(t.positions[3].matched, None);
        let back = t.to_word(&alphabet).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn trace_rejects_inconsistent_match_field() {
        let alphabet = Alphabet::new(["a"], ["x"]);
        let t = TraceFile {
            positions: vec![
                TracePosition {
                    input: "a".into(),
                    output: "x".into(),
                    tag: "call".into(),
                    matched: None,
                },
                TracePosition {
                    input: "a".into(),
                    output: "x".into(),
                    tag: "ret".into(),
                    matched: Some(1),
                },
            ],
        };
        // The call's match field should be Some(2); None must be rejected.
        assert!(t.to_word(&alphabet).is_err());
    }
}
