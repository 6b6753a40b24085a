//! Nested-word Büchi automata.
//!
//! An NWBA reads a nested word left to right: calls push a hierarchical
//! symbol, matched returns pop the symbol pushed by their call, unmatched
//! returns pop some initial symbol. A run over a finite word is accepting
//! if the final state is accepting and every symbol still pending at the
//! end is final; over an infinite word the Büchi condition replaces the
//! final-state clause.

mod translate;

pub use translate::translate_nwtl;

use crate::nested_word::{Letter, NestedWord, Sym, Tag};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use thiserror::Error;

/// A nested-word Büchi automaton. States and hierarchical symbols are
/// indices into `states` / `hier`; transitions are stored as flat
/// relations with derived lookup tables built on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nwba {
    pub alphabet: Vec<Letter>,
    pub states: Vec<String>,
    pub initial: BTreeSet<usize>,
    pub accepting: BTreeSet<usize>,
    pub hier: Vec<String>,
    pub hier_initial: BTreeSet<usize>,
    pub hier_final: BTreeSet<usize>,
    pub delta_call: Vec<(usize, Letter, usize, usize)>,
    pub delta_int: Vec<(usize, Letter, usize)>,
    pub delta_ret: Vec<(usize, usize, Letter, usize)>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NwbaError {
    #[error("letter ({0:?}) outside the automaton alphabet")]
    LetterOutsideAlphabet(Letter),
    #[error("automaton file: {0}")]
    Format(String),
}

/// Result of structural validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonCheck {
    pub defects: Vec<String>,
    pub warnings: Vec<String>,
}

impl AutomatonCheck {
    pub fn is_valid(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Validates that every transition endpoint lies in the declared state,
/// symbol and alphabet sets. An empty initial set is legal but flagged as
/// a warning since it makes the language empty.
pub fn check_automaton(a: &Nwba) -> AutomatonCheck {
    let mut defects = Vec::new();
    let mut warnings = Vec::new();
    let nq = a.states.len();
    let np = a.hier.len();
    let letters: HashSet<Letter> = a.alphabet.iter().copied().collect();
    let check_state = |q: usize, what: &str, defects: &mut Vec<String>| {
        if q >= nq {
            defects.push(format!("unknown state {} in {}", q, what));
        }
    };
    for &q in a.initial.iter() {
        check_state(q, "initial set", &mut defects);
    }
    for &q in a.accepting.iter() {
        check_state(q, "accepting set", &mut defects);
    }
    for &p in a.hier_initial.iter().chain(a.hier_final.iter()) {
        if p >= np {
            defects.push(format!("unknown hierarchical symbol {} in initial/final set", p));
        }
    }
    for &(q, l, q2, p) in &a.delta_call {
        check_state(q, "delta_call", &mut defects);
        check_state(q2, "delta_call", &mut defects);
        if p >= np {
            defects.push(format!("unknown hierarchical symbol {} in delta_call", p));
        }
        if !letters.contains(&l) {
            defects.push(format!("unknown letter {:?} in delta_call", l));
        }
    }
    for &(q, l, q2) in &a.delta_int {
        check_state(q, "delta_int", &mut defects);
        check_state(q2, "delta_int", &mut defects);
        if !letters.contains(&l) {
            defects.push(format!("unknown letter {:?} in delta_int", l));
        }
    }
    for &(q, p, l, q2) in &a.delta_ret {
        check_state(q, "delta_ret", &mut defects);
        check_state(q2, "delta_ret", &mut defects);
        if p >= np {
            defects.push(format!("unknown hierarchical symbol {} in delta_ret", p));
        }
        if !letters.contains(&l) {
            defects.push(format!("unknown letter {:?} in delta_ret", l));
        }
    }
    if a.initial.is_empty() {
        warnings.push("language is empty: no initial states".into());
    }
    AutomatonCheck { defects, warnings }
}

/// Transition lookup tables keyed by source state and letter.
#[derive(Debug, Default)]
pub struct NwbaIndex {
    pub call: HashMap<(usize, Letter), Vec<(usize, usize)>>,
    pub int: HashMap<(usize, Letter), Vec<usize>>,
    pub ret: HashMap<(usize, usize, Letter), Vec<usize>>,
}

impl Nwba {
    pub fn index(&self) -> NwbaIndex {
        let mut idx = NwbaIndex::default();
        for &(q, l, q2, p) in &self.delta_call {
            idx.call.entry((q, l)).or_default().push((q2, p));
        }
        for &(q, l, q2) in &self.delta_int {
            idx.int.entry((q, l)).or_default().push(q2);
        }
        for &(q, p, l, q2) in &self.delta_ret {
            idx.ret.entry((q, p, l)).or_default().push(q2);
        }
        idx
    }

    /// A one-state automaton accepting every nested word over `alphabet`.
    pub fn universal(alphabet: Vec<Letter>) -> Nwba {
        let delta_call = alphabet.iter().map(|&l| (0, l, 0, 0)).collect();
        let delta_int = alphabet.iter().map(|&l| (0, l, 0)).collect();
        let delta_ret = alphabet.iter().map(|&l| (0, 0, l, 0)).collect();
        Nwba {
            alphabet,
            states: vec!["q0".into()],
            initial: [0].into(),
            accepting: [0].into(),
            hier: vec!["p0".into()],
            hier_initial: [0].into(),
            hier_final: [0].into(),
            delta_call,
            delta_int,
            delta_ret,
        }
    }
}

/// Decides membership of a finite nested word by depth-first search over
/// (position, state, symbol stack), memoizing failed configurations.
pub fn accepts_finite(a: &Nwba, w: &NestedWord) -> Result<bool, NwbaError> {
    let letters: HashSet<Letter> = a.alphabet.iter().copied().collect();
    for i in 1..=w.len() {
        let l = w.letter(i);
        if !letters.contains(&l) {
            return Err(NwbaError::LetterOutsideAlphabet(l));
        }
    }
    if w.is_empty() {
        return Ok(a.initial.iter().any(|q| a.accepting.contains(q)));
    }
    let idx = a.index();

    struct Search<'a> {
        a: &'a Nwba,
        idx: &'a NwbaIndex,
        w: &'a NestedWord,
        failed: HashSet<(usize, usize, Vec<usize>)>,
    }

    impl Search<'_> {
        // `pos` is the next position to read (1-based); `stack` holds the
        // symbols of currently pending calls.
        fn run(&mut self, pos: usize, q: usize, stack: &mut Vec<usize>) -> bool {
            if pos > self.w.len() {
                return self.a.accepting.contains(&q)
                    && stack.iter().all(|p| self.a.hier_final.contains(p));
            }
            let key = (pos, q, stack.clone());
            if self.failed.contains(&key) {
                return false;
            }
            let l = self.w.letter(pos);
            let ok = match self.w.tag(pos) {
                Tag::Call => {
                    let succs = self.idx.call.get(&(q, l)).cloned().unwrap_or_default();
                    succs.into_iter().any(|(q2, p)| {
                        stack.push(p);
                        let r = self.run(pos + 1, q2, stack);
                        stack.pop();
                        r
                    })
                }
                Tag::Int => {
                    let succs = self.idx.int.get(&(q, l)).cloned().unwrap_or_default();
                    succs.into_iter().any(|q2| self.run(pos + 1, q2, stack))
                }
                Tag::Ret => {
                    if self.w.matching_call(pos).is_some() {
                        match stack.pop() {
                            Some(p) => {
                                let succs =
                                    self.idx.ret.get(&(q, p, l)).cloned().unwrap_or_default();
                                let r = succs.into_iter().any(|q2| self.run(pos + 1, q2, stack));
                                stack.push(p);
                                r
                            }
                            None => false,
                        }
                    } else {
                        // Unmatched return: the pending stack is empty here
                        // (stack discipline); pop some initial symbol.
                        self.a.hier_initial.iter().any(|&p| {
                            let succs =
                                self.idx.ret.get(&(q, p, l)).cloned().unwrap_or_default();
                            succs.into_iter().any(|q2| self.run(pos + 1, q2, stack))
                        })
                    }
                }
            };
            if !ok {
                self.failed.insert(key);
            }
            ok
        }
    }

    let mut search = Search { a, idx: &idx, w, failed: HashSet::new() };
    let initials: Vec<usize> = a.initial.iter().copied().collect();
    Ok(initials.into_iter().any(|q| search.run(1, q, &mut Vec::new())))
}

// ---------------------------------------------------------------------------
// JSON file format

#[derive(Debug, Serialize, Deserialize)]
struct LetterFile {
    #[serde(rename = "in")]
    input: String,
    #[serde(rename = "out")]
    output: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct NwbaFile {
    letters: Vec<LetterFile>,
    states: Vec<String>,
    initial: Vec<String>,
    accepting: Vec<String>,
    hier: Vec<String>,
    hier_initial: Vec<String>,
    hier_final: Vec<String>,
    delta_call: Vec<(String, LetterFile, String, String)>,
    delta_int: Vec<(String, LetterFile, String)>,
    delta_ret: Vec<(String, String, LetterFile, String)>,
}

/// Symbol names used when writing an automaton file. The in-memory
/// automaton indexes an (input, output) product alphabet; files carry
/// names.
#[derive(Debug, Clone)]
pub struct NwbaAlphabet {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Nwba {
    pub fn to_json(&self, names: &NwbaAlphabet) -> String {
        let render = |l: &Letter| LetterFile {
            input: names.inputs[l.input.0 as usize].clone(),
            output: names.outputs[l.output.0 as usize].clone(),
        };
        let file = NwbaFile {
            letters: self.alphabet.iter().map(render).collect(),
            states: self.states.clone(),
            initial: self.initial.iter().map(|&q| self.states[q].clone()).collect(),
            accepting: self.accepting.iter().map(|&q| self.states[q].clone()).collect(),
            hier: self.hier.clone(),
            hier_initial: self.hier_initial.iter().map(|&p| self.hier[p].clone()).collect(),
            hier_final: self.hier_final.iter().map(|&p| self.hier[p].clone()).collect(),
            delta_call: self
                .delta_call
                .iter()
                .map(|&(q, l, q2, p)| {
                    (self.states[q].clone(), render(&l), self.states[q2].clone(), self.hier[p].clone())
                })
                .collect(),
            delta_int: self
                .delta_int
                .iter()
                .map(|&(q, l, q2)| (self.states[q].clone(), render(&l), self.states[q2].clone()))
                .collect(),
            delta_ret: self
                .delta_ret
                .iter()
                .map(|&(q, p, l, q2)| {
                    (self.states[q].clone(), self.hier[p].clone(), render(&l), self.states[q2].clone())
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// Parses an automaton file; symbol names are resolved against (and
    /// extend) the returned alphabet name lists.
    pub fn from_json(text: &str) -> Result<(Nwba, NwbaAlphabet), NwbaError> {
        let file: NwbaFile =
            serde_json::from_str(text).map_err(|e| NwbaError::Format(e.to_string()))?;
        let mut inputs: Vec<String> = Vec::new();
        let mut outputs: Vec<String> = Vec::new();
        let intern = |names: &mut Vec<String>, name: &str| -> Sym {
            match names.iter().position(|n| n == name) {
                Some(i) => Sym(i as u16),
                None => {
                    names.push(name.to_string());
                    Sym((names.len() - 1) as u16)
                }
            }
        };
        let mut letter_of = |lf: &LetterFile| -> Letter {
            let i = intern(&mut inputs, &lf.input);
            let o = intern(&mut outputs, &lf.output);
            Letter::new(i, o)
        };
        let alphabet: Vec<Letter> = file.letters.iter().map(&mut letter_of).collect();
        let state_id = |name: &str| -> Result<usize, NwbaError> {
            file.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| NwbaError::Format(format!("field states: unknown state '{}'", name)))
        };
        let hier_id = |name: &str| -> Result<usize, NwbaError> {
            file.hier.iter().position(|s| s == name).ok_or_else(|| {
                NwbaError::Format(format!("field hier: unknown hierarchical symbol '{}'", name))
            })
        };
        let initial =
            file.initial.iter().map(|s| state_id(s)).collect::<Result<BTreeSet<_>, _>>()?;
        let accepting =
            file.accepting.iter().map(|s| state_id(s)).collect::<Result<BTreeSet<_>, _>>()?;
        let hier_initial =
            file.hier_initial.iter().map(|s| hier_id(s)).collect::<Result<BTreeSet<_>, _>>()?;
        let hier_final =
            file.hier_final.iter().map(|s| hier_id(s)).collect::<Result<BTreeSet<_>, _>>()?;
        let mut delta_call = Vec::new();
        for (q, l, q2, p) in &file.delta_call {
            delta_call.push((state_id(q)?, letter_of(l), state_id(q2)?, hier_id(p)?));
        }
        let mut delta_int = Vec::new();
        for (q, l, q2) in &file.delta_int {
            delta_int.push((state_id(q)?, letter_of(l), state_id(q2)?));
        }
        let mut delta_ret = Vec::new();
        for (q, p, l, q2) in &file.delta_ret {
            delta_ret.push((state_id(q)?, hier_id(p)?, letter_of(l), state_id(q2)?));
        }
        let a = Nwba {
            alphabet,
            states: file.states,
            initial,
            accepting,
            hier: file.hier,
            hier_initial,
            hier_final,
            delta_call,
            delta_int,
            delta_ret,
        };
        let check = check_automaton(&a);
        if let Some(d) = check.defects.first() {
            return Err(NwbaError::Format(d.clone()));
        }
        Ok((a, NwbaAlphabet { inputs, outputs }))
    }
}
