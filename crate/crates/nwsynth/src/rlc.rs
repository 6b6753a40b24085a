//! Recursive library components and their compositions.
//!
//! A component is a total finite transducer with designated call, return
//! and re-entry states. A composition wires component instances together
//! through interface functions; it induces a possibly infinite-state
//! transducer whose stack records the element indices of active frames.
//! The induced transducer never occupies call or return states: entering
//! a call state pushes the callee frame and enters its initial state,
//! entering the j-th return state pops and enters the caller's j-th
//! re-entry state. The output of a call position is therefore the
//! callee's initial-state label and the output of a return position is
//! the caller's re-entry label (the root's own return label for the final
//! unmatched return).

use crate::nested_word::{build_nested_word, Alphabet, Letter, NestedWord, Sym, Tag};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Index of a state within one component.
pub type StateIdx = usize;

/// A finite transducer with call, return and re-entry states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlcComponent {
    pub name: String,
    pub state_names: Vec<String>,
    pub initial: StateIdx,
    /// j-th entry: the state entered when a callee returns via its j-th
    /// return state.
    pub reentry: Vec<StateIdx>,
    /// j-th entry: entering this state calls interface target j.
    pub calls: Vec<StateIdx>,
    /// j-th entry: entering this state returns to the caller's j-th
    /// re-entry state.
    pub returns: Vec<StateIdx>,
    /// delta[state][input] — total.
    pub delta: Vec<Vec<StateIdx>>,
    /// labels[state] — output symbol.
    pub labels: Vec<Sym>,
}

impl RlcComponent {
    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn is_call_state(&self, s: StateIdx) -> Option<usize> {
        self.calls.iter().position(|&c| c == s)
    }

    pub fn is_return_state(&self, s: StateIdx) -> Option<usize> {
        self.returns.iter().position(|&r| r == s)
    }

    pub fn is_exit_state(&self, s: StateIdx) -> bool {
        self.calls.contains(&s) || self.returns.contains(&s)
    }

    pub fn step_state(&self, s: StateIdx, input: Sym) -> StateIdx {
        self.delta[s][input.0 as usize]
    }

    pub fn label(&self, s: StateIdx) -> Sym {
        self.labels[s]
    }
}

/// A library: shared alphabets, shared arities, at least one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    pub alphabet: Alphabet,
    pub n_c: usize,
    pub n_r: usize,
    pub components: Vec<RlcComponent>,
}

impl Library {
    pub fn component_named(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }
}

/// One element of a composition: a component instance plus its interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// Index into the library's component list.
    pub component: usize,
    /// interface[j] = 0-based element index called from the j-th call state.
    pub interface: Vec<usize>,
}

/// A finite composition; element 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Composition {
    pub elements: Vec<Element>,
}

/// State of the induced transducer: the stack of active element indices
/// plus the component state of the top frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackState {
    pub frames: Vec<usize>,
    pub top_state: StateIdx,
}

impl StackState {
    pub fn initial(comp: &Composition, lib: &Library) -> StackState {
        let root = &lib.components[comp.elements[0].component];
        StackState { frames: vec![0], top_state: root.initial }
    }

    pub fn top_element(&self) -> usize {
        *self.frames.last().expect("stack is never empty")
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RlcError {
    #[error("step on a terminated computation")]
    Terminated,
    #[error("model file: {0}")]
    Format(String),
}

/// A structural defect found by validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect(pub String);

/// Checks a library's structural invariants; returns all defects found.
pub fn validate_library(lib: &Library) -> Vec<Defect> {
    let mut defects = Vec::new();
    if lib.components.is_empty() {
        defects.push(Defect("library has no components".into()));
    }
    for c in &lib.components {
        let n = c.n_states();
        let mut check_state = |s: StateIdx, what: &str| {
            if s >= n {
                defects.push(Defect(format!("{}: {} state {} out of range", c.name, what, s)));
            }
        };
        check_state(c.initial, "initial");
        for &s in &c.reentry {
            check_state(s, "re-entry");
        }
        for &s in &c.calls {
            check_state(s, "call");
        }
        for &s in &c.returns {
            check_state(s, "return");
        }
        if c.calls.len() != lib.n_c {
            defects.push(Defect(format!(
                "{}: call arity mismatch: {} call states, library requires {}",
                c.name,
                c.calls.len(),
                lib.n_c
            )));
        }
        if c.returns.len() != lib.n_r {
            defects.push(Defect(format!(
                "{}: return arity mismatch: {} return states, library requires {}",
                c.name,
                c.returns.len(),
                lib.n_r
            )));
        }
        if c.reentry.len() != lib.n_r {
            defects.push(Defect(format!(
                "{}: re-entry arity mismatch: {} re-entry states, library requires {}",
                c.name,
                c.reentry.len(),
                lib.n_r
            )));
        }
        if c.is_exit_state(c.initial) {
            defects.push(Defect(format!("{}: initial state is an exit state", c.name)));
        }
        for &s in &c.reentry {
            if s < n && c.is_exit_state(s) {
                defects.push(Defect(format!(
                    "{}: re-entry state {} is an exit state",
                    c.name, s
                )));
            }
        }
        if c.delta.len() != n {
            defects.push(Defect(format!("{}: delta not defined for every state", c.name)));
        }
        for (s, row) in c.delta.iter().enumerate() {
            if row.len() != lib.alphabet.inputs.len() {
                defects.push(Defect(format!(
                    "{}: delta row {} not total over the input alphabet",
                    c.name, s
                )));
            }
            for &t in row {
                if t >= n {
                    defects.push(Defect(format!(
                        "{}: delta target {} out of range from state {}",
                        c.name, t, s
                    )));
                }
            }
        }
        if c.labels.len() != n {
            defects.push(Defect(format!("{}: labels not defined for every state", c.name)));
        }
        for &l in &c.labels {
            if l.0 as usize >= lib.alphabet.outputs.len() {
                defects.push(Defect(format!("{}: label symbol {} out of range", c.name, l.0)));
            }
        }
    }
    defects
}

/// Checks a composition against its library.
pub fn validate_composition(comp: &Composition, lib: &Library) -> Vec<Defect> {
    let mut defects = Vec::new();
    if comp.elements.is_empty() {
        defects.push(Defect("composition has no elements".into()));
    }
    let k = comp.elements.len();
    for (idx, e) in comp.elements.iter().enumerate() {
        if e.component >= lib.components.len() {
            defects.push(Defect(format!("element {}: unknown component", idx + 1)));
        }
        if e.interface.len() != lib.n_c {
            defects.push(Defect(format!(
                "element {}: interface arity {} but library requires {}",
                idx + 1,
                e.interface.len(),
                lib.n_c
            )));
        }
        for (j, &t) in e.interface.iter().enumerate() {
            if t >= k {
                defects.push(Defect(format!(
                    "element {}: dangling interface target {} at call {}",
                    idx + 1,
                    t + 1,
                    j + 1
                )));
            }
        }
    }
    defects
}

/// One transition of the induced transducer.
pub fn step(
    comp: &Composition,
    lib: &Library,
    s: &StackState,
    input: Sym,
) -> Result<(StackState, Letter, Tag, bool), RlcError> {
    let elem = s.top_element();
    let c = &lib.components[comp.elements[elem].component];
    let target = c.step_state(s.top_state, input);
    if let Some(j) = c.is_call_state(target) {
        let callee_elem = comp.elements[elem].interface[j];
        let callee = &lib.components[comp.elements[callee_elem].component];
        let mut frames = s.frames.clone();
        frames.push(callee_elem);
        let out = callee.label(callee.initial);
        return Ok((
            StackState { frames, top_state: callee.initial },
            Letter::new(input, out),
            Tag::Call,
            false,
        ));
    }
    if let Some(j) = c.is_return_state(target) {
        if s.frames.len() >= 2 {
            let mut frames = s.frames.clone();
            frames.pop();
            let caller_elem = *frames.last().unwrap();
            let caller = &lib.components[comp.elements[caller_elem].component];
            let reentry = caller.reentry[j];
            let out = caller.label(reentry);
            return Ok((
                StackState { frames, top_state: reentry },
                Letter::new(input, out),
                Tag::Ret,
                false,
            ));
        }
        // Root frame returns: the computation terminates with an
        // unmatched return labeled by the root's own return state.
        let out = c.label(c.returns[j]);
        return Ok((
            StackState { frames: s.frames.clone(), top_state: target },
            Letter::new(input, out),
            Tag::Ret,
            true,
        ));
    }
    let out = c.label(target);
    Ok((
        StackState { frames: s.frames.clone(), top_state: target },
        Letter::new(input, out),
        Tag::Int,
        false,
    ))
}

/// Runs the composition on a finite input word, stopping early if the
/// root returns. Returns the induced nested word and the termination flag.
pub fn simulate(comp: &Composition, lib: &Library, input: &[Sym]) -> (NestedWord, bool) {
    let mut state = StackState::initial(comp, lib);
    let mut tagged: Vec<(Letter, Tag)> = Vec::with_capacity(input.len());
    let mut terminated = false;
    for &sym in input {
        let (next, letter, tag, done) = step(comp, lib, &state, sym).expect("not terminated");
        tagged.push((letter, tag));
        state = next;
        if done {
            terminated = true;
            break;
        }
    }
    (build_nested_word(&tagged), terminated)
}

/// A finite labeled tree over directions `[n_C]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    /// Index into the library's component list.
    pub label: usize,
    pub children: Vec<LabeledTree>,
}

/// Depth-`d` truncation of the composition tree: node `v·j` runs the
/// component of the element wired to call `j` of `v`'s element.
pub fn composition_tree(comp: &Composition, lib: &Library, depth: usize) -> LabeledTree {
    fn unfold(comp: &Composition, lib: &Library, elem: usize, depth: usize) -> LabeledTree {
        let label = comp.elements[elem].component;
        let children = if depth == 0 {
            Vec::new()
        } else {
            comp.elements[elem]
                .interface
                .iter()
                .map(|&target| unfold(comp, lib, target, depth - 1))
                .collect()
        };
        let _ = lib;
        LabeledTree { label, children }
    }
    unfold(comp, lib, 0, depth)
}

/// A deterministic tree transducer generating a regular composition tree:
/// state 0 is initial, `delta[q][j]` is the successor in direction `j`,
/// `labels[q]` is the component emitted at states reached by `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTransducer {
    pub labels: Vec<usize>,
    pub delta: Vec<Vec<usize>>,
}

impl TreeTransducer {
    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    /// Depth-`d` unfolding of the generated tree.
    pub fn unfold(&self, depth: usize) -> LabeledTree {
        fn go(t: &TreeTransducer, q: usize, depth: usize) -> LabeledTree {
            let children = if depth == 0 {
                Vec::new()
            } else {
                t.delta[q].iter().map(|&q2| go(t, q2, depth - 1)).collect()
            };
            LabeledTree { label: t.labels[q], children }
        }
        go(self, 0, depth)
    }
}

/// Merges behaviorally equivalent transducer states (same label, same
/// successor classes) by partition refinement; the generated tree is
/// unchanged.
pub fn minimize_transducer(t: &TreeTransducer) -> TreeTransducer {
    let n = t.n_states();
    let mut class: Vec<usize> = {
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        t.labels
            .iter()
            .map(|&l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect()
    };
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|q| {
                let sig = (class[q], t.delta[q].iter().map(|&q2| class[q2]).collect::<Vec<_>>());
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let stable = ids.len() == class.iter().collect::<std::collections::BTreeSet<_>>().len();
        class = next;
        if stable {
            break;
        }
    }
    // Renumber classes in breadth-first order from the initial state.
    let mut order: Vec<usize> = Vec::new(); // representative state per new id
    let mut new_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    new_id.insert(class[0], 0);
    order.push(0);
    queue.push_back(0usize);
    while let Some(q) = queue.pop_front() {
        for &q2 in &t.delta[q] {
            if !new_id.contains_key(&class[q2]) {
                new_id.insert(class[q2], order.len());
                order.push(q2);
                queue.push_back(q2);
            }
        }
    }
    TreeTransducer {
        labels: order.iter().map(|&q| t.labels[q]).collect(),
        delta: order
            .iter()
            .map(|&q| t.delta[q].iter().map(|&q2| new_id[&class[q2]]).collect())
            .collect(),
    }
}

/// Extracts the finite composition induced by a regular tree: one element
/// per transducer state reachable from the initial state, the interface
/// following the transducer's transitions.
pub fn composition_of_regular_tree(t: &TreeTransducer) -> Composition {
    let mut order: Vec<usize> = Vec::new();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    index.insert(0, 0);
    order.push(0);
    queue.push_back(0);
    while let Some(q) = queue.pop_front() {
        for &q2 in &t.delta[q] {
            if !index.contains_key(&q2) {
                index.insert(q2, order.len());
                order.push(q2);
                queue.push_back(q2);
            }
        }
    }
    let elements = order
        .iter()
        .map(|&q| Element {
            component: t.labels[q],
            interface: t.delta[q].iter().map(|q2| index[q2]).collect(),
        })
        .collect();
    Composition { elements }
}

// ---------------------------------------------------------------------------
// JSON file formats

#[derive(Debug, Serialize, Deserialize)]
struct ComponentFile {
    name: String,
    states: Vec<String>,
    initial: String,
    reentry: Vec<String>,
    calls: Vec<String>,
    returns: Vec<String>,
    delta: BTreeMap<String, BTreeMap<String, String>>,
    labels: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LibraryFile {
    sigma_in: Vec<String>,
    sigma_out: Vec<String>,
    n_c: usize,
    n_r: usize,
    components: Vec<ComponentFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ElementFile {
    component: String,
    interface: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CompositionFile {
    elements: Vec<ElementFile>,
}

impl Library {
    pub fn to_json(&self) -> String {
        let file = LibraryFile {
            sigma_in: self.alphabet.inputs.clone(),
            sigma_out: self.alphabet.outputs.clone(),
            n_c: self.n_c,
            n_r: self.n_r,
            components: self
                .components
                .iter()
                .map(|c| ComponentFile {
                    name: c.name.clone(),
                    states: c.state_names.clone(),
                    initial: c.state_names[c.initial].clone(),
                    reentry: c.reentry.iter().map(|&s| c.state_names[s].clone()).collect(),
                    calls: c.calls.iter().map(|&s| c.state_names[s].clone()).collect(),
                    returns: c.returns.iter().map(|&s| c.state_names[s].clone()).collect(),
                    delta: c
                        .state_names
                        .iter()
                        .enumerate()
                        .map(|(s, name)| {
                            (
                                name.clone(),
                                self.alphabet
                                    .inputs
                                    .iter()
                                    .enumerate()
                                    .map(|(a, an)| {
                                        (an.clone(), c.state_names[c.delta[s][a]].clone())
                                    })
                                    .collect(),
                            )
                        })
                        .collect(),
                    labels: c
                        .state_names
                        .iter()
                        .enumerate()
                        .map(|(s, name)| {
                            (name.clone(), self.alphabet.outputs[c.labels[s].0 as usize].clone())
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Library, RlcError> {
        let file: LibraryFile =
            serde_json::from_str(text).map_err(|e| RlcError::Format(e.to_string()))?;
        let alphabet = Alphabet { inputs: file.sigma_in, outputs: file.sigma_out };
        if alphabet.inputs.is_empty() {
            return Err(RlcError::Format("field sigma_in: must not be empty".into()));
        }
        if alphabet.outputs.is_empty() {
            return Err(RlcError::Format("field sigma_out: must not be empty".into()));
        }
        let mut components = Vec::new();
        for cf in file.components {
            let idx_of = |name: &str| -> Result<usize, RlcError> {
                cf.states.iter().position(|s| s == name).ok_or_else(|| {
                    RlcError::Format(format!(
                        "component {}: unknown state '{}'",
                        cf.name, name
                    ))
                })
            };
            let initial = idx_of(&cf.initial)?;
            let reentry =
                cf.reentry.iter().map(|s| idx_of(s)).collect::<Result<Vec<_>, _>>()?;
            let calls = cf.calls.iter().map(|s| idx_of(s)).collect::<Result<Vec<_>, _>>()?;
            let returns =
                cf.returns.iter().map(|s| idx_of(s)).collect::<Result<Vec<_>, _>>()?;
            let mut delta = Vec::with_capacity(cf.states.len());
            for s in &cf.states {
                let row_map = cf.delta.get(s).ok_or_else(|| {
                    RlcError::Format(format!(
                        "component {}: field delta missing state '{}'",
                        cf.name, s
                    ))
                })?;
                let mut row = Vec::with_capacity(alphabet.inputs.len());
                for a in &alphabet.inputs {
                    let target = row_map.get(a).ok_or_else(|| {
                        RlcError::Format(format!(
                            "component {}: field delta['{}'] missing input '{}'",
                            cf.name, s, a
                        ))
                    })?;
                    row.push(idx_of(target)?);
                }
                delta.push(row);
            }
            let mut labels = Vec::with_capacity(cf.states.len());
            for s in &cf.states {
                let out = cf.labels.get(s).ok_or_else(|| {
                    RlcError::Format(format!(
                        "component {}: field labels missing state '{}'",
                        cf.name, s
                    ))
                })?;
                let sym = alphabet.output_id(out).ok_or_else(|| {
                    RlcError::Format(format!(
                        "component {}: unknown output symbol '{}'",
                        cf.name, out
                    ))
                })?;
                labels.push(sym);
            }
            components.push(RlcComponent {
                name: cf.name,
                state_names: cf.states,
                initial,
                reentry,
                calls,
                returns,
                delta,
                labels,
            });
        }
        let lib = Library { alphabet, n_c: file.n_c, n_r: file.n_r, components };
        let defects = validate_library(&lib);
        if let Some(d) = defects.first() {
            return Err(RlcError::Format(d.0.clone()));
        }
        Ok(lib)
    }
}

impl Composition {
    /// Interface entries are serialized 1-based.
    pub fn to_json(&self, lib: &Library) -> String {
        let file = CompositionFile {
            elements: self
                .elements
                .iter()
                .map(|e| ElementFile {
                    component: lib.components[e.component].name.clone(),
                    interface: e.interface.iter().map(|&t| t + 1).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str, lib: &Library) -> Result<Composition, RlcError> {
        let file: CompositionFile =
            serde_json::from_str(text).map_err(|e| RlcError::Format(e.to_string()))?;
        let k = file.elements.len();
        let mut elements = Vec::with_capacity(k);
        for (idx, ef) in file.elements.iter().enumerate() {
            let component = lib.component_named(&ef.component).ok_or_else(|| {
                RlcError::Format(format!(
                    "element {}: unknown component '{}'",
                    idx + 1,
                    ef.component
                ))
            })?;
            let mut interface = Vec::with_capacity(ef.interface.len());
            for (j, &t) in ef.interface.iter().enumerate() {
                if t < 1 || t > k {
                    return Err(RlcError::Format(format!(
                        "element {}: interface target {} at call {} out of range 1..={}",
                        idx + 1,
                        t,
                        j + 1,
                        k
                    )));
                }
                interface.push(t - 1);
            }
            elements.push(Element { component, interface });
        }
        let comp = Composition { elements };
        let defects = validate_composition(&comp, lib);
        if let Some(d) = defects.first() {
            return Err(RlcError::Format(d.0.clone()));
        }
        Ok(comp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn validate_accepts_loop_fixture() {
        let lib = fixtures::lib_loop_x();
        assert!(validate_library(&lib).is_empty());
        let comp = fixtures::self_composition(0, &lib);
        assert!(validate_composition(&comp, &lib).is_empty());
    }

    #[test]
    fn validate_flags_dangling_interface() {
        let lib = fixtures::lib_loop_x();
        let comp = Composition {
            elements: vec![Element { component: 0, interface: vec![1] }],
        };
        let defects = validate_composition(&comp, &lib);
        assert!(defects.iter().any(|d| d.0.contains("dangling")));
    }

    #[test]
    fn validate_flags_call_arity_mismatch() {
        let mut lib = fixtures::lib_loop_x();
        lib.components[0].calls.clear();
        let defects = validate_library(&lib);
        assert!(defects.iter().any(|d| d.0.contains("call arity mismatch")));
    }

    #[test]
    fn loop_steps_stay_internal() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let s0 = StackState::initial(&comp, &lib);
        let (s1, letter, tag, done) = step(&comp, &lib, &s0, Sym(0)).unwrap();
        assert_eq!(tag, Tag::Int);
        assert!(!done);
        assert_eq!(s1.top_state, s0.top_state);
        assert_eq!(letter.output, Sym(0)); // label x
    }

    #[test]
    fn caller_callee_pushes_then_pops() {
        let lib = fixtures::lib_caller_callee();
        let comp = fixtures::caller_callee_composition(&lib);
        let s0 = StackState::initial(&comp, &lib);
        let (s1, _, tag1, _) = step(&comp, &lib, &s0, Sym(0)).unwrap();
        assert_eq!(tag1, Tag::Call);
        assert_eq!(s1.frames.len(), 2);
        let (s2, _, tag2, done2) = step(&comp, &lib, &s1, Sym(0)).unwrap();
        assert_eq!(tag2, Tag::Ret);
        assert!(!done2);
        assert_eq!(s2.frames.len(), 1);
        // Caller resumed at its first re-entry state.
        let caller = &lib.components[comp.elements[0].component];
        assert_eq!(s2.top_state, caller.reentry[0]);
        // Third step: the root returns and the computation terminates.
        let (_, _, tag3, done3) = step(&comp, &lib, &s2, Sym(0)).unwrap();
        assert_eq!(tag3, Tag::Ret);
        assert!(done3);
    }

    #[test]
    fn simulate_loop_is_all_internal() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let (w, terminated) = simulate(&comp, &lib, &[Sym(0); 4]);
        assert_eq!(w.len(), 4);
        assert!(!terminated);
        assert!(w.calls().is_empty());
        assert!((1..=4).all(|i| w.letter(i).output == Sym(0)));
    }

    #[test]
    fn simulate_caller_callee_matches_and_terminates() {
        let lib = fixtures::lib_caller_callee();
        let comp = fixtures::caller_callee_composition(&lib);
        let (w, terminated) = simulate(&comp, &lib, &[Sym(0); 3]);
        assert!(terminated);
        assert_eq!(w.len(), 3);
        assert_eq!(w.tag(1), Tag::Call);
        assert_eq!(w.tag(2), Tag::Ret);
        assert_eq!(w.tag(3), Tag::Ret);
        assert_eq!(w.matching_ret(1), Some(2));
        assert_eq!(w.matching_call(3), None);
    }

    #[test]
    fn simulate_empty_input() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let (w, terminated) = simulate(&comp, &lib, &[]);
        assert!(w.is_empty());
        assert!(!terminated);
    }

    #[test]
    fn composition_tree_of_self_loop() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let t = composition_tree(&comp, &lib, 2);
        assert_eq!(t.label, 0);
        assert_eq!(t.children.len(), 1);
        assert_eq!(t.children[0].label, 0);
        assert_eq!(t.children[0].children[0].label, 0);
    }

    #[test]
    fn composition_tree_caller_callee() {
        let lib = fixtures::lib_caller_callee();
        let comp = fixtures::caller_callee_composition(&lib);
        let t = composition_tree(&comp, &lib, 1);
        assert_eq!(t.label, 0);
        assert_eq!(t.children[0].label, 1);
    }

    #[test]
    fn composition_tree_alternates_on_cross_wiring() {
        let lib = fixtures::lib_caller_callee();
        let comp = Composition {
            elements: vec![
                Element { component: 0, interface: vec![1] },
                Element { component: 1, interface: vec![0] },
            ],
        };
        let t = composition_tree(&comp, &lib, 3);
        let mut labels = Vec::new();
        let mut node = &t;
        loop {
            labels.push(node.label);
            if node.children.is_empty() {
                break;
            }
            node = &node.children[0];
        }
        assert_eq!(labels, vec![0, 1, 0, 1]);
    }

    #[test]
    fn regular_tree_with_one_state_gives_self_composition() {
        let lib = fixtures::lib_loop_x();
        let t = TreeTransducer { labels: vec![0], delta: vec![vec![0]] };
        let comp = composition_of_regular_tree(&t);
        assert_eq!(comp, fixtures::self_composition(0, &lib));
    }

    #[test]
    fn regular_tree_unfolding_matches_composition_tree() {
        let lib = fixtures::lib_caller_callee();
        let t = TreeTransducer { labels: vec![0, 1], delta: vec![vec![1], vec![0]] };
        let comp = composition_of_regular_tree(&t);
        for d in 0..=4 {
            assert_eq!(composition_tree(&comp, &lib, d), t.unfold(d));
        }
    }

    #[test]
    fn regular_tree_unreachable_states_are_dropped() {
        let lib = fixtures::lib_caller_callee();
        // State 2 unreachable from 0.
        let t = TreeTransducer { labels: vec![0, 1, 0], delta: vec![vec![1], vec![1], vec![0]] };
        let comp = composition_of_regular_tree(&t);
        assert_eq!(comp.elements.len(), 2);
        let reachable = TreeTransducer { labels: vec![0, 1], delta: vec![vec![1], vec![1]] };
        let comp2 = composition_of_regular_tree(&reachable);
        for len in 0..=6 {
            let input = vec![Sym(0); len];
            assert_eq!(simulate(&comp, &lib, &input), simulate(&comp2, &lib, &input));
        }
    }

    #[test]
    fn simulation_respects_stack_discipline() {
        use crate::nested_word::validate_matching;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let lib = fixtures::lib_mixed();
        for _ in 0..100 {
            let k = rng.gen_range(1..4);
            let elements: Vec<Element> = (0..k)
                .map(|_| Element {
                    component: rng.gen_range(0..lib.components.len()),
                    interface: (0..lib.n_c).map(|_| rng.gen_range(0..k)).collect(),
                })
                .collect();
            let comp = Composition { elements };
            let len = rng.gen_range(0..10);
            let input: Vec<Sym> =
                (0..len).map(|_| Sym(rng.gen_range(0..lib.alphabet.inputs.len()) as u16)).collect();
            let (w, _) = simulate(&comp, &lib, &input);
            let mu = w.mu_pairs().collect();
            let check = validate_matching(w.len(), w.calls(), w.rets(), &mu).unwrap();
            assert_eq!(check, crate::nested_word::MatchingCheck::Valid);
            // Determinism.
            let (w2, t2) = simulate(&comp, &lib, &input);
            assert_eq!(w, w2);
            let _ = t2;
        }
    }

    #[test]
    fn library_json_round_trip() {
        let lib = fixtures::lib_caller_callee();
        let text = lib.to_json();
        let back = Library::from_json(&text).unwrap();
        assert_eq!(back, lib);
        let comp = fixtures::caller_callee_composition(&lib);
        let ctext = comp.to_json(&lib);
        let cback = Composition::from_json(&ctext, &lib).unwrap();
        assert_eq!(cback, comp);
    }

    #[test]
    fn composition_json_rejects_bad_targets() {
        let lib = fixtures::lib_loop_x();
        let bad = r#"{"elements":[{"component":"LOOPX","interface":[2]}]}"#;
        assert!(Composition::from_json(bad, &lib).is_err());
        let unknown = r#"{"elements":[{"component":"NOPE","interface":[1]}]}"#;
        assert!(Composition::from_json(unknown, &lib).is_err());
    }
}
