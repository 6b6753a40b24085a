//! The alternating Büchi tree automaton over composition trees.
//!
//! Given a library and an NWBA, the automaton accepts exactly the
//! composition trees that admit a computation in the automaton's
//! language. Call-check states verify a computation segment entering a
//! component and leaving through a designated return state; pending-check
//! states verify a non-returning suffix, which takes one of three forms:
//! an infinite internal tail (an edge to ⊥ in the configuration graph),
//! a further pending call (descending forever), or a lasso of
//! configurations whose cycle contains an accepting edge. The root state
//! additionally covers maximal finite computations, where the root
//! component itself returns and the final state must be accepting.
//!
//! Because the letter at a frame boundary combines the caller's input
//! with the callee's label, the NWBA call transition is applied inside
//! the child check (the state carries the caller's chosen input), and
//! the return transition likewise (the state carries the caller's
//! re-entry output). Pending calls keep the paper's requirement that
//! their pushed symbol be final.
//!
//! Transition formulas are never materialized as trees: a transition is
//! a set of minimal models, each a conjunction of (direction, state)
//! atoms derived from the call edges of a guessed path.

use crate::nested_word::{Letter, Sym};
use crate::nwba::{Nwba, NwbaIndex};
use crate::rlc::{LabeledTree, Library};
use crate::summary_graph::{build_graph, extract, extract_rho, Config, ConfigGraph, Extraction, Model};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// A state of the tree automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbtState {
    /// Initial wrapper: the root component was never called.
    Root,
    /// Verifies a computation segment that enters the component (called
    /// with input `sigma` while the word automaton is in `q`) and first
    /// returns through return state `ret_idx`, with the caller resuming
    /// on output `out` and the automaton reaching `q2`. With `b`, the
    /// segment must pass an accepting state.
    CallCheck { q: usize, sigma: Sym, q2: usize, ret_idx: usize, out: Sym, b: bool },
    /// Verifies a non-returning suffix entered with input `sigma` in
    /// state `q`; with `b`, the component-local part must pass an
    /// accepting state.
    PendingCheck { q: usize, sigma: Sym, b: bool },
}

/// One conjunct of a transition model.
pub type TransAtom = (usize, AbtState);
/// A minimal model: all atoms must be satisfied at the child directions.
pub type TransModel = BTreeSet<TransAtom>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AbtError {
    #[error("tree too shallow to decide the check")]
    DepthExhausted,
}

pub struct Abt {
    pub lib: Library,
    pub aut: Nwba,
    pub graphs: Vec<ConfigGraph>,
    /// Reachable states; index 0 is Root.
    pub states: Vec<AbtState>,
    pub accepting: BTreeSet<usize>,
    state_ids: HashMap<AbtState, usize>,
    aut_index: NwbaIndex,
    cache: Mutex<AbtCache>,
}

/// Memoized intermediates; transitions are pure functions of the inputs,
/// so the cache only avoids recomputation.
#[derive(Default)]
struct AbtCache {
    exts: HashMap<(usize, usize), Arc<Extraction>>,
    rhos: HashMap<(usize, usize), Arc<(Vec<Model>, bool)>>,
    trans: HashMap<(AbtState, usize), Arc<Transitions>>,
}

/// The enumerated transition models plus a truncation flag: formulas are
/// exponential in the worst case, so extraction may stop after the
/// smallest models. A truncated transition under-approximates the
/// automaton; the solver folds this into its verdict.
#[derive(Debug, Clone, Default)]
pub struct Transitions {
    pub models: Vec<TransModel>,
    pub truncated: bool,
}

impl std::fmt::Debug for Abt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Abt")
            .field("states", &self.states.len())
            .field("accepting", &self.accepting.len())
            .finish()
    }
}

impl Abt {
    pub fn state_id(&self, s: &AbtState) -> Option<usize> {
        self.state_ids.get(s).copied()
    }

    /// Text summary: state counts per variant and satisfiable-transition
    /// counts per component.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut root = 0usize;
        let mut call = 0usize;
        let mut pend = 0usize;
        for s in &self.states {
            match s {
                AbtState::Root => root += 1,
                AbtState::CallCheck { .. } => call += 1,
                AbtState::PendingCheck { .. } => pend += 1,
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "tree automaton: {} states ({} root, {} call-check, {} pending-check), {} accepting",
            self.states.len(),
            root,
            call,
            pend,
            self.accepting.len()
        );
        for (ci, c) in self.lib.components.iter().enumerate() {
            let sat = self
                .states
                .iter()
                .filter(|s| !self.transitions(s, ci).models.is_empty())
                .count();
            let _ = writeln!(
                out,
                "  component {}: {}/{} states with satisfiable transitions",
                c.name,
                sat,
                self.states.len()
            );
        }
        out
    }

    fn ext(&self, comp: usize, source: usize) -> Arc<Extraction> {
        let mut cache = self.cache.lock().unwrap();
        if let Some(p) = cache.exts.get(&(comp, source)) {
            return p.clone();
        }
        let p = Arc::new(extract(&self.graphs[comp], source));
        cache.exts.insert((comp, source), p.clone());
        p
    }

    fn rho(&self, comp: usize, source: usize) -> Arc<(Vec<Model>, bool)> {
        let mut cache = self.cache.lock().unwrap();
        if let Some(c) = cache.rhos.get(&(comp, source)) {
            return c.clone();
        }
        let c = Arc::new(extract_rho(&self.graphs[comp], source));
        cache.rhos.insert((comp, source), c.clone());
        c
    }

    /// The smallest minimal models of the transition formula for `state`
    /// when reading a node labeled by component `comp`, with a truncation
    /// flag. A pure function of the automaton and the library; memoized
    /// internally.
    pub fn transitions(&self, state: &AbtState, comp: usize) -> Arc<Transitions> {
        if let Some(m) = self.cache.lock().unwrap().trans.get(&(*state, comp)) {
            return m.clone();
        }
        let models = Arc::new(self.compute_transitions(state, comp));
        self.cache.lock().unwrap().trans.insert((*state, comp), models.clone());
        models
    }

    fn compute_transitions(&self, state: &AbtState, comp: usize) -> Transitions {
        let g = &self.graphs[comp];
        let c = &self.lib.components[comp];
        let idx = &self.aut_index;
        let mut truncated = false;
        let mut out: Vec<TransModel> = Vec::new();
        // An automaton with no accepting states has an empty language and
        // no accepting run can exist; every transition is false.
        if self.aut.accepting.is_empty() {
            return Transitions::default();
        }

        // Converts a configuration-graph model into transition atoms.
        let lower = |m: &Model| -> TransModel {
            m.iter()
                .map(|&(call_cfg, reentry_cfg, bit)| {
                    let (j, sigma, q) = match g.configs[call_cfg] {
                        Config::Call { j, sigma, q } => (j, sigma, q),
                        _ => unreachable!("call atom starts at a call configuration"),
                    };
                    let (mm, q2) = match g.configs[reentry_cfg] {
                        Config::Reentry { m, q } => (m, q),
                        _ => unreachable!("call atom ends at a re-entry configuration"),
                    };
                    let out_sym = c.label(c.reentry[mm]);
                    (j, AbtState::CallCheck { q, sigma, q2, ret_idx: mm, out: out_sym, b: bit })
                })
                .collect()
        };

        let mut add = |m: TransModel, out: &mut Vec<TransModel>| {
            if out.iter().any(|ex| ex.is_subset(&m)) {
                return;
            }
            out.retain(|ex| !m.is_subset(ex));
            out.push(m);
        };

        match *state {
            AbtState::CallCheck { q, sigma, q2, ret_idx, out: out_sym, b } => {
                let b_after_exit = b && !self.aut.accepting.contains(&q2);
                let entry_letter = Letter::new(sigma, c.label(c.initial));
                for &(q1, p) in idx.call.get(&(q, entry_letter)).into_iter().flatten() {
                    let eff_b = b_after_exit && !self.aut.accepting.contains(&q1);
                    let entry = g.id_of(&Config::Entry { q: q1 });
                    let ext = self.ext(comp, entry);
                    truncated |= ext.truncated;
                    for sigma2 in 0..g.n_inputs {
                        let exit_letter = Letter::new(Sym(sigma2 as u16), out_sym);
                        for q_exit in 0..g.n_q {
                            let has_ret = idx
                                .ret
                                .get(&(q_exit, p, exit_letter))
                                .map_or(false, |v| v.contains(&q2));
                            if !has_ret {
                                continue;
                            }
                            let exit = g.id_of(&Config::Exit {
                                i: ret_idx,
                                sigma: Sym(sigma2 as u16),
                                q: q_exit,
                            });
                            for m in ext.models(exit, eff_b) {
                                add(lower(m), &mut out);
                            }
                        }
                    }
                }
            }
            AbtState::PendingCheck { q, sigma, b } => {
                let entry_letter = Letter::new(sigma, c.label(c.initial));
                for &(q1, p) in idx.call.get(&(q, entry_letter)).into_iter().flatten() {
                    if !self.aut.hier_final.contains(&p) {
                        continue;
                    }
                    let eff_b = b && !self.aut.accepting.contains(&q1);
                    let entry = g.id_of(&Config::Entry { q: q1 });
                    truncated |= self.pending_body(comp, entry, eff_b, &lower, &mut add, &mut out);
                }
            }
            AbtState::Root => {
                for &q0 in &self.aut.initial {
                    let entry = g.id_of(&Config::Entry { q: q0 });
                    // Non-returning computations from the uncalled root.
                    truncated |= self.pending_body(comp, entry, false, &lower, &mut add, &mut out);
                    // Maximal finite computations: the root returns, the
                    // final state is accepting, an initial symbol is
                    // popped at the unmatched return.
                    let ext = self.ext(comp, entry);
                    truncated |= ext.truncated;
                    for i in 0..g.n_r {
                        let out_sym = c.label(c.returns[i]);
                        for sigma2 in 0..g.n_inputs {
                            let exit_letter = Letter::new(Sym(sigma2 as u16), out_sym);
                            for q_exit in 0..g.n_q {
                                let accepted = self.aut.hier_initial.iter().any(|&p0| {
                                    idx.ret
                                        .get(&(q_exit, p0, exit_letter))
                                        .into_iter()
                                        .flatten()
                                        .any(|q3| self.aut.accepting.contains(q3))
                                });
                                if !accepted {
                                    continue;
                                }
                                let exit = g.id_of(&Config::Exit {
                                    i,
                                    sigma: Sym(sigma2 as u16),
                                    q: q_exit,
                                });
                                for m in ext.models(exit, false) {
                                    add(lower(m), &mut out);
                                }
                            }
                        }
                    }
                }
            }
        }
        Transitions { models: out, truncated }
    }

    /// The three non-returning cases from an entry configuration: an
    /// infinite internal tail, a further pending call (with the
    /// accepting-visit requirement threaded when `eff_b`), or a
    /// configuration lasso with an accepting edge on the cycle.
    fn pending_body(
        &self,
        comp: usize,
        entry: usize,
        eff_b: bool,
        lower: &dyn Fn(&Model) -> TransModel,
        add: &mut dyn FnMut(TransModel, &mut Vec<TransModel>),
        out: &mut Vec<TransModel>,
    ) -> bool {
        let g = &self.graphs[comp];
        let ext = self.ext(comp, entry);
        let mut truncated = ext.truncated;
        // Infinite internal tail: the accepting requirement is met by the
        // tail itself, whatever eff_b is.
        for (v, has) in g.bottom.iter().enumerate() {
            if *has {
                for m in ext.models(v, false) {
                    add(lower(m), out);
                }
            }
        }
        // Descend through another pending call.
        for j in 0..g.n_c {
            for sigma2 in 0..g.n_inputs {
                for q2 in 0..g.n_q {
                    let call_cfg =
                        g.id_of(&Config::Call { j, sigma: Sym(sigma2 as u16), q: q2 });
                    for m in ext.models(call_cfg, eff_b) {
                        for b2 in [false, true] {
                            let mut model = lower(m);
                            model.insert((
                                j,
                                AbtState::PendingCheck {
                                    q: q2,
                                    sigma: Sym(sigma2 as u16),
                                    b: b2,
                                },
                            ));
                            add(model, out);
                        }
                    }
                }
            }
        }
        // Configuration lasso; the marked edge on the cycle supplies the
        // accepting visits of the infinite repetition.
        let rho = self.rho(comp, entry);
        truncated |= rho.1;
        for m in rho.0.iter() {
            add(lower(m), out);
        }
        truncated
    }
}

/// Builds the tree automaton for `lib` against `aut`: configuration
/// graphs per component, then the reachable state set from the root.
pub fn build_abt(lib: &Library, aut: &Nwba) -> Abt {
    let graphs = lib
        .components
        .iter()
        .map(|c| build_graph(c, aut, lib.alphabet.inputs.len()))
        .collect();
    let aut_index = aut.index();
    let mut abt = Abt {
        lib: lib.clone(),
        aut: aut.clone(),
        graphs,
        states: vec![AbtState::Root],
        accepting: BTreeSet::new(),
        state_ids: [(AbtState::Root, 0)].into_iter().collect(),
        aut_index,
        cache: Mutex::new(AbtCache::default()),
    };
    let mut queue: VecDeque<usize> = [0].into();
    while let Some(sid) = queue.pop_front() {
        let state = abt.states[sid];
        for comp in 0..abt.lib.components.len() {
            let models = abt.transitions(&state, comp);
            for model in models.models.iter() {
                for &(_, child) in model {
                    if !abt.state_ids.contains_key(&child) {
                        let id = abt.states.len();
                        abt.states.push(child);
                        abt.state_ids.insert(child, id);
                        queue.push_back(id);
                    }
                }
            }
        }
    }
    abt.accepting = abt
        .states
        .iter()
        .enumerate()
        .filter_map(|(i, s)| matches!(s, AbtState::PendingCheck { b: true, .. }).then_some(i))
        .collect();
    abt
}

/// Existentially evaluates the positive transition formulas on a finite
/// labeled tree, reporting depth exhaustion distinctly from falsity.
pub fn run_finite_check(abt: &Abt, tree: &LabeledTree, state: &AbtState) -> Result<bool, AbtError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Tri {
        True,
        False,
        Unknown,
    }
    fn go(abt: &Abt, node: &LabeledTree, state: &AbtState) -> Tri {
        let models = abt.transitions(state, node.label);
        let mut any_unknown = false;
        'model: for model in models.models.iter() {
            if model.is_empty() {
                return Tri::True;
            }
            let mut model_unknown = false;
            for (dir, child_state) in model {
                match node.children.get(*dir) {
                    None => {
                        model_unknown = true;
                    }
                    Some(child) => match go(abt, child, child_state) {
                        Tri::False => {
                            continue 'model;
                        }
                        Tri::Unknown => model_unknown = true,
                        Tri::True => {}
                    },
                }
            }
            if model_unknown {
                any_unknown = true;
            } else {
                return Tri::True;
            }
        }
        if any_unknown {
            Tri::Unknown
        } else {
            Tri::False
        }
    }
    match go(abt, tree, state) {
        Tri::True => Ok(true),
        Tri::False => Ok(false),
        Tri::Unknown => Err(AbtError::DepthExhausted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::nested_word::{build_nested_word, Alphabet, Tag};
    use crate::nwba::{accepts_finite, translate_nwtl};
    use crate::nwtl::parse;
    use crate::rlc::{composition_tree, simulate, Composition, Element};

    fn ab() -> Alphabet {
        Alphabet::new(["a"], ["x", "y"])
    }

    #[test]
    fn loop_tree_accepted_via_infinite_tail() {
        // The only computation of the LOOP fixture outputs x forever; an
        // automaton for "globally x" accepts it, so the tree automaton
        // accepts the one-element composition tree via the ⊥ case.
        let lib = fixtures::lib_loop_x();
        let phi = parse("Gs out:x", &ab()).unwrap();
        let aut = translate_nwtl(&phi, &ab());
        let abt = build_abt(&lib, &aut);
        let models = abt.transitions(&AbtState::Root, 0);
        assert!(
            models.models.iter().any(|m| m.is_empty()),
            "expected an unconditional model via the infinite internal tail"
        );
    }

    #[test]
    fn empty_acceptance_makes_all_transitions_false() {
        let lib = fixtures::lib_mixed();
        let mut aut = Nwba::universal(ab().letters());
        aut.accepting.clear();
        aut.hier_final.clear();
        let abt = build_abt(&lib, &aut);
        for (ci, _) in lib.components.iter().enumerate() {
            for state in &abt.states {
                assert!(abt.transitions(state, ci).models.is_empty());
            }
        }
    }

    #[test]
    fn state_count_respects_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        let lib = fixtures::lib_mixed();
        let letters = ab().letters();
        for _ in 0..10 {
            let nq = rng.gen_range(2..=4);
            let mut aut = Nwba {
                alphabet: letters.clone(),
                states: (0..nq).map(|i| format!("q{}", i)).collect(),
                initial: [0].into(),
                accepting: (0..nq).filter(|_| rng.gen_bool(0.5)).collect(),
                hier: vec!["p0".into(), "p1".into()],
                hier_initial: [0].into(),
                hier_final: [1].into(),
                delta_call: Vec::new(),
                delta_int: Vec::new(),
                delta_ret: Vec::new(),
            };
            for _ in 0..12 {
                aut.delta_int.push((
                    rng.gen_range(0..nq),
                    letters[rng.gen_range(0..letters.len())],
                    rng.gen_range(0..nq),
                ));
                aut.delta_call.push((
                    rng.gen_range(0..nq),
                    letters[rng.gen_range(0..letters.len())],
                    rng.gen_range(0..nq),
                    rng.gen_range(0..2),
                ));
                aut.delta_ret.push((
                    rng.gen_range(0..nq),
                    rng.gen_range(0..2),
                    letters[rng.gen_range(0..letters.len())],
                    rng.gen_range(0..nq),
                ));
            }
            let abt = build_abt(&lib, &aut);
            let n_r = lib.n_r;
            let s_i = lib.alphabet.inputs.len();
            let s_o = lib.alphabet.outputs.len();
            let bound = 1 + 2 * nq * nq * n_r * s_i * s_o + 2 * nq * s_i;
            assert!(
                abt.states.len() <= bound,
                "{} states exceeds bound {}",
                abt.states.len(),
                bound
            );
        }
    }

    #[test]
    fn accepting_set_is_exactly_pending_b1() {
        let lib = fixtures::lib_mixed();
        let phi = parse("out:y | call", &ab()).unwrap();
        let aut = translate_nwtl(&phi, &ab());
        let abt = build_abt(&lib, &aut);
        for (i, s) in abt.states.iter().enumerate() {
            assert_eq!(
                abt.accepting.contains(&i),
                matches!(s, AbtState::PendingCheck { b: true, .. })
            );
        }
    }

    #[test]
    fn finite_check_on_callee_tree() {
        // A universal automaton: the CALLEE component returns through its
        // first return state on one input, so the call check holds.
        let lib = fixtures::lib_caller_callee();
        let aut = Nwba::universal(ab().letters());
        let abt = build_abt(&lib, &aut);
        let tree = LabeledTree { label: 1, children: vec![] };
        let state = AbtState::CallCheck {
            q: 0,
            sigma: Sym(0),
            q2: 0,
            ret_idx: 0,
            out: fixtures::OUT_X,
            b: false,
        };
        assert_eq!(run_finite_check(&abt, &tree, &state), Ok(true));

        // With no transitions at all the check fails on any tree.
        let mut dead = Nwba::universal(ab().letters());
        dead.delta_call.clear();
        dead.delta_int.clear();
        dead.delta_ret.clear();
        let abt_dead = build_abt(&lib, &dead);
        assert_eq!(run_finite_check(&abt_dead, &tree, &state), Ok(false));

        // b = 1 with an empty accepting set can never hold.
        let mut no_acc = Nwba::universal(ab().letters());
        no_acc.accepting.clear();
        let abt_no_acc = build_abt(&lib, &no_acc);
        let state_b = AbtState::CallCheck {
            q: 0,
            sigma: Sym(0),
            q2: 0,
            ret_idx: 0,
            out: fixtures::OUT_X,
            b: true,
        };
        assert_eq!(run_finite_check(&abt_no_acc, &tree, &state_b), Ok(false));
    }

    /// Brute-force oracle for the call-check equivalence: enumerate input
    /// words, simulate the composition with the call-check's boundary
    /// letters, and search for an automaton run over the induced segment.
    fn brute_call_check(
        lib: &Library,
        comp: &Composition,
        aut: &Nwba,
        q: usize,
        sigma: Sym,
        q2: usize,
        ret_idx: usize,
        out: Sym,
        need_acc: bool,
        max_len: usize,
    ) -> bool {
        let root = &lib.components[comp.elements[0].component];
        // Enumerate body input words; the first position is the call with
        // input sigma, the last the return with the caller's output.
        let n_inputs = lib.alphabet.inputs.len() as u16;
        let mut stack: Vec<Vec<Sym>> = vec![Vec::new()];
        while let Some(body) = stack.pop() {
            // Simulate: enter the root component as a callee.
            let mut state = crate::rlc::StackState { frames: vec![0], top_state: root.initial };
            let mut tagged = vec![(Letter::new(sigma, root.label(root.initial)), Tag::Call)];
            let mut ok = true;
            let mut returned = None;
            for (k, &sym) in body.iter().enumerate() {
                let elem = state.top_element();
                let c = &lib.components[comp.elements[elem].component];
                let target = c.step_state(state.top_state, sym);
                if let Some(j) = c.is_call_state(target) {
                    let callee = comp.elements[elem].interface[j];
                    let cc = &lib.components[comp.elements[callee].component];
                    state.frames.push(callee);
                    state.top_state = cc.initial;
                    tagged.push((Letter::new(sym, cc.label(cc.initial)), Tag::Call));
                } else if let Some(i) = c.is_return_state(target) {
                    if state.frames.len() == 1 {
                        // Root frame of the checked segment returns.
                        if i == ret_idx && k == body.len() - 1 {
                            tagged.push((Letter::new(sym, out), Tag::Ret));
                            returned = Some(());
                        } else {
                            ok = false;
                        }
                        break;
                    }
                    state.frames.pop();
                    let caller_elem = *state.frames.last().unwrap();
                    let caller = &lib.components[comp.elements[caller_elem].component];
                    state.top_state = caller.reentry[i];
                    tagged.push((Letter::new(sym, caller.label(caller.reentry[i])), Tag::Ret));
                } else {
                    state.top_state = target;
                    tagged.push((Letter::new(sym, c.label(target)), Tag::Int));
                }
            }
            if ok && returned.is_some() {
                let w = build_nested_word(&tagged);
                if segment_run_exists(aut, &w, q, q2, need_acc) {
                    return true;
                }
            }
            if returned.is_none() && ok && body.len() < max_len {
                for s in 0..n_inputs {
                    let mut next = body.clone();
                    next.push(Sym(s));
                    stack.push(next);
                }
            }
        }
        false
    }

    /// Searches for a run of the automaton over a balanced segment that
    /// starts with the call (pushing p), ends with the matched return
    /// (popping p), begins in `q` and ends in `q_end`.
    fn segment_run_exists(
        aut: &Nwba,
        w: &crate::nested_word::NestedWord,
        q: usize,
        q_end: usize,
        need_acc: bool,
    ) -> bool {
        let idx = aut.index();
        let mut failed: std::collections::HashSet<(usize, usize, Vec<usize>, bool)> =
            std::collections::HashSet::new();
        fn go(
            aut: &Nwba,
            idx: &crate::nwba::NwbaIndex,
            w: &crate::nested_word::NestedWord,
            pos: usize,
            q: usize,
            stack: &mut Vec<usize>,
            seen: bool,
            q_end: usize,
            need_acc: bool,
            failed: &mut std::collections::HashSet<(usize, usize, Vec<usize>, bool)>,
        ) -> bool {
            if pos > w.len() {
                return stack.is_empty() && q == q_end && (!need_acc || seen);
            }
            let key = (pos, q, stack.clone(), seen);
            if failed.contains(&key) {
                return false;
            }
            let l = w.letter(pos);
            let ok = match w.tag(pos) {
                Tag::Call => {
                    let succs = idx.call.get(&(q, l)).cloned().unwrap_or_default();
                    succs.into_iter().any(|(q2, p)| {
                        stack.push(p);
                        let r = go(aut, idx, w, pos + 1, q2, stack, seen || aut.accepting.contains(&q2), q_end, need_acc, failed);
                        stack.pop();
                        r
                    })
                }
                Tag::Int => {
                    let succs = idx.int.get(&(q, l)).cloned().unwrap_or_default();
                    succs.into_iter().any(|q2| {
                        go(aut, idx, w, pos + 1, q2, stack, seen || aut.accepting.contains(&q2), q_end, need_acc, failed)
                    })
                }
                Tag::Ret => match stack.pop() {
                    Some(p) => {
                        let succs = idx.ret.get(&(q, p, l)).cloned().unwrap_or_default();
                        let r = succs.into_iter().any(|q2| {
                            go(aut, idx, w, pos + 1, q2, stack, seen || aut.accepting.contains(&q2), q_end, need_acc, failed)
                        });
                        stack.push(p);
                        r
                    }
                    None => false,
                },
            };
            if !ok {
                failed.insert(key);
            }
            ok
        }
        go(aut, &idx, w, 1, q, &mut Vec::new(), false, q_end, need_acc, &mut failed)
    }

    #[test]
    fn call_check_matches_brute_force_on_fixtures() {
        let lib = fixtures::lib_caller_callee();
        let phis = ["Gs out:x", "Fs ret", "out:x Us out:y"];
        let comps = [
            fixtures::caller_callee_composition(&lib),
            Composition {
                elements: vec![
                    Element { component: 1, interface: vec![0] },
                    Element { component: 0, interface: vec![1] },
                ],
            },
        ];
        for text in phis {
            let phi = parse(text, &ab()).unwrap();
            let aut = translate_nwtl(&phi, &ab());
            let abt = build_abt(&lib, &aut);
            for comp in &comps {
                let tree = composition_tree(comp, &lib, 6);
                for q in 0..aut.states.len().min(6) {
                    for q2 in 0..aut.states.len().min(6) {
                        for b in [false, true] {
                            let state = AbtState::CallCheck {
                                q,
                                sigma: Sym(0),
                                q2,
                                ret_idx: 0,
                                out: fixtures::OUT_X,
                                b,
                            };
                            let got = match run_finite_check(&abt, &tree, &state) {
                                Ok(v) => v,
                                Err(_) => continue,
                            };
                            let brute = brute_call_check(
                                &lib,
                                comp,
                                &aut,
                                q,
                                Sym(0),
                                q2,
                                0,
                                fixtures::OUT_X,
                                b,
                                8,
                            );
                            assert_eq!(
                                got, brute,
                                "mismatch for {:?} on {} (composition {:?})",
                                state, text, comp
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn adding_transitions_keeps_transitions_satisfiable() {
        let lib = fixtures::lib_caller_callee();
        let mut aut = Nwba::universal(ab().letters());
        aut.delta_int.pop();
        let bigger = Nwba::universal(ab().letters());
        let abt_small = build_abt(&lib, &aut);
        let abt_big = build_abt(&lib, &bigger);
        for state in &abt_small.states {
            for ci in 0..lib.components.len() {
                if !abt_small.transitions(state, ci).models.is_empty() {
                    assert!(!abt_big.transitions(state, ci).models.is_empty());
                }
            }
        }
        let _ = simulate(&fixtures::caller_callee_composition(&lib), &lib, &[Sym(0)]);
    }
}
