//! Independent verification of compositions against an NWBA.
//!
//! The checker decides whether any maximal computation of a composition
//! induces a word in the automaton's language. It saturates per-element
//! summary relations by mutual fixpoint (a summary describes one call
//! into an element: entry transition, inner run using nested summaries,
//! return transition, and whether an accepting state was passed), then
//! searches the four computation shapes: a maximal finite computation
//! ending with the root's return in an accepting state; an infinite
//! internal lasso inside one frame; a frame-local lasso using summary
//! edges with an accepting edge on its cycle; and an infinite descent
//! of pending calls whose cycle passes an accepting state and whose
//! pushed symbols are all final.
//!
//! This module shares only data types with the tree-automaton side: the
//! algorithms here are saturation-based, not path-enumeration-based, so
//! the two sides cross-validate each other.

use crate::nested_word::{Letter, Sym};
use crate::nwba::{Nwba, NwbaIndex};
use crate::rlc::{Composition, Element, Library};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

/// A node of the per-frame product walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductNode {
    pub element: usize,
    pub state: usize,
    pub q: usize,
    /// Whether the walk to this node passed an accepting state.
    pub seen_accepting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CexKind {
    Finite,
    InternalLasso,
    SummaryLasso,
    PendingDescent,
}

#[derive(Debug, Clone)]
pub enum CheckOutcome {
    Empty,
    Counterexample {
        kind: CexKind,
        /// Human-readable description; lassos are symbolic.
        sketch: String,
        /// For finite counterexamples: an input word that replays to an
        /// accepted nested word under simulation.
        input: Option<Vec<Sym>>,
    },
}

impl CheckOutcome {
    pub fn is_empty(&self) -> bool {
        matches!(self, CheckOutcome::Empty)
    }
}

#[derive(Debug, Clone)]
pub enum BruteOutcome {
    RealizableWitness(Composition),
    NoneUpTo(usize),
}

/// Key of a call summary: calling `element` with the automaton in `q` on
/// input `sigma`, returning through return index `ret_idx` while the
/// caller re-enters on output `out`.
type SummKey = (usize, usize, Sym, usize, Sym);
/// Per key: successor automaton states, each with the strongest flag seen
/// and a witness input word (call input through return input inclusive).
type SummVal = BTreeMap<usize, (bool, Vec<Sym>, Option<Vec<Sym>>)>;

/// Exit record of a frame walk: (return index, boundary input, state
/// before the boundary, flag) with witnesses.
type ExitKey = (usize, Sym, usize);

struct Saturation<'a> {
    lib: &'a Library,
    comp: &'a Composition,
    aut: &'a Nwba,
    idx: NwbaIndex,
    /// walk[(element, entry q)] -> reached nodes with first witnesses.
    walks: HashMap<(usize, usize), WalkResult>,
    summaries: BTreeMap<SummKey, SummVal>,
}

#[derive(Default, Clone)]
struct WalkResult {
    /// (state, q, seen) -> witness inputs to reach it.
    reach: BTreeMap<(usize, usize, bool), Vec<Sym>>,
    /// exits: (i, sigma, q2) -> (plain witness, accepting witness).
    exits: BTreeMap<ExitKey, (Vec<Sym>, Option<Vec<Sym>>)>,
    /// call boundaries: (call idx, sigma, q) -> witness.
    calls: BTreeMap<(usize, Sym, usize), Vec<Sym>>,
    /// call boundaries reached with the accepting flag set.
    calls_acc: BTreeMap<(usize, Sym, usize), Vec<Sym>>,
}

impl<'a> Saturation<'a> {
    fn new(lib: &'a Library, comp: &'a Composition, aut: &'a Nwba) -> Self {
        Saturation {
            lib,
            comp,
            aut,
            idx: aut.index(),
            walks: HashMap::new(),
            summaries: BTreeMap::new(),
        }
    }

    fn component(&self, element: usize) -> &crate::rlc::RlcComponent {
        &self.lib.components[self.comp.elements[element].component]
    }

    /// One frame-local walk from the element's initial state, using the
    /// current summary tables for nested calls.
    fn walk(&self, element: usize, q_entry: usize) -> WalkResult {
        let c = self.component(element);
        let n_inputs = self.lib.alphabet.inputs.len();
        let mut res = WalkResult::default();
        let mut queue: VecDeque<(usize, usize, bool)> = VecDeque::new();
        res.reach.insert((c.initial, q_entry, false), Vec::new());
        queue.push_back((c.initial, q_entry, false));
        while let Some((s, q, seen)) = queue.pop_front() {
            let prefix = res.reach[&(s, q, seen)].clone();
            for sigma in 0..n_inputs {
                let sym = Sym(sigma as u16);
                let s2 = c.step_state(s, sym);
                let mut witness = prefix.clone();
                witness.push(sym);
                if let Some(j) = c.is_call_state(s2) {
                    // Record the boundary, then cross it via summaries.
                    res.calls.entry((j, sym, q)).or_insert_with(|| witness.clone());
                    if seen {
                        res.calls_acc.entry((j, sym, q)).or_insert_with(|| witness.clone());
                    }
                    let callee = self.comp.elements[element].interface[j];
                    for m in 0..self.lib.n_r {
                        let reentry = c.reentry[m];
                        let out = c.label(reentry);
                        if let Some(val) = self.summaries.get(&(callee, q, sym, m, out)) {
                            for (&q2, (fl, w_plain, w_acc)) in val {
                                let seen2 = seen || *fl;
                                let key = (reentry, q2, seen2);
                                if !res.reach.contains_key(&key) {
                                    let mut w = prefix.clone();
                                    let inner = if *fl {
                                        w_acc.as_ref().unwrap_or(w_plain)
                                    } else {
                                        w_plain
                                    };
                                    w.extend(inner.iter().copied());
                                    res.reach.insert(key, w);
                                    queue.push_back(key);
                                }
                                // Also track the plain variant when the
                                // summary offers both.
                                if *fl {
                                    let key_plain = (reentry, q2, seen);
                                    if !res.reach.contains_key(&key_plain) {
                                        let mut w = prefix.clone();
                                        w.extend(w_plain.iter().copied());
                                        res.reach.insert(key_plain, w);
                                        queue.push_back(key_plain);
                                    }
                                }
                            }
                        }
                    }
                } else if let Some(i) = c.is_return_state(s2) {
                    let entry = res
                        .exits
                        .entry((i, sym, q))
                        .or_insert_with(|| (witness.clone(), None));
                    if seen && entry.1.is_none() {
                        entry.1 = Some(witness.clone());
                    }
                } else {
                    let letter = Letter::new(sym, c.label(s2));
                    for &q2 in self.idx.int.get(&(q, letter)).into_iter().flatten() {
                        let seen2 = seen || self.aut.accepting.contains(&q2);
                        let key = (s2, q2, seen2);
                        if !res.reach.contains_key(&key) {
                            res.reach.insert(key, witness.clone());
                            queue.push_back(key);
                        }
                    }
                }
            }
        }
        res
    }

    /// Saturates walks and summaries to a mutual fixpoint.
    fn saturate(&mut self) {
        let n_q = self.aut.states.len();
        loop {
            let mut changed = false;
            // Recompute walks for every (element, entry) pair.
            for e in 0..self.comp.elements.len() {
                for q in 0..n_q {
                    let w = self.walk(e, q);
                    let prev = self.walks.get(&(e, q));
                    let grew = match prev {
                        None => true,
                        Some(old) => {
                            old.reach.len() != w.reach.len()
                                || old.exits.len() != w.exits.len()
                                || old
                                    .exits
                                    .iter()
                                    .any(|(k, v)| {
                                        w.exits.get(k).map(|nv| nv.1.is_some() != v.1.is_some())
                                            != Some(false)
                                    })
                        }
                    };
                    if grew {
                        self.walks.insert((e, q), w);
                        changed = true;
                    }
                }
            }
            // Derive summaries from exits.
            for e in 0..self.comp.elements.len() {
                let c_callee = self.component(e).clone();
                let entry_label = c_callee.label(c_callee.initial);
                for q in 0..n_q {
                    for sigma in 0..self.lib.alphabet.inputs.len() {
                        let sym = Sym(sigma as u16);
                        let call_letter = Letter::new(sym, entry_label);
                        let call_entries: Vec<(usize, usize)> = self
                            .idx
                            .call
                            .get(&(q, call_letter))
                            .cloned()
                            .unwrap_or_default();
                        for &(q1, p) in &call_entries {
                            let Some(walk) = self.walks.get(&(e, q1)) else { continue };
                            let q1_acc = self.aut.accepting.contains(&q1);
                            for (&(i, sigma2, q2), (w_plain, w_acc)) in &walk.exits {
                                for m in 0..self.lib.n_r {
                                    if i != m {
                                        continue;
                                    }
                                    for out in 0..self.lib.alphabet.outputs.len() {
                                        let out_sym = Sym(out as u16);
                                        let ret_letter = Letter::new(sigma2, out_sym);
                                        for &q3 in self
                                            .idx
                                            .ret
                                            .get(&(q2, p, ret_letter))
                                            .into_iter()
                                            .flatten()
                                        {
                                            let fl = q1_acc
                                                || w_acc.is_some()
                                                || self.aut.accepting.contains(&q3);
                                            // Exit witnesses already end
                                            // with the boundary input.
                                            let mut wit = vec![sym];
                                            wit.extend(w_plain.iter().copied());
                                            let wit_acc = if fl {
                                                let mut wa = vec![sym];
                                                let inner = if q1_acc
                                                    || self.aut.accepting.contains(&q3)
                                                {
                                                    w_plain
                                                } else {
                                                    w_acc.as_ref().unwrap()
                                                };
                                                wa.extend(inner.iter().copied());
                                                Some(wa)
                                            } else {
                                                None
                                            };
                                            let val = self
                                                .summaries
                                                .entry((e, q, sym, m, out_sym))
                                                .or_default();
                                            match val.get_mut(&q3) {
                                                None => {
                                                    val.insert(q3, (fl, wit, wit_acc));
                                                    changed = true;
                                                }
                                                Some(existing) => {
                                                    if fl && !existing.0 {
                                                        existing.0 = true;
                                                        existing.2 = wit_acc;
                                                        changed = true;
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

/// Frames reachable along chains of final-symbol calls from the root.
/// Each frame is (element, entry state of the automaton); the root
/// frames carry the initial states without any call transition.
fn reachable_frames(sat: &Saturation) -> BTreeSet<(usize, usize, bool)> {
    // (element, q entry, is_root): root frames have no entry transition.
    let mut frames: BTreeSet<(usize, usize, bool)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize, bool)> = VecDeque::new();
    for &q0 in &sat.aut.initial {
        frames.insert((0, q0, true));
        queue.push_back((0, q0, true));
    }
    while let Some((e, q, _)) = queue.pop_front() {
        let Some(walk) = sat.walks.get(&(e, q)) else { continue };
        let elem = &sat.comp.elements[e];
        for (&(j, sigma, q_pre), _) in &walk.calls {
            let callee = elem.interface[j];
            let callee_c = sat.component(callee);
            let letter = Letter::new(sigma, callee_c.label(callee_c.initial));
            for &(q1, p) in sat.idx.call.get(&(q_pre, letter)).into_iter().flatten() {
                if !sat.aut.hier_final.contains(&p) {
                    continue;
                }
                if frames.insert((callee, q1, false)) {
                    queue.push_back((callee, q1, false));
                }
            }
        }
    }
    frames
}

/// Model check: does any maximal computation of the composition induce a
/// word in the automaton's language?
pub fn model_check(comp: &Composition, lib: &Library, aut: &Nwba) -> CheckOutcome {
    let mut sat = Saturation::new(lib, comp, aut);
    sat.saturate();

    // (1) Maximal finite computations: a root walk exits through some
    // return state, an initial symbol is popped, the final state accepts.
    for &q0 in &aut.initial {
        let Some(walk) = sat.walks.get(&(0, q0)) else { continue };
        let root = sat.component(0);
        for (&(i, sigma, q2), (w_plain, _)) in &walk.exits {
            let out = root.label(root.returns[i]);
            let letter = Letter::new(sigma, out);
            for &p0 in &aut.hier_initial {
                for &q3 in sat.idx.ret.get(&(q2, p0, letter)).into_iter().flatten() {
                    if aut.accepting.contains(&q3) {
                        let mut input = w_plain.clone();
                        input.push(sigma);
                        return CheckOutcome::Counterexample {
                            kind: CexKind::Finite,
                            sketch: format!(
                                "finite computation of {} inputs returning from the root",
                                input.len()
                            ),
                            input: Some(input),
                        };
                    }
                }
            }
        }
    }

    let frames = reachable_frames(&sat);

    // (2) Internal lasso: from a reachable product node, a cycle of
    // internal transitions passing an accepting state.
    for &(e, q_entry, _) in &frames {
        let Some(walk) = sat.walks.get(&(e, q_entry)) else { continue };
        let c = sat.component(e);
        let n_inputs = lib.alphabet.inputs.len();
        // Internal product adjacency within this element's component.
        let mut adj: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for s in 0..c.n_states() {
            if c.is_exit_state(s) {
                continue;
            }
            for q in 0..aut.states.len() {
                let mut outs = Vec::new();
                for sigma in 0..n_inputs {
                    let sym = Sym(sigma as u16);
                    let s2 = c.step_state(s, sym);
                    if c.is_exit_state(s2) {
                        continue;
                    }
                    let letter = Letter::new(sym, c.label(s2));
                    for &q2 in sat.idx.int.get(&(q, letter)).into_iter().flatten() {
                        outs.push((s2, q2));
                    }
                }
                adj.insert((s, q), outs);
            }
        }
        let reached: BTreeSet<(usize, usize)> =
            walk.reach.keys().map(|&(s, q, _)| (s, q)).collect();
        for &(u_s, u_q) in &reached {
            for &(v_s, v_q) in adj.get(&(u_s, u_q)).into_iter().flatten() {
                if !aut.accepting.contains(&v_q) {
                    continue;
                }
                if reaches(&adj, (v_s, v_q), (u_s, u_q)) {
                    return CheckOutcome::Counterexample {
                        kind: CexKind::InternalLasso,
                        sketch: format!(
                            "element {} loops internally through accepting state {}",
                            e + 1,
                            aut.states[v_q]
                        ),
                        input: None,
                    };
                }
            }
        }
    }

    // (3) Summary lasso: a frame-local cycle combining internal steps and
    // call summaries with an accepting edge on the cycle.
    for &(e, q_entry, _) in &frames {
        let Some(walk) = sat.walks.get(&(e, q_entry)) else { continue };
        let c = sat.component(e);
        let n_inputs = lib.alphabet.inputs.len();
        // Edges (s, q) -> (s2, q2) with an accepting flag.
        let mut adj: HashMap<(usize, usize), Vec<((usize, usize), bool)>> = HashMap::new();
        for s in 0..c.n_states() {
            if c.is_exit_state(s) {
                continue;
            }
            for q in 0..aut.states.len() {
                let mut outs = Vec::new();
                for sigma in 0..n_inputs {
                    let sym = Sym(sigma as u16);
                    let s2 = c.step_state(s, sym);
                    if let Some(j) = c.is_call_state(s2) {
                        let callee = comp.elements[e].interface[j];
                        for m in 0..lib.n_r {
                            let reentry = c.reentry[m];
                            let out = c.label(reentry);
                            if let Some(val) = sat.summaries.get(&(callee, q, sym, m, out)) {
                                for (&q2, (fl, _, _)) in val {
                                    outs.push(((reentry, q2), *fl));
                                }
                            }
                        }
                    } else if !c.is_exit_state(s2) {
                        let letter = Letter::new(sym, c.label(s2));
                        for &q2 in sat.idx.int.get(&(q, letter)).into_iter().flatten() {
                            outs.push(((s2, q2), aut.accepting.contains(&q2)));
                        }
                    }
                }
                adj.insert((s, q), outs);
            }
        }
        let reach_from = |start: (usize, usize)| -> BTreeSet<(usize, usize)> {
            let mut seen = BTreeSet::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(n) = stack.pop() {
                for &(m, _) in adj.get(&n).into_iter().flatten() {
                    if seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
            seen
        };
        let reached: BTreeSet<(usize, usize)> =
            walk.reach.keys().map(|&(s, q, _)| (s, q)).collect();
        for &u in &reached {
            for &(v, fl) in adj.get(&u).into_iter().flatten() {
                if !fl {
                    continue;
                }
                if reach_from(v).contains(&u) {
                    return CheckOutcome::Counterexample {
                        kind: CexKind::SummaryLasso,
                        sketch: format!(
                            "element {} repeats a summary cycle with an accepting edge",
                            e + 1
                        ),
                        input: None,
                    };
                }
            }
        }
    }

    // (4) Pending descent: a cycle in the call-descent graph over
    // (element, state, input), all pushed symbols final, an accepting
    // visit on the cycle.
    {
        // Nodes: (element, q before the call, sigma). Seeds come from the
        // walks of reachable frames.
        type DNode = (usize, usize, Sym);
        let mut nodes: BTreeSet<DNode> = BTreeSet::new();
        let mut edges: BTreeMap<DNode, Vec<(DNode, bool)>> = BTreeMap::new();
        let mut seeds: BTreeSet<DNode> = BTreeSet::new();
        for &(e, q_entry, _) in &frames {
            let Some(walk) = sat.walks.get(&(e, q_entry)) else { continue };
            for (&(j, sigma, q_pre), _) in &walk.calls {
                seeds.insert((comp.elements[e].interface[j], q_pre, sigma));
            }
        }
        let mut queue: VecDeque<DNode> = seeds.iter().copied().collect();
        while let Some((e, q, sigma)) = queue.pop_front() {
            if !nodes.insert((e, q, sigma)) {
                continue;
            }
            let c = sat.component(e);
            let letter = Letter::new(sigma, c.label(c.initial));
            for &(q1, p) in sat.idx.call.get(&(q, letter)).into_iter().flatten() {
                if !aut.hier_final.contains(&p) {
                    continue;
                }
                let q1_acc = aut.accepting.contains(&q1);
                let Some(walk) = sat.walks.get(&(e, q1)) else { continue };
                for (&(j, sigma2, q_pre), _) in &walk.calls {
                    let flagged = q1_acc || walk.calls_acc.contains_key(&(j, sigma2, q_pre));
                    let target = (comp.elements[e].interface[j], q_pre, sigma2);
                    edges.entry((e, q, sigma)).or_default().push((target, flagged));
                    if !nodes.contains(&target) {
                        queue.push_back(target);
                    }
                }
            }
        }
        let reach_from = |start: DNode| -> BTreeSet<DNode> {
            let mut seen = BTreeSet::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(n) = stack.pop() {
                for &(m, _) in edges.get(&n).into_iter().flatten() {
                    if seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
            seen
        };
        for (&u, outs) in &edges {
            for &(v, fl) in outs {
                if !fl {
                    continue;
                }
                if reach_from(v).contains(&u) {
                    return CheckOutcome::Counterexample {
                        kind: CexKind::PendingDescent,
                        sketch: format!(
                            "infinite pending-call descent cycling through element {}",
                            u.0 + 1
                        ),
                        input: None,
                    };
                }
            }
        }
    }

    CheckOutcome::Empty
}

fn reaches(
    adj: &HashMap<(usize, usize), Vec<(usize, usize)>>,
    from: (usize, usize),
    to: (usize, usize),
) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![from];
    seen.insert(from);
    while let Some(n) = stack.pop() {
        if n == to {
            return true;
        }
        for &m in adj.get(&n).into_iter().flatten() {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    false
}

/// Enumerates compositions with at most `max_elements` elements in
/// canonical form (elements numbered in breadth-first discovery order
/// from the root) and returns the first whose computations all avoid
/// the automaton's language. A `NoneUpTo` verdict is partial.
pub fn brute_force_realizable(
    lib: &Library,
    bad: &Nwba,
    max_elements: usize,
) -> BruteOutcome {
    for k in 1..=max_elements {
        let mut candidate = vec![0usize; k]; // component per element
        loop {
            // Interfaces: each element has n_c targets in [0, k).
            let n_slots = k * lib.n_c;
            let mut wiring = vec![0usize; n_slots];
            loop {
                let comp = Composition {
                    elements: (0..k)
                        .map(|i| Element {
                            component: candidate[i],
                            interface: wiring[i * lib.n_c..(i + 1) * lib.n_c].to_vec(),
                        })
                        .collect(),
                };
                if is_canonical(&comp, k) && model_check(&comp, lib, bad).is_empty() {
                    return BruteOutcome::RealizableWitness(comp);
                }
                if !next_vec(&mut wiring, k) {
                    break;
                }
            }
            if !next_vec(&mut candidate, lib.components.len()) {
                break;
            }
        }
    }
    BruteOutcome::NoneUpTo(max_elements)
}

/// Lexicographic successor over fixed-radix vectors.
fn next_vec(v: &mut [usize], radix: usize) -> bool {
    for d in v.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Canonical: breadth-first discovery order from element 0 along the
/// interface entries equals the identity and covers every element.
fn is_canonical(comp: &Composition, k: usize) -> bool {
    let mut order: Vec<usize> = vec![0];
    let mut seen: BTreeSet<usize> = [0].into();
    let mut next = 0;
    while next < order.len() {
        let e = order[next];
        next += 1;
        for &t in &comp.elements[e].interface {
            if seen.insert(t) {
                order.push(t);
            }
        }
    }
    order.len() == k && order.iter().enumerate().all(|(i, &e)| i == e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::nested_word::Alphabet;
    use crate::nwba::{accepts_finite, translate_nwtl, Nwba};
    use crate::nwtl::parse;
    use crate::rlc::simulate;
    use crate::rlc::{Composition as Comp2, Element};

    fn ab() -> Alphabet {
        Alphabet::new(["a"], ["x", "y"])
    }

    #[test]
    fn loop_satisfies_globally_x() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let bad = translate_nwtl(&parse("!(Gs out:x)", &ab()).unwrap(), &ab());
        let outcome = model_check(&comp, &lib, &bad);
        assert!(outcome.is_empty(), "{:?}", outcome);
        // Cross-check: no simulated prefix is accepted by the negation.
        for len in 1..=10 {
            let (w, _) = simulate(&comp, &lib, &vec![Sym(0); len]);
            assert!(!accepts_finite(&bad, &w).unwrap());
        }
    }

    #[test]
    fn loop_against_universal_automaton_is_internal_lasso() {
        let lib = fixtures::lib_loop_x();
        let comp = fixtures::self_composition(0, &lib);
        let bad = Nwba::universal(ab().letters());
        match model_check(&comp, &lib, &bad) {
            CheckOutcome::Counterexample { kind: CexKind::InternalLasso, .. } => {}
            other => panic!("expected internal lasso, got {:?}", other),
        }
    }

    #[test]
    fn caller_callee_against_call_first_spec() {
        let lib = fixtures::lib_caller_callee();
        let comp = fixtures::caller_callee_composition(&lib);
        let bad = translate_nwtl(&parse("call", &ab()).unwrap(), &ab());
        match model_check(&comp, &lib, &bad) {
            CheckOutcome::Counterexample { kind, input, .. } => {
                assert!(
                    matches!(kind, CexKind::Finite | CexKind::PendingDescent),
                    "unexpected kind {:?}",
                    kind
                );
                if let Some(input) = input {
                    // Finite counterexamples replay to accepted words.
                    let (w, terminated) = simulate(&comp, &lib, &input);
                    assert!(terminated);
                    assert!(accepts_finite(&bad, &w).unwrap());
                }
            }
            other => panic!("expected a counterexample, got {:?}", other),
        }
    }

    #[test]
    fn finite_counterexamples_replay() {
        // The caller/callee wiring terminates; an automaton accepting
        // exactly the terminating word's shape yields a finite
        // counterexample whose input replays.
        let lib = fixtures::lib_caller_callee();
        let comp = fixtures::caller_callee_composition(&lib);
        let bad = translate_nwtl(&parse("Fs ret", &ab()).unwrap(), &ab());
        match model_check(&comp, &lib, &bad) {
            CheckOutcome::Counterexample { kind: CexKind::Finite, input: Some(input), .. } => {
                let (w, terminated) = simulate(&comp, &lib, &input);
                assert!(terminated);
                assert!(accepts_finite(&bad, &w).unwrap());
            }
            other => panic!("expected finite counterexample, got {:?}", other),
        }
    }

    #[test]
    fn summary_witnesses_confirm_entry_return_behavior() {
        let lib = fixtures::lib_mixed();
        let comp = Composition {
            elements: vec![
                Element { component: 0, interface: vec![1] }, // CALLER -> CALLEE
                Element { component: 1, interface: vec![0] },
            ],
        };
        let bad = translate_nwtl(&parse("Fs ret", &ab()).unwrap(), &ab());
        let mut sat = Saturation::new(&lib, &comp, &bad);
        sat.saturate();
        assert!(!sat.summaries.is_empty());
        for ((e, _q, _sigma, m, _out), val) in &sat.summaries {
            for (_q3, (_fl, wit, _wit_acc)) in val {
                // Replay the witness through a frame simulation rooted at
                // the called element: the inner inputs must keep the root
                // frame alive, the final input must return through m.
                assert!(wit.len() >= 2);
                let mut frames = vec![*e];
                let mut top = lib.components[comp.elements[*e].component].initial;
                let mut returned = None;
                for (k, &sym) in wit[1..].iter().enumerate() {
                    let elem = *frames.last().unwrap();
                    let c = &lib.components[comp.elements[elem].component];
                    let target = c.step_state(top, sym);
                    if let Some(j) = c.is_call_state(target) {
                        let callee = comp.elements[elem].interface[j];
                        frames.push(callee);
                        top = lib.components[comp.elements[callee].component].initial;
                    } else if let Some(i) = c.is_return_state(target) {
                        if frames.len() == 1 {
                            returned = Some((i, k));
                            break;
                        }
                        frames.pop();
                        let caller = *frames.last().unwrap();
                        top = lib.components[comp.elements[caller].component].reentry[i];
                    } else {
                        top = target;
                    }
                }
                let (i, k) = returned.expect("witness returns from the called frame");
                assert_eq!(i, *m, "witness returns through the summary's index");
                assert_eq!(k, wit.len() - 2, "return happens on the final input");
            }
        }
    }

    #[test]
    fn brute_force_finds_loop_witness() {
        let lib = fixtures::lib_loop_x();
        let bad = translate_nwtl(&parse("!(Gs out:x)", &ab()).unwrap(), &ab());
        match brute_force_realizable(&lib, &bad, 1) {
            BruteOutcome::RealizableWitness(c) => {
                assert_eq!(c.elements.len(), 1);
            }
            other => panic!("expected witness, got {:?}", other),
        }
    }

    #[test]
    fn brute_force_rejects_unsatisfiable_spec() {
        let lib = fixtures::lib_loop_x();
        // not true: every computation violates it.
        let bad = translate_nwtl(&parse("true", &ab()).unwrap(), &ab());
        match brute_force_realizable(&lib, &bad, 3) {
            BruteOutcome::NoneUpTo(3) => {}
            other => panic!("expected NoneUpTo(3), got {:?}", other),
        }
    }

    #[test]
    fn brute_force_needs_two_elements_for_matched_return() {
        // A matched return needs a call that comes back: CALLER wired to
        // CALLEE. A lone CALLEE returns unmatched; a self-wired CALLER
        // descends forever.
        let lib = fixtures::lib_caller_callee();
        let bad = translate_nwtl(&parse("!(Fs (ret & Ymu call))", &ab()).unwrap(), &ab());
        match brute_force_realizable(&lib, &bad, 4) {
            BruteOutcome::RealizableWitness(c) => {
                assert_eq!(c.elements.len(), 2);
                assert_eq!(c.elements[0].component, 0);
                assert_eq!(c.elements[1].component, 1);
            }
            other => panic!("expected a 2-element witness, got {:?}", other),
        }
    }
}
