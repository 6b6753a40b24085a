//! Tableau translation from NWTL formulas to nested-word Büchi automata.
//!
//! States are atoms: truth assignments over the formula's subformulas
//! plus, per summary-until `u`, a bit `u^b` ("u holds with a witness
//! strictly inside the current frame") and, per summary-since `s`, a bit
//! `s^b` ("s holds reflexively with a witness inside the current frame").
//! Linear operators propagate between consecutive atoms. At a matched
//! call the until expansion forks: either the witness lies in the call
//! body (an obligation on `u^b` at the first body position, recorded in
//! the post-call state) or the obligation jumps to the matched return
//! (recorded in the pushed hierarchical symbol and re-checked when the
//! symbol is popped). The symbol also carries the call atom so the
//! abstract next/previous operators and the since rules can be resolved
//! at the return.
//!
//! Acceptance uses an owed-obligation set in Miyano-Hayashi style: an
//! until claimed in an atom stays owed until a position witnesses its
//! second operand while no stack symbol defers the obligation; when the
//! owed set drains it is reset to the currently live claims. Accepting
//! states are those with an empty owed set whose atom could end a word
//! (no next/abstract-next claims, every until witnessed on the spot), so
//! the same accepting set serves the finite-word and Büchi readings.
//! Calls guessed pending push a dedicated symbol, the only final one;
//! calls guessed matched push symbols that must be popped.

use super::Nwba;
use crate::nested_word::{Alphabet, Letter};
use crate::nwtl::Formula;
use std::collections::{BTreeSet, HashMap};

type Mask = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TagKind {
    Int,
    Call,
    RetMatched,
    RetUnmatched,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Ctx {
    Normal,
    AfterPending,
    AfterMatched { body_must: Mask },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct StateData {
    atom: u32,
    ctx: Ctx,
    dormant: Mask,
    owed: Mask,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SymbolData {
    Init,
    Pending,
    Matched { atom: u32, must_u: Mask, must_ub: Mask, dormant_at_push: Mask },
}

struct UntilInfo {
    bit: usize,
    lhs: usize,
    rhs: usize,
    /// Position of the frame-bounded companion bit.
    ub_bit: usize,
}

struct SinceInfo {
    bit: usize,
    lhs: usize,
    rhs: usize,
    sb_bit: usize,
}

struct Tableau {
    subs: Vec<Formula>,
    n_bits: usize,
    phi_bit: usize,
    call_bit: usize,
    ret_bit: usize,
    /// (formula bit, operand bit) pairs per unary temporal operator.
    nexts: Vec<(usize, usize)>,
    prevs: Vec<(usize, usize)>,
    next_mus: Vec<(usize, usize)>,
    prev_mus: Vec<(usize, usize)>,
    untils: Vec<UntilInfo>,
    sinces: Vec<SinceInfo>,
    in_atoms: Vec<(usize, u16)>,
    out_atoms: Vec<(usize, u16)>,
    atoms: Vec<Mask>,
    /// Compatible atom ids per (letter index, tag-class) bucket.
    buckets: HashMap<(usize, u8), Vec<u32>>,
    letters: Vec<Letter>,
}

fn bit(mask: Mask, i: usize) -> bool {
    mask >> i & 1 == 1
}

impl Tableau {
    fn new(phi: &Formula, alphabet: &Alphabet) -> Tableau {
        let mut set: BTreeSet<Formula> = phi.subformulas();
        set.insert(Formula::Call);
        set.insert(Formula::Ret);
        let subs: Vec<Formula> = set.into_iter().collect();
        let idx_of = |f: &Formula| subs.iter().position(|g| g == f).expect("subformula present");

        let n_subs = subs.len();
        let mut untils = Vec::new();
        let mut sinces = Vec::new();
        let mut nexts = Vec::new();
        let mut prevs = Vec::new();
        let mut next_mus = Vec::new();
        let mut prev_mus = Vec::new();
        let mut in_atoms = Vec::new();
        let mut out_atoms = Vec::new();
        for (i, f) in subs.iter().enumerate() {
            match f {
                Formula::Next(a) => nexts.push((i, idx_of(a))),
                Formula::Prev(a) => prevs.push((i, idx_of(a))),
                Formula::NextMu(a) => next_mus.push((i, idx_of(a))),
                Formula::PrevMu(a) => prev_mus.push((i, idx_of(a))),
                Formula::UntilSummary(a, b) => {
                    untils.push(UntilInfo { bit: i, lhs: idx_of(a), rhs: idx_of(b), ub_bit: 0 })
                }
                Formula::SinceSummary(a, b) => {
                    sinces.push(SinceInfo { bit: i, lhs: idx_of(a), rhs: idx_of(b), sb_bit: 0 })
                }
                Formula::InAtom(s) => in_atoms.push((i, s.0)),
                Formula::OutAtom(s) => out_atoms.push((i, s.0)),
                _ => {}
            }
        }
        for (k, u) in untils.iter_mut().enumerate() {
            u.ub_bit = n_subs + k;
        }
        let n_u = untils.len();
        for (k, s) in sinces.iter_mut().enumerate() {
            s.sb_bit = n_subs + n_u + k;
        }
        let n_bits = n_subs + n_u + sinces.len();
        assert!(n_bits <= 26, "formula too large for the tableau translation");

        let mut t = Tableau {
            phi_bit: idx_of(phi),
            call_bit: idx_of(&Formula::Call),
            ret_bit: idx_of(&Formula::Ret),
            subs,
            n_bits,
            nexts,
            prevs,
            next_mus,
            prev_mus,
            untils,
            sinces,
            in_atoms,
            out_atoms,
            atoms: Vec::new(),
            buckets: HashMap::new(),
            letters: alphabet.letters(),
        };
        t.enumerate_atoms();
        t.fill_buckets();
        t
    }

    fn consistent(&self, m: Mask) -> bool {
        for (i, f) in self.subs.iter().enumerate() {
            let ok = match f {
                Formula::True => bit(m, i),
                Formula::Not(a) => {
                    let a = self.idx(a);
                    bit(m, i) == !bit(m, a)
                }
                Formula::Or(a, b) => bit(m, i) == (bit(m, self.idx(a)) || bit(m, self.idx(b))),
                Formula::And(a, b) => bit(m, i) == (bit(m, self.idx(a)) && bit(m, self.idx(b))),
                _ => true,
            };
            if !ok {
                return false;
            }
        }
        if bit(m, self.call_bit) && bit(m, self.ret_bit) {
            return false;
        }
        if self.in_atoms.iter().filter(|&&(i, _)| bit(m, i)).count() > 1 {
            return false;
        }
        if self.out_atoms.iter().filter(|&&(i, _)| bit(m, i)).count() > 1 {
            return false;
        }
        for &(i, _) in &self.next_mus {
            if bit(m, i) && !bit(m, self.call_bit) {
                return false;
            }
        }
        for &(i, _) in &self.prev_mus {
            if bit(m, i) && !bit(m, self.ret_bit) {
                return false;
            }
        }
        for u in &self.untils {
            if bit(m, u.rhs) && !bit(m, u.bit) {
                return false;
            }
            if bit(m, u.bit) && !bit(m, u.rhs) && !bit(m, u.lhs) {
                return false;
            }
            // Frame-bounded companion.
            if bit(m, u.rhs) && !bit(m, u.ub_bit) {
                return false;
            }
            if bit(m, u.ub_bit) && !bit(m, u.bit) {
                return false;
            }
            if bit(m, u.ub_bit) && !bit(m, u.rhs) && !bit(m, u.lhs) {
                return false;
            }
        }
        for s in &self.sinces {
            if bit(m, s.bit) && !bit(m, s.lhs) {
                return false;
            }
            if bit(m, s.rhs) && !bit(m, s.sb_bit) {
                return false;
            }
            if bit(m, s.sb_bit) && !bit(m, s.rhs) && !bit(m, s.lhs) {
                return false;
            }
        }
        true
    }

    fn idx(&self, f: &Formula) -> usize {
        self.subs.iter().position(|g| g == f).expect("subformula present")
    }

    fn enumerate_atoms(&mut self) {
        for m in 0..(1u64 << self.n_bits) {
            if self.consistent(m) {
                self.atoms.push(m);
            }
        }
    }

    fn tag_code(tag: TagKind) -> u8 {
        match tag {
            TagKind::Int => 0,
            TagKind::Call => 1,
            TagKind::RetMatched | TagKind::RetUnmatched => 2,
        }
    }

    fn fill_buckets(&mut self) {
        for (li, letter) in self.letters.iter().enumerate() {
            for tag_code in 0u8..3 {
                let mut v = Vec::new();
                'atom: for (ai, &m) in self.atoms.iter().enumerate() {
                    let want_call = tag_code == 1;
                    let want_ret = tag_code == 2;
                    if bit(m, self.call_bit) != want_call || bit(m, self.ret_bit) != want_ret {
                        continue;
                    }
                    for &(i, s) in &self.in_atoms {
                        if bit(m, i) != (letter.input.0 == s) {
                            continue 'atom;
                        }
                    }
                    for &(i, s) in &self.out_atoms {
                        if bit(m, i) != (letter.output.0 == s) {
                            continue 'atom;
                        }
                    }
                    v.push(ai as u32);
                }
                self.buckets.insert((li, tag_code), v);
            }
        }
    }

    /// Pair rules between a source state and a candidate target atom.
    /// `popped` carries the matched symbol's data for return transitions.
    fn pair_ok(
        &self,
        src: Option<&StateData>,
        src_atom: Option<Mask>,
        tag: TagKind,
        popped: Option<(Mask, Mask, Mask)>, // (atom, must_u, must_ub)
        b: Mask,
    ) -> bool {
        match src_atom {
            None => {
                // First position: nothing precedes it.
                for &(i, _) in &self.prevs {
                    if bit(b, i) {
                        return false;
                    }
                }
                for &(i, _) in &self.prev_mus {
                    if bit(b, i) {
                        return false;
                    }
                }
                for s in &self.sinces {
                    if bit(b, s.bit) {
                        return false;
                    }
                    if bit(b, s.sb_bit) != bit(b, s.rhs) {
                        return false;
                    }
                }
                if !bit(b, self.phi_bit) {
                    return false;
                }
                true
            }
            Some(a) => {
                let src = src.expect("source state present");
                // Linear next/previous across every consecutive pair.
                for &(i, c) in &self.nexts {
                    if bit(a, i) != bit(b, c) {
                        return false;
                    }
                }
                for &(i, c) in &self.prevs {
                    if bit(b, i) != bit(a, c) {
                        return false;
                    }
                }
                match tag {
                    TagKind::RetMatched => {
                        let (p_atom, must_u, must_ub) = popped.expect("popped symbol");
                        for &(i, c) in &self.next_mus {
                            if bit(p_atom, i) != bit(b, c) {
                                return false;
                            }
                        }
                        for &(i, c) in &self.prev_mus {
                            if bit(b, i) != bit(p_atom, c) {
                                return false;
                            }
                        }
                        let after_matched = matches!(src.ctx, Ctx::AfterMatched { .. });
                        if let Ctx::AfterMatched { body_must } = src.ctx {
                            // Empty call body: nothing can witness a
                            // body-routed obligation, and the popped symbol
                            // is the one just pushed.
                            if body_must != 0 || p_atom != a {
                                return false;
                            }
                        }
                        for u in &self.untils {
                            // The source is the last position of the frame
                            // being closed: its bounded until holds only
                            // via an immediate witness.
                            if !after_matched && bit(a, u.ub_bit) != bit(a, u.rhs) {
                                return false;
                            }
                            // Unbounded untils flow linearly through the
                            // return, except when the source is the call
                            // itself (its expansion was resolved at push).
                            if !after_matched {
                                let lhs_ok =
                                    bit(a, u.rhs) || (bit(a, u.lhs) && bit(b, u.bit));
                                if bit(a, u.bit) != lhs_ok {
                                    return false;
                                }
                            }
                            // Jump obligations recorded in the symbol.
                            if bit(must_u, self.ubit(u)) && !bit(b, u.bit) {
                                return false;
                            }
                            if bit(must_ub, self.ubit(u)) && !bit(b, u.ub_bit) {
                                return false;
                            }
                            let forbid =
                                !bit(p_atom, u.ub_bit) && bit(p_atom, u.lhs) && !bit(p_atom, u.rhs);
                            if forbid && bit(b, u.ub_bit) {
                                return false;
                            }
                            let forbid_u =
                                !bit(p_atom, u.bit) && bit(p_atom, u.lhs) && !bit(p_atom, u.rhs);
                            if forbid_u && bit(b, u.bit) {
                                return false;
                            }
                        }
                        for s in &self.sinces {
                            let via_body = !after_matched && bit(a, s.sb_bit);
                            let reach =
                                bit(p_atom, s.rhs) || bit(p_atom, s.bit) || via_body;
                            if bit(b, s.bit) != (bit(b, s.lhs) && reach) {
                                return false;
                            }
                            let sb = bit(b, s.rhs) || (bit(b, s.lhs) && reach);
                            if bit(b, s.sb_bit) != sb {
                                return false;
                            }
                        }
                        true
                    }
                    TagKind::Int | TagKind::Call | TagKind::RetUnmatched => {
                        for &(i, _) in &self.prev_mus {
                            if bit(b, i) {
                                return false;
                            }
                        }
                        match src.ctx {
                            Ctx::Normal | Ctx::AfterPending => {
                                for u in &self.untils {
                                    let expect =
                                        bit(a, u.rhs) || (bit(a, u.lhs) && bit(b, u.bit));
                                    if bit(a, u.bit) != expect {
                                        return false;
                                    }
                                    let expect_b =
                                        bit(a, u.rhs) || (bit(a, u.lhs) && bit(b, u.ub_bit));
                                    if bit(a, u.ub_bit) != expect_b {
                                        return false;
                                    }
                                }
                            }
                            Ctx::AfterMatched { body_must } => {
                                for u in &self.untils {
                                    let k = self.ubit(u);
                                    if bit(body_must, k) && !bit(b, u.ub_bit) {
                                        return false;
                                    }
                                    let forbid =
                                        !bit(a, u.ub_bit) && bit(a, u.lhs) && !bit(a, u.rhs);
                                    if forbid && bit(b, u.ub_bit) {
                                        return false;
                                    }
                                }
                            }
                        }
                        let cut = matches!(src.ctx, Ctx::AfterMatched { .. });
                        for s in &self.sinces {
                            let expect = bit(b, s.lhs) && (bit(a, s.rhs) || bit(a, s.bit));
                            if bit(b, s.bit) != expect {
                                return false;
                            }
                            let sb = if cut {
                                bit(b, s.rhs)
                            } else {
                                bit(b, s.rhs) || (bit(b, s.lhs) && bit(a, s.sb_bit))
                            };
                            if bit(b, s.sb_bit) != sb {
                                return false;
                            }
                        }
                        true
                    }
                }
            }
        }
    }

    /// Index of `u` within the until list (bit position in must-masks).
    fn ubit(&self, u: &UntilInfo) -> usize {
        self.untils.iter().position(|v| v.bit == u.bit).expect("until listed")
    }

    /// Fork options at a matched call with atom `b`: per until, the body
    /// route obliges `u^b` at the first body position, the jump route
    /// obliges `u` (and `u^b` for the bounded companion) at the matched
    /// return. Returns (body_must, must_u, must_ub) alternatives.
    fn fork_options(&self, b: Mask) -> Vec<(Mask, Mask, Mask)> {
        let mut acc = vec![(0u64, 0u64, 0u64)];
        for (k, u) in self.untils.iter().enumerate() {
            if bit(b, u.rhs) || !bit(b, u.lhs) {
                continue; // resolved on the spot or statically false
            }
            let u_here = bit(b, u.bit);
            let ub_here = bit(b, u.ub_bit);
            let mut options: Vec<(Mask, Mask, Mask)> = Vec::new();
            match (u_here, ub_here) {
                (true, true) => {
                    options.push((1 << k, 0, 0)); // witness in the body
                    options.push((0, 1 << k, 1 << k)); // both jump to the return
                }
                (true, false) => options.push((0, 1 << k, 0)),
                (false, false) => options.push((0, 0, 0)),
                (false, true) => unreachable!("atom consistency: u^b implies u"),
            }
            let mut next = Vec::with_capacity(acc.len() * options.len());
            for &(bm, mu, mub) in &acc {
                for &(ob, ou, oub) in &options {
                    next.push((bm | ob, mu | ou, mub | oub));
                }
            }
            acc = next;
        }
        acc
    }

    fn end_clean(&self, m: Mask) -> bool {
        self.nexts.iter().all(|&(i, _)| !bit(m, i))
            && self.next_mus.iter().all(|&(i, _)| !bit(m, i))
            && self.untils.iter().all(|u| !bit(m, u.bit) || bit(m, u.rhs))
    }

    /// Owed-set update at a position with atom `b` and post-transition
    /// dormant mask. Cleared chains are those neither deferred on the
    /// stack nor still claimed unwitnessed; a drained set resets to the
    /// live claims.
    fn update_owed(&self, owed: Mask, dormant_post: Mask, b: Mask) -> Mask {
        let mut alive = 0u64;
        for (k, u) in self.untils.iter().enumerate() {
            if bit(dormant_post, k) || (bit(b, u.bit) && !bit(b, u.rhs)) {
                alive |= 1 << k;
            }
        }
        let kept = owed & alive;
        if kept == 0 {
            alive
        } else {
            kept
        }
    }
}

/// Translates an NWTL formula into an NWBA over the full product alphabet
/// of `alphabet`. On finite nested words the language is exactly the set
/// of words whose first position satisfies the formula (the empty word is
/// never accepted); infinite words are handled through the same
/// acceptance structure.
pub fn translate_nwtl(phi: &Formula, alphabet: &Alphabet) -> Nwba {
    let t = Tableau::new(phi, alphabet);

    let mut states: Vec<Option<StateData>> = vec![None]; // index 0 = initial
    let mut state_ids: HashMap<StateData, usize> = HashMap::new();
    let mut symbols: Vec<SymbolData> = vec![SymbolData::Init, SymbolData::Pending];
    let mut symbol_ids: HashMap<SymbolData, usize> = HashMap::new();

    let mut delta_int: BTreeSet<(usize, usize, usize)> = BTreeSet::new(); // (q, letter, q2)
    let mut delta_call: BTreeSet<(usize, usize, usize, usize)> = BTreeSet::new();
    let mut delta_ret: BTreeSet<(usize, usize, usize, usize)> = BTreeSet::new();

    let intern_state = |data: StateData,
                            states: &mut Vec<Option<StateData>>,
                            state_ids: &mut HashMap<StateData, usize>|
     -> usize {
        if let Some(&i) = state_ids.get(&data) {
            return i;
        }
        states.push(Some(data.clone()));
        let i = states.len() - 1;
        state_ids.insert(data, i);
        i
    };
    let intern_symbol = |data: SymbolData,
                             symbols: &mut Vec<SymbolData>,
                             symbol_ids: &mut HashMap<SymbolData, usize>|
     -> usize {
        if let Some(&i) = symbol_ids.get(&data) {
            return i;
        }
        symbols.push(data.clone());
        let i = symbols.len() - 1;
        symbol_ids.insert(data, i);
        i
    };

    // Basic transitions (internal, call, unmatched return) per state; the
    // matched-return transitions pair every discovered state with every
    // discovered matched symbol.
    let mut next_basic = 0usize;
    let mut done_ret: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        let mut progress = false;
        while next_basic < states.len() {
            let q = next_basic;
            next_basic += 1;
            progress = true;
            let src = states[q].clone();
            let src_atom = src.as_ref().map(|s| t.atoms[s.atom as usize]);
            for (li, _) in t.letters.iter().enumerate() {
                // Internal.
                for &ai in &t.buckets[&(li, Tableau::tag_code(TagKind::Int))] {
                    let b = t.atoms[ai as usize];
                    if !t.pair_ok(src.as_ref(), src_atom, TagKind::Int, None, b) {
                        continue;
                    }
                    let dormant = src.as_ref().map_or(0, |s| s.dormant);
                    let owed_pre = src.as_ref().map_or(0, |s| s.owed);
                    let owed = if src.is_none() {
                        t.update_owed(0, dormant, b)
                    } else {
                        t.update_owed(owed_pre, dormant, b)
                    };
                    let tgt = StateData { atom: ai, ctx: Ctx::Normal, dormant, owed };
                    let q2 = intern_state(tgt, &mut states, &mut state_ids);
                    delta_int.insert((q, li, q2));
                }
                // Unmatched return (only from plain contexts: a return
                // directly after a call always pops that call's symbol).
                let unmatched_ok = match &src {
                    None => true,
                    Some(s) => s.ctx == Ctx::Normal,
                };
                if unmatched_ok {
                    for &ai in &t.buckets[&(li, Tableau::tag_code(TagKind::RetUnmatched))] {
                        let b = t.atoms[ai as usize];
                        if !t.pair_ok(src.as_ref(), src_atom, TagKind::RetUnmatched, None, b) {
                            continue;
                        }
                        let dormant = src.as_ref().map_or(0, |s| s.dormant);
                        let owed_pre = src.as_ref().map_or(0, |s| s.owed);
                        let owed = t.update_owed(owed_pre, dormant, b);
                        let tgt = StateData { atom: ai, ctx: Ctx::Normal, dormant, owed };
                        let q2 = intern_state(tgt, &mut states, &mut state_ids);
                        delta_ret.insert((q, 0, li, q2)); // symbol 0 = initial
                    }
                }
                // Call.
                for &ai in &t.buckets[&(li, Tableau::tag_code(TagKind::Call))] {
                    let b = t.atoms[ai as usize];
                    if !t.pair_ok(src.as_ref(), src_atom, TagKind::Call, None, b) {
                        continue;
                    }
                    let dormant_pre = src.as_ref().map_or(0, |s| s.dormant);
                    let owed_pre = src.as_ref().map_or(0, |s| s.owed);
                    // Pending guess: abstract next must be false here.
                    if t.next_mus.iter().all(|&(i, _)| !bit(b, i)) {
                        let owed = t.update_owed(owed_pre, dormant_pre, b);
                        let tgt = StateData {
                            atom: ai,
                            ctx: Ctx::AfterPending,
                            dormant: dormant_pre,
                            owed,
                        };
                        let q2 = intern_state(tgt, &mut states, &mut state_ids);
                        delta_call.insert((q, li, q2, 1)); // symbol 1 = pending
                    }
                    // Matched guess: one transition per fork resolution.
                    for (body_must, must_u, must_ub) in t.fork_options(b) {
                        let dormant = dormant_pre | must_u;
                        let owed = t.update_owed(owed_pre, dormant, b);
                        let sym = SymbolData::Matched {
                            atom: ai,
                            must_u,
                            must_ub,
                            dormant_at_push: dormant_pre,
                        };
                        let p = intern_symbol(sym, &mut symbols, &mut symbol_ids);
                        let tgt = StateData {
                            atom: ai,
                            ctx: Ctx::AfterMatched { body_must },
                            dormant,
                            owed,
                        };
                        let q2 = intern_state(tgt, &mut states, &mut state_ids);
                        delta_call.insert((q, li, q2, p));
                    }
                }
            }
        }

        // Matched returns: pair states with matched symbols.
        let n_states = states.len();
        let n_symbols = symbols.len();
        for q in 0..n_states {
            let src = match &states[q] {
                Some(s) => s.clone(),
                None => continue,
            };
            if src.ctx == Ctx::AfterPending {
                continue; // its own pending symbol is on top; unpoppable
            }
            for p in 2..n_symbols {
                if !done_ret.insert((q, p)) {
                    continue;
                }
                progress = true;
                let (p_atom_id, must_u, must_ub, dormant_at_push) = match &symbols[p] {
                    SymbolData::Matched { atom, must_u, must_ub, dormant_at_push } => {
                        (*atom, *must_u, *must_ub, *dormant_at_push)
                    }
                    _ => unreachable!(),
                };
                let p_atom = t.atoms[p_atom_id as usize];
                let src_atom = t.atoms[src.atom as usize];
                for (li, _) in t.letters.iter().enumerate() {
                    for &ai in &t.buckets[&(li, Tableau::tag_code(TagKind::RetMatched))] {
                        let b = t.atoms[ai as usize];
                        if !t.pair_ok(
                            Some(&src),
                            Some(src_atom),
                            TagKind::RetMatched,
                            Some((p_atom, must_u, must_ub)),
                            b,
                        ) {
                            continue;
                        }
                        let dormant = dormant_at_push;
                        let owed = t.update_owed(src.owed, dormant, b);
                        let tgt = StateData { atom: ai, ctx: Ctx::Normal, dormant, owed };
                        let q2 = intern_state(tgt, &mut states, &mut state_ids);
                        delta_ret.insert((q, p, li, q2));
                    }
                }
            }
        }

        if !progress {
            break;
        }
    }

    let accepting: BTreeSet<usize> = states
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let s = s.as_ref()?;
            (s.owed == 0 && t.end_clean(t.atoms[s.atom as usize])).then_some(i)
        })
        .collect();

    Nwba {
        alphabet: t.letters.clone(),
        states: (0..states.len()).map(|i| format!("q{}", i)).collect(),
        initial: [0].into(),
        accepting,
        hier: (0..symbols.len()).map(|i| format!("p{}", i)).collect(),
        hier_initial: [0].into(),
        hier_final: [1].into(),
        delta_call: delta_call
            .into_iter()
            .map(|(q, li, q2, p)| (q, t.letters[li], q2, p))
            .collect(),
        delta_int: delta_int.into_iter().map(|(q, li, q2)| (q, t.letters[li], q2)).collect(),
        delta_ret: delta_ret
            .into_iter()
            .map(|(q, p, li, q2)| (q, p, t.letters[li], q2))
            .collect(),
    }
}
