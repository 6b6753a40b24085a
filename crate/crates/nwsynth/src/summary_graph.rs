//! Per-component configuration graphs over an NWBA.
//!
//! For one component and one automaton, the graph's vertices are
//! configurations: entry and re-entry configurations carry the automaton
//! state with the next position pending; call and exit configurations
//! carry the state reached just before the boundary position together
//! with the input symbol chosen for it (the boundary letter itself is
//! only fully known one frame away, so the call/return transitions of
//! the automaton are applied by whichever side knows the letter).
//! Component edges witness internal product runs, call edges connect
//! every call configuration to every re-entry configuration (the real
//! constraint is delegated to the child check), and an edge to ⊥ records
//! an infinite internal run visiting accepting states infinitely often.

use crate::nested_word::{Letter, Sym};
use crate::nwba::{Nwba, NwbaIndex};
use crate::rlc::RlcComponent;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

/// A vertex of the configuration graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Config {
    /// About to run from the component's initial state.
    Entry { q: usize },
    /// About to enter the j-th call state on input `sigma`; `q` is the
    /// automaton state before the call position.
    Call { j: usize, sigma: Sym, q: usize },
    /// About to resume from the m-th re-entry state.
    Reentry { m: usize, q: usize },
    /// About to enter the i-th return state on input `sigma`; `q` is the
    /// automaton state before the return position.
    Exit { i: usize, sigma: Sym, q: usize },
    /// An infinite internal accepting suffix.
    Bottom,
}

/// A component edge: an internal product run from a source configuration
/// to a boundary configuration. `witness` holds the inputs consumed,
/// including the boundary input; `acc_witness` a run passing an accepting
/// state, when one exists.
#[derive(Debug, Clone)]
pub struct ComponentEdge {
    pub src: usize,
    pub dst: usize,
    pub accepting: bool,
    pub witness: Vec<Sym>,
    pub acc_witness: Option<Vec<Sym>>,
}

#[derive(Debug, Clone)]
pub struct ConfigGraph {
    pub n_q: usize,
    pub n_c: usize,
    pub n_r: usize,
    pub n_inputs: usize,
    pub configs: Vec<Config>,
    pub component_edges: Vec<ComponentEdge>,
    /// Outgoing component-edge ids per configuration.
    pub out_edges: Vec<Vec<usize>>,
    /// Complete bipartite call edges: every Call vertex to every Reentry
    /// vertex; materialized as the list of Reentry vertex ids.
    pub reentry_ids: Vec<usize>,
    /// Per configuration: an edge to ⊥ exists.
    pub bottom: Vec<bool>,
}

impl ConfigGraph {
    pub fn id_of(&self, c: &Config) -> usize {
        let nq = self.n_q;
        let ni = self.n_inputs;
        match *c {
            Config::Entry { q } => q,
            Config::Call { j, sigma, q } => nq + (j * ni + sigma.0 as usize) * nq + q,
            Config::Reentry { m, q } => nq + self.n_c * ni * nq + m * nq + q,
            Config::Exit { i, sigma, q } => {
                nq + self.n_c * ni * nq
                    + self.n_r * nq
                    + (i * ni + sigma.0 as usize) * nq
                    + q
            }
            Config::Bottom => self.configs.len() - 1,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.configs.len()
    }

    pub fn bottom_id(&self) -> usize {
        self.configs.len() - 1
    }

    /// Human-readable adjacency listing.
    pub fn dump(&self, component: &str) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "configuration graph for component {}", component);
        let _ = writeln!(
            s,
            "  {} vertices, {} component edges",
            self.n_vertices(),
            self.component_edges.len()
        );
        for (i, cfg) in self.configs.iter().enumerate() {
            let mut lines = Vec::new();
            for &e in &self.out_edges[i] {
                let edge = &self.component_edges[e];
                lines.push(format!(
                    "{:?}{}",
                    self.configs[edge.dst],
                    if edge.accepting { " [accepting]" } else { "" }
                ));
            }
            if self.bottom[i] {
                lines.push("Bottom".to_string());
            }
            if matches!(cfg, Config::Call { .. }) {
                lines.push(format!("-> all {} re-entry configurations", self.reentry_ids.len()));
            }
            if !lines.is_empty() {
                let _ = writeln!(s, "  {:?}:", cfg);
                for l in lines {
                    let _ = writeln!(s, "    -> {}", l);
                }
            }
        }
        s
    }
}

/// Builds the configuration graph of `component` against `aut`.
pub fn build_graph(component: &RlcComponent, aut: &Nwba, n_inputs: usize) -> ConfigGraph {
    let n_q = aut.states.len();
    let n_c = component.calls.len();
    let n_r = component.reentry.len();
    let idx = aut.index();

    let mut configs = Vec::new();
    for q in 0..n_q {
        configs.push(Config::Entry { q });
    }
    for j in 0..n_c {
        for sigma in 0..n_inputs {
            for q in 0..n_q {
                configs.push(Config::Call { j, sigma: Sym(sigma as u16), q });
            }
        }
    }
    for m in 0..n_r {
        for q in 0..n_q {
            configs.push(Config::Reentry { m, q });
        }
    }
    for i in 0..n_r {
        for sigma in 0..n_inputs {
            for q in 0..n_q {
                configs.push(Config::Exit { i, sigma: Sym(sigma as u16), q });
            }
        }
    }
    configs.push(Config::Bottom);

    let mut graph = ConfigGraph {
        n_q,
        n_c,
        n_r,
        n_inputs,
        configs,
        component_edges: Vec::new(),
        out_edges: Vec::new(),
        reentry_ids: Vec::new(),
        bottom: Vec::new(),
    };
    graph.out_edges = vec![Vec::new(); graph.configs.len()];
    graph.bottom = vec![false; graph.configs.len()];
    graph.reentry_ids = (0..n_r)
        .flat_map(|m| (0..n_q).map(move |q| Config::Reentry { m, q }))
        .map(|c| graph.id_of(&c))
        .collect();

    // The ⊥ predicate on the internal product: nodes (s, q) with s not an
    // exit state; an edge targeting an accepting automaton state that lies
    // on a cycle gives every node reaching it an edge to ⊥.
    let good_start = internal_lasso_starts(component, aut, &idx, n_inputs);

    // Component edges per source configuration.
    let mut sources: Vec<(usize, usize, usize)> = Vec::new(); // (cfg id, comp state, q)
    for q in 0..n_q {
        sources.push((graph.id_of(&Config::Entry { q }), component.initial, q));
    }
    for m in 0..n_r {
        for q in 0..n_q {
            sources.push((graph.id_of(&Config::Reentry { m, q }), component.reentry[m], q));
        }
    }

    for (src_id, s0, q0) in sources {
        if good_start.contains(&(s0, q0)) {
            graph.bottom[src_id] = true;
        }
        // BFS over (s, q, seen-accepting), retaining first-reach witnesses.
        let mut seen_map: HashMap<(usize, usize, bool), Vec<Sym>> = HashMap::new();
        let mut queue = VecDeque::new();
        seen_map.insert((s0, q0, false), Vec::new());
        queue.push_back((s0, q0, false));
        // (dst cfg, plain witness, accepting witness)
        let mut edges: HashMap<usize, (Option<Vec<Sym>>, Option<Vec<Sym>>)> = HashMap::new();
        while let Some((s, q, seen)) = queue.pop_front() {
            let prefix = seen_map[&(s, q, seen)].clone();
            for sigma in 0..n_inputs {
                let sym = Sym(sigma as u16);
                let s2 = component.step_state(s, sym);
                let mut witness = prefix.clone();
                witness.push(sym);
                if let Some(j) = component.is_call_state(s2) {
                    let dst = graph.id_of(&Config::Call { j, sigma: sym, q });
                    let entry = edges.entry(dst).or_default();
                    if entry.0.is_none() {
                        entry.0 = Some(witness.clone());
                    }
                    if seen && entry.1.is_none() {
                        entry.1 = Some(witness.clone());
                    }
                } else if let Some(i) = component.is_return_state(s2) {
                    let dst = graph.id_of(&Config::Exit { i, sigma: sym, q });
                    let entry = edges.entry(dst).or_default();
                    if entry.0.is_none() {
                        entry.0 = Some(witness.clone());
                    }
                    if seen && entry.1.is_none() {
                        entry.1 = Some(witness.clone());
                    }
                } else {
                    let letter = Letter::new(sym, component.label(s2));
                    if let Some(succs) = idx.int.get(&(q, letter)) {
                        for &q2 in succs {
                            let seen2 = seen || aut.accepting.contains(&q2);
                            if !seen_map.contains_key(&(s2, q2, seen2)) {
                                seen_map.insert((s2, q2, seen2), witness.clone());
                                queue.push_back((s2, q2, seen2));
                            }
                        }
                    }
                }
            }
        }
        let mut dsts: Vec<usize> = edges.keys().copied().collect();
        dsts.sort_unstable();
        for dst in dsts {
            let (plain, acc) = edges.remove(&dst).unwrap();
            let witness = plain.expect("plain witness exists whenever edge recorded");
            let id = graph.component_edges.len();
            graph.component_edges.push(ComponentEdge {
                src: src_id,
                dst,
                accepting: acc.is_some(),
                witness,
                acc_witness: acc,
            });
            graph.out_edges[src_id].push(id);
        }
    }

    graph
}

/// Nodes of the internal product from which an infinite internal run
/// visiting accepting states infinitely often exists.
fn internal_lasso_starts(
    component: &RlcComponent,
    aut: &Nwba,
    idx: &NwbaIndex,
    n_inputs: usize,
) -> HashSet<(usize, usize)> {
    // Internal product adjacency.
    let mut adj: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    for s in 0..component.n_states() {
        if component.is_exit_state(s) {
            continue;
        }
        for q in 0..aut.states.len() {
            let mut outs = Vec::new();
            for sigma in 0..n_inputs {
                let sym = Sym(sigma as u16);
                let s2 = component.step_state(s, sym);
                if component.is_exit_state(s2) {
                    continue;
                }
                let letter = Letter::new(sym, component.label(s2));
                if let Some(succs) = idx.int.get(&(q, letter)) {
                    for &q2 in succs {
                        outs.push((s2, q2));
                    }
                }
            }
            nodes.push((s, q));
            adj.insert((s, q), outs);
        }
    }
    let reaches = |from: (usize, usize), to: (usize, usize)| -> bool {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
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
    };
    // Sources of edges that enter an accepting state and lie on a cycle.
    let mut anchors: Vec<(usize, usize)> = Vec::new();
    for &u in &nodes {
        for &v in adj.get(&u).into_iter().flatten() {
            if aut.accepting.contains(&v.1) && reaches(v, u) {
                anchors.push(u);
                break;
            }
        }
    }
    // Everything that reaches an anchor.
    let mut good: HashSet<(usize, usize)> = HashSet::new();
    let mut rev: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for (&u, outs) in &adj {
        for &v in outs {
            rev.entry(v).or_default().push(u);
        }
    }
    let mut queue: VecDeque<(usize, usize)> = anchors.into_iter().collect();
    while let Some(n) = queue.pop_front() {
        if good.insert(n) {
            for &m in rev.get(&n).into_iter().flatten() {
                queue.push_back(m);
            }
        }
    }
    good
}

// ---------------------------------------------------------------------------
// Bounded path enumeration

/// One step of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathEdge {
    /// Component edge id.
    Component(usize),
    /// Call edge (call config id, re-entry config id).
    Call(usize, usize),
    /// Edge to ⊥ from the given configuration.
    Bottom(usize),
}

/// A yielded path with an optional marked-edge index (position in
/// `edges`).
#[derive(Debug, Clone)]
pub struct PathYield {
    pub edges: Vec<PathEdge>,
    pub vertices: Vec<usize>,
    pub marked: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum PathMode {
    /// Paths from the source to any target, length bounded; no marking.
    Plain { targets: BTreeSet<usize> },
    /// Paths with exactly one marked edge; marked component edges must be
    /// accepting.
    Marked { targets: BTreeSet<usize> },
    /// Paths whose last vertex repeats, with the marked edge on the cycle.
    Rho,
}

/// Enumerates bounded paths lazily. Duplicate yields (same endpoint, same
/// call-edge multiset, same marking) are pruned; the surviving stream
/// still induces every conjunction a transition formula needs.
pub fn enum_paths<'g>(
    graph: &'g ConfigGraph,
    source: usize,
    mode: PathMode,
    bound: usize,
) -> impl Iterator<Item = PathYield> + 'g {
    PathIter::new(graph, source, mode, bound)
}

struct PathIter<'g> {
    graph: &'g ConfigGraph,
    mode: PathMode,
    bound: usize,
    // DFS stack: (vertex, next-choice-index, pending-yields for this node)
    stack: Vec<Frame>,
    vertices: Vec<usize>,
    edges: Vec<PathEdge>,
    marked: Vec<Option<usize>>, // marking position per prefix depth
    pending: VecDeque<PathYield>,
    yielded: HashSet<(usize, Vec<(PathEdge, bool)>)>,
}

struct Frame {
    vertex: usize,
    choice: usize,
}

impl<'g> PathIter<'g> {
    fn new(graph: &'g ConfigGraph, source: usize, mode: PathMode, bound: usize) -> Self {
        PathIter {
            graph,
            mode,
            bound,
            stack: vec![Frame { vertex: source, choice: 0 }],
            vertices: vec![source],
            edges: Vec::new(),
            marked: vec![None],
            pending: VecDeque::new(),
            yielded: HashSet::new(),
        }
    }

    /// All (edge, marks-this-edge) successor options of `vertex`.
    fn options(&self, vertex: usize) -> Vec<(PathEdge, usize, bool)> {
        // (edge, target, marked?)
        let mut out = Vec::new();
        let marking = !matches!(self.mode, PathMode::Plain { .. });
        let mark_open = marking && self.marked.last().unwrap().is_none();
        for &e in &self.graph.out_edges[vertex] {
            let edge = &self.graph.component_edges[e];
            out.push((PathEdge::Component(e), edge.dst, false));
            if mark_open && edge.accepting {
                out.push((PathEdge::Component(e), edge.dst, true));
            }
        }
        if matches!(self.graph.configs[vertex], Config::Call { .. }) {
            for &r in &self.graph.reentry_ids {
                out.push((PathEdge::Call(vertex, r), r, false));
                if mark_open {
                    out.push((PathEdge::Call(vertex, r), r, true));
                }
            }
        }
        if self.graph.bottom[vertex] {
            out.push((PathEdge::Bottom(vertex), self.graph.bottom_id(), false));
        }
        out
    }

    fn try_yield(&mut self) {
        let vertex = *self.vertices.last().unwrap();
        if self.edges.is_empty() {
            return;
        }
        let mark = *self.marked.last().unwrap();
        let ok = match &self.mode {
            PathMode::Plain { targets } => targets.contains(&vertex),
            PathMode::Marked { targets } => targets.contains(&vertex) && mark.is_some(),
            PathMode::Rho => {
                // Last vertex repeats and the mark lies on the cycle.
                match mark {
                    None => false,
                    Some(mpos) => {
                        let first = self.vertices.iter().position(|&v| v == vertex).unwrap();
                        first + 1 < self.vertices.len() && mpos >= first
                    }
                }
            }
        };
        if !ok {
            return;
        }
        let key_edges: Vec<(PathEdge, bool)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, mark == Some(i)))
            .collect();
        if self.yielded.insert((vertex, key_edges)) {
            self.pending.push_back(PathYield {
                edges: self.edges.clone(),
                vertices: self.vertices.clone(),
                marked: mark,
            });
        }
    }
}

impl<'g> Iterator for PathIter<'g> {
    type Item = PathYield;

    fn next(&mut self) -> Option<PathYield> {
        loop {
            if let Some(y) = self.pending.pop_front() {
                return Some(y);
            }
            let depth = self.stack.len();
            if depth == 0 {
                return None;
            }
            let vertex = self.stack[depth - 1].vertex;
            let choice = self.stack[depth - 1].choice;
            let options = self.options(vertex);
            if choice >= options.len() || self.edges.len() >= self.bound {
                self.stack.pop();
                if !self.edges.is_empty() {
                    self.edges.pop();
                    self.vertices.pop();
                    self.marked.pop();
                }
                continue;
            }
            self.stack[depth - 1].choice += 1;
            let (edge, target, marks) = options[choice];
            // ⊥ is absorbing: a path through it cannot continue, and only
            // Plain mode uses it as an endpoint.
            let prev_mark = *self.marked.last().unwrap();
            let new_mark = if marks { Some(self.edges.len()) } else { prev_mark };
            self.edges.push(edge);
            self.vertices.push(target);
            self.marked.push(new_mark);
            self.stack.push(Frame { vertex: target, choice: usize::MAX });
            // Mark the new frame as "yield then explore".
            let last = self.stack.len() - 1;
            self.stack[last].choice = 0;
            self.try_yield();
            if target == self.graph.bottom_id() {
                // No outgoing edges from ⊥; pop immediately after yield.
                continue;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Minimal-model extraction

/// A minimal transition model: the set of call edges a guessed path
/// crosses, each with the accepting-obligation bit its marking assigns.
pub type CallAtom = (usize, usize, bool); // (call cfg, reentry cfg, marked)
pub type Model = BTreeSet<CallAtom>;

fn antichain_insert(chain: &mut Vec<Model>, m: Model) -> bool {
    if chain.iter().any(|ex| ex.is_subset(&m)) {
        return false;
    }
    chain.retain(|ex| !m.is_subset(ex));
    chain.push(m);
    true
}

/// Per-extraction caps. Transition formulas are exponential in the worst
/// case; extraction yields models smallest-first and reports truncation
/// so the solver can keep its verdicts honest.
const MODELS_PER_KEY: usize = 32;
const WORK_BUDGET: usize = 150_000;

/// Minimal models of paths from one source, indexed by endpoint and by
/// whether the path placed its one allowed mark. Models are discovered in
/// order of increasing call-edge count.
pub struct Extraction {
    chains: Vec<[Vec<Model>; 2]>,
    pub(crate) truncated: bool,
}

impl Extraction {
    pub fn models(&self, cfg: usize, marked: bool) -> &[Model] {
        &self.chains[cfg][usize::from(marked)]
    }
}

struct KeyedChains {
    chains: Vec<[Vec<Model>; 2]>,
    truncated: bool,
    budget: usize,
}

impl KeyedChains {
    fn new(n: usize) -> Self {
        KeyedChains {
            chains: (0..n).map(|_| [Vec::new(), Vec::new()]).collect(),
            truncated: false,
            budget: WORK_BUDGET,
        }
    }

    fn insert(&mut self, cfg: usize, marked: bool, m: Model) -> bool {
        if self.budget == 0 {
            self.truncated = true;
            return false;
        }
        self.budget -= 1;
        let chain = &mut self.chains[cfg][usize::from(marked)];
        if chain.iter().any(|ex| ex.is_subset(&m)) {
            return false;
        }
        if chain.len() >= MODELS_PER_KEY {
            self.truncated = true;
            return false;
        }
        chain.retain(|ex| !m.is_subset(ex));
        chain.push(m);
        true
    }
}

/// Layered best-first search: all models with k call edges are processed
/// before any with k + 1, so truncation keeps the smallest models.
/// Test/diagnostic surface for the extraction engine.
pub fn extract_public(graph: &ConfigGraph, source: usize) -> Extraction {
    extract(graph, source)
}

/// Test/diagnostic surface for the lasso extraction.
pub fn rho_public(graph: &ConfigGraph, source: usize) -> (Vec<Model>, bool) {
    extract_rho(graph, source)
}

pub(crate) fn extract(graph: &ConfigGraph, source: usize) -> Extraction {
    let mut keyed = KeyedChains::new(graph.n_vertices());
    let mut layer: Vec<(usize, bool, Model)> = Vec::new();
    let mut next_layer: Vec<(usize, bool, Model)> = Vec::new();
    keyed.insert(source, false, Model::new());
    layer.push((source, false, Model::new()));
    while !layer.is_empty() {
        // Component edges keep the model size; process the current layer
        // to a fixpoint before promoting call-edge extensions.
        let mut queue: VecDeque<(usize, bool, Model)> = layer.drain(..).collect();
        while let Some((v, ms, m)) = queue.pop_front() {
            if keyed.budget == 0 {
                return Extraction { chains: keyed.chains, truncated: true };
            }
            for &e in &graph.out_edges[v] {
                let edge = &graph.component_edges[e];
                if keyed.insert(edge.dst, ms, m.clone()) {
                    queue.push_back((edge.dst, ms, m.clone()));
                }
                if !ms && edge.accepting && keyed.insert(edge.dst, true, m.clone()) {
                    queue.push_back((edge.dst, true, m.clone()));
                }
            }
            if matches!(graph.configs[v], Config::Call { .. }) {
                for &r in &graph.reentry_ids {
                    let mut m2 = m.clone();
                    m2.insert((v, r, false));
                    if keyed.insert(r, ms, m2.clone()) {
                        next_layer.push((r, ms, m2));
                    }
                    if !ms {
                        let mut m3 = m.clone();
                        m3.insert((v, r, true));
                        if keyed.insert(r, true, m3.clone()) {
                            next_layer.push((r, true, m3));
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut layer, &mut next_layer);
    }
    let truncated = keyed.truncated;
    Extraction { chains: keyed.chains, truncated }
}

/// Minimal models of ρ-paths from `source`: an unmarked stem to a cycle
/// anchor plus a marked cycle returning to it. The search state carries
/// the anchor so one budgeted pass covers all lassos.
pub(crate) fn extract_rho(graph: &ConfigGraph, source: usize) -> (Vec<Model>, bool) {
    // chains keyed by (vertex, anchor option, mark state); anchor indexes
    // into cycle-capable vertices.
    let anchors: Vec<usize> = (0..graph.n_vertices())
        .filter(|&v| matches!(graph.configs[v], Config::Call { .. } | Config::Reentry { .. }))
        .collect();
    let anchor_pos: HashMap<usize, usize> = anchors.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let idx = |v: usize, anchor: Option<usize>, ms: bool| -> usize {
        let base = match anchor {
            None => 0,
            Some(a) => (1 + anchor_pos[&a]) * 2,
        };
        (base + usize::from(ms)) * graph.n_vertices() + v
    };
    let n_keys = (1 + anchors.len()) * 2 * graph.n_vertices();
    let mut chains: Vec<Vec<Model>> = vec![Vec::new(); n_keys];
    let mut yields: Vec<Model> = Vec::new();
    let mut truncated = false;
    let mut budget = WORK_BUDGET;
    let mut insert = |key: usize, m: Model, chains: &mut Vec<Vec<Model>>, truncated: &mut bool| -> bool {
        if budget == 0 {
            *truncated = true;
            return false;
        }
        budget -= 1;
        let chain = &mut chains[key];
        if chain.iter().any(|ex| ex.is_subset(&m)) {
            return false;
        }
        if chain.len() >= MODELS_PER_KEY {
            *truncated = true;
            return false;
        }
        chain.retain(|ex| !m.is_subset(ex));
        chain.push(m);
        true
    };
    let mut layer: Vec<(usize, Option<usize>, bool, Model)> = Vec::new();
    let mut next_layer: Vec<(usize, Option<usize>, bool, Model)> = Vec::new();
    insert(idx(source, None, false), Model::new(), &mut chains, &mut truncated);
    layer.push((source, None, false, Model::new()));
    while !layer.is_empty() {
        let mut queue: VecDeque<(usize, Option<usize>, bool, Model)> = layer.drain(..).collect();
        while let Some((v, anchor, ms, m)) = queue.pop_front() {
            if truncated && yields.len() >= MODELS_PER_KEY {
                return (yields, true);
            }
            // On the stem, a cycle may begin at any cycle-capable vertex.
            let mut targets: Vec<(Option<usize>, bool)> = vec![(anchor, ms)];
            if anchor.is_none() && anchor_pos.contains_key(&v) {
                targets.push((Some(v), false));
            }
            for (anchor2, ms2) in targets {
                let cycling = anchor2.is_some();
                for &e in &graph.out_edges[v] {
                    let edge = &graph.component_edges[e];
                    let mut push = |msx: bool,
                                    chains: &mut Vec<Vec<Model>>,
                                    queue: &mut VecDeque<(usize, Option<usize>, bool, Model)>,
                                    truncated: &mut bool| {
                        if cycling && Some(edge.dst) == anchor2 && msx {
                            if antichain_insert(&mut yields, m.clone()) && yields.len() > 4 * MODELS_PER_KEY {
                                *truncated = true;
                            }
                            return;
                        }
                        if insert(idx(edge.dst, anchor2, msx), m.clone(), chains, truncated) {
                            queue.push_back((edge.dst, anchor2, msx, m.clone()));
                        }
                    };
                    push(ms2, &mut chains, &mut queue, &mut truncated);
                    if cycling && !ms2 && edge.accepting {
                        push(true, &mut chains, &mut queue, &mut truncated);
                    }
                }
                if matches!(graph.configs[v], Config::Call { .. }) {
                    for &r in &graph.reentry_ids {
                        let mut push = |bit: bool,
                                        msx: bool,
                                        chains: &mut Vec<Vec<Model>>,
                                        next_layer: &mut Vec<(usize, Option<usize>, bool, Model)>,
                                        truncated: &mut bool| {
                            let mut m2 = m.clone();
                            m2.insert((v, r, bit));
                            if cycling && Some(r) == anchor2 && msx {
                                if antichain_insert(&mut yields, m2.clone()) && yields.len() > 4 * MODELS_PER_KEY {
                                    *truncated = true;
                                }
                                return;
                            }
                            if insert(idx(r, anchor2, msx), m2.clone(), chains, truncated) {
                                next_layer.push((r, anchor2, msx, m2));
                            }
                        };
                        push(false, ms2, &mut chains, &mut next_layer, &mut truncated);
                        if cycling && !ms2 {
                            push(true, true, &mut chains, &mut next_layer, &mut truncated);
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut layer, &mut next_layer);
    }
    // Reduce the yield set once more (stems and cycles were combined in
    // discovery order).
    let mut out = Vec::new();
    for m in yields {
        antichain_insert(&mut out, m);
    }
    (out, truncated)
}

impl ConfigGraph {
    /// Minimal models of paths source → target. With `marked`, paths carry
    /// exactly one mark (an accepting component edge contributes no atom;
    /// a marked call edge contributes its atom with the bit set).
    pub fn models_to(&self, source: usize, target: usize, marked: bool) -> Vec<Model> {
        let ext = extract(self, source);
        let mut out = ext.models(target, marked).to_vec();
        if target == source && !marked {
            out.retain(|m| !m.is_empty());
        }
        out
    }

    /// Minimal models of unmarked paths from source to a ⊥ edge.
    pub fn models_to_bottom(&self, source: usize) -> Vec<Model> {
        let ext = extract(self, source);
        let mut chain = Vec::new();
        for (v, has) in self.bottom.iter().enumerate() {
            if *has {
                for m in ext.models(v, false) {
                    antichain_insert(&mut chain, m.clone());
                }
            }
        }
        chain
    }

    /// Minimal models of ρ-paths from source: an unmarked stem to some
    /// vertex plus a cycle back to it carrying exactly one mark.
    pub fn rho_models(&self, source: usize) -> Vec<Model> {
        extract_rho(self, source).0
    }
}
