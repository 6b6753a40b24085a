//! Small component libraries shared by the test suites and usable as
//! CLI examples. All fixtures use input alphabet {a} or {a,b} and output
//! alphabet {x,y}.

use crate::nested_word::{Alphabet, Sym};
use crate::rlc::{Composition, Element, Library, RlcComponent};

pub const IN_A: Sym = Sym(0);
pub const IN_B: Sym = Sym(1);
pub const OUT_X: Sym = Sym(0);
pub const OUT_Y: Sym = Sym(1);

fn ab_a_xy() -> Alphabet {
    Alphabet::new(["a"], ["x", "y"])
}

/// A component that loops forever on its internal state. Call, return and
/// re-entry states exist (the library arity demands them) but are
/// unreachable. State layout: 0 = s0, 1 = c1, 2 = r1, 3 = e1.
pub fn loop_component(name: &str, label: Sym) -> RlcComponent {
    RlcComponent {
        name: name.to_string(),
        state_names: vec!["s0".into(), "c1".into(), "r1".into(), "e1".into()],
        initial: 0,
        reentry: vec![3],
        calls: vec![1],
        returns: vec![2],
        delta: vec![vec![0], vec![0], vec![0], vec![0]],
        labels: vec![label, label, label, label],
    }
}

/// Calls its interface target on the first input, then returns once the
/// callee comes back. Layout: 0 = s0, 1 = c1, 2 = e1, 3 = r1.
pub fn caller_component(name: &str, label: Sym) -> RlcComponent {
    RlcComponent {
        name: name.to_string(),
        state_names: vec!["s0".into(), "c1".into(), "e1".into(), "r1".into()],
        initial: 0,
        reentry: vec![2],
        calls: vec![1],
        returns: vec![3],
        delta: vec![vec![1], vec![0], vec![3], vec![0]],
        labels: vec![label, label, label, label],
    }
}

/// Returns immediately on the first input. Layout: 0 = s0, 1 = r1,
/// 2 = c1, 3 = e1.
pub fn callee_component(name: &str, label: Sym) -> RlcComponent {
    RlcComponent {
        name: name.to_string(),
        state_names: vec!["s0".into(), "r1".into(), "c1".into(), "e1".into()],
        initial: 0,
        reentry: vec![3],
        calls: vec![2],
        returns: vec![1],
        delta: vec![vec![1], vec![0], vec![0], vec![0]],
        labels: vec![label, label, label, label],
    }
}

/// Calls on the first input and, after each return, calls again: with a
/// returning callee this produces `(call ret)^ω`. Layout: 0 = s0,
/// 1 = c1, 2 = e1, 3 = r1.
pub fn call_loop_component(name: &str, label: Sym) -> RlcComponent {
    RlcComponent {
        name: name.to_string(),
        state_names: vec!["s0".into(), "c1".into(), "e1".into(), "r1".into()],
        initial: 0,
        reentry: vec![2],
        calls: vec![1],
        returns: vec![3],
        delta: vec![vec![1], vec![0], vec![1], vec![0]],
        labels: vec![label, label, label, label],
    }
}

/// Library with the single x-labeled loop component.
pub fn lib_loop_x() -> Library {
    Library { alphabet: ab_a_xy(), n_c: 1, n_r: 1, components: vec![loop_component("LOOPX", OUT_X)] }
}

/// Library with the single y-labeled loop component.
pub fn lib_loop_y() -> Library {
    Library { alphabet: ab_a_xy(), n_c: 1, n_r: 1, components: vec![loop_component("LOOPY", OUT_Y)] }
}

/// Library with both loop components.
pub fn lib_loop_xy() -> Library {
    Library {
        alphabet: ab_a_xy(),
        n_c: 1,
        n_r: 1,
        components: vec![loop_component("LOOPX", OUT_X), loop_component("LOOPY", OUT_Y)],
    }
}

/// CALLER and CALLEE, both x-labeled.
pub fn lib_caller_callee() -> Library {
    Library {
        alphabet: ab_a_xy(),
        n_c: 1,
        n_r: 1,
        components: vec![caller_component("CALLER", OUT_X), callee_component("CALLEE", OUT_X)],
    }
}

/// A wider library: caller, callee, loop and call-loop with mixed labels.
pub fn lib_mixed() -> Library {
    Library {
        alphabet: ab_a_xy(),
        n_c: 1,
        n_r: 1,
        components: vec![
            caller_component("CALLER", OUT_X),
            callee_component("CALLEE", OUT_Y),
            loop_component("LOOPX", OUT_X),
            call_loop_component("CALLLOOP", OUT_X),
        ],
    }
}

/// One element wired to itself.
pub fn self_composition(component: usize, lib: &Library) -> Composition {
    Composition {
        elements: vec![Element { component, interface: vec![0; lib.n_c] }],
    }
}

/// CALLER as root calling CALLEE; CALLEE's own interface is self-wired
/// (unreachable).
pub fn caller_callee_composition(lib: &Library) -> Composition {
    let _ = lib;
    Composition {
        elements: vec![
            Element { component: 0, interface: vec![1] },
            Element { component: 1, interface: vec![1] },
        ],
    }
}
