//! Finite two-player Büchi game solver.
//!
//! Player 0 (the automaton) owns positions where a label and transition
//! are chosen; player 1 (the pathfinder) owns positions where a tree
//! direction is chosen. Player 0 wins a play that visits accepting
//! positions infinitely often; a player unable to move loses.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Automaton,
    Pathfinder,
}

/// Explicit game graph. Positions are indices; edges carry no labels
/// here (move payloads live with the caller).
#[derive(Debug, Default)]
pub struct Game {
    pub owner: Vec<Owner>,
    pub edges: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
}

impl Game {
    pub fn add_position(&mut self, owner: Owner, accepting: bool) -> usize {
        self.owner.push(owner);
        self.edges.push(Vec::new());
        self.accepting.push(accepting);
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.edges[from].push(to);
    }

    fn reverse(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.owner.len()];
        for (u, outs) in self.edges.iter().enumerate() {
            for &v in outs {
                rev[v].push(u);
            }
        }
        rev
    }

    /// Attractor for `player` toward `target`, restricted to `alive`
    /// positions. A pathfinder dead end attracts for the automaton and
    /// vice versa (the stuck player loses).
    fn attractor(
        &self,
        rev: &[Vec<usize>],
        player: Owner,
        target: &[bool],
        alive: &[bool],
    ) -> Vec<bool> {
        let n = self.owner.len();
        let mut attr = vec![false; n];
        let mut out_count = vec![0usize; n];
        for u in 0..n {
            if alive[u] {
                out_count[u] = self.edges[u].iter().filter(|&&v| alive[v]).count();
            }
        }
        let mut queue: VecDeque<usize> = VecDeque::new();
        for u in 0..n {
            if alive[u] && target[u] {
                attr[u] = true;
                queue.push_back(u);
            }
            // A position of the opponent with no live moves is attracted.
            if alive[u] && !target[u] && self.owner[u] != player && out_count[u] == 0 {
                attr[u] = true;
                queue.push_back(u);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &rev[v] {
                if !alive[u] || attr[u] {
                    continue;
                }
                if self.owner[u] == player {
                    attr[u] = true;
                    queue.push_back(u);
                } else {
                    out_count[u] -= 1;
                    if out_count[u] == 0 {
                        attr[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        attr
    }

    /// Winning region of the automaton for the Büchi objective: visit
    /// accepting positions infinitely often. Standard iterated two-
    /// attractor recursion.
    pub fn buchi_winning(&self) -> Vec<bool> {
        let n = self.owner.len();
        let rev = self.reverse();
        let mut alive = vec![true; n];
        loop {
            // Accepting positions that can still move (a dead end cannot
            // be revisited).
            let mut target = vec![false; n];
            for u in 0..n {
                if alive[u] && self.accepting[u] {
                    let can_move = self.edges[u].iter().any(|&v| alive[v]);
                    let is_p1_deadend_win = self.owner[u] == Owner::Pathfinder
                        && self.edges[u].iter().all(|&v| !alive[v]);
                    target[u] = can_move || is_p1_deadend_win;
                }
            }
            let reach = self.attractor(&rev, Owner::Automaton, &target, &alive);
            let mut trap = vec![false; n];
            let mut any_trap = false;
            for u in 0..n {
                if alive[u] && !reach[u] {
                    trap[u] = true;
                    any_trap = true;
                }
            }
            if !any_trap {
                return alive;
            }
            let lost = self.attractor(&rev, Owner::Pathfinder, &trap, &alive);
            for u in 0..n {
                if lost[u] {
                    alive[u] = false;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loop_through_accepting_wins() {
        let mut g = Game::default();
        let a = g.add_position(Owner::Automaton, true);
        let b = g.add_position(Owner::Pathfinder, false);
        g.add_edge(a, b);
        g.add_edge(b, a);
        let win = g.buchi_winning();
        assert!(win[a] && win[b]);
    }

    #[test]
    fn dead_end_automaton_position_loses() {
        let mut g = Game::default();
        let a = g.add_position(Owner::Automaton, true);
        let win = g.buchi_winning();
        assert!(!win[a]);
    }

    #[test]
    fn pathfinder_chooses_the_bad_branch() {
        let mut g = Game::default();
        let a = g.add_position(Owner::Automaton, true);
        let p = g.add_position(Owner::Pathfinder, false);
        let dead = g.add_position(Owner::Automaton, true);
        g.add_edge(a, p);
        g.add_edge(p, a);
        g.add_edge(p, dead);
        let win = g.buchi_winning();
        assert!(!win[a], "pathfinder moves into the dead end");
        assert!(!win[dead]);
    }

    #[test]
    fn pathfinder_dead_end_wins_for_automaton() {
        let mut g = Game::default();
        let a = g.add_position(Owner::Automaton, true);
        let p = g.add_position(Owner::Pathfinder, false);
        g.add_edge(a, p);
        let win = g.buchi_winning();
        assert!(win[a] && win[p]);
    }

    #[test]
    fn non_accepting_loop_loses() {
        let mut g = Game::default();
        let a = g.add_position(Owner::Automaton, false);
        let p = g.add_position(Owner::Pathfinder, false);
        g.add_edge(a, p);
        g.add_edge(p, a);
        let win = g.buchi_winning();
        assert!(!win[a]);
    }
}
