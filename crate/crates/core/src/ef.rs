//! Ehrenfeucht–Fraïssé forth game with pebbles on finite irreflexive graphs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Player;

/// Finite irreflexive graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![false; n * n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Index {
                    index: a.max(b),
                    bound: n,
                });
            }
            if a == b {
                return Err(Error::Parameter(format!("loop at {a}")));
            }
            adj[a * n + b] = true;
            adj[b * n + a] = true;
        }
        Ok(Graph { n, adj })
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let adj = (0..n * n).map(|c| c / n != c % n).collect();
        Graph { n, adj }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.n + b]
    }
}

struct Solver<'a> {
    g: &'a Graph,
    h: &'a Graph,
    p: usize,
    memo: HashMap<(Vec<(usize, usize)>, usize), bool>,
}

impl Solver<'_> {
    fn extends(&self, pairs: &[(usize, usize)], a: usize, b: usize) -> bool {
        pairs.iter().all(|&(x, y)| {
            (x == a) == (y == b) && self.g.adjacent(x, a) == self.h.adjacent(y, b)
        })
    }

    /// Whether ∃ survives `r` more rounds from `pairs`.
    fn exists_wins(&mut self, pairs: Vec<(usize, usize)>, r: usize) -> bool {
        if r == 0 || self.p == 0 {
            return true;
        }
        if let Some(&v) = self.memo.get(&(pairs.clone(), r)) {
            return v;
        }
        let mut bases: Vec<Vec<(usize, usize)>> = Vec::new();
        if pairs.len() < self.p {
            bases.push(pairs.clone());
        }
        for k in 0..pairs.len() {
            let mut b = pairs.clone();
            b.remove(k);
            if !bases.contains(&b) {
                bases.push(b);
            }
        }
        let mut win = true;
        'forall: for base in bases {
            for a in 0..self.g.len() {
                let mut answered = false;
                for b in 0..self.h.len() {
                    if self.extends(&base, a, b) {
                        let mut next = base.clone();
                        next.push((a, b));
                        next.sort_unstable();
                        if self.exists_wins(next, r - 1) {
                            answered = true;
                            break;
                        }
                    }
                }
                if !answered {
                    win = false;
                    break 'forall;
                }
            }
        }
        self.memo.insert((pairs, r), win);
        win
    }
}

/// Winner of the `r`-round forth game with `p` pebble pairs, ∀ playing on
/// `g` and ∃ answering on `h`.
pub fn ef_pebble(p: usize, r: usize, g: &Graph, h: &Graph) -> Player {
    let mut s = Solver {
        g,
        h,
        p,
        memo: HashMap::new(),
    };
    if s.exists_wins(Vec::new(), r) {
        Player::Exists
    } else {
        Player::Forall
    }
}

/// Fewest rounds in which ∀ wins with `p` pebbles, searching up to `max_r`.
pub fn ef_min_rounds(p: usize, g: &Graph, h: &Graph, max_r: usize) -> Option<usize> {
    let mut s = Solver {
        g,
        h,
        p,
        memo: HashMap::new(),
    };
    (0..=max_r).find(|&r| !s.exists_wins(Vec::new(), r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_against_k3() {
        let (g, h) = (Graph::complete(4), Graph::complete(3));
        assert_eq!(ef_pebble(4, 4, &g, &h), Player::Forall);
        assert_eq!(ef_pebble(4, 3, &g, &h), Player::Exists);
        assert_eq!(ef_min_rounds(4, &g, &h, 6), Some(4));
    }

    #[test]
    fn same_graph_is_exists() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        for p in 0..3 {
            for r in 0..4 {
                assert_eq!(ef_pebble(p, r, &g, &g), Player::Exists);
            }
        }
    }

    #[test]
    fn two_pebbles_cannot_tell_k2_from_k3() {
        let (g, h) = (Graph::complete(2), Graph::complete(3));
        assert_eq!(ef_pebble(2, 2, &g, &h), Player::Exists);
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
        assert!(Graph::from_edges(2, &[(1, 1)]).is_err());
    }
}
