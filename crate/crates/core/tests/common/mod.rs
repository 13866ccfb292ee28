//! Test-only oracles and generators shared by the acceptance and property
//! targets. Nothing here calls the solvers under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use atomgame_core::{AtomId, CaAtomStructure};
use rayon::prelude::*;

/// Equality patterns of a 3-tuple as `(d01, d02, d12)`.
pub const PATTERNS: [[bool; 3]; 5] = [
    [true, true, true],
    [true, false, false],
    [false, true, false],
    [false, false, true],
    [false, false, false],
];

fn pair(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!(),
    }
}

/// A CA_3 atom structure given by one equality pattern per atom and one
/// partition of the atoms per cylindrifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Small {
    pub pats: Vec<usize>,
    pub parts: [Vec<u8>; 3],
}

impl Small {
    pub fn build(&self) -> CaAtomStructure {
        let names = (0..self.pats.len()).map(|a| format!("a{a}")).collect();
        CaAtomStructure::from_classes(
            3,
            names,
            |a, i, j| PATTERNS[self.pats[a]][pair(i, j)],
            |a, i| self.parts[i][a],
        )
        .expect("small structures are well formed")
    }

    fn key(&self, sigma: &[usize], pi: &[usize; 3]) -> Vec<u8> {
        let k = self.pats.len();
        let mut pats = vec![0u8; k];
        for a in 0..k {
            let p = PATTERNS[self.pats[a]];
            let mut q = [false; 3];
            for i in 0..3 {
                for j in i + 1..3 {
                    q[pair(pi[i], pi[j])] = p[pair(i, j)];
                }
            }
            pats[sigma[a]] = PATTERNS.iter().position(|x| *x == q).unwrap() as u8;
        }
        let mut key = pats;
        let mut parts = vec![Vec::new(); 3];
        for i in 0..3 {
            let mut lab = vec![0u8; k];
            for a in 0..k {
                lab[sigma[a]] = self.parts[i][a];
            }
            parts[pi[i]] = rgs(&lab);
        }
        for p in parts {
            key.extend(p);
        }
        key
    }

    /// Least key over atom renamings and index permutations.
    pub fn canonical_key(&self) -> Vec<u8> {
        let k = self.pats.len();
        let mut best: Option<Vec<u8>> = None;
        for sigma in permutations(k) {
            for pi in permutations(3) {
                let key = self.key(&sigma, &[pi[0], pi[1], pi[2]]);
                if best.as_ref().map_or(true, |b| key < *b) {
                    best = Some(key);
                }
            }
        }
        best.unwrap()
    }
}

fn rgs(lab: &[u8]) -> Vec<u8> {
    let mut map = HashMap::new();
    lab.iter()
        .map(|&x| {
            let next = map.len() as u8;
            *map.entry(x).or_insert(next)
        })
        .collect()
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Restricted growth strings of length `k`: the set partitions of `0..k`.
pub fn set_partitions(k: usize) -> Vec<Vec<u8>> {
    fn go(k: usize, cur: &mut Vec<u8>, max: u8, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in 0..=max + 1 {
            if cur.is_empty() && x > 0 {
                break;
            }
            cur.push(x);
            go(k, cur, max.max(x), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, &mut Vec::new(), 0, &mut out);
    out.dedup();
    out
}

fn multisets(k: usize, kinds: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, kinds: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in from..kinds {
            cur.push(x);
            go(k, kinds, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, kinds, 0, &mut Vec::new(), &mut out);
    out
}

/// Every CA_3 structure with `k` atoms whose diagonals form an equality
/// pattern, one per isomorphism class (atom renaming and index permutation).
pub fn family(k: usize) -> Vec<Small> {
    let parts = set_partitions(k);
    let mut cands = Vec::new();
    for pats in multisets(k, PATTERNS.len()) {
        for p0 in &parts {
            for p1 in &parts {
                for p2 in &parts {
                    cands.push(Small {
                        pats: pats.clone(),
                        parts: [p0.clone(), p1.clone(), p2.clone()],
                    });
                }
            }
        }
    }
    let mut keyed: Vec<(Vec<u8>, Small)> = cands.into_par_iter().map(|s| (s.canonical_key(), s)).collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, s)| s).collect()
}

// ---- naive minimax ----

type Tuple = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Net {
    nodes: Vec<u8>,
    labels: BTreeMap<Tuple, AtomId>,
}

fn tuples_over(nodes: &[u8]) -> Vec<Tuple> {
    let mut out = Vec::new();
    for &a in nodes {
        for &b in nodes {
            for &c in nodes {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Full-tree minimax over plain labelled networks: no canonical forms, no
/// position sharing beyond a memo on exact networks.
pub struct Oracle<'a> {
    s: &'a CaAtomStructure,
    m: u8,
    reuse: bool,
    memo: HashMap<(Net, usize), bool>,
}

impl<'a> Oracle<'a> {
    pub fn new(s: &'a CaAtomStructure, m: usize, reuse: bool) -> Self {
        assert_eq!(s.dim(), 3);
        Oracle {
            s,
            m: m as u8,
            reuse,
            memo: HashMap::new(),
        }
    }

    fn fits(&self, labels: &BTreeMap<Tuple, AtomId>, nodes: &[u8], t: Tuple, a: AtomId) -> bool {
        for i in 0..3 {
            for j in i + 1..3 {
                if (t[i] == t[j]) != self.s.in_diag(a, i, j) {
                    return false;
                }
            }
        }
        for i in 0..3 {
            for &w in nodes {
                let mut u = t;
                u[i] = w;
                if let Some(&b) = labels.get(&u) {
                    if !self.s.cyl_related(i, a, b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All ways to label the unlabelled tuples over `nodes`.
    fn completions(&self, net: &Net) -> Vec<Net> {
        let free: Vec<Tuple> = tuples_over(&net.nodes)
            .into_iter()
            .filter(|t| !net.labels.contains_key(t))
            .collect();
        let mut out = Vec::new();
        let mut work = net.labels.clone();
        self.fill(&net.nodes, &free, 0, &mut work, &mut out);
        out.into_iter()
            .map(|labels| Net {
                nodes: net.nodes.clone(),
                labels,
            })
            .collect()
    }

    fn fill(
        &self,
        nodes: &[u8],
        free: &[Tuple],
        k: usize,
        work: &mut BTreeMap<Tuple, AtomId>,
        out: &mut Vec<BTreeMap<Tuple, AtomId>>,
    ) {
        if k == free.len() {
            out.push(work.clone());
            return;
        }
        for a in 0..self.s.len() {
            if self.fits(work, nodes, free[k], a) {
                work.insert(free[k], a);
                self.fill(nodes, free, k + 1, work, out);
                work.remove(&free[k]);
            }
        }
    }

    fn openings(&self, a: AtomId) -> Vec<Net> {
        let d = |i, j| self.s.in_diag(a, i, j);
        let t1 = if d(0, 1) { 0 } else { 1 };
        let t2 = if d(0, 2) {
            0
        } else if d(1, 2) {
            t1
        } else {
            t1 + 1
        };
        let t: Tuple = [0, t1, t2];
        let mut nodes: Vec<u8> = t.to_vec();
        nodes.sort();
        nodes.dedup();
        if nodes.len() > self.m as usize {
            return Vec::new();
        }
        let mut labels = BTreeMap::new();
        if !self.fits(&labels, &nodes, t, a) {
            return Vec::new();
        }
        labels.insert(t, a);
        self.completions(&Net { nodes, labels })
    }

    fn responses(&self, net: &Net, t: Tuple, i: usize, b: AtomId, z: u8) -> Vec<Net> {
        let mut out = Vec::new();
        let witnessed = net.nodes.iter().any(|&w| {
            let mut u = t;
            u[i] = w;
            net.labels.get(&u) == Some(&b)
        });
        if witnessed {
            out.push(net.clone());
        }
        let mut nodes: Vec<u8> = net.nodes.iter().copied().filter(|&x| x != z).collect();
        let labels: BTreeMap<Tuple, AtomId> = net
            .labels
            .iter()
            .filter(|(u, _)| !u.contains(&z))
            .map(|(u, a)| (*u, *a))
            .collect();
        nodes.push(z);
        nodes.sort();
        let mut y = t;
        y[i] = z;
        if !self.fits(&labels, &nodes, y, b) {
            return out;
        }
        let mut labels = labels;
        labels.insert(y, b);
        out.extend(self.completions(&Net { nodes, labels }));
        out
    }

    fn survives(&mut self, net: &Net, r: usize) -> bool {
        if r == 0 {
            return true;
        }
        if let Some(&v) = self.memo.get(&(net.clone(), r)) {
            return v;
        }
        let mut ok = true;
        'moves: for t in tuples_over(&net.nodes) {
            let a = net.labels[&t];
            for i in 0..3 {
                for b in 0..self.s.len() {
                    if !self.s.cyl_related(i, a, b) {
                        continue;
                    }
                    for z in 0..self.m {
                        let fresh = !net.nodes.contains(&z);
                        let off_face = (0..3).all(|j| j == i || t[j] != z);
                        if !(fresh || (self.reuse && off_face)) {
                            continue;
                        }
                        let resp = self.responses(net, t, i, b, z);
                        if !resp.iter().any(|x| self.survives(x, r - 1)) {
                            ok = false;
                            break 'moves;
                        }
                    }
                }
            }
        }
        self.memo.insert((net.clone(), r), ok);
        ok
    }

    /// Whether ∀ wins the game with `k` moves after the opening.
    pub fn forall_wins(&mut self, k: usize) -> bool {
        if k == 0 {
            return false;
        }
        (0..self.s.len()).any(|a| {
            let opens = self.openings(a);
            opens.iter().all(|o| !self.survives(o, k))
        })
    }
}
pub mod props;
