//! Atomic networks over a CA atom structure: consistency, the `≡_z`
//! relation, ∃'s responses to cylindrifier moves, and canonical forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::atomset::AtomSet;
use crate::error::{structural, Error, Result};
use crate::structures::{AtomId, CaAtomStructure, ValidationReport};

pub type Node = usize;

const NONE: u32 = u32::MAX;

/// Largest node budget a network supports.
pub const MAX_NODES: usize = 16;

/// An n-dimensional atomic network with nodes drawn from `0..m`.
///
/// Labels are stored densely over all `m^n` tuples; tuples that touch an
/// absent node hold no label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    n: usize,
    m: usize,
    nodes: u32,
    labels: Vec<u32>,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Network(nodes={:?}, ", self.nodes().collect::<Vec<_>>())?;
        let labelled: Vec<_> = (0..self.labels.len())
            .filter(|&t| self.labels[t] != NONE)
            .map(|t| (self.decode(t), self.labels[t]))
            .collect();
        write!(f, "{labelled:?})")
    }
}

impl Network {
    pub fn empty(n: usize, m: usize) -> Self {
        assert!(m <= MAX_NODES, "node budget {m} exceeds {MAX_NODES}");
        Network {
            n,
            m,
            nodes: 0,
            labels: vec![NONE; m.pow(n as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.m).filter(move |&x| self.nodes >> x & 1 == 1)
    }

    pub fn node_mask(&self) -> u32 {
        self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.count_ones() as usize
    }

    pub fn has_node(&self, x: Node) -> bool {
        x < self.m && self.nodes >> x & 1 == 1
    }

    pub fn add_node(&mut self, x: Node) {
        assert!(x < self.m);
        self.nodes |= 1 << x;
    }

    #[inline]
    pub fn encode(&self, t: &[Node]) -> usize {
        t.iter().fold(0, |acc, &x| acc * self.m + x)
    }

    pub fn decode(&self, mut code: usize) -> Vec<Node> {
        let mut t = vec![0; self.n];
        for p in (0..self.n).rev() {
            t[p] = code % self.m;
            code /= self.m;
        }
        t
    }

    pub fn get(&self, t: &[Node]) -> Option<AtomId> {
        if t.len() != self.n || t.iter().any(|&x| x >= self.m) {
            return None;
        }
        match self.labels[self.encode(t)] {
            NONE => None,
            a => Some(a as AtomId),
        }
    }

    pub(crate) fn get_code(&self, code: usize) -> Option<AtomId> {
        match self.labels[code] {
            NONE => None,
            a => Some(a as AtomId),
        }
    }

    /// Sets a label and registers the tuple's nodes.
    pub fn set(&mut self, t: &[Node], a: AtomId) {
        for &x in t {
            self.add_node(x);
        }
        let c = self.encode(t);
        self.labels[c] = a as u32;
    }

    /// All n-tuples over the current node set, as codes.
    pub fn tuple_codes(&self) -> Vec<usize> {
        let mask = self.nodes;
        (0..self.labels.len())
            .filter(|&c| self.decode(c).iter().all(|&x| mask >> x & 1 == 1))
            .collect()
    }

    /// Drops node `z` and every label on a tuple through it.
    pub fn without_node(&self, z: Node) -> Network {
        let mut out = self.clone();
        if !self.has_node(z) {
            return out;
        }
        out.nodes &= !(1 << z);
        for c in 0..out.labels.len() {
            if self.decode(c).contains(&z) {
                out.labels[c] = NONE;
            }
        }
        out
    }

    /// Restriction to the nodes in `mask`.
    pub fn restrict(&self, mask: u32) -> Network {
        let mut out = self.clone();
        for z in self.nodes() {
            if mask >> z & 1 == 0 {
                out = out.without_node(z);
            }
        }
        out
    }

    /// Applies a node permutation (`perm[old] = new`).
    pub fn permuted(&self, perm: &[Node]) -> Network {
        let mut out = Network::empty(self.n, self.m);
        for x in self.nodes() {
            out.add_node(perm[x]);
        }
        for c in 0..self.labels.len() {
            if self.labels[c] != NONE {
                let t: Vec<_> = self.decode(c).iter().map(|&x| perm[x]).collect();
                let d = out.encode(&t);
                out.labels[d] = self.labels[c];
            }
        }
        out
    }

    /// Lexicographically least relabelling among the permutations that map
    /// the node set onto `0..node_count`.
    pub fn canonical(&self) -> Network {
        let present: Vec<Node> = self.nodes().collect();
        let c = present.len();
        let absent: Vec<Node> = (0..self.m).filter(|x| !self.has_node(*x)).collect();
        let mut order: Vec<usize> = (0..c).collect();
        let mut best: Option<Network> = None;
        loop {
            let mut perm = vec![0; self.m];
            for (k, &x) in present.iter().enumerate() {
                perm[x] = order[k];
            }
            for (k, &x) in absent.iter().enumerate() {
                perm[x] = c + k;
            }
            let cand = self.permuted(&perm);
            if best.as_ref().map_or(true, |b| cand.labels < b.labels) {
                best = Some(cand);
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        best.unwrap_or_else(|| self.clone())
    }

    pub fn to_json(&self, s: &CaAtomStructure) -> NetworkJson {
        let mut labels = BTreeMap::new();
        for c in 0..self.labels.len() {
            if self.labels[c] != NONE {
                let t = self.decode(c);
                let key = format!(
                    "({})",
                    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                );
                labels.insert(key, s.name(self.labels[c] as usize).to_string());
            }
        }
        NetworkJson {
            nodes: self.nodes().collect(),
            labels,
        }
    }

    pub fn from_json(s: &CaAtomStructure, m: usize, j: &NetworkJson) -> Result<Network> {
        let mut net = Network::empty(s.dim(), m);
        for &x in &j.nodes {
            if x >= m {
                return Err(Error::Index { index: x, bound: m });
            }
            net.add_node(x);
        }
        for (key, name) in &j.labels {
            let inner = key
                .trim()
                .strip_prefix('(')
                .and_then(|k| k.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad tuple key {key}")))?;
            let t: Vec<Node> = inner
                .split(',')
                .map(|x| x.trim().parse::<Node>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("bad tuple key {key}: {e}")))?;
            if t.len() != s.dim() || t.iter().any(|&x| !net.has_node(x)) {
                return Err(Error::Parse(format!("tuple {key} does not fit the node set")));
            }
            let a = s
                .atom_by_name(name)
                .ok_or_else(|| Error::Structural(format!("unknown atom {name}")))?;
            net.set(&t, a);
        }
        Ok(net)
    }
}

/// Wire form of a network: `{"nodes": [...], "labels": {"(x0,...)": atom}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub nodes: Vec<Node>,
    pub labels: BTreeMap<String, String>,
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Checks both network consistency conditions.
pub fn is_consistent(s: &CaAtomStructure, net: &Network) -> Result<ValidationReport> {
    if net.dim() != s.dim() {
        return structural("network dimension differs from the structure");
    }
    let n = s.dim();
    let codes = net.tuple_codes();
    for &c in &codes {
        match net.get_code(c) {
            None => return structural(format!("label missing on {:?}", net.decode(c))),
            Some(a) if a >= s.len() => {
                return structural(format!("label references unknown atom {a}"))
            }
            _ => {}
        }
    }
    let mut rep = ValidationReport::new();
    let show = |t: &[Node]| format!("{t:?}");
    for &c in &codes {
        let t = net.decode(c);
        let a = net.get_code(c).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                if s.in_diag(a, i, j) != (t[i] == t[j]) {
                    rep.push(format!("diagonal d{i}{j}"), vec![show(&t), s.name(a).into()]);
                }
            }
        }
        for i in 0..n {
            for y in net.nodes() {
                if y == t[i] {
                    continue;
                }
                let mut u = t.clone();
                u[i] = y;
                let b = net.get(&u).unwrap();
                if !s.cyl_related(i, a, b) {
                    rep.push(
                        format!("cylindrifier c{i}"),
                        vec![show(&t), show(&u), s.name(a).into(), s.name(b).into()],
                    );
                }
            }
        }
    }
    Ok(rep)
}

/// `M ≡_z N`: the networks agree on every tuple avoiding node `z`.
pub fn net_equiv(a: &Network, b: &Network, z: Node) -> bool {
    if a.n != b.n || a.m != b.m {
        return false;
    }
    let mask = !(1u32 << z);
    if a.nodes & mask != b.nodes & mask {
        return false;
    }
    (0..a.labels.len()).all(|c| a.labels[c] == b.labels[c] || a.decode(c).contains(&z))
}

/// ∀'s cylindrifier move: demand a witness for `c_index atom` at `tuple`.
///
/// `target` is the node that receives the witness. `None` means the least
/// fresh node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub tuple: Vec<Node>,
    pub index: usize,
    pub atom: AtomId,
    pub target: Option<Node>,
}

impl Move {
    pub fn is_legal(&self, s: &CaAtomStructure, net: &Network) -> bool {
        self.check(s, net).is_ok()
    }

    fn check(&self, s: &CaAtomStructure, net: &Network) -> Result<AtomId> {
        if self.tuple.len() != s.dim() || self.index >= s.dim() || self.atom >= s.len() {
            return Err(Error::IllegalMove(format!("malformed move {self:?}")));
        }
        let cur = net
            .get(&self.tuple)
            .ok_or_else(|| Error::IllegalMove(format!("tuple {:?} not in network", self.tuple)))?;
        if !s.cyl_related(self.index, cur, self.atom) {
            return Err(Error::IllegalMove(format!(
                "{} is not below c{} {}",
                s.name(cur),
                self.index,
                s.name(self.atom)
            )));
        }
        Ok(cur)
    }

    /// Whether the network already has a witness for this demand.
    pub fn witnessed(&self, net: &Network) -> bool {
        let mut t = self.tuple.clone();
        net.nodes().any(|w| {
            t[self.index] = w;
            net.get(&t) == Some(self.atom)
        })
    }
}

/// Every consistent network ∃ may answer `mv` with.
///
/// If the demand is already witnessed, `net` itself comes first. Then come
/// the extensions that put the witness on the target node, sorted. Without
/// `reuse` the target must be fresh; with it an existing node off the
/// demanded face may be overwritten.
pub fn exists_responses(
    s: &CaAtomStructure,
    net: &Network,
    mv: &Move,
    reuse: bool,
) -> Result<Vec<Network>> {
    mv.check(s, net)?;
    let mut out = Vec::new();
    if mv.witnessed(net) {
        out.push(net.clone());
    }
    let target = match mv.target {
        Some(z) => {
            if z >= net.budget() {
                return Err(Error::IllegalMove(format!("target {z} outside the node budget")));
            }
            if (0..s.dim()).any(|j| j != mv.index && mv.tuple[j] == z) {
                return Err(Error::IllegalMove(format!("target {z} lies on the demanded face")));
            }
            if net.has_node(z) && !reuse {
                return Err(Error::IllegalMove(format!("node {z} is in play and reuse is off")));
            }
            Some(z)
        }
        None => (0..net.budget()).find(|&x| !net.has_node(x)),
    };
    let Some(z) = target else {
        if out.is_empty() {
            return Err(Error::IllegalMove("no fresh node left for the witness".into()));
        }
        return Ok(out);
    };
    let mut base = net.without_node(z);
    base.add_node(z);
    let mut y = mv.tuple.clone();
    y[mv.index] = z;
    let mut ext = complete(s, &base, Some((&y, mv.atom)), Some(z));
    ext.sort();
    for e in ext {
        if out.first() != Some(&e) {
            out.push(e);
        }
    }
    Ok(out)
}

/// All consistent networks on the nodes of `partial` that agree with its
/// labels, optionally with `fixed` preset. When `fresh` is given, only
/// tuples through that node are free; otherwise every unlabelled tuple is.
pub(crate) fn complete(
    s: &CaAtomStructure,
    partial: &Network,
    fixed: Option<(&[Node], AtomId)>,
    fresh: Option<Node>,
) -> Vec<Network> {
    let n = s.dim();
    let nodes: Vec<Node> = partial.nodes().collect();
    let rank = |x: Node| -> isize {
        if Some(x) == fresh {
            -1
        } else {
            nodes.iter().position(|&y| y == x).unwrap() as isize
        }
    };
    let mut free: Vec<usize> = partial
        .tuple_codes()
        .into_iter()
        .filter(|&c| partial.labels[c] == NONE)
        .collect();
    let fixed_code = fixed.map(|(t, _)| partial.encode(t));
    free.sort_by_key(|&c| {
        let t = partial.decode(c);
        let first = Some(c) == fixed_code;
        (!first, t.iter().map(|&x| rank(x)).max().unwrap_or(-1), c)
    });
    let pos_of: std::collections::HashMap<usize, usize> =
        free.iter().enumerate().map(|(k, &c)| (c, k)).collect();

    let mut static_cands = Vec::with_capacity(free.len());
    let mut dynamic: Vec<Vec<(usize, usize)>> = Vec::with_capacity(free.len());
    for (k, &c) in free.iter().enumerate() {
        let t = partial.decode(c);
        let mut cands = s.atoms_with_pattern(s.tuple_upper_pattern(&t));
        if Some(c) == fixed_code {
            let a = fixed.unwrap().1;
            let only = AtomSet::from_iter(s.len(), [a]);
            cands.intersect_with(&only);
        }
        let mut dyns = Vec::new();
        for i in 0..n {
            for &w in &nodes {
                if w == t[i] {
                    continue;
                }
                let mut u = t.clone();
                u[i] = w;
                let uc = partial.encode(&u);
                match partial.get_code(uc) {
                    Some(b) => {
                        cands.intersect_with(s.cyl_row(i, b));
                        cands.intersect_with(s.cyl_col(i, b));
                    }
                    None => {
                        if let Some(&kk) = pos_of.get(&uc) {
                            if kk < k {
                                dyns.push((i, uc));
                            }
                        }
                    }
                }
            }
        }
        static_cands.push(cands);
        dynamic.push(dyns);
    }

    let mut out = Vec::new();
    let mut work = partial.clone();
    fill(s, &mut work, &free, &static_cands, &dynamic, 0, &mut out);
    out
}

fn fill(
    s: &CaAtomStructure,
    work: &mut Network,
    free: &[usize],
    static_cands: &[AtomSet],
    dynamic: &[Vec<(usize, usize)>],
    k: usize,
    out: &mut Vec<Network>,
) {
    if k == free.len() {
        out.push(work.clone());
        return;
    }
    let mut cands = static_cands[k].clone();
    for &(i, uc) in &dynamic[k] {
        let b = work.labels[uc] as usize;
        cands.intersect_with(s.cyl_row(i, b));
        cands.intersect_with(s.cyl_col(i, b));
        if cands.is_empty() {
            return;
        }
    }
    for a in cands.iter() {
        work.labels[free[k]] = a as u32;
        fill(s, work, free, static_cands, dynamic, k + 1, out);
    }
    work.labels[free[k]] = NONE;
}

/// The tuple that carries `a` on the fewest nodes: position `p` gets the
/// least `q` with `a <= d_qp`. `None` if `a`'s diagonals are not an
/// equality pattern of any tuple.
pub fn atom_tuple(s: &CaAtomStructure, a: AtomId) -> Option<Vec<Node>> {
    let n = s.dim();
    let mut t = vec![0; n];
    let mut next = 0;
    for p in 0..n {
        match (0..p).find(|&q| s.in_diag(a, q, p)) {
            Some(q) => t[p] = t[q],
            None => {
                t[p] = next;
                next += 1;
            }
        }
    }
    (s.tuple_upper_pattern(&t) == s.upper_pattern(a)).then_some(t)
}

/// ∃'s possible opening networks after ∀ names atom `a`.
pub fn initial_networks(s: &CaAtomStructure, a: AtomId, m: usize) -> Vec<Network> {
    let Some(t) = atom_tuple(s, a) else {
        return Vec::new();
    };
    let used = t.iter().max().map_or(0, |&x| x + 1);
    if used > m {
        return Vec::new();
    }
    let mut base = Network::empty(s.dim(), m);
    for x in 0..used {
        base.add_node(x);
    }
    let mut nets = complete(s, &base, Some((&t, a)), None);
    nets.sort();
    nets
}

/// Every consistent network on exactly the nodes `0..count`.
pub fn networks_on(s: &CaAtomStructure, count: usize, m: usize) -> Vec<Network> {
    let mut base = Network::empty(s.dim(), m);
    for x in 0..count {
        base.add_node(x);
    }
    complete(s, &base, None, None)
}

/// Network enriched with non-atomic labels on tuples of length other than n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypernetwork {
    pub net: Network,
    /// Labels from Λ, encoded as plain integers disjoint from atom ids by
    /// construction of the label space.
    pub hyper: BTreeMap<Vec<Node>, u32>,
}

fn short_tuples(nodes: &[Node], m: usize, n: usize) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Node>> = vec![vec![]];
    for len in 1..=m {
        let mut next = Vec::new();
        for t in &layer {
            for &x in nodes {
                let mut u = t.clone();
                u.push(x);
                next.push(u);
            }
        }
        if len != n {
            out.extend(next.iter().cloned());
        }
        layer = next;
    }
    out
}

fn d01_witnessed(s: &CaAtomStructure, net: &Network, x: &[Node], y: &[Node]) -> bool {
    let n = s.dim();
    let nodes: Vec<Node> = net.nodes().collect();
    if nodes.is_empty() || n < 2 {
        return false;
    }
    let mut zbar = vec![nodes[0]; n - 2];
    loop {
        let ok = x.iter().zip(y).all(|(&xi, &yi)| {
            let mut t = vec![xi, yi];
            t.extend_from_slice(&zbar);
            net.get(&t).is_some_and(|a| s.in_diag(a, 0, 1))
        });
        if ok {
            return true;
        }
        let mut p = 0;
        loop {
            if p == zbar.len() {
                return false;
            }
            let idx = nodes.iter().position(|&v| v == zbar[p]).unwrap_or(0);
            if idx + 1 < nodes.len() {
                zbar[p] = nodes[idx + 1];
                break;
            }
            zbar[p] = nodes[0];
            p += 1;
        }
    }
}

impl Hypernetwork {
    /// Gives each class of the d01-witness relation its own fresh label.
    pub fn from_network(s: &CaAtomStructure, net: &Network) -> Hypernetwork {
        let nodes: Vec<Node> = net.nodes().collect();
        let tuples = short_tuples(&nodes, net.budget(), s.dim());
        let mut parent: Vec<usize> = (0..tuples.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for i in 0..tuples.len() {
            for j in i + 1..tuples.len() {
                if tuples[i].len() == tuples[j].len() && d01_witnessed(s, net, &tuples[i], &tuples[j])
                {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut hyper = BTreeMap::new();
        for (i, t) in tuples.iter().enumerate() {
            hyper.insert(t.clone(), find(&mut parent, i) as u32);
        }
        Hypernetwork {
            net: net.clone(),
            hyper,
        }
    }
}

/// Network conditions plus the non-atomic label rule, read literally:
/// if some `z̄` makes every `(x_i, y_i, z̄)` lie below `d01`, then `x̄` and
/// `ȳ` carry the same label.
pub fn check_hypernetwork(s: &CaAtomStructure, h: &Hypernetwork) -> Result<ValidationReport> {
    let mut rep = is_consistent(s, &h.net)?;
    let nodes: Vec<Node> = h.net.nodes().collect();
    let tuples = short_tuples(&nodes, h.net.budget(), s.dim());
    for t in &tuples {
        if !h.hyper.contains_key(t) {
            rep.push("hyperlabel missing", vec![format!("{t:?}")]);
        }
    }
    for x in &tuples {
        for y in &tuples {
            if x < y && x.len() == y.len() && d01_witnessed(s, &h.net, x, y) && h.hyper.get(x) != h.hyper.get(y)
            {
                rep.push("non-atomic label rule", vec![format!("{x:?}"), format!("{y:?}")]);
            }
        }
    }
    Ok(rep)
}
