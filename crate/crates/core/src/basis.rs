//! Bases, hyperbases and relational bases by saturation, and the
//! basic-matrix structure `Mat_n`.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::network::{
    atom_tuple, check_hypernetwork, complete, next_permutation, Hypernetwork, Network, Node, MAX_NODES,
};
use crate::structures::{AtomId, CaAtomStructure, RaAtomStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Basis,
    Hyperbasis,
}

/// Order in which the deletion queue is seeded. The fixpoint must not
/// depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Forward,
    Reverse,
}

/// Why a member was removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deletion {
    pub member: Network,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisOutcome {
    Found { members: Vec<Network> },
    NoBasis { uncovered: Vec<AtomId>, deletions: Vec<Deletion> },
    Undecided { explored: usize },
}

impl BasisOutcome {
    pub fn exists(&self) -> Option<bool> {
        match self {
            BasisOutcome::Found { .. } => Some(true),
            BasisOutcome::NoBasis { .. } => Some(false),
            BasisOutcome::Undecided { .. } => None,
        }
    }
}

/// Unwitnessed cylindrifier demands of `net` that a fresh node could meet,
/// as `(tuple, index, atom)`.
fn defects(s: &CaAtomStructure, net: &Network) -> Vec<(Vec<Node>, usize, AtomId)> {
    if net.node_count() >= net.budget() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for code in net.tuple_codes() {
        let t = net.decode(code);
        let cur = net.get(&t).expect("labelled");
        for i in 0..s.dim() {
            for a in s.cyl_row(i, cur).iter() {
                let mut y = t.clone();
                let hit = net.nodes().any(|w| {
                    y[i] = w;
                    net.get(&y) == Some(a)
                });
                if !hit {
                    out.push((t.clone(), i, a));
                }
            }
        }
    }
    out
}

/// Extensions of `net` by one fresh node that witness the demand.
fn witnesses(s: &CaAtomStructure, net: &Network, t: &[Node], i: usize, a: AtomId) -> Vec<Network> {
    let z = (0..net.budget()).find(|&x| !net.has_node(x)).expect("defects need a fresh node");
    let mut base = net.clone();
    base.add_node(z);
    let mut y = t.to_vec();
    y[i] = z;
    complete(s, &base, Some((&y, a)), Some(z))
}

/// Every consistent network on at most `m` nodes, up to isomorphism.
fn all_networks(s: &CaAtomStructure, m: usize, budget: usize) -> std::result::Result<Vec<Network>, usize> {
    let mut out: Vec<Network> = Vec::new();
    for c in 1..=m {
        let mut base = Network::empty(s.dim(), m);
        for x in 0..c {
            base.add_node(x);
        }
        let mut layer: Vec<Network> = complete(s, &base, None, None)
            .into_par_iter()
            .map(|n| n.canonical())
            .collect();
        layer.sort();
        layer.dedup();
        out.extend(layer);
        if out.len() > budget {
            return Err(out.len());
        }
    }
    Ok(out)
}

/// Deletes members with an unwitnessable defect until none is left.
/// Returns the survivor flags and the deletion log.
fn saturate(
    s: &CaAtomStructure,
    nets: &[Network],
    alive: &mut [bool],
    schedule: Schedule,
    log: &mut Vec<Deletion>,
) {
    let index: HashMap<&Network, usize> = nets.iter().enumerate().map(|(k, n)| (n, k)).collect();
    // demands[k] = for each defect of nets[k], its witness ids.
    let demands: Vec<Vec<Vec<usize>>> = nets
        .par_iter()
        .map(|net| {
            defects(s, net)
                .into_iter()
                .map(|(t, i, a)| {
                    let mut w: Vec<usize> = witnesses(s, net, &t, i, a)
                        .into_iter()
                        .map(|x| index[&x.canonical()])
                        .collect();
                    w.sort_unstable();
                    w.dedup();
                    w
                })
                .collect()
        })
        .collect();
    let mut counts: Vec<Vec<usize>> = demands
        .iter()
        .map(|ds| ds.iter().map(|w| w.iter().filter(|&&x| alive[x]).count()).collect())
        .collect();
    let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nets.len()];
    for (k, ds) in demands.iter().enumerate() {
        for (d, w) in ds.iter().enumerate() {
            for &x in w {
                users[x].push((k, d));
            }
        }
    }
    let mut order: Vec<usize> = (0..nets.len()).collect();
    if schedule == Schedule::Reverse {
        order.reverse();
    }
    let mut queue: VecDeque<usize> = order
        .into_iter()
        .filter(|&k| alive[k] && counts[k].iter().any(|&c| c == 0))
        .collect();
    let mut queued: HashSet<usize> = queue.iter().copied().collect();
    while let Some(k) = queue.pop_front() {
        if !alive[k] {
            continue;
        }
        alive[k] = false;
        let d = counts[k].iter().position(|&c| c == 0).unwrap_or(0);
        log.push(Deletion {
            member: nets[k].clone(),
            reason: format!("defect {d} has no surviving witness"),
        });
        for &(u, du) in &users[k] {
            counts[u][du] -= 1;
            if counts[u][du] == 0 && alive[u] && queued.insert(u) {
                queue.push_back(u);
            }
        }
    }
}

/// Full members `M, N` agreeing off `{x, y}` with no member `L` such that
/// `L` agrees with `M` off `x` and with `N` off `y`.
fn amalgamation_defects(nets: &[Network], alive: &[bool], m: usize) -> HashSet<usize> {
    let full: Vec<usize> = (0..nets.len())
        .filter(|&k| alive[k] && nets[k].node_count() == m)
        .collect();
    // Every labelling of each full member, tagged with the member id.
    let mut perms = Vec::new();
    let mut p: Vec<Node> = (0..m).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let labelled: Vec<(usize, Network)> = full
        .iter()
        .flat_map(|&k| perms.iter().map(move |p| (k, nets[k].permuted(p))))
        .collect();
    let off = |net: &Network, avoid: &[Node]| -> Vec<u32> {
        net.tuple_codes()
            .into_iter()
            .filter(|&c| !net.decode(c).iter().any(|x| avoid.contains(x)))
            .map(|c| net.get_code(c).unwrap() as u32)
            .collect()
    };
    let intern = |keys: Vec<Vec<u32>>| -> Vec<usize> {
        let mut ids: HashMap<Vec<u32>, usize> = HashMap::new();
        keys.into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect()
    };
    let single: Vec<Vec<usize>> = (0..m)
        .map(|x| intern(labelled.par_iter().map(|(_, l)| off(l, &[x])).collect()))
        .collect();
    let mut bad = HashSet::new();
    for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            let (kx, ky) = (&single[x], &single[y]);
            let kxy = intern(labelled.par_iter().map(|(_, l)| off(l, &[x, y])).collect());
            let present: HashSet<(usize, usize)> = (0..labelled.len()).map(|l| (kx[l], ky[l])).collect();
            let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
            for (idx, &g) in kxy.iter().enumerate() {
                groups.entry(g).or_default().push(idx);
            }
            for members in groups.values() {
                let xs: HashSet<usize> = members.iter().map(|&l| kx[l]).collect();
                let ys: HashSet<usize> = members.iter().map(|&l| ky[l]).collect();
                for &a in &xs {
                    for &b in &ys {
                        if !present.contains(&(a, b)) {
                            for &l in members {
                                if kx[l] == a || ky[l] == b {
                                    bad.insert(labelled[l].0);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    bad
}

/// Atoms without a member laid out on exactly the atom's own nodes.
fn uncovered(s: &CaAtomStructure, nets: &[Network], alive: &[bool]) -> Vec<AtomId> {
    let mut covered = vec![false; s.len()];
    for (k, net) in nets.iter().enumerate() {
        if !alive[k] {
            continue;
        }
        for a in 0..s.len() {
            if covered[a] {
                continue;
            }
            // A labelled tuple already has the atom's equality pattern, so
            // it spans exactly the atom's nodes when the counts match.
            if let Some(t) = atom_tuple(s, a) {
                let used = t.iter().max().map_or(0, |&x| x + 1);
                if net.node_count() == used
                    && net.tuple_codes().into_iter().any(|c| net.get_code(c) == Some(a))
                {
                    covered[a] = true;
                }
            }
        }
    }
    (0..s.len()).filter(|&a| !covered[a]).collect()
}

/// Greatest set of networks on at most `m` nodes closed under witnessing
/// cylindrifier demands, plus amalgamation for hyperbases.
pub fn find_basis(s: &CaAtomStructure, m: usize, kind: BasisKind, budget: usize) -> Result<BasisOutcome> {
    find_basis_with_schedule(s, m, kind, budget, Schedule::Forward)
}

pub fn find_basis_with_schedule(
    s: &CaAtomStructure,
    m: usize,
    kind: BasisKind,
    budget: usize,
    schedule: Schedule,
) -> Result<BasisOutcome> {
    if m < s.dim() || m > MAX_NODES {
        return Err(Error::Parameter(format!("node budget {m} out of range")));
    }
    let nets = match all_networks(s, m, budget) {
        Ok(n) => n,
        Err(explored) => return Ok(BasisOutcome::Undecided { explored }),
    };
    let mut alive = vec![true; nets.len()];
    let mut log = Vec::new();
    saturate(s, &nets, &mut alive, schedule, &mut log);
    if kind == BasisKind::Hyperbasis {
        for (k, net) in nets.iter().enumerate() {
            if alive[k] && !check_hypernetwork(s, &Hypernetwork::from_network(s, net))?.ok {
                alive[k] = false;
                log.push(Deletion {
                    member: net.clone(),
                    reason: "hypernetwork labels inconsistent".into(),
                });
            }
        }
        loop {
            let bad = amalgamation_defects(&nets, &alive, m);
            if bad.is_empty() {
                break;
            }
            let mut bad: Vec<usize> = bad.into_iter().collect();
            bad.sort_unstable();
            for k in bad {
                alive[k] = false;
                log.push(Deletion {
                    member: nets[k].clone(),
                    reason: "amalgamation defect".into(),
                });
            }
            saturate(s, &nets, &mut alive, schedule, &mut log);
        }
    }
    let missing = uncovered(s, &nets, &alive);
    if missing.is_empty() {
        Ok(BasisOutcome::Found {
            members: (0..nets.len()).filter(|&k| alive[k]).map(|k| nets[k].clone()).collect(),
        })
    } else {
        Ok(BasisOutcome::NoBasis {
            uncovered: missing,
            deletions: log,
        })
    }
}

/// Re-checks a claimed basis from scratch: every member is consistent,
/// every defect has a witness among the members, every atom is covered,
/// and for hyperbases amalgamation holds.
pub fn audit_basis(s: &CaAtomStructure, m: usize, kind: BasisKind, members: &[Network]) -> Result<bool> {
    let set: HashSet<Network> = members.iter().map(|n| n.canonical()).collect();
    for net in members {
        if net.budget() != m || !crate::network::is_consistent(s, net)?.ok {
            return Ok(false);
        }
        for (t, i, a) in defects(s, net) {
            if !witnesses(s, net, &t, i, a)
                .iter()
                .any(|w| set.contains(&w.canonical()))
            {
                return Ok(false);
            }
        }
    }
    let canon: Vec<Network> = members.iter().map(|n| n.canonical()).collect();
    let alive = vec![true; canon.len()];
    if !uncovered(s, &canon, &alive).is_empty() {
        return Ok(false);
    }
    if kind == BasisKind::Hyperbasis && !amalgamation_defects(&canon, &alive, m).is_empty() {
        return Ok(false);
    }
    Ok(true)
}

/// Relation-algebra network on `m` nodes: `labels[x*m+y]` is the atom on
/// the edge from `x` to `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RaNetwork {
    pub m: usize,
    pub labels: Vec<AtomId>,
}

impl RaNetwork {
    pub fn get(&self, x: usize, y: usize) -> AtomId {
        self.labels[x * self.m + y]
    }

    pub fn permuted(&self, perm: &[usize]) -> RaNetwork {
        let mut labels = vec![0; self.m * self.m];
        for x in 0..self.m {
            for y in 0..self.m {
                labels[perm[x] * self.m + perm[y]] = self.get(x, y);
            }
        }
        RaNetwork { m: self.m, labels }
    }

    pub fn canonical(&self) -> RaNetwork {
        let mut p: Vec<usize> = (0..self.m).collect();
        let mut best = self.clone();
        while next_permutation(&mut p) {
            let c = self.permuted(&p);
            if c < best {
                best = c;
            }
        }
        best
    }
}

/// All strict networks on `m` nodes: identity on the diagonal only,
/// converse-symmetric, every triangle consistent. `fixed` presets edges.
fn ra_networks(r: &RaAtomStructure, m: usize, fixed: &[(usize, usize, AtomId)]) -> Vec<RaNetwork> {
    let e = r.identity().first().expect("identity exists");
    let nonid: Vec<AtomId> = r.non_identity().iter().collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|y| (0..y).map(move |x| (x, y))).collect();
    let mut labels = vec![usize::MAX; m * m];
    for x in 0..m {
        labels[x * m + x] = e;
    }
    fn go(
        r: &RaAtomStructure,
        m: usize,
        nonid: &[AtomId],
        pairs: &[(usize, usize)],
        fixed: &[(usize, usize, AtomId)],
        k: usize,
        labels: &mut Vec<AtomId>,
        out: &mut Vec<RaNetwork>,
    ) {
        if k == pairs.len() {
            out.push(RaNetwork {
                m,
                labels: labels.clone(),
            });
            return;
        }
        let (x, y) = pairs[k];
        let preset: Vec<AtomId> = fixed
            .iter()
            .filter_map(|&(a, b, c)| {
                if (a, b) == (x, y) {
                    Some(c)
                } else if (a, b) == (y, x) {
                    Some(r.converse(c))
                } else {
                    None
                }
            })
            .collect();
        let cands: Vec<AtomId> = if preset.is_empty() { nonid.to_vec() } else { preset };
        for a in cands {
            if r.is_identity(a) {
                continue;
            }
            labels[x * m + y] = a;
            labels[y * m + x] = r.converse(a);
            // Pairs are ordered by larger endpoint, so every triangle through
            // a vertex below `x` is now complete.
            let ok = (0..x).all(|w| {
                r.is_consistent(labels[w * m + x], labels[x * m + y], labels[w * m + y])
            });
            if ok {
                go(r, m, nonid, pairs, fixed, k + 1, labels, out);
            }
        }
        labels[x * m + y] = usize::MAX;
        labels[y * m + x] = usize::MAX;
    }
    let mut out = Vec::new();
    go(r, m, &nonid, &pairs, fixed, 0, &mut labels, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationalOutcome {
    Found { members: Vec<RaNetwork> },
    NoBasis { uncovered: Vec<AtomId>, deletions: usize },
    Undecided { explored: usize },
}

impl RelationalOutcome {
    pub fn exists(&self) -> Option<bool> {
        match self {
            RelationalOutcome::Found { .. } => Some(true),
            RelationalOutcome::NoBasis { .. } => Some(false),
            RelationalOutcome::Undecided { .. } => None,
        }
    }
}

/// Demands of a strict network: `(x, y, a, b)` with `N(x,y) <= a;b` and
/// `a`, `b` non-identity.
fn ra_demands(r: &RaAtomStructure, net: &RaNetwork) -> Vec<(usize, usize, AtomId, AtomId)> {
    let nonid: Vec<AtomId> = r.non_identity().iter().collect();
    let mut out = Vec::new();
    for x in 0..net.m {
        for y in 0..net.m {
            if x == y {
                continue;
            }
            for &a in &nonid {
                for &b in &nonid {
                    if r.is_consistent(a, b, net.get(x, y)) {
                        out.push((x, y, a, b));
                    }
                }
            }
        }
    }
    out
}

/// Networks `M ≡_z N` with `M(x,z) = a` and `M(z,y) = b`.
fn ra_witnesses(r: &RaAtomStructure, net: &RaNetwork, x: usize, y: usize, z: usize, a: AtomId, b: AtomId) -> Vec<RaNetwork> {
    let mut fixed = vec![(x, z, a), (z, y, b)];
    for u in 0..net.m {
        for v in 0..u {
            if u != z && v != z {
                fixed.push((v, u, net.get(v, u)));
            }
        }
    }
    ra_networks(r, net.m, &fixed)
}

/// Greatest set of strict `m`-node networks in which ∀'s demands, at every
/// choice of the third node, are met inside the set.
pub fn find_relational_basis(r: &RaAtomStructure, m: usize, budget: usize) -> Result<RelationalOutcome> {
    if m < 3 || m > 8 {
        return Err(Error::Parameter(format!("relational basis size {m} out of range")));
    }
    if r.identity().count() != 1 {
        return structural("relational bases need exactly one identity atom");
    }
    let mut nets: Vec<RaNetwork> = ra_networks(r, m, &[]).into_par_iter().map(|n| n.canonical()).collect();
    nets.sort();
    nets.dedup();
    if nets.len() > budget {
        return Ok(RelationalOutcome::Undecided { explored: nets.len() });
    }
    let index: HashMap<&RaNetwork, usize> = nets.iter().enumerate().map(|(k, n)| (n, k)).collect();
    // Each demand-and-node choice becomes one requirement with its witnesses.
    let reqs: Vec<Vec<Vec<usize>>> = nets
        .par_iter()
        .map(|net| {
            let mut out = Vec::new();
            for (x, y, a, b) in ra_demands(r, net) {
                for z in 0..m {
                    if z == x || z == y {
                        continue;
                    }
                    if net.get(x, z) == a && net.get(z, y) == b {
                        continue;
                    }
                    let mut w: Vec<usize> = ra_witnesses(r, net, x, y, z, a, b)
                        .into_iter()
                        .map(|n| index[&n.canonical()])
                        .collect();
                    w.sort_unstable();
                    w.dedup();
                    out.push(w);
                }
            }
            out
        })
        .collect();
    let mut alive = vec![true; nets.len()];
    let mut deletions = 0;
    loop {
        let dead: Vec<usize> = (0..nets.len())
            .into_par_iter()
            .filter(|&k| alive[k] && reqs[k].iter().any(|w| w.iter().all(|&x| !alive[x])))
            .collect();
        if dead.is_empty() {
            break;
        }
        deletions += dead.len();
        for k in dead {
            alive[k] = false;
        }
    }
    let members: Vec<RaNetwork> = (0..nets.len()).filter(|&k| alive[k]).map(|k| nets[k].clone()).collect();
    let mut covered: Vec<bool> = (0..r.len()).map(|a| r.is_identity(a)).collect();
    for net in &members {
        for &a in &net.labels {
            covered[a] = true;
        }
    }
    let missing: Vec<AtomId> = (0..r.len()).filter(|&a| !covered[a]).collect();
    if members.is_empty() || !missing.is_empty() {
        return Ok(RelationalOutcome::NoBasis {
            uncovered: missing,
            deletions,
        });
    }
    Ok(RelationalOutcome::Found { members })
}

/// Basic matrices and the cylindric atom structure they form.
#[derive(Debug, Clone)]
pub struct MatN {
    pub structure: CaAtomStructure,
    /// Row-major `n x n` matrices, one per atom.
    pub matrices: Vec<Vec<AtomId>>,
}

/// `n x n` basic matrices over `r`: identity on the diagonal,
/// `m_ji = m_ij˘`, and every `(m_ij, m_jk, m_ik)` consistent.
pub fn basic_matrices(r: &RaAtomStructure, n: usize) -> Vec<Vec<AtomId>> {
    let ids: Vec<AtomId> = r.identity().iter().collect();
    let mut out = Vec::new();
    let mut mat = vec![usize::MAX; n * n];
    fn go(
        r: &RaAtomStructure,
        n: usize,
        ids: &[AtomId],
        cell: usize,
        mat: &mut Vec<AtomId>,
        out: &mut Vec<Vec<AtomId>>,
    ) {
        if cell == n * n {
            let ok = (0..n).all(|i| {
                (0..n).all(|j| (0..n).all(|k| r.is_consistent(mat[i * n + j], mat[j * n + k], mat[i * n + k])))
            });
            if ok {
                out.push(mat.clone());
            }
            return;
        }
        let (i, j) = (cell / n, cell % n);
        if j < i {
            mat[cell] = r.converse(mat[j * n + i]);
            return go(r, n, ids, cell + 1, mat, out);
        }
        let cands: Vec<AtomId> = if i == j { ids.to_vec() } else { (0..r.len()).collect() };
        for a in cands {
            mat[cell] = a;
            go(r, n, ids, cell + 1, mat, out);
        }
        mat[cell] = usize::MAX;
    }
    go(r, n, &ids, 0, &mut mat, &mut out);
    out
}

pub fn mat_n(r: &RaAtomStructure, n: usize) -> Result<MatN> {
    if n < 3 {
        return Err(Error::Parameter(format!("dimension {n} below 3")));
    }
    let matrices = basic_matrices(r, n);
    if matrices.is_empty() {
        return structural("no basic matrices");
    }
    let names: Vec<String> = matrices
        .iter()
        .map(|m| {
            let cells: Vec<String> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| r.name(m[i * n + j]).to_string())
                .collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    let structure = CaAtomStructure::from_classes(
        n,
        names,
        |a, i, j| r.is_identity(matrices[a][i * n + j]),
        |a, i| {
            (0..n * n)
                .filter(|&c| c / n != i && c % n != i)
                .map(|c| matrices[a][c])
                .collect::<Vec<_>>()
        },
    )?;
    Ok(MatN { structure, matrices })
}
