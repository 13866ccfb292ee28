//! Finite cylindric (CA_n) and relation-algebra atom structures, their
//! validators, and complex-algebra operations on sets of atoms.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::atomset::AtomSet;
use crate::error::{structural, Error, Result};

/// Dense atom identifier. Names live in a side table on the structure.
pub type AtomId = usize;

/// Outcome of a total validation pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub tuple: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            ok: true,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, rule: impl Into<String>, tuple: Vec<String>) {
        self.ok = false;
        self.violations.push(Violation {
            rule: rule.into(),
            tuple,
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        for v in other.violations {
            self.push(v.rule, v.tuple);
        }
    }

    pub fn has_rule(&self, prefix: &str) -> bool {
        self.violations.iter().any(|v| v.rule.starts_with(prefix))
    }
}

/// Atom structure of an n-dimensional cylindric algebra.
///
/// `cyl[i][a]` is the row of atom `a` in the relation `cyl[i]`, i.e. the set
/// of `b` with `a <= c_i b`. For a valid structure each row is the
/// equivalence class of `a`, so class lookup is a single index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaAtomStructure {
    n: usize,
    names: Vec<String>,
    diag: Vec<AtomSet>,
    cyl: Vec<Vec<AtomSet>>,
    cyl_col: Vec<Vec<AtomSet>>,
    by_pattern: OnceLock<Vec<(u64, AtomSet)>>,
}

impl CaAtomStructure {
    /// `diag` is indexed `i * n + j`; `cyl[i][a]` are relation rows.
    pub fn new(
        n: usize,
        names: Vec<String>,
        diag: Vec<AtomSet>,
        cyl: Vec<Vec<AtomSet>>,
    ) -> Result<Self> {
        if names.is_empty() {
            return structural("empty atom set");
        }
        if n == 0 {
            return structural("dimension must be positive");
        }
        let k = names.len();
        if diag.len() != n * n || diag.iter().any(|d| d.capacity() != k) {
            return structural("diagonal table has wrong shape");
        }
        if cyl.len() != n || cyl.iter().any(|c| c.len() != k || c.iter().any(|r| r.capacity() != k)) {
            return structural("cylindrifier table has wrong shape");
        }
        let cyl_col = cyl
            .iter()
            .map(|rows| {
                (0..k)
                    .map(|b| AtomSet::from_iter(k, (0..k).filter(|&a| rows[a].contains(b))))
                    .collect()
            })
            .collect();
        Ok(CaAtomStructure {
            n,
            names,
            diag,
            cyl,
            cyl_col,
            by_pattern: OnceLock::new(),
        })
    }

    /// Builds a structure from an atom -> diagonal predicate and per-index
    /// class keys: atoms with equal keys for index `i` are `cyl[i]`-related.
    pub fn from_classes<K: Eq + std::hash::Hash>(
        n: usize,
        names: Vec<String>,
        in_diag: impl Fn(AtomId, usize, usize) -> bool,
        class_key: impl Fn(AtomId, usize) -> K,
    ) -> Result<Self> {
        let k = names.len();
        let mut diag = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                diag.push(AtomSet::from_iter(
                    k,
                    (0..k).filter(|&a| i == j || in_diag(a, i, j)),
                ));
            }
        }
        let mut cyl = Vec::with_capacity(n);
        for i in 0..n {
            let mut groups: std::collections::HashMap<K, AtomSet> = std::collections::HashMap::new();
            let mut keys = Vec::with_capacity(k);
            for a in 0..k {
                let key = class_key(a, i);
                groups.entry(key).or_insert_with(|| AtomSet::empty(k)).insert(a);
                keys.push(class_key(a, i));
            }
            cyl.push(keys.iter().map(|key| groups[key].clone()).collect());
        }
        Self::new(n, names, diag, cyl)
    }

    /// The smallest CA_n atom structure: one atom below every diagonal.
    pub fn one_atom(n: usize) -> Self {
        Self::from_classes(n, vec!["a".into()], |_, _, _| true, |_, _| 0u8)
            .expect("one-atom structure is well formed")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: AtomId) -> &str {
        &self.names[a]
    }

    pub fn atom_by_name(&self, name: &str) -> Option<AtomId> {
        self.names.iter().position(|x| x == name)
    }

    pub fn all(&self) -> AtomSet {
        AtomSet::full(self.len())
    }

    pub fn diag(&self, i: usize, j: usize) -> &AtomSet {
        &self.diag[i * self.n + j]
    }

    #[inline]
    pub fn in_diag(&self, a: AtomId, i: usize, j: usize) -> bool {
        i == j || self.diag[i * self.n + j].contains(a)
    }

    /// Row of `a` in `cyl[i]`; the `i`-class of `a` in a valid structure.
    #[inline]
    pub fn cyl_row(&self, i: usize, a: AtomId) -> &AtomSet {
        &self.cyl[i][a]
    }

    /// Atoms `a` with `b` in the row of `a`.
    #[inline]
    pub fn cyl_col(&self, i: usize, b: AtomId) -> &AtomSet {
        &self.cyl_col[i][b]
    }

    /// Bitmask over pairs `i < j` (bit `i * n + j`) of the diagonals containing `a`.
    pub fn upper_pattern(&self, a: AtomId) -> u64 {
        let mut m = 0u64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.diag[i * self.n + j].contains(a) {
                    m |= 1 << (i * self.n + j);
                }
            }
        }
        m
    }

    /// Same bitmask for the equalities of a tuple.
    pub fn tuple_upper_pattern(&self, t: &[usize]) -> u64 {
        let mut m = 0u64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if t[i] == t[j] {
                    m |= 1 << (i * self.n + j);
                }
            }
        }
        m
    }

    /// Atoms that may label a tuple with the given equality pattern.
    pub fn atoms_with_pattern(&self, pattern: u64) -> AtomSet {
        let groups = self.by_pattern.get_or_init(|| {
            let mut g: Vec<(u64, AtomSet)> = Vec::new();
            for a in 0..self.len() {
                let p = self.upper_pattern(a);
                match g.iter_mut().find(|(q, _)| *q == p) {
                    Some((_, set)) => set.insert(a),
                    None => g.push((p, AtomSet::from_iter(self.len(), [a]))),
                }
            }
            g
        });
        groups
            .iter()
            .find(|(q, _)| *q == pattern)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| AtomSet::empty(self.len()))
    }

    #[inline]
    pub fn cyl_related(&self, i: usize, a: AtomId, b: AtomId) -> bool {
        self.cyl[i][a].contains(b)
    }

}

/// Runs every invariant check on a CA atom structure.
pub fn validate_ca(s: &CaAtomStructure) -> Result<ValidationReport> {
    if s.is_empty() {
        return structural("empty atom set");
    }
    if s.dim() < 3 {
        return Err(Error::Parameter(format!("dimension {} < 3", s.dim())));
    }
    let n = s.dim();
    let k = s.len();
    let mut rep = ValidationReport::new();
    let name = |a: AtomId| s.name(a).to_string();
    for i in 0..n {
        for a in 0..k {
            if !s.cyl_related(i, a, a) {
                rep.push(format!("cyl[{i}] not reflexive"), vec![name(a), name(a)]);
            }
            for b in s.cyl_row(i, a).iter() {
                if !s.cyl_related(i, b, a) {
                    rep.push(format!("cyl[{i}] not symmetric"), vec![name(a), name(b)]);
                }
                for c in s.cyl_row(i, b).iter() {
                    if !s.cyl_related(i, a, c) {
                        rep.push(
                            format!("cyl[{i}] not transitive"),
                            vec![name(a), name(b), name(c)],
                        );
                    }
                }
            }
        }
    }
    for i in 0..n {
        if s.diag(i, i).count() != k {
            for a in s.diag(i, i).complement().iter() {
                rep.push(format!("diag({i},{i}) not all atoms"), vec![name(a)]);
            }
        }
        for j in 0..n {
            if i < j && s.diag(i, j) != s.diag(j, i) {
                let mut diff = s.diag(i, j).clone();
                let mut other = s.diag(j, i).clone();
                diff.difference_with(s.diag(j, i));
                other.difference_with(s.diag(i, j));
                diff.union_with(&other);
                for a in diff.iter() {
                    rep.push(format!("diag({i},{j}) != diag({j},{i})"), vec![name(a)]);
                }
            }
        }
    }
    Ok(rep)
}

/// Complex-algebra operations over subsets of atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmOp {
    Cyl(usize),
    Diag(usize, usize),
    Complement,
    Join,
}

pub fn cm_apply(s: &CaAtomStructure, op: CmOp, args: &[AtomSet]) -> Result<AtomSet> {
    let n = s.dim();
    let k = s.len();
    for x in args {
        if x.capacity() != k {
            return structural("argument set over a different atom universe");
        }
    }
    let arg = |idx: usize| {
        args.get(idx)
            .ok_or_else(|| Error::Parameter(format!("missing argument {idx}")))
    };
    match op {
        CmOp::Cyl(i) => {
            if i >= n {
                return Err(Error::Index { index: i, bound: n });
            }
            let x = arg(0)?;
            Ok(AtomSet::from_iter(
                k,
                (0..k).filter(|&a| s.cyl_row(i, a).intersects(x)),
            ))
        }
        CmOp::Diag(i, j) => {
            if i >= n || j >= n {
                return Err(Error::Index {
                    index: i.max(j),
                    bound: n,
                });
            }
            Ok(s.diag(i, j).clone())
        }
        CmOp::Complement => Ok(arg(0)?.complement()),
        CmOp::Join => {
            let mut out = AtomSet::empty(k);
            for x in args {
                out.union_with(x);
            }
            Ok(out)
        }
    }
}

/// Finite relation-algebra atom structure.
///
/// A triple `(a, b, c)` is consistent when `c <= a ; b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaAtomStructure {
    names: Vec<String>,
    identity: AtomSet,
    converse: Vec<AtomId>,
    consistent: Vec<u64>,
}

impl RaAtomStructure {
    pub fn new(
        names: Vec<String>,
        identity: AtomSet,
        converse: Vec<AtomId>,
        triples: impl IntoIterator<Item = (AtomId, AtomId, AtomId)>,
    ) -> Result<Self> {
        let k = names.len();
        if k == 0 {
            return structural("empty atom set");
        }
        if identity.capacity() != k || identity.is_empty() {
            return structural("identity must be a nonempty set of atoms");
        }
        if converse.len() != k || converse.iter().any(|&c| c >= k) {
            return structural("converse must map atoms to atoms");
        }
        let mut s = RaAtomStructure {
            names,
            identity,
            converse,
            consistent: vec![0; (k * k * k).div_ceil(64)],
        };
        for (a, b, c) in triples {
            if a >= k || b >= k || c >= k {
                return structural("triple references unknown atom");
            }
            s.set_consistent(a, b, c, true);
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: AtomId) -> &str {
        &self.names[a]
    }

    pub fn atom_by_name(&self, name: &str) -> Option<AtomId> {
        self.names.iter().position(|x| x == name)
    }

    pub fn identity(&self) -> &AtomSet {
        &self.identity
    }

    pub fn is_identity(&self, a: AtomId) -> bool {
        self.identity.contains(a)
    }

    pub fn non_identity(&self) -> AtomSet {
        self.identity.complement()
    }

    pub fn converse(&self, a: AtomId) -> AtomId {
        self.converse[a]
    }

    #[inline]
    fn bit(&self, a: AtomId, b: AtomId, c: AtomId) -> usize {
        let k = self.len();
        (a * k + b) * k + c
    }

    #[inline]
    pub fn is_consistent(&self, a: AtomId, b: AtomId, c: AtomId) -> bool {
        let i = self.bit(a, b, c);
        self.consistent[i >> 6] >> (i & 63) & 1 == 1
    }

    pub fn set_consistent(&mut self, a: AtomId, b: AtomId, c: AtomId, on: bool) {
        let i = self.bit(a, b, c);
        if on {
            self.consistent[i >> 6] |= 1 << (i & 63);
        } else {
            self.consistent[i >> 6] &= !(1 << (i & 63));
        }
    }

    /// Atoms below `a ; b`.
    pub fn compose(&self, a: AtomId, b: AtomId) -> AtomSet {
        AtomSet::from_iter(self.len(), (0..self.len()).filter(|&c| self.is_consistent(a, b, c)))
    }

    /// Complex composition `X ; Y`.
    pub fn compose_sets(&self, x: &AtomSet, y: &AtomSet) -> AtomSet {
        let mut out = AtomSet::empty(self.len());
        for a in x.iter() {
            for b in y.iter() {
                out.union_with(&self.compose(a, b));
            }
        }
        out
    }

    pub fn triples(&self) -> impl Iterator<Item = (AtomId, AtomId, AtomId)> + '_ {
        let k = self.len();
        (0..k * k * k)
            .filter(move |&i| self.consistent[i >> 6] >> (i & 63) & 1 == 1)
            .map(move |i| (i / (k * k), (i / k) % k, i % k))
    }

    pub fn triple_count(&self) -> usize {
        self.consistent.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The six Peircean transforms of `(a, b, c)`, starting with itself.
    pub fn peircean(&self, (a, b, c): (AtomId, AtomId, AtomId)) -> [(AtomId, AtomId, AtomId); 6] {
        let cv = |x| self.converse(x);
        [
            (a, b, c),
            (cv(a), c, b),
            (c, cv(b), a),
            (cv(b), cv(a), cv(c)),
            (cv(c), a, cv(b)),
            (b, cv(c), cv(a)),
        ]
    }

    /// Adds every Peircean transform of every consistent triple.
    pub fn close_peircean(&mut self) {
        let seed: Vec<_> = self.triples().collect();
        for t in seed {
            for (a, b, c) in self.peircean(t) {
                self.set_consistent(a, b, c, true);
            }
        }
    }
}

pub fn validate_ra(s: &RaAtomStructure) -> Result<ValidationReport> {
    let k = s.len();
    if k == 0 {
        return structural("empty atom set");
    }
    for a in 0..k {
        if s.converse(s.converse(a)) != a {
            return structural(format!("converse is not an involution at {}", s.name(a)));
        }
    }
    let mut rep = ValidationReport::new();
    let nm = |a: AtomId| s.name(a).to_string();
    for t in s.triples() {
        for u in s.peircean(t).into_iter().skip(1) {
            if !s.is_consistent(u.0, u.1, u.2) {
                rep.push(
                    "peircean closure",
                    vec![nm(t.0), nm(t.1), nm(t.2), nm(u.0), nm(u.1), nm(u.2)],
                );
            }
        }
    }
    let non_id: Vec<_> = s.non_identity().iter().collect();
    for e in s.identity().iter() {
        for &x in &non_id {
            for &y in &non_id {
                if s.is_consistent(e, x, y) != (x == y) {
                    rep.push("identity law", vec![nm(e), nm(x), nm(y)]);
                }
            }
        }
    }
    Ok(rep)
}

/// The Maddux algebra E_k(2,3): `k` symmetric diversity atoms, one identity,
/// and every triangle allowed except the monochromatic ones.
pub fn maddux_ek23(k: usize) -> Result<RaAtomStructure> {
    if k == 0 {
        return Err(Error::Parameter("E_k(2,3) needs k >= 1".into()));
    }
    let mut names = vec!["id".to_string()];
    names.extend((0..k).map(|i| format!("a{i}")));
    let total = k + 1;
    let mut triples = Vec::new();
    for a in 0..total {
        for b in 0..total {
            for c in 0..total {
                let ids = [a, b, c].iter().filter(|&&x| x == 0).count();
                let ok = match ids {
                    0 => !(a == b && b == c),
                    1 => {
                        let mut rest = [a, b, c].into_iter().filter(|&x| x != 0);
                        rest.next() == rest.next()
                    }
                    2 => false,
                    _ => true,
                };
                if ok {
                    triples.push((a, b, c));
                }
            }
        }
    }
    RaAtomStructure::new(
        names,
        AtomSet::from_iter(total, [0]),
        (0..total).collect(),
        triples,
    )
}
