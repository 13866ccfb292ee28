//! Blurs of finite relation algebras and the blow-up-and-blur construction.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomset::AtomSet;
use crate::error::{structural, Error, Result};
use crate::structures::{AtomId, RaAtomStructure, ValidationReport};

/// `E(i, j, k)`: some ordering of `i, j, k` is an arithmetic progression.
#[allow(non_snake_case)]
pub fn index_blur_E(i: u64, j: u64, k: u64) -> bool {
    let v = [i, j, k];
    for p in v {
        for q in v {
            for r in v {
                let a: BTreeSet<u64> = [p, q, r].into();
                let b: BTreeSet<u64> = v.into();
                if a == b && r as i128 - q as i128 == q as i128 - p as i128 {
                    return true;
                }
            }
        }
    }
    false
}

/// Ternary index relation used when blurring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexBlur {
    Arithmetic,
    /// Explicit table over indices below `bound`, bit `(i*bound+j)*bound+k`.
    Table { bound: usize, bits: Vec<bool> },
}

impl IndexBlur {
    pub fn holds(&self, i: usize, j: usize, k: usize) -> bool {
        match self {
            IndexBlur::Arithmetic => index_blur_E(i as u64, j as u64, k as u64),
            IndexBlur::Table { bound, bits } => {
                i < *bound && j < *bound && k < *bound && bits[(i * bound + j) * bound + k]
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlurSpec {
    pub r: RaAtomStructure,
    /// Blurs: sets of non-identity atoms of `r`.
    pub j: Vec<AtomSet>,
    pub e: IndexBlur,
    pub n: usize,
}

impl BlurSpec {
    /// Every `l`-element set of non-identity atoms.
    pub fn all_l_subsets(r: RaAtomStructure, l: usize, n: usize) -> Self {
        let ids: Vec<AtomId> = r.non_identity().iter().collect();
        let mut j = Vec::new();
        let mut pick = Vec::new();
        fn go(ids: &[AtomId], l: usize, start: usize, pick: &mut Vec<AtomId>, len: usize, out: &mut Vec<AtomSet>) {
            if pick.len() == l {
                out.push(AtomSet::from_iter(len, pick.iter().copied()));
                return;
            }
            for s in start..ids.len() {
                pick.push(ids[s]);
                go(ids, l, s + 1, pick, len, out);
                pick.pop();
            }
        }
        go(&ids, l, 0, &mut pick, r.len(), &mut j);
        BlurSpec {
            r,
            j,
            e: IndexBlur::Arithmetic,
            n,
        }
    }

    fn check_atoms(&self) -> Result<()> {
        for (w, set) in self.j.iter().enumerate() {
            if set.capacity() != self.r.len() {
                return structural(format!("blur {w} is over a different atom set"));
            }
            if set.intersects(self.r.identity()) {
                return structural(format!("blur {w} contains an identity atom"));
            }
        }
        Ok(())
    }

    fn set_names(&self, x: &AtomSet) -> String {
        let names: Vec<&str> = x.iter().map(|a| self.r.name(a)).collect();
        format!("{{{}}}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    pub pass: bool,
    /// Counterexample when failing, a witness when passing, if any.
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlurReport {
    pub strong: bool,
    pub conditions: Vec<ConditionResult>,
}

impl BlurReport {
    pub fn ok(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// `safe(V, W, T)`: for all `v ∈ V`, `w ∈ W` some `t ∈ T` lies below
/// `v;w`. Everything downstream reads safety through this predicate.
pub fn safe(r: &RaAtomStructure, v: &AtomSet, w: &AtomSet, t: &AtomSet) -> bool {
    v.iter().all(|a| w.iter().all(|b| r.compose(a, b).intersects(t)))
}

/// Bitset over the blurs: which `T` are safe for `(V, W)`.
fn safe_targets(spec: &BlurSpec, hit: &[(AtomSet, AtomSet)], v: &AtomSet, w: &AtomSet) -> AtomSet {
    let mut out = AtomSet::full(spec.j.len());
    for a in v.iter() {
        for b in w.iter() {
            let c = spec.r.compose(a, b);
            let row = &hit.iter().find(|(x, _)| *x == c).expect("all compositions indexed").1;
            out.intersect_with(row);
            if out.is_empty() {
                return out;
            }
        }
    }
    out
}

/// Whether every choice of at most `size` sets from `sets` has a common
/// element inside `within`; returns the first failing choice.
fn small_intersections(sets: &[AtomSet], size: usize, within: &AtomSet) -> Option<Vec<usize>> {
    fn go(
        sets: &[AtomSet],
        size: usize,
        start: usize,
        acc: &AtomSet,
        pick: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        if acc.is_empty() {
            return Some(pick.clone());
        }
        if pick.len() == size {
            return None;
        }
        for s in start..sets.len() {
            let mut next = acc.clone();
            next.intersect_with(&sets[s]);
            pick.push(s);
            if let Some(bad) = go(sets, size, s + 1, &next, pick) {
                return Some(bad);
            }
            pick.pop();
        }
        None
    }
    go(sets, size, 0, within, &mut Vec::new())
}

fn dedup_sets(sets: Vec<AtomSet>) -> Vec<AtomSet> {
    let mut sets = sets;
    sets.sort();
    sets.dedup();
    sets
}

/// Evaluates the blur conditions (a)-(e), and with `strong` also the
/// strengthened safety condition.
pub fn check_blur(spec: &BlurSpec, strong: bool) -> Result<BlurReport> {
    spec.check_atoms()?;
    let r = &spec.r;
    let nonid = r.non_identity();
    let n = spec.n;
    if n < 2 {
        return Err(Error::Parameter(format!("blur arity {n} below 2")));
    }
    let mut conditions = Vec::new();

    let empty = spec.j.iter().position(|w| w.is_empty());
    conditions.push(ConditionResult {
        name: "(a)".into(),
        pass: empty.is_none(),
        witness: match empty {
            Some(w) => vec![format!("J[{w}] = {{}}")],
            None => spec
                .j
                .iter()
                .min_by_key(|w| w.count())
                .map(|w| vec![format!("smallest blur {}", spec.set_names(w))])
                .unwrap_or_default(),
        },
    });

    let mut union = AtomSet::empty(r.len());
    for w in &spec.j {
        union.union_with(w);
    }
    let mut missing = nonid.clone();
    missing.difference_with(&union);
    conditions.push(ConditionResult {
        name: "(b)".into(),
        pass: missing.is_empty(),
        witness: if missing.is_empty() {
            vec![format!("union {}", spec.set_names(&union))]
        } else {
            missing.iter().map(|a| r.name(a).to_string()).collect()
        },
    });

    let bad_c = nonid.iter().find_map(|p| {
        let single = AtomSet::from_iter(r.len(), [p]);
        spec.j.iter().find_map(|w| {
            let pw = r.compose_sets(&single, w);
            (!nonid.is_subset(&pw)).then(|| vec![r.name(p).to_string(), spec.set_names(w)])
        })
    });
    conditions.push(ConditionResult {
        name: "(c)".into(),
        pass: bad_c.is_none(),
        witness: bad_c.clone().unwrap_or_else(|| {
            match (nonid.first(), spec.j.first()) {
                (Some(p), Some(w)) => {
                    let single = AtomSet::from_iter(r.len(), [p]);
                    vec![
                        r.name(p).to_string(),
                        spec.set_names(w),
                        format!("P;W = {}", spec.set_names(&r.compose_sets(&single, w))),
                    ]
                }
                _ => Vec::new(),
            }
        }),
    });

    // For each composition set, the blurs that meet it.
    let comps = dedup_sets(
        nonid
            .iter()
            .flat_map(|a| nonid.iter().map(move |b| (a, b)))
            .map(|(a, b)| r.compose(a, b))
            .collect(),
    );
    let hit: Vec<(AtomSet, AtomSet)> = comps
        .into_iter()
        .map(|c| {
            let row = AtomSet::from_iter(spec.j.len(), (0..spec.j.len()).filter(|&t| spec.j[t].intersects(&c)));
            (c, row)
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..spec.j.len())
        .flat_map(|v| (0..spec.j.len()).map(move |w| (v, w)))
        .collect();
    let targets: Vec<AtomSet> = pairs
        .par_iter()
        .map(|&(v, w)| safe_targets(spec, &hit, &spec.j[v], &spec.j[w]))
        .collect();
    let full = AtomSet::full(spec.j.len());
    if strong {
        let bad = pairs.iter().zip(&targets).find(|(_, t)| **t != full);
        conditions.push(ConditionResult {
            name: "(d) strong".into(),
            pass: bad.is_none(),
            witness: bad
                .map(|(&(v, w), t)| {
                    let mut unsafe_t = full.clone();
                    unsafe_t.difference_with(t);
                    let tt = unsafe_t.first().unwrap();
                    vec![
                        spec.set_names(&spec.j[v]),
                        spec.set_names(&spec.j[w]),
                        spec.set_names(&spec.j[tt]),
                    ]
                })
                .unwrap_or_else(|| vec![format!("{} pairs, every target safe", pairs.len())]),
        });
    }
    {
        let distinct = dedup_sets(targets.clone());
        let bad = small_intersections(&distinct, n - 1, &full);
        let witness = match &bad {
            Some(choice) => choice
                .iter()
                .map(|&c| {
                    let k = targets.iter().position(|t| *t == distinct[c]).unwrap();
                    let (v, w) = pairs[k];
                    format!("({}, {})", spec.set_names(&spec.j[v]), spec.set_names(&spec.j[w]))
                })
                .collect(),
            None => match (pairs.first(), targets.first().and_then(|t| t.first())) {
                (Some(&(v, w)), Some(t)) => vec![
                    spec.set_names(&spec.j[v]),
                    spec.set_names(&spec.j[w]),
                    format!("safe target {}", spec.set_names(&spec.j[t])),
                ],
                _ => Vec::new(),
            },
        };
        conditions.push(ConditionResult {
            name: "(d)".into(),
            pass: bad.is_none(),
            witness,
        });
    }

    let pq = dedup_sets(hit.iter().map(|(c, _)| c.clone()).collect());
    let bad_e = spec.j.iter().find_map(|w| {
        small_intersections(&pq, n - 1, w).map(|choice| {
            let mut out = vec![spec.set_names(w)];
            out.extend(choice.iter().map(|&c| spec.set_names(&pq[c])));
            out
        })
    });
    conditions.push(ConditionResult {
        name: "(e)".into(),
        pass: bad_e.is_none(),
        witness: bad_e.clone().unwrap_or_else(|| {
            let Some(w) = spec.j.first() else {
                return Vec::new();
            };
            let mut acc = w.clone();
            let mut out = vec![spec.set_names(w)];
            for c in pq.iter().cycle().take(n - 1) {
                acc.intersect_with(c);
                out.push(spec.set_names(c));
            }
            out.extend(acc.first().map(|a| format!("common {}", r.name(a))));
            out
        }),
    });

    Ok(BlurReport { strong, conditions })
}

/// Atom of a blown-up structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlownUpAtom {
    Id,
    /// Copy `i` of base atom `p`, blurred into `J[w]`.
    Triple { i: usize, p: AtomId, w: usize },
}

/// Truncated blow-up-and-blur structure with the provenance of its atoms.
#[derive(Debug, Clone)]
pub struct BlownUp {
    pub structure: RaAtomStructure,
    pub atoms: Vec<BlownUpAtom>,
    pub base_names: Vec<String>,
    pub n_trunc: usize,
}

impl BlownUp {
    pub fn atom_id(&self, a: BlownUpAtom) -> Option<AtomId> {
        self.atoms.binary_search(&a).ok()
    }

    /// `H^P`: every copy of base atom `p`.
    pub fn h(&self, p: AtomId) -> AtomSet {
        AtomSet::from_iter(
            self.atoms.len(),
            (0..self.atoms.len()).filter(|&a| matches!(self.atoms[a], BlownUpAtom::Triple { p: q, .. } if q == p)),
        )
    }

    /// `E^W`: every atom blurred into `J[w]`.
    pub fn e(&self, w: usize) -> AtomSet {
        AtomSet::from_iter(
            self.atoms.len(),
            (0..self.atoms.len()).filter(|&a| matches!(self.atoms[a], BlownUpAtom::Triple { w: v, .. } if v == w)),
        )
    }
}

/// Consistency of three non-identity blown-up atoms: the blurs have no
/// common atom, or the indices are blurred by `E` and the base triple is
/// consistent.
fn triple_rule(spec: &BlurSpec, a: BlownUpAtom, b: BlownUpAtom, c: BlownUpAtom) -> bool {
    let (
        BlownUpAtom::Triple { i, p, w: s },
        BlownUpAtom::Triple { i: j, p: q, w: z },
        BlownUpAtom::Triple { i: k, p: rr, w },
    ) = (a, b, c)
    else {
        return false;
    };
    let mut common = spec.j[s].clone();
    common.intersect_with(&spec.j[z]);
    common.intersect_with(&spec.j[w]);
    common.is_empty() || (spec.e.holds(i, j, k) && spec.r.is_consistent(p, q, rr))
}

/// Blows each non-identity atom of `spec.r` up into `n_trunc` indexed
/// copies per blur containing it, then closes the triples under the
/// Peircean transforms.
pub fn blow_up_and_blur(spec: &BlurSpec, n_trunc: usize) -> Result<BlownUp> {
    if n_trunc == 0 {
        return Err(Error::Parameter("truncation must be at least 1".into()));
    }
    spec.check_atoms()?;
    let r = &spec.r;
    if r.identity().count() != 1 {
        return structural("base must have exactly one identity atom");
    }
    let mut atoms = vec![BlownUpAtom::Id];
    for i in 0..n_trunc {
        for (w, set) in spec.j.iter().enumerate() {
            for p in set.iter() {
                atoms.push(BlownUpAtom::Triple { i, p, w });
            }
        }
    }
    atoms.sort();
    let k = atoms.len();
    let find = |a: BlownUpAtom| atoms.binary_search(&a).expect("atom listed");
    let mut converse = Vec::with_capacity(k);
    for &a in &atoms {
        converse.push(match a {
            BlownUpAtom::Id => 0,
            BlownUpAtom::Triple { i, p, w } => {
                let cw = AtomSet::from_iter(r.len(), spec.j[w].iter().map(|x| r.converse(x)));
                let Some(v) = spec.j.iter().position(|x| *x == cw) else {
                    return structural(format!("converse of blur {w} is not a blur"));
                };
                find(BlownUpAtom::Triple { i, p: r.converse(p), w: v })
            }
        });
    }
    let names: Vec<String> = atoms
        .iter()
        .map(|a| match *a {
            BlownUpAtom::Id => "id".to_string(),
            BlownUpAtom::Triple { i, p, w } => format!("({i},{},J{w})", r.name(p)),
        })
        .collect();
    let rows: Vec<Vec<(AtomId, AtomId, AtomId)>> = (0..k)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            for b in 0..k {
                for c in 0..k {
                    let ids = [a, b, c].iter().filter(|&&x| x == 0).count();
                    let ok = match ids {
                        0 => triple_rule(spec, atoms[a], atoms[b], atoms[c]),
                        3 => true,
                        1 => {
                            (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && b == converse[a])
                        }
                        _ => false,
                    };
                    if ok {
                        out.push((a, b, c));
                    }
                }
            }
            out
        })
        .collect();
    let identity = AtomSet::from_iter(k, [0]);
    let mut structure = RaAtomStructure::new(names, identity, converse, rows.into_iter().flatten())?;
    structure.close_peircean();
    Ok(BlownUp {
        structure,
        atoms,
        base_names: r.names().to_vec(),
        n_trunc,
    })
}

/// Checks `H^P ; H^Q = ⋃{H^Z : Z <= P;Q}` over non-identity atoms, with
/// the identity present exactly when the base composition holds it.
pub fn check_embedding_witness(s: &BlownUp, r: &RaAtomStructure) -> Result<ValidationReport> {
    if s.base_names != r.names() || s.atoms.len() != s.structure.len() {
        return structural("blown-up structure was not built from this base");
    }
    let k = s.structure.len();
    let hs: Vec<AtomSet> = (0..r.len()).map(|p| s.h(p)).collect();
    let nonid = r.non_identity();
    let pairs: Vec<(AtomId, AtomId)> = nonid
        .iter()
        .flat_map(|p| nonid.iter().map(move |q| (p, q)))
        .collect();
    let bad: Vec<(AtomId, AtomId)> = pairs
        .par_iter()
        .copied()
        .filter(|&(p, q)| {
            let got = s.structure.compose_sets(&hs[p], &hs[q]);
            let base = r.compose(p, q);
            let mut want = AtomSet::empty(k);
            for z in base.iter() {
                if r.is_identity(z) {
                    want.insert(0);
                } else {
                    want.union_with(&hs[z]);
                }
            }
            got != want
        })
        .collect();
    let mut rep = ValidationReport::new();
    for (p, q) in bad {
        rep.push("H^P;H^Q", vec![r.name(p).to_string(), r.name(q).to_string()]);
    }
    Ok(rep)
}

/// Marks one monochromatic triple of copies as consistent, the `seed`-th
/// such triple that is currently inconsistent. `None` if there is none.
pub fn inject_monochromatic(s: &BlownUp, seed: usize) -> Option<BlownUp> {
    let mono: Vec<(AtomId, AtomId, AtomId)> = (1..s.atoms.len())
        .flat_map(|a| (1..s.atoms.len()).map(move |b| (a, b)))
        .flat_map(|(a, b)| (1..s.atoms.len()).map(move |c| (a, b, c)))
        .filter(|&(a, b, c)| {
            let p = |x: AtomId| match s.atoms[x] {
                BlownUpAtom::Triple { p, .. } => p,
                BlownUpAtom::Id => usize::MAX,
            };
            p(a) == p(b) && p(b) == p(c) && !s.structure.is_consistent(a, b, c)
        })
        .collect();
    if mono.is_empty() {
        return None;
    }
    let (a, b, c) = mono[seed % mono.len()];
    let mut out = s.clone();
    out.structure.set_consistent(a, b, c, true);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{maddux_ek23, validate_ra};

    #[test]
    fn e_examples() {
        assert!(index_blur_E(0, 1, 2));
        assert!(index_blur_E(0, 0, 0));
        assert!(!index_blur_E(0, 1, 3));
        assert!(index_blur_E(4, 2, 0));
        assert!(!index_blur_E(0, 0, 1));
    }

    #[test]
    fn single_blur_passes_a_and_b() {
        let r = maddux_ek23(3).unwrap();
        let spec = BlurSpec {
            j: vec![r.non_identity()],
            r,
            e: IndexBlur::Arithmetic,
            n: 3,
        };
        let rep = check_blur(&spec, false).unwrap();
        assert!(rep.condition("(a)").unwrap().pass);
        assert!(rep.condition("(b)").unwrap().pass);
    }

    #[test]
    fn empty_blur_fails_a() {
        let r = maddux_ek23(3).unwrap();
        let spec = BlurSpec {
            j: vec![r.non_identity(), AtomSet::empty(r.len())],
            r,
            e: IndexBlur::Arithmetic,
            n: 3,
        };
        let rep = check_blur(&spec, false).unwrap();
        let a = rep.condition("(a)").unwrap();
        assert!(!a.pass);
        assert_eq!(a.witness, vec!["J[1] = {}".to_string()]);
    }

    #[test]
    fn blow_up_is_valid_and_blurs_maddux() {
        let spec = BlurSpec::all_l_subsets(maddux_ek23(4).unwrap(), 3, 3);
        let b = blow_up_and_blur(&spec, 3).unwrap();
        assert!(validate_ra(&b.structure).unwrap().ok);
        assert!(check_embedding_witness(&b, &spec.r).unwrap().ok);
        let a0 = spec.r.atom_by_name("a0").unwrap();
        let x = b.atom_id(BlownUpAtom::Triple { i: 0, p: a0, w: 0 }).unwrap();
        let y = b.atom_id(BlownUpAtom::Triple { i: 1, p: a0, w: 0 }).unwrap();
        let z = b.atom_id(BlownUpAtom::Triple { i: 2, p: a0, w: 0 }).unwrap();
        assert!(!b.structure.is_consistent(x, y, z));
        let bad = inject_monochromatic(&b, 0).unwrap();
        assert!(!check_embedding_witness(&bad, &spec.r).unwrap().ok);
    }

    #[test]
    fn zero_truncation_rejected() {
        let spec = BlurSpec::all_l_subsets(maddux_ek23(3).unwrap(), 3, 3);
        assert!(blow_up_and_blur(&spec, 0).is_err());
    }
}
