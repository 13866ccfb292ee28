//! Property bodies and input strategies. The property target runs them at
//! the default case count; the acceptance target reruns five of them at
//! 1000 cases each.

use atomgame_core::basis::{find_basis_with_schedule, BasisKind, BasisOutcome, Schedule};
use atomgame_core::blur::{blow_up_and_blur, BlurSpec};
use atomgame_core::network::net_equiv;
use atomgame_core::scword::{eval_sc_word, ScToken, ScWord};
use atomgame_core::structures::{cm_apply, maddux_ek23, CmOp};
use atomgame_core::{AtomSet, Network, Node};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{Small, PATTERNS};

pub fn small(max_atoms: usize) -> impl Strategy<Value = Small> {
    (1..=max_atoms).prop_flat_map(|k| {
        let labels = || proptest::collection::vec(0..k as u8, k);
        (
            proptest::collection::vec(0..PATTERNS.len(), k),
            labels(),
            labels(),
            labels(),
        )
            .prop_map(|(pats, a, b, c)| Small { pats, parts: [a, b, c] })
    })
}

fn set_of(mask: u64, k: usize) -> AtomSet {
    AtomSet::from_iter(k, (0..k).filter(|a| mask >> a & 1 == 1))
}

/// Closure-operator and additivity laws for every cylindrifier, and
/// agreement with the class description of `c_i X`.
pub fn cylindrifier_laws(sm: &Small, x: u64, y: u64) -> Result<(), TestCaseError> {
    let s = sm.build();
    let k = s.len();
    let (xs, ys) = (set_of(x, k), set_of(y, k));
    let empty = AtomSet::empty(k);
    for i in 0..3 {
        let c = |z: &AtomSet| cm_apply(&s, CmOp::Cyl(i), std::slice::from_ref(z)).unwrap();
        let cx = c(&xs);
        prop_assert!(xs.is_subset(&cx));
        prop_assert_eq!(c(&cx), cx.clone());
        let mut xy = xs.clone();
        xy.union_with(&ys);
        let mut cxcy = cx.clone();
        cxcy.union_with(&c(&ys));
        prop_assert_eq!(c(&xy), cxcy);
        prop_assert_eq!(c(&empty), empty.clone());
        let want = AtomSet::from_iter(
            k,
            (0..k).filter(|&b| xs.iter().any(|a| sm.parts[i][a] == sm.parts[i][b])),
        );
        prop_assert_eq!(cx, want);
    }
    Ok(())
}

/// Network triples where the second and third agree with their
/// predecessor off node `z` except for the flagged perturbations.
#[derive(Debug, Clone)]
pub struct NetTriple {
    pub a: Network,
    pub b: Network,
    pub c: Network,
    pub z: Node,
}

fn tuples(nodes: &[Node]) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    for &x in nodes {
        for &y in nodes {
            for &w in nodes {
                out.push(vec![x, y, w]);
            }
        }
    }
    out
}

fn perturb(base: &Network, z: Node, drop: bool, bump: &[bool], stray: Option<usize>) -> Network {
    let mut out = if drop {
        base.without_node(z)
    } else {
        let mut o = base.clone();
        o.add_node(z);
        o
    };
    if !drop {
        let nodes: Vec<Node> = out.nodes().collect();
        for (idx, t) in tuples(&nodes).into_iter().enumerate() {
            if t.contains(&z) {
                let cur = out.get(&t).unwrap_or(0);
                let next = if bump[idx % bump.len()] { (cur + 1) % 4 } else { cur };
                out.set(&t, next);
            }
        }
    }
    if let Some(pick) = stray {
        let nodes: Vec<Node> = out.nodes().filter(|&x| x != z).collect();
        let ts = tuples(&nodes);
        if !ts.is_empty() {
            let t = &ts[pick % ts.len()];
            let cur = out.get(t).unwrap();
            out.set(t, (cur + 1) % 4);
        }
    }
    out
}

pub fn net_triple() -> impl Strategy<Value = NetTriple> {
    (4usize..=5).prop_flat_map(|m| {
        (
            1u32..(1 << m),
            proptest::collection::vec(0usize..4, m * m * m),
            0..m,
            (any::<bool>(), proptest::collection::vec(any::<bool>(), 8), proptest::option::weighted(0.2, 0usize..200)),
            (any::<bool>(), proptest::collection::vec(any::<bool>(), 8), proptest::option::weighted(0.2, 0usize..200)),
        )
            .prop_map(move |(mask, labels, z, pb, pc)| {
                let mut a = Network::empty(3, m);
                for x in 0..m {
                    if mask >> x & 1 == 1 {
                        a.add_node(x);
                    }
                }
                let nodes: Vec<Node> = a.nodes().collect();
                for t in tuples(&nodes) {
                    let code = (t[0] * m + t[1]) * m + t[2];
                    a.set(&t, labels[code]);
                }
                let b = perturb(&a, z, pb.0, &pb.1, pb.2);
                let c = perturb(&b, z, pc.0, &pc.1, pc.2);
                NetTriple { a, b, c, z }
            })
    })
}

fn equiv_by_definition(a: &Network, b: &Network, z: Node) -> bool {
    let off = |n: &Network| -> Vec<Node> { n.nodes().filter(|&x| x != z).collect() };
    if off(a) != off(b) {
        return false;
    }
    tuples(&off(a)).iter().all(|t| a.get(t) == b.get(t))
}

/// `≡_z` is an equivalence relation and matches its definition.
pub fn equivalence_laws(t: &NetTriple) -> Result<(), TestCaseError> {
    let (a, b, c, z) = (&t.a, &t.b, &t.c, t.z);
    prop_assert!(net_equiv(a, a, z));
    prop_assert_eq!(net_equiv(a, b, z), net_equiv(b, a, z));
    prop_assert_eq!(net_equiv(a, b, z), equiv_by_definition(a, b, z));
    prop_assert_eq!(net_equiv(b, c, z), equiv_by_definition(b, c, z));
    if net_equiv(a, b, z) && net_equiv(b, c, z) {
        prop_assert!(net_equiv(a, c, z));
    }
    Ok(())
}

pub fn sc_word() -> impl Strategy<Value = (ScWord, usize)> {
    (1usize..=6).prop_flat_map(|m| {
        let token = prop_oneof![
            (0..m, 0..m).prop_map(|(sub, sup)| ScToken::S { sub, sup }),
            (0..m).prop_map(ScToken::C),
        ];
        (proptest::collection::vec(token, 0..12), 0..m)
            .prop_map(move |(tokens, i)| (ScWord::new(m, tokens).unwrap(), i))
    })
}

/// Reference semantics: the word denotes a partial map built by composing
/// one-letter maps on the right.
fn denote(w: &ScWord) -> Vec<Option<usize>> {
    let mut f: Box<dyn Fn(usize) -> Option<usize>> = Box::new(Some);
    for &t in &w.tokens {
        f = match t {
            ScToken::S { sub, sup } => Box::new(move |x| f(if x == sup { sub } else { x })),
            ScToken::C(i) => Box::new(move |x| if x == i { None } else { f(x) }),
        };
    }
    (0..w.m).map(|x| f(x)).collect()
}

/// Appending `c_i` restricts the map to `m ∖ {i}`.
pub fn sc_compositionality(w: &ScWord, i: usize) -> Result<(), TestCaseError> {
    let mut longer = w.clone();
    longer.tokens.push(ScToken::C(i));
    let mut want = eval_sc_word(w);
    want[i] = None;
    prop_assert_eq!(eval_sc_word(&longer), want);
    prop_assert_eq!(eval_sc_word(w), denote(w));
    Ok(())
}

pub fn blur_params() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4).prop_flat_map(|k| (Just(k), 1..=k.min(3), 1usize..=3))
}

/// Every triple among the atoms of truncation `N` keeps its consistency
/// at truncation `N + 1`.
pub fn truncation_monotone(k: usize, l: usize, n_trunc: usize) -> Result<(), TestCaseError> {
    let spec = BlurSpec::all_l_subsets(maddux_ek23(k).unwrap(), l, 3);
    let small = blow_up_and_blur(&spec, n_trunc).unwrap();
    let big = blow_up_and_blur(&spec, n_trunc + 1).unwrap();
    let img: Vec<usize> = small
        .atoms
        .iter()
        .map(|&a| big.atom_id(a).expect("index inclusion"))
        .collect();
    let len = small.structure.len();
    for a in 0..len {
        for b in 0..len {
            for c in 0..len {
                prop_assert_eq!(
                    small.structure.is_consistent(a, b, c),
                    big.structure.is_consistent(img[a], img[b], img[c])
                );
            }
        }
    }
    Ok(())
}

fn summary(o: &BasisOutcome) -> (Option<bool>, Vec<Network>, Vec<usize>) {
    match o {
        BasisOutcome::Found { members } => {
            let mut m = members.clone();
            m.sort();
            (Some(true), m, vec![])
        }
        BasisOutcome::NoBasis { uncovered, .. } => (Some(false), vec![], uncovered.clone()),
        BasisOutcome::Undecided { .. } => (None, vec![], vec![]),
    }
}

/// Forward and reverse deletion schedules reach the same fixpoint.
pub fn saturation_confluent(sm: &Small, m: usize, hyper: bool) -> Result<(), TestCaseError> {
    let s = sm.build();
    let kind = if hyper { BasisKind::Hyperbasis } else { BasisKind::Basis };
    let f = find_basis_with_schedule(&s, m, kind, 100_000, Schedule::Forward).unwrap();
    let r = find_basis_with_schedule(&s, m, kind, 100_000, Schedule::Reverse).unwrap();
    prop_assert_eq!(summary(&f), summary(&r));
    Ok(())
}
