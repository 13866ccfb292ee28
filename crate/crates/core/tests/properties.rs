mod common;

use atomgame_core::basis::{find_basis, BasisKind};
use atomgame_core::blur::{check_blur, BlurSpec};
use atomgame_core::game::forall_moves;
use atomgame_core::network::{exists_responses, initial_networks, is_consistent, net_equiv};
use atomgame_core::rainbow::{build_rainbow_ca, split_reds, Colour, RainbowAtom, RainbowSignature, RainbowVariant};
use atomgame_core::structures::maddux_ek23;
use atomgame_core::{
    solve_game, validate_ca, validate_ra, verify_script, GameConfig, GreedyScript, Player, Rounds, ScriptVerdict,
};
use common::props;
use proptest::prelude::*;

fn winner(s: &atomgame_core::CaAtomStructure, m: usize, rounds: Rounds, reuse: bool) -> Option<Player> {
    solve_game(s, &GameConfig::new(m, rounds, reuse)).unwrap().winner()
}

proptest! {
    #[test]
    fn cylindrifiers(s in props::small(6), x in any::<u64>(), y in any::<u64>()) {
        props::cylindrifier_laws(&s, x, y)?;
    }

    #[test]
    fn node_equivalence(t in props::net_triple()) {
        props::equivalence_laws(&t)?;
    }

    #[test]
    fn sc_words((w, i) in props::sc_word()) {
        props::sc_compositionality(&w, i)?;
    }

    #[test]
    fn blur_truncations((k, l, n) in props::blur_params()) {
        props::truncation_monotone(k, l, n)?;
    }

    #[test]
    fn exists_answers_are_consistent_and_local(sm in props::small(3), m in 3usize..=4, reuse in any::<bool>(), pick in any::<usize>()) {
        let s = sm.build();
        prop_assume!(validate_ca(&s).unwrap().ok);
        for a in 0..s.len() {
            let opens = initial_networks(&s, a, m);
            let Some(net) = opens.get(pick % opens.len().max(1)) else { continue };
            let moves = forall_moves(&s, net, reuse);
            let Some(mv) = moves.get(pick % moves.len().max(1)) else { continue };
            let z = mv.target.expect("generated moves name a target");
            for r in exists_responses(&s, net, mv, reuse).unwrap() {
                prop_assert!(is_consistent(&s, &r).unwrap().ok);
                prop_assert!(mv.witnessed(&r));
                prop_assert!(r == *net || net_equiv(net, &r, z));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_saturation_is_confluent(s in props::small(4), m in 3usize..=4, hyper in any::<bool>()) {
        props::saturation_confluent(&s, m, hyper)?;
    }

    #[test]
    fn game_monotonicity(sm in props::small(3), k in 1usize..=3) {
        let s = sm.build();
        prop_assume!(validate_ca(&s).unwrap().ok);
        for reuse in [false, true] {
            for m in 3..=4 {
                if winner(&s, m, Rounds::Finite(k), reuse) == Some(Player::Forall) {
                    prop_assert_eq!(winner(&s, m, Rounds::Finite(k + 1), reuse), Some(Player::Forall));
                }
            }
            if winner(&s, 4, Rounds::Finite(k), reuse) == Some(Player::Exists) {
                prop_assert_eq!(winner(&s, 3, Rounds::Finite(k), reuse), Some(Player::Exists));
            }
        }
        for m in 3..=4 {
            if winner(&s, m, Rounds::Finite(k), false) == Some(Player::Forall) {
                prop_assert_eq!(winner(&s, m, Rounds::Finite(k), true), Some(Player::Forall));
            }
        }
    }

    #[test]
    fn hyperbasis_is_a_basis(sm in props::small(4), m in 3usize..=4) {
        let s = sm.build();
        prop_assume!(validate_ca(&s).unwrap().ok);
        if find_basis(&s, m, BasisKind::Hyperbasis, 100_000).unwrap().exists() == Some(true) {
            prop_assert_eq!(find_basis(&s, m, BasisKind::Basis, 100_000).unwrap().exists(), Some(true));
        }
    }

    #[test]
    fn script_wins_are_game_wins(sm in props::small(3), m in 3usize..=4, reuse in any::<bool>(), opening in any::<usize>()) {
        let s = sm.build();
        prop_assume!(validate_ca(&s).unwrap().ok);
        let script = GreedyScript { opening: opening % s.len() };
        let cfg = GameConfig::new(m, Rounds::Omega, reuse);
        if let ScriptVerdict::ForallWins { depth, .. } = verify_script(&s, &cfg, &script, 4).unwrap() {
            prop_assert_eq!(winner(&s, m, Rounds::Finite(depth.max(1)), reuse), Some(Player::Forall));
        }
    }

    #[test]
    fn strong_blur_implies_blur(k in 1usize..=6, l in 1usize..=3, n in 2usize..=4) {
        let spec = BlurSpec::all_l_subsets(maddux_ek23(k).unwrap(), l, n);
        prop_assume!(!spec.j.is_empty());
        if check_blur(&spec, true).unwrap().ok() {
            prop_assert!(check_blur(&spec, false).unwrap().ok());
        }
    }

    #[test]
    fn rainbow_atoms_ignore_vertex_names(pick in any::<usize>(), seed in any::<u64>()) {
        let rb = build_rainbow_ca(&RainbowSignature::ca(3, 2, 2), RainbowVariant::Base, 100_000).unwrap();
        let atom = &rb.atoms[pick % rb.atoms.len()];
        let v = atom.graph.vertices();
        let mut perm: Vec<usize> = (0..v).collect();
        let mut x = seed;
        for i in (1..v).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let map: Vec<usize> = atom.kernel.iter().map(|&p| perm[p]).collect();
        let again = RainbowAtom::from_map(&map, &atom.graph.permuted(&perm)).unwrap();
        prop_assert_eq!(rb.atom_id(&again), rb.atom_id(atom));
    }
}

#[test]
fn maddux_structures_validate() {
    for k in 1..=8 {
        let r = maddux_ek23(k).unwrap();
        assert!(validate_ra(&r).unwrap().ok, "k={k}");
    }
}

#[test]
fn split_reds_only_touch_reds() {
    let sr = split_reds(&RainbowSignature::ca(3, 3, 2), 2, 200_000).unwrap();
    for (b, copies) in sr.copy_map.iter().enumerate() {
        let base = &sr.base.atoms[b];
        let reds = base.red_edges();
        assert_eq!(copies.count(), 1 << reds);
        for c in copies.iter() {
            let split = &sr.split.atoms[c];
            assert_eq!(split.kernel, base.kernel);
            let v = base.graph.vertices();
            for y in 0..v {
                for x in 0..y {
                    let (p, q) = (base.graph.colour(x, y).unwrap(), split.graph.colour(x, y).unwrap());
                    match (p, q) {
                        (Colour::Red { k, l, .. }, Colour::Red { k: k2, l: l2, sup }) => {
                            assert_eq!((k, l), (k2, l2));
                            assert!(sup < 2);
                        }
                        _ => assert_eq!(p, q),
                    }
                }
            }
            for set in atomgame_core::rainbow::subsets(v, 2) {
                assert_eq!(base.graph.yellow(&set), split.graph.yellow(&set));
            }
        }
    }
}
