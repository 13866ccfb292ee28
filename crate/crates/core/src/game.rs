//! Atomic games `G^m_k`, their node-reuse variant, and scripted-∀ checking.
//!
//! A move names the witness node. Without reuse the node must be fresh, so
//! a network that fills the budget only faces demands it already
//! witnesses. With reuse ∀ may also overwrite any node off the demanded
//! face. ∃ may always answer with the current network when it already
//! holds a witness.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{exists_responses, initial_networks, Move, Network, NetworkJson, Node};
use crate::structures::{AtomId, CaAtomStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounds {
    Finite(usize),
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub m: usize,
    pub rounds: Rounds,
    pub reuse: bool,
    /// Cap on canonical positions explored.
    pub budget: usize,
}

impl GameConfig {
    pub fn new(m: usize, rounds: Rounds, reuse: bool) -> Self {
        GameConfig {
            m,
            rounds,
            reuse,
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "forall")]
    Forall,
    #[serde(rename = "exists")]
    Exists,
}

/// One line of ∀'s strategy table: at `position` play `mv`; every answer
/// lands on an entry of strictly smaller rank, or there is none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyEntry {
    pub position: Network,
    pub mv: Move,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Positions from which ∃ survives; closed under answering.
    SafetyRegion(Vec<Network>),
    /// ∀ opens with `opening` and follows the table.
    Strategy {
        opening: AtomId,
        table: Vec<StrategyEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameOutcome {
    Decided { winner: Player, witness: Witness },
    Undecided { reason: String, explored: usize },
}

impl GameOutcome {
    pub fn winner(&self) -> Option<Player> {
        match self {
            GameOutcome::Decided { winner, .. } => Some(*winner),
            GameOutcome::Undecided { .. } => None,
        }
    }

    pub fn to_json(&self, s: &CaAtomStructure) -> serde_json::Value {
        use serde_json::json;
        match self {
            GameOutcome::Undecided { reason, explored } => {
                json!({"status": "undecided", "reason": reason, "explored": explored})
            }
            GameOutcome::Decided { winner, witness } => {
                let w = match witness {
                    Witness::SafetyRegion(r) => json!({
                        "kind": "safety_region",
                        "positions": r.iter().map(|x| x.to_json(s)).collect::<Vec<NetworkJson>>(),
                    }),
                    Witness::Strategy { opening, table } => json!({
                        "kind": "strategy",
                        "opening": s.name(*opening),
                        "table": table.iter().map(|e| json!({
                            "position": e.position.to_json(s),
                            "move": move_json(s, &e.mv),
                            "rank": e.rank,
                        })).collect::<Vec<_>>(),
                    }),
                };
                json!({"status": "decided", "winner": winner, "witness": w})
            }
        }
    }
}

pub fn move_json(s: &CaAtomStructure, mv: &Move) -> serde_json::Value {
    serde_json::json!({
        "tuple": mv.tuple,
        "index": mv.index,
        "atom": s.name(mv.atom),
        "target": mv.target,
    })
}

/// Every demand ∀ can make from `net` that is not already witnessed.
pub fn forall_moves(s: &CaAtomStructure, net: &Network, reuse: bool) -> Vec<Move> {
    let n = s.dim();
    let m = net.budget();
    let fresh = (0..m).find(|&x| !net.has_node(x));
    let mut out = Vec::new();
    for code in net.tuple_codes() {
        let t = net.decode(code);
        let cur = net.get(&t).expect("tuple over nodes is labelled");
        for i in 0..n {
            for a in s.cyl_row(i, cur).iter() {
                let mut mv = Move {
                    tuple: t.clone(),
                    index: i,
                    atom: a,
                    target: None,
                };
                if mv.witnessed(net) {
                    continue;
                }
                if let Some(z) = fresh {
                    mv.target = Some(z);
                    out.push(mv.clone());
                }
                if reuse {
                    for z in net.nodes() {
                        if (0..n).any(|j| j != i && t[j] == z) {
                            continue;
                        }
                        let mut mz = mv.clone();
                        mz.target = Some(z);
                        out.push(mz);
                    }
                }
            }
        }
    }
    out
}

/// Explored position graph: canonical positions and, per position, the
/// distinct answer sets of ∀'s moves.
pub(crate) struct PositionGraph {
    pub positions: Vec<Network>,
    pub moves: Vec<Vec<(Move, Vec<usize>)>>,
    pub initial: Vec<Vec<usize>>,
}

fn intern(index: &mut HashMap<Network, usize>, positions: &mut Vec<Network>, net: Network) -> usize {
    if let Some(&i) = index.get(&net) {
        return i;
    }
    positions.push(net.clone());
    index.insert(net, positions.len() - 1);
    positions.len() - 1
}

pub(crate) fn explore(
    s: &CaAtomStructure,
    cfg: &GameConfig,
    max_depth: Option<usize>,
) -> std::result::Result<PositionGraph, usize> {
    let mut index = HashMap::new();
    let mut positions = Vec::new();
    let mut initial = Vec::new();
    for a in 0..s.len() {
        let ids: Vec<usize> = initial_networks(s, a, cfg.m)
            .into_iter()
            .map(|net| intern(&mut index, &mut positions, net.canonical()))
            .collect();
        let mut ids = ids;
        ids.sort_unstable();
        ids.dedup();
        initial.push(ids);
    }
    let mut moves: Vec<Vec<(Move, Vec<usize>)>> = Vec::new();
    let mut frontier: Vec<usize> = (0..positions.len()).collect();
    let mut depth = 0;
    while !frontier.is_empty() {
        if positions.len() > cfg.budget {
            return Err(positions.len());
        }
        let expand = max_depth.map_or(true, |d| depth < d);
        let results: Vec<Vec<(Move, Vec<Network>)>> = frontier
            .par_iter()
            .map(|&p| {
                if !expand {
                    return Vec::new();
                }
                let net = &positions[p];
                forall_moves(s, net, cfg.reuse)
                    .into_iter()
                    .map(|mv| {
                        let mut resp: Vec<Network> = exists_responses(s, net, &mv, cfg.reuse)
                            .expect("enumerated moves are legal")
                            .into_iter()
                            .map(|r| r.canonical())
                            .collect();
                        resp.sort();
                        resp.dedup();
                        (mv, resp)
                    })
                    .collect()
            })
            .collect();
        moves.resize(positions.len(), Vec::new());
        let mut next = Vec::new();
        for (&p, res) in frontier.iter().zip(results) {
            let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
            let mut list = Vec::new();
            for (mv, resp) in res {
                let mut ids: Vec<usize> = resp
                    .into_iter()
                    .map(|r| {
                        let before = positions.len();
                        let id = intern(&mut index, &mut positions, r);
                        if id == before {
                            next.push(id);
                        }
                        id
                    })
                    .collect();
                ids.sort_unstable();
                if seen.insert(ids.clone(), ()).is_none() {
                    list.push((mv, ids));
                }
            }
            moves[p] = list;
        }
        moves.resize(positions.len(), Vec::new());
        frontier = next;
        depth += 1;
    }
    if positions.len() > cfg.budget {
        return Err(positions.len());
    }
    Ok(PositionGraph {
        positions,
        moves,
        initial,
    })
}

/// Iterates the deletion operator; `rank[p]` is the round in which `p`
/// died, `None` if it survives the given number of iterations.
pub(crate) fn deletion_ranks(g: &PositionGraph, iterations: Option<usize>) -> Vec<Option<usize>> {
    let mut rank: Vec<Option<usize>> = vec![None; g.positions.len()];
    let mut round = 0;
    loop {
        if iterations.is_some_and(|k| round >= k) {
            break;
        }
        round += 1;
        let dead: Vec<usize> = (0..g.positions.len())
            .into_par_iter()
            .filter(|&p| {
                rank[p].is_none()
                    && g.moves[p]
                        .iter()
                        .any(|(_, resp)| resp.iter().all(|&r| rank[r].is_some()))
            })
            .collect();
        if dead.is_empty() {
            break;
        }
        for p in dead {
            rank[p] = Some(round);
        }
    }
    rank
}

/// Solves `G^m_k` (or its reuse variant) by backward induction for finite
/// `k` and by a greatest-fixpoint computation for ω rounds.
pub fn solve_game(s: &CaAtomStructure, cfg: &GameConfig) -> Result<GameOutcome> {
    if cfg.m < s.dim() {
        return Err(Error::Parameter(format!(
            "node budget {} below dimension {}",
            cfg.m,
            s.dim()
        )));
    }
    if cfg.m > crate::network::MAX_NODES {
        return Err(Error::Parameter(format!("node budget {} too large", cfg.m)));
    }
    if cfg.rounds == Rounds::Finite(0) {
        return Ok(GameOutcome::Decided {
            winner: Player::Exists,
            witness: Witness::SafetyRegion(Vec::new()),
        });
    }
    let depth = match cfg.rounds {
        Rounds::Finite(k) => Some(k),
        Rounds::Omega => None,
    };
    let g = match explore(s, cfg, depth) {
        Ok(g) => g,
        Err(explored) => {
            return Ok(GameOutcome::Undecided {
                reason: "budget".into(),
                explored,
            })
        }
    };
    let rank = deletion_ranks(&g, depth);
    let lost = (0..s.len()).find(|&a| g.initial[a].iter().all(|&p| rank[p].is_some()));
    Ok(match lost {
        None => GameOutcome::Decided {
            winner: Player::Exists,
            witness: Witness::SafetyRegion(
                (0..g.positions.len())
                    .filter(|&p| rank[p].is_none())
                    .map(|p| g.positions[p].clone())
                    .collect(),
            ),
        },
        Some(opening) => {
            let table = (0..g.positions.len())
                .filter_map(|p| {
                    let r = rank[p]?;
                    let (mv, _) = g.moves[p].iter().find(|(_, resp)| {
                        resp.iter().all(|&q| rank[q].is_some_and(|rq| rq < r))
                    })?;
                    Some(StrategyEntry {
                        position: g.positions[p].clone(),
                        mv: mv.clone(),
                        rank: r,
                    })
                })
                .collect();
            GameOutcome::Decided {
                winner: Player::Forall,
                witness: Witness::Strategy { opening, table },
            }
        }
    })
}

/// Replays a witness against freshly computed moves and answers.
pub fn audit_outcome(s: &CaAtomStructure, cfg: &GameConfig, outcome: &GameOutcome) -> Result<bool> {
    match outcome {
        GameOutcome::Undecided { .. } => Ok(true),
        GameOutcome::Decided {
            witness: Witness::SafetyRegion(region),
            ..
        } => {
            if cfg.rounds == Rounds::Finite(0) {
                return Ok(true);
            }
            let set: std::collections::HashSet<&Network> = region.iter().collect();
            for a in 0..s.len() {
                if !initial_networks(s, a, cfg.m)
                    .iter()
                    .any(|x| set.contains(&x.canonical()))
                {
                    return Ok(false);
                }
            }
            if cfg.rounds != Rounds::Omega {
                return Ok(true);
            }
            for net in region {
                for mv in forall_moves(s, net, cfg.reuse) {
                    let ok = exists_responses(s, net, &mv, cfg.reuse)?
                        .iter()
                        .any(|r| set.contains(&r.canonical()));
                    if !ok {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        GameOutcome::Decided {
            witness: Witness::Strategy { opening, table },
            ..
        } => {
            let by_pos: HashMap<&Network, &StrategyEntry> =
                table.iter().map(|e| (&e.position, e)).collect();
            let bound = match cfg.rounds {
                Rounds::Finite(k) => k,
                Rounds::Omega => usize::MAX,
            };
            for init in initial_networks(s, *opening, cfg.m) {
                match by_pos.get(&init.canonical()) {
                    Some(e) if e.rank <= bound => {}
                    _ => return Ok(false),
                }
            }
            for e in table {
                for r in exists_responses(s, &e.position, &e.mv, cfg.reuse)? {
                    match by_pos.get(&r.canonical()) {
                        Some(f) if f.rank < e.rank => {}
                        _ => return Ok(false),
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Deterministic ∀ strategy driven step by step.
pub trait StrategyScript: Sync {
    type State: Clone + Send + Sync;

    /// Atom ∀ names in the opening round.
    fn opening(&self, s: &CaAtomStructure) -> Result<AtomId>;

    /// Script state once ∃ has laid out the opening network.
    fn start(&self, s: &CaAtomStructure, net: &Network) -> Self::State;

    /// Next demand, or `None` when the script has nothing left to play.
    fn next_move(&self, s: &CaAtomStructure, net: &Network, state: &Self::State) -> Option<Move>;

    /// State after ∃ answered `mv` with `response`.
    fn observe(&self, state: &Self::State, mv: &Move, response: &Network) -> Self::State;
}

/// Subtree of a scripted win: ∀ plays `mv` at `position`; each child is one
/// of ∃'s answers. No children means ∃ had no answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub position: Network,
    pub mv: Move,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn to_json(&self, s: &CaAtomStructure) -> serde_json::Value {
        serde_json::json!({
            "position": self.position.to_json(s),
            "move": move_json(s, &self.mv),
            "responses": self.children.iter().map(|c| c.to_json(s)).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptVerdict {
    /// Every ∃ branch closes; `depth` counts rounds after the opening.
    ForallWins {
        opening: AtomId,
        branches: Vec<ProofNode>,
        depth: usize,
    },
    /// A play in which ∃ is still alive at the depth bound or after the
    /// script ran out of moves.
    Counterexample { play: Vec<(Option<Move>, Network)> },
}

impl ScriptVerdict {
    pub fn forall_wins(&self) -> bool {
        matches!(self, ScriptVerdict::ForallWins { .. })
    }
}

enum Branch {
    Closed(ProofNode),
    Open(Vec<(Option<Move>, Network)>),
}

fn play_script<S: StrategyScript>(
    s: &CaAtomStructure,
    cfg: &GameConfig,
    script: &S,
    net: &Network,
    state: &S::State,
    remaining: usize,
) -> Result<Branch> {
    let Some(mv) = script.next_move(s, net, state) else {
        return Ok(Branch::Open(vec![(None, net.clone())]));
    };
    if !mv.is_legal(s, net) {
        return Err(Error::IllegalMove(format!("script move {mv:?} at {net:?}")));
    }
    let mut responses = exists_responses(s, net, &mv, cfg.reuse)?;
    if responses.is_empty() {
        return Ok(Branch::Closed(ProofNode {
            position: net.clone(),
            mv,
            children: Vec::new(),
        }));
    }
    if remaining == 0 {
        return Ok(Branch::Open(vec![(Some(mv), responses.swap_remove(0))]));
    }
    responses.sort_by_cached_key(|r| r.canonical());
    let subs: Vec<Result<Branch>> = responses
        .par_iter()
        .map(|r| {
            let next = script.observe(state, &mv, r);
            play_script(s, cfg, script, r, &next, remaining - 1)
        })
        .collect();
    let mut children = Vec::with_capacity(subs.len());
    for (r, sub) in responses.iter().zip(subs) {
        match sub? {
            Branch::Closed(node) => children.push(node),
            Branch::Open(mut play) => {
                play.insert(0, (Some(mv.clone()), r.clone()));
                return Ok(Branch::Open(play));
            }
        }
    }
    Ok(Branch::Closed(ProofNode {
        position: net.clone(),
        mv,
        children,
    }))
}

/// Plays the script against every ∃ answer up to `depth_bound` rounds.
pub fn verify_script<S: StrategyScript>(
    s: &CaAtomStructure,
    cfg: &GameConfig,
    script: &S,
    depth_bound: usize,
) -> Result<ScriptVerdict> {
    let opening = script.opening(s)?;
    let mut openings = initial_networks(s, opening, cfg.m);
    openings.sort_by_cached_key(|r| r.canonical());
    let mut branches = Vec::new();
    for net in openings {
        let state = script.start(s, &net);
        match play_script(s, cfg, script, &net, &state, depth_bound.saturating_sub(1))? {
            Branch::Closed(node) => branches.push(node),
            Branch::Open(mut play) => {
                play.insert(0, (None, net));
                return Ok(ScriptVerdict::Counterexample { play });
            }
        }
    }
    if depth_bound == 0 && !branches.is_empty() {
        // Nothing may be played at depth zero.
        return Ok(ScriptVerdict::Counterexample {
            play: vec![(None, branches[0].position.clone())],
        });
    }
    let depth = branches.iter().map(|b| b.depth()).max().unwrap_or(0);
    Ok(ScriptVerdict::ForallWins {
        opening,
        branches,
        depth,
    })
}

/// ∀ plays the first unwitnessed demand in tuple order, always on a fresh
/// node if there is one and otherwise on the least overwritable node.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyScript {
    pub opening: AtomId,
}

impl StrategyScript for GreedyScript {
    type State = ();

    fn opening(&self, s: &CaAtomStructure) -> Result<AtomId> {
        if self.opening >= s.len() {
            return Err(Error::Index {
                index: self.opening,
                bound: s.len(),
            });
        }
        Ok(self.opening)
    }

    fn start(&self, _: &CaAtomStructure, _: &Network) {}

    fn next_move(&self, s: &CaAtomStructure, net: &Network, _: &()) -> Option<Move> {
        forall_moves(s, net, true).into_iter().next().map(|mut mv| {
            let fresh: Option<Node> = (0..net.budget()).find(|&x| !net.has_node(x));
            if fresh.is_some() {
                mv.target = fresh;
            }
            mv
        })
    }

    fn observe(&self, _: &(), _: &Move, _: &Network) {}
}
