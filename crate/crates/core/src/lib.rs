//! Atom structures for cylindric and relation algebras, the atomic games
//! played on them, and the constructions that separate representability
//! classes: rainbow algebras, blow-up-and-blur, and bases.

pub mod atomset;
pub mod basis;
pub mod blur;
pub mod error;
pub mod ef;
pub mod game;
pub mod io;
pub mod network;
pub mod rainbow;
pub mod scword;
pub mod structures;

pub use atomset::AtomSet;
pub use error::{Error, Result};
pub use game::{solve_game, verify_script, GameConfig, GameOutcome, GreedyScript, Player, Rounds, ScriptVerdict, StrategyScript, Witness};
pub use network::{Move, Network, Node};
pub use structures::{validate_ca, validate_ra, AtomId, CaAtomStructure, RaAtomStructure, ValidationReport, Violation};
