//! Substitution/cylindrification words and the partial maps they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One letter of an sc word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScToken {
    /// `s_sub^sup`, acting as the replacement `[sup|sub]` (sup ↦ sub).
    S { sub: usize, sup: usize },
    /// `c_i`.
    C(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScWord {
    pub m: usize,
    pub tokens: Vec<ScToken>,
}

impl ScWord {
    pub fn new(m: usize, tokens: Vec<ScToken>) -> Result<Self> {
        for t in &tokens {
            let bad = match *t {
                ScToken::S { sub, sup } => sub.max(sup),
                ScToken::C(i) => i,
            };
            if bad >= m {
                return Err(Error::Index { index: bad, bound: m });
            }
        }
        Ok(ScWord { m, tokens })
    }
}

/// Partial map on `0..m`; `None` marks points outside the domain.
pub type PartialMap = Vec<Option<usize>>;

/// Folds the word left to right from the identity: a substitution
/// `[i|j]` precomposes, a cylindrification drops `i` from the domain.
pub fn eval_sc_word(w: &ScWord) -> PartialMap {
    let mut map: PartialMap = (0..w.m).map(Some).collect();
    for t in &w.tokens {
        match *t {
            ScToken::S { sub, sup } => {
                // ŵ∘[sup|sub]: only `sup` moves.
                map[sup] = map[sub];
            }
            ScToken::C(i) => map[i] = None,
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_is_identity() {
        let w = ScWord::new(3, vec![]).unwrap();
        assert_eq!(eval_sc_word(&w), vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn single_cylindrification() {
        let w = ScWord::new(3, vec![ScToken::C(1)]).unwrap();
        assert_eq!(eval_sc_word(&w), vec![Some(0), None, Some(2)]);
    }

    #[test]
    fn substitution_then_cylindrification() {
        // [1|0] sends 1 to 0; dropping 1 leaves {0↦0, 2↦2}.
        let w = ScWord::new(3, vec![ScToken::S { sub: 0, sup: 1 }, ScToken::C(1)]).unwrap();
        assert_eq!(eval_sc_word(&w), vec![Some(0), None, Some(2)]);
        let w = ScWord::new(3, vec![ScToken::S { sub: 0, sup: 1 }]).unwrap();
        assert_eq!(eval_sc_word(&w), vec![Some(0), Some(0), Some(2)]);
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(ScWord::new(2, vec![ScToken::C(2)]).is_err());
    }
}
