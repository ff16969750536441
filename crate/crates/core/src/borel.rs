//! Borel codes at finite levels.
//!
//! A level-1 code is an open set. A level-`ξ` code (ξ > 1) is a finite list of
//! pairs `(A_n, B_n)` of codes of lower level and denotes `⋃ (A_n ∖ B_n)`.
//! The leaf type is generic so the same codes serve finite spaces (bit-sets)
//! and copresentations (open codes).

use serde::{Deserialize, Serialize};

use crate::bits::is_subset;
use crate::error::{Error, Result};
use crate::finite::FiniteSpace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorelCode<L> {
    Open(L),
    Union { level: usize, pieces: Vec<(BorelCode<L>, BorelCode<L>)> },
}

impl<L> BorelCode<L> {
    pub fn level(&self) -> usize {
        match self {
            BorelCode::Open(_) => 1,
            BorelCode::Union { level, .. } => *level,
        }
    }

    pub fn union(level: usize, pieces: Vec<(BorelCode<L>, BorelCode<L>)>) -> Result<Self> {
        let code = BorelCode::Union { level, pieces };
        code.validate()?;
        Ok(code)
    }

    /// Levels strictly decrease into subcodes.
    pub fn validate(&self) -> Result<()> {
        match self {
            BorelCode::Open(_) => Ok(()),
            BorelCode::Union { level, pieces } => {
                if *level < 2 {
                    return Err(Error::Invalid("union codes start at level 2".into()));
                }
                for (a, b) in pieces {
                    if a.level() >= *level || b.level() >= *level {
                        return Err(Error::Invalid(format!(
                            "subcode level {} / {} not below {}",
                            a.level(),
                            b.level(),
                            level
                        )));
                    }
                    a.validate()?;
                    b.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn map_leaves<M>(&self, f: &mut impl FnMut(&L) -> M) -> BorelCode<M> {
        match self {
            BorelCode::Open(l) => BorelCode::Open(f(l)),
            BorelCode::Union { level, pieces } => BorelCode::Union {
                level: *level,
                pieces: pieces.iter().map(|(a, b)| (a.map_leaves(f), b.map_leaves(f))).collect(),
            },
        }
    }
}

impl BorelCode<u64> {
    /// Evaluates the code on a finite space. Leaves must be open.
    pub fn eval(&self, space: &FiniteSpace) -> Result<u64> {
        self.validate()?;
        self.eval_unchecked(space)
    }

    fn eval_unchecked(&self, space: &FiniteSpace) -> Result<u64> {
        match self {
            BorelCode::Open(o) => {
                if space.is_open(*o) {
                    Ok(*o)
                } else {
                    Err(Error::Invalid(format!("leaf {o:#b} is not open")))
                }
            }
            BorelCode::Union { pieces, .. } => {
                let mut acc = 0;
                for (a, b) in pieces {
                    acc |= a.eval_unchecked(space)? & !b.eval_unchecked(space)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Canonical level-2 code for `set`: the union of all differences `U ∖ V`
/// of opens contained in `set`, listed in canonical order. Returns `None`
/// when those differences do not cover `set`.
pub fn sigma2_code(space: &FiniteSpace, set: u64) -> Option<BorelCode<u64>> {
    let opens = space.opens();
    let mut pieces = Vec::new();
    let mut covered = 0u64;
    for &u in opens {
        for &v in opens {
            let diff = u & !v;
            if diff != 0 && is_subset(diff, set) && !is_subset(diff, covered) {
                pieces.push((BorelCode::Open(u), BorelCode::Open(v)));
                covered |= diff;
            }
        }
    }
    (covered == set).then_some(BorelCode::Union { level: 2, pieces })
}

/// Decides `set ∈ Σ⁰_ξ(space)` by exhaustive search over codes built from the
/// space's opens. Finite hierarchies collapse at level 2, so `ξ > 2` answers
/// with the level-2 result.
pub fn sigma_level_membership(space: &FiniteSpace, set: u64, level: usize) -> bool {
    match level {
        0 => false,
        1 => space.is_open(set),
        _ => sigma2_code(space, set).is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::submasks;

    #[test]
    fn single_open_evaluates_to_itself() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(BorelCode::Open(0b10).eval(&s).unwrap(), 0b10);
        assert!(BorelCode::Open(0b01).eval(&s).is_err());
    }

    #[test]
    fn sierpinski_bottom_is_sigma2_not_open() {
        let s = FiniteSpace::sierpinski();
        assert!(!sigma_level_membership(&s, 0b01, 1));
        assert!(sigma_level_membership(&s, 0b01, 2));
        let code = sigma2_code(&s, 0b01).unwrap();
        assert_eq!(code.eval(&s).unwrap(), 0b01);
    }

    #[test]
    fn level_two_distributes() {
        let c = FiniteSpace::chain(3);
        let code = BorelCode::union(
            2,
            vec![(BorelCode::Open(0b111), BorelCode::Open(0b110)), (BorelCode::Open(0b100), BorelCode::Open(0b000))],
        )
        .unwrap();
        assert_eq!(code.eval(&c).unwrap(), (0b111 & !0b110) | 0b100);
    }

    #[test]
    fn every_subset_of_small_chain_is_sigma2() {
        let c = FiniteSpace::chain(4);
        for a in submasks(c.full()) {
            assert!(sigma_level_membership(&c, a, 2));
            assert!(sigma_level_membership(&c, a, 5));
        }
    }

    #[test]
    fn rejects_non_decreasing_levels() {
        let bad: Result<BorelCode<u64>> =
            BorelCode::union(2, vec![(BorelCode::Union { level: 2, pieces: vec![] }, BorelCode::Open(0))]);
        assert!(bad.is_err());
    }
}
