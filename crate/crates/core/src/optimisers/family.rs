use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{appendix_pair, enumerate_all_optimisers, tree_count, Enumerative, HillClimb, Optimiser, Permuted, RandomSearch};
use crate::domain::{Permutation, ProblemContext};
use crate::error::{Error, Result};
use crate::machine::Budget;

/// Largest decision-tree count enumerated exhaustively by default. Admits
/// `(|X|,|Y|)` in `{(2,2), (3,2), (4,2), (3,3)}` among the binary and
/// ternary cases.
pub const DEFAULT_TREE_CAP: u128 = 10_000;

/// How a "for all optimisers" claim was discharged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Every deterministic optimiser was checked.
    Exhaustive,
    /// Only a fixed family of representative optimisers was checked.
    WitnessFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyConfig {
    pub tree_cap: u128,
    pub seed: u64,
    pub budget: Budget,
    pub appendix_k: usize,
    /// Permuted variants beyond this many are sampled.
    pub max_permutations: usize,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            tree_cap: DEFAULT_TREE_CAP,
            seed: 0,
            budget: Budget::default(),
            appendix_k: 2,
            max_permutations: 720,
        }
    }
}

pub struct OptimiserFamily {
    pub regime: Regime,
    pub members: Vec<Box<dyn Optimiser>>,
}

impl OptimiserFamily {
    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|a| a.label()).collect()
    }
}

fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

fn permutations(n: usize, limit: usize, seed: u64) -> Vec<Permutation> {
    if factorial(n).is_some_and(|f| f <= limit) {
        return Permutation::all(n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    seen.insert((0..n).collect::<Vec<_>>());
    while seen.len() < limit {
        let mut m: Vec<usize> = (0..n).collect();
        m.shuffle(&mut rng);
        seen.insert(m);
    }
    seen.into_iter()
        .map(|m| Permutation::new(m).expect("shuffles are bijections"))
        .collect()
}

/// All decision trees when that is within `tree_cap`; otherwise the witness
/// family: enumerative, permuted variants, the appendix pair (when it can be
/// built), seeded random search and hill climbing.
pub fn optimiser_family(ctx: &ProblemContext, config: &FamilyConfig) -> Result<OptimiserFamily> {
    if tree_count(ctx.x_size(), ctx.y_size()).is_some_and(|t| t <= config.tree_cap) {
        let members = enumerate_all_optimisers(ctx, config.tree_cap)?
            .into_iter()
            .map(|t| Box::new(t) as Box<dyn Optimiser>)
            .collect();
        return Ok(OptimiserFamily {
            regime: Regime::Exhaustive,
            members,
        });
    }
    let mut members: Vec<Box<dyn Optimiser>> = vec![Box::new(Enumerative)];
    for sigma in permutations(ctx.x_size(), config.max_permutations.max(1), config.seed) {
        members.push(Box::new(Permuted::new(ctx, sigma)?));
    }
    match appendix_pair(ctx, config.appendix_k, config.budget) {
        Ok(pair) => {
            members.push(Box::new(pair.a));
            members.push(Box::new(pair.b));
        }
        Err(Error::NotEnoughIncompressible { .. } | Error::OutOfRange(_)) => {}
        Err(e) => return Err(e),
    }
    for s in [config.seed, config.seed.wrapping_add(1)] {
        members.push(Box::new(RandomSearch { seed: s }));
        members.push(Box::new(HillClimb { seed: s }));
    }
    Ok(OptimiserFamily {
        regime: Regime::WitnessFamily,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        for (x, y) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            let ctx = ProblemContext::standard(x, y).unwrap();
            let fam = optimiser_family(&ctx, &FamilyConfig::default()).unwrap();
            assert_eq!(fam.regime, Regime::Exhaustive, "{x},{y}");
        }
        let ctx = ProblemContext::standard(5, 2).unwrap();
        let fam = optimiser_family(&ctx, &FamilyConfig::default()).unwrap();
        assert_eq!(fam.regime, Regime::WitnessFamily);
        let labels = fam.labels();
        assert_eq!(labels.iter().filter(|l| l.starts_with("permuted:")).count(), 120);
        assert!(labels.contains(&"appendix-b:2".to_string()));
    }

    #[test]
    fn sampled_permutations_are_distinct_and_seeded() {
        let a = permutations(9, 50, 4);
        assert_eq!(a.len(), 50);
        assert_eq!(a, permutations(9, 50, 4));
        assert!(a.contains(&Permutation::identity(9)));
    }
}
