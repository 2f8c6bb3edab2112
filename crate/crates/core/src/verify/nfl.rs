//! Exhaustive NFL checks and the two "if and only if" characterisations.

use std::collections::BTreeSet;

use num::{BigRational, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Exact;
use crate::codec::BitString;
use crate::distributions::{
    base_classes, cup_closure, is_block_uniform, is_cup, FunctionClass, ProblemDistribution, Provenance,
};
use crate::domain::{ProblemContext, TargetFunction};
use crate::error::Result;
use crate::measures::result_vector_distribution;
use crate::optimisers::{enumerate_all_optimisers, Optimiser, Regime};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NflWitness {
    pub first: String,
    pub second: String,
    pub result_vector: Vec<BitString>,
    pub first_probability: Exact,
    pub second_probability: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NflVerdict {
    pub holds: bool,
    pub regime: Regime,
    pub optimisers: usize,
    pub witness: Option<NflWitness>,
}

/// Whether every optimiser in `members` induces the same result-vector law
/// under `p`. On failure the witness compares the first optimiser with the
/// first one that disagrees, at the first result vector where they differ.
pub fn nfl_holds_over<O: Optimiser>(p: &ProblemDistribution, members: &[O], regime: Regime) -> Result<NflVerdict> {
    let ctx = p.context();
    let laws = par::try_map_slice(members, |a| result_vector_distribution(a, p))?;
    let mut witness = None;
    if let Some(reference) = laws.first() {
        for (j, law) in laws.iter().enumerate().skip(1) {
            if law == reference {
                continue;
            }
            let keys: BTreeSet<_> = reference.keys().chain(law.keys()).collect();
            let zero = BigRational::zero();
            let r = keys
                .into_iter()
                .find(|r| reference.get(*r).unwrap_or(&zero) != law.get(*r).unwrap_or(&zero))
                .expect("unequal laws differ somewhere");
            witness = Some(NflWitness {
                first: members[0].label(),
                second: members[j].label(),
                result_vector: r.values().iter().map(|&y| ctx.y(y).clone()).collect(),
                first_probability: Exact::from(reference.get(r).unwrap_or(&zero)),
                second_probability: Exact::from(law.get(r).unwrap_or(&zero)),
            });
            break;
        }
    }
    Ok(NflVerdict {
        holds: witness.is_none(),
        regime,
        optimisers: members.len(),
        witness,
    })
}

/// NFL over every deterministic optimiser.
pub fn nfl_holds_exact(p: &ProblemDistribution, tree_cap: u128) -> Result<NflVerdict> {
    let trees = enumerate_all_optimisers(p.context(), tree_cap)?;
    nfl_holds_over(p, &trees, Regime::Exhaustive)
}

#[derive(Debug, Clone, Serialize)]
pub struct NflCase {
    pub context: ProblemContext,
    pub distribution: Provenance,
    pub expected: bool,
    pub verdict: NflVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct NflUniformReport {
    pub cases: Vec<NflCase>,
    pub passed: bool,
}

/// Uniform and NIAH distributions satisfy NFL; a needle point mass does not.
pub fn verify_nfl_uniform(contexts: &[ProblemContext], cap: u128, tree_cap: u128) -> Result<NflUniformReport> {
    let mut cases = Vec::new();
    for ctx in contexts {
        let needle = TargetFunction::needle(ctx, ctx.x_size() - 1);
        for (p, expected) in [
            (ProblemDistribution::uniform_all(ctx, cap)?, true),
            (ProblemDistribution::niah(ctx, cap)?, true),
            (ProblemDistribution::point_mass(ctx, &needle, cap)?, false),
        ] {
            let verdict = nfl_holds_exact(&p, tree_cap)?;
            cases.push(NflCase {
                context: ctx.clone(),
                distribution: p.provenance().clone(),
                expected,
                verdict,
            });
        }
    }
    let passed = cases.iter().all(|c| c.verdict.holds == c.expected);
    Ok(NflUniformReport { cases, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    BlockUniform,
    Perturbed,
    RandomSimplex,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceTrial {
    pub kind: TrialKind,
    pub seed: u64,
    pub block_uniform: bool,
    pub nfl_holds: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub context: ProblemContext,
    pub trials: usize,
    pub agreements: usize,
    pub block_uniform_count: usize,
    pub nfl_holds_count: usize,
    pub details: Vec<EquivalenceTrial>,
    pub passed: bool,
}

/// A block-uniform draw with one function's weight scaled, so its class is
/// no longer flat.
fn perturbed_fixture(ctx: &ProblemContext, seed: u64, cap: u128) -> Result<ProblemDistribution> {
    let base = ProblemDistribution::block_uniform_random(ctx, seed, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes: Vec<Vec<usize>> = base_classes(ctx, cap)?.into_iter().filter(|c| c.len() > 1).collect();
    let class = classes.choose(&mut rng).expect("|X| ≥ 2 gives a class with two members");
    let i = *class.choose(&mut rng).expect("non-empty class");
    let factor = BigRational::from_integer(rng.random_range(2..=5u32).into());
    base.perturbed(&ctx.function_at(i), &factor)
}

/// Block uniformity agrees with NFL on seeded fixtures cycling through
/// block-uniform draws, perturbed draws and independent random weights.
pub fn verify_block_uniform_equivalence(
    ctx: &ProblemContext,
    trials: usize,
    seed: u64,
    cap: u128,
    tree_cap: u128,
) -> Result<EquivalenceReport> {
    let trees = enumerate_all_optimisers(ctx, tree_cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut details = Vec::with_capacity(trials);
    for t in 0..trials {
        let s = rng.next_u64();
        let (kind, p) = match t % 3 {
            0 => (TrialKind::BlockUniform, ProblemDistribution::block_uniform_random(ctx, s, cap)?),
            1 => (TrialKind::Perturbed, perturbed_fixture(ctx, s, cap)?),
            _ => (TrialKind::RandomSimplex, ProblemDistribution::random_simplex(ctx, s, cap)?),
        };
        let block_uniform = is_block_uniform(&p)?;
        let nfl_holds = nfl_holds_over(&p, &trees, Regime::Exhaustive)?.holds;
        details.push(EquivalenceTrial {
            kind,
            seed: s,
            block_uniform,
            nfl_holds,
            agrees: block_uniform == nfl_holds,
        });
    }
    let agreements = details.iter().filter(|d| d.agrees).count();
    Ok(EquivalenceReport {
        context: ctx.clone(),
        trials,
        agreements,
        block_uniform_count: details.iter().filter(|d| d.block_uniform).count(),
        nfl_holds_count: details.iter().filter(|d| d.nfl_holds).count(),
        passed: agreements == trials,
        details,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CupCase {
    pub closure_of_sample: usize,
    pub class: Vec<Vec<BitString>>,
    pub cup: bool,
    pub nfl_holds: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CupReport {
    pub context: ProblemContext,
    pub classes: usize,
    pub agreements: usize,
    pub cup_count: usize,
    pub details: Vec<CupCase>,
    pub passed: bool,
}

/// For `class_samples` seeded classes, checks the sample and its closure:
/// NFL under the uniform distribution on a class holds exactly when the
/// class is closed under permutation. The whole space is checked too.
pub fn verify_cup_theorem(
    ctx: &ProblemContext,
    class_samples: usize,
    seed: u64,
    cap: u128,
    tree_cap: u128,
) -> Result<CupReport> {
    let n = ctx.enumerable(cap)?;
    let trees = enumerate_all_optimisers(ctx, tree_cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<(usize, FunctionClass)> = Vec::new();
    for s in 0..class_samples {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        let size = rng.random_range(1..=(n / 2).max(1));
        let sample = FunctionClass::new(ctx, indices[..size].iter().map(|&i| ctx.function_at(i)))?;
        let closure = cup_closure(ctx, &sample)?;
        classes.push((s, sample));
        classes.push((s, closure));
    }
    classes.push((class_samples, FunctionClass::whole_space(ctx, cap)?));
    let mut details = Vec::with_capacity(classes.len());
    for (sample, class) in classes {
        let cup = is_cup(ctx, &class)?;
        let p = ProblemDistribution::uniform_class(ctx, &class, cap)?;
        let nfl_holds = nfl_holds_over(&p, &trees, Regime::Exhaustive)?.holds;
        details.push(CupCase {
            closure_of_sample: sample,
            class: class.iter().map(|f| f.to_json(ctx).values).collect(),
            cup,
            nfl_holds,
            agrees: cup == nfl_holds,
        });
    }
    let agreements = details.iter().filter(|d| d.agrees).count();
    Ok(CupReport {
        context: ctx.clone(),
        classes: details.len(),
        agreements,
        cup_count: details.iter().filter(|d| d.cup).count(),
        passed: agreements == details.len(),
        details,
    })
}
