//! Exact lower bounds on expected optimisation time.

use num::{BigInt, BigRational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Exact;
use crate::codec::BitString;
use crate::distributions::{cup_closure, dominance_constant, FunctionClass, ProblemDistribution, Provenance};
use crate::domain::{ProblemContext, TargetFunction};
use crate::error::{Error, Result};
use crate::measures::{expected_performance, MaxConvention, OptimisationTime};
use crate::optimisers::{find_worst, Optimiser, Regime};
use crate::par;

fn int(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, Serialize)]
pub struct AlmostNflEntry {
    pub optimiser: String,
    pub worst_function: Vec<BitString>,
    pub worst_time: Exact,
    /// Mass of the worst function: the effective constant.
    pub constant: Exact,
    pub expectation: Exact,
    /// `constant · |X|`.
    pub single_term_bound: Exact,
    pub single_term_holds: bool,
    pub niah_expectation: Exact,
    /// `dominance · (|X|+1)/2`.
    pub niah_bound: Exact,
    pub niah_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlmostNflReport {
    pub context: ProblemContext,
    pub distribution: Provenance,
    pub convention: MaxConvention,
    pub regime: Regime,
    pub dominance_over_niah: Exact,
    pub entries: Vec<AlmostNflEntry>,
    pub passed: bool,
}

/// For each optimiser: finds its worst function under optimisation time,
/// and checks `E_P[time] ≥ P(f_bad)·|X|` and
/// `E_P[time] ≥ c·(|X|+1)/2` with `c` the dominance constant of `P` over
/// NIAH. Also checks the NIAH expectation itself is `(|X|+1)/2`.
pub fn certify_almost_nfl<O: Optimiser>(
    p: &ProblemDistribution,
    members: &[O],
    regime: Regime,
    convention: MaxConvention,
    cap: u128,
) -> Result<AlmostNflReport> {
    let ctx = p.context();
    let n = ctx.x_size();
    let measure = OptimisationTime::new(convention);
    let niah = ProblemDistribution::niah(ctx, cap)?;
    let dominance = dominance_constant(p, &niah)?;
    let niah_bound = &dominance * BigRational::new(BigInt::from(n + 1), BigInt::from(2));
    let half = BigRational::new(BigInt::from(n + 1), BigInt::from(2));
    let entries = par::try_map_slice(members, |a| {
        let worst = find_worst(a, ctx, &measure, cap)?;
        let constant = p.weight(&worst.function).clone();
        let expectation = expected_performance(a, p, &measure)?;
        let niah_expectation = expected_performance(a, &niah, &measure)?;
        let single = &constant * int(n);
        Ok(AlmostNflEntry {
            optimiser: a.label(),
            worst_function: worst.function.to_json(ctx).values,
            worst_time: Exact::from(&worst.value),
            single_term_holds: expectation >= single,
            niah_bound_holds: expectation >= niah_bound && niah_expectation == half,
            constant: Exact::from(&constant),
            expectation: Exact::from(&expectation),
            single_term_bound: Exact::from(&single),
            niah_expectation: Exact::from(&niah_expectation),
            niah_bound: Exact::from(&niah_bound),
        })
    })?;
    let passed = entries.iter().all(|e| e.single_term_holds && e.niah_bound_holds);
    Ok(AlmostNflReport {
        context: ctx.clone(),
        distribution: p.provenance().clone(),
        convention,
        regime,
        dominance_over_niah: Exact::from(&dominance),
        entries,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IgelToussaintCase {
    pub maxima: usize,
    pub seed_function: Vec<BitString>,
    pub class_size: usize,
    pub predicted: Exact,
    pub mismatches: Vec<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IgelToussaintReport {
    pub context: ProblemContext,
    pub regime: Regime,
    pub optimisers: usize,
    pub cases: Vec<IgelToussaintCase>,
    pub passed: bool,
}

/// A seeded function with exactly `m` points at the top of `Y`.
fn function_with_maxima(ctx: &ProblemContext, m: usize, rng: &mut ChaCha8Rng) -> TargetFunction {
    let top = ctx.max_y_index();
    let mut points: Vec<usize> = (0..ctx.x_size()).collect();
    points.shuffle(rng);
    let mut values = vec![0; ctx.x_size()];
    for (rank, &x) in points.iter().enumerate() {
        values[x] = if rank < m { top } else { rng.random_range(0..top) };
    }
    TargetFunction::new(ctx, values).expect("values are valid indices")
}

/// Expected optimisation time is `(|X|+1)/(m+1)` for every optimiser under
/// the uniform distribution on the permutation closure of a function with
/// `m` maxima.
pub fn verify_igel_toussaint<O: Optimiser>(
    ctx: &ProblemContext,
    maxima: &[usize],
    members: &[O],
    regime: Regime,
    seed: u64,
    cap: u128,
) -> Result<IgelToussaintReport> {
    let n = ctx.x_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measure = OptimisationTime::new(MaxConvention::MaxY);
    let mut cases = Vec::new();
    for &m in maxima {
        if m == 0 || m > n {
            return Err(Error::OutOfRange(format!("{m} maxima on {n} points")));
        }
        let f = function_with_maxima(ctx, m, &mut rng);
        let class = cup_closure(ctx, &FunctionClass::new(ctx, [f.clone()])?)?;
        let p = ProblemDistribution::uniform_class(ctx, &class, cap)?;
        let predicted = BigRational::new(BigInt::from(n + 1), BigInt::from(m + 1));
        let values = par::try_map_slice(members, |a| expected_performance(a, &p, &measure))?;
        let mismatches: Vec<String> = members
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v != predicted)
            .map(|(a, v)| format!("{}: {v}", a.label()))
            .collect();
        cases.push(IgelToussaintCase {
            maxima: m,
            seed_function: f.to_json(ctx).values,
            class_size: class.len(),
            predicted: Exact::from(&predicted),
            holds: mismatches.is_empty(),
            mismatches,
        });
    }
    Ok(IgelToussaintReport {
        context: ctx.clone(),
        regime,
        optimisers: members.len(),
        passed: cases.iter().all(|c| c.holds),
        cases,
    })
}
