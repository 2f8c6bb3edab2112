//! Black-box optimisers: policies that pick the next unvisited point from
//! the trace so far.

mod appendix;
mod family;
mod tree;

use std::fmt;
use std::str::FromStr;

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use appendix::{appendix_pair, first_max, AppendixOptimiser, AppendixPair, AppendixPlan, AppendixRole};
pub use family::{optimiser_family, FamilyConfig, OptimiserFamily, Regime, DEFAULT_TREE_CAP};
pub use tree::{enumerate_all_optimisers, tree_count, DecisionTree};

use crate::domain::{Permutation, ProblemContext, SearchTrace, TargetFunction, XIndex};
use crate::error::{Error, Result};
use crate::machine::Budget;
use crate::measures::PerformanceMeasure;
use crate::par;

pub trait Optimiser: Send + Sync {
    /// Next point to probe; must not be in `trace`.
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex;
    fn label(&self) -> String;
}

impl<T: Optimiser + ?Sized> Optimiser for Box<T> {
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        (**self).choose(ctx, trace)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

/// Full-length trace of `a` on `f`.
pub fn run_trace(a: &dyn Optimiser, ctx: &ProblemContext, f: &TargetFunction) -> Result<SearchTrace> {
    ctx.check_function(f)?;
    let mut trace = SearchTrace::new();
    for _ in 0..ctx.x_size() {
        let x = a.choose(ctx, &trace);
        if x >= ctx.x_size() || trace.visited(x) {
            return Err(Error::Revisit {
                label: a.label(),
                point: x,
            });
        }
        trace.push(x, f.value(x))?;
    }
    Ok(trace)
}

fn first_unvisited(order: impl IntoIterator<Item = XIndex>, trace: &SearchTrace) -> XIndex {
    order
        .into_iter()
        .find(|&x| !trace.visited(x))
        .expect("choose is only called while unvisited points remain")
}

/// Probes `X` in canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Enumerative;

impl Optimiser for Enumerative {
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        first_unvisited(0..ctx.x_size(), trace)
    }

    fn label(&self) -> String {
        "enumerative".into()
    }
}

/// Probes `σ(x₁), σ(x₂), …`. On `σf` it sees exactly `f`'s value table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permuted {
    order: Permutation,
}

impl Permuted {
    pub fn new(ctx: &ProblemContext, order: Permutation) -> Result<Self> {
        if order.len() != ctx.x_size() {
            return Err(Error::ContextMismatch(format!(
                "permutation of {} points on a context with {}",
                order.len(),
                ctx.x_size()
            )));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &Permutation {
        &self.order
    }
}

impl Optimiser for Permuted {
    fn choose(&self, _ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        first_unvisited(self.order.mapping().iter().copied(), trace)
    }

    fn label(&self) -> String {
        format!("permuted:{}", join(self.order.mapping()))
    }
}

fn join(items: &[usize]) -> String {
    items.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Seed for a stochastic choice: a function of the optimiser's seed and the
/// trace, so the policy stays deterministic.
fn trace_rng(seed: u64, trace: &SearchTrace) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &(x, y) in trace.entries() {
        for v in [x as u64, y as u64] {
            h = (h ^ v).wrapping_mul(0x0100_0000_01b3).rotate_left(29);
        }
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn random_unvisited(ctx: &ProblemContext, trace: &SearchTrace, seed: u64) -> XIndex {
    let open: Vec<XIndex> = (0..ctx.x_size()).filter(|&x| !trace.visited(x)).collect();
    open[trace_rng(seed, trace).random_range(0..open.len())]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSearch {
    pub seed: u64,
}

impl Optimiser for RandomSearch {
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        random_unvisited(ctx, trace, self.seed)
    }

    fn label(&self) -> String {
        format!("random:{}", self.seed)
    }
}

/// Steps to an unvisited index neighbour (`+1`, then `-1`) of the best point
/// seen so far; otherwise picks a random unvisited point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HillClimb {
    pub seed: u64,
}

impl Optimiser for HillClimb {
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        let best = trace
            .entries()
            .iter()
            .rev()
            .max_by_key(|&&(_, y)| y)
            .map(|&(x, _)| x);
        if let Some(b) = best {
            let up = (b + 1 < ctx.x_size()).then_some(b + 1);
            let down = b.checked_sub(1);
            if let Some(x) = [up, down].into_iter().flatten().find(|&x| !trace.visited(x)) {
                return x;
            }
        }
        random_unvisited(ctx, trace, self.seed)
    }

    fn label(&self) -> String {
        format!("hillclimb:{}", self.seed)
    }
}

/// Textual optimiser selector, e.g. `permuted:2,0,1` or `appendix-b:2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimiserSpec {
    Enumerative,
    Permuted(Vec<XIndex>),
    Random(u64),
    HillClimb(u64),
    AppendixA(usize),
    AppendixB(usize),
}

impl FromStr for OptimiserSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown optimiser `{s}`"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64> { a.and_then(|a| a.parse().ok()).ok_or_else(bad) };
        Ok(match name {
            "enumerative" if arg.is_none() => Self::Enumerative,
            "permuted" => Self::Permuted(
                arg.ok_or_else(bad)?
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            "random" => Self::Random(num(arg)?),
            "hillclimb" => Self::HillClimb(num(arg)?),
            "appendix-a" => Self::AppendixA(num(arg)? as usize),
            "appendix-b" => Self::AppendixB(num(arg)? as usize),
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for OptimiserSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Enumerative => write!(f, "enumerative"),
            Self::Permuted(p) => write!(f, "permuted:{}", join(p)),
            Self::Random(s) => write!(f, "random:{s}"),
            Self::HillClimb(s) => write!(f, "hillclimb:{s}"),
            Self::AppendixA(k) => write!(f, "appendix-a:{k}"),
            Self::AppendixB(k) => write!(f, "appendix-b:{k}"),
        }
    }
}

impl OptimiserSpec {
    /// `budget` is only consulted by the appendix pair.
    pub fn build(&self, ctx: &ProblemContext, budget: Budget) -> Result<Box<dyn Optimiser>> {
        Ok(match self {
            Self::Enumerative => Box::new(Enumerative),
            Self::Permuted(p) => Box::new(Permuted::new(ctx, Permutation::new(p.clone())?)?),
            Self::Random(seed) => Box::new(RandomSearch { seed: *seed }),
            Self::HillClimb(seed) => Box::new(HillClimb { seed: *seed }),
            Self::AppendixA(k) => Box::new(appendix_pair(ctx, *k, budget)?.a),
            Self::AppendixB(k) => Box::new(appendix_pair(ctx, *k, budget)?.b),
        })
    }
}

/// A function on which an optimiser scores worst, with that score.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub function: TargetFunction,
    pub value: BigRational,
}

/// Simulates `a` on every function and returns the first (in canonical
/// order) that maximises `measure`. Intended for lower-is-better measures,
/// where larger values are worse.
pub fn find_worst(
    a: &dyn Optimiser,
    ctx: &ProblemContext,
    measure: &dyn PerformanceMeasure,
    cap: u128,
) -> Result<WorstCase> {
    let n = ctx.enumerable(cap)?;
    let indices: Vec<usize> = (0..n).collect();
    let scores = par::try_map_slice(&indices, |&i| {
        measure.evaluate(ctx, &run_trace(a, ctx, &ctx.function_at(i))?.result_vector())
    })?;
    let (best, value) = scores
        .into_iter()
        .enumerate()
        .reduce(|acc, cur| if cur.1 > acc.1 { cur } else { acc })
        .expect("function space is never empty");
    Ok(WorstCase {
        function: ctx.function_at(best),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_FUNCTION_CAP as CAP;
    use crate::measures::{MaxConvention, OptimisationTime};
    use num::{BigInt, BigRational};

    fn ctx(n: usize) -> ProblemContext {
        ProblemContext::standard(n, 2).unwrap()
    }

    #[test]
    fn enumerative_trace() {
        let c = ctx(2);
        let f = TargetFunction::from_strs(&c, &["0", "1"]).unwrap();
        let t = run_trace(&Enumerative, &c, &f).unwrap();
        assert_eq!(t.entries(), &[(0, 0), (1, 1)]);
    }

    #[test]
    fn permuted_sees_original_table_on_permuted_function() {
        let c = ctx(4);
        for sigma in Permutation::all(4) {
            let e = Permuted::new(&c, sigma.clone()).unwrap();
            for f in c.functions(CAP).unwrap() {
                let g = crate::domain::permute_function(&sigma, &f).unwrap();
                let r = run_trace(&e, &c, &g).unwrap().result_vector();
                assert_eq!(r.values(), f.values());
            }
        }
    }

    #[test]
    fn stochastic_optimisers_never_revisit_and_are_reproducible() {
        for n in 2..=4 {
            let c = ctx(n);
            for f in c.functions(CAP).unwrap() {
                for a in [&RandomSearch { seed: 3 } as &dyn Optimiser, &HillClimb { seed: 3 }] {
                    let t = run_trace(a, &c, &f).unwrap();
                    assert_eq!(t.visited_set().len(), n);
                    assert_eq!(t, run_trace(a, &c, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn hill_climb_moves_to_neighbour_of_best() {
        let c = ctx(5);
        let mut t = SearchTrace::new();
        t.push(2, 1).unwrap();
        t.push(3, 0).unwrap();
        assert_eq!(HillClimb { seed: 0 }.choose(&c, &t), 1);
    }

    struct Stuck;

    impl Optimiser for Stuck {
        fn choose(&self, _: &ProblemContext, _: &SearchTrace) -> XIndex {
            0
        }

        fn label(&self) -> String {
            "stuck".into()
        }
    }

    #[test]
    fn revisits_are_rejected() {
        let c = ctx(2);
        let err = run_trace(&Stuck, &c, &TargetFunction::constant(&c, 0)).unwrap_err();
        assert_eq!(err, Error::Revisit { label: "stuck".into(), point: 0 });
    }

    #[test]
    fn spec_round_trip() {
        for s in ["enumerative", "permuted:2,0,1", "random:7", "hillclimb:1", "appendix-a:2", "appendix-b:3"] {
            assert_eq!(s.parse::<OptimiserSpec>().unwrap().to_string(), s);
        }
        for s in ["enumerative:1", "random", "permuted:a", "sa:1"] {
            assert!(s.parse::<OptimiserSpec>().is_err(), "{s}");
        }
        let c = ctx(3);
        assert!(OptimiserSpec::Permuted(vec![0, 0, 1]).build(&c, Budget::default()).is_err());
        assert!(OptimiserSpec::Permuted(vec![1, 0]).build(&c, Budget::default()).is_err());
    }

    #[test]
    fn find_worst_enumerative() {
        let c = ctx(3);
        let m = OptimisationTime::new(MaxConvention::MaxAchieved);
        let w = find_worst(&Enumerative, &c, &m, CAP).unwrap();
        assert_eq!(w.function, TargetFunction::from_strs(&c, &["0", "0", "1"]).unwrap());
        assert_eq!(w.value, BigRational::from_integer(BigInt::from(3)));
        let w = find_worst(&Enumerative, &c, &OptimisationTime::default(), CAP).unwrap();
        assert_eq!(w.function, TargetFunction::constant(&c, 0));
        assert_eq!(w.value, BigRational::from_integer(BigInt::from(4)));
    }
}
