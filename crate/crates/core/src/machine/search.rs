//! Budgeted program search: halting-set enumeration, complexity upper
//! bounds, incompressibility and the normalised universal mass.

use std::collections::HashMap;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use super::isa::literal_program;
use super::vm::{Budget, Machine};
use crate::codec::{encode_context, encode_function, BitString};
use crate::domain::{ProblemContext, XIndex};
use crate::error::{Error, Result};
use crate::par;

/// Longest program length that [`enumerate_halting`] accepts.
pub const MAX_ENUMERABLE_LENGTH: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltingProgram {
    pub program: BitString,
    pub output: BitString,
    pub steps: usize,
}

/// `2^-k` as an exact rational.
pub fn dyadic(k: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Every program of length at most `budget.max_program_length` that halts
/// within `budget.max_steps`, in length-then-lex order.
pub fn enumerate_halting(condition: &BitString, budget: Budget) -> Result<Vec<HaltingProgram>> {
    if budget.max_program_length > MAX_ENUMERABLE_LENGTH {
        return Err(Error::CapExceeded {
            what: "program enumeration length",
            size: budget.max_program_length.to_string(),
            cap: MAX_ENUMERABLE_LENGTH as u128,
        });
    }
    let machine = Machine::new(condition);
    let mut halting = Vec::new();
    for len in 1..=budget.max_program_length {
        let found = par::map_range(1usize << len, |v| {
            let program = BitString::from_uint(v as u64, len);
            let outcome = machine.execute(&program, budget.max_steps);
            let halted = outcome.halted();
            outcome.output.filter(|_| halted).map(|output| HaltingProgram {
                program,
                output,
                steps: outcome.steps_used,
            })
        });
        halting.extend(found.into_iter().flatten());
    }
    Ok(halting)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    ExactWithinBudget,
    LiteralFallback,
}

/// Budget-limited upper bound on conditional prefix complexity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub value: usize,
    pub kind: EstimateKind,
    /// The program achieving `value`.
    pub program: BitString,
}

#[derive(Debug, Clone)]
struct OutputStats {
    shortest: BitString,
    mass: BigRational,
}

/// Halting programs at one `(condition, budget)`, indexed by output.
#[derive(Debug, Clone)]
pub struct ProgramIndex {
    condition: BitString,
    budget: Budget,
    programs: Vec<HaltingProgram>,
    by_output: HashMap<BitString, OutputStats>,
}

impl ProgramIndex {
    pub fn build(condition: &BitString, budget: Budget) -> Result<Self> {
        let programs = enumerate_halting(condition, budget)?;
        let mut by_output: HashMap<BitString, OutputStats> = HashMap::new();
        for hp in &programs {
            let weight = dyadic(hp.program.len());
            by_output
                .entry(hp.output.clone())
                .and_modify(|s| s.mass += &weight)
                .or_insert_with(|| OutputStats {
                    shortest: hp.program.clone(),
                    mass: weight.clone(),
                });
        }
        Ok(Self {
            condition: condition.clone(),
            budget,
            programs,
            by_output,
        })
    }

    pub fn for_context(ctx: &ProblemContext, budget: Budget) -> Result<Self> {
        Self::build(&encode_context(ctx), budget)
    }

    pub fn condition(&self) -> &BitString {
        &self.condition
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn programs(&self) -> &[HaltingProgram] {
        &self.programs
    }

    /// Kraft sum `Σ 2^-ℓ(p)` over the enumerated halting programs.
    pub fn kraft_sum(&self) -> BigRational {
        self.programs.iter().map(|hp| dyadic(hp.program.len())).sum()
    }

    pub fn approx_k(&self, target: &BitString) -> ComplexityEstimate {
        match self.by_output.get(target) {
            Some(stats) => ComplexityEstimate {
                value: stats.shortest.len(),
                kind: EstimateKind::ExactWithinBudget,
                program: stats.shortest.clone(),
            },
            None => {
                let program = literal_program(target);
                ComplexityEstimate {
                    value: program.len(),
                    kind: EstimateKind::LiteralFallback,
                    program,
                }
            }
        }
    }

    /// `Σ 2^-ℓ(p)` over enumerated programs printing `target`, if any.
    pub fn program_sum(&self, target: &BitString) -> Option<BigRational> {
        self.by_output.get(target).map(|s| s.mass.clone())
    }
}

pub fn approx_k(target: &BitString, condition: &BitString, budget: Budget) -> Result<ComplexityEstimate> {
    Ok(ProgramIndex::build(condition, budget)?.approx_k(target))
}

/// `2^value ≥ n`, i.e. `value ≥ log₂ n`.
fn at_least_log2(value: usize, n: usize) -> bool {
    value >= 128 || (1u128 << value) >= n as u128
}

/// Whether `K(x | X, Y) ≥ log₂|X|` holds for the budgeted estimate.
pub fn is_incompressible(x: XIndex, ctx: &ProblemContext, budget: Budget) -> Result<bool> {
    if x >= ctx.x_size() {
        return Err(Error::OutOfRange(format!("point index {x} out of range")));
    }
    let index = ProgramIndex::for_context(ctx, budget)?;
    Ok(is_incompressible_in(&index, ctx, x))
}

pub fn is_incompressible_in(index: &ProgramIndex, ctx: &ProblemContext, x: XIndex) -> bool {
    at_least_log2(index.approx_k(ctx.x(x)).value, ctx.x_size())
}

/// Incompressibility of every point, in canonical order.
pub fn incompressible_points(ctx: &ProblemContext, budget: Budget) -> Result<Vec<bool>> {
    let index = ProgramIndex::for_context(ctx, budget)?;
    Ok((0..ctx.x_size()).map(|x| is_incompressible_in(&index, ctx, x)).collect())
}

/// Which raw weight the universal mass assigns to a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MassForm {
    /// `2^-K(f | X, Y)` with the budgeted estimate.
    #[default]
    ShortestProgram,
    /// `Σ 2^-ℓ(p)` over halting programs printing `f`.
    ProgramSum,
}

impl std::str::FromStr for MassForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest-program" | "m1" => Ok(MassForm::ShortestProgram),
            "program-sum" | "m2" => Ok(MassForm::ProgramSum),
            other => Err(Error::Parse(format!("unknown mass form `{other}`"))),
        }
    }
}

/// Normalised budgeted universal mass over `Y^X`.
#[derive(Debug, Clone)]
pub struct UniversalMass {
    pub context: ProblemContext,
    pub budget: Budget,
    pub form: MassForm,
    /// Raw weight per function, canonical function order.
    pub raw: Vec<BigRational>,
    /// `raw[i] · normaliser`; sums to exactly one.
    pub normalised: Vec<BigRational>,
    pub normaliser: BigRational,
    pub min_raw: BigRational,
    pub max_raw: BigRational,
    pub estimates: Vec<ComplexityEstimate>,
}

impl UniversalMass {
    pub fn from_index(ctx: &ProblemContext, index: &ProgramIndex, form: MassForm, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        let functions: Vec<_> = (0..n).map(|i| ctx.function_at(i)).collect();
        let entries = par::map_slice(&functions, |f| {
            let target = encode_function(ctx, f);
            let estimate = index.approx_k(&target);
            let raw = match form {
                MassForm::ShortestProgram => dyadic(estimate.value),
                MassForm::ProgramSum => index
                    .program_sum(&target)
                    .unwrap_or_else(|| dyadic(estimate.value)),
            };
            (raw, estimate)
        });
        let (raw, estimates): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let total: BigRational = raw.iter().sum();
        debug_assert!(!total.is_zero());
        let normaliser = total.recip();
        let normalised = raw.iter().map(|r| r * &normaliser).collect();
        let min_raw = raw.iter().min().cloned().expect("non-empty function space");
        let max_raw = raw.iter().max().cloned().expect("non-empty function space");
        Ok(Self {
            context: ctx.clone(),
            budget: index.budget(),
            form,
            raw,
            normalised,
            normaliser,
            min_raw,
            max_raw,
            estimates,
        })
    }
}

pub fn universal_mass(ctx: &ProblemContext, budget: Budget, form: MassForm, cap: u128) -> Result<UniversalMass> {
    ctx.enumerable(cap)?;
    let index = ProgramIndex::for_context(ctx, budget)?;
    UniversalMass::from_index(ctx, &index, form, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{TargetFunction, DEFAULT_FUNCTION_CAP};
    use crate::machine::isa::LIST_LITERAL_OVERHEAD;

    #[test]
    fn kraft_sum_of_small_enumeration() {
        let index = ProgramIndex::build(&BitString::new(), Budget::new(3, 10).unwrap()).unwrap();
        assert!(!index.programs().is_empty());
        assert!(index.kraft_sum() <= BigRational::one());
    }

    #[test]
    fn order_is_length_then_lex() {
        let ctx = ProblemContext::standard(3, 2).unwrap();
        let index = ProgramIndex::for_context(&ctx, Budget::new(10, 64).unwrap()).unwrap();
        let progs: Vec<_> = index.programs().iter().map(|h| h.program.clone()).collect();
        let mut sorted = progs.clone();
        sorted.sort();
        assert_eq!(progs, sorted);
    }

    #[test]
    fn constant_zero_beats_a_needle_at_default_budget() {
        let ctx = ProblemContext::standard(8, 2).unwrap();
        let index = ProgramIndex::for_context(&ctx, Budget::default()).unwrap();
        let k = |f: &TargetFunction| index.approx_k(&encode_function(&ctx, f));
        let zero = k(&TargetFunction::constant(&ctx, ctx.zero_y()));
        assert_eq!(zero.kind, EstimateKind::ExactWithinBudget);
        assert_eq!(zero.value, 14);
        let first = k(&TargetFunction::needle(&ctx, 0));
        assert_eq!(first.value, 16);
        let second = k(&TargetFunction::needle(&ctx, 1));
        assert_eq!(second.kind, EstimateKind::LiteralFallback);
        assert_eq!(second.value, 33 + LIST_LITERAL_OVERHEAD);
        assert!(zero.value < second.value);
    }

    #[test]
    fn universal_mass_normalises_exactly() {
        let ctx = ProblemContext::standard(3, 2).unwrap();
        for form in [MassForm::ShortestProgram, MassForm::ProgramSum] {
            let m = universal_mass(&ctx, Budget::new(12, 64).unwrap(), form, DEFAULT_FUNCTION_CAP).unwrap();
            let total: BigRational = m.normalised.iter().sum();
            assert_eq!(total, BigRational::one());
            assert!(m.normalised.iter().all(|w| w > &BigRational::zero()));
            assert!(m.normaliser >= BigRational::one());
            assert!(m.min_raw <= m.max_raw);
        }
    }

    #[test]
    fn points_are_incompressible_on_small_spaces() {
        for n in [2, 3, 5, 8] {
            let ctx = ProblemContext::standard(n, 2).unwrap();
            let flags = incompressible_points(&ctx, Budget::new(12, 64).unwrap()).unwrap();
            assert!(flags.iter().filter(|&&b| b).count() >= n.div_ceil(2));
        }
        let ctx = ProblemContext::standard(2, 2).unwrap();
        assert!(is_incompressible(0, &ctx, Budget::default()).unwrap());
        assert!(is_incompressible(1, &ctx, Budget::default()).unwrap());
        assert!(is_incompressible(2, &ctx, Budget::default()).is_err());
    }

    #[test]
    fn enumeration_length_is_capped() {
        let b = Budget::new(MAX_ENUMERABLE_LENGTH + 1, 1).unwrap();
        assert!(enumerate_halting(&BitString::new(), b).is_err());
    }

    #[test]
    fn mass_form_parsing() {
        assert_eq!("m2".parse::<MassForm>().unwrap(), MassForm::ProgramSum);
        assert!("m3".parse::<MassForm>().is_err());
    }
}
