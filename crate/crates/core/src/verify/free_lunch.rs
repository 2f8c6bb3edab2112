//! Constructive free-lunch demonstrations.

use num::{BigRational, One, Zero};
use serde::Serialize;

use super::Exact;
use crate::codec::{encode_context, BitString};
use crate::distributions::{block_witness, BlockWitness, ProblemDistribution, Provenance};
use crate::domain::{Permutation, ProblemContext, ResultVector, TargetFunction};
use crate::error::{Error, Result};
use crate::machine::{
    disassemble, is_incompressible_in, Budget, ComplexityEstimate, Environment, MassForm, ProgramIndex,
    UniversalMass,
};
use crate::measures::{
    expected_performance, hit_target, m_ptm, result_vector_distribution, MaxConvention, OptimisationTime,
    ResultIndicator,
};
use crate::optimisers::{run_trace, AppendixPair, AppendixPlan, Enumerative, Optimiser, Permuted};

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Report {
    pub distribution: Provenance,
    pub heavier: Vec<BitString>,
    pub lighter: Vec<BitString>,
    /// Maps `heavier` onto `lighter`; the permuted optimiser probes in this order.
    pub sigma: Permutation,
    pub result_vector: Vec<BitString>,
    pub heavier_weight: Exact,
    pub lighter_weight: Exact,
    pub enumerative_probability: Exact,
    pub permuted_probability: Exact,
    pub permuted: String,
    pub certified: bool,
}

/// Uses the first block-uniformity witness of `p`.
pub fn demo_prop1(p: &ProblemDistribution) -> Result<Prop1Report> {
    let witness = block_witness(p)?.ok_or(Error::BlockUniform)?;
    demo_prop1_with(p, &witness)
}

/// Certifies that the enumerative optimiser and its `σ`-permuted variant
/// produce the heavier function's value table with probabilities
/// `P(f) > P(σf)`, computed both from the result-vector law and as the
/// expectation of the indicator measure.
pub fn demo_prop1_with(p: &ProblemDistribution, witness: &BlockWitness) -> Result<Prop1Report> {
    let ctx = p.context();
    let e = Enumerative;
    let e_sigma = Permuted::new(ctx, witness.sigma.clone())?;
    let r_f = ResultVector::new(witness.heavier.values().to_vec());
    let zero = BigRational::zero();
    let law_e = result_vector_distribution(&e, p)?;
    let law_s = result_vector_distribution(&e_sigma, p)?;
    let pe = law_e.get(&r_f).unwrap_or(&zero).clone();
    let ps = law_s.get(&r_f).unwrap_or(&zero).clone();
    let indicator = ResultIndicator { target: r_f.clone() };
    let consistent = expected_performance(&e, p, &indicator)? == pe && expected_performance(&e_sigma, p, &indicator)? == ps;
    let certified = consistent
        && pe == *p.weight(&witness.heavier)
        && ps == *p.weight(&witness.lighter)
        && pe > ps;
    Ok(Prop1Report {
        distribution: p.provenance().clone(),
        heavier: witness.heavier.to_json(ctx).values,
        lighter: witness.lighter.to_json(ctx).values,
        sigma: witness.sigma.clone(),
        result_vector: r_f.values().iter().map(|&y| ctx.y(y).clone()).collect(),
        heavier_weight: Exact::from(&witness.heavier_weight),
        lighter_weight: Exact::from(&witness.lighter_weight),
        enumerative_probability: Exact::from(&pe),
        permuted_probability: Exact::from(&ps),
        permuted: e_sigma.label(),
        certified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NeedleMass {
    pub position: usize,
    pub function: Vec<BitString>,
    pub complexity: ComplexityEstimate,
    pub listing: Option<String>,
    pub mass: Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniversalStatus {
    Certified,
    InconclusiveAtBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalReport {
    pub context: ProblemContext,
    pub budget: Budget,
    pub form: MassForm,
    pub normaliser: Exact,
    pub min_raw: Exact,
    pub max_raw: Exact,
    /// Range of shortest-program over program-sum normalised mass.
    pub form_ratio_min: Exact,
    pub form_ratio_max: Exact,
    pub block_uniform: bool,
    pub first_needle: NeedleMass,
    pub hardest_needle: NeedleMass,
    pub gap: Exact,
    pub status: UniversalStatus,
    pub prop1: Option<Prop1Report>,
}

fn needle_mass(ctx: &ProblemContext, mass: &UniversalMass, env: &Environment, x: usize) -> NeedleMass {
    let f = TargetFunction::needle(ctx, x);
    let i = ctx.function_index(&f);
    let est = mass.estimates[i].clone();
    NeedleMass {
        position: x,
        function: f.to_json(ctx).values,
        listing: disassemble(&est.program, env),
        complexity: est,
        mass: Exact::from(&mass.normalised[i]),
    }
}

/// Builds the surrogate universal mass, checks block uniformity and compares
/// the needle at `x₁` against the needle with the largest complexity
/// estimate (the first such, in canonical order). When the gap is positive
/// the pair is handed to [`demo_prop1_with`].
pub fn demo_universal_free_lunch(ctx: &ProblemContext, budget: Budget, form: MassForm, cap: u128) -> Result<UniversalReport> {
    ctx.enumerable(cap)?;
    let index = ProgramIndex::for_context(ctx, budget)?;
    let mass = UniversalMass::from_index(ctx, &index, form, cap)?;
    let other_form = match form {
        MassForm::ShortestProgram => MassForm::ProgramSum,
        MassForm::ProgramSum => MassForm::ShortestProgram,
    };
    let other = UniversalMass::from_index(ctx, &index, other_form, cap)?;
    let ratios: Vec<BigRational> = mass.normalised.iter().zip(&other.normalised).map(|(a, b)| a / b).collect();
    let p = ProblemDistribution::from_mass(&mass);
    let block_uniform = block_witness(&p)?.is_none();

    let env = Environment::from_condition(&encode_context(ctx));
    let needles: Vec<NeedleMass> = (0..ctx.x_size()).map(|x| needle_mass(ctx, &mass, &env, x)).collect();
    let hardest = needles
        .iter()
        .reduce(|a, b| if b.complexity.value > a.complexity.value { b } else { a })
        .expect("|X| ≥ 2")
        .clone();
    let first = needles[0].clone();
    let gap = &first.mass.value - &hardest.mass.value;
    let certified = !block_uniform && gap > BigRational::zero();
    let prop1 = if certified {
        let f = TargetFunction::needle(ctx, first.position);
        let g = TargetFunction::needle(ctx, hardest.position);
        Some(demo_prop1_with(&p, &BlockWitness::new(&p, &f, &g)?)?)
    } else {
        None
    };
    Ok(UniversalReport {
        context: ctx.clone(),
        budget,
        form,
        normaliser: Exact::from(&mass.normaliser),
        min_raw: Exact::from(&mass.min_raw),
        max_raw: Exact::from(&mass.max_raw),
        form_ratio_min: Exact::from(ratios.iter().min().expect("non-empty")),
        form_ratio_max: Exact::from(ratios.iter().max().expect("non-empty")),
        block_uniform,
        first_needle: first,
        hardest_needle: hardest,
        gap: Exact::from(&gap),
        status: if certified { UniversalStatus::Certified } else { UniversalStatus::InconclusiveAtBudget },
        prop1,
    })
}

/// Expectations of the pair under one distribution, with both sides of the
/// gap decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct PairExpectation {
    pub distribution: Provenance,
    pub a: Exact,
    pub b: Exact,
    /// `E[a] - E[b]`.
    pub gap: Exact,
    /// Mass of `f ∈ G` whose target value sits at the pivot but not at `x₁`.
    pub only_pivot: Exact,
    /// Mass of `f ∈ G` whose target value sits at `x₁` but not at the pivot.
    pub only_first: Exact,
    pub identity_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSign {
    /// `a` needs fewer probes on average.
    ABetter,
    BBetter,
    Equal,
}

#[derive(Debug, Clone, Serialize)]
pub struct MptmReport {
    pub context: ProblemContext,
    pub budget: Budget,
    pub convention: MaxConvention,
    pub plan: AppendixPlan,
    pub surrogate: PairExpectation,
    pub niah: PairExpectation,
    pub functions_in_g: usize,
    pub identical_off_g: bool,
    pub differences_in_range: bool,
    pub nonzero_only_on_decomposition_events: bool,
    /// On the needle at `x₁`, `b` needs exactly one probe more than `a`.
    pub first_needle_check: bool,
    /// Reported, not asserted.
    pub sign: GapSign,
    pub passed: bool,
}

/// Per-function structure of the pair, shared by both distributions.
struct PairTable {
    diff: Vec<BigRational>,
    pivot_event: Vec<bool>,
    first_event: Vec<bool>,
    identical_off_g: bool,
    in_range: bool,
    nonzero_ok: bool,
    in_g: usize,
}

fn pair_table(ctx: &ProblemContext, pair: &AppendixPair, convention: MaxConvention, cap: u128) -> Result<PairTable> {
    let n = ctx.enumerable(cap)?;
    let plan = &pair.plan;
    let one = BigRational::one();
    let mut t = PairTable {
        diff: Vec::with_capacity(n),
        pivot_event: Vec::with_capacity(n),
        first_event: Vec::with_capacity(n),
        identical_off_g: true,
        in_range: true,
        nonzero_ok: true,
        in_g: 0,
    };
    for i in 0..n {
        let f = ctx.function_at(i);
        let ra = run_trace(&pair.a, ctx, &f)?.result_vector();
        let rb = run_trace(&pair.b, ctx, &f)?.result_vector();
        let d = m_ptm(ctx, &ra, convention) - m_ptm(ctx, &rb, convention);
        let g = plan.in_g(&f);
        let target = hit_target(ctx, &ResultVector::new(f.values().to_vec()), convention);
        let clear = g && plan.scan.iter().all(|&x| f.value(x) != target);
        let at_first = f.value(plan.first()) == target;
        let at_pivot = f.value(plan.pivot) == target;
        let pivot_event = clear && at_pivot && !at_first;
        let first_event = clear && at_first && !at_pivot;
        t.in_g += g as usize;
        t.identical_off_g &= g || ra == rb;
        t.in_range &= d.is_zero() || d == one || d == -one.clone();
        t.nonzero_ok &= d.is_zero() || pivot_event || first_event;
        t.diff.push(d);
        t.pivot_event.push(pivot_event);
        t.first_event.push(first_event);
    }
    Ok(t)
}

fn pair_expectation(pair: &AppendixPair, table: &PairTable, p: &ProblemDistribution, convention: MaxConvention) -> Result<PairExpectation> {
    let m = OptimisationTime::new(convention);
    let ea = expected_performance(&pair.a, p, &m)?;
    let eb = expected_performance(&pair.b, p, &m)?;
    let gap = &ea - &eb;
    let mass = |events: &[bool]| -> BigRational {
        events.iter().zip(p.weights()).filter(|(e, _)| **e).map(|(_, w)| w.clone()).sum()
    };
    let only_pivot = mass(&table.pivot_event);
    let only_first = mass(&table.first_event);
    let direct: BigRational = table.diff.iter().zip(p.weights()).map(|(d, w)| d * w).sum();
    let identity_holds = gap == &only_pivot - &only_first && direct == gap;
    Ok(PairExpectation {
        distribution: p.provenance().clone(),
        a: Exact::from(&ea),
        b: Exact::from(&eb),
        gap: Exact::from(&gap),
        only_pivot: Exact::from(&only_pivot),
        only_first: Exact::from(&only_first),
        identity_holds,
    })
}

/// Builds the appendix pair (incompressibility at `budget`), and checks its
/// structure and gap decomposition under the surrogate mass and under NIAH.
pub fn demo_mptm_free_lunch(
    ctx: &ProblemContext,
    k: usize,
    budget: Budget,
    form: MassForm,
    convention: MaxConvention,
    cap: u128,
) -> Result<MptmReport> {
    ctx.enumerable(cap)?;
    let index = ProgramIndex::for_context(ctx, budget)?;
    let flags: Vec<bool> = (0..ctx.x_size())
        .map(|x| is_incompressible_in(&index, ctx, x))
        .collect();
    let pair = AppendixPair::from_plan(AppendixPlan::from_flags(ctx, k, &flags)?);
    let surrogate_p = ProblemDistribution::from_mass(&UniversalMass::from_index(ctx, &index, form, cap)?);
    let niah_p = ProblemDistribution::niah(ctx, cap)?;
    let table = pair_table(ctx, &pair, convention, cap)?;
    let surrogate = pair_expectation(&pair, &table, &surrogate_p, convention)?;
    let niah = pair_expectation(&pair, &table, &niah_p, convention)?;

    let f = TargetFunction::needle(ctx, 0);
    let probes = |a: &dyn Optimiser| -> Result<BigRational> {
        Ok(m_ptm(ctx, &run_trace(a, ctx, &f)?.result_vector(), convention))
    };
    let first_needle_check = pair.plan.in_g(&f) && probes(&pair.a)? + BigRational::one() == probes(&pair.b)?;

    let zero = BigRational::zero();
    let sign = match surrogate.gap.value.cmp(&zero) {
        std::cmp::Ordering::Less => GapSign::ABetter,
        std::cmp::Ordering::Greater => GapSign::BBetter,
        std::cmp::Ordering::Equal => GapSign::Equal,
    };
    let passed = surrogate.identity_holds
        && niah.identity_holds
        && niah.gap.value.is_zero()
        && table.identical_off_g
        && table.in_range
        && table.nonzero_ok
        && first_needle_check;
    Ok(MptmReport {
        context: ctx.clone(),
        budget,
        convention,
        plan: (*pair.plan).clone(),
        surrogate,
        niah,
        functions_in_g: table.in_g,
        identical_off_g: table.identical_off_g,
        differences_in_range: table.in_range,
        nonzero_only_on_decomposition_events: table.nonzero_ok,
        first_needle_check,
        sign,
        passed,
    })
}
