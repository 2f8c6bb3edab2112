//! Exact rational distributions over the function space `Y^X`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{histogram, permute_function, Permutation, ProblemContext, TargetFunction};
use crate::error::{Error, Result};
use crate::machine::{universal_mass, Budget, MassForm, UniversalMass};

/// Constructor tag plus its parameters, for audit trails in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub constructor: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(constructor: impl Into<String>) -> Self {
        Self {
            constructor: constructor.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.constructor)?;
        if !self.parameters.is_empty() {
            let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", params.join(","))?;
        }
        Ok(())
    }
}

/// A set of functions on one context, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FunctionClass {
    members: BTreeSet<TargetFunction>,
}

impl FunctionClass {
    pub fn new(ctx: &ProblemContext, members: impl IntoIterator<Item = TargetFunction>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        for f in &members {
            ctx.check_function(f)?;
        }
        Ok(Self { members })
    }

    pub fn whole_space(ctx: &ProblemContext, cap: u128) -> Result<Self> {
        Ok(Self {
            members: ctx.functions(cap)?.collect(),
        })
    }

    /// The `|X|` needle-in-a-haystack functions.
    pub fn niah(ctx: &ProblemContext) -> Self {
        Self {
            members: (0..ctx.x_size()).map(|x| TargetFunction::needle(ctx, x)).collect(),
        }
    }

    pub fn contains(&self, f: &TargetFunction) -> bool {
        self.members.contains(f)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TargetFunction> {
        self.members.iter()
    }
}

fn adjacent_swaps(n: usize) -> impl Iterator<Item = Permutation> {
    (0..n.saturating_sub(1)).map(move |i| Permutation::swap(n, i, i + 1))
}

/// Smallest superset of `class` closed under permutations of `X`.
///
/// Adjacent transpositions generate the symmetric group, so a breadth-first
/// orbit expansion over them reaches every `σf`.
pub fn cup_closure(ctx: &ProblemContext, class: &FunctionClass) -> Result<FunctionClass> {
    let gens: Vec<_> = adjacent_swaps(ctx.x_size()).collect();
    let mut members = class.members.clone();
    let mut queue: VecDeque<_> = members.iter().cloned().collect();
    while let Some(f) = queue.pop_front() {
        for s in &gens {
            let g = permute_function(s, &f)?;
            if members.insert(g.clone()) {
                queue.push_back(g);
            }
        }
    }
    Ok(FunctionClass { members })
}

/// Whether `class` is closed under permutation. Closure under the adjacent
/// transpositions suffices.
pub fn is_cup(ctx: &ProblemContext, class: &FunctionClass) -> Result<bool> {
    for f in class.iter() {
        for s in adjacent_swaps(ctx.x_size()) {
            if !class.contains(&permute_function(&s, f)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Function indices grouped by histogram, in order of histogram key.
pub fn base_classes(ctx: &ProblemContext, cap: u128) -> Result<Vec<Vec<usize>>> {
    let n = ctx.enumerable(cap)?;
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let h = histogram(ctx, &ctx.function_at(i));
        classes.entry(h.counts().to_vec()).or_default().push(i);
    }
    Ok(classes.into_values().collect())
}

/// Exact probability assignment over `Y^X`, stored densely in canonical
/// function order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDistribution {
    context: ProblemContext,
    weights: Vec<BigRational>,
    provenance: Provenance,
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl ProblemDistribution {
    /// Takes weights that already sum to one.
    pub fn from_weights(ctx: &ProblemContext, weights: Vec<BigRational>, provenance: Provenance) -> Result<Self> {
        let n = ctx.enumerable(u128::MAX)?;
        if weights.len() != n {
            return Err(Error::ContextMismatch(format!("{} weights for {n} functions", weights.len())));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::OutOfRange("negative weight".into()));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::OutOfRange(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            context: ctx.clone(),
            weights,
            provenance,
        })
    }

    /// Normalises non-negative weights with a positive total.
    pub fn from_raw_weights(ctx: &ProblemContext, raw: Vec<BigRational>, provenance: Provenance) -> Result<Self> {
        if raw.iter().any(|w| w.is_negative()) {
            return Err(Error::OutOfRange("negative weight".into()));
        }
        let total: BigRational = raw.iter().sum();
        if total.is_zero() {
            return Err(Error::OutOfRange("weights sum to zero".into()));
        }
        let weights = raw.into_iter().map(|w| w / &total).collect();
        Self::from_weights(ctx, weights, provenance)
    }

    pub fn uniform_all(ctx: &ProblemContext, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        Self::from_weights(ctx, vec![ratio(1, n); n], Provenance::new("uniform-all"))
    }

    pub fn uniform_class(ctx: &ProblemContext, class: &FunctionClass, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let w = ratio(1, class.len());
        let mut weights = vec![BigRational::zero(); n];
        for f in class.iter() {
            weights[ctx.function_index(f)] = w.clone();
        }
        Self::from_weights(ctx, weights, Provenance::new("uniform-class").with("size", class.len()))
    }

    pub fn niah(ctx: &ProblemContext, cap: u128) -> Result<Self> {
        let mut p = Self::uniform_class(ctx, &FunctionClass::niah(ctx), cap)?;
        p.provenance = Provenance::new("niah");
        Ok(p)
    }

    pub fn point_mass(ctx: &ProblemContext, f: &TargetFunction, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        ctx.check_function(f)?;
        let mut weights = vec![BigRational::zero(); n];
        weights[ctx.function_index(f)] = BigRational::one();
        Self::from_weights(ctx, weights, Provenance::new("point-mass").with("f", f.display(ctx)))
    }

    /// One seeded weight per base class, shared by all its members.
    pub fn block_uniform_random(ctx: &ProblemContext, seed: u64, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = vec![BigRational::zero(); n];
        for class in base_classes(ctx, cap)? {
            let w = BigRational::from_integer(BigInt::from(rng.random_range(1..=1000u32)));
            for i in class {
                raw[i] = w.clone();
            }
        }
        Self::from_raw_weights(ctx, raw, Provenance::new("block-uniform-random").with("seed", seed))
    }

    /// Independent seeded weight per function.
    pub fn random_simplex(ctx: &ProblemContext, seed: u64, cap: u128) -> Result<Self> {
        let n = ctx.enumerable(cap)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = (0..n)
            .map(|_| BigRational::from_integer(BigInt::from(rng.random_range(1..=1000u32))))
            .collect();
        Self::from_raw_weights(ctx, raw, Provenance::new("random-simplex").with("seed", seed))
    }

    pub fn universal(ctx: &ProblemContext, budget: Budget, form: MassForm, cap: u128) -> Result<Self> {
        Ok(Self::from_mass(&universal_mass(ctx, budget, form, cap)?))
    }

    pub fn from_mass(mass: &UniversalMass) -> Self {
        let form = match mass.form {
            MassForm::ShortestProgram => "shortest-program",
            MassForm::ProgramSum => "program-sum",
        };
        Self {
            context: mass.context.clone(),
            weights: mass.normalised.clone(),
            provenance: Provenance::new("universal")
                .with("form", form)
                .with("max-len", mass.budget.max_program_length)
                .with("max-steps", mass.budget.max_steps),
        }
    }

    /// `λ·self + (1-λ)·other`.
    pub fn mixture(&self, other: &Self, lambda: &BigRational) -> Result<Self> {
        self.same_context(other)?;
        if lambda.is_negative() || lambda > &BigRational::one() {
            return Err(Error::OutOfRange(format!("mixing weight {lambda} outside [0,1]")));
        }
        let rest = BigRational::one() - lambda;
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(p, q)| p * lambda + q * &rest)
            .collect();
        let prov = Provenance::new("mixture")
            .with("lambda", lambda)
            .with("first", &self.provenance)
            .with("second", &other.provenance);
        Self::from_weights(&self.context, weights, prov)
    }

    /// Copy with `f`'s weight scaled by `factor`, then renormalised.
    pub fn perturbed(&self, f: &TargetFunction, factor: &BigRational) -> Result<Self> {
        self.context.check_function(f)?;
        let mut raw = self.weights.clone();
        let i = self.context.function_index(f);
        raw[i] = &raw[i] * factor;
        let prov = Provenance::new("perturbed")
            .with("base", &self.provenance)
            .with("f", f.display(&self.context))
            .with("factor", factor);
        Self::from_raw_weights(&self.context, raw, prov)
    }

    fn same_context(&self, other: &Self) -> Result<()> {
        if self.context != other.context {
            return Err(Error::ContextMismatch("distributions live on different contexts".into()));
        }
        Ok(())
    }

    pub fn context(&self) -> &ProblemContext {
        &self.context
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, f: &TargetFunction) -> &BigRational {
        &self.weights[self.context.function_index(f)]
    }

    /// Indices of functions with positive weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, _)| i)
    }

    pub fn to_json(&self) -> DistributionJson {
        let entries = self
            .support()
            .map(|i| {
                let w = &self.weights[i];
                DistributionEntry {
                    values: self.context.function_at(i).to_json(&self.context).values,
                    weight_num: w.numer().to_string(),
                    weight_den: w.denom().to_string(),
                }
            })
            .collect();
        DistributionJson {
            provenance: self.provenance.clone(),
            entries,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub values: Vec<crate::codec::BitString>,
    pub weight_num: String,
    pub weight_den: String,
}

/// Dump format: one entry per function of positive weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionJson {
    pub provenance: Provenance,
    pub entries: Vec<DistributionEntry>,
}

/// Two classmates with different weights; `heavier` carries more mass and
/// `sigma` maps it onto `lighter`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWitness {
    pub heavier: TargetFunction,
    pub lighter: TargetFunction,
    pub sigma: Permutation,
    pub heavier_weight: BigRational,
    pub lighter_weight: BigRational,
}

impl BlockWitness {
    pub fn new(p: &ProblemDistribution, f: &TargetFunction, g: &TargetFunction) -> Result<Self> {
        let (heavier, lighter) = if p.weight(f) >= p.weight(g) { (f, g) } else { (g, f) };
        let sigma = Permutation::relating(heavier, lighter)
            .ok_or_else(|| Error::InvalidFunction("witness functions have different histograms".into()))?;
        Ok(Self {
            heavier: heavier.clone(),
            lighter: lighter.clone(),
            sigma,
            heavier_weight: p.weight(heavier).clone(),
            lighter_weight: p.weight(lighter).clone(),
        })
    }
}

/// First base class with unequal weights, reported as its heaviest and
/// lightest members (first in canonical order among ties).
pub fn block_witness(p: &ProblemDistribution) -> Result<Option<BlockWitness>> {
    let ctx = p.context();
    for class in base_classes(ctx, u128::MAX)? {
        let w = |i: &usize| &p.weights[*i];
        let hi = class.iter().copied().reduce(|a, b| if w(&b) > w(&a) { b } else { a });
        let lo = class.iter().copied().reduce(|a, b| if w(&b) < w(&a) { b } else { a });
        if let (Some(hi), Some(lo)) = (hi, lo) {
            if p.weights[hi] != p.weights[lo] {
                return BlockWitness::new(p, &ctx.function_at(hi), &ctx.function_at(lo)).map(Some);
            }
        }
    }
    Ok(None)
}

pub fn is_block_uniform(p: &ProblemDistribution) -> Result<bool> {
    Ok(block_witness(p)?.is_none())
}

/// Largest `c` with `p(f) ≥ c·q(f)` for every `f`.
pub fn dominance_constant(p: &ProblemDistribution, q: &ProblemDistribution) -> Result<BigRational> {
    p.same_context(q)?;
    Ok(q.support()
        .map(|i| &p.weights[i] / &q.weights[i])
        .min()
        .expect("a distribution always has non-empty support"))
}

/// Lossy decimal view of an exact value, for human-facing output.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_FUNCTION_CAP as CAP;

    fn ctx(n: usize) -> ProblemContext {
        ProblemContext::standard(n, 2).unwrap()
    }

    #[test]
    fn uniform_all_small() {
        let c = ctx(2);
        let p = ProblemDistribution::uniform_all(&c, CAP).unwrap();
        assert_eq!(p.weights().len(), 4);
        assert!(p.weights().iter().all(|w| *w == ratio(1, 4)));
        assert!(is_block_uniform(&p).unwrap());
    }

    #[test]
    fn niah_matches_class_and_is_block_uniform() {
        let c = ctx(3);
        let p = ProblemDistribution::niah(&c, CAP).unwrap();
        assert_eq!(p.support().count(), 3);
        assert!(p.support().all(|i| p.weights()[i] == ratio(1, 3)));
        let q = ProblemDistribution::uniform_class(&c, &FunctionClass::niah(&c), CAP).unwrap();
        assert_eq!(p.weights(), q.weights());
        assert!(is_block_uniform(&p).unwrap());
        assert!(is_cup(&c, &FunctionClass::niah(&c)).unwrap());
    }

    #[test]
    fn closure_examples() {
        let c = ctx(3);
        let one = FunctionClass::new(&c, [TargetFunction::needle(&c, 0)]).unwrap();
        assert_eq!(cup_closure(&c, &one).unwrap(), FunctionClass::niah(&c));
        assert!(!is_cup(&c, &one).unwrap());
        let constant = FunctionClass::new(&c, [TargetFunction::constant(&c, 1)]).unwrap();
        assert_eq!(cup_closure(&c, &constant).unwrap(), constant);
        assert!(is_cup(&c, &FunctionClass::whole_space(&c, CAP).unwrap()).unwrap());
    }

    #[test]
    fn point_mass_on_needle_has_needle_witness() {
        let c = ctx(3);
        let f = TargetFunction::needle(&c, 1);
        let p = ProblemDistribution::point_mass(&c, &f, CAP).unwrap();
        let w = block_witness(&p).unwrap().unwrap();
        assert_eq!(w.heavier, f);
        assert_eq!(histogram(&c, &w.lighter), histogram(&c, &f));
        assert_eq!(permute_function(&w.sigma, &w.heavier).unwrap(), w.lighter);
        assert!(w.heavier_weight > w.lighter_weight);
    }

    #[test]
    fn block_uniform_random_is_block_uniform_and_seeded() {
        let c = ctx(3);
        let a = ProblemDistribution::block_uniform_random(&c, 1, CAP).unwrap();
        let b = ProblemDistribution::block_uniform_random(&c, 2, CAP).unwrap();
        assert!(is_block_uniform(&a).unwrap());
        assert_ne!(a.weights(), b.weights());
        let broken = a.perturbed(&TargetFunction::needle(&c, 0), &ratio(2, 1)).unwrap();
        assert!(!is_block_uniform(&broken).unwrap());
    }

    #[test]
    fn dominance_examples() {
        let c = ctx(3);
        let niah = ProblemDistribution::niah(&c, CAP).unwrap();
        assert_eq!(dominance_constant(&niah, &niah).unwrap(), BigRational::one());
        let off = ProblemDistribution::point_mass(&c, &TargetFunction::constant(&c, 0), CAP).unwrap();
        assert!(dominance_constant(&off, &niah).unwrap().is_zero());
        let u = ProblemDistribution::uniform_all(&c, CAP).unwrap();
        assert_eq!(dominance_constant(&u, &niah).unwrap(), ratio(3, 8));
    }

    #[test]
    fn mixture_validates_lambda() {
        let c = ctx(2);
        let u = ProblemDistribution::uniform_all(&c, CAP).unwrap();
        assert!(u.mixture(&u, &ratio(3, 2)).is_err());
        assert_eq!(u.mixture(&u, &ratio(1, 3)).unwrap().weights(), u.weights());
    }

    #[test]
    fn json_dump_omits_zero_weights() {
        let c = ctx(2);
        let p = ProblemDistribution::niah(&c, CAP).unwrap();
        let json = serde_json::to_value(p.to_json()).unwrap();
        assert_eq!(json["provenance"]["constructor"], "niah");
        assert_eq!(json["entries"].as_array().unwrap().len(), 2);
        assert_eq!(json["entries"][0]["values"], serde_json::json!(["0", "1"]));
        assert_eq!(json["entries"][0]["weight_num"], "1");
        assert_eq!(json["entries"][0]["weight_den"], "2");
    }

    #[test]
    fn from_weights_rejects_bad_sums() {
        let c = ctx(2);
        assert!(ProblemDistribution::from_weights(&c, vec![ratio(1, 4); 3], Provenance::new("x")).is_err());
        assert!(ProblemDistribution::from_weights(&c, vec![ratio(1, 5); 4], Provenance::new("x")).is_err());
        assert!(matches!(
            ProblemDistribution::uniform_class(&c, &FunctionClass::default(), CAP),
            Err(Error::EmptyClass)
        ));
    }
}
