//! Performance measures and exact expectations over a distribution.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::distributions::ProblemDistribution;
use crate::domain::{ProblemContext, ResultVector, YIndex};
use crate::error::{Error, Result};
use crate::optimisers::{run_trace, Optimiser};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

/// Which value counts as "the maximum" when timing the first hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxConvention {
    /// Largest element of `Y`; a run that never sees it scores `|X| + 1`.
    #[default]
    MaxY,
    /// Largest value present in the result vector.
    MaxAchieved,
}

impl FromStr for MaxConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-y" => Ok(Self::MaxY),
            "max-achieved" => Ok(Self::MaxAchieved),
            other => Err(Error::Parse(format!("unknown max convention `{other}`"))),
        }
    }
}

impl fmt::Display for MaxConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MaxY => "max-y",
            Self::MaxAchieved => "max-achieved",
        })
    }
}

pub trait PerformanceMeasure: Send + Sync {
    fn evaluate(&self, ctx: &ProblemContext, r: &ResultVector) -> Result<BigRational>;
    fn label(&self) -> String;
    fn orientation(&self) -> Orientation;
}

fn int(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The value `m_ptm` looks for in `r`.
pub fn hit_target(ctx: &ProblemContext, r: &ResultVector, convention: MaxConvention) -> YIndex {
    match convention {
        MaxConvention::MaxY => ctx.max_y_index(),
        MaxConvention::MaxAchieved => r.values().iter().copied().max().unwrap_or_else(|| ctx.max_y_index()),
    }
}

/// Optimisation time: 1-based position of the first maximum in `r`.
pub fn m_ptm(ctx: &ProblemContext, r: &ResultVector, convention: MaxConvention) -> BigRational {
    let target = hit_target(ctx, r, convention);
    let pos = r.values().iter().position(|&y| y == target);
    int(pos.map_or(ctx.x_size() + 1, |p| p + 1))
}

/// Rank of the best of the first `k` observations. `Y` is stored in
/// canonical order, so a value's rank is its index.
pub fn m_max(r: &ResultVector, k: usize) -> Result<BigRational> {
    if k == 0 || k > r.len() {
        return Err(Error::OutOfRange(format!("k = {k} outside 1..={}", r.len())));
    }
    Ok(int(*r.values()[..k].iter().max().expect("k ≥ 1")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OptimisationTime {
    pub convention: MaxConvention,
}

impl OptimisationTime {
    pub fn new(convention: MaxConvention) -> Self {
        Self { convention }
    }
}

impl PerformanceMeasure for OptimisationTime {
    fn evaluate(&self, ctx: &ProblemContext, r: &ResultVector) -> Result<BigRational> {
        Ok(m_ptm(ctx, r, self.convention))
    }

    fn label(&self) -> String {
        match self.convention {
            MaxConvention::MaxY => "mptm".into(),
            MaxConvention::MaxAchieved => "mptm:max-achieved".into(),
        }
    }

    fn orientation(&self) -> Orientation {
        Orientation::LowerIsBetter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BestOfFirst {
    pub k: usize,
}

impl PerformanceMeasure for BestOfFirst {
    fn evaluate(&self, _ctx: &ProblemContext, r: &ResultVector) -> Result<BigRational> {
        m_max(r, self.k)
    }

    fn label(&self) -> String {
        format!("mmax:{}", self.k)
    }

    fn orientation(&self) -> Orientation {
        Orientation::HigherIsBetter
    }
}

/// 1 on one fixed result vector, 0 elsewhere. Its expectation is the
/// probability of producing that vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultIndicator {
    pub target: ResultVector,
}

impl PerformanceMeasure for ResultIndicator {
    fn evaluate(&self, _ctx: &ProblemContext, r: &ResultVector) -> Result<BigRational> {
        Ok(if *r == self.target { BigRational::one() } else { BigRational::zero() })
    }

    fn label(&self) -> String {
        "indicator".into()
    }

    fn orientation(&self) -> Orientation {
        Orientation::HigherIsBetter
    }
}

/// Parses `mptm`, `mptm:max-achieved` or `mmax:K`.
pub fn parse_measure(s: &str) -> Result<Box<dyn PerformanceMeasure>> {
    match s.split_once(':') {
        None if s == "mptm" => Ok(Box::new(OptimisationTime::default())),
        Some(("mptm", conv)) => Ok(Box::new(OptimisationTime::new(conv.parse()?))),
        Some(("mmax", k)) => {
            let k = k.parse().map_err(|_| Error::Parse(format!("bad k in `{s}`")))?;
            Ok(Box::new(BestOfFirst { k }))
        }
        _ => Err(Error::Parse(format!("unknown measure `{s}`"))),
    }
}

/// `Σ_f P(f)·M(result vector of a on f)`, summed over the support of `P`.
pub fn expected_performance(
    a: &dyn Optimiser,
    p: &ProblemDistribution,
    m: &dyn PerformanceMeasure,
) -> Result<BigRational> {
    let ctx = p.context();
    let support: Vec<usize> = p.support().collect();
    let terms = par::try_map_slice(&support, |&i| {
        let r = run_trace(a, ctx, &ctx.function_at(i))?.result_vector();
        Ok(&p.weights()[i] * m.evaluate(ctx, &r)?)
    })?;
    Ok(terms.into_iter().sum())
}

/// Exact law of `a`'s full result vector under `P`; zero entries omitted.
pub fn result_vector_distribution(
    a: &dyn Optimiser,
    p: &ProblemDistribution,
) -> Result<BTreeMap<ResultVector, BigRational>> {
    let ctx = p.context();
    let support: Vec<usize> = p.support().collect();
    let vectors = par::try_map_slice(&support, |&i| Ok(run_trace(a, ctx, &ctx.function_at(i))?.result_vector()))?;
    let mut law: BTreeMap<ResultVector, BigRational> = BTreeMap::new();
    for (r, &i) in vectors.into_iter().zip(&support) {
        *law.entry(r).or_insert_with(BigRational::zero) += &p.weights()[i];
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{TargetFunction, DEFAULT_FUNCTION_CAP as CAP};
    use crate::optimisers::Enumerative;

    fn rv(ctx: &ProblemContext, v: &[&str]) -> ResultVector {
        ResultVector::from_strs(ctx, v).unwrap()
    }

    #[test]
    fn mptm_examples() {
        let c = ProblemContext::standard(3, 2).unwrap();
        assert_eq!(m_ptm(&c, &rv(&c, &["0", "1", "0"]), MaxConvention::MaxY), int(2));
        assert_eq!(m_ptm(&c, &rv(&c, &["1", "0", "0"]), MaxConvention::MaxY), int(1));
        assert_eq!(m_ptm(&c, &rv(&c, &["0", "0", "0"]), MaxConvention::MaxY), int(4));
        assert_eq!(m_ptm(&c, &rv(&c, &["0", "0", "0"]), MaxConvention::MaxAchieved), int(1));
    }

    #[test]
    fn mptm_uses_canonical_max() {
        let c = ProblemContext::from_strs(&["0", "1", "00"], &["0", "1", "10"]).unwrap();
        let r = rv(&c, &["1", "10", "0"]);
        assert_eq!(m_ptm(&c, &r, MaxConvention::MaxY), int(2));
    }

    #[test]
    fn mmax_examples() {
        let c = ProblemContext::standard(2, 2).unwrap();
        let r = rv(&c, &["0", "1"]);
        assert_eq!(m_max(&r, 1).unwrap(), int(0));
        assert_eq!(m_max(&r, 2).unwrap(), int(1));
        assert!(m_max(&r, 0).is_err());
        assert!(m_max(&r, 3).is_err());
    }

    #[test]
    fn point_mass_expectation() {
        let c = ProblemContext::standard(3, 2).unwrap();
        let f = TargetFunction::needle(&c, 2);
        let p = ProblemDistribution::point_mass(&c, &f, CAP).unwrap();
        let e = expected_performance(&Enumerative, &p, &OptimisationTime::default()).unwrap();
        assert_eq!(e, int(3));
        let law = result_vector_distribution(&Enumerative, &p).unwrap();
        assert_eq!(law.len(), 1);
        assert_eq!(law[&ResultVector::new(f.values().to_vec())], BigRational::one());
    }

    #[test]
    fn measure_parsing() {
        assert_eq!(parse_measure("mptm").unwrap().label(), "mptm");
        assert_eq!(parse_measure("mptm:max-achieved").unwrap().label(), "mptm:max-achieved");
        assert_eq!(parse_measure("mmax:2").unwrap().orientation(), Orientation::HigherIsBetter);
        assert!(parse_measure("mmax:x").is_err());
        assert!(parse_measure("time").is_err());
    }
}
