//! Brute-force verification suites with exact, machine-readable verdicts.

mod bounds;
mod free_lunch;
mod nfl;

use std::fmt;
use std::str::FromStr;

use num::BigRational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use bounds::{certify_almost_nfl, verify_igel_toussaint, AlmostNflEntry, AlmostNflReport, IgelToussaintCase, IgelToussaintReport};
pub use free_lunch::{
    demo_mptm_free_lunch, demo_prop1, demo_prop1_with, demo_universal_free_lunch, GapSign, MptmReport, NeedleMass,
    PairExpectation, Prop1Report, UniversalReport, UniversalStatus,
};
pub use nfl::{
    nfl_holds_exact, nfl_holds_over, verify_block_uniform_equivalence, verify_cup_theorem, verify_nfl_uniform, CupCase,
    CupReport, EquivalenceReport, EquivalenceTrial, NflCase, NflUniformReport, NflVerdict, NflWitness, TrialKind,
};

use crate::distributions::{to_f64, ProblemDistribution};
use crate::domain::{ProblemContext, TargetFunction, DEFAULT_FUNCTION_CAP};
use crate::error::{Error, Result};
use crate::machine::{Budget, MassForm, ISA_VERSION};
use crate::measures::MaxConvention;
use crate::optimisers::{optimiser_family, FamilyConfig, DEFAULT_TREE_CAP};

/// An exact rational, serialised as `{"num", "den", "decimal"}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact {
    pub value: BigRational,
}

impl From<&BigRational> for Exact {
    fn from(value: &BigRational) -> Self {
        Self { value: value.clone() }
    }
}

impl From<BigRational> for Exact {
    fn from(value: BigRational) -> Self {
        Self { value }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Exact", 3)?;
        st.serialize_field("num", &self.value.numer().to_string())?;
        st.serialize_field("den", &self.value.denom().to_string())?;
        st.serialize_field("decimal", &to_f64(&self.value))?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    NflUniform,
    BlockEquiv,
    Cup,
    Prop1,
    Universal,
    Mptm,
    AlmostNfl,
    IgelToussaint,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::NflUniform,
        Suite::BlockEquiv,
        Suite::Cup,
        Suite::Prop1,
        Suite::Universal,
        Suite::Mptm,
        Suite::AlmostNfl,
        Suite::IgelToussaint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::NflUniform => "nfl-uniform",
            Suite::BlockEquiv => "block-equiv",
            Suite::Cup => "cup",
            Suite::Prop1 => "prop1",
            Suite::Universal => "universal",
            Suite::Mptm => "mptm",
            Suite::AlmostNfl => "almost-nfl",
            Suite::IgelToussaint => "igel-toussaint",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters shared by the suites. Exhaustive suites run on `|X| = max_x`
/// (or every size from 2 up to it); the surrogate-mass suites run on the
/// `x_size`/`y_size` context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub max_x: usize,
    pub x_size: usize,
    pub y_size: usize,
    pub budget: Budget,
    pub form: MassForm,
    pub seed: u64,
    pub cap: u128,
    pub tree_cap: u128,
    pub trials: usize,
    pub class_samples: usize,
    pub appendix_k: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_x: 3,
            x_size: 8,
            y_size: 2,
            budget: Budget::default(),
            form: MassForm::ShortestProgram,
            seed: 0,
            cap: DEFAULT_FUNCTION_CAP,
            tree_cap: DEFAULT_TREE_CAP,
            trials: 100,
            class_samples: 50,
            appendix_k: 2,
        }
    }
}

impl SuiteConfig {
    fn family(&self) -> FamilyConfig {
        FamilyConfig {
            tree_cap: self.tree_cap,
            seed: self.seed,
            budget: self.budget,
            appendix_k: self.appendix_k,
            ..FamilyConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub isa_version: &'static str,
    pub budget: Budget,
    pub seed: u64,
    pub details: serde_json::Value,
}

fn to_value(v: &impl Serialize) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(format!("report serialisation: {e}")))
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let small = ProblemContext::standard(cfg.max_x, 2)?;
    let large = ProblemContext::standard(cfg.x_size, cfg.y_size)?;
    let (passed, details) = match suite {
        Suite::NflUniform => {
            let mut contexts: Vec<ProblemContext> =
                (2..=cfg.max_x).map(|n| ProblemContext::standard(n, 2)).collect::<Result<_>>()?;
            if cfg.max_x >= 3 {
                contexts.push(ProblemContext::standard(3, 3)?);
            }
            let r = verify_nfl_uniform(&contexts, cfg.cap, cfg.tree_cap)?;
            (r.passed, to_value(&r)?)
        }
        Suite::BlockEquiv => {
            let r = verify_block_uniform_equivalence(&small, cfg.trials, cfg.seed, cfg.cap, cfg.tree_cap)?;
            (r.passed, to_value(&r)?)
        }
        Suite::Cup => {
            let r = verify_cup_theorem(&small, cfg.class_samples, cfg.seed, cfg.cap, cfg.tree_cap)?;
            (r.passed, to_value(&r)?)
        }
        Suite::Prop1 => {
            let needle = TargetFunction::needle(&small, small.x_size() - 1);
            let fixtures = [
                ProblemDistribution::point_mass(&small, &needle, cfg.cap)?,
                ProblemDistribution::block_uniform_random(&small, cfg.seed, cfg.cap)?
                    .perturbed(&needle, &BigRational::from_integer(2.into()))?,
                ProblemDistribution::random_simplex(&small, cfg.seed, cfg.cap)?,
                ProblemDistribution::universal(&large, cfg.budget, cfg.form, cfg.cap)?,
            ];
            let reports = fixtures.iter().map(demo_prop1).collect::<Result<Vec<_>>>()?;
            (reports.iter().all(|r| r.certified), to_value(&reports)?)
        }
        Suite::Universal => {
            let r = demo_universal_free_lunch(&large, cfg.budget, cfg.form, cfg.cap)?;
            (r.status == UniversalStatus::Certified, to_value(&r)?)
        }
        Suite::Mptm => {
            let r = demo_mptm_free_lunch(&large, cfg.appendix_k, cfg.budget, cfg.form, MaxConvention::MaxY, cfg.cap)?;
            (r.passed, to_value(&r)?)
        }
        Suite::AlmostNfl => {
            let family = optimiser_family(&small, &cfg.family())?;
            let p = ProblemDistribution::universal(&small, cfg.budget, cfg.form, cfg.cap)?;
            let reports = [MaxConvention::MaxAchieved, MaxConvention::MaxY]
                .into_iter()
                .map(|conv| certify_almost_nfl(&p, &family.members, family.regime, conv, cfg.cap))
                .collect::<Result<Vec<_>>>()?;
            (reports.iter().all(|r| r.passed), to_value(&reports)?)
        }
        Suite::IgelToussaint => {
            let family = optimiser_family(&small, &cfg.family())?;
            let maxima: Vec<usize> = (1..=small.x_size()).collect();
            let r = verify_igel_toussaint(&small, &maxima, &family.members, family.regime, cfg.seed, cfg.cap)?;
            (r.passed, to_value(&r)?)
        }
    };
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        passed,
        isa_version: ISA_VERSION,
        budget: cfg.budget,
        seed: cfg.seed,
        details,
    })
}
