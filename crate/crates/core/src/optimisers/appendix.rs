use std::sync::Arc;

use serde::Serialize;

use super::{first_unvisited, Optimiser};
use crate::domain::{ProblemContext, SearchTrace, TargetFunction, XIndex, YIndex};
use crate::error::{Error, Result};
use crate::machine::{incompressible_points, Budget};

/// First point after `x₁` where `f` attains its largest value.
pub fn first_max(ctx: &ProblemContext, f: &TargetFunction) -> Result<XIndex> {
    ctx.check_function(f)?;
    let top = f.max_value();
    (1..f.len()).find(|&i| f.value(i) == top).ok_or(Error::NoMaxOutsideFirst)
}

/// Shared layout of the pair: `scan` (the set `Q`) is probed first; the
/// optimisers differ only in the order of `x₁` and `pivot` afterwards, and
/// only when every scanned value was `"0"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppendixPlan {
    pub k: usize,
    /// The first `k` incompressible points other than `x₁`.
    pub incompressible: Vec<XIndex>,
    /// First element of `incompressible`.
    pub pivot: XIndex,
    /// Points outside `incompressible` and `x₁`, in canonical order.
    pub scan: Vec<XIndex>,
    #[serde(skip)]
    zero: YIndex,
}

impl AppendixPlan {
    /// Builds the plan from per-point incompressibility flags.
    pub fn from_flags(ctx: &ProblemContext, k: usize, incompressible: &[bool]) -> Result<Self> {
        let n = ctx.x_size();
        if k == 0 || 2 * k > n {
            return Err(Error::OutOfRange(format!("k = {k} needs 1 ≤ k and 2k ≤ |X| = {n}")));
        }
        if incompressible.len() != n {
            return Err(Error::ContextMismatch(format!("{} flags for {n} points", incompressible.len())));
        }
        let candidates: Vec<XIndex> = (1..n).filter(|&x| incompressible[x]).collect();
        if candidates.len() < k {
            return Err(Error::NotEnoughIncompressible {
                needed: k,
                found: candidates.len(),
            });
        }
        let chosen = candidates[..k].to_vec();
        let scan = (1..n).filter(|x| !chosen.contains(x)).collect();
        Ok(Self {
            k,
            pivot: chosen[0],
            incompressible: chosen,
            scan,
            zero: ctx.zero_y(),
        })
    }

    pub fn first(&self) -> XIndex {
        0
    }

    /// Whether `f` is `"0"` on every scanned point.
    pub fn in_g(&self, f: &TargetFunction) -> bool {
        self.scan.iter().all(|&x| f.value(x) == self.zero)
    }

    fn tail(&self, swapped: bool) -> Vec<XIndex> {
        let head = if swapped { [self.pivot, 0] } else { [0, self.pivot] };
        head.into_iter()
            .chain(self.incompressible.iter().copied().filter(|&x| x != self.pivot))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AppendixRole {
    /// Probes `x₁` before the pivot.
    A,
    /// Probes the pivot before `x₁` when the scan saw only `"0"`.
    B,
}

#[derive(Debug, Clone)]
pub struct AppendixOptimiser {
    plan: Arc<AppendixPlan>,
    role: AppendixRole,
}

impl AppendixOptimiser {
    pub fn plan(&self) -> &AppendixPlan {
        &self.plan
    }

    pub fn role(&self) -> AppendixRole {
        self.role
    }
}

impl Optimiser for AppendixOptimiser {
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        let plan = &*self.plan;
        if trace.len() < plan.scan.len() {
            return first_unvisited(plan.scan.iter().copied(), trace);
        }
        let consistent = trace
            .entries()
            .iter()
            .filter(|(x, _)| plan.scan.contains(x))
            .all(|&(_, y)| y == plan.zero);
        let swapped = consistent && self.role == AppendixRole::B;
        first_unvisited(plan.tail(swapped).into_iter().chain(0..ctx.x_size()), trace)
    }

    fn label(&self) -> String {
        match self.role {
            AppendixRole::A => format!("appendix-a:{}", self.plan.k),
            AppendixRole::B => format!("appendix-b:{}", self.plan.k),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppendixPair {
    pub plan: Arc<AppendixPlan>,
    pub a: AppendixOptimiser,
    pub b: AppendixOptimiser,
}

impl AppendixPair {
    pub fn from_plan(plan: AppendixPlan) -> Self {
        let plan = Arc::new(plan);
        let a = AppendixOptimiser {
            plan: plan.clone(),
            role: AppendixRole::A,
        };
        let b = AppendixOptimiser {
            plan: plan.clone(),
            role: AppendixRole::B,
        };
        Self { plan, a, b }
    }
}

/// The pair with incompressibility judged at `budget`.
pub fn appendix_pair(ctx: &ProblemContext, k: usize, budget: Budget) -> Result<AppendixPair> {
    if k == 0 || 2 * k > ctx.x_size() {
        return Err(Error::OutOfRange(format!(
            "k = {k} needs 1 ≤ k and 2k ≤ |X| = {}",
            ctx.x_size()
        )));
    }
    let flags = incompressible_points(ctx, budget)?;
    Ok(AppendixPair::from_plan(AppendixPlan::from_flags(ctx, k, &flags)?))
}
