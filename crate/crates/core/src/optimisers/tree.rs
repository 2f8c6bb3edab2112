use serde::{Deserialize, Serialize};

use super::{first_unvisited, Optimiser};
use crate::domain::{ProblemContext, SearchTrace, XIndex};
use crate::error::{Error, Result};

/// A deterministic optimiser in explicit form: probe `choose`, then continue
/// with the subtree for the observed value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionTree {
    pub choose: XIndex,
    /// One subtree per `Y` index; empty at the last probe.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub then: Vec<DecisionTree>,
}

impl DecisionTree {
    pub fn leaf(x: XIndex) -> Self {
        Self {
            choose: x,
            then: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.then.iter().map(DecisionTree::depth).max().unwrap_or(0)
    }

    /// Tabulates `a` by simulating it on every observation sequence.
    pub fn from_optimiser(a: &dyn Optimiser, ctx: &ProblemContext) -> Result<Self> {
        fn grow(a: &dyn Optimiser, ctx: &ProblemContext, trace: &mut SearchTrace) -> Result<DecisionTree> {
            let x = a.choose(ctx, trace);
            if x >= ctx.x_size() || trace.visited(x) {
                return Err(Error::Revisit { label: a.label(), point: x });
            }
            if trace.len() + 1 == ctx.x_size() {
                return Ok(DecisionTree::leaf(x));
            }
            let mut then = Vec::with_capacity(ctx.y_size());
            for y in 0..ctx.y_size() {
                let mut next = trace.clone();
                next.push(x, y)?;
                then.push(grow(a, ctx, &mut next)?);
            }
            Ok(DecisionTree { choose: x, then })
        }
        grow(a, ctx, &mut SearchTrace::new())
    }

    /// Compact form such as `0(1(2,2),2(1,1))`.
    pub fn notation(&self) -> String {
        if self.then.is_empty() {
            return self.choose.to_string();
        }
        let kids: Vec<String> = self.then.iter().map(DecisionTree::notation).collect();
        format!("{}({})", self.choose, kids.join(","))
    }
}

impl Optimiser for DecisionTree {
    /// Follows the trace down the tree. A trace the tree could not have
    /// produced falls back to the first unvisited point.
    fn choose(&self, ctx: &ProblemContext, trace: &SearchTrace) -> XIndex {
        let mut node = self;
        for &(x, y) in trace.entries() {
            match node.then.get(y) {
                Some(next) if node.choose == x => node = next,
                _ => return first_unvisited(0..ctx.x_size(), trace),
            }
        }
        node.choose
    }

    fn label(&self) -> String {
        format!("tree:{}", self.notation())
    }
}

/// Number of deterministic full-length optimisers: `T(1) = 1`,
/// `T(n) = n·T(n-1)^|Y|`. `None` on overflow.
pub fn tree_count(x_size: usize, y_size: usize) -> Option<u128> {
    let mut t: u128 = 1;
    for n in 2..=x_size {
        t = (n as u128).checked_mul(t.checked_pow(u32::try_from(y_size).ok()?)?)?;
    }
    Some(t)
}

fn trees_over(points: &[XIndex], y_size: usize) -> Vec<DecisionTree> {
    if points.len() == 1 {
        return vec![DecisionTree::leaf(points[0])];
    }
    let mut out = Vec::new();
    for (i, &x) in points.iter().enumerate() {
        let rest: Vec<XIndex> = points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p).collect();
        let subs = trees_over(&rest, y_size);
        // odometer over subs^y_size, first value most significant
        let mut digits = vec![0usize; y_size];
        loop {
            out.push(DecisionTree {
                choose: x,
                then: digits.iter().map(|&d| subs[d].clone()).collect(),
            });
            let mut pos = y_size;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < subs.len() {
                    break;
                }
                digits[pos] = 0;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
    }
    out
}

/// Every deterministic optimiser on `ctx`, as decision trees in canonical
/// order.
pub fn enumerate_all_optimisers(ctx: &ProblemContext, cap: u128) -> Result<Vec<DecisionTree>> {
    let count = tree_count(ctx.x_size(), ctx.y_size());
    match count {
        Some(t) if t <= cap => {
            let points: Vec<XIndex> = (0..ctx.x_size()).collect();
            Ok(trees_over(&points, ctx.y_size()))
        }
        _ => Err(Error::CapExceeded {
            what: "decision-tree enumeration",
            size: count.map_or_else(|| "overflow".into(), |t| t.to_string()),
            cap,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_FUNCTION_CAP as CAP;
    use crate::optimisers::{run_trace, Enumerative, HillClimb};
    use std::collections::{BTreeSet, HashSet};

    #[test]
    fn counts_follow_recurrence() {
        assert_eq!(tree_count(1, 2), Some(1));
        assert_eq!(tree_count(2, 2), Some(2));
        assert_eq!(tree_count(3, 2), Some(12));
        assert_eq!(tree_count(4, 2), Some(576));
        assert_eq!(tree_count(3, 3), Some(24));
        assert_eq!(tree_count(40, 2), None);
        for (x, y) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            let ctx = ProblemContext::standard(x, y).unwrap();
            let trees = enumerate_all_optimisers(&ctx, CAP).unwrap();
            assert_eq!(trees.len() as u128, tree_count(x, y).unwrap());
            assert_eq!(trees.iter().collect::<HashSet<_>>().len(), trees.len());
            assert!(trees.iter().all(|t| t.depth() == x));
        }
    }

    #[test]
    fn enumeration_respects_cap() {
        let ctx = ProblemContext::standard(5, 2).unwrap();
        assert!(enumerate_all_optimisers(&ctx, 1000).is_err());
    }

    #[test]
    fn tabulated_optimisers_behave_identically() {
        let ctx = ProblemContext::standard(4, 2).unwrap();
        for a in [&Enumerative as &dyn Optimiser, &HillClimb { seed: 9 }] {
            let tree = DecisionTree::from_optimiser(a, &ctx).unwrap();
            for f in ctx.functions(CAP).unwrap() {
                assert_eq!(run_trace(a, &ctx, &f).unwrap(), run_trace(&tree, &ctx, &f).unwrap());
            }
        }
        let trees = enumerate_all_optimisers(&ctx, CAP).unwrap();
        let e = DecisionTree::from_optimiser(&Enumerative, &ctx).unwrap();
        assert!(trees.contains(&e));
    }

    #[test]
    fn every_tree_produces_the_same_result_vector_set() {
        let ctx = ProblemContext::standard(3, 2).unwrap();
        let reference: BTreeSet<_> = ctx.functions(CAP).unwrap().map(|f| f.values().to_vec()).collect();
        for t in enumerate_all_optimisers(&ctx, CAP).unwrap() {
            let produced: BTreeSet<_> = ctx
                .functions(CAP)
                .unwrap()
                .map(|f| run_trace(&t, &ctx, &f).unwrap().result_vector().values().to_vec())
                .collect();
            assert_eq!(produced, reference);
        }
    }

    #[test]
    fn notation_and_json() {
        let ctx = ProblemContext::standard(2, 2).unwrap();
        let trees = enumerate_all_optimisers(&ctx, CAP).unwrap();
        assert_eq!(trees[0].notation(), "0(1,1)");
        assert_eq!(trees[1].label(), "tree:1(0,0)");
        let json = serde_json::to_string(&trees[0]).unwrap();
        assert_eq!(json, r#"{"choose":0,"then":[{"choose":1},{"choose":1}]}"#);
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, trees[0]);
    }
}
