//! Problem contexts, target functions, traces, result vectors, histograms and
//! permutations.
//!
//! Points and values are referred to by index into the context's canonically
//! ordered `X` and `Y` lists. Because `Y` is stored in canonical order, a
//! larger `Y` index always means a larger value.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::BitString;
use crate::error::{Error, Result};

/// Index of a point in `X`.
pub type XIndex = usize;
/// Index of a value in `Y`.
pub type YIndex = usize;

/// Default cap on `|Y|^|X|` for anything that enumerates the function space.
pub const DEFAULT_FUNCTION_CAP: u128 = 1 << 20;

/// The pair `(X, Y)` of finite sets of binary strings.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ContextJson", into = "ContextJson")]
pub struct ProblemContext {
    xs: Vec<BitString>,
    ys: Vec<BitString>,
}

#[derive(Serialize, Deserialize)]
struct ContextJson {
    #[serde(rename = "X")]
    xs: Vec<BitString>,
    #[serde(rename = "Y")]
    ys: Vec<BitString>,
}

impl TryFrom<ContextJson> for ProblemContext {
    type Error = Error;

    fn try_from(value: ContextJson) -> Result<Self> {
        ProblemContext::new(value.xs, value.ys)
    }
}

impl From<ProblemContext> for ContextJson {
    fn from(ctx: ProblemContext) -> Self {
        ContextJson {
            xs: ctx.xs,
            ys: ctx.ys,
        }
    }
}

fn canonical_set(name: &str, mut items: Vec<BitString>) -> Result<Vec<BitString>> {
    items.sort();
    if items.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidContext(format!("{name} contains duplicates")));
    }
    for required in ["0", "1"] {
        let s: BitString = required.parse()?;
        if items.binary_search(&s).is_err() {
            return Err(Error::InvalidContext(format!("{name} must contain \"{required}\"")));
        }
    }
    Ok(items)
}

impl ProblemContext {
    /// Builds a context, sorting both sets into canonical order.
    pub fn new(xs: Vec<BitString>, ys: Vec<BitString>) -> Result<Self> {
        Ok(Self {
            xs: canonical_set("X", xs)?,
            ys: canonical_set("Y", ys)?,
        })
    }

    pub fn from_strs(xs: &[&str], ys: &[&str]) -> Result<Self> {
        let parse = |v: &[&str]| v.iter().map(|s| s.parse()).collect::<Result<Vec<BitString>>>();
        Self::new(parse(xs)?, parse(ys)?)
    }

    /// `X` and `Y` are the first `x_size` and `y_size` non-empty strings in
    /// canonical order.
    pub fn standard(x_size: usize, y_size: usize) -> Result<Self> {
        Self::new(
            BitString::first_nonempty(x_size),
            BitString::first_nonempty(y_size),
        )
    }

    pub fn xs(&self) -> &[BitString] {
        &self.xs
    }

    pub fn ys(&self) -> &[BitString] {
        &self.ys
    }

    pub fn x_size(&self) -> usize {
        self.xs.len()
    }

    pub fn y_size(&self) -> usize {
        self.ys.len()
    }

    pub fn x(&self, i: XIndex) -> &BitString {
        &self.xs[i]
    }

    pub fn y(&self, i: YIndex) -> &BitString {
        &self.ys[i]
    }

    pub fn y_index_of(&self, y: &BitString) -> Option<YIndex> {
        self.ys.binary_search(y).ok()
    }

    pub fn x_index_of(&self, x: &BitString) -> Option<XIndex> {
        self.xs.binary_search(x).ok()
    }

    pub fn zero_y(&self) -> YIndex {
        self.y_index_of(&BitString::from_bits(vec![false]))
            .expect("contexts always contain \"0\"")
    }

    pub fn one_y(&self) -> YIndex {
        self.y_index_of(&BitString::from_bits(vec![true]))
            .expect("contexts always contain \"1\"")
    }

    /// Index of the largest element of `Y` under the canonical order.
    pub fn max_y_index(&self) -> YIndex {
        (0..self.ys.len())
            .max_by(|&a, &b| self.ys[a].cmp(&self.ys[b]))
            .expect("Y is never empty")
    }

    /// `|Y|^|X|`, or `None` on overflow.
    pub fn function_count(&self) -> Option<u128> {
        (self.y_size() as u128).checked_pow(u32::try_from(self.x_size()).ok()?)
    }

    /// Checks `|Y|^|X| ≤ cap` and returns the count.
    pub fn enumerable(&self, cap: u128) -> Result<usize> {
        match self.function_count() {
            Some(n) if n <= cap => Ok(n as usize),
            n => Err(Error::CapExceeded {
                what: "function space",
                size: n.map_or_else(
                    || format!("{}^{}", self.y_size(), self.x_size()),
                    |n| n.to_string(),
                ),
                cap,
            }),
        }
    }

    /// The function with the given position in canonical (lexicographic)
    /// order of value tables.
    pub fn function_at(&self, mut index: usize) -> TargetFunction {
        let base = self.y_size();
        let mut values = vec![0; self.x_size()];
        for slot in values.iter_mut().rev() {
            *slot = index % base;
            index /= base;
        }
        TargetFunction { values }
    }

    pub fn function_index(&self, f: &TargetFunction) -> usize {
        values_index(self.y_size(), &f.values)
    }

    /// Every function `X → Y` in canonical order.
    pub fn functions(&self, cap: u128) -> Result<impl Iterator<Item = TargetFunction> + '_> {
        let n = self.enumerable(cap)?;
        Ok((0..n).map(move |i| self.function_at(i)))
    }

    pub fn check_function(&self, f: &TargetFunction) -> Result<()> {
        if f.values.len() != self.x_size() {
            return Err(Error::ContextMismatch(format!(
                "function has {} values, context has {} points",
                f.values.len(),
                self.x_size()
            )));
        }
        if let Some(&bad) = f.values.iter().find(|&&v| v >= self.y_size()) {
            return Err(Error::InvalidFunction(format!("value index {bad} out of range")));
        }
        Ok(())
    }
}

impl fmt::Debug for ProblemContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProblemContext {{ X: {:?}, Y: {:?} }}", self.xs, self.ys)
    }
}

pub(crate) fn values_index(base: usize, values: &[usize]) -> usize {
    values.iter().fold(0, |acc, &v| acc * base + v)
}

/// A total table `X → Y`, stored as `Y` indices in canonical `X` order.
///
/// The derived ordering is lexicographic on the table, which is the
/// canonical function order used for enumeration and tie-breaks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetFunction {
    values: Vec<YIndex>,
}

/// JSON form of a function: its values as `Y` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub values: Vec<BitString>,
}

impl TargetFunction {
    pub fn new(ctx: &ProblemContext, values: Vec<YIndex>) -> Result<Self> {
        let f = Self { values };
        ctx.check_function(&f)?;
        Ok(f)
    }

    pub fn from_strs(ctx: &ProblemContext, values: &[&str]) -> Result<Self> {
        let indices = values
            .iter()
            .map(|s| {
                let y: BitString = s.parse()?;
                ctx.y_index_of(&y)
                    .ok_or_else(|| Error::InvalidFunction(format!("value {s} is not in Y")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ctx, indices)
    }

    pub fn constant(ctx: &ProblemContext, y: YIndex) -> Self {
        Self {
            values: vec![y; ctx.x_size()],
        }
    }

    /// `"0"` everywhere except `"1"` at `needle`.
    pub fn needle(ctx: &ProblemContext, needle: XIndex) -> Self {
        let mut values = vec![ctx.zero_y(); ctx.x_size()];
        values[needle] = ctx.one_y();
        Self { values }
    }

    pub fn values(&self) -> &[YIndex] {
        &self.values
    }

    pub fn value(&self, x: XIndex) -> YIndex {
        self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value attained.
    pub fn max_value(&self) -> YIndex {
        *self.values.iter().max().expect("functions are non-empty")
    }

    pub fn to_json(&self, ctx: &ProblemContext) -> FunctionJson {
        FunctionJson {
            values: self.values.iter().map(|&y| ctx.y(y).clone()).collect(),
        }
    }

    pub fn from_json(ctx: &ProblemContext, json: &FunctionJson) -> Result<Self> {
        let values = json
            .values
            .iter()
            .map(|v| {
                ctx.y_index_of(v)
                    .ok_or_else(|| Error::InvalidFunction(format!("value {v} is not in Y")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ctx, values)
    }

    pub fn display(&self, ctx: &ProblemContext) -> String {
        let parts: Vec<String> = self.values.iter().map(|&y| ctx.y(y).to_string()).collect();
        format!("<{}>", parts.join(","))
    }
}

/// `h_f(y) = |f⁻¹(y)|`.
pub fn histogram(ctx: &ProblemContext, f: &TargetFunction) -> Histogram {
    let mut counts = vec![0; ctx.y_size()];
    for &v in &f.values {
        counts[v] += 1;
    }
    Histogram { counts }
}

/// Value counts of a function, indexed by `Y` index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Histogram {
    counts: Vec<usize>,
}

impl Histogram {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, y: YIndex) -> usize {
        self.counts[y]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `(y string, count)` pairs in canonical `Y` order.
    pub fn labelled(&self, ctx: &ProblemContext) -> Vec<(BitString, usize)> {
        self.counts
            .iter()
            .enumerate()
            .map(|(y, &c)| (ctx.y(y).clone(), c))
            .collect()
    }
}

/// A bijection `σ: X → X`; `mapping[i]` is the index of `σ(xᵢ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<XIndex>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        Permutation::new(mapping)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

impl Permutation {
    pub fn new(mapping: Vec<XIndex>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPermutation(format!("{mapping:?} is not a bijection")));
            }
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn swap(n: usize, i: XIndex, j: XIndex) -> Self {
        let mut p = Self::identity(n);
        p.mapping.swap(i, j);
        p
    }

    pub fn mapping(&self) -> &[XIndex] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, x: XIndex) -> XIndex {
        self.mapping[x]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            mapping: other.mapping.iter().map(|&i| self.mapping[i]).collect(),
        }
    }

    /// All permutations of `n` points in lexicographic order of mappings.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some((0..n).collect()),
        }
    }

    /// A permutation `σ` with `σf = g`, when `f` and `g` share a histogram.
    pub fn relating(f: &TargetFunction, g: &TargetFunction) -> Option<Self> {
        if f.len() != g.len() {
            return None;
        }
        let mut mapping = vec![usize::MAX; f.len()];
        let mut used = vec![false; g.len()];
        for (i, &v) in f.values().iter().enumerate() {
            let j = (0..g.len()).find(|&j| !used[j] && g.value(j) == v)?;
            used[j] = true;
            mapping[i] = j;
        }
        Some(Self { mapping })
    }
}

/// Lexicographic permutation iterator.
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let n = succ.len();
        if n > 1 {
            if let Some(i) = (0..n - 1).rev().find(|&i| succ[i] < succ[i + 1]) {
                let j = (i + 1..n).rev().find(|&j| succ[j] > succ[i]).expect("pivot exists");
                succ.swap(i, j);
                succ[i + 1..].reverse();
                self.next = Some(succ);
            }
        }
        Some(Permutation { mapping: current })
    }
}

/// `(σf)(x) = f(σ⁻¹(x))`, i.e. the result `g` satisfies `g(σ(x)) = f(x)`.
pub fn permute_function(sigma: &Permutation, f: &TargetFunction) -> Result<TargetFunction> {
    if sigma.len() != f.len() {
        return Err(Error::ContextMismatch(format!(
            "permutation on {} points applied to function on {} points",
            sigma.len(),
            f.len()
        )));
    }
    let mut values = vec![0; f.len()];
    for (i, &v) in f.values().iter().enumerate() {
        values[sigma.apply(i)] = v;
    }
    Ok(TargetFunction { values })
}

/// Ordered `(point, value)` observations; points are pairwise distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SearchTrace {
    entries: Vec<(XIndex, YIndex)>,
}

impl SearchTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(XIndex, YIndex)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn visited(&self, x: XIndex) -> bool {
        self.entries.iter().any(|&(p, _)| p == x)
    }

    pub fn visited_set(&self) -> BTreeSet<XIndex> {
        self.entries.iter().map(|&(p, _)| p).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = XIndex> + '_ {
        self.entries.iter().map(|&(p, _)| p)
    }

    pub fn observed(&self) -> impl Iterator<Item = YIndex> + '_ {
        self.entries.iter().map(|&(_, v)| v)
    }

    /// Appends an observation; fails if the point was already visited.
    pub fn push(&mut self, x: XIndex, y: YIndex) -> Result<()> {
        if self.visited(x) {
            return Err(Error::OutOfRange(format!("point {x} already in trace")));
        }
        self.entries.push((x, y));
        Ok(())
    }

    pub fn result_vector(&self) -> ResultVector {
        ResultVector {
            values: self.observed().collect(),
        }
    }
}

/// The `Y` components of a trace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResultVector {
    values: Vec<YIndex>,
}

impl ResultVector {
    pub fn new(values: Vec<YIndex>) -> Self {
        Self { values }
    }

    pub fn from_strs(ctx: &ProblemContext, values: &[&str]) -> Result<Self> {
        Ok(Self {
            values: TargetFunction::from_strs(ctx, values)?.values,
        })
    }

    /// Full-length result vector at the given canonical index.
    pub fn at(ctx: &ProblemContext, index: usize) -> Self {
        Self {
            values: ctx.function_at(index).values,
        }
    }

    /// Canonical index among full-length result vectors.
    pub fn index(&self, ctx: &ProblemContext) -> usize {
        values_index(ctx.y_size(), &self.values)
    }

    pub fn values(&self) -> &[YIndex] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_strings(&self, ctx: &ProblemContext) -> Vec<String> {
        self.values.iter().map(|&y| ctx.y(y).to_string()).collect()
    }
}
