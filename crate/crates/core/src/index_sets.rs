//! Frequency-domain geometry on ℤᵈ: dyadic blocks, layers, hyperbolic
//! crosses, full cubes and ℓ∞ dyadic shells.
//!
//! Every set is enumerated explicitly and stored in lexicographic order, so
//! two constructions of the same set compare equal member-by-member and any
//! dictionary built from them has a reproducible column order.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{invalid, Error, Result};

/// A frequency vector k ∈ ℤᵈ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(coords: Vec<i64>) -> Self {
        MultiIndex(coords)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// ‖k‖∞ as an unsigned magnitude.
    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// The unique dyadic vector s with k ∈ ρ(s).
    pub fn dyadic_vector(&self) -> DyadicVector {
        DyadicVector(self.0.iter().map(|&c| dyadic_level(c.unsigned_abs())).collect())
    }

    /// Index j of the ℓ∞ dyadic shell [2^{j-1}] ≤ ‖k‖∞ < 2^j containing k.
    pub fn linf_shell(&self) -> u32 {
        dyadic_level(self.max_abs())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(v: &[i64]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(v: [i64; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| invalid(format!("expected '(k1,...,kd)', got {s:?}")))?;
        let coords = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|e| invalid(format!("bad coordinate {c:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(invalid("multi-index needs at least one coordinate"));
        }
        Ok(MultiIndex(coords))
    }
}

/// 0 for magnitude 0, otherwise ⌊log₂ x⌋ + 1. This is the s with
/// [2^{s-1}] ≤ x < 2^s.
fn dyadic_level(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// [2^{s-1}], the integer part, so s = 0 gives 0.
fn shell_lower(s: u32) -> i64 {
    if s == 0 {
        0
    } else {
        1i64 << (s - 1)
    }
}

pub const MAX_LEVEL: u32 = 62;

/// A vector s of nonnegative integers selecting the block ρ(s).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicVector(Vec<u32>);

impl DyadicVector {
    pub fn new(s: Vec<u32>) -> Self {
        DyadicVector(s)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn l1(&self) -> u64 {
        self.0.iter().map(|&s| s as u64).sum()
    }
}

impl From<Vec<u32>> for DyadicVector {
    fn from(v: Vec<u32>) -> Self {
        DyadicVector(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSetLabel {
    Block(DyadicVector),
    Layer(u32),
    Cross(u32),
    Cube(u64),
    LinfShell(u32),
    Custom,
}

impl fmt::Display for IndexSetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSetLabel::Block(s) => write!(f, "block({})", s.0.iter().join(",")),
            IndexSetLabel::Layer(j) => write!(f, "layer({j})"),
            IndexSetLabel::Cross(n) => write!(f, "cross({n})"),
            IndexSetLabel::Cube(m) => write!(f, "cube({m})"),
            IndexSetLabel::LinfShell(j) => write!(f, "shell({j})"),
            IndexSetLabel::Custom => write!(f, "custom"),
        }
    }
}

/// A finite, duplicate-free, lexicographically ordered set of multi-indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    members: Vec<MultiIndex>,
    label: IndexSetLabel,
}

impl IndexSet {
    /// Builds a custom set. Members are sorted; duplicates or mixed
    /// dimensions are rejected.
    pub fn from_members(dim: usize, mut members: Vec<MultiIndex>) -> Result<Self> {
        check_dim(dim)?;
        if let Some(bad) = members.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        members.sort_unstable();
        if let Some((a, _)) = members.iter().tuple_windows().find(|(a, b)| a == b) {
            return Err(invalid(format!("duplicate member {a}")));
        }
        Ok(IndexSet {
            dim,
            members,
            label: IndexSetLabel::Custom,
        })
    }

    fn from_sorted(dim: usize, members: Vec<MultiIndex>, label: IndexSetLabel) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        IndexSet {
            dim,
            members,
            label,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn label(&self) -> &IndexSetLabel {
        &self.label
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.members.iter()
    }

    pub fn get(&self, i: usize) -> Option<&MultiIndex> {
        self.members.get(i)
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.members.binary_search(k).ok()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.position(k).is_some()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|k| other.contains(k))
    }

    /// Largest |k_j| over all members and coordinates.
    pub fn max_freq(&self) -> u64 {
        self.members.iter().map(MultiIndex::max_abs).max().unwrap_or(0)
    }

    /// One `(k1,...,kd)` tuple per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.members.len() * (4 * self.dim + 3));
        for k in &self.members {
            out.push_str(&k.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut members = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let k = line.parse::<MultiIndex>().map_err(|e| Error::Parse {
                line: line_no + 1,
                msg: e.to_string(),
            })?;
            members.push(k);
        }
        let dim = members
            .first()
            .map(MultiIndex::dim)
            .ok_or_else(|| invalid("empty index set text"))?;
        IndexSet::from_members(dim, members)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(())
}

fn check_level(s: u64) -> Result<()> {
    if s > MAX_LEVEL as u64 {
        return Err(invalid(format!("dyadic level {s} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

/// Integers with [2^{s-1}] ≤ |k| < 2^s, ascending.
fn axis_values(s: u32) -> Vec<i64> {
    let lo = shell_lower(s);
    let hi = 1i64 << s;
    let neg = (lo.max(1)..hi).rev().map(|k| -k);
    let zero = (lo == 0).then_some(0);
    neg.chain(zero).chain(lo.max(1)..hi).collect()
}

/// Lexicographic cartesian product of ascending per-axis value lists.
fn product(axes: &[Vec<i64>]) -> Vec<MultiIndex> {
    axes.iter()
        .map(|a| a.iter().copied())
        .multi_cartesian_product()
        .map(MultiIndex)
        .collect()
}

fn merge_sorted(mut parts: Vec<Vec<MultiIndex>>) -> Vec<MultiIndex> {
    let mut all: Vec<MultiIndex> = parts.drain(..).flatten().collect();
    all.sort_unstable();
    all
}

/// All s ∈ ℕ₀ᵈ with ‖s‖₁ = j, in lexicographic order.
fn compositions(j: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(rem: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=rem {
            cur.push(first);
            rec(rem - first, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(j, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// ρ(s) = {k : [2^{s_j-1}] ≤ |k_j| < 2^{s_j}, j = 1..d}.
pub fn dyadic_block(s: &DyadicVector, d: usize) -> Result<IndexSet> {
    check_dim(d)?;
    if s.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s.dim(),
        });
    }
    for &level in s.levels() {
        check_level(level as u64)?;
    }
    let axes: Vec<Vec<i64>> = s.levels().iter().map(|&l| axis_values(l)).collect();
    Ok(IndexSet::from_sorted(
        d,
        product(&axes),
        IndexSetLabel::Block(s.clone()),
    ))
}

/// ΔQ_j, the union of ρ(s) over ‖s‖₁ = j.
pub fn layer(j: u32, d: usize) -> Result<IndexSet> {
    check_dim(d)?;
    check_level(j as u64)?;
    let parts = compositions(j, d)
        .into_iter()
        .map(|s| dyadic_block(&DyadicVector(s), d).map(|b| b.members))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexSet::from_sorted(
        d,
        merge_sorted(parts),
        IndexSetLabel::Layer(j),
    ))
}

/// Q_n, the union of ρ(s) over ‖s‖₁ ≤ n.
pub fn hyperbolic_cross(n: u32, d: usize) -> Result<IndexSet> {
    check_dim(d)?;
    let parts = (0..=n)
        .map(|j| layer(j, d).map(|l| l.members))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexSet::from_sorted(
        d,
        merge_sorted(parts),
        IndexSetLabel::Cross(n),
    ))
}

/// Π(M) = [-M, M]ᵈ.
pub fn full_cube(m: u64, d: usize) -> Result<IndexSet> {
    check_dim(d)?;
    let side = m
        .checked_mul(2)
        .and_then(|x| x.checked_add(1))
        .filter(|&x| x <= i64::MAX as u64)
        .ok_or_else(|| invalid(format!("cube half-width {m} overflows")))?;
    let count = u32::try_from(d)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .filter(|&c| usize::try_from(c).is_ok())
        .ok_or_else(|| invalid(format!("(2·{m}+1)^{d} overflows")))?;
    let m = m as i64;
    let axes = vec![(-m..=m).collect::<Vec<_>>(); d];
    let members = product(&axes);
    debug_assert_eq!(members.len() as u64, count);
    Ok(IndexSet::from_sorted(d, members, IndexSetLabel::Cube(m as u64)))
}

/// {k : [2^{j-1}] ≤ ‖k‖∞ < 2^j}, the shells used by the 𝐀ʳ_β classes.
pub fn linf_shell(j: u32, d: usize) -> Result<IndexSet> {
    check_dim(d)?;
    check_level(j as u64)?;
    let outer = (1i64 << j) - 1;
    let inner = shell_lower(j);
    let axes = vec![(-outer..=outer).collect::<Vec<_>>(); d];
    let members = axes
        .iter()
        .map(|a| a.iter().copied())
        .multi_cartesian_product()
        .map(MultiIndex)
        .filter(|k| k.max_abs() as i64 >= inner)
        .collect();
    Ok(IndexSet::from_sorted(d, members, IndexSetLabel::LinfShell(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(members: &[&[i64]]) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> = members.iter().map(|m| MultiIndex::from(*m)).collect();
        v.sort();
        v
    }

    /// Brute-force membership straight from the definition of ρ(s).
    fn in_block_oracle(k: &[i64], s: &[u32]) -> bool {
        k.iter().zip(s).all(|(&kj, &sj)| {
            let lo = (2f64.powi(sj as i32 - 1)).floor() as i64;
            let hi = 2i64.pow(sj);
            lo <= kj.abs() && kj.abs() < hi
        })
    }

    fn oracle_layer_count(j: u32, d: usize) -> usize {
        let bound = 1i64 << j;
        let axes = vec![(-bound..=bound).collect::<Vec<_>>(); d];
        axes.into_iter()
            .multi_cartesian_product()
            .filter(|k| {
                let s: Vec<u32> = k.iter().map(|c| dyadic_level(c.unsigned_abs())).collect();
                s.iter().sum::<u32>() == j && in_block_oracle(k, &s)
            })
            .count()
    }

    #[test]
    fn block_examples() {
        let b = dyadic_block(&DyadicVector::new(vec![0]), 1).unwrap();
        assert_eq!(b.members(), set(&[&[0]]).as_slice());

        let b = dyadic_block(&DyadicVector::new(vec![1, 0]), 2).unwrap();
        assert_eq!(b.members(), set(&[&[-1, 0], &[1, 0]]).as_slice());

        let b = dyadic_block(&DyadicVector::new(vec![2, 1]), 2).unwrap();
        assert_eq!(b.len(), 8);
        for k in &b {
            assert!([2, 3].contains(&k.coords()[0].abs()));
            assert_eq!(k.coords()[1].abs(), 1);
        }
    }

    #[test]
    fn block_dimension_mismatch() {
        let err = dyadic_block(&DyadicVector::new(vec![1, 1]), 3).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn layer_examples() {
        assert_eq!(layer(0, 2).unwrap().members(), set(&[&[0, 0]]).as_slice());
        let l1 = layer(1, 2).unwrap();
        assert_eq!(
            l1.members(),
            set(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]]).as_slice()
        );
        // brute-force count over the box [-8, 8]^2
        assert_eq!(oracle_layer_count(3, 2), 32);
        assert_eq!(layer(3, 2).unwrap().len(), 32);
    }

    #[test]
    fn cross_examples() {
        let q = hyperbolic_cross(2, 1).unwrap();
        assert_eq!(q.members(), set(&[&[-3], &[-2], &[-1], &[0], &[1], &[2], &[3]]).as_slice());
        assert_eq!(hyperbolic_cross(1, 2).unwrap().len(), 5);
        assert_eq!(hyperbolic_cross(0, 2).unwrap().members(), set(&[&[0, 0]]).as_slice());
        assert_eq!(hyperbolic_cross(4, 2).unwrap().len(), 129);
    }

    #[test]
    fn cube_examples() {
        assert_eq!(full_cube(1, 2).unwrap().len(), 9);
        assert_eq!(full_cube(3, 1).unwrap().len(), 7);
        assert_eq!(full_cube(2, 3).unwrap().len(), 125);
        assert!(full_cube(u64::MAX / 2, 3).is_err());
        assert!(full_cube(1 << 40, 2).is_err());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(layer(1, 0).is_err());
        assert!(full_cube(1, 0).is_err());
    }

    #[test]
    fn partition_property_exhaustive() {
        for d in 1..=3 {
            for n in 0..=6 {
                if d == 3 && n > 5 {
                    continue;
                }
                let mut total = 0;
                for j in 0..=n {
                    let blocks: Vec<IndexSet> = compositions(j, d)
                        .into_iter()
                        .map(|s| dyadic_block(&DyadicVector(s), d).unwrap())
                        .collect();
                    let mut seen = BTreeSet::new();
                    for b in &blocks {
                        for k in b {
                            assert!(seen.insert(k.clone()), "blocks overlap at {k}");
                        }
                    }
                    let l = layer(j, d).unwrap();
                    assert_eq!(l.len(), seen.len());
                    total += l.len();
                }
                assert_eq!(total, hyperbolic_cross(n, d).unwrap().len(), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn nesting() {
        for d in 1..=2 {
            for n in 0..6 {
                let q = hyperbolic_cross(n, d).unwrap();
                let q1 = hyperbolic_cross(n + 1, d).unwrap();
                let cube = full_cube(1 << (n + 1), d).unwrap();
                assert!(q.is_subset_of(&q1));
                assert!(q1.is_subset_of(&cube));
            }
        }
    }

    #[test]
    fn cross_growth_trend() {
        // |Q_n| ≍ 2^n n^{d-1}: the normalized ratio stays within a narrow band.
        let ratios: Vec<f64> = (2..=8)
            .map(|n| hyperbolic_cross(n, 2).unwrap().len() as f64 / (2f64.powi(n as i32) * n as f64))
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 2.0, "{ratios:?}");
    }

    #[test]
    fn shells_partition_cube() {
        let mut total = 0;
        for j in 0..=3 {
            let s = linf_shell(j, 2).unwrap();
            assert!(s.iter().all(|k| k.linf_shell() == j));
            total += s.len();
        }
        assert_eq!(total, full_cube(7, 2).unwrap().len());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let q = hyperbolic_cross(2, 2).unwrap();
        let back = IndexSet::from_text(&q.to_text()).unwrap();
        assert_eq!(back.members(), q.members());
        assert!(IndexSet::from_text("(1,2)\n(1,2)\n").is_err());
        assert!(IndexSet::from_text("(1,2)\n(3)\n").is_err());
        assert!(matches!(
            IndexSet::from_text("(1,x)").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    proptest! {
        #[test]
        fn membership_closure(k in proptest::collection::vec(-40i64..40, 2), s in proptest::collection::vec(0u32..7, 2)) {
            let block = dyadic_block(&DyadicVector::new(s.clone()), 2).unwrap();
            prop_assert_eq!(block.contains(&MultiIndex::new(k.clone())), in_block_oracle(&k, &s));
        }

        #[test]
        fn dyadic_vector_locates_block(k in proptest::collection::vec(-1000i64..1000, 1..4)) {
            let k = MultiIndex::new(k);
            let s = k.dyadic_vector();
            prop_assert!(in_block_oracle(k.coords(), s.levels()));
        }
    }
}
