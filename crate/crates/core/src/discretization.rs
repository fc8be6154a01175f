//! Random point sets and L₂ universal sampling discretization checks.
//!
//! For the orthonormal system 𝒯ᵈ, the two-sided bound
//! ½‖f‖₂² ≤ (1/m)Σ|f(ξ^j)|² ≤ ³⁄₂‖f‖₂² on span{ψ_k : k ∈ J} is equivalent
//! to the discrete Gram matrix of J having its spectrum in [½, ³⁄₂].

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::greedy::DictionaryOnPoints;
use crate::index_sets::IndexSet;
use crate::linalg::{hermitian_extremes, CMatrix};
use crate::rng;
use crate::trig::PointSet;

/// m i.i.d. uniform points on [0, 2π)ᵈ.
pub fn draw_points(m: usize, d: usize, seed: u64) -> Result<PointSet> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let mut rng = rng::seeded(seed);
    let coords = (0..m * d)
        .map(|_| {
            let x = TAU * rng.gen::<f64>();
            // rounding can land exactly on 2π
            if x >= TAU {
                0.0
            } else {
                x
            }
        })
        .collect();
    PointSet::from_flat(d, coords)
}

pub fn gram_matrix(xi: &PointSet, j: &IndexSet) -> Result<CMatrix> {
    Ok(DictionaryOnPoints::new(j.clone(), xi.clone())?.gram())
}

/// Extreme eigenvalues of the discrete Gram matrix of {ψ_k : k ∈ J} on ξ.
pub fn gram_spectrum(xi: &PointSet, j: &IndexSet) -> Result<(f64, f64)> {
    Ok(hermitian_extremes(&gram_matrix(xi, j)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UdMode {
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

impl fmt::Display for UdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UdMode::Exhaustive => f.write_str("exhaustive"),
            UdMode::Sampled { .. } => f.write_str("sampled"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UdOptions {
    pub c_lo: f64,
    pub c_hi: f64,
    /// Largest number of subsets an exhaustive check may visit.
    pub exhaustive_cap: u128,
}

impl Default for UdOptions {
    fn default() -> Self {
        UdOptions {
            c_lo: 0.5,
            c_hi: 1.5,
            exhaustive_cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UdReport {
    pub m: usize,
    pub u: usize,
    pub subspaces_checked: usize,
    pub mode: UdMode,
    pub worst_lower: f64,
    pub worst_upper: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub pass: bool,
}

impl UdReport {
    /// An exhaustive pass certifies the property; a sampled pass is evidence.
    pub fn certified(&self) -> bool {
        self.pass && self.mode == UdMode::Exhaustive
    }

    /// The smallest D with ‖f‖₂ ≤ D‖f‖_{L₂(μ_m)} on the checked subspaces.
    pub fn one_sided_constant(&self) -> f64 {
        if self.worst_lower > 0.0 {
            1.0 / self.worst_lower.sqrt()
        } else {
            f64::INFINITY
        }
    }

    pub const CSV_HEADER: [&'static str; 8] =
        ["m", "u", "mode", "trials", "worst_lower", "worst_upper", "pass", "seed"];

    pub fn csv_record(&self, seed: u64) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.u.to_string(),
            self.mode.to_string(),
            self.subspaces_checked.to_string(),
            self.worst_lower.to_string(),
            self.worst_upper.to_string(),
            self.pass.to_string(),
            seed.to_string(),
        ]
    }
}

pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// The subsets visited by a check: all u-subsets, or `trials` random ones.
pub(crate) fn subsets(n: usize, u: usize, mode: UdMode, cap: u128) -> Result<Vec<Vec<usize>>> {
    match mode {
        UdMode::Exhaustive => {
            let count = binomial(n, u).unwrap_or(u128::MAX);
            if count > cap {
                return Err(Error::CapExceeded {
                    what: "exhaustive subset scan",
                    count,
                    cap,
                    hint: "use sampled mode",
                });
            }
            Ok((0..n).combinations(u).collect())
        }
        UdMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(invalid("sampled mode needs at least one trial"));
            }
            let mut rng = rng::seeded(seed);
            Ok((0..trials)
                .map(|_| {
                    let mut s = sample_indices(&mut rng, n, u).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect())
        }
    }
}

fn principal(g: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| g[(idx[a], idx[b])])
}

fn scan(xi: &PointSet, dictionary: &IndexSet, u: usize, mode: UdMode, cap: u128) -> Result<(usize, usize, f64, f64)> {
    if u == 0 {
        return Err(invalid("sparsity u must be at least 1"));
    }
    if dictionary.is_empty() {
        return Err(invalid("empty dictionary"));
    }
    // Subsets larger than the dictionary collapse to the whole dictionary.
    let u = u.min(dictionary.len());
    let g = DictionaryOnPoints::new(dictionary.clone(), xi.clone())?.gram();
    let subs = subsets(dictionary.len(), u, mode, cap)?;
    let spectra: Vec<(f64, f64)> = subs
        .par_iter()
        .map(|s| hermitian_extremes(&principal(&g, s)))
        .collect();
    let lo = spectra.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = spectra.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok((u, subs.len(), lo, hi))
}

/// Checks the two-sided (½, ³⁄₂) discretization on every (or a random sample
/// of) u-sparse subspace of the dictionary.
pub fn verify_ud(xi: &PointSet, dictionary: &IndexSet, u: usize, mode: UdMode) -> Result<UdReport> {
    verify_ud_with(xi, dictionary, u, mode, UdOptions::default())
}

pub fn verify_ud_with(
    xi: &PointSet,
    dictionary: &IndexSet,
    u: usize,
    mode: UdMode,
    opts: UdOptions,
) -> Result<UdReport> {
    let (u, checked, lo, hi) = scan(xi, dictionary, u, mode, opts.exhaustive_cap)?;
    Ok(UdReport {
        m: xi.len(),
        u,
        subspaces_checked: checked,
        mode,
        worst_lower: lo,
        worst_upper: hi,
        c_lo: opts.c_lo,
        c_hi: opts.c_hi,
        pass: lo >= opts.c_lo && hi <= opts.c_hi,
    })
}

/// Checks only ‖f‖₂ ≤ D·‖f‖_{L₂(μ_m)}, i.e. λ_min ≥ 1/D², on u-sparse
/// subspaces.
pub fn verify_one_sided(
    xi: &PointSet,
    dictionary: &IndexSet,
    u: usize,
    d_target: f64,
    mode: UdMode,
) -> Result<UdReport> {
    if !(d_target > 0.0) {
        return Err(invalid(format!("D must be positive, got {d_target}")));
    }
    let cap = UdOptions::default().exhaustive_cap;
    let (u, checked, lo, hi) = scan(xi, dictionary, u, mode, cap)?;
    let c_lo = 1.0 / (d_target * d_target);
    Ok(UdReport {
        m: xi.len(),
        u,
        subspaces_checked: checked,
        mode,
        worst_lower: lo,
        worst_upper: hi,
        c_lo,
        c_hi: f64::INFINITY,
        // the discrete Gram spectrum carries ~1e-15 round-off
        pass: lo >= c_lo * (1.0 - 1e-12),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MRule {
    /// m ≍ v (log 2v)⁴, general uniformly bounded Riesz systems.
    Log4,
    /// m ≍ v (log 2v)³, the trigonometric improvement.
    Log3,
}

impl MRule {
    pub fn exponent(self) -> i32 {
        match self {
            MRule::Log4 => 4,
            MRule::Log3 => 3,
        }
    }
}

impl FromStr for MRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log4" => Ok(MRule::Log4),
            "log3" => Ok(MRule::Log3),
            other => Err(invalid(format!("unknown m rule {other:?}"))),
        }
    }
}

impl fmt::Display for MRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MRule::Log4 => "log4",
            MRule::Log3 => "log3",
        })
    }
}

/// ⌈c · v · (ln 2v)^e⌉.
pub fn m_budget(v: usize, rule: MRule, c_user: f64) -> Result<usize> {
    if v == 0 {
        return Err(invalid("v must be at least 1"));
    }
    if !(c_user > 0.0) || !c_user.is_finite() {
        return Err(invalid(format!("c must be positive, got {c_user}")));
    }
    let m = (c_user * v as f64 * (2.0 * v as f64).ln().powi(rule.exponent())).ceil();
    Ok((m as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::{full_cube, hyperbolic_cross, MultiIndex};

    fn set1(ks: &[i64]) -> IndexSet {
        IndexSet::from_members(1, ks.iter().map(|&k| MultiIndex::from([k])).collect()).unwrap()
    }

    #[test]
    fn draw_points_examples() {
        let a = draw_points(1, 2, 5).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a, draw_points(1, 2, 5).unwrap());
        assert_eq!(draw_points(50, 3, 9).unwrap(), draw_points(50, 3, 9).unwrap());
        assert_ne!(draw_points(50, 3, 9).unwrap(), draw_points(50, 3, 10).unwrap());
        assert!(draw_points(0, 1, 0).is_err());
    }

    #[test]
    fn draw_points_mean() {
        let xi = draw_points(100_000, 2, 1).unwrap();
        for axis in 0..2 {
            let mean = xi.iter().map(|p| p[axis]).sum::<f64>() / xi.len() as f64;
            assert!((mean - std::f64::consts::PI).abs() < 0.02, "mean {mean}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let xi = PointSet::equispaced(5, 1).unwrap();
        let (lo, hi) = gram_spectrum(&xi, &full_cube(2, 1).unwrap()).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let rnd = draw_points(9, 2, 3).unwrap();
        let single = IndexSet::from_members(2, vec![MultiIndex::from([3, -1])]).unwrap();
        let (lo, hi) = gram_spectrum(&rnd, &single).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);

        let origin = PointSet::new(1, vec![vec![0.0]]).unwrap();
        let (lo, hi) = gram_spectrum(&origin, &set1(&[0, 1])).unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_bounds_hold() {
        for seed in 0..20 {
            let xi = draw_points(3 + seed as usize, 1, seed).unwrap();
            let j = set1(&[-4, 0, 2, 7, 9]);
            let (lo, hi) = gram_spectrum(&xi, &j).unwrap();
            assert!(lo >= -1e-12 && lo <= hi && hi <= j.len() as f64 + 1e-12);
        }
    }

    #[test]
    fn exact_grid_passes_everywhere() {
        for m_half in 1..=3u64 {
            let dict = full_cube(m_half, 1).unwrap();
            let xi = PointSet::equispaced(dict.len(), 1).unwrap();
            for u in 1..=dict.len() {
                let r = verify_ud(&xi, &dict, u, UdMode::Exhaustive).unwrap();
                assert!(r.certified());
                assert!((r.worst_lower - 1.0).abs() < 1e-10 && (r.worst_upper - 1.0).abs() < 1e-10);
            }
        }
        let dict = full_cube(2, 2).unwrap();
        let xi = PointSet::equispaced(5, 2).unwrap();
        let r = verify_ud(&xi, &dict, 3, UdMode::Sampled { trials: 50, seed: 1 }).unwrap();
        assert!(r.pass && !r.certified());
    }

    #[test]
    fn single_terms_always_pass() {
        let xi = draw_points(4, 2, 8).unwrap();
        let r = verify_ud(&xi, &hyperbolic_cross(3, 2).unwrap(), 1, UdMode::Exhaustive).unwrap();
        assert!(r.pass);
        assert!((r.worst_lower - 1.0).abs() < 1e-14 && (r.worst_upper - 1.0).abs() < 1e-14);
    }

    #[test]
    fn subset_monotonicity() {
        let dict = hyperbolic_cross(3, 1).unwrap();
        for seed in 0..10 {
            let xi = draw_points(40, 1, seed).unwrap();
            let top = verify_ud(&xi, &dict, 4, UdMode::Exhaustive).unwrap();
            for u in 1..4 {
                let r = verify_ud(&xi, &dict, u, UdMode::Exhaustive).unwrap();
                assert!(r.worst_lower >= top.worst_lower - 1e-12);
                assert!(r.worst_upper <= top.worst_upper + 1e-12);
                if top.pass {
                    assert!(r.pass);
                }
            }
        }
    }

    #[test]
    fn exhaustive_cap_is_enforced() {
        let xi = draw_points(10, 2, 0).unwrap();
        let err = verify_ud_with(
            &xi,
            &hyperbolic_cross(4, 2).unwrap(),
            6,
            UdMode::Exhaustive,
            UdOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sampled"), "{err}");
    }

    #[test]
    fn one_sided_examples() {
        let dict = full_cube(3, 1).unwrap();
        let xi = PointSet::equispaced(7, 1).unwrap();
        assert!(verify_one_sided(&xi, &dict, 4, 1.0, UdMode::Exhaustive).unwrap().pass);

        for seed in 0..10 {
            let xi = draw_points(60, 1, seed).unwrap();
            let two_sided = verify_ud(&xi, &dict, 2, UdMode::Exhaustive).unwrap();
            if two_sided.pass {
                let r = verify_one_sided(&xi, &dict, 2, 2f64.sqrt(), UdMode::Exhaustive).unwrap();
                assert!(r.pass);
            }
        }

        let origin = PointSet::new(1, vec![vec![0.0]]).unwrap();
        for d in [1.0, 10.0, 1e6] {
            let r = verify_one_sided(&origin, &set1(&[0, 1]), 2, d, UdMode::Exhaustive).unwrap();
            assert!(!r.pass);
        }
    }

    #[test]
    fn m_budget_examples() {
        assert_eq!(m_budget(1, MRule::Log3, 1.0).unwrap(), 1);
        // 10·(ln 20)⁴ = 805.40…
        assert_eq!(m_budget(10, MRule::Log4, 1.0).unwrap(), 806);
        assert_eq!(m_budget(4, MRule::Log3, 2.0).unwrap(), 72);
        for rule in [MRule::Log3, MRule::Log4] {
            let budgets: Vec<usize> = (1..200).map(|v| m_budget(v, rule, 0.7).unwrap()).collect();
            assert!(budgets.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(m_budget(0, MRule::Log3, 1.0).is_err());
        assert!(m_budget(3, MRule::Log3, 0.0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(129, 4), Some(11_009_376));
        assert_eq!(binomial(3, 5), Some(0));
    }
}
