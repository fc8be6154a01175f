//! Structural classes 𝐖^{a,b}_{A_β} and 𝐀ʳ_β over 𝒯ᵈ.
//!
//! Class membership is defined by the existence of a representation with
//! decaying layer quasi-norms. A [`SparseCoefFn`] *is* a representation, so
//! the membership checks below certify the stored one and nothing more.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::index_sets::{layer, linf_shell, DyadicVector, IndexSet, MultiIndex};
use crate::trig::SparseCoefFn;

/// Relative slack on the class bounds; generators hit them with equality.
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassParamsW {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
}

impl ClassParamsW {
    pub fn new(a: f64, b: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0) || !b.is_finite() {
            return Err(invalid(format!("need a > 0 and finite b, got a={a}, b={b}")));
        }
        check_beta(beta)?;
        Ok(ClassParamsW { a, b, beta })
    }

    /// 2^{-aj} · j̄^{(d-1)b} with j̄ = max(j, 1).
    pub fn layer_bound(&self, j: u32, d: usize) -> f64 {
        let jbar = j.max(1) as f64;
        2f64.powf(-self.a * j as f64) * jbar.powf((d as f64 - 1.0) * self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassParamsA {
    pub r: f64,
    pub beta: f64,
}

impl ClassParamsA {
    pub fn new(r: f64, beta: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(invalid(format!("need r > 0, got {r}")));
        }
        check_beta(beta)?;
        Ok(ClassParamsA { r, beta })
    }

    pub fn shell_bound(&self, j: u32) -> f64 {
        2f64.powf(-self.r * j as f64)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("β must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// δ_s(f): coefficients restricted to ρ(s).
pub fn delta_s(f: &SparseCoefFn, s: &DyadicVector) -> Result<SparseCoefFn> {
    if s.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: s.dim(),
        });
    }
    Ok(f.restrict(|k| &k.dyadic_vector() == s))
}

/// f_j: coefficients restricted to the layer ΔQ_j.
pub fn layer_part(f: &SparseCoefFn, j: u32) -> SparseCoefFn {
    f.restrict(|k| k.dyadic_vector().l1() == j as u64)
}

/// All nonempty layers f_j keyed by j.
pub fn layers(f: &SparseCoefFn) -> BTreeMap<u32, SparseCoefFn> {
    let mut out: BTreeMap<u32, SparseCoefFn> = BTreeMap::new();
    for (k, c) in f.iter() {
        let j = k.dyadic_vector().l1() as u32;
        out.entry(j)
            .or_insert_with(|| SparseCoefFn::zero(f.dim()))
            .set(k.clone(), *c)
            .expect("same dimension");
    }
    out
}

fn shells(f: &SparseCoefFn) -> BTreeMap<u32, SparseCoefFn> {
    let mut out: BTreeMap<u32, SparseCoefFn> = BTreeMap::new();
    for (k, c) in f.iter() {
        out.entry(k.linf_shell())
            .or_insert_with(|| SparseCoefFn::zero(f.dim()))
            .set(k.clone(), *c)
            .expect("same dimension");
    }
    out
}

/// (Σ |x|^β)^{1/β} over magnitudes.
pub fn beta_quasi_norm(magnitudes: impl IntoIterator<Item = f64>, beta: f64) -> f64 {
    if beta == 1.0 {
        return magnitudes.into_iter().sum();
    }
    magnitudes
        .into_iter()
        .map(|x| x.powf(beta))
        .sum::<f64>()
        .powf(1.0 / beta)
}

/// |f|_{A_β} = (Σ_k |a_k|^β)^{1/β}.
pub fn a_beta_norm(f: &SparseCoefFn, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(beta_quasi_norm(f.iter().map(|(_, c)| c.norm()), beta))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Membership {
    Member,
    /// First violating layer (or shell) j and |f_j|/bound.
    Violation { j: u32, excess: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

fn first_violation(parts: BTreeMap<u32, SparseCoefFn>, beta: f64, bound: impl Fn(u32) -> f64) -> Membership {
    for (j, part) in parts {
        let norm = beta_quasi_norm(part.iter().map(|(_, c)| c.norm()), beta);
        let ratio = norm / bound(j);
        if ratio > 1.0 + BOUND_TOLERANCE {
            return Membership::Violation { j, excess: ratio };
        }
    }
    Membership::Member
}

/// Checks |f_j|_{A_β} ≤ 2^{-aj} j̄^{(d-1)b} for every nonempty layer.
pub fn membership_w(f: &SparseCoefFn, params: &ClassParamsW) -> Membership {
    let d = f.dim();
    first_violation(layers(f), params.beta, |j| params.layer_bound(j, d))
}

/// Checks the ℓ∞ shell bound (Σ_{shell j} |a_k|^β)^{1/β} ≤ 2^{-rj}.
pub fn membership_a(f: &SparseCoefFn, params: &ClassParamsA) -> Membership {
    first_violation(shells(f), params.beta, |j| params.shell_bound(j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Every layer meets its bound with equality, mass spread evenly over
    /// the whole layer.
    SaturatingUniform,
    /// Every layer meets its bound with equality on a single index.
    SaturatingSpiky,
    /// A random subset per layer, quasi-norm a uniform fraction of the bound.
    RandomSparse,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "saturating" | "saturating-uniform" => Ok(Profile::SaturatingUniform),
            "saturating-spiky" | "spiky" => Ok(Profile::SaturatingSpiky),
            "random-sparse" => Ok(Profile::RandomSparse),
            other => Err(invalid(format!("unknown profile {other:?}"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::SaturatingUniform => "saturating-uniform",
            Profile::SaturatingSpiky => "saturating-spiky",
            Profile::RandomSparse => "random-sparse",
        })
    }
}

/// Largest subset drawn per layer by the random-sparse profile.
const RANDOM_SPARSE_MAX_TERMS: usize = 64;

fn fill_part(
    f: &mut SparseCoefFn,
    part: &IndexSet,
    bound: f64,
    beta: f64,
    profile: Profile,
    rng: &mut ChaCha8Rng,
) {
    let phase = |rng: &mut ChaCha8Rng| Complex64::cis(TAU * rng.gen::<f64>());
    let n = part.len();
    match profile {
        Profile::SaturatingUniform => {
            let mag = bound / (n as f64).powf(1.0 / beta);
            for k in part {
                f.set(k.clone(), mag * phase(rng)).expect("same dimension");
            }
        }
        Profile::SaturatingSpiky => {
            let k = &part.members()[rng.gen_range(0..n)];
            f.set(k.clone(), bound * phase(rng)).expect("same dimension");
        }
        Profile::RandomSparse => {
            let count = rng.gen_range(1..=n.min(RANDOM_SPARSE_MAX_TERMS));
            let picks = sample_indices(rng, n, count).into_vec();
            // magnitudes in (0, 1], rescaled to a fraction u ∈ (0, 1] of the bound
            let raw: Vec<f64> = (0..count).map(|_| 1.0 - rng.gen::<f64>()).collect();
            let fraction = 1.0 - rng.gen::<f64>();
            let scale = fraction * bound / beta_quasi_norm(raw.iter().copied(), beta);
            for (i, mag) in picks.into_iter().zip(raw) {
                f.set(part.members()[i].clone(), mag * scale * phase(rng))
                    .expect("same dimension");
            }
        }
    }
}

/// A member of 𝐖^{a,b}_{A_β} with layers 0..=j_max.
pub fn generate_w(params: &ClassParamsW, d: usize, j_max: u32, seed: u64, profile: Profile) -> Result<SparseCoefFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SparseCoefFn::zero(d);
    for j in 0..=j_max {
        let part = layer(j, d)?;
        fill_part(&mut f, &part, params.layer_bound(j, d), params.beta, profile, &mut rng);
    }
    Ok(f)
}

/// A member of 𝐀ʳ_β with ℓ∞ shells 0..=j_max.
pub fn generate_a(params: &ClassParamsA, d: usize, j_max: u32, seed: u64, profile: Profile) -> Result<SparseCoefFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SparseCoefFn::zero(d);
    for j in 0..=j_max {
        let part = linf_shell(j, d)?;
        fill_part(&mut f, &part, params.shell_bound(j), params.beta, profile, &mut rng);
    }
    Ok(f)
}

/// Default truncation depth: 12 for d = 1, 8 for d = 2, 5 beyond.
pub fn default_j_max(d: usize) -> u32 {
    match d {
        1 => 12,
        2 => 8,
        _ => 5,
    }
}

/// The layer index j of a frequency, i.e. ‖s‖₁ for k ∈ ρ(s).
pub fn layer_of(k: &MultiIndex) -> u32 {
    k.dyadic_vector().l1() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::full_cube;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn real(d: usize, pairs: &[(&[i64], f64)]) -> SparseCoefFn {
        SparseCoefFn::from_real(d, pairs.iter().map(|(k, c)| (MultiIndex::from(*k), *c))).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ClassParamsW::new(0.0, 0.0, 1.0).is_err());
        assert!(ClassParamsW::new(1.0, 0.0, 0.0).is_err());
        assert!(ClassParamsW::new(1.0, 0.0, 1.5).is_err());
        assert!(ClassParamsA::new(-1.0, 1.0).is_err());
        assert!(ClassParamsA::new(1.0, 0.5).is_ok());
    }

    #[test]
    fn delta_s_examples() {
        let f = real(1, &[(&[0], 1.0), (&[1], 2.0)]);
        assert_eq!(delta_s(&f, &DyadicVector::new(vec![0])).unwrap(), real(1, &[(&[0], 1.0)]));
        assert!(delta_s(&f, &DyadicVector::new(vec![3])).unwrap().is_empty());
        let g = real(2, &[(&[1, 1], 3.0), (&[2, 0], 5.0)]);
        assert_eq!(
            delta_s(&g, &DyadicVector::new(vec![1, 1])).unwrap(),
            real(2, &[(&[1, 1], 3.0)])
        );
        assert!(delta_s(&g, &DyadicVector::new(vec![1])).is_err());
    }

    #[test]
    fn layer_part_examples() {
        let f = real(1, &[(&[0], 1.0)]);
        assert_eq!(layer_part(&f, 0), f);
        assert!(layer_part(&f, 2).is_empty());
        let g = real(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        assert_eq!(layer_part(&g, 1), g);
    }

    #[test]
    fn layers_resum_on_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cube = full_cube(3, 2).unwrap();
        let f = SparseCoefFn::from_pairs(
            2,
            cube.iter().map(|k| (k.clone(), Complex64::new(rng.gen(), rng.gen()))),
        )
        .unwrap();
        let mut total = SparseCoefFn::zero(2);
        for j in 0..=4 {
            total = total.add(&layer_part(&f, j)).unwrap();
        }
        assert_eq!(total, f);
    }

    #[test]
    fn a_beta_examples() {
        let single = SparseCoefFn::from_pairs(1, [([4], Complex64::new(0.6, -0.8))]).unwrap();
        assert_abs_diff_eq!(a_beta_norm(&single, 0.3).unwrap(), 1.0, epsilon = 1e-14);
        let f = real(1, &[(&[0], 0.4), (&[1], 0.3), (&[2], -0.2), (&[3], 0.1)]);
        assert_abs_diff_eq!(a_beta_norm(&f, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        // (√0.4 + √0.3 + √0.2 + √0.1)², evaluated independently
        assert_abs_diff_eq!(a_beta_norm(&f, 0.5).unwrap(), 3.7776565705218186, epsilon = 1e-12);
        assert!(a_beta_norm(&f, 0.0).is_err());
    }

    #[test]
    fn membership_w_examples() {
        let one = real(1, &[(&[0], 1.0)]);
        for (a, b, beta) in [(1.0, 0.0, 1.0), (3.0, -2.0, 0.25), (0.1, 5.0, 0.5)] {
            assert!(membership_w(&one, &ClassParamsW::new(a, b, beta).unwrap()).is_member());
        }
        let e1 = real(1, &[(&[1], 1.0)]);
        match membership_w(&e1, &ClassParamsW::new(1.0, 0.0, 1.0).unwrap()) {
            Membership::Violation { j, excess } => {
                assert_eq!(j, 1);
                assert_abs_diff_eq!(excess, 2.0, epsilon = 1e-15);
            }
            m => panic!("expected violation, got {m:?}"),
        }
    }

    #[test]
    fn membership_a_examples() {
        let p = ClassParamsA::new(2.0, 1.0).unwrap();
        assert!(membership_a(&real(1, &[(&[0], 1.0)]), &p).is_member());
        let e1 = real(1, &[(&[1], 1.0)]);
        assert!(matches!(membership_a(&e1, &p), Membership::Violation { j: 1, .. }));
        assert!(membership_a(&e1.scale(Complex64::new(0.25, 0.0)), &p).is_member());
    }

    #[test]
    fn generator_examples() {
        let p = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
        let f = generate_w(&p, 1, 0, 7, Profile::SaturatingUniform).unwrap();
        assert_eq!(f.len(), 1);
        assert_abs_diff_eq!(f.get(&MultiIndex::from([0])).norm(), 1.0, epsilon = 1e-15);

        let a = ClassParamsA::new(1.0, 1.0).unwrap();
        let f = generate_a(&a, 1, 0, 7, Profile::SaturatingSpiky).unwrap();
        assert_abs_diff_eq!(f.get(&MultiIndex::from([0])).norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn saturating_layers_meet_bound() {
        let p = ClassParamsW::new(1.5, 0.7, 0.5).unwrap();
        for profile in [Profile::SaturatingUniform, Profile::SaturatingSpiky] {
            let f = generate_w(&p, 2, 5, 11, profile).unwrap();
            for (j, part) in layers(&f) {
                let norm = a_beta_norm(&part, p.beta).unwrap();
                assert!((norm - p.layer_bound(j, 2)).abs() <= 1e-12 * p.layer_bound(j, 2).max(1.0));
            }
            assert_eq!(layers(&f).len(), 6);
        }
        let q = ClassParamsA::new(1.0, 0.5).unwrap();
        let f = generate_a(&q, 2, 4, 11, Profile::SaturatingUniform).unwrap();
        for (j, part) in shells(&f) {
            assert!((a_beta_norm(&part, 0.5).unwrap() - q.shell_bound(j)).abs() <= 1e-12);
        }
    }

    #[test]
    fn generators_deterministic() {
        let p = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
        let a = generate_w(&p, 2, 4, 99, Profile::RandomSparse).unwrap();
        let b = generate_w(&p, 2, 4, 99, Profile::RandomSparse).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_w(&p, 2, 4, 100, Profile::RandomSparse).unwrap());
    }

    #[test]
    fn generator_soundness_over_seeds() {
        let w = ClassParamsW::new(1.0, 0.5, 0.5).unwrap();
        let a = ClassParamsA::new(1.5, 0.25).unwrap();
        for seed in 0..100 {
            for profile in [Profile::SaturatingUniform, Profile::SaturatingSpiky, Profile::RandomSparse] {
                let d = 1 + (seed as usize % 2);
                assert!(membership_w(&generate_w(&w, d, 4, seed, profile).unwrap(), &w).is_member());
                assert!(membership_a(&generate_a(&a, d, 3, seed, profile).unwrap(), &a).is_member());
            }
        }
    }

    proptest! {
        #[test]
        fn beta_monotone(mags in proptest::collection::vec(0.0f64..2.0, 1..20), b1 in 0.05f64..1.0, db in 0.0f64..1.0) {
            let b2 = (b1 + db).min(1.0);
            let f = SparseCoefFn::from_real(1, mags.iter().enumerate().map(|(i, &m)| (MultiIndex::from([i as i64]), m))).unwrap();
            let n1 = a_beta_norm(&f, b1).unwrap();
            let n2 = a_beta_norm(&f, b2).unwrap();
            prop_assert!(n1 >= n2 * (1.0 - 1e-12));
        }

        #[test]
        fn layer_partition(terms in proptest::collection::vec((proptest::collection::vec(-20i64..20, 2), -1.0f64..1.0), 1..25)) {
            let mut f = SparseCoefFn::zero(2);
            for (k, c) in terms {
                f.add_term(MultiIndex::new(k), Complex64::new(c, -c)).unwrap();
            }
            let mut total = SparseCoefFn::zero(2);
            for part in layers(&f).values() {
                total = total.add(part).unwrap();
            }
            prop_assert_eq!(total, f);
        }
    }
}
