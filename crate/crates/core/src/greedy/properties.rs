use itertools::Itertools;
use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::DictionaryOnPoints;
use crate::discretization::binomial;
use crate::error::{invalid, Result};
use crate::index_sets::{full_cube, IndexSet, MultiIndex};
use crate::linalg::{hermitian_extremes, hermitian_pinv, CMatrix, RANK_TOLERANCE};
use crate::rng;
use crate::trig::{lp_norm_mu, QuadratureGrid, SparseCoefFn};

/// Where the L₂ Gram matrix of a system comes from.
#[derive(Clone, Copy, Debug)]
pub enum GramSource<'a> {
    /// The trigonometric system in L₂(μ), orthonormal by Parseval.
    Exact(&'a IndexSet),
    /// Sampled columns in L₂(μ_m).
    Discrete(&'a DictionaryOnPoints),
}

impl GramSource<'_> {
    pub fn len(&self) -> usize {
        match self {
            GramSource::Exact(s) => s.len(),
            GramSource::Discrete(d) => d.n(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gram(&self) -> CMatrix {
        match self {
            GramSource::Exact(s) => CMatrix::identity(s.len(), s.len()),
            GramSource::Discrete(d) => d.gram(),
        }
    }
}

fn block(g: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |a, b| g[(rows[a], cols[b])])
}

/// sup over f ∈ span A of ‖f‖ / dist(f, span J), from the Gram matrix.
/// None when every column of A is zero; +∞ when some f ∈ span A lies in
/// span J.
fn up_ratio(g: &CMatrix, a: &[usize], j: &[usize]) -> Option<f64> {
    let gaa = block(g, a, a);
    let eig = gaa.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..a.len())
        .filter(|&i| eig.eigenvalues[i] > RANK_TOLERANCE * lmax.max(f64::MIN_POSITIVE))
        .collect();
    if keep.is_empty() {
        return None;
    }
    if j.is_empty() {
        return Some(1.0);
    }
    let gaj = block(g, a, j);
    let schur = &gaa - &gaj * hermitian_pinv(&block(g, j, j)) * gaj.adjoint();
    // whiten on the range of G_AA: ‖f‖² = cᴴG_AA c, dist² = cᴴ S c
    let w = CMatrix::from_fn(a.len(), keep.len(), |r, c| {
        eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
    });
    let (lo, _) = hermitian_extremes(&(w.adjoint() * schur * &w));
    if lo <= 1e-12 {
        Some(f64::INFINITY)
    } else {
        Some(1.0 / lo.sqrt())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UpOptions {
    /// Largest number of (A, J) pairs scanned exhaustively.
    pub pair_cap: u128,
    /// Pairs drawn per |A| in sampled mode.
    pub samples: usize,
    pub seed: u64,
}

impl Default for UpOptions {
    fn default() -> Self {
        UpOptions {
            pair_cap: 200_000,
            samples: 2_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpEstimate {
    /// Largest ratio found; +∞ when some u-sparse f lies in a disjoint span.
    pub value: f64,
    pub sampled: bool,
    pub pairs_checked: usize,
}

impl UpEstimate {
    pub fn is_unbounded(&self) -> bool {
        self.value.is_infinite()
    }
}

/// The (u, D) unconditionality constant U: the largest ‖f‖/dist(f, V_J) over
/// disjoint A, J with |A| ≤ u, |A| + |J| ≤ D and f ∈ span A. For each |A|
/// only the largest admissible |J| is scanned since growing J only shrinks
/// the distance. Switches to random pairs when the exhaustive count exceeds
/// the cap.
pub fn up_constant(source: GramSource<'_>, u: usize, d_cap: usize, opts: UpOptions) -> Result<UpEstimate> {
    let n = source.len();
    if u == 0 || d_cap < u {
        return Err(invalid(format!("need 1 ≤ u ≤ D, got u = {u}, D = {d_cap}")));
    }
    if n == 0 {
        return Err(invalid("empty system"));
    }
    let g = source.gram();
    let sizes: Vec<(usize, usize)> = (1..=u.min(n)).map(|a| (a, (d_cap - a).min(n - a))).collect();
    let total = sizes.iter().try_fold(0u128, |acc, &(a, j)| {
        acc.checked_add(binomial(n, a)?.checked_mul(binomial(n - a, j)?)?)
    });
    let sampled = total.is_none_or(|t| t > opts.pair_cap);

    let pairs: Vec<(Vec<usize>, Vec<usize>)> = if sampled {
        let mut r = rng::seeded(opts.seed);
        let mut out = Vec::new();
        for &(a, j) in &sizes {
            for _ in 0..opts.samples {
                let mut pick = sample_indices(&mut r, n, a + j).into_vec();
                pick.shuffle(&mut r);
                let (mut sa, mut sj) = (pick[..a].to_vec(), pick[a..].to_vec());
                sa.sort_unstable();
                sj.sort_unstable();
                out.push((sa, sj));
            }
        }
        out
    } else {
        sizes
            .iter()
            .flat_map(|&(a, j)| {
                (0..n).combinations(a).flat_map(move |sa| {
                    let rest: Vec<usize> = (0..n).filter(|i| !sa.contains(i)).collect();
                    rest.into_iter().combinations(j).map(move |sj| (sa.clone(), sj))
                })
            })
            .collect()
    };
    let value = pairs
        .par_iter()
        .filter_map(|(a, j)| up_ratio(&g, a, j))
        .reduce(|| 0.0, f64::max);
    Ok(UpEstimate {
        value,
        sampled,
        pairs_checked: pairs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NikolskiiReport {
    pub worst_ratio: f64,
    /// u^{1/2 − 1/p}.
    pub bound: f64,
    pub trials: usize,
    /// The grid is too coarse for exact L_p norms of the drawn polynomials.
    pub coarse: bool,
}

/// u^{1/2 − 1/p}, the sparse Nikol'skii constant of the trigonometric system.
pub fn nikolskii_bound(u: usize, p: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    (u as f64).powf(0.5 - inv)
}

/// Worst ‖f‖_p/‖f‖₂ over random u-sparse trigonometric polynomials with
/// frequencies in [−M, M]^d, M = ⌊(G − 1)/4⌋, and complex Gaussian
/// coefficients. ‖f‖₂ comes from Parseval, ‖f‖_p from the grid.
pub fn nikolskii_check(u: usize, p: f64, trials: usize, seed: u64, grid: &QuadratureGrid) -> Result<NikolskiiReport> {
    if !(p >= 2.0) {
        return Err(invalid(format!("p must lie in [2, ∞], got {p}")));
    }
    if u == 0 || trials == 0 {
        return Err(invalid("u and trials must be positive"));
    }
    let max_freq = ((grid.nodes_per_axis() - 1) / 4) as u64;
    let cube = full_cube(max_freq, grid.dim())?;
    if cube.len() < u {
        return Err(invalid(format!("grid of {} nodes per axis is too small for {u} frequencies", grid.nodes_per_axis())));
    }
    let ratios: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, bool)> {
            let mut r = rng::seeded(rng::derive_seed(seed, t as u64));
            let f = SparseCoefFn::from_pairs(
                grid.dim(),
                sample_indices(&mut r, cube.len(), u)
                    .into_iter()
                    .map(|i| (cube.members()[i].clone(), rng::complex_gaussian(&mut r)))
                    .collect::<Vec<_>>(),
            )?;
            let norm = lp_norm_mu(&f, p, grid)?;
            Ok((norm.value / f.l2_coef_norm(), norm.coarse))
        })
        .collect::<Result<_>>()?;
    Ok(NikolskiiReport {
        worst_ratio: ratios.iter().map(|r| r.0).fold(0.0, f64::max),
        bound: nikolskii_bound(u, p),
        trials,
        coarse: ratios.iter().any(|r| r.1),
    })
}

/// ‖f‖_p/‖f‖₂ for the Dirichlet-type f = Σ_{k=1}^{u} e^{ikx₁}, the equality
/// case at p = ∞.
pub fn dirichlet_ratio(u: usize, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    let d = grid.dim();
    let f = SparseCoefFn::from_pairs(
        d,
        (1..=u as i64).map(|k| {
            let mut coords = vec![0; d];
            coords[0] = k;
            (MultiIndex::new(coords), Complex64::new(1.0, 0.0))
        }),
    )?;
    Ok(lp_norm_mu(&f, p, grid)?.value / f.l2_coef_norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RieszBessel {
    /// min ‖Σa_jφ_j‖/‖a‖ over trials.
    pub r1_emp: f64,
    /// max ‖Σa_jφ_j‖/‖a‖ over trials.
    pub r2_emp: f64,
    /// max ‖a‖²/‖Σa_jφ_j‖² over trials.
    pub k_emp: f64,
    /// √λ_min and √λ_max of the Gram matrix, the attained extremes.
    pub r1_spec: f64,
    pub r2_spec: f64,
}

/// Empirical Riesz and Bessel constants from random complex Gaussian
/// coefficient vectors, alongside the exact extremes from the Gram spectrum.
pub fn riesz_bessel_check(source: GramSource<'_>, trials: usize, seed: u64) -> Result<RieszBessel> {
    let n = source.len();
    if n == 0 || trials == 0 {
        return Err(invalid("system and trials must be nonempty"));
    }
    let g = source.gram();
    let mut r = rng::seeded(seed);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..trials {
        let a = crate::linalg::CVector::from_fn(n, |_, _| rng::complex_gaussian(&mut r));
        let q = (a.adjoint() * &g * &a)[(0, 0)].re / a.norm_squared();
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let (slo, shi) = hermitian_extremes(&g);
    Ok(RieszBessel {
        r1_emp: lo.max(0.0).sqrt(),
        r2_emp: hi.sqrt(),
        k_emp: 1.0 / lo,
        r1_spec: slo.max(0.0).sqrt(),
        r2_spec: shi.max(0.0).sqrt(),
    })
}
