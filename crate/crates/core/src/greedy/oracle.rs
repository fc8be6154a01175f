use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;

use super::DictionaryOnPoints;
use crate::discretization::binomial;
use crate::error::{invalid, Error, Result};
use crate::index_sets::{IndexSet, MultiIndex};
use crate::linalg::{hermitian_pinv, lstsq, CMatrix, CVector};
use crate::trig::{inner_unchecked, QuadratureGrid, SparseCoefFn};

/// Largest number of v-subsets the brute-force oracles enumerate.
pub const BRUTE_FORCE_CAP: u128 = 200_000;

#[derive(Clone, Debug)]
pub struct BestVTerm {
    /// Column positions of the optimal subset, ascending.
    pub subset: Vec<usize>,
    pub coefficients: Vec<Complex64>,
    /// ‖f₀ − P_subset f₀‖ in L₂(μ_m), from the explicit residual.
    pub error: f64,
    pub subsets_checked: usize,
}

fn check_subset_count(n: usize, v: usize, what: &'static str, hint: &'static str) -> Result<()> {
    let count = binomial(n, v).unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            what,
            count,
            cap: BRUTE_FORCE_CAP,
            hint,
        });
    }
    Ok(())
}

/// σ_v(f₀, 𝒟_N(Ω_m))_{L₂(μ_m)} by exhaustive search over v-subsets. Among
/// subsets with equal error the lexicographically first wins.
pub fn best_v_term_discrete(f0: &[Complex64], dict: &DictionaryOnPoints, v: usize) -> Result<BestVTerm> {
    let n = dict.n();
    if f0.len() != dict.m() {
        return Err(Error::DimensionMismatch {
            expected: dict.m(),
            got: f0.len(),
        });
    }
    if v == 0 || v > n {
        return Err(invalid(format!("v = {v} must lie in 1..={n}")));
    }
    check_subset_count(n, v, "best v-term enumeration", "use womp")?;

    let g = dict.gram();
    let b: Vec<Complex64> = dict.correlations(f0);
    let f2 = inner_unchecked(f0, f0).re;
    let subsets: Vec<Vec<usize>> = (0..n).combinations(v).collect();
    // squared error f2 − b_Sᴴ G_S⁺ b_S per subset, in enumeration order
    let errs: Vec<f64> = subsets
        .par_iter()
        .map(|s| {
            let gs = CMatrix::from_fn(v, v, |a, c| g[(s[a], s[c])]);
            let bs = CVector::from_iterator(v, s.iter().map(|&i| b[i]));
            let proj = (bs.adjoint() * hermitian_pinv(&gs) * &bs)[(0, 0)].re;
            f2 - proj
        })
        .collect();
    let best = errs
        .iter()
        .enumerate()
        .fold(0, |best, (i, &e)| if e < errs[best] { i } else { best });

    let subset = subsets[best].clone();
    let a = dict.submatrix(&subset);
    let rhs = CVector::from_column_slice(f0);
    let (x, _) = lstsq(&a, &rhs);
    let res: Vec<Complex64> = (rhs - &a * &x).iter().copied().collect();
    Ok(BestVTerm {
        subset,
        coefficients: x.iter().copied().collect(),
        error: inner_unchecked(&res, &res).re.max(0.0).sqrt(),
        subsets_checked: subsets.len(),
    })
}

/// The v largest coefficients of f (ties to the lexicographically first
/// index) and the ℓ₁ norm of the rest.
pub fn threshold_v(f: &SparseCoefFn, v: usize) -> (SparseCoefFn, f64) {
    let mut terms: Vec<(&MultiIndex, &Complex64)> = f.iter().collect();
    // stable sort keeps lexicographic order among equal magnitudes
    terms.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    let keep = v.min(terms.len());
    let kept = SparseCoefFn::from_pairs(f.dim(), terms[..keep].iter().map(|(k, c)| ((*k).clone(), **c)))
        .expect("terms share the dimension of f");
    let tail = terms[keep..].iter().map(|(_, c)| c.norm()).sum();
    (kept, tail)
}

/// Bounds on σ_v(f, 𝒯(dictionary))_∞.
#[derive(Clone, Debug)]
pub struct SupNormBounds {
    /// A valid lower bound: for each subset, a probability-weighted least
    /// squares error on the grid never exceeds the minimax error.
    pub lower: f64,
    /// The smallest grid maximum of an iterate. Below the true sup-norm
    /// error of that iterate only by grid resolution.
    pub upper: f64,
    pub best_subset: Vec<usize>,
    pub subsets_checked: usize,
}

/// Lawson iterations per subset.
pub const LAWSON_ITERATIONS: usize = 200;

/// Bounds σ_v in sup norm by running Lawson's weighted least squares on
/// every v-subset of `dictionary`, evaluated on `grid`.
pub fn sigma_v_sup(f: &SparseCoefFn, dictionary: &IndexSet, v: usize, grid: &QuadratureGrid) -> Result<SupNormBounds> {
    let n = dictionary.len();
    if f.dim() != dictionary.dim() || grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: dictionary.dim(),
        });
    }
    if v == 0 || v > n {
        return Err(invalid(format!("v = {v} must lie in 1..={n}")));
    }
    check_subset_count(n, v, "sup-norm best v-term enumeration", "lower v or the dictionary size")?;

    let target = grid.values(f)?;
    let columns: Vec<Vec<Complex64>> = dictionary.iter().map(|k| grid.basis_values(k)).collect();
    let subsets: Vec<Vec<usize>> = (0..n).combinations(v).collect();
    let bounds: Vec<(f64, f64)> = subsets
        .par_iter()
        .map(|s| lawson(&target, s.iter().map(|&i| columns[i].as_slice()).collect()))
        .collect();
    let lower = bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let (best, upper) = bounds
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, b)| if b.1 < acc.1 { (i, b.1) } else { acc });
    Ok(SupNormBounds {
        lower,
        upper,
        best_subset: subsets[best].clone(),
        subsets_checked: subsets.len(),
    })
}

/// (best weighted-L₂ lower bound, best grid max) over Lawson iterations.
fn lawson(target: &[Complex64], cols: Vec<&[Complex64]>) -> (f64, f64) {
    let g = target.len();
    let mut w = vec![1.0 / g as f64; g];
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    for _ in 0..LAWSON_ITERATIONS {
        let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let a = CMatrix::from_fn(g, cols.len(), |r, c| cols[c][r] * sw[r]);
        let b = CVector::from_iterator(g, target.iter().zip(&sw).map(|(t, s)| t * s));
        let (x, _) = lstsq(&a, &b);
        let err: Vec<f64> = (0..g)
            .map(|r| {
                let approx: Complex64 = cols.iter().zip(x.iter()).map(|(col, c)| col[r] * c).sum();
                (target[r] - approx).norm()
            })
            .collect();
        let weighted: f64 = err.iter().zip(&w).map(|(e, wi)| wi * e * e).sum();
        lower = lower.max(weighted.sqrt());
        let emax = err.iter().copied().fold(0.0, f64::max);
        upper = upper.min(emax);
        if emax == 0.0 || upper - lower <= 1e-12 * upper {
            break;
        }
        let total: f64 = w.iter().zip(&err).map(|(wi, e)| wi * e).sum();
        if total == 0.0 {
            break;
        }
        for (wi, e) in w.iter_mut().zip(&err) {
            *wi *= e / total;
        }
    }
    (lower, upper)
}
