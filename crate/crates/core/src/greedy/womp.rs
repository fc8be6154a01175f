use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use super::DictionaryOnPoints;
use crate::error::{invalid, Error, Result};
use crate::index_sets::MultiIndex;
use crate::linalg::{lstsq, CVector};
use crate::trig::{inner_unchecked, SparseCoefFn};

/// Which admissible column WOMP takes when several meet
/// |⟨f, g⟩| ≥ t·max|⟨f, g'⟩|. Ties go to the lexicographically first index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    /// The largest correlation, which is OMP for every t.
    #[default]
    Largest,
    /// The smallest correlation still meeting the threshold, the least
    /// favorable admissible choice.
    Weakest,
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "largest" | "greedy" => Ok(Selection::Largest),
            "weakest" => Ok(Selection::Weakest),
            other => Err(invalid(format!("unknown selection {other:?}"))),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Largest => "largest",
            Selection::Weakest => "weakest",
        })
    }
}

#[derive(Clone, Debug)]
pub struct WompTrace {
    /// Column picked at each iteration, in order.
    pub picks: Vec<usize>,
    /// ‖f_k‖ in L₂(μ_m) for k = 0..=K.
    pub residual_norms: Vec<f64>,
    /// Distinct picked columns, in first-pick order.
    pub support: Vec<usize>,
    /// Projection coefficients of f₀ against the unnormalized columns of
    /// `support`.
    pub coefficients: Vec<Complex64>,
    pub t: f64,
    /// Set when a pick was numerically in the span of earlier picks; the
    /// coefficients then come from minimum-norm least squares.
    pub rank_deficient: bool,
    /// f_K sampled on the points.
    pub residual: Vec<Complex64>,
}

impl WompTrace {
    pub fn iterations(&self) -> usize {
        self.picks.len()
    }

    pub fn final_residual_norm(&self) -> f64 {
        *self.residual_norms.last().expect("at least the initial norm")
    }

    pub fn picked_indices<'a>(&self, dict: &'a DictionaryOnPoints) -> Vec<&'a MultiIndex> {
        self.picks.iter().map(|&i| &dict.indices().members()[i]).collect()
    }

    /// Σ c_k ψ_k over the support, as a coefficient function.
    pub fn approximant(&self, dict: &DictionaryOnPoints) -> SparseCoefFn {
        let mut g = SparseCoefFn::zero(dict.indices().dim());
        for (&i, &c) in self.support.iter().zip(&self.coefficients) {
            g.add_term(dict.indices().members()[i].clone(), c)
                .expect("dictionary indices share the dimension");
        }
        g
    }

    /// Rows of (iteration, picked index, residual norm); iteration 0 is the
    /// input with an empty pick.
    pub fn write_csv<W: Write>(&self, dict: &DictionaryOnPoints, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["iteration", "picked_index", "residual_norm"])?;
        wr.write_record(["0", "", &self.residual_norms[0].to_string()])?;
        for (it, (&pick, norm)) in self.picks.iter().zip(&self.residual_norms[1..]).enumerate() {
            wr.write_record([
                (it + 1).to_string(),
                dict.indices().members()[pick].to_string(),
                norm.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Columns whose orthogonal remainder is below this fraction of their norm
/// are considered dependent on earlier picks.
const DEPENDENCE_TOLERANCE: f64 = 1e-10;

fn norm(v: &[Complex64]) -> f64 {
    inner_unchecked(v, v).re.max(0.0).sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Picks the admissible column per `selection`. `scores` are normalized
/// correlations |⟨f, g⟩|/‖g‖, or None for zero columns.
pub(crate) fn select(scores: &[Option<f64>], t: f64, selection: Selection) -> Option<usize> {
    let max = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let threshold = t * max;
    let admissible = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.filter(|&s| s >= threshold).map(|s| (i, s)));
    match selection {
        // strict comparisons keep the first index among equal scores
        Selection::Largest => admissible.fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((i, s)),
        }),
        Selection::Weakest => admissible.fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, b)) if b <= s => best,
            _ => Some((i, s)),
        }),
    }
    .map(|(i, _)| i)
}

/// Weak Orthogonal Matching Pursuit in L₂(Ω_m, μ_m) with constant weakness
/// t, largest-correlation selection. t = 1 is OMP.
pub fn womp(f0: &[Complex64], dict: &DictionaryOnPoints, t: f64, iterations: usize) -> Result<WompTrace> {
    womp_with(f0, dict, t, iterations, Selection::Largest)
}

pub fn womp_with(
    f0: &[Complex64],
    dict: &DictionaryOnPoints,
    t: f64,
    iterations: usize,
    selection: Selection,
) -> Result<WompTrace> {
    let m = dict.m();
    if f0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: f0.len(),
        });
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid(format!("weakness t must lie in (0, 1], got {t}")));
    }
    if iterations > m || iterations > dict.n() {
        return Err(invalid(format!(
            "{iterations} iterations exceed m = {m} or N = {}",
            dict.n()
        )));
    }

    let mut residual = f0.to_vec();
    let mut residual_norms = vec![norm(&residual)];
    let mut picks = Vec::with_capacity(iterations);
    let mut support: Vec<usize> = Vec::with_capacity(iterations);
    // orthonormal basis of the picked span and the triangular factor
    // A_support = Q·R, stored column by column
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(iterations);
    let mut r_cols: Vec<Vec<Complex64>> = Vec::with_capacity(iterations);
    let mut rank_deficient = false;

    for _ in 0..iterations {
        let corr = dict.correlations(&residual);
        let scores: Vec<Option<f64>> = corr
            .iter()
            .enumerate()
            .map(|(i, c)| (!dict.is_zero_column(i)).then(|| c.norm() / dict.norm(i)))
            .collect();
        let Some(pick) = select(&scores, t, selection) else {
            return Err(invalid("dictionary has no nonzero columns"));
        };
        picks.push(pick);

        if !support.contains(&pick) {
            support.push(pick);
            let col = dict.column(pick);
            let mut w = col.to_vec();
            let mut r = vec![Complex64::default(); basis.len() + 1];
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (j, q) in basis.iter().enumerate() {
                    let h = inner_unchecked(&w, q);
                    r[j] += h;
                    axpy(&mut w, -h, q);
                }
            }
            let nw = norm(&w);
            if nw <= DEPENDENCE_TOLERANCE * dict.norm(pick).max(f64::MIN_POSITIVE) {
                rank_deficient = true;
            } else {
                r[basis.len()] = Complex64::new(nw, 0.0);
                for x in w.iter_mut() {
                    *x /= nw;
                }
                let h = inner_unchecked(&residual, &w);
                axpy(&mut residual, -h, &w);
                basis.push(w);
                r_cols.push(r);
            }
        }
        residual_norms.push(norm(&residual));
    }

    let coefficients = if rank_deficient {
        let a = dict.submatrix(&support);
        let b = CVector::from_column_slice(f0);
        lstsq(&a, &b).0.iter().copied().collect()
    } else {
        // back substitution R c = Qᴴ f₀
        let z: Vec<Complex64> = basis.iter().map(|q| inner_unchecked(f0, q)).collect();
        let n = z.len();
        let mut c = vec![Complex64::default(); n];
        for i in (0..n).rev() {
            let mut acc = z[i];
            for (k, ck) in c.iter().enumerate().skip(i + 1) {
                acc -= r_cols[k][i] * ck;
            }
            c[i] = acc / r_cols[i][i];
        }
        c
    };

    Ok(WompTrace {
        picks,
        residual_norms,
        support,
        coefficients,
        t,
        rank_deficient,
        residual,
    })
}
