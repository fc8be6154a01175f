use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::index_sets::IndexSet;
use crate::linalg::CMatrix;
use crate::trig::{inner_unchecked, FunctionSystem, PointSet, Trigonometric};

/// Columns with discrete norm below this are treated as zero.
pub const ZERO_COLUMN: f64 = 1e-14;

/// The restriction 𝒟_N(Ω_m) of a finite system to a point set: an m×N
/// evaluation table in the Hilbert space L₂(Ω_m, μ_m).
#[derive(Clone, Debug)]
pub struct DictionaryOnPoints {
    indices: IndexSet,
    xi: Option<PointSet>,
    m: usize,
    // column-major, column i holds ψ_{k_i}(ξ^1..ξ^m)
    values: Vec<Complex64>,
    norms: Vec<f64>,
}

impl DictionaryOnPoints {
    /// Trigonometric columns e^{i(k,ξ^j)} for k in `indices`.
    pub fn new(indices: IndexSet, xi: PointSet) -> Result<Self> {
        Self::from_system(&Trigonometric { dim: indices.dim() }, indices, xi)
    }

    pub fn from_system(system: &dyn FunctionSystem, indices: IndexSet, xi: PointSet) -> Result<Self> {
        if indices.dim() != xi.dim() || system.dim() != xi.dim() {
            return Err(Error::DimensionMismatch {
                expected: xi.dim(),
                got: indices.dim(),
            });
        }
        let m = xi.len();
        let mut values = vec![Complex64::default(); m * indices.len()];
        values
            .par_chunks_mut(m.max(1))
            .zip(indices.members().par_iter())
            .for_each(|(col, k)| {
                for (v, x) in col.iter_mut().zip(xi.iter()) {
                    *v = system.eval(k, x);
                }
            });
        Ok(Self::assemble(indices, Some(xi), m, values))
    }

    /// A dictionary given directly by its sampled columns. `labels` names
    /// the columns and fixes their order.
    pub fn from_columns(labels: IndexSet, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: columns.len(),
            });
        }
        let m = columns.first().map(Vec::len).unwrap_or(0);
        if m == 0 {
            return Err(invalid("columns must have at least one sample"));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        let values = columns.into_iter().flatten().collect();
        Ok(Self::assemble(labels, None, m, values))
    }

    fn assemble(indices: IndexSet, xi: Option<PointSet>, m: usize, values: Vec<Complex64>) -> Self {
        let norms = values
            .chunks(m.max(1))
            .map(|c| inner_unchecked(c, c).re.sqrt())
            .collect();
        DictionaryOnPoints {
            indices,
            xi,
            m,
            values,
            norms,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn points(&self) -> Option<&PointSet> {
        self.xi.as_ref()
    }

    pub fn column(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Discrete L₂(μ_m) norm of column i.
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn is_zero_column(&self, i: usize) -> bool {
        self.norms[i] < ZERO_COLUMN
    }

    /// Largest |ψ_k(ξ^j)| over the table.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ⟨r, g_i⟩ for every column, unnormalized.
    pub fn correlations(&self, r: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(r.len(), self.m);
        self.values
            .par_chunks(self.m)
            .map(|col| inner_unchecked(r, col))
            .collect()
    }

    /// The N×N Gram matrix G_{kl} = ⟨ψ_l, ψ_k⟩ in L₂(μ_m), i.e. (1/m) A^H A.
    pub fn gram(&self) -> CMatrix {
        let n = self.n();
        let entries: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| (0..n).map(|l| inner_unchecked(self.column(l), self.column(k))).collect())
            .collect();
        CMatrix::from_fn(n, n, |k, l| entries[k][l])
    }

    /// The m×|cols| matrix of the selected columns.
    pub fn submatrix(&self, cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.m, cols.len(), |j, c| self.column(cols[c])[j])
    }

    /// Σ c_i g_i evaluated at the points.
    pub fn synthesize(&self, terms: &[(usize, Complex64)]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.m];
        for &(i, c) in terms {
            for (o, v) in out.iter_mut().zip(self.column(i)) {
                *o += c * v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::{full_cube, MultiIndex};

    #[test]
    fn trig_columns_are_unimodular() {
        let xi = PointSet::new(2, vec![vec![0.3, 1.0], vec![2.0, 5.5], vec![4.4, 0.1]]).unwrap();
        let dict = DictionaryOnPoints::new(full_cube(2, 2).unwrap(), xi).unwrap();
        assert_eq!((dict.m(), dict.n()), (3, 25));
        assert!((dict.max_abs() - 1.0).abs() < 1e-15);
        for i in 0..dict.n() {
            assert!((dict.norm(i) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_is_identity_on_exact_grid() {
        let xi = PointSet::equispaced(7, 1).unwrap();
        let dict = DictionaryOnPoints::new(full_cube(3, 1).unwrap(), xi).unwrap();
        let g = dict.gram();
        assert!((g - CMatrix::identity(7, 7)).norm() < 1e-13);
    }

    #[test]
    fn from_columns_validation() {
        let labels = IndexSet::from_members(1, vec![MultiIndex::from([0]), MultiIndex::from([1])]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert!(DictionaryOnPoints::from_columns(labels.clone(), vec![vec![one]]).is_err());
        assert!(DictionaryOnPoints::from_columns(labels.clone(), vec![vec![one], vec![one, one]]).is_err());
        let d = DictionaryOnPoints::from_columns(labels, vec![vec![one, one], vec![Complex64::default(); 2]]).unwrap();
        assert!(d.is_zero_column(1) && !d.is_zero_column(0));
    }
}
