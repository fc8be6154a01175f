//! The trigonometric system 𝒯ᵈ = {e^{i(k,x)}} on [0, 2π)ᵈ.
//!
//! Three measures show up throughout the crate: the normalized Lebesgue
//! measure μ (realized on an equispaced [`QuadratureGrid`]), the uniform
//! probability measure μ_m on a [`PointSet`], and their average
//! μ_ξ = (μ + μ_m)/2.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::index_sets::{IndexSet, MultiIndex};

/// Evaluation interface for a system {ψ_k}. Only 𝒯ᵈ is implemented; the rest
/// of the crate uses the table-driven fast path for it.
pub trait FunctionSystem: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, k: &MultiIndex, x: &[f64]) -> Complex64;
}

#[derive(Clone, Copy, Debug)]
pub struct Trigonometric {
    pub dim: usize,
}

impl FunctionSystem for Trigonometric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, k: &MultiIndex, x: &[f64]) -> Complex64 {
        let phase: f64 = k
            .coords()
            .iter()
            .zip(x)
            .map(|(&kj, &xj)| kj as f64 * xj)
            .sum();
        Complex64::cis(phase)
    }
}

/// f = Σ a_k ψ_k with finitely many nonzero a_k.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCoefFn {
    dim: usize,
    coef: BTreeMap<MultiIndex, Complex64>,
}

impl SparseCoefFn {
    pub fn zero(dim: usize) -> Self {
        SparseCoefFn {
            dim,
            coef: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I, K>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, Complex64)>,
        K: Into<MultiIndex>,
    {
        let mut f = SparseCoefFn::zero(dim);
        for (k, c) in pairs {
            f.add_term(k.into(), c)?;
        }
        Ok(f)
    }

    /// Convenience for real coefficients.
    pub fn from_real<I, K>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<MultiIndex>,
    {
        Self::from_pairs(dim, pairs.into_iter().map(|(k, c)| (k, Complex64::new(c, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn get(&self, k: &MultiIndex) -> Complex64 {
        self.coef.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coef.iter()
    }

    /// Sets a_k, dropping the entry when c is exactly zero.
    pub fn set(&mut self, k: MultiIndex, c: Complex64) -> Result<()> {
        self.check(&k)?;
        if c == Complex64::default() {
            self.coef.remove(&k);
        } else {
            self.coef.insert(k, c);
        }
        Ok(())
    }

    pub fn add_term(&mut self, k: MultiIndex, c: Complex64) -> Result<()> {
        let cur = self.get(&k);
        self.set(k, cur + c)
    }

    fn check(&self, k: &MultiIndex) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: k.dim(),
            });
        }
        Ok(())
    }

    pub fn support(&self) -> IndexSet {
        IndexSet::from_members(self.dim, self.coef.keys().cloned().collect())
            .expect("map keys are unique and share the dimension")
    }

    pub fn max_freq(&self) -> u64 {
        self.coef.keys().map(MultiIndex::max_abs).max().unwrap_or(0)
    }

    /// Σ|a_k|, the A₁ norm of this representation.
    pub fn l1_norm(&self) -> f64 {
        self.coef.values().map(|c| c.norm()).sum()
    }

    /// (Σ|a_k|²)^{1/2}; equals ‖f‖_{L₂(μ)} by Parseval.
    pub fn l2_coef_norm(&self) -> f64 {
        self.coef.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn restrict(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> SparseCoefFn {
        SparseCoefFn {
            dim: self.dim,
            coef: self
                .coef
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> SparseCoefFn {
        let mut out = SparseCoefFn::zero(self.dim);
        for (k, c) in &self.coef {
            out.set(k.clone(), c * s).expect("same dimension");
        }
        out
    }

    pub fn add(&self, other: &SparseCoefFn) -> Result<SparseCoefFn> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.coef {
            out.add_term(k.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparseCoefFn) -> Result<SparseCoefFn> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Writes `k1,...,kd,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("k{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        wr.write_record(&header)?;
        for (k, c) in &self.coef {
            let mut row: Vec<String> = k.coords().iter().map(|x| x.to_string()).collect();
            row.push(c.re.to_string());
            row.push(c.im.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<SparseCoefFn> {
        let mut rd = csv::Reader::from_reader(r);
        let width = rd.headers()?.len();
        if width < 3 {
            return Err(invalid("coefficient CSV needs k columns plus re, im"));
        }
        let dim = width - 2;
        let mut f = SparseCoefFn::zero(dim);
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse_err = |msg: String| Error::Parse { line: i + 2, msg };
            let k = (0..dim)
                .map(|j| rec[j].trim().parse::<i64>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let re = rec[dim].trim().parse::<f64>().map_err(|e| parse_err(e.to_string()))?;
            let im = rec[dim + 1].trim().parse::<f64>().map_err(|e| parse_err(e.to_string()))?;
            f.add_term(MultiIndex::new(k), Complex64::new(re, im))?;
        }
        Ok(f)
    }
}

/// m points in [0, 2π)ᵈ in sampling order, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(invalid("point set must hold a positive multiple of d coordinates"));
        }
        if let Some(x) = coords.iter().find(|x| !(0.0..TAU).contains(*x)) {
            return Err(invalid(format!("coordinate {x} outside [0, 2π)")));
        }
        Ok(PointSet { dim, coords })
    }

    /// The tensor grid {2πj/G}ᵈ, last axis fastest.
    pub fn equispaced(nodes_per_axis: usize, dim: usize) -> Result<Self> {
        let grid = QuadratureGrid::new(nodes_per_axis, dim)?;
        let total = grid.node_count();
        let mut coords = Vec::with_capacity(total * dim);
        for flat in 0..total {
            coords.extend(grid.node(flat));
        }
        Self::from_flat(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Writes `x1,...,xd,value_re,value_im` rows.
    pub fn write_samples_csv<W: Write>(&self, values: &[Complex64], w: W) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
        header.push("value_re".into());
        header.push("value_im".into());
        wr.write_record(&header)?;
        for (p, v) in self.iter().zip(values) {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(v.re.to_string());
            row.push(v.im.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_samples_csv<R: Read>(r: R) -> Result<(PointSet, Vec<Complex64>)> {
        let mut rd = csv::Reader::from_reader(r);
        let width = rd.headers()?.len();
        if width < 3 {
            return Err(invalid("sample CSV needs coordinate columns plus value_re, value_im"));
        }
        let dim = width - 2;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let nums = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 2,
                        msg: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            coords.extend_from_slice(&nums[..dim]);
            values.push(Complex64::new(nums[dim], nums[dim + 1]));
        }
        Ok((PointSet::from_flat(dim, coords)?, values))
    }
}

/// Equispaced nodes 2πj/G per axis with equal weights G^{-d}. Integrates
/// |f|² exactly for frequencies in [-M, M]ᵈ once G ≥ 2M + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    nodes_per_axis: usize,
    dim: usize,
}

/// Default oversampling for p ∉ {2}: G = 4M + 1.
pub const DEFAULT_OVERSAMPLING: u64 = 4;

impl QuadratureGrid {
    pub fn new(nodes_per_axis: usize, dim: usize) -> Result<Self> {
        if nodes_per_axis == 0 || dim == 0 {
            return Err(invalid("grid needs at least one node and one axis"));
        }
        u32::try_from(dim)
            .ok()
            .and_then(|d| nodes_per_axis.checked_pow(d))
            .ok_or_else(|| invalid("grid node count overflows"))?;
        Ok(QuadratureGrid {
            nodes_per_axis,
            dim,
        })
    }

    /// G = factor·M + 1 nodes per axis.
    pub fn for_max_freq(max_freq: u64, dim: usize, factor: u64) -> Result<Self> {
        let g = max_freq
            .checked_mul(factor)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| invalid("grid size overflows"))?;
        Self::new(g as usize, dim)
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    /// Coordinates of node `flat` (row-major, last axis fastest).
    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let g = self.nodes_per_axis;
        let mut x = vec![0.0; self.dim];
        for axis in (0..self.dim).rev() {
            x[axis] = TAU * (flat % g) as f64 / g as f64;
            flat /= g;
        }
        x
    }

    /// Whether the grid integrates |f|^p exactly for trigonometric
    /// polynomials of degree `max_freq` (p = 2: G ≥ 2M+1; even p: G ≥ pM+1).
    pub fn is_exact_for(&self, max_freq: u64, p: f64) -> bool {
        let g = self.nodes_per_axis as u64;
        if p == 2.0 {
            g > 2 * max_freq
        } else if p.is_finite() && p.fract() == 0.0 && (p as u64).is_multiple_of(2) {
            g > (p as u64) * max_freq
        } else {
            g > DEFAULT_OVERSAMPLING * max_freq
        }
    }

    /// Values of f at every node via an inverse multidimensional DFT.
    /// Frequencies alias modulo G, which leaves node values exact.
    pub fn values(&self, f: &SparseCoefFn) -> Result<Vec<Complex64>> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: f.dim(),
            });
        }
        let g = self.nodes_per_axis as i64;
        let mut data = vec![Complex64::default(); self.node_count()];
        for (k, c) in f.iter() {
            let mut flat = 0usize;
            for &kj in k.coords() {
                flat = flat * g as usize + kj.rem_euclid(g) as usize;
            }
            data[flat] += c;
        }
        fft_nd(&mut data, self.nodes_per_axis, self.dim, FftDirection::Inverse);
        Ok(data)
    }

    /// Fourier coefficients ĥ(k) = G^{-d} Σ h(x) e^{-i(k,x)} for the
    /// requested frequencies, from node values h.
    pub fn fourier_coefficients(&self, values: &[Complex64], freqs: &[MultiIndex]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.node_count());
        let mut data = values.to_vec();
        fft_nd(&mut data, self.nodes_per_axis, self.dim, FftDirection::Forward);
        let g = self.nodes_per_axis as i64;
        let scale = 1.0 / self.node_count() as f64;
        freqs
            .iter()
            .map(|k| {
                let mut flat = 0usize;
                for &kj in k.coords() {
                    flat = flat * g as usize + kj.rem_euclid(g) as usize;
                }
                data[flat] * scale
            })
            .collect()
    }

    /// Values of the single exponential ψ_k at every node, exact modulo G.
    pub fn basis_values(&self, k: &MultiIndex) -> Vec<Complex64> {
        let g = self.nodes_per_axis;
        let roots: Vec<Complex64> = (0..g).map(|t| Complex64::cis(TAU * t as f64 / g as f64)).collect();
        let mut out = Vec::with_capacity(self.node_count());
        for flat in 0..self.node_count() {
            let mut rem = flat;
            let mut acc = 0usize;
            for axis in (0..self.dim).rev() {
                let j = rem % g;
                rem /= g;
                let kj = k.coords()[axis].rem_euclid(g as i64) as usize;
                acc = (acc + kj * j) % g;
            }
            out.push(roots[acc]);
        }
        out
    }
}

fn fft_nd(data: &mut [Complex64], g: usize, dim: usize, dir: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(g, dir);
    let total = data.len();
    let mut scratch = vec![Complex64::default(); g];
    for axis in 0..dim {
        let stride = g.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let block = stride * g;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for t in 0..g {
                    scratch[t] = data[base + offset + t * stride];
                }
                fft.process(&mut scratch);
                for t in 0..g {
                    data[base + offset + t * stride] = scratch[t];
                }
            }
        }
    }
}

/// Σ a_k e^{i(k,x)} by direct summation.
pub fn eval(f: &SparseCoefFn, x: &[f64]) -> Complex64 {
    let sys = Trigonometric { dim: f.dim() };
    f.iter().map(|(k, c)| c * sys.eval(k, x)).sum()
}

/// Table of e^{ikx} for k in [-max, max], indexed by k + max.
pub(crate) fn power_table(x: f64, max: u64) -> Vec<Complex64> {
    let max = max as usize;
    let mut pos = Vec::with_capacity(max + 1);
    let w = Complex64::cis(x);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..=max {
        // re-anchor periodically to keep the recurrence error at a few ulps
        if k % 32 == 0 {
            cur = Complex64::cis(k as f64 * x);
        }
        pos.push(cur);
        cur *= w;
    }
    let mut table = Vec::with_capacity(2 * max + 1);
    table.extend(pos[1..].iter().rev().map(|c| c.conj()));
    table.extend(pos);
    table
}

/// Evaluates f at every point of ξ.
pub fn sample(f: &SparseCoefFn, xi: &PointSet) -> Result<Vec<Complex64>> {
    if f.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: xi.dim(),
            got: f.dim(),
        });
    }
    let max = f.max_freq();
    let terms: Vec<(&MultiIndex, &Complex64)> = f.iter().collect();
    Ok((0..xi.len())
        .into_par_iter()
        .map(|j| {
            let tables: Vec<Vec<Complex64>> = xi.point(j).iter().map(|&x| power_table(x, max)).collect();
            terms
                .iter()
                .map(|(k, c)| {
                    k.coords()
                        .iter()
                        .zip(&tables)
                        .fold(**c, |acc, (&kj, t)| acc * t[(kj + max as i64) as usize])
                })
                .sum()
        })
        .collect())
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("p must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// (mean |v|^p)^{1/p}, or max |v| for p = ∞.
fn mean_power_norm(values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let m = values.len() as f64;
    if p == 2.0 {
        return (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / m).sqrt();
    }
    (values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / m).powf(1.0 / p)
}

/// A norm computed on a quadrature grid, with a flag when the grid is too
/// coarse for the exactness guarantee at this p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNorm {
    pub value: f64,
    pub coarse: bool,
}

/// ‖f‖_{L_p(μ)} on the grid: (G^{-d} Σ |f(x)|^p)^{1/p}, max for p = ∞.
pub fn lp_norm_mu(f: &SparseCoefFn, p: f64, grid: &QuadratureGrid) -> Result<GridNorm> {
    check_p(p)?;
    let values = grid.values(f)?;
    Ok(GridNorm {
        value: mean_power_norm(&values, p),
        coarse: !grid.is_exact_for(f.max_freq(), p),
    })
}

/// ((1/m) Σ |v_j|^p)^{1/p} for a sample vector.
pub fn lp_norm_discrete(values: &[Complex64], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.is_empty() {
        return Err(invalid("empty point set"));
    }
    Ok(mean_power_norm(values, p))
}

/// ‖f‖_{L_p(μ_ξ)} with μ_ξ = (μ + μ_m)/2.
pub fn lp_norm_mixed(f: &SparseCoefFn, p: f64, xi: &PointSet, grid: &QuadratureGrid) -> Result<GridNorm> {
    let cont = lp_norm_mu(f, p, grid)?;
    let disc = lp_norm_discrete(&sample(f, xi)?, p)?;
    let value = if p.is_infinite() {
        cont.value.max(disc)
    } else {
        ((cont.value.powf(p) + disc.powf(p)) / 2.0).powf(1.0 / p)
    };
    Ok(GridNorm {
        value,
        coarse: cont.coarse,
    })
}

/// ⟨u, v⟩ = (1/m) Σ u_j conj(v_j) in L₂(Ω_m, μ_m).
pub fn inner_product_discrete(u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.is_empty() {
        return Err(invalid("empty sample vectors"));
    }
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let s: Complex64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
    s / u.len() as f64
}
