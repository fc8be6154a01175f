use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::index_sets::IndexSet;
use crate::trig::{sample, PointSet, QuadratureGrid, SparseCoefFn};

/// The measure whose L_p norm the relaxed greedy minimizes.
#[derive(Clone, Copy, Debug)]
pub enum GreedyMeasure<'a> {
    /// Normalized Lebesgue measure μ, through the grid.
    Continuous(&'a QuadratureGrid),
    /// μ_ξ = (μ + μ_m)/2 for the point set ξ.
    Mixed(&'a QuadratureGrid, &'a PointSet),
}

impl GreedyMeasure<'_> {
    fn grid(&self) -> &QuadratureGrid {
        match self {
            GreedyMeasure::Continuous(g) | GreedyMeasure::Mixed(g, _) => g,
        }
    }

    fn points(&self) -> Option<&PointSet> {
        match self {
            GreedyMeasure::Continuous(_) => None,
            GreedyMeasure::Mixed(_, xi) => Some(xi),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxedGreedy {
    pub approximant: SparseCoefFn,
    /// ‖f − G_k‖_p for k = 0..=v.
    pub errors: Vec<f64>,
    /// The scale ‖f‖_{A₁} of the symmetrized dictionary {±1, ±i}·scale·ψ_k.
    pub scale: f64,
}

/// Node values on the grid followed by values at the points, with the
/// weights of each part of the measure.
struct Nodes {
    grid_len: usize,
    grid_weight: f64,
    point_weight: f64,
}

impl Nodes {
    fn weight(&self, i: usize) -> f64 {
        if i < self.grid_len {
            self.grid_weight
        } else {
            self.point_weight
        }
    }

    fn norm_pow(&self, v: &[Complex64], p: f64) -> f64 {
        v.iter().enumerate().map(|(i, z)| self.weight(i) * z.norm().powf(p)).sum()
    }

    fn norm(&self, v: &[Complex64], p: f64) -> f64 {
        self.norm_pow(v, p).powf(1.0 / p)
    }
}

const GOLDEN_STEPS: usize = 80;

/// Relaxed greedy approximation of f in L_p over the dictionary
/// {±1, ±i}·‖f‖_{A₁}·ψ_k, k ∈ `dictionary`:
/// G_k = (1 − λ_k)G_{k−1} + λ_k φ_k, with φ_k maximizing the real part of
/// the norming functional of f − G_{k−1} and λ_k ∈ [0, 1] by line search.
/// Each step adds at most one new term.
pub fn greedy_a1_lp(
    f: &SparseCoefFn,
    dictionary: &IndexSet,
    v: usize,
    p: f64,
    measure: GreedyMeasure<'_>,
) -> Result<RelaxedGreedy> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must lie in (1, ∞), got {p}")));
    }
    let grid = measure.grid();
    if f.dim() != dictionary.dim() || grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: dictionary.dim(),
        });
    }
    if dictionary.is_empty() {
        return Err(invalid("empty dictionary"));
    }
    let scale = f.l1_norm();

    let mut target = grid.values(f)?;
    let grid_len = target.len();
    let (grid_weight, point_weight) = match measure.points() {
        None => (1.0 / grid_len as f64, 0.0),
        Some(xi) => {
            if xi.dim() != f.dim() || xi.is_empty() {
                return Err(invalid("point set must be nonempty and share the dimension"));
            }
            target.extend(sample(f, xi)?);
            (0.5 / grid_len as f64, 0.5 / xi.len() as f64)
        }
    };
    let nodes = Nodes {
        grid_len,
        grid_weight,
        point_weight,
    };
    let basis = |k: &crate::index_sets::MultiIndex| -> Vec<Complex64> {
        let mut col = grid.basis_values(k);
        if let Some(xi) = measure.points() {
            let single = SparseCoefFn::from_pairs(k.dim(), [(k.clone(), Complex64::new(1.0, 0.0))])
                .expect("index matches its own dimension");
            col.extend(sample(&single, xi).expect("dimensions checked"));
        }
        col
    };

    let mut approx = vec![Complex64::default(); target.len()];
    let mut coefs = SparseCoefFn::zero(f.dim());
    let mut errors = vec![nodes.norm(&target, p)];
    if scale == 0.0 {
        errors.resize(v + 1, 0.0);
        return Ok(RelaxedGreedy {
            approximant: coefs,
            errors,
            scale,
        });
    }

    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    for _ in 0..v {
        let residual: Vec<Complex64> = target.iter().zip(&approx).map(|(t, a)| t - a).collect();
        // norming direction |r|^{p−2} r, weighted by the measure
        let dir: Vec<Complex64> = residual
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mag = r.norm();
                let w = if mag == 0.0 { 0.0 } else { mag.powf(p - 2.0) };
                r * (w * nodes.weight(i))
            })
            .collect();
        let corr = correlations(&dir, grid, measure.points(), dictionary);
        // Re⟨dir, s ψ_k⟩ = Re(conj(s)·corr_k); first index and phase win ties
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for (i, c) in corr.iter().enumerate() {
            for (j, s) in phases.iter().enumerate() {
                let val = (s.conj() * c).re;
                if val > best.2 {
                    best = (i, j, val);
                }
            }
        }
        let k = &dictionary.members()[best.0];
        let coef = phases[best.1] * scale;
        let phi: Vec<Complex64> = basis(k).into_iter().map(|b| b * coef).collect();
        // f − G(λ) = r + λ(G − φ)
        let delta: Vec<Complex64> = approx.iter().zip(&phi).map(|(a, b)| a - b).collect();
        let lambda = line_search(&residual, &delta, p, &nodes);
        for (a, b) in approx.iter_mut().zip(&phi) {
            *a = *a * (1.0 - lambda) + b * lambda;
        }
        coefs = coefs.scale(Complex64::new(1.0 - lambda, 0.0));
        coefs.add_term(k.clone(), coef * lambda)?;
        let res: Vec<Complex64> = target.iter().zip(&approx).map(|(t, a)| t - a).collect();
        errors.push(nodes.norm(&res, p));
    }
    Ok(RelaxedGreedy {
        approximant: coefs,
        errors,
        scale,
    })
}

/// ⟨dir, ψ_k⟩ summed over grid nodes and points, where `dir` already carries
/// the node weights.
fn correlations(dir: &[Complex64], grid: &QuadratureGrid, xi: Option<&PointSet>, dictionary: &IndexSet) -> Vec<Complex64> {
    let grid_len = grid.node_count();
    let n = grid_len as f64;
    // fourier_coefficients divides by the node count
    let mut corr: Vec<Complex64> = grid
        .fourier_coefficients(&dir[..grid_len], dictionary.members())
        .into_iter()
        .map(|c| c * n)
        .collect();
    if let Some(xi) = xi {
        let tail = &dir[grid_len..];
        let extra: Vec<Complex64> = dictionary
            .members()
            .par_iter()
            .map(|k| {
                xi.iter()
                    .zip(tail)
                    .map(|(x, d)| {
                        let phase: f64 = k.coords().iter().zip(x).map(|(&kj, xj)| kj as f64 * xj).sum();
                        d * Complex64::cis(-phase)
                    })
                    .sum()
            })
            .collect();
        for (c, e) in corr.iter_mut().zip(extra) {
            *c += e;
        }
    }
    corr
}

/// argmin over λ ∈ [0, 1] of ‖r + λ·delta‖_p, closed form at p = 2 and
/// golden section otherwise (the objective is convex).
fn line_search(r: &[Complex64], delta: &[Complex64], p: f64, nodes: &Nodes) -> f64 {
    if p == 2.0 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (a, b)) in r.iter().zip(delta).enumerate() {
            let w = nodes.weight(i);
            num += w * (a * b.conj()).re;
            den += w * b.norm_sqr();
        }
        return if den == 0.0 { 0.0 } else { (-num / den).clamp(0.0, 1.0) };
    }
    let phi = |lambda: f64| -> f64 {
        r.iter()
            .zip(delta)
            .enumerate()
            .map(|(i, (a, b))| nodes.weight(i) * (a + b * lambda).norm().powf(p))
            .sum()
    };
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_golden * (hi - lo);
    let mut x2 = lo + inv_golden * (hi - lo);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_golden * (hi - lo);
            f1 = phi(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_golden * (hi - lo);
            f2 = phi(x2);
        }
    }
    let mid = (lo + hi) / 2.0;
    // the endpoints are candidates too
    [0.0, mid, 1.0]
        .into_iter()
        .map(|l| (l, phi(l)))
        .fold((0.0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc })
        .0
}
