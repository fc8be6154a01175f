//! End-to-end sampling recovery and the layered constructive approximant.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classes::{generate_w, layers, ClassParamsW, Profile};
use crate::discretization::{binomial, draw_points, m_budget, verify_ud, MRule, UdMode, UdReport};
use crate::error::{invalid, Error, Result};
use crate::greedy::{
    best_v_term_discrete, greedy_a1_lp, threshold_v, womp_with, DictionaryOnPoints, GreedyMeasure, Selection,
    BRUTE_FORCE_CAP,
};
use crate::index_sets::{full_cube, hyperbolic_cross, IndexSet};
use crate::rng::derive_seed;
use crate::trig::{inner_unchecked, lp_norm_mu, sample, PointSet, QuadratureGrid, SparseCoefFn, DEFAULT_OVERSAMPLING};

/// Version of the recovery CSV layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MSpec {
    Rule(MRule),
    Explicit(usize),
}

impl fmt::Display for MSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MSpec::Rule(r) => r.fmt(f),
            MSpec::Explicit(_) => f.write_str("explicit"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Womp,
    OracleBv,
    Layered,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "womp" => Ok(Algorithm::Womp),
            "oracle_bv" => Ok(Algorithm::OracleBv),
            "layered" => Ok(Algorithm::Layered),
            other => Err(invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Womp => "womp",
            Algorithm::OracleBv => "oracle_bv",
            Algorithm::Layered => "layered",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DictionarySpec {
    /// The smallest hyperbolic cross with at least 4v frequencies.
    Auto,
    Cross(u32),
    Cube(u64),
    Explicit(IndexSet),
}

impl FromStr for DictionarySpec {
    type Err = Error;

    /// `auto`, `cross:N` or `cube:M`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "auto" {
            return Ok(DictionarySpec::Auto);
        }
        let parse_err = || invalid(format!("dictionary must be auto, cross:N or cube:M, got {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(parse_err)?;
        match kind {
            "cross" => Ok(DictionarySpec::Cross(arg.parse().map_err(|_| parse_err())?)),
            "cube" => Ok(DictionarySpec::Cube(arg.parse().map_err(|_| parse_err())?)),
            _ => Err(parse_err()),
        }
    }
}

impl fmt::Display for DictionarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictionarySpec::Auto => f.write_str("auto"),
            DictionarySpec::Cross(n) => write!(f, "cross:{n}"),
            DictionarySpec::Cube(m) => write!(f, "cube:{m}"),
            DictionarySpec::Explicit(s) => write!(f, "explicit:{}", s.len()),
        }
    }
}

/// Smallest n with |Q_n| ≥ 4v.
pub fn auto_cross_level(v: usize, d: usize) -> Result<u32> {
    let target = 4 * v;
    for n in 0..=crate::index_sets::MAX_LEVEL {
        if hyperbolic_cross(n, d)?.len() >= target {
            return Ok(n);
        }
    }
    Err(invalid(format!("no hyperbolic cross reaches {target} frequencies")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub d: usize,
    /// Target norm, p ∈ [2, ∞).
    pub p: f64,
    pub v: usize,
    pub m_rule: MSpec,
    pub c_user: f64,
    pub t: f64,
    /// Iteration multiplier: WOMP runs ⌈c·v⌉ steps, discretization is
    /// checked at u = ⌈(1 + c)v⌉.
    pub c: f64,
    pub algorithm: Algorithm,
    pub dictionary: DictionarySpec,
    pub seed: u64,
    pub selection: Selection,
    pub verify_ud: bool,
    /// Random subspaces per discretization check.
    pub ud_trials: usize,
    pub max_redraws: usize,
    /// Compute the brute-force σ_v when C(N, v) is within the cap.
    pub oracle: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            d: 1,
            p: 2.0,
            v: 4,
            m_rule: MSpec::Rule(MRule::Log3),
            c_user: 2.0,
            t: 1.0,
            c: 2.0,
            algorithm: Algorithm::Womp,
            dictionary: DictionarySpec::Auto,
            seed: 0,
            selection: Selection::Largest,
            verify_ud: true,
            ud_trials: 500,
            max_redraws: 10,
            oracle: true,
        }
    }
}

impl RecoveryConfig {
    pub fn p_star(&self) -> f64 {
        self.p.min(2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d must be at least 1"));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return Err(invalid(format!("p must lie in [2, ∞), got {}", self.p)));
        }
        if self.v == 0 {
            return Err(invalid("v must be at least 1"));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(invalid(format!("t must lie in (0, 1], got {}", self.t)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("c must be positive, got {}", self.c)));
        }
        if let DictionarySpec::Explicit(s) = &self.dictionary {
            if s.dim() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: s.dim(),
                });
            }
        }
        if self.verify_ud && self.ud_trials == 0 {
            return Err(invalid("ud_trials must be positive when verify_ud is set"));
        }
        Ok(())
    }

    pub fn resolve_dictionary(&self) -> Result<IndexSet> {
        match &self.dictionary {
            DictionarySpec::Auto => hyperbolic_cross(auto_cross_level(self.v, self.d)?, self.d),
            DictionarySpec::Cross(n) => hyperbolic_cross(*n, self.d),
            DictionarySpec::Cube(m) => full_cube(*m, self.d),
            DictionarySpec::Explicit(s) => Ok(s.clone()),
        }
    }

    pub fn resolve_m(&self) -> Result<usize> {
        match self.m_rule {
            MSpec::Rule(rule) => m_budget(self.v, rule, self.c_user),
            MSpec::Explicit(0) => Err(invalid("explicit m must be at least 1")),
            MSpec::Explicit(m) => Ok(m),
        }
    }

    /// ⌈c·v⌉.
    pub fn iterations(&self) -> usize {
        (self.c * self.v as f64).ceil() as usize
    }

    /// ⌈(1 + c)v⌉.
    pub fn ud_sparsity(&self) -> usize {
        ((1.0 + self.c) * self.v as f64).ceil() as usize
    }
}

/// Class parameters echoed into report rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassEcho {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl From<ClassParamsW> for ClassEcho {
    fn from(p: ClassParamsW) -> Self {
        ClassEcho {
            beta: p.beta,
            a: p.a,
            b: p.b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub config: RecoveryConfig,
    pub class: Option<ClassEcho>,
    pub m: usize,
    pub dictionary_size: usize,
    pub ud: Option<UdReport>,
    /// Point sets discarded for failing the discretization check.
    pub redraws: usize,
    pub err_lp: f64,
    pub err_l2_disc: f64,
    pub sigma_v: Option<f64>,
    pub iterations: usize,
    pub ms: u128,
}

impl RecoveryReport {
    pub const CSV_HEADER: [&'static str; 18] = [
        "schema_version",
        "algorithm",
        "d",
        "p",
        "beta",
        "a",
        "b",
        "v",
        "m",
        "m_rule",
        "t",
        "seed",
        "ud_pass",
        "err_lp",
        "err_l2_disc",
        "sigma_v",
        "iters",
        "ms",
    ];

    pub fn ud_pass(&self) -> Option<bool> {
        self.ud.as_ref().map(|u| u.pass)
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let cfg = &self.config;
        vec![
            SCHEMA_VERSION.to_string(),
            cfg.algorithm.to_string(),
            cfg.d.to_string(),
            cfg.p.to_string(),
            opt(self.class.map(|c| c.beta)),
            opt(self.class.map(|c| c.a)),
            opt(self.class.map(|c| c.b)),
            cfg.v.to_string(),
            self.m.to_string(),
            cfg.m_rule.to_string(),
            cfg.t.to_string(),
            cfg.seed.to_string(),
            self.ud_pass().map(|b| b.to_string()).unwrap_or_default(),
            self.err_lp.to_string(),
            self.err_l2_disc.to_string(),
            opt(self.sigma_v),
            self.iterations.to_string(),
            self.ms.to_string(),
        ]
    }
}

/// Writes reports as CSV with the stable header.
pub fn write_reports<W: Write>(reports: &[RecoveryReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RecoveryReport::CSV_HEADER)?;
    for r in reports {
        wr.write_record(r.csv_record())?;
    }
    wr.flush()?;
    Ok(())
}

/// ‖f − g‖_{L_p(μ)} on a grid with 4·(max frequency)+1 nodes per axis.
pub fn continuous_error(f: &SparseCoefFn, g: &SparseCoefFn, p: f64) -> Result<f64> {
    let diff = f.sub(g)?;
    let grid = QuadratureGrid::for_max_freq(diff.max_freq().max(1), f.dim(), DEFAULT_OVERSAMPLING)?;
    Ok(lp_norm_mu(&diff, p, &grid)?.value)
}

fn discrete_residual(samples: &[Complex64], g: &SparseCoefFn, xi: &PointSet) -> Result<f64> {
    let approx = sample(g, xi)?;
    let res: Vec<Complex64> = samples.iter().zip(&approx).map(|(a, b)| a - b).collect();
    Ok(inner_unchecked(&res, &res).re.max(0.0).sqrt())
}

/// Draws ξ (unless `points` is given), optionally checks universal
/// discretization with redraws, samples f and runs the configured
/// algorithm. Errors are measured even when every draw fails the check.
pub fn recover(
    f: &SparseCoefFn,
    cfg: &RecoveryConfig,
    points: Option<PointSet>,
) -> Result<(SparseCoefFn, RecoveryReport)> {
    recover_with_class(f, cfg, points, None)
}

pub fn recover_with_class(
    f: &SparseCoefFn,
    cfg: &RecoveryConfig,
    points: Option<PointSet>,
    class: Option<ClassEcho>,
) -> Result<(SparseCoefFn, RecoveryReport)> {
    cfg.validate()?;
    if f.dim() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: f.dim(),
        });
    }
    let start = Instant::now();
    let dict_set = cfg.resolve_dictionary()?;
    let provided = points.is_some();
    let m = match &points {
        Some(xi) => {
            if xi.dim() != cfg.d {
                return Err(Error::DimensionMismatch {
                    expected: cfg.d,
                    got: xi.dim(),
                });
            }
            xi.len()
        }
        None => cfg.resolve_m()?,
    };

    let mut xi = match points {
        Some(xi) => xi,
        None => draw_points(m, cfg.d, derive_seed(cfg.seed, 0))?,
    };
    let mut ud = None;
    let mut redraws = 0;
    if cfg.verify_ud {
        let u = cfg.ud_sparsity();
        let mut attempt = 0u64;
        loop {
            let mode = UdMode::Sampled {
                trials: cfg.ud_trials,
                seed: derive_seed(cfg.seed, 1_000_000 + attempt),
            };
            let report = verify_ud(&xi, &dict_set, u, mode)?;
            let pass = report.pass;
            ud = Some(report);
            if pass || provided || redraws >= cfg.max_redraws {
                break;
            }
            redraws += 1;
            attempt += 1;
            xi = draw_points(m, cfg.d, derive_seed(cfg.seed, attempt))?;
        }
    }

    let samples = sample(f, &xi)?;
    let dict = DictionaryOnPoints::new(dict_set, xi.clone())?;
    let (approx, err_l2_disc, iterations) = match cfg.algorithm {
        Algorithm::Womp => {
            let k = cfg.iterations().min(dict.m()).min(dict.n());
            let trace = womp_with(&samples, &dict, cfg.t, k, cfg.selection)?;
            (trace.approximant(&dict), trace.final_residual_norm(), k)
        }
        Algorithm::OracleBv => {
            let best = best_v_term_discrete(&samples, &dict, cfg.v.min(dict.n()))?;
            let mut g = SparseCoefFn::zero(cfg.d);
            for (&i, &c) in best.subset.iter().zip(&best.coefficients) {
                g.add_term(dict.indices().members()[i].clone(), c)?;
            }
            (g, best.error, best.subset.len())
        }
        Algorithm::Layered => {
            let params = class.map(|c| ClassParamsW {
                a: c.a,
                b: c.b,
                beta: c.beta,
            });
            let g = layered_approx(f, cfg.v, cfg.p, params)?;
            let err = discrete_residual(&samples, &g, &xi)?;
            let terms = g.len();
            (g, err, terms)
        }
    };

    let feasible = cfg.v <= dict.n() && binomial(dict.n(), cfg.v).is_some_and(|c| c <= BRUTE_FORCE_CAP);
    let sigma_v = if cfg.oracle && feasible {
        Some(best_v_term_discrete(&samples, &dict, cfg.v)?.error)
    } else {
        None
    };
    let err_lp = continuous_error(f, &approx, cfg.p)?;

    let report = RecoveryReport {
        config: cfg.clone(),
        class,
        m,
        dictionary_size: dict.n(),
        ud,
        redraws,
        err_lp,
        err_l2_disc,
        sigma_v,
        iterations,
        ms: start.elapsed().as_millis(),
    };
    Ok((approx, report))
}

/// α with α(1/β − 1/p*) = a/2.
pub fn layer_decay(a: f64, beta: f64, p_star: f64) -> Result<f64> {
    let gap = 1.0 / beta - 1.0 / p_star;
    if !(gap > 0.0) {
        return Err(invalid(format!("need 1/β > 1/p*, got β = {beta}, p* = {p_star}")));
    }
    Ok(a / (2.0 * gap))
}

/// The layered approximant A_v(f, α): f on Q_n in full plus, for each
/// higher layer j, its v_j largest coefficients and a v_j-term relaxed
/// greedy approximant of the remainder, with
/// v_j = ⌊2^{n − α(j − n)} j^{d−1}⌋ scaled down to fit the budget.
/// n is the largest level with |Q_n| ≤ v_total/2. Uses at most v_total terms.
///
/// `class` supplies (a, β) for α; without it α = 1.
pub fn layered_approx(f: &SparseCoefFn, v_total: usize, p: f64, class: Option<ClassParamsW>) -> Result<SparseCoefFn> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid(format!("p must lie in [2, ∞), got {p}")));
    }
    let d = f.dim();
    let alpha = match class {
        Some(c) => layer_decay(c.a, c.beta, p.min(2.0))?,
        None => 1.0,
    };
    let mut n = None;
    for level in 0..=crate::index_sets::MAX_LEVEL {
        if hyperbolic_cross(level, d)?.len() > v_total / 2 {
            break;
        }
        n = Some(level);
    }
    let Some(n) = n else {
        return Ok(threshold_v(f, v_total).0);
    };

    let parts = layers(f);
    let mut approx = SparseCoefFn::zero(d);
    for (_, part) in parts.range(..=n) {
        approx = approx.add(part)?;
    }
    let remaining = v_total.saturating_sub(approx.len());
    let higher: Vec<(u32, &SparseCoefFn)> = parts.range(n + 1..).map(|(&j, p)| (j, p)).collect();
    let raw: Vec<f64> = higher
        .iter()
        .map(|&(j, _)| (2f64.powf(n as f64 - alpha * (j - n) as f64) * (j as f64).powi(d as i32 - 1)).floor())
        .collect();
    // each layer spends up to 2·v_j terms
    let demand: f64 = raw.iter().map(|x| 2.0 * x).sum();
    let shrink = if demand > remaining as f64 { remaining as f64 / demand } else { 1.0 };

    for (&(_, part), &r) in higher.iter().zip(&raw) {
        let vj = (r * shrink).floor() as usize;
        if vj == 0 {
            continue;
        }
        let (kept, _) = threshold_v(part, vj);
        approx = approx.add(&kept)?;
        let rest = part.sub(&kept)?;
        if rest.is_empty() {
            continue;
        }
        let grid = QuadratureGrid::for_max_freq(rest.max_freq().max(1), d, DEFAULT_OVERSAMPLING)?;
        let g = greedy_a1_lp(&rest, &rest.support(), vj, p, GreedyMeasure::Continuous(&grid))?;
        approx = approx.add(&g.approximant)?;
    }
    debug_assert!(approx.len() <= v_total.max(1));
    Ok(approx)
}

#[derive(Clone, Debug)]
pub struct RhoPoint {
    pub v: usize,
    pub m: usize,
    /// Largest L_p error over the generated members.
    pub worst_err_lp: f64,
    pub mean_err_lp: f64,
    pub reports: Vec<RecoveryReport>,
}

/// Empirical upper estimate of the optimal recovery error over a class: for
/// each v, the worst error over `trials` generated members, all recovered
/// from one point set per v. Member t uses seed derive_seed(seed, t).
pub fn empirical_rho(
    params: &ClassParamsW,
    profile: Profile,
    j_max: u32,
    cfg: &RecoveryConfig,
    vs: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<RhoPoint>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let members: Vec<SparseCoefFn> = (0..trials)
        .into_par_iter()
        .map(|t| generate_w(params, cfg.d, j_max, derive_seed(seed, t as u64), profile))
        .collect::<Result<_>>()?;
    vs.iter()
        .map(|&v| {
            let mut run = cfg.clone();
            run.v = v;
            run.seed = derive_seed(seed, 1 << 32 | v as u64);
            run.validate()?;
            let m = run.resolve_m()?;
            let xi = draw_points(m, run.d, derive_seed(run.seed, 0))?;
            // discretization is checked once per point set
            let ud = if run.verify_ud {
                let mode = UdMode::Sampled {
                    trials: run.ud_trials,
                    seed: derive_seed(run.seed, 1_000_000),
                };
                Some(verify_ud(&xi, &run.resolve_dictionary()?, run.ud_sparsity(), mode)?)
            } else {
                None
            };
            let mut per_member = run.clone();
            per_member.verify_ud = false;
            let reports: Vec<RecoveryReport> = members
                .par_iter()
                .map(|f| {
                    let (_, mut rep) = recover_with_class(f, &per_member, Some(xi.clone()), Some((*params).into()))?;
                    rep.config.verify_ud = run.verify_ud;
                    rep.ud = ud.clone();
                    Ok(rep)
                })
                .collect::<Result<_>>()?;
            let worst = reports.iter().map(|r| r.err_lp).fold(0.0, f64::max);
            let mean = reports.iter().map(|r| r.err_lp).sum::<f64>() / reports.len() as f64;
            Ok(RhoPoint {
                v,
                m,
                worst_err_lp: worst,
                mean_err_lp: mean,
                reports,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::MultiIndex;

    fn single(k: i64) -> SparseCoefFn {
        SparseCoefFn::from_pairs(1, [(MultiIndex::from([k]), Complex64::new(0.6, -0.8))]).unwrap()
    }

    #[test]
    fn single_term_recovered_exactly() {
        let cfg = RecoveryConfig {
            v: 1,
            m_rule: MSpec::Explicit(3),
            verify_ud: false,
            ..RecoveryConfig::default()
        };
        let (g, rep) = recover(&single(2), &cfg, None).unwrap();
        assert!(rep.err_lp < 1e-8);
        assert!(rep.err_l2_disc < 1e-8);
        assert!((g.get(&MultiIndex::from([2])) - Complex64::new(0.6, -0.8)).norm() < 1e-8);
        assert_eq!(rep.iterations, 2);
    }

    #[test]
    fn oracle_recovers_sparse_input() {
        let f = SparseCoefFn::from_real(1, [([1], 1.0), ([-3], 0.5)]).unwrap();
        let cfg = RecoveryConfig {
            v: 2,
            algorithm: Algorithm::OracleBv,
            dictionary: DictionarySpec::Cube(4),
            m_rule: MSpec::Explicit(200),
            ..RecoveryConfig::default()
        };
        let (_, rep) = recover(&f, &cfg, None).unwrap();
        assert_eq!(rep.ud_pass(), Some(true));
        assert!(rep.err_l2_disc < 1e-10);
        assert!(rep.err_lp < 1e-8);
        assert!(rep.sigma_v.unwrap() < 1e-10);
    }

    #[test]
    fn failing_discretization_still_reports_errors() {
        // one point cannot discretize 6-sparse subspaces
        let cfg = RecoveryConfig {
            v: 2,
            dictionary: DictionarySpec::Cube(4),
            m_rule: MSpec::Explicit(1),
            max_redraws: 2,
            ..RecoveryConfig::default()
        };
        let (_, rep) = recover(&single(1), &cfg, None).unwrap();
        assert_eq!(rep.ud_pass(), Some(false));
        assert_eq!(rep.redraws, 2);
        assert!(rep.err_lp.is_finite());
    }

    #[test]
    fn config_validation() {
        let ok = RecoveryConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            RecoveryConfig { p: 1.5, ..ok.clone() },
            RecoveryConfig { p: f64::INFINITY, ..ok.clone() },
            RecoveryConfig { v: 0, ..ok.clone() },
            RecoveryConfig { t: 0.0, ..ok.clone() },
            RecoveryConfig { d: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
        assert_eq!(ok.p_star(), 2.0);
        assert_eq!(ok.iterations(), 8);
        assert_eq!(ok.ud_sparsity(), 12);
    }

    #[test]
    fn auto_dictionary_has_four_v_terms() {
        assert_eq!(auto_cross_level(64, 1).unwrap(), 8);
        assert_eq!(hyperbolic_cross(8, 1).unwrap().len(), 511);
        for v in [1, 3, 10, 40] {
            for d in [1, 2] {
                let n = auto_cross_level(v, d).unwrap();
                assert!(hyperbolic_cross(n, d).unwrap().len() >= 4 * v);
                if n > 0 {
                    assert!(hyperbolic_cross(n - 1, d).unwrap().len() < 4 * v);
                }
            }
        }
    }

    #[test]
    fn dictionary_spec_parsing() {
        assert_eq!("auto".parse::<DictionarySpec>().unwrap(), DictionarySpec::Auto);
        assert_eq!("cross:3".parse::<DictionarySpec>().unwrap(), DictionarySpec::Cross(3));
        assert_eq!(" cube:8 ".parse::<DictionarySpec>().unwrap(), DictionarySpec::Cube(8));
        for bad in ["cross", "cube:x", "ball:2"] {
            assert!(bad.parse::<DictionarySpec>().is_err());
        }
        assert_eq!("oracle_bv".parse::<Algorithm>().unwrap(), Algorithm::OracleBv);
    }

    #[test]
    fn layer_decay_rule() {
        assert_eq!(layer_decay(1.0, 1.0, 2.0).unwrap(), 1.0);
        assert!((layer_decay(1.0, 0.5, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn layered_returns_low_frequency_input_exactly() {
        let f = SparseCoefFn::from_real(1, [([0], 1.0), ([1], -0.5), ([-3], 0.25)]).unwrap();
        // |Q_2| = 7 ≤ 16/2
        let g = layered_approx(&f, 16, 2.0, None).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn layered_respects_budget_and_improves() {
        let params = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
        let f = generate_w(&params, 1, 10, 5, Profile::SaturatingUniform).unwrap();
        let mut last = f64::INFINITY;
        for v in [8, 32, 128] {
            let g = layered_approx(&f, v, 2.0, Some(params)).unwrap();
            assert!(g.len() <= v);
            let err = continuous_error(&f, &g, 2.0).unwrap();
            assert!(err < last);
            last = err;
        }
        // below |Q_0|·2 the approximant falls back to thresholding
        let g = layered_approx(&f, 1, 2.0, Some(params)).unwrap();
        assert_eq!(g, threshold_v(&f, 1).0);
    }

    #[test]
    fn empirical_rho_constant_class_is_exact() {
        let params = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
        let cfg = RecoveryConfig {
            verify_ud: false,
            m_rule: MSpec::Explicit(5),
            ..RecoveryConfig::default()
        };
        // j_max = 0 leaves only the constant term
        let rows = empirical_rho(&params, Profile::SaturatingUniform, 0, &cfg, &[1, 2], 3, 9).unwrap();
        for row in rows {
            assert!(row.worst_err_lp < 1e-8);
            assert_eq!(row.reports.len(), 3);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let params = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
        let f = generate_w(&params, 1, 6, 3, Profile::SaturatingUniform).unwrap();
        let cfg = RecoveryConfig {
            v: 4,
            seed: 11,
            ..RecoveryConfig::default()
        };
        let rows = |_: ()| {
            let (_, rep) = recover_with_class(&f, &cfg, None, Some(params.into())).unwrap();
            let mut rec = rep.csv_record();
            rec.pop();
            rec
        };
        assert_eq!(rows(()), rows(()));
        let mut buf = Vec::new();
        write_reports(&[], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("schema_version,algorithm,d,p,beta,a,b,v,m,m_rule"));
    }
}
