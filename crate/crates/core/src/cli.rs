//! Command-line experiment driver. Exit codes: 0 when every declared
//! expectation holds, 1 when one fails, 2 on usage or config errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::classes::generate_w;
use crate::config::{class_params, parse_dictionary, recovery_config, Config, CLASS_KEYS, RECOVERY_KEYS};
use crate::discretization::{draw_points, m_budget, verify_ud, MRule, UdMode, UdReport};
use crate::error::{Error, Result};
use crate::greedy::{best_v_term_discrete, womp_with, DictionaryOnPoints, Selection};
use crate::index_sets::{dyadic_block, full_cube, hyperbolic_cross, layer, linf_shell, DyadicVector, IndexSet};
use crate::rate::{fit_rate, log_correction_exponent, RateFit};
use crate::recovery::{
    empirical_rho, recover_with_class, write_reports, ClassEcho, DictionarySpec, RecoveryReport, SCHEMA_VERSION,
};
use crate::rng::{self, derive_seed};
use crate::trig::{PointSet, SparseCoefFn};

#[derive(Debug, Parser)]
#[command(name = "sampling-recovery", version, about = "Sparse sampling recovery experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Experiment file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Divide errors by the logarithmic class factor before fitting rates.
    #[arg(long, value_name = "BOOL", default_value_t = false, action = ArgAction::Set)]
    pub strip_log: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check universal discretization over a (u, m) grid.
    DiscretizeCheck(CommonArgs),
    /// Recover one function from random samples.
    Recover(CommonArgs),
    /// Recovery errors over a v grid and the fitted decay rate.
    RateSweep(CommonArgs),
    /// Compare WOMP residuals with the best v-term error.
    LebesgueTest(CommonArgs),
    /// Print an index set, one multi-index per line.
    DumpIndexSet {
        #[command(flatten)]
        common: CommonArgs,
        /// cross:N, cube:M, layer:J, shell:J, block:s1,..,sd or band:N.
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
    },
}

/// Whether a command met its declared expectations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// Exit code for a failed run.
pub const USAGE_ERROR: i32 = 2;

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            USAGE_ERROR
        }
    }
}

fn load(common: &CommonArgs) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::from_path(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set("seed", seed);
    }
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::DiscretizeCheck(c) => discretize_check(&load(&c)?, &mut sink(&c.out)?),
        Command::Recover(c) => recover_cmd(&load(&c)?, &mut sink(&c.out)?),
        Command::RateSweep(c) => rate_sweep(&load(&c)?, c.strip_log, &mut sink(&c.out)?).map(|(o, _)| o),
        Command::LebesgueTest(c) => lebesgue_test(&load(&c)?, &mut sink(&c.out)?),
        Command::DumpIndexSet { common, set, dim } => {
            let mut cfg = load(&common)?;
            if let Some(s) = set {
                cfg.set("set", s);
            }
            if let Some(d) = dim {
                cfg.set("d", d);
            }
            dump_index_set(&cfg, &mut sink(&common.out)?)
        }
    }
}

fn with_keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

enum PointSpec {
    Random,
    Equispaced(usize),
}

fn point_spec(cfg: &Config) -> Result<PointSpec> {
    match cfg.raw("points").unwrap_or("random") {
        "random" => Ok(PointSpec::Random),
        other => match other.strip_prefix("equispaced:").map(str::parse) {
            Some(Ok(g)) => Ok(PointSpec::Equispaced(g)),
            _ => Err(Error::Config(format!("points must be random or equispaced:G, got {other:?}"))),
        },
    }
}

fn index_set(spec: &DictionarySpec, d: usize) -> Result<IndexSet> {
    match spec {
        DictionarySpec::Auto => Err(Error::Config("this command needs an explicit dictionary".into())),
        DictionarySpec::Cross(n) => hyperbolic_cross(*n, d),
        DictionarySpec::Cube(m) => full_cube(*m, d),
        DictionarySpec::Explicit(s) => Ok(s.clone()),
    }
}

const DISCRETIZE_KEYS: &[&str] = &[
    "d",
    "dictionary",
    "u",
    "m",
    "m_rule",
    "c_user",
    "points",
    "mode",
    "trials",
    "seeds",
    "seed",
    "min_pass_fraction",
];

/// Runs the (½, ³⁄₂) check for every (u, m) cell and seed. A cell passes
/// when its pass fraction reaches `min_pass_fraction`.
pub fn discretize_check(cfg: &Config, out: &mut dyn Write) -> Result<Outcome> {
    cfg.check_keys(DISCRETIZE_KEYS)?;
    let d: usize = cfg.get_or("d", 1)?;
    let dict = index_set(&parse_dictionary(cfg.raw("dictionary").unwrap_or("cross:4"), d)?, d)?;
    let us: Vec<usize> = cfg.get_list("u")?.unwrap_or_else(|| vec![4]);
    let seed: u64 = cfg.get_or("seed", 0)?;
    let points = point_spec(cfg)?;
    let seeds: usize = match points {
        PointSpec::Random => cfg.get_or("seeds", 1)?,
        PointSpec::Equispaced(_) => 1,
    };
    let trials: usize = cfg.get_or("trials", 500)?;
    let exhaustive = match cfg.raw("mode").unwrap_or("sampled") {
        "sampled" => false,
        "exhaustive" => true,
        other => return Err(Error::Config(format!("mode must be sampled or exhaustive, got {other:?}"))),
    };
    let min_fraction: f64 = cfg.get_or("min_pass_fraction", 1.0)?;
    let explicit_m: Option<Vec<usize>> = cfg.get_list("m")?;
    let rule: MRule = cfg.get_or("m_rule", MRule::Log3)?;
    let c_user: f64 = cfg.get_or("c_user", 2.0)?;
    if seeds == 0 {
        return Err(Error::Config("seeds must be at least 1".into()));
    }

    let mut wr = csv::Writer::from_writer(out);
    let mut header = vec!["schema_version"];
    header.extend(UdReport::CSV_HEADER);
    wr.write_record(&header)?;
    let mut all_pass = true;
    for &u in &us {
        let ms: Vec<usize> = match (&points, &explicit_m) {
            (PointSpec::Equispaced(g), _) => vec![g.pow(d as u32)],
            (PointSpec::Random, Some(ms)) => ms.clone(),
            (PointSpec::Random, None) => vec![m_budget(u, rule, c_user)?],
        };
        for m in ms {
            let mut passes = 0;
            for s in 0..seeds {
                let point_seed = derive_seed(seed, s as u64);
                let xi = match points {
                    PointSpec::Random => draw_points(m, d, point_seed)?,
                    PointSpec::Equispaced(g) => PointSet::equispaced(g, d)?,
                };
                let mode = if exhaustive {
                    UdMode::Exhaustive
                } else {
                    UdMode::Sampled {
                        trials,
                        seed: derive_seed(point_seed, 1),
                    }
                };
                let report = verify_ud(&xi, &dict, u, mode)?;
                passes += usize::from(report.pass);
                let mut row = vec![SCHEMA_VERSION.to_string()];
                row.extend(report.csv_record(point_seed));
                wr.write_record(&row)?;
            }
            let fraction = passes as f64 / seeds as f64;
            let cell = fraction >= min_fraction;
            eprintln!("u={u} m={m}: {passes}/{seeds} passed ({})", if cell { "ok" } else { "FAIL" });
            all_pass &= cell;
        }
    }
    wr.flush()?;
    Ok(Outcome::from_bool(all_pass))
}

fn target_function(cfg: &Config, d: usize) -> Result<(SparseCoefFn, Option<ClassEcho>)> {
    if let Some(path) = cfg.raw("function") {
        let f = SparseCoefFn::read_csv(File::open(path)?)?;
        if f.dim() != d {
            return Err(Error::Config(format!("function has dimension {}, config d = {d}", f.dim())));
        }
        return Ok((f, None));
    }
    let (params, profile, j_max) = class_params(cfg, d)?;
    let member_seed = cfg.get_or("member_seed", cfg.get_or("seed", 0u64)?)?;
    Ok((generate_w(&params, d, j_max, member_seed, profile)?, Some(params.into())))
}

/// One recovery; fails when a requested discretization check did not pass
/// or the error exceeds `max_err_lp`.
pub fn recover_cmd(cfg: &Config, out: &mut dyn Write) -> Result<Outcome> {
    cfg.check_keys(&with_keys(&[
        RECOVERY_KEYS,
        CLASS_KEYS,
        &["function", "member_seed", "max_err_lp", "approximant_out"],
    ]))?;
    let rc = recovery_config(cfg)?;
    let (f, class) = target_function(cfg, rc.d)?;
    let (approx, report) = recover_with_class(&f, &rc, None, class)?;
    write_reports(std::slice::from_ref(&report), out)?;
    if let Some(path) = cfg.raw("approximant_out") {
        approx.write_csv(File::create(path)?)?;
    }
    eprintln!(
        "err_lp={} err_l2_disc={} m={} iterations={}",
        report.err_lp, report.err_l2_disc, report.m, report.iterations
    );
    let ud_ok = report.ud_pass().unwrap_or(true);
    let err_ok = match cfg.get::<f64>("max_err_lp")? {
        Some(bound) => report.err_lp <= bound,
        None => true,
    };
    Ok(Outcome::from_bool(ud_ok && err_ok))
}

/// Worst-case errors over a v grid and their fitted log-log slope. Fails
/// with fewer than four usable points or a slope outside the declared range.
pub fn rate_sweep(cfg: &Config, strip_log: bool, out: &mut dyn Write) -> Result<(Outcome, Option<RateFit>)> {
    cfg.check_keys(&with_keys(&[
        RECOVERY_KEYS,
        CLASS_KEYS,
        &["v_grid", "trials", "expect_slope_min", "expect_slope_max"],
    ]))?;
    let rc = recovery_config(cfg)?;
    let (params, profile, j_max) = class_params(cfg, rc.d)?;
    let vs: Vec<usize> = cfg.get_list("v_grid")?.unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    let trials: usize = cfg.get_or("trials", 3)?;
    let rows = empirical_rho(&params, profile, j_max, &rc, &vs, trials, rc.seed)?;
    let reports: Vec<RecoveryReport> = rows.iter().flat_map(|r| r.reports.iter().cloned()).collect();
    write_reports(&reports, out)?;

    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.v as f64, r.worst_err_lp)).collect();
    let strip = strip_log.then(|| log_correction_exponent(rc.d, params.a, params.b));
    let fit = match fit_rate(&points, strip) {
        Ok(fit) => fit,
        Err(e) => {
            eprintln!("rate fit failed: {e}");
            return Ok((Outcome::Fail, None));
        }
    };
    if fit.dropped > 0 {
        eprintln!("warning: dropped {} nonpositive error(s)", fit.dropped);
    }
    eprintln!(
        "slope={} intercept={} r_squared={} stripped={}",
        fit.slope, fit.intercept, fit.r_squared, fit.log_correction_stripped
    );
    let lo = cfg.get_or("expect_slope_min", f64::NEG_INFINITY)?;
    let hi = cfg.get_or("expect_slope_max", f64::INFINITY)?;
    Ok((Outcome::from_bool(fit.slope >= lo && fit.slope <= hi), Some(fit)))
}

const LEBESGUE_KEYS: &[&str] = &[
    "d",
    "dictionary",
    "points",
    "m",
    "v",
    "t",
    "c",
    "instances",
    "bound",
    "seed",
    "selection",
    "f0",
];

/// Relative size below which σ_v counts as zero.
const EXACT_TOLERANCE: f64 = 1e-10;

/// ‖f_{⌈cv⌉}‖ against C·σ_v over random inputs; passes when every ratio is
/// at most `bound`. With σ_v = 0 the ratio is 0 on exact recovery, +∞
/// otherwise.
pub fn lebesgue_test(cfg: &Config, out: &mut dyn Write) -> Result<Outcome> {
    cfg.check_keys(LEBESGUE_KEYS)?;
    let d: usize = cfg.get_or("d", 1)?;
    let dict_set = index_set(&parse_dictionary(cfg.raw("dictionary").unwrap_or("band:10"), d)?, d)?;
    let n = dict_set.len();
    let xi = match point_spec(cfg)? {
        PointSpec::Equispaced(g) => PointSet::equispaced(g, d)?,
        PointSpec::Random => {
            let m: usize = cfg.require("m")?;
            draw_points(m, d, derive_seed(cfg.get_or("seed", 0)?, u64::MAX))?
        }
    };
    let vs: Vec<usize> = cfg.get_list("v")?.unwrap_or_else(|| vec![1, 2, 3]);
    let ts: Vec<f64> = cfg.get_list("t")?.unwrap_or_else(|| vec![0.5, 1.0]);
    let c: f64 = cfg.get_or("c", 2.0)?;
    let instances: usize = cfg.get_or("instances", 50)?;
    let bound: f64 = cfg.get_or("bound", 5.0)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let selection: Selection = cfg.get_or("selection", Selection::Largest)?;
    let sparse = match cfg.raw("f0").unwrap_or("random") {
        "random" => false,
        "sparse" => true,
        other => return Err(Error::Config(format!("f0 must be random or sparse, got {other:?}"))),
    };
    let dict = DictionaryOnPoints::new(dict_set, xi)?;

    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["schema_version", "instance", "v", "t", "womp_error", "sigma_v", "ratio"])?;
    let mut worst = 0.0f64;
    for &v in &vs {
        let k = (c * v as f64).ceil() as usize;
        if v == 0 || k > n.min(dict.m()) {
            return Err(Error::Config(format!("v = {v} needs ⌈cv⌉ = {k} ≤ min(N, m)")));
        }
        for inst in 0..instances {
            let mut r = rng::seeded(derive_seed(seed, (v as u64) << 32 | inst as u64));
            let f0: Vec<Complex64> = if sparse {
                let picks = rand::seq::index::sample(&mut r, n, v).into_vec();
                let terms: Vec<(usize, Complex64)> = picks.into_iter().map(|i| (i, rng::complex_gaussian(&mut r))).collect();
                dict.synthesize(&terms)
            } else {
                (0..dict.m()).map(|_| rng::complex_gaussian(&mut r)).collect()
            };
            let scale = f0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (dict.m() as f64).sqrt();
            let sigma = best_v_term_discrete(&f0, &dict, v)?.error;
            for &t in &ts {
                let err = womp_with(&f0, &dict, t, k, selection)?.final_residual_norm();
                let ratio = if sigma > EXACT_TOLERANCE * scale {
                    err / sigma
                } else if err <= EXACT_TOLERANCE * scale.max(1.0) {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(ratio);
                wr.write_record([
                    SCHEMA_VERSION.to_string(),
                    inst.to_string(),
                    v.to_string(),
                    t.to_string(),
                    err.to_string(),
                    sigma.to_string(),
                    ratio.to_string(),
                ])?;
            }
        }
    }
    wr.flush()?;
    eprintln!("max ratio {worst} against bound {bound}");
    Ok(Outcome::from_bool(worst <= bound))
}

/// Parses `cross:N`, `cube:M`, `layer:J`, `shell:J`, `block:s1,..,sd` or
/// `band:N`.
pub fn parse_index_set(spec: &str, d: usize) -> Result<IndexSet> {
    let bad = || Error::Config(format!("unknown index set {spec:?}"));
    let (kind, arg) = spec.trim().split_once(':').ok_or_else(bad)?;
    match kind {
        "cross" => hyperbolic_cross(arg.parse().map_err(|_| bad())?, d),
        "cube" => full_cube(arg.parse().map_err(|_| bad())?, d),
        "layer" => layer(arg.parse().map_err(|_| bad())?, d),
        "shell" => linf_shell(arg.parse().map_err(|_| bad())?, d),
        "block" => {
            let s = arg
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            dyadic_block(&DyadicVector::new(s), d)
        }
        "band" => index_set(&parse_dictionary(spec, d)?, d),
        _ => Err(bad()),
    }
}

pub fn dump_index_set(cfg: &Config, out: &mut dyn Write) -> Result<Outcome> {
    cfg.check_keys(&["set", "d", "seed"])?;
    let d: usize = cfg.get_or("d", 1)?;
    let set = parse_index_set(&cfg.require::<String>("set")?, d)?;
    out.write_all(set.to_text().as_bytes())?;
    out.flush()?;
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        text.parse().unwrap()
    }

    fn run_to_string(f: impl FnOnce(&mut dyn Write) -> Result<Outcome>) -> (Outcome, String) {
        let mut buf = Vec::new();
        let outcome = f(&mut buf).unwrap();
        (outcome, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn exact_grid_discretization_passes() {
        let c = cfg("dictionary = cube:8\npoints = equispaced:17\nu = 3\nmode = exhaustive");
        let (outcome, text) = run_to_string(|w| discretize_check(&c, w));
        assert_eq!(outcome, Outcome::Pass);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "1");
        assert!((row[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
        assert!((row[6].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_point_fails_discretization() {
        let c = cfg("dictionary = cube:2\nm = 1\nu = 2\nmode = exhaustive");
        let (outcome, text) = run_to_string(|w| discretize_check(&c, w));
        assert_eq!(outcome, Outcome::Fail);
        assert!(text.contains(",false,"));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(discretize_check(&cfg("bogus = 1"), &mut Vec::new()).is_err());
        assert!(lebesgue_test(&cfg("v = 1\nextra = 2"), &mut Vec::new()).is_err());
    }

    #[test]
    fn lebesgue_sparse_inputs_recovered() {
        let c = cfg("points = equispaced:10\nf0 = sparse\ninstances = 5\nv = 1,2");
        let (outcome, text) = run_to_string(|w| lebesgue_test(&c, w));
        assert_eq!(outcome, Outcome::Pass);
        assert_eq!(text.lines().count(), 1 + 2 * 5 * 2);
    }

    #[test]
    fn dump_sets() {
        let (_, text) = run_to_string(|w| dump_index_set(&cfg("set = cross:1\nd = 2"), w));
        assert_eq!(text.lines().count(), hyperbolic_cross(1, 2).unwrap().len());
        assert_eq!(parse_index_set("block:1,0", 2).unwrap().len(), 2);
        assert_eq!(parse_index_set("band:4", 1).unwrap().len(), 4);
        assert!(parse_index_set("ball:3", 1).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["sampling-recovery", "no-such-command"]), USAGE_ERROR);
        assert_eq!(
            run(["sampling-recovery", "dump-index-set", "--set", "cube:1", "--out", "/nonexistent/dir/x"]),
            USAGE_ERROR
        );
    }
}
