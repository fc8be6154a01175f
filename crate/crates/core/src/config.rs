//! Flat `key = value` experiment files. `#` starts a comment; blank lines
//! are ignored; keys may appear once.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::classes::{default_j_max, ClassParamsW, Profile};
use crate::discretization::MRule;
use crate::error::{Error, Result};
use crate::greedy::Selection;
use crate::index_sets::{IndexSet, MultiIndex};
use crate::recovery::{Algorithm, DictionarySpec, MSpec, RecoveryConfig};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            if entries
                .insert(key.to_string(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Config { entries })
    }
}

impl Config {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| {
                Error::Config(format!("{key} = {v:?} (line {line}): {e}"))
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
    }

    /// A comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("{key} item {item:?} (line {line}): {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}

/// Keys read by [`recovery_config`].
pub const RECOVERY_KEYS: &[&str] = &[
    "d",
    "p",
    "v",
    "m_rule",
    "m",
    "c_user",
    "t",
    "c",
    "algorithm",
    "dictionary",
    "seed",
    "selection",
    "verify_ud",
    "ud_trials",
    "max_redraws",
    "oracle",
];

/// Keys read by [`class_params`].
pub const CLASS_KEYS: &[&str] = &["a", "b", "beta", "profile", "j_max"];

/// `band:N`, N consecutive frequencies centered at zero (d = 1), besides the
/// forms accepted by [`DictionarySpec`].
pub fn parse_dictionary(value: &str, d: usize) -> Result<DictionarySpec> {
    if let Some(n) = value.trim().strip_prefix("band:") {
        let n: i64 = n
            .parse()
            .map_err(|_| Error::Config(format!("band size must be an integer, got {n:?}")))?;
        if d != 1 || n < 1 {
            return Err(Error::Config("band:N needs d = 1 and N ≥ 1".into()));
        }
        let lo = -(n - 1) / 2;
        let members = (lo..lo + n).map(|k| MultiIndex::from([k])).collect();
        return Ok(DictionarySpec::Explicit(IndexSet::from_members(1, members)?));
    }
    value.parse()
}

pub fn recovery_config(cfg: &Config) -> Result<RecoveryConfig> {
    let base = RecoveryConfig::default();
    let d = cfg.get_or("d", base.d)?;
    let m_rule = match cfg.raw("m_rule").unwrap_or("log3") {
        "explicit" => MSpec::Explicit(cfg.require("m")?),
        other => {
            if cfg.contains("m") {
                return Err(Error::Config("m is only read with m_rule = explicit".into()));
            }
            MSpec::Rule(other.parse::<MRule>()?)
        }
    };
    let dictionary = match cfg.raw("dictionary") {
        Some(v) => parse_dictionary(v, d)?,
        None => base.dictionary,
    };
    let out = RecoveryConfig {
        d,
        p: cfg.get_or("p", base.p)?,
        v: cfg.get_or("v", base.v)?,
        m_rule,
        c_user: cfg.get_or("c_user", base.c_user)?,
        t: cfg.get_or("t", base.t)?,
        c: cfg.get_or("c", base.c)?,
        algorithm: cfg.get_or::<Algorithm>("algorithm", base.algorithm)?,
        dictionary,
        seed: cfg.get_or("seed", base.seed)?,
        selection: cfg.get_or::<Selection>("selection", base.selection)?,
        verify_ud: cfg.get_or("verify_ud", base.verify_ud)?,
        ud_trials: cfg.get_or("ud_trials", base.ud_trials)?,
        max_redraws: cfg.get_or("max_redraws", base.max_redraws)?,
        oracle: cfg.get_or("oracle", base.oracle)?,
    };
    out.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(out)
}

/// Class parameters, generation profile and truncation depth.
pub fn class_params(cfg: &Config, d: usize) -> Result<(ClassParamsW, Profile, u32)> {
    let params = ClassParamsW::new(
        cfg.get_or("a", 1.0)?,
        cfg.get_or("b", 0.0)?,
        cfg.get_or("beta", 1.0)?,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let profile = cfg.get_or::<Profile>("profile", Profile::SaturatingUniform)?;
    let j_max = cfg.get_or("j_max", default_j_max(d))?;
    Ok((params, profile, j_max))
}
