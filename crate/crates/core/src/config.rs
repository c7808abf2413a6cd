//! System parameterization: carrier counts, index sets and variances.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ConfigError, Error, Result};

/// One UW-OFDM system. Carrier indices are DFT bins `0..n_total` (DC is
/// bin 0, negative frequencies occupy the upper bins).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// DFT length `N`.
    pub n_total: usize,
    /// Unique word length `N_u` in samples.
    pub n_uw: usize,
    /// Number of redundant carriers `N_r`.
    pub n_red: usize,
    /// Number of data carriers `N_d`.
    pub n_data: usize,
    pub zero_carrier_indices: Vec<usize>,
    pub redundant_carrier_indices: Vec<usize>,
    /// Data symbol variance.
    pub sigma2_d: f64,
    /// Complex noise variance per time-domain sample.
    pub sigma2_n: f64,
    /// Target `x_u^H x_u` as a fraction of the total two-step symbol energy.
    pub uw_energy_fraction: f64,
}

const KEYS: [&str; 9] = [
    "n_total",
    "n_uw",
    "n_red",
    "n_data",
    "zero_carrier_indices",
    "redundant_carrier_indices",
    "sigma2_d",
    "sigma2_n",
    "uw_energy_fraction",
];

impl SystemConfig {
    /// Builds a config from the index sets, deriving `n_red` and `n_data`.
    pub fn new(
        n_total: usize,
        n_uw: usize,
        zero_carrier_indices: Vec<usize>,
        redundant_carrier_indices: Vec<usize>,
        sigma2_d: f64,
        sigma2_n: f64,
        uw_energy_fraction: f64,
    ) -> Result<Self, ConfigError> {
        let n_red = redundant_carrier_indices.len();
        let n_zero = zero_carrier_indices.len();
        let n_data = n_total
            .checked_sub(n_red + n_zero)
            .ok_or(ConfigError::CountMismatch {
                n_data: 0,
                n_red,
                n_zero,
                n_total,
            })?;
        let config = Self {
            n_total,
            n_uw,
            n_red,
            n_data,
            zero_carrier_indices,
            redundant_carrier_indices,
            sigma2_d,
            sigma2_n,
            uw_energy_fraction,
        };
        config.validate()?;
        Ok(config)
    }

    /// IEEE 802.11a-like layout: `N = 64`, `N_u = N_r = 16`, zero carriers
    /// at DC and bins 27..=37, 16 redundant carriers spread evenly over the
    /// 52 used carriers, UW energy fraction 4/52.
    pub fn default_80211a_like() -> Self {
        let n_total = 64;
        let n_uw = 16;
        let mut zero = vec![0];
        zero.extend(27..=37);
        let used: Vec<usize> = (0..n_total).filter(|k| !zero.contains(k)).collect();
        let redundant = evenly_spaced_ranks(used.len(), n_uw)
            .into_iter()
            .map(|r| used[r])
            .collect();
        Self::new(n_total, n_uw, zero, redundant, 1.0, 0.0, 4.0 / 52.0)
            .expect("built-in configuration is valid")
    }

    /// Checks every invariant, reporting the first violation found.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_total == 0 || self.n_uw == 0 || self.n_uw >= self.n_total {
            return Err(ConfigError::Dimensions {
                n_total: self.n_total,
                n_uw: self.n_uw,
            });
        }
        if self.n_red != self.n_uw {
            return Err(ConfigError::RedundantUwMismatch {
                n_red: self.n_red,
                n_uw: self.n_uw,
            });
        }
        if self.redundant_carrier_indices.len() != self.n_red {
            return Err(ConfigError::RedundantSetSize {
                got: self.redundant_carrier_indices.len(),
                expected: self.n_red,
            });
        }
        for (set, indices) in [
            ("zero", &self.zero_carrier_indices),
            ("redundant", &self.redundant_carrier_indices),
        ] {
            if let Some(&index) = indices.iter().find(|&&i| i >= self.n_total) {
                return Err(ConfigError::IndexOutOfRange {
                    set,
                    index,
                    n_total: self.n_total,
                });
            }
            if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
                return Err(ConfigError::UnsortedOrDuplicate { set, index: w[1] });
            }
        }
        if let Some(&index) = self
            .redundant_carrier_indices
            .iter()
            .find(|i| self.zero_carrier_indices.binary_search(i).is_ok())
        {
            return Err(ConfigError::Overlap { index });
        }
        let n_zero = self.zero_carrier_indices.len();
        if self.n_data + self.n_red + n_zero != self.n_total {
            return Err(ConfigError::CountMismatch {
                n_data: self.n_data,
                n_red: self.n_red,
                n_zero,
                n_total: self.n_total,
            });
        }
        for (field, value) in [("sigma2_d", self.sigma2_d), ("sigma2_n", self.sigma2_n)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::Parameter { field, value });
            }
        }
        if !(0.0..1.0).contains(&self.uw_energy_fraction) {
            return Err(ConfigError::Parameter {
                field: "uw_energy_fraction",
                value: self.uw_energy_fraction,
            });
        }
        Ok(())
    }

    /// Carriers that are neither zero nor redundant, ascending.
    pub fn data_carrier_indices(&self) -> Vec<usize> {
        (0..self.n_total)
            .filter(|k| {
                self.zero_carrier_indices.binary_search(k).is_err()
                    && self.redundant_carrier_indices.binary_search(k).is_err()
            })
            .collect()
    }

    /// Data and redundant carriers together, ascending. This is the row
    /// order of `B^T` applied to a spectrum.
    pub fn used_carrier_indices(&self) -> Vec<usize> {
        (0..self.n_total)
            .filter(|k| self.zero_carrier_indices.binary_search(k).is_err())
            .collect()
    }

    /// DFT bin of each entry of the stacked vector `[x_d; x_r]`.
    pub fn stacked_bins(&self) -> Vec<usize> {
        let mut bins = self.data_carrier_indices();
        bins.extend_from_slice(&self.redundant_carrier_indices);
        bins
    }

    /// Used-carrier rank of each entry of `[x_d; x_r]`; `P` maps stacked
    /// position `j` to used position `permutation()[j]`.
    pub fn permutation(&self) -> Vec<usize> {
        let used = self.used_carrier_indices();
        self.stacked_bins()
            .into_iter()
            .map(|b| {
                used.binary_search(&b)
                    .expect("stacked bins are used carriers")
            })
            .collect()
    }

    /// Same system with a different redundant carrier placement.
    pub fn with_redundant_carriers(&self, redundant: Vec<usize>) -> Result<Self, ConfigError> {
        let config = Self {
            redundant_carrier_indices: redundant,
            ..self.clone()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_config(&text).map_err(|(line, message)| match message {
            ParseFailure::Syntax(message) => Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            },
            ParseFailure::Invalid(e) => Error::Config(e),
        })
    }
}

/// `k`-th pick at rank `floor((k + 0.5) * n_used / n_pick)`.
fn evenly_spaced_ranks(n_used: usize, n_pick: usize) -> Vec<usize> {
    (0..n_pick)
        .map(|k| ((2 * k + 1) * n_used) / (2 * n_pick))
        .collect()
}

enum ParseFailure {
    Syntax(String),
    Invalid(ConfigError),
}

fn parse_config(text: &str) -> std::result::Result<SystemConfig, (usize, ParseFailure)> {
    let syntax = |line: usize, msg: String| (line, ParseFailure::Syntax(msg));
    let mut values: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `key = value`, found `{trimmed}`")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(syntax(line, format!("unknown key `{key}`")));
        }
        if values.insert(key, (line, value.trim())).is_some() {
            return Err(syntax(line, format!("duplicate key `{key}`")));
        }
    }
    let get = |key: &str| {
        values
            .get(key)
            .copied()
            .ok_or_else(|| syntax(last_line, format!("missing key `{key}`")))
    };
    fn scalar<T: FromStr>(
        key: &str,
        (line, v): (usize, &str),
    ) -> std::result::Result<T, (usize, ParseFailure)> {
        v.parse().map_err(|_| {
            (
                line,
                ParseFailure::Syntax(format!("cannot parse `{v}` for `{key}`")),
            )
        })
    }
    let list = |key: &str,
                (line, v): (usize, &str)|
     -> std::result::Result<Vec<usize>, (usize, ParseFailure)> {
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    syntax(
                        line,
                        format!("cannot parse index `{}` in `{key}`", s.trim()),
                    )
                })
            })
            .collect()
    };

    let config = SystemConfig {
        n_total: scalar("n_total", get("n_total")?)?,
        n_uw: scalar("n_uw", get("n_uw")?)?,
        n_red: scalar("n_red", get("n_red")?)?,
        n_data: scalar("n_data", get("n_data")?)?,
        zero_carrier_indices: list("zero_carrier_indices", get("zero_carrier_indices")?)?,
        redundant_carrier_indices: list(
            "redundant_carrier_indices",
            get("redundant_carrier_indices")?,
        )?,
        sigma2_d: scalar("sigma2_d", get("sigma2_d")?)?,
        sigma2_n: scalar("sigma2_n", get("sigma2_n")?)?,
        uw_energy_fraction: scalar("uw_energy_fraction", get("uw_energy_fraction")?)?,
    };
    config
        .validate()
        .map_err(|e| (last_line, ParseFailure::Invalid(e)))?;
    Ok(config)
}

impl FromStr for SystemConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_config(s).map_err(|(line, failure)| match failure {
            ParseFailure::Syntax(message) => Error::Parse {
                path: "<string>".into(),
                line,
                message,
            },
            ParseFailure::Invalid(e) => Error::Config(e),
        })
    }
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        writeln!(f, "n_total = {}", self.n_total)?;
        writeln!(f, "n_uw = {}", self.n_uw)?;
        writeln!(f, "n_red = {}", self.n_red)?;
        writeln!(f, "n_data = {}", self.n_data)?;
        writeln!(
            f,
            "zero_carrier_indices = {}",
            join(&self.zero_carrier_indices)
        )?;
        writeln!(
            f,
            "redundant_carrier_indices = {}",
            join(&self.redundant_carrier_indices)
        )?;
        writeln!(f, "sigma2_d = {:?}", self.sigma2_d)?;
        writeln!(f, "sigma2_n = {:?}", self.sigma2_n)?;
        writeln!(f, "uw_energy_fraction = {:?}", self.uw_energy_fraction)
    }
}
