//! Run configuration. Layers, lowest first: defaults, a TOML file, `GS_*`
//! environment variables, command-line flags.
//!
//! TOML keys: `tolerance`, `max_block_exponent`, `kl_terms`, `alpha_horizon`,
//! `max_n`, `format`. Environment: `GS_TOLERANCE`, `GS_MAX_N`,
//! `GS_KL_TERMS`, `GS_ALPHA_HORIZON`, `GS_MAX_BLOCK_EXPONENT`, `GS_FORMAT`.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bases::{DEFAULT_MAX_N, DEFAULT_TOLERANCE, LADDER_HARD_CAP};
use crate::error::{Error, Result};
use crate::expansions::{DEFAULT_ALPHA_HORIZON, MAX_ALPHA_HORIZON};
use crate::spectrum::DEFAULT_KL_TERMS;
use crate::words::MAX_BLOCK_EXPONENT;

pub const MAX_KL_TERMS: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Svg,
    Ppm,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            "ppm" => Ok(Format::Ppm),
            _ => Err(Error::Usage(format!("unknown format {s:?} (text, json, svg, ppm)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub tolerance: f64,
    pub max_block_exponent: u32,
    pub kl_terms: u32,
    pub alpha_horizon: usize,
    pub max_n: u32,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: DEFAULT_TOLERANCE,
            max_block_exponent: MAX_BLOCK_EXPONENT,
            kl_terms: DEFAULT_KL_TERMS,
            alpha_horizon: DEFAULT_ALPHA_HORIZON,
            max_n: DEFAULT_MAX_N,
            format: Format::Text,
        }
    }
}

/// One layer of optional settings.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub max_block_exponent: Option<u32>,
    pub kl_terms: Option<u32>,
    pub alpha_horizon: Option<usize>,
    pub max_n: Option<u32>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Overrides> {
        toml::from_str(text).map_err(|e| Error::Usage(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Overrides::from_toml(&text)
    }

    /// Reads `GS_*` keys through `get`, so tests can supply a fake environment.
    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<Overrides> {
        fn val<T: FromStr>(get: &impl Fn(&str) -> Option<String>, key: &str) -> Result<Option<T>> {
            match get(key) {
                None => Ok(None),
                Some(s) => s
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Usage(format!("{key}={s:?} does not parse"))),
            }
        }
        Ok(Overrides {
            tolerance: val(&get, "GS_TOLERANCE")?,
            max_block_exponent: val(&get, "GS_MAX_BLOCK_EXPONENT")?,
            kl_terms: val(&get, "GS_KL_TERMS")?,
            alpha_horizon: val(&get, "GS_ALPHA_HORIZON")?,
            max_n: val(&get, "GS_MAX_N")?,
            format: get("GS_FORMAT").map(|s| s.trim().parse()).transpose()?,
        })
    }

    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = self.tolerance {
            c.tolerance = v;
        }
        if let Some(v) = self.max_block_exponent {
            c.max_block_exponent = v;
        }
        if let Some(v) = self.kl_terms {
            c.kl_terms = v;
        }
        if let Some(v) = self.alpha_horizon {
            c.alpha_horizon = v;
        }
        if let Some(v) = self.max_n {
            c.max_n = v;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
    }
}

impl RunConfig {
    /// `file < env < flags` on top of the defaults.
    pub fn layered(file: &Overrides, env: &Overrides, flags: &Overrides) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for layer in [file, env, flags] {
            layer.apply(&mut c);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Usage(format!("tolerance {} must lie in (0, 1)", self.tolerance)));
        }
        if self.max_block_exponent > MAX_BLOCK_EXPONENT {
            return Err(Error::Usage(format!("max_block_exponent above hard limit {MAX_BLOCK_EXPONENT}")));
        }
        if self.kl_terms == 0 || self.kl_terms > MAX_KL_TERMS {
            return Err(Error::Usage(format!("kl_terms must lie in 1..={MAX_KL_TERMS}")));
        }
        if self.alpha_horizon == 0 || self.alpha_horizon > MAX_ALPHA_HORIZON {
            return Err(Error::Usage(format!("alpha_horizon must lie in 1..={MAX_ALPHA_HORIZON}")));
        }
        if self.max_n < 2 || self.max_n > LADDER_HARD_CAP {
            return Err(Error::Usage(format!("max_n must lie in 2..={LADDER_HARD_CAP}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn env(pairs: &[(&str, &str)]) -> Overrides {
        let m: HashMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Overrides::from_env(|k| m.get(k).cloned()).unwrap()
    }

    #[test]
    fn precedence() {
        let file = Overrides::from_toml("tolerance = 1e-6\nmax_n = 9\nkl_terms = 10\n").unwrap();
        let e = env(&[("GS_MAX_N", "8"), ("GS_KL_TERMS", "12")]);
        let flags = Overrides { kl_terms: Some(5), ..Default::default() };
        let c = RunConfig::layered(&file, &e, &flags).unwrap();
        assert_eq!(c.tolerance, 1e-6);
        assert_eq!(c.max_n, 8);
        assert_eq!(c.kl_terms, 5);
        assert_eq!(c.alpha_horizon, DEFAULT_ALPHA_HORIZON);
        let d = RunConfig::layered(&Overrides::default(), &Overrides::default(), &Overrides::default()).unwrap();
        assert_eq!(d, RunConfig::default());
    }

    #[test]
    fn rejects_bad_layers() {
        assert!(Overrides::from_toml("colour = 3").is_err());
        assert!(Overrides::from_env(|k| (k == "GS_TOLERANCE").then(|| "abc".to_string())).is_err());
        assert!(Overrides::from_env(|k| (k == "GS_FORMAT").then(|| "xml".to_string())).is_err());
        let bad = Overrides { tolerance: Some(0.0), ..Default::default() };
        assert!(matches!(
            RunConfig::layered(&Overrides::default(), &Overrides::default(), &bad),
            Err(Error::Usage(_))
        ));
        assert_eq!(env(&[("GS_FORMAT", "json")]).format, Some(Format::Json));
    }
}
