use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use lyapunov_core::EnsembleSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => bail!("unknown output format {other:?}, expected csv or json"),
        }
    }
}

/// Worker thread count: a fixed number or rayon's default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Threads {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => bail!("threads must be a positive integer or \"auto\", got {s:?}"),
            Ok(n) => Ok(Self::Count(n)),
        }
    }
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("threads must be positive")),
            Raw::Count(n) => Ok(Self::Count(n)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub const DEFAULT_STEPS: usize = 100_000;
pub const DEFAULT_CHAINS: usize = 4;
pub const DEFAULT_SEED: u64 = 1;

/// One reproducible run. `k_max` defaults to the ensemble dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleSpec,
    #[serde(rename = "N", default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub threads: Threads,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_chains() -> usize {
    DEFAULT_CHAINS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub ensemble: Option<EnsembleSpec>,
    pub steps: Option<usize>,
    pub chains: Option<usize>,
    pub k_max: Option<usize>,
    pub seed: Option<u64>,
    pub output_format: Option<OutputFormat>,
    pub threads: Option<Threads>,
}

impl RunConfig {
    pub fn new(ensemble: EnsembleSpec) -> Self {
        Self {
            ensemble,
            steps: DEFAULT_STEPS,
            chains: DEFAULT_CHAINS,
            k_max: None,
            seed: DEFAULT_SEED,
            output_format: OutputFormat::default(),
            threads: Threads::default(),
        }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Merge an optional file config with flag overrides, then validate.
    pub fn resolve(file: Option<RunConfig>, flags: Overrides) -> anyhow::Result<Self> {
        let mut config = match (file, flags.ensemble.clone()) {
            (Some(mut c), ensemble) => {
                if let Some(e) = ensemble {
                    c.ensemble = e;
                }
                c
            }
            (None, Some(e)) => RunConfig::new(e),
            (None, None) => bail!("no ensemble given: pass --ensemble <json> or --config <path>"),
        };
        if let Some(v) = flags.steps {
            config.steps = v;
        }
        if let Some(v) = flags.chains {
            config.chains = v;
        }
        if let Some(v) = flags.k_max {
            config.k_max = Some(v);
        }
        if let Some(v) = flags.seed {
            config.seed = v;
        }
        if let Some(v) = flags.output_format {
            config.output_format = v;
        }
        if let Some(v) = flags.threads {
            config.threads = v;
        }
        config.k_max.get_or_insert(config.ensemble.dim());
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.ensemble.validate()?;
        if self.steps == 0 {
            bail!("N must be positive");
        }
        if self.chains == 0 {
            bail!("chains must be positive");
        }
        let d = self.ensemble.dim();
        match self.k_max {
            Some(k) if k == 0 || k > d => bail!("k_max = {k} must lie in 1..={d}"),
            _ => Ok(()),
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or_else(|| self.ensemble.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lyapunov_core::Beta;

    fn tu() -> EnsembleSpec {
        EnsembleSpec::TruncatedUnitary {
            beta: Beta::Complex,
            d: 2,
            n: 2,
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(r#"{"ensemble": {"type": "TruncatedUnitary", "beta": 2, "d": 2, "n": 2}}"#).unwrap();
        assert_eq!(c, RunConfig::new(tu()));
        assert_eq!(c.k_max(), 2);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::new(tu());
        let flags = Overrides {
            steps: Some(10),
            seed: Some(9),
            threads: Some(Threads::Count(2)),
            k_max: Some(1),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!((c.steps, c.seed, c.threads, c.k_max), (10, 9, Threads::Count(2), Some(1)));
        assert_eq!(c.chains, DEFAULT_CHAINS);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |f: Overrides| RunConfig::resolve(Some(RunConfig::new(tu())), f).is_err();
        assert!(bad(Overrides { k_max: Some(3), ..Default::default() }));
        assert!(bad(Overrides { steps: Some(0), ..Default::default() }));
        assert!(bad(Overrides { chains: Some(0), ..Default::default() }));
        assert!(RunConfig::resolve(None, Overrides::default()).is_err());
        assert!("0".parse::<Threads>().is_err());
        assert!(RunConfig::from_json(r#"{"ensemble": {"type": "StandardGaussian", "beta": 3, "d": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"ensemble": {"type": "StandardGaussian", "beta": 2, "d": 1}, "typo": 1}"#).is_err());
    }

    #[test]
    fn threads_round_trip() {
        for t in [Threads::Auto, Threads::Count(3)] {
            let s = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<Threads>(&s).unwrap(), t);
            assert_eq!(t.to_string().parse::<Threads>().unwrap(), t);
        }
    }
}
