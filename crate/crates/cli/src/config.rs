//! Run configuration: built-in defaults or a replayed report, then a key-value
//! config file, then command-line flags, in increasing precedence.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use suq2_bmo::bmo::TGrid;
use suq2_bmo::trunc::{TorusSample, TruncRep};
use suq2_bmo::Error;

use crate::commands::Command;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to a replayed report, then to the built-in defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct GlobalArgs {
    /// Deformation parameter, in (-1, 1) \ {0} [default: 0.5]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,

    /// Seed for every random draw [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Report format [default: json]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Truncation cutoff N of the N-leg [default: 8]
    #[arg(long = "trunc-n", global = true)]
    pub trunc_n: Option<usize>,

    /// Truncation half-width M of the Z-leg [default: 3]
    #[arg(long = "trunc-m", global = true)]
    pub trunc_m: Option<usize>,

    /// Circle sample count for torus fields [default: 256]
    #[arg(long = "torus-samples", global = true)]
    pub torus_samples: Option<usize>,

    /// Time grid `min,max,count`, log-spaced [default: 1e-4,50,64]
    #[arg(long = "t-grid", global = true)]
    pub t_grid: Option<String>,

    /// Key-value config file (`key = value` per line, keys as the long flags)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Re-run the configuration embedded in an earlier JSON report
    #[arg(long, global = true)]
    pub replay: Option<PathBuf>,
}

/// Everything a run depends on. Serialized verbatim into each report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub q: f64,
    pub trunc_n: usize,
    pub trunc_m: usize,
    pub t_grid: TGrid,
    pub torus_samples: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub command: Command,
}

impl RunConfig {
    pub fn with_defaults(command: Command) -> Self {
        Self {
            q: 0.5,
            trunc_n: 8,
            trunc_m: 3,
            t_grid: TGrid::default(),
            torus_samples: 256,
            seed: 0,
            format: Format::Json,
            out: None,
            command,
        }
    }

    /// Merges all configuration sources and validates the result.
    pub fn resolve(g: &GlobalArgs, command: Option<Command>) -> Result<Self> {
        let mut cfg = match (&g.replay, command.clone()) {
            (Some(path), _) => load_replay(path)?,
            (None, Some(c)) => Self::with_defaults(c),
            (None, None) => bail!("no subcommand given (see --help)"),
        };
        if let Some(path) = &g.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
            cfg.apply_file(&text).with_context(|| format!("in config file {}", path.display()))?;
        }
        if let Some(c) = command {
            cfg.command = c;
        }
        if let Some(q) = g.q {
            cfg.q = q;
        }
        if let Some(s) = g.seed {
            cfg.seed = s;
        }
        if let Some(f) = g.format {
            cfg.format = f;
        }
        if let Some(o) = &g.out {
            cfg.out = Some(o.clone());
        }
        if let Some(n) = g.trunc_n {
            cfg.trunc_n = n;
        }
        if let Some(m) = g.trunc_m {
            cfg.trunc_m = m;
        }
        if let Some(s) = g.torus_samples {
            cfg.torus_samples = s;
        }
        if let Some(t) = &g.t_grid {
            cfg.t_grid = TGrid::parse(t)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", ln + 1))?;
            self.apply_key(key.trim(), value.trim())
                .with_context(|| format!("line {}", ln + 1))?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| anyhow!("`{key}` expects {what}, got `{value}`");
        match key.replace('_', "-").as_str() {
            "q" => self.q = value.parse().map_err(|_| bad("a number"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "format" => self.format = Format::from_str(value, true).map_err(|_| bad("json or csv"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "trunc-n" => self.trunc_n = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "trunc-m" => self.trunc_m = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "torus-samples" => self.torus_samples = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "t-grid" => self.t_grid = TGrid::parse(value)?,
            other => bail!("unknown key `{other}` (known: q, seed, format, out, trunc-n, trunc-m, torus-samples, t-grid)"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q;
        if !(q.is_finite() && q != 0.0 && q.abs() < 1.0) {
            return Err(Error::InvalidQ(q).into());
        }
        TruncRep::<f64>::new(self.trunc_n, self.trunc_m, q).context("invalid truncation")?;
        TorusSample::<f64>::new(self.torus_samples).context("invalid torus sample count")?;
        let g = &self.t_grid;
        TGrid::new(g.t_min, g.t_max, g.count).context("invalid t-grid")?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON of every input that affects the result.
    pub fn input_hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.format = Format::Json;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }
}

fn load_replay(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading report {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{} is not a JSON report", path.display()))?;
    let cfg = v.get("config").ok_or_else(|| anyhow!("{} has no `config` field", path.display()))?;
    let mut cfg: RunConfig = serde_json::from_value(cfg.clone()).with_context(|| format!("bad `config` in {}", path.display()))?;
    // where the earlier report went is not an input
    cfg.out = None;
    Ok(cfg)
}
