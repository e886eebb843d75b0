//! Run configuration: a flat `key = value` file whose entries are
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mvsk_core::{Domain, LambdaPoint};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub prices: Option<bool>,
    pub model: Option<PathBuf>,
    /// Half-width of the cube; absent means the simplex.
    pub cube: Option<f64>,
    pub grid_s: Option<u32>,
    pub eta: Option<f64>,
    pub sparse_k: Option<usize>,
    pub max_iter: Option<usize>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub lambda1_filter: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.cube {
            if b.is_nan() || b <= 0.0 {
                bail!("cube half-width must be positive, got {b}");
            }
        }
        if self.grid_s == Some(0) {
            bail!("grid_s must be at least 1");
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                bail!("eta must lie in (0, 1), got {eta}");
            }
        }
        if self.max_iter == Some(0) {
            bail!("max_iter must be at least 1");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        Ok(())
    }
}

pub fn parse_lambda(s: &str) -> Result<LambdaPoint> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid lambda entry {p:?}"))
        })
        .collect::<Result<_>>()?;
    let Ok(raw) = <[f64; 4]>::try_from(parts.as_slice()) else {
        bail!("lambda needs four comma-separated values, got {}", parts.len());
    };
    // accept weights that are off the simplex by rounding in the last printed digit
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        bail!("lambda entries must sum to 1, got {sum}");
    }
    Ok(LambdaPoint::normalized(raw)?)
}

pub fn domain_from(cube: Option<f64>) -> Result<Domain> {
    Ok(match cube {
        Some(b) => Domain::cube(b)?,
        None => Domain::simplex(),
    })
}
