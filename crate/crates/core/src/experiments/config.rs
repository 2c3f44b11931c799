//! Key-value run configuration.
//!
//! ```text
//! channel = "ad"
//! c = [0.4, 1.0]
//! points = 101
//! measures = ["I4", "I3"]
//! rng_seed = 7
//! ```
//!
//! Every key is optional. Values from a file override the built-in
//! defaults, `GENCORR_SEED` overrides `rng_seed`, and command-line flags
//! override both.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Measure, SweepSpec};
use crate::channels::ChannelKind;
use crate::classical_search::SearchConfig;
use crate::error::{Error, Result};

pub const SEED_ENV: &str = "GENCORR_SEED";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub channel: Option<ChannelKind>,
    pub c: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub measures: Option<Vec<Measure>>,
    pub output: Option<PathBuf>,
    pub symmetry: Option<bool>,
    pub kappa: Option<f64>,
    pub starts: Option<usize>,
    pub max_evals: Option<usize>,
    pub ftol: Option<f64>,
    pub rng_seed: Option<u64>,
    pub qubit_angles: Option<bool>,
    pub large_cell_starts: Option<usize>,
    pub large_cell_max_evals: Option<usize>,
    pub max_cell_dim: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply_search(&self, cfg: &mut SearchConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(starts, max_evals, ftol, rng_seed, qubit_angles, large_cell_starts, large_cell_max_evals, max_cell_dim);
    }

    pub fn apply(&self, spec: &mut SweepSpec) {
        if let Some(ch) = self.channel {
            spec.channel = ch;
        }
        if let Some(c) = &self.c {
            spec.c_values = c.clone();
        }
        if self.points.is_some() {
            spec.p_points = self.points;
        }
        if let Some(m) = &self.measures {
            spec.measures = m.clone();
        }
        if self.output.is_some() {
            spec.output = self.output.clone();
        }
        if let Some(s) = self.symmetry {
            spec.symmetry = s;
        }
        self.apply_search(&mut spec.search);
    }
}

/// Seed from `GENCORR_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| Error::Config(format!("{SEED_ENV}={s}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
    }
}

/// Default sweep for `channel`: `c = 1`, I-type measures.
pub fn default_spec(channel: ChannelKind) -> SweepSpec {
    SweepSpec::new(channel, vec![1.0], vec![Measure::I4, Measure::I3])
}
