use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::constellation::{self, Constellation, Family, NormMode};

/// JSON experiment description. Unknown keys are rejected.
///
/// ```json
/// {
///   "name": "(4,2)",
///   "constellation": { "family": "psk-pam", "m": 8, "k": 4, "norm": "mean" },
///   "phase_bound": 0.39269908169872414,
///   "snr_db": [10, 15, 20, 25],
///   "trials_per_point": 100000,
///   "master_seed": 1,
///   "decoder": { "allow_reestimate": true, "receiver": "auto" }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub constellation: ConstellationSpec,
    /// Phase-error bound `a` in radians.
    pub phase_bound: f64,
    pub snr_db: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub decoder: DecoderOptions,
    #[serde(default, skip_serializing_if = "OutputPaths::is_empty")]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    pub family: Family,
    pub m: usize,
    /// Ray count; required for `psk-pam`, ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub norm: NormMode,
}

impl ConstellationSpec {
    pub fn build(&self) -> Result<Constellation, HarnessError> {
        if self.family == Family::PskPam && self.k.is_none() {
            return Err(HarnessError::Config(
                "psk-pam constellations need `k`".into(),
            ));
        }
        Ok(constellation::build(
            self.family,
            self.m,
            self.k,
            self.norm,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    /// Two-step for ring constellations, coherent minimum distance for QAM.
    #[default]
    Auto,
    TwoStep,
    Coherent,
}

impl std::str::FromStr for Receiver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Receiver::Auto),
            "two-step" => Ok(Receiver::TwoStep),
            "coherent" => Ok(Receiver::Coherent),
            other => Err(format!(
                "unknown receiver `{other}` (expected auto, two-step or coherent)"
            )),
        }
    }
}

impl Receiver {
    pub fn as_str(self) -> &'static str {
        match self {
            Receiver::Auto => "auto",
            Receiver::TwoStep => "two-step",
            Receiver::Coherent => "coherent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderOptions {
    #[serde(default = "default_true")]
    pub allow_reestimate: bool,
    #[serde(default)]
    pub receiver: Receiver,
}

fn default_true() -> bool {
    true
}

impl Default for DecoderOptions {
    fn default() -> Self {
        DecoderOptions {
            allow_reestimate: true,
            receiver: Receiver::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl OutputPaths {
    pub fn is_empty(&self) -> bool {
        self.csv.is_none() && self.svg.is_none()
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Canonical serialization; the config hash is taken over these bytes.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("config serializes")
    }

    /// Receiver actually used for this constellation.
    pub fn effective_receiver(&self) -> Receiver {
        match (self.decoder.receiver, self.constellation.family) {
            (Receiver::Auto, Family::Qam) => Receiver::Coherent,
            (Receiver::Auto, _) => Receiver::TwoStep,
            (r, _) => r,
        }
    }

    pub fn label(&self) -> Result<String, HarnessError> {
        match &self.name {
            Some(n) => Ok(n.clone()),
            None => Ok(self.constellation.build()?.label()),
        }
    }

    pub fn validate(&self) -> Result<Constellation, HarnessError> {
        if self.trials_per_point < 1 {
            return Err(HarnessError::Config("trials_per_point must be >= 1".into()));
        }
        if !(0.0..=PI).contains(&self.phase_bound) {
            return Err(HarnessError::Config(format!(
                "phase_bound must lie in [0, π] (got {})",
                self.phase_bound
            )));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(HarnessError::Config("snr_db entries must be finite".into()));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config(
                "snr_db must be strictly increasing".into(),
            ));
        }
        let c = self.constellation.build()?;
        if self.effective_receiver() == Receiver::TwoStep && !c.family().is_ring() {
            return Err(HarnessError::Config(
                "the two-step receiver needs a psk-pam or psk constellation".into(),
            ));
        }
        Ok(c)
    }
}

/// Parse `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{s}` in snr grid"))
    };
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, step, stop] = parts.as_slice() else {
            return Err(format!("range `{text}` must be start:step:stop"));
        };
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if step.is_nan() || step <= 0.0 {
            return Err("range step must be positive".into());
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        return Ok((0..=count as usize)
            .map(|i| start + i as f64 * step)
            .collect());
    }
    text.split(',').map(num).collect()
}
