//! Run configuration (TOML).
//!
//! ```toml
//! [train]
//! max_epochs = 50000
//!
//! [sweep]
//! alphas = [10.0, 1.0, 0.1, 0.01]
//! margin = 0.01
//! select_alpha = 1.0
//!
//! [prune]
//! threshold = 1e-3
//!
//! [generate]
//! preset = "left_atrium"
//! protocols = ["1:0.5", "1:1", "0.5:1"]
//! n_points = 20
//! peak_stretch = 1.3
//! noise_std = 0.0
//! seed = 0
//!
//! [[generate.terms]]
//! index = 5
//! w1 = 1.0
//! w2 = 1.37
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::path::Path;

use cann::datagen::{self, ProtocolSpec};
use cann::discovery::{DEFAULT_ALPHAS, DEFAULT_MARGIN, DEFAULT_THRESHOLD};
use cann::{reference, NetworkWeights, TrainConfig};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub sweep: SweepSection,
    pub prune: PruneSection,
    pub generate: GenerateSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    pub margin: f64,
    pub select_alpha: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            alphas: DEFAULT_ALPHAS.to_vec(),
            margin: DEFAULT_MARGIN,
            select_alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneSection {
    pub threshold: f64,
}

impl Default for PruneSection {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermWeights {
    pub index: usize,
    pub w1: f64,
    pub w2: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    /// `left_atrium` or `right_atrium`; explicit terms are added on top.
    pub preset: Option<String>,
    pub terms: Vec<TermWeights>,
    /// `t2:t1` labels.
    pub protocols: Vec<String>,
    pub n_points: usize,
    pub peak_stretch: f64,
    pub noise_std: f64,
    /// Protocol `i` draws its noise from `seed + i`.
    pub seed: u64,
}

impl Default for GenerateSection {
    fn default() -> Self {
        Self {
            preset: None,
            terms: Vec::new(),
            protocols: datagen::STANDARD_LABELS.iter().map(|s| s.to_string()).collect(),
            n_points: datagen::DEFAULT_POINTS,
            peak_stretch: datagen::DEFAULT_PEAK_STRETCH,
            noise_std: 0.0,
            seed: 0,
        }
    }
}

impl GenerateSection {
    pub fn weights(&self) -> CliResult<NetworkWeights> {
        let mut w = match &self.preset {
            Some(name) => reference::by_name(name)
                .ok_or_else(|| CliError::Input(format!("unknown preset {name:?} (expected left_atrium or right_atrium)")))?,
            None if self.terms.is_empty() => {
                return Err(CliError::Input("[generate] needs a preset or at least one [[generate.terms]] entry".into()))
            }
            None => NetworkWeights::zeros(),
        };
        for t in &self.terms {
            w = w.with_term(t.index, t.w1, t.w2)?;
        }
        Ok(w)
    }

    pub fn protocols(&self) -> CliResult<Vec<ProtocolSpec>> {
        if self.protocols.is_empty() {
            return Err(CliError::Input("[generate] protocols is empty".into()));
        }
        self.protocols
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let mut spec = ProtocolSpec::from_label(label)?;
                spec.n_points = self.n_points;
                spec.peak_stretch = self.peak_stretch;
                spec.noise_std = self.noise_std;
                spec.seed = self.seed.wrapping_add(i as u64);
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        config.train.validate().map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::read(p, e))?;
                Self::parse(&text, &p.display().to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::parse("", "x").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sweep.alphas, vec![10.0, 1.0, 0.1, 0.01]);
        assert_eq!(c.generate.protocols().unwrap().len(), 5);
    }

    #[test]
    fn sections_parse() {
        let text = r#"
[train]
alpha = 0.5
max_epochs = 10

[sweep]
alphas = [1.0, 0.1]
select_alpha = 0.1

[prune]
threshold = 0.01

[generate]
preset = "right_atrium"
protocols = ["1:1"]
noise_std = 0.2
seed = 4

[[generate.terms]]
index = 1
w1 = 1.0
w2 = 0.5
"#;
        let c = RunConfig::parse(text, "x").unwrap();
        assert_eq!(c.train.alpha, 0.5);
        assert_eq!(c.train.max_epochs, 10);
        assert_eq!(c.train.restarts, TrainConfig::default().restarts);
        assert_eq!(c.sweep.select_alpha, Some(0.1));
        assert_eq!(c.prune.threshold, 0.01);
        let w = c.generate.weights().unwrap();
        assert_eq!(w.term(1), (1.0, 0.5));
        assert_eq!(w.term(16), (reference::right::B2, reference::right::A2));
        let p = c.generate.protocols().unwrap();
        assert_eq!((p[0].noise_std, p[0].seed), (0.2, 4));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("[train]\nlearning_rat = 0.1\n", "x").unwrap_err().to_string();
        assert!(err.contains("learning_rat"), "{err}");
        let err = RunConfig::parse("[trian]\n", "x").unwrap_err().to_string();
        assert!(err.contains("trian"), "{err}");
        let err = RunConfig::parse("[train]\np_norm = 3\n", "x").unwrap_err().to_string();
        assert!(err.contains("p_norm"), "{err}");
    }

    #[test]
    fn generate_needs_a_model() {
        assert!(GenerateSection::default().weights().is_err());
        let g = GenerateSection { preset: Some("nope".into()), ..Default::default() };
        assert!(g.weights().is_err());
    }
}
