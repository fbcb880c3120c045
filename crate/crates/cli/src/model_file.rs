//! `model.txt`: a discovered model in TOML.
//!
//! ```toml
//! format_version = 1
//! alpha = 1.0000000000000000e0
//! threshold = 1.0000000000000000e-3
//!
//! [[terms]]
//! index = 5
//! channel = "I2"
//! power = 1
//! activation = "identity"
//! w1 = ...
//! w2 = ...
//!
//! [[parameters]]
//! name = "mu"
//! value = ...
//! unit = "kPa"
//! term = 5
//!
//! [fit]
//! r2_overall = ...
//!
//! [[fit.curves]]
//! protocol = "1:0.5"
//! component = "p1"
//! r2 = ...
//!
//! [train]
//! ...
//! ```
//!
//! Floats carry 17 significant digits, so parsing restores every weight
//! bit for bit. An undefined R² is written by omitting its key.

use std::fmt::Write as _;

use cann::discovery::{ActiveTerm, Component, CurveFit, DiscoveredModel, FitReport, Unit};
use cann::{Activation, TermSpec, TrainConfig};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::format::num;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: DiscoveredModel,
    pub threshold: f64,
    /// Training configuration of the run, including its seed.
    pub train: TrainConfig,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn activation_key(a: Activation) -> &'static str {
    match a {
        Activation::Identity => "identity",
        Activation::Exponential => "exponential",
    }
}

fn unit_key(u: Unit) -> &'static str {
    match u {
        Unit::Kilopascal => "kPa",
        Unit::Dimensionless => "1",
    }
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let _ = writeln!(s, "format_version = {FORMAT_VERSION}");
        let _ = writeln!(s, "alpha = {}", num(m.alpha));
        let _ = writeln!(s, "threshold = {}", num(self.threshold));
        for t in &m.terms {
            let spec = t.spec();
            let _ = writeln!(s, "\n[[terms]]");
            let _ = writeln!(s, "index = {}", t.index);
            let _ = writeln!(s, "channel = {}", quote(spec.channel.key()));
            let _ = writeln!(s, "power = {}", spec.power.exponent());
            let _ = writeln!(s, "activation = {}", quote(activation_key(spec.activation)));
            let _ = writeln!(s, "w1 = {}", num(t.w1));
            let _ = writeln!(s, "w2 = {}", num(t.w2));
        }
        for p in m.parameters() {
            let _ = writeln!(s, "\n[[parameters]]");
            let _ = writeln!(s, "name = {}", quote(&p.name));
            let _ = writeln!(s, "value = {}", num(p.value));
            let _ = writeln!(s, "unit = {}", quote(unit_key(p.unit)));
            let _ = writeln!(s, "term = {}", p.term);
        }
        let _ = writeln!(s, "\n[fit]");
        if let Some(r2) = m.fit.overall {
            let _ = writeln!(s, "r2_overall = {}", num(r2));
        }
        for c in &m.fit.per_curve {
            let _ = writeln!(s, "\n[[fit.curves]]");
            let _ = writeln!(s, "protocol = {}", quote(&c.label));
            let _ = writeln!(s, "component = {}", quote(c.component.key()));
            if let Some(r2) = c.r2 {
                let _ = writeln!(s, "r2 = {}", num(r2));
            }
        }
        let t = &self.train;
        let _ = writeln!(s, "\n[train]");
        let _ = writeln!(s, "alpha = {}", num(t.alpha));
        let _ = writeln!(s, "p_norm = {}", t.p_norm);
        let _ = writeln!(s, "learning_rate = {}", num(t.learning_rate));
        let _ = writeln!(s, "beta1 = {}", num(t.beta1));
        let _ = writeln!(s, "beta2 = {}", num(t.beta2));
        let _ = writeln!(s, "epsilon = {}", num(t.epsilon));
        let _ = writeln!(s, "max_epochs = {}", t.max_epochs);
        let _ = writeln!(s, "seed = {}", t.seed);
        let _ = writeln!(s, "init_scale = {}", num(t.init_scale));
        let _ = writeln!(s, "convergence_tol = {}", num(t.convergence_tol));
        let _ = writeln!(s, "patience = {}", t.patience);
        let _ = writeln!(s, "restarts = {}", t.restarts);
        s
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let bad = |msg: String| CliError::Input(format!("{source}: {msg}"));
        let raw: Raw = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        if raw.format_version != FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                raw.format_version
            )));
        }
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in &raw.terms {
            let spec = TermSpec::by_index(t.index).ok_or_else(|| bad(format!("term index {} outside 1..=16", t.index)))?;
            if terms.last().is_some_and(|p: &ActiveTerm| p.index >= t.index) {
                return Err(bad(format!("term {} out of order or repeated", t.index)));
            }
            if t.channel != spec.channel.key()
                || t.power != spec.power.exponent()
                || t.activation != activation_key(spec.activation)
            {
                return Err(bad(format!(
                    "term {} is ({}, power {}, {}) in the catalog",
                    t.index,
                    spec.channel.key(),
                    spec.power.exponent(),
                    activation_key(spec.activation)
                )));
            }
            if !(t.w1.is_finite() && t.w1 >= 0.0 && t.w2.is_finite() && t.w2 >= 0.0) {
                return Err(bad(format!("term {} has invalid weights ({}, {})", t.index, t.w1, t.w2)));
            }
            terms.push(ActiveTerm {
                index: t.index,
                w1: t.w1,
                w2: t.w2,
            });
        }
        let mut per_curve = Vec::with_capacity(raw.fit.curves.len());
        for c in raw.fit.curves {
            let component = Component::parse(&c.component)
                .ok_or_else(|| bad(format!("unknown stress component {:?}", c.component)))?;
            per_curve.push(CurveFit {
                label: c.protocol,
                component,
                r2: c.r2,
            });
        }
        let model = DiscoveredModel {
            terms,
            alpha: raw.alpha,
            fit: FitReport {
                per_curve,
                overall: raw.fit.r2_overall,
            },
        };

        let expected = model.parameters();
        let consistent = expected.len() == raw.parameters.len()
            && expected.iter().zip(&raw.parameters).all(|(e, r)| {
                e.name == r.name && e.value.to_bits() == r.value.to_bits() && unit_key(e.unit) == r.unit && e.term == r.term
            });
        if !consistent {
            return Err(bad("parameters do not match the term weights".into()));
        }
        raw.train.validate().map_err(|e| bad(e.to_string()))?;
        Ok(ModelFile {
            model,
            threshold: raw.threshold,
            train: raw.train,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    format_version: u32,
    alpha: f64,
    threshold: f64,
    #[serde(default)]
    terms: Vec<RawTerm>,
    #[serde(default)]
    parameters: Vec<RawParameter>,
    fit: RawFit,
    train: TrainConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    index: usize,
    channel: String,
    power: u32,
    activation: String,
    w1: f64,
    w2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameter {
    name: String,
    value: f64,
    unit: String,
    term: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    r2_overall: Option<f64>,
    #[serde(default)]
    curves: Vec<RawCurve>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    protocol: String,
    component: String,
    r2: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use cann::datagen::{generate_fixture, standard_protocols};
    use cann::discovery::prune;
    use cann::{reference, Execution};

    fn file(w: &cann::NetworkWeights) -> ModelFile {
        let data = generate_fixture(&reference::right_atrium(), &standard_protocols(), Execution::Sequential).unwrap();
        ModelFile {
            model: prune(w, &data, 1e-3, 0.1).unwrap(),
            threshold: 1e-3,
            train: TrainConfig { seed: 42, ..Default::default() },
        }
    }

    #[test]
    fn round_trips() {
        for w in [reference::left_atrium(), reference::right_atrium(), cann::NetworkWeights::zeros()] {
            let f = file(&w);
            let text = f.to_text();
            let back = ModelFile::parse(&text, "x").unwrap();
            assert_eq!(back, f);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn undefined_r2_round_trips() {
        let mut f = file(&reference::left_atrium());
        f.model.fit.overall = None;
        f.model.fit.per_curve[3].r2 = None;
        assert_eq!(ModelFile::parse(&f.to_text(), "x").unwrap(), f);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let text = file(&reference::left_atrium()).to_text();
        for (from, to) in [
            ("format_version = 1", "format_version = 2"),
            ("channel = \"I2\"", "channel = \"I1\""),
            ("index = 13", "index = 17"),
            ("name = \"mu\"", "name = \"nu\""),
            ("[fit]", "[fit]\nextra = 1"),
        ] {
            let broken = text.replacen(from, to, 1);
            assert_ne!(broken, text, "{from}");
            assert!(ModelFile::parse(&broken, "x").is_err(), "{from} -> {to}");
        }
        assert!(ModelFile::parse("", "x").is_err());
    }
}
