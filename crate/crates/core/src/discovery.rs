//! Model selection over a penalty sweep, pruning and goodness of fit.

use std::fmt;

use crate::data::Dataset;
use crate::energy::{Activation, NetworkWeights, TermSpec, CATALOG};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::stress::{stress, term_stress};
use crate::training::{fit_with, TrainConfig, TrainState};

/// Penalties of the default sweep.
pub const DEFAULT_ALPHAS: [f64; 4] = [10.0, 1.0, 0.1, 0.01];
pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    P1,
    P2,
}

impl Component {
    pub fn key(self) -> &'static str {
        match self {
            Component::P1 => "p1",
            Component::P2 => "p2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "p1" | "P1" => Some(Component::P1),
            "p2" | "P2" => Some(Component::P2),
            _ => None,
        }
    }
}

/// R² of one (protocol, component) curve. `None` when the measured curve
/// has zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFit {
    pub label: String,
    pub component: Component,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    pub per_curve: Vec<CurveFit>,
    /// Pooled over every point and both components.
    pub overall: Option<f64>,
}

impl FitReport {
    pub fn curve(&self, label: &str, component: Component) -> Option<&CurveFit> {
        self.per_curve
            .iter()
            .find(|c| c.label == label && c.component == component)
    }
}

/// `1 − Σ(m − p)² / Σ(m − mean(m))²`, or `None` if `m` is constant.
pub fn coefficient_of_determination(measured: &[f64], predicted: &[f64]) -> Option<f64> {
    assert_eq!(measured.len(), predicted.len());
    if measured.is_empty() {
        return None;
    }
    let mean = measured.iter().sum::<f64>() / measured.len() as f64;
    let ss_tot: f64 = measured.iter().map(|m| (m - mean) * (m - mean)).sum();
    if ss_tot <= 0.0 {
        return None;
    }
    let ss_res: f64 = measured
        .iter()
        .zip(predicted)
        .map(|(m, p)| (m - p) * (m - p))
        .sum();
    Some(1.0 - ss_res / ss_tot)
}

/// Per-curve and pooled R² of `w` against `data`.
pub fn r_squared(data: &Dataset, w: &NetworkWeights) -> Result<FitReport> {
    data.ensure_non_empty()?;
    let mut per_curve = Vec::with_capacity(2 * data.curves.len());
    let mut all_measured = Vec::with_capacity(2 * data.len());
    let mut all_predicted = Vec::with_capacity(2 * data.len());
    for curve in &data.curves {
        if curve.points.is_empty() {
            return Err(Error::InvalidConfig(format!("protocol {} has no points", curve.label)));
        }
        let mut m = (Vec::new(), Vec::new());
        let mut p = (Vec::new(), Vec::new());
        for pt in &curve.points {
            let s = stress(pt.stretch, w)?;
            m.0.push(pt.p1);
            m.1.push(pt.p2);
            p.0.push(s.p1);
            p.1.push(s.p2);
        }
        for (component, measured, predicted) in [(Component::P1, &m.0, &p.0), (Component::P2, &m.1, &p.1)] {
            per_curve.push(CurveFit {
                label: curve.label.clone(),
                component,
                r2: coefficient_of_determination(measured, predicted),
            });
            all_measured.extend_from_slice(measured);
            all_predicted.extend_from_slice(predicted);
        }
    }
    Ok(FitReport {
        per_curve,
        overall: coefficient_of_determination(&all_measured, &all_predicted),
    })
}

/// A surviving catalog term and its raw weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveTerm {
    pub index: usize,
    pub w1: f64,
    pub w2: f64,
}

impl ActiveTerm {
    pub fn spec(&self) -> &'static TermSpec {
        &CATALOG[self.index - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Kilopascal,
    Dimensionless,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Kilopascal => "kPa",
            Unit::Dimensionless => "-",
        }
    }
}

/// A named physical parameter of the discovered energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    /// ASCII name, e.g. `mu`, `a1`, `b_t4`.
    pub name: String,
    /// Display symbol, e.g. `μ`.
    pub symbol: String,
    pub value: f64,
    pub unit: Unit,
    /// Catalog index of the owning term.
    pub term: usize,
}

/// A pruned network with its fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveredModel {
    /// In catalog order.
    pub terms: Vec<ActiveTerm>,
    pub alpha: f64,
    pub fit: FitReport,
}

fn base_names(t: &TermSpec) -> (&'static str, &'static str) {
    match t.channel.fiber_family() {
        None => match t.activation {
            Activation::Identity => ("mu", ""),
            Activation::Exponential => ("a", "b"),
        },
        Some(1) => ("a1", "b1"),
        Some(_) => ("a2", "b2"),
    }
}

fn display(name: &str) -> String {
    match name.strip_prefix("mu") {
        Some(rest) => format!("μ{rest}"),
        None => name.to_string(),
    }
}

impl DiscoveredModel {
    /// The model with every inactive term zeroed.
    pub fn weights(&self) -> NetworkWeights {
        let mut w = NetworkWeights::zeros();
        for t in &self.terms {
            w = w
                .with_term(t.index, t.w1, t.w2)
                .expect("active terms hold valid weights");
        }
        w
    }

    pub fn indices(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.index).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Identity terms report `w1·w2` (kPa); exponential terms report
    /// `a = w2` (kPa) and `b = w1`. Names shared by several active terms
    /// get a `_t<index>` suffix.
    pub fn parameters(&self) -> Vec<Parameter> {
        let count = |name: &str| {
            self.terms
                .iter()
                .filter(|t| base_names(t.spec()).0 == name)
                .count()
        };
        let mut out = Vec::new();
        for t in &self.terms {
            let spec = t.spec();
            let (outer, inner) = base_names(spec);
            let suffix = if count(outer) > 1 { format!("_t{}", t.index) } else { String::new() };
            let mut push = |name: &str, value: f64, unit: Unit| {
                let name = format!("{name}{suffix}");
                out.push(Parameter {
                    symbol: display(&name),
                    name,
                    value,
                    unit,
                    term: t.index,
                });
            };
            match spec.activation {
                Activation::Identity => push(outer, t.w1 * t.w2, Unit::Kilopascal),
                Activation::Exponential => {
                    push(outer, t.w2, Unit::Kilopascal);
                    let inner = if inner.is_empty() { "b" } else { inner };
                    push(inner, t.w1, Unit::Dimensionless);
                }
            }
        }
        out
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters().into_iter().find(|p| p.name == name).map(|p| p.value)
    }

    /// Symbolic energy, e.g. `ψ = μ[I2^{3/2} − 3√3] + a1[I5,11 − 1]²`.
    pub fn render(&self) -> String {
        render_model(self)
    }
}

/// Keeps the terms whose largest stress contribution over `data` exceeds
/// `threshold` times the largest measured stress.
pub fn prune(w: &NetworkWeights, data: &Dataset, threshold: f64, alpha: f64) -> Result<DiscoveredModel> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::InvalidConfig(format!("prune threshold must be >= 0, got {threshold}")));
    }
    data.ensure_non_empty()?;
    let cutoff = threshold * data.max_abs_stress();
    let mut terms = Vec::new();
    for spec in &CATALOG {
        let (w1, w2) = w.term(spec.index);
        if w1 == 0.0 || w2 == 0.0 {
            continue;
        }
        let mut peak = 0.0f64;
        for (_, p) in data.rows() {
            let s = term_stress(p.stretch, w, spec.index)?;
            peak = peak.max(s.p1.abs()).max(s.p2.abs());
        }
        if peak > cutoff {
            terms.push(ActiveTerm {
                index: spec.index,
                w1,
                w2,
            });
        }
    }
    let kept = w.restricted_to(&terms.iter().map(|t| t.index).collect::<Vec<_>>());
    Ok(DiscoveredModel {
        terms,
        alpha,
        fit: r_squared(data, &kept)?,
    })
}

fn significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = 4 - 1 - v.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, v)
}

/// Deterministic symbolic rendering with a parameter list.
pub fn render_model(m: &DiscoveredModel) -> String {
    if m.terms.is_empty() {
        return "ψ = 0".to_string();
    }
    let params = m.parameters();
    let mut parts = Vec::new();
    for t in &m.terms {
        let spec = t.spec();
        let mine: Vec<&Parameter> = params.iter().filter(|p| p.term == t.index).collect();
        let basis = spec.basis_symbol();
        parts.push(match spec.activation {
            Activation::Identity => format!("{}{basis}", mine[0].symbol),
            Activation::Exponential => format!("{}[exp({}{basis}) − 1]", mine[0].symbol, mine[1].symbol),
        });
    }
    let mut out = format!("ψ = {}", parts.join(" + "));
    out.push_str("\nwhere");
    for p in &params {
        match p.unit {
            Unit::Kilopascal => out.push_str(&format!("\n  {} = {} kPa", p.symbol, significant(p.value))),
            Unit::Dimensionless => out.push_str(&format!("\n  {} = {}", p.symbol, significant(p.value))),
        }
    }
    out
}

impl fmt::Display for DiscoveredModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_model(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub threshold: f64,
    /// Runs within this much of the best R² compete on sparsity.
    pub margin: f64,
    /// Overrides the automatic choice.
    pub selected_alpha: Option<f64>,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            margin: DEFAULT_MARGIN,
            selected_alpha: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub alpha: f64,
    pub outcome: Result<(TrainState, DiscoveredModel)>,
}

impl SweepRun {
    pub fn model(&self) -> Option<&DiscoveredModel> {
        self.outcome.as_ref().ok().map(|(_, m)| m)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by α descending.
    pub runs: Vec<SweepRun>,
    /// Index into `runs`, `None` when no run qualifies.
    pub selected: Option<usize>,
}

impl SweepResult {
    pub fn selected_run(&self) -> Option<&SweepRun> {
        self.selected.map(|i| &self.runs[i])
    }
}

/// One independent fit per α, all with the same data and seed.
pub fn sweep(data: &Dataset, base: &TrainConfig, alphas: &[f64], options: &SweepOptions) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("alpha list is empty".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::InvalidConfig(format!("alpha must be finite and >= 0, got {a}")));
    }
    if !(options.margin.is_finite() && options.margin >= 0.0) {
        return Err(Error::InvalidConfig(format!("margin must be >= 0, got {}", options.margin)));
    }
    data.ensure_non_empty()?;
    base.validate()?;

    let mut alphas = alphas.to_vec();
    alphas.sort_by(|a, b| b.total_cmp(a));
    alphas.dedup();
    if let Some(a) = options.selected_alpha {
        if !alphas.contains(&a) {
            return Err(Error::InvalidConfig(format!("selected alpha {a} is not in the sweep")));
        }
    }

    let points = data.points();
    let runs = par::map(options.exec, &alphas, |&alpha| {
        let config = TrainConfig { alpha, ..base.clone() };
        let outcome = fit_with(&points, &config, options.exec)
            .and_then(|state| prune(&state.weights, data, options.threshold, alpha).map(|m| (state, m)));
        SweepRun { alpha, outcome }
    });

    let selected = match options.selected_alpha {
        Some(a) => runs.iter().position(|r| r.alpha == a && r.outcome.is_ok()),
        None => select(&runs, options.margin),
    };
    Ok(SweepResult { runs, selected })
}

/// Sparsest run whose R² is within `margin` of the best; ties go to the
/// higher R², then to the larger α.
pub fn select(runs: &[SweepRun], margin: f64) -> Option<usize> {
    let scored: Vec<(usize, usize, f64)> = runs
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let m = r.model()?;
            Some((i, m.terms.len(), m.fit.overall?))
        })
        .collect();
    let best = scored.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    scored
        .into_iter()
        .filter(|s| s.2 >= best - margin)
        .min_by(|a, b| {
            a.1.cmp(&b.1)
                .then(b.2.total_cmp(&a.2))
                .then(runs[b.0].alpha.total_cmp(&runs[a.0].alpha))
        })
        .map(|s| s.0)
}
