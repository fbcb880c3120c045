//! Regularized least-squares fit of the network weights.
//!
//! The objective is
//!
//! ```text
//! L(w) = (1/n) Σ (P1(λj) − P̂1j)² + (1/n) Σ (P2(λj) − P̂2j)² + α Σ |w_i|^p
//! ```
//!
//! minimized by full-batch ADAM followed by a projection onto `w ≥ 0`
//! after every step. With `p = 1` the subgradient at zero is taken as
//! zero, so weights that the projection parks at zero stay there unless
//! the data term pulls them back.
//!
//! [`fit`] runs `restarts` independent seeded initializations (in parallel
//! when available) and keeps the one with the lowest loss. Each restart is
//! single-threaded and bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::energy::{NetworkWeights, N_WEIGHTS};
use crate::error::{Error, Result};
use crate::kinematics::BiaxialPoint;
use crate::par::{self, Execution};
use crate::stress::{PreparedPoint, StressSensitivity};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Penalty weight α.
    pub alpha: f64,
    /// Exponent of the penalty norm, 1 or 2.
    pub p_norm: u32,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Initial weights are drawn uniformly from `[0, init_scale)`.
    pub init_scale: f64,
    /// Relative improvement of the best loss below which an epoch counts
    /// as stalled.
    pub convergence_tol: f64,
    /// Consecutive stalled epochs before stopping.
    pub patience: usize,
    /// Independent seeded initializations; the lowest final loss wins.
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            p_norm: 1,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_epochs: 100_000,
            seed: 0,
            init_scale: 0.5,
            convergence_tol: 1e-10,
            patience: 5_000,
            restarts: 8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !matches!(self.p_norm, 1 | 2) {
            return bad(format!("p_norm must be 1 or 2, got {}", self.p_norm));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return bad(format!("init_scale must be > 0, got {}", self.init_scale));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol >= 0.0) {
            return bad(format!("convergence_tol must be >= 0, got {}", self.convergence_tol));
        }
        if self.patience == 0 {
            return bad("patience must be >= 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be >= 1".into());
        }
        Ok(())
    }
}

/// Outcome of a fit. `weights` are the lowest-loss weights seen, while the
/// moments belong to the last ADAM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub weights: NetworkWeights,
    pub first_moment: [f64; N_WEIGHTS],
    pub second_moment: [f64; N_WEIGHTS],
    /// Epochs actually run.
    pub epoch: usize,
    /// Best-so-far loss after each epoch (non-increasing).
    pub loss_history: Vec<f64>,
    /// Total loss at `weights`.
    pub loss: f64,
    /// Data term alone at `weights`.
    pub data_loss: f64,
    /// Which restart produced this state.
    pub restart: usize,
    /// Restarts that diverged and were discarded.
    pub diverged_restarts: usize,
}

/// The loss over a fixed training set, with cached per-point factors.
#[derive(Debug, Clone)]
pub struct Objective {
    points: Vec<PreparedPoint>,
    targets: Vec<(f64, f64)>,
    alpha: f64,
    p_norm: u32,
}

impl Objective {
    pub fn new(data: &[BiaxialPoint], alpha: f64, p_norm: u32) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(Self {
            points: data.iter().map(|p| PreparedPoint::new(p.stretch)).collect(),
            targets: data.iter().map(|p| (p.p1, p.p2)).collect(),
            alpha,
            p_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn penalty(&self, w: &[f64; N_WEIGHTS]) -> f64 {
        let norm: f64 = match self.p_norm {
            1 => w.iter().map(|x| x.abs()).sum(),
            _ => w.iter().map(|x| x * x).sum(),
        };
        self.alpha * norm
    }

    fn add_penalty_gradient(&self, w: &[f64; N_WEIGHTS], grad: &mut [f64; N_WEIGHTS]) {
        for (g, &x) in grad.iter_mut().zip(w) {
            *g += match self.p_norm {
                // sign(0) := 0
                1 if x > 0.0 => self.alpha,
                1 if x < 0.0 => -self.alpha,
                1 => 0.0,
                _ => 2.0 * self.alpha * x,
            };
        }
    }

    /// Mean squared stress error over both components.
    pub fn data_loss(&self, w: &[f64; N_WEIGHTS]) -> Result<f64> {
        let (mut s1, mut s2) = (0.0, 0.0);
        for (pt, &(t1, t2)) in self.points.iter().zip(&self.targets) {
            let p = pt.stress(w)?;
            s1 += (p.p1 - t1) * (p.p1 - t1);
            s2 += (p.p2 - t2) * (p.p2 - t2);
        }
        let n = self.points.len() as f64;
        Ok(s1 / n + s2 / n)
    }

    pub fn loss(&self, w: &[f64; N_WEIGHTS]) -> Result<f64> {
        Ok(self.data_loss(w)? + self.penalty(w))
    }

    /// Loss and its gradient; `grad` is overwritten.
    pub fn loss_and_gradient(&self, w: &[f64; N_WEIGHTS], grad: &mut [f64; N_WEIGHTS]) -> Result<f64> {
        let mut sens = StressSensitivity::default();
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut acc = [0.0; N_WEIGHTS];
        for (pt, &(t1, t2)) in self.points.iter().zip(&self.targets) {
            let p = pt.stress_and_gradient(w, &mut sens)?;
            let (r1, r2) = (p.p1 - t1, p.p2 - t2);
            s1 += r1 * r1;
            s2 += r2 * r2;
            for ((a, d1), d2) in acc.iter_mut().zip(&sens.dp1).zip(&sens.dp2) {
                *a += r1 * d1 + r2 * d2;
            }
        }
        let n = self.points.len() as f64;
        for (g, a) in grad.iter_mut().zip(acc) {
            *g = 2.0 * a / n;
        }
        self.add_penalty_gradient(w, grad);
        Ok(s1 / n + s2 / n + self.penalty(w))
    }
}

/// Loss at `w` over `data`.
pub fn loss(data: &[BiaxialPoint], w: &NetworkWeights, alpha: f64, p_norm: u32) -> Result<f64> {
    Objective::new(data, alpha, p_norm)?.loss(&w.to_flat())
}

/// Analytic loss gradient in the flat layout `[w1.., w2..]`.
pub fn loss_gradient(data: &[BiaxialPoint], w: &NetworkWeights, alpha: f64, p_norm: u32) -> Result<[f64; N_WEIGHTS]> {
    let mut grad = [0.0; N_WEIGHTS];
    Objective::new(data, alpha, p_norm)?.loss_and_gradient(&w.to_flat(), &mut grad)?;
    Ok(grad)
}

/// ADAM with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: [f64; N_WEIGHTS],
    v: [f64; N_WEIGHTS],
    t: i32,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            m: [0.0; N_WEIGHTS],
            v: [0.0; N_WEIGHTS],
            t: 0,
        }
    }

    pub fn from_config(c: &TrainConfig) -> Self {
        Self::new(c.learning_rate, c.beta1, c.beta2, c.epsilon)
    }

    /// One unprojected update of `w` along gradient `g`.
    pub fn step(&mut self, w: &mut [f64], g: &[f64]) {
        self.t = self.t.saturating_add(1);
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..w.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            w[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }

    pub fn first_moment(&self) -> &[f64; N_WEIGHTS] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64; N_WEIGHTS] {
        &self.v
    }
}

/// Clamps every entry at zero.
pub fn project_non_negative(w: &mut [f64]) {
    for x in w {
        *x = x.max(0.0);
    }
}

/// Seeded initial weights of one restart, uniform in `[0, init_scale)`.
pub fn initial_weights(config: &TrainConfig, restart: usize) -> [f64; N_WEIGHTS] {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    std::array::from_fn(|_| config.init_scale * rng.random::<f64>())
}

fn diverged(epoch: usize, cause: Error) -> Error {
    match cause {
        Error::Overflow { term, argument, .. } => Error::Divergence {
            epoch,
            term: Some(term),
            reason: format!("exponential argument {argument:.6e} overflowed"),
        },
        other => Error::Divergence {
            epoch,
            term: other.term(),
            reason: other.to_string(),
        },
    }
}

/// Runs a single restart, calling `observer` with the projected weights
/// after every epoch.
pub fn fit_restart<F>(objective: &Objective, config: &TrainConfig, restart: usize, mut observer: F) -> Result<TrainState>
where
    F: FnMut(usize, &[f64; N_WEIGHTS]),
{
    config.validate()?;
    let mut w = initial_weights(config, restart);
    let mut adam = Adam::from_config(config);
    let mut grad = [0.0; N_WEIGHTS];
    let mut best = (f64::INFINITY, w);
    let mut history = Vec::with_capacity(config.max_epochs.min(1 << 20));
    let mut stalled = 0usize;
    let mut epochs = 0;

    for epoch in 0..config.max_epochs {
        let loss = objective
            .loss_and_gradient(&w, &mut grad)
            .map_err(|e| diverged(epoch, e))?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                term: None,
                reason: format!("non-finite loss {loss}"),
            });
        }
        let improvement = if best.0.is_finite() { (best.0 - loss) / best.0.abs() } else { f64::INFINITY };
        if loss < best.0 {
            best = (loss, w);
        }
        history.push(best.0);
        epochs = epoch + 1;

        if improvement < config.convergence_tol {
            stalled += 1;
            if stalled >= config.patience {
                break;
            }
        } else {
            stalled = 0;
        }

        adam.step(&mut w, &grad);
        project_non_negative(&mut w);
        observer(epoch, &w);
    }

    let (loss, best_w) = best;
    Ok(TrainState {
        weights: NetworkWeights::from_flat(&best_w)?,
        first_moment: *adam.first_moment(),
        second_moment: *adam.second_moment(),
        epoch: epochs,
        loss_history: history,
        loss,
        data_loss: objective.data_loss(&best_w)?,
        restart,
        diverged_restarts: 0,
    })
}

/// Fits with the default execution mode.
pub fn fit(data: &[BiaxialPoint], config: &TrainConfig) -> Result<TrainState> {
    fit_with(data, config, Execution::default())
}

/// Runs all restarts and keeps the lowest-loss one (earliest on ties).
/// Diverged restarts are discarded; if every restart diverges the first
/// error is returned.
pub fn fit_with(data: &[BiaxialPoint], config: &TrainConfig, exec: Execution) -> Result<TrainState> {
    config.validate()?;
    let objective = Objective::new(data, config.alpha, config.p_norm)?;
    let runs = par::map_range(exec, config.restarts, |r| fit_restart(&objective, config, r, |_, _| {}));
    let diverged = runs.iter().filter(|r| r.is_err()).count();
    let mut best: Option<TrainState> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(state) => {
                if best.as_ref().is_none_or(|b| state.loss < b.loss) {
                    best = Some(state);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(mut state) => {
            state.diverged_restarts = diverged;
            Ok(state)
        }
        None => Err(first_err.expect("at least one restart ran")),
    }
}
