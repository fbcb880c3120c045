//! Biaxial first Piola stresses from the energy partials.
//!
//! With a diagonal deformation gradient and a traction-free thickness
//! direction,
//!
//! ```text
//! P1 = 2[λ1 − λ1⁻³λ2⁻²] ψ_1 + 2[λ1λ2² − λ1⁻³] ψ_2 + 2λ1 ψ_4,11 + 4λ1³ ψ_5,11
//! P2 = 2[λ2 − λ1⁻²λ2⁻³] ψ_1 + 2[λ1²λ2 − λ2⁻³] ψ_2 + 2λ2 ψ_4,22 + 4λ2³ ψ_5,22
//! ```
//!
//! where `ψ_c = ∂ψ/∂I_c`. Each bracket is `∂I_c/∂λ_i` with λ3 eliminated.

use crate::energy::{
    self, guarded_exp, normalization_slope, normalize, power_basis, Activation, Channel, NetworkWeights, CATALOG,
    N_TERMS, N_WEIGHTS,
};
use crate::error::Result;
use crate::kinematics::{invariants, StretchPair};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressPair {
    pub p1: f64,
    pub p2: f64,
}

impl StressPair {
    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
        }
    }
}

/// Multipliers of `∂ψ/∂I_c` in `P1` and `P2`, indexed by channel position.
///
/// Written so that exchanging λ1 and λ2 exchanges the two arrays exactly.
fn prefactors(s: StretchPair) -> ([f64; 6], [f64; 6]) {
    let (l1, l2) = (s.lambda1(), s.lambda2());
    let (l1sq, l2sq) = (l1 * l1, l2 * l2);
    let axis1 = [
        2.0 * (l1 - 1.0 / ((l1sq * l1) * l2sq)),
        2.0 * (l1 * l2sq - 1.0 / (l1sq * l1)),
        2.0 * l1,
        0.0,
        4.0 * (l1sq * l1),
        0.0,
    ];
    let axis2 = [
        2.0 * (l2 - 1.0 / ((l2sq * l2) * l1sq)),
        2.0 * (l2 * l1sq - 1.0 / (l2sq * l2)),
        0.0,
        2.0 * l2,
        0.0,
        4.0 * (l2sq * l2),
    ];
    (axis1, axis2)
}

const AXIS1_CHANNELS: [Channel; 4] = [Channel::I1, Channel::I2, Channel::I4Fiber1, Channel::I5Fiber1];
const AXIS2_CHANNELS: [Channel; 4] = [Channel::I1, Channel::I2, Channel::I4Fiber2, Channel::I5Fiber2];

/// Piola stresses (kPa) at stretch `s`.
pub fn stress(s: StretchPair, w: &NetworkWeights) -> Result<StressPair> {
    let d = energy::psi_partials(&invariants(s), w)?;
    let (a1, a2) = prefactors(s);
    let p1 = AXIS1_CHANNELS.iter().map(|&c| a1[c.position()] * d[c]).sum();
    let p2 = AXIS2_CHANNELS.iter().map(|&c| a2[c.position()] * d[c]).sum();
    Ok(StressPair { p1, p2 })
}

/// Stress carried by a single catalog term.
pub fn term_stress(s: StretchPair, w: &NetworkWeights, index: usize) -> Result<StressPair> {
    let t = &CATALOG[index - 1];
    let inv = invariants(s);
    let n = normalize(&inv);
    let (w1, w2) = w.term(index);
    let d = energy::term_partial(t, &inv, &n, w1, w2)?;
    let (a1, a2) = prefactors(s);
    Ok(StressPair {
        p1: a1[t.channel.position()] * d,
        p2: a2[t.channel.position()] * d,
    })
}

/// Evaluates many stretch states, in parallel when requested.
pub fn stress_batch(points: &[StretchPair], w: &NetworkWeights, exec: Execution) -> Result<Vec<StressPair>> {
    par::map(exec, points, |&s| stress(s, w)).into_iter().collect()
}

/// `∂P1/∂w` and `∂P2/∂w` in the flat weight layout `[w1.., w2..]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSensitivity {
    pub dp1: [f64; N_WEIGHTS],
    pub dp2: [f64; N_WEIGHTS],
}

impl Default for StressSensitivity {
    fn default() -> Self {
        Self {
            dp1: [0.0; N_WEIGHTS],
            dp2: [0.0; N_WEIGHTS],
        }
    }
}

/// Analytic 2×32 sensitivity of the stresses with respect to the weights.
pub fn stress_weight_gradient(s: StretchPair, w: &NetworkWeights) -> Result<StressSensitivity> {
    let mut out = StressSensitivity::default();
    PreparedPoint::new(s).stress_and_gradient(&w.to_flat(), &mut out)?;
    Ok(out)
}

/// Weight-independent factors of one stretch state, cached for training.
///
/// For term `k` with basis `u_k = x^p` and `g_k = d(x^p)/dI · prefactor`,
/// the stress contribution is `w2 w1 g_k` (identity) or
/// `w2 w1 exp(w1 u_k) g_k` (exponential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedPoint {
    u: [f64; N_TERMS],
    g1: [f64; N_TERMS],
    g2: [f64; N_TERMS],
}

impl PreparedPoint {
    pub fn new(s: StretchPair) -> Self {
        let inv = invariants(s);
        let n = normalize(&inv);
        let (a1, a2) = prefactors(s);
        let mut u = [0.0; N_TERMS];
        let mut g1 = [0.0; N_TERMS];
        let mut g2 = [0.0; N_TERMS];
        for t in &CATALOG {
            let (basis, du_dx) = power_basis(n.get(t.channel), t.power);
            let slope = du_dx * normalization_slope(&inv, t.channel);
            let k = t.slot();
            u[k] = basis;
            g1[k] = a1[t.channel.position()] * slope;
            g2[k] = a2[t.channel.position()] * slope;
        }
        Self { u, g1, g2 }
    }

    /// Stresses for flat weights `[w1.., w2..]`.
    pub fn stress(&self, w: &[f64; N_WEIGHTS]) -> Result<StressPair> {
        let mut out = StressPair::default();
        for t in &CATALOG {
            let k = t.slot();
            let (w1, w2) = (w[k], w[N_TERMS + k]);
            let scale = match t.activation {
                Activation::Identity => w2 * w1,
                Activation::Exponential => w2 * w1 * guarded_exp(t, w1, self.u[k])?,
            };
            out.p1 += scale * self.g1[k];
            out.p2 += scale * self.g2[k];
        }
        Ok(out)
    }

    /// Stresses and their weight sensitivities; `grad` is overwritten.
    pub fn stress_and_gradient(&self, w: &[f64; N_WEIGHTS], grad: &mut StressSensitivity) -> Result<StressPair> {
        let mut out = StressPair::default();
        for t in &CATALOG {
            let k = t.slot();
            let (w1, w2) = (w[k], w[N_TERMS + k]);
            // d(scale)/dw1 and d(scale)/dw2
            let (scale, ds_dw1, ds_dw2) = match t.activation {
                Activation::Identity => (w2 * w1, w2, w1),
                Activation::Exponential => {
                    let e = guarded_exp(t, w1, self.u[k])?;
                    (w2 * w1 * e, w2 * e * (1.0 + w1 * self.u[k]), w1 * e)
                }
            };
            out.p1 += scale * self.g1[k];
            out.p2 += scale * self.g2[k];
            grad.dp1[k] = ds_dw1 * self.g1[k];
            grad.dp2[k] = ds_dw1 * self.g2[k];
            grad.dp1[N_TERMS + k] = ds_dw2 * self.g1[k];
            grad.dp2[N_TERMS + k] = ds_dw2 * self.g2[k];
        }
        Ok(out)
    }
}
