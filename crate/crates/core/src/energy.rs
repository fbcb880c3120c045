//! The sixteen-term strain-energy catalog.
//!
//! Every term acts on one normalized invariant `x` (zero in the reference
//! state), raises it to the first or second power and passes the result
//! through either the identity or `exp(·) − 1`:
//!
//! ```text
//! identity:     w2 · w1 · x^p
//! exponential:  w2 · (exp(w1 · x^p) − 1)
//! ```
//!
//! Term indices 1..=16 are a stable public contract (model files refer to
//! them). Isotropic channels carry four terms each, fiber channels only the
//! two quadratic ones.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::InvariantSet;

pub const N_TERMS: usize = 16;
pub const N_WEIGHTS: usize = 2 * N_TERMS;

/// Largest exponent accepted before a term is declared overflowing.
pub const EXP_ARGUMENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "I1")]
    I1,
    #[serde(rename = "I2")]
    I2,
    #[serde(rename = "I4_11")]
    I4Fiber1,
    #[serde(rename = "I4_22")]
    I4Fiber2,
    #[serde(rename = "I5_11")]
    I5Fiber1,
    #[serde(rename = "I5_22")]
    I5Fiber2,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::I1,
        Channel::I2,
        Channel::I4Fiber1,
        Channel::I4Fiber2,
        Channel::I5Fiber1,
        Channel::I5Fiber2,
    ];

    pub fn position(self) -> usize {
        self as usize
    }

    /// Display name, e.g. `I4,11`.
    pub fn symbol(self) -> &'static str {
        match self {
            Channel::I1 => "I1",
            Channel::I2 => "I2",
            Channel::I4Fiber1 => "I4,11",
            Channel::I4Fiber2 => "I4,22",
            Channel::I5Fiber1 => "I5,11",
            Channel::I5Fiber2 => "I5,22",
        }
    }

    /// File-format key, e.g. `I4_11`.
    pub fn key(self) -> &'static str {
        match self {
            Channel::I1 => "I1",
            Channel::I2 => "I2",
            Channel::I4Fiber1 => "I4_11",
            Channel::I4Fiber2 => "I4_22",
            Channel::I5Fiber1 => "I5_11",
            Channel::I5Fiber2 => "I5_22",
        }
    }

    /// Fiber family (1 or 2) for anisotropic channels.
    pub fn fiber_family(self) -> Option<u8> {
        match self {
            Channel::I1 | Channel::I2 => None,
            Channel::I4Fiber1 | Channel::I5Fiber1 => Some(1),
            Channel::I4Fiber2 | Channel::I5Fiber2 => Some(2),
        }
    }

    /// The same channel for the other fiber family.
    pub fn mirrored(self) -> Channel {
        match self {
            Channel::I4Fiber1 => Channel::I4Fiber2,
            Channel::I4Fiber2 => Channel::I4Fiber1,
            Channel::I5Fiber1 => Channel::I5Fiber2,
            Channel::I5Fiber2 => Channel::I5Fiber1,
            iso => iso,
        }
    }

    /// Bracketed normalized invariant as printed in rendered models.
    pub fn normalized_symbol(self) -> &'static str {
        match self {
            Channel::I1 => "[I1 − 3]",
            Channel::I2 => "[I2^{3/2} − 3√3]",
            Channel::I4Fiber1 => "[I4,11 − 1]",
            Channel::I4Fiber2 => "[I4,22 − 1]",
            Channel::I5Fiber1 => "[I5,11 − 1]",
            Channel::I5Fiber2 => "[I5,22 − 1]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Power {
    First,
    Second,
}

impl Power {
    pub fn exponent(self) -> u32 {
        match self {
            Power::First => 1,
            Power::Second => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Exponential,
}

/// One row of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermSpec {
    /// 1-based catalog index.
    pub index: usize,
    pub channel: Channel,
    pub power: Power,
    pub activation: Activation,
}

const fn term(index: usize, channel: Channel, power: Power, activation: Activation) -> TermSpec {
    TermSpec {
        index,
        channel,
        power,
        activation,
    }
}

use Activation::{Exponential as Exp, Identity as Id};
use Power::{First, Second};

pub const CATALOG: [TermSpec; N_TERMS] = [
    term(1, Channel::I1, First, Id),
    term(2, Channel::I1, First, Exp),
    term(3, Channel::I1, Second, Id),
    term(4, Channel::I1, Second, Exp),
    term(5, Channel::I2, First, Id),
    term(6, Channel::I2, First, Exp),
    term(7, Channel::I2, Second, Id),
    term(8, Channel::I2, Second, Exp),
    term(9, Channel::I4Fiber1, Second, Id),
    term(10, Channel::I4Fiber1, Second, Exp),
    term(11, Channel::I4Fiber2, Second, Id),
    term(12, Channel::I4Fiber2, Second, Exp),
    term(13, Channel::I5Fiber1, Second, Id),
    term(14, Channel::I5Fiber1, Second, Exp),
    term(15, Channel::I5Fiber2, Second, Id),
    term(16, Channel::I5Fiber2, Second, Exp),
];

impl TermSpec {
    pub fn by_index(index: usize) -> Option<&'static TermSpec> {
        index.checked_sub(1).and_then(|slot| CATALOG.get(slot))
    }

    /// 0-based position in the catalog and in each weight layer.
    pub fn slot(&self) -> usize {
        self.index - 1
    }

    /// The matching term of the other fiber family (itself when isotropic).
    pub fn mirrored(&self) -> &'static TermSpec {
        let channel = self.channel.mirrored();
        CATALOG
            .iter()
            .find(|t| t.channel == channel && t.power == self.power && t.activation == self.activation)
            .expect("catalog is closed under fiber mirroring")
    }

    pub fn is_isotropic(&self) -> bool {
        self.channel.fiber_family().is_none()
    }

    /// `x^p`, e.g. `[I5,11 − 1]²`.
    pub fn basis_symbol(&self) -> String {
        match self.power {
            Power::First => self.channel.normalized_symbol().to_string(),
            Power::Second => format!("{}²", self.channel.normalized_symbol()),
        }
    }
}

/// Non-negative inner (`w1`) and outer (`w2`) weights, one pair per term.
///
/// The flat layout used by the trainer is `[w1_1 .. w1_16, w2_1 .. w2_16]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkWeights {
    w1: [f64; N_TERMS],
    w2: [f64; N_TERMS],
}

impl Default for NetworkWeights {
    fn default() -> Self {
        Self::zeros()
    }
}

impl NetworkWeights {
    pub const fn zeros() -> Self {
        Self {
            w1: [0.0; N_TERMS],
            w2: [0.0; N_TERMS],
        }
    }

    pub fn new(w1: [f64; N_TERMS], w2: [f64; N_TERMS]) -> Result<Self> {
        for (i, w) in w1.iter().chain(w2.iter()).enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight {} of layer {} is {w}; weights must be finite and non-negative",
                    i % N_TERMS + 1,
                    i / N_TERMS + 1
                )));
            }
        }
        Ok(Self { w1, w2 })
    }

    pub fn from_flat(flat: &[f64; N_WEIGHTS]) -> Result<Self> {
        let mut w1 = [0.0; N_TERMS];
        let mut w2 = [0.0; N_TERMS];
        w1.copy_from_slice(&flat[..N_TERMS]);
        w2.copy_from_slice(&flat[N_TERMS..]);
        Self::new(w1, w2)
    }

    pub fn to_flat(&self) -> [f64; N_WEIGHTS] {
        let mut flat = [0.0; N_WEIGHTS];
        flat[..N_TERMS].copy_from_slice(&self.w1);
        flat[N_TERMS..].copy_from_slice(&self.w2);
        flat
    }

    pub fn w1(&self) -> &[f64; N_TERMS] {
        &self.w1
    }

    pub fn w2(&self) -> &[f64; N_TERMS] {
        &self.w2
    }

    /// `(w1, w2)` of the term with 1-based `index`.
    pub fn term(&self, index: usize) -> (f64, f64) {
        (self.w1[index - 1], self.w2[index - 1])
    }

    /// Returns a copy with the given term's weights replaced.
    pub fn with_term(mut self, index: usize, w1: f64, w2: f64) -> Result<Self> {
        if TermSpec::by_index(index).is_none() {
            return Err(Error::InvalidWeights(format!("no catalog term {index}")));
        }
        self.w1[index - 1] = w1;
        self.w2[index - 1] = w2;
        Self::new(self.w1, self.w2)
    }

    /// Keeps only the listed terms; all others are zeroed.
    pub fn restricted_to(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros();
        for &i in indices {
            out.w1[i - 1] = self.w1[i - 1];
            out.w2[i - 1] = self.w2[i - 1];
        }
        out
    }

    /// Exchanges the weights of the two fiber families.
    pub fn mirrored(&self) -> Self {
        let mut out = *self;
        for t in &CATALOG {
            let m = t.mirrored();
            out.w1[m.slot()] = self.w1[t.slot()];
            out.w2[m.slot()] = self.w2[t.slot()];
        }
        out
    }
}

/// Invariants shifted so that each vanishes in the reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedInvariants {
    pub x1: f64,
    pub x2: f64,
    pub x4_11: f64,
    pub x4_22: f64,
    pub x5_11: f64,
    pub x5_22: f64,
}

impl NormalizedInvariants {
    pub fn get(&self, channel: Channel) -> f64 {
        match channel {
            Channel::I1 => self.x1,
            Channel::I2 => self.x2,
            Channel::I4Fiber1 => self.x4_11,
            Channel::I4Fiber2 => self.x4_22,
            Channel::I5Fiber1 => self.x5_11,
            Channel::I5Fiber2 => self.x5_22,
        }
    }
}

fn three_sqrt_three() -> f64 {
    3.0 * 3.0_f64.sqrt()
}

/// Shifts the invariants to `I1 − 3`, `I2^{3/2} − 3√3` and `I − 1` for fibers.
///
/// The isotropic values are clamped at zero: they are non-negative for every
/// incompressible state and only rounding can push them below.
pub fn normalize(inv: &InvariantSet) -> NormalizedInvariants {
    NormalizedInvariants {
        x1: (inv.i1 - 3.0).max(0.0),
        x2: (inv.i2 * inv.i2.sqrt() - three_sqrt_three()).max(0.0),
        x4_11: inv.i4_11 - 1.0,
        x4_22: inv.i4_22 - 1.0,
        x5_11: inv.i5_11 - 1.0,
        x5_22: inv.i5_22 - 1.0,
    }
}

/// `d x / d I` for the channel's normalization.
pub(crate) fn normalization_slope(inv: &InvariantSet, channel: Channel) -> f64 {
    match channel {
        Channel::I2 => 1.5 * inv.i2.sqrt(),
        _ => 1.0,
    }
}

/// `x^p` and `d(x^p)/dx`.
pub(crate) fn power_basis(x: f64, power: Power) -> (f64, f64) {
    match power {
        Power::First => (x, 1.0),
        Power::Second => (x * x, 2.0 * x),
    }
}

/// `exp(w1 u)` behind the overflow guard.
pub(crate) fn guarded_exp(term: &TermSpec, w1: f64, u: f64) -> Result<f64> {
    let argument = w1 * u;
    if argument > EXP_ARGUMENT_LIMIT {
        return Err(Error::Overflow {
            term: term.index,
            argument,
            limit: EXP_ARGUMENT_LIMIT,
        });
    }
    Ok(argument.exp())
}

/// Energy contribution of one term (kPa).
pub fn term_value(t: &TermSpec, n: &NormalizedInvariants, w1: f64, w2: f64) -> Result<f64> {
    let (u, _) = power_basis(n.get(t.channel), t.power);
    match t.activation {
        Activation::Identity => Ok(w2 * w1 * u),
        Activation::Exponential => {
            let argument = w1 * u;
            if argument > EXP_ARGUMENT_LIMIT {
                return Err(Error::Overflow {
                    term: t.index,
                    argument,
                    limit: EXP_ARGUMENT_LIMIT,
                });
            }
            Ok(w2 * argument.exp_m1())
        }
    }
}

/// Per-term energy contributions in catalog order.
pub fn term_values(inv: &InvariantSet, w: &NetworkWeights) -> Result<[f64; N_TERMS]> {
    let n = normalize(inv);
    let mut out = [0.0; N_TERMS];
    for t in &CATALOG {
        out[t.slot()] = term_value(t, &n, w.w1[t.slot()], w.w2[t.slot()])?;
    }
    Ok(out)
}

/// Free energy ψ (kPa).
pub fn psi(inv: &InvariantSet, w: &NetworkWeights) -> Result<f64> {
    Ok(term_values(inv, w)?.iter().sum())
}

/// `∂ψ/∂I` for each raw invariant channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantPartials(pub [f64; 6]);

impl Index<Channel> for InvariantPartials {
    type Output = f64;

    fn index(&self, c: Channel) -> &f64 {
        &self.0[c.position()]
    }
}

/// Derivative of one term with respect to its raw invariant.
pub(crate) fn term_partial(
    t: &TermSpec,
    inv: &InvariantSet,
    n: &NormalizedInvariants,
    w1: f64,
    w2: f64,
) -> Result<f64> {
    let (u, du_dx) = power_basis(n.get(t.channel), t.power);
    let slope = du_dx * normalization_slope(inv, t.channel);
    match t.activation {
        Activation::Identity => Ok(w2 * w1 * slope),
        Activation::Exponential => Ok(w2 * w1 * guarded_exp(t, w1, u)? * slope),
    }
}

/// Analytic `∂ψ/∂I1 … ∂ψ/∂I5,22`, including the `3/2 √I2` chain factor of
/// the I2 channel.
pub fn psi_partials(inv: &InvariantSet, w: &NetworkWeights) -> Result<InvariantPartials> {
    let n = normalize(inv);
    let mut out = InvariantPartials::default();
    for t in &CATALOG {
        out.0[t.channel.position()] += term_partial(t, inv, &n, w.w1[t.slot()], w.w2[t.slot()])?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{invariants, StretchPair};
    use crate::reference;

    #[test]
    fn catalog_shape() {
        assert_eq!(CATALOG.len(), 16);
        for (slot, t) in CATALOG.iter().enumerate() {
            assert_eq!(t.index, slot + 1);
            assert_eq!(TermSpec::by_index(t.index), Some(t));
            if !t.is_isotropic() {
                assert_eq!(t.power, Power::Second);
            }
        }
        for c in Channel::ALL {
            let n = CATALOG.iter().filter(|t| t.channel == c).count();
            assert_eq!(n, if c.fiber_family().is_none() { 4 } else { 2 });
        }
        assert!(TermSpec::by_index(0).is_none());
        assert!(TermSpec::by_index(17).is_none());
        assert_eq!(TermSpec::by_index(13).unwrap().mirrored().index, 15);
        assert_eq!(TermSpec::by_index(10).unwrap().mirrored().index, 12);
        assert_eq!(TermSpec::by_index(6).unwrap().mirrored().index, 6);
    }

    #[test]
    fn normalization_examples() {
        let n = normalize(&InvariantSet::IDENTITY);
        assert_eq!(n, NormalizedInvariants { x1: 0.0, x2: 0.0, x4_11: 0.0, x4_22: 0.0, x5_11: 0.0, x5_22: 0.0 });

        let n = normalize(&InvariantSet { i2: 5.25, i4_11: 4.0, ..InvariantSet::IDENTITY });
        // 5.25^1.5 − 3√3 = 12.029261... − 5.196152... = 6.833108...
        assert!((n.x2 - 6.833_108_8).abs() < 1e-6, "{}", n.x2);
        assert_eq!(n.x4_11, 3.0);
    }

    #[test]
    fn term_value_examples() {
        let t1 = TermSpec::by_index(1).unwrap();
        let n = NormalizedInvariants { x1: 0.5, x2: 0.0, x4_11: 0.0, x4_22: 0.0, x5_11: 0.0, x5_22: 0.0 };
        assert_eq!(term_value(t1, &n, 2.0, 3.0).unwrap(), 3.0);
        for t in &CATALOG {
            assert_eq!(term_value(t, &n, 1.7, 0.0).unwrap(), 0.0);
        }
        let zero = normalize(&InvariantSet::IDENTITY);
        for t in CATALOG.iter().filter(|t| t.activation == Activation::Exponential) {
            assert_eq!(term_value(t, &zero, 9.0, 4.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn overflow_is_an_error() {
        let t = TermSpec::by_index(4).unwrap();
        let n = NormalizedInvariants { x1: 10.0, x2: 0.0, x4_11: 0.0, x4_22: 0.0, x5_11: 0.0, x5_22: 0.0 };
        match term_value(t, &n, 8.0, 1.0) {
            Err(Error::Overflow { term, .. }) => assert_eq!(term, 4),
            other => panic!("expected overflow, got {other:?}"),
        }
        let w = NetworkWeights::zeros().with_term(4, 8.0, 1.0).unwrap();
        let inv = invariants(StretchPair::new(3.0, 3.0).unwrap());
        assert!(matches!(psi_partials(&inv, &w), Err(Error::Overflow { term: 4, .. })));
    }

    #[test]
    fn psi_zero_cases() {
        let w = reference::left_atrium();
        assert_eq!(psi(&InvariantSet::IDENTITY, &w).unwrap(), 0.0);
        let inv = invariants(StretchPair::new(1.3, 0.9).unwrap());
        assert_eq!(psi(&inv, &NetworkWeights::zeros()).unwrap(), 0.0);
    }

    #[test]
    fn psi_left_atrium_matches_closed_form_oracle() {
        // High-precision evaluation of the four-term left atrial energy at
        // λ = (1.1, 1.05), written directly in stretch space.
        let inv = invariants(StretchPair::new(1.1, 1.05).unwrap());
        let v = psi(&inv, &reference::left_atrium()).unwrap();
        let oracle = 0.466_223_283_766_439_2;
        assert!((v - oracle).abs() <= 1e-13 * oracle, "{v}");
    }

    #[test]
    fn partials_zero_cases() {
        let inv = invariants(StretchPair::new(1.2, 1.1).unwrap());
        assert_eq!(psi_partials(&inv, &NetworkWeights::zeros()).unwrap(), InvariantPartials::default());

        // only quadratic terms active: stationary at the reference state
        let mut w = NetworkWeights::zeros();
        for t in CATALOG.iter().filter(|t| t.power == Power::Second) {
            w = w.with_term(t.index, 0.8, 1.3).unwrap();
        }
        assert_eq!(psi_partials(&InvariantSet::IDENTITY, &w).unwrap(), InvariantPartials::default());
    }

    #[test]
    fn weights_reject_negative_and_nan() {
        let mut w1 = [0.0; N_TERMS];
        w1[3] = -1e-3;
        assert!(NetworkWeights::new(w1, [0.0; N_TERMS]).is_err());
        w1[3] = f64::NAN;
        assert!(NetworkWeights::new(w1, [0.0; N_TERMS]).is_err());
        assert!(NetworkWeights::zeros().with_term(17, 1.0, 1.0).is_err());
    }

    #[test]
    fn flat_layout_round_trip() {
        let w = reference::right_atrium();
        assert_eq!(NetworkWeights::from_flat(&w.to_flat()).unwrap(), w);
        assert_eq!(w.to_flat()[N_TERMS + 4], 0.953);
        assert_eq!(w.mirrored().mirrored(), w);
        assert_eq!(w.mirrored().term(14), w.term(16));
    }
}
