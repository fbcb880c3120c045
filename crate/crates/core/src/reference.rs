//! Reference atrial models used as ground truth for round-trip discovery.
//!
//! Identity terms are stored with `w1 = 1`, so the reported product
//! parameter equals `w2` exactly. Exponential terms store `(b, a)` as
//! `(w1, w2)`.

use crate::energy::NetworkWeights;

/// Left atrium: `μ[I2^{3/2} − 3√3] + a[exp(b[I2^{3/2} − 3√3]²) − 1]
/// + a1[I5,11 − 1]² + a2[I5,22 − 1]²`.
pub mod left {
    pub const MU: f64 = 1.37;
    pub const A: f64 = 0.0622;
    pub const B: f64 = 0.0988;
    pub const A1: f64 = 0.957;
    pub const A2: f64 = 0.394;
    /// Active catalog terms.
    pub const TERMS: [usize; 4] = [5, 8, 13, 15];
}

/// Right atrium: like the left model but with exponential fifth-invariant
/// terms `a1[exp(b1[I5,11 − 1]²) − 1] + a2[exp(b2[I5,22 − 1]²) − 1]`.
pub mod right {
    pub const MU: f64 = 0.953;
    pub const A: f64 = 0.0583;
    pub const B: f64 = 0.852;
    pub const A1: f64 = 0.0694;
    pub const B1: f64 = 0.542;
    pub const A2: f64 = 0.386;
    pub const B2: f64 = 0.498;
    pub const TERMS: [usize; 4] = [5, 8, 14, 16];
}

pub fn left_atrium() -> NetworkWeights {
    NetworkWeights::zeros()
        .with_term(5, 1.0, left::MU)
        .and_then(|w| w.with_term(8, left::B, left::A))
        .and_then(|w| w.with_term(13, 1.0, left::A1))
        .and_then(|w| w.with_term(15, 1.0, left::A2))
        .expect("reference weights are valid")
}

pub fn right_atrium() -> NetworkWeights {
    NetworkWeights::zeros()
        .with_term(5, 1.0, right::MU)
        .and_then(|w| w.with_term(8, right::B, right::A))
        .and_then(|w| w.with_term(14, right::B1, right::A1))
        .and_then(|w| w.with_term(16, right::B2, right::A2))
        .expect("reference weights are valid")
}

/// Looks up a reference model by name (`left_atrium` / `right_atrium`).
pub fn by_name(name: &str) -> Option<NetworkWeights> {
    match name {
        "left_atrium" | "LA" | "la" => Some(left_atrium()),
        "right_atrium" | "RA" | "ra" => Some(right_atrium()),
        _ => None,
    }
}
