//! Biaxial kinematics of an incompressible sheet with two orthogonal fiber
//! families aligned with the sample axes.
//!
//! The deformation gradient is `diag(λ1, λ2, 1/(λ1 λ2))` at all times, so a
//! state is fully described by the in-plane stretch pair.

use crate::error::{Error, Result};

/// In-plane stretches of a homogeneous, shear-free biaxial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchPair {
    lambda1: f64,
    lambda2: f64,
}

impl StretchPair {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for l in [lambda1, lambda2] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidStretch(l));
            }
        }
        Ok(Self { lambda1, lambda2 })
    }

    pub const fn identity() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Thickness stretch from incompressibility.
    pub fn lambda3(&self) -> f64 {
        1.0 / (self.lambda1 * self.lambda2)
    }

    /// Diagonal of the deformation gradient.
    pub fn deformation_gradient(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3()]
    }

    /// Exchanges the two in-plane axes.
    pub fn swapped(&self) -> Self {
        Self {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
        }
    }
}

/// Isotropic and fiber invariants of one deformation state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSet {
    pub i1: f64,
    pub i2: f64,
    pub i4_11: f64,
    pub i4_22: f64,
    pub i5_11: f64,
    pub i5_22: f64,
}

impl InvariantSet {
    pub const IDENTITY: InvariantSet = InvariantSet {
        i1: 3.0,
        i2: 3.0,
        i4_11: 1.0,
        i4_22: 1.0,
        i5_11: 1.0,
        i5_22: 1.0,
    };
}

/// Invariants of `diag(λ1, λ2, (λ1λ2)⁻¹)` with fibers along the sample axes.
///
/// Expressions are written so that swapping λ1 and λ2 swaps the `_11`/`_22`
/// channels bit for bit and leaves `i1`, `i2` unchanged.
pub fn invariants(s: StretchPair) -> InvariantSet {
    let l1sq = s.lambda1 * s.lambda1;
    let l2sq = s.lambda2 * s.lambda2;
    let areal_sq = l1sq * l2sq;
    InvariantSet {
        i1: (l1sq + l2sq) + 1.0 / areal_sq,
        i2: (1.0 / l1sq + 1.0 / l2sq) + areal_sq,
        i4_11: l1sq,
        i4_22: l2sq,
        i5_11: l1sq * l1sq,
        i5_22: l2sq * l2sq,
    }
}

/// One observation: stretches and the two nominal (first Piola) stresses in kPa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiaxialPoint {
    pub stretch: StretchPair,
    pub p1: f64,
    pub p2: f64,
}

impl BiaxialPoint {
    pub fn new(lambda1: f64, lambda2: f64, p1: f64, p2: f64) -> Result<Self> {
        Ok(Self {
            stretch: StretchPair::new(lambda1, lambda2)?,
            p1,
            p2,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.stretch.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.stretch.lambda2
    }
}

/// Green-Lagrange strain and second Piola stress components (kPa).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainStressPoint {
    pub e11: f64,
    pub e22: f64,
    pub s11: f64,
    pub s22: f64,
}

/// Pulls a strain/second-Piola observation back to stretch/first-Piola form:
/// `λ = √(2E + 1)`, `P = λ S`.
pub fn pullback_point(e11: f64, e22: f64, s11: f64, s22: f64) -> Result<BiaxialPoint> {
    let stretch = |e: f64| {
        let c = 2.0 * e + 1.0;
        if c > 0.0 && c.is_finite() {
            Ok(c.sqrt())
        } else {
            Err(Error::StrainOutOfDomain(e))
        }
    };
    let l1 = stretch(e11)?;
    let l2 = stretch(e22)?;
    Ok(BiaxialPoint {
        stretch: StretchPair::new(l1, l2)?,
        p1: l1 * s11,
        p2: l2 * s22,
    })
}

/// Inverse of [`pullback_point`]: `E = (λ² − 1)/2`, `S = P/λ`.
pub fn push_forward(p: &BiaxialPoint) -> StrainStressPoint {
    let (l1, l2) = (p.lambda1(), p.lambda2());
    StrainStressPoint {
        e11: 0.5 * (l1 * l1 - 1.0),
        e22: 0.5 * (l2 * l2 - 1.0),
        s11: p.p1 / l1,
        s22: p.p2 / l2,
    }
}
