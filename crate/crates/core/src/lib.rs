//! Sparse discovery of hyperelastic constitutive models from biaxial tests.
//!
//! A fixed catalog of sixteen polyconvex strain-energy terms is trained
//! against stretch/stress observations with an L1-penalised, non-negative
//! ADAM fit. Terms that carry no meaningful stress are pruned and the
//! survivors are reported as a symbolic model with physical parameters.
//!
//! Module map:
//!
//! * [`kinematics`]: stretch pairs, invariants, strain/stress pull-back
//! * [`energy`]: the term catalog, ψ and its invariant derivatives
//! * [`stress`]: biaxial Piola stresses and their weight sensitivities
//! * [`training`]: loss, gradient and the projected ADAM fit
//! * [`discovery`]: α sweep, pruning, R² and model rendering
//! * [`datagen`]: synthetic tension-ratio experiments
//! * [`reference`]: the left/right atrial reference models
//!
//! Parallelism (sweeps, restarts, batch prediction) goes through [`par`]
//! and falls back to sequential iteration when the `parallel` feature is
//! disabled. Every individual fit is single-threaded and deterministic.

pub mod data;
pub mod datagen;
pub mod discovery;
pub mod energy;
mod error;
pub mod kinematics;
pub mod par;
pub mod reference;
pub mod stress;
pub mod training;

pub use data::{Curve, Dataset};
pub use error::{Error, Result};
pub use energy::{Activation, Channel, NetworkWeights, Power, TermSpec, CATALOG, N_TERMS, N_WEIGHTS};
pub use kinematics::{BiaxialPoint, InvariantSet, StretchPair};
pub use par::Execution;
pub use stress::StressPair;
pub use training::{TrainConfig, TrainState};
