//! Synthetic tension-ratio experiments.
//!
//! A protocol holds the ratio `t2 : t1` of the edge tensions fixed while the
//! more heavily loaded axis is stretched from 1 to a peak value. Tension is
//! identified with the nominal (first Piola) stress, so each path point
//! satisfies `t1 · P2 = t2 · P1`; the stretch of the other axis is found by
//! bisection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Curve, Dataset};
use crate::energy::NetworkWeights;
use crate::error::{Error, Result};
use crate::kinematics::{BiaxialPoint, StretchPair};
use crate::par::{self, Execution};
use crate::stress::{stress, StressPair};

/// Labels of the five standard protocols, written `t2:t1`.
pub const STANDARD_LABELS: [&str; 5] = ["1:0.5", "1:0.75", "1:1", "0.75:1", "0.5:1"];
pub const DEFAULT_POINTS: usize = 20;
pub const DEFAULT_PEAK_STRETCH: f64 = 1.3;

/// Bracket for the secondary stretch.
pub const SECONDARY_RANGE: (f64, f64) = (0.8, 2.5);
const BRACKET_STEP: f64 = 0.01;
const MAX_BISECTIONS: usize = 100;
/// Accepted `|P2 − r·P1| / max(|P1|, 1)` at a path point.
pub const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub label: String,
    /// Tension on axis 1.
    pub t1: f64,
    /// Tension on axis 2.
    pub t2: f64,
    /// Samples per curve, including the unloaded reference point.
    pub n_points: usize,
    /// Peak stretch of the controlled (more heavily loaded) axis.
    pub peak_stretch: f64,
    /// Standard deviation of additive Gaussian stress noise (kPa).
    pub noise_std: f64,
    pub seed: u64,
}

impl ProtocolSpec {
    /// Parses a `t2:t1` label such as `"1:0.5"`, with default sampling.
    pub fn from_label(label: &str) -> Result<Self> {
        let invalid = || Error::InvalidConfig(format!("protocol label {label:?} is not of the form t2:t1"));
        let (a, b) = label.split_once(':').ok_or_else(invalid)?;
        let t2: f64 = a.trim().parse().map_err(|_| invalid())?;
        let t1: f64 = b.trim().parse().map_err(|_| invalid())?;
        let spec = Self {
            label: label.to_string(),
            t1,
            t2,
            n_points: DEFAULT_POINTS,
            peak_stretch: DEFAULT_PEAK_STRETCH,
            noise_std: 0.0,
            seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A protocol with `t1 = 1` and `t2 = ratio`.
    pub fn from_ratio(label: &str, ratio: f64) -> Result<Self> {
        let spec = Self {
            label: label.to_string(),
            t1: 1.0,
            t2: ratio,
            n_points: DEFAULT_POINTS,
            peak_stretch: DEFAULT_PEAK_STRETCH,
            noise_std: 0.0,
            seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `r = t2 / t1`.
    pub fn ratio(&self) -> f64 {
        self.t2 / self.t1
    }

    /// Axis 1 is driven unless axis 2 carries strictly more tension.
    pub fn controls_axis1(&self) -> bool {
        self.t1 >= self.t2
    }

    /// The protocol with the axes exchanged (`"1:0.5"` becomes `"0.5:1"`).
    pub fn mirrored(&self) -> Self {
        let label = match self.label.split_once(':') {
            Some((a, b)) => format!("{b}:{a}"),
            None => self.label.clone(),
        };
        Self {
            label,
            t1: self.t2,
            t2: self.t1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidConfig(format!("protocol {}: {reason}", self.label)))
        };
        if self.label.is_empty() {
            return bad("empty label".into());
        }
        if !(self.t1.is_finite() && self.t2.is_finite() && self.t1 > 0.0 && self.t2 > 0.0) {
            return bad(format!("tensions must be positive, got t1 = {}, t2 = {}", self.t1, self.t2));
        }
        if self.n_points < 2 {
            return bad(format!("n_points must be >= 2, got {}", self.n_points));
        }
        if !(self.peak_stretch.is_finite() && self.peak_stretch > 1.0) {
            return bad(format!("peak stretch must exceed 1, got {}", self.peak_stretch));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad(format!("noise_std must be >= 0, got {}", self.noise_std));
        }
        Ok(())
    }
}

/// The five standard protocols with default sampling.
pub fn standard_protocols() -> Vec<ProtocolSpec> {
    STANDARD_LABELS
        .iter()
        .map(|l| ProtocolSpec::from_label(l).expect("standard labels parse"))
        .collect()
}

/// Stretches for the controlled value `driven` and a trial secondary stretch.
fn state(spec: &ProtocolSpec, driven: f64, secondary: f64) -> Result<StretchPair> {
    if spec.controls_axis1() {
        StretchPair::new(driven, secondary)
    } else {
        StretchPair::new(secondary, driven)
    }
}

/// Ratio residual, increasing in the secondary stretch. Mirroring the
/// protocol and the model reproduces it bit for bit.
fn residual(spec: &ProtocolSpec, p: StressPair) -> f64 {
    if spec.controls_axis1() {
        spec.t1 * p.p2 - spec.t2 * p.p1
    } else {
        spec.t2 * p.p1 - spec.t1 * p.p2
    }
}

fn infeasible(spec: &ProtocolSpec, reason: String) -> Error {
    Error::InfeasibleProtocol {
        label: spec.label.clone(),
        reason,
    }
}

/// Secondary stretch at which the tension ratio holds for `driven`.
fn solve_secondary(w: &NetworkWeights, spec: &ProtocolSpec, driven: f64) -> Result<(f64, StressPair)> {
    let eval = |s: f64| -> Result<(f64, StressPair)> {
        let p = stress(state(spec, driven, s)?, w)?;
        Ok((residual(spec, p), p))
    };

    // scan for the first sign change; overflow at large stretches ends the scan
    let (lo_bound, hi_bound) = SECONDARY_RANGE;
    let steps = ((hi_bound - lo_bound) / BRACKET_STEP).round() as usize;
    let (f0, p0) = eval(lo_bound)?;
    if f0 == 0.0 {
        return accept(spec, driven, lo_bound, p0);
    }
    if f0 > 0.0 {
        return Err(infeasible(
            spec,
            format!("ratio residual already positive at secondary stretch {lo_bound} (driven {driven})"),
        ));
    }
    let mut prev = lo_bound;
    let mut bracket = None;
    for i in 1..=steps {
        let s = lo_bound + (hi_bound - lo_bound) * i as f64 / steps as f64;
        let Ok((f, p)) = eval(s) else { break };
        if f == 0.0 {
            return accept(spec, driven, s, p);
        }
        if f > 0.0 {
            bracket = Some((prev, s));
            break;
        }
        prev = s;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        infeasible(
            spec,
            format!("root not bracketed in [{lo_bound}, {hi_bound}] at driven stretch {driven}"),
        )
    })?;

    let mut best = (lo, eval(lo)?);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let hi_eval = eval(hi)?;
            if hi_eval.0.abs() < best.1 .0.abs() {
                best = (hi, hi_eval);
            }
            return accept(spec, driven, best.0, best.1 .1);
        }
        let (f, p) = eval(mid)?;
        if f.abs() <= best.1 .0.abs() {
            best = (mid, (f, p));
        }
        if f == 0.0 {
            return accept(spec, driven, mid, p);
        } else if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        label: spec.label.clone(),
        stretch: driven,
        reason: format!("no convergence after {MAX_BISECTIONS} bisection steps"),
    })
}

fn accept(spec: &ProtocolSpec, driven: f64, secondary: f64, p: StressPair) -> Result<(f64, StressPair)> {
    let off = (p.p2 - spec.ratio() * p.p1).abs();
    if off <= RATIO_TOLERANCE * p.p1.abs().max(1.0) {
        Ok((secondary, p))
    } else {
        Err(Error::NoConvergence {
            label: spec.label.clone(),
            stretch: driven,
            reason: format!("ratio residual {off:.3e} above tolerance at machine precision"),
        })
    }
}

/// Path of the protocol on a uniform grid of the controlled stretch,
/// starting at the unloaded state `(1, 1, 0, 0)`.
pub fn solve_ratio_path(w: &NetworkWeights, spec: &ProtocolSpec) -> Result<Vec<BiaxialPoint>> {
    spec.validate()?;
    let n = spec.n_points;
    let mut points = Vec::with_capacity(n);
    points.push(BiaxialPoint {
        stretch: StretchPair::identity(),
        p1: 0.0,
        p2: 0.0,
    });
    for k in 1..n {
        let driven = 1.0 + (spec.peak_stretch - 1.0) * k as f64 / (n - 1) as f64;
        let (secondary, p) = solve_secondary(w, spec, driven)?;
        points.push(BiaxialPoint {
            stretch: state(spec, driven, secondary)?,
            p1: p.p1,
            p2: p.p2,
        });
    }
    if spec.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_std)
            .map_err(|e| Error::InvalidConfig(format!("noise: {e}")))?;
        for p in &mut points {
            p.p1 += normal.sample(&mut rng);
            p.p2 += normal.sample(&mut rng);
        }
    }
    Ok(points)
}

/// Runs every protocol and groups the points by label. The first failing
/// protocol (in input order) determines the error.
pub fn generate_fixture(w: &NetworkWeights, protocols: &[ProtocolSpec], exec: Execution) -> Result<Dataset> {
    let paths = par::map(exec, protocols, |spec| solve_ratio_path(w, spec));
    let mut curves = Vec::with_capacity(protocols.len());
    for (spec, path) in protocols.iter().zip(paths) {
        curves.push(Curve {
            label: spec.label.clone(),
            points: path?,
        });
    }
    Ok(Dataset::new(curves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    fn iso_model() -> NetworkWeights {
        NetworkWeights::zeros().with_term(5, 1.0, 1.0).unwrap()
    }

    fn neo_hookean() -> NetworkWeights {
        NetworkWeights::zeros().with_term(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn labels_parse_as_t2_over_t1() {
        let p = ProtocolSpec::from_label("1:0.5").unwrap();
        assert_eq!((p.t2, p.t1), (1.0, 0.5));
        assert_eq!(p.ratio(), 2.0);
        assert!(!p.controls_axis1());
        assert!(ProtocolSpec::from_label("1:1").unwrap().controls_axis1());
        assert!(ProtocolSpec::from_label("abc").is_err());
        assert!(ProtocolSpec::from_label("1:0").is_err());
        assert_eq!(p.mirrored().label, "0.5:1");
    }

    #[test]
    fn validation() {
        let mut p = ProtocolSpec::from_label("1:1").unwrap();
        p.n_points = 1;
        assert!(p.validate().is_err());
        p.n_points = 2;
        p.peak_stretch = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn equibiaxial_isotropic_path_is_symmetric() {
        let path = solve_ratio_path(&neo_hookean(), &ProtocolSpec::from_label("1:1").unwrap()).unwrap();
        for p in &path {
            assert!((p.lambda1() - p.lambda2()).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn left_atrium_equibiaxial_matches_bisection_oracle() {
        // secondary stretch from a 50-digit bisection on the stretch-space
        // derivative of the left atrial energy
        let mut spec = ProtocolSpec::from_label("1:1").unwrap();
        spec.n_points = 4; // driven stretches 1, 1.1, 1.2, 1.3
        let path = solve_ratio_path(&reference::left_atrium(), &spec).unwrap();
        let oracle = [
            (1.1, 1.170_979_799_271_128_7, 10.337_121_332_359_146),
            (1.2, 1.318_112_580_271_120_5, 26.585_518_044_515_36),
            (1.3, 1.451_646_114_397_486_3, 59.492_386_541_804_48),
        ];
        for (p, (l1, l2, stress)) in path[1..].iter().zip(oracle) {
            assert!((p.lambda1() - l1).abs() < 1e-14);
            assert!((p.lambda2() - l2).abs() < 1e-9, "{} vs {l2}", p.lambda2());
            assert!((p.p1 - stress).abs() < 1e-8 * stress);
            assert!((p.p2 - stress).abs() < 1e-8 * stress);
        }
    }

    #[test]
    fn single_term_half_ratio_matches_bisection_oracle() {
        let mut spec = ProtocolSpec::from_label("0.5:1").unwrap();
        spec.n_points = 4;
        let path = solve_ratio_path(&iso_model(), &spec).unwrap();
        let oracle = [
            (1.1, 0.988_803_226_640_915_9, 1.693_579_488_496_842),
            (1.3, 0.931_368_908_054_954_1, 3.615_023_242_001_671),
        ];
        for (p, (l1, l2, p1)) in [&path[1], &path[3]].into_iter().zip(oracle) {
            assert!((p.lambda1() - l1).abs() < 1e-14);
            assert!((p.lambda2() - l2).abs() < 1e-9);
            assert!((p.p1 - p1).abs() < 1e-8 * p1);
            assert!((p.p2 - 0.5 * p1).abs() < 1e-8 * p1);
        }
    }

    #[test]
    fn two_point_curves() {
        let mut spec = ProtocolSpec::from_label("1:0.75").unwrap();
        spec.n_points = 2;
        let path = solve_ratio_path(&reference::left_atrium(), &spec).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path[0], BiaxialPoint { stretch: StretchPair::identity(), p1: 0.0, p2: 0.0 });
        assert_eq!(path[1].lambda2(), spec.peak_stretch);
    }

    #[test]
    fn infeasible_when_model_cannot_reach_ratio() {
        // only fiber 1 carries stress, so P2 = P1 is never reached
        let w = NetworkWeights::zeros().with_term(13, 1.0, 1.0).unwrap();
        let err = solve_ratio_path(&w, &ProtocolSpec::from_label("1:1").unwrap()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleProtocol { .. }), "{err:?}");
    }

    #[test]
    fn noise_is_seeded() {
        let mut spec = ProtocolSpec::from_label("1:1").unwrap();
        spec.noise_std = 0.1;
        spec.seed = 7;
        let a = solve_ratio_path(&reference::left_atrium(), &spec).unwrap();
        let b = solve_ratio_path(&reference::left_atrium(), &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].p1, 0.0);
        spec.seed = 8;
        assert_ne!(solve_ratio_path(&reference::left_atrium(), &spec).unwrap(), a);
    }
}
