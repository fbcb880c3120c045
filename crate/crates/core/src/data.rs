//! Observations grouped by loading protocol.

use crate::error::{Error, Result};
use crate::kinematics::BiaxialPoint;

/// One stretch-stress curve recorded under a single protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<BiaxialPoint>,
}

/// Curves in first-appearance order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub curves: Vec<Curve>,
}

impl Dataset {
    pub fn new(curves: Vec<Curve>) -> Self {
        Self { curves }
    }

    /// Groups labelled points by protocol, keeping the order in which labels
    /// first appear and the row order within each label.
    pub fn from_labelled<I, S>(rows: I) -> Self
    where
        I: IntoIterator<Item = (S, BiaxialPoint)>,
        S: Into<String>,
    {
        let mut curves: Vec<Curve> = Vec::new();
        for (label, point) in rows {
            let label = label.into();
            match curves.iter_mut().find(|c| c.label == label) {
                Some(c) => c.points.push(point),
                None => curves.push(Curve {
                    label,
                    points: vec![point],
                }),
            }
        }
        Self { curves }
    }

    pub fn len(&self) -> usize {
        self.curves.iter().map(|c| c.points.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points, curve by curve.
    pub fn points(&self) -> Vec<BiaxialPoint> {
        self.curves.iter().flat_map(|c| c.points.iter().copied()).collect()
    }

    /// `(label, point)` rows in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &BiaxialPoint)> {
        self.curves
            .iter()
            .flat_map(|c| c.points.iter().map(move |p| (c.label.as_str(), p)))
    }

    /// Largest measured stress magnitude over both components.
    pub fn max_abs_stress(&self) -> f64 {
        self.rows()
            .map(|(_, p)| p.p1.abs().max(p.p2.abs()))
            .fold(0.0, f64::max)
    }

    pub fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyData)
        } else {
            Ok(())
        }
    }
}
