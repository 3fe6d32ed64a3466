//! Outlier-injection transforms for robustness experiments.
//!
//! Three settings, labeled A/B/C in reports: leave the pattern alone, add
//! a clump of spurious points inside a randomly placed sub-square, or
//! delete everything inside four fixed corner squares. Both corruptions
//! are calibrated by a single fraction `rho`: setting B adds
//! `round(rho * m)` points to a pattern of size `m`, setting C removes the
//! points of a region holding fraction `rho` of the window area.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointPattern;
use crate::rng::RandomStream;

/// Which corruption to apply to a simulated pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ContaminationConfig {
    /// Setting A: the pattern is observed as generated.
    #[serde(rename = "pure")]
    Pure,
    /// Setting B: add `round(rho * m)` uniform points inside a square of
    /// side `n/5` (n = window half-side) placed uniformly inside the
    /// window.
    #[serde(rename = "add")]
    Add { rho: f64 },
    /// Setting C: delete every point inside four corner squares of side
    /// `n * sqrt(rho)`, whose total area is `rho |W|`.
    #[serde(rename = "delete")]
    Delete { rho: f64 },
}

impl ContaminationConfig {
    pub fn validate(&self) -> Result<()> {
        match self.rho() {
            None => Ok(()),
            Some(rho) if rho.is_finite() && rho > 0.0 && rho < 1.0 => Ok(()),
            Some(rho) => Err(Error::InvalidParameter(format!(
                "contamination fraction must lie in (0,1), got {rho}"
            ))),
        }
    }

    /// Report label: "A" pure, "B" added points, "C" deleted points.
    pub fn label(&self) -> &'static str {
        match self {
            ContaminationConfig::Pure => "A",
            ContaminationConfig::Add { .. } => "B",
            ContaminationConfig::Delete { .. } => "C",
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            ContaminationConfig::Pure => None,
            ContaminationConfig::Add { rho } | ContaminationConfig::Delete { rho } => Some(*rho),
        }
    }
}

/// Apply a contamination setting to a pattern.
///
/// The stream feeds only setting B (placement of the clump square and the
/// added points); A and C are deterministic and ignore it.
pub fn contaminate(
    pattern: &PointPattern<2>,
    config: &ContaminationConfig,
    stream: RandomStream,
) -> Result<PointPattern<2>> {
    config.validate()?;
    match config {
        ContaminationConfig::Pure => Ok(pattern.clone()),
        ContaminationConfig::Add { rho } => contaminate_add(pattern, *rho, stream),
        ContaminationConfig::Delete { rho } => contaminate_delete(pattern, *rho),
    }
}

/// Setting B: union of the input with `round(rho * m)` uniform points in a
/// square of side `n/5` whose lower-left corner is uniform on
/// `[-n, n - n/5]^2`.
pub fn contaminate_add(
    pattern: &PointPattern<2>,
    rho: f64,
    stream: RandomStream,
) -> Result<PointPattern<2>> {
    ContaminationConfig::Add { rho }.validate()?;
    let window = *pattern.window();
    let n = window.half_side();
    let side = n / 5.0;
    let mut rng = stream.rng();
    let corner = [
        rng.random_range(-n..=(n - side)),
        rng.random_range(-n..=(n - side)),
    ];
    let extra = (rho * pattern.len() as f64).round() as usize;
    let mut points = pattern.points().to_vec();
    points.reserve(extra);
    for _ in 0..extra {
        points.push([
            corner[0] + rng.random::<f64>() * side,
            corner[1] + rng.random::<f64>() * side,
        ]);
    }
    PointPattern::new(window, points)
}

/// Setting C: remove every point lying in one of the four corner squares
/// of side `n * sqrt(rho)` (closed on their inner edges). Deterministic.
pub fn contaminate_delete(pattern: &PointPattern<2>, rho: f64) -> Result<PointPattern<2>> {
    ContaminationConfig::Delete { rho }.validate()?;
    let window = *pattern.window();
    let n = window.half_side();
    let cut = n - n * rho.sqrt();
    let kept = pattern
        .points()
        .iter()
        .filter(|p| !(p[0].abs() >= cut && p[1].abs() >= cut))
        .copied()
        .collect();
    PointPattern::new(window, kept)
}
