//! Intensity estimators: the standard count estimator, the jittered
//! median estimator with its rule-of-thumb correction, and a Voronoi
//! trimmed-mean competitor (see [`voronoi`]).
//!
//! The jittered pipeline: tessellate the window into `s^2` congruent cells,
//! count points per cell, add an independent jitter `phi_inv(U)` with
//! `U ~ Uniform(0,1)` to each count so the sample has a continuous
//! distribution, take the sample median, and divide by the cell volume.
//! Medians follow the inf convention throughout: the `ceil(p * n)`-th order
//! statistic, never an average of two middle values.

pub mod voronoi;

pub use voronoi::{estimate_voronoi, voronoi_cell_areas, VoronoiCells};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{count_per_cell, PointPattern, Tessellation};
use crate::rng::RandomStream;

/// Strictly increasing bijection of `[0, 1]` used to spread an integer count
/// into a continuous value.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum JitterFunction {
    /// `phi(t) = t`; the only choice with constant derivative, and the one
    /// the asymptotic normality result is stated for.
    #[default]
    Identity,
    /// `phi(t) = sqrt(t)`.
    Sqrt,
    /// `phi(t) = t^exponent`, `exponent > 0`.
    Power { exponent: f64 },
}

impl JitterFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            JitterFunction::Power { exponent } => {
                if !(*exponent > 0.0) || !exponent.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "jitter power exponent must be finite and > 0, got {exponent}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `phi(t)` for `t` in `[0, 1]`.
    pub fn phi(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        match self {
            JitterFunction::Identity => t,
            JitterFunction::Sqrt => t.sqrt(),
            JitterFunction::Power { exponent } => t.powf(*exponent),
        }
    }

    /// Inverse of [`JitterFunction::phi`] on `[0, 1]`.
    pub fn phi_inv(&self, u: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u));
        match self {
            JitterFunction::Identity => u,
            JitterFunction::Sqrt => u * u,
            JitterFunction::Power { exponent } => u.powf(1.0 / *exponent),
        }
    }

    /// Derivative of `phi` (may be infinite at the interval ends, e.g. for
    /// `sqrt` at 0).
    pub fn phi_prime(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        match self {
            JitterFunction::Identity => 1.0,
            JitterFunction::Sqrt => 0.5 / t.sqrt(),
            JitterFunction::Power { exponent } => exponent * t.powf(exponent - 1.0),
        }
    }

    /// Stable text form used in configs and CSV: `identity`, `sqrt`,
    /// `power:<exponent>`.
    pub fn label(&self) -> String {
        match self {
            JitterFunction::Identity => "identity".into(),
            JitterFunction::Sqrt => "sqrt".into(),
            JitterFunction::Power { exponent } => format!("power:{exponent}"),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let jitter = match text {
            "identity" => JitterFunction::Identity,
            "sqrt" => JitterFunction::Sqrt,
            other => match other.strip_prefix("power:") {
                Some(exp) => {
                    let exponent = exp.parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!(
                            "jitter exponent '{exp}' is not a number"
                        ))
                    })?;
                    JitterFunction::Power { exponent }
                }
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown jitter '{text}' (expected identity, sqrt, or power:<p>)"
                    )))
                }
            },
        };
        jitter.validate()?;
        Ok(jitter)
    }
}

impl Serialize for JitterFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for JitterFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        JitterFunction::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Which estimator produced a value; the strings are the `estimator` column
/// of the records CSV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    Std,
    MedianJ,
    MedianJ2,
    Voronoi,
}

impl EstimatorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorId::Std => "std",
            EstimatorId::MedianJ => "medianJ",
            EstimatorId::MedianJ2 => "medianJ2",
            EstimatorId::Voronoi => "voronoi",
        }
    }
}

/// Estimator-specific provenance attached to a result.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorMeta {
    Std,
    Median {
        cells_per_side: u32,
        cell_count: usize,
        cell_volume: f64,
        jitter: JitterFunction,
        stream: RandomStream,
    },
    Voronoi {
        grid_per_side: u32,
        trim_fraction: f64,
        sites: usize,
        border_cells: usize,
    },
}

/// One intensity estimate with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorResult {
    pub id: EstimatorId,
    pub value: f64,
    pub meta: EstimatorMeta,
}

/// Jittered per-cell values `z_k = count_k + phi_inv(U_k)` together with the
/// common cell volume.
#[derive(Clone, Debug, PartialEq)]
pub struct JitteredSample {
    pub z: Vec<f64>,
    pub cell_volume: f64,
}

impl JitteredSample {
    pub fn new(z: Vec<f64>, cell_volume: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::EmptySample("jittered sample"));
        }
        if !(cell_volume > 0.0) || !cell_volume.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cell volume must be finite and > 0, got {cell_volume}"
            )));
        }
        Ok(JitteredSample { z, cell_volume })
    }

    /// Lower sample median of the jittered values.
    pub fn median(&self) -> f64 {
        sample_quantile(&self.z, 0.5).expect("non-empty by construction")
    }

    /// Median rescaled to an intensity.
    pub fn intensity(&self) -> f64 {
        self.median() / self.cell_volume
    }
}

/// `ceil(p * n)`-th order statistic (1-indexed), `p` in `(0, 1)`.
///
/// For even `n` and `p = 1/2` this is the lower middle value.
pub fn sample_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample("sample_quantile"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {p}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p * values.len() as f64).ceil() as usize;
    let rank = rank.clamp(1, values.len());
    Ok(sorted[rank - 1])
}

/// Mean after dropping `floor(f * n)` observations from each end,
/// `f` in `[0, 0.5)`. `f = 0` is the plain mean.
pub fn trimmed_mean(values: &[f64], f: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample("trimmed_mean"));
    }
    if !(0.0..0.5).contains(&f) {
        return Err(Error::InvalidParameter(format!(
            "trim fraction must lie in [0, 0.5), got {f}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let drop = (f * sorted.len() as f64).floor() as usize;
    let kept = &sorted[drop..sorted.len() - drop];
    debug_assert!(!kept.is_empty());
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Jitter integer counts into continuous values: `z_k = count_k +
/// phi_inv(U_k)` with one uniform per cell, drawn in index order from
/// `stream`. `floor(z_k)` always recovers `count_k`.
pub fn jitter_counts(
    counts: &[u64],
    jitter: JitterFunction,
    stream: RandomStream,
) -> Vec<f64> {
    use rand::Rng;
    let mut rng = stream.rng();
    counts
        .iter()
        .map(|&c| c as f64 + jitter.phi_inv(rng.random::<f64>()))
        .collect()
}

/// Standard estimator: total count over window volume. Zero for an empty
/// pattern.
pub fn estimate_std<const D: usize>(pattern: &PointPattern<D>) -> EstimatorResult {
    EstimatorResult {
        id: EstimatorId::Std,
        value: pattern.len() as f64 / pattern.window().volume(),
        meta: EstimatorMeta::Std,
    }
}

/// Jittered median estimator on an `s x s` tessellation.
pub fn estimate_median_j<const D: usize>(
    pattern: &PointPattern<D>,
    cells_per_side: u32,
    jitter: JitterFunction,
    stream: RandomStream,
) -> Result<EstimatorResult> {
    Ok(median_j_pair(pattern, cells_per_side, jitter, stream)?.0)
}

/// Rule-of-thumb variant: the jittered median estimate minus `1/(3 c_n)`,
/// which removes the leading term of the median offset under Poisson-like
/// counts. Uses the same jittered sample as [`estimate_median_j`] would.
pub fn estimate_median_j2<const D: usize>(
    pattern: &PointPattern<D>,
    cells_per_side: u32,
    jitter: JitterFunction,
    stream: RandomStream,
) -> Result<EstimatorResult> {
    Ok(median_j_pair(pattern, cells_per_side, jitter, stream)?.1)
}

/// Both median estimators from one jittered sample. The second value is
/// exactly the first minus `1/(3 * cell_volume)` by construction.
pub fn median_j_pair<const D: usize>(
    pattern: &PointPattern<D>,
    cells_per_side: u32,
    jitter: JitterFunction,
    stream: RandomStream,
) -> Result<(EstimatorResult, EstimatorResult)> {
    if cells_per_side < 2 {
        return Err(Error::InvalidParameter(format!(
            "median estimator needs cells_per_side >= 2, got {cells_per_side}"
        )));
    }
    jitter.validate()?;
    let tess = Tessellation::new(*pattern.window(), cells_per_side)?;
    let counts = count_per_cell(pattern, &tess)?;
    let sample = JitteredSample::new(
        jitter_counts(&counts, jitter, stream),
        tess.cell_volume(),
    )?;
    let meta = EstimatorMeta::Median {
        cells_per_side,
        cell_count: tess.cell_count(),
        cell_volume: tess.cell_volume(),
        jitter,
        stream,
    };
    let value = sample.intensity();
    let first = EstimatorResult { id: EstimatorId::MedianJ, value, meta: meta.clone() };
    let second = EstimatorResult {
        id: EstimatorId::MedianJ2,
        value: value - 1.0 / (3.0 * tess.cell_volume()),
        meta,
    };
    Ok((first, second))
}
