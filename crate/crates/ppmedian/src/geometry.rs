//! Square observation windows, point patterns, and cubic-cell tessellations.
//!
//! A window is the centered cube `[-half_side, half_side]^D`; a tessellation
//! splits it into `cells_per_side^D` congruent cubes. Cells are half-open on
//! every axis with the window's maximal faces closed, so the per-cell counts
//! of any pattern on the window always partition the total count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered cube `[-half_side, half_side]^D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window<const D: usize> {
    half_side: f64,
}

impl<const D: usize> Window<D> {
    pub fn new(half_side: f64) -> Result<Self> {
        if D == 0 {
            return Err(Error::InvalidParameter("window dimension must be >= 1".into()));
        }
        if !(half_side > 0.0) || !half_side.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window half-side must be finite and > 0, got {half_side}"
            )));
        }
        Ok(Window { half_side })
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn dim(&self) -> usize {
        D
    }

    /// `(2 * half_side)^D`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_side).powi(D as i32)
    }

    /// Closed containment test.
    pub fn contains(&self, point: &[f64; D]) -> bool {
        point.iter().all(|c| c.abs() <= self.half_side && c.is_finite())
    }
}

/// A finite point configuration observed on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern<const D: usize> {
    window: Window<D>,
    points: Vec<[f64; D]>,
}

impl<const D: usize> PointPattern<D> {
    /// Validates that every point lies in the (closed) window.
    pub fn new(window: Window<D>, points: Vec<[f64; D]>) -> Result<Self> {
        for p in &points {
            if !window.contains(p) {
                let coords =
                    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
                return Err(Error::PointOutsideWindow(coords, window.half_side()));
            }
        }
        Ok(PointPattern { window, points })
    }

    pub fn window(&self) -> &Window<D> {
        &self.window
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance, or `None` for fewer than two points.
    /// Brute force; intended for diagnostics and tests.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let d2: f64 = (0..D)
                    .map(|k| {
                        let d = self.points[i][k] - self.points[j][k];
                        d * d
                    })
                    .sum();
                best = best.min(d2);
            }
        }
        Some(best.sqrt())
    }
}

/// Partition of a window into `cells_per_side^D` congruent cubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tessellation<const D: usize> {
    window: Window<D>,
    cells_per_side: u32,
}

impl<const D: usize> Tessellation<D> {
    pub fn new(window: Window<D>, cells_per_side: u32) -> Result<Self> {
        if cells_per_side == 0 {
            return Err(Error::InvalidParameter("cells_per_side must be >= 1".into()));
        }
        // Flat indices must fit in usize.
        let count = (cells_per_side as u128).pow(D as u32);
        if count > usize::MAX as u128 {
            return Err(Error::InvalidParameter(format!(
                "{cells_per_side}^{D} cells overflow the address space"
            )));
        }
        Ok(Tessellation { window, cells_per_side })
    }

    pub fn window(&self) -> &Window<D> {
        &self.window
    }

    pub fn cells_per_side(&self) -> u32 {
        self.cells_per_side
    }

    pub fn cell_count(&self) -> usize {
        (self.cells_per_side as usize).pow(D as u32)
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.window.half_side() / self.cells_per_side as f64
    }

    /// `window.volume() / cell_count`.
    pub fn cell_volume(&self) -> f64 {
        self.window.volume() / self.cell_count() as f64
    }

    /// Lower and upper corners of the cell with flat index `k`
    /// (axis 0 varies fastest).
    pub fn cell_bounds(&self, k: usize) -> ([f64; D], [f64; D]) {
        debug_assert!(k < self.cell_count());
        let s = self.cells_per_side as usize;
        let w = self.cell_width();
        let h = self.window.half_side();
        let mut lo = [0.0; D];
        let mut hi = [0.0; D];
        let mut rest = k;
        for d in 0..D {
            let i = rest % s;
            rest /= s;
            lo[d] = -h + i as f64 * w;
            hi[d] = -h + (i + 1) as f64 * w;
        }
        (lo, hi)
    }

    /// Flat cell index of a point in the window. Cells are half-open per
    /// axis; coordinates on the window's maximal face fall into the last
    /// cell of that axis.
    pub fn cell_index_of(&self, point: &[f64; D]) -> usize {
        let s = self.cells_per_side as usize;
        let w = self.cell_width();
        let h = self.window.half_side();
        let mut flat = 0usize;
        let mut stride = 1usize;
        for d in 0..D {
            let mut i = ((point[d] + h) / w).floor() as isize;
            if i < 0 {
                i = 0;
            }
            let i = (i as usize).min(s - 1);
            flat += i * stride;
            stride *= s;
        }
        flat
    }

    /// Iterate `(flat_index, lower_corner, upper_corner)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, [f64; D], [f64; D])> + '_ {
        (0..self.cell_count()).map(move |k| {
            let (lo, hi) = self.cell_bounds(k);
            (k, lo, hi)
        })
    }
}

/// Number of pattern points in each tessellation cell, indexed like
/// [`Tessellation::cell_bounds`]. The counts always sum to `pattern.len()`.
pub fn count_per_cell<const D: usize>(
    pattern: &PointPattern<D>,
    tess: &Tessellation<D>,
) -> Result<Vec<u64>> {
    if pattern.window() != tess.window() {
        return Err(Error::WindowMismatch(format!(
            "pattern half-side {} vs tessellation half-side {}",
            pattern.window().half_side(),
            tess.window().half_side()
        )));
    }
    let mut counts = vec![0u64; tess.cell_count()];
    for p in pattern.points() {
        counts[tess.cell_index_of(p)] += 1;
    }
    Ok(counts)
}
