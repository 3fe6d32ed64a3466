//! Voronoi tessellation clipped to the window, and the trimmed-mean
//! intensity estimator built from inverse cell areas.
//!
//! The estimator evaluates a regular grid of dummy points, maps each dummy
//! to the cell of its nearest site, discards dummies whose cell touches the
//! window boundary (those cells are truncated, so their inverse areas are
//! biased), and returns a symmetric trimmed mean of the inverse areas.
//! Duplicate sites are merged before the diagram is built.

use crate::error::{Error, Result};
use crate::estimators::{trimmed_mean, EstimatorId, EstimatorMeta, EstimatorResult};
use crate::geometry::PointPattern;

/// Dummy-grid resolution used by the experiments engine unless configured.
pub const DEFAULT_GRID_PER_SIDE: u32 = 200;

/// Voronoi cells of the (merged) sites of a pattern, clipped to its window.
#[derive(Clone, Debug)]
pub struct VoronoiCells {
    /// Distinct sites in first-occurrence order.
    pub sites: Vec<[f64; 2]>,
    /// Area of each site's clipped cell. Sums to the window volume.
    pub areas: Vec<f64>,
    /// Whether the cell's closure touches the window boundary.
    pub border: Vec<bool>,
    half_side: f64,
}

impl VoronoiCells {
    pub fn interior_count(&self) -> usize {
        self.border.iter().filter(|b| !**b).count()
    }

    pub fn border_count(&self) -> usize {
        self.border.iter().filter(|b| **b).count()
    }
}

/// Compute the clipped Voronoi cells of a non-empty pattern.
pub fn voronoi_cell_areas(pattern: &PointPattern<2>) -> Result<VoronoiCells> {
    if pattern.is_empty() {
        return Err(Error::EmptySample("Voronoi diagram needs at least one point"));
    }
    let half = pattern.window().half_side();
    let sites = merge_duplicates(pattern.points());
    let grid = SiteGrid::build(&sites, half);
    let boundary_tol = 1e-9 * half;

    let mut areas = Vec::with_capacity(sites.len());
    let mut border = Vec::with_capacity(sites.len());
    let mut poly = Vec::with_capacity(16);
    let mut tmp = Vec::with_capacity(16);
    for i in 0..sites.len() {
        clipped_cell(&sites, &grid, i, half, &mut poly, &mut tmp);
        areas.push(polygon_area(&poly));
        border.push(
            poly.iter()
                .any(|v| v[0].abs() >= half - boundary_tol || v[1].abs() >= half - boundary_tol),
        );
    }
    Ok(VoronoiCells { sites, areas, border, half_side: half })
}

/// Voronoi trimmed-mean estimator on a `grid_per_side^2` dummy grid.
///
/// Fails when every cell touches the boundary (no interior observations).
pub fn estimate_voronoi(
    pattern: &PointPattern<2>,
    grid_per_side: u32,
    trim_fraction: f64,
) -> Result<EstimatorResult> {
    if grid_per_side == 0 {
        return Err(Error::InvalidParameter("dummy grid needs at least one pixel".into()));
    }
    let cells = voronoi_cell_areas(pattern)?;
    let values = dummy_inverse_areas(&cells, grid_per_side);
    if values.is_empty() {
        return Err(Error::EstimationFailed(
            "no interior Voronoi cells; every cell touches the window boundary".into(),
        ));
    }
    let value = trimmed_mean(&values, trim_fraction)?;
    Ok(EstimatorResult {
        id: EstimatorId::Voronoi,
        value,
        meta: EstimatorMeta::Voronoi {
            grid_per_side,
            trim_fraction,
            sites: cells.sites.len(),
            border_cells: cells.border_count(),
        },
    })
}

/// Inverse cell areas observed at the dummy points whose nearest site has an
/// interior cell. Exposed within the crate so the experiments engine can
/// reuse one diagram for several trim fractions.
pub(crate) fn dummy_inverse_areas(cells: &VoronoiCells, grid_per_side: u32) -> Vec<f64> {
    let half = cells.half_side;
    let grid = SiteGrid::build(&cells.sites, half);
    let g = grid_per_side as usize;
    let step = 2.0 * half / g as f64;
    let mut values = Vec::with_capacity(g * g);
    for iy in 0..g {
        let y = -half + (iy as f64 + 0.5) * step;
        for ix in 0..g {
            let x = -half + (ix as f64 + 0.5) * step;
            let nearest = grid.nearest(&cells.sites, [x, y]);
            if !cells.border[nearest] {
                values.push(1.0 / cells.areas[nearest]);
            }
        }
    }
    values
}

fn merge_duplicates(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if seen.insert([p[0].to_bits(), p[1].to_bits()]) {
            out.push(*p);
        }
    }
    out
}

/// Uniform bucket grid over the window for neighbor and nearest-site
/// queries; roughly one site per bucket.
struct SiteGrid {
    per_side: usize,
    cell_size: f64,
    half: f64,
    buckets: Vec<Vec<u32>>,
}

impl SiteGrid {
    fn build(sites: &[[f64; 2]], half: f64) -> Self {
        let per_side = (sites.len() as f64).sqrt().ceil().max(1.0) as usize;
        let cell_size = 2.0 * half / per_side as f64;
        let mut buckets = vec![Vec::new(); per_side * per_side];
        let mut grid = SiteGrid { per_side, cell_size, half, buckets: Vec::new() };
        for (i, p) in sites.iter().enumerate() {
            let (bx, by) = grid.bucket_of(*p);
            buckets[by * per_side + bx].push(i as u32);
        }
        grid.buckets = buckets;
        grid
    }

    fn bucket_of(&self, p: [f64; 2]) -> (usize, usize) {
        let clamp = |c: f64| {
            (((c + self.half) / self.cell_size).floor() as isize)
                .clamp(0, self.per_side as isize - 1) as usize
        };
        (clamp(p[0]), clamp(p[1]))
    }

    /// Visit every site in the Chebyshev ring `ring` around bucket
    /// `(bx, by)`.
    fn ring_sites(&self, bx: usize, by: usize, ring: usize, mut visit: impl FnMut(u32)) {
        let n = self.per_side as isize;
        let (bx, by) = (bx as isize, by as isize);
        let r = ring as isize;
        let mut scan = |x: isize, y: isize| {
            if x >= 0 && x < n && y >= 0 && y < n {
                for &i in &self.buckets[(y * n + x) as usize] {
                    visit(i);
                }
            }
        };
        if ring == 0 {
            scan(bx, by);
            return;
        }
        for x in (bx - r)..=(bx + r) {
            scan(x, by - r);
            scan(x, by + r);
        }
        for y in (by - r + 1)..=(by + r - 1) {
            scan(bx - r, y);
            scan(bx + r, y);
        }
    }

    /// Index of the site nearest to `q`; ties break to the lower index.
    fn nearest(&self, sites: &[[f64; 2]], q: [f64; 2]) -> usize {
        let (bx, by) = self.bucket_of(q);
        let mut best = usize::MAX;
        let mut best_d2 = f64::INFINITY;
        for ring in 0..=self.per_side {
            if ring >= 1 {
                let reach = (ring - 1) as f64 * self.cell_size;
                if best < usize::MAX && best_d2 < reach * reach {
                    break;
                }
            }
            self.ring_sites(bx, by, ring, |i| {
                let s = sites[i as usize];
                let d2 = (s[0] - q[0]).powi(2) + (s[1] - q[1]).powi(2);
                if d2 < best_d2 || (d2 == best_d2 && (i as usize) < best) {
                    best_d2 = d2;
                    best = i as usize;
                }
            });
        }
        debug_assert!(best < sites.len());
        best
    }
}

/// Build the clipped Voronoi cell of `sites[i]` into `poly`.
///
/// Starts from the window rectangle and cuts with the perpendicular
/// bisector of every relevant neighbor. A neighbor farther than twice the
/// current max site-to-vertex distance cannot touch the cell, so ring
/// scanning stops once the next ring lies beyond that radius.
fn clipped_cell(
    sites: &[[f64; 2]],
    grid: &SiteGrid,
    i: usize,
    half: f64,
    poly: &mut Vec<[f64; 2]>,
    tmp: &mut Vec<[f64; 2]>,
) {
    let p = sites[i];
    poly.clear();
    poly.extend_from_slice(&[[-half, -half], [half, -half], [half, half], [-half, half]]);
    let mut max_r2 = max_dist2(poly, p);
    let (bx, by) = grid.bucket_of(p);
    for ring in 0..=grid.per_side {
        if ring >= 1 {
            let reach = (ring - 1) as f64 * grid.cell_size;
            if reach * reach > 4.0 * max_r2 {
                break;
            }
        }
        let mut dirty = false;
        grid.ring_sites(bx, by, ring, |j| {
            if j as usize == i {
                return;
            }
            let q = sites[j as usize];
            let d2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if d2 > 4.0 * max_r2 {
                return;
            }
            // Keep side of the bisector containing p:
            // (q - p) . x <= (q - p) . (p + q) / 2.
            let n = [q[0] - p[0], q[1] - p[1]];
            let c = (n[0] * (p[0] + q[0]) + n[1] * (p[1] + q[1])) / 2.0;
            clip_halfplane(poly, tmp, n, c);
            dirty = true;
        });
        if dirty {
            max_r2 = max_dist2(poly, p);
        }
    }
}

fn max_dist2(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    poly.iter()
        .map(|v| (v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2))
        .fold(0.0, f64::max)
}

/// Sutherland-Hodgman clip of a convex polygon by `n . x <= c`.
fn clip_halfplane(poly: &mut Vec<[f64; 2]>, tmp: &mut Vec<[f64; 2]>, n: [f64; 2], c: f64) {
    tmp.clear();
    let len = poly.len();
    for k in 0..len {
        let a = poly[k];
        let b = poly[(k + 1) % len];
        let da = n[0] * a[0] + n[1] * a[1] - c;
        let db = n[0] * b[0] + n[1] * b[1] - c;
        if da <= 0.0 {
            tmp.push(a);
            if db > 0.0 {
                tmp.push(intersect(a, b, da, db));
            }
        } else if db <= 0.0 {
            tmp.push(intersect(a, b, da, db));
        }
    }
    std::mem::swap(poly, tmp);
}

fn intersect(a: [f64; 2], b: [f64; 2], da: f64, db: f64) -> [f64; 2] {
    let t = da / (da - db);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    twice.abs() / 2.0
}
