//! Simulation and robust intensity estimation for stationary spatial point
//! processes on square windows.
//!
//! The central estimator divides the window into a small number of congruent
//! cells, jitters the per-cell counts into continuous values, and rescales
//! the sample median of those values. Unlike the standard count estimator it
//! keeps a bounded breakdown point, so a localized clump of extra points or
//! an emptied corner moves it far less than the count average. The crate
//! bundles everything needed to study that trade-off end to end:
//!
//! - [`models`]: samplers for homogeneous Poisson, log-Gaussian Cox,
//!   Neyman-Scott (Thomas and Matern-cluster) and Poisson hard-core
//!   processes;
//! - [`estimators`]: the standard count estimator, the jittered median
//!   estimator with its rule-of-thumb bias correction, and a Voronoi
//!   trimmed-mean competitor;
//! - [`contamination`]: reproducible point addition and deletion schemes;
//! - [`theory`]: exact Poisson and jittered medians, asymptotic variance
//!   constants, bias bounds, and central-limit diagnostics;
//! - [`experiments`]: a replication engine with paired contamination
//!   settings, CSV reports, and a run manifest;
//! - [`cli`]: the thin command-line front end.
//!
//! # Quick start
//!
//! ```
//! use ppmedian::estimators::{estimate_median_j, estimate_std, JitterFunction};
//! use ppmedian::geometry::Window;
//! use ppmedian::models::ModelConfig;
//! use ppmedian::rng::RandomStream;
//!
//! let window = Window::new(1.0).unwrap();
//! let model = ModelConfig::Poisson { lambda: 100.0 };
//! let pattern = model.simulate(window, RandomStream::new(7)).unwrap();
//! let std = estimate_std(&pattern);
//! let med = estimate_median_j(
//!     &pattern, 3, JitterFunction::Identity, RandomStream::new(7).substream(1),
//! )
//! .unwrap();
//! assert!((std.value - 100.0).abs() < 30.0);
//! assert!((med.value - 100.0).abs() < 40.0);
//! ```
//!
//! # Runnable examples
//!
//! Each major capability has a dedicated example; run with
//! `cargo run --release --example <name>`:
//!
//! - `simulate_models`: draw one pattern per model and summarize it
//! - `jittered_median`: the count/jitter/median pipeline step by step
//! - `contamination_robustness`: bias and gain under added or deleted points
//! - `voronoi_estimator`: Voronoi cell areas and the trimmed-mean estimator
//! - `exact_medians`: exact integer and jittered medians over a mean grid
//! - `clt_diagnostics`: empirical variances against their limit targets
//! - `experiment_engine`: the full replication engine and its CSV reports

pub mod cli;
pub mod contamination;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod models;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
