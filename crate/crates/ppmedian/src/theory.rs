//! Exact and analytic reference quantities for validating the estimators.
//!
//! Everything here is deterministic numerics (no simulation) except the
//! Monte Carlo fallback for the asymptotic count variance and the CLT
//! diagnostic driver. The centerpiece is the exact jittered median: the
//! cdf of `Z = N + phi_inv(U)` for Poisson counts is piecewise smooth and
//! strictly increasing across each unit interval, so the median solves to
//! machine precision by bisection inside the unit interval that the
//! integer Poisson median pins down.

use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_std, jitter_counts, sample_quantile, JitterFunction,
};
use crate::geometry::{count_per_cell, Tessellation, Window};
use crate::models::{ModelConfig, ModelSimulator};
use crate::rng::RandomStream;

/// 97.5% standard-normal quantile, used for two-sided 95% intervals.
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Default slack factor in the mean-median-sd bias bound, which holds for
/// all sufficiently large cells at any positive slack.
pub const DEFAULT_BIAS_EPSILON: f64 = 0.01;

/// Natural-log Poisson probability mass `ln P(N = k)` for `N ~ Poisson(nu)`.
///
/// Log-space keeps the value finite for counts in the thousands, where the
/// direct formula overflows.
pub fn poisson_ln_pmf(k: u64, nu: f64) -> f64 {
    debug_assert!(nu >= 0.0 && nu.is_finite());
    if nu == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * nu.ln() - nu - ln_gamma(k as f64 + 1.0)
}

pub fn poisson_pmf(k: u64, nu: f64) -> f64 {
    poisson_ln_pmf(k, nu).exp()
}

/// `P(N <= k)` for `N ~ Poisson(nu)`, via the regularized upper incomplete
/// gamma identity `P(N <= k) = Q(k + 1, nu)`.
pub fn poisson_cdf(k: u64, nu: f64) -> f64 {
    debug_assert!(nu >= 0.0 && nu.is_finite());
    if nu == 0.0 {
        return 1.0;
    }
    gamma_ur(k as f64 + 1.0, nu)
}

/// Smallest integer `k` with `P(N <= k) >= 1/2` for `N ~ Poisson(nu)`.
///
/// The classical band `nu - ln 2 <= median <= nu + 1/3` keeps the search
/// within a couple of cdf evaluations of the starting guess.
pub fn poisson_integer_median(nu: f64) -> u64 {
    debug_assert!(nu >= 0.0 && nu.is_finite());
    let mut k = (nu - std::f64::consts::LN_2).floor().max(0.0) as u64;
    while poisson_cdf(k, nu) < 0.5 {
        k += 1;
    }
    while k > 0 && poisson_cdf(k - 1, nu) >= 0.5 {
        k -= 1;
    }
    k
}

/// Exact cdf of the jittered count `Z = N + phi_inv(U)`, `N ~ Poisson(nu)`,
/// `U ~ Uniform(0,1)`:
/// `F_Z(t) = P(N <= floor(t) - 1) + P(N = floor(t)) * phi(t - floor(t))`.
pub fn jittered_cdf(nu: f64, t: f64, jitter: JitterFunction) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let floor = t.floor();
    let k = floor as u64;
    let below = if k == 0 { 0.0 } else { poisson_cdf(k - 1, nu) };
    below + poisson_pmf(k, nu) * jitter.phi(t - floor)
}

/// Density of the jittered count:
/// `f_Z(t) = P(N = floor(t)) * phi'(t - floor(t))`.
/// With the identity jitter this is the plain pmf at `floor(t)`.
pub fn jittered_density(nu: f64, t: f64, jitter: JitterFunction) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let floor = t.floor();
    poisson_pmf(floor as u64, nu) * jitter.phi_prime(t - floor)
}

/// The integer and jittered medians of a Poisson(`nu`) count.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalMedianReport {
    pub nu: f64,
    /// Median of the raw count.
    pub integer_median: u64,
    /// Median of the jittered count: the root of `F_Z(t) = 1/2`, which
    /// always lies in `(integer_median, integer_median + 1]`.
    pub jittered_median: f64,
    /// `jittered_median - nu`.
    pub offset: f64,
    pub jitter: JitterFunction,
}

/// Solve `F_Z(t) = 1/2` exactly (bisection to 1e-12 interval width).
pub fn exact_jittered_median(nu: f64, jitter: JitterFunction) -> Result<TheoreticalMedianReport> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "jittered median needs a finite mean > 0, got {nu}"
        )));
    }
    jitter.validate()?;
    let m = poisson_integer_median(nu);
    // F_Z(m) = P(N <= m-1) < 1/2 <= P(N <= m) = F_Z(m+1): the root is
    // bracketed by one unit interval.
    let mut lo = m as f64;
    let mut hi = m as f64 + 1.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if jittered_cdf(nu, mid, jitter) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    let median = 0.5 * (lo + hi);
    Ok(TheoreticalMedianReport {
        nu,
        integer_median: m,
        jittered_median: median,
        offset: median - nu,
        jitter,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    Analytic,
    MonteCarlo,
}

/// The asymptotic count variance per unit volume:
/// `sigma^2 = lambda + lambda^2 * integral(g - 1)`, the limit of
/// `Var N(C) / |C|` over growing regions.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaSquared {
    pub value: f64,
    pub method: SigmaMethod,
    pub model: &'static str,
}

/// Closed-form / quadrature `sigma^2` for models whose pair correlation is
/// known: Poisson (`lambda`), log-Gaussian Cox (`g = exp(c)`), Thomas
/// (`integral(g-1) = 1/kappa`). Other models need the Monte Carlo route.
pub fn sigma_squared_analytic(config: &ModelConfig) -> Result<SigmaSquared> {
    config.validate()?;
    let value = match config {
        ModelConfig::Poisson { lambda } => *lambda,
        ModelConfig::Lgcp { lambda, sigma2, scale, .. } => {
            lambda + lambda * lambda * lgcp_pair_excess(*sigma2, *scale)
        }
        ModelConfig::Thomas { kappa, alpha, .. } => {
            let lambda = kappa * alpha;
            lambda + lambda * lambda / kappa
        }
        other => {
            return Err(Error::UnsupportedModel(format!(
                "no closed-form pair correlation for {}; use sigma_squared_mc",
                other.kind_label()
            )))
        }
    };
    Ok(SigmaSquared { value, method: SigmaMethod::Analytic, model: config.kind_label() })
}

/// `integral over R^2 of (exp(sigma2 * exp(-r/scale)) - 1)`, by composite
/// Simpson quadrature in polar coordinates. The integrand decays like
/// `exp(-r/scale)`, so `[0, 60 * scale]` captures it to machine precision.
fn lgcp_pair_excess(sigma2: f64, scale: f64) -> f64 {
    let upper = 60.0 * scale;
    let steps = 16_384usize; // even
    let h = upper / steps as f64;
    let f = |r: f64| {
        2.0 * std::f64::consts::PI * r * ((sigma2 * (-r / scale).exp()).exp_m1())
    };
    let mut sum = f(0.0) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0
}

/// Monte Carlo `sigma^2`: regress the sample variance of `N(C)` on `|C|`
/// through the origin over a ladder of centered sub-squares.
pub fn sigma_squared_mc(
    config: &ModelConfig,
    window: Window<2>,
    replications: usize,
    stream: RandomStream,
) -> Result<SigmaSquared> {
    if replications < 2 {
        return Err(Error::InvalidParameter(
            "variance estimation needs at least 2 replications".into(),
        ));
    }
    let sim = ModelSimulator::new(config.clone(), window)?;
    let fractions = [0.3, 0.45, 0.6, 0.75, 0.9];
    let halves: Vec<f64> = fractions.iter().map(|f| f * window.half_side()).collect();
    let mut counts = vec![Vec::with_capacity(replications); halves.len()];
    for rep in 0..replications {
        let pattern = sim.simulate(stream.substream(rep as u64))?;
        for (j, &a) in halves.iter().enumerate() {
            let c = pattern
                .points()
                .iter()
                .filter(|p| p[0].abs() <= a && p[1].abs() <= a)
                .count();
            counts[j].push(c as f64);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, &a) in halves.iter().enumerate() {
        let volume = (2.0 * a) * (2.0 * a);
        let var = sample_variance(&counts[j]);
        num += volume * var;
        den += volume * volume;
    }
    Ok(SigmaSquared {
        value: num / den,
        method: SigmaMethod::MonteCarlo,
        model: config.kind_label(),
    })
}

/// `sigma^2` by the best available route: analytic when the model's pair
/// correlation is known, Monte Carlo otherwise.
pub fn sigma_squared(
    config: &ModelConfig,
    window: Window<2>,
    replications: usize,
    stream: RandomStream,
) -> Result<SigmaSquared> {
    match sigma_squared_analytic(config) {
        Ok(s) => Ok(s),
        Err(Error::UnsupportedModel(_)) => {
            sigma_squared_mc(config, window, replications, stream)
        }
        Err(e) => Err(e),
    }
}

/// Relative MSE improvement over the standard estimator, in percent:
/// `(mse_std - mse_other) / mse_std * 100`.
pub fn gain(mse_std: f64, mse_other: f64) -> Result<f64> {
    if !(mse_std > 0.0) || !mse_std.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gain needs a positive reference MSE, got {mse_std}"
        )));
    }
    Ok((mse_std - mse_other) / mse_std * 100.0)
}

/// A priori bounds on the bias of the jittered median intensity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MedianBiasBound {
    /// Bound on `|Me_Z / c_n - lambda|` from `|Me - mean| <= sd` applied
    /// to `Z`: `(1/2 + sqrt(1/12 + (1+eps)^2 sigma^2 c_n)) / c_n`, of
    /// order `c_n^{-1/2}`.
    pub general: f64,
    /// For Poisson and Cox models only: `4 / (3 c_n)`, from the integer
    /// Poisson median band; of order `c_n^{-1}`.
    pub cox: Option<f64>,
    pub epsilon: f64,
    pub cell_volume: f64,
}

/// Bias bounds from a known `sigma^2`. `cox_family` enables the tighter
/// `4/(3 c_n)` band, valid when counts are (mixed) Poisson.
pub fn median_bias_bound_from_sigma(
    sigma2: f64,
    cell_volume: f64,
    epsilon: f64,
    cox_family: bool,
) -> Result<MedianBiasBound> {
    if !(cell_volume > 0.0) || !cell_volume.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cell volume must be finite and > 0, got {cell_volume}"
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon}"
        )));
    }
    let c = cell_volume;
    let general =
        (0.5 + (1.0 / 12.0 + (1.0 + epsilon).powi(2) * sigma2 * c).sqrt()) / c;
    Ok(MedianBiasBound {
        general,
        cox: cox_family.then_some(4.0 / (3.0 * c)),
        epsilon,
        cell_volume: c,
    })
}

/// Bias bounds for a model with analytic `sigma^2`, at the default epsilon.
pub fn median_bias_bound(config: &ModelConfig, cell_volume: f64) -> Result<MedianBiasBound> {
    let sigma2 = sigma_squared_analytic(config)?.value;
    let cox_family =
        matches!(config, ModelConfig::Poisson { .. } | ModelConfig::Lgcp { .. });
    median_bias_bound_from_sigma(sigma2, cell_volume, DEFAULT_BIAS_EPSILON, cox_family)
}

/// One window size of the CLT diagnostic.
#[derive(Clone, Debug, Serialize)]
pub struct CltDiagnosticsRow {
    pub half_side: f64,
    pub cells_per_side: u32,
    pub cell_volume: f64,
    pub replications: usize,
    /// Sample variance of `sqrt(k_n)(F_hat(Me_Z) - 1/2)`; limit 1/4. Needs
    /// the exact `Me_Z`, so it is reported for Poisson models only.
    pub var_cdf_statistic: Option<f64>,
    /// Sample variance of `sqrt(|W|)(lambda_J - lambda)`; limit
    /// `pi sigma^2 / 2`.
    pub var_scaled_error: f64,
    pub target_scaled_variance: f64,
    /// `Var(lambda_J) / Var(lambda_std)`; limit `pi/2`.
    pub variance_ratio: f64,
    /// `sqrt(c_n) P(N = floor(lambda c_n))`, exact; Poisson only.
    pub density_scaled: Option<f64>,
    /// `(2 pi sigma^2)^{-1/2}`, the limit of `density_scaled`.
    pub density_limit: f64,
    /// Coverage of `lambda_J ± z_{.975} sqrt(pi sigma^2 / (2 |W|))`.
    pub ci_coverage: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CltDiagnostics {
    pub model: &'static str,
    pub jitter: JitterFunction,
    pub sigma2: SigmaSquared,
    pub rows: Vec<CltDiagnosticsRow>,
}

/// Monte Carlo check of the asymptotic claims about the jittered median:
/// the normalized empirical cdf at the true median, the scaled estimation
/// error against `pi sigma^2 / 2`, the variance ratio against `pi/2`, the
/// exact local-limit quantity `sqrt(c_n) P(N = floor(lambda c_n))`, and
/// normal-interval coverage.
///
/// Needs a model with known intensity and analytic `sigma^2` (Poisson,
/// LGCP, or Thomas). 500+ replications give stable variance estimates.
pub fn clt_diagnostics(
    config: &ModelConfig,
    half_sides: &[f64],
    cells_per_side: u32,
    replications: usize,
    jitter: JitterFunction,
    stream: RandomStream,
) -> Result<CltDiagnostics> {
    if half_sides.is_empty() {
        return Err(Error::InvalidParameter("no window sizes given".into()));
    }
    if replications < 2 {
        return Err(Error::InvalidParameter(
            "diagnostics need at least 2 replications".into(),
        ));
    }
    let lambda = config.intensity().ok_or_else(|| {
        Error::UnsupportedModel(format!(
            "CLT diagnostics need a model with known intensity, not {}",
            config.kind_label()
        ))
    })?;
    let sigma2 = sigma_squared_analytic(config)?;
    let k_n = (cells_per_side as f64).powi(2);
    let limit_sd = (std::f64::consts::PI * sigma2.value / 2.0).sqrt();

    let mut rows = Vec::with_capacity(half_sides.len());
    for (h_idx, &half) in half_sides.iter().enumerate() {
        let window = Window::<2>::new(half)?;
        let sim = ModelSimulator::new(config.clone(), window)?;
        let tess = Tessellation::new(window, cells_per_side)?;
        let c_n = tess.cell_volume();
        let exact_median = match config {
            ModelConfig::Poisson { .. } => {
                Some(exact_jittered_median(lambda * c_n, jitter)?.jittered_median)
            }
            _ => None,
        };

        let mut cdf_stats = Vec::with_capacity(replications);
        let mut median_js = Vec::with_capacity(replications);
        let mut stds = Vec::with_capacity(replications);
        let mut covered = 0usize;
        let ci_half_width = Z_975 * limit_sd / window.volume().sqrt();
        for rep in 0..replications {
            let base = (h_idx as u64) << 40 | (rep as u64) << 1;
            let pattern = sim.simulate(stream.substream(base))?;
            let counts = count_per_cell(&pattern, &tess)?;
            let z = jitter_counts(&counts, jitter, stream.substream(base | 1));
            let lambda_j = sample_quantile(&z, 0.5)? / c_n;
            median_js.push(lambda_j);
            stds.push(estimate_std(&pattern).value);
            if let Some(me) = exact_median {
                let at_or_below = z.iter().filter(|v| **v <= me).count() as f64;
                cdf_stats
                    .push(k_n.sqrt() * (at_or_below / k_n - 0.5));
            }
            if (lambda_j - lambda).abs() <= ci_half_width {
                covered += 1;
            }
        }

        let var_j = sample_variance(&median_js);
        let var_std = sample_variance(&stds);
        let lambda_cell = lambda * c_n;
        rows.push(CltDiagnosticsRow {
            half_side: half,
            cells_per_side,
            cell_volume: c_n,
            replications,
            var_cdf_statistic: exact_median.map(|_| sample_variance(&cdf_stats)),
            var_scaled_error: window.volume() * var_j,
            target_scaled_variance: limit_sd * limit_sd,
            variance_ratio: var_j / var_std,
            density_scaled: match config {
                ModelConfig::Poisson { .. } => {
                    Some(c_n.sqrt() * poisson_pmf(lambda_cell.floor() as u64, lambda_cell))
                }
                _ => None,
            },
            density_limit: 1.0 / (2.0 * std::f64::consts::PI * sigma2.value).sqrt(),
            ci_coverage: covered as f64 / replications as f64,
        });
    }
    Ok(CltDiagnostics { model: config.kind_label(), jitter, sigma2, rows })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
