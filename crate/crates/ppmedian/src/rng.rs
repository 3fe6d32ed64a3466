//! Reproducible random streams and stationary Gaussian field sampling.
//!
//! Randomness is addressed, never shared: every stochastic operation takes a
//! [`RandomStream`], a (seed, stream index) pair mapped onto a counter-based
//! generator (ChaCha8). Substream creation is O(1) and two streams with
//! different indices produce independent output, so replications can be
//! assigned streams up front and evaluated on any number of workers with
//! bitwise-identical results.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the pixel count of a sampled field grid.
pub const MAX_FIELD_PIXELS: u64 = 1 << 24;

/// Address of a reproducible random stream: a master seed plus a 64-bit
/// stream index into the generator's counter space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        RandomStream { seed, stream_index: 0 }
    }

    /// Stream `index` of the same seed. Indices are absolute, not nested:
    /// `s.substream(a).substream(b)` equals `s.substream(b)`.
    pub fn substream(self, index: u64) -> Self {
        RandomStream { seed: self.seed, stream_index: index }
    }

    /// Instantiate the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// O(1) substream constructor; see [`RandomStream::substream`].
pub fn substream(seed: u64, index: u64) -> RandomStream {
    RandomStream { seed, stream_index: index }
}

/// Isotropic exponential covariance `sigma2 * exp(-r / scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialCovariance {
    pub sigma2: f64,
    pub scale: f64,
}

impl ExponentialCovariance {
    pub fn new(sigma2: f64, scale: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "covariance sigma2 must be finite and >= 0, got {sigma2}"
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "covariance scale must be finite and > 0, got {scale}"
            )));
        }
        Ok(ExponentialCovariance { sigma2, scale })
    }

    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        self.sigma2 * (-r / self.scale).exp()
    }
}

/// A stationary Gaussian field sampled on a square pixel grid covering
/// `[-half_side, half_side]^2`. `values` is row-major: index `iy * pixels_per_side + ix`.
#[derive(Clone, Debug)]
pub struct GridField {
    pub half_side: f64,
    pub pixels_per_side: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
    /// Smallest eigenvalue of the torus embedding before clipping.
    pub min_eigenvalue: f64,
    /// Number of eigenvalues clipped to zero; nonzero values are reported by
    /// callers as a warning, not an error.
    pub clipped_eigenvalues: usize,
}

impl GridField {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.pixels_per_side + ix]
    }

    pub fn pixel_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            -self.half_side + (ix as f64 + 0.5) * self.spacing,
            -self.half_side + (iy as f64 + 0.5) * self.spacing,
        ]
    }
}

/// Reusable circulant-embedding sampler for one (window, spacing, covariance)
/// combination. Construction factorizes the torus covariance once; each
/// [`FieldSampler::sample`] call costs one complex FFT.
pub struct FieldSampler {
    half_side: f64,
    mean: f64,
    pixels_per_side: usize,
    spacing: f64,
    embedding_side: usize,
    sqrt_eigenvalues: Vec<f64>,
    min_eigenvalue: f64,
    clipped: usize,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl FieldSampler {
    /// `spacing` is a request: the grid snaps to an integer pixel count per
    /// side, so the actual spacing is at most the requested one.
    pub fn new(
        half_side: f64,
        spacing: f64,
        mean: f64,
        cov: ExponentialCovariance,
    ) -> Result<Self> {
        if !(half_side > 0.0) || !half_side.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field half-side must be finite and > 0, got {half_side}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field spacing must be finite and > 0, got {spacing}"
            )));
        }
        let side = 2.0 * half_side;
        let m = (side / spacing).ceil() as u64;
        let m = m.max(1);
        if m * m > MAX_FIELD_PIXELS {
            return Err(Error::FieldTooLarge { pixels: m * m, limit: MAX_FIELD_PIXELS });
        }
        let m = m as usize;
        let h = side / m as f64;
        let emb = 2 * m;

        // Torus covariance kernel on the embedding grid; wrapped lags keep it
        // symmetric, which makes its DFT real.
        let mut planner = rustfft::FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(emb);
        let fft_inverse = planner.plan_fft_inverse(emb);
        let mut kernel = vec![Complex::new(0.0, 0.0); emb * emb];
        for ky in 0..emb {
            let wy = ky.min(emb - ky) as f64 * h;
            for kx in 0..emb {
                let wx = kx.min(emb - kx) as f64 * h;
                kernel[ky * emb + kx] = Complex::new(cov.eval(wx.hypot(wy)), 0.0);
            }
        }
        fft2_in_place(&mut kernel, emb, &fft_forward);

        let mut sqrt_eigenvalues = vec![0.0; emb * emb];
        let mut min_eigenvalue = f64::INFINITY;
        let mut clipped = 0usize;
        for (s, k) in sqrt_eigenvalues.iter_mut().zip(kernel.iter()) {
            let eig = k.re;
            min_eigenvalue = min_eigenvalue.min(eig);
            if eig < 0.0 {
                clipped += 1;
            } else {
                *s = eig.sqrt();
            }
        }

        Ok(FieldSampler {
            half_side,
            mean,
            pixels_per_side: m,
            spacing: h,
            embedding_side: emb,
            sqrt_eigenvalues,
            min_eigenvalue,
            clipped,
            fft_inverse,
        })
    }

    pub fn pixels_per_side(&self) -> usize {
        self.pixels_per_side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn clipped_eigenvalues(&self) -> usize {
        self.clipped
    }

    /// Draw one field. Deterministic in `stream`.
    pub fn sample(&self, stream: RandomStream) -> GridField {
        self.sample_with(&mut stream.rng())
    }

    /// Draw one field from an already-positioned generator, leaving the
    /// generator ready for whatever consumes the field next.
    pub fn sample_with(&self, rng: &mut ChaCha8Rng) -> GridField {
        let emb = self.embedding_side;
        let m = self.pixels_per_side;
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eigenvalues
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut *rng);
                let im: f64 = StandardNormal.sample(&mut *rng);
                Complex::new(re * s, im * s)
            })
            .collect();
        fft2_in_place(&mut buf, emb, &self.fft_inverse);

        // Real part of F^H (sqrt(eig) * noise) / emb is N(0, covariance).
        let norm = 1.0 / emb as f64;
        let mut values = Vec::with_capacity(m * m);
        for iy in 0..m {
            for ix in 0..m {
                values.push(self.mean + buf[iy * emb + ix].re * norm);
            }
        }
        GridField {
            half_side: self.half_side,
            pixels_per_side: m,
            spacing: self.spacing,
            values,
            min_eigenvalue: self.min_eigenvalue,
            clipped_eigenvalues: self.clipped,
        }
    }
}

/// One-shot convenience wrapper around [`FieldSampler`].
pub fn sample_gaussian_field(
    half_side: f64,
    spacing: f64,
    mean: f64,
    cov: ExponentialCovariance,
    stream: RandomStream,
) -> Result<GridField> {
    Ok(FieldSampler::new(half_side, spacing, mean, cov)?.sample(stream))
}

/// In-place 2D FFT of a square row-major buffer: transform rows, transpose,
/// transform rows, transpose back.
fn fft2_in_place(buf: &mut [Complex<f64>], side: usize, fft: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(buf.len(), side * side);
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(side) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, side);
    for row in buf.chunks_exact_mut(side) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, side);
}

fn transpose_square(buf: &mut [Complex<f64>], side: usize) {
    for i in 0..side {
        for j in (i + 1)..side {
            buf.swap(i * side + j, j * side + i);
        }
    }
}

/// Draw a Poisson count with mean `mean` (exact zero for `mean == 0`).
pub(crate) fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite());
    if mean == 0.0 {
        return 0;
    }
    let dist = rand_distr::Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Uniform point in `[-half_side, half_side]^D`.
pub(crate) fn uniform_point<const D: usize>(half_side: f64, rng: &mut ChaCha8Rng) -> [f64; D] {
    let mut p = [0.0; D];
    for c in p.iter_mut() {
        *c = rng.random_range(-half_side..half_side);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_is_bitwise_reproducible() {
        let a: Vec<u64> = substream(9, 4).rng().random_iter().take(64).collect();
        let b: Vec<u64> = substream(9, 4).rng().random_iter().take(64).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_indices_give_distinct_output() {
        let a: Vec<u64> = substream(9, 0).rng().random_iter().take(8).collect();
        let b: Vec<u64> = substream(9, 1).rng().random_iter().take(8).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn substream_indices_are_absolute() {
        let s = RandomStream::new(5);
        assert_eq!(s.substream(3).substream(7), s.substream(7));
        assert_eq!(substream(5, 7), s.substream(7));
    }

    // Batch means over adjacent substreams look uncorrelated: 1000 streams,
    // 1e4 uniforms each; lag-1 correlation of the means stays within 4 sigma
    // of zero under independence.
    #[test]
    fn substream_batch_means_uncorrelated() {
        const STREAMS: usize = 1000;
        const DRAWS: usize = 10_000;
        let means: Vec<f64> = (0..STREAMS)
            .map(|k| {
                let mut rng = substream(42, k as u64).rng();
                let sum: f64 = (0..DRAWS).map(|_| rng.random::<f64>()).sum();
                sum / DRAWS as f64
            })
            .collect();
        let grand = means.iter().sum::<f64>() / STREAMS as f64;
        let sd_mean = (1.0f64 / 12.0 / DRAWS as f64).sqrt();
        assert!(
            (grand - 0.5).abs() < 4.0 * sd_mean / (STREAMS as f64).sqrt(),
            "grand mean {grand} too far from 1/2"
        );

        let centered: Vec<f64> = means.iter().map(|m| m - grand).collect();
        let var: f64 = centered.iter().map(|c| c * c).sum::<f64>() / STREAMS as f64;
        let cov: f64 = centered
            .windows(2)
            .map(|w| w[0] * w[1])
            .sum::<f64>()
            / (STREAMS - 1) as f64;
        let corr = cov / var;
        assert!(
            corr.abs() < 4.0 / ((STREAMS - 1) as f64).sqrt(),
            "adjacent-stream correlation {corr} outside 4 sigma"
        );
    }

    #[test]
    fn covariance_rejects_bad_parameters() {
        assert!(ExponentialCovariance::new(-0.1, 1.0).is_err());
        assert!(ExponentialCovariance::new(0.5, 0.0).is_err());
        assert!(ExponentialCovariance::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn field_grid_snaps_to_requested_spacing() {
        let cov = ExponentialCovariance::new(0.5, 0.02).unwrap();
        let s = FieldSampler::new(1.0, 0.011, 0.0, cov).unwrap();
        // 2.0 / 0.011 = 181.8..., so 182 pixels and spacing 2/182 <= 0.011.
        assert_eq!(s.pixels_per_side(), 182);
        assert!(s.spacing() <= 0.011);
        assert!((s.spacing() * 182.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn field_pixel_budget_enforced() {
        let cov = ExponentialCovariance::new(0.5, 0.02).unwrap();
        let err = match FieldSampler::new(1.0, 1e-5, 0.0, cov) {
            Ok(_) => panic!("a 2e5 x 2e5 pixel field must be rejected"),
            Err(e) => e,
        };
        match err {
            Error::FieldTooLarge { pixels, limit } => {
                assert!(pixels > limit);
                assert_eq!(limit, MAX_FIELD_PIXELS);
            }
            other => panic!("expected FieldTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn field_sampling_is_deterministic() {
        let cov = ExponentialCovariance::new(0.5, 0.02).unwrap();
        let s = FieldSampler::new(0.1, 0.01, 1.0, cov).unwrap();
        let a = s.sample(substream(11, 3));
        let b = s.sample(substream(11, 3));
        assert_eq!(a.values, b.values);
        let c = s.sample(substream(11, 4));
        assert_ne!(a.values, c.values);
    }

    // Monte-Carlo oracle for the embedding: pooled pixel mean, variance, and
    // the covariance at one correlation length match the target values. The
    // tolerances are 4 sigma bands computed as if each field contributed one
    // independent observation, which is conservative because statistics are
    // pooled over many pixels per field.
    #[test]
    fn field_moments_match_covariance() {
        const REPS: usize = 1500;
        let sigma2 = 0.5;
        let scale = 0.02;
        let mu = 3.0;
        let cov = ExponentialCovariance::new(sigma2, scale).unwrap();
        let sampler = FieldSampler::new(0.1, 0.01, mu, cov).unwrap();
        let m = sampler.pixels_per_side();
        assert_eq!(m, 20);
        // Lag of two pixels = 0.02 = one correlation length.
        let lag = 2usize;
        let target_cov = sigma2 * (-1.0f64).exp();

        let (mut sum, mut count) = (0.0, 0usize);
        let mut fields = Vec::with_capacity(REPS);
        for r in 0..REPS {
            let f = sampler.sample(substream(2024, r as u64));
            assert_eq!(f.clipped_eigenvalues, 0, "embedding unexpectedly clipped");
            sum += f.values.iter().sum::<f64>();
            count += f.values.len();
            fields.push(f);
        }
        let mean = sum / count as f64;
        let tol_mean = 4.0 * (sigma2 / REPS as f64).sqrt();
        assert!((mean - mu).abs() < tol_mean, "mean {mean} vs {mu} (tol {tol_mean})");

        let (mut ss, mut sc, mut pairs) = (0.0, 0.0, 0usize);
        for f in &fields {
            for iy in 0..m {
                for ix in 0..m {
                    let v = f.value(ix, iy) - mean;
                    ss += v * v;
                    if ix + lag < m {
                        sc += v * (f.value(ix + lag, iy) - mean);
                        pairs += 1;
                    }
                }
            }
        }
        let var = ss / (REPS * m * m) as f64;
        let cov_hat = sc / pairs as f64;
        let tol_var = 4.0 * sigma2 * (2.0 / REPS as f64).sqrt();
        let tol_cov = 4.0 * sigma2 * (2.0 / REPS as f64).sqrt();
        assert!((var - sigma2).abs() < tol_var, "variance {var} vs {sigma2} (tol {tol_var})");
        assert!(
            (cov_hat - target_cov).abs() < tol_cov,
            "covariance {cov_hat} vs {target_cov} (tol {tol_cov})"
        );
    }

    #[test]
    fn one_shot_field_matches_reusable_sampler() {
        let cov = ExponentialCovariance::new(0.3, 0.05).unwrap();
        let a = sample_gaussian_field(0.2, 0.02, -1.0, cov, substream(8, 1)).unwrap();
        let b = FieldSampler::new(0.2, 0.02, -1.0, cov).unwrap().sample(substream(8, 1));
        assert_eq!(a.values, b.values);
        assert_eq!(a.pixels_per_side, b.pixels_per_side);
    }
}
