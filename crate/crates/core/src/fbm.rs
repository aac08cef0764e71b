//! Fractional Brownian motion: covariance structure and exact sampling.
//!
//! Two independent constructions cross-validate each other: circulant
//! embedding of the increment autocovariance (Davies-Harte, `O(n log n)`,
//! uniform grids) and dense Cholesky of the increment covariance (any grid,
//! reference method for n <= 2048). Both draw path `i` from the substream
//! `(seed, i)`, so ensembles are reproducible independently of path count
//! and thread count.

use crate::error::{Error, Result};
use crate::params::{HurstIndex, TimeGrid};
use crate::rng::{fill_standard_normal, path_rng};
use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Relative tolerance below which negative circulant eigenvalues are clipped
/// to zero; anything larger is a method error.
const EIGEN_CLIP_REL: f64 = 1e-10;

/// `E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: HurstIndex) -> Result<f64> {
    if s < 0.0 || t < 0.0 {
        return Err(Error::domain("fbm_covariance needs nonnegative times"));
    }
    let th = hurst.two_h();
    Ok(0.5 * (t.powf(th) + s.powf(th) - (t - s).abs().powf(th)))
}

/// Autocovariance of unit-step fBm increments at lag `k`, scaled by `dt^{2H}`:
/// `dt^{2H} (|k+1|^{2H} + |k-1|^{2H} - 2 k^{2H}) / 2`.
pub fn fgn_covariance(k: usize, dt: f64, hurst: HurstIndex) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::domain("fgn_covariance needs dt > 0"));
    }
    let th = hurst.two_h();
    let k = k as f64;
    Ok(dt.powf(th) * 0.5 * ((k + 1.0).powf(th) + (k - 1.0).abs().powf(th) - 2.0 * k.powf(th)))
}

/// Path generation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    /// Davies-Harte circulant embedding; requires a uniform grid.
    Circulant,
    /// Dense Cholesky of the increment covariance; any grid, n <= 2048.
    Cholesky,
}

/// A sampled fBm trajectory.
#[derive(Debug, Clone)]
pub struct FbmPath {
    pub grid: Arc<TimeGrid>,
    pub values: Vec<f64>,
    pub hurst: HurstIndex,
    pub seed: u64,
    pub path_index: u64,
}

enum Backend {
    Circulant {
        /// `sqrt(lambda_k / M)` of the circulant embedding.
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        /// Lower factor of the increment covariance.
        factor: DMatrix<f64>,
    },
}

/// Reusable generator holding the precomputed spectral or Cholesky data
/// (read-only after construction; sampling is `&self`).
pub struct FbmGenerator {
    grid: Arc<TimeGrid>,
    hurst: HurstIndex,
    method: FbmMethod,
    backend: Backend,
}

impl FbmGenerator {
    pub fn new(grid: &TimeGrid, hurst: HurstIndex, method: FbmMethod) -> Result<Self> {
        let n_incr = grid.len().saturating_sub(1);
        if n_incr == 0 {
            return Err(Error::domain("fBm generation needs at least one increment"));
        }
        let backend = match method {
            FbmMethod::Circulant => {
                let dt = grid.uniform_step().ok_or_else(|| {
                    Error::Unsupported(
                        "circulant embedding requires a uniform grid; use cholesky".into(),
                    )
                })?;
                let m = 2 * n_incr;
                // first row of the circulant: [r_0 .. r_{n}, r_{n-1} .. r_1]
                let mut row = Vec::with_capacity(m);
                for k in 0..=n_incr {
                    row.push(fgn_covariance(k, dt, hurst)?);
                }
                for k in (1..n_incr).rev() {
                    row.push(row[k]);
                }
                debug_assert_eq!(row.len(), m);
                let mut planner = FftPlanner::new();
                let fwd = planner.plan_fft_forward(m);
                let mut buf: Vec<Complex<f64>> =
                    row.iter().map(|&r| Complex::new(r, 0.0)).collect();
                fwd.process(&mut buf);
                let max_ev = buf.iter().map(|c| c.re).fold(0.0f64, f64::max);
                let min_ev = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
                if min_ev < -EIGEN_CLIP_REL * max_ev {
                    return Err(Error::Method(format!(
                        "circulant embedding has negative eigenvalue {min_ev:e} \
                         (relative {:e}); fall back to the cholesky method",
                        min_ev / max_ev
                    )));
                }
                let scale = buf
                    .iter()
                    .map(|c| (c.re.max(0.0) / m as f64).sqrt())
                    .collect();
                let fft = planner.plan_fft_inverse(m);
                Backend::Circulant { scale, fft }
            }
            FbmMethod::Cholesky => {
                if n_incr > 2048 {
                    return Err(Error::Unsupported(
                        "cholesky generation is limited to 2048 grid points".into(),
                    ));
                }
                let pts = grid.points();
                let th = hurst.two_h();
                let cov_b = |u: f64, v: f64| {
                    0.5 * (u.powf(th) + v.powf(th) - (u - v).abs().powf(th))
                };
                let mut cov = DMatrix::<f64>::zeros(n_incr, n_incr);
                for i in 0..n_incr {
                    for j in 0..n_incr {
                        // Cov(B_{t_{i+1}}-B_{t_i}, B_{t_{j+1}}-B_{t_j})
                        cov[(i, j)] = cov_b(pts[i + 1], pts[j + 1]) - cov_b(pts[i + 1], pts[j])
                            - cov_b(pts[i], pts[j + 1])
                            + cov_b(pts[i], pts[j]);
                    }
                }
                let factor = cov.cholesky().ok_or_else(|| Error::Numeric {
                    what: "increment covariance is not positive definite after rounding".into(),
                    estimate: f64::NAN,
                    indicator: f64::NAN,
                })?;
                Backend::Cholesky {
                    factor: factor.unpack(),
                }
            }
        };
        Ok(FbmGenerator {
            grid: Arc::new(grid.clone()),
            hurst,
            method,
            backend,
        })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    /// Increments of path `(seed, path_index)`, written into `out`
    /// (`grid.len() - 1` values).
    pub fn sample_increments(&self, seed: u64, path_index: u64, out: &mut [f64]) {
        let mut rng = path_rng(seed, path_index);
        self.sample_increments_with(&mut rng, out);
    }

    /// Increments drawn from an already positioned substream; consumes a
    /// fixed number of normals, so several consecutive draws (one per
    /// dimension) stay aligned across simulators.
    pub fn sample_increments_with(&self, rng: &mut rand_chacha::ChaCha12Rng, out: &mut [f64]) {
        let n_incr = self.grid.len() - 1;
        assert_eq!(out.len(), n_incr);
        match &self.backend {
            Backend::Circulant { scale, fft } => {
                let m = scale.len();
                let mut z = vec![0.0; m];
                fill_standard_normal(rng, &mut z);
                // Hermitian-symmetric complex Gaussian with E|Z_k|^2 = 1
                let mut buf = vec![Complex::new(0.0, 0.0); m];
                buf[0] = Complex::new(z[0], 0.0);
                buf[m / 2] = Complex::new(z[1], 0.0);
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for k in 1..m / 2 {
                    let re = z[2 * k] * inv_sqrt2;
                    let im = z[2 * k + 1] * inv_sqrt2;
                    buf[k] = Complex::new(re, im);
                    buf[m - k] = Complex::new(re, -im);
                }
                for (b, &s) in buf.iter_mut().zip(scale) {
                    *b *= s;
                }
                fft.process(&mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o = b.re;
                }
            }
            Backend::Cholesky { factor } => {
                let mut z = vec![0.0; n_incr];
                fill_standard_normal(rng, &mut z);
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += factor[(i, j)] * z[j];
                    }
                    *o = acc;
                }
            }
        }
    }

    /// Full path `(seed, path_index)` starting at 0.
    pub fn sample_path(&self, seed: u64, path_index: u64) -> FbmPath {
        let n_incr = self.grid.len() - 1;
        let mut incr = vec![0.0; n_incr];
        self.sample_increments(seed, path_index, &mut incr);
        let mut values = Vec::with_capacity(self.grid.len());
        values.push(0.0);
        let mut acc = 0.0;
        for d in incr {
            acc += d;
            values.push(acc);
        }
        FbmPath {
            grid: Arc::clone(&self.grid),
            values,
            hurst: self.hurst,
            seed,
            path_index,
        }
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }
}

/// Generate `n_paths` fBm paths in parallel (path `i` depends only on
/// `(seed, i)`).
pub fn generate_fbm(
    grid: &TimeGrid,
    hurst: HurstIndex,
    seed: u64,
    n_paths: usize,
    method: FbmMethod,
) -> Result<Vec<FbmPath>> {
    if n_paths == 0 {
        return Err(Error::domain("n_paths must be >= 1"));
    }
    let generator = FbmGenerator::new(grid, hurst, method)?;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| generator.sample_path(seed, i))
        .collect())
}
