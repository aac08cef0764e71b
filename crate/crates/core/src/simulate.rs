//! Three cross-validating simulators for the self-attracting diffusion.
//!
//! - `gaussian_exact`: draws the solution on the grid directly from its
//!   Gaussian law (mean `z + nu m(t)`, covariance from quadrature), so the
//!   sampled vector has no time-discretization error;
//! - `representation`: discretizes the Wiener-type integral
//!   `X_t = z + int_0^t h(t,s) dB^H_s + nu m(t)` by midpoint Riemann sums
//!   against exact fBm increments (`H > 1/2` makes the Young sums converge);
//! - `euler`: integrates the path-dependent SDE itself; for the linear drift
//!   a running sum turns the double-integral drift into `O(1)` work per step.
//!
//! `representation` and `euler` consume bit-identical driving increments for
//! the same `(seed, path_index)`, which makes strong-error comparisons
//! meaningful path by path.

use crate::error::{Error, Result};
use crate::fbm::{FbmGenerator, FbmMethod};
use crate::gausscov::{cross_cov, sigma2_increment, QuadratureSpec};
use crate::kernel::{drift_mean, h_unchecked};
use crate::params::{ModelParams, TimeGrid};
use crate::rng::path_rng;
use crate::sigtable::SigmaTable;
use crate::stats::{mean, sample_var};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::sync::Arc;

/// Simulation method tag carried by each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMethod {
    GaussianExact,
    Representation,
    Euler,
}

/// A sampled trajectory of the diffusion; one value vector per dimension.
#[derive(Debug, Clone)]
pub struct DiffusionPath {
    pub grid: Arc<TimeGrid>,
    pub values: Vec<Vec<f64>>,
    pub params: ModelParams,
    pub method: SimMethod,
    pub seed: u64,
    pub path_index: u64,
}

impl DiffusionPath {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Drift specification for the Euler scheme.
#[derive(Clone)]
pub enum DriftSpec {
    /// The linear interaction `-a (X_s - X_u)` plus constant drift `nu`.
    Linear { a: f64, nu: f64 },
    /// General interaction `Phi(X_s - X_u)`; the stated Lipschitz constant
    /// drives the step-size guard.
    Custom {
        phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
    },
}

/// Exact sampling from the Gaussian law on the grid.
///
/// Covariances come from direct quadrature on small grids and from the
/// spot-checked interpolation table on large ones (a dense grid would need
/// `O(n^2)` double quadratures otherwise).
pub fn simulate_gaussian_exact(
    params: &ModelParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<Vec<DiffusionPath>> {
    let n = grid.len().saturating_sub(1);
    if n > 24 {
        let table = SigmaTable::build(params, &QuadratureSpec::table_grade())?;
        table.spot_check(100, seed ^ 0xc0ffee, quad)?;
        return simulate_gaussian_exact_table(params, grid, n_paths, seed, &table);
    }
    params.check_grid(grid)?;
    if n == 0 {
        return Err(Error::domain("gaussian_exact needs at least one nonzero grid point"));
    }
    let pts = &grid.points()[1..];
    // covariance of the centered values at the nonzero grid points
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let c = cross_cov(pts[i].max(pts[j]), pts[i].min(pts[j]), params, quad)?;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    sample_gaussian_paths(params, grid, n_paths, seed, cov)
}

/// Exact sampling with covariances served by a prebuilt (spot-checked)
/// table; required for dense grids where per-entry quadrature would be
/// prohibitive.
pub fn simulate_gaussian_exact_table(
    params: &ModelParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    table: &SigmaTable,
) -> Result<Vec<DiffusionPath>> {
    params.check_grid(grid)?;
    let n = grid.len() - 1;
    if n == 0 || n > 2048 {
        return Err(Error::domain("gaussian_exact needs 1..=2048 nonzero grid points"));
    }
    let pts = &grid.points()[1..];
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let c = table.cov(pts[i], pts[j]);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    sample_gaussian_paths(params, grid, n_paths, seed, cov)
}

fn sample_gaussian_paths(
    params: &ModelParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    cov: DMatrix<f64>,
) -> Result<Vec<DiffusionPath>> {
    let n = grid.len() - 1;
    let pts = &grid.points()[1..];
    let factor = psd_factor(cov)?;
    let means: Vec<f64> = pts
        .iter()
        .map(|&t| params.z + params.nu * drift_mean(t, params.a))
        .collect();
    let dim = params.dim;
    let grid = Arc::new(grid.clone());
    let params = *params;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx);
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let mut vals = Vec::with_capacity(n + 1);
                vals.push(params.z);
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += factor[(i, j)] * z[j];
                    }
                    vals.push(means[i] + acc);
                }
                values.push(vals);
            }
            DiffusionPath {
                grid: Arc::clone(&grid),
                values,
                params,
                method: SimMethod::GaussianExact,
                seed,
                path_index: idx,
            }
        })
        .collect())
}

/// Lower-triangular factor of a covariance matrix; falls back to an
/// eigenvalue clip when Cholesky fails within tolerance.
fn psd_factor(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if let Some(ch) = cov.clone().cholesky() {
        return Ok(ch.unpack());
    }
    let eig = cov.symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ev < -1e-8 * max_ev {
        return Err(Error::Numeric {
            what: "grid covariance is not positive semidefinite".into(),
            estimate: min_ev,
            indicator: 1e-8 * max_ev,
        });
    }
    let mut f = eig.eigenvectors;
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            f[(i, j)] *= s;
        }
    }
    Ok(f)
}

struct RepresentationTables {
    /// `h(t_k, (s_i + s_{i+1})/2)` for `i < k`, row-major lower triangle.
    h_mid: Vec<f64>,
    n: usize,
    mean_shift: Vec<f64>,
}

fn representation_tables(params: &ModelParams, grid: &TimeGrid) -> RepresentationTables {
    let pts = grid.points();
    let n = pts.len() - 1;
    let mut h_mid = vec![0.0; n * n];
    for k in 1..=n {
        let t = pts[k];
        for i in 0..k {
            let mid = 0.5 * (pts[i] + pts[i + 1]);
            h_mid[(k - 1) * n + i] = h_unchecked(t, mid, params.a);
        }
    }
    let mean_shift = pts
        .iter()
        .map(|&t| params.nu * drift_mean(t, params.a))
        .collect();
    RepresentationTables { h_mid, n, mean_shift }
}

fn driving_increments(
    generator: &FbmGenerator,
    rng: &mut ChaCha12Rng,
    out: &mut [f64],
) {
    generator.sample_increments_with(rng, out);
}

/// Midpoint Riemann discretization of the kernel representation.
pub fn simulate_representation(
    params: &ModelParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<DiffusionPath>> {
    params.check_grid(grid)?;
    if grid.uniform_step().is_none() {
        return Err(Error::Unsupported(
            "representation simulation requires a uniform grid".into(),
        ));
    }
    let tables = representation_tables(params, grid);
    let generator = FbmGenerator::new(grid, params.hurst, FbmMethod::Circulant)?;
    let n = tables.n;
    let dim = params.dim;
    let grid = Arc::new(grid.clone());
    let params = *params;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx);
            let mut incr = vec![0.0; n];
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                driving_increments(&generator, &mut rng, &mut incr);
                let mut vals = Vec::with_capacity(n + 1);
                vals.push(params.z);
                for k in 1..=n {
                    let row = &tables.h_mid[(k - 1) * n..(k - 1) * n + k];
                    let mut acc = 0.0;
                    for (h, db) in row.iter().zip(&incr) {
                        acc += h * db;
                    }
                    vals.push(params.z + acc + tables.mean_shift[k]);
                }
                values.push(vals);
            }
            DiffusionPath {
                grid: Arc::clone(&grid),
                values,
                params,
                method: SimMethod::Representation,
                seed,
                path_index: idx,
            }
        })
        .collect())
}

/// Euler scheme for the path-dependent SDE, driven by the same fBm
/// increments as `simulate_representation`.
pub fn simulate_euler(
    params: &ModelParams,
    drift: &DriftSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<DiffusionPath>> {
    params.check_grid(grid)?;
    let dt = grid
        .uniform_step()
        .ok_or_else(|| Error::Unsupported("euler simulation requires a uniform grid".into()))?;
    let t_end = grid.t_end();
    let lipschitz = match drift {
        DriftSpec::Linear { a, .. } => a * t_end,
        DriftSpec::Custom { lipschitz, .. } => *lipschitz,
    };
    if dt * lipschitz * t_end > 1.0 {
        return Err(Error::Stability(format!(
            "step {dt} too large for Lipschitz constant {lipschitz} over horizon {t_end}"
        )));
    }
    let generator = FbmGenerator::new(grid, params.hurst, FbmMethod::Circulant)?;
    let n = grid.len() - 1;
    let dim = params.dim;
    let grid = Arc::new(grid.clone());
    let params = *params;
    let drift = drift.clone();
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx);
            let mut incr = vec![0.0; n];
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                driving_increments(&generator, &mut rng, &mut incr);
                let mut vals = Vec::with_capacity(n + 1);
                vals.push(params.z);
                match &drift {
                    DriftSpec::Linear { a, nu } => {
                        let mut x = params.z;
                        let mut running = 0.0; // sum_{j<k} X_j dt
                        for (k, db) in incr.iter().enumerate() {
                            let t_k = k as f64 * dt;
                            let d = nu - a * (t_k * x - running);
                            running += x * dt;
                            x += db + dt * d;
                            vals.push(x);
                        }
                    }
                    DriftSpec::Custom { phi, .. } => {
                        let mut x = params.z;
                        for (k, db) in incr.iter().enumerate() {
                            let mut d = 0.0;
                            for j in 0..k {
                                d += phi(x - vals[j]) * dt;
                            }
                            x += db + dt * d;
                            vals.push(x);
                        }
                    }
                }
                values.push(vals);
            }
            DiffusionPath {
                grid: Arc::clone(&grid),
                values,
                params,
                method: SimMethod::Euler,
                seed,
                path_index: idx,
            }
        })
        .collect())
}

/// Per-time sample moments of an ensemble (dimension `dim`).
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub t: Vec<f64>,
    pub mean: Vec<f64>,
    pub se_mean: Vec<f64>,
    pub var: Vec<f64>,
    pub se_var: Vec<f64>,
    pub n_paths: usize,
}

pub fn moment_report(paths: &[DiffusionPath], dim: usize) -> MomentReport {
    let grid = &paths[0].grid;
    let n_paths = paths.len();
    let mut t = Vec::new();
    let mut m = Vec::new();
    let mut sem = Vec::new();
    let mut v = Vec::new();
    let mut sev = Vec::new();
    for (i, &ti) in grid.points().iter().enumerate() {
        let xs: Vec<f64> = paths.iter().map(|p| p.values[dim][i]).collect();
        let var = if i == 0 { 0.0 } else { sample_var(&xs) };
        t.push(ti);
        m.push(mean(&xs));
        sem.push((var / n_paths as f64).sqrt());
        v.push(var);
        // gaussian-sample standard error of the variance
        sev.push(var * (2.0 / (n_paths as f64 - 1.0)).sqrt());
    }
    MomentReport {
        t,
        mean: m,
        se_mean: sem,
        var: v,
        se_var: sev,
        n_paths,
    }
}

/// One row of the almost-sure convergence study.
#[derive(Debug, Clone)]
pub struct SupDecayRow {
    /// Window `[n, n+1]`.
    pub horizon: f64,
    pub epsilon: f64,
    /// Empirical `P(sup_{t in [n, n+1]} |X_t - X_hat_inf| > eps)`.
    pub sup_exceed_freq: f64,
    /// Empirical `P(|X_n - X_hat_inf| > eps)`.
    pub point_exceed_freq: f64,
    /// Gaussian tail bound `2 exp(-eps^2 / (2 sigma_Z^2))` with the
    /// quadrature variance `sigma_Z^2 = sigma^2_{T_end, n}`.
    pub gauss_bound: f64,
    pub n_paths: usize,
}

/// Empirical decay of sup-gaps toward the final-horizon value `X_hat_inf`.
pub fn sup_decay_study(
    params: &ModelParams,
    n_paths: usize,
    seed: u64,
    horizons: &[usize],
    epsilons: &[f64],
    steps_per_unit: usize,
    quad: &QuadratureSpec,
) -> Result<Vec<SupDecayRow>> {
    let max_h = *horizons.iter().max().ok_or_else(|| Error::domain("empty horizons"))? as f64;
    let t_end = max_h + 2.0;
    if t_end > params.t_max {
        return Err(Error::domain("horizons exceed the model horizon"));
    }
    let steps = (t_end * steps_per_unit as f64).round() as usize;
    let grid = TimeGrid::uniform(t_end, steps)?;
    let paths = simulate_representation(params, &grid, n_paths, seed)?;
    let pts = grid.points();
    let mut rows = Vec::new();
    for &nh in horizons {
        let nh_f = nh as f64;
        let lo = pts.partition_point(|&p| p < nh_f);
        let hi = pts.partition_point(|&p| p <= nh_f + 1.0);
        let sigma_z2 = sigma2_increment(t_end, nh_f, params, quad)?;
        for &eps in epsilons {
            let mut sup_n = 0usize;
            let mut pt_n = 0usize;
            for p in &paths {
                let xs = &p.values[0];
                let x_inf = *xs.last().unwrap();
                let sup = xs[lo..hi]
                    .iter()
                    .map(|&x| (x - x_inf).abs())
                    .fold(0.0f64, f64::max);
                if sup > eps {
                    sup_n += 1;
                }
                if (xs[lo] - x_inf).abs() > eps {
                    pt_n += 1;
                }
            }
            rows.push(SupDecayRow {
                horizon: nh_f,
                epsilon: eps,
                sup_exceed_freq: sup_n as f64 / n_paths as f64,
                point_exceed_freq: pt_n as f64 / n_paths as f64,
                gauss_bound: 2.0 * (-eps * eps / (2.0 * sigma_z2)).exp(),
                n_paths,
            });
        }
    }
    Ok(rows)
}

/// Mean of `X_t`: `z + nu m(t)` (used by tests and the moment checks).
pub fn exact_mean(params: &ModelParams, t: f64) -> f64 {
    params.z + params.nu * drift_mean(t, params.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::fbm_covariance;
    use crate::gausscov::sigma2;
    use crate::params::HurstIndex;
    use crate::stats::{ks_two_sample, ks_two_sample_critical, sample_cov, se_cov_gaussian};
    use approx::assert_relative_eq;

    fn params(a: f64, nu: f64, h: f64, t_max: f64, dim: usize) -> ModelParams {
        ModelParams::new(a, nu, 0.0, HurstIndex::new(h).unwrap(), t_max, dim).unwrap()
    }

    #[test]
    fn euler_reduces_to_fbm_when_a_zero() {
        let p = params(0.0, 0.0, 0.65, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let drift = DriftSpec::Linear { a: 0.0, nu: 0.0 };
        let paths = simulate_euler(&p, &drift, &grid, 2, 5).unwrap();
        // X = z + B^H exactly: regenerate the same driving noise
        let generator = FbmGenerator::new(&grid, p.hurst, FbmMethod::Circulant).unwrap();
        for path in &paths {
            let mut rng = path_rng(path.seed, path.path_index);
            let mut incr = vec![0.0; 64];
            generator.sample_increments_with(&mut rng, &mut incr);
            let mut acc = 0.0;
            for (k, d) in incr.iter().enumerate() {
                acc += d;
                assert_relative_eq!(path.values[0][k + 1], acc, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn representation_reduces_to_fbm_with_drift() {
        // a -> 0: X = z + B^H + nu t exactly (all kernel factors are 1)
        let p = params(0.0, 0.5, 0.6, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 32).unwrap();
        let paths = simulate_representation(&p, &grid, 1, 11).unwrap();
        let e_paths = simulate_euler(&p, &DriftSpec::Linear { a: 0.0, nu: 0.5 }, &grid, 1, 11).unwrap();
        for (r, e) in paths[0].values[0].iter().zip(&e_paths[0].values[0]) {
            assert_relative_eq!(r, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn custom_drift_matches_linear() {
        let p = params(1.0, 0.0, 0.6, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 128).unwrap();
        let lin = simulate_euler(&p, &DriftSpec::Linear { a: 1.0, nu: 0.0 }, &grid, 2, 3).unwrap();
        let phi = Arc::new(|x: f64| -x);
        let cus = simulate_euler(
            &p,
            &DriftSpec::Custom {
                phi,
                lipschitz: 1.0,
            },
            &grid,
            2,
            3,
        )
        .unwrap();
        for (a, b) in lin.iter().zip(&cus) {
            for (x, y) in a.values[0].iter().zip(&b.values[0]) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn euler_step_guard() {
        let p = params(8.0, 0.0, 0.6, 4.0, 1);
        let grid = TimeGrid::uniform(4.0, 16).unwrap();
        let r = simulate_euler(&p, &DriftSpec::Linear { a: 8.0, nu: 0.0 }, &grid, 1, 1);
        assert!(matches!(r, Err(Error::Stability(_))));
    }

    #[test]
    fn representation_and_euler_share_noise() {
        let p = params(1.0, 0.0, 0.6, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 256).unwrap();
        let r = simulate_representation(&p, &grid, 3, 21).unwrap();
        let e = simulate_euler(&p, &DriftSpec::Linear { a: 1.0, nu: 0.0 }, &grid, 3, 21).unwrap();
        // same driving noise => paths close in the strong sense
        for (pr, pe) in r.iter().zip(&e) {
            let max_gap = pr.values[0]
                .iter()
                .zip(&pe.values[0])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_gap < 0.05, "strong gap {max_gap}");
        }
    }

    #[test]
    fn gaussian_exact_matches_quadrature_variance() {
        let p = params(1.0, 0.0, 0.6, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let q = QuadratureSpec::default();
        let n_paths = 8000;
        let paths = simulate_gaussian_exact(&p, &grid, n_paths, 17, &q).unwrap();
        let xs: Vec<f64> = paths.iter().map(|p| p.values[0][8]).collect();
        let v = sample_var(&xs);
        let target = sigma2(1.0, &p, &q).unwrap();
        let se = target * (2.0 / (n_paths as f64 - 1.0)).sqrt();
        assert!((v - target).abs() < 4.0 * se, "{v} vs {target}");
    }

    #[test]
    fn gaussian_exact_fbm_reduction_covariance() {
        // a -> 0, nu = 0: the law is fBm
        let p = params(1e-12, 0.0, 0.7, 1.0, 1);
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let q = QuadratureSpec::default();
        let n_paths = 10_000;
        let paths = simulate_gaussian_exact(&p, &grid, n_paths, 23, &q).unwrap();
        let at = |i: usize| -> Vec<f64> { paths.iter().map(|p| p.values[0][i]).collect() };
        let (a, b) = (at(2), at(4));
        let c = sample_cov(&a, &b);
        let target = fbm_covariance(0.5, 1.0, p.hurst).unwrap();
        let se = se_cov_gaussian(sample_var(&a), sample_var(&b), c, n_paths);
        assert!((c - target).abs() < 4.0 * se);
    }

    #[test]
    fn mean_with_drift() {
        let p = ModelParams::new(1.0, 1.0, 0.5, HurstIndex::new(0.6).unwrap(), 1.0, 1).unwrap();
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let q = QuadratureSpec::default();
        let n_paths = 6000;
        let paths = simulate_gaussian_exact(&p, &grid, n_paths, 31, &q).unwrap();
        let rep = moment_report(&paths, 0);
        for (i, &t) in rep.t.iter().enumerate() {
            let target = exact_mean(&p, t);
            let tol = 4.0 * rep.se_mean[i] + 1e-12;
            assert!(
                (rep.mean[i] - target).abs() <= tol,
                "t={t}: {} vs {target}",
                rep.mean[i]
            );
        }
    }

    #[test]
    fn simulators_agree_in_law_small() {
        // moderate-size KS smoke test; the full-scale version lives in the
        // acceptance suite
        let p = params(1.0, 0.0, 0.6, 1.0, 1);
        let coarse = TimeGrid::uniform(1.0, 8).unwrap();
        let fine = TimeGrid::uniform(1.0, 256).unwrap();
        let q = QuadratureSpec::default();
        let n = 4000;
        let g = simulate_gaussian_exact(&p, &coarse, n, 41, &q).unwrap();
        let e = simulate_euler(&p, &DriftSpec::Linear { a: 1.0, nu: 0.0 }, &fine, n, 42).unwrap();
        let crit = ks_two_sample_critical(n, n, 0.01);
        for (ci, &t) in coarse.points().iter().enumerate().skip(1) {
            let fi = (t * 256.0).round() as usize;
            let xs: Vec<f64> = g.iter().map(|p| p.values[0][ci]).collect();
            let ys: Vec<f64> = e.iter().map(|p| p.values[0][fi]).collect();
            let d = ks_two_sample(&xs, &ys);
            assert!(d < crit * 1.2, "t={t}: KS {d} vs {crit}");
        }
    }

    #[test]
    fn dim2_paths_have_independent_components() {
        let p = params(1.0, 0.0, 0.6, 1.0, 2);
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let paths = simulate_representation(&p, &grid, 4000, 51).unwrap();
        assert_eq!(paths[0].dim(), 2);
        let a: Vec<f64> = paths.iter().map(|p| p.values[0][16]).collect();
        let b: Vec<f64> = paths.iter().map(|p| p.values[1][16]).collect();
        let c = sample_cov(&a, &b);
        let se = se_cov_gaussian(sample_var(&a), sample_var(&b), c, a.len());
        assert!(c.abs() < 4.0 * se, "components correlated: {c}");
    }
}
