//! The solution kernel of the linear self-attracting model.
//!
//! The model `X_t = B^H_t - a int_0^t int_0^s (X_s - X_u) du ds + nu t`
//! solves as a Wiener-type integral `X_t = z + int_0^t h(t,s) dB^H_s
//! + nu int_0^t h(t,s) ds` with the deterministic kernel
//!
//! ```text
//! h(t,s) = 1 - a s e^{a s^2/2} int_s^t e^{-a u^2/2} du   (t >= s, else 0).
//! ```
//!
//! All evaluations go through the Mills ratio `M(x)` so that no intermediate
//! exceeds `exp` of a bounded argument:
//!
//! ```text
//! h(t,s) = 1 - x_s [ M(x_s) - e^{(x_s^2 - x_t^2)/2} M(x_t) ],   x_s = s sqrt(a).
//! ```
//!
//! The `t -> inf` limit `h(s) = 1 - x_s M(x_s)` satisfies `0 < h(s) <= 1` and
//! decays like `1/(a s^2)`; in fact `h(s) <= 1/(a s^2)` holds for all `s > 0`
//! (Mills-ratio lower bound `M(x) > x/(x^2+1)`), which the tail estimates in
//! the covariance module rely on.

use crate::error::{Error, Result};
use crate::normal::{cdf, mills};
use crate::params::{ModelParams, TimeGrid};

fn check_kernel_args(t: f64, s: f64, a: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("kernel requires a > 0, got {a}")));
    }
    if s < 0.0 || t < 0.0 || !s.is_finite() || !t.is_finite() {
        return Err(Error::domain(format!("kernel times must be >= 0, got t={t}, s={s}")));
    }
    Ok(())
}

/// `h(t,s)`; returns 0 when `t < s`.
pub fn eval_h(t: f64, s: f64, a: f64) -> Result<f64> {
    check_kernel_args(t, s, a)?;
    Ok(h_unchecked(t, s, a))
}

/// `h(t,s)` without argument validation; accepts the degenerate `a = 0`
/// (where `h == 1` on `t >= s`).
#[inline]
pub(crate) fn h_unchecked(t: f64, s: f64, a: f64) -> f64 {
    if t < s {
        return 0.0;
    }
    if a == 0.0 {
        return 1.0;
    }
    let ra = a.sqrt();
    let xs = s * ra;
    let xt = t * ra;
    1.0 - xs * (mills(xs) - ((xs * xs - xt * xt) / 2.0).exp() * mills(xt))
}

/// Limit kernel `h(s) = lim_{t->inf} h(t,s) = 1 - x_s M(x_s)`.
pub fn eval_h_limit(s: f64, a: f64) -> Result<f64> {
    check_kernel_args(s, s, a)?;
    Ok(h_limit_unchecked(s, a))
}

#[inline]
pub(crate) fn h_limit_unchecked(s: f64, a: f64) -> f64 {
    let x = s * a.sqrt();
    1.0 - x * mills(x)
}

/// `h(t,s) - h(s) = x_s e^{(x_s^2 - x_t^2)/2} M(x_t)` for `s <= t`, evaluated
/// without cancellation (the direct subtraction loses all digits once the
/// gap falls below ~1e-16 of h itself).
#[inline]
pub fn limit_gap(t: f64, s: f64, a: f64) -> f64 {
    debug_assert!(s <= t);
    let ra = a.sqrt();
    let xs = s * ra;
    let xt = t * ra;
    xs * ((xs * xs - xt * xt) / 2.0).exp() * mills(xt)
}

/// `h(t_hi, u) - h(t_lo, u)` for `u <= t_lo <= t_hi` (non-positive, h is
/// non-increasing in its first argument), in the same cancellation-free form.
#[inline]
pub fn eval_h_diff(t_hi: f64, t_lo: f64, u: f64, a: f64) -> f64 {
    debug_assert!(u <= t_lo && t_lo <= t_hi);
    if a == 0.0 {
        return 0.0;
    }
    let ra = a.sqrt();
    let xu = u * ra;
    let xl = t_lo * ra;
    let xh = t_hi * ra;
    -xu * ((xu * xu - xl * xl) / 2.0).exp()
        * (mills(xl) - ((xl * xl - xh * xh) / 2.0).exp() * mills(xh))
}

/// `int_q^s h(u, q) du = s h(s,q) - q e^{-a(s^2-q^2)/2}` (exact; Fubini on the
/// kernel's inner integral). Used by the Tanaka drift term.
pub(crate) fn h_time_integral(s: f64, q: f64, a: f64) -> f64 {
    debug_assert!(q <= s);
    if a == 0.0 {
        return s - q;
    }
    s * h_unchecked(s, q, a) - q * (-a * (s * s - q * q) / 2.0).exp()
}

/// Mean response `m(t) = int_0^t h(t,s) ds = int_0^t e^{-a u^2/2} du`
/// (the two integrals coincide exactly; see `tests::drift_mean_identity`).
pub fn drift_mean(t: f64, a: f64) -> f64 {
    if a == 0.0 {
        return t;
    }
    let ra = a.sqrt();
    (2.0 * std::f64::consts::PI / a).sqrt() * (cdf(t * ra) - 0.5)
}

/// Difference of truncated kernels
/// `g(u) = h(t_upper,u) 1_{(0,t_upper]}(u) - h(t_lower,u) 1_{(0,t_lower]}(u)`.
///
/// `g` is smooth on `(0, t_lower)` and `(t_lower, t_upper)`, and jumps by
/// `h(t_lower, t_lower) = 1` at `u = t_lower` where the subtracted kernel's
/// support ends.
#[derive(Debug, Clone, Copy)]
pub struct KernelDifference {
    pub t_upper: f64,
    pub t_lower: f64,
    pub params: ModelParams,
}

impl KernelDifference {
    pub fn new(t_upper: f64, t_lower: f64, params: ModelParams) -> Result<Self> {
        if !(0.0 <= t_lower && t_lower <= t_upper && t_upper <= params.t_max * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "kernel difference needs 0 <= t_lower <= t_upper <= T, got ({t_lower}, {t_upper})"
            )));
        }
        Ok(KernelDifference {
            t_upper,
            t_lower,
            params,
        })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let a = self.params.a;
        if u > self.t_upper || u <= 0.0 {
            return 0.0;
        }
        if u > self.t_lower {
            h_unchecked(self.t_upper, u, a)
        } else {
            eval_h_diff(self.t_upper, self.t_lower, u, a)
        }
    }
}

/// Product-integration evaluation of the weighted-local-time weight
///
/// ```text
/// w(s) = 2H(2H-1) int_0^s h(s,m) (s-m)^{2H-2} dm.
/// ```
///
/// The singular factor is integrated exactly per cell (its moments are closed
/// forms); only `h(s, .)` is interpolated piecewise-linearly on a mesh graded
/// toward `m = s`. Successive mesh doublings with Richardson extrapolation
/// run until the requested relative tolerance. For `a = 0` the closed form
/// `2H s^{2H-1}` is returned.
pub fn eval_weight(s: f64, params: &ModelParams, quad: &crate::gausscov::QuadratureSpec) -> Result<f64> {
    let h = params.hurst;
    if s < 0.0 || s > params.t_max * (1.0 + 1e-12) {
        return Err(Error::domain(format!("weight time {s} outside [0, T]")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if params.a == 0.0 {
        return Ok(h.two_h() * s.powf(h.two_h() - 1.0));
    }
    let base = quad.cells_per_axis.max(8);
    let mut prev = weight_level(s, params, base, quad.grading);
    let mut prev_extrap = f64::NAN;
    for level in 1..=quad.max_refinements {
        let cur = weight_level(s, params, base << level, quad.grading);
        let extrap = cur + (cur - prev) / 3.0;
        let indicator = (cur - prev).abs() / 3.0;
        if indicator <= quad.abs_tol.max(quad.rel_tol * extrap.abs())
            || (!prev_extrap.is_nan()
                && (extrap - prev_extrap).abs() <= quad.abs_tol.max(quad.rel_tol * extrap.abs()))
        {
            return Ok(extrap);
        }
        prev = cur;
        prev_extrap = extrap;
    }
    Err(Error::Numeric {
        what: format!("weight quadrature at s = {s} did not reach tolerance"),
        estimate: prev_extrap,
        indicator: (prev_extrap - prev).abs(),
    })
}

fn weight_level(s: f64, params: &ModelParams, cells: usize, grading: f64) -> f64 {
    let h = params.hurst.value();
    let k = 2.0 * h - 1.0;
    let a = params.a;
    let n = cells;
    // nodes graded toward the singularity at m = s
    let mut m_prev = 0.0;
    let mut h_prev = h_unchecked(s, 0.0, a);
    let mut acc = 0.0;
    for j in 1..=n {
        let frac = (n - j) as f64 / n as f64;
        let m = s * (1.0 - frac.powf(grading));
        let hv = h_unchecked(s, m, a);
        let r0 = s - m_prev;
        let r1 = s - m;
        // exact moments of (s-m)^{2H-2} and m (s-m)^{2H-2} over [m_prev, m]
        let i0 = (r0.powf(k) - r1.powf(k)) / k;
        let i1 = s * i0 - (r0.powf(2.0 * h) - r1.powf(2.0 * h)) / (2.0 * h);
        let slope = (hv - h_prev) / (m - m_prev);
        let intercept = h_prev - slope * m_prev;
        acc += intercept * i0 + slope * i1;
        m_prev = m;
        h_prev = hv;
    }
    2.0 * h * k * acc
}

/// Tabulated weight `w(s)` on a grid, for occupation-time estimators and CSV
/// export.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub grid: TimeGrid,
    pub weights: Vec<f64>,
    pub params: ModelParams,
}

impl WeightTable {
    pub fn build(grid: &TimeGrid, params: &ModelParams, quad: &crate::gausscov::QuadratureSpec) -> Result<Self> {
        params.check_grid(grid)?;
        let weights = grid
            .points()
            .iter()
            .map(|&s| eval_weight(s, params, quad))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightTable {
            grid: grid.clone(),
            weights,
            params: *params,
        })
    }

    /// Linear interpolation between grid points.
    pub fn eval(&self, s: f64) -> f64 {
        let pts = self.grid.points();
        if s <= 0.0 {
            return self.weights[0];
        }
        if s >= self.grid.t_end() {
            return *self.weights.last().unwrap();
        }
        let idx = pts.partition_point(|&p| p <= s) - 1;
        let (p0, p1) = (pts[idx], pts[idx + 1]);
        let f = (s - p0) / (p1 - p0);
        self.weights[idx] * (1.0 - f) + self.weights[idx + 1] * f
    }
}

/// Integrals `int_s^t e^{-a u^2/2} du`, overflow-safe. Exposed for tests of
/// the kernel identities.
pub fn gaussian_band_integral(s: f64, t: f64, a: f64) -> f64 {
    debug_assert!(0.0 <= s && s <= t && a > 0.0);
    let ra = a.sqrt();
    (cdf(t * ra) - cdf(s * ra)) * (2.0 * std::f64::consts::PI / a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gausscov::QuadratureSpec;
    use crate::params::HurstIndex;
    use crate::quad1d::GaussLegendre;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(a: f64, h: f64, t_max: f64) -> ModelParams {
        ModelParams::new(a, 0.0, 0.0, HurstIndex::new(h).unwrap(), t_max, 1).unwrap()
    }

    /// Independent oracle: 64-point Gauss-Legendre for int_s^t e^{-a u^2/2} du,
    /// not going through the normal CDF.
    fn band_integral_oracle(s: f64, t: f64, a: f64) -> f64 {
        let gl = GaussLegendre::new(64);
        gl.integrate(s, t, |u| (-a * u * u / 2.0).exp())
    }

    #[test]
    fn h_trivial_values() {
        assert_eq!(eval_h(3.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(eval_h(2.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(eval_h(1.0, 2.0, 1.0).unwrap(), 0.0); // t < s
    }

    #[test]
    fn h_reference_value() {
        // 1 - e^{1/2} sqrt(2 pi) (Phi(2) - Phi(1)), frozen from the oracle below
        let expected = 1.0 - 1.0f64.exp().sqrt() * band_integral_oracle(1.0, 2.0, 1.0);
        assert_relative_eq!(expected, 0.4383406411938656, max_relative = 1e-12);
        assert_relative_eq!(eval_h(2.0, 1.0, 1.0).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn h_limit_reference_values() {
        assert_eq!(eval_h_limit(0.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            eval_h_limit(1.0, 1.0).unwrap(),
            0.34432045758120153,
            max_relative = 1e-13
        );
        // far tail behaves like 1/(a s^2)
        let v = eval_h_limit(100.0, 1.0).unwrap();
        assert!((v - 1e-4).abs() < 0.05 * 1e-4, "h(100) = {v}");
        // and is bounded by it
        for &s in &[0.5, 1.0, 3.0, 10.0, 50.0] {
            let v = eval_h_limit(s, 1.0).unwrap();
            assert!(v > 0.0 && v <= 1.0 / (s * s) + 1e-18);
        }
    }

    #[test]
    fn kernel_domain_errors() {
        assert!(eval_h(1.0, 0.5, 0.0).is_err());
        assert!(eval_h(1.0, 0.5, -1.0).is_err());
        assert!(eval_h(1.0, -0.5, 1.0).is_err());
        assert!(eval_h_limit(1.0, 0.0).is_err());
    }

    #[test]
    fn limit_gap_is_cancellation_free() {
        // |h(10,s) - h(s)| below 1e-20 for s <= 2, a = 1 (Gaussian tail)
        for &s in &[0.1, 0.5, 1.0, 1.5, 2.0] {
            let gap = limit_gap(10.0, s, 1.0);
            assert!(gap > 0.0 && gap < 1e-20, "gap({s}) = {gap:e}");
        }
        // consistency with the direct subtraction where that is well posed
        let direct = eval_h(6.0, 3.0, 1.0).unwrap() - eval_h_limit(3.0, 1.0).unwrap();
        assert_relative_eq!(limit_gap(6.0, 3.0, 1.0), direct, max_relative = 1e-8);
    }

    #[test]
    fn h_diff_matches_direct_subtraction() {
        let d = eval_h_diff(2.0, 1.0, 0.5, 1.0);
        let direct = eval_h(2.0, 0.5, 1.0).unwrap() - eval_h(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(d, direct, max_relative = 1e-12);
        assert!(d < 0.0);
    }

    #[test]
    fn kernel_difference_cases() {
        let p = params(1.0, 0.6, 4.0);
        let g = KernelDifference::new(2.0, 1.0, p).unwrap();
        assert_eq!(g.eval(2.5), 0.0); // u > t_upper
        // on (t_lower, t_upper] it is h(t_upper, u)
        assert_relative_eq!(g.eval(1.5), eval_h(2.0, 1.5, 1.0).unwrap(), max_relative = 1e-15);
        // u = 0.5: h(2,0.5) - h(1,0.5) to machine precision of two eval_h calls
        let expect = eval_h(2.0, 0.5, 1.0).unwrap() - eval_h(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(g.eval(0.5), expect, max_relative = 1e-10);
        // identical endpoints give the zero function
        let g0 = KernelDifference::new(1.0, 1.0, p).unwrap();
        for &u in &[0.2, 0.7, 1.0] {
            assert_eq!(g0.eval(u), 0.0);
        }
    }

    #[test]
    fn weight_closed_forms() {
        // a = 0 exact closed form
        let p0 = ModelParams::new(0.0, 0.0, 0.0, HurstIndex::new(0.75).unwrap(), 2.0, 1).unwrap();
        let q = QuadratureSpec::default();
        assert_relative_eq!(eval_weight(1.0, &p0, &q).unwrap(), 1.5, max_relative = 1e-14);
        // tiny-a limit reproduces it
        let p1 = params(1e-12, 0.75, 2.0);
        assert_relative_eq!(eval_weight(1.0, &p1, &q).unwrap(), 1.5, max_relative = 1e-9);
        // w(0) = 0
        assert_eq!(eval_weight(0.0, &p1, &q).unwrap(), 0.0);
    }

    #[test]
    fn weight_self_convergence() {
        // value within 1e-8 of a brute-force refinement with 10x more cells
        let p = params(1.0, 0.6, 2.0);
        let q = QuadratureSpec::default();
        let w = eval_weight(1.0, &p, &q).unwrap();
        let brute = weight_level(1.0, &p, 10 * 2048, q.grading);
        assert!((w - brute).abs() < 1e-8, "w={w}, brute={brute}");
        // frozen converged value for regression
        assert_relative_eq!(w, 1.1191003, max_relative = 1e-6);
    }

    #[test]
    fn drift_mean_identity() {
        // m(t) = int_0^t h(t,s) ds = int_0^t e^{-a u^2/2} du; check both sides
        // by independent quadrature of h itself.
        let gl = GaussLegendre::new(64);
        for &(t, a) in &[(1.0, 1.0), (2.0, 0.3), (0.5, 4.0)] {
            let lhs = gl.integrate(0.0, t, |s| h_unchecked(t, s, a));
            assert_relative_eq!(drift_mean(t, a), lhs, max_relative = 1e-10);
            assert_relative_eq!(
                drift_mean(t, a),
                band_integral_oracle(0.0, t, a),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn h_time_integral_identity() {
        let gl = GaussLegendre::new(64);
        for &(s, q, a) in &[(1.0, 0.3, 1.0), (2.0, 1.5, 0.7), (0.8, 0.0, 2.0)] {
            let direct = gl.integrate(q, s, |u| h_unchecked(u, q, a));
            assert_relative_eq!(h_time_integral(s, q, a), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn weight_table_interpolates() {
        let p = params(1.0, 0.6, 1.0);
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let tab = WeightTable::build(&grid, &p, &QuadratureSpec::default()).unwrap();
        assert_eq!(tab.weights[0], 0.0);
        assert!(tab.weights.iter().all(|&w| w >= 0.0));
        let mid = tab.eval(0.5 * (grid.points()[3] + grid.points()[4]));
        assert_relative_eq!(mid, 0.5 * (tab.weights[3] + tab.weights[4]), max_relative = 1e-15);
    }

    proptest! {
        /// e^{-a(t^2-s^2)/2} <= h(t,s) <= 1 and monotonicity in t.
        #[test]
        fn h_two_sided_bound(
            s in 0.0f64..5.0,
            dt in 0.0f64..5.0,
            a in prop::sample::select(vec![0.1f64, 1.0, 10.0]),
        ) {
            let t = s + dt;
            let h = eval_h(t, s, a).unwrap();
            let lo = (-a * (t * t - s * s) / 2.0).exp();
            prop_assert!(h <= 1.0 + 1e-14);
            prop_assert!(h >= lo - 1e-14 * lo.abs().max(1.0));
            // non-increasing in t
            let h2 = eval_h(t + 0.1, s, a).unwrap();
            prop_assert!(h2 <= h + 1e-14);
        }
    }

    #[test]
    fn h_bound_on_dense_grid() {
        // spot the two-sided bound on a 100x100 grid for a in {0.1, 1, 10}
        for &a in &[0.1, 1.0, 10.0] {
            for i in 0..100 {
                let s = i as f64 * 0.03;
                for j in 0..100 {
                    let t = s + j as f64 * 0.03;
                    let h = h_unchecked(t, s, a);
                    let lo = (-a * (t * t - s * s) / 2.0).exp();
                    assert!(h <= 1.0 + 1e-14 && h >= lo - 1e-12, "a={a} s={s} t={t}");
                }
            }
        }
    }
}
